use super::{Builtin, SetDescription};
use crate::error::{Error, Result};

/// Parses the colon/pipe set grammar. Positions in errors are byte offsets into the trimmed text.
pub fn parse_set(text: &str) -> Result<SetDescription> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let set = p.set()?;
    if p.pos != p.src.len() {
        return Err(Error::syntax(p.pos, "unexpected trailing input"));
    }
    Ok(set)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn eat(&mut self, token: &str) -> bool {
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(Error::syntax(self.pos, format!("expected '{token}'")))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn unsigned(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::syntax(start, "expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::syntax(start, "integer out of range"))
    }

    fn signed(&mut self) -> Result<i64> {
        let start = self.pos;
        let negative = self.eat("-");
        if !negative {
            self.eat("+");
        }
        let magnitude = self.unsigned()?;
        let value =
            i64::try_from(magnitude).map_err(|_| Error::syntax(start, "offset out of range"))?;
        Ok(if negative { -value } else { value })
    }

    fn positive(&mut self) -> Result<u64> {
        let start = self.pos;
        let v = self.unsigned()?;
        if v == 0 {
            return Err(Error::syntax(start, "expected a positive integer"));
        }
        Ok(v)
    }

    fn set(&mut self) -> Result<SetDescription> {
        let start = self.pos;
        if self.eat("finite:{") {
            return self.finite_body();
        }
        if self.eat("ap:") {
            let first = self.positive()?;
            self.expect(",")?;
            let step = self.positive()?;
            return Ok(SetDescription::Ap { first, step });
        }
        if self.eat("builtin:") {
            return self.builtin();
        }
        if self.eat("complement:") {
            return Ok(self.set()?.complement());
        }
        if self.eat("union:") {
            let a = self.set()?;
            self.expect("|")?;
            let b = self.set()?;
            return Ok(a.union(b));
        }
        if self.eat("intersect:") {
            let a = self.set()?;
            self.expect("|")?;
            let b = self.set()?;
            return Ok(a.intersect(b));
        }
        if self.eat("shift:") {
            let s = self.set()?;
            self.expect(",")?;
            let offset = self.signed()?;
            return Ok(s.shift(offset));
        }
        Err(Error::syntax(
            start,
            "expected one of finite:, ap:, builtin:, complement:, union:, intersect:, shift:",
        ))
    }

    fn finite_body(&mut self) -> Result<SetDescription> {
        let mut values: Vec<u64> = Vec::new();
        if self.eat("}") {
            return Ok(SetDescription::Finite(values));
        }
        loop {
            let start = self.pos;
            let lo = self.positive()?;
            let hi = if self.eat("..") { self.positive()? } else { lo };
            if hi < lo {
                return Err(Error::syntax(start, "empty range"));
            }
            if values.last().is_some_and(|&last| last >= lo) {
                return Err(Error::syntax(
                    start,
                    "finite lists must be strictly increasing",
                ));
            }
            if hi - lo > super::ENUMERATION_CAP {
                return Err(Error::syntax(start, "range too long"));
            }
            values.extend(lo..=hi);
            if self.eat("}") {
                return Ok(SetDescription::Finite(values));
            }
            self.expect(",")?;
        }
    }

    fn builtin(&mut self) -> Result<SetDescription> {
        let start = self.pos;
        let b = if self.eat("squares") {
            Builtin::Squares
        } else if self.eat("powers2") {
            Builtin::Powers2
        } else if self.eat("nu2_ge(") {
            let c = self.unsigned()?;
            let c = u32::try_from(c).map_err(|_| Error::syntax(start, "valuation out of range"))?;
            self.expect(")")?;
            Builtin::Nu2Ge(c)
        } else if self.eat("dyadic_blocks(") {
            let sel = self.set()?;
            self.expect(")")?;
            Builtin::DyadicBlocks(Box::new(sel))
        } else {
            return Err(Error::syntax(
                start,
                "unknown builtin (squares, powers2, nu2_ge(c), dyadic_blocks(set))",
            ));
        };
        Ok(SetDescription::Builtin(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_cases() {
        assert_eq!(
            parse_set("ap:2,2").unwrap(),
            SetDescription::Ap { first: 2, step: 2 }
        );
        assert_eq!(
            parse_set("complement:builtin:squares").unwrap(),
            SetDescription::squares().complement()
        );
        assert_eq!(
            parse_set("union:finite:{1,5}|ap:3,4").unwrap(),
            SetDescription::Finite(vec![1, 5]).union(SetDescription::Ap { first: 3, step: 4 })
        );
        assert_eq!(
            parse_set("builtin:dyadic_blocks(ap:2,2)").unwrap(),
            SetDescription::dyadic_blocks(SetDescription::Ap { first: 2, step: 2 })
        );
        assert_eq!(
            parse_set("shift:ap:2,2,-3").unwrap(),
            SetDescription::Ap { first: 2, step: 2 }.shift(-3)
        );
        assert_eq!(
            parse_set("finite:{1..4,9}").unwrap(),
            SetDescription::Finite(vec![1, 2, 3, 4, 9])
        );
        assert_eq!(
            parse_set("finite:{}").unwrap(),
            SetDescription::Finite(vec![])
        );
    }

    #[test]
    fn nested_unions_associate_left_to_right() {
        let s = parse_set("union:union:ap:1,3|ap:2,3|ap:3,3").unwrap();
        assert_eq!(
            s,
            SetDescription::Ap { first: 1, step: 3 }
                .union(SetDescription::Ap { first: 2, step: 3 })
                .union(SetDescription::Ap { first: 3, step: 3 })
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_set(""), Err(Error::EmptyInput));
        match parse_set("bad(") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 0),
            other => panic!("{other:?}"),
        }
        match parse_set("ap:2,0") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        match parse_set("finite:{3,2}") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 10),
            other => panic!("{other:?}"),
        }
        match parse_set("ap:1,2 extra") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_set("union:ap:1,2").is_err());
        assert!(parse_set("builtin:primes").is_err());
    }
}

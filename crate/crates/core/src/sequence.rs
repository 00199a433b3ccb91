//! Real sequences `x = (x_n)_{n >= 1}` evaluated on demand with exact rational values, plus the
//! growth tags the transform engine needs (sup-norm bounds, linear growth).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setlang::{parse_set, SetDescription};
use crate::sigma::Selector;

/// Declared growth of `|x_n|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Growth {
    /// `|x_n| <= B` for all `n`.
    Bounded(Rational),
    /// `|x_n| <= c·n` for all `n`.
    Linear(Rational),
    Unknown,
}

#[derive(Clone)]
pub struct CustomSequence {
    pub name: String,
    pub f: Arc<dyn Fn(u64) -> Rational + Send + Sync>,
    pub growth: Growth,
}

#[derive(Clone)]
pub enum Sequence {
    Constant(Rational),
    /// `x_n = values[(n - 1) % len]`
    Periodic(Vec<Rational>),
    /// `x_n = c·n`
    Linear(Rational),
    /// `x_n = (-1)^n · n`
    SignedLinear,
    /// `x_n = first · ratio^{n-1}`
    Geometric {
        first: Rational,
        ratio: Rational,
    },
    /// `x_n = 1` on the set, `0` elsewhere.
    Indicator(SetDescription),
    /// `x_n = n` on squares, `1 + 1/n` elsewhere.
    SquaresPerturbed,
    /// A finite prefix; evaluation past its end is an error.
    Prefix(Vec<Rational>),
    /// `n ↦ x_{σ(n)}`
    Subsequence(Box<Sequence>, Selector),
    Custom(CustomSequence),
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({self})")
    }
}

fn is_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

impl Sequence {
    pub fn custom(
        name: impl Into<String>,
        growth: Growth,
        f: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        Sequence::Custom(CustomSequence {
            name: name.into(),
            f: Arc::new(f),
            growth,
        })
    }

    pub fn value(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sequences are indexed from 1".into(),
            ));
        }
        Ok(match self {
            Sequence::Constant(c) => c.clone(),
            Sequence::Periodic(v) => v[((n - 1) % v.len() as u64) as usize].clone(),
            Sequence::Linear(c) => c * rational::int(n),
            Sequence::SignedLinear => {
                if n.is_multiple_of(2) {
                    rational::int(n)
                } else {
                    -rational::int(n)
                }
            }
            Sequence::Geometric { first, ratio } => {
                let e = usize::try_from(n - 1)
                    .map_err(|_| Error::Overflow("geometric exponent".into()))?;
                first * num_traits::pow(ratio.clone(), e)
            }
            Sequence::Indicator(s) => {
                if s.member(n) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Sequence::SquaresPerturbed => {
                if is_square(n) {
                    rational::int(n)
                } else {
                    Rational::one() + Rational::one() / rational::int(n)
                }
            }
            Sequence::Prefix(v) => v.get((n - 1) as usize).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("prefix of length {} exhausted at {n}", v.len()))
            })?,
            Sequence::Subsequence(x, sel) => {
                let i = sel.at(n).ok_or_else(|| {
                    Error::InvalidArgument(format!("finite selector exhausted at index {n}"))
                })?;
                x.value(i)?
            }
            Sequence::Custom(c) => (c.f)(n),
        })
    }

    pub fn prefix(&self, len: u64) -> Result<Vec<Rational>> {
        (1..=len).map(|n| self.value(n)).collect()
    }

    pub fn growth(&self) -> Growth {
        match self {
            Sequence::Constant(c) => Growth::Bounded(c.abs()),
            Sequence::Periodic(v) | Sequence::Prefix(v) => Growth::Bounded(
                v.iter()
                    .map(|r| r.abs())
                    .max()
                    .unwrap_or_else(Rational::zero),
            ),
            Sequence::Linear(c) => Growth::Linear(c.abs()),
            Sequence::SignedLinear | Sequence::SquaresPerturbed => Growth::Linear(Rational::one()),
            Sequence::Geometric { first, ratio } => {
                if ratio.abs() <= Rational::one() {
                    Growth::Bounded(first.abs())
                } else {
                    Growth::Unknown
                }
            }
            Sequence::Indicator(_) => Growth::Bounded(Rational::one()),
            Sequence::Subsequence(x, _) => match x.growth() {
                b @ Growth::Bounded(_) => b,
                _ => Growth::Unknown,
            },
            Sequence::Custom(c) => c.growth.clone(),
        }
    }

    /// `sup_n |x_n|` bound when the sequence is tagged bounded.
    pub fn sup_norm(&self) -> Option<Rational> {
        match self.growth() {
            Growth::Bounded(b) => Some(b),
            _ => None,
        }
    }

    /// Whether the sequence is structurally known to be unbounded.
    pub fn is_unbounded(&self) -> bool {
        match self {
            Sequence::Linear(c) => !c.is_zero(),
            Sequence::SignedLinear | Sequence::SquaresPerturbed => true,
            Sequence::Geometric { first, ratio } => {
                !first.is_zero() && ratio.abs() > Rational::one()
            }
            _ => false,
        }
    }

    /// Least `h >= from` with `|x_h| >= magnitude`, in closed form for the linear families and by
    /// scanning at most `cap` indices otherwise.
    pub fn first_at_least(&self, from: u64, magnitude: &Rational, cap: u64) -> Result<u64> {
        let from = from.max(1);
        if !magnitude.is_positive() {
            return Ok(from);
        }
        match self {
            Sequence::Linear(c) if !c.is_zero() => {
                Ok(from.max(to_u64(&rational::ceil_pos(&(magnitude / c.abs())))?))
            }
            Sequence::SignedLinear => Ok(from.max(to_u64(&rational::ceil_pos(magnitude))?)),
            Sequence::SquaresPerturbed => {
                // off squares |x_h| = 1 + 1/h, which reaches the magnitude only for h <= 1/(m-1)
                let one = Rational::one();
                if magnitude <= &one {
                    return Ok(from);
                }
                let small = (magnitude - &one).recip().floor().to_integer();
                let small = small.to_u64().unwrap_or(u64::MAX);
                let mut h = from;
                while h <= small {
                    if self.value(h)?.abs() >= *magnitude {
                        return Ok(h);
                    }
                    h += 1;
                }
                let target = from.max(to_u64(&rational::ceil_pos(magnitude))?);
                let mut r = target.sqrt();
                if r * r < target {
                    r += 1;
                }
                r.checked_mul(r)
                    .ok_or_else(|| Error::Overflow("square index".into()))
            }
            _ => {
                let end = from.saturating_add(cap);
                for h in from..end {
                    if self.value(h)?.abs() >= *magnitude {
                        return Ok(h);
                    }
                }
                Err(Error::SearchCap(format!(
                    "no |x_h| >= {magnitude} for h in [{from}, {end})"
                )))
            }
        }
    }

    /// Parses `n`, `neg-n`, `alt`, `const:<q>`, `periodic:<q>,...`, `linear:<q>`,
    /// `geometric:<first>,<ratio>`, `indicator:<set>`, `squares-perturbed`, `inline:<q>,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::EmptyInput);
        }
        let list = |body: &str| -> Result<Vec<Rational>> {
            let v = body
                .split(',')
                .map(|t| rational::parse(t.trim()))
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(Error::InvalidArgument("empty value list".into()));
            }
            Ok(v)
        };
        Ok(match spec {
            "n" => Sequence::Linear(Rational::one()),
            "neg-n" | "alt-n" => Sequence::SignedLinear,
            "alt" => Sequence::Periodic(vec![Rational::zero(), Rational::one()]),
            "squares-perturbed" => Sequence::SquaresPerturbed,
            _ => {
                if let Some(q) = spec.strip_prefix("const:") {
                    Sequence::Constant(rational::parse(q)?)
                } else if let Some(q) = spec.strip_prefix("linear:") {
                    Sequence::Linear(rational::parse(q)?)
                } else if let Some(body) = spec.strip_prefix("periodic:") {
                    Sequence::Periodic(list(body)?)
                } else if let Some(body) = spec.strip_prefix("inline:") {
                    Sequence::Prefix(list(body)?)
                } else if let Some(body) = spec.strip_prefix("geometric:") {
                    let v = list(body)?;
                    if v.len() != 2 {
                        return Err(Error::InvalidArgument(
                            "expected geometric:<first>,<ratio>".into(),
                        ));
                    }
                    Sequence::Geometric {
                        first: v[0].clone(),
                        ratio: v[1].clone(),
                    }
                } else if let Some(set) = spec.strip_prefix("indicator:") {
                    Sequence::Indicator(parse_set(set)?)
                } else {
                    return Err(Error::syntax(0, format!("unknown sequence '{spec}'")));
                }
            }
        })
    }
}

fn to_u64(v: &BigUint) -> Result<u64> {
    v.to_u64()
        .ok_or_else(|| Error::Overflow(format!("index {v} exceeds u64")))
}

fn join(values: &[Rational]) -> String {
    values
        .iter()
        .map(rational::fmt)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Constant(c) => write!(f, "const:{}", rational::fmt(c)),
            Sequence::Periodic(v) if v == &[Rational::zero(), Rational::one()] => {
                f.write_str("alt")
            }
            Sequence::Periodic(v) => write!(f, "periodic:{}", join(v)),
            Sequence::Linear(c) if c.is_one() => f.write_str("n"),
            Sequence::Linear(c) => write!(f, "linear:{}", rational::fmt(c)),
            Sequence::SignedLinear => f.write_str("neg-n"),
            Sequence::Geometric { first, ratio } => {
                write!(
                    f,
                    "geometric:{},{}",
                    rational::fmt(first),
                    rational::fmt(ratio)
                )
            }
            Sequence::Indicator(s) => write!(f, "indicator:{s}"),
            Sequence::SquaresPerturbed => f.write_str("squares-perturbed"),
            Sequence::Prefix(v) => write!(f, "inline:{}", join(v)),
            Sequence::Subsequence(x, sel) => write!(f, "subsequence({x};{sel})"),
            Sequence::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, sint};

    #[test]
    fn values() {
        assert_eq!(Sequence::SignedLinear.value(3).unwrap(), sint(-3));
        assert_eq!(Sequence::SquaresPerturbed.value(9).unwrap(), int(9));
        assert_eq!(Sequence::SquaresPerturbed.value(8).unwrap(), rat(9, 8));
        let alt = Sequence::parse("alt").unwrap();
        assert_eq!(alt.prefix(4).unwrap(), vec![int(0), int(1), int(0), int(1)]);
        assert!(Sequence::Prefix(vec![int(1)]).value(2).is_err());
        assert!(Sequence::Linear(int(1)).value(0).is_err());
    }

    #[test]
    fn subsequence_of_alternating() {
        let x = Sequence::Subsequence(
            Box::new(Sequence::parse("alt").unwrap()),
            Selector::parse("even", 0).unwrap(),
        );
        assert_eq!(x.prefix(3).unwrap(), vec![int(1); 3]);
        assert_eq!(x.sup_norm(), Some(int(1)));
    }

    #[test]
    fn first_at_least_matches_scan() {
        let seqs = [
            Sequence::Linear(int(1)),
            Sequence::Linear(rat(1, 3)),
            Sequence::SignedLinear,
            Sequence::SquaresPerturbed,
        ];
        let mags = [
            rat(1, 2),
            int(1),
            rat(3, 2),
            rat(11, 10),
            int(7),
            rat(26, 3),
            int(50),
        ];
        for x in &seqs {
            for m in &mags {
                for from in [1u64, 2, 5, 17] {
                    let fast = x.first_at_least(from, m, 1_000).unwrap();
                    let slow = (from..).find(|&h| x.value(h).unwrap().abs() >= *m).unwrap();
                    assert_eq!(fast, slow, "{x} from {from} magnitude {m}");
                }
            }
        }
    }

    #[test]
    fn scan_respects_cap() {
        let x = Sequence::Constant(int(1));
        assert!(matches!(
            x.first_at_least(1, &int(2), 100),
            Err(Error::SearchCap(_))
        ));
    }

    #[test]
    fn parse_round_trip() {
        for spec in [
            "n",
            "neg-n",
            "alt",
            "const:7",
            "periodic:1,2,1/2",
            "geometric:1,1/2",
            "indicator:builtin:squares",
            "squares-perturbed",
            "inline:1,0,3",
        ] {
            assert_eq!(Sequence::parse(spec).unwrap().to_string(), spec);
        }
        assert!(Sequence::parse("zeta").is_err());
    }
}

//! Symbolic subsets of `N = {1, 2, 3, ...}`.
//!
//! A [`SetDescription`] is a small expression tree with exact membership, closed-form prefix
//! counts where they exist, and a structural density analysis used by the ideal verdicts.
//! The textual form is a colon/pipe-delimited ASCII grammar:
//!
//! ```text
//! set  := "finite:{" ints "}" | "ap:" int "," int | "builtin:" name
//!       | "complement:" set | "union:" set "|" set | "intersect:" set "|" set
//!       | "shift:" set "," int
//! name := "squares" | "powers2" | "nu2_ge(" int ")" | "dyadic_blocks(" set ")"
//! ints := [ item { "," item } ]      item := int | int ".." int
//! ```

mod analysis;
mod density;
mod parse;

use std::fmt;

use num_integer::Roots;

use crate::error::{Error, Result};

pub use analysis::{DensityBounds, Finiteness, Interval, Tri};
pub(crate) use density::max_window_count;
pub use density::{banach_window_max, density_report, DensityReport};
pub use parse::parse_set;

/// Enumeration fallback limit for prefix counts.
pub const ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetDescription {
    /// Strictly increasing list of positive integers.
    Finite(Vec<u64>),
    /// `{first, first + step, first + 2 step, ...}`.
    Ap {
        first: u64,
        step: u64,
    },
    Builtin(Builtin),
    Complement(Box<SetDescription>),
    Union(Box<SetDescription>, Box<SetDescription>),
    Intersection(Box<SetDescription>, Box<SetDescription>),
    /// `{n + offset : n in S} ∩ N`.
    Shift(Box<SetDescription>, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `{1, 4, 9, ...}`
    Squares,
    /// `{1, 2, 4, 8, ...}`
    Powers2,
    /// `{n : 2^c divides n}`
    Nu2Ge(u32),
    /// Union of the dyadic blocks `[2^q, 2^{q+1})` over block indices `q` in the selector.
    DyadicBlocks(Box<SetDescription>),
}

impl SetDescription {
    pub fn finite(values: Vec<u64>) -> Result<Self> {
        if values.first() == Some(&0) {
            return Err(Error::InvalidArgument(
                "finite sets live in N = {1, 2, ...}".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "finite lists must be strictly increasing".into(),
            ));
        }
        Ok(SetDescription::Finite(values))
    }

    /// Builds a finite set from arbitrary positive values (sorted and deduplicated).
    pub fn finite_from_iter(values: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = values.into_iter().filter(|&n| n >= 1).collect();
        v.sort_unstable();
        v.dedup();
        SetDescription::Finite(v)
    }

    /// `{1, ..., n}`.
    pub fn initial_segment(n: u64) -> Self {
        SetDescription::Finite((1..=n).collect())
    }

    pub fn ap(first: u64, step: u64) -> Result<Self> {
        if first == 0 || step == 0 {
            return Err(Error::InvalidArgument(
                "arithmetic progressions need first >= 1 and step >= 1".into(),
            ));
        }
        Ok(SetDescription::Ap { first, step })
    }

    pub fn naturals() -> Self {
        SetDescription::Ap { first: 1, step: 1 }
    }

    pub fn squares() -> Self {
        SetDescription::Builtin(Builtin::Squares)
    }

    pub fn powers2() -> Self {
        SetDescription::Builtin(Builtin::Powers2)
    }

    pub fn nu2_ge(c: u32) -> Self {
        SetDescription::Builtin(Builtin::Nu2Ge(c))
    }

    pub fn dyadic_blocks(selector: SetDescription) -> Self {
        SetDescription::Builtin(Builtin::DyadicBlocks(Box::new(selector)))
    }

    pub fn complement(self) -> Self {
        SetDescription::Complement(Box::new(self))
    }

    pub fn union(self, other: SetDescription) -> Self {
        SetDescription::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: SetDescription) -> Self {
        SetDescription::Intersection(Box::new(self), Box::new(other))
    }

    pub fn shift(self, offset: i64) -> Self {
        SetDescription::Shift(Box::new(self), offset)
    }

    pub fn member(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            SetDescription::Finite(v) => v.binary_search(&n).is_ok(),
            SetDescription::Ap { first, step } => n >= *first && (n - first).is_multiple_of(*step),
            SetDescription::Builtin(b) => b.member(n),
            SetDescription::Complement(s) => !s.member(n),
            SetDescription::Union(a, b) => a.member(n) || b.member(n),
            SetDescription::Intersection(a, b) => a.member(n) && b.member(n),
            SetDescription::Shift(s, offset) => {
                let m = n as i128 - *offset as i128;
                m >= 1 && m <= u64::MAX as i128 && s.member(m as u64)
            }
        }
    }

    /// `|S ∩ [1, n]|`, by closed form when one exists, else by enumeration up to
    /// [`ENUMERATION_CAP`].
    pub fn count_prefix(&self, n: u64) -> Result<u64> {
        if let Some(c) = self.closed_count(n) {
            return Ok(c);
        }
        if n > ENUMERATION_CAP {
            return Err(Error::ScaleCap {
                requested: n,
                cap: ENUMERATION_CAP,
            });
        }
        Ok((1..=n).filter(|&k| self.member(k)).count() as u64)
    }

    /// Whether [`count_prefix`](Self::count_prefix) avoids enumeration.
    pub fn has_closed_count(&self) -> bool {
        self.closed_count(1).is_some()
    }

    pub(crate) fn closed_count(&self, n: u64) -> Option<u64> {
        match self {
            SetDescription::Finite(v) => Some(v.partition_point(|&x| x <= n) as u64),
            SetDescription::Ap { first, step } => Some(if n < *first {
                0
            } else {
                (n - first) / step + 1
            }),
            SetDescription::Builtin(b) => b.closed_count(n),
            SetDescription::Complement(s) => s.closed_count(n).map(|c| n - c),
            SetDescription::Shift(s, offset) => {
                if *offset >= 0 {
                    let o = *offset as u64;
                    if n <= o {
                        Some(0)
                    } else {
                        s.closed_count(n - o)
                    }
                } else {
                    let o = offset.unsigned_abs();
                    let hi = s.closed_count(n.checked_add(o)?)?;
                    let lo = s.closed_count(o)?;
                    Some(hi - lo)
                }
            }
            SetDescription::Union(..) | SetDescription::Intersection(..) => None,
        }
    }

    /// Members of `S` inside `[lo, hi]`, in increasing order.
    pub fn members_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        (lo.max(1)..=hi).filter(|&k| self.member(k)).collect()
    }

    /// Least member `>= from`: in closed form where the description allows it, otherwise by
    /// scanning at most `cap` candidates.
    pub fn next_member(&self, from: u64, cap: u64) -> Option<u64> {
        let from = from.max(1);
        match self.jump(from) {
            Some(found) => found,
            None => (from..from.saturating_add(cap)).find(|&k| self.member(k)),
        }
    }

    /// Least member `>= from` in closed form: `Some(None)` when there is none, `None` when no
    /// closed form is available.
    fn jump(&self, from: u64) -> Option<Option<u64>> {
        match self {
            SetDescription::Finite(v) => Some(v.iter().copied().find(|&m| m >= from)),
            SetDescription::Ap { first, step } => {
                if from <= *first {
                    return Some(Some(*first));
                }
                let k = (from - first).div_ceil(*step);
                Some(k.checked_mul(*step).and_then(|d| d.checked_add(*first)))
            }
            SetDescription::Builtin(Builtin::Squares) => {
                let mut r = from.sqrt();
                if r * r < from {
                    r += 1;
                }
                Some(r.checked_mul(r))
            }
            SetDescription::Builtin(Builtin::Powers2) => Some(from.checked_next_power_of_two()),
            SetDescription::Builtin(Builtin::Nu2Ge(c)) => {
                if *c >= 64 {
                    return Some(None);
                }
                let unit = 1u64 << c;
                Some(from.div_ceil(unit).checked_mul(unit))
            }
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => {
                let from = from.max(2);
                let q = 63 - from.leading_zeros() as u64;
                if sel.member(q) {
                    return Some(Some(from));
                }
                let next = sel.jump(q + 1)?;
                Some(next.and_then(|q| (q < 64).then(|| 1u64 << q)))
            }
            SetDescription::Union(a, b) => {
                let (x, y) = (a.jump(from)?, b.jump(from)?);
                Some(match (x, y) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                })
            }
            SetDescription::Shift(s, offset) => {
                let inner = (from as i128 - *offset as i128).max(1) as u64;
                let found = s.jump(inner)?;
                Some(found.and_then(|m| {
                    let v = m as i128 + *offset as i128;
                    (v >= 1 && v <= u64::MAX as i128).then_some(v as u64)
                }))
            }
            _ => None,
        }
    }

    fn tree_size(&self) -> usize {
        match self {
            SetDescription::Finite(_) | SetDescription::Ap { .. } => 1,
            SetDescription::Builtin(Builtin::DyadicBlocks(s)) => 1 + s.tree_size(),
            SetDescription::Builtin(_) => 1,
            SetDescription::Complement(s) | SetDescription::Shift(s, _) => 1 + s.tree_size(),
            SetDescription::Union(a, b) | SetDescription::Intersection(a, b) => {
                1 + a.tree_size() + b.tree_size()
            }
        }
    }

    /// Number of nodes in the expression tree.
    pub fn size(&self) -> usize {
        self.tree_size()
    }
}

impl Builtin {
    pub fn member(&self, n: u64) -> bool {
        match self {
            Builtin::Squares => {
                let r = n.sqrt();
                r * r == n
            }
            Builtin::Powers2 => n.is_power_of_two(),
            Builtin::Nu2Ge(c) => n.trailing_zeros() >= *c,
            Builtin::DyadicBlocks(sel) => {
                let q = 63 - n.leading_zeros() as u64;
                q >= 1 && sel.member(q)
            }
        }
    }

    fn closed_count(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return Some(0);
        }
        Some(match self {
            Builtin::Squares => n.sqrt(),
            Builtin::Powers2 => 64 - n.leading_zeros() as u64,
            Builtin::Nu2Ge(c) => {
                if *c >= 64 {
                    0
                } else {
                    n >> c
                }
            }
            Builtin::DyadicBlocks(sel) => {
                let top = 63 - n.leading_zeros() as u64;
                let mut total = 0u64;
                for q in 1..=top {
                    if sel.member(q) {
                        let start = 1u64 << q;
                        let end = if q == 63 {
                            u64::MAX
                        } else {
                            (1u64 << (q + 1)) - 1
                        };
                        total += end.min(n) - start + 1;
                    }
                }
                total
            }
        })
    }
}

fn render_ints(values: &[u64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut i = 0;
    let mut first = true;
    while i < values.len() {
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == values[j] + 1 {
            j += 1;
        }
        if !first {
            f.write_str(",")?;
        }
        first = false;
        if j >= i + 2 {
            write!(f, "{}..{}", values[i], values[j])?;
            i = j + 1;
        } else {
            write!(f, "{}", values[i])?;
            i += 1;
        }
    }
    Ok(())
}

impl fmt::Display for SetDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescription::Finite(v) => {
                f.write_str("finite:{")?;
                render_ints(v, f)?;
                f.write_str("}")
            }
            SetDescription::Ap { first, step } => write!(f, "ap:{first},{step}"),
            SetDescription::Builtin(b) => write!(f, "builtin:{b}"),
            SetDescription::Complement(s) => write!(f, "complement:{s}"),
            SetDescription::Union(a, b) => write!(f, "union:{a}|{b}"),
            SetDescription::Intersection(a, b) => write!(f, "intersect:{a}|{b}"),
            SetDescription::Shift(s, o) => write!(f, "shift:{s},{o}"),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Squares => f.write_str("squares"),
            Builtin::Powers2 => f.write_str("powers2"),
            Builtin::Nu2Ge(c) => write!(f, "nu2_ge({c})"),
            Builtin::DyadicBlocks(s) => write!(f, "dyadic_blocks({s})"),
        }
    }
}

impl std::str::FromStr for SetDescription {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_set(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> SetDescription {
        parse_set(text).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(s("ap:2,2").member(8));
        assert!(SetDescription::nu2_ge(2).member(12));
        assert!(!SetDescription::nu2_ge(3).member(12));
        assert!(!s("complement:builtin:squares").member(9));
        assert!(s("complement:builtin:squares").member(10));
        assert!(s("builtin:powers2").member(1));
        assert!(!s("builtin:powers2").member(12));
        assert!(s("shift:ap:1,2,1").member(2));
        assert!(!s("shift:ap:1,2,1").member(1));
        assert!(s("shift:finite:{5},-3").member(2));
    }

    #[test]
    fn count_examples() {
        assert_eq!(s("ap:2,2").count_prefix(10).unwrap(), 5);
        assert_eq!(SetDescription::squares().count_prefix(10_000).unwrap(), 100);
        assert_eq!(s("finite:{1,5,9}").count_prefix(6).unwrap(), 2);
        assert_eq!(s("builtin:powers2").count_prefix(1024).unwrap(), 11);
        assert_eq!(s("builtin:nu2_ge(3)").count_prefix(100).unwrap(), 12);
        assert_eq!(s("shift:builtin:squares,-3").count_prefix(13).unwrap(), 3);
    }

    #[test]
    fn dyadic_blocks_cover_selected_blocks() {
        let d = SetDescription::dyadic_blocks(SetDescription::ap(2, 2).unwrap());
        assert!(!d.member(1));
        assert!(!d.member(3));
        assert!(d.member(4));
        assert!(d.member(7));
        assert!(!d.member(8));
        assert!(d.member(16));
        assert_eq!(d.count_prefix(7).unwrap(), 4);
        assert_eq!(d.count_prefix(20).unwrap(), 9);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let u = s("union:builtin:squares|builtin:powers2");
        assert!(u.count_prefix(100).is_ok());
        assert_eq!(
            u.count_prefix(ENUMERATION_CAP + 1),
            Err(Error::ScaleCap {
                requested: ENUMERATION_CAP + 1,
                cap: ENUMERATION_CAP
            })
        );
    }

    #[test]
    fn finite_constructor_validates() {
        assert!(SetDescription::finite(vec![1, 3, 2]).is_err());
        assert!(SetDescription::finite(vec![0, 3]).is_err());
        assert!(SetDescription::ap(0, 3).is_err());
        assert_eq!(
            SetDescription::finite_from_iter([5, 1, 5, 0]),
            SetDescription::Finite(vec![1, 5])
        );
    }

    #[test]
    fn render_compresses_runs() {
        let f = SetDescription::Finite(vec![1, 2, 3, 5, 7, 8, 9, 10]);
        assert_eq!(f.to_string(), "finite:{1..3,5,7..10}");
        assert_eq!(parse_set(&f.to_string()).unwrap(), f);
    }
}

//! Structural facts about set descriptions: eventual periodicity, finiteness, and certified
//! bounds on asymptotic and Banach densities.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{Builtin, SetDescription};
use crate::rational::{self, Rational};

const PERIOD_CAP: u64 = 1 << 16;

/// Three-valued answer for structural questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl Tri {
    fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            _ => Tri::Unknown,
        }
    }

    /// `Yes` when either side is `Yes`; two `No`s prove nothing about a union of properties
    /// that is not closed under the operation (two infinite sets can meet finitely).
    fn either_yes(self, other: Tri) -> Tri {
        if self == Tri::Yes || other == Tri::Yes {
            Tri::Yes
        } else {
            Tri::Unknown
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Finiteness {
    pub finite: Tri,
    pub cofinite: Tri,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(with = "rational::as_str")]
    pub lo: Rational,
    #[serde(with = "rational::as_str")]
    pub hi: Rational,
}

impl Interval {
    fn exact(d: Rational) -> Self {
        Interval {
            lo: d.clone(),
            hi: d,
        }
    }

    fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    fn reflect(&self) -> Self {
        Interval {
            lo: Rational::one() - &self.hi,
            hi: Rational::one() - &self.lo,
        }
    }
}

/// Certified enclosures for the lower and upper limits of a density functional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityBounds {
    pub lower: Interval,
    pub upper: Interval,
}

impl DensityBounds {
    fn exact(d: Rational) -> Self {
        DensityBounds {
            lower: Interval::exact(d.clone()),
            upper: Interval::exact(d),
        }
    }

    fn unknown() -> Self {
        DensityBounds {
            lower: Interval::unit(),
            upper: Interval::unit(),
        }
    }

    fn complement(&self) -> Self {
        DensityBounds {
            lower: self.upper.reflect(),
            upper: self.lower.reflect(),
        }
    }

    fn union(&self, other: &Self) -> Self {
        let one = Rational::one();
        let upper = Interval {
            lo: (&self.upper.lo).max(&other.upper.lo).clone(),
            hi: (&self.upper.hi + &other.upper.hi).min(one.clone()),
        };
        let lower_hi = [
            one,
            &self.lower.hi + &other.upper.hi,
            &self.upper.hi + &other.lower.hi,
            upper.hi.clone(),
        ]
        .into_iter()
        .min()
        .expect("nonempty");
        let lower = Interval {
            lo: (&self.lower.lo).max(&other.lower.lo).clone(),
            hi: lower_hi,
        };
        DensityBounds { lower, upper }
    }

    fn intersection(&self, other: &Self) -> Self {
        self.complement().union(&other.complement()).complement()
    }
}

/// Membership pattern that holds for all sufficiently large `n`: `n ∈ S ⇔ residues[n % period]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Pattern {
    pub period: u64,
    pub residues: Vec<bool>,
}

impl Pattern {
    fn constant(value: bool) -> Self {
        Pattern {
            period: 1,
            residues: vec![value],
        }
    }

    fn expand(&self, period: u64) -> Vec<bool> {
        (0..period)
            .map(|r| self.residues[(r % self.period) as usize])
            .collect()
    }

    fn combine(&self, other: &Pattern, op: impl Fn(bool, bool) -> bool) -> Option<Pattern> {
        let period = self.period.lcm(&other.period);
        if period > PERIOD_CAP {
            return None;
        }
        let a = self.expand(period);
        let b = other.expand(period);
        Some(Pattern {
            period,
            residues: a.iter().zip(&b).map(|(&x, &y)| op(x, y)).collect(),
        })
    }

    pub fn density(&self) -> Rational {
        let hits = self.residues.iter().filter(|&&b| b).count() as i64;
        rational::rat(hits, self.period as i64)
    }

    /// Longest run between consecutive members, cyclically. `None` when the pattern is empty.
    pub fn max_gap(&self) -> Option<u64> {
        let hits: Vec<u64> = (0..self.period)
            .filter(|&r| self.residues[r as usize])
            .collect();
        let first = *hits.first()?;
        let mut gap = 0;
        for w in hits.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap = gap.max(first + self.period - hits[hits.len() - 1]);
        Some(gap)
    }
}

impl SetDescription {
    pub(crate) fn eventual_pattern(&self) -> Option<Pattern> {
        match self {
            SetDescription::Finite(_) => Some(Pattern::constant(false)),
            SetDescription::Ap { first, step } => {
                if *step > PERIOD_CAP {
                    return None;
                }
                let mut residues = vec![false; *step as usize];
                residues[(first % step) as usize] = true;
                Some(Pattern {
                    period: *step,
                    residues,
                })
            }
            SetDescription::Builtin(Builtin::Nu2Ge(c)) => {
                if *c > 16 {
                    return None;
                }
                let period = 1u64 << c;
                let mut residues = vec![false; period as usize];
                residues[0] = true;
                Some(Pattern { period, residues })
            }
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => {
                let f = sel.finiteness();
                if f.finite == Tri::Yes {
                    Some(Pattern::constant(false))
                } else if f.cofinite == Tri::Yes {
                    Some(Pattern::constant(true))
                } else {
                    None
                }
            }
            SetDescription::Builtin(_) => None,
            SetDescription::Complement(s) => {
                let p = s.eventual_pattern()?;
                Some(Pattern {
                    period: p.period,
                    residues: p.residues.iter().map(|b| !b).collect(),
                })
            }
            SetDescription::Union(a, b) => a
                .eventual_pattern()?
                .combine(&b.eventual_pattern()?, |x, y| x || y),
            SetDescription::Intersection(a, b) => a
                .eventual_pattern()?
                .combine(&b.eventual_pattern()?, |x, y| x && y),
            SetDescription::Shift(s, offset) => {
                let p = s.eventual_pattern()?;
                let period = p.period as i128;
                let residues = (0..period)
                    .map(|r| p.residues[(r - *offset as i128).rem_euclid(period) as usize])
                    .collect();
                Some(Pattern {
                    period: p.period,
                    residues,
                })
            }
        }
    }

    /// Exact asymptotic density for eventually periodic descriptions (finite sets, progressions
    /// and their Boolean combinations and shifts).
    pub fn exact_density(&self) -> Option<Rational> {
        self.eventual_pattern().map(|p| p.density())
    }

    pub fn finiteness(&self) -> Finiteness {
        if let Some(p) = self.eventual_pattern() {
            return Finiteness {
                finite: if p.residues.iter().any(|&b| b) {
                    Tri::No
                } else {
                    Tri::Yes
                },
                cofinite: if p.residues.iter().all(|&b| b) {
                    Tri::Yes
                } else {
                    Tri::No
                },
            };
        }
        let mut f = match self {
            SetDescription::Finite(_) => Finiteness {
                finite: Tri::Yes,
                cofinite: Tri::No,
            },
            SetDescription::Ap { step, .. } => Finiteness {
                finite: Tri::No,
                cofinite: if *step == 1 { Tri::Yes } else { Tri::No },
            },
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => sel.finiteness(),
            SetDescription::Builtin(Builtin::Nu2Ge(c)) => Finiteness {
                finite: Tri::No,
                cofinite: if *c == 0 { Tri::Yes } else { Tri::No },
            },
            SetDescription::Builtin(_) => Finiteness {
                finite: Tri::No,
                cofinite: Tri::No,
            },
            SetDescription::Complement(s) => {
                let inner = s.finiteness();
                Finiteness {
                    finite: inner.cofinite,
                    cofinite: inner.finite,
                }
            }
            SetDescription::Union(a, b) => {
                let (fa, fb) = (a.finiteness(), b.finiteness());
                let mut cofinite = fa.cofinite.either_yes(fb.cofinite);
                if cofinite == Tri::Unknown
                    && ((fa.cofinite == Tri::No && fb.finite == Tri::Yes)
                        || (fb.cofinite == Tri::No && fa.finite == Tri::Yes))
                {
                    cofinite = Tri::No;
                }
                Finiteness {
                    finite: fa.finite.and(fb.finite),
                    cofinite,
                }
            }
            SetDescription::Intersection(a, b) => {
                let (fa, fb) = (a.finiteness(), b.finiteness());
                let mut finite = fa.finite.either_yes(fb.finite);
                if finite == Tri::Unknown
                    && ((fa.cofinite == Tri::Yes && fb.finite == Tri::No)
                        || (fb.cofinite == Tri::Yes && fa.finite == Tri::No))
                {
                    finite = Tri::No;
                }
                Finiteness {
                    finite,
                    cofinite: fa.cofinite.and(fb.cofinite),
                }
            }
            SetDescription::Shift(s, _) => s.finiteness(),
        };
        if f.finite == Tri::Unknown || f.cofinite == Tri::Unknown {
            let d = self.density_bounds();
            if f.finite == Tri::Unknown && d.upper.lo > Rational::zero() {
                f.finite = Tri::No;
            }
            if f.cofinite == Tri::Unknown && d.lower.hi < Rational::one() {
                f.cofinite = Tri::No;
            }
        }
        f
    }

    /// Certified bounds on `liminf` and `limsup` of `|S ∩ [1, n]| / n`.
    pub fn density_bounds(&self) -> DensityBounds {
        if let Some(p) = self.eventual_pattern() {
            return DensityBounds::exact(p.density());
        }
        match self {
            SetDescription::Builtin(Builtin::Squares | Builtin::Powers2) => {
                DensityBounds::exact(Rational::zero())
            }
            SetDescription::Builtin(Builtin::Nu2Ge(c)) => {
                DensityBounds::exact(rational::pow2_inv(*c as u64))
            }
            SetDescription::Ap { step, .. } => DensityBounds::exact(rational::rat(1, *step as i64)),
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => dyadic_density_bounds(sel),
            SetDescription::Complement(s) => s.density_bounds().complement(),
            SetDescription::Union(a, b) => a.density_bounds().union(&b.density_bounds()),
            SetDescription::Intersection(a, b) => {
                a.density_bounds().intersection(&b.density_bounds())
            }
            SetDescription::Shift(s, _) => s.density_bounds(),
            SetDescription::Finite(_) => DensityBounds::exact(Rational::zero()),
        }
    }

    /// Certified bounds on the lower and upper Banach densities.
    pub fn banach_bounds(&self) -> DensityBounds {
        if let Some(p) = self.eventual_pattern() {
            return DensityBounds::exact(p.density());
        }
        match self {
            SetDescription::Builtin(Builtin::Squares | Builtin::Powers2) => {
                DensityBounds::exact(Rational::zero())
            }
            SetDescription::Builtin(Builtin::Nu2Ge(c)) => {
                DensityBounds::exact(rational::pow2_inv(*c as u64))
            }
            SetDescription::Ap { step, .. } => DensityBounds::exact(rational::rat(1, *step as i64)),
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => {
                let f = sel.finiteness();
                let mut b = DensityBounds::unknown();
                if f.finite == Tri::No {
                    b.upper = Interval::exact(Rational::one());
                }
                if f.cofinite == Tri::No {
                    b.lower = Interval::exact(Rational::zero());
                }
                b
            }
            SetDescription::Complement(s) => s.banach_bounds().complement(),
            SetDescription::Union(a, b) => a.banach_bounds().union(&b.banach_bounds()),
            SetDescription::Intersection(a, b) => {
                a.banach_bounds().intersection(&b.banach_bounds())
            }
            SetDescription::Shift(s, _) => s.banach_bounds(),
            SetDescription::Finite(_) => DensityBounds::exact(Rational::zero()),
        }
    }

    /// Structural membership in `Fin x Fin`: all but finitely many columns
    /// `{n ∈ S : ν₂(n) = k}` are finite.
    pub fn finxfin_member(&self) -> Tri {
        if let Some(p) = self.eventual_pattern() {
            // With period 2^e·m (m odd) every column k >= e meets exactly the residues
            // divisible by 2^e, and meets each of them infinitely often.
            let e = p.period.trailing_zeros();
            let unit = 1u64 << e;
            let hits_high_columns = (0..p.period).any(|r| r % unit == 0 && p.residues[r as usize]);
            return if hits_high_columns { Tri::No } else { Tri::Yes };
        }
        match self {
            SetDescription::Finite(_) => Tri::Yes,
            SetDescription::Ap { first, step } => {
                let unit = 1u64 << step.trailing_zeros();
                if first % unit == 0 {
                    Tri::No
                } else {
                    Tri::Yes
                }
            }
            SetDescription::Builtin(Builtin::Squares) => Tri::No,
            SetDescription::Builtin(Builtin::Powers2) => Tri::Yes,
            SetDescription::Builtin(Builtin::Nu2Ge(_)) => Tri::No,
            SetDescription::Builtin(Builtin::DyadicBlocks(sel)) => match sel.finiteness().finite {
                Tri::Yes => Tri::Yes,
                Tri::No => Tri::No,
                Tri::Unknown => Tri::Unknown,
            },
            // only the columns below c survive
            SetDescription::Complement(s)
                if matches!(**s, SetDescription::Builtin(Builtin::Nu2Ge(_))) =>
            {
                Tri::Yes
            }
            SetDescription::Complement(s) => {
                if s.finxfin_member() == Tri::Yes {
                    Tri::No
                } else {
                    Tri::Unknown
                }
            }
            SetDescription::Union(a, b) => a.finxfin_member().and(b.finxfin_member()),
            SetDescription::Intersection(a, b) => {
                let (va, vb) = (a.finxfin_member(), b.finxfin_member());
                if va == Tri::Yes || vb == Tri::Yes {
                    Tri::Yes
                } else if a.finiteness().cofinite == Tri::Yes {
                    vb
                } else if b.finiteness().cofinite == Tri::Yes {
                    va
                } else {
                    Tri::Unknown
                }
            }
            SetDescription::Shift(s, _) => {
                if s.finiteness().finite == Tri::Yes {
                    Tri::Yes
                } else {
                    Tri::Unknown
                }
            }
        }
    }
}

fn dyadic_density_bounds(sel: &SetDescription) -> DensityBounds {
    let f = sel.finiteness();
    let mut b = DensityBounds::unknown();
    if f.finite == Tri::No {
        // right edge 2^{q+1}-1 of any selected block q carries density > 1/2
        b.upper.lo = rational::rat(1, 2);
        if let Some(gap) = sel.eventual_pattern().and_then(|p| p.max_gap()) {
            // a selected block q is followed by the next one within `gap` indices
            b.lower.lo = rational::pow2_inv(gap);
        }
    }
    if f.cofinite == Tri::No {
        // right edge of an unselected block q carries density < 1/2
        b.lower.hi = rational::rat(1, 2);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::setlang::parse_set;

    fn s(text: &str) -> SetDescription {
        parse_set(text).unwrap()
    }

    #[test]
    fn exact_density_for_periodic_descriptions() {
        assert_eq!(s("ap:3,4").exact_density(), Some(rat(1, 4)));
        assert_eq!(s("finite:{1,2}").exact_density(), Some(rat(0, 1)));
        assert_eq!(s("complement:ap:2,2").exact_density(), Some(rat(1, 2)));
        assert_eq!(s("union:ap:1,2|ap:2,4").exact_density(), Some(rat(3, 4)));
        assert_eq!(
            s("intersect:ap:1,2|ap:1,3").exact_density(),
            Some(rat(1, 6))
        );
        assert_eq!(s("builtin:nu2_ge(3)").exact_density(), Some(rat(1, 8)));
        assert_eq!(s("shift:ap:1,4,2").exact_density(), Some(rat(1, 4)));
        assert_eq!(s("builtin:squares").exact_density(), None);
    }

    #[test]
    fn finiteness_structure() {
        assert_eq!(s("finite:{1,2}").finiteness().finite, Tri::Yes);
        assert_eq!(s("builtin:squares").finiteness().finite, Tri::No);
        assert_eq!(
            s("complement:builtin:squares").finiteness().cofinite,
            Tri::No
        );
        assert_eq!(
            s("complement:finite:{1..9}").finiteness(),
            Finiteness {
                finite: Tri::No,
                cofinite: Tri::Yes
            }
        );
        assert_eq!(
            s("intersect:builtin:squares|builtin:powers2")
                .finiteness()
                .finite,
            Tri::Unknown
        );
        assert_eq!(
            s("builtin:dyadic_blocks(ap:2,2)").finiteness().finite,
            Tri::No
        );
    }

    #[test]
    fn high_column_complements_are_finxfin() {
        assert_eq!(
            s("complement:builtin:nu2_ge(40)").finxfin_member(),
            Tri::Yes
        );
        assert_eq!(s("complement:builtin:nu2_ge(3)").finxfin_member(), Tri::Yes);
        assert_eq!(s("builtin:nu2_ge(40)").finxfin_member(), Tri::No);
    }

    #[test]
    fn dyadic_bounds() {
        let d = s("builtin:dyadic_blocks(ap:2,2)").density_bounds();
        assert_eq!(d.upper.lo, rat(1, 2));
        assert_eq!(d.lower.lo, rat(1, 4));
        assert_eq!(d.lower.hi, rat(1, 2));
        let sq = s("builtin:dyadic_blocks(builtin:squares)").density_bounds();
        assert_eq!(sq.upper.lo, rat(1, 2));
        assert_eq!(sq.lower.lo, rat(0, 1));
    }

    #[test]
    fn complement_of_sparse_set_has_density_one() {
        let d = s("complement:builtin:squares").density_bounds();
        assert_eq!(d.lower.lo, rat(1, 1));
        let b = s("complement:builtin:squares").banach_bounds();
        assert_eq!(b.lower.lo, rat(1, 1));
    }

    #[test]
    fn finxfin_structure() {
        assert_eq!(s("builtin:nu2_ge(3)").finxfin_member(), Tri::No);
        assert_eq!(s("ap:1,2").finxfin_member(), Tri::Yes);
        assert_eq!(s("ap:2,2").finxfin_member(), Tri::No);
        assert_eq!(s("ap:6,8").finxfin_member(), Tri::Yes);
        assert_eq!(s("builtin:powers2").finxfin_member(), Tri::Yes);
        assert_eq!(s("builtin:squares").finxfin_member(), Tri::No);
        assert_eq!(s("complement:builtin:nu2_ge(4)").finxfin_member(), Tri::Yes);
        assert_eq!(s("complement:builtin:powers2").finxfin_member(), Tri::No);
    }

    #[test]
    fn max_gap_of_patterns() {
        assert_eq!(s("ap:1,3").eventual_pattern().unwrap().max_gap(), Some(3));
        assert_eq!(s("finite:{2}").eventual_pattern().unwrap().max_gap(), None);
    }
}

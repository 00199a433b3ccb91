//! Oscillation pairs for bounded divergent sequences: two selectors through the same stem, one
//! following the upper and one the lower limit points of `x`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::serialize_display;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sequence::Sequence;
use crate::sigma::Selector;
use crate::summability::{transform_exact, SummabilityMatrix};

const INDEX_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, Serialize)]
pub struct OscillationPair {
    pub row: u64,
    /// Estimated `limsup x` and `liminf x`.
    #[serde(with = "rational::as_str")]
    pub alpha: Rational,
    #[serde(with = "rational::as_str")]
    pub beta: Rational,
    #[serde(serialize_with = "serialize_display")]
    pub sigma1: Selector,
    #[serde(serialize_with = "serialize_display")]
    pub sigma2: Selector,
    /// `(A σ1(x))_row` and `(A σ2(x))_row`.
    #[serde(with = "rational::as_str")]
    pub y1: Rational,
    #[serde(with = "rational::as_str")]
    pub y2: Rational,
    #[serde(with = "rational::as_str")]
    pub gap: Rational,
    /// `(alpha - beta) - 4·tol`.
    #[serde(with = "rational::as_str")]
    pub bound: Rational,
    pub meets: bool,
}

fn extend(
    stem: &[u64],
    x: &Sequence,
    target: &Rational,
    tol: &Rational,
    need: u64,
) -> Result<Selector> {
    let mut picks = stem.to_vec();
    let mut next = stem.last().copied().unwrap_or(0) + 1;
    while (picks.len() as u64) < need {
        if next > INDEX_CAP {
            return Err(Error::SearchCap(format!(
                "fewer than {need} indices within {} of {} below {INDEX_CAP}",
                rational::fmt(tol),
                rational::fmt(target)
            )));
        }
        if (x.value(next)? - target).abs() <= *tol {
            picks.push(next);
        }
        next += 1;
    }
    Selector::finite(picks)
}

/// Selectors `σ1, σ2` extending `stem` that track the prefix limsup `α` and liminf `β` of `x`
/// (estimated on `(M/2, M]` with `M = max(8·need, 64)`, where `need` is the widest row support up
/// to `n`), together with the transform gap at row `n`.
pub fn oscillation_pair(
    stem: &[u64],
    x: &Sequence,
    a: &SummabilityMatrix,
    n: u64,
    tol: &Rational,
) -> Result<OscillationPair> {
    if n == 0 {
        return Err(Error::InvalidArgument("row index starts at 1".into()));
    }
    if tol.is_negative() {
        return Err(Error::InvalidArgument(
            "tolerance must be nonnegative".into(),
        ));
    }
    Selector::finite(stem.to_vec())?;
    if !a.is_row_finite() {
        return Err(Error::Unsupported(
            "oscillation pairs need a row-finite matrix".into(),
        ));
    }
    let mut need = stem.len() as u64;
    for m in 1..=n {
        need = need.max(a.last_nonzero(m)?);
    }
    let big_m = (8 * need).max(64);
    let window = x.prefix(big_m)?.split_off((big_m / 2) as usize);
    let alpha = rational::max_of(&window).expect("nonempty window");
    let beta = window.iter().min().expect("nonempty window").clone();
    let two_tol = tol * rational::int(2);
    if &alpha - &beta <= two_tol {
        return Err(Error::Domain(format!(
            "separation not detectable at scale {big_m}: limsup ≈ {}, liminf ≈ {}",
            rational::fmt(&alpha),
            rational::fmt(&beta)
        )));
    }
    let sigma1 = extend(stem, x, &alpha, tol, need)?;
    let sigma2 = extend(stem, x, &beta, tol, need)?;
    let row_value = |s: &Selector| -> Result<Rational> {
        let values: Vec<Rational> = s
            .prefix(need)?
            .into_iter()
            .map(|i| x.value(i))
            .collect::<Result<_>>()?;
        Ok(transform_exact(a, &Sequence::Prefix(values), n)?
            .pop()
            .unwrap_or_else(Rational::zero))
    };
    let y1 = row_value(&sigma1)?;
    let y2 = row_value(&sigma2)?;
    let gap = (&y1 - &y2).abs();
    let bound = &alpha - &beta - tol * rational::int(4);
    Ok(OscillationPair {
        row: n,
        meets: gap >= bound,
        alpha,
        beta,
        sigma1,
        sigma2,
        y1,
        y2,
        gap,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn alt01() -> Sequence {
        Sequence::Periodic(vec![int(0), int(1)])
    }

    #[test]
    fn cesaro_pair_on_alternating() {
        let p = oscillation_pair(&[], &alt01(), &SummabilityMatrix::Cesaro, 32, &int(0)).unwrap();
        assert_eq!((p.alpha.clone(), p.beta.clone()), (int(1), int(0)));
        assert_eq!(p.sigma1.prefix(3).unwrap(), vec![2, 4, 6]);
        assert_eq!(p.sigma2.prefix(3).unwrap(), vec![1, 3, 5]);
        assert_eq!(p.gap, int(1));
        assert!(p.meets);
    }

    #[test]
    fn identity_pair_with_stem() {
        for n in 2..6 {
            let p =
                oscillation_pair(&[1], &alt01(), &SummabilityMatrix::Identity, n, &int(0)).unwrap();
            assert_eq!(p.gap, int(1));
        }
    }

    #[test]
    fn stem_costs_one_row_under_cesaro() {
        let p = oscillation_pair(&[1], &alt01(), &SummabilityMatrix::Cesaro, 256, &int(0)).unwrap();
        assert_eq!(p.gap, rat(255, 256));
        assert!(p.gap >= rat(9, 10));
    }

    #[test]
    fn convergent_sequence_is_rejected() {
        let err = oscillation_pair(
            &[],
            &Sequence::Constant(int(3)),
            &SummabilityMatrix::Cesaro,
            8,
            &int(0),
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}

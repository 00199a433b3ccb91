use num_traits::Zero;
use serde::Serialize;

use super::{SetDescription, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    /// `(n, |S ∩ [1, n]|)` at each checkpoint.
    pub prefix_counts: Vec<(u64, u64)>,
    #[serde(with = "rational::as_str")]
    pub lower_estimate: Rational,
    #[serde(with = "rational::as_str")]
    pub upper_estimate: Rational,
    #[serde(with = "rational::as_str_opt")]
    pub exact: Option<Rational>,
    #[serde(with = "rational::as_str_opt")]
    pub banach_upper: Option<Rational>,
    pub window: Option<u64>,
}

impl DensityReport {
    pub fn ratios(&self) -> Vec<(u64, Rational)> {
        self.prefix_counts
            .iter()
            .map(|&(n, c)| (n, rational::rat(c as i64, n as i64)))
            .collect()
    }
}

/// Prefix density profile of `set` at the given checkpoints (`<= scale`), optionally with the
/// maximal window density over windows of length `window` inside `[1, scale]`.
pub fn density_report(
    set: &SetDescription,
    scale: u64,
    checkpoints: &[u64],
    window: Option<u64>,
) -> Result<DensityReport> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument(
            "checkpoints must be nonempty".into(),
        ));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be increasing".into(),
        ));
    }
    if checkpoints[0] == 0 || *checkpoints.last().expect("nonempty") > scale {
        return Err(Error::InvalidArgument(
            "checkpoints must lie in [1, scale]".into(),
        ));
    }
    if window == Some(0) || window.is_some_and(|l| l > scale) {
        return Err(Error::InvalidArgument(
            "window must lie in [1, scale]".into(),
        ));
    }

    let prefix_counts = if set.has_closed_count() {
        checkpoints
            .iter()
            .map(|&n| set.count_prefix(n).map(|c| (n, c)))
            .collect::<Result<Vec<_>>>()?
    } else {
        let last = *checkpoints.last().expect("nonempty");
        check_cap(last)?;
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut running = 0u64;
        let mut next = checkpoints.iter().peekable();
        for n in 1..=last {
            if set.member(n) {
                running += 1;
            }
            if next.peek() == Some(&&n) {
                out.push((n, running));
                next.next();
            }
        }
        out
    };

    let exact = set.exact_density();
    let (lower_estimate, upper_estimate) = match &exact {
        Some(d) => (d.clone(), d.clone()),
        None => {
            let ratios: Vec<Rational> = prefix_counts
                .iter()
                .map(|&(n, c)| rational::rat(c as i64, n as i64))
                .collect();
            (
                ratios.iter().min().cloned().unwrap_or_else(Rational::zero),
                ratios.iter().max().cloned().unwrap_or_else(Rational::zero),
            )
        }
    };

    let banach_upper = window
        .map(|l| banach_window_max(set, scale, l))
        .transpose()?;

    Ok(DensityReport {
        prefix_counts,
        lower_estimate,
        upper_estimate,
        exact,
        banach_upper,
        window,
    })
}

fn check_cap(n: u64) -> Result<()> {
    if n > ENUMERATION_CAP {
        Err(Error::ScaleCap {
            requested: n,
            cap: ENUMERATION_CAP,
        })
    } else {
        Ok(())
    }
}

/// `max_s |S ∩ [s, s + L - 1]| / L` over windows inside `[1, scale]`.
pub fn banach_window_max(set: &SetDescription, scale: u64, len: u64) -> Result<Rational> {
    check_cap(scale)?;
    if len == 0 || len > scale {
        return Err(Error::InvalidArgument(
            "window must lie in [1, scale]".into(),
        ));
    }
    let bits: Vec<bool> = (1..=scale).map(|n| set.member(n)).collect();
    Ok(rational::rat(
        max_window_count(&bits, len as usize) as i64,
        len as i64,
    ))
}

pub(crate) fn max_window_count(bits: &[bool], len: usize) -> usize {
    if len == 0 || len > bits.len() {
        return 0;
    }
    let mut count = bits[..len].iter().filter(|&&b| b).count();
    let mut best = count;
    for i in len..bits.len() {
        if bits[i] {
            count += 1;
        }
        if bits[i - len] {
            count -= 1;
        }
        best = best.max(count);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::setlang::parse_set;

    #[test]
    fn ap_report_is_exact() {
        let r = density_report(&parse_set("ap:3,4").unwrap(), 1000, &[1000], None).unwrap();
        assert_eq!(r.exact, Some(rat(1, 4)));
        assert_eq!(r.lower_estimate, rat(1, 4));
        assert_eq!(r.upper_estimate, rat(1, 4));
        assert_eq!(r.prefix_counts, vec![(1000, 250)]);
    }

    #[test]
    fn squares_report_estimates_without_exact() {
        let r = density_report(&SetDescription::squares(), 10_000, &[10_000], None).unwrap();
        assert_eq!(r.exact, None);
        assert_eq!(r.upper_estimate, rat(1, 100));
    }

    #[test]
    fn banach_window_for_evens() {
        let r = density_report(&parse_set("ap:2,2").unwrap(), 100, &[100], Some(10)).unwrap();
        assert_eq!(r.banach_upper, Some(rat(1, 2)));
    }

    #[test]
    fn enumerated_report_matches_closed_counts() {
        let s = parse_set("union:builtin:squares|ap:5,7").unwrap();
        let r = density_report(&s, 500, &[10, 100, 500], Some(16)).unwrap();
        for (n, c) in r.prefix_counts {
            assert_eq!(c, (1..=n).filter(|&k| s.member(k)).count() as u64);
        }
    }

    #[test]
    fn invalid_checkpoints() {
        let s = SetDescription::squares();
        assert!(density_report(&s, 10, &[], None).is_err());
        assert!(density_report(&s, 10, &[5, 3], None).is_err());
        assert!(density_report(&s, 10, &[11], None).is_err());
        assert!(density_report(&s, 10, &[10], Some(0)).is_err());
    }
}

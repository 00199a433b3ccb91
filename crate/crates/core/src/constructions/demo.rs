//! Round-by-round demonstration that every basic open set `[stem]` of selectors contains a
//! selector whose transform escapes the ideal-convergence bound of that round.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::escape::{escape_rowfinite, escape_unbounded, EscapeCaps, EscapeResult};
use super::oscillation::{oscillation_pair, OscillationPair};
use crate::error::{Error, Result};
use crate::ideals::IdealPresentation;
use crate::rational::{self, Rational};
use crate::sequence::{Growth, Sequence};
use crate::summability::SummabilityMatrix;

/// Row used for oscillation pairs on bounded sequences.
pub const OSCILLATION_ROW: u64 = 256;

#[derive(Debug, Clone)]
pub enum StemSchedule {
    Fixed(Vec<Vec<u64>>),
    /// Stems drawn with [`random_stem`] from a ChaCha8 stream.
    Random(u64),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemoStep {
    Escape(EscapeResult),
    Oscillation(OscillationPair),
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoRound {
    pub round: u64,
    pub stem: Vec<u64>,
    #[serde(with = "rational::as_str")]
    pub bound: Rational,
    pub step: DemoStep,
    pub verified: bool,
}

/// A stem of length `0..=3` starting in `1..4` with gaps in `1..=4`.
pub fn random_stem(rng: &mut impl Rng) -> Vec<u64> {
    let len = rng.gen_range(0..=3);
    let mut out = Vec::with_capacity(len);
    let mut next = rng.gen_range(1..4u64);
    for _ in 0..len {
        out.push(next);
        next += rng.gen_range(1..=4u64);
    }
    out
}

/// One round per entry of `m_schedule`. Unbounded `x` uses the row-finite escape when `A` is
/// row-finite and the single-row escape on row 1 otherwise; bounded `x` uses an oscillation pair
/// at row [`OSCILLATION_ROW`] and the round's bound is the required gap.
pub fn meagerness_demo(
    x: &Sequence,
    a: &SummabilityMatrix,
    ideal: &IdealPresentation,
    m_schedule: &[Rational],
    stems: &StemSchedule,
    scale: u64,
) -> Result<Vec<DemoRound>> {
    let unbounded = x.is_unbounded();
    if !unbounded && !matches!(x.growth(), Growth::Bounded(_)) {
        return Err(Error::Precondition(format!(
            "{x} is neither tagged unbounded nor bounded"
        )));
    }
    let mut rng = match stems {
        StemSchedule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        StemSchedule::Fixed(list) => {
            if list.len() < m_schedule.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} stems for {} rounds",
                    list.len(),
                    m_schedule.len()
                )));
            }
            None
        }
    };
    let mut out = Vec::with_capacity(m_schedule.len());
    for (r, m) in m_schedule.iter().enumerate() {
        let stem = match (&mut rng, stems) {
            (Some(rng), _) => random_stem(rng),
            (None, StemSchedule::Fixed(list)) => list[r].clone(),
            (None, StemSchedule::Random(_)) => unreachable!("random schedules own a generator"),
        };
        let (step, verified) = if unbounded {
            let res = if a.is_row_finite() {
                escape_rowfinite(&stem, a, x, ideal, m, 1, scale, EscapeCaps::default())?
            } else {
                let row = |k: u64| a.entry(1, k);
                escape_unbounded(&stem, &row, x, m, EscapeCaps::default())?
            };
            let ok = res.achieved >= res.bound;
            (DemoStep::Escape(res), ok)
        } else {
            let pair = oscillation_pair(
                &stem,
                x,
                a,
                OSCILLATION_ROW,
                &Rational::from_integer(0.into()),
            )?;
            let ok = pair.gap >= *m;
            (DemoStep::Oscillation(pair), ok)
        };
        out.push(DemoRound {
            round: r as u64 + 1,
            stem,
            bound: m.clone(),
            step,
            verified,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn five_cesaro_escapes() {
        let ms: Vec<Rational> = (0..5).map(|i| int(1 << i)).collect();
        let rounds = meagerness_demo(
            &Sequence::Linear(int(1)),
            &SummabilityMatrix::Cesaro,
            &IdealPresentation::z(),
            &ms,
            &StemSchedule::Random(7),
            4096,
        )
        .unwrap();
        assert_eq!(rounds.len(), 5);
        assert!(rounds.iter().all(|r| r.verified));
    }

    #[test]
    fn bounded_rounds_use_oscillation_pairs() {
        let ms = vec![rat(9, 10); 3];
        let rounds = meagerness_demo(
            &Sequence::Periodic(vec![int(0), int(1)]),
            &SummabilityMatrix::Cesaro,
            &IdealPresentation::z(),
            &ms,
            &StemSchedule::Random(1),
            1024,
        )
        .unwrap();
        assert!(rounds
            .iter()
            .all(|r| r.verified && matches!(r.step, DemoStep::Oscillation(_))));
    }

    #[test]
    fn zero_rounds() {
        let rounds = meagerness_demo(
            &Sequence::Linear(int(1)),
            &SummabilityMatrix::Cesaro,
            &IdealPresentation::z(),
            &[],
            &StemSchedule::Fixed(Vec::new()),
            64,
        )
        .unwrap();
        assert!(rounds.is_empty());
    }

    #[test]
    fn stems_are_reproducible() {
        let a: Vec<Vec<u64>> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..10).map(|_| random_stem(&mut rng)).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<Vec<u64>> = (0..10).map(|_| random_stem(&mut rng)).collect();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|s| s.len() <= 3 && s.windows(2).all(|w| w[0] < w[1])));
    }
}

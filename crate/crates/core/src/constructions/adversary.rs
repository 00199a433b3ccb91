//! A 0/1 adversary against regular matrices: builds `x ∈ {0,1}^N` whose transform `Ax` keeps
//! visiting both `[u, ∞)` and `(-∞, l]` with positive density, and certifies it.

use num_traits::Zero;
use serde::Serialize;

use super::certificate::{build_certificate, verify_certificate, EncodedSequence};
use super::OscillationCertificate;
use crate::error::{Error, Result};
use crate::ideals::IdealPresentation;
use crate::rational::{self, Rational};
use crate::sequence::Sequence;
use crate::summability::{regularity_verdict, transform_exact, Overall, SummabilityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryMode {
    /// Alternating constant blocks, each as wide as the support of the base row at its start.
    Blocks,
    /// Alternating phases that run until enough fresh rows cross the active threshold.
    Greedy,
}

impl std::str::FromStr for AdversaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blocks" => Ok(AdversaryMode::Blocks),
            "greedy" => Ok(AdversaryMode::Greedy),
            other => Err(Error::syntax(
                0,
                format!("unknown mode '{other}' (blocks, greedy)"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryConfig {
    pub mode: AdversaryMode,
    pub scale: u64,
    pub lower: Rational,
    pub upper: Rational,
    /// Ideal under which the matrix must not be refuted regular.
    pub ideal: IdealPresentation,
    /// Required `δ_U` and `δ_L`.
    pub min_density: Rational,
}

impl AdversaryConfig {
    pub fn new(mode: AdversaryMode, scale: u64) -> Self {
        AdversaryConfig {
            mode,
            scale,
            lower: rational::rat(2, 5),
            upper: rational::rat(3, 5),
            ideal: IdealPresentation::fin(),
            min_density: rational::rat(1, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseRecord {
    pub value: u8,
    /// Columns `start..=end` hold `value`.
    pub start: u64,
    pub end: u64,
    pub hits: u64,
    pub quota: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryDiagnostic {
    pub reason: String,
    pub phase: Option<PhaseRecord>,
    /// Last transform values before giving up, as `(n, (Ax)_n)`.
    pub profile: Vec<(u64, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryReport {
    pub mode: AdversaryMode,
    pub matrix: String,
    pub scale: u64,
    pub x: Vec<u8>,
    pub phases: Vec<PhaseRecord>,
    pub certificate: Option<OscillationCertificate>,
    pub diagnostic: Option<AdversaryDiagnostic>,
}

/// The row whose support sets the block width at column `p`.
fn width_at(a: &SummabilityMatrix, p: u64) -> Result<u64> {
    match a {
        SummabilityMatrix::RowDrop { base, .. } => width_at(base, p),
        SummabilityMatrix::Explicit {
            rows,
            base: Some(base),
        } if p as usize <= rows.len() => width_at(base, p),
        _ => {
            let r = a.last_nonzero(p)?;
            if r == 0 {
                return Ok(1);
            }
            let l = a.first_nonzero(p)?;
            Ok((r + 1).saturating_sub(l).max(1))
        }
    }
}

fn blocks(a: &SummabilityMatrix, len: u64) -> Result<Vec<u8>> {
    let mut x = Vec::with_capacity(len as usize);
    let mut bit = 1u8;
    while (x.len() as u64) < len {
        let p = x.len() as u64 + 1;
        let w = width_at(a, p)?.min(len - x.len() as u64);
        x.extend(std::iter::repeat_n(bit, w as usize));
        bit ^= 1;
    }
    Ok(x)
}

fn profile(y: &[Rational], count: usize) -> Vec<(u64, String)> {
    let start = y.len().saturating_sub(count);
    y[start..]
        .iter()
        .enumerate()
        .map(|(i, v)| ((start + i + 1) as u64, rational::fmt(v)))
        .collect()
}

struct Greedy {
    x: Vec<u8>,
    phases: Vec<PhaseRecord>,
    stalled: Option<AdversaryDiagnostic>,
}

fn greedy(a: &SummabilityMatrix, cfg: &AdversaryConfig) -> Result<Greedy> {
    let n = cfg.scale;
    let mut x: Vec<u8> = Vec::new();
    let mut xs: Vec<Rational> = Vec::new();
    let mut sums: Vec<Rational> = vec![Rational::zero()];
    let mut y: Vec<Rational> = Vec::new();
    let mut phases = Vec::new();
    let mut value = 1u8;
    'phases: while (y.len() as u64) < n {
        let start_len = x.len() as u64;
        let cap = 64 * start_len + 1024;
        let quota = (y.len() as u64).div_ceil(4).max(1);
        let mut hits = 0u64;
        let mut steps = 0u64;
        loop {
            // finalize every row whose support is already written
            while (y.len() as u64) < n {
                let row = y.len() as u64 + 1;
                let need = a.support_bound(row).ok_or_else(|| {
                    Error::Unsupported("greedy adversary needs row-finite rows".into())
                })?;
                if need > x.len() as u64 {
                    break;
                }
                let v = a.row_value_with_sums(row, &xs, &sums)?;
                let hit = if value == 1 {
                    v >= cfg.upper
                } else {
                    v <= cfg.lower
                };
                hits += hit as u64;
                y.push(v);
            }
            let record = PhaseRecord {
                value,
                start: start_len + 1,
                end: x.len() as u64,
                hits,
                quota,
            };
            if hits >= quota || y.len() as u64 >= n {
                phases.push(record);
                value ^= 1;
                continue 'phases;
            }
            if steps >= cap {
                let stalled = AdversaryDiagnostic {
                    reason: format!("phase step cap {cap} exhausted"),
                    phase: Some(record),
                    profile: profile(&y, 16),
                };
                return Ok(Greedy {
                    x,
                    phases,
                    stalled: Some(stalled),
                });
            }
            x.push(value);
            let v = rational::int(value as u64);
            let next = sums.last().expect("nonempty") + &v;
            xs.push(v);
            sums.push(next);
            steps += 1;
        }
    }
    Ok(Greedy {
        x,
        phases,
        stalled: None,
    })
}

/// Runs the adversary on a row-finite matrix that is not refuted regular under `cfg.ideal`.
///
/// The report carries a self-audited certificate at scales `N/4, N/2, N` when both densities
/// reach `cfg.min_density`, and a diagnostic otherwise.
pub fn steinhaus_adversary(
    a: &SummabilityMatrix,
    cfg: &AdversaryConfig,
) -> Result<AdversaryReport> {
    if cfg.scale < 4 {
        return Err(Error::InvalidArgument(
            "adversary scale must be at least 4".into(),
        ));
    }
    let (zero, one) = (Rational::zero(), rational::int(1));
    if !(zero < cfg.lower && cfg.lower < cfg.upper && cfg.upper < one) {
        return Err(Error::InvalidArgument(
            "thresholds need 0 < l < u < 1".into(),
        ));
    }
    if !a.is_row_finite() {
        return Err(Error::Unsupported(
            "the adversary needs a row-finite matrix".into(),
        ));
    }
    let v = regularity_verdict(a, &cfg.ideal, cfg.scale.min(1 << 14), 4)?;
    if let Overall::NotRegular { condition, witness } = &v.overall {
        return Err(Error::Precondition(format!(
            "{a} is not regular under {}: {condition} fails ({witness})",
            cfg.ideal.name()
        )));
    }
    let need = (1..=cfg.scale)
        .map(|n| a.support_bound(n).unwrap_or(0))
        .max()
        .unwrap_or(0)
        .max(1);

    let (mut x, phases, stalled) = match cfg.mode {
        AdversaryMode::Blocks => (blocks(a, need)?, Vec::new(), None),
        AdversaryMode::Greedy => {
            let g = greedy(a, cfg)?;
            (g.x, g.phases, g.stalled)
        }
    };
    let mut report = AdversaryReport {
        mode: cfg.mode,
        matrix: a.to_string(),
        scale: cfg.scale,
        x: Vec::new(),
        phases,
        certificate: None,
        diagnostic: None,
    };
    if let Some(d) = stalled {
        report.x = x;
        report.diagnostic = Some(d);
        return Ok(report);
    }
    x.resize(need as usize, 0);
    let xs: Vec<Rational> = x.iter().map(|&b| rational::int(b as u64)).collect();
    let y = transform_exact(a, &Sequence::Prefix(xs), cfg.scale)?;
    let n = cfg.scale;
    let mut cert = build_certificate(&y, &cfg.lower, &cfg.upper, &[n / 4, n / 2, n])?;
    cert.matrix = Some(a.to_string());
    cert.x = Some(EncodedSequence::rle01(&x)?);
    report.x = x;
    if !cert.meets(&cfg.min_density) {
        report.diagnostic = Some(AdversaryDiagnostic {
            reason: format!(
                "densities δ_U = {}, δ_L = {} below {}",
                rational::fmt(&cert.delta_upper),
                rational::fmt(&cert.delta_lower),
                rational::fmt(&cfg.min_density)
            ),
            phase: None,
            profile: profile(&y, 16),
        });
        return Ok(report);
    }
    let audit = verify_certificate(&cert)?;
    if !audit.ok {
        return Err(Error::Domain(format!(
            "certificate failed its self-audit: {}",
            audit.mismatches.join("; ")
        )));
    }
    report.certificate = Some(cert);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::setlang::SetDescription;

    #[test]
    fn cesaro_blocks_are_dyadic() {
        let x = blocks(&SummabilityMatrix::Cesaro, 16).unwrap();
        assert_eq!(x, vec![1, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn identity_alternates() {
        let r = steinhaus_adversary(
            &SummabilityMatrix::Identity,
            &AdversaryConfig::new(AdversaryMode::Blocks, 64),
        )
        .unwrap();
        assert_eq!(&r.x[..4], &[1, 0, 1, 0]);
        let c = r.certificate.unwrap();
        assert_eq!((c.delta_upper, c.delta_lower), (rat(1, 2), rat(1, 2)));
    }

    #[test]
    fn cesaro_blocks_certificate() {
        let r = steinhaus_adversary(
            &SummabilityMatrix::Cesaro,
            &AdversaryConfig::new(AdversaryMode::Blocks, 1 << 12),
        )
        .unwrap();
        let c = r.certificate.expect("certificate");
        assert!(c.delta_upper >= rat(1, 10) && c.delta_lower >= rat(1, 10));
    }

    #[test]
    fn rowdrop_needs_the_right_ideal() {
        let a = SummabilityMatrix::row_drop(SummabilityMatrix::Cesaro, SetDescription::squares());
        let err = steinhaus_adversary(&a, &AdversaryConfig::new(AdversaryMode::Blocks, 1024));
        assert!(matches!(err, Err(Error::Precondition(_))));
        let mut cfg = AdversaryConfig::new(AdversaryMode::Blocks, 1024);
        cfg.ideal = IdealPresentation::z();
        assert!(steinhaus_adversary(&a, &cfg).unwrap().certificate.is_some());
    }

    #[test]
    fn greedy_never_returns_unaudited_certificates() {
        for a in [SummabilityMatrix::Cesaro, SummabilityMatrix::Identity] {
            let r =
                steinhaus_adversary(&a, &AdversaryConfig::new(AdversaryMode::Greedy, 512)).unwrap();
            assert!(r.certificate.is_some() != r.diagnostic.is_some());
            if let Some(c) = r.certificate {
                assert!(verify_certificate(&c).unwrap().ok);
            }
        }
    }

    #[test]
    fn thresholds_are_checked() {
        let mut cfg = AdversaryConfig::new(AdversaryMode::Blocks, 64);
        cfg.upper = int(1);
        assert!(steinhaus_adversary(&SummabilityMatrix::Cesaro, &cfg).is_err());
    }
}

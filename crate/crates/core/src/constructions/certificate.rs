//! Oscillation certificates: two threshold sets `U = {n : y_n >= u}` and `L = {n : y_n <= l}` with
//! exact prefix densities at witnessed scales.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::sha256_hex;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sequence::Sequence;
use crate::summability::{transform_exact, SummabilityMatrix};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleWitness {
    pub scale: u64,
    pub upper_count: u64,
    pub lower_count: u64,
    #[serde(with = "rational::as_str")]
    pub upper_density: Rational,
    #[serde(with = "rational::as_str")]
    pub lower_density: Rational,
}

/// A finite sequence prefix in one of three encodings: `rle01` (`first:len,len,...` runs of a
/// 0/1 sequence), `inline` (comma-separated rationals) or `spec` (a sequence expression).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSequence {
    pub encoding: String,
    pub data: String,
    pub length: u64,
    /// Digest of the decoded prefix, see [`values_digest`].
    pub sha256: String,
}

/// SHA-256 of the comma-joined canonical rationals.
pub fn values_digest(values: &[Rational]) -> String {
    let text: Vec<String> = values.iter().map(rational::fmt).collect();
    sha256_hex(text.join(",").as_bytes())
}

impl EncodedSequence {
    pub fn rle01(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("rle01 needs a 0/1 sequence".into()));
        }
        let mut runs: Vec<String> = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            let j = bits[i..]
                .iter()
                .position(|&b| b != bits[i])
                .map_or(bits.len(), |p| i + p);
            runs.push((j - i).to_string());
            i = j;
        }
        let first = bits.first().copied().unwrap_or(0);
        let values: Vec<Rational> = bits.iter().map(|&b| rational::int(b as u64)).collect();
        Ok(EncodedSequence {
            encoding: "rle01".into(),
            data: format!("{first}:{}", runs.join(",")),
            length: bits.len() as u64,
            sha256: values_digest(&values),
        })
    }

    pub fn inline(values: &[Rational]) -> Self {
        EncodedSequence {
            encoding: "inline".into(),
            data: values
                .iter()
                .map(rational::fmt)
                .collect::<Vec<_>>()
                .join(","),
            length: values.len() as u64,
            sha256: values_digest(values),
        }
    }

    pub fn spec(x: &Sequence, length: u64) -> Result<Self> {
        Ok(EncodedSequence {
            encoding: "spec".into(),
            data: x.to_string(),
            length,
            sha256: values_digest(&x.prefix(length)?),
        })
    }

    pub fn decode(&self) -> Result<Vec<Rational>> {
        let values = match self.encoding.as_str() {
            "rle01" => {
                let (first, runs) = self
                    .data
                    .split_once(':')
                    .ok_or_else(|| Error::syntax(0, "rle01 data needs 'first:runs'"))?;
                let mut bit: u64 = match first {
                    "0" => 0,
                    "1" => 1,
                    _ => return Err(Error::syntax(0, "rle01 start must be 0 or 1")),
                };
                let mut out = Vec::new();
                for run in runs.split(',').filter(|r| !r.is_empty()) {
                    let len: usize = run
                        .parse()
                        .map_err(|_| Error::syntax(0, format!("bad run length '{run}'")))?;
                    out.extend(std::iter::repeat_n(rational::int(bit), len));
                    bit = 1 - bit;
                }
                out
            }
            "inline" => {
                if self.data.is_empty() {
                    Vec::new()
                } else {
                    self.data
                        .split(',')
                        .map(rational::parse)
                        .collect::<Result<_>>()?
                }
            }
            "spec" => Sequence::parse(&self.data)?.prefix(self.length)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown encoding '{other}'"
                )))
            }
        };
        if values.len() as u64 != self.length {
            return Err(Error::InvalidArgument(format!(
                "encoded length {} but {} values decoded",
                self.length,
                values.len()
            )));
        }
        Ok(values)
    }

    /// The decoded prefix as a sequence (a finite prefix, or the expression itself).
    pub fn sequence(&self) -> Result<Sequence> {
        match self.encoding.as_str() {
            "spec" => Sequence::parse(&self.data),
            _ => Ok(Sequence::Prefix(self.decode()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OscillationCertificate {
    pub version: u32,
    /// Matrix expression when the certified values are `Ax`; absent when they are `x` itself.
    pub matrix: Option<String>,
    pub x: Option<EncodedSequence>,
    #[serde(with = "rational::as_str")]
    pub lower: Rational,
    #[serde(with = "rational::as_str")]
    pub upper: Rational,
    pub scale: u64,
    pub witnesses: Vec<ScaleWitness>,
    /// Minimum upper-set density over the witnesses.
    #[serde(with = "rational::as_str")]
    pub delta_upper: Rational,
    #[serde(with = "rational::as_str")]
    pub delta_lower: Rational,
    /// Digest of the certified values `y_1..y_N`.
    pub values_sha256: String,
}

impl OscillationCertificate {
    pub fn is_valid(&self) -> bool {
        self.lower < self.upper
            && !self.witnesses.is_empty()
            && self.delta_upper > Rational::zero()
            && self.delta_lower > Rational::zero()
    }

    /// Valid with both deltas at least `min`.
    pub fn meets(&self, min: &Rational) -> bool {
        self.is_valid() && self.delta_upper >= *min && self.delta_lower >= *min
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::syntax(e.column(), e.to_string()))
    }

    /// The stored values `y_1..y_N`: `A x` when a matrix is recorded, otherwise `x`.
    pub fn recompute_values(&self) -> Result<Vec<Rational>> {
        let x = self
            .x
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("certificate carries no sequence".into()))?;
        let xs = x.decode()?;
        if values_digest(&xs) != x.sha256 {
            return Err(Error::InvalidArgument("sequence digest mismatch".into()));
        }
        match &self.matrix {
            Some(m) => {
                let a = SummabilityMatrix::parse(m)?;
                transform_exact(&a, &x.sequence()?, self.scale)
            }
            None => {
                if xs.len() < self.scale as usize {
                    return Err(Error::InvalidArgument(
                        "sequence shorter than the scale".into(),
                    ));
                }
                Ok(xs[..self.scale as usize].to_vec())
            }
        }
    }
}

fn witness(values: &[Rational], lower: &Rational, upper: &Rational, scale: u64) -> ScaleWitness {
    let prefix = &values[..scale as usize];
    let upper_count = prefix.iter().filter(|v| *v >= upper).count() as u64;
    let lower_count = prefix.iter().filter(|v| *v <= lower).count() as u64;
    let s = rational::int(scale);
    ScaleWitness {
        scale,
        upper_count,
        lower_count,
        upper_density: rational::int(upper_count) / &s,
        lower_density: rational::int(lower_count) / &s,
    }
}

/// Certificate for `values` (indexed from 1) with thresholds `l < u` at the given scales; the
/// largest scale is the certificate scale. The caller fills in `matrix` and `x`.
pub fn build_certificate(
    values: &[Rational],
    lower: &Rational,
    upper: &Rational,
    scales: &[u64],
) -> Result<OscillationCertificate> {
    if lower >= upper {
        return Err(Error::InvalidArgument("thresholds need l < u".into()));
    }
    let scale = scales
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidArgument("no scales given".into()))?;
    if scales.contains(&0) || scale as usize > values.len() {
        return Err(Error::InvalidArgument(format!(
            "scales must lie in [1, {}]",
            values.len()
        )));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let witnesses: Vec<ScaleWitness> = sorted
        .iter()
        .map(|&s| witness(values, lower, upper, s))
        .collect();
    let min = |f: fn(&ScaleWitness) -> &Rational| {
        witnesses
            .iter()
            .map(f)
            .min()
            .cloned()
            .unwrap_or_else(Rational::one)
    };
    Ok(OscillationCertificate {
        version: CERTIFICATE_VERSION,
        matrix: None,
        x: None,
        lower: lower.clone(),
        upper: upper.clone(),
        scale,
        delta_upper: min(|w| &w.upper_density),
        delta_lower: min(|w| &w.lower_density),
        witnesses,
        values_sha256: values_digest(&values[..scale as usize]),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateAudit {
    pub ok: bool,
    pub mismatches: Vec<String>,
}

/// Recomputes the certified values from the recorded matrix and sequence and checks every stored
/// count, density, delta and digest.
pub fn verify_certificate(cert: &OscillationCertificate) -> Result<CertificateAudit> {
    let mut mismatches = Vec::new();
    if cert.version != CERTIFICATE_VERSION {
        mismatches.push(format!("unsupported version {}", cert.version));
    }
    let values = match cert.recompute_values() {
        Ok(v) => v,
        Err(e) => {
            mismatches.push(format!("values: {e}"));
            return Ok(CertificateAudit {
                ok: false,
                mismatches,
            });
        }
    };
    if values_digest(&values) != cert.values_sha256 {
        mismatches.push("values digest differs".into());
    }
    let scales: Vec<u64> = cert.witnesses.iter().map(|w| w.scale).collect();
    match build_certificate(&values, &cert.lower, &cert.upper, &scales) {
        Ok(fresh) => {
            if fresh.scale != cert.scale {
                mismatches.push(format!(
                    "scale {} but witnesses reach {}",
                    cert.scale, fresh.scale
                ));
            }
            for (stored, again) in cert.witnesses.iter().zip(&fresh.witnesses) {
                if stored != again {
                    mismatches.push(format!("witness at scale {} differs", stored.scale));
                }
            }
            if cert.witnesses.len() != fresh.witnesses.len() {
                mismatches.push("duplicate or unordered witness scales".into());
            }
            if fresh.delta_upper != cert.delta_upper {
                mismatches.push("delta_upper differs".into());
            }
            if fresh.delta_lower != cert.delta_lower {
                mismatches.push("delta_lower differs".into());
            }
        }
        Err(e) => mismatches.push(format!("witnesses: {e}")),
    }
    if !cert.is_valid() {
        mismatches.push("certificate is not valid (needs l < u and positive deltas)".into());
    }
    Ok(CertificateAudit {
        ok: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn alternating(n: usize) -> Vec<Rational> {
        (1..=n).map(|i| int((i % 2 == 0) as u64)).collect()
    }

    #[test]
    fn alternating_certificate() {
        let y = alternating(64);
        let cert = build_certificate(&y, &int(0), &int(1), &[16, 32, 64]).unwrap();
        assert_eq!(cert.delta_upper, rat(1, 2));
        assert_eq!(cert.delta_lower, rat(1, 2));
        assert!(cert.meets(&rat(1, 10)));
    }

    #[test]
    fn rle_round_trip() {
        let bits = [1u8, 1, 0, 0, 0, 1, 0];
        let e = EncodedSequence::rle01(&bits).unwrap();
        assert_eq!(e.data, "1:2,3,1,1");
        let back: Vec<Rational> = bits.iter().map(|&b| int(b as u64)).collect();
        assert_eq!(e.decode().unwrap(), back);
        assert_eq!(
            EncodedSequence::rle01(&[]).unwrap().decode().unwrap(),
            vec![]
        );
    }

    #[test]
    fn verify_detects_tampering() {
        let bits: Vec<u8> = (1..=64).map(|i| (i % 2 == 0) as u8).collect();
        let y: Vec<Rational> = bits.iter().map(|&b| int(b as u64)).collect();
        let mut cert = build_certificate(&y, &int(0), &int(1), &[32, 64]).unwrap();
        cert.matrix = Some("identity".into());
        cert.x = Some(EncodedSequence::rle01(&bits).unwrap());
        let round = OscillationCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(round, cert);
        assert!(verify_certificate(&cert).unwrap().ok);
        let mut bad = cert.clone();
        bad.delta_upper = rat(3, 4);
        assert!(!verify_certificate(&bad).unwrap().ok);
        let mut bad = cert;
        bad.witnesses[0].upper_count += 1;
        assert!(!verify_certificate(&bad).unwrap().ok);
    }

    #[test]
    fn thresholds_must_be_ordered() {
        assert!(build_certificate(&alternating(8), &int(1), &int(1), &[8]).is_err());
        assert!(build_certificate(&alternating(8), &int(0), &int(1), &[9]).is_err());
    }
}

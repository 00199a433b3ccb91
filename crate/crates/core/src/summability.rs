//! Summability matrices `A = (a_{n,k})`, exact transforms, row profiles and `Z_w` sets, and
//! regularity verdicts relative to an ideal (the Silverman–Toeplitz conditions R1–R3 with
//! ideal limits in R2 and R3).

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::constructions::{
    ideal_limit, ideal_limit_structured, LimitStatus, StructuredLimit, StructuredSequence,
};
use crate::error::{Error, Result};
use crate::ideals::{IdealPresentation, VerdictStatus};
use crate::rational::{self, Rational};
use crate::sequence::{Growth, Sequence};
use crate::setlang::{parse_set, SetDescription};

/// Largest column index a tail-bounded row is ever expanded to.
pub const COLUMN_CAP: u64 = 1 << 20;

/// Declared shape of the rows of a generator matrix.
#[derive(Clone)]
pub enum RowSupport {
    /// `a_{n,k} = 0` for `k > bound(n)`.
    Bounded(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
    /// Certified tails: `l1(n, K) >= Σ_{k>K} |a_{n,k}|` and, when given,
    /// `linear(n, K) >= Σ_{k>K} k·|a_{n,k}|`.
    Tail {
        l1: Arc<dyn Fn(u64, u64) -> Rational + Send + Sync>,
        linear: Option<Arc<dyn Fn(u64, u64) -> Rational + Send + Sync>>,
    },
    Undeclared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum R1Fact {
    Bound(Rational),
    /// Row `n` is not absolutely summable.
    Unbounded {
        row: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnFact {
    /// Every column converges to 0 in the ordinary sense.
    AllVanish,
    /// Column `column` converges to `limit`.
    Witness { column: u64, limit: Rational },
}

/// Facts about a generator matrix asserted by whoever defines it; they stand in for the closed
/// forms available for the structured kinds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructuralFacts {
    pub r1: Option<R1Fact>,
    pub columns: Option<ColumnFact>,
    /// Ordinary limit of the row sums.
    pub row_sum_limit: Option<Rational>,
    pub nonnegative: bool,
}

#[derive(Clone)]
pub struct GeneratorMatrix {
    pub name: String,
    entry: Arc<dyn Fn(u64, u64) -> Rational + Send + Sync>,
    pub support: RowSupport,
    pub facts: StructuralFacts,
}

impl GeneratorMatrix {
    pub fn new(
        name: impl Into<String>,
        entry: impl Fn(u64, u64) -> Rational + Send + Sync + 'static,
        support: RowSupport,
        facts: StructuralFacts,
    ) -> Self {
        GeneratorMatrix {
            name: name.into(),
            entry: Arc::new(entry),
            support,
            facts,
        }
    }

    /// Built-in generators: `geometric` (`a_{n,k} = 2^{-k}`), `harmonic` (`a_{n,k} = 1/k`),
    /// `window2` (`1/n` on `n < k <= 2n`) and `forward-geometric` (`2^{n-1-k}` for `k >= n`).
    pub fn named(name: &str) -> Result<Self> {
        let one = Rational::one;
        Ok(match name {
            "geometric" => GeneratorMatrix::new(
                name,
                |_, k| rational::pow2_inv(k),
                RowSupport::Tail {
                    l1: Arc::new(|_, big_k| rational::pow2_inv(big_k)),
                    linear: Some(Arc::new(|_, big_k| {
                        rational::int(big_k + 2) * rational::pow2_inv(big_k)
                    })),
                },
                StructuralFacts {
                    r1: Some(R1Fact::Bound(one())),
                    columns: Some(ColumnFact::Witness {
                        column: 1,
                        limit: rational::rat(1, 2),
                    }),
                    row_sum_limit: Some(one()),
                    nonnegative: true,
                },
            ),
            "harmonic" => GeneratorMatrix::new(
                name,
                |_, k| rational::rat(1, k as i64),
                RowSupport::Undeclared,
                StructuralFacts {
                    r1: Some(R1Fact::Unbounded { row: 1 }),
                    columns: None,
                    row_sum_limit: None,
                    nonnegative: true,
                },
            ),
            "window2" => GeneratorMatrix::new(
                name,
                |n, k| {
                    if k > n && k <= 2 * n {
                        rational::rat(1, n as i64)
                    } else {
                        Rational::zero()
                    }
                },
                RowSupport::Bounded(Arc::new(|n| 2 * n)),
                StructuralFacts {
                    r1: Some(R1Fact::Bound(one())),
                    columns: Some(ColumnFact::AllVanish),
                    row_sum_limit: Some(one()),
                    nonnegative: true,
                },
            ),
            "forward-geometric" => GeneratorMatrix::new(
                name,
                |n, k| {
                    if k >= n {
                        rational::pow2_inv(k - n + 1)
                    } else {
                        Rational::zero()
                    }
                },
                RowSupport::Tail {
                    l1: Arc::new(|n, big_k| {
                        if big_k + 1 >= n {
                            rational::pow2_inv(big_k + 1 - n)
                        } else {
                            Rational::one()
                        }
                    }),
                    linear: Some(Arc::new(|n, big_k| {
                        if big_k + 1 >= n {
                            rational::int(big_k + 2) * rational::pow2_inv(big_k + 1 - n)
                        } else {
                            rational::int(n + 1)
                        }
                    })),
                },
                StructuralFacts {
                    r1: Some(R1Fact::Bound(one())),
                    columns: Some(ColumnFact::AllVanish),
                    row_sum_limit: Some(one()),
                    nonnegative: true,
                },
            ),
            _ => return Err(Error::syntax(
                0,
                format!(
                    "unknown generator '{name}' (geometric, harmonic, window2, forward-geometric)"
                ),
            )),
        })
    }
}

#[derive(Clone)]
#[allow(clippy::large_enum_variant)]
pub enum SummabilityMatrix {
    Cesaro,
    Identity,
    /// Rows indexed by `drop` are replaced by zero rows.
    RowDrop {
        base: Box<SummabilityMatrix>,
        drop: SetDescription,
    },
    /// Stored rows `1..=rows.len()` (each finitely supported, trailing zeros trimmed); later rows
    /// come from `base`, or are zero rows when there is none.
    Explicit {
        rows: Vec<Vec<Rational>>,
        base: Option<Box<SummabilityMatrix>>,
    },
    Generator(GeneratorMatrix),
}

impl fmt::Debug for SummabilityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SummabilityMatrix({self})")
    }
}

impl fmt::Display for SummabilityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummabilityMatrix::Cesaro => f.write_str("cesaro"),
            SummabilityMatrix::Identity => f.write_str("identity"),
            SummabilityMatrix::RowDrop { base, drop } => write!(f, "rowdrop:{base}:{drop}"),
            SummabilityMatrix::Explicit { rows, base } => {
                let body: Vec<String> = rows
                    .iter()
                    .map(|r| r.iter().map(rational::fmt).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "explicit:inline:{}", body.join("|"))?;
                if let Some(b) = base {
                    write!(f, ";base={b}")?;
                }
                Ok(())
            }
            SummabilityMatrix::Generator(g) => write!(f, "gen:{}", g.name),
        }
    }
}

/// One value of a transform prefix: `value` is within `tail_bound` of `(Ax)_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformValue {
    pub n: u64,
    #[serde(with = "rational::as_str")]
    pub value: Rational,
    #[serde(with = "rational::as_str")]
    pub tail_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DomainStatus {
    Converged {
        #[serde(with = "rational::as_str")]
        value: Rational,
        #[serde(with = "rational::as_str")]
        error: Rational,
        columns: u64,
    },
    /// Partial sums kept moving by more than `2·tol` over the second half of the scan.
    Diverging {
        window: (u64, u64),
        spread: f64,
        max_term: f64,
    },
    Inconclusive {
        reason: String,
    },
}

/// Row support facts up to `n_max`: `r(n)` is the last nonzero column of row `n` (0 for zero
/// rows), so `n ∈ Z_w ⇔ r(n) < w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowProfile {
    pub n_max: u64,
    pub r: Vec<u64>,
    #[serde(skip)]
    matrix: Option<String>,
    #[serde(skip)]
    structural: Vec<(u64, SetDescription)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZwSet {
    Structural(SetDescription),
    /// Members in `[1, up_to]` only.
    Enumerated {
        up_to: u64,
        members: Vec<u64>,
    },
}

impl RowProfile {
    pub fn r(&self, n: u64) -> Option<u64> {
        self.r.get((n as usize).checked_sub(1)?).copied()
    }

    /// `Z_w ∩ [1, n_max]` from the recorded `r(n)`.
    pub fn z_w_prefix(&self, w: u64) -> Vec<u64> {
        self.r
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < w)
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }

    pub fn matrix(&self) -> Option<&str> {
        self.matrix.as_deref()
    }
}

impl SummabilityMatrix {
    pub fn row_drop(base: SummabilityMatrix, drop: SetDescription) -> Self {
        SummabilityMatrix::RowDrop {
            base: Box::new(base),
            drop,
        }
    }

    pub fn explicit(rows: Vec<Vec<Rational>>, base: Option<SummabilityMatrix>) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut r| {
                while r.last().is_some_and(|v| v.is_zero()) {
                    r.pop();
                }
                r
            })
            .collect();
        SummabilityMatrix::Explicit {
            rows,
            base: base.map(Box::new),
        }
    }

    /// Parses `cesaro`, `identity`, `rowdrop:<base>:<set>`, `gen:<name>`,
    /// `explicit:inline:<row>|<row>|...[;base=<spec>]` and `explicit:@<file.csv>[;base=<spec>]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::EmptyInput);
        }
        match spec {
            "cesaro" => return Ok(SummabilityMatrix::Cesaro),
            "identity" => return Ok(SummabilityMatrix::Identity),
            _ => {}
        }
        if let Some(name) = spec.strip_prefix("gen:") {
            return Ok(SummabilityMatrix::Generator(GeneratorMatrix::named(name)?));
        }
        if let Some(rest) = spec.strip_prefix("rowdrop:") {
            let (base, set) = rest
                .split_once(':')
                .ok_or_else(|| Error::syntax(8, "expected rowdrop:<base>:<set>"))?;
            let base = SummabilityMatrix::parse(base)?;
            let drop = parse_set(set).map_err(|e| match e {
                Error::Syntax { position, message } => Error::Syntax {
                    position: position + 9 + base.to_string().len(),
                    message,
                },
                other => other,
            })?;
            return Ok(SummabilityMatrix::row_drop(base, drop));
        }
        if let Some(rest) = spec.strip_prefix("explicit:") {
            let (body, base) = match rest.split_once(";base=") {
                Some((b, s)) => (b, Some(SummabilityMatrix::parse(s)?)),
                None => (rest, None),
            };
            let rows = if let Some(inline) = body.strip_prefix("inline:") {
                inline
                    .split('|')
                    .map(parse_row)
                    .collect::<Result<Vec<_>>>()?
            } else if let Some(path) = body.strip_prefix('@') {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                rows_from_csv(&text)?
            } else {
                return Err(Error::syntax(
                    9,
                    "expected explicit:inline:... or explicit:@file",
                ));
            };
            return Ok(SummabilityMatrix::explicit(rows, base));
        }
        Err(Error::syntax(
            0,
            format!("unknown matrix '{spec}' (cesaro, identity, rowdrop:, explicit:, gen:)"),
        ))
    }

    /// `a_{n,k}`.
    pub fn entry(&self, n: u64, k: u64) -> Rational {
        if n == 0 || k == 0 {
            return Rational::zero();
        }
        match self {
            SummabilityMatrix::Cesaro => {
                if k <= n {
                    rational::rat(1, n as i64)
                } else {
                    Rational::zero()
                }
            }
            SummabilityMatrix::Identity => {
                if k == n {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            SummabilityMatrix::RowDrop { base, drop } => {
                if drop.member(n) {
                    Rational::zero()
                } else {
                    base.entry(n, k)
                }
            }
            SummabilityMatrix::Explicit { rows, base } => match rows.get(n as usize - 1) {
                Some(row) => row
                    .get(k as usize - 1)
                    .cloned()
                    .unwrap_or_else(Rational::zero),
                None => base.as_ref().map_or_else(Rational::zero, |b| b.entry(n, k)),
            },
            SummabilityMatrix::Generator(g) => (g.entry)(n, k),
        }
    }

    /// `(a_{n,1}, ..., a_{n,K})`.
    pub fn row(&self, n: u64, k: u64) -> Vec<Rational> {
        (1..=k).map(|c| self.entry(n, c)).collect()
    }

    pub fn is_row_finite(&self) -> bool {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => true,
            SummabilityMatrix::RowDrop { base, .. } => base.is_row_finite(),
            SummabilityMatrix::Explicit { base, .. } => {
                base.as_ref().is_none_or(|b| b.is_row_finite())
            }
            SummabilityMatrix::Generator(g) => matches!(g.support, RowSupport::Bounded(_)),
        }
    }

    /// A column bound `b` with `a_{n,k} = 0` for `k > b`, for row-finite rows.
    pub(crate) fn support_bound(&self, n: u64) -> Option<u64> {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => Some(n),
            SummabilityMatrix::RowDrop { base, drop } => {
                if drop.member(n) {
                    Some(0)
                } else {
                    base.support_bound(n)
                }
            }
            SummabilityMatrix::Explicit { rows, base } => match rows.get(n as usize - 1) {
                Some(row) => Some(row.len() as u64),
                None => base.as_ref().map_or(Some(0), |b| b.support_bound(n)),
            },
            SummabilityMatrix::Generator(g) => match &g.support {
                RowSupport::Bounded(b) => Some(b(n)),
                _ => None,
            },
        }
    }

    /// `r(n)`: the last nonzero column of row `n`, 0 for a zero row.
    pub fn last_nonzero(&self, n: u64) -> Result<u64> {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => Ok(n),
            SummabilityMatrix::RowDrop { base, drop } => {
                if drop.member(n) {
                    Ok(0)
                } else {
                    base.last_nonzero(n)
                }
            }
            SummabilityMatrix::Explicit { rows, base } => match rows.get(n as usize - 1) {
                Some(row) => Ok(row.len() as u64),
                None => base.as_ref().map_or(Ok(0), |b| b.last_nonzero(n)),
            },
            SummabilityMatrix::Generator(g) => match &g.support {
                RowSupport::Bounded(b) => {
                    let mut k = b(n);
                    while k > 0 && (g.entry)(n, k).is_zero() {
                        k -= 1;
                    }
                    Ok(k)
                }
                _ => Err(Error::Unsupported(format!(
                    "generator '{}' declares no row support bound",
                    g.name
                ))),
            },
        }
    }

    /// First nonzero column of row `n` (0 for a zero row), for row-finite rows.
    pub fn first_nonzero(&self, n: u64) -> Result<u64> {
        match self {
            SummabilityMatrix::Cesaro => Ok(1),
            SummabilityMatrix::Identity => Ok(n),
            _ => {
                let r = self.last_nonzero(n)?;
                Ok((1..=r).find(|&k| !self.entry(n, k).is_zero()).unwrap_or(0))
            }
        }
    }

    /// `Z_w = {n : a_{n,k} = 0 for all k >= w}` as a set description, when the kind allows it.
    pub fn z_w_structural(&self, w: u64) -> Option<SetDescription> {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => {
                Some(SetDescription::initial_segment(w.saturating_sub(1)))
            }
            SummabilityMatrix::RowDrop { base, drop } => {
                Some(base.z_w_structural(w)?.union(drop.clone()))
            }
            SummabilityMatrix::Explicit { rows, base } => {
                let stored = SetDescription::finite_from_iter(
                    rows.iter()
                        .enumerate()
                        .filter(|(_, r)| (r.len() as u64) < w)
                        .map(|(i, _)| i as u64 + 1),
                );
                let beyond = SetDescription::initial_segment(rows.len() as u64).complement();
                let later = match base {
                    Some(b) => b.z_w_structural(w)?.intersect(beyond),
                    None => beyond,
                };
                Some(stored.union(later))
            }
            SummabilityMatrix::Generator(_) => None,
        }
    }

    /// Whether every entry is known to be nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => true,
            SummabilityMatrix::RowDrop { base, .. } => base.is_nonnegative(),
            SummabilityMatrix::Explicit { rows, base } => {
                rows.iter().flatten().all(|v| !v.is_negative())
                    && base.as_ref().is_none_or(|b| b.is_nonnegative())
            }
            SummabilityMatrix::Generator(g) => g.facts.nonnegative,
        }
    }

    /// Whether `A·1_S → 0` reduces to `S` having density zero (rows are Cesàro means).
    pub(crate) fn is_cesaro(&self) -> bool {
        matches!(self, SummabilityMatrix::Cesaro)
    }

    pub(crate) fn is_identity(&self) -> bool {
        matches!(self, SummabilityMatrix::Identity)
    }

    /// Whether some row is evaluated through prefix sums of `x`.
    pub(crate) fn uses_prefix_sums(&self) -> bool {
        match self {
            SummabilityMatrix::Cesaro => true,
            SummabilityMatrix::RowDrop { base, .. } => base.uses_prefix_sums(),
            SummabilityMatrix::Explicit { base, .. } => {
                base.as_ref().is_some_and(|b| b.uses_prefix_sums())
            }
            _ => false,
        }
    }

    /// `(Ax)_n` for a row-finite row, given `xs[k-1] = x_k` and `sums[k] = x_1 + ... + x_k`
    /// covering the row support.
    pub fn row_value_with_sums(
        &self,
        n: u64,
        xs: &[Rational],
        sums: &[Rational],
    ) -> Result<Rational> {
        let need = self
            .support_bound(n)
            .ok_or_else(|| Error::Unsupported("row is not finitely supported".into()))?;
        if need as usize > xs.len() || (self.uses_prefix_sums() && sums.len() <= need as usize) {
            return Err(Error::InvalidArgument(format!(
                "row {n} needs {need} columns, {} available",
                xs.len()
            )));
        }
        Ok(match self {
            SummabilityMatrix::Cesaro => &sums[n as usize] / rational::int(n),
            SummabilityMatrix::Identity => xs[n as usize - 1].clone(),
            SummabilityMatrix::RowDrop { base, drop } => {
                if drop.member(n) {
                    Rational::zero()
                } else {
                    base.row_value_with_sums(n, xs, sums)?
                }
            }
            SummabilityMatrix::Explicit { rows, base } => match rows.get(n as usize - 1) {
                Some(row) => row.iter().zip(xs).map(|(a, x)| a * x).sum(),
                None => match base {
                    Some(b) => b.row_value_with_sums(n, xs, sums)?,
                    None => Rational::zero(),
                },
            },
            SummabilityMatrix::Generator(g) => (1..=need)
                .map(|k| (g.entry)(n, k) * &xs[k as usize - 1])
                .sum(),
        })
    }

    /// Declared `ℓ1` tail of row `n` beyond column `K` times the growth of `x`, if available.
    fn weighted_tail(&self, n: u64, big_k: u64, growth: &Growth) -> Option<Rational> {
        match self {
            SummabilityMatrix::RowDrop { base, drop } => {
                if drop.member(n) {
                    Some(Rational::zero())
                } else {
                    base.weighted_tail(n, big_k, growth)
                }
            }
            SummabilityMatrix::Explicit { rows, base } => {
                if (n as usize) <= rows.len() {
                    Some(Rational::zero())
                } else {
                    base.as_ref()?.weighted_tail(n, big_k, growth)
                }
            }
            SummabilityMatrix::Generator(g) => match (&g.support, growth) {
                (RowSupport::Tail { l1, .. }, Growth::Bounded(b)) => Some(b * l1(n, big_k)),
                (
                    RowSupport::Tail {
                        linear: Some(lin), ..
                    },
                    Growth::Linear(c),
                ) => Some(c * lin(n, big_k)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Whether a row needs a tail certificate (it is not finitely supported).
    fn row_is_finite(&self, n: u64) -> bool {
        self.support_bound(n).is_some()
    }
}

fn parse_row(text: &str) -> Result<Vec<Rational>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| rational::parse(t.trim())).collect()
}

/// One row per line, comma-separated rationals; blank lines are zero rows and lines starting
/// with `#` are skipped.
pub fn rows_from_csv(text: &str) -> Result<Vec<Vec<Rational>>> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(parse_row)
        .collect()
}

/// `(n, value, tail_bound)` for `n = 1..=n_max` with every tail bound at most `tail_tol`; exact
/// (zero tail) on finitely supported rows.
pub fn transform_prefix(
    a: &SummabilityMatrix,
    x: &Sequence,
    n_max: u64,
    tail_tol: &Rational,
) -> Result<Vec<TransformValue>> {
    let finite_need = (1..=n_max)
        .filter_map(|n| a.support_bound(n))
        .max()
        .unwrap_or(0);
    let (xs, sums) = materialize(x, finite_need, a.uses_prefix_sums())?;
    let growth = x.growth();
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        if a.row_is_finite(n) {
            out.push(TransformValue {
                n,
                value: a.row_value_with_sums(n, &xs, &sums)?,
                tail_bound: Rational::zero(),
            });
            continue;
        }
        let (value, tail_bound, _) = tail_row(a, x, n, &growth, tail_tol, COLUMN_CAP)?;
        out.push(TransformValue {
            n,
            value,
            tail_bound,
        });
    }
    Ok(out)
}

/// Exact `(Ax)_n` for `n = 1..=n_max` on a row-finite matrix.
pub fn transform_exact(a: &SummabilityMatrix, x: &Sequence, n_max: u64) -> Result<Vec<Rational>> {
    if !(1..=n_max).all(|n| a.row_is_finite(n)) {
        return Err(Error::Unsupported(
            "matrix is not row-finite on the requested rows".into(),
        ));
    }
    Ok(transform_prefix(a, x, n_max, &Rational::zero())?
        .into_iter()
        .map(|t| t.value)
        .collect())
}

/// `x_1..x_len` and, when `with_sums`, the prefix sums `0, x_1, x_1 + x_2, ...`.
pub(crate) fn materialize(
    x: &Sequence,
    len: u64,
    with_sums: bool,
) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let xs = x.prefix(len)?;
    if !with_sums {
        return Ok((xs, Vec::new()));
    }
    let mut sums = Vec::with_capacity(xs.len() + 1);
    sums.push(Rational::zero());
    for v in &xs {
        let next = sums.last().expect("nonempty") + v;
        sums.push(next);
    }
    Ok((xs, sums))
}

fn tail_row(
    a: &SummabilityMatrix,
    x: &Sequence,
    n: u64,
    growth: &Growth,
    tol: &Rational,
    cap: u64,
) -> Result<(Rational, Rational, u64)> {
    if a.weighted_tail(n, 1, growth).is_none() {
        return Err(Error::Domain(format!(
            "row {n} has infinite support and no tail certificate for x = {x}"
        )));
    }
    let mut big_k = 16u64;
    loop {
        let bound = a.weighted_tail(n, big_k, growth).expect("checked above");
        if bound <= *tol {
            let value = (1..=big_k)
                .map(|k| {
                    let e = a.entry(n, k);
                    if e.is_zero() {
                        Ok(e)
                    } else {
                        Ok(e * x.value(k)?)
                    }
                })
                .sum::<Result<Rational>>()?;
            return Ok((value, bound, big_k));
        }
        if big_k >= cap {
            return Err(Error::SearchCap(format!(
                "row {n}: tail tolerance {tol} not reached within {cap} columns"
            )));
        }
        big_k = (big_k * 2).min(cap);
    }
}

/// Convergence status of `Σ_k a_{n,k} x_k`.
pub fn domain_check(
    a: &SummabilityMatrix,
    x: &Sequence,
    n: u64,
    tol: &Rational,
    k_cap: u64,
) -> Result<DomainStatus> {
    if n == 0 {
        return Err(Error::InvalidArgument("rows are indexed from 1".into()));
    }
    if let Some(b) = a.support_bound(n) {
        let (xs, sums) = materialize(x, b, a.uses_prefix_sums())?;
        return Ok(DomainStatus::Converged {
            value: a.row_value_with_sums(n, &xs, &sums)?,
            error: Rational::zero(),
            columns: b,
        });
    }
    let growth = x.growth();
    if a.weighted_tail(n, 1, &growth).is_some() {
        return Ok(match tail_row(a, x, n, &growth, tol, k_cap) {
            Ok((value, error, columns)) => DomainStatus::Converged {
                value,
                error,
                columns,
            },
            Err(Error::SearchCap(reason)) => DomainStatus::Inconclusive { reason },
            Err(e) => return Err(e),
        });
    }
    // No certificate: watch the partial sums in floating point.
    let tol_f = rational::to_f64(tol);
    let half = k_cap / 2;
    let mut partial = 0.0f64;
    let (mut lo, mut hi, mut max_term) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for k in 1..=k_cap {
        let e = a.entry(n, k);
        let term = if e.is_zero() {
            0.0
        } else {
            rational::to_f64(&e) * rational::to_f64(&x.value(k)?)
        };
        partial += term;
        if k > half {
            lo = lo.min(partial);
            hi = hi.max(partial);
            max_term = max_term.max(term.abs());
        }
    }
    let spread = hi - lo;
    if spread > 2.0 * tol_f || max_term > 2.0 * tol_f {
        Ok(DomainStatus::Diverging {
            window: (half + 1, k_cap),
            spread,
            max_term,
        })
    } else {
        Ok(DomainStatus::Inconclusive {
            reason: format!(
                "partial sums stable within {tol_f:e} on ({half}, {k_cap}] but no tail certificate"
            ),
        })
    }
}

/// `r(n)` for `n <= n_max`.
pub fn row_profile(a: &SummabilityMatrix, n_max: u64) -> Result<RowProfile> {
    let r = (1..=n_max)
        .map(|n| a.last_nonzero(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(RowProfile {
        n_max,
        r,
        matrix: Some(a.to_string()),
        structural: Vec::new(),
    })
}

/// `Z_w`, structurally when possible and otherwise as the enumerated prefix of a profile.
pub fn z_w(a: &SummabilityMatrix, w: u64, n_max: u64) -> Result<ZwSet> {
    if let Some(s) = a.z_w_structural(w) {
        return Ok(ZwSet::Structural(s));
    }
    let profile = row_profile(a, n_max)?;
    Ok(ZwSet::Enumerated {
        up_to: n_max,
        members: profile.z_w_prefix(w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Holds,
    /// Finite-scale evidence only.
    HoldsUpTo(u64),
    Fails,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct R1Report {
    pub status: ConditionStatus,
    #[serde(with = "rational::as_str_opt")]
    pub bound: Option<Rational>,
    pub witness_row: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitCondition {
    pub status: ConditionStatus,
    #[serde(with = "rational::as_str")]
    pub target: Rational,
    pub structure: Option<StructuredLimit>,
    /// Rows in the exceptional set that stay away from the target.
    pub witness_rows: Vec<u64>,
    pub witness_column: Option<u64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Overall {
    Regular,
    NotRegular { condition: String, witness: String },
    UndecidedUpTo { scale: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    pub matrix: String,
    pub ideal: String,
    pub r1: R1Report,
    /// Statement about every column at once.
    pub r2: LimitCondition,
    pub r2_columns: Vec<(u64, LimitCondition)>,
    pub r3: LimitCondition,
    pub overall: Overall,
}

impl RegularityVerdict {
    pub fn is_regular(&self) -> bool {
        self.overall == Overall::Regular
    }
}

enum Structure {
    Known(StructuredSequence),
    /// Ordinary limit only known for some columns: `(column, limit)`.
    Witness(u64, Rational),
    Unknown,
}

impl SummabilityMatrix {
    fn r1(&self) -> Option<R1Fact> {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => {
                Some(R1Fact::Bound(Rational::one()))
            }
            SummabilityMatrix::RowDrop { base, .. } => base.r1(),
            SummabilityMatrix::Explicit { rows, base } => {
                let stored = rows
                    .iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<Rational>())
                    .max()
                    .unwrap_or_else(Rational::zero);
                match base {
                    None => Some(R1Fact::Bound(stored)),
                    Some(b) => match b.r1()? {
                        R1Fact::Bound(bb) => Some(R1Fact::Bound(stored.max(bb))),
                        R1Fact::Unbounded { row } => {
                            if (row as usize) > rows.len() {
                                Some(R1Fact::Unbounded { row })
                            } else {
                                None
                            }
                        }
                    },
                }
            }
            SummabilityMatrix::Generator(g) => g.facts.r1.clone(),
        }
    }

    fn column_structure(&self) -> Structure {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => {
                Structure::Known(StructuredSequence::convergent(Rational::zero()))
            }
            SummabilityMatrix::RowDrop { base, drop } => match base.column_structure() {
                Structure::Known(s) => Structure::Known(s.zeroed_on(drop)),
                Structure::Witness(k, l) if l.is_zero() => Structure::Witness(k, l),
                _ => Structure::Unknown,
            },
            SummabilityMatrix::Explicit { base, .. } => match base {
                Some(b) => b.column_structure(),
                None => Structure::Known(StructuredSequence::convergent(Rational::zero())),
            },
            SummabilityMatrix::Generator(g) => match &g.facts.columns {
                Some(ColumnFact::AllVanish) => {
                    Structure::Known(StructuredSequence::convergent(Rational::zero()))
                }
                Some(ColumnFact::Witness { column, limit }) => {
                    Structure::Witness(*column, limit.clone())
                }
                None => Structure::Unknown,
            },
        }
    }

    fn row_sum_structure(&self) -> Option<StructuredSequence> {
        match self {
            SummabilityMatrix::Cesaro | SummabilityMatrix::Identity => {
                Some(StructuredSequence::convergent(Rational::one()))
            }
            SummabilityMatrix::RowDrop { base, drop } => {
                Some(base.row_sum_structure()?.zeroed_on(drop))
            }
            SummabilityMatrix::Explicit { base, .. } => match base {
                Some(b) => b.row_sum_structure(),
                None => Some(StructuredSequence::convergent(Rational::zero())),
            },
            SummabilityMatrix::Generator(g) => g
                .facts
                .row_sum_limit
                .clone()
                .map(StructuredSequence::convergent),
        }
    }

    /// `Σ_k a_{n,k}` when the row is finite or carries an `ℓ1` tail certificate that vanishes.
    fn row_sum_exact(&self, n: u64) -> Option<Rational> {
        let b = self.support_bound(n)?;
        Some((1..=b).map(|k| self.entry(n, k)).sum())
    }
}

fn limit_condition(
    structure: Option<StructuredSequence>,
    target: Rational,
    ideal: &IdealPresentation,
    scale: u64,
    samples: impl Fn() -> Result<Vec<Rational>>,
) -> Result<LimitCondition> {
    if let Some(s) = structure {
        let verdict = ideal_limit_structured(&s, &target, ideal, scale)?;
        let status = match verdict.status {
            VerdictStatus::In => ConditionStatus::Holds,
            VerdictStatus::NotIn => ConditionStatus::Fails,
            VerdictStatus::UndecidedUpTo(_) => ConditionStatus::Undecided,
        };
        let witness_rows = if status == ConditionStatus::Fails {
            s.witness_rows(&target, scale, 10)
        } else {
            Vec::new()
        };
        return Ok(LimitCondition {
            status,
            target,
            note: verdict.reason.clone(),
            structure: Some(verdict),
            witness_rows,
            witness_column: None,
        });
    }
    let values = samples()?;
    let y = Sequence::Prefix(values);
    let est = ideal_limit(&y, ideal, None, None, scale)?;
    let status = match &est.status {
        LimitStatus::Limit { eta, .. } if *eta == target => ConditionStatus::HoldsUpTo(scale),
        _ => ConditionStatus::Undecided,
    };
    Ok(LimitCondition {
        status,
        target,
        structure: None,
        witness_rows: Vec::new(),
        witness_column: None,
        note: format!("finite-scale estimate: {}", est.status.describe()),
    })
}

/// R1–R3 for `A` relative to `ideal`, using `n_rows` rows and reporting the first `k_cols`
/// columns individually.
pub fn regularity_verdict(
    a: &SummabilityMatrix,
    ideal: &IdealPresentation,
    n_rows: u64,
    k_cols: u64,
) -> Result<RegularityVerdict> {
    let r1 = match a.r1() {
        Some(R1Fact::Bound(b)) => R1Report {
            status: ConditionStatus::Holds,
            bound: Some(b),
            witness_row: None,
        },
        Some(R1Fact::Unbounded { row }) => R1Report {
            status: ConditionStatus::Fails,
            bound: None,
            witness_row: Some(row),
        },
        None => {
            let sampled = (1..=n_rows)
                .map(|n| {
                    a.support_bound(n)
                        .map(|b| (1..=b).map(|k| a.entry(n, k).abs()).sum::<Rational>())
                })
                .collect::<Option<Vec<_>>>();
            match sampled {
                Some(v) => R1Report {
                    status: ConditionStatus::HoldsUpTo(n_rows),
                    bound: v.into_iter().max(),
                    witness_row: None,
                },
                None => R1Report {
                    status: ConditionStatus::Undecided,
                    bound: None,
                    witness_row: None,
                },
            }
        }
    };

    let zero = Rational::zero();
    let column_samples = |k: u64| {
        move || -> Result<Vec<Rational>> { Ok((1..=n_rows).map(|n| a.entry(n, k)).collect()) }
    };
    let (r2, r2_columns) = match a.column_structure() {
        Structure::Known(s) => {
            let uniform = limit_condition(Some(s.clone()), zero.clone(), ideal, n_rows, || {
                Ok(Vec::new())
            })?;
            let cols = (1..=k_cols)
                .map(|k| (k, uniform.clone()))
                .collect::<Vec<_>>();
            (uniform, cols)
        }
        Structure::Witness(k, limit) => {
            let fails = !limit.is_zero();
            let cond = LimitCondition {
                status: if fails {
                    ConditionStatus::Fails
                } else {
                    ConditionStatus::Undecided
                },
                target: zero.clone(),
                structure: None,
                witness_rows: Vec::new(),
                witness_column: Some(k),
                note: format!("column {k} converges to {}", rational::fmt(&limit)),
            };
            let cols = (1..=k_cols)
                .map(|c| {
                    if c == k {
                        Ok((c, cond.clone()))
                    } else {
                        limit_condition(None, zero.clone(), ideal, n_rows, column_samples(c))
                            .map(|l| (c, l))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            (cond, cols)
        }
        Structure::Unknown => {
            let cols = (1..=k_cols)
                .map(|c| {
                    limit_condition(None, zero.clone(), ideal, n_rows, column_samples(c))
                        .map(|l| (c, l))
                })
                .collect::<Result<Vec<_>>>()?;
            let all_hold = cols
                .iter()
                .all(|(_, l)| matches!(l.status, ConditionStatus::HoldsUpTo(_)));
            let uniform = LimitCondition {
                status: if all_hold && !cols.is_empty() {
                    ConditionStatus::HoldsUpTo(n_rows)
                } else {
                    ConditionStatus::Undecided
                },
                target: zero.clone(),
                structure: None,
                witness_rows: Vec::new(),
                witness_column: None,
                note: format!("first {k_cols} columns estimated at scale {n_rows}"),
            };
            (uniform, cols)
        }
    };

    let r3 = limit_condition(
        a.row_sum_structure(),
        Rational::one(),
        ideal,
        n_rows,
        || {
            (1..=n_rows)
                .map(|n| {
                    a.row_sum_exact(n).ok_or_else(|| {
                        Error::Unsupported("row sums need finitely supported rows".into())
                    })
                })
                .collect()
        },
    )
    .or_else(|e| match e {
        Error::Unsupported(note) => Ok(LimitCondition {
            status: ConditionStatus::Undecided,
            target: Rational::one(),
            structure: None,
            witness_rows: Vec::new(),
            witness_column: None,
            note,
        }),
        other => Err(other),
    })?;

    let overall = if r1.status == ConditionStatus::Fails {
        Overall::NotRegular {
            condition: "R1".into(),
            witness: format!("row {}", r1.witness_row.unwrap_or(0)),
        }
    } else if r2.status == ConditionStatus::Fails {
        Overall::NotRegular {
            condition: "R2".into(),
            witness: match r2.witness_column {
                Some(k) => format!("column {k}"),
                None => format!("rows {:?}", r2.witness_rows),
            },
        }
    } else if r3.status == ConditionStatus::Fails {
        Overall::NotRegular {
            condition: "R3".into(),
            witness: format!("rows {:?}", r3.witness_rows),
        }
    } else if [r1.status, r2.status, r3.status]
        .iter()
        .all(|s| *s == ConditionStatus::Holds)
    {
        Overall::Regular
    } else {
        Overall::UndecidedUpTo { scale: n_rows }
    };

    Ok(RegularityVerdict {
        matrix: a.to_string(),
        ideal: ideal.name(),
        r1,
        r2,
        r2_columns,
        r3,
        overall,
    })
}

/// Exception-set statistics of `(Ax)_n` around each candidate `η` and tolerance `ε`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectEntry {
    #[serde(with = "rational::as_str")]
    pub eta: Rational,
    #[serde(with = "rational::as_str")]
    pub eps: Rational,
    pub count: u64,
    #[serde(with = "rational::as_str")]
    pub density: Rational,
    /// Exception densities on `(N/8, N/4]`, `(N/4, N/2]`, `(N/2, N]`.
    #[serde(with = "rational::as_str_vec")]
    pub shells: Vec<Rational>,
    pub vanishing_trend: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectReport {
    pub scale: u64,
    pub ideal: String,
    pub entries: Vec<DefectEntry>,
}

/// For each `(η, ε)`, the set `{n <= N : |(Ax)_n − η| > ε}` and its density evidence.
pub fn matrix_ideal_limit_defect(
    a: &SummabilityMatrix,
    x: &Sequence,
    ideal: &IdealPresentation,
    n: u64,
    etas: &[Rational],
    epss: &[Rational],
    tail_tol: &Rational,
) -> Result<DefectReport> {
    let y: Vec<Rational> = transform_prefix(a, x, n, tail_tol)?
        .into_iter()
        .map(|t| t.value)
        .collect();
    let mut entries = Vec::new();
    for eta in etas {
        for eps in epss {
            let flags: Vec<bool> = y.iter().map(|v| (v - eta).abs() > *eps).collect();
            let ev = crate::constructions::exception_evidence(&flags, ideal);
            entries.push(DefectEntry {
                eta: eta.clone(),
                eps: eps.clone(),
                count: ev.count,
                density: rational::rat(ev.count as i64, n as i64),
                shells: ev.shells,
                vanishing_trend: ev.passes,
            });
        }
    }
    Ok(DefectReport {
        scale: n,
        ideal: ideal.name(),
        entries,
    })
}

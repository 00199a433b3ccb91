//! Escape extensions: given a stem `t_1 < ... < t_j` and an unbounded `x`, a selector `σ0` through
//! the stem whose transform defeats a prescribed bound `m0`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::serialize_display;
use crate::error::{Error, Result};
use crate::ideals::{restrict, verdict, IdealPresentation, VerdictStatus};
use crate::rational::{self, Rational};
use crate::sequence::Sequence;
use crate::setlang::SetDescription;
use crate::sigma::Selector;
use crate::summability::{row_profile, SummabilityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EscapeCaps {
    /// Largest row or column index examined.
    pub index_cap: u64,
    /// Longest scan for a large `|x_h|`.
    pub search_cap: u64,
}

impl Default for EscapeCaps {
    fn default() -> Self {
        EscapeCaps {
            index_cap: 1 << 16,
            search_cap: 1 << 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EscapeAudit {
    Unbounded {
        i0: u64,
        t0: u64,
        #[serde(with = "rational::as_str")]
        stem_sum: Rational,
        /// `m0 + 1 + |stem_sum|`
        #[serde(with = "rational::as_str")]
        threshold: Rational,
    },
    RowFinite {
        j0: u64,
        w0: u64,
        n0: u64,
        p1: u64,
        q0: u64,
        #[serde(with = "rational::as_str")]
        alpha: Rational,
        k0: u64,
        block: Vec<u64>,
        ambient_block: u64,
    },
    /// `m0 <= 0`: the minimal extension already qualifies.
    Trivial,
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeResult {
    #[serde(serialize_with = "serialize_display")]
    pub selector: Selector,
    /// Rows (or, for a single row, the partial-sum index) where the bound is enforced.
    pub target_rows: Vec<u64>,
    #[serde(with = "rational::as_str")]
    pub bound: Rational,
    /// `min |value|` over the target rows.
    #[serde(with = "rational::as_str")]
    pub achieved: Rational,
    #[serde(with = "rational::as_str_vec")]
    pub values: Vec<Rational>,
    pub audit: EscapeAudit,
}

fn check_stem(stem: &[u64]) -> Result<u64> {
    Selector::finite(stem.to_vec())?;
    Ok(stem.last().copied().unwrap_or(0))
}

fn term(a: &Rational, x: &Sequence, i: u64) -> Result<Rational> {
    if a.is_zero() {
        Ok(Rational::zero())
    } else {
        Ok(a * x.value(i)?)
    }
}

fn postcondition_failed(what: String) -> Error {
    Error::Domain(format!("escape postcondition failed: {what}"))
}

/// Escape for a single row `a` that is not finitely supported.
///
/// `i0` is the least index `>= j+1` with `a_{i0} != 0`, and `t0 >= t_j + i0` the least index with
/// `|a_{i0} x_{t0}| >= m0 + 1 + |Σ_{k<=j} a_k x_{t_k}|`. Then `σ0` is the stem, the consecutive fill
/// `t_j + s` for `s = 1..i0-j-1`, and `σ0(i0 + s) = t0 + s` for `s >= 0`, so that
/// `|Σ_{k<=i0} a_k x_{σ0(k)}| >= m0 + 1`.
pub fn escape_unbounded(
    stem: &[u64],
    a: &dyn Fn(u64) -> Rational,
    x: &Sequence,
    m0: &Rational,
    caps: EscapeCaps,
) -> Result<EscapeResult> {
    let t_j = check_stem(stem)?;
    let j = stem.len() as u64;
    let i0 = (j + 1..=caps.index_cap.max(j + 1))
        .find(|&i| !a(i).is_zero())
        .ok_or_else(|| {
            Error::SearchCap(format!(
                "no nonzero entry in columns {}..={}",
                j + 1,
                caps.index_cap
            ))
        })?;
    let a_i0 = a(i0);
    let stem_sum: Rational = stem
        .iter()
        .enumerate()
        .map(|(k, &t)| term(&a(k as u64 + 1), x, t))
        .sum::<Result<Rational>>()?;
    let threshold = m0 + rational::int(1) + stem_sum.abs();
    let start = t_j
        .checked_add(i0)
        .ok_or_else(|| Error::Overflow("t_j + i0".into()))?;
    let t0 = x.first_at_least(start, &(&threshold / a_i0.abs()), caps.search_cap)?;

    let mut picks = stem.to_vec();
    picks.extend((1..i0 - j).map(|s| t_j + s));
    picks.push(t0);
    let selector = Selector::consecutive_after(picks.clone())?;

    let sum: Rational = picks
        .iter()
        .enumerate()
        .map(|(k, &t)| term(&a(k as u64 + 1), x, t))
        .sum::<Result<Rational>>()?;
    let bound = m0 + rational::int(1);
    if sum.abs() < bound {
        return Err(postcondition_failed(format!(
            "|{}| < {}",
            rational::fmt(&sum),
            rational::fmt(&bound)
        )));
    }
    Ok(EscapeResult {
        selector,
        target_rows: vec![i0],
        bound,
        achieved: sum.abs(),
        values: vec![sum],
        audit: EscapeAudit::Unbounded {
            i0,
            t0,
            stem_sum,
            threshold,
        },
    })
}

/// `Z_w` as a set description: structural when the matrix kind allows it, otherwise enumerated on
/// `[1, scale]` and accepted only when its last member lies in the first half of the range.
fn z_w_set(a: &SummabilityMatrix, w: u64, scale: u64) -> Result<SetDescription> {
    if let Some(s) = a.z_w_structural(w) {
        return Ok(s);
    }
    let members = row_profile(a, scale)?.z_w_prefix(w);
    if members.last().is_some_and(|&m| m > scale / 2) {
        return Err(Error::Precondition(format!(
            "Z_{w} keeps growing up to {scale}; no finite description"
        )));
    }
    SetDescription::finite(members)
}

/// Escape for a row-finite matrix along a block of the restricted interval partition.
///
/// With `j0` the stem length and `w0 = j0 + 1`, the set `Z_{w0}` of rows vanishing from column `w0`
/// on must be certified in the ideal. On `T = N \ Z_{w0}` the restricted partition is used:
/// `n0 = min T` lies in block `p1` (0 when `n0` precedes the first block), the target block is
/// `q0 = max(p0, p1 + 1)`, `α` is the least nonzero `|a_{n,k}|` over it and `k0` its largest
/// `r_n`. Positions `j0+1..=k0` get the least fresh index with
/// `|x_h| >= (m0 + max_n |partial sum before s|)/α`, followed by a consecutive tail; every row
/// of the block then has `|(A σ0(x))_n| >= m0`.
#[allow(clippy::too_many_arguments)]
pub fn escape_rowfinite(
    stem: &[u64],
    a: &SummabilityMatrix,
    x: &Sequence,
    ideal: &IdealPresentation,
    m0: &Rational,
    p0: u64,
    scale: u64,
    caps: EscapeCaps,
) -> Result<EscapeResult> {
    check_stem(stem)?;
    if !a.is_row_finite() {
        return Err(Error::Unsupported(
            "escape_rowfinite needs a row-finite matrix".into(),
        ));
    }
    if !m0.is_positive() {
        return Ok(EscapeResult {
            selector: Selector::consecutive_after(stem.to_vec())?,
            target_rows: Vec::new(),
            bound: m0.clone(),
            achieved: Rational::zero(),
            values: Vec::new(),
            audit: EscapeAudit::Trivial,
        });
    }
    let j0 = stem.len() as u64;
    let w0 = j0 + 1;
    let z = z_w_set(a, w0, scale)?;
    let zv = verdict(ideal, &z, scale)?;
    if zv.status != VerdictStatus::In {
        return Err(Error::Precondition(format!(
            "Z_{w0} = {z} is not certified in {} ({})",
            ideal.name(),
            zv.status
        )));
    }
    let t = z.complement();
    let partition = restrict(ideal, &t, scale)?.partition()?;
    let n0 = t
        .next_member(1, caps.index_cap)
        .ok_or_else(|| Error::SearchCap("T is empty below the index cap".into()))?;
    let p1 = match partition.ambient.block_of(n0) {
        Some(_) => partition.block_containing(n0)?.index,
        None => 0,
    };
    let q0 = p0.max(p1 + 1);
    let block = partition.block(q0)?;
    if block.members.is_empty() {
        return Err(Error::Domain(
            "target block is empty after restriction".into(),
        ));
    }
    if block.members.len() as u64 > caps.index_cap {
        return Err(Error::SearchCap(format!(
            "target block has {} rows, above the cap {}",
            block.members.len(),
            caps.index_cap
        )));
    }

    let mut rows: Vec<(u64, Vec<Rational>)> = Vec::with_capacity(block.members.len());
    for &n in &block.members {
        let r = a.last_nonzero(n)?;
        if r > caps.index_cap {
            return Err(Error::SearchCap(format!("row {n} reaches column {r}")));
        }
        rows.push((n, a.row(n, r)));
    }
    let k0 = rows.iter().map(|(_, r)| r.len() as u64).max().unwrap_or(0);
    let alpha = rows
        .iter()
        .flat_map(|(_, r)| r.iter())
        .filter(|v| !v.is_zero())
        .map(|v| v.abs())
        .min()
        .ok_or_else(|| Error::Domain("target block has only zero rows".into()))?;

    let mut partial: Vec<Rational> = vec![Rational::zero(); rows.len()];
    let add_column = |partial: &mut Vec<Rational>, s: u64, value: &Rational| {
        for (p, (_, row)) in partial.iter_mut().zip(&rows) {
            if let Some(e) = row.get(s as usize - 1) {
                if !e.is_zero() {
                    *p += e * value;
                }
            }
        }
    };
    for (k, &t_k) in stem.iter().enumerate() {
        add_column(&mut partial, k as u64 + 1, &x.value(t_k)?);
    }
    let mut picks = stem.to_vec();
    for s in w0..=k0 {
        let worst = partial
            .iter()
            .map(|p| p.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        let magnitude = (m0 + worst) / &alpha;
        let from = picks.last().copied().unwrap_or(0) + 1;
        let h = x.first_at_least(from, &magnitude, caps.search_cap)?;
        add_column(&mut partial, s, &x.value(h)?);
        picks.push(h);
    }
    let selector = Selector::consecutive_after(picks.clone())?;

    // exact recomputation from the selector itself
    let mut values = Vec::with_capacity(rows.len());
    for (n, row) in &rows {
        let v: Rational = row
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let i = selector.at(k as u64 + 1).expect("total selector");
                term(e, x, i)
            })
            .sum::<Result<Rational>>()?;
        if v.abs() < *m0 {
            return Err(postcondition_failed(format!(
                "row {n}: |{}| < {}",
                rational::fmt(&v),
                rational::fmt(m0)
            )));
        }
        values.push(v);
    }
    let achieved = values
        .iter()
        .map(|v| v.abs())
        .min()
        .expect("nonempty block");
    Ok(EscapeResult {
        selector,
        target_rows: block.members.clone(),
        bound: m0.clone(),
        achieved,
        values,
        audit: EscapeAudit::RowFinite {
            j0,
            w0,
            n0,
            p1,
            q0,
            alpha,
            k0,
            block: block.members,
            ambient_block: block.ambient_index,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow2_inv};

    fn n_seq() -> Sequence {
        Sequence::Linear(int(1))
    }

    #[test]
    fn worked_instance() {
        let r =
            escape_unbounded(&[1], &pow2_inv, &n_seq(), &int(5), EscapeCaps::default()).unwrap();
        match &r.audit {
            EscapeAudit::Unbounded { i0, t0, .. } => assert_eq!((*i0, *t0), (2, 26)),
            other => panic!("{other:?}"),
        }
        assert_eq!(r.values, vec![int(7)]);
        assert_eq!(r.selector.prefix(4).unwrap(), vec![1, 26, 27, 28]);
    }

    #[test]
    fn zero_prefix_row() {
        let a = |k: u64| if k >= 3 { int(1) } else { int(0) };
        let r = escape_unbounded(&[1, 2], &a, &n_seq(), &int(1), EscapeCaps::default()).unwrap();
        assert_eq!(r.selector.prefix(4).unwrap(), vec![1, 2, 5, 6]);
        let ones = |_: u64| int(1);
        let r = escape_unbounded(&[], &ones, &n_seq(), &int(0), EscapeCaps::default()).unwrap();
        assert_eq!(r.selector.prefix(3).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn fill_positions_are_consecutive() {
        let a = |k: u64| if k >= 5 { pow2_inv(k) } else { int(0) };
        let r = escape_unbounded(&[2], &a, &n_seq(), &int(3), EscapeCaps::default()).unwrap();
        let p = r.selector.prefix(6).unwrap();
        assert_eq!(&p[..4], &[2, 3, 4, 5]);
        assert!(p[4] >= 2 + 5);
    }

    #[test]
    fn cesaro_block_escape() {
        let r = escape_rowfinite(
            &[1, 2],
            &SummabilityMatrix::Cesaro,
            &n_seq(),
            &IdealPresentation::z(),
            &int(10),
            1,
            1024,
            EscapeCaps::default(),
        )
        .unwrap();
        assert_eq!(r.target_rows, vec![4, 5, 6, 7]);
        assert!(r.values.iter().all(|v| v.abs() >= int(10)));
        assert_eq!(r.selector.prefix(2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn identity_singleton_escape() {
        let r = escape_rowfinite(
            &[],
            &SummabilityMatrix::Identity,
            &n_seq(),
            &IdealPresentation::fin(),
            &int(100),
            1,
            1024,
            EscapeCaps::default(),
        )
        .unwrap();
        assert_eq!(r.target_rows.len(), 1);
        assert!(r.achieved >= int(100));
    }

    #[test]
    fn zero_bound_is_minimal() {
        let r = escape_rowfinite(
            &[3],
            &SummabilityMatrix::Cesaro,
            &n_seq(),
            &IdealPresentation::z(),
            &int(0),
            1,
            64,
            EscapeCaps::default(),
        )
        .unwrap();
        assert_eq!(r.selector.prefix(3).unwrap(), vec![3, 4, 5]);
        assert_eq!(r.audit, EscapeAudit::Trivial);
    }

    #[test]
    fn rowdrop_needs_small_zw_under_fin() {
        let a = SummabilityMatrix::row_drop(SummabilityMatrix::Cesaro, SetDescription::squares());
        let err = escape_rowfinite(
            &[],
            &a,
            &n_seq(),
            &IdealPresentation::fin(),
            &int(2),
            1,
            256,
            EscapeCaps::default(),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
        let ok = escape_rowfinite(
            &[],
            &a,
            &n_seq(),
            &IdealPresentation::z(),
            &int(2),
            1,
            256,
            EscapeCaps::default(),
        )
        .unwrap();
        assert!(ok
            .target_rows
            .iter()
            .all(|n| !SetDescription::squares().member(*n)));
    }
}

//! Ideals on `N` with three-valued membership verdicts, dual-filter queries, restriction to a
//! co-small set, and interval partitions witnessing that sets containing infinitely many blocks
//! escape the ideal.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setlang::{
    banach_window_max, density_report, DensityReport, SetDescription, Tri, ENUMERATION_CAP,
};
use crate::summability::{regularity_verdict, SummabilityMatrix};

/// Largest `ν₂` column reported in a column audit.
pub const AUDIT_COLUMNS: u32 = 20;

#[derive(Debug, Clone)]
pub enum IdealKind {
    Fin,
    /// Sets of asymptotic density zero.
    Z,
    /// Sets of Banach density zero.
    Bd,
    /// Sets whose `ν₂`-columns are finite from some column on.
    FinXFin,
    /// `{S : A·1_S → 0}` for a nonnegative regular matrix `A`.
    Matrix(Box<SummabilityMatrix>),
}

/// Checkpoints used for evidence: the dyadic ladder `2^j <= N` together with `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalePolicy {
    pub min_checkpoint: u64,
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy { min_checkpoint: 16 }
    }
}

impl ScalePolicy {
    pub fn checkpoints(&self, n: u64) -> Vec<u64> {
        let mut out: Vec<u64> = (0..64)
            .map(|j| 1u64 << j)
            .take_while(|&c| c < n)
            .filter(|&c| c >= self.min_checkpoint)
            .collect();
        out.push(n);
        out
    }
}

#[derive(Debug, Clone)]
pub struct IdealPresentation {
    pub kind: IdealKind,
    pub scale_policy: ScalePolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    In,
    NotIn,
    UndecidedUpTo(u64),
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictStatus::In => f.write_str("in"),
            VerdictStatus::NotIn => f.write_str("not-in"),
            VerdictStatus::UndecidedUpTo(n) => write!(f, "undecided-up-to-{n}"),
        }
    }
}

/// `|{n <= N : ν₂(n) = k} ∩ S|` for small `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnAudit {
    pub column: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowDensity {
    pub window: u64,
    #[serde(with = "rational::as_str")]
    pub density: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipVerdict {
    pub status: VerdictStatus,
    pub reason: String,
    pub density: Option<DensityReport>,
    pub columns: Option<Vec<ColumnAudit>>,
    pub windows: Option<Vec<WindowDensity>>,
}

impl MembershipVerdict {
    fn certified(status: VerdictStatus, reason: impl Into<String>) -> Self {
        MembershipVerdict {
            status,
            reason: reason.into(),
            density: None,
            columns: None,
            windows: None,
        }
    }
}

impl IdealPresentation {
    pub fn new(kind: IdealKind) -> Self {
        IdealPresentation {
            kind,
            scale_policy: ScalePolicy::default(),
        }
    }

    pub fn fin() -> Self {
        IdealPresentation::new(IdealKind::Fin)
    }

    pub fn z() -> Self {
        IdealPresentation::new(IdealKind::Z)
    }

    pub fn bd() -> Self {
        IdealPresentation::new(IdealKind::Bd)
    }

    pub fn finxfin() -> Self {
        IdealPresentation::new(IdealKind::FinXFin)
    }

    /// The ideal induced by `a`, which must be nonnegative and regular.
    pub fn matrix(a: SummabilityMatrix) -> Result<Self> {
        if !a.is_nonnegative() {
            return Err(Error::Precondition(format!(
                "matrix {a} is not known to be nonnegative"
            )));
        }
        let v = regularity_verdict(&a, &IdealPresentation::fin(), 1024, 4)?;
        if !v.is_regular() {
            return Err(Error::Precondition(format!(
                "matrix {a} is not certified regular: {:?}",
                v.overall
            )));
        }
        Ok(IdealPresentation::new(IdealKind::Matrix(Box::new(a))))
    }

    /// `fin`, `z`, `bd`, `finxfin` or `matrix:<matrix-spec>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "" => Err(Error::EmptyInput),
            "fin" => Ok(IdealPresentation::fin()),
            "z" => Ok(IdealPresentation::z()),
            "bd" => Ok(IdealPresentation::bd()),
            "finxfin" => Ok(IdealPresentation::finxfin()),
            other => match other.strip_prefix("matrix:") {
                Some(spec) => IdealPresentation::matrix(SummabilityMatrix::parse(spec)?),
                None => Err(Error::syntax(
                    0,
                    format!("unknown ideal '{other}' (fin, z, bd, finxfin, matrix:<spec>)"),
                )),
            },
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            IdealKind::Fin => "fin".into(),
            IdealKind::Z => "z".into(),
            IdealKind::Bd => "bd".into(),
            IdealKind::FinXFin => "finxfin".into(),
            IdealKind::Matrix(a) => format!("matrix:{a}"),
        }
    }

    /// Whether the ideal is contained in `Z`, so that sets of positive upper density escape it.
    pub fn within_z(&self) -> bool {
        match &self.kind {
            IdealKind::Fin | IdealKind::Z | IdealKind::Bd => true,
            IdealKind::FinXFin => false,
            IdealKind::Matrix(a) => a.is_cesaro() || a.is_identity(),
        }
    }
}

fn check_scale(n: u64) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::ScaleCap {
            requested: n,
            cap: ENUMERATION_CAP,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    Ok(())
}

fn tri_status(t: Tri, n: u64) -> VerdictStatus {
    match t {
        Tri::Yes => VerdictStatus::In,
        Tri::No => VerdictStatus::NotIn,
        Tri::Unknown => VerdictStatus::UndecidedUpTo(n),
    }
}

/// Membership of `s` in the ideal; `In`/`NotIn` only from structural certificates, with
/// finite-scale evidence attached when undecided.
pub fn verdict(ideal: &IdealPresentation, s: &SetDescription, n: u64) -> Result<MembershipVerdict> {
    check_scale(n)?;
    match &ideal.kind {
        IdealKind::Fin => {
            let f = s.finiteness();
            let status = tri_status(f.finite, n);
            let mut v = MembershipVerdict::certified(status, "structural finiteness");
            if let VerdictStatus::UndecidedUpTo(_) = status {
                v.reason = "finiteness not derivable; prefix counts attached".into();
                v.density = Some(density_report(
                    s,
                    n,
                    &ideal.scale_policy.checkpoints(n),
                    None,
                )?);
            }
            Ok(v)
        }
        IdealKind::Z => {
            let b = s.density_bounds();
            let status = if b.upper.hi == Rational::from_integer(0.into()) {
                VerdictStatus::In
            } else if b.upper.lo > Rational::from_integer(0.into()) {
                VerdictStatus::NotIn
            } else {
                VerdictStatus::UndecidedUpTo(n)
            };
            let reason = match status {
                VerdictStatus::In => "upper density is 0".to_string(),
                VerdictStatus::NotIn => {
                    format!("upper density is at least {}", rational::fmt(&b.upper.lo))
                }
                VerdictStatus::UndecidedUpTo(_) => "density not derivable".to_string(),
            };
            let mut v = MembershipVerdict::certified(status, reason);
            v.density = Some(density_report(
                s,
                n,
                &ideal.scale_policy.checkpoints(n),
                None,
            )?);
            Ok(v)
        }
        IdealKind::Bd => {
            let b = s.banach_bounds();
            let zero = Rational::from_integer(0.into());
            let status = if b.upper.hi == zero {
                VerdictStatus::In
            } else if b.upper.lo > zero {
                VerdictStatus::NotIn
            } else {
                VerdictStatus::UndecidedUpTo(n)
            };
            let mut v = MembershipVerdict::certified(
                status,
                match status {
                    VerdictStatus::In => "upper Banach density is 0".to_string(),
                    VerdictStatus::NotIn => format!(
                        "upper Banach density is at least {}",
                        rational::fmt(&b.upper.lo)
                    ),
                    VerdictStatus::UndecidedUpTo(_) => "Banach density not derivable".into(),
                },
            );
            if let VerdictStatus::UndecidedUpTo(_) = status {
                v.windows = Some(window_densities(s, n)?);
            }
            Ok(v)
        }
        IdealKind::FinXFin => {
            let status = tri_status(s.finxfin_member(), n);
            let mut v = MembershipVerdict::certified(status, "structural column analysis");
            if let VerdictStatus::UndecidedUpTo(_) = status {
                v.reason = "column structure not derivable; audit attached".into();
            }
            v.columns = Some(column_audit(s, n, AUDIT_COLUMNS));
            Ok(v)
        }
        IdealKind::Matrix(a) => {
            if s.finiteness().finite == Tri::Yes {
                return Ok(MembershipVerdict::certified(
                    VerdictStatus::In,
                    "finite sets are killed by regular matrices",
                ));
            }
            if a.is_cesaro() {
                let mut v = verdict(&IdealPresentation::z(), s, n)?;
                v.reason = format!("Cesàro means of the indicator: {}", v.reason);
                return Ok(v);
            }
            if a.is_identity() {
                return verdict(&IdealPresentation::fin(), s, n);
            }
            let mut v = MembershipVerdict::certified(
                VerdictStatus::UndecidedUpTo(n),
                "no dominating bound for this matrix",
            );
            v.density = Some(density_report(
                s,
                n,
                &ideal.scale_policy.checkpoints(n),
                None,
            )?);
            Ok(v)
        }
    }
}

/// `verdict(I, S^c)`: `In` means `S` lies in the dual filter.
pub fn dual_member(
    ideal: &IdealPresentation,
    s: &SetDescription,
    n: u64,
) -> Result<MembershipVerdict> {
    verdict(ideal, &s.clone().complement(), n)
}

fn window_densities(s: &SetDescription, n: u64) -> Result<Vec<WindowDensity>> {
    (0..64)
        .map(|j| 1u64 << j)
        .take_while(|&l| l <= n)
        .map(|l| {
            Ok(WindowDensity {
                window: l,
                density: banach_window_max(s, n, l)?,
            })
        })
        .collect()
}

/// Column counts `|S ∩ {m <= N : ν₂(m) = k}|` for `k = 0..=max_column`.
pub fn column_audit(s: &SetDescription, n: u64, max_column: u32) -> Vec<ColumnAudit> {
    let mut counts = vec![0u64; max_column as usize + 1];
    for m in 1..=n {
        let k = m.trailing_zeros();
        if k <= max_column && s.member(m) {
            counts[k as usize] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| ColumnAudit {
            column: k as u32,
            count,
        })
        .collect()
}

/// Interval partition `I_q = [σ(q), σ(q+1))`, blocks indexed from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalPartition {
    /// `σ(q) = q`
    Singletons,
    /// `σ(q) = 2^q`, covering `[2, ∞)`.
    Dyadic,
}

impl IntervalPartition {
    pub fn boundary(&self, q: u64) -> Result<u64> {
        match self {
            IntervalPartition::Singletons => Ok(q),
            IntervalPartition::Dyadic => {
                if q >= 63 {
                    Err(Error::Overflow(format!("dyadic boundary 2^{q}")))
                } else {
                    Ok(1u64 << q)
                }
            }
        }
    }

    /// `[lo, hi)` of block `q >= 1`.
    pub fn block(&self, q: u64) -> Result<(u64, u64)> {
        if q == 0 {
            return Err(Error::InvalidArgument("blocks are indexed from 1".into()));
        }
        Ok((self.boundary(q)?, self.boundary(q + 1)?))
    }

    pub fn block_of(&self, n: u64) -> Option<u64> {
        match self {
            IntervalPartition::Singletons => (n >= 1).then_some(n),
            IntervalPartition::Dyadic => (n >= 2).then(|| 63 - n.leading_zeros() as u64),
        }
    }

    /// `∪_{q ∈ selector} I_q`.
    pub fn union_of(&self, selector: SetDescription) -> SetDescription {
        match self {
            IntervalPartition::Singletons => selector,
            IntervalPartition::Dyadic => SetDescription::dyadic_blocks(selector),
        }
    }
}

/// The partition whose blocks witness that the ideal is meager.
pub fn talagrand_partition(ideal: &IdealPresentation) -> Result<IntervalPartition> {
    match &ideal.kind {
        IdealKind::Fin => Ok(IntervalPartition::Singletons),
        IdealKind::Z | IdealKind::Bd => Ok(IntervalPartition::Dyadic),
        IdealKind::FinXFin => Err(Error::Unsupported(
            "no interval partition is presented for Fin x Fin".into(),
        )),
        IdealKind::Matrix(a) if a.is_cesaro() => Ok(IntervalPartition::Dyadic),
        IdealKind::Matrix(a) if a.is_identity() => Ok(IntervalPartition::Singletons),
        IdealKind::Matrix(a) => Err(Error::Unsupported(format!(
            "no interval partition known for matrix:{a}"
        ))),
    }
}

/// `∪_{q ∈ selector} I_q`; the selector must be certifiably infinite.
pub fn nonideal_from_partition(
    partition: IntervalPartition,
    selector: &SetDescription,
) -> Result<SetDescription> {
    if selector.finiteness().finite != Tri::No {
        return Err(Error::Precondition(format!(
            "block selector {selector} is not certifiably infinite"
        )));
    }
    Ok(partition.union_of(selector.clone()))
}

/// An ideal restricted to a set `T` in its dual filter: `J = {U ∩ T : U ∈ I}`.
#[derive(Debug, Clone)]
pub struct RestrictedIdeal {
    pub ambient: IdealPresentation,
    pub support: SetDescription,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictedBlock {
    /// Index in the restricted partition (from 1).
    pub index: u64,
    /// Index of the ambient block it came from.
    pub ambient_index: u64,
    pub members: Vec<u64>,
}

/// Ambient blocks intersected with `T`, empty intersections dropped, reindexed from 1.
#[derive(Debug, Clone)]
pub struct RestrictedPartition {
    pub ambient: IntervalPartition,
    pub support: SetDescription,
}

impl RestrictedPartition {
    fn ambient_block(&self, q: u64) -> Result<Vec<u64>> {
        let (lo, hi) = self.ambient.block(q)?;
        if hi - lo > ENUMERATION_CAP {
            return Err(Error::ScaleCap {
                requested: hi - lo,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(self.support.members_in(lo, hi - 1))
    }

    /// Restricted blocks `1..=count`.
    pub fn blocks(&self, count: u64) -> Result<Vec<RestrictedBlock>> {
        let mut out = Vec::new();
        let mut q = 1;
        while (out.len() as u64) < count {
            let members = self.ambient_block(q)?;
            if !members.is_empty() {
                out.push(RestrictedBlock {
                    index: out.len() as u64 + 1,
                    ambient_index: q,
                    members,
                });
            }
            q += 1;
        }
        Ok(out)
    }

    pub fn block(&self, index: u64) -> Result<RestrictedBlock> {
        if index == 0 {
            return Err(Error::InvalidArgument("blocks are indexed from 1".into()));
        }
        Ok(self.blocks(index)?.pop().expect("index >= 1"))
    }

    /// The restricted block containing `n`, for `n ∈ T`.
    pub fn block_containing(&self, n: u64) -> Result<RestrictedBlock> {
        if !self.support.member(n) {
            return Err(Error::InvalidArgument(format!(
                "{n} is outside the support"
            )));
        }
        let q = self
            .ambient
            .block_of(n)
            .ok_or_else(|| Error::InvalidArgument(format!("{n} lies before the first block")))?;
        let mut index = 0;
        for p in 1..=q {
            if !self.ambient_block(p)?.is_empty() {
                index += 1;
            }
        }
        Ok(RestrictedBlock {
            index,
            ambient_index: q,
            members: self.ambient_block(q)?,
        })
    }
}

impl RestrictedIdeal {
    /// Verdict on `S ∩ T` in the ambient ideal.
    pub fn verdict(&self, s: &SetDescription, n: u64) -> Result<MembershipVerdict> {
        verdict(&self.ambient, &s.clone().intersect(self.support.clone()), n)
    }

    pub fn partition(&self) -> Result<RestrictedPartition> {
        Ok(RestrictedPartition {
            ambient: talagrand_partition(&self.ambient)?,
            support: self.support.clone(),
        })
    }
}

/// Restricts `ideal` to `t`, which must be certified to lie in the dual filter.
pub fn restrict(ideal: &IdealPresentation, t: &SetDescription, n: u64) -> Result<RestrictedIdeal> {
    let d = dual_member(ideal, t, n)?;
    if d.status != VerdictStatus::In {
        return Err(Error::Precondition(format!(
            "{t} is not certified to lie in the dual filter of {} ({})",
            ideal.name(),
            d.status
        )));
    }
    Ok(RestrictedIdeal {
        ambient: ideal.clone(),
        support: t.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setlang::parse_set;

    fn s(t: &str) -> SetDescription {
        parse_set(t).unwrap()
    }

    #[test]
    fn verdict_examples() {
        let z = IdealPresentation::z();
        assert_eq!(
            verdict(&z, &s("builtin:squares"), 10_000).unwrap().status,
            VerdictStatus::In
        );
        assert_eq!(
            verdict(&z, &s("ap:2,2"), 1000).unwrap().status,
            VerdictStatus::NotIn
        );
        assert_eq!(
            verdict(&IdealPresentation::finxfin(), &s("builtin:nu2_ge(3)"), 1000)
                .unwrap()
                .status,
            VerdictStatus::NotIn
        );
        assert_eq!(
            verdict(&IdealPresentation::fin(), &s("finite:{1,2,3}"), 10)
                .unwrap()
                .status,
            VerdictStatus::In
        );
        assert!(matches!(
            verdict(&z, &s("ap:1,2"), ENUMERATION_CAP + 1),
            Err(Error::ScaleCap { .. })
        ));
    }

    #[test]
    fn undecided_carries_evidence() {
        let weird = s("intersect:builtin:squares|builtin:dyadic_blocks(builtin:squares)");
        let v = verdict(&IdealPresentation::fin(), &weird, 1000).unwrap();
        assert_eq!(v.status, VerdictStatus::UndecidedUpTo(1000));
        assert!(v.density.is_some());
        let bd = verdict(
            &IdealPresentation::bd(),
            &s("builtin:dyadic_blocks(builtin:squares)").complement(),
            256,
        )
        .unwrap();
        assert!(matches!(
            bd.status,
            VerdictStatus::NotIn | VerdictStatus::UndecidedUpTo(_)
        ));
    }

    #[test]
    fn dual_examples() {
        let z = IdealPresentation::z();
        assert_eq!(
            dual_member(&z, &s("complement:builtin:squares"), 10_000)
                .unwrap()
                .status,
            VerdictStatus::In
        );
        assert_eq!(
            dual_member(&IdealPresentation::fin(), &s("ap:1,1"), 10)
                .unwrap()
                .status,
            VerdictStatus::In
        );
        assert_eq!(
            dual_member(&z, &s("ap:2,2"), 1000).unwrap().status,
            VerdictStatus::NotIn
        );
    }

    #[test]
    fn partitions() {
        assert_eq!(
            talagrand_partition(&IdealPresentation::z()).unwrap(),
            IntervalPartition::Dyadic
        );
        assert_eq!(
            talagrand_partition(&IdealPresentation::fin()).unwrap(),
            IntervalPartition::Singletons
        );
        assert_eq!(
            talagrand_partition(&IdealPresentation::bd()).unwrap(),
            IntervalPartition::Dyadic
        );
        assert!(talagrand_partition(&IdealPresentation::finxfin()).is_err());
        assert_eq!(IntervalPartition::Dyadic.block(3).unwrap(), (8, 16));
        assert_eq!(IntervalPartition::Dyadic.block_of(15), Some(3));
        assert_eq!(IntervalPartition::Dyadic.block_of(1), None);
    }

    #[test]
    fn nonideal_examples() {
        let z = IdealPresentation::z();
        let evens = nonideal_from_partition(IntervalPartition::Dyadic, &s("ap:2,2")).unwrap();
        assert_eq!(
            verdict(&z, &evens, 4096).unwrap().status,
            VerdictStatus::NotIn
        );
        let all = nonideal_from_partition(IntervalPartition::Singletons, &s("ap:1,1")).unwrap();
        assert_eq!(
            verdict(&IdealPresentation::fin(), &all, 100)
                .unwrap()
                .status,
            VerdictStatus::NotIn
        );
        let thirds = nonideal_from_partition(IntervalPartition::Dyadic, &s("ap:1,3")).unwrap();
        assert_eq!(
            verdict(&z, &thirds, 4096).unwrap().status,
            VerdictStatus::NotIn
        );
        assert_eq!(
            verdict(&IdealPresentation::bd(), &thirds, 4096)
                .unwrap()
                .status,
            VerdictStatus::NotIn
        );
        assert!(nonideal_from_partition(IntervalPartition::Dyadic, &s("finite:{1,2}")).is_err());
    }

    #[test]
    fn restriction_examples() {
        let z = IdealPresentation::z();
        let r = restrict(&z, &s("complement:finite:{1..9}"), 1000).unwrap();
        let p = r.partition().unwrap();
        let blocks = p.blocks(3).unwrap();
        assert_eq!(blocks[0].members, (10..16).collect::<Vec<_>>());
        assert_eq!(blocks[1].ambient_index, 4);
        assert_eq!(blocks[1].members, (16..32).collect::<Vec<_>>());

        let fin = restrict(&IdealPresentation::fin(), &s("ap:1,1"), 10).unwrap();
        let p = fin.partition().unwrap();
        assert_eq!(p.block(5).unwrap().members, vec![5]);

        let sq = restrict(&z, &s("complement:builtin:squares"), 10_000).unwrap();
        for b in sq.partition().unwrap().blocks(12).unwrap() {
            let size = 1u64 << b.ambient_index;
            assert!(
                b.members.len() as u64
                    >= size.saturating_sub(((2 * size) as f64).sqrt() as u64 + 1)
            );
            assert_eq!(b.index, b.ambient_index);
        }
        assert!(restrict(&z, &s("ap:2,2"), 100).is_err());
        assert_eq!(p.block_containing(7).unwrap().index, 7);
    }

    #[test]
    fn matrix_ideals() {
        let c = IdealPresentation::matrix(SummabilityMatrix::Cesaro).unwrap();
        assert_eq!(
            verdict(&c, &s("builtin:squares"), 100).unwrap().status,
            VerdictStatus::In
        );
        assert_eq!(
            verdict(&c, &s("ap:1,2"), 100).unwrap().status,
            VerdictStatus::NotIn
        );
        let w = IdealPresentation::parse("matrix:gen:window2").unwrap();
        assert_eq!(
            verdict(&w, &s("finite:{3}"), 100).unwrap().status,
            VerdictStatus::In
        );
        assert_eq!(
            verdict(&w, &s("ap:1,2"), 100).unwrap().status,
            VerdictStatus::UndecidedUpTo(100)
        );
        assert!(IdealPresentation::parse("matrix:gen:geometric").is_err());
        assert!(IdealPresentation::parse("rowdrop").is_err());
    }

    #[test]
    fn column_audit_counts() {
        let a = column_audit(&s("ap:1,1"), 16, 4);
        assert_eq!(
            a.iter().map(|c| c.count).collect::<Vec<_>>(),
            vec![8, 4, 2, 1, 1]
        );
    }
}

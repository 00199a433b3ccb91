//! The space of strictly increasing selectors `σ: N → N`.
//!
//! A [`Selector`] is a finite stem followed by a tail rule. Image membership is decidable for
//! every tail kind (for generator tails by binary search, using `σ(n) >= n`), which is what the
//! symmetric-difference metric `d(σ₁, σ₂) = Σ_{i ∈ Im σ₁ △ Im σ₂} 2^{-i}` needs.
//!
//! Selectors with equal images are at distance zero: `d` is a metric on images and only a
//! pseudometric on selectors.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sequence::Sequence;

/// Name of the PRNG behind [`sample_selector`]; recorded in run logs.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

#[derive(Clone)]
pub enum SelectorFn {
    /// `n ↦ mul·n + add`
    Affine { mul: u64, add: i64 },
    /// `n ↦ n²`
    Squares,
    Custom {
        name: String,
        f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    },
}

impl SelectorFn {
    pub fn eval(&self, n: u64) -> Option<u64> {
        match self {
            SelectorFn::Affine { mul, add } => {
                let v = (*mul as i128) * (n as i128) + (*add as i128);
                u64::try_from(v).ok().filter(|&v| v >= 1)
            }
            SelectorFn::Squares => n.checked_mul(n),
            SelectorFn::Custom { f, .. } => Some(f(n)),
        }
    }
}

impl fmt::Debug for SelectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SelectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectorFn::Affine { mul: 1, add: 0 } => f.write_str("id"),
            SelectorFn::Affine { mul: 2, add: 0 } => f.write_str("even"),
            SelectorFn::Affine { mul: 2, add: -1 } => f.write_str("odd"),
            SelectorFn::Affine { mul, add } => write!(f, "affine:{mul},{add}"),
            SelectorFn::Squares => f.write_str("squares"),
            SelectorFn::Custom { name, .. } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Tail {
    /// `σ(j + s) = from + s - 1` for `s >= 1`, where `j` is the stem length.
    Consecutive(u64),
    /// `σ(n) = g(n)` for `n > j`.
    Generator(SelectorFn),
    /// No tail: a finite prefix whose image is known exactly on `[1, decided_through]`.
    Open { decided_through: u64 },
}

#[derive(Debug, Clone)]
pub struct Selector {
    stem: Vec<u64>,
    tail: Tail,
}

impl Selector {
    pub fn new(stem: Vec<u64>, tail: Tail) -> Result<Self> {
        if stem.first() == Some(&0) || stem.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "selector stems are strictly increasing positive integers".into(),
            ));
        }
        let last = stem.last().copied().unwrap_or(0);
        match &tail {
            Tail::Consecutive(from) => {
                if *from <= last {
                    return Err(Error::InvalidArgument(format!(
                        "consecutive tail must start above {last}"
                    )));
                }
            }
            Tail::Generator(g) => {
                let j = stem.len() as u64;
                let first = g.eval(j + 1).ok_or_else(|| {
                    Error::InvalidArgument("generator tail undefined past the stem".into())
                })?;
                let second = g.eval(j + 2).unwrap_or(0);
                if first <= last || second <= first {
                    return Err(Error::InvalidArgument(
                        "generator tail must continue the stem strictly increasingly".into(),
                    ));
                }
            }
            Tail::Open { decided_through } => {
                if *decided_through < last {
                    return Err(Error::InvalidArgument(
                        "open selectors decide at least their own stem".into(),
                    ));
                }
            }
        }
        Ok(Selector { stem, tail })
    }

    pub fn identity() -> Self {
        Selector {
            stem: Vec::new(),
            tail: Tail::Generator(SelectorFn::Affine { mul: 1, add: 0 }),
        }
    }

    pub fn generator(g: SelectorFn) -> Result<Self> {
        Selector::new(Vec::new(), Tail::Generator(g))
    }

    /// Stem followed by `last + 1, last + 2, ...`.
    pub fn consecutive_after(stem: Vec<u64>) -> Result<Self> {
        let from = stem.last().copied().unwrap_or(0) + 1;
        Selector::new(stem, Tail::Consecutive(from))
    }

    /// A bare finite prefix.
    pub fn finite(stem: Vec<u64>) -> Result<Self> {
        let decided_through = stem.last().copied().unwrap_or(0);
        Selector::new(stem, Tail::Open { decided_through })
    }

    pub fn stem(&self) -> &[u64] {
        &self.stem
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_total(&self) -> bool {
        !matches!(self.tail, Tail::Open { .. })
    }

    /// `σ(n)`, or `None` past the end of an open prefix.
    pub fn at(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return None;
        }
        let j = self.stem.len() as u64;
        if n <= j {
            return Some(self.stem[(n - 1) as usize]);
        }
        match &self.tail {
            Tail::Consecutive(from) => from.checked_add(n - j - 1),
            Tail::Generator(g) => g.eval(n),
            Tail::Open { .. } => None,
        }
    }

    /// `σ(1), ..., σ(len)`.
    pub fn prefix(&self, len: u64) -> Result<Vec<u64>> {
        (1..=len)
            .map(|n| {
                self.at(n).ok_or_else(|| {
                    Error::InvalidArgument(format!("finite selector exhausted at index {n}"))
                })
            })
            .collect()
    }

    /// Whether `i ∈ Im(σ)`; `None` when an open prefix does not decide `i`.
    pub fn contains(&self, i: u64) -> Option<bool> {
        if self.stem.binary_search(&i).is_ok() {
            return Some(true);
        }
        let last = self.stem.last().copied().unwrap_or(0);
        if i <= last {
            return Some(false);
        }
        match &self.tail {
            Tail::Consecutive(from) => Some(i >= *from),
            Tail::Open { decided_through } => (i <= *decided_through).then_some(false),
            Tail::Generator(g) => {
                // σ(n) >= n, so a preimage of i lies in (j, i]
                let (mut lo, mut hi) = (self.stem.len() as u64 + 1, i);
                while lo <= hi {
                    let mid = lo + (hi - lo) / 2;
                    match g.eval(mid) {
                        Some(v) if v == i => return Some(true),
                        Some(v) if v < i => lo = mid + 1,
                        _ => {
                            if mid == 0 {
                                break;
                            }
                            hi = mid - 1
                        }
                    }
                }
                Some(false)
            }
        }
    }

    /// Parses `id`, `even`, `odd`, `gen:<fn>`, `stem:{..}`, `stem:{..}+consec[:v]`,
    /// `stem:{..}+gen:<fn>` and `random:<seed>:<p>` (the last one sampled on `[1, n]`).
    pub fn parse(spec: &str, n: u64) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(rest) = spec.strip_prefix("random:") {
            let (seed, p) = rest
                .split_once(':')
                .ok_or_else(|| Error::syntax(7, "expected random:<seed>:<p>"))?;
            let seed: u64 = seed
                .parse()
                .map_err(|_| Error::syntax(7, "seed must be an unsigned integer"))?;
            let p = rational::to_f64(&rational::parse(p)?);
            return sample_selector(seed, p, n);
        }
        if let Some(rest) = spec.strip_prefix("stem:{") {
            let close = rest
                .find('}')
                .ok_or_else(|| Error::syntax(spec.len(), "expected '}'"))?;
            let stem = parse_list(&rest[..close], 6)?;
            let after = &rest[close + 1..];
            if after.is_empty() {
                return Selector::finite(stem);
            }
            if let Some(t) = after.strip_prefix("+consec") {
                let from = if let Some(v) = t.strip_prefix(':') {
                    v.parse()
                        .map_err(|_| Error::syntax(spec.len() - t.len(), "bad consecutive start"))?
                } else if t.is_empty() {
                    stem.last().copied().unwrap_or(0) + 1
                } else {
                    return Err(Error::syntax(spec.len() - t.len(), "unexpected input"));
                };
                return Selector::new(stem, Tail::Consecutive(from));
            }
            if let Some(t) = after.strip_prefix("+gen:") {
                return Selector::new(stem, Tail::Generator(parse_fn(t)?));
            }
            if let Some(t) = after.strip_prefix("+open:") {
                let decided_through = t
                    .parse()
                    .map_err(|_| Error::syntax(spec.len() - t.len(), "bad bound"))?;
                return Selector::new(stem, Tail::Open { decided_through });
            }
            return Err(Error::syntax(
                spec.len() - after.len(),
                "expected +consec or +gen:",
            ));
        }
        let name = spec.strip_prefix("gen:").unwrap_or(spec);
        Selector::generator(parse_fn(name)?)
    }
}

fn parse_list(text: &str, offset: usize) -> Result<Vec<u64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::syntax(offset, format!("bad integer '{t}'")))
        })
        .collect()
}

fn parse_fn(name: &str) -> Result<SelectorFn> {
    Ok(match name {
        "id" => SelectorFn::Affine { mul: 1, add: 0 },
        "even" => SelectorFn::Affine { mul: 2, add: 0 },
        "odd" => SelectorFn::Affine { mul: 2, add: -1 },
        "squares" => SelectorFn::Squares,
        _ => {
            if let Some(c) = name.strip_prefix("shift:") {
                let add = c
                    .parse()
                    .map_err(|_| Error::syntax(0, format!("bad shift '{c}'")))?;
                SelectorFn::Affine { mul: 1, add }
            } else if let Some(args) = name.strip_prefix("affine:") {
                let (m, c) = args
                    .split_once(',')
                    .ok_or_else(|| Error::syntax(0, "expected affine:<mul>,<add>"))?;
                let mul: u64 = m.parse().map_err(|_| Error::syntax(0, "bad multiplier"))?;
                if mul == 0 {
                    return Err(Error::syntax(0, "multiplier must be positive"));
                }
                let add = c.parse().map_err(|_| Error::syntax(0, "bad offset"))?;
                SelectorFn::Affine { mul, add }
            } else {
                return Err(Error::syntax(0, format!("unknown selector '{name}'")));
            }
        }
    })
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stem.is_empty() {
            if let Tail::Generator(g) = &self.tail {
                return match g {
                    SelectorFn::Affine { mul: 1, add: 0 }
                    | SelectorFn::Affine { mul: 2, add: 0 }
                    | SelectorFn::Affine { mul: 2, add: -1 } => write!(f, "{g}"),
                    _ => write!(f, "gen:{g}"),
                };
            }
        }
        let stem: Vec<String> = self.stem.iter().map(u64::to_string).collect();
        write!(f, "stem:{{{}}}", stem.join(","))?;
        match &self.tail {
            Tail::Consecutive(v) => write!(f, "+consec:{v}"),
            Tail::Generator(g) => write!(f, "+gen:{g}"),
            Tail::Open { decided_through } => {
                if Some(decided_through) == self.stem.last() || (*decided_through == 0) {
                    Ok(())
                } else {
                    write!(f, "+open:{decided_through}")
                }
            }
        }
    }
}

/// `(x_{σ(1)}, ..., x_{σ(len)})`.
pub fn apply_selector(selector: &Selector, x: &Sequence, len: u64) -> Result<Vec<Rational>> {
    selector
        .prefix(len)?
        .into_iter()
        .map(|i| x.value(i))
        .collect()
}

/// Whether `σ` lies in the basic open set of selectors extending `stem`.
pub fn ball_contains(stem: &[u64], selector: &Selector) -> bool {
    stem.iter()
        .enumerate()
        .all(|(s, &t)| selector.at(s as u64 + 1) == Some(t))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricInterval {
    #[serde(with = "rational::as_str")]
    pub lo: Rational,
    #[serde(with = "rational::as_str")]
    pub hi: Rational,
    pub resolution: u64,
    /// Members of `Im σ₁ △ Im σ₂` inside `[1, resolution]`.
    pub differing: Vec<u64>,
}

/// Encloses `d(σ₁, σ₂)` in `[lo, lo + 2^{-K}]` from image membership on `[1, K]`.
pub fn metric(a: &Selector, b: &Selector, resolution: u64) -> Result<MetricInterval> {
    let mut numer = BigUint::zero();
    let mut differing = Vec::new();
    for i in 1..=resolution {
        let (ma, mb) = match (a.contains(i), b.contains(i)) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(Error::Precondition(format!(
                    "image membership of {i} is not decided"
                )))
            }
        };
        if ma != mb {
            numer += BigUint::one() << (resolution - i);
            differing.push(i);
        }
    }
    let lo = Rational::new(numer.into(), (BigUint::one() << resolution).into());
    let hi = &lo + rational::pow2_inv(resolution);
    Ok(MetricInterval {
        lo,
        hi,
        resolution,
        differing,
    })
}

/// An absolutely summable row `(a_k)` with a certified tail `Σ_{k > K} |a_k|`.
#[derive(Clone)]
pub struct SummableRow {
    name: String,
    entry: Arc<dyn Fn(u64) -> Rational + Send + Sync>,
    tail: Arc<dyn Fn(u64) -> Rational + Send + Sync>,
}

impl fmt::Debug for SummableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SummableRow")
            .field("name", &self.name)
            .finish()
    }
}

impl SummableRow {
    pub fn new(
        name: impl Into<String>,
        entry: impl Fn(u64) -> Rational + Send + Sync + 'static,
        tail: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        SummableRow {
            name: name.into(),
            entry: Arc::new(entry),
            tail: Arc::new(tail),
        }
    }

    /// `a_k` for `k <= entries.len()`, zero afterwards.
    pub fn finite(entries: Vec<Rational>) -> Self {
        let entries = Arc::new(entries);
        let e = entries.clone();
        SummableRow::new(
            "finite",
            move |k| {
                if k >= 1 && (k as usize) <= e.len() {
                    e[k as usize - 1].clone()
                } else {
                    Rational::zero()
                }
            },
            move |big_k| entries.iter().skip(big_k as usize).map(|a| a.abs()).sum(),
        )
    }

    /// `a_k = first · ratio^{k-1}` with `|ratio| < 1`.
    pub fn geometric(first: Rational, ratio: Rational) -> Result<Self> {
        if ratio.abs() >= Rational::one() {
            return Err(Error::InvalidArgument(
                "geometric rows need |ratio| < 1".into(),
            ));
        }
        let (f1, r1) = (first.clone(), ratio.clone());
        Ok(SummableRow::new(
            format!("geometric:{first},{ratio}"),
            move |k| &f1 * num_traits::pow(r1.clone(), (k - 1) as usize),
            move |big_k| {
                let r = ratio.abs();
                first.abs() * num_traits::pow(r.clone(), big_k as usize) / (Rational::one() - r)
            },
        ))
    }

    pub fn entry(&self, k: u64) -> Rational {
        (self.entry)(k)
    }

    pub fn tail(&self, k: u64) -> Rational {
        (self.tail)(k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Modulus {
    pub k0: u64,
    #[serde(with = "rational::as_str")]
    pub delta: Rational,
    /// `x = 0`: the map is constant and every `δ` works.
    pub degenerate: bool,
}

/// Returns `δ = 2^{-k₀}` with `k₀` least such that `Σ_{k > k₀} |a_k| < ε / (2‖x‖)`. Selectors
/// agreeing on positions `1..=k₀` satisfy `|a·σ₁(x) − a·σ₂(x)| < ε`; a distance below `δ` alone
/// does not force that agreement (see [`local_modulus`]).
pub fn modulus_of_continuity(
    x_norm: &Rational,
    row: &SummableRow,
    eps: &Rational,
    cap: u64,
) -> Result<Modulus> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    if x_norm.is_negative() {
        return Err(Error::InvalidArgument("‖x‖ must be nonnegative".into()));
    }
    if x_norm.is_zero() {
        return Ok(Modulus {
            k0: 0,
            delta: Rational::one(),
            degenerate: true,
        });
    }
    let target = eps / (Rational::from_integer(2.into()) * x_norm);
    for k0 in 0..=cap {
        if row.tail(k0) < target {
            return Ok(Modulus {
                k0,
                delta: rational::pow2_inv(k0),
                degenerate: false,
            });
        }
    }
    Err(Error::SearchCap(format!(
        "no k0 <= {cap} with tail below ε/(2‖x‖)"
    )))
}

/// The modulus at a fixed `σ`: `δ = 2^{-σ(k₀)}` with `k₀` from [`modulus_of_continuity`].
/// `d(σ, τ) < δ` makes the images agree on `[1, σ(k₀)]`, hence `τ(k) = σ(k)` for `k ≤ k₀` and
/// `|a·σ(x) − a·τ(x)| < ε`.
pub fn local_modulus(
    selector: &Selector,
    x_norm: &Rational,
    row: &SummableRow,
    eps: &Rational,
    cap: u64,
) -> Result<Modulus> {
    let m = modulus_of_continuity(x_norm, row, eps, cap)?;
    if m.degenerate || m.k0 == 0 {
        return Ok(m);
    }
    let edge = selector
        .at(m.k0)
        .ok_or_else(|| Error::Precondition(format!("σ({}) is not decided", m.k0)))?;
    Ok(Modulus {
        k0: m.k0,
        delta: rational::pow2_inv(edge),
        degenerate: false,
    })
}

/// `Σ_{k ≤ terms} a_k x_{σ(k)}` together with the certified remainder bound `‖x‖·tail(terms)`.
pub fn selected_dot(
    row: &SummableRow,
    x: &Sequence,
    selector: &Selector,
    terms: u64,
) -> Result<(Rational, Rational)> {
    let norm = x
        .sup_norm()
        .ok_or_else(|| Error::Domain("the sequence carries no sup-norm bound".into()))?;
    let mut partial = Rational::zero();
    for k in 1..=terms {
        let a = row.entry(k);
        if a.is_zero() {
            continue;
        }
        let idx = selector
            .at(k)
            .ok_or_else(|| Error::InvalidArgument("finite selector exhausted".into()))?;
        partial += a * x.value(idx)?;
    }
    Ok((partial, norm * row.tail(terms)))
}

/// Includes each `n <= len` independently with probability `p`, deterministically in `seed`.
pub fn sample_selector(seed: u64, p: f64, len: u64) -> Result<Selector> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(
            "p must lie strictly between 0 and 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stem: Vec<u64> = (1..=len).filter(|_| rng.gen_bool(p)).collect();
    Selector::new(
        stem,
        Tail::Open {
            decided_through: len,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn tails_evaluate() {
        let s = Selector::parse("stem:{1,26}+consec", 0).unwrap();
        assert_eq!(s.prefix(4).unwrap(), vec![1, 26, 27, 28]);
        let e = Selector::parse("even", 0).unwrap();
        assert_eq!(e.prefix(3).unwrap(), vec![2, 4, 6]);
        let g = Selector::parse("stem:{1,3}+gen:squares", 0).unwrap();
        assert_eq!(g.prefix(4).unwrap(), vec![1, 3, 9, 16]);
        assert!(Selector::finite(vec![2, 5]).unwrap().prefix(3).is_err());
    }

    #[test]
    fn invalid_selectors_rejected() {
        assert!(Selector::new(vec![3, 2], Tail::Consecutive(10)).is_err());
        assert!(Selector::new(vec![3], Tail::Consecutive(3)).is_err());
        assert!(Selector::new(
            vec![5],
            Tail::Generator(SelectorFn::Affine { mul: 1, add: 0 })
        )
        .is_err());
        assert!(Selector::parse("gen:affine:0,1", 0).is_err());
        assert!(Selector::parse("", 0).is_err());
    }

    #[test]
    fn image_membership() {
        let s = Selector::parse("stem:{2,5}+gen:squares", 0).unwrap();
        assert_eq!(s.contains(5), Some(true));
        assert_eq!(s.contains(4), Some(false));
        assert_eq!(s.contains(9), Some(true));
        assert_eq!(s.contains(10), Some(false));
        let open = Selector::finite(vec![2, 5]).unwrap();
        assert_eq!(open.contains(3), Some(false));
        assert_eq!(open.contains(6), None);
    }

    #[test]
    fn apply_examples() {
        let alt = Sequence::Periodic(vec![int(0), int(1)]);
        let even = Selector::parse("even", 0).unwrap();
        assert_eq!(apply_selector(&even, &alt, 3).unwrap(), vec![int(1); 3]);
        let n = Sequence::Linear(int(1));
        let s = Selector::parse("stem:{1,26}+consec", 0).unwrap();
        assert_eq!(
            apply_selector(&s, &n, 4).unwrap(),
            vec![int(1), int(26), int(27), int(28)]
        );
        let id = Selector::identity();
        assert_eq!(
            apply_selector(&id, &alt, 3).unwrap(),
            vec![int(0), int(1), int(0)]
        );
    }

    #[test]
    fn metric_examples() {
        let id = Selector::identity();
        let shifted = Selector::parse("gen:shift:1", 0).unwrap();
        let m = metric(&id, &shifted, 20).unwrap();
        assert_eq!(m.lo, rat(1, 2));
        assert_eq!(m.hi, rat(1, 2) + rational::pow2_inv(20));
        assert_eq!(m.differing, vec![1]);

        let same = metric(&id, &id, 20).unwrap();
        assert_eq!(same.lo, rat(0, 1));
        assert_eq!(same.hi, rational::pow2_inv(20));

        let a = Selector::parse("even", 0).unwrap();
        let b = Selector::parse("gen:affine:2,2", 0).unwrap();
        let m = metric(&a, &b, 30).unwrap();
        assert_eq!(m.lo, rat(1, 4));
        assert_eq!(m.differing, vec![2]);
    }

    #[test]
    fn metric_needs_decided_images() {
        let open = Selector::finite(vec![1, 2]).unwrap();
        assert!(metric(&open, &Selector::identity(), 5).is_err());
    }

    #[test]
    fn ball_examples() {
        let s = Selector::parse("stem:{1,26}+consec", 0).unwrap();
        assert!(ball_contains(&[1, 26], &s));
        assert!(!ball_contains(&[2], &Selector::identity()));
        assert!(ball_contains(&[], &s));
    }

    #[test]
    fn modulus_examples() {
        let row = SummableRow::geometric(rat(1, 2), rat(1, 2)).unwrap();
        assert_eq!(row.tail(3), rat(1, 8));
        let m = modulus_of_continuity(&int(1), &row, &rat(1, 4), 64).unwrap();
        assert_eq!(m.k0, 4);
        assert_eq!(m.delta, rat(1, 16));

        let fin = SummableRow::finite(vec![int(1), rational::sint(-2), int(3)]);
        for eps in [rat(1, 1000), int(1), int(100)] {
            let m = modulus_of_continuity(&int(5), &fin, &eps, 64).unwrap();
            assert!(m.k0 <= 3);
            assert!(m.delta >= rational::pow2_inv(3));
        }

        let zero = modulus_of_continuity(&int(0), &row, &rat(1, 4), 64).unwrap();
        assert!(zero.degenerate);
        assert!(modulus_of_continuity(&int(1), &row, &int(0), 64).is_err());
    }

    #[test]
    fn uniform_modulus_misses_shifted_selectors() {
        let row = SummableRow::geometric(rat(1, 2), rat(1, 2)).unwrap();
        let eps = rat(1, 4);
        let m = modulus_of_continuity(&int(1), &row, &eps, 64).unwrap();
        let s1 = Selector::consecutive_after(vec![5]).unwrap();
        let s2 = Selector::consecutive_after(vec![6]).unwrap();
        let d = metric(&s1, &s2, 40).unwrap();
        assert!(d.hi < m.delta);
        let x = Sequence::Periodic(vec![rational::sint(-1), int(1)]);
        let (y1, _) = selected_dot(&row, &x, &s1, 200).unwrap();
        let (y2, _) = selected_dot(&row, &x, &s2, 200).unwrap();
        assert!((y1 - y2).abs() > eps);

        let local = local_modulus(&s1, &int(1), &row, &eps, 64).unwrap();
        assert_eq!(local.delta, rational::pow2_inv(8));
        assert!(d.lo >= local.delta);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_selector(7, 0.5, 10).unwrap();
        let b = sample_selector(7, 0.5, 10).unwrap();
        assert_eq!(a.stem(), b.stem());
        let dense = sample_selector(3, 0.999, 50).unwrap();
        assert!(dense.stem().len() >= 45);
        assert!(sample_selector(1, 1.0, 10).is_err());
        assert!(sample_selector(1, 0.0, 10).is_err());
    }

    #[test]
    fn display_round_trips() {
        for spec in [
            "id",
            "even",
            "odd",
            "gen:squares",
            "stem:{1,26}+consec:27",
            "stem:{2,3}",
            "stem:{1}+gen:affine:3,1",
        ] {
            let s = Selector::parse(spec, 0).unwrap();
            assert_eq!(s.to_string(), spec);
        }
    }
}

//! The filter game `G(I)`: player I plays sets of the dual filter, player II answers with
//! nonempty finite subsets, and II wins when the union of its answers escapes the ideal.
//!
//! Transcripts are finite, so adjudication produces evidence for one side rather than a proof.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideals::{dual_member, IdealKind, IdealPresentation, VerdictStatus};
use crate::rational::{self, Rational};
use crate::setlang::{parse_set, SetDescription};

/// Scan limit when a strategy looks for members of a move without a closed form.
pub const MEMBER_SCAN_CAP: u64 = 1 << 20;
/// Search limit for the prefix-density strategy.
pub const PREFIX_DENSITY_CAP: u64 = 1_000_000;
/// Columns tracked when adjudicating `Fin x Fin` games.
pub const ADJUDICATED_COLUMNS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Legality {
    /// Dual-filter verdict on player I's move; only `in` is legal.
    pub i_move: VerdictStatus,
    pub nonempty: bool,
    pub subset: bool,
}

impl Legality {
    pub fn is_legal(&self) -> bool {
        self.i_move == VerdictStatus::In && self.nonempty && self.subset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub index: u64,
    #[serde(rename = "move")]
    pub move_: String,
    pub picked: Vec<u64>,
    pub legality: Legality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameTranscript {
    pub ideal: String,
    pub scale: u64,
    pub rounds: Vec<Round>,
}

impl GameTranscript {
    pub fn new(ideal: &IdealPresentation, scale: u64) -> Self {
        GameTranscript {
            ideal: ideal.name(),
            scale,
            rounds: Vec::new(),
        }
    }

    /// Index of the next round (from 1).
    pub fn next_index(&self) -> u64 {
        self.rounds.len() as u64 + 1
    }

    /// `∪ F_n` so far.
    pub fn union(&self) -> BTreeSet<u64> {
        self.rounds
            .iter()
            .flat_map(|r| r.picked.iter().copied())
            .collect()
    }

    /// One JSON object per round.
    pub fn to_jsonl(&self) -> String {
        self.rounds
            .iter()
            .map(|r| serde_json::to_string(r).expect("round serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(ideal: &IdealPresentation, scale: u64, text: &str) -> Result<Self> {
        let mut t = GameTranscript::new(ideal, scale);
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let round: Round = serde_json::from_str(line)
                .map_err(|e| Error::syntax(e.column(), format!("line {}: {e}", i + 1)))?;
            t.rounds.push(round);
        }
        Ok(t)
    }
}

fn legality(
    ideal: &IdealPresentation,
    scale: u64,
    a: &SetDescription,
    picked: &[u64],
) -> Result<Legality> {
    Ok(Legality {
        i_move: dual_member(ideal, a, scale)?.status,
        nonempty: !picked.is_empty(),
        subset: picked.iter().all(|&m| a.member(m)),
    })
}

/// Recomputes the legality of every stored round.
pub fn recheck(t: &GameTranscript, ideal: &IdealPresentation) -> Result<Vec<Legality>> {
    t.rounds
        .iter()
        .map(|r| legality(ideal, t.scale, &parse_set(&r.move_)?, &r.picked))
        .collect()
}

pub trait StrategyI {
    fn name(&self) -> String;
    fn play(&mut self, history: &GameTranscript) -> SetDescription;
}

pub trait StrategyII {
    fn name(&self) -> String;
    fn respond(&mut self, history: &GameTranscript, a: &SetDescription) -> Result<Vec<u64>>;
}

/// Checks player I's move, asks player II for its answer, checks it and appends the round.
/// Illegal moves leave the transcript unchanged.
pub fn play_round(
    t: &mut GameTranscript,
    ideal: &IdealPresentation,
    a: &SetDescription,
    ii: &mut dyn StrategyII,
) -> Result<()> {
    let dual = dual_member(ideal, a, t.scale)?;
    if dual.status != VerdictStatus::In {
        return Err(Error::IllegalMove(format!(
            "player I: {a} is not certified in the dual filter of {} ({}: {})",
            ideal.name(),
            dual.status,
            dual.reason
        )));
    }
    let mut picked = ii.respond(t, a)?;
    picked.sort_unstable();
    picked.dedup();
    let legal = legality(ideal, t.scale, a, &picked)?;
    if !legal.nonempty {
        return Err(Error::IllegalMove(format!(
            "player II ({}) picked nothing",
            ii.name()
        )));
    }
    if !legal.subset {
        return Err(Error::IllegalMove(format!(
            "player II ({}) picked elements outside {a}",
            ii.name()
        )));
    }
    t.rounds.push(Round {
        index: t.next_index(),
        move_: a.to_string(),
        picked,
        legality: legal,
    });
    Ok(())
}

/// Plays `rounds` rounds between the two strategies.
pub fn play_game(
    ideal: &IdealPresentation,
    scale: u64,
    rounds: u64,
    one: &mut dyn StrategyI,
    two: &mut dyn StrategyII,
) -> Result<GameTranscript> {
    let mut t = GameTranscript::new(ideal, scale);
    for _ in 0..rounds {
        let a = one.play(&t);
        play_round(&mut t, ideal, &a, two)?;
    }
    Ok(t)
}

/// Player I answers round `n` with `{m : ν₂(m) >= n}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nu2StrategyI;

impl StrategyI for Nu2StrategyI {
    fn name(&self) -> String {
        "nu2".into()
    }

    fn play(&mut self, history: &GameTranscript) -> SetDescription {
        SetDescription::nu2_ge(history.next_index() as u32)
    }
}

/// Player I cycles through a fixed list of moves.
#[derive(Debug, Clone)]
pub struct FixedScheduleI {
    pub moves: Vec<SetDescription>,
}

impl StrategyI for FixedScheduleI {
    fn name(&self) -> String {
        format!("fixed({})", self.moves.len())
    }

    fn play(&mut self, history: &GameTranscript) -> SetDescription {
        self.moves[history.rounds.len() % self.moves.len()].clone()
    }
}

/// `F = A ∩ [1, m]` for the least `m >= round` with `|A ∩ [1, m]| / m >= 1/2`.
#[derive(Debug, Clone, Copy)]
pub struct PrefixDensityII {
    pub cap: u64,
}

impl Default for PrefixDensityII {
    fn default() -> Self {
        PrefixDensityII {
            cap: PREFIX_DENSITY_CAP,
        }
    }
}

impl StrategyII for PrefixDensityII {
    fn name(&self) -> String {
        "prefix-density".into()
    }

    fn respond(&mut self, history: &GameTranscript, a: &SetDescription) -> Result<Vec<u64>> {
        let round = history.next_index();
        let mut members = Vec::new();
        for m in 1..=self.cap {
            if a.member(m) {
                members.push(m);
            }
            if m >= round && 2 * members.len() as u64 >= m {
                return Ok(members);
            }
        }
        Err(Error::SearchCap(format!(
            "no m <= {} with prefix density of {a} at least 1/2",
            self.cap
        )))
    }
}

fn least_member(a: &SetDescription) -> Result<u64> {
    a.next_member(1, MEMBER_SCAN_CAP)
        .ok_or_else(|| Error::SearchCap(format!("no member of {a} found")))
}

/// `F = A ∩ [1, width·round]`, or the least member of `A` when that is empty.
#[derive(Debug, Clone, Copy)]
pub struct GreedyII {
    pub width: u64,
}

impl Default for GreedyII {
    fn default() -> Self {
        GreedyII { width: 64 }
    }
}

impl StrategyII for GreedyII {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn respond(&mut self, history: &GameTranscript, a: &SetDescription) -> Result<Vec<u64>> {
        let f = a.members_in(1, self.width * history.next_index());
        if f.is_empty() {
            Ok(vec![least_member(a)?])
        } else {
            Ok(f)
        }
    }
}

/// `F = {min A}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimalII;

impl StrategyII for MinimalII {
    fn name(&self) -> String {
        "minimal".into()
    }

    fn respond(&mut self, _history: &GameTranscript, a: &SetDescription) -> Result<Vec<u64>> {
        Ok(vec![least_member(a)?])
    }
}

/// A random nonempty subset of the first 32 members of `A`.
#[derive(Debug, Clone)]
pub struct RandomII {
    rng: ChaCha8Rng,
}

impl RandomII {
    pub fn new(seed: u64) -> Self {
        RandomII {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl StrategyII for RandomII {
    fn name(&self) -> String {
        "random".into()
    }

    fn respond(&mut self, _history: &GameTranscript, a: &SetDescription) -> Result<Vec<u64>> {
        let mut pool = Vec::new();
        let mut from = 1;
        while pool.len() < 32 {
            match a.next_member(from, MEMBER_SCAN_CAP) {
                Some(m) => {
                    pool.push(m);
                    from = m + 1;
                }
                None => break,
            }
        }
        if pool.is_empty() {
            return Err(Error::SearchCap(format!("no member of {a} found")));
        }
        let mut f: Vec<u64> = pool
            .iter()
            .copied()
            .filter(|_| self.rng.gen_bool(0.5))
            .collect();
        if f.is_empty() {
            f.push(pool[self.rng.gen_range(0..pool.len())]);
        }
        Ok(f)
    }
}

/// Strategy names accepted by [`strategy_ii`].
pub const II_STRATEGIES: [&str; 4] = ["prefix-density", "greedy", "minimal", "random"];

pub fn strategy_ii(name: &str, seed: u64) -> Result<Box<dyn StrategyII>> {
    match name {
        "prefix-density" => Ok(Box::new(PrefixDensityII::default())),
        "greedy" => Ok(Box::new(GreedyII::default())),
        "minimal" => Ok(Box::new(MinimalII)),
        "random" => Ok(Box::new(RandomII::new(seed))),
        other => Err(Error::syntax(
            0,
            format!("unknown strategy '{other}' ({})", II_STRATEGIES.join(", ")),
        )),
    }
}

/// Counts of `∪F` in column `{m : ν₂(m) = column}` after each round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnHistory {
    pub column: u32,
    pub counts: Vec<u64>,
    /// First round after which the count never changes.
    pub stable_from: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Adjudication {
    /// `∪F` looks outside the ideal.
    PlayerIiEvidence {
        scale: u64,
        count: u64,
        #[serde(with = "rational::as_str")]
        density: Rational,
        note: String,
    },
    /// `∪F` looks inside the ideal.
    PlayerIEvidence {
        columns: Vec<ColumnHistory>,
        note: String,
    },
    Undecided {
        reason: String,
    },
}

fn column_histories(t: &GameTranscript, max_column: u32) -> Vec<ColumnHistory> {
    let mut counts = vec![Vec::with_capacity(t.rounds.len()); max_column as usize + 1];
    let mut seen = BTreeSet::new();
    let mut current = vec![0u64; max_column as usize + 1];
    for r in &t.rounds {
        for &m in &r.picked {
            let k = m.trailing_zeros();
            if seen.insert(m) && k <= max_column {
                current[k as usize] += 1;
            }
        }
        for (k, c) in current.iter().enumerate() {
            counts[k].push(*c);
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, counts)| {
            let last = counts.last().copied().unwrap_or(0);
            let stable_from = counts
                .iter()
                .rposition(|&c| c != last)
                .map_or(1, |i| i as u64 + 2);
            ColumnHistory {
                column: k as u32,
                counts,
                stable_from,
            }
        })
        .collect()
}

fn density_evidence(t: &GameTranscript) -> Adjudication {
    let union = t.union();
    let mut best: Option<(u64, u64, Rational)> = None;
    for r in &t.rounds {
        let scale = *r.picked.last().expect("legal rounds are nonempty");
        let count = union.range(..=scale).count() as u64;
        let d = rational::rat(count as i64, scale as i64);
        if best.as_ref().is_none_or(|(_, _, b)| d >= *b) {
            best = Some((scale, count, d));
        }
    }
    match best {
        Some((scale, count, density)) if density >= rational::rat(1, 2) => {
            Adjudication::PlayerIiEvidence {
                scale,
                count,
                density,
                note: "finite transcript: prefix density of the union at a witnessed scale".into(),
            }
        }
        _ => Adjudication::Undecided {
            reason: "union density stays below 1/2 at every witnessed scale".into(),
        },
    }
}

/// Evidence for the winner of a (legal) finite transcript.
///
/// Density ideals: II evidence when `∪F` has prefix density at least `1/2` at the largest pick
/// of some round. `Fin`: II evidence when every round added a fresh element. `Fin x Fin`: I
/// evidence when column `k` of `∪F` is unchanged after round `k + 1` for every tracked `k`.
pub fn adjudicate(t: &GameTranscript, ideal: &IdealPresentation) -> Adjudication {
    if t.rounds.is_empty() {
        return Adjudication::Undecided {
            reason: "empty transcript".into(),
        };
    }
    if let Some(bad) = t.rounds.iter().find(|r| !r.legality.is_legal()) {
        return Adjudication::Undecided {
            reason: format!("round {} is illegal", bad.index),
        };
    }
    let fin_like = |t: &GameTranscript| {
        let size = t.union().len() as u64;
        if size >= t.rounds.len() as u64 {
            Adjudication::PlayerIiEvidence {
                scale: *t.union().last().expect("nonempty"),
                count: size,
                density: rational::rat(size as i64, t.rounds.len() as i64),
                note: "finite transcript: every round added a fresh element".into(),
            }
        } else {
            Adjudication::Undecided {
                reason: "the union stopped growing".into(),
            }
        }
    };
    match &ideal.kind {
        IdealKind::Z | IdealKind::Bd => density_evidence(t),
        IdealKind::Matrix(a) if a.is_cesaro() => density_evidence(t),
        IdealKind::Fin => fin_like(t),
        IdealKind::Matrix(a) if a.is_identity() => fin_like(t),
        IdealKind::FinXFin => {
            let rounds = t.rounds.len() as u64;
            if rounds < 2 {
                return Adjudication::Undecided {
                    reason: "too few rounds for a column audit".into(),
                };
            }
            let tracked = (rounds - 2).min(ADJUDICATED_COLUMNS as u64) as u32;
            let columns = column_histories(t, tracked);
            if columns.iter().all(|c| c.stable_from <= c.column as u64 + 1) {
                Adjudication::PlayerIEvidence {
                    columns,
                    note: "finite transcript: every tracked column is frozen after round k+1"
                        .into(),
                }
            } else {
                Adjudication::Undecided {
                    reason: "some tracked column kept growing".into(),
                }
            }
        }
        IdealKind::Matrix(_) => Adjudication::Undecided {
            reason: "no adjudication rule for this matrix ideal".into(),
        },
    }
}

/// A matrix of finite sets `F_{n,k}`, indexed from 1.
#[derive(Clone)]
pub enum DiagonalizationFamily {
    /// `F_{n,k} = {k}`
    FinSingletons,
    /// `F_{n,k} = [k, k + n)`
    Intervals,
    /// `F_{n,k} = [k, k + ceil(k/n))`
    Proportional,
    Custom {
        name: String,
        f: Arc<dyn Fn(u64, u64) -> Vec<u64> + Send + Sync>,
    },
}

impl std::fmt::Debug for DiagonalizationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl DiagonalizationFamily {
    pub fn name(&self) -> String {
        match self {
            DiagonalizationFamily::FinSingletons => "singletons".into(),
            DiagonalizationFamily::Intervals => "intervals".into(),
            DiagonalizationFamily::Proportional => "proportional".into(),
            DiagonalizationFamily::Custom { name, .. } => name.clone(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "singletons" => Ok(DiagonalizationFamily::FinSingletons),
            "intervals" => Ok(DiagonalizationFamily::Intervals),
            "proportional" => Ok(DiagonalizationFamily::Proportional),
            other => Err(Error::syntax(
                0,
                format!("unknown family '{other}' (singletons, intervals, proportional)"),
            )),
        }
    }

    pub fn set(&self, n: u64, k: u64) -> Vec<u64> {
        match self {
            DiagonalizationFamily::FinSingletons => vec![k],
            DiagonalizationFamily::Intervals => (k..k + n.max(1)).collect(),
            DiagonalizationFamily::Proportional => (k..k + k.div_ceil(n.max(1))).collect(),
            DiagonalizationFamily::Custom { f, .. } => f(n, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalEntry {
    pub set: String,
    pub dual_verdict: VerdictStatus,
    /// The corpus set is not certified in the dual filter.
    pub illegal: bool,
    /// Least `k <= cap` with `F_{n,k} ⊆ A`.
    pub first_contained: Option<u64>,
    /// Least `m` with `F_{n,k} ∩ A ≠ ∅` for every `m < k <= cap`.
    pub diagonal_from: u64,
    pub not_found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalRowReport {
    pub family: String,
    pub row: u64,
    pub cap: u64,
    pub entries: Vec<UniversalEntry>,
}

/// For every corpus set `A`, where row `n` of the family first fits inside `A` and from where on
/// every member of the row meets `A` (both within `k <= cap`).
pub fn check_universal_row(
    family: &DiagonalizationFamily,
    n: u64,
    corpus: &[SetDescription],
    ideal: &IdealPresentation,
    scale: u64,
    cap: u64,
) -> Result<UniversalRowReport> {
    let entries = corpus
        .iter()
        .map(|a| {
            let dual = dual_member(ideal, a, scale)?.status;
            let mut first_contained = None;
            let mut diagonal_from = 0;
            for k in 1..=cap {
                let f = family.set(n, k);
                if first_contained.is_none() && f.iter().all(|&m| a.member(m)) {
                    first_contained = Some(k);
                }
                if !f.iter().any(|&m| a.member(m)) {
                    diagonal_from = k;
                }
            }
            Ok(UniversalEntry {
                set: a.to_string(),
                dual_verdict: dual,
                illegal: dual != VerdictStatus::In,
                first_contained,
                diagonal_from,
                not_found: first_contained.is_none(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniversalRowReport {
        family: family.name(),
        row: n,
        cap,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> SetDescription {
        parse_set(t).unwrap()
    }

    #[test]
    fn prefix_density_examples() {
        let mut t = GameTranscript::new(&IdealPresentation::z(), 1000);
        let mut ii = PrefixDensityII::default();
        t.rounds = vec![
            Round {
                index: 1,
                move_: "ap:1,1".into(),
                picked: vec![1],
                legality: Legality {
                    i_move: VerdictStatus::In,
                    nonempty: true,
                    subset: true,
                },
            };
            2
        ];
        assert_eq!(
            ii.respond(&t, &SetDescription::naturals()).unwrap(),
            vec![1, 2, 3]
        );
        let fresh = GameTranscript::new(&IdealPresentation::z(), 1000);
        assert_eq!(
            ii.respond(&fresh, &s("complement:builtin:squares"))
                .unwrap(),
            vec![2]
        );
        let mut small = PrefixDensityII { cap: 1000 };
        assert!(matches!(
            small.respond(&t, &s("complement:builtin:dyadic_blocks(ap:1,1)")),
            Err(Error::SearchCap(_))
        ));
    }

    #[test]
    fn illegal_moves_are_rejected() {
        let z = IdealPresentation::z();
        let mut t = GameTranscript::new(&z, 1000);
        let err = play_round(&mut t, &z, &s("finite:{1,2}"), &mut MinimalII);
        assert!(matches!(err, Err(Error::IllegalMove(_))));
        assert!(t.rounds.is_empty());
    }

    #[test]
    fn nu2_moves() {
        let t = GameTranscript::new(&IdealPresentation::finxfin(), 100);
        assert_eq!(Nu2StrategyI.play(&t), SetDescription::nu2_ge(1));
        let fx = IdealPresentation::finxfin();
        assert_eq!(
            dual_member(&fx, &SetDescription::nu2_ge(4), 100)
                .unwrap()
                .status,
            VerdictStatus::In
        );
    }

    #[test]
    fn density_game_gives_ii_evidence() {
        let z = IdealPresentation::z();
        let t = play_game(
            &z,
            10_000,
            10,
            &mut FixedScheduleI {
                moves: vec![SetDescription::naturals()],
            },
            &mut PrefixDensityII::default(),
        )
        .unwrap();
        match adjudicate(&t, &z) {
            Adjudication::PlayerIiEvidence { density, scale, .. } => {
                assert!(density >= rational::rat(1, 2));
                assert_eq!(scale, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nu2_game_gives_i_evidence() {
        let fx = IdealPresentation::finxfin();
        for ii in II_STRATEGIES.iter().filter(|n| **n != "prefix-density") {
            let mut two = strategy_ii(ii, 5).unwrap();
            let t = play_game(&fx, 1000, 30, &mut Nu2StrategyI, two.as_mut()).unwrap();
            assert!(
                matches!(adjudicate(&t, &fx), Adjudication::PlayerIEvidence { .. }),
                "{ii}"
            );
            assert_eq!(
                recheck(&t, &fx).unwrap(),
                t.rounds.iter().map(|r| r.legality).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn empty_transcript_is_undecided() {
        let t = GameTranscript::new(&IdealPresentation::z(), 10);
        assert!(matches!(
            adjudicate(&t, &IdealPresentation::z()),
            Adjudication::Undecided { .. }
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let z = IdealPresentation::z();
        let t = play_game(
            &z,
            1000,
            3,
            &mut FixedScheduleI {
                moves: vec![s("complement:builtin:squares")],
            },
            &mut RandomII::new(9),
        )
        .unwrap();
        let back = GameTranscript::from_jsonl(&z, 1000, &t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        assert!(t
            .to_jsonl()
            .contains("\"move\":\"complement:builtin:squares\""));
    }

    #[test]
    fn universal_rows() {
        let fin = IdealPresentation::fin();
        let corpus = vec![
            s("complement:finite:{1..5}"),
            SetDescription::naturals(),
            s("complement:finite:{2,9}"),
        ];
        let r = check_universal_row(
            &DiagonalizationFamily::FinSingletons,
            1,
            &corpus,
            &fin,
            100,
            50,
        )
        .unwrap();
        assert_eq!(r.entries[0].first_contained, Some(6));
        assert_eq!(r.entries[0].diagonal_from, 5);
        assert_eq!(r.entries[1].first_contained, Some(1));
        assert_eq!(r.entries[2].diagonal_from, 9);

        let z = IdealPresentation::z();
        let sq = vec![s("complement:builtin:squares")];
        let short =
            check_universal_row(&DiagonalizationFamily::Intervals, 3, &sq, &z, 1000, 200).unwrap();
        assert_eq!(short.entries[0].first_contained, Some(5));
        let long = check_universal_row(&DiagonalizationFamily::Intervals, 100, &sq, &z, 1000, 1000)
            .unwrap();
        assert!(long.entries[0].not_found);
        let bad = check_universal_row(
            &DiagonalizationFamily::FinSingletons,
            1,
            &[s("ap:2,2")],
            &z,
            100,
            10,
        )
        .unwrap();
        assert!(bad.entries[0].illegal);
    }
}

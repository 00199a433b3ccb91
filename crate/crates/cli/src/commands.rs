use std::fmt;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use tauber_core::constructions::{
    escape_rowfinite, escape_unbounded, ideal_limit, meagerness_demo, oscillation_pair,
    steinhaus_adversary, verify_certificate, AdversaryConfig, AdversaryMode, EncodedSequence,
    EscapeCaps, LimitStatus, OscillationCertificate, StemSchedule,
};
use tauber_core::games::{
    adjudicate, play_game, strategy_ii, Adjudication, FixedScheduleI, Nu2StrategyI, StrategyI,
};
use tauber_core::ideals::{dual_member, verdict as ideal_verdict, IdealKind, IdealPresentation};
use tauber_core::rational::{self, Rational};
use tauber_core::sequence::Sequence;
use tauber_core::setlang::{density_report, parse_set, SetDescription};
use tauber_core::sigma::{
    local_modulus, metric as selector_metric, modulus_of_continuity, Selector, SummableRow,
};
use tauber_core::summability::{
    regularity_verdict, row_profile, transform_exact, SummabilityMatrix,
};
use tauber_core::Error;

pub struct Report {
    pub body: String,
    pub exit: u8,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, exit: 0 }
    }
}

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(String),
    /// A result was produced but falls short; the body is still printed.
    Diagnostic {
        body: String,
        reason: String,
    },
    VerifyFailed {
        body: String,
    },
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Core(e) => match e {
                Error::Io(_) => 1,
                Error::EmptyInput | Error::Syntax { .. } | Error::InvalidArgument(_) => 2,
                Error::ScaleCap { .. } | Error::Overflow(_) => 3,
                Error::Precondition(_) | Error::Domain(_) => 4,
                Error::SearchCap(_) => 5,
                Error::IllegalMove(_) | Error::Unsupported(_) => 7,
            },
            Failure::Diagnostic { .. } => 5,
            Failure::VerifyFailed { .. } => 6,
        }
    }

    pub fn body(&self) -> Option<String> {
        match self {
            Failure::Diagnostic { body, .. } | Failure::VerifyFailed { body } => Some(body.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "io: {e}"),
            Failure::Diagnostic { reason, .. } => write!(f, "{reason}"),
            Failure::VerifyFailed { .. } => f.write_str("certificate verification failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn csv_text(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Set expression, e.g. `ap:2,2` or `complement:builtin:squares`.
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub n: u64,
    /// Increasing checkpoints in `[1, n]`; defaults to the dyadic ladder and `n`.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    /// Window length for the maximal window density.
    #[arg(long)]
    pub window: Option<u64>,
    /// Emit `n,count,ratio` rows instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

pub fn density(a: &DensityArgs) -> Result<Report, Failure> {
    let set = parse_set(&a.set)?;
    let checkpoints = if a.checkpoints.is_empty() {
        IdealPresentation::z().scale_policy.checkpoints(a.n)
    } else {
        a.checkpoints.clone()
    };
    let report = density_report(&set, a.n, &checkpoints, a.window)?;
    if a.csv {
        let rows = report
            .ratios()
            .into_iter()
            .zip(&report.prefix_counts)
            .map(|((n, r), (_, c))| vec![n.to_string(), c.to_string(), rational::fmt(&r)]);
        return Ok(Report::ok(csv_text(&["n", "count", "ratio"], rows)?));
    }
    Ok(Report::ok(pretty(
        &json!({ "set": set.to_string(), "scale": a.n, "report": report }),
    )))
}

#[derive(Debug, Args)]
pub struct VerdictArgs {
    /// `fin`, `z`, `bd`, `finxfin` or `matrix:<spec>`.
    #[arg(long)]
    pub ideal: String,
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 4096)]
    pub n: u64,
    /// Decide membership in the dual filter instead.
    #[arg(long)]
    pub dual: bool,
}

pub fn verdict(a: &VerdictArgs) -> Result<Report, Failure> {
    let ideal = IdealPresentation::parse(&a.ideal)?;
    let set = parse_set(&a.set)?;
    let v = if a.dual {
        dual_member(&ideal, &set, a.n)?
    } else {
        ideal_verdict(&ideal, &set, a.n)?
    };
    Ok(Report::ok(pretty(&json!({
        "ideal": ideal.name(),
        "set": set.to_string(),
        "dual": a.dual,
        "verdict": v,
    }))))
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[arg(long)]
    pub matrix: String,
    /// Ideal for the limit conditions.
    #[arg(long, default_value = "fin")]
    pub under: String,
    /// Rows examined.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Columns reported individually.
    #[arg(long, default_value_t = 4)]
    pub columns: u64,
}

pub fn regularity(a: &RegularityArgs) -> Result<Report, Failure> {
    let m = SummabilityMatrix::parse(&a.matrix)?;
    let ideal = IdealPresentation::parse(&a.under)?;
    Ok(Report::ok(pretty(&regularity_verdict(
        &m, &ideal, a.n, a.columns,
    )?)))
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub matrix: String,
    /// Sequence: `n`, `neg-n`, `alt`, `const:q`, `periodic:..`, `inline:..`, `indicator:<set>`, ...
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub n: u64,
    /// Emit the row profile `n,r_n` instead of transform values.
    #[arg(long)]
    pub profile: bool,
}

pub fn transform(a: &TransformArgs) -> Result<Report, Failure> {
    let m = SummabilityMatrix::parse(&a.matrix)?;
    if a.profile {
        let p = row_profile(&m, a.n)?;
        let rows =
            p.r.iter()
                .enumerate()
                .map(|(i, r)| vec![(i + 1).to_string(), r.to_string()]);
        return Ok(Report::ok(csv_text(&["n", "r_n"], rows)?));
    }
    let spec = a.x.as_deref().ok_or_else(|| {
        Error::InvalidArgument("--x is required unless --profile is given".into())
    })?;
    let x = Sequence::parse(spec)?;
    let y = transform_exact(&m, &x, a.n)?;
    let rows = y.iter().enumerate().map(|(i, v)| {
        vec![
            (i + 1).to_string(),
            rational::fmt(v),
            rational::to_decimal(v, 12),
        ]
    });
    Ok(Report::ok(csv_text(&["n", "value", "decimal"], rows)?))
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Selector: `id`, `even`, `odd`, `stem:{..}+consec`, `random:<seed>:<p>`, ...
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Resolution: image membership is compared on `[1, k]`.
    #[arg(long, default_value_t = 40)]
    pub k: u64,
    /// Also report continuity moduli for the row `a_k = 2^-k` at this ε.
    #[arg(long, value_parser = parse_rational)]
    pub eps: Option<Rational>,
    #[arg(long = "x-norm", value_parser = parse_rational, default_value = "1")]
    pub x_norm: Rational,
}

pub fn metric(a: &MetricArgs) -> Result<Report, Failure> {
    let s1 = Selector::parse(&a.a, a.k.max(64))?;
    let s2 = Selector::parse(&a.b, a.k.max(64))?;
    let d = selector_metric(&s1, &s2, a.k)?;
    let mut out = json!({ "a": s1.to_string(), "b": s2.to_string(), "distance": d });
    if let Some(eps) = &a.eps {
        let row = SummableRow::geometric(rational::rat(1, 2), rational::rat(1, 2))?;
        let uniform = modulus_of_continuity(&a.x_norm, &row, eps, 1024)?;
        let local = local_modulus(&s1, &a.x_norm, &row, eps, 1024)?;
        out["modulus"] = json!({ "row": row.name(), "uniform": uniform, "local_at_a": local });
    }
    Ok(Report::ok(pretty(&out)))
}

#[derive(Debug, Args)]
pub struct EscapeArgs {
    #[arg(long)]
    pub matrix: String,
    /// Unbounded sequence, e.g. `n` or `neg-n`.
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value = "z")]
    pub ideal: String,
    /// Bound to defeat.
    #[arg(long, value_parser = parse_rational)]
    pub m: Rational,
    /// Stem `t_1 < ... < t_j`.
    #[arg(long, value_delimiter = ',')]
    pub stem: Vec<u64>,
    /// Least admissible row for the row-finite escape.
    #[arg(long, default_value_t = 1)]
    pub p0: u64,
    /// Row used when the matrix is not row-finite.
    #[arg(long, default_value_t = 1)]
    pub row: u64,
    /// Scale for ideal verdicts.
    #[arg(long, default_value_t = 4096)]
    pub n: u64,
}

pub fn escape(a: &EscapeArgs) -> Result<Report, Failure> {
    let m = SummabilityMatrix::parse(&a.matrix)?;
    let x = Sequence::parse(&a.x)?;
    let ideal = IdealPresentation::parse(&a.ideal)?;
    let caps = EscapeCaps::default();
    let res = if m.is_row_finite() {
        escape_rowfinite(&a.stem, &m, &x, &ideal, &a.m, a.p0, a.n, caps)?
    } else {
        let row = |k: u64| m.entry(a.row, k);
        escape_unbounded(&a.stem, &row, &x, &a.m, caps)?
    };
    let verified = res.achieved >= res.bound;
    let body = pretty(
        &json!({ "matrix": m.to_string(), "x": x.to_string(), "ideal": ideal.name(), "verified": verified, "escape": res }),
    );
    if verified {
        Ok(Report::ok(body))
    } else {
        Err(Failure::Diagnostic {
            body,
            reason: "escape bound not reached".into(),
        })
    }
}

#[derive(Debug, Args)]
pub struct OscillateArgs {
    /// Matrix applied before the limit analysis; without it `x` itself is analysed.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value = "z")]
    pub ideal: String,
    #[arg(long, default_value_t = 1024)]
    pub n: u64,
    /// Write the oscillation certificate here when no limit is found.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Build an oscillation pair at this row instead of a limit analysis.
    #[arg(long = "pair-row")]
    pub pair_row: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub stem: Vec<u64>,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    pub tol: Rational,
}

pub fn oscillate(a: &OscillateArgs) -> Result<Report, Failure> {
    let x = Sequence::parse(&a.x)?;
    let m = a
        .matrix
        .as_deref()
        .map(SummabilityMatrix::parse)
        .transpose()?;
    if let Some(row) = a.pair_row {
        let m = m.unwrap_or(SummabilityMatrix::Identity);
        let pair = oscillation_pair(&a.stem, &x, &m, row, &a.tol)?;
        let body = pretty(&json!({ "matrix": m.to_string(), "x": x.to_string(), "pair": pair }));
        return Ok(Report::ok(body));
    }
    let ideal = IdealPresentation::parse(&a.ideal)?;
    let y = match &m {
        Some(m) => Sequence::Prefix(transform_exact(m, &x, a.n)?),
        None => x.clone(),
    };
    let mut v = ideal_limit(&y, &ideal, None, None, a.n)?;
    if let LimitStatus::NoLimitEvidence { certificate } = &mut v.status {
        certificate.matrix = m.as_ref().map(|m| m.to_string());
        certificate.x = Some(EncodedSequence::spec(&x, a.n)?);
        if let Some(path) = &a.out {
            write_file(path, &(certificate.to_json() + "\n"))?;
        }
    }
    let body = pretty(&json!({
        "matrix": m.as_ref().map(|m| m.to_string()),
        "x": x.to_string(),
        "ideal": ideal.name(),
        "summary": v.status.describe(),
        "verdict": v,
    }));
    Ok(Report::ok(body))
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    #[arg(long)]
    pub matrix: String,
    /// `blocks` or `greedy`.
    #[arg(long, default_value = "blocks")]
    pub mode: String,
    #[arg(long, default_value_t = 65_536)]
    pub n: u64,
    #[arg(long, value_parser = parse_rational, default_value = "2/5")]
    pub lower: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "3/5")]
    pub upper: Rational,
    /// Ideal under which the matrix must not be refuted regular.
    #[arg(long, default_value = "fin")]
    pub under: String,
    #[arg(long = "min-density", value_parser = parse_rational, default_value = "1/10")]
    pub min_density: Rational,
    /// Certificate file.
    #[arg(long, default_value = "certificate.json")]
    pub out: PathBuf,
}

pub fn adversary(a: &AdversaryArgs) -> Result<Report, Failure> {
    let m = SummabilityMatrix::parse(&a.matrix)?;
    let mode: AdversaryMode = a.mode.parse()?;
    let cfg = AdversaryConfig {
        mode,
        scale: a.n,
        lower: a.lower.clone(),
        upper: a.upper.clone(),
        ideal: IdealPresentation::parse(&a.under)?,
        min_density: a.min_density.clone(),
    };
    let report = steinhaus_adversary(&m, &cfg)?;
    let summary = |cert: Option<&OscillationCertificate>| {
        json!({
            "matrix": report.matrix,
            "mode": report.mode,
            "scale": report.scale,
            "phases": report.phases.len(),
            "delta_upper": cert.map(|c| rational::fmt(&c.delta_upper)),
            "delta_lower": cert.map(|c| rational::fmt(&c.delta_lower)),
            "values_sha256": cert.map(|c| c.values_sha256.clone()),
            "certificate": cert.map(|_| a.out.display().to_string()),
            "diagnostic": report.diagnostic,
        })
    };
    match &report.certificate {
        Some(cert) => {
            write_file(&a.out, &(cert.to_json() + "\n"))?;
            Ok(Report::ok(pretty(&summary(Some(cert)))))
        }
        None => Err(Failure::Diagnostic {
            body: pretty(&summary(None)),
            reason: "no certificate: the adversary produced only a diagnostic".into(),
        }),
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Certificate JSON file.
    #[arg(long)]
    pub certificate: PathBuf,
}

pub fn verify(a: &VerifyArgs) -> Result<Report, Failure> {
    let text = read_file(&a.certificate)?;
    let cert = OscillationCertificate::from_json(&text)?;
    let audit = verify_certificate(&cert)?;
    let body =
        pretty(&json!({ "certificate": a.certificate.display().to_string(), "audit": audit }));
    if audit.ok {
        Ok(Report::ok(body))
    } else {
        Err(Failure::VerifyFailed { body })
    }
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub ideal: String,
    #[arg(long, default_value_t = 10)]
    pub rounds: u64,
    /// `nu2` or `fixed`; defaults to `nu2` for `finxfin` and `fixed` otherwise.
    #[arg(long = "strategy-i")]
    pub strategy_i: Option<String>,
    /// Player I's moves for the fixed schedule, separated by `;`.
    #[arg(long, default_value = "ap:1,1")]
    pub moves: String,
    /// `prefix-density`, `greedy`, `minimal` or `random`.
    #[arg(long = "strategy-ii", default_value = "prefix-density")]
    pub strategy_ii: String,
    /// Scale for legality verdicts.
    #[arg(long, default_value_t = 4096)]
    pub n: u64,
    /// Games in the tournament; game `g` uses seed `seed + g`.
    #[arg(long, default_value_t = 1)]
    pub games: u64,
    /// Write the first game's transcript as JSON lines.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Write the tournament summary as CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn strategy_i(a: &GameArgs, ideal: &IdealPresentation) -> Result<Box<dyn StrategyI>, Failure> {
    let name = a.strategy_i.clone().unwrap_or_else(|| {
        if matches!(ideal.kind, IdealKind::FinXFin) {
            "nu2"
        } else {
            "fixed"
        }
        .into()
    });
    match name.as_str() {
        "nu2" => Ok(Box::new(Nu2StrategyI)),
        "fixed" => {
            let moves = a
                .moves
                .split(';')
                .map(parse_set)
                .collect::<Result<Vec<SetDescription>, Error>>()?;
            Ok(Box::new(FixedScheduleI { moves }))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown player I strategy '{other}' (nu2, fixed)"
        ))
        .into()),
    }
}

fn outcome_fields(adj: &Adjudication) -> (&'static str, String, String) {
    match adj {
        Adjudication::PlayerIiEvidence { scale, density, .. } => (
            "player_ii_evidence",
            scale.to_string(),
            rational::fmt(density),
        ),
        Adjudication::PlayerIEvidence { .. } => ("player_i_evidence", String::new(), String::new()),
        Adjudication::Undecided { .. } => ("undecided", String::new(), String::new()),
    }
}

pub fn game(a: &GameArgs, seed: u64) -> Result<Report, Failure> {
    let ideal = IdealPresentation::parse(&a.ideal)?;
    strategy_i(a, &ideal)?;
    strategy_ii(&a.strategy_ii, seed)?;
    if a.games == 0 {
        return Err(Error::InvalidArgument("at least one game".into()).into());
    }
    let results: Vec<Result<_, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..a.games)
            .map(|g| {
                let ideal = ideal.clone();
                scope.spawn(move || -> Result<_, Failure> {
                    let mut one = strategy_i(a, &ideal)?;
                    let mut two = strategy_ii(&a.strategy_ii, seed + g)?;
                    let t = play_game(&ideal, a.n, a.rounds, one.as_mut(), two.as_mut())?;
                    let adj = adjudicate(&t, &ideal);
                    Ok((t, adj))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("game threads do not panic"))
            .collect()
    });
    let games = results.into_iter().collect::<Result<Vec<_>, Failure>>()?;
    if let Some(path) = &a.transcript {
        write_file(path, &games[0].0.to_jsonl())?;
    }
    if let Some(path) = &a.summary {
        let rows = games.iter().enumerate().map(|(g, (t, adj))| {
            let (outcome, scale, density) = outcome_fields(adj);
            vec![
                g.to_string(),
                (seed + g as u64).to_string(),
                a.strategy_ii.clone(),
                t.rounds.len().to_string(),
                t.union().len().to_string(),
                outcome.to_string(),
                scale,
                density,
            ]
        });
        let text = csv_text(
            &[
                "game",
                "seed",
                "strategy_ii",
                "rounds",
                "union_size",
                "outcome",
                "scale",
                "density",
            ],
            rows,
        )?;
        write_file(path, &text)?;
    }
    let body = pretty(&json!({
        "ideal": ideal.name(),
        "strategy_ii": a.strategy_ii,
        "games": games.iter().enumerate().map(|(g, (t, adj))| json!({
            "game": g,
            "seed": seed + g as u64,
            "rounds": t.rounds.len(),
            "union_size": t.union().len(),
            "adjudication": adj,
        })).collect::<Vec<_>>(),
    }));
    Ok(Report::ok(body))
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value = "cesaro")]
    pub matrix: String,
    #[arg(long, default_value = "n")]
    pub x: String,
    #[arg(long, default_value = "z")]
    pub ideal: String,
    #[arg(long, default_value_t = 5)]
    pub rounds: u64,
    /// First bound; round `r` uses `m0 · 2^(r-1)`.
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    pub m0: Rational,
    /// Fixed stems separated by `;` (e.g. `1,2;;3`); random stems from the seed otherwise.
    #[arg(long)]
    pub stems: Option<String>,
    #[arg(long, default_value_t = 4096)]
    pub n: u64,
}

pub fn demo(a: &DemoArgs, seed: u64) -> Result<Report, Failure> {
    let m = SummabilityMatrix::parse(&a.matrix)?;
    let x = Sequence::parse(&a.x)?;
    let ideal = IdealPresentation::parse(&a.ideal)?;
    let schedule: Vec<Rational> = (0..a.rounds).map(|r| &a.m0 * rational::pow2(r)).collect();
    let stems = match &a.stems {
        Some(text) => StemSchedule::Fixed(
            text.split(';')
                .map(|s| {
                    s.split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| {
                            t.trim().parse::<u64>().map_err(|_| {
                                Error::InvalidArgument(format!("bad stem entry '{t}'"))
                            })
                        })
                        .collect::<Result<Vec<u64>, Error>>()
                })
                .collect::<Result<_, Error>>()?,
        ),
        None => StemSchedule::Random(seed),
    };
    let rounds = meagerness_demo(&x, &m, &ideal, &schedule, &stems, a.n)?;
    let verified = rounds.iter().all(|r| r.verified);
    let body = pretty(&json!({
        "matrix": m.to_string(),
        "x": x.to_string(),
        "ideal": ideal.name(),
        "verified": verified,
        "rounds": rounds,
    }));
    if verified {
        Ok(Report::ok(body))
    } else {
        Err(Failure::Diagnostic {
            body,
            reason: "some round missed its bound".into(),
        })
    }
}

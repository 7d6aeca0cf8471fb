//! Command-line front end.
//!
//! Subcommands: `analyze N M L`, `enumerate N M L`, `verify`, `index N M L`.
//! Schedule text passed with `--schedule` follows the grammar in
//! [`crate::schedule`]: terms `r=<page>:<src>-><tgt>` joined by `;`, where
//! `<src>` and `<tgt>` are `1`, `a`, `b`, `c`, `ab`, `ac`, `bc`, `abc` or
//! signed rational combinations such as `a-1/2*b`. Powers of t are implied by
//! the bidegree. Exit codes: 0 ok, 1 usage or parse error, 2 freeness
//! failure, 3 engine-side mismatch in `verify`.
//!
//! JSON documents carry a `schema` field naming their layout and version;
//! rationals are printed as `p/q` strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fiber_algebra::SpaceSignature;
use crate::index::{bottom_row_is_truncation, index_report, truncation_page, IndexReport};
use crate::oracle::{
    applicable_labels, in_reconciliation_regime, kunneth_product, matching_labels, reconcile,
    representative_schedule, theorem_table, Annotations, Verdict,
};
use crate::page_engine::{Bidegree, Page, Run};
use crate::presentation::{
    betti_table, extract_generators, generator_reps, presentation_sketch, BettiTable, ParameterStatus,
};
use crate::schedule::{check_freeness, enumerate_schedules, Schedule};

pub const ANALYZE_SCHEMA: &str = "borel-sseq/analyze/1";
pub const ENUMERATE_SCHEMA: &str = "borel-sseq/enumerate/1";
pub const VERIFY_SCHEMA: &str = "borel-sseq/verify/1";
pub const INDEX_SCHEMA: &str = "borel-sseq/index/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_FREE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Markdown,
}

#[derive(Parser, Debug)]
#[command(name = "borel-sseq", version, about = "Spectral sequences of free circle actions on S^n x S^m x S^l")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one schedule and report E∞, Betti numbers, a presentation sketch and the index.
    Analyze(SigArgs),
    /// List every free-consistent schedule, grouped by Betti table.
    Enumerate(SigArgs),
    /// Sweep all signatures up to --max against the case tables and the Künneth anchor.
    Verify(SweepArgs),
    /// Report s, i(X) and the equivariant-map statements for one schedule.
    Index(SigArgs),
}

#[derive(Args, Debug)]
struct SigArgs {
    n: usize,
    m: usize,
    l: usize,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 8)]
    max: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    annotations: Option<PathBuf>,
}

/// Largest sweep bound `verify` accepts.
pub const MAX_SWEEP: usize = 8;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub signature: Option<SpaceSignature>,
    pub schedule: Option<String>,
    pub window: Option<usize>,
    pub format: Format,
    pub max: usize,
    pub jobs: usize,
    pub annotations: Annotations,
}

impl RunConfig {
    fn window_for(&self, sig: &SpaceSignature) -> Result<usize, String> {
        match self.window {
            None => Ok(sig.default_window()),
            Some(w) if w % 2 == 0 && w >= sig.default_window() => Ok(w),
            Some(w) => Err(format!(
                "window {w} must be even and at least {} for {sig}",
                sig.default_window()
            )),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.to_string());
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => config_from_sig(a).map(|c| cmd_analyze(&c)),
        Command::Enumerate(a) => config_from_sig(a).map(|c| cmd_enumerate(&c)),
        Command::Index(a) => config_from_sig(a).map(|c| cmd_index(&c)),
        Command::Verify(a) => config_from_sweep(a).map(|c| cmd_verify(&c)),
    };
    match result {
        Ok(out) => out,
        Err(msg) => (EXIT_USAGE, format!("error: {msg}\n")),
    }
}

fn load_annotations(path: Option<PathBuf>) -> Result<Annotations, String> {
    match path {
        None => Ok(Annotations::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            Annotations::parse(&text).map_err(|e| e.to_string())
        }
    }
}

fn config_from_sig(a: SigArgs) -> Result<RunConfig, String> {
    let sig = SpaceSignature::new(a.n, a.m, a.l).map_err(|e| e.to_string())?;
    Ok(RunConfig {
        signature: Some(sig),
        schedule: a.schedule,
        window: a.window,
        format: a.format,
        max: MAX_SWEEP,
        jobs: 1,
        annotations: load_annotations(a.annotations)?,
    })
}

fn config_from_sweep(a: SweepArgs) -> Result<RunConfig, String> {
    if a.max == 0 || a.max > MAX_SWEEP {
        return Err(format!("--max must lie in 1..={MAX_SWEEP}"));
    }
    if a.jobs == 0 {
        return Err("--jobs must be positive".to_string());
    }
    Ok(RunConfig {
        signature: None,
        schedule: None,
        window: a.window,
        format: a.format,
        max: a.max,
        jobs: a.jobs,
        annotations: load_annotations(a.annotations)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigJson {
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

impl From<&SpaceSignature> for SigJson {
    fn from(s: &SpaceSignature) -> Self {
        SigJson { n: s.n, m: s.m, l: s.l }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellJson {
    pub p: usize,
    pub q: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub name: String,
    pub degree: usize,
    pub rep: String,
    pub tower: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterJson {
    pub name: String,
    pub term: String,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub x_exponent: usize,
    pub generators: Vec<GeneratorJson>,
    pub relations: Vec<String>,
    pub rendered: String,
    pub parameters: Vec<ParameterJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub schema: String,
    pub signature: SigJson,
    pub schedule: String,
    pub window: usize,
    pub certified_band: usize,
    pub free_consistent: bool,
    pub witness: Option<Bidegree>,
    pub betti: BettiTable,
    pub support: Vec<CellJson>,
    pub presentation: Option<PresentationJson>,
    pub index: Option<IndexReport>,
    pub labels: Vec<String>,
}

fn parse_schedule(cfg: &RunConfig) -> Result<Schedule, String> {
    match &cfg.schedule {
        None => Ok(Schedule::empty()),
        Some(text) => text.parse().map_err(|e: crate::schedule::ParseError| e.to_string()),
    }
}

fn usage_error(msg: impl std::fmt::Display) -> (i32, String) {
    (EXIT_USAGE, format!("error: {msg}\n"))
}

fn execute(cfg: &RunConfig) -> Result<(SpaceSignature, Schedule, usize, Run), (i32, String)> {
    let sig = cfg.signature.expect("signature present");
    let window = cfg.window_for(&sig).map_err(usage_error)?;
    let schedule = parse_schedule(cfg).map_err(usage_error)?;
    let run = schedule.run(sig, window).map_err(usage_error)?;
    Ok((sig, schedule, window, run))
}

fn presentation_json(stable: &Page) -> Option<PresentationJson> {
    let gens = extract_generators(stable).ok()?;
    let sketch = presentation_sketch(stable, &gens);
    Some(PresentationJson {
        x_exponent: gens.x_exponent,
        generators: generator_reps(stable.sig(), &gens)
            .into_iter()
            .map(|(name, degree, rep, tower)| GeneratorJson { name, degree, rep, tower })
            .collect(),
        relations: sketch.relation_strings(),
        rendered: sketch.render(),
        parameters: sketch
            .parameters()
            .map(|p| ParameterJson {
                name: p.name.clone(),
                term: p.term.render(),
                status: match &p.status {
                    ParameterStatus::Free => "free".to_string(),
                    ParameterStatus::ForcedZero(why) => format!("zero: {why}"),
                },
            })
            .collect(),
    })
}

fn support_json(page: &Page) -> Vec<CellJson> {
    page.support()
        .into_iter()
        .map(|(b, dim)| CellJson { p: b.p, q: b.q, dim })
        .collect()
}

pub fn cmd_analyze(cfg: &RunConfig) -> (i32, String) {
    let (sig, schedule, window, run) = match execute(cfg) {
        Ok(x) => x,
        Err(e) => return e,
    };
    let verdict = check_freeness(&run.stable);
    let betti = BettiTable::from_page(&run.stable);
    let report = AnalyzeReport {
        schema: ANALYZE_SCHEMA.to_string(),
        signature: (&sig).into(),
        schedule: schedule.to_string(),
        window,
        certified_band: run.stable.certified_band(),
        free_consistent: verdict.free_consistent,
        witness: verdict.witness,
        betti: betti.clone(),
        support: support_json(&run.stable),
        presentation: if verdict.free_consistent { presentation_json(&run.stable) } else { None },
        index: verdict
            .free_consistent
            .then(|| index_report(&sig, &run.history, &run.stable)),
        labels: if verdict.free_consistent {
            matching_labels(&sig, &betti).iter().map(ToString::to_string).collect()
        } else {
            Vec::new()
        },
    };
    let code = if report.free_consistent { EXIT_OK } else { EXIT_NOT_FREE };
    let text = match cfg.format {
        Format::Json => to_json(&report),
        Format::Text => analyze_text(&report, &run.stable),
        Format::Markdown => analyze_markdown(&report),
    };
    (code, text)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn sig_text(s: &SigJson) -> String {
    format!("({},{},{})", s.n, s.m, s.l)
}

fn schedule_text(s: &str) -> &str {
    if s.is_empty() {
        "(empty)"
    } else {
        s
    }
}

/// Rows q from the top down, even columns p up to the certified band.
fn support_grid(page: &Page) -> String {
    let band = page.certified_band();
    let qs: Vec<usize> = page.sig().fiber_degrees();
    let mut out = String::new();
    let width = 3;
    for &q in qs.iter().rev() {
        let _ = write!(out, "{q:>4} |");
        for p in (0..=band).step_by(2) {
            let d = page.dim(Bidegree::new(p, q));
            let cell = if d == 0 { ".".to_string() } else { d.to_string() };
            let _ = write!(out, "{cell:>width$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "     +");
    for _ in (0..=band).step_by(2) {
        out.push_str("---");
    }
    out.push('\n');
    let _ = write!(out, "   p  ");
    for p in (0..=band).step_by(2) {
        let _ = write!(out, "{p:>width$}");
    }
    out.push('\n');
    out
}

fn index_lines(out: &mut String, r: &IndexReport) {
    let i = r.volovikov.map_or("none".to_string(), |i| i.to_string());
    let _ = writeln!(out, "s: {}", r.s);
    let _ = writeln!(out, "2s+1: {} (in r-list: {})", r.r_of_s, yes_no(r.in_r_list));
    let _ = writeln!(out, "i(X): {i} (in i-list: {})", yes_no(r.in_i_list));
    for st in &r.statements {
        let _ = writeln!(out, "  {st}");
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze_text(r: &AnalyzeReport, stable: &Page) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "signature: {}", sig_text(&r.signature));
    let _ = writeln!(out, "schedule: {}", schedule_text(&r.schedule));
    let _ = writeln!(out, "window: {} (certified band p <= {})", r.window, r.certified_band);
    if r.free_consistent {
        let _ = writeln!(out, "free-consistent: yes");
    } else {
        let w = r.witness.expect("witness for failure");
        let _ = writeln!(out, "free-consistent: no (witness E_inf^({},{}) total degree {})", w.p, w.q, w.total());
    }
    let _ = writeln!(out, "betti: {}", r.betti);
    let _ = writeln!(out, "E_inf support:");
    out.push_str(&support_grid(stable));
    if let Some(p) = &r.presentation {
        let _ = writeln!(out, "generators:");
        let _ = writeln!(out, "  x degree 2, x^{} = 0", p.x_exponent);
        for g in &p.generators {
            let _ = writeln!(out, "  {} degree {} rep {} tower {}", g.name, g.degree, g.rep, g.tower);
        }
        let _ = writeln!(out, "presentation: {}", p.rendered);
        for par in &p.parameters {
            let _ = writeln!(out, "  {} on {}: {}", par.name, par.term, par.status);
        }
    }
    if let Some(ix) = &r.index {
        index_lines(&mut out, ix);
    }
    if r.free_consistent {
        let labels = if r.labels.is_empty() { "none".to_string() } else { r.labels.join(", ") };
        let _ = writeln!(out, "case labels: {labels}");
    }
    out
}

fn analyze_markdown(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Analysis of {}", sig_text(&r.signature));
    let _ = writeln!(out);
    let _ = writeln!(out, "- schedule: `{}`", schedule_text(&r.schedule));
    let _ = writeln!(out, "- window: {}, certified band p <= {}", r.window, r.certified_band);
    let _ = writeln!(out, "- free-consistent: {}", yes_no(r.free_consistent));
    if let Some(w) = r.witness {
        let _ = writeln!(out, "- witness: E_inf^({},{})", w.p, w.q);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "| k | dim H^k |");
    let _ = writeln!(out, "|---|---|");
    for (k, d) in r.betti.dims() {
        let _ = writeln!(out, "| {k} | {d} |");
    }
    if let Some(p) = &r.presentation {
        let _ = writeln!(out);
        let _ = writeln!(out, "Presentation: `{}`", p.rendered);
    }
    if let Some(ix) = &r.index {
        let _ = writeln!(out);
        let i = ix.volovikov.map_or("none".to_string(), |i| i.to_string());
        let _ = writeln!(out, "- s = {}, i(X) = {i}", ix.s);
        for st in &ix.statements {
            let _ = writeln!(out, "- {st}");
        }
    }
    if !r.labels.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Case labels: {}", r.labels.join(", "));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiClass {
    pub betti: BettiTable,
    pub labels: Vec<String>,
    pub schedules: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub schema: String,
    pub signature: SigJson,
    pub window: usize,
    pub classes: Vec<BettiClass>,
    pub schedules: usize,
    pub inconsistent: usize,
    pub not_free: usize,
    pub no_admissible_pattern: bool,
}

fn enumerate_report(sig: SpaceSignature, window: usize) -> Result<EnumerateReport, String> {
    let e = enumerate_schedules(sig, window).map_err(|e| e.to_string())?;
    let mut classes: Vec<BettiClass> = Vec::new();
    for r in &e.results {
        match classes.iter_mut().find(|c| c.betti == r.betti) {
            Some(c) => c.schedules.push(r.schedule.to_string()),
            None => classes.push(BettiClass {
                betti: r.betti.clone(),
                labels: matching_labels(&sig, &r.betti).iter().map(ToString::to_string).collect(),
                schedules: vec![r.schedule.to_string()],
            }),
        }
    }
    Ok(EnumerateReport {
        schema: ENUMERATE_SCHEMA.to_string(),
        signature: (&sig).into(),
        window,
        schedules: e.results.len(),
        classes,
        inconsistent: e.inconsistent,
        not_free: e.not_free,
        no_admissible_pattern: e.no_admissible_pattern,
    })
}

pub fn cmd_enumerate(cfg: &RunConfig) -> (i32, String) {
    let sig = cfg.signature.expect("signature present");
    let window = match cfg.window_for(&sig) {
        Ok(w) => w,
        Err(e) => return usage_error(e),
    };
    let report = match enumerate_report(sig, window) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let text = match cfg.format {
        Format::Json => to_json(&report),
        Format::Text => enumerate_text(&report),
        Format::Markdown => enumerate_markdown(&report),
    };
    (EXIT_OK, text)
}

fn enumerate_text(r: &EnumerateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "signature: {}", sig_text(&r.signature));
    let _ = writeln!(
        out,
        "free-consistent schedules: {} in {} Betti classes",
        r.schedules,
        r.classes.len()
    );
    for (i, c) in r.classes.iter().enumerate() {
        let labels = if c.labels.is_empty() { "none".to_string() } else { c.labels.join(", ") };
        let _ = writeln!(out, "class {}: betti {}", i + 1, c.betti);
        let _ = writeln!(out, "  labels: {labels}");
        for s in &c.schedules {
            let _ = writeln!(out, "  {s}");
        }
    }
    let _ = writeln!(out, "rejected: {} inconsistent, {} not free", r.inconsistent, r.not_free);
    if r.no_admissible_pattern {
        let _ = writeln!(out, "note: no admissible pattern (no page offers a nonzero target)");
    }
    out
}

fn enumerate_markdown(r: &EnumerateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Schedules for {}", sig_text(&r.signature));
    let _ = writeln!(out);
    let _ = writeln!(out, "| class | betti | labels | schedules |");
    let _ = writeln!(out, "|---|---|---|---|");
    for (i, c) in r.classes.iter().enumerate() {
        let schedules: Vec<String> = c.schedules.iter().map(|s| format!("`{s}`")).collect();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            i + 1,
            c.betti,
            c.labels.join(", "),
            schedules.join("<br>")
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Rejected: {} inconsistent, {} not free.", r.inconsistent, r.not_free);
    if r.no_admissible_pattern {
        let _ = writeln!(out);
        let _ = writeln!(out, "No admissible pattern.");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCommandReport {
    pub schema: String,
    pub signature: SigJson,
    pub schedule: String,
    pub report: IndexReport,
}

pub fn cmd_index(cfg: &RunConfig) -> (i32, String) {
    if cfg.schedule.is_none() {
        return usage_error("index needs --schedule");
    }
    let (sig, schedule, _, run) = match execute(cfg) {
        Ok(x) => x,
        Err(e) => return e,
    };
    let verdict = check_freeness(&run.stable);
    if let Some(w) = verdict.witness {
        return (
            EXIT_NOT_FREE,
            format!("not free-consistent: witness E_inf^({},{}) total degree {}\n", w.p, w.q, w.total()),
        );
    }
    let doc = IndexCommandReport {
        schema: INDEX_SCHEMA.to_string(),
        signature: (&sig).into(),
        schedule: schedule.to_string(),
        report: index_report(&sig, &run.history, &run.stable),
    };
    let text = match cfg.format {
        Format::Json => to_json(&doc),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "signature: {}", sig_text(&doc.signature));
            let _ = writeln!(out, "schedule: {}", doc.schedule);
            index_lines(&mut out, &doc.report);
            out
        }
        Format::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "# Index of {} under `{}`", sig_text(&doc.signature), doc.schedule);
            let _ = writeln!(out);
            let i = doc.report.volovikov.map_or("none".to_string(), |i| i.to_string());
            let _ = writeln!(out, "| s | 2s+1 | i(X) | in r-list | in i-list |");
            let _ = writeln!(out, "|---|---|---|---|---|");
            let _ = writeln!(
                out,
                "| {} | {} | {i} | {} | {} |",
                doc.report.s,
                doc.report.r_of_s,
                yes_no(doc.report.in_r_list),
                yes_no(doc.report.in_i_list)
            );
            let _ = writeln!(out);
            for st in &doc.report.statements {
                let _ = writeln!(out, "- {st}");
            }
            out
        }
    };
    (EXIT_OK, text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOutcome {
    Match,
    AnnotatedMismatch(Vec<usize>),
    Mismatch(Vec<usize>),
    NotFree,
    Unrealizable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCheck {
    pub label: String,
    pub representative: String,
    pub outcome: CheckOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexAnomaly {
    pub signature: SigJson,
    pub schedule: String,
    pub value: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureSummary {
    pub signature: SigJson,
    pub in_regime: bool,
    pub schedules: usize,
    pub rejected: usize,
    pub empty_schedule_witness: Option<Bidegree>,
    pub kunneth: Option<Verdict>,
    pub unmatched: Vec<String>,
    pub label_checks: Vec<LabelCheck>,
    pub label_matches: BTreeMap<String, usize>,
    pub engine_mismatches: Vec<String>,
    pub i_list_counterexamples: Vec<IndexAnomaly>,
    pub r_list_counterexamples: Vec<IndexAnomaly>,
    pub truncation_violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyTotals {
    pub signatures: usize,
    pub schedules: usize,
    pub regime_signatures: usize,
    pub regime_schedules: usize,
    pub engine_mismatches: usize,
    pub annotated_mismatches: usize,
    pub unmatched_outside_regime: usize,
    pub kunneth_matches: usize,
    pub label_matches: BTreeMap<String, usize>,
    pub i_list_counterexamples: usize,
    pub r_list_counterexamples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub max: usize,
    pub totals: VerifyTotals,
    pub signatures: Vec<SignatureSummary>,
}

/// All signatures 1 ≤ n ≤ m ≤ l ≤ max in lexicographic order.
pub fn signatures_up_to(max: usize) -> Vec<SpaceSignature> {
    let mut out = Vec::new();
    for n in 1..=max {
        for m in n..=max {
            for l in m..=max {
                out.push(SpaceSignature::new(n, m, l).expect("valid degrees"));
            }
        }
    }
    out
}

fn run_text(sig: SpaceSignature, window: usize, text: &str) -> Result<Run, String> {
    let schedule: Schedule = text.parse().map_err(|e: crate::schedule::ParseError| e.to_string())?;
    schedule.run(sig, window).map_err(|e| e.to_string())
}

pub fn verify_signature(sig: SpaceSignature, window: usize, annotations: &Annotations) -> Result<SignatureSummary, String> {
    let e = enumerate_schedules(sig, window).map_err(|e| e.to_string())?;
    let in_regime = in_reconciliation_regime(&sig);
    let mut engine_mismatches = Vec::new();
    let empty = run_text(sig, window, "")?;
    let empty_schedule_witness = check_freeness(&empty.stable).witness;
    if empty_schedule_witness.is_none() {
        engine_mismatches.push("empty schedule passes the freeness filter".to_string());
    }
    let kunneth = match kunneth_product(&sig) {
        Err(_) => None,
        Ok(poly) => {
            let text = format!("r={}:a->1", sig.n + 1);
            let table = run_text(sig, window, &text)
                .ok()
                .and_then(|r| betti_table(&r.stable).ok())
                .unwrap_or_default();
            let rc = reconcile(&table, &poly.to_betti());
            if !rc.is_match() {
                engine_mismatches.push(format!("Künneth anchor differs at {:?}", rc.degrees()));
            }
            Some(rc.verdict)
        }
    };
    let mut unmatched = Vec::new();
    let mut label_matches: BTreeMap<String, usize> = BTreeMap::new();
    let mut i_list_counterexamples = Vec::new();
    let mut r_list_counterexamples = Vec::new();
    let mut truncation_violations = Vec::new();
    for r in &e.results {
        let text = r.schedule.to_string();
        if check_freeness(&r.stable).witness.is_some() {
            engine_mismatches.push(format!("{text}: returned schedule is not free"));
        }
        let labels = matching_labels(&sig, &r.betti);
        for l in &labels {
            *label_matches.entry(l.to_string()).or_default() += 1;
        }
        if labels.is_empty() {
            if in_regime {
                engine_mismatches.push(format!("{text}: betti {} matches no case table", r.betti));
            }
            unmatched.push(text.clone());
        }
        let run = run_text(sig, window, &text)?;
        let report = index_report(&sig, &run.history, &run.stable);
        if !report.in_i_list {
            i_list_counterexamples.push(IndexAnomaly {
                signature: (&sig).into(),
                schedule: text.clone(),
                value: report.volovikov,
            });
        }
        if !report.in_r_list {
            r_list_counterexamples.push(IndexAnomaly {
                signature: (&sig).into(),
                schedule: text.clone(),
                value: Some(report.r_of_s),
            });
        }
        let hit = truncation_page(&run.history, &run.stable);
        let ordered = matches!((report.volovikov, hit), (Some(i), Some(h)) if h >= i);
        if !bottom_row_is_truncation(&run.stable) || !ordered {
            truncation_violations.push(text.clone());
        }
    }
    let mut label_checks = Vec::new();
    for label in applicable_labels(&sig) {
        let representative = representative_schedule(&label, &sig).map_err(|e| e.to_string())?;
        let expected = theorem_table(&label, &sig).map_err(|e| e.to_string())?;
        let outcome = match run_text(sig, window, &representative) {
            Err(err) => CheckOutcome::Unrealizable(err),
            Ok(run) => match betti_table(&run.stable) {
                Err(_) => CheckOutcome::NotFree,
                Ok(table) => {
                    let rc = reconcile(&table, &expected);
                    if rc.is_match() {
                        CheckOutcome::Match
                    } else {
                        let degrees = rc.degrees();
                        let list: Vec<usize> = degrees.iter().copied().collect();
                        if annotations.covers(&label, &sig, &degrees) {
                            CheckOutcome::AnnotatedMismatch(list)
                        } else {
                            engine_mismatches.push(format!("{label} via {representative} differs at {list:?}"));
                            CheckOutcome::Mismatch(list)
                        }
                    }
                }
            },
        };
        label_checks.push(LabelCheck {
            label: label.to_string(),
            representative,
            outcome,
        });
    }
    Ok(SignatureSummary {
        signature: (&sig).into(),
        in_regime,
        schedules: e.results.len(),
        rejected: e.rejected(),
        empty_schedule_witness,
        kunneth,
        unmatched,
        label_checks,
        label_matches,
        engine_mismatches,
        i_list_counterexamples,
        r_list_counterexamples,
        truncation_violations,
    })
}

pub fn verify_report(max: usize, jobs: usize, window: Option<usize>, annotations: &Annotations) -> Result<VerifyReport, String> {
    let sigs = signatures_up_to(max);
    let work = |sig: &SpaceSignature| {
        let w = window.unwrap_or(sig.default_window()).max(sig.default_window());
        verify_signature(*sig, w, annotations)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string())?;
    let results: Vec<Result<SignatureSummary, String>> = pool.install(|| sigs.par_iter().map(work).collect());
    let signatures: Vec<SignatureSummary> = results.into_iter().collect::<Result<_, _>>()?;
    let mut label_matches: BTreeMap<String, usize> = BTreeMap::new();
    for s in &signatures {
        for (k, v) in &s.label_matches {
            *label_matches.entry(k.clone()).or_default() += v;
        }
    }
    let totals = VerifyTotals {
        signatures: signatures.len(),
        schedules: signatures.iter().map(|s| s.schedules).sum(),
        regime_signatures: signatures.iter().filter(|s| s.in_regime).count(),
        regime_schedules: signatures.iter().filter(|s| s.in_regime).map(|s| s.schedules).sum(),
        engine_mismatches: signatures.iter().map(|s| s.engine_mismatches.len()).sum(),
        annotated_mismatches: signatures
            .iter()
            .flat_map(|s| &s.label_checks)
            .filter(|c| matches!(c.outcome, CheckOutcome::AnnotatedMismatch(_)))
            .count(),
        unmatched_outside_regime: signatures
            .iter()
            .filter(|s| !s.in_regime)
            .map(|s| s.unmatched.len())
            .sum(),
        kunneth_matches: signatures.iter().filter(|s| s.kunneth == Some(Verdict::Match)).count(),
        label_matches,
        i_list_counterexamples: signatures.iter().map(|s| s.i_list_counterexamples.len()).sum(),
        r_list_counterexamples: signatures.iter().map(|s| s.r_list_counterexamples.len()).sum(),
    };
    Ok(VerifyReport {
        schema: VERIFY_SCHEMA.to_string(),
        max,
        totals,
        signatures,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> (i32, String) {
    let report = match verify_report(cfg.max, cfg.jobs, cfg.window, &cfg.annotations) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let code = if report.totals.engine_mismatches == 0 { EXIT_OK } else { EXIT_MISMATCH };
    let text = match cfg.format {
        Format::Json => to_json(&report),
        Format::Text => verify_text(&report),
        Format::Markdown => verify_markdown(&report),
    };
    (code, text)
}

fn verify_text(r: &VerifyReport) -> String {
    let t = &r.totals;
    let mut out = String::new();
    let _ = writeln!(out, "sweep: 1 <= n <= m <= l <= {}", r.max);
    let _ = writeln!(out, "signatures: {} ({} in the reconciliation regime)", t.signatures, t.regime_signatures);
    let _ = writeln!(out, "schedules: {} ({} in the regime)", t.schedules, t.regime_schedules);
    let _ = writeln!(out, "Künneth anchor matches: {}", t.kunneth_matches);
    let _ = writeln!(out, "engine-side mismatches: {}", t.engine_mismatches);
    let _ = writeln!(out, "annotated mismatches: {}", t.annotated_mismatches);
    let _ = writeln!(out, "unmatched tables outside the regime: {}", t.unmatched_outside_regime);
    let _ = writeln!(out, "i-list counterexamples: {}", t.i_list_counterexamples);
    let _ = writeln!(out, "r-list counterexamples: {}", t.r_list_counterexamples);
    let _ = writeln!(out, "case matches:");
    for (k, v) in &t.label_matches {
        let _ = writeln!(out, "  {k}: {v}");
    }
    for s in &r.signatures {
        for m in &s.engine_mismatches {
            let _ = writeln!(out, "MISMATCH {} {m}", sig_text(&s.signature));
        }
    }
    for s in &r.signatures {
        for a in s.i_list_counterexamples.iter().chain(&s.r_list_counterexamples) {
            let v = a.value.map_or("none".to_string(), |v| v.to_string());
            let _ = writeln!(out, "index outlier {} {} value {v}", sig_text(&a.signature), a.schedule);
        }
    }
    out
}

fn verify_markdown(r: &VerifyReport) -> String {
    let t = &r.totals;
    let mut out = String::new();
    let _ = writeln!(out, "# Sweep up to {}", r.max);
    let _ = writeln!(out);
    let _ = writeln!(out, "| quantity | value |");
    let _ = writeln!(out, "|---|---|");
    for (k, v) in [
        ("signatures", t.signatures),
        ("regime signatures", t.regime_signatures),
        ("schedules", t.schedules),
        ("regime schedules", t.regime_schedules),
        ("Künneth anchor matches", t.kunneth_matches),
        ("engine-side mismatches", t.engine_mismatches),
        ("annotated mismatches", t.annotated_mismatches),
        ("unmatched outside regime", t.unmatched_outside_regime),
        ("i-list counterexamples", t.i_list_counterexamples),
        ("r-list counterexamples", t.r_list_counterexamples),
    ] {
        let _ = writeln!(out, "| {k} | {v} |");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "| case | matches |");
    let _ = writeln!(out, "|---|---|");
    for (k, v) in &t.label_matches {
        let _ = writeln!(out, "| {k} | {v} |");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> (i32, String) {
        run(std::iter::once("borel-sseq").chain(args.iter().copied()))
    }

    #[test]
    fn analyze_exit_codes() {
        let (code, out) = cli(&["analyze", "3", "4", "8", "--schedule", "r=4:a->1"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("betti: 0:1 2:1 4:1 6:1 8:1 10:1 12:1 14:1"));
        let (code, out) = cli(&["analyze", "3", "4", "8"]);
        assert_eq!(code, EXIT_NOT_FREE);
        assert!(out.contains("witness E_inf^(0,0)") || out.contains("witness E_inf^("), "{out}");
        assert_eq!(cli(&["analyze", "3", "4", "8", "--schedule", "r=4:a"]).0, EXIT_USAGE);
        assert_eq!(cli(&["analyze", "3", "4", "8", "--schedule", "r=5:a->1"]).0, EXIT_USAGE);
        assert_eq!(cli(&["analyze", "3", "4", "8", "--window", "9"]).0, EXIT_USAGE);
        assert_eq!(cli(&["analyze", "0", "4", "8"]).0, EXIT_USAGE);
        assert_eq!(cli(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn window_validation() {
        let cfg = RunConfig {
            signature: None,
            schedule: None,
            window: Some(34),
            format: Format::Text,
            max: 8,
            jobs: 1,
            annotations: Annotations::default(),
        };
        let sig = SpaceSignature::new(3, 4, 8).unwrap();
        assert_eq!(cfg.window_for(&sig), Ok(34));
        let cfg = RunConfig { window: Some(32), ..cfg };
        assert!(cfg.window_for(&sig).is_ok());
        let cfg = RunConfig { window: Some(30), ..cfg };
        assert!(cfg.window_for(&sig).is_err());
    }

    #[test]
    fn json_round_trips() {
        let (_, out) = cli(&["analyze", "2", "2", "3", "--schedule", "r=4:c->1", "--format", "json"]);
        let report: AnalyzeReport = serde_json::from_str(&out).unwrap();
        assert_eq!(report.schema, ANALYZE_SCHEMA);
        assert_eq!(report.betti, BettiTable::new([(0, 1), (2, 3), (4, 3), (6, 1)]));
        assert_eq!(to_json(&report), out);
        let (_, out) = cli(&["index", "3", "4", "8", "--schedule", "r=4:a->1", "--format", "json"]);
        let doc: IndexCommandReport = serde_json::from_str(&out).unwrap();
        assert_eq!((doc.report.s, doc.report.volovikov), (1, Some(4)));
        assert_eq!(to_json(&doc), out);
    }

    #[test]
    fn markdown_renders() {
        let (code, out) = cli(&["enumerate", "3", "4", "8", "--format", "markdown"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("`r=4:a->1`"));
        let (_, out) = cli(&["analyze", "3", "4", "8", "--schedule", "r=4:a->1", "--format", "markdown"]);
        assert!(out.contains("| 14 | 1 |"));
    }

    #[test]
    fn signatures_listed_in_order() {
        let s = signatures_up_to(2);
        let v: Vec<(usize, usize, usize)> = s.iter().map(|s| (s.n, s.m, s.l)).collect();
        assert_eq!(v, vec![(1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2)]);
    }
}

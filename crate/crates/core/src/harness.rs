//! Campaign runner, one-parameter residual sweeps, the normal-form bound
//! table check and the per-state report behind the CLI.
//!
//! Campaign work is sharded by `(class, sample index)`. Every sample draws
//! from its own sub-seed, and results are collected in index order, so the
//! CSV is a pure function of the configuration for any worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monogamy::{ckw_residual, sm_report_all_foci, ExponentSchedule, SmReport};
use crate::qstate::{c, PureState, C64};
use crate::states::{normal_form, random_slocc_state, sub_seed, NormalFormParams, Provenance, SloccClass};
use crate::tangles::{one_tangle, three_tangle_pure, three_tangle_upper, two_tangle_of_pure, TangleBoundResult};

pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_THRESHOLD: f64 = -1e-7;
pub const CKW_THRESHOLD: f64 = -1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// The four three-qubit marginals, by zero-based qubit indices.
pub const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

#[derive(Clone, Debug, Serialize)]
pub struct CampaignConfig {
    pub classes: Vec<SloccClass>,
    pub samples_per_class: u64,
    pub master_seed: u64,
    pub mu3: f64,
    pub negativity_threshold: f64,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub provenance_path: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(classes: Vec<SloccClass>, samples_per_class: u64, master_seed: u64) -> Self {
        Self {
            classes,
            samples_per_class,
            master_seed,
            mu3: 1.5,
            negativity_threshold: DEFAULT_THRESHOLD,
            workers: 0,
            csv_path: None,
            summary_path: None,
            provenance_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::Parameters("no classes selected".into()));
        }
        if self.classes.iter().any(|c| c.index() == 9) {
            // The first qubit of class 9 is separable; SM reduces to CKW.
            return Err(Error::Parameters("class 9 is not part of campaigns".into()));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Parameters("samples per class must be >= 1".into()));
        }
        ExponentSchedule::new(self.mu3)?;
        Ok(())
    }
}

/// One CSV row per (state, focus). Qubits are labelled from 1; cells for
/// the focus itself and for the marginal that excludes it are empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignRow {
    pub class: u8,
    pub sample_index: u64,
    pub sub_seed: u64,
    pub focus: usize,
    pub tau1: f64,
    pub tau2_q1: Option<f64>,
    pub tau2_q2: Option<f64>,
    pub tau2_q3: Option<f64>,
    pub tau2_q4: Option<f64>,
    pub tau3_q123: Option<f64>,
    pub tau3_q124: Option<f64>,
    pub tau3_q134: Option<f64>,
    pub tau3_q234: Option<f64>,
    pub tau3_method_q123: Option<&'static str>,
    pub tau3_method_q124: Option<&'static str>,
    pub tau3_method_q134: Option<&'static str>,
    pub tau3_method_q234: Option<&'static str>,
    pub residual_lower: f64,
}

impl CampaignRow {
    fn from_report(cls: SloccClass, sample_index: u64, seed: u64, r: &SmReport) -> Self {
        let mut tau2 = [None; 4];
        for t in &r.tau2_terms {
            tau2[t.partner] = Some(t.value);
        }
        let mut tau3 = [None; 4];
        let mut methods = [None; 4];
        for t in &r.tau3_bounds {
            let mut triple = [r.focus, t.pair.0, t.pair.1];
            triple.sort_unstable();
            let k = TRIPLES.iter().position(|x| *x == triple).expect("valid triple");
            tau3[k] = Some(t.bound.value);
            methods[k] = Some(t.bound.method.as_str());
        }
        Self {
            class: cls.index(),
            sample_index,
            sub_seed: seed,
            focus: r.focus + 1,
            tau1: r.tau1,
            tau2_q1: tau2[0],
            tau2_q2: tau2[1],
            tau2_q3: tau2[2],
            tau2_q4: tau2[3],
            tau3_q123: tau3[0],
            tau3_q124: tau3[1],
            tau3_q134: tau3[2],
            tau3_q234: tau3[3],
            tau3_method_q123: methods[0],
            tau3_method_q124: methods[1],
            tau3_method_q134: methods[2],
            tau3_method_q234: methods[3],
            residual_lower: r.residual_lower,
        }
    }

    pub fn tau2_values(&self) -> Vec<f64> {
        [self.tau2_q1, self.tau2_q2, self.tau2_q3, self.tau2_q4].into_iter().flatten().collect()
    }

    pub fn tau3_values(&self) -> Vec<f64> {
        [self.tau3_q123, self.tau3_q124, self.tau3_q134, self.tau3_q234].into_iter().flatten().collect()
    }

    pub fn ckw_residual(&self) -> f64 {
        self.tau2_values().iter().fold(self.tau1, |acc, t| acc - t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, nbins: usize) -> Self {
        Self { lo, hi, bins: vec![0; nbins], below: 0, above: 0 }
    }

    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.below += 1;
        } else if x > self.hi {
            self.above += 1;
        } else {
            let n = self.bins.len();
            let k = (((x - self.lo) / (self.hi - self.lo)) * n as f64) as usize;
            self.bins[k.min(n - 1)] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum::<u64>() + self.below + self.above
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinResidual {
    pub value: f64,
    pub class: u8,
    pub sample_index: u64,
    pub seed: u64,
    pub focus: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: u8,
    pub points: u64,
    pub errors: u64,
    pub min_residual: f64,
    pub residual_histogram: Histogram,
    pub tau1_histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub total_points: u64,
    pub min_residual: Option<MinResidual>,
    pub violation_count: u64,
    pub error_count: u64,
    pub min_ckw_residual: f64,
    pub ckw_violation_count: u64,
    /// Largest `residual_lower - tau1` seen; never positive for sound data.
    pub max_excess_over_tau1: f64,
    pub negativity_threshold: f64,
    pub mu3: f64,
    /// Most negative rows below the threshold, at most [`MAX_CANDIDATES`].
    pub candidates: Vec<MinResidual>,
    pub per_class: Vec<ClassSummary>,
}

pub const MAX_CANDIDATES: usize = 20;

impl CampaignSummary {
    pub fn exit_code(&self) -> i32 {
        if self.error_count > 0 {
            EXIT_NUMERICAL
        } else if self.violation_count > 0 {
            EXIT_VIOLATIONS
        } else {
            EXIT_OK
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub class: SloccClass,
    pub sample_index: u64,
    pub sub_seed: u64,
    pub result: std::result::Result<(Provenance, [SmReport; 4]), String>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutput {
    pub summary: CampaignSummary,
    pub rows: Vec<CampaignRow>,
    pub samples: Vec<SampleOutcome>,
}

fn evaluate_sample(cls: SloccClass, index: u64, master: u64, sched: ExponentSchedule) -> SampleOutcome {
    let seed = sub_seed(master, cls, index);
    let result = random_slocc_state(cls, seed)
        .and_then(|s| Ok((s.provenance, sm_report_all_foci(&s.state, sched)?)))
        .map_err(|e| e.to_string());
    SampleOutcome { class: cls, sample_index: index, sub_seed: seed, result }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameters(format!("thread pool: {e}")))
}

/// Runs the campaign in memory. See [`run_campaign_to_files`] for the CLI path.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    cfg.validate()?;
    let sched = ExponentSchedule::new(cfg.mu3)?;
    let jobs: Vec<(SloccClass, u64)> =
        cfg.classes.iter().flat_map(|&c| (0..cfg.samples_per_class).map(move |i| (c, i))).collect();
    let samples: Vec<SampleOutcome> = thread_pool(cfg.workers)?.install(|| {
        jobs.par_iter().map(|&(cls, i)| evaluate_sample(cls, i, cfg.master_seed, sched)).collect()
    });

    let mut rows = Vec::with_capacity(samples.len() * 4);
    let mut per_class: BTreeMap<u8, ClassSummary> = BTreeMap::new();
    let mut summary = CampaignSummary {
        total_points: 0,
        min_residual: None,
        violation_count: 0,
        error_count: 0,
        min_ckw_residual: f64::INFINITY,
        ckw_violation_count: 0,
        max_excess_over_tau1: f64::NEG_INFINITY,
        negativity_threshold: cfg.negativity_threshold,
        mu3: cfg.mu3,
        candidates: Vec::new(),
        per_class: Vec::new(),
    };
    for s in &samples {
        let class_summary = per_class.entry(s.class.index()).or_insert_with(|| ClassSummary {
            class: s.class.index(),
            points: 0,
            errors: 0,
            min_residual: f64::INFINITY,
            residual_histogram: Histogram::new(0.0, 1.0, 20),
            tau1_histogram: Histogram::new(0.0, 1.0, 20),
        });
        let reports = match &s.result {
            Ok((_, reports)) => reports,
            Err(e) => {
                warn!("class {} sample {} (seed {}): {e}", s.class, s.sample_index, s.sub_seed);
                summary.error_count += 1;
                class_summary.errors += 1;
                continue;
            }
        };
        for r in reports {
            let row = CampaignRow::from_report(s.class, s.sample_index, s.sub_seed, r);
            summary.total_points += 1;
            class_summary.points += 1;
            class_summary.min_residual = class_summary.min_residual.min(row.residual_lower);
            class_summary.residual_histogram.add(row.residual_lower);
            class_summary.tau1_histogram.add(row.tau1);
            let point = MinResidual {
                value: row.residual_lower,
                class: row.class,
                sample_index: row.sample_index,
                seed: row.sub_seed,
                focus: row.focus,
            };
            if row.residual_lower < cfg.negativity_threshold {
                summary.violation_count += 1;
                summary.candidates.push(point.clone());
                if summary.candidates.len() > 4 * MAX_CANDIDATES {
                    truncate_candidates(&mut summary.candidates);
                }
            }
            let ckw = row.ckw_residual();
            summary.min_ckw_residual = summary.min_ckw_residual.min(ckw);
            if ckw < CKW_THRESHOLD {
                summary.ckw_violation_count += 1;
            }
            summary.max_excess_over_tau1 = summary.max_excess_over_tau1.max(row.residual_lower - row.tau1);
            if summary.min_residual.as_ref().map_or(true, |m| row.residual_lower < m.value) {
                summary.min_residual = Some(point);
            }
            rows.push(row);
        }
    }
    truncate_candidates(&mut summary.candidates);
    summary.per_class = per_class.into_values().collect();
    Ok(CampaignOutput { summary, rows, samples })
}

fn truncate_candidates(c: &mut Vec<MinResidual>) {
    // Stable, so ties keep sample order.
    c.sort_by(|a, b| a.value.total_cmp(&b.value));
    c.truncate(MAX_CANDIDATES);
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Provenance of every successful sample as JSON lines, in sample order.
pub fn write_provenance<W: Write>(mut out: W, samples: &[SampleOutcome]) -> Result<()> {
    for s in samples {
        if let Ok((prov, _)) = &s.result {
            serde_json::to_writer(&mut out, prov)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn run_campaign_to_files(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    let output = run_campaign(cfg)?;
    if let Some(path) = &cfg.csv_path {
        write_rows(std::fs::File::create(path)?, &output.rows)?;
    }
    if let Some(path) = &cfg.summary_path {
        std::fs::write(path, serde_json::to_string_pretty(&output.summary)?)?;
    }
    if let Some(path) = &cfg.provenance_path {
        write_provenance(std::io::BufWriter::new(std::fs::File::create(path)?), &output.samples)?;
    }
    Ok(output)
}

/// Normal-form parameters as functions of one real `a`.
pub fn sweep_params(cls: SloccClass, a: f64) -> Result<NormalFormParams> {
    match cls.index() {
        2 => NormalFormParams::real(a, a, a, 0.0),
        3 => NormalFormParams::real(a, a / 4.0, 0.0, 0.0),
        4 => NormalFormParams::real(a, a / 2.0, 0.0, 0.0),
        5 | 6 => NormalFormParams::real(a, 0.0, 0.0, 0.0),
        k => Err(Error::Parameters(format!("no sweep binding for class {k} (expected 2..=6)"))),
    }
}

/// `start, start + step, ...` up to `stop` inclusive (within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Parameters(format!("bad grid {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub class: u8,
    pub a: f64,
    pub residual_q1: f64,
    pub residual_q2: f64,
    pub residual_q3: f64,
    pub residual_q4: f64,
}

impl SweepRow {
    pub fn residuals(&self) -> [f64; 4] {
        [self.residual_q1, self.residual_q2, self.residual_q3, self.residual_q4]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlaggedPoint {
    pub a: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCurve {
    pub class: u8,
    pub mu3: f64,
    pub rows: Vec<SweepRow>,
    pub flagged: Vec<FlaggedPoint>,
    pub min_residual: f64,
    pub violations: usize,
}

pub fn sweep_family(cls: SloccClass, grid: &[f64], mu3: f64, threshold: f64) -> Result<SweepCurve> {
    let sched = ExponentSchedule::new(mu3)?;
    sweep_params(cls, 0.0)?;
    let mut curve =
        SweepCurve { class: cls.index(), mu3, rows: Vec::new(), flagged: Vec::new(), min_residual: f64::INFINITY, violations: 0 };
    for &a in grid {
        let point = sweep_params(cls, a)
            .and_then(|p| normal_form(cls, &p))
            .and_then(|psi| sm_report_all_foci(&psi, sched));
        match point {
            Ok(reports) => {
                let [r1, r2, r3, r4] = reports.map(|r| r.residual_lower);
                let row = SweepRow { class: cls.index(), a, residual_q1: r1, residual_q2: r2, residual_q3: r3, residual_q4: r4 };
                for r in row.residuals() {
                    curve.min_residual = curve.min_residual.min(r);
                    if r < threshold {
                        curve.violations += 1;
                    }
                }
                curve.rows.push(row);
            }
            Err(e) => curve.flagged.push(FlaggedPoint { a, reason: e.to_string() }),
        }
    }
    Ok(curve)
}

pub fn triple_label(t: [usize; 3]) -> String {
    format!("q{}q{}q{}", t[0] + 1, t[1] + 1, t[2] + 1)
}

/// Tabulated bound on the three-tangle of marginal `triple` of normal form
/// `cls`, and whether the tabulated value is an exact zero.
pub fn table1_bound(cls: SloccClass, p: &NormalFormParams, triple: [usize; 3]) -> (f64, bool) {
    let (a, b, cc) = (p.a, p.b, p.c);
    let with_q1 = triple[0] == 0;
    let qs = |t: [usize; 3]| t == triple;
    match cls.index() {
        1 => (0.0, true),
        2 => {
            let num = 4.0 * cc.norm() * ((a * a - b * b) * (a.conj() * a.conj() - b.conj() * b.conj())).norm().sqrt();
            let den = (a.norm_sqr() + b.norm_sqr() + 2.0 * cc.norm_sqr() + 1.0).powi(2);
            (num / den, false)
        }
        3 => {
            if qs([0, 1, 2]) || qs([0, 2, 3]) {
                (0.0, true)
            } else {
                (4.0 * a.norm() * b.norm() / (1.0 + a.norm_sqr() + b.norm_sqr()).powi(2), false)
            }
        }
        4 => (2.0 * (a * a - b * b).norm() / (2.0 + 3.0 * a.norm_sqr() + b.norm_sqr()).powi(2), false),
        5 => {
            let den = (3.0 + 4.0 * a.norm_sqr()).powi(2);
            if qs([0, 1, 2]) || qs([0, 2, 3]) {
                (16.0 * a.norm_sqr() / den, false)
            } else {
                (4.0 / den, false)
            }
        }
        6 => {
            if with_q1 {
                return (0.0, true);
            }
            let m = a.norm();
            if m < 2f64.powf(2.0 / 3.0) {
                (m * (m.powi(3) - 4.0).powi(2) / (2.0 * m * m + 3.0).powi(2), false)
            } else {
                (0.0, true)
            }
        }
        7 | 8 => {
            if with_q1 {
                (0.25, false)
            } else {
                (0.0, true)
            }
        }
        _ => {
            if with_q1 {
                (0.0, true)
            } else {
                (1.0, false)
            }
        }
    }
}

/// Ten parameter points per parametric class; one point for 7..=9.
pub fn table1_grid(cls: SloccClass) -> Vec<NormalFormParams> {
    let ts = (1..=10).map(|k| 0.25 * k as f64);
    let p = |a: C64, b: C64, cc: C64, d: C64| NormalFormParams { a, b, c: cc, d };
    let z = C64::default();
    match cls.index() {
        1 => ts.map(|t| p(c(t, 0.2), c(0.6, 0.1 * t), c(0.3 * t, -0.5), c(1.1, -0.4))).collect(),
        2 => ts.map(|t| p(c(t, 0.0), c(0.5, 0.3), c(0.4 * t, -0.2), z)).collect(),
        3 => ts.map(|t| p(c(t, 0.1), c(0.7 * t, 0.0), z, z)).collect(),
        4 => ts.map(|t| p(c(t, 0.0), c(0.3, 0.5), z, z)).collect(),
        5 => ts.map(|t| p(c(t, 0.3), z, z, z)).collect(),
        6 => ts.map(|t| p(c(t, 0.0), z, z, z)).collect(),
        _ => vec![NormalFormParams::default()],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Entry {
    pub class: u8,
    pub params: Vec<C64>,
    pub marginal: String,
    pub table_bound: f64,
    pub table_exact_zero: bool,
    pub rdl: TangleBoundResult,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Report {
    pub entries: Vec<Table1Entry>,
    pub flagged_count: usize,
    pub zero_entries_checked: usize,
}

/// Tolerance for an RDL bound on a marginal the table lists as zero.
pub const TABLE_ZERO_TOL: f64 = 1e-6;

pub fn table1_check() -> Result<Table1Report> {
    let mut entries = Vec::new();
    for cls in SloccClass::ALL {
        for params in table1_grid(cls) {
            let psi = normal_form(cls, &params)?;
            for triple in TRIPLES {
                let (table_bound, exact_zero) = table1_bound(cls, &params, triple);
                let rdl = three_tangle_upper(&psi.partial_trace(&triple)?)?;
                entries.push(Table1Entry {
                    class: cls.index(),
                    params: params.used(cls),
                    marginal: triple_label(triple),
                    table_bound,
                    table_exact_zero: exact_zero,
                    flagged: exact_zero && rdl.value > TABLE_ZERO_TOL,
                    rdl,
                });
            }
        }
    }
    let flagged_count = entries.iter().filter(|e| e.flagged).count();
    let zero_entries_checked = entries.iter().filter(|e| e.table_exact_zero).count();
    Ok(Table1Report { entries, flagged_count, zero_entries_checked })
}

/// Per-focus tangles, labelled with one-based qubit names.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FocusReport {
    pub focus: usize,
    pub tau1: f64,
    pub tau2: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tau3_upper: BTreeMap<String, TangleBoundResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ckw_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangleReport {
    pub n: usize,
    pub mu3: f64,
    /// Exact three-tangle, three-qubit inputs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau3: Option<f64>,
    pub foci: Vec<FocusReport>,
}

fn label(q: usize) -> String {
    format!("q{}", q + 1)
}

/// Tangle report for a 2-, 3- or 4-qubit state; `focus` is zero-based,
/// `None` reports every qubit.
pub fn tangle_report(psi: &PureState, focus: Option<usize>, sched: ExponentSchedule) -> Result<TangleReport> {
    let n = psi.n_qubits();
    if !(2..=4).contains(&n) {
        return Err(Error::QubitCount(n, "2, 3 or 4"));
    }
    if let Some(f) = focus {
        if f >= n {
            return Err(Error::QubitIndex { index: f, n });
        }
    }
    let foci: Vec<usize> = focus.map_or_else(|| (0..n).collect(), |f| vec![f]);
    let mut report = TangleReport { n, mu3: sched.mu3(), tau3: None, foci: Vec::new() };
    match n {
        4 => {
            let all = sm_report_all_foci(psi, sched)?;
            for &f in &foci {
                let r = &all[f];
                report.foci.push(FocusReport {
                    focus: f + 1,
                    tau1: r.tau1,
                    tau2: r.tau2_terms.iter().map(|t| (label(t.partner), t.value)).collect(),
                    tau3_upper: r
                        .tau3_bounds
                        .iter()
                        .map(|t| {
                            let mut tr = [f, t.pair.0, t.pair.1];
                            tr.sort_unstable();
                            (triple_label(tr), t.bound)
                        })
                        .collect(),
                    ckw_residual: Some(r.ckw_residual()),
                    residual_lower: Some(r.residual_lower),
                });
            }
        }
        _ => {
            if n == 3 {
                report.tau3 = Some(three_tangle_pure(psi)?);
            }
            for &f in &foci {
                let mut tau2 = BTreeMap::new();
                for j in (0..n).filter(|&j| j != f) {
                    let pair = if f < j { [f, j] } else { [j, f] };
                    tau2.insert(label(j), two_tangle_of_pure(psi, pair)?);
                }
                report.foci.push(FocusReport {
                    focus: f + 1,
                    tau1: one_tangle(psi, f)?,
                    tau2,
                    tau3_upper: BTreeMap::new(),
                    ckw_residual: if n == 3 { Some(ckw_residual(psi, f)?) } else { None },
                    residual_lower: None,
                });
            }
        }
    }
    Ok(report)
}

impl TangleReport {
    pub fn render_text(&self) -> String {
        let mut out = format!("n = {}", self.n);
        if let Some(t) = self.tau3 {
            out.push_str(&format!("\ntau3 = {t:.12}"));
        }
        for f in &self.foci {
            out.push_str(&format!("\nfocus q{}\n  tau1 = {:.12}", f.focus, f.tau1));
            for (k, v) in &f.tau2 {
                out.push_str(&format!("\n  tau2[q{}|{k}] = {v:.12}", f.focus));
            }
            for (k, b) in &f.tau3_upper {
                out.push_str(&format!("\n  tau3_up[{k}] = {:.12} ({})", b.value, b.method.as_str()));
            }
            if let Some(r) = f.ckw_residual {
                out.push_str(&format!("\n  ckw_residual = {r:.12}"));
            }
            if let Some(r) = f.residual_lower {
                out.push_str(&format!("\n  residual_lower (mu3 = {}) = {r:.12}", self.mu3));
            }
        }
        out
    }
}

/// Parses class lists such as `1-8`, `2,5` or `1-3,7`.
pub fn parse_classes(list: &str) -> Result<Vec<SloccClass>> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parse = |s: &str| {
            s.trim().parse::<u8>().map_err(|_| Error::Parameters(format!("bad class '{s}'")))
        };
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(part)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(Error::Parameters(format!("bad class range '{part}'")));
        }
        for k in lo..=hi {
            let cls = SloccClass::new(k)?;
            if !out.contains(&cls) {
                out.push(cls);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Parameters("empty class list".into()));
    }
    Ok(out)
}

/// Parses `3/2` or `1.5`.
pub fn parse_rational(s: &str) -> Result<f64> {
    let bad = || Error::Parameters(format!("bad number '{s}'"));
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

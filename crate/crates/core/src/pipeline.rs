//! End-to-end runs: structure, flux modes, graph search, translation and
//! optionally the steady-state parametrization, plus the batch runner.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blp::{self, BlpOutcome};
use crate::deadline::Deadline;
use crate::efm::{self, EfmError};
use crate::gcrn::{self, GcrnError};
use crate::io::{self, apply_rates, Format, NetworkDocument};
use crate::report::{
    BlpSection, EfmSection, GcrnSection, ParametrizationSection, RunReport, Status, StructureSection,
    TranslationSection, SCHEMA_VERSION,
};
use crate::translate::{self, TranslateError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(1200);
pub const RATE_RANGE: (f64, f64) = (0.1, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Structure,
    Efm,
    Translate,
    Parametrize,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Structure => "structure",
            Stage::Efm => "efm",
            Stage::Translate => "translate",
            Stage::Parametrize => "parametrize",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    /// `None` disables the deadline.
    pub timeout: Option<Duration>,
    pub seed: u64,
    /// Overrides by label, applied on top of rates found in the input.
    pub rates: Vec<(String, f64)>,
    /// Pinned phantom parameters, zero-based.
    pub sigma: Vec<(usize, f64)>,
    /// Vertices to distinguish instead of the lowest index of their class.
    pub distinguished: Vec<usize>,
    pub stop_after: Stage,
    pub record_timings: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            timeout: Some(DEFAULT_TIMEOUT),
            seed: 0,
            rates: Vec::new(),
            sigma: Vec::new(),
            distinguished: Vec::new(),
            stop_after: Stage::Translate,
            record_timings: false,
        }
    }
}

/// Rates from the network where present, otherwise log-uniform draws in
/// [`RATE_RANGE`]. One draw is consumed per reaction either way, so a
/// given seed assigns the same value to a reaction regardless of which
/// others are set.
pub fn fill_rates(given: &[Option<f64>], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (RATE_RANGE.0.ln(), RATE_RANGE.1.ln());
    given
        .iter()
        .map(|g| {
            let draw = rng.gen_range(lo..hi).exp();
            g.unwrap_or(draw)
        })
        .collect()
}

struct Timer {
    enabled: bool,
    last: Instant,
    laps: BTreeMap<&'static str, f64>,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Timer {
            enabled,
            last: Instant::now(),
            laps: BTreeMap::new(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.laps.insert(stage, (now - self.last).as_secs_f64() * 1e3);
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<&'static str, f64>> {
        self.enabled.then_some(self.laps)
    }
}

pub fn run_pipeline(doc: &NetworkDocument, options: &Options) -> Result<RunReport, io::RatesError> {
    let deadline = options.timeout.map(Deadline::after).unwrap_or_default();
    let crn = apply_rates(&doc.crn, &options.rates)?;
    let mut timer = Timer::new(options.record_timings);
    let mut report = RunReport {
        schema: SCHEMA_VERSION,
        name: doc.name(),
        format: doc.format.as_str(),
        diagnostics: doc.diagnostics.clone(),
        status: None,
        stopped_after: None,
        reason: None,
        structure: StructureSection::new(&crn),
        efm: None,
        blp: None,
        translation: None,
        gcrn: None,
        parametrization: None,
        parametrization_error: None,
        timings_ms: None,
    };
    timer.lap("structure");

    macro_rules! stop {
        ($status:expr, $reason:expr) => {{
            report.status = Some($status);
            report.reason = Some($reason);
            report.timings_ms = timer.finish();
            return Ok(report);
        }};
    }
    macro_rules! timeout {
        ($stage:expr) => {
            stop!(Status::Timeout, format!("deadline reached during {}", $stage))
        };
    }
    macro_rules! stop_if_done {
        ($stage:expr) => {
            if options.stop_after == $stage {
                report.stopped_after = Some($stage.as_str());
                report.timings_ms = timer.finish();
                return Ok(report);
            }
        };
    }

    stop_if_done!(Stage::Structure);
    if deadline.expired() {
        timeout!("structure");
    }

    let analysis = match efm::analyze(&crn, &deadline) {
        Ok(a) => a,
        Err(EfmError::TimedOut(_)) => timeout!("flux mode enumeration"),
        Err(e) => stop!(Status::EfmRejected, e.to_string()),
    };
    timer.lap("efm");
    report.efm = Some(EfmSection::new(&analysis));
    if let Some(reason) = analysis.rejection() {
        stop!(Status::EfmRejected, reason);
    }
    stop_if_done!(Stage::Efm);

    let instance = blp::build_instance(&analysis, &crn);
    let outcome = match blp::solve(&instance, &deadline) {
        Ok(o) => o,
        Err(_) => timeout!("graph search"),
    };
    timer.lap("blp");
    report.blp = Some(BlpSection::new(&outcome, &crn));
    let solution = match outcome {
        BlpOutcome::Optimal(s) => s,
        BlpOutcome::Infeasible(_) => stop!(
            Status::BlpInfeasible,
            "no reaction-to-reaction graph satisfies the flux-mode and shared-source constraints".to_string()
        ),
    };
    if deadline.expired() {
        timeout!("graph search");
    }

    let translation = match translate::solve_translation(&solution.graph, &crn) {
        Ok(t) => t,
        Err(e @ (TranslateError::Inconsistent | TranslateError::Degenerate(_))) => {
            stop!(Status::Inconsistent, e.to_string())
        }
        Err(e) => stop!(Status::Inconsistent, format!("translation failed: {e}")),
    };
    let certificate = match translate::certify(&translation, &crn) {
        Ok(c) => c,
        Err(e) => stop!(Status::Inconsistent, format!("certificate could not be computed: {e}")),
    };
    timer.lap("translate");
    report.translation = Some(TranslationSection::new(&translation, Some(&certificate)));
    if !certificate.holds() {
        stop!(
            Status::Inconsistent,
            format!("translation certificate fails: {}", certificate.failures().join(", "))
        );
    }
    report.status = Some(Status::Translated);
    if options.stop_after < Stage::Parametrize {
        report.timings_ms = timer.finish();
        return Ok(report);
    }
    if deadline.expired() {
        timeout!("translation");
    }

    let g = gcrn::build_gcrn(&crn, &translation)
        .and_then(|g| gcrn::make_vstar_directed(g, &options.distinguished));
    let g = match g {
        Ok(g) => g,
        Err(e) => {
            report.parametrization_error = Some(e.to_string());
            report.timings_ms = timer.finish();
            return Ok(report);
        }
    };
    let kd = gcrn::kinetic_order_deficiency(&g).ok();
    report.gcrn = Some(GcrnSection::new(&g, &crn, kd));
    let rates = fill_rates(&crn.rates(), options.seed);
    let mut sigma = vec![1.0; g.sigma_count()];
    let mut fixed = vec![false; g.sigma_count()];
    for &(j, v) in &options.sigma {
        if j < sigma.len() {
            sigma[j] = v;
            fixed[j] = true;
        } else {
            report.diagnostics.push(format!("sigma{} does not exist; ignored", j + 1));
        }
    }
    match gcrn::parametrize(&crn, &g, &rates, &sigma, &fixed) {
        Ok(p) => {
            report.parametrization = Some(ParametrizationSection::new(&p, &crn, &rates));
            report.status = Some(Status::Parametrized);
        }
        Err(e) => {
            if let GcrnError::SigmaUnsolved(conds) = &e {
                let unsolved: Vec<String> = conds
                    .iter()
                    .map(|c| format!("c=({}) residual {:e}", c.c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","), c.residual))
                    .collect();
                report.parametrization_error = Some(format!("{e}: {}", unsolved.join("; ")));
            } else {
                report.parametrization_error = Some(e.to_string());
            }
        }
    }
    timer.lap("parametrize");
    report.timings_ms = timer.finish();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchEntry {
    pub file: String,
    pub status: String,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub schema: u32,
    pub total: usize,
    pub counts: BTreeMap<String, usize>,
    pub entries: Vec<BatchEntry>,
    #[serde(skip)]
    pub reports: Vec<(String, RunReport)>,
}

pub const PARSE_ERROR: &str = "parse_error";

fn is_model_file(p: &Path) -> bool {
    p.is_file()
        && !p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'))
}

/// Runs every regular file in `dir` independently. Files that cannot be
/// read or parsed are counted under `parse_error`.
pub fn batch(dir: &Path, format: Option<Format>, options: &Options) -> std::io::Result<BatchSummary> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_model_file(p))
        .collect();
    files.sort();
    let results: Vec<(String, Result<RunReport, String>)> = files
        .par_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let r = io::load(p, format)
                .map_err(|e| e.to_string())
                .and_then(|doc| run_pipeline(&doc, options).map_err(|e| e.to_string()));
            (name, r)
        })
        .collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(results.len());
    let mut reports = Vec::new();
    for (file, r) in results {
        match r {
            Ok(rep) => {
                let status = rep.status_str().to_string();
                *counts.entry(status.clone()).or_default() += 1;
                entries.push(BatchEntry {
                    file: file.clone(),
                    status,
                    reason: rep.reason.clone(),
                });
                reports.push((file, rep));
            }
            Err(e) => {
                *counts.entry(PARSE_ERROR.to_string()).or_default() += 1;
                entries.push(BatchEntry {
                    file,
                    status: PARSE_ERROR.to_string(),
                    reason: Some(e),
                });
            }
        }
    }
    Ok(BatchSummary {
        schema: SCHEMA_VERSION,
        total: entries.len(),
        counts,
        entries,
        reports,
    })
}

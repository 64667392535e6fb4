//! Repeated independent runs on one instance and their reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{ConfigError, ParseError, SolveError};
use crate::exact::betweenness::build_betweenness_model;
use crate::exact::{Backend, BRUTEFORCE_LIMIT};
use crate::exact::export::{export_model, ModelFormat};
use crate::instance::{parse_instance, HalfUnits, Instance};
use crate::msa::{default_time_limit, solve, Deadline, SaParams};
use crate::window::{WindowObserver, WindowSubproblem};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Instance { path: PathBuf, source: ParseError },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Solve(#[from] SolveError),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Write { .. } => 1,
            HarnessError::Read { .. } | HarnessError::Instance { .. } => 2,
            HarnessError::Solve(_) => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub runs: usize,
    pub seed: u64,
    /// Wall-clock limit per run; `None` means `ceil(n^1.7)` seconds.
    pub time_limit: Option<Duration>,
    /// Work-unit budget per run; overrides the time limit.
    pub iter_budget: Option<u64>,
    pub params: SaParams,
    /// Directory receiving LP models of the solved windows.
    pub export_mip: Option<PathBuf>,
    /// Models written per run at most.
    pub export_limit: usize,
    pub jobs: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            runs: 15,
            seed: 1,
            time_limit: None,
            iter_budget: None,
            params: SaParams::default(),
            export_mip: None,
            export_limit: 50,
            jobs: None,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |name, value: String, reason| Err(ConfigError::Invalid { name, value, reason });
        if self.runs == 0 {
            return bad("runs", "0".into(), "must be at least 1");
        }
        if self.time_limit == Some(Duration::ZERO) {
            return bad("time-limit", "0".into(), "must be positive");
        }
        if self.iter_budget == Some(0) {
            return bad("iter-budget", "0".into(), "must be positive");
        }
        if self.jobs == Some(0) {
            return bad("jobs", "0".into(), "must be at least 1");
        }
        self.params.validate()
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
    parse_instance(&text).map_err(|source| HarnessError::Instance { path: path.into(), source })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(with = "units")]
    pub best: HalfUnits,
    /// Seconds of wall time; absent under a work budget so that reports replay exactly.
    pub wall_seconds: Option<f64>,
    pub restarts: u64,
    pub windows_solved: u64,
    pub windows_improved: u64,
    pub work: u64,
    /// Best layout, 1-based facility ids left to right.
    pub layout: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    /// `"work:<units>"` or `"seconds:<limit>"`.
    pub budget: String,
    pub windows: bool,
    pub per_run: Vec<RunRecord>,
    #[serde(with = "units")]
    pub best: HalfUnits,
    pub avg: f64,
    /// Population standard deviation of the per-run bests.
    pub sd: f64,
}

mod units {
    use crate::instance::HalfUnits;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &HalfUnits, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.as_units())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HalfUnits, D::Error> {
        let x = f64::deserialize(d)?;
        Ok(HalfUnits((x * 2.0).round() as i64))
    }
}

/// Mean and population standard deviation.
pub fn summarize(values: &[HalfUnits]) -> (HalfUnits, f64, f64) {
    let best = values.iter().copied().min().unwrap_or(HalfUnits::ZERO);
    let n = values.len().max(1) as f64;
    let avg = values.iter().map(|v| v.as_units()).sum::<f64>() / n;
    let var = values.iter().map(|v| (v.as_units() - avg).powi(2)).sum::<f64>() / n;
    (best, avg, var.sqrt())
}

fn exporter(dir: &Path, run: usize, limit: usize) -> WindowObserver {
    let dir = dir.to_path_buf();
    let count = Arc::new(AtomicUsize::new(0));
    Arc::new(move |sub: &WindowSubproblem| {
        let k = count.fetch_add(1, Ordering::Relaxed);
        if k >= limit {
            return;
        }
        let (sw, ew) = sub.bounds.map_or((0, 0), |b| (b.sw() + 1, b.ew() + 1));
        let path = dir.join(format!("run{run:03}_window{k:04}_{sw}-{ew}.lp"));
        let text = export_model(&build_betweenness_model(sub, true), ModelFormat::Lp);
        if let Err(e) = fs::write(&path, text) {
            log::warn!("cannot write {}: {e}", path.display());
        }
    })
}

/// Runs `cfg.runs` independent searches with seeds `seed, seed + 1, ...`.
pub fn run_experiment(inst: &Instance, name: &str, cfg: &Config) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    if cfg.params.backend == Backend::BruteForce {
        if let Some(&ws) = cfg.params.wsv_msa.iter().chain(&cfg.params.wsv_refine).find(|&&ws| ws.min(inst.n()) > BRUTEFORCE_LIMIT) {
            return Err(ConfigError::Invalid { name: "window size", value: ws.to_string(), reason: "exceeds the bruteforce backend limit" }.into());
        }
    }
    if let Some(dir) = &cfg.export_mip {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Write { path: dir.clone(), source })?;
    }
    let limit = cfg.time_limit.unwrap_or_else(|| default_time_limit(inst.n()));
    let budget = match cfg.iter_budget {
        Some(w) => format!("work:{w}"),
        None => format!("seconds:{}", limit.as_secs_f64()),
    };
    let one = |r: usize| -> Result<RunRecord, SolveError> {
        let seed = cfg.seed.wrapping_add(r as u64);
        let deadline = match cfg.iter_budget {
            Some(w) => Deadline::Work(w),
            None => Deadline::after(limit),
        };
        let observer = cfg.export_mip.as_deref().map(|d| exporter(d, r + 1, cfg.export_limit));
        let started = Instant::now();
        let out = solve(inst, &cfg.params, seed, deadline, observer)?;
        let wall = started.elapsed().as_secs_f64();
        log::info!("run {} seed {seed}: F = {} after {} restarts", r + 1, out.best.f(), out.restarts);
        Ok(RunRecord {
            seed,
            best: out.best.f(),
            wall_seconds: cfg.iter_budget.is_none().then_some(wall),
            restarts: out.restarts,
            windows_solved: out.stats.windows_solved,
            windows_improved: out.stats.windows_improved,
            work: out.work,
            layout: out.best.perm().iter().map(|f| f + 1).collect(),
        })
    };
    let runs: Result<Vec<RunRecord>, SolveError> = match cfg.jobs {
        Some(1) => (0..cfg.runs).map(one).collect(),
        jobs => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|_| SolveError::Integrity)?;
            pool.install(|| (0..cfg.runs).into_par_iter().map(one).collect())
        }
    };
    let per_run = runs?;
    let values: Vec<HalfUnits> = per_run.iter().map(|r| r.best).collect();
    let (best, avg, sd) = summarize(&values);
    Ok(RunReport {
        instance: name.to_string(),
        n: inst.n(),
        budget,
        windows: !(cfg.params.wsv_msa.is_empty() && cfg.params.wsv_refine.is_empty()),
        per_run,
        best,
        avg,
        sd,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    TableText,
}

impl FromStr for ReportFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "table-text" | "table" | "text" => Ok(ReportFormat::TableText),
            other => Err(ConfigError::Invalid { name: "format", value: other.into(), reason: "expected json, csv or table-text" }),
        }
    }
}

const CSV_HEADER: [&str; 7] = ["run", "seed", "best", "wall_seconds", "restarts", "windows_solved", "windows_improved"];

pub fn emit_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::TableText => emit_table(report),
    }
}

fn wall(r: &RunRecord) -> String {
    r.wall_seconds.map_or(String::new(), |w| format!("{w:.3}"))
}

fn emit_csv(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# instance {} n {} budget {}", report.instance, report.n, report.budget);
    let _ = writeln!(out, "# best {} avg {:.1} sd {:.1} (population)", report.best, report.avg, report.sd);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for (i, r) in report.per_run.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.seed.to_string(),
            r.best.to_string(),
            wall(r),
            r.restarts.to_string(),
            r.windows_solved.to_string(),
            r.windows_improved.to_string(),
        ])
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8"));
    out
}

fn emit_table(report: &RunReport) -> String {
    let mut rows: Vec<[String; 7]> = vec![CSV_HEADER.map(String::from)];
    for (i, r) in report.per_run.iter().enumerate() {
        rows.push([
            (i + 1).to_string(),
            r.seed.to_string(),
            r.best.to_string(),
            wall(r),
            r.restarts.to_string(),
            r.windows_solved.to_string(),
            r.windows_improved.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = format!("instance {}  n = {}  budget {}\n", report.instance, report.n, report.budget);
    for r in &rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    let _ = writeln!(out, "BEST {}  AVG {:.1}  SD {:.1}", report.best, report.avg, report.sd);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_random_instance;

    fn quick(runs: usize) -> Config {
        Config {
            runs,
            iter_budget: Some(10_000_000),
            params: SaParams { z_hat: 5, ..SaParams::default() },
            ..Config::default()
        }
    }

    #[test]
    fn summary_statistics() {
        let (best, avg, sd) = summarize(&[HalfUnits(2), HalfUnits(4), HalfUnits(6)]);
        assert_eq!(best, HalfUnits(2));
        assert_eq!(avg, 2.0);
        assert!((sd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(summarize(&[HalfUnits(287)]), (HalfUnits(287), 143.5, 0.0));
    }

    #[test]
    fn runs_and_formats() {
        let inst = generate_random_instance(14, (1, 10), (0, 10), 1).unwrap();
        let rep = run_experiment(&inst, "rand14", &quick(3)).unwrap();
        assert_eq!(rep.per_run.len(), 3);
        assert!(rep.best.as_units() <= rep.avg && rep.sd >= 0.0);
        assert_eq!(rep.per_run.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(rep.per_run.iter().all(|r| r.wall_seconds.is_none()));

        let json = emit_report(&rep, ReportFormat::Json);
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);

        let csv_text = emit_report(&rep, ReportFormat::Csv);
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text.as_bytes());
        let parsed: Vec<HalfUnits> = rd.records().map(|r| HalfUnits::parse_units(&r.unwrap()[2]).unwrap()).collect();
        assert_eq!(parsed, rep.per_run.iter().map(|r| r.best).collect::<Vec<_>>());

        let table = emit_report(&rep, ReportFormat::TableText);
        assert!(table.contains(&format!("BEST {}", rep.best)));
    }

    #[test]
    fn single_run_and_identical_seeds() {
        let inst = generate_random_instance(10, (1, 10), (0, 10), 2).unwrap();
        let rep = run_experiment(&inst, "r", &quick(1)).unwrap();
        assert_eq!(rep.best.as_units(), rep.avg);
        assert_eq!(rep.sd, 0.0);
        // the same seed three times over
        let one = run_experiment(&inst, "r", &Config { seed: 4, ..quick(1) }).unwrap().per_run[0].best;
        let values = vec![one; 3];
        assert_eq!(summarize(&values).2, 0.0);
    }

    #[test]
    fn parallel_runs_match_sequential() {
        let inst = generate_random_instance(12, (1, 10), (0, 10), 3).unwrap();
        let a = run_experiment(&inst, "r", &Config { jobs: Some(1), ..quick(4) }).unwrap();
        let b = run_experiment(&inst, "r", &Config { jobs: Some(3), ..quick(4) }).unwrap();
        assert_eq!(emit_report(&a, ReportFormat::Json), emit_report(&b, ReportFormat::Json));
    }

    #[test]
    fn rejects_bad_config() {
        let inst = generate_random_instance(5, (1, 3), (0, 3), 0).unwrap();
        let err = run_experiment(&inst, "r", &Config { runs: 0, ..quick(1) }).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!("xml".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn exports_window_models() {
        let dir = tempfile::tempdir().unwrap();
        let inst = generate_random_instance(16, (1, 10), (0, 10), 5).unwrap();
        let cfg = Config { export_mip: Some(dir.path().to_path_buf()), export_limit: 4, ..quick(1) };
        run_experiment(&inst, "r", &cfg).unwrap();
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 4);
        for f in files {
            let text = fs::read_to_string(f.unwrap().path()).unwrap();
            assert!(text.contains("Subject To") && text.contains(" improve: "));
        }
    }
}

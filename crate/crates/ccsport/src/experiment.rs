//! Batch runs over an experiment grid and the reports built from them.
//!
//! A result tree looks like
//!
//! ```text
//! out/
//!   spec.toml                         canonical spec
//!   reference/<instance>.csv          cleaned reference fronts
//!   fronts/<instance>/<alg>/run-01.csv       archive of each run
//!   populations/<instance>/<alg>/run-01.csv  final population of each run
//!   metrics.csv
//!   summary/igd.csv, igd.txt, ih.csv, ih.txt
//!   compare/igd.csv, igd.txt, ih.csv, ih.txt
//!   plots/plot_fronts.py
//!   warnings.txt                      only when something was skipped
//! ```
//!
//! Indicators are computed on the archive after normalizing by the bounds
//! of the reference front.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use ccsport_core::metrics::{self, rank_sum_test, Comparison, MetricError};
use ccsport_core::moea::{self, Individual, RunError};
use ccsport_core::{FrontPoint, Point, ReferenceFront};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{run_seed, ConfigError, ExperimentSpec, ValidatedSpec};
use crate::formats::{self, CsvMeta, FormatError, FrontRow};
use crate::plot;

/// Significance level of the rank-sum comparisons.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{instance} / {algorithm} run {run}: {source}")]
    Run {
        instance: String,
        algorithm: String,
        run: usize,
        source: RunError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Tree(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// Indicator values of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub instance: String,
    pub algorithm: String,
    pub run: usize,
    pub seed: u64,
    pub igd: f64,
    pub ih: f64,
}

/// What a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub metrics: Vec<MetricRow>,
    pub warnings: Vec<String>,
    /// Report files relative to the result tree, with their contents.
    pub reports: Vec<(PathBuf, String)>,
}

pub fn front_path(instance: &str, algorithm: &str, run: usize) -> PathBuf {
    Path::new("fronts").join(instance).join(algorithm).join(format!("run-{:02}.csv", run + 1))
}

pub fn population_path(instance: &str, algorithm: &str, run: usize) -> PathBuf {
    Path::new("populations").join(instance).join(algorithm).join(format!("run-{:02}.csv", run + 1))
}

pub fn reference_path(instance: &str) -> PathBuf {
    Path::new("reference").join(format!("{instance}.csv"))
}

fn rows(members: &[Individual]) -> Vec<FrontRow> {
    let mut rows: Vec<FrontRow> = members
        .iter()
        .map(|m| FrontRow {
            risk: m.objectives[0],
            ret: -m.objectives[1],
            holdings: m
                .portfolio
                .selected()
                .iter()
                .map(|&a| (a, m.portfolio.lots()[a]))
                .collect(),
        })
        .collect();
    rows.sort_by(|a, b| a.risk.total_cmp(&b.risk).then(b.ret.total_cmp(&a.ret)));
    rows
}

fn minimization(rows: &[FrontRow]) -> Vec<Point> {
    rows.iter().map(|r| [r.risk, -r.ret]).collect()
}

fn write_reference(path: &Path, instance: &str, front: &ReferenceFront, removed: usize) -> Result<(), ExperimentError> {
    let meta = CsvMeta::new("reference").with("instance", instance).with("removed", removed);
    let mut s = meta.header_line();
    s.push_str("\nreturn,risk\n");
    for p in front.points() {
        let _ = writeln!(s, "{},{}", p.ret, p.risk);
    }
    write_file(path, &s)
}

fn read_reference(path: &Path) -> Result<ReferenceFront, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut points = Vec::new();
    for line in text.lines().skip(2).filter(|l| !l.is_empty()) {
        let (r, v) = line
            .split_once(',')
            .ok_or_else(|| ExperimentError::Tree(format!("{}: bad line {line:?}", path.display())))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| ExperimentError::Tree(format!("{}: bad number {s:?}", path.display())))
        };
        points.push(FrontPoint::new(parse(r)?, parse(v)?));
    }
    let (front, _) = ReferenceFront::from_points(points).map_err(FormatError::from)?;
    Ok(front)
}

/// Runs the whole grid, writes the result tree under `out`, and returns
/// the metrics. Runs execute on `workers` threads; every output file is
/// independent of the worker count.
pub fn run_experiment(v: &ValidatedSpec, out: &Path, workers: usize) -> Result<ExperimentReport, ExperimentError> {
    let spec = &v.spec;
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_file(&out.join("spec.toml"), &spec.canonical())?;
    let hash = spec.config_hash();

    let mut warnings = Vec::new();
    let mut references: Vec<Option<ReferenceFront>> = Vec::new();
    for entry in &spec.instances {
        match &entry.frontier {
            Some(path) if path.exists() => {
                let (front, removed) = formats::read_frontier(path)?;
                if removed > 0 {
                    log::info!("{}: dropped {removed} dominated frontier points", entry.name);
                }
                write_reference(&out.join(reference_path(&entry.name)), &entry.name, &front, removed)?;
                references.push(Some(front));
            }
            other => {
                let why = match other {
                    Some(p) => format!("frontier file {} not found", p.display()),
                    None => "no frontier given".to_string(),
                };
                let msg = format!("instance {}: {why}; metrics skipped, fronts still written", entry.name);
                log::warn!("{msg}");
                warnings.push(msg);
                references.push(None);
            }
        }
    }

    let mut jobs = Vec::new();
    for i in 0..spec.instances.len() {
        for a in 0..spec.algorithms.len() {
            for r in 0..spec.runs {
                jobs.push((i, a, r));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let results: Vec<Result<Option<MetricRow>, ExperimentError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, a, r)| {
                let entry = &spec.instances[i];
                let alg = &spec.algorithms[a];
                let slug = alg.slug();
                let seed = run_seed(spec.base_seed, &entry.name, &slug, r);
                let cfg = spec.parameters.run_config(alg, seed);
                let outcome = moea::run(&v.instances[i], &v.constraints[i], &cfg).map_err(|source| {
                    ExperimentError::Run {
                        instance: entry.name.clone(),
                        algorithm: slug.clone(),
                        run: r + 1,
                        source,
                    }
                })?;
                log::info!("{} / {} run {} done", entry.name, slug, r + 1);
                let lots = v.constraints[i].lots_per_unit();
                let meta = |what: &str| {
                    CsvMeta::new(what)
                        .with("instance", &entry.name)
                        .with("algorithm", &slug)
                        .with("run", r + 1)
                        .with("seed", seed)
                        .with("config_hash", &hash)
                        .with("evaluations", outcome.evaluations)
                };
                let archive = rows(&outcome.archive);
                for (path, what, data) in [
                    (front_path(&entry.name, &slug, r), "front", &archive),
                    (population_path(&entry.name, &slug, r), "population", &rows(&outcome.population)),
                ] {
                    let path = out.join(path);
                    fs::create_dir_all(path.parent().unwrap()).map_err(io_err(&path))?;
                    let file = File::create(&path).map_err(io_err(&path))?;
                    formats::write_front(BufWriter::new(file), &meta(what), data, lots)?;
                }
                match &references[i] {
                    Some(front) => {
                        let (igd, ih) = metrics::indicators(&minimization(&archive), front)?;
                        Ok(Some(MetricRow {
                            instance: entry.name.clone(),
                            algorithm: slug,
                            run: r + 1,
                            seed,
                            igd,
                            ih,
                        }))
                    }
                    None => Ok(None),
                }
            })
            .collect()
    });
    let mut metrics_rows = Vec::new();
    for r in results {
        if let Some(m) = r? {
            metrics_rows.push(m);
        }
    }

    let reports = render_reports(spec, &metrics_rows, &hash)?;
    for (path, text) in &reports {
        write_file(&out.join(path), text)?;
    }
    write_file(&out.join("plots").join("plot_fronts.py"), &plot::script(spec))?;
    let warn_path = out.join("warnings.txt");
    if warnings.is_empty() {
        if warn_path.exists() {
            fs::remove_file(&warn_path).map_err(io_err(&warn_path))?;
        }
    } else {
        write_file(&warn_path, &(warnings.join("\n") + "\n"))?;
    }
    Ok(ExperimentReport {
        metrics: metrics_rows,
        warnings,
        reports,
    })
}

/// Recomputes every metric and report from the per-run CSVs of an existing
/// result tree. Nothing is written.
pub fn summarize(out: &Path) -> Result<ExperimentReport, ExperimentError> {
    let spec_path = out.join("spec.toml");
    let text = fs::read_to_string(&spec_path).map_err(io_err(&spec_path))?;
    let spec = ExperimentSpec::parse(&text)?;
    let hash = spec.config_hash();
    let mut metrics_rows = Vec::new();
    let mut warnings = Vec::new();
    for entry in &spec.instances {
        let ref_path = out.join(reference_path(&entry.name));
        if !ref_path.exists() {
            warnings.push(format!("instance {}: no reference front in the result tree", entry.name));
            continue;
        }
        let front = read_reference(&ref_path)?;
        for alg in &spec.algorithms {
            let slug = alg.slug();
            for r in 0..spec.runs {
                let path = out.join(front_path(&entry.name, &slug, r));
                let file = File::open(&path).map_err(io_err(&path))?;
                let (meta, rows) = formats::read_front(BufReader::new(file))?;
                let seed = meta
                    .get("seed")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| ExperimentError::Tree(format!("{}: missing seed", path.display())))?;
                if meta.get("config_hash") != Some(hash.as_str()) {
                    return Err(ExperimentError::Tree(format!(
                        "{}: config hash differs from spec.toml",
                        path.display()
                    )));
                }
                let (igd, ih) = metrics::indicators(&minimization(&rows), &front)?;
                metrics_rows.push(MetricRow {
                    instance: entry.name.clone(),
                    algorithm: slug.clone(),
                    run: r + 1,
                    seed,
                    igd,
                    ih,
                });
            }
        }
    }
    let reports = render_reports(&spec, &metrics_rows, &hash)?;
    Ok(ExperimentReport {
        metrics: metrics_rows,
        warnings,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indicator {
    Igd,
    Ih,
}

impl Indicator {
    pub const ALL: [Indicator; 2] = [Indicator::Igd, Indicator::Ih];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Igd => "igd",
            Indicator::Ih => "ih",
        }
    }

    fn of(self, m: &MetricRow) -> f64 {
        match self {
            Indicator::Igd => m.igd,
            Indicator::Ih => m.ih,
        }
    }
}

/// `samples[instance][algorithm]` for every instance that has metrics, in
/// spec order.
pub fn samples(spec: &ExperimentSpec, rows: &[MetricRow], ind: Indicator) -> Vec<(String, Vec<Vec<f64>>)> {
    let mut by_key: BTreeMap<(&str, &str), Vec<(usize, f64)>> = BTreeMap::new();
    for m in rows {
        by_key.entry((&m.instance, &m.algorithm)).or_default().push((m.run, ind.of(m)));
    }
    let mut out = Vec::new();
    for entry in &spec.instances {
        let per_alg: Vec<Vec<f64>> = spec
            .algorithms
            .iter()
            .map(|a| {
                let mut v = by_key.get(&(entry.name.as_str(), a.slug().as_str())).cloned().unwrap_or_default();
                v.sort_by_key(|p| p.0);
                v.into_iter().map(|p| p.1).collect()
            })
            .collect();
        if per_alg.iter().all(|v| !v.is_empty()) {
            out.push((entry.name.clone(), per_alg));
        }
    }
    out
}

fn tally(outcomes: &[Comparison]) -> String {
    let count = |c| outcomes.iter().filter(|&&o| o == c).count();
    format!("{}/{}/{}", count(Comparison::Better), count(Comparison::Worse), count(Comparison::Equal))
}

/// Rank-sum outcome of `a` against `b` on one instance, or `None` when a
/// sample is too small to test.
fn outcome(a: &[f64], b: &[f64]) -> Option<Comparison> {
    rank_sum_test(a, b, ALPHA).ok().map(|r| r.outcome)
}

/// Renders metrics.csv and the summary and comparison reports.
pub fn render_reports(
    spec: &ExperimentSpec,
    rows: &[MetricRow],
    hash: &str,
) -> Result<Vec<(PathBuf, String)>, ExperimentError> {
    let mut files = Vec::new();
    let meta = CsvMeta::new("metrics")
        .with("config_hash", hash)
        .with("source", "archive")
        .with("normalization", "reference-front");
    let mut m = meta.header_line();
    m.push_str("\ninstance,algorithm,run,seed,igd,ih\n");
    let mut sorted = rows.to_vec();
    let inst_pos = |n: &str| spec.instances.iter().position(|i| i.name == n);
    let alg_pos = |n: &str| spec.algorithms.iter().position(|a| a.slug() == n);
    sorted.sort_by_key(|r| (inst_pos(&r.instance), alg_pos(&r.algorithm), r.run));
    for r in &sorted {
        let _ = writeln!(m, "{},{},{},{},{},{}", r.instance, r.algorithm, r.run, r.seed, r.igd, r.ih);
    }
    files.push((PathBuf::from("metrics.csv"), m));

    let labels: Vec<String> = spec.algorithms.iter().map(|a| a.display()).collect();
    let slugs: Vec<String> = spec.algorithms.iter().map(|a| a.slug()).collect();
    for ind in Indicator::ALL {
        let data = samples(spec, rows, ind);
        let (summary_csv, summary_txt) = summary_tables(spec, &data, &labels, &slugs, ind, hash)?;
        files.push((Path::new("summary").join(format!("{}.csv", ind.name())), summary_csv));
        files.push((Path::new("summary").join(format!("{}.txt", ind.name())), summary_txt));
        let (cmp_csv, cmp_txt) = comparison_tables(&data, &labels, &slugs, ind, hash);
        files.push((Path::new("compare").join(format!("{}.csv", ind.name())), cmp_csv));
        files.push((Path::new("compare").join(format!("{}.txt", ind.name())), cmp_txt));
    }
    Ok(files)
}

/// Three significant digits with a signed two-digit exponent, `1.61e-02`.
fn sci(v: f64) -> String {
    let s = format!("{v:.2e}");
    match s.split_once('e') {
        Some((m, e)) => {
            let (sign, digits) = e.strip_prefix('-').map_or(("+", e), |d| ("-", d));
            format!("{m}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn summary_tables(
    spec: &ExperimentSpec,
    data: &[(String, Vec<Vec<f64>>)],
    labels: &[String],
    slugs: &[String],
    ind: Indicator,
    hash: &str,
) -> Result<(String, String), ExperimentError> {
    let n_alg = labels.len();
    let means: Vec<Vec<f64>> = (0..n_alg)
        .map(|a| data.iter().map(|(_, s)| metrics::mean(&s[a])).collect())
        .collect();
    let ranks = metrics::rank_matrix(&means)?;
    let mean_rank = metrics::mean_rank(&means)?;

    let mut csv = CsvMeta::new("summary")
        .with("indicator", ind.name())
        .with("config_hash", hash)
        .header_line();
    csv.push_str("\ninstance,algorithm,mean,std,rank\n");
    let mut txt = format!("{} (mean[rank] / std over {} runs, lower is better)\n\n", ind.name().to_uppercase(), spec.runs);
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(14);
    let last_label = format!("+/-/= (vs {})", labels.last().map_or("", String::as_str));
    let lw = data.iter().map(|(n, _)| n.len() + 6).max().unwrap_or(0).max(last_label.len() + 2).max(16);
    let mut header = format!("{:<lw$}", "Algo.");
    for l in labels {
        let _ = write!(header, "{l:>width$}  ");
    }
    let _ = writeln!(txt, "{}", header.trim_end());
    for (i, (name, s)) in data.iter().enumerate() {
        let mut mean_line = format!("{:<lw$}", format!("{name:<w$}Mean", w = lw - 6));
        let mut std_line = format!("{:<lw$}", format!("{:<w$}Std", "", w = lw - 6));
        for a in 0..n_alg {
            let mean = means[a][i];
            let std = metrics::std_dev(&s[a]);
            let _ = writeln!(csv, "{name},{},{mean},{std},{}", slugs[a], ranks[a][i]);
            let cell = format!("{}[{}]", sci(mean), ranks[a][i]);
            let _ = write!(mean_line, "{cell:>width$}  ");
            let _ = write!(std_line, "{:>width$}  ", sci(std));
        }
        let _ = writeln!(txt, "{}", mean_line.trim_end());
        let _ = writeln!(txt, "{}", std_line.trim_end());
    }
    let mut mr_line = format!("{:<lw$}", "MeanRank");
    for a in 0..n_alg {
        let _ = writeln!(csv, "MeanRank,{},,,{}", slugs[a], mean_rank[a]);
        let _ = write!(mr_line, "{:>width$}  ", format!("{:.1}", mean_rank[a]));
    }
    let _ = writeln!(txt, "{}", mr_line.trim_end());

    // paired scheme comparisons: DCS against CCS with the same backend
    let mut pairs = Vec::new();
    for (d, alg) in spec.algorithms.iter().enumerate() {
        if alg.scheme != crate::config::SchemeName::Dcs {
            continue;
        }
        if let Some(c) = spec
            .algorithms
            .iter()
            .position(|o| o.scheme == crate::config::SchemeName::Ccs && o.backend == alg.backend)
        {
            pairs.push((d, c));
        }
    }
    if !pairs.is_empty() {
        let mut line = format!("{:<lw$}", "+/-/= (pairs)");
        for &(d, c) in &pairs {
            let outs: Option<Vec<Comparison>> = data.iter().map(|(_, s)| outcome(&s[d], &s[c])).collect();
            let cell = match outs {
                Some(o) => format!("{} ({} vs {})", tally(&o), labels[d], labels[c]),
                None => format!("n/a ({} vs {})", labels[d], labels[c]),
            };
            let _ = write!(line, "  {cell}");
        }
        let _ = writeln!(txt, "{}", line.trim_end());
    }
    // every algorithm against the last one listed
    if n_alg >= 2 {
        let last = n_alg - 1;
        let mut line = format!("{last_label:<lw$}");
        for a in 0..n_alg {
            let cell = if a == last {
                "-".to_string()
            } else {
                let outs: Option<Vec<Comparison>> = data.iter().map(|(_, s)| outcome(&s[a], &s[last])).collect();
                outs.map_or("n/a".to_string(), |o| tally(&o))
            };
            let _ = write!(line, "{cell:>width$}  ");
        }
        let _ = writeln!(txt, "{}", line.trim_end());
    }
    Ok((csv, txt))
}

fn comparison_tables(
    data: &[(String, Vec<Vec<f64>>)],
    labels: &[String],
    slugs: &[String],
    ind: Indicator,
    hash: &str,
) -> (String, String) {
    let n_alg = labels.len();
    let mut csv = CsvMeta::new("compare")
        .with("indicator", ind.name())
        .with("alpha", ALPHA)
        .with("config_hash", hash)
        .header_line();
    csv.push_str("\ninstance,algorithm,versus,outcome,u,z,p_value\n");
    let mut wins = vec![vec![Vec::new(); n_alg]; n_alg];
    for (name, s) in data {
        for a in 0..n_alg {
            for b in 0..n_alg {
                if a == b {
                    continue;
                }
                match rank_sum_test(&s[a], &s[b], ALPHA) {
                    Ok(r) => {
                        let _ = writeln!(
                            csv,
                            "{name},{},{},{},{},{},{}",
                            slugs[a],
                            slugs[b],
                            r.outcome.symbol(),
                            r.u,
                            r.z,
                            r.p_value
                        );
                        wins[a][b].push(r.outcome);
                    }
                    Err(_) => {
                        let _ = writeln!(csv, "{name},{},{},n/a,,,", slugs[a], slugs[b]);
                    }
                }
            }
        }
    }
    let mut txt = format!(
        "{} rank-sum outcomes of row against column, better/worse/equal over {} instance(s), alpha = {ALPHA}\n\n",
        ind.name().to_uppercase(),
        data.len()
    );
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(9);
    let _ = write!(txt, "{:<width$}", "");
    for l in labels {
        let _ = write!(txt, "  {l:>width$}");
    }
    txt.push('\n');
    for a in 0..n_alg {
        let _ = write!(txt, "{:<width$}", labels[a]);
        for b in 0..n_alg {
            let cell = if a == b {
                "-".to_string()
            } else if wins[a][b].len() == data.len() {
                tally(&wins[a][b])
            } else {
                "n/a".to_string()
            };
            let _ = write!(txt, "  {cell:>width$}");
        }
        txt.push('\n');
    }
    (csv, txt)
}

//! Experiment orchestration behind the command-line tool: simulations,
//! parameter sweeps, pair-chain steady states and dataset utilities. Every
//! command writes CSV files that start with a provenance comment.

mod config;
pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{sample_seed, ExperimentConfig, GraphFactory, NetworkSource, Overrides, SweepAxes, AXIS_NAMES};

use crate::chain::{self, generator_report, marginals, Marginals};
use crate::dataset::{
    bootstrap_connected_subgraph, graph_stats, largest_component, parse_edge_list, write_generic_csv, DatasetSpec,
    GraphStats, ParseReport,
};
use crate::engine::{run_ensemble_with, EnsembleStats, RunConfig, RunRecord, Sample};
use crate::graph::SignedGraph;
use crate::{Error, Result};

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Per-run summary row of `runs.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub steady: Sample,
    pub e_min: f64,
    pub clusters: usize,
    pub negative_cross_fraction: f64,
    pub flips_accepted: u64,
    pub epidemic_accepted: u64,
}

impl RunSummary {
    fn of(rec: &RunRecord) -> Self {
        RunSummary {
            seed: rec.seed,
            steady: rec.steady_state(),
            e_min: rec.e_min,
            clusters: rec.clusters.count,
            negative_cross_fraction: rec.clusters.negative_cross_fraction,
            flips_accepted: rec.counters.flips_accepted,
            epidemic_accepted: rec.counters.epidemic_accepted,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub stats: EnsembleStats,
    pub runs: Vec<RunSummary>,
    pub files: Vec<PathBuf>,
}

fn ensemble(cfg: &ExperimentConfig, run: &RunConfig) -> Result<(EnsembleStats, Vec<RunSummary>)> {
    let factory = cfg.graph_factory()?;
    let mut runs = Vec::with_capacity(cfg.runs);
    let stats = run_ensemble_with(|seed| factory.graph(seed), run, cfg.runs, |r| runs.push(RunSummary::of(r)))?;
    Ok((stats, runs))
}

/// Time-series CSV: one column per quantity for a single run, a mean and a
/// std column per quantity otherwise.
pub fn timeseries_csv(cfg: &ExperimentConfig, stats: &EnsembleStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", cfg.provenance());
    out.push_str("step,t");
    for f in Sample::FIELDS {
        if stats.runs > 1 {
            let _ = write!(out, ",{f}_mean,{f}_std");
        } else {
            let _ = write!(out, ",{f}");
        }
    }
    out.push('\n');
    for k in 0..stats.steps.len() {
        let _ = write!(out, "{},{}", stats.steps[k], stats.times[k]);
        for q in 0..Sample::FIELDS.len() {
            if stats.runs > 1 {
                let _ = write!(out, ",{},{}", stats.mean[k][q], stats.std[k][q]);
            } else {
                let _ = write!(out, ",{}", stats.mean[k][q]);
            }
        }
        out.push('\n');
    }
    out
}

fn runs_csv(cfg: &ExperimentConfig, runs: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", cfg.provenance());
    out.push_str("run,seed");
    for f in Sample::FIELDS {
        let _ = write!(out, ",{f}");
    }
    out.push_str(",run_e_min,clusters,negative_cross_fraction,flips_accepted,epidemic_accepted\n");
    for (k, r) in runs.iter().enumerate() {
        let _ = write!(out, "{k},{}", r.seed);
        for v in r.steady.values() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            r.e_min, r.clusters, r.negative_cross_fraction, r.flips_accepted, r.epidemic_accepted
        );
    }
    out
}

/// Runs the configured ensemble and writes `timeseries.csv`, `runs.csv` and,
/// if enabled, one SVG per quantity.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    cfg.validate()?;
    let (stats, runs) = ensemble(cfg, &cfg.run_config())?;
    let mut files = Vec::new();
    let ts = cfg.out.join("timeseries.csv");
    write_file(&ts, &timeseries_csv(cfg, &stats))?;
    files.push(ts);
    let rc = cfg.out.join("runs.csv");
    write_file(&rc, &runs_csv(cfg, &runs))?;
    files.push(rc);
    if cfg.svg {
        for (q, name) in Sample::FIELDS.iter().enumerate() {
            let ys: Vec<f64> = stats.mean.iter().map(|row| row[q]).collect();
            let label = if stats.runs > 1 { "mean" } else { "run" };
            let chart = svg::line_chart(name, "t", &stats.times, &[svg::Series { label, ys: &ys }]);
            let path = cfg.out.join(format!("{name}.svg"));
            write_file(&path, &chart)?;
            files.push(path);
        }
    }
    Ok(SimulateOutput { stats, runs, files })
}

/// Ensemble summary at one sweep coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub coords: Vec<f64>,
    /// Mean over runs of the per-run steady state.
    pub steady: Sample,
    pub rho_std: f64,
    pub e_min: f64,
}

/// Axes actually swept: the configured ones or the default 11×11 α×r₀ grid.
pub fn sweep_axes(cfg: &ExperimentConfig) -> SweepAxes {
    if cfg.sweep.is_empty() {
        SweepAxes::default_grid()
    } else {
        cfg.sweep.clone()
    }
}

fn cell_config(cfg: &ExperimentConfig, names: &[&str], coords: &[f64]) -> ExperimentConfig {
    let mut c = cfg.clone();
    for (name, &v) in names.iter().zip(coords) {
        match *name {
            "alpha" => c.params.alpha = v,
            "r0" => c.initial.r0 = v,
            "rho0" => c.initial.rho0 = v,
            // Pair with `beta_a_ratio` so `beta_a` follows.
            "beta" => c.params.beta = v,
            "kappa" => c.params.kappa = v,
            _ => unreachable!("unknown axis"),
        }
    }
    c
}

/// Runs every cell of the sweep grid and writes `sweep.csv`.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<(Vec<SweepCell>, PathBuf)> {
    let axes = sweep_axes(cfg);
    let names = axes.names();
    let coords = axes.cells();
    for c in &coords {
        cell_config(cfg, &names, c).validate()?;
    }
    let cells: Vec<SweepCell> = coords
        .par_iter()
        .map(|c| {
            let cc = cell_config(cfg, &names, c);
            let (stats, _) = ensemble(&cc, &cc.run_config())?;
            let steady = stats.steady_mean();
            let n = stats.steady.len() as f64;
            let var = stats.steady.iter().map(|s| (s.rho - steady.rho).powi(2)).sum::<f64>() / n;
            let e_min = stats.e_min.iter().sum::<f64>() / n;
            Ok(SweepCell { coords: c.clone(), steady, rho_std: var.sqrt(), e_min })
        })
        .collect::<Result<_>>()?;

    let mut out = String::new();
    let _ = writeln!(out, "{}", cfg.provenance());
    let _ = writeln!(out, "{},s_inf,a_inf,rho_inf,rho_std,r_inf,balanced_frac,E,E_p,E_tri,E_min", names.join(","));
    for cell in &cells {
        for v in &cell.coords {
            let _ = write!(out, "{v},");
        }
        let s = &cell.steady;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.s, s.a, s.rho, cell.rho_std, s.r, s.balanced_frac, s.e_total, s.e_pair, s.e_triad, cell.e_min
        );
    }
    let path = cfg.out.join("sweep.csv");
    write_file(&path, &out)?;
    Ok((cells, path))
}

/// Starting law for the pair chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairStart {
    /// Uniform over linked configurations.
    #[default]
    Uniform,
    /// Uniform over linked configurations without alert endpoints.
    NoAlert,
}

impl std::str::FromStr for PairStart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PairStart::Uniform),
            "no-alert" => Ok(PairStart::NoAlert),
            _ => Err(Error::Config(format!("unknown pair start `{s}` (uniform, no-alert)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateOutput {
    pub marginals: Marginals,
    pub residual: f64,
    pub multiplicity: usize,
    /// Human-readable summary with the marginal sum check and generator
    /// validity.
    pub report: String,
    pub files: Vec<PathBuf>,
}

/// Solves the pair chain and writes `stationary.csv`, `marginals.csv`,
/// `generator.csv` and `generator_rates.csv`.
pub fn cmd_steady_state(cfg: &ExperimentConfig, start: PairStart) -> Result<SteadyStateOutput> {
    let p = cfg.effective_params();
    let init = match start {
        PairStart::Uniform => chain::uniform_linked_initial(),
        PairStart::NoAlert => chain::no_alert_initial(),
    };
    let st = chain::pair_stationary(&p, Some(&init))?;
    let m = marginals(&st.pi);
    let g = generator_report(&p);
    let prov = cfg.provenance();
    let mut files = Vec::new();
    let mut emit = |name: &str, body: Vec<u8>| -> Result<()> {
        let path = cfg.out.join(name);
        let mut text = format!("{prov}\n");
        text.push_str(std::str::from_utf8(&body).expect("utf-8 csv"));
        write_file(&path, &text)?;
        files.push(path);
        Ok(())
    };
    let csv = |f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| {
        let mut buf = Vec::new();
        f(&mut buf).expect("write to memory");
        buf
    };
    emit("stationary.csv", csv(&|w| chain::write_stationary_csv(w, &st.pi)))?;
    emit("generator.csv", csv(&|w| chain::write_matrix_csv(w, &g.literal)))?;
    emit("generator_rates.csv", csv(&|w| chain::write_matrix_csv(w, &g.rates)))?;
    let sum = m.s + m.a + m.rho;
    emit(
        "marginals.csv",
        format!(
            "s_inf,a_inf,rho_inf,r_inf,sum,residual,multiplicity\n{},{},{},{},{},{},{}\n",
            m.s,
            m.a,
            m.rho,
            m.r,
            sum,
            st.residual,
            st.multiplicity()
        )
        .into_bytes(),
    )?;

    let mut report = String::new();
    let _ = writeln!(report, "s_inf = {:.6}  a_inf = {:.6}  rho_inf = {:.6}  r_inf = {:.6}", m.s, m.a, m.rho, m.r);
    let _ = writeln!(report, "s + a + rho = {sum:.15} (deviation {:.1e})", (sum - 1.0).abs());
    let _ = writeln!(report, "residual max|pi P - pi| = {:.3e}", st.residual);
    let _ = writeln!(report, "closed classes reached: {}", st.multiplicity());
    for c in st.classes.iter().filter(|c| c.weight > 0.0) {
        let labels: Vec<String> = c.states.iter().map(|&i| chain::pair_label(i)).collect();
        let _ = writeln!(report, "  weight {:.6} period {}: {}", c.weight, c.period, labels.join(" "));
    }
    if g.non_conservative.is_empty() {
        let _ = writeln!(report, "generator: every row conservative");
    } else {
        let labels: Vec<String> = g.non_conservative.iter().map(|&i| chain::pair_label(i)).collect();
        let _ = writeln!(
            report,
            "generator: {} rows diverge as dt -> 0 (O(1) sign flips): {}",
            labels.len(),
            labels.join(" ")
        );
    }
    Ok(SteadyStateOutput { marginals: m, residual: st.residual, multiplicity: st.multiplicity(), report, files })
}

fn stats_header() -> &'static str {
    "n,m,density,triads,triad_bound,positive_fraction,balanced_fraction"
}

fn stats_row(s: &GraphStats) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.n, s.m, s.density, s.triads, s.triad_bound, s.positive_fraction, s.balanced_fraction
    )
}

#[derive(Debug, Clone)]
pub struct DatasetStatsOutput {
    pub stats: GraphStats,
    pub report: ParseReport,
    pub path: PathBuf,
}

fn load(spec: &DatasetSpec, lcc: bool) -> Result<(SignedGraph, Vec<String>, ParseReport)> {
    let d = parse_edge_list(spec)?;
    if !lcc {
        return Ok((d.graph, d.labels, d.report));
    }
    let keep = largest_component(&d.graph);
    let labels = keep.iter().map(|&v| d.labels[v].clone()).collect();
    Ok((d.graph.induced(&keep), labels, d.report))
}

/// Parses a dataset and writes `stats.csv`.
pub fn cmd_dataset_stats(cfg: &ExperimentConfig, spec: &DatasetSpec, lcc: bool) -> Result<DatasetStatsOutput> {
    let (g, _, report) = load(spec, lcc)?;
    let stats = graph_stats(&g);
    let path = cfg.out.join("stats.csv");
    write_file(&path, &format!("{}\n{}\n{}\n", cfg.provenance(), stats_header(), stats_row(&stats)))?;
    Ok(DatasetStatsOutput { stats, report, path })
}

#[derive(Debug, Clone)]
pub struct BootstrapOutput {
    pub samples: Vec<GraphStats>,
    pub mean_density: f64,
    pub files: Vec<PathBuf>,
}

/// Draws `count` bootstrap samples of `size` nodes (sample `k` seeded by
/// `seed + k`), writes each as GenericCsv plus a `bootstrap.csv` summary.
pub fn cmd_dataset_bootstrap(
    cfg: &ExperimentConfig,
    spec: &DatasetSpec,
    lcc: bool,
    size: usize,
    count: usize,
) -> Result<BootstrapOutput> {
    if count == 0 {
        return Err(Error::Config("bootstrap needs at least one sample".into()));
    }
    let (g, labels, _) = load(spec, lcc)?;
    let base = cfg.initial.seed;
    let drawn: Vec<_> = (0..count as u64)
        .into_par_iter()
        .map(|k| bootstrap_connected_subgraph(&g, size, base.wrapping_add(k)))
        .collect::<Result<_>>()?;
    let mut files = Vec::new();
    let mut summary = format!("{}\nsample,sample_seed,seed_node,{}\n", cfg.provenance(), stats_header());
    let mut samples = Vec::with_capacity(count);
    for (k, s) in drawn.iter().enumerate() {
        let names: Vec<String> = s.nodes.iter().map(|&v| labels[v].clone()).collect();
        let mut buf = format!("{}\n", cfg.provenance()).into_bytes();
        write_generic_csv(&mut buf, &s.graph, Some(&names)).expect("write to memory");
        let path = cfg.out.join(format!("sample_{k:03}.csv"));
        write_file(&path, std::str::from_utf8(&buf).expect("utf-8 csv"))?;
        files.push(path);
        let st = graph_stats(&s.graph);
        let _ = writeln!(summary, "{k},{},{},{}", s.sample_seed, labels[s.seed_node], stats_row(&st));
        samples.push(st);
    }
    let path = cfg.out.join("bootstrap.csv");
    write_file(&path, &summary)?;
    files.push(path);
    let mean_density = samples.iter().map(|s| s.density).sum::<f64>() / count as f64;
    Ok(BootstrapOutput { samples, mean_density, files })
}

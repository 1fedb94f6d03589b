use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{bootstrap_connected_subgraph, largest_component, parse_edge_list, DatasetFormat, DatasetSpec};
use crate::dynamics::{AcceptanceGate, GateScope, Params};
use crate::energy::NormalizationMode;
use crate::engine::{InitialConditions, Rules, RunConfig};
use crate::graph::{Sign, SignedGraph};
use crate::{Error, Result};

/// Where the simulated network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSource {
    Complete {
        n: usize,
    },
    Dataset {
        path: PathBuf,
        format: DatasetFormat,
        /// Draw a fresh connected sample of this size for every run.
        #[serde(default)]
        bootstrap: Option<usize>,
        /// Restrict to the largest connected component first.
        #[serde(default)]
        largest_component: bool,
    },
}

impl Default for NetworkSource {
    fn default() -> Self {
        NetworkSource::Complete { n: 180 }
    }
}

/// Values swept by `sweep`; empty axes are not swept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub alpha: Vec<f64>,
    pub r0: Vec<f64>,
    pub rho0: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa: Vec<f64>,
}

pub const AXIS_NAMES: [&str; 5] = ["alpha", "r0", "rho0", "beta", "kappa"];

impl SweepAxes {
    fn axes(&self) -> [&Vec<f64>; 5] {
        [&self.alpha, &self.r0, &self.rho0, &self.beta, &self.kappa]
    }

    pub fn is_empty(&self) -> bool {
        self.axes().iter().all(|a| a.is_empty())
    }

    /// 11×11 grid over `alpha` and `r0` in `[0, 1]`.
    pub fn default_grid() -> Self {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        SweepAxes { alpha: grid.clone(), r0: grid, ..Default::default() }
    }

    /// Names of the non-empty axes.
    pub fn names(&self) -> Vec<&'static str> {
        AXIS_NAMES.iter().zip(self.axes()).filter(|(_, a)| !a.is_empty()).map(|(n, _)| *n).collect()
    }

    /// Cartesian product of the non-empty axes, first axis slowest.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in self.axes().into_iter().filter(|a| !a.is_empty()) {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        out
    }
}

/// Everything a command needs; loaded from JSON, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    pub params: Params,
    /// When set, `beta_a` follows `beta_a_ratio · beta`.
    pub beta_a_ratio: Option<f64>,
    pub initial: InitialConditions,
    pub steps: u64,
    pub runs: usize,
    pub sample_every: u64,
    pub stall_steps: Option<u64>,
    pub gate: AcceptanceGate,
    pub scope: GateScope,
    pub norm: NormalizationMode,
    pub sweep: SweepAxes,
    pub svg: bool,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let run = RunConfig::default();
        ExperimentConfig {
            network: NetworkSource::default(),
            params: run.params,
            beta_a_ratio: None,
            initial: run.initial,
            steps: run.steps,
            runs: 1,
            sample_every: run.sample_every,
            stall_steps: None,
            gate: AcceptanceGate::default(),
            scope: GateScope::default(),
            norm: NormalizationMode::default(),
            sweep: SweepAxes::default(),
            svg: false,
            out: PathBuf::from("out"),
            jobs: None,
        }
    }
}

/// Command-line overrides; any field that is set wins over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; run `i` uses `seed + i`.
    #[arg(long, global = true, env = "SIGNET_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Steps per run.
    #[arg(long, global = true)]
    pub steps: Option<u64>,
    #[arg(long, global = true)]
    pub sample_every: Option<u64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub rho0: Option<f64>,
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub beta_a: Option<f64>,
    /// Set `beta_a` to this multiple of `beta`.
    #[arg(long, global = true)]
    pub beta_a_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Energy used to accept proposals: total, triad or none.
    #[arg(long, global = true)]
    pub gate: Option<AcceptanceGate>,
    /// Proposals subject to the gate: flips, all or pair.
    #[arg(long, global = true)]
    pub scope: Option<GateScope>,
    /// Energy normalization: binomial or present.
    #[arg(long, global = true)]
    pub norm: Option<NormalizationMode>,
    /// Complete graph size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG line charts.
    #[arg(long, global = true)]
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with overrides applied.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut cfg = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(o);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let p = &mut self.params;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(p.dt, o.dt);
        set!(p.alpha, o.alpha);
        set!(p.beta, o.beta);
        set!(p.kappa, o.kappa);
        set!(p.delta, o.delta);
        if o.beta_a_ratio.is_some() {
            self.beta_a_ratio = o.beta_a_ratio;
        }
        if o.beta_a.is_some() {
            self.beta_a_ratio = None;
        }
        set!(self.params.beta_a, o.beta_a);
        set!(self.initial.seed, o.seed);
        set!(self.initial.rho0, o.rho0);
        set!(self.initial.r0, o.r0);
        set!(self.runs, o.runs);
        set!(self.steps, o.steps);
        set!(self.sample_every, o.sample_every);
        set!(self.gate, o.gate);
        set!(self.scope, o.scope);
        set!(self.norm, o.norm);
        set!(self.out, o.out.clone());
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
        if let Some(n) = o.n {
            self.network = NetworkSource::Complete { n };
        }
        self.svg |= o.svg;
    }

    /// Rates with the alert ratio applied.
    pub fn effective_params(&self) -> Params {
        match self.beta_a_ratio {
            Some(r) => self.params.with_alert_ratio(r),
            None => self.params,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            params: self.effective_params(),
            initial: self.initial,
            rules: Rules { gate: self.gate, scope: self.scope, norm: self.norm },
            steps: self.steps,
            sample_every: self.sample_every,
            stall_steps: self.stall_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.run_config().validate()?;
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        match &self.network {
            NetworkSource::Complete { n } if *n < 3 => {
                Err(Error::Config(format!("complete graph needs n >= 3, got {n}")))
            }
            NetworkSource::Dataset { path, .. } if !path.exists() => {
                Err(Error::Config(format!("dataset {} does not exist", path.display())))
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 of the result-relevant settings (output location and thread
    /// count excluded), as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.jobs = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `# signet <version> config=<hash> seed=<seed>`.
    pub fn provenance(&self) -> String {
        format!("# signet {} config={} seed={}", env!("CARGO_PKG_VERSION"), self.hash(), self.initial.seed)
    }

    pub fn dataset_spec(&self) -> Option<DatasetSpec> {
        match &self.network {
            NetworkSource::Dataset { path, format, .. } => Some(DatasetSpec { path: path.clone(), format: *format }),
            _ => None,
        }
    }

    /// Builds the per-run graph factory. Datasets are parsed once.
    pub fn graph_factory(&self) -> Result<GraphFactory> {
        Ok(match &self.network {
            NetworkSource::Complete { n } => GraphFactory::Fixed(SignedGraph::complete(*n, Sign::Positive)),
            NetworkSource::Dataset { path, format, bootstrap, largest_component: lcc } => {
                let data = parse_edge_list(&DatasetSpec { path: path.clone(), format: *format })?;
                let mut g = data.graph;
                if *lcc {
                    g = g.induced(&largest_component(&g));
                }
                match bootstrap {
                    Some(size) => GraphFactory::Bootstrap { source: g, size: *size },
                    None => GraphFactory::Fixed(g),
                }
            }
        })
    }
}

/// Produces the graph for each run seed.
#[derive(Debug, Clone)]
pub enum GraphFactory {
    Fixed(SignedGraph),
    Bootstrap { source: SignedGraph, size: usize },
}

/// Keeps the sampler's stream apart from the dynamics stream of the same run.
pub fn sample_seed(run_seed: u64) -> u64 {
    run_seed ^ 0x9e37_79b9_7f4a_7c15
}

impl GraphFactory {
    pub fn graph(&self, run_seed: u64) -> Result<SignedGraph> {
        match self {
            GraphFactory::Fixed(g) => Ok(g.clone()),
            GraphFactory::Bootstrap { source, size } => {
                Ok(bootstrap_connected_subgraph(source, *size, sample_seed(run_seed))?.graph)
            }
        }
    }
}

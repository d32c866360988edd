//! Resolved run configurations. Each command reads an optional JSON file
//! into its config struct and then applies any flags given on the command
//! line.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mbco::block::{MomentumGrid, SolverConfig};
use mbco::model::{AnnealSchedule, BondParity, ChainSpec};
use mbco::shim::FluxUpdate;
use mbco::spectral::{Detrend, Observable};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Parses a value enum through its serde names, so flags and JSON files
/// accept the same spellings.
pub fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Reads `path` into `T`, rejecting keys `T` does not know.
pub fn load<T: Default + Serialize + DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let known = serde_json::to_value(T::default()).expect("configs serialize");
    let (Some(given), Some(known)) = (value.as_object(), known.as_object()) else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    if let Some(key) = given.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Config(format!("{}: unknown key `{key}`", path.display())));
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

macro_rules! overlay {
    ($args:expr => $cfg:expr; $($field:ident),* $(,)?) => {
        $(if let Some(v) = &$args.$field { $cfg.$field = v.clone(); })*
    };
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Common {
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

impl Default for Common {
    fn default() -> Self {
        Self { out: PathBuf::from("mbco-out"), seed: 0, threads: 0 }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

impl CommonArgs {
    fn apply(&self, c: &mut Common) {
        overlay!(self => c; out, seed, threads);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainParams {
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub parity: BondParity,
    pub grid: MomentumGrid,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self { n: 160, j: 1.0, delta: 0.4, parity: BondParity::Even, grid: MomentumGrid::default() }
    }
}

impl ChainParams {
    pub fn chain(&self) -> Result<ChainSpec, CliError> {
        Ok(ChainSpec::new(self.n, self.j, self.delta, self.parity)?)
    }
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Number of spins (multiple of 4)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<f64>,
    /// Staggering: strong bonds J+Δ, weak bonds J−Δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sublattice carrying the strong bonds: even | odd
    #[arg(long, value_parser = parse_enum::<BondParity>)]
    pub parity: Option<BondParity>,
    /// Momentum grid: antiperiodic | periodic
    #[arg(long, value_parser = parse_enum::<MomentumGrid>)]
    pub grid: Option<MomentumGrid>,
}

impl ChainArgs {
    pub fn apply(&self, c: &mut ChainParams) {
        overlay!(self => c; n, j, delta, parity, grid);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Linear,
    HardwareLike,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleParams {
    pub schedule: ScheduleKind,
    /// Γ(0) in GHz.
    pub gamma0: f64,
    /// 𝒥(1) in GHz.
    pub jfinal: f64,
    /// Table with header `s,J_GHz,Gamma_GHz`, used when `schedule` is `csv`.
    pub schedule_csv: Option<PathBuf>,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { schedule: ScheduleKind::Linear, gamma0: 11.0, jfinal: 15.0, schedule_csv: None }
    }
}

impl ScheduleParams {
    pub fn build(&self) -> Result<AnnealSchedule, CliError> {
        Ok(match self.schedule {
            ScheduleKind::Linear => AnnealSchedule::linear(self.gamma0, self.jfinal)?,
            ScheduleKind::HardwareLike => AnnealSchedule::hardware_like(self.gamma0, self.jfinal)?,
            ScheduleKind::Csv => {
                let path = self
                    .schedule_csv
                    .as_ref()
                    .ok_or_else(|| CliError::Config("schedule `csv` needs --schedule-csv".into()))?;
                AnnealSchedule::from_csv_path(path)?
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleKind>,
    /// Initial transverse field Γ(0), GHz
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Final coupling envelope 𝒥(1), GHz
    #[arg(long)]
    pub jfinal: Option<f64>,
    #[arg(long)]
    pub schedule_csv: Option<PathBuf>,
}

impl ScheduleArgs {
    pub fn apply(&self, c: &mut ScheduleParams) {
        overlay!(self => c; schedule, gamma0, jfinal);
        if self.schedule_csv.is_some() {
            c.schedule_csv = self.schedule_csv.clone();
        }
    }
}

fn default_tol() -> f64 {
    SolverConfig::default().tol
}

// ---- sweep ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub common: Common,
    #[serde(flatten)]
    pub chain: ChainParams,
    #[serde(flatten)]
    pub schedule: ScheduleParams,
    /// Integrator tolerance on the final block amplitudes.
    pub tol: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    /// Transverse-field disorder strength d; absent for the clean chain.
    pub disorder: Option<f64>,
    pub realizations: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            common: Common::default(),
            chain: ChainParams::default(),
            schedule: ScheduleParams::default(),
            tol: default_tol(),
            tau_min: 5.0,
            tau_max: 25.0,
            tau_points: 200,
            disorder: None,
            realizations: 20,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_points: Option<usize>,
    #[arg(long)]
    pub disorder: Option<f64>,
    #[arg(long)]
    pub realizations: Option<usize>,
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<SweepConfig, CliError> {
        let mut c: SweepConfig = load(self.common.config.as_deref())?;
        self.common.apply(&mut c.common);
        self.chain.apply(&mut c.chain);
        self.schedule.apply(&mut c.schedule);
        overlay!(self => c; tol, tau_min, tau_max, tau_points, realizations);
        if self.disorder.is_some() {
            c.disorder = self.disorder;
        }
        Ok(c)
    }
}

/// `points` evenly spaced values on `[lo, hi]`; a single point sits at `lo`.
pub fn tau_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Config("tau_points must be >= 1".into()));
    }
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(CliError::Config(format!("invalid tau range [{lo}, {hi}]")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    if hi == lo {
        return Err(CliError::Config("tau_min = tau_max needs tau_points = 1".into()));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

// ---- spectrum ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumConfig {
    #[serde(flatten)]
    pub common: Common,
    #[serde(flatten)]
    pub chain: ChainParams,
    #[serde(flatten)]
    pub schedule: ScheduleParams,
    pub tol: f64,
    /// Existing `tau_ns,P,K,stderr_P` table; when absent a sweep is run.
    pub input: Option<PathBuf>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub disorder: Option<f64>,
    pub realizations: usize,
    pub observable: Observable,
    pub window: [f64; 2],
    pub detrend: Detrend,
    /// Simulated anneals per τ for the noise estimate.
    pub shots: Option<usize>,
    pub n_series: usize,
    pub baseline_band: Option<[f64; 2]>,
    pub search_band: Option<[f64; 2]>,
    pub gamma0_list: Option<Vec<f64>>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            common: Common::default(),
            chain: ChainParams::default(),
            schedule: ScheduleParams::default(),
            tol: default_tol(),
            input: None,
            tau_min: 0.0,
            tau_max: 20.0,
            tau_points: 1001,
            disorder: None,
            realizations: 20,
            observable: Observable::P,
            window: [0.0, 20.0],
            detrend: Detrend::Mean,
            shots: None,
            n_series: 200,
            baseline_band: None,
            search_band: None,
            gamma0_list: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Read P(τ) from this CSV instead of running a sweep
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_points: Option<usize>,
    #[arg(long)]
    pub disorder: Option<f64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// P | K
    #[arg(long, value_parser = parse_enum::<Observable>)]
    pub observable: Option<Observable>,
    /// τ window in ns
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub window: Option<Vec<f64>>,
    /// none | mean | linear
    #[arg(long, value_parser = parse_enum::<Detrend>)]
    pub detrend: Option<Detrend>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub n_series: Option<usize>,
    /// Frequency band (GHz) for the flat noise baseline
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub baseline_band: Option<Vec<f64>>,
    /// Frequency band (GHz) searched for the peak
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub search_band: Option<Vec<f64>>,
    /// Comma-separated Γ(0) values, GHz
    #[arg(long, value_delimiter = ',')]
    pub gamma0_list: Option<Vec<f64>>,
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

impl SpectrumArgs {
    pub fn resolve(&self) -> Result<SpectrumConfig, CliError> {
        let mut c: SpectrumConfig = load(self.common.config.as_deref())?;
        self.common.apply(&mut c.common);
        self.chain.apply(&mut c.chain);
        self.schedule.apply(&mut c.schedule);
        overlay!(self => c; tol, tau_min, tau_max, tau_points, realizations, observable, detrend, n_series);
        if let Some(w) = &self.window {
            c.window = pair(w);
        }
        if let Some(b) = &self.baseline_band {
            c.baseline_band = Some(pair(b));
        }
        if let Some(b) = &self.search_band {
            c.search_band = Some(pair(b));
        }
        if self.input.is_some() {
            c.input = self.input.clone();
        }
        if self.disorder.is_some() {
            c.disorder = self.disorder;
        }
        if self.shots.is_some() {
            c.shots = self.shots;
        }
        if self.gamma0_list.is_some() {
            c.gamma0_list = self.gamma0_list.clone();
        }
        Ok(c)
    }
}

// ---- shim ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ShimRunConfig {
    #[serde(flatten)]
    pub common: Common,
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub parity: BondParity,
    /// Hidden per-qubit biases are drawn as ±`bias`.
    pub bias: f64,
    /// Coupler gains are drawn uniformly from `1 ± coupler_spread`.
    pub coupler_spread: f64,
    pub t_eff: f64,
    pub sweeps: usize,
    pub iterations: usize,
    pub shots: usize,
    pub gauges: usize,
    pub eta_phi: f64,
    pub eta_j: f64,
    pub m_threshold: f64,
    pub p_threshold: f64,
    pub flux_update: FluxUpdate,
    pub coupler_scale: f64,
}

impl Default for ShimRunConfig {
    fn default() -> Self {
        let d = mbco::shim::ShimConfig::default();
        Self {
            common: Common::default(),
            n: 160,
            j: 1.0,
            delta: 0.3,
            parity: BondParity::Even,
            bias: 0.05,
            coupler_spread: 0.0,
            t_eff: 1.0,
            sweeps: 20,
            iterations: d.n_iterations,
            shots: d.shots,
            gauges: d.n_gauges,
            eta_phi: d.eta_phi,
            eta_j: d.eta_j,
            m_threshold: d.m_threshold,
            p_threshold: d.p_threshold,
            flux_update: d.flux_update,
            coupler_scale: d.coupler_scale,
        }
    }
}

#[derive(Debug, Args)]
pub struct ShimArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = parse_enum::<BondParity>)]
    pub parity: Option<BondParity>,
    /// Magnitude of the injected per-qubit biases
    #[arg(long)]
    pub bias: Option<f64>,
    /// Relative spread of the injected coupler gains
    #[arg(long)]
    pub coupler_spread: Option<f64>,
    #[arg(long)]
    pub t_eff: Option<f64>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub gauges: Option<usize>,
    #[arg(long)]
    pub eta_phi: Option<f64>,
    #[arg(long)]
    pub eta_j: Option<f64>,
    #[arg(long)]
    pub m_threshold: Option<f64>,
    #[arg(long)]
    pub p_threshold: Option<f64>,
    /// per-qubit | orbit
    #[arg(long, value_parser = parse_enum::<FluxUpdate>)]
    pub flux_update: Option<FluxUpdate>,
    #[arg(long)]
    pub coupler_scale: Option<f64>,
}

impl ShimArgs {
    pub fn resolve(&self) -> Result<ShimRunConfig, CliError> {
        let mut c: ShimRunConfig = load(self.common.config.as_deref())?;
        self.common.apply(&mut c.common);
        overlay!(self => c; n, j, delta, parity, bias, coupler_spread, t_eff, sweeps, iterations, shots,
            gauges, eta_phi, eta_j, m_threshold, p_threshold, flux_update, coupler_scale);
        Ok(c)
    }
}

// ---- oracle ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    #[serde(flatten)]
    pub common: Common,
    pub n: usize,
    pub j: f64,
    pub delta: f64,
    pub parity: BondParity,
    #[serde(flatten)]
    pub schedule: ScheduleParams,
    pub taus: Vec<f64>,
    pub disorder: Option<f64>,
    /// Largest accepted |block − ED| difference.
    pub tol: f64,
    pub integrator_tol: f64,
    pub ed_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            common: Common::default(),
            n: 8,
            j: 1.0,
            delta: 0.4,
            parity: BondParity::Even,
            schedule: ScheduleParams { gamma0: 2.0, jfinal: 2.0, ..ScheduleParams::default() },
            taus: vec![0.5, 1.0, 3.0, 6.0],
            disorder: None,
            tol: 1e-6,
            integrator_tol: default_tol(),
            ed_tol: 1e-9,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = parse_enum::<BondParity>)]
    pub parity: Option<BondParity>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Comma-separated anneal times, ns
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub disorder: Option<f64>,
    /// Largest accepted |block − ED| difference
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub integrator_tol: Option<f64>,
    #[arg(long)]
    pub ed_tol: Option<f64>,
}

impl OracleArgs {
    pub fn resolve(&self) -> Result<OracleConfig, CliError> {
        let mut c: OracleConfig = load(self.common.config.as_deref())?;
        self.common.apply(&mut c.common);
        self.schedule.apply(&mut c.schedule);
        overlay!(self => c; n, j, delta, parity, taus, tol, integrator_tol, ed_tol);
        if self.disorder.is_some() {
            c.disorder = self.disorder;
        }
        Ok(c)
    }
}

// ---- feasibility ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FeasibilityConfig {
    #[serde(flatten)]
    pub common: Common,
    pub tau_max: f64,
    pub delta_tau: f64,
    /// Oscillation frequency, GHz.
    pub omega: f64,
    /// Device temperature, mK.
    pub t_device: f64,
    /// Coherence window, ns.
    pub coherence: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self {
            common: Common::default(),
            tau_max: 20.0,
            delta_tau: 0.02,
            omega: 5.4,
            t_device: 12.0,
            coherence: mbco::model::DEFAULT_COHERENCE_NS,
        }
    }
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Longest anneal time, ns
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// τ sampling step, ns
    #[arg(long)]
    pub delta_tau: Option<f64>,
    /// Oscillation frequency, GHz
    #[arg(long)]
    pub omega: Option<f64>,
    /// Device temperature, mK
    #[arg(long)]
    pub t_device: Option<f64>,
    /// Coherence window, ns
    #[arg(long)]
    pub coherence: Option<f64>,
}

impl FeasibilityArgs {
    pub fn resolve(&self) -> Result<FeasibilityConfig, CliError> {
        let mut c: FeasibilityConfig = load(self.common.config.as_deref())?;
        self.common.apply(&mut c.common);
        overlay!(self => c; tau_max, delta_tau, omega, t_device, coherence);
        Ok(c)
    }
}

//! Orbit-based shimming of flux-bias offsets and couplers, run against a
//! classical Metropolis sampler with injected miscalibrations.
//!
//! Sign conventions. The sampler's energy is
//! `E(z) = Σ_b J_b z_b z_{b+1} − Σ_i h_i z_i`, so a positive field raises
//! `⟨z_i⟩` and `J > 0` is antiferromagnetic. Logical fields are gauged
//! with the couplers; flux-bias offsets `φ` and hidden biases act on the
//! hardware qubits and are not gauged. Magnetizations fed to the shim are
//! measured in the hardware frame, where gauge averaging cancels cross
//! talk between qubits and leaves each `m_i` proportional to its own
//! residual offset.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChainSpec;

/// Qubit orbits `[even sites, odd sites]` and coupler orbits
/// `[strong bonds, weak bonds]` of the staggered ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPartition {
    pub qubit_orbits: Vec<Vec<usize>>,
    pub coupler_orbits: Vec<Vec<usize>>,
}

impl OrbitPartition {
    /// Checks that both families partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (what, family) in [("qubit", &self.qubit_orbits), ("coupler", &self.coupler_orbits)] {
            let mut seen = vec![false; n];
            for &i in family.iter().flatten() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!("{what} orbits do not partition 0..{n}")));
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidArgument(format!("{what} orbits do not cover 0..{n}")));
            }
        }
        Ok(())
    }
}

pub fn build_orbits(chain: &ChainSpec) -> OrbitPartition {
    let n = chain.n();
    let (strong, weak): (Vec<usize>, Vec<usize>) = (0..n).partition(|&b| chain.is_strong(b));
    OrbitPartition {
        qubit_orbits: vec![(0..n).step_by(2).collect(), (1..n).step_by(2).collect()],
        coupler_orbits: vec![strong, weak],
    }
}

/// Ising problem on a ring: coupler `b` joins qubits `b` and `b + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingProblem {
    pub couplers: Vec<f64>,
    pub fields: Vec<f64>,
}

impl RingProblem {
    pub fn new(couplers: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        if couplers.len() != fields.len() {
            return Err(Error::DimensionMismatch { expected: couplers.len(), got: fields.len() });
        }
        if couplers.len() < 3 {
            return Err(Error::InvalidArgument("ring needs at least 3 qubits".into()));
        }
        Ok(Self { couplers, fields })
    }

    pub fn n(&self) -> usize {
        self.couplers.len()
    }

    pub fn energy(&self, z: &[i8]) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| self.couplers[i] * f64::from(z[i] * z[(i + 1) % n]) - self.fields[i] * f64::from(z[i]))
            .sum()
    }

    fn gauged(&self, g: &[i8]) -> Self {
        let n = self.n();
        Self {
            couplers: (0..n).map(|b| f64::from(g[b] * g[(b + 1) % n]) * self.couplers[b]).collect(),
            fields: (0..n).map(|i| f64::from(g[i]) * self.fields[i]).collect(),
        }
    }
}

/// Anything that returns `shots` spin configurations (row-major, `±1`)
/// for a hardware-frame problem.
pub trait Sampler: Sync {
    fn sample(&self, problem: &RingProblem, shots: usize, seed: u64) -> std::result::Result<Vec<i8>, String>;
}

/// Simulated device: Metropolis sampling with hidden per-qubit offsets and
/// per-coupler gain errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySamplerConfig {
    /// Added to every hardware field.
    pub hidden_bias: Vec<f64>,
    /// Multiplies every hardware coupler; `1` is a perfect coupler.
    pub coupler_error: Vec<f64>,
    pub t_eff: f64,
    /// Metropolis sweeps per read, starting from a random configuration.
    /// A sweep is `N` single-spin updates at random sites.
    pub sweeps: usize,
    pub seed: u64,
}

impl NoisySamplerConfig {
    /// A perfectly calibrated device.
    pub fn clean(n: usize, t_eff: f64, sweeps: usize, seed: u64) -> Self {
        Self { hidden_bias: vec![0.0; n], coupler_error: vec![1.0; n], t_eff, sweeps, seed }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.hidden_bias.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.hidden_bias.len() });
        }
        if self.coupler_error.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.coupler_error.len() });
        }
        if !(self.t_eff > 0.0) {
            return Err(Error::InvalidArgument(format!("T_eff = {} must be positive", self.t_eff)));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidArgument("sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

impl Sampler for NoisySamplerConfig {
    fn sample(&self, problem: &RingProblem, shots: usize, seed: u64) -> std::result::Result<Vec<i8>, String> {
        metropolis(problem, self, shots, seed).map_err(|e| e.to_string())
    }
}

/// `shots` reads of the miscalibrated device, using `config.seed`.
pub fn noisy_sampler(problem: &RingProblem, config: &NoisySamplerConfig, shots: usize) -> Result<Vec<i8>> {
    metropolis(problem, config, shots, config.seed)
}

fn metropolis(problem: &RingProblem, config: &NoisySamplerConfig, shots: usize, seed: u64) -> Result<Vec<i8>> {
    let n = problem.n();
    config.validate(n)?;
    let couplers: Vec<f64> = problem.couplers.iter().zip(&config.coupler_error).map(|(j, c)| j * c).collect();
    let fields: Vec<f64> = problem.fields.iter().zip(&config.hidden_bias).map(|(h, b)| h + b).collect();
    let beta = 1.0 / config.t_eff;
    let mut out = vec![0i8; shots * n];
    out.par_chunks_mut(n).enumerate().for_each(|(read, z)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(read as u64);
        for s in z.iter_mut() {
            *s = if rng.random::<bool>() { 1 } else { -1 };
        }
        for _ in 0..config.sweeps {
            for _ in 0..n {
                let i = rng.random_range(0..n);
                let left = (i + n - 1) % n;
                let local = couplers[left] * f64::from(z[left]) + couplers[i] * f64::from(z[(i + 1) % n]) - fields[i];
                // flipping z_i changes E by −2 z_i · local
                let de = -2.0 * f64::from(z[i]) * local;
                if de <= 0.0 || rng.random::<f64>() < (-beta * de).exp() {
                    z[i] = -z[i];
                }
            }
        }
    });
    Ok(out)
}

/// Shots in the logical frame, tagged with the gauge they were drawn in.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    spins: Vec<i8>,
    gauge_of_shot: Vec<usize>,
    gauges: Vec<Vec<i8>>,
}

impl SampleSet {
    /// Samples drawn without gauging.
    pub fn plain(n: usize, spins: Vec<i8>) -> Result<Self> {
        if n == 0 || spins.len() % n != 0 {
            return Err(Error::InvalidArgument("spin array is not a whole number of shots".into()));
        }
        let shots = spins.len() / n;
        Ok(Self { n, spins, gauge_of_shot: vec![0; shots], gauges: vec![vec![1; n]] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> usize {
        self.gauge_of_shot.len()
    }

    pub fn gauges(&self) -> &[Vec<i8>] {
        &self.gauges
    }

    /// Logical-frame configuration of one shot.
    pub fn shot(&self, s: usize) -> &[i8] {
        &self.spins[s * self.n..(s + 1) * self.n]
    }

    fn hardware_spin(&self, s: usize, i: usize) -> i8 {
        self.spins[s * self.n + i] * self.gauges[self.gauge_of_shot[s]][i]
    }

    /// `⟨z_i⟩` in the logical frame.
    pub fn logical_magnetization(&self, i: usize) -> f64 {
        let sum: i64 = (0..self.shots()).map(|s| i64::from(self.shot(s)[i])).sum();
        sum as f64 / self.shots() as f64
    }

    /// `⟨z_i⟩` of the physical qubit.
    pub fn hardware_magnetization(&self, i: usize) -> f64 {
        let sum: i64 = (0..self.shots()).map(|s| i64::from(self.hardware_spin(s, i))).sum();
        sum as f64 / self.shots() as f64
    }

    /// Per-qubit hardware magnetizations.
    pub fn hardware_magnetizations(&self) -> Vec<f64> {
        let mut sums = vec![0i64; self.n];
        for s in 0..self.shots() {
            let g = &self.gauges[self.gauge_of_shot[s]];
            for (i, (sum, (&z, &gi))) in sums.iter_mut().zip(self.shot(s).iter().zip(g)).enumerate() {
                let _ = i;
                *sum += i64::from(z * gi);
            }
        }
        sums.iter().map(|&v| v as f64 / self.shots() as f64).collect()
    }

    /// `⟨z_i z_j⟩`, identical in both frames.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let sum: i64 = (0..self.shots()).map(|s| i64::from(self.shot(s)[i] * self.shot(s)[j])).sum();
        sum as f64 / self.shots() as f64
    }
}

/// Derived seed for sub-task `index` of `seed`.
fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Samples `problem` under `n_gauges` random spin-reversal gauges and
/// returns every shot in the logical frame. `flux_offsets` are added to
/// the hardware fields of every gauge without being transformed. Gauge 0
/// is the identity when `n_gauges == 1`.
pub fn gauge_sample<S: Sampler + ?Sized>(
    sampler: &S,
    problem: &RingProblem,
    flux_offsets: &[f64],
    n_gauges: usize,
    shots_per_gauge: usize,
    seed: u64,
) -> Result<SampleSet> {
    let n = problem.n();
    if n_gauges == 0 {
        return Err(Error::InvalidArgument("n_gauges must be >= 1".into()));
    }
    if flux_offsets.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: flux_offsets.len() });
    }
    let gauges: Vec<Vec<i8>> = (0..n_gauges)
        .map(|g| {
            if n_gauges == 1 {
                return vec![1; n];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(g as u64);
            (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
        })
        .collect();
    let mut spins = Vec::with_capacity(n_gauges * shots_per_gauge * n);
    let mut gauge_of_shot = Vec::with_capacity(n_gauges * shots_per_gauge);
    for (gi, g) in gauges.iter().enumerate() {
        let mut hw = problem.gauged(g);
        for (h, phi) in hw.fields.iter_mut().zip(flux_offsets) {
            *h += phi;
        }
        let raw = sampler
            .sample(&hw, shots_per_gauge, sub_seed(seed, (1 << 32) + gi as u64))
            .map_err(|reason| Error::Sampler { gauge: gi, reason })?;
        if raw.len() != shots_per_gauge * n {
            return Err(Error::Sampler { gauge: gi, reason: format!("returned {} spins", raw.len()) });
        }
        for shot in raw.chunks(n) {
            spins.extend(shot.iter().zip(g).map(|(z, gi)| z * gi));
            gauge_of_shot.push(gi);
        }
    }
    Ok(SampleSet { n, spins, gauge_of_shot, gauges })
}

/// `(1 + sgn(J)·⟨z_i z_j⟩)/2` for the coupler joining `i` and `j`.
pub fn frustration_prob(samples: &SampleSet, i: usize, j: usize, coupling: f64) -> Result<f64> {
    if coupling == 0.0 || !coupling.is_finite() {
        return Err(Error::InvalidArgument(format!("coupler ({i}, {j}) has strength {coupling}")));
    }
    if samples.shots() == 0 {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    Ok(0.5 * (1.0 + coupling.signum() * samples.correlation(i, j)))
}

/// How flux offsets respond to magnetization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxUpdate {
    /// `φ_i ← φ_i − η_φ m_i`: each qubit follows its own magnetization.
    #[default]
    PerQubit,
    /// `φ_i ← φ_i − η_φ m_O` for every `i` in orbit `O`.
    Orbit,
}

/// Statistics consumed by one shim update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimStats {
    /// Hardware-frame `⟨z_i⟩` per qubit.
    pub magnetization: Vec<f64>,
    pub p_frust: Vec<f64>,
}

impl ShimStats {
    pub fn from_samples(samples: &SampleSet, couplers: &[f64]) -> Result<Self> {
        let n = samples.n();
        let p_frust = (0..n)
            .map(|b| frustration_prob(samples, b, (b + 1) % n, couplers[b]))
            .collect::<Result<_>>()?;
        Ok(Self { magnetization: samples.hardware_magnetizations(), p_frust })
    }

    pub fn orbit_magnetization(&self, orbits: &OrbitPartition) -> Vec<f64> {
        orbits.qubit_orbits.iter().map(|o| mean(o.iter().map(|&i| self.magnetization[i]))).collect()
    }

    /// Population standard deviation of `p_frust` within each coupler orbit.
    pub fn orbit_frustration_std(&self, orbits: &OrbitPartition) -> Vec<f64> {
        orbits
            .coupler_orbits
            .iter()
            .map(|o| {
                let m = mean(o.iter().map(|&b| self.p_frust[b]));
                mean(o.iter().map(|&b| (self.p_frust[b] - m).powi(2))).sqrt()
            })
            .collect()
    }

    /// Spread of per-qubit magnetizations across the chain.
    pub fn sigma_mtilde(&self) -> f64 {
        let m = mean(self.magnetization.iter().copied());
        mean(self.magnetization.iter().map(|x| (x - m).powi(2))).sqrt()
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        0.0
    } else {
        xs.sum::<f64>() / n as f64
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimRecord {
    pub iter: usize,
    pub orbit_m: Vec<f64>,
    pub orbit_std_pfrust: Vec<f64>,
    pub sigma_mtilde: f64,
    /// Per-qubit magnetizations, for histograms.
    pub magnetization: Vec<f64>,
    /// State at the time the samples were drawn.
    pub phi: Vec<f64>,
    pub j_prog: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimState {
    pub phi: Vec<f64>,
    pub j_prog: Vec<f64>,
    pub eta_phi: f64,
    pub eta_j: f64,
    pub flux_update: FluxUpdate,
    pub iteration: usize,
    pub history: Vec<ShimRecord>,
}

impl ShimState {
    pub fn new(j_prog: Vec<f64>, eta_phi: f64, eta_j: f64) -> Result<Self> {
        if !(eta_phi > 0.0 && eta_j > 0.0) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if j_prog.iter().any(|j| !(j.abs() <= 1.0)) {
            return Err(Error::InvalidArgument("programmed couplers must lie in [-1, 1]".into()));
        }
        Ok(Self {
            phi: vec![0.0; j_prog.len()],
            j_prog,
            eta_phi,
            eta_j,
            flux_update: FluxUpdate::default(),
            iteration: 0,
            history: Vec::new(),
        })
    }
}

/// One proportional update. Flux offsets move against the magnetization;
/// within each coupler orbit, couplers that are frustrated more often than
/// the orbit average are strengthened (`|J|` grows) and the others
/// weakened. The coupler correction has zero orbit mean, so each orbit's
/// mean programmed strength is unchanged unless clamping to `[−1, 1]`
/// intervenes.
pub fn shim_step(state: &ShimState, stats: &ShimStats, orbits: &OrbitPartition) -> ShimState {
    let mut next = state.clone();
    match state.flux_update {
        FluxUpdate::PerQubit => {
            for (phi, m) in next.phi.iter_mut().zip(&stats.magnetization) {
                *phi -= state.eta_phi * m;
            }
        }
        FluxUpdate::Orbit => {
            for (orbit, m) in orbits.qubit_orbits.iter().zip(stats.orbit_magnetization(orbits)) {
                for &i in orbit {
                    next.phi[i] -= state.eta_phi * m;
                }
            }
        }
    }
    for orbit in &orbits.coupler_orbits {
        let p_mean = mean(orbit.iter().map(|&b| stats.p_frust[b]));
        for &b in orbit {
            let delta = stats.p_frust[b] - p_mean;
            let j = state.j_prog[b];
            next.j_prog[b] = (j + state.eta_j * j.signum() * delta).clamp(-1.0, 1.0);
        }
    }
    next.iteration += 1;
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimConfig {
    pub eta_phi: f64,
    pub eta_j: f64,
    pub n_iterations: usize,
    /// Shots per iteration, split evenly across gauges.
    pub shots: usize,
    pub n_gauges: usize,
    pub m_threshold: f64,
    pub p_threshold: f64,
    pub flux_update: FluxUpdate,
    /// Largest programmed `|J|`; the chain couplings are scaled to it.
    pub coupler_scale: f64,
}

impl Default for ShimConfig {
    fn default() -> Self {
        Self {
            eta_phi: 0.05,
            eta_j: 0.05,
            n_iterations: 50,
            shots: 10_000,
            n_gauges: 10,
            m_threshold: 0.01,
            p_threshold: 0.01,
            flux_update: FluxUpdate::PerQubit,
            coupler_scale: 0.8,
        }
    }
}

impl ShimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if self.n_gauges == 0 || self.shots < self.n_gauges {
            return Err(Error::InvalidArgument("need at least one shot per gauge".into()));
        }
        if !(self.coupler_scale > 0.0 && self.coupler_scale <= 1.0) {
            return Err(Error::InvalidArgument("coupler scale must lie in (0, 1]".into()));
        }
        if !(self.m_threshold > 0.0 && self.p_threshold > 0.0) {
            return Err(Error::InvalidArgument("thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShimOutcome {
    pub state: ShimState,
    pub orbits: OrbitPartition,
    /// Both thresholds were met before the iteration budget ran out.
    pub converged: bool,
}

/// Residual magnetization after removing the expected shot-noise floor:
/// `√max(0, mean_i m_i² − mean_i (1 − m_i²)/shots)`.
pub fn magnetization_excess(magnetization: &[f64], shots: usize) -> f64 {
    let n = magnetization.len() as f64;
    let raw = magnetization.iter().map(|m| m * m).sum::<f64>() / n;
    let noise = magnetization.iter().map(|m| (1.0 - m * m) / shots as f64).sum::<f64>() / n;
    (raw - noise).max(0.0).sqrt()
}

/// Runs gauge-averaged sampling and shim updates until the thresholds are
/// met or `config.n_iterations` is spent.
///
/// The loop freezes when every orbit satisfies `|m_O| < m_threshold` and
/// `Std[p_frust] < p_threshold`. Under [`FluxUpdate::PerQubit`] the
/// per-qubit magnetizations must also be consistent with shot noise
/// ([`magnetization_excess`] below `m_threshold`), since orbit means hide
/// offsets that cancel within an orbit.
pub fn run_shim(chain: &ChainSpec, sampler: &NoisySamplerConfig, config: &ShimConfig, seed: u64) -> Result<ShimOutcome> {
    config.validate()?;
    let n = chain.n();
    sampler.validate(n)?;
    let orbits = build_orbits(chain);
    let scale = config.coupler_scale / (chain.j() + chain.delta());
    let j_prog = (0..n).map(|b| chain.bond_coupling(b) * scale).collect();
    let mut state = ShimState::new(j_prog, config.eta_phi, config.eta_j)?;
    state.flux_update = config.flux_update;
    let per_gauge = config.shots / config.n_gauges;
    let mut converged = false;

    for iter in 0..config.n_iterations {
        let problem = RingProblem::new(state.j_prog.clone(), vec![0.0; n])?;
        let samples = gauge_sample(sampler, &problem, &state.phi, config.n_gauges, per_gauge, sub_seed(seed, iter as u64))?;
        let stats = ShimStats::from_samples(&samples, &state.j_prog)?;
        let orbit_m = stats.orbit_magnetization(&orbits);
        let orbit_std = stats.orbit_frustration_std(&orbits);
        state.history.push(ShimRecord {
            iter,
            orbit_m: orbit_m.clone(),
            orbit_std_pfrust: orbit_std.clone(),
            sigma_mtilde: stats.sigma_mtilde(),
            magnetization: stats.magnetization.clone(),
            phi: state.phi.clone(),
            j_prog: state.j_prog.clone(),
        });
        let qubits_ok = match config.flux_update {
            FluxUpdate::PerQubit => magnetization_excess(&stats.magnetization, samples.shots()) < config.m_threshold,
            FluxUpdate::Orbit => true,
        };
        if qubits_ok
            && orbit_m.iter().all(|m| m.abs() < config.m_threshold)
            && orbit_std.iter().all(|s| *s < config.p_threshold)
        {
            converged = true;
            break;
        }
        let history = std::mem::take(&mut state.history);
        state = shim_step(&state, &stats, &orbits);
        state.history = history;
    }
    Ok(ShimOutcome { state, orbits, converged })
}

/// Writes `iter,orbit_id,m,std_pfrust,sigma_mtilde`, one row per orbit
/// index per iteration. `m` belongs to qubit orbit `orbit_id` and
/// `std_pfrust` to coupler orbit `orbit_id`.
pub fn write_history_csv<W: Write>(history: &[ShimRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iter", "orbit_id", "m", "std_pfrust", "sigma_mtilde"])?;
    for rec in history {
        let orbits = rec.orbit_m.len().max(rec.orbit_std_pfrust.len());
        for o in 0..orbits {
            let cell = |v: &[f64]| v.get(o).map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                rec.iter.to_string(),
                o.to_string(),
                cell(&rec.orbit_m),
                cell(&rec.orbit_std_pfrust),
                rec.sigma_mtilde.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pearson correlation; `NaN` if either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

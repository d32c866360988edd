//! Fourier analysis of `P(τ)`: windowing, one-sided DFT spectra, simulated
//! shot noise, bootstrap error bars and peak significance.
//!
//! Normalization: for a series `x_0..x_{M-1}` the spectrum is
//! `S_m = |Σ_n x_n e^{-2πi mn/M}|` for `m = 0..=M/2` on `Ω_m = m/(M·Δτ)`.
//! No `1/M` factor is applied, so a tone `A·sin(2πΩ₀τ)` on the grid gives
//! `S = A·M/2` at `Ω₀`, and `Σ_m w_m S_m² = M·Σ_n x_n²` with `w_m = 1` at
//! DC and at Nyquist (even `M`) and `w_m = 2` elsewhere.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BondParity, ChainSpec};
use crate::observables::QuenchResult;

/// Largest allowed deviation of a τ grid from uniform spacing, in ns.
pub const UNIFORM_TOL: f64 = 1e-12;

/// Minimum number of points a window must keep.
pub const MIN_WINDOW_POINTS: usize = 8;

/// Values sampled on a uniform τ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSeries {
    tau: Vec<f64>,
    values: Vec<f64>,
    /// Free-form description of where the values came from.
    pub meta: String,
}

impl TauSeries {
    pub fn new(tau: Vec<f64>, values: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        if tau.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: tau.len(), got: values.len() });
        }
        if tau.is_empty() {
            return Err(Error::InvalidArgument("empty series".into()));
        }
        if tau.len() >= 2 {
            let step = tau[1] - tau[0];
            if !(step > 0.0) {
                return Err(Error::InvalidArgument("τ grid must be increasing".into()));
            }
            for (i, t) in tau.iter().enumerate() {
                if (t - (tau[0] + i as f64 * step)).abs() > UNIFORM_TOL {
                    return Err(Error::InvalidArgument(format!("τ grid not uniform at index {i}")));
                }
            }
        }
        Ok(Self { tau, values, meta: meta.into() })
    }

    /// `τ_i = tau0 + i·dtau`.
    pub fn uniform(tau0: f64, dtau: f64, values: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        let tau = (0..values.len()).map(|i| tau0 + i as f64 * dtau).collect();
        Self::new(tau, values, meta)
    }

    /// `P(τ)` or `K(τ)` from sweep results, which must lie on a uniform grid.
    pub fn from_results(results: &[QuenchResult], observable: Observable) -> Result<Self> {
        let tau = results.iter().map(|r| r.tau).collect();
        let values = results
            .iter()
            .map(|r| match observable {
                Observable::P => r.p,
                Observable::K => r.k,
            })
            .collect();
        Self::new(tau, values, observable.name())
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing; zero for a single point.
    pub fn dtau(&self) -> f64 {
        if self.tau.len() < 2 {
            0.0
        } else {
            (self.tau[self.tau.len() - 1] - self.tau[0]) / (self.tau.len() - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    P,
    K,
}

impl Observable {
    fn name(self) -> &'static str {
        match self {
            Observable::P => "P",
            Observable::K => "K",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detrend {
    None,
    #[default]
    Mean,
    Linear,
}

/// Window plus detrending applied before every transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub window: (f64, f64),
    pub detrend: Detrend,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { window: (0.0, 20.0), detrend: Detrend::Mean }
    }
}

/// Indices of grid points inside `[lo, hi]`, with a little slack for
/// rounding in generated grids.
fn window_range(tau: &[f64], window: (f64, f64)) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("window ({lo}, {hi}) is empty")));
    }
    let slack = 1e-9;
    let start = tau.partition_point(|&t| t < lo - slack);
    let end = tau.partition_point(|&t| t <= hi + slack);
    if end < start + MIN_WINDOW_POINTS {
        return Err(Error::InvalidArgument(format!(
            "window ({lo}, {hi}) keeps {} points, need at least {MIN_WINDOW_POINTS}",
            end.saturating_sub(start)
        )));
    }
    Ok(start..end)
}

fn detrend_in_place(tau: &[f64], values: &mut [f64], detrend: Detrend) {
    match detrend {
        Detrend::None => {}
        Detrend::Mean => {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= mean);
        }
        Detrend::Linear => {
            let (slope, intercept, _) = crate::observables::linear_fit(tau, values);
            for (v, t) in values.iter_mut().zip(tau) {
                *v -= intercept + slope * t;
            }
        }
    }
}

/// Restricts the series to `window` and removes the chosen trend.
pub fn detrend_and_window(series: &TauSeries, window: (f64, f64), detrend: Detrend) -> Result<TauSeries> {
    let range = window_range(&series.tau, window)?;
    let tau = series.tau[range.clone()].to_vec();
    let mut values = series.values[range].to_vec();
    detrend_in_place(&tau, &mut values, detrend);
    Ok(TauSeries { tau, values, meta: series.meta.clone() })
}

/// One-sided amplitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    pub window: (f64, f64),
    /// Length `M` of the transformed series.
    pub samples: usize,
}

impl Spectrum {
    /// Bin spacing `1/(M·Δτ)` in GHz.
    pub fn resolution(&self) -> f64 {
        self.omega.get(1).copied().unwrap_or(0.0)
    }

    pub fn nyquist(&self) -> f64 {
        self.omega.last().copied().unwrap_or(0.0)
    }

    /// Parseval weight of bin `m`.
    pub fn weight(&self, m: usize) -> f64 {
        if m == 0 || (self.samples % 2 == 0 && m == self.samples / 2) {
            1.0
        } else {
            2.0
        }
    }

    /// `Σ_m w_m S_m²`, equal to `M·Σ x²` of the transformed series.
    pub fn total_power(&self) -> f64 {
        self.s.iter().enumerate().map(|(m, s)| self.weight(m) * s * s).sum()
    }

    /// Bin closest to `omega`.
    pub fn bin_of(&self, omega: f64) -> usize {
        let r = self.resolution();
        if r == 0.0 {
            return 0;
        }
        ((omega / r).round().max(0.0) as usize).min(self.s.len() - 1)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["Omega_GHz", "S", "sigma"])?;
        for (m, (o, s)) in self.omega.iter().zip(&self.s).enumerate() {
            let sigma = self.sigma.as_ref().map(|v| v[m].to_string()).unwrap_or_default();
            w.write_record([o.to_string(), s.to_string(), sigma])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reusable FFT plan for one series length.
struct Transform {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transform {
    fn new(len: usize) -> Self {
        Self { fft: FftPlanner::new().plan_fft_forward(len), len }
    }

    fn magnitudes(&self, values: &[f64], buf: &mut Vec<Complex<f64>>) -> Vec<f64> {
        buf.clear();
        buf.extend(values.iter().map(|&v| Complex::new(v, 0.0)));
        self.fft.process(buf);
        buf[..self.len / 2 + 1].iter().map(|c| c.norm()).collect()
    }
}

fn omega_grid(len: usize, dtau: f64) -> Vec<f64> {
    (0..=len / 2).map(|m| m as f64 / (len as f64 * dtau)).collect()
}

/// Amplitude spectrum of an already windowed and detrended series.
pub fn spectrum(series: &TauSeries) -> Result<Spectrum> {
    if series.len() < MIN_WINDOW_POINTS {
        return Err(Error::InvalidArgument(format!(
            "series has {} points, need at least {MIN_WINDOW_POINTS}",
            series.len()
        )));
    }
    // Re-validate: the fields are private but a series may come from a
    // mutated clone of a different grid.
    let series = TauSeries::new(series.tau.clone(), series.values.clone(), series.meta.clone())?;
    let len = series.len();
    let t = Transform::new(len);
    let s = t.magnitudes(&series.values, &mut Vec::with_capacity(len));
    Ok(Spectrum {
        omega: omega_grid(len, series.dtau()),
        s,
        sigma: None,
        window: (series.tau[0], series.tau[len - 1]),
        samples: len,
    })
}

/// [`detrend_and_window`] followed by [`spectrum`].
pub fn windowed_spectrum(series: &TauSeries, opts: &SpectralOptions) -> Result<Spectrum> {
    spectrum(&detrend_and_window(series, opts.window, opts.detrend)?)
}

/// Kink indicators of repeated anneals at one τ: one row per shot, one
/// column per bond, stored as packed bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotTable {
    shots: usize,
    bonds: usize,
    words: usize,
    bits: Vec<u64>,
    strong_parity: BondParity,
}

impl ShotTable {
    pub fn zeros(shots: usize, chain: &ChainSpec) -> Self {
        let bonds = chain.n();
        let words = bonds.div_ceil(64);
        Self { shots, bonds, words, bits: vec![0; shots * words], strong_parity: chain.strong_bond_parity() }
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn bonds(&self) -> usize {
        self.bonds
    }

    pub fn get(&self, shot: usize, bond: usize) -> bool {
        assert!(shot < self.shots && bond < self.bonds);
        self.bits[shot * self.words + bond / 64] >> (bond % 64) & 1 == 1
    }

    pub fn set(&mut self, shot: usize, bond: usize, kink: bool) {
        assert!(shot < self.shots && bond < self.bonds);
        let w = &mut self.bits[shot * self.words + bond / 64];
        let mask = 1u64 << (bond % 64);
        if kink {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    fn is_strong(&self, bond: usize) -> bool {
        match self.strong_parity {
            BondParity::Even => bond % 2 == 0,
            BondParity::Odd => bond % 2 == 1,
        }
    }

    /// `(weak − strong)` kink count of one shot.
    fn imbalance(&self, shot: usize) -> i64 {
        let row = &self.bits[shot * self.words..(shot + 1) * self.words];
        let (even, odd) = parity_masks(self.words);
        let mut even_count = 0i64;
        let mut odd_count = 0i64;
        for ((w, e), o) in row.iter().zip(&even).zip(&odd) {
            even_count += (w & e).count_ones() as i64;
            odd_count += (w & o).count_ones() as i64;
        }
        match self.strong_parity {
            BondParity::Even => odd_count - even_count,
            BondParity::Odd => even_count - odd_count,
        }
    }

    /// Estimate of `P = (p_weak − p_strong)/2` from a subset of shots.
    pub fn p_estimate(&self, shots: &[usize]) -> f64 {
        if shots.is_empty() {
            return 0.0;
        }
        let total: i64 = shots.iter().map(|&s| self.imbalance(s)).sum();
        total as f64 / (shots.len() as f64 * self.bonds as f64)
    }

    /// Estimate from every shot.
    pub fn p_full(&self) -> f64 {
        let all: Vec<usize> = (0..self.shots).collect();
        self.p_estimate(&all)
    }

    /// Empirical kink frequency on strong and on weak bonds.
    pub fn sublattice_frequencies(&self) -> (f64, f64) {
        let mut strong = 0usize;
        let mut weak = 0usize;
        for shot in 0..self.shots {
            for bond in 0..self.bonds {
                if self.get(shot, bond) {
                    if self.is_strong(bond) {
                        strong += 1;
                    } else {
                        weak += 1;
                    }
                }
            }
        }
        let half = (self.shots * self.bonds) as f64 / 2.0;
        (strong as f64 / half, weak as f64 / half)
    }
}

fn parity_masks(words: usize) -> (Vec<u64>, Vec<u64>) {
    let even = 0x5555_5555_5555_5555u64;
    (vec![even; words], vec![!even; words])
}

/// Draws independent per-bond kink indicators for one τ. `index` selects
/// the random stream, so tables for different τ are independent and any
/// single one can be regenerated alone.
pub fn simulate_shot_table(result: &QuenchResult, chain: &ChainSpec, shots: usize, seed: u64, index: u64) -> Result<ShotTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    for p in [result.p_strong, result.p_weak] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("kink probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut table = ShotTable::zeros(shots, chain);
    let probs: Vec<f64> = (0..chain.n())
        .map(|b| if chain.is_strong(b) { result.p_strong } else { result.p_weak })
        .collect();
    for shot in 0..shots {
        for (bond, &p) in probs.iter().enumerate() {
            if rng.random::<f64>() < p {
                table.set(shot, bond, true);
            }
        }
    }
    Ok(table)
}

/// One table per τ, deterministic given `seed`.
pub fn simulate_shots(results: &[QuenchResult], chain: &ChainSpec, shots: usize, seed: u64) -> Result<Vec<ShotTable>> {
    results
        .iter()
        .enumerate()
        .map(|(i, r)| simulate_shot_table(r, chain, shots, seed, i as u64))
        .collect()
}

/// Per-frequency spread of artificial-series spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapNoise {
    /// Standard deviation of `S(Ω)` across artificial series.
    pub sigma_series: Vec<f64>,
    pub n_series: usize,
    /// Shots per τ in the full sample.
    pub total_shots: usize,
}

impl BootstrapNoise {
    /// Shots behind each artificial series, per τ.
    pub fn shots_per_series(&self) -> f64 {
        self.total_shots as f64 / self.n_series as f64
    }

    /// Noise level of a spectrum built from all shots:
    /// `σ_series·√(shots_per_series / total_shots)`.
    pub fn full_sample_sigma(&self) -> Vec<f64> {
        let f = (self.shots_per_series() / self.total_shots as f64).sqrt();
        self.sigma_series.iter().map(|s| s * f).collect()
    }

    pub fn median_sigma(&self) -> f64 {
        median(&self.sigma_series[1..])
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Randomly partitions the shots of one table into `n_series` groups
/// (sizes differ by at most one) and returns the P estimate of each group.
pub fn partition_estimates(table: &ShotTable, n_series: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..table.shots()).collect();
    order.shuffle(rng);
    let mut sums = vec![0i64; n_series];
    let mut counts = vec![0usize; n_series];
    for (pos, &shot) in order.iter().enumerate() {
        sums[pos % n_series] += table.imbalance(shot);
        counts[pos % n_series] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| s as f64 / (c as f64 * table.bonds() as f64))
        .collect()
}

/// Bootstrap noise from stored tables. `tau` is the grid the tables were
/// drawn on; the same window and detrending as the analysed spectrum are
/// applied to every artificial series.
pub fn bootstrap_noise(
    tables: &[ShotTable],
    tau: &[f64],
    n_series: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<BootstrapNoise> {
    if tables.len() != tau.len() {
        return Err(Error::DimensionMismatch { expected: tau.len(), got: tables.len() });
    }
    TauSeries::new(tau.to_vec(), vec![0.0; tau.len()], "")?;
    let range = window_range(tau, opts.window)?;
    let total_shots = tables[range.start].shots();
    check_partition(tables[range.clone()].iter().map(|t| t.shots()), n_series)?;
    let columns: Vec<Vec<f64>> = range
        .clone()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            partition_estimates(&tables[i], n_series, &mut rng)
        })
        .collect();
    series_spread(&columns, &tau[range], n_series, total_shots, opts.detrend)
}

/// Streaming form of `simulate_shots` + [`bootstrap_noise`]: each τ's
/// table is drawn, partitioned and dropped. Equivalent to the two-step
/// call with the same seeds, without holding every table in memory.
pub fn bootstrap_from_results(
    results: &[QuenchResult],
    chain: &ChainSpec,
    shots: usize,
    shot_seed: u64,
    n_series: usize,
    partition_seed: u64,
    opts: &SpectralOptions,
) -> Result<BootstrapNoise> {
    let tau: Vec<f64> = results.iter().map(|r| r.tau).collect();
    TauSeries::new(tau.clone(), vec![0.0; tau.len()], "")?;
    let range = window_range(&tau, opts.window)?;
    check_partition(std::iter::once(shots), n_series)?;
    let columns = range
        .clone()
        .into_par_iter()
        .map(|i| {
            let table = simulate_shot_table(&results[i], chain, shots, shot_seed, i as u64)?;
            let mut rng = ChaCha8Rng::seed_from_u64(partition_seed);
            rng.set_stream(i as u64);
            Ok(partition_estimates(&table, n_series, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    series_spread(&columns, &tau[range], n_series, shots, opts.detrend)
}

fn check_partition(mut shots: impl Iterator<Item = usize>, n_series: usize) -> Result<()> {
    if n_series < 2 {
        return Err(Error::InvalidArgument("need at least 2 artificial series".into()));
    }
    let first = shots.next().unwrap_or(0);
    if first < n_series {
        return Err(Error::InvalidArgument(format!("{first} shots cannot fill {n_series} series")));
    }
    if shots.any(|s| s != first) {
        return Err(Error::InvalidArgument("shot count differs between τ points".into()));
    }
    Ok(())
}

/// `columns[i][g]` is the estimate of series `g` at the i-th windowed τ.
fn series_spread(columns: &[Vec<f64>], tau: &[f64], n_series: usize, total_shots: usize, detrend: Detrend) -> Result<BootstrapNoise> {
    let len = tau.len();
    let transform = Transform::new(len);
    let bins = len / 2 + 1;
    let spectra: Vec<Vec<f64>> = (0..n_series)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(len),
            |buf, g| {
                let mut values: Vec<f64> = columns.iter().map(|c| c[g]).collect();
                detrend_in_place(tau, &mut values, detrend);
                transform.magnitudes(&values, buf)
            },
        )
        .collect();
    let mut sigma = vec![0.0; bins];
    for (m, out) in sigma.iter_mut().enumerate() {
        let mean = spectra.iter().map(|s| s[m]).sum::<f64>() / n_series as f64;
        let var = spectra.iter().map(|s| (s[m] - mean).powi(2)).sum::<f64>() / (n_series - 1) as f64;
        *out = var.sqrt();
    }
    Ok(BootstrapNoise { sigma_series: sigma, n_series, total_shots })
}

/// Result of [`detect_peak`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub omega: f64,
    pub bin: usize,
    pub amplitude: f64,
    pub baseline: f64,
    pub sigma: f64,
    /// `(S − baseline)/σ` at the reported bin.
    pub significance: f64,
}

fn bins_in(spectrum: &Spectrum, band: (f64, f64)) -> Vec<usize> {
    let eps = 1e-9 * spectrum.resolution().max(1.0);
    (0..spectrum.s.len())
        .filter(|&m| spectrum.omega[m] >= band.0 - eps && spectrum.omega[m] <= band.1 + eps)
        .collect()
}

/// Fits a flat baseline (the mean of `S`) over `baseline_band` and reports
/// the bin with the largest excess over it. Candidates are the bins of
/// `search_band`, or every non-DC bin when `None`.
pub fn detect_peak(spectrum: &Spectrum, baseline_band: (f64, f64), search_band: Option<(f64, f64)>) -> Result<PeakReport> {
    let sigma = spectrum
        .sigma
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no σ".into()))?;
    let base_bins = bins_in(spectrum, baseline_band);
    if base_bins.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "baseline band {baseline_band:?} holds {} bins, need at least 5",
            base_bins.len()
        )));
    }
    let baseline = base_bins.iter().map(|&m| spectrum.s[m]).sum::<f64>() / base_bins.len() as f64;
    let candidates = match search_band {
        Some(band) => bins_in(spectrum, band),
        None => (1..spectrum.s.len()).collect(),
    };
    let bin = candidates
        .into_iter()
        .max_by(|&a, &b| (spectrum.s[a] - baseline).total_cmp(&(spectrum.s[b] - baseline)))
        .ok_or_else(|| Error::InvalidArgument("empty search band".into()))?;
    let excess = spectrum.s[bin] - baseline;
    let significance = if sigma[bin] > 0.0 {
        excess / sigma[bin]
    } else if excess > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(PeakReport {
        omega: spectrum.omega[bin],
        bin,
        amplitude: spectrum.s[bin],
        baseline,
        sigma: sigma[bin],
        significance,
    })
}

/// A local maximum of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPeak {
    pub bin: usize,
    pub omega: f64,
    /// Three-point parabolic estimate of the peak position.
    pub omega_interp: f64,
    pub amplitude: f64,
}

/// Interior local maxima inside `band`, largest first. Bin 1 is skipped:
/// after mean removal `S_0 = 0`, so bin 1 is a maximum whenever the
/// spectrum falls off from DC.
pub fn local_peaks(spectrum: &Spectrum, band: (f64, f64)) -> Vec<LocalPeak> {
    let s = &spectrum.s;
    let res = spectrum.resolution();
    let mut peaks: Vec<LocalPeak> = bins_in(spectrum, band)
        .into_iter()
        .filter(|&m| m >= 2 && m + 1 < s.len() && s[m] > s[m - 1] && s[m] > s[m + 1])
        .map(|m| {
            let (a, b, c) = (s[m - 1], s[m], s[m + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            LocalPeak { bin: m, omega: spectrum.omega[m], omega_interp: spectrum.omega[m] + shift * res, amplitude: b }
        })
        .collect();
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    peaks
}

/// Largest local maximum inside `band`, if any.
pub fn dominant_peak(spectrum: &Spectrum, band: (f64, f64)) -> Option<LocalPeak> {
    local_peaks(spectrum, band).into_iter().next()
}

/// One row of the τ-series CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRecord {
    pub tau_ns: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "stderr_P")]
    pub stderr_p: f64,
}

impl From<&QuenchResult> for TauRecord {
    fn from(r: &QuenchResult) -> Self {
        Self { tau_ns: r.tau, p: r.p, k: r.k, stderr_p: r.stderr_p }
    }
}

/// Writes `tau_ns,P,K,stderr_P`.
pub fn write_tau_csv<W: Write>(results: &[QuenchResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in results {
        w.serialize(TauRecord::from(r))?;
    }
    if results.is_empty() {
        w.write_record(["tau_ns", "P", "K", "stderr_P"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tau_csv<R: Read>(reader: R) -> Result<Vec<TauRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["tau_ns", "P", "K", "stderr_P"] {
        return Err(Error::InvalidArgument(format!("unexpected τ-series header {headers:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

impl TauSeries {
    pub fn from_records(records: &[TauRecord], observable: Observable) -> Result<Self> {
        let tau = records.iter().map(|r| r.tau_ns).collect();
        let values = records
            .iter()
            .map(|r| match observable {
                Observable::P => r.p,
                Observable::K => r.k,
            })
            .collect();
        Self::new(tau, values, observable.name())
    }
}

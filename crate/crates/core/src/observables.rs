//! Defect observables from final block states, τ sweeps and
//! Kibble–Zurek fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{allowed_momenta, evolve_chain, BlockState, DisorderRealization, MomentumBlock, MomentumGrid, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{AnnealSchedule, ChainSpec};

/// Defect statistics at the end of one anneal.
///
/// `p` is `(p_weak − p_strong)/2`, positive when strong bonds carry fewer
/// kinks. The `stderr_*` fields are the standard error over disorder
/// realizations and zero for clean runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchResult {
    pub tau: f64,
    pub k: f64,
    pub p: f64,
    pub p_strong: f64,
    pub p_weak: f64,
    pub stderr_k: f64,
    pub stderr_p: f64,
}

/// Bond-correlator sums `(Σ_n ⟨σᶻσᶻ⟩, Σ_n (−1)^n ⟨σᶻσᶻ⟩)`.
fn bond_sums(states: &[BlockState], chain: &ChainSpec) -> Result<(f64, f64)> {
    check_states(states, chain)?;
    let mut total = 0.0;
    let mut staggered = 0.0;
    for st in states {
        let block = MomentumBlock::new(st.k, st.dim());
        total += block.bond_sum_operator().expectation(&st.amplitudes).re;
        staggered += block.staggered_bond_sum_operator().expectation(&st.amplitudes).re;
    }
    Ok((total, staggered))
}

fn check_states(states: &[BlockState], chain: &ChainSpec) -> Result<()> {
    let ks: Vec<f64> = states.iter().map(|s| s.k).collect();
    let matches = |grid| {
        allowed_momenta(chain.n(), grid)
            .map(|expected| expected.len() == ks.len() && expected.iter().zip(&ks).all(|(a, b)| (a - b).abs() < 1e-12))
            .unwrap_or(false)
    };
    if matches(MomentumGrid::Antiperiodic) || matches(MomentumGrid::Periodic) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: chain.n() / 4, got: states.len() })
    }
}

/// Mean correlator on strong and on weak bonds.
fn sublattice_correlators(states: &[BlockState], chain: &ChainSpec) -> Result<(f64, f64)> {
    let (total, staggered) = bond_sums(states, chain)?;
    let (even, odd) = ((total + staggered) / 2.0, (total - staggered) / 2.0);
    let half = chain.n() as f64 / 2.0;
    Ok(match chain.strong_bond_parity() {
        crate::model::BondParity::Even => (even / half, odd / half),
        crate::model::BondParity::Odd => (odd / half, even / half),
    })
}

/// `K = (1/2N) Σ_n (1 + ⟨σᶻ_n σᶻ_{n+1}⟩)`.
pub fn kink_density(states: &[BlockState], chain: &ChainSpec) -> Result<f64> {
    let (total, _) = bond_sums(states, chain)?;
    let n = chain.n() as f64;
    Ok((n + total) / (2.0 * n))
}

/// `P = (1/2N) Σ_n ε_n ⟨σᶻ_n σᶻ_{n+1}⟩` with `ε = +1` on weak and `−1` on
/// strong bonds.
pub fn staggered_kink_diff(states: &[BlockState], chain: &ChainSpec) -> Result<f64> {
    let (_, staggered) = bond_sums(states, chain)?;
    Ok(-chain.strong_bond_parity().sign() * staggered / (2.0 * chain.n() as f64))
}

/// Assembles a [`QuenchResult`] from final states.
pub fn quench_result(tau: f64, states: &[BlockState], chain: &ChainSpec) -> Result<QuenchResult> {
    let (c_strong, c_weak) = sublattice_correlators(states, chain)?;
    let p_strong = (1.0 + c_strong) / 2.0;
    let p_weak = (1.0 + c_weak) / 2.0;
    Ok(QuenchResult {
        tau,
        k: (p_strong + p_weak) / 2.0,
        p: (p_weak - p_strong) / 2.0,
        p_strong,
        p_weak,
        stderr_k: 0.0,
        stderr_p: 0.0,
    })
}

/// Disorder averaging for [`quench_sweep`]. Realization `r` uses stream `r`
/// of `seed` and is shared by every τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub d: f64,
    pub realizations: usize,
    pub seed: u64,
}

/// Evolves the chain for every τ in the grid. Results come back in grid
/// order.
pub fn quench_sweep(
    chain: &ChainSpec,
    schedule: &AnnealSchedule,
    taus: &[f64],
    config: &SolverConfig,
    disorder: Option<DisorderSpec>,
) -> Result<Vec<QuenchResult>> {
    if taus.is_empty() {
        return Err(Error::InvalidArgument("empty tau grid".into()));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("tau grid must be strictly increasing".into()));
    }
    if let Some(&bad) = taus.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("tau = {bad} must be >= 0")));
    }

    match disorder {
        None => taus
            .par_iter()
            .map(|&tau| {
                let states = evolve_chain(chain, schedule, tau, config, None)?;
                quench_result(tau, &states, chain)
            })
            .collect(),
        Some(spec) => {
            if spec.realizations == 0 {
                return Err(Error::InvalidArgument("need at least one disorder realization".into()));
            }
            let draws = (0..spec.realizations as u64)
                .map(|r| DisorderRealization::sample(spec.d, chain.n(), spec.seed, r, config.grid))
                .collect::<Result<Vec<_>>>()?;
            let jobs: Vec<(usize, usize)> = (0..taus.len())
                .flat_map(|t| (0..draws.len()).map(move |r| (t, r)))
                .collect();
            let per_job = jobs
                .par_iter()
                .map(|&(t, r)| {
                    let states = evolve_chain(chain, schedule, taus[t], config, Some(&draws[r]))?;
                    quench_result(taus[t], &states, chain)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(per_job.chunks(draws.len()).zip(taus).map(|(c, &tau)| average(tau, c)).collect())
        }
    }
}

fn average(tau: f64, results: &[QuenchResult]) -> QuenchResult {
    let n = results.len() as f64;
    let mean = |f: fn(&QuenchResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    let stderr = |f: fn(&QuenchResult) -> f64, m: f64| {
        if results.len() < 2 {
            0.0
        } else {
            let var = results.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        }
    };
    let k = mean(|r| r.k);
    let p = mean(|r| r.p);
    QuenchResult {
        tau,
        k,
        p,
        p_strong: mean(|r| r.p_strong),
        p_weak: mean(|r| r.p_weak),
        stderr_k: stderr(|r| r.k, k),
        stderr_p: stderr(|r| r.p, p),
    }
}

/// Power-law fit `K = amplitude·τ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln K` against `ln τ` over `τ ∈ [lo, hi]`.
pub fn kz_fit(results: &[QuenchResult], window: (f64, f64)) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.tau >= window.0 && r.tau <= window.1)
        .map(|r| (r.tau, r.k))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InvalidArgument(format!("{} points in the fit window, need 5", pts.len())));
    }
    if let Some((tau, k)) = pts.iter().find(|(tau, k)| !(*k > 0.0) || !(*tau > 0.0)) {
        return Err(Error::InvalidArgument(format!("non-positive point (tau = {tau}, K = {k}) in fit window")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(PowerLawFit { exponent: slope, amplitude: intercept.exp(), r_squared: r2, points: pts.len() })
}

/// Least-squares line `y = slope·x + intercept` and its r². A perfect fit to
/// constant data reports r² = 1.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(taus: &[f64], f: impl Fn(f64) -> f64) -> Vec<QuenchResult> {
        taus.iter()
            .map(|&tau| QuenchResult { tau, k: f(tau), p: 0.0, p_strong: f(tau), p_weak: f(tau), stderr_k: 0.0, stderr_p: 0.0 })
            .collect()
    }

    #[test]
    fn kz_fit_exact_power_law() {
        let taus: Vec<f64> = (0..12).map(|i| 5.0 * 1.3_f64.powi(i)).collect();
        let fit = kz_fit(&synthetic(&taus, |t| 0.3 * t.powf(-0.5)), (1.0, 1000.0)).unwrap();
        assert_abs_diff_eq!(fit.exponent, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.amplitude, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kz_fit_flat() {
        let taus: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let fit = kz_fit(&synthetic(&taus, |_| 0.1), (0.0, 100.0)).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kz_fit_errors() {
        let taus: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        assert!(kz_fit(&synthetic(&taus, |_| 0.1), (0.0, 3.5)).is_err());
        assert!(kz_fit(&synthetic(&taus, |t| if t > 4.0 { 0.0 } else { 0.1 }), (0.0, 100.0)).is_err());
    }

    #[test]
    fn sudden_quench_is_half_kinked() {
        let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
        let states: Vec<BlockState> = allowed_momenta(16, MomentumGrid::Antiperiodic)
            .unwrap()
            .into_iter()
            .map(|k| BlockState::vacuum(k, 6))
            .collect();
        assert_abs_diff_eq!(kink_density(&states, &chain).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(staggered_kink_diff(&states, &chain).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wrong_state_count_is_rejected() {
        let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
        let states = vec![BlockState::vacuum(0.1, 6)];
        assert!(kink_density(&states, &chain).is_err());
    }

    #[test]
    fn sweep_grid_validation() {
        let chain = ChainSpec::even(8, 1.0, 0.3).unwrap();
        let sch = AnnealSchedule::linear(11.0, 15.0).unwrap();
        let cfg = SolverConfig::default();
        assert!(quench_sweep(&chain, &sch, &[], &cfg, None).is_err());
        assert!(quench_sweep(&chain, &sch, &[2.0, 1.0], &cfg, None).is_err());
        let one = quench_sweep(&chain, &sch, &[1.5], &cfg, None).unwrap();
        assert_eq!(one.len(), 1);
        let states = evolve_chain(&chain, &sch, 1.5, &cfg, None).unwrap();
        assert_abs_diff_eq!(one[0].k, kink_density(&states, &chain).unwrap(), epsilon = 1e-14);
    }
}

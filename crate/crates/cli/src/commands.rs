use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use mbco::block::{evolve_chain, DisorderRealization, SolverConfig};
use mbco::ed::{ed_evolve, ed_observables, DenseQuenchProblem};
use mbco::model::{feasibility_check_with, AnnealSchedule, ChainSpec};
use mbco::observables::{quench_result, quench_sweep, DisorderSpec, QuenchResult};
use mbco::shim::{run_shim, write_history_csv, NoisySamplerConfig, ShimConfig};
use mbco::spectral::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::*;
use crate::plot::{Band, Figure};
use crate::{prepare_out, write_json, CliError, Run};

const SHOT_MODEL_NOTE: &str = "shots are drawn as independent per-bond Bernoulli kink indicators with the \
     strong/weak-bond marginals of the solved state; correlations between bonds are ignored";

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?))
}

fn write_svg(path: &Path, fig: &Figure) -> Result<(), CliError> {
    std::fs::write(path, fig.render())?;
    Ok(())
}

fn notes(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[derive(Serialize)]
struct ResultRow {
    tau_ns: f64,
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "P")]
    p: f64,
    p_strong: f64,
    p_weak: f64,
    #[serde(rename = "stderr_K")]
    stderr_k: f64,
    #[serde(rename = "stderr_P")]
    stderr_p: f64,
}

fn write_results_csv(path: &Path, results: &[QuenchResult]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in results {
        w.serialize(ResultRow {
            tau_ns: r.tau,
            k: r.k,
            p: r.p,
            p_strong: r.p_strong,
            p_weak: r.p_weak,
            stderr_k: r.stderr_k,
            stderr_p: r.stderr_p,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(
    chain: &ChainSpec,
    schedule: &AnnealSchedule,
    taus: &[f64],
    tol: f64,
    grid: mbco::block::MomentumGrid,
    disorder: Option<f64>,
    realizations: usize,
    seed: u64,
) -> Result<Vec<QuenchResult>, CliError> {
    let solver = SolverConfig { tol, grid };
    let disorder = disorder.map(|d| DisorderSpec { d, realizations, seed });
    Ok(quench_sweep(chain, schedule, taus, &solver, disorder)?)
}

pub fn sweep(args: &SweepArgs, run: &Run) -> Result<u8, CliError> {
    let c = args.resolve()?;
    let chain = c.chain.chain()?;
    let schedule = c.schedule.build()?;
    let taus = tau_grid(c.tau_min, c.tau_max, c.tau_points)?;
    prepare_out(&c.common.out, c.common.threads)?;

    let results = run_sweep(&chain, &schedule, &taus, c.tol, c.chain.grid, c.disorder, c.realizations, c.common.seed)?;
    let out = &c.common.out;
    write_tau_csv(&results, create(&out.join("pt_series.csv"))?)?;
    write_results_csv(&out.join("quench_results.csv"), &results)?;

    let mut fig = Figure::new("P(τ)", "τ (ns)", "P").line("P", results.iter().map(|r| (r.tau, r.p)).collect());
    if c.disorder.is_some() {
        fig = fig.band(Band {
            x: results.iter().map(|r| r.tau).collect(),
            lower: results.iter().map(|r| r.p - r.stderr_p).collect(),
            upper: results.iter().map(|r| r.p + r.stderr_p).collect(),
        });
    }
    write_svg(&out.join("pt_series.svg"), &fig)?;
    write_svg(
        &out.join("kink_density.svg"),
        &Figure::new("K(τ)", "τ (ns)", "K").line("K", results.iter().map(|r| (r.tau, r.k)).collect()),
    )?;
    run.manifest(out, "sweep", &c, c.common.seed, Map::new())?;
    println!("wrote {} τ points to {}", results.len(), out.join("pt_series.csv").display());
    Ok(0)
}

/// `p_strong = K − P`, `p_weak = K + P`.
fn results_from_records(records: &[TauRecord]) -> Vec<QuenchResult> {
    records
        .iter()
        .map(|r| QuenchResult {
            tau: r.tau_ns,
            k: r.k,
            p: r.p,
            p_strong: r.k - r.p,
            p_weak: r.k + r.p,
            stderr_k: 0.0,
            stderr_p: r.stderr_p,
        })
        .collect()
}

#[derive(Serialize)]
struct SpectrumSummary {
    window: [f64; 2],
    resolution_ghz: f64,
    nyquist_ghz: f64,
    dominant_peak: Option<LocalPeak>,
    #[serde(skip_serializing_if = "Option::is_none")]
    significance: Option<Significance>,
}

#[derive(Serialize)]
struct Significance {
    shots_per_tau: usize,
    n_series: usize,
    baseline_band: [f64; 2],
    search_band: Option<[f64; 2]>,
    median_sigma: f64,
    peak: PeakReport,
    shot_model: &'static str,
}

fn default_band(spec: &Spectrum) -> [f64; 2] {
    [spec.omega.get(1).copied().unwrap_or(0.0), spec.nyquist()]
}

fn peak_band(spec: &Spectrum, search: Option<[f64; 2]>) -> (f64, f64) {
    match search {
        Some(b) => (b[0], b[1]),
        None => (spec.resolution(), spec.nyquist()),
    }
}

pub fn spectrum(args: &SpectrumArgs, run: &Run) -> Result<u8, CliError> {
    let c = args.resolve()?;
    let chain = c.chain.chain()?;
    let opts = SpectralOptions { window: (c.window[0], c.window[1]), detrend: c.detrend };
    if c.shots == Some(0) {
        return Err(CliError::Config("shots must be >= 1".into()));
    }
    prepare_out(&c.common.out, c.common.threads)?;
    let out = &c.common.out;

    if let Some(list) = &c.gamma0_list {
        return gamma0_scan(&c, list, &chain, &opts, run);
    }

    let results = match &c.input {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            results_from_records(&read_tau_csv(file)?)
        }
        None => {
            let taus = tau_grid(c.tau_min, c.tau_max, c.tau_points)?;
            let schedule = c.schedule.build()?;
            let r = run_sweep(&chain, &schedule, &taus, c.tol, c.chain.grid, c.disorder, c.realizations, c.common.seed)?;
            write_tau_csv(&r, create(&out.join("pt_series.csv"))?)?;
            r
        }
    };
    let series = TauSeries::from_results(&results, c.observable)?;
    let mut spec = windowed_spectrum(&series, &opts)?;

    let mut significance = None;
    if let Some(shots) = c.shots {
        let noise = bootstrap_from_results(&results, &chain, shots, c.common.seed, c.n_series, c.common.seed.wrapping_add(1), &opts)?;
        spec.sigma = Some(noise.full_sample_sigma());
        let baseline_band = c.baseline_band.unwrap_or_else(|| default_band(&spec));
        let peak = detect_peak(&spec, (baseline_band[0], baseline_band[1]), c.search_band.map(|b| (b[0], b[1])))?;
        significance = Some(Significance {
            shots_per_tau: shots,
            n_series: c.n_series,
            baseline_band,
            search_band: c.search_band,
            median_sigma: noise.median_sigma() * (noise.shots_per_series() / shots as f64).sqrt(),
            peak,
            shot_model: SHOT_MODEL_NOTE,
        });
    }

    spec.write_csv(create(&out.join("spectrum.csv"))?)?;
    let mut fig = Figure::new("S(Ω)", "Ω (GHz)", "S").line("S", spec.omega.iter().copied().zip(spec.s.iter().copied()).collect());
    if let (Some(sig), Some(report)) = (&spec.sigma, &significance) {
        let base = report.peak.baseline;
        fig = fig.band(Band {
            x: spec.omega.clone(),
            lower: sig.iter().map(|s| base - 2.0 * s).collect(),
            upper: sig.iter().map(|s| base + 2.0 * s).collect(),
        });
    }
    write_svg(&out.join("spectrum.svg"), &fig)?;

    let summary = SpectrumSummary {
        window: c.window,
        resolution_ghz: spec.resolution(),
        nyquist_ghz: spec.nyquist(),
        dominant_peak: dominant_peak(&spec, peak_band(&spec, c.search_band)),
        significance,
    };
    write_json(&out.join("spectrum_summary.json"), &summary)?;
    let mut extra = vec![];
    if c.shots.is_some() {
        extra.push(("shot_model", json!(SHOT_MODEL_NOTE)));
    }
    run.manifest(out, "spectrum", &c, c.common.seed, notes(&extra))?;

    match (&summary.dominant_peak, &summary.significance) {
        (Some(p), Some(s)) => println!(
            "dominant peak {:.4} GHz (S = {:.4e}); max excess {:.4} GHz at {:.2}σ",
            p.omega_interp, p.amplitude, s.peak.omega, s.peak.significance
        ),
        (Some(p), None) => println!("dominant peak {:.4} GHz (S = {:.4e})", p.omega_interp, p.amplitude),
        _ => println!("no local maximum in the search band"),
    }
    Ok(0)
}

fn gamma0_scan(c: &SpectrumConfig, list: &[f64], chain: &ChainSpec, opts: &SpectralOptions, run: &Run) -> Result<u8, CliError> {
    if list.is_empty() {
        return Err(CliError::Config("empty gamma0 list".into()));
    }
    if c.input.is_some() {
        return Err(CliError::Config("--gamma0-list runs its own sweeps and cannot take --input".into()));
    }
    let out = &c.common.out;
    let taus = tau_grid(c.tau_min, c.tau_max, c.tau_points)?;
    let mut fig = Figure::new("S(Ω) across Γ(0)", "Ω (GHz)", "S");
    let mut w = csv::Writer::from_writer(create(&out.join("gamma0_scan.csv"))?);
    w.write_record(["gamma0_GHz", "peak_Omega_GHz", "peak_S"])?;
    for &g in list {
        let params = ScheduleParams { gamma0: g, ..c.schedule.clone() };
        let schedule = params.build()?;
        let results = run_sweep(chain, &schedule, &taus, c.tol, c.chain.grid, c.disorder, c.realizations, c.common.seed)?;
        let spec = windowed_spectrum(&TauSeries::from_results(&results, c.observable)?, opts)?;
        spec.write_csv(create(&out.join(format!("spectrum_gamma0_{g}.csv")))?)?;
        let peak = dominant_peak(&spec, peak_band(&spec, c.search_band));
        let (omega, amp) = peak.map(|p| (p.omega_interp, p.amplitude)).unwrap_or((f64::NAN, f64::NAN));
        w.write_record([g.to_string(), omega.to_string(), amp.to_string()])?;
        println!("Γ0 = {g} GHz: peak {omega:.4} GHz, S = {amp:.4e}");
        fig = fig.line(format!("Γ0 = {g}"), spec.omega.iter().copied().zip(spec.s.iter().copied()).collect());
    }
    w.flush()?;
    write_svg(&out.join("gamma0_scan.svg"), &fig)?;
    run.manifest(out, "spectrum", c, c.common.seed, Map::new())?;
    Ok(0)
}

#[derive(Serialize)]
struct ShimSummary {
    converged: bool,
    iterations: usize,
    hidden_bias: Vec<f64>,
    coupler_error: Vec<f64>,
    phi: Vec<f64>,
    j_prog: Vec<f64>,
    /// Pearson correlation of −φ with the injected biases.
    recovery_correlation: Option<f64>,
}

pub fn shim(args: &ShimArgs, run: &Run) -> Result<u8, CliError> {
    let c = args.resolve()?;
    let chain = ChainSpec::new(c.n, c.j, c.delta, c.parity)?;
    let config = ShimConfig {
        eta_phi: c.eta_phi,
        eta_j: c.eta_j,
        n_iterations: c.iterations,
        shots: c.shots,
        n_gauges: c.gauges,
        m_threshold: c.m_threshold,
        p_threshold: c.p_threshold,
        flux_update: c.flux_update,
        coupler_scale: c.coupler_scale,
    };
    config.validate()?;
    if !(c.bias >= 0.0 && c.coupler_spread >= 0.0 && c.coupler_spread < 1.0) {
        return Err(CliError::Config("need bias >= 0 and 0 <= coupler_spread < 1".into()));
    }
    prepare_out(&c.common.out, c.common.threads)?;
    let out = &c.common.out;

    let mut rng = ChaCha8Rng::seed_from_u64(c.common.seed);
    rng.set_stream(1);
    let hidden_bias: Vec<f64> = (0..c.n).map(|_| if rng.random::<bool>() { c.bias } else { -c.bias }).collect();
    rng.set_stream(2);
    let coupler_error: Vec<f64> = (0..c.n).map(|_| 1.0 + c.coupler_spread * rng.random_range(-1.0..=1.0)).collect();
    let sampler = NoisySamplerConfig {
        hidden_bias: hidden_bias.clone(),
        coupler_error: coupler_error.clone(),
        t_eff: c.t_eff,
        sweeps: c.sweeps,
        seed: c.common.seed,
    };
    sampler.validate(c.n)?;

    let outcome = run_shim(&chain, &sampler, &config, c.common.seed)?;
    let hist = &outcome.state.history;
    write_history_csv(hist, create(&out.join("shim_history.csv"))?)?;
    write_json(
        &out.join("shim_trajectories.json"),
        &json!({
            "phi": hist.iter().map(|r| &r.phi).collect::<Vec<_>>(),
            "j_prog": hist.iter().map(|r| &r.j_prog).collect::<Vec<_>>(),
            "sigma_mtilde": hist.iter().map(|r| r.sigma_mtilde).collect::<Vec<_>>(),
        }),
    )?;
    let recovery = (c.bias > 0.0).then(|| {
        let neg: Vec<f64> = outcome.state.phi.iter().map(|p| -p).collect();
        mbco::shim::pearson(&neg, &hidden_bias)
    });
    let summary = ShimSummary {
        converged: outcome.converged,
        iterations: hist.len(),
        hidden_bias,
        coupler_error,
        phi: outcome.state.phi.clone(),
        j_prog: outcome.state.j_prog.clone(),
        recovery_correlation: recovery,
    };
    write_json(&out.join("shim_result.json"), &summary)?;
    shim_panels(out, hist)?;

    run.manifest(
        out,
        "shim",
        &c,
        c.common.seed,
        notes(&[("converged", json!(outcome.converged)), ("iterations", json!(hist.len()))]),
    )?;
    let status = if outcome.converged { "converged" } else { "NOT converged" };
    match recovery {
        Some(r) => println!("{status} after {} iterations; corr(−φ, bias) = {r:.4}", hist.len()),
        None => println!("{status} after {} iterations", hist.len()),
    }
    Ok(0)
}

fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for v in values {
        let b = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1.0;
    }
    let total = values.len().max(1) as f64;
    // step outline
    let mut pts = vec![(lo, 0.0)];
    for (b, c) in counts.iter().enumerate() {
        let x = lo + b as f64 * width;
        pts.push((x, c / total));
        pts.push((x + width, c / total));
    }
    pts.push((hi, 0.0));
    pts
}

fn shim_panels(out: &Path, hist: &[mbco::shim::ShimRecord]) -> Result<(), CliError> {
    let take = hist.len().min(10);
    let first: Vec<f64> = hist[..take].iter().flat_map(|r| r.magnetization.iter().copied()).collect();
    let last: Vec<f64> = hist[hist.len() - take..].iter().flat_map(|r| r.magnetization.iter().copied()).collect();
    let bound = first.iter().chain(&last).fold(1e-3_f64, |a, v| a.max(v.abs()));
    write_svg(
        &out.join("shim_a_magnetization.svg"),
        &Figure::new("per-qubit magnetization", "m̃", "fraction")
            .line("first iterations", histogram(&first, -bound, bound, 30))
            .line("last iterations", histogram(&last, -bound, bound, 30)),
    )?;

    let series = |f: &dyn Fn(&mbco::shim::ShimRecord) -> &Vec<f64>, title: &str, ylabel: &str| {
        let width = hist.first().map(|r| f(r).len()).unwrap_or(0);
        (0..width).fold(Figure::new(title, "iteration", ylabel), |fig, i| {
            fig.line("", hist.iter().map(|r| (r.iter as f64, f(r)[i])).collect())
        })
    };
    write_svg(&out.join("shim_b_couplers.svg"), &series(&|r| &r.j_prog, "programmed couplers", "J"))?;
    write_svg(&out.join("shim_c_flux_offsets.svg"), &series(&|r| &r.phi, "flux-bias offsets", "φ"))?;
    write_svg(
        &out.join("shim_d_sigma.svg"),
        &Figure::new("spread of qubit magnetizations", "iteration", "σ_m̃")
            .line("σ_m̃", hist.iter().map(|r| (r.iter as f64, r.sigma_mtilde)).collect()),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    tau_ns: f64,
    k_block: f64,
    k_ed: f64,
    dk: f64,
    p_block: f64,
    p_ed: f64,
    dp: f64,
}

pub fn oracle(args: &OracleArgs, run: &Run) -> Result<u8, CliError> {
    let c = args.resolve()?;
    if c.n > mbco::ed::MAX_SITES {
        return Err(CliError::Config(format!("oracle needs N <= {}, got {}", mbco::ed::MAX_SITES, c.n)));
    }
    let chain = ChainSpec::new(c.n, c.j, c.delta, c.parity)?;
    let schedule = c.schedule.build()?;
    if c.taus.is_empty() {
        return Err(CliError::Config("empty tau list".into()));
    }
    prepare_out(&c.common.out, c.common.threads)?;
    let solver = SolverConfig { tol: c.integrator_tol, ..SolverConfig::default() };
    let disorder = c
        .disorder
        .map(|d| DisorderRealization::sample(d, c.n, c.common.seed, 0, solver.grid))
        .transpose()?;
    let fields = disorder.as_ref().map(|d| d.h_site.clone()).unwrap_or_else(|| vec![1.0; c.n]);

    let mut rows = Vec::new();
    for &tau in &c.taus {
        let states = evolve_chain(&chain, &schedule, tau, &solver, disorder.as_ref())?;
        let block = quench_result(tau, &states, &chain)?;
        let problem = DenseQuenchProblem::with_fields(chain, fields.clone(), schedule.clone(), tau)?;
        let ed = ed_observables(&ed_evolve(&problem, c.ed_tol)?, &chain)?;
        rows.push(OracleRow {
            tau_ns: tau,
            k_block: block.k,
            k_ed: ed.k,
            dk: (block.k - ed.k).abs(),
            p_block: block.p,
            p_ed: ed.p,
            dp: (block.p - ed.p).abs(),
        });
    }

    println!("{:>10} {:>14} {:>14} {:>10} {:>14} {:>14} {:>10}", "tau_ns", "K_block", "K_ED", "|dK|", "P_block", "P_ED", "|dP|");
    for r in &rows {
        println!(
            "{:>10.4} {:>14.9} {:>14.9} {:>10.2e} {:>14.9} {:>14.9} {:>10.2e}",
            r.tau_ns, r.k_block, r.k_ed, r.dk, r.p_block, r.p_ed, r.dp
        );
    }
    let worst = rows.iter().map(|r| r.dk.max(r.dp)).fold(0.0, f64::max);
    let mut w = csv::Writer::from_writer(create(&c.common.out.join("oracle.csv"))?);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let approximation = c.disorder.is_some();
    run.manifest(
        &c.common.out,
        "oracle",
        &c,
        c.common.seed,
        notes(&[("max_difference", json!(worst)), ("approximation", json!(approximation))]),
    )?;
    if approximation {
        println!("approximation: disordered blocks use the elastic 8x8 reduction; max difference {worst:.3e}");
        return Ok(0);
    }
    if worst > c.tol {
        println!("FAIL: max difference {worst:.3e} exceeds {:.1e}", c.tol);
        return Ok(1);
    }
    println!("ok: max difference {worst:.3e} within {:.1e}", c.tol);
    Ok(0)
}

pub fn feasibility(args: &FeasibilityArgs, run: &Run) -> Result<u8, CliError> {
    let c = args.resolve()?;
    for (name, v) in [("tau_max", c.tau_max), ("delta_tau", c.delta_tau), ("omega", c.omega), ("t_device", c.t_device), ("coherence", c.coherence)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} must be positive, got {v}")));
        }
    }
    prepare_out(&c.common.out, c.common.threads)?;
    let report = feasibility_check_with(c.tau_max, c.delta_tau, c.omega, c.t_device, c.coherence);
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    println!(
        "(1) coherence: tau_max = {} ns vs window {} ns ... {}",
        report.tau_max_ns,
        report.coherence_ns,
        mark(report.coherence_ok)
    );
    println!(
        "(2) sampling: Omega = {} GHz vs Nyquist 1/(2*dtau) = {} GHz ... {}",
        report.omega_ghz,
        report.nyquist_ghz,
        mark(report.nyquist_ok)
    );
    println!(
        "(3) temperature: T = {} mK vs T* = h*Omega/k_B = {:.1} mK (hbar*Omega/k_B = {:.1} mK) ... {}",
        report.t_device_mk,
        report.t_star_h_mk,
        report.t_star_hbar_mk,
        mark(report.temperature_ok)
    );
    write_json(&c.common.out.join("feasibility.json"), &report)?;
    run.manifest(&c.common.out, "feasibility", &c, c.common.seed, Map::new())?;
    Ok(0)
}

use mbco::model::ChainSpec;
use mbco::shim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring(n: usize, j: f64, h: f64) -> RingProblem {
    RingProblem::new(vec![j; n], vec![h; n]).unwrap()
}

#[test]
fn infinite_temperature_is_a_fair_coin() {
    let n = 8;
    let shots = 20_000;
    let cfg = NoisySamplerConfig::clean(n, 1e6, 3, 11);
    let spins = noisy_sampler(&ring(n, 1.0, 0.0), &cfg, shots).unwrap();
    let set = SampleSet::plain(n, spins).unwrap();
    let total: f64 = (0..n).map(|i| set.logical_magnetization(i)).sum::<f64>() / n as f64;
    let se = 1.0 / ((shots * n) as f64).sqrt();
    assert!(total.abs() < 3.0 * se, "{total} vs {se}");
    for i in 0..n {
        assert!(set.logical_magnetization(i).abs() < 3.0 / (shots as f64).sqrt());
    }
}

#[test]
fn energy_histogram_matches_enumeration() {
    let n = 8;
    let shots = 40_000;
    let problem = RingProblem::new(vec![1.0, 0.6, 1.0, 0.6, 1.0, 0.6, 1.0, 0.6], vec![0.2, 0.0, -0.1, 0.0, 0.3, 0.0, 0.0, -0.2]).unwrap();
    let cfg = NoisySamplerConfig::clean(n, 1.0, 40, 3);

    let key = |e: f64| (e * 1e6).round() as i64;
    let mut exact = std::collections::BTreeMap::new();
    let mut z_sum = 0.0;
    for bits in 0u32..(1 << n) {
        let z: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        let e = problem.energy(&z);
        let w = (-e).exp();
        *exact.entry(key(e)).or_insert(0.0) += w;
        z_sum += w;
    }

    let spins = noisy_sampler(&problem, &cfg, shots).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for z in spins.chunks(n) {
        *counts.entry(key(problem.energy(z))).or_insert(0usize) += 1;
    }
    for (e, w) in &exact {
        let p = w / z_sum;
        let expected = p * shots as f64;
        let sd = (shots as f64 * p * (1.0 - p)).sqrt();
        let got = *counts.get(e).unwrap_or(&0) as f64;
        assert!((got - expected).abs() <= 3.0 * sd.max(1.0), "E={e}: {got} vs {expected} ± {sd}");
    }
}

#[test]
fn frustration_is_gauge_invariant() {
    let n = 8;
    let problem = ring(n, 0.7, 0.0);
    let cfg = NoisySamplerConfig::clean(n, 1.0, 20, 5);
    let plain = gauge_sample(&cfg, &problem, &[0.0; 8], 1, 10_000, 1).unwrap();
    let gauged = gauge_sample(&cfg, &problem, &[0.0; 8], 16, 625, 2).unwrap();
    for b in 0..n {
        let p1 = frustration_prob(&plain, b, (b + 1) % n, 0.7).unwrap();
        let p2 = frustration_prob(&gauged, b, (b + 1) % n, 0.7).unwrap();
        let se = (p1 * (1.0 - p1) / 10_000.0 * 2.0).sqrt();
        assert!((p1 - p2).abs() < 4.0 * se, "bond {b}: {p1} vs {p2}");
    }
}

#[test]
fn gauges_average_out_a_uniform_hidden_bias() {
    let n = 8;
    let mut cfg = NoisySamplerConfig::clean(n, 1.0, 20, 7);
    cfg.hidden_bias = vec![0.3; n];
    let problem = ring(n, 0.2, 0.0);
    let ensemble = |g: usize| {
        let set = gauge_sample(&cfg, &problem, &[0.0; 8], g, 16_000 / g, 4).unwrap();
        (0..n).map(|i| set.logical_magnetization(i)).sum::<f64>() / n as f64
    };
    let one = ensemble(1);
    let many = ensemble(16);
    assert!(one > 0.15, "{one}");
    assert!(many.abs() < one / 4.0, "{many} vs {one}");
}

#[test]
fn flux_offsets_act_on_hardware_qubits() {
    let n = 8;
    let cfg = NoisySamplerConfig::clean(n, 1.0, 20, 7);
    let problem = ring(n, 0.5, 0.0);
    let set = gauge_sample(&cfg, &problem, &[0.3; 8], 8, 1000, 4).unwrap();
    for m in set.hardware_magnetizations() {
        assert!(m > 0.15, "{m}");
    }
}

#[test]
fn clean_device_converges_immediately() {
    let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
    let sampler = NoisySamplerConfig::clean(16, 1.0, 20, 8);
    let out = run_shim(&chain, &sampler, &ShimConfig { n_iterations: 5, ..ShimConfig::default() }, 1).unwrap();
    assert!(out.converged);
    assert!(out.state.history.len() <= 2, "{}", out.state.history.len());
}

#[test]
fn recovers_injected_biases() {
    let n = 32;
    let chain = ChainSpec::even(n, 1.0, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let bias: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 0.05 } else { -0.05 }).collect();
    let mut sampler = NoisySamplerConfig::clean(n, 1.0, 20, 9);
    sampler.hidden_bias = bias.clone();
    let config = ShimConfig { eta_phi: 0.25, n_iterations: 30, ..ShimConfig::default() };
    let out = run_shim(&chain, &sampler, &config, 2).unwrap();
    assert!(out.converged);
    let neg: Vec<f64> = out.state.phi.iter().map(|p| -p).collect();
    assert!(pearson(&neg, &bias) > 0.9);
    let first = out.state.history.first().unwrap().sigma_mtilde;
    let last = out.state.history.last().unwrap().sigma_mtilde;
    assert!(last < 0.5 * first);
}

#[test]
fn equalizes_miscalibrated_couplers() {
    let n = 16;
    let chain = ChainSpec::even(n, 1.0, 0.3).unwrap();
    let mut sampler = NoisySamplerConfig::clean(n, 1.0, 20, 3);
    sampler.coupler_error = (0..n).map(|b| if b % 4 < 2 { 0.8 } else { 1.2 }).collect();
    let config = ShimConfig { eta_j: 0.5, n_iterations: 40, ..ShimConfig::default() };
    let out = run_shim(&chain, &sampler, &config, 5).unwrap();
    let hist = &out.state.history;
    let spread = |r: &ShimRecord| r.orbit_std_pfrust.iter().cloned().fold(0.0, f64::max);
    assert!(spread(hist.last().unwrap()) < 0.5 * spread(&hist[0]));
    // weakened couplers were raised in the programmed values
    let j = &out.state.j_prog;
    assert!(j[0] > j[2] && j[1] > j[3]);
    // each orbit keeps its programmed mean
    for orbit in &out.orbits.coupler_orbits {
        let before: f64 = orbit.iter().map(|&b| hist[0].j_prog[b]).sum();
        let after: f64 = orbit.iter().map(|&b| j[b]).sum();
        assert!((before - after).abs() < 1e-12);
    }
}

#[test]
fn zero_iterations_is_rejected() {
    let chain = ChainSpec::even(8, 1.0, 0.3).unwrap();
    let sampler = NoisySamplerConfig::clean(8, 1.0, 5, 0);
    assert!(run_shim(&chain, &sampler, &ShimConfig { n_iterations: 0, ..ShimConfig::default() }, 0).is_err());
}

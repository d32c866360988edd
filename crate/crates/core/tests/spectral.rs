use std::f64::consts::PI;

use mbco::model::ChainSpec;
use mbco::observables::QuenchResult;
use mbco::spectral::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn result(tau: f64, p_strong: f64, p_weak: f64) -> QuenchResult {
    QuenchResult {
        tau,
        k: (p_strong + p_weak) / 2.0,
        p: (p_weak - p_strong) / 2.0,
        p_strong,
        p_weak,
        stderr_k: 0.0,
        stderr_p: 0.0,
    }
}

fn flat(points: usize, dtau: f64) -> Vec<QuenchResult> {
    (0..points).map(|i| result(i as f64 * dtau, 0.30, 0.36)).collect()
}

fn full_window(results: &[QuenchResult]) -> SpectralOptions {
    SpectralOptions { window: (results[0].tau, results.last().unwrap().tau), detrend: Detrend::Mean }
}

/// Spectrum of the all-shot P estimates with full-sample σ attached.
fn noisy_spectrum(results: &[QuenchResult], chain: &ChainSpec, shots: usize, seed: u64, n_series: usize) -> Spectrum {
    let tables = simulate_shots(results, chain, shots, seed).unwrap();
    let tau: Vec<f64> = results.iter().map(|r| r.tau).collect();
    let values = tables.iter().map(|t| t.p_full()).collect();
    let series = TauSeries::new(tau.clone(), values, "").unwrap();
    let opts = full_window(results);
    let mut spec = windowed_spectrum(&series, &opts).unwrap();
    let noise = bootstrap_noise(&tables, &tau, n_series, seed ^ 0xA5A5, &opts).unwrap();
    spec.sigma = Some(noise.full_sample_sigma());
    spec
}

#[test]
fn shot_estimate_converges_at_inverse_root_rate() {
    let chain = ChainSpec::even(40, 1.0, 0.3).unwrap();
    let r = result(1.0, 0.22, 0.31);
    let bonds = chain.n() as f64;
    let predicted = |shots: usize| {
        let half = bonds / 2.0;
        (half * (r.p_weak * (1.0 - r.p_weak) + r.p_strong * (1.0 - r.p_strong)) / (bonds * bonds * shots as f64)).sqrt()
    };
    let trials = 40;
    let mut rms = Vec::new();
    for shots in [1_000, 10_000, 100_000] {
        let sq: f64 = (0..trials)
            .map(|t| (simulate_shot_table(&r, &chain, shots, 77, t).unwrap().p_full() - r.p).powi(2))
            .sum();
        let err = (sq / trials as f64).sqrt();
        // 40 trials put the RMS within about ±25% of its expectation
        assert!((err / predicted(shots) - 1.0).abs() < 0.3, "shots={shots}: {err} vs {}", predicted(shots));
        rms.push(err);
    }
    for w in rms.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.4, "{ratio}");
    }
}

#[test]
fn sigma_falls_as_inverse_root_of_shots_per_series() {
    let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
    let results = flat(40, 0.5);
    let opts = full_window(&results);
    let median = |shots: usize| bootstrap_from_results(&results, &chain, shots, 3, 200, 4, &opts).unwrap().median_sigma();
    let ratio = median(200 * 400) / median(200 * 800);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn repartitioning_reproduces_the_noise_level() {
    let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
    let results = flat(60, 0.25);
    let opts = full_window(&results);
    let tables = simulate_shots(&results, &chain, 10_000, 8).unwrap();
    let tau: Vec<f64> = results.iter().map(|r| r.tau).collect();
    let a = bootstrap_noise(&tables, &tau, 1000, 1, &opts).unwrap().sigma_series;
    let b = bootstrap_noise(&tables, &tau, 1000, 2, &opts).unwrap().sigma_series;
    let diff: f64 = a[1..].iter().zip(&b[1..]).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = a[1..].iter().map(|x| x * x).sum();
    let rel = (diff / norm).sqrt();
    assert!(rel < 0.05, "{rel}");
}

/// Significance of a tone whose own DFT amplitude sits `excess` noise
/// levels above the baseline of a shot-noise spectrum.
fn injected_significance(seed: u64, bin: usize, excess: f64) -> PeakReport {
    let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
    let results = flat(100, 0.2);
    let mut spec = noisy_spectrum(&results, &chain, 4000, seed, 200);
    let sigma = spec.sigma.clone().unwrap();
    let band = (spec.omega[1], spec.nyquist());
    let baseline = detect_peak(&spec, band, None).unwrap().baseline;
    let amp = (baseline + excess * sigma[bin]) * 2.0 / spec.samples as f64;
    let omega0 = spec.omega[bin];
    let tables = simulate_shots(&results, &chain, 4000, seed).unwrap();
    let tau: Vec<f64> = results.iter().map(|r| r.tau).collect();
    let values = tables.iter().zip(&tau).map(|(t, &x)| t.p_full() + amp * (2.0 * PI * omega0 * x).sin()).collect();
    let series = TauSeries::new(tau, values, "").unwrap();
    spec.s = windowed_spectrum(&series, &full_window(&results)).unwrap().s;
    detect_peak(&spec, band, None).unwrap()
}

#[test]
fn injected_tone_is_detected() {
    let mut sig: Vec<f64> = (0..20u64)
        .map(|seed| {
            let report = injected_significance(100 + seed, 23, 10.0);
            assert_eq!(report.bin, 23);
            report.significance
        })
        .collect();
    sig.sort_by(f64::total_cmp);
    // the noise component in phase with the tone moves a single draw by
    // about ±1.2σ, so the bound applies to the typical draw
    assert!(sig[10] >= 9.0, "{sig:?}");
    assert!(sig[0] >= 6.0, "{sig:?}");
}

#[test]
fn pure_noise_rarely_crosses_four_sigma() {
    let chain = ChainSpec::even(16, 1.0, 0.3).unwrap();
    let results = flat(100, 0.2);
    let hits = (0..100u64)
        .filter(|&seed| {
            let spec = noisy_spectrum(&results, &chain, 2000, 1000 + seed, 100);
            let band = (spec.omega[1], spec.nyquist());
            detect_peak(&spec, band, None).unwrap().significance >= 4.0
        })
        .count();
    assert!(hits < 5, "{hits} of 100 noise trials crossed 4σ");
}

#[test]
fn artificial_series_average_to_the_full_estimate() {
    let chain = ChainSpec::even(24, 1.0, 0.3).unwrap();
    let table = simulate_shot_table(&result(0.0, 0.2, 0.4), &chain, 6000, 5, 0).unwrap();
    for n_series in [2, 30, 6000] {
        let parts = partition_estimates(&table, n_series, &mut ChaCha8Rng::seed_from_u64(n_series as u64));
        let mean = parts.iter().sum::<f64>() / n_series as f64;
        assert!((mean - table.p_full()).abs() < 1e-12);
    }
}

#[test]
fn constant_series_has_no_spectrum_away_from_dc() {
    let series = TauSeries::uniform(0.0, 0.1, vec![0.37; 64], "").unwrap();
    let spec = windowed_spectrum(&series, &SpectralOptions { window: (0.0, 6.3), detrend: Detrend::None }).unwrap();
    assert!(spec.s[0] > 1.0);
    assert!(spec.s[1..].iter().all(|s| s.abs() < 1e-12));
}

#[test]
fn tau_csv_round_trip_feeds_the_spectrum() {
    let results: Vec<QuenchResult> = (0..32).map(|i| result(i as f64 * 0.5, 0.2, 0.2 + 0.05 * (i as f64).sin().abs())).collect();
    let mut buf = Vec::new();
    write_tau_csv(&results, &mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("tau_ns,P,K,stderr_P"));
    let records = read_tau_csv(buf.as_slice()).unwrap();
    let a = TauSeries::from_records(&records, Observable::P).unwrap();
    let b = TauSeries::from_results(&results, Observable::P).unwrap();
    assert_eq!(a.values(), b.values());
    let opts = SpectralOptions { window: (0.0, 15.5), detrend: Detrend::Linear };
    assert_eq!(windowed_spectrum(&a, &opts).unwrap().s, windowed_spectrum(&b, &opts).unwrap().s);
}

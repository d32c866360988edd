//! Brute-force evolution of the full 2^N spin state, used as an oracle for
//! the fermionic block solver.
//!
//! Basis state `b` has `σᶻ_n = +1` when bit `n` is clear. Pauli operators
//! act on the fly; no 2^N × 2^N matrix is stored. Time stepping is a
//! fourth-order Magnus scheme with a Taylor-series exponential and
//! step-doubling error control.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{AnnealSchedule, ChainSpec};

pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseQuenchProblem {
    pub chain: ChainSpec,
    /// Per-site transverse-field multipliers `h_n`; all ones when clean.
    pub h_site: Vec<f64>,
    pub schedule: AnnealSchedule,
    pub tau: f64,
}

impl DenseQuenchProblem {
    pub fn new(chain: ChainSpec, schedule: AnnealSchedule, tau: f64) -> Result<Self> {
        let h_site = vec![1.0; chain.n()];
        Self::with_fields(chain, h_site, schedule, tau)
    }

    pub fn with_fields(chain: ChainSpec, h_site: Vec<f64>, schedule: AnnealSchedule, tau: f64) -> Result<Self> {
        if chain.n() > MAX_SITES {
            return Err(Error::InvalidArgument(format!("N = {} exceeds the oracle limit {MAX_SITES}", chain.n())));
        }
        if h_site.len() != chain.n() {
            return Err(Error::DimensionMismatch { expected: chain.n(), got: h_site.len() });
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau = {tau} must be >= 0")));
        }
        Ok(Self { chain, h_site, schedule, tau })
    }

    pub fn dim(&self) -> usize {
        1 << self.chain.n()
    }
}

/// `H(s)/h = 𝒥(s)·Z + Γ(s)·X` with `Z = Σ J_n σᶻσᶻ` diagonal and
/// `X = Σ h_n σˣ_n`.
struct SpinHamiltonian {
    n: usize,
    zz_diag: Vec<f64>,
    h_site: Vec<f64>,
    z_norm: f64,
    x_norm: f64,
}

impl SpinHamiltonian {
    fn new(chain: &ChainSpec, h_site: &[f64]) -> Self {
        let n = chain.n();
        let zz_diag: Vec<f64> = (0..1usize << n)
            .map(|b| {
                (0..n)
                    .map(|bond| chain.bond_coupling(bond) * zz_sign(b, bond, (bond + 1) % n))
                    .sum()
            })
            .collect();
        let z_norm = zz_diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let x_norm = h_site.iter().map(|h| h.abs()).sum();
        Self { n, zz_diag, h_site: h_site.to_vec(), z_norm, x_norm }
    }

    fn apply_z(&self, x: &[C64], out: &mut [C64]) {
        for ((o, v), d) in out.iter_mut().zip(x).zip(&self.zz_diag) {
            *o = v * d;
        }
    }

    fn apply_x(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::default());
        for site in 0..self.n {
            let mask = 1usize << site;
            let h = self.h_site[site];
            for (b, o) in out.iter_mut().enumerate() {
                *o += x[b ^ mask] * h;
            }
        }
    }

    fn energy(&self, coupling: f64, field: f64, psi: &[C64]) -> C64 {
        let mut z = vec![C64::default(); psi.len()];
        let mut x = vec![C64::default(); psi.len()];
        self.apply_z(psi, &mut z);
        self.apply_x(psi, &mut x);
        psi.iter()
            .zip(z.iter().zip(&x))
            .map(|(p, (zv, xv))| p.conj() * (zv * coupling + xv * field))
            .sum()
    }
}

fn zz_sign(b: usize, i: usize, j: usize) -> f64 {
    if ((b >> i) ^ (b >> j)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Ground state of `Σ h_n σˣ_n`: each spin anti-aligned with its field.
pub fn initial_state(h_site: &[f64]) -> Vec<C64> {
    let n = h_site.len();
    let amp = (0.5_f64).powf(n as f64 / 2.0);
    (0..1usize << n)
        .map(|b| {
            // |−⟩ = (|↑⟩ − |↓⟩)/√2 on sites with h > 0, |+⟩ otherwise
            let sign = (0..n).filter(|&i| h_site[i] > 0.0 && (b >> i) & 1 == 1).count();
            C64::new(if sign % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect()
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // √3/12
const MAX_PHASE_PER_STEP: f64 = 8.0;

struct Magnus<'a> {
    ham: &'a SpinHamiltonian,
    schedule: &'a AnnealSchedule,
    omega: f64,
    zbuf: Vec<C64>,
    xbuf: Vec<C64>,
    tmp: Vec<C64>,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl Magnus<'_> {
    /// `out = Ω ψ` for the step `[s, s + h]`, with
    /// `Ω = −iω[(h/2)(H₁ + H₂)] − ω²(√3/12)h²[H₂, H₁]`.
    fn apply_omega(&mut self, s: f64, h: f64, psi: &[C64], out: &mut [C64]) {
        let (a1, g1) = self.schedule.eval_unchecked(s + h * (0.5 - GAUSS_OFFSET));
        let (a2, g2) = self.schedule.eval_unchecked(s + h * (0.5 + GAUSS_OFFSET));
        let w = self.omega;
        let lin_z = C64::new(0.0, -w * h * 0.5 * (a1 + a2));
        let lin_x = C64::new(0.0, -w * h * 0.5 * (g1 + g2));
        // [H₂, H₁] = (a₂g₁ − g₂a₁)[Z, X]
        let comm = -w * w * COMMUTATOR_WEIGHT * h * h * (a2 * g1 - g2 * a1);

        self.ham.apply_z(psi, &mut self.zbuf);
        self.ham.apply_x(psi, &mut self.xbuf);
        for i in 0..psi.len() {
            out[i] = self.zbuf[i] * lin_z + self.xbuf[i] * lin_x;
        }
        if comm != 0.0 {
            // Z X ψ − X Z ψ
            self.ham.apply_x(&self.zbuf, &mut self.tmp);
            for i in 0..psi.len() {
                out[i] += (self.xbuf[i] * self.ham.zz_diag[i] - self.tmp[i]) * comm;
            }
        }
    }

    /// `ψ ← exp(Ω) ψ` by Taylor series.
    fn step(&mut self, s: f64, h: f64, psi: &mut [C64]) {
        let mut term = std::mem::take(&mut self.term);
        let mut next = std::mem::take(&mut self.next);
        term.copy_from_slice(psi);
        for m in 1..200 {
            self.apply_omega(s, h, &term, &mut next);
            let inv = 1.0 / m as f64;
            let mut size = 0.0_f64;
            for (t, nx) in term.iter_mut().zip(next.iter()) {
                *t = nx * inv;
                size = size.max(t.norm());
            }
            for (p, t) in psi.iter_mut().zip(term.iter()) {
                *p += t;
            }
            if size < 1e-17 {
                break;
            }
        }
        self.term = term;
        self.next = next;
    }
}

/// Integrates the full Schrödinger equation `dψ/ds = −i·2π·τ·H(s)ψ` from the
/// transverse-field ground state. `tol` bounds the local error per step.
pub fn ed_evolve(problem: &DenseQuenchProblem, tol: f64) -> Result<Vec<C64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be > 0")));
    }
    let mut psi = initial_state(&problem.h_site);
    if problem.tau == 0.0 {
        return Ok(psi);
    }
    let ham = SpinHamiltonian::new(&problem.chain, &problem.h_site);
    let dim = problem.dim();
    let omega = 2.0 * PI * problem.tau;

    // bound on ω‖H(s)‖ for step limiting
    let (mut a_max, mut g_max) = (0.0_f64, 0.0_f64);
    for i in 0..=200 {
        let (a, g) = problem.schedule.eval_unchecked(i as f64 / 200.0);
        a_max = a_max.max(a);
        g_max = g_max.max(g);
    }
    let rate_bound = omega * (a_max * ham.z_norm + g_max * ham.x_norm);
    let h_cap = if rate_bound > 0.0 { (MAX_PHASE_PER_STEP / rate_bound).min(1.0) } else { 1.0 };

    let mut magnus = Magnus {
        ham: &ham,
        schedule: &problem.schedule,
        omega,
        zbuf: vec![C64::default(); dim],
        xbuf: vec![C64::default(); dim],
        tmp: vec![C64::default(); dim],
        term: vec![C64::default(); dim],
        next: vec![C64::default(); dim],
    };

    // steps end on schedule knots so every step sees a smooth H(s)
    let mut stops = problem.schedule.knots();
    stops.push(1.0);
    let mut next_stop = 0;

    let mut coarse = vec![C64::default(); dim];
    let mut s = 0.0;
    let mut h = h_cap;
    let mut steps = 0usize;
    while s < 1.0 {
        steps += 1;
        if steps > 20_000_000 {
            return Err(Error::Integration { tau: problem.tau, k: f64::NAN, reason: "oracle step budget exhausted".into() });
        }
        let target = stops[next_stop];
        let h_try = h.min(target - s);
        coarse.copy_from_slice(&psi);
        magnus.step(s, h_try, &mut coarse);
        let mut fine = psi.clone();
        magnus.step(s, 0.5 * h_try, &mut fine);
        magnus.step(s + 0.5 * h_try, 0.5 * h_try, &mut fine);
        let err = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max)
            / 15.0;
        if !err.is_finite() {
            return Err(Error::Integration { tau: problem.tau, k: f64::NAN, reason: "non-finite oracle state".into() });
        }
        if err <= tol {
            psi = fine;
            if h_try >= target - s {
                s = target;
                next_stop += 1;
            } else {
                s += h_try;
            }
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
        h = (h_try * factor).min(h_cap);
        if h < 1e-14 {
            return Err(Error::Integration { tau: problem.tau, k: f64::NAN, reason: "oracle step underflow".into() });
        }
    }

    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm - 1.0).abs();
    if drift > 1e-9 {
        return Err(Error::NormDrift { drift });
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdObservables {
    pub k: f64,
    pub p: f64,
    /// `⟨σᶻ_n σᶻ_{n+1}⟩` for bonds `n = 0..N`.
    pub bond_correlators: Vec<f64>,
}

/// Kink density, staggered difference and per-bond correlators from a
/// normalized spin state.
pub fn ed_observables(state: &[C64], chain: &ChainSpec) -> Result<EdObservables> {
    let n = chain.n();
    if state.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, got: state.len() });
    }
    let bond_correlators: Vec<f64> = (0..n)
        .map(|bond| {
            state
                .iter()
                .enumerate()
                .map(|(b, a)| a.norm_sqr() * zz_sign(b, bond, (bond + 1) % n))
                .sum()
        })
        .collect();
    let nf = n as f64;
    let k = bond_correlators.iter().map(|c| 1.0 + c).sum::<f64>() / (2.0 * nf);
    let p = bond_correlators
        .iter()
        .enumerate()
        .map(|(bond, c)| if chain.is_strong(bond) { -c } else { *c })
        .sum::<f64>()
        / (2.0 * nf);
    Ok(EdObservables { k, p, bond_correlators })
}

/// `⟨ψ|H(s)|ψ⟩` in GHz.
pub fn ed_energy(problem: &DenseQuenchProblem, s: f64, state: &[C64]) -> C64 {
    let ham = SpinHamiltonian::new(&problem.chain, &problem.h_site);
    let (a, g) = problem.schedule.eval_unchecked(s);
    ham.energy(a, g, state)
}

/// `⟨σᶻ_site⟩`.
pub fn ed_magnetization(state: &[C64], site: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(b, a)| if (b >> site) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

//! Momentum-space blocks of the Jordan–Wigner fermionized chain and their
//! time evolution across an anneal.
//!
//! Each block is spanned by occupation states `|n_k, n_{-k}, n_{π-k}, n_{π+k}⟩`
//! of the quadruplet `{k, -k, π-k, π+k}` built as
//! `(ψ†_k)^{n1} (ψ†_{-k})^{n2} (ψ†_{π-k})^{n3} (ψ†_{π+k})^{n4} |0⟩`.
//! Starting from the fermion vacuum only six of the sixteen states are
//! reachable in the clean chain; backscattering off a disordered transverse
//! field opens two more.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{dop853, StepStats};
use crate::model::{AnnealSchedule, ChainSpec};

/// Occupations of the clean six-state block, in matrix order.
pub const BASIS6: [[u8; 4]; 6] = [
    [1, 1, 1, 1],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
    [0, 0, 0, 0],
];

/// Occupations of the eight-state block: [`BASIS6`] plus the two states
/// reached by backscattering.
pub const BASIS8: [[u8; 4]; 8] = [
    [1, 1, 1, 1],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
    [0, 0, 0, 0],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
];

/// Index of the vacuum `|0,0,0,0⟩`.
pub const VACUUM: usize = 5;

/// Largest state-norm drift repaired by renormalization.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

const MAX_STEPS: usize = 50_000_000;

/// Momentum quantization on the ring.
///
/// The fermion vacuum has even parity, and in that sector the
/// Jordan–Wigner boundary term makes the fermions antiperiodic:
/// `k = π(2j + 1)/N`. The quadruplets then tile all N modes and the block
/// solution is exact for the periodic spin ring. `Periodic` uses
/// `k = 2πj/N` and drops the `k = 0, π/2` boundary modes, an O(1/N)
/// approximation kept for comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentumGrid {
    #[default]
    Antiperiodic,
    Periodic,
}

/// Representative momenta in `(0, π/2)`, ascending; each stands for its
/// quadruplet.
pub fn allowed_momenta(n: usize, grid: MomentumGrid) -> Result<Vec<f64>> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidChain(format!("N = {n} is not divisible by 4")));
    }
    let nf = n as f64;
    Ok(match grid {
        MomentumGrid::Antiperiodic => (0..n / 4).map(|j| PI * (2 * j + 1) as f64 / nf).collect(),
        MomentumGrid::Periodic => (1..n / 4).map(|j| 2.0 * PI * j as f64 / nf).collect(),
    })
}

/// Dense Hermitian block of dimension 6 or 8, stored in an 8×8 array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMatrix {
    dim: usize,
    m: [[C64; 8]; 8],
}

impl BlockMatrix {
    fn zeros(dim: usize) -> Self {
        Self { dim, m: [[C64::default(); 8]; 8] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        assert!(row < self.dim && col < self.dim);
        self.m[row][col]
    }

    /// `out = self · x`.
    #[inline]
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (row, o) in self.m[..self.dim].iter().zip(out.iter_mut()) {
            *o = row[..self.dim].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `⟨x|M|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut y = [C64::default(); 8];
        self.apply(x, &mut y[..self.dim]);
        x.iter().zip(&y[..self.dim]).map(|(a, b)| a.conj() * b).sum()
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim).map(|i| self.m[i][..self.dim].to_vec()).collect()
    }
}

/// A quadruplet with its trigonometric factors cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumBlock {
    k: f64,
    cos_k: f64,
    sin_k: f64,
    dim: usize,
}

impl MomentumBlock {
    pub fn new(k: f64, dim: usize) -> Self {
        assert!(dim == 6 || dim == 8, "block dimension must be 6 or 8");
        Self { k, cos_k: k.cos(), sin_k: k.sin(), dim }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &'static [[u8; 4]] {
        &BASIS8[..self.dim]
    }

    /// Block Hamiltonian in GHz for couplings `j`, staggering `delta`
    /// (signed: its sign selects which bond parity is strong), uniform field
    /// `h` and backscattering amplitude `b = Γ·h_{2k}/√N`. `b` is ignored for
    /// six-dimensional blocks.
    pub fn hamiltonian(&self, j: f64, delta: f64, h: f64, b: C64) -> BlockMatrix {
        let (c, s) = (self.cos_k, self.sin_k);
        let i = C64::i();
        let r = |x: f64| C64::new(x, 0.0);
        let js = i * (2.0 * j * s);
        let dc = r(2.0 * delta * c);
        let ds = i * (2.0 * delta * s);

        let mut out = BlockMatrix::zeros(self.dim);
        let m = &mut out.m;
        m[0] = pad([r(4.0 * h), -js, -dc, -dc, -js, r(0.0)]);
        m[1] = pad([js, r(-4.0 * j * c), -ds, -ds, r(0.0), -js]);
        m[2] = pad([-dc, ds, r(0.0), r(0.0), -ds, dc]);
        m[3] = pad([-dc, ds, r(0.0), r(0.0), -ds, dc]);
        m[4] = pad([js, r(0.0), ds, ds, r(4.0 * j * c), -js]);
        m[5] = pad([r(0.0), js, dc, dc, js, r(-4.0 * h)]);

        if self.dim == 8 {
            // Γ Σ_n h_n (2ψ†_n ψ_n − 1) contributes 2b ψ†_k ψ_{-k} + 2b* ψ†_{-k} ψ_k
            // + 2b* ψ†_{π-k} ψ_{π+k} + 2b ψ†_{π+k} ψ_{π-k}.
            let bb = b * 2.0;
            for row in [2, 3] {
                m[row][6] = bb.conj();
                m[row][7] = bb;
                m[6][row] = bb;
                m[7][row] = bb.conj();
            }
        }
        out
    }

    /// `Σ_n σᶻ_n σᶻ_{n+1}` restricted to the block.
    pub fn bond_sum_operator(&self) -> BlockMatrix {
        self.hamiltonian(1.0, 0.0, 0.0, C64::default())
    }

    /// `Σ_n (−1)^n σᶻ_n σᶻ_{n+1}` restricted to the block.
    pub fn staggered_bond_sum_operator(&self) -> BlockMatrix {
        self.hamiltonian(0.0, 1.0, 0.0, C64::default())
    }
}

fn pad(row: [C64; 6]) -> [C64; 8] {
    let mut out = [C64::default(); 8];
    out[..6].copy_from_slice(&row);
    out
}

/// Clean six-dimensional block `H_k` in GHz.
pub fn build_block6(k: f64, j_eff: f64, delta_eff: f64, h_eff: f64) -> BlockMatrix {
    MomentumBlock::new(k, 6).hamiltonian(j_eff, delta_eff, h_eff, C64::default())
}

/// Eight-dimensional block with backscattering amplitude
/// `backscatter = Γ(s)·h_{2k}/√N`.
pub fn build_block8(k: f64, j_eff: f64, delta_eff: f64, h_eff: f64, backscatter: C64) -> BlockMatrix {
    MomentumBlock::new(k, 8).hamiltonian(j_eff, delta_eff, h_eff, backscatter)
}

/// Final amplitudes of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub k: f64,
    pub amplitudes: Vec<C64>,
    /// `|‖ψ‖ − 1|` before renormalization.
    pub norm_drift: f64,
}

impl BlockState {
    pub fn vacuum(k: f64, dim: usize) -> Self {
        let mut amplitudes = vec![C64::default(); dim];
        amplitudes[VACUUM] = C64::new(1.0, 0.0);
        Self { k, amplitudes, norm_drift: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Integrates `dψ/ds = −i·2π·τ·H(s)·ψ` over `s ∈ [0, 1]` from the vacuum.
///
/// `builder(s)` returns the block Hamiltonian in GHz; `tau` is in ns. `tol`
/// is the target accuracy of the final amplitudes.
pub fn evolve_block<F>(k: f64, builder: F, tau: f64, tol: f64) -> Result<BlockState>
where
    F: Fn(f64) -> BlockMatrix,
{
    evolve_block_with_stats(k, builder, tau, tol).map(|(s, _)| s)
}

pub fn evolve_block_with_stats<F>(k: f64, builder: F, tau: f64, tol: f64) -> Result<(BlockState, StepStats)>
where
    F: Fn(f64) -> BlockMatrix,
{
    check_inputs(tau, tol)?;
    let dim = builder(0.0).dim();
    let fill = |s: f64, hr: &mut RealMat, hi: &mut RealMat| {
        let m = builder(s);
        for a in 0..dim {
            for b in 0..dim {
                hr[a][b] = m.m[a][b].re;
                hi[a][b] = m.m[a][b].im;
            }
        }
    };
    let vacuum = BlockState::vacuum(k, dim);
    let (amps, stats) = match dim {
        6 => integrate::<12, _>(&vacuum.amplitudes, tau, tol, true, fill),
        _ => integrate::<16, _>(&vacuum.amplitudes, tau, tol, true, fill),
    }
    .map_err(|e| Error::Integration { tau, k, reason: e.to_string() })?;
    finish(k, amps, tau).map(|s| (s, stats))
}

type RealMat = [[f64; 8]; 8];

fn check_inputs(tau: f64, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be > 0")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be >= 0")));
    }
    Ok(())
}

/// Per-step error target relative to the requested tolerance. Local errors
/// accumulate to a few hundred times the per-step target over an anneal, so
/// the step controller runs this much tighter and `tol` bounds the final
/// amplitudes instead.
const LOCAL_TOL_FACTOR: f64 = 1e-3;

/// Integrates with the state split as `[Re ψ, Im ψ]`, `R = 2·dim`.
/// `fill(s, Hr, Hi)` writes the real and imaginary parts of `H(s)`;
/// `complex = false` promises `Hi ≡ 0`.
fn integrate<const R: usize, F>(
    psi0: &[C64],
    tau: f64,
    tol: f64,
    complex: bool,
    mut fill: F,
) -> std::result::Result<(Vec<C64>, StepStats), crate::integrate::IntegrateError>
where
    F: FnMut(f64, &mut RealMat, &mut RealMat),
{
    let d = R / 2;
    debug_assert_eq!(psi0.len(), d);
    let mut y = [0.0; R];
    for (i, a) in psi0.iter().enumerate() {
        y[i] = a.re;
        y[d + i] = a.im;
    }
    if tau == 0.0 {
        return Ok((psi0.to_vec(), StepStats { accepted: 0, rejected: 0 }));
    }
    let omega = 2.0 * PI * tau;
    let mut hr = [[0.0; 8]; 8];
    let mut hi = [[0.0; 8]; 8];
    let stats = dop853(
        |s, y: &[f64; R], dy: &mut [f64; R]| {
            fill(s, &mut hr, &mut hi);
            let (x, z) = y.split_at(d);
            for a in 0..d {
                let row = &hr[a][..d];
                let mut re: f64 = row.iter().zip(z).map(|(h, v)| h * v).sum();
                let mut im: f64 = -row.iter().zip(x).map(|(h, v)| h * v).sum::<f64>();
                if complex {
                    let row = &hi[a][..d];
                    re += row.iter().zip(x).map(|(h, v)| h * v).sum::<f64>();
                    im += row.iter().zip(z).map(|(h, v)| h * v).sum::<f64>();
                }
                dy[a] = omega * re;
                dy[d + a] = omega * im;
            }
        },
        0.0,
        1.0,
        &mut y,
        tol * LOCAL_TOL_FACTOR,
        MAX_STEPS,
    )?;
    Ok(((0..d).map(|i| C64::new(y[i], y[d + i])).collect(), stats))
}

fn finish(k: f64, mut amplitudes: Vec<C64>, tau: f64) -> Result<BlockState> {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm - 1.0).abs();
    if drift > MAX_NORM_DRIFT {
        return Err(Error::Integration { tau, k, reason: format!("norm drift {drift:e}") });
    }
    for a in amplitudes.iter_mut() {
        *a /= norm;
    }
    Ok(BlockState { k, amplitudes, norm_drift: drift })
}

/// A block whose Hamiltonian is `𝒥(s)·A + Γ(s)·B`, stored in the diagonal
/// gauge `U` that makes `A` and `B` real symmetric. The clean block needs
/// `U = diag(1, i, 1, 1, i, −1)`; the two backscattered states pick up the
/// phase of `b` and its conjugate.
#[derive(Debug, Clone)]
pub(crate) struct GaugedBlock {
    k: f64,
    dim: usize,
    gauge: [C64; 8],
    coupling: RealMat,
    field: RealMat,
}

impl GaugedBlock {
    /// `j`, `delta`, `h` and `b` are the per-unit-schedule coefficients.
    pub(crate) fn new(block: &MomentumBlock, j: f64, delta: f64, h: f64, b: C64) -> Self {
        let dim = block.dim();
        let i = C64::i();
        let one = C64::new(1.0, 0.0);
        let phase = if b.norm() > 0.0 { b / b.norm() } else { one };
        let gauge = [one, i, one, one, i, -one, phase, phase.conj()];
        let rotate = |m: BlockMatrix| {
            let mut out = [[0.0; 8]; 8];
            for a in 0..dim {
                for c in 0..dim {
                    let v = gauge[a].conj() * m.m[a][c] * gauge[c];
                    debug_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
                    out[a][c] = v.re;
                }
            }
            out
        };
        let coupling = rotate(block.hamiltonian(j, delta, 0.0, C64::default()));
        let field = rotate(block.hamiltonian(0.0, 0.0, h, b));
        Self { k: block.k(), dim, gauge, coupling, field }
    }

    pub(crate) fn evolve(&self, schedule: &AnnealSchedule, tau: f64, tol: f64) -> Result<BlockState> {
        check_inputs(tau, tol)?;
        let mut psi0 = vec![C64::default(); self.dim];
        psi0[VACUUM] = self.gauge[VACUUM].conj();
        let fill = |s: f64, hr: &mut RealMat, _: &mut RealMat| {
            let (c, f) = schedule.eval_unchecked(s);
            for a in 0..self.dim {
                for b in 0..self.dim {
                    hr[a][b] = c * self.coupling[a][b] + f * self.field[a][b];
                }
            }
        };
        let (amps, _) = match self.dim {
            6 => integrate::<12, _>(&psi0, tau, tol, false, fill),
            _ => integrate::<16, _>(&psi0, tau, tol, false, fill),
        }
        .map_err(|e| Error::Integration { tau, k: self.k, reason: e.to_string() })?;
        let amps = amps.iter().zip(&self.gauge).map(|(a, u)| a * u).collect();
        finish(self.k, amps, tau)
    }
}

/// One static draw of transverse-field disorder `h_n = 1 + d·x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub d: f64,
    pub h_site: Vec<f64>,
    /// Momenta the backscattering amplitudes belong to.
    pub momenta: Vec<f64>,
    /// `h_{2k} = N^{-1/2} Σ_n e^{-2ikn} h_n`, one per momentum.
    pub h_2k: Vec<C64>,
}

impl DisorderRealization {
    pub fn from_fields(d: f64, h_site: Vec<f64>, grid: MomentumGrid) -> Result<Self> {
        let n = h_site.len();
        let momenta = allowed_momenta(n, grid)?;
        let h_2k = momenta.iter().map(|&k| fourier_component(&h_site, 2.0 * k)).collect();
        Ok(Self { d, h_site, momenta, h_2k })
    }

    /// Draws `x_n` uniformly from `[-1, 1]`. Stream `index` of `seed` gives
    /// an independent realization.
    pub fn sample(d: f64, n: usize, seed: u64, index: u64, grid: MomentumGrid) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("disorder strength {d} must be >= 0")));
        }
        allowed_momenta(n, grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let h_site = (0..n).map(|_| 1.0 + d * rng.random_range(-1.0..=1.0)).collect();
        Self::from_fields(d, h_site, grid)
    }

    pub fn n(&self) -> usize {
        self.h_site.len()
    }

    /// Mean of `h_n`: the q = 0 component, absorbed into the uniform field.
    pub fn mean_field(&self) -> f64 {
        self.h_site.iter().sum::<f64>() / self.h_site.len() as f64
    }

    /// `h_{2k}/√N`; multiply by `Γ(s)` for the block amplitude.
    pub fn backscatter(&self, index: usize) -> C64 {
        self.h_2k[index] / (self.n() as f64).sqrt()
    }
}

/// `sample_disorder` on the default momentum grid.
pub fn sample_disorder(d: f64, n: usize, seed: u64) -> Result<DisorderRealization> {
    DisorderRealization::sample(d, n, seed, 0, MomentumGrid::default())
}

/// `N^{-1/2} Σ_n e^{-iqn} f_n`.
pub fn fourier_component(f: &[f64], q: f64) -> C64 {
    let norm = (f.len() as f64).sqrt();
    f.iter()
        .enumerate()
        .map(|(n, &v)| C64::from_polar(v, -q * n as f64))
        .sum::<C64>()
        / norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub grid: MomentumGrid,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, grid: MomentumGrid::Antiperiodic }
    }
}

/// Evolves every block of the chain through the anneal. With disorder the
/// eight-dimensional blocks are used.
pub fn evolve_chain(
    chain: &ChainSpec,
    schedule: &AnnealSchedule,
    tau: f64,
    config: &SolverConfig,
    disorder: Option<&DisorderRealization>,
) -> Result<Vec<BlockState>> {
    let momenta = allowed_momenta(chain.n(), config.grid)?;
    if let Some(dis) = disorder {
        if dis.n() != chain.n() || dis.momenta != momenta {
            return Err(Error::DimensionMismatch { expected: chain.n(), got: dis.n() });
        }
    }
    let (j, delta) = (chain.j(), chain.signed_delta());
    let mean_field = disorder.map_or(1.0, |d| d.mean_field());
    let dim = if disorder.is_some() { 8 } else { 6 };
    momenta
        .par_iter()
        .enumerate()
        .map(|(idx, &k)| {
            let b = disorder.map_or(C64::default(), |d| d.backscatter(idx));
            GaugedBlock::new(&MomentumBlock::new(k, dim), j, delta, mean_field, b).evolve(schedule, tau, config.tol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn momenta_enumeration() {
        let p8 = allowed_momenta(8, MomentumGrid::Periodic).unwrap();
        assert_eq!(p8.len(), 1);
        assert_abs_diff_eq!(p8[0], PI / 4.0, epsilon = 1e-15);
        let p160 = allowed_momenta(160, MomentumGrid::Periodic).unwrap();
        assert_eq!(p160.len(), 39);
        for (j, k) in p160.iter().enumerate() {
            assert_abs_diff_eq!(*k, 2.0 * PI * (j + 1) as f64 / 160.0, epsilon = 1e-14);
        }
        assert!(allowed_momenta(4, MomentumGrid::Periodic).unwrap().is_empty());
        assert!(allowed_momenta(6, MomentumGrid::Periodic).is_err());

        let a4 = allowed_momenta(4, MomentumGrid::Antiperiodic).unwrap();
        assert_eq!(a4.len(), 1);
        assert_abs_diff_eq!(a4[0], PI / 4.0, epsilon = 1e-15);
        let a160 = allowed_momenta(160, MomentumGrid::Antiperiodic).unwrap();
        assert_eq!(a160.len(), 40);
        assert!(a160.windows(2).all(|w| w[1] > w[0]));
        assert!(a160.iter().all(|&k| k > 0.0 && k < PI / 2.0));
    }

    #[test]
    fn block6_corner_entries() {
        let m = build_block6(0.3, 1.2, 0.4, 2.5);
        assert_eq!(m.get(0, 0), C64::new(10.0, 0.0));
        assert_eq!(m.get(5, 5), C64::new(-10.0, 0.0));
        assert!(m.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn block6_delta_zero_decouples_dimer_states() {
        let m = build_block6(0.7, 1.3, 0.0, 0.8);
        for outer in [0, 1, 4, 5] {
            for inner in [2, 3] {
                assert_eq!(m.get(outer, inner), C64::default());
                assert_eq!(m.get(inner, outer), C64::default());
            }
        }
    }

    #[test]
    fn block8_zero_backscatter_is_block_diagonal() {
        let m6 = build_block6(0.2, 0.9, 0.3, 1.1);
        let m8 = build_block8(0.2, 0.9, 0.3, 1.1, C64::default());
        for i in 0..8 {
            for j in 0..8 {
                if i < 6 && j < 6 {
                    assert_eq!(m8.get(i, j), m6.get(i, j));
                } else {
                    assert_eq!(m8.get(i, j), C64::default());
                }
            }
        }
    }

    #[test]
    fn sudden_quench_returns_vacuum() {
        let s = evolve_block(0.4, |_| build_block6(0.4, 1.0, 0.2, 3.0), 0.0, 1e-8).unwrap();
        assert_eq!(s.amplitudes, BlockState::vacuum(0.4, 6).amplitudes);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(evolve_block(0.4, |_| build_block6(0.4, 1.0, 0.2, 3.0), 1.0, 0.0).is_err());
        assert!(evolve_block(0.4, |_| build_block6(0.4, 1.0, 0.2, 3.0), -1.0, 1e-8).is_err());
    }

    #[test]
    fn clean_disorder_has_no_backscattering() {
        let dis = sample_disorder(0.0, 16, 7).unwrap();
        assert!(dis.h_site.iter().all(|&h| h == 1.0));
        for h in &dis.h_2k {
            assert!(h.norm() < 1e-13);
        }
    }

    #[test]
    fn disorder_is_deterministic_and_bounded() {
        let a = DisorderRealization::sample(0.5, 32, 11, 3, MomentumGrid::Antiperiodic).unwrap();
        let b = DisorderRealization::sample(0.5, 32, 11, 3, MomentumGrid::Antiperiodic).unwrap();
        let c = DisorderRealization::sample(0.5, 32, 11, 4, MomentumGrid::Antiperiodic).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.h_site, c.h_site);
        assert!(a.h_site.iter().all(|&h| (0.5..=1.5).contains(&h)));
    }

    #[test]
    fn fourier_matches_single_particle_matrix_element() {
        // ⟨k| Σ_n h_n |n⟩⟨n| |k'⟩ with plane waves e^{ikn}/√N equals h_{k-k'}/√N.
        let dis = DisorderRealization::sample(0.7, 16, 5, 0, MomentumGrid::Antiperiodic).unwrap();
        let n = 16usize;
        for (idx, &k) in dis.momenta.iter().enumerate() {
            let direct: C64 = (0..n)
                .map(|site| {
                    let x = site as f64;
                    C64::from_polar(1.0, -k * x) * dis.h_site[site] * C64::from_polar(1.0, -k * x)
                })
                .sum::<C64>()
                / n as f64;
            assert!((direct - dis.backscatter(idx)).norm() < 1e-13);
        }
    }
}

//! Chain geometry, anneal schedules, the critical line and the
//! detectability checks for coherent oscillations.
//!
//! Frequencies are ordinary frequencies in GHz and times are in ns, so a
//! Hamiltonian entry `E` accumulates phase `2π·E·t`.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which bonds carry the strong coupling `J + Δ`. Bond `n` joins sites `n`
/// and `n + 1` (mod N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondParity {
    Even,
    Odd,
}

impl BondParity {
    pub fn flipped(self) -> Self {
        match self {
            BondParity::Even => BondParity::Odd,
            BondParity::Odd => BondParity::Even,
        }
    }

    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            BondParity::Even => 1.0,
            BondParity::Odd => -1.0,
        }
    }
}

/// A staggered antiferromagnetic Ising ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n: usize,
    j: f64,
    delta: f64,
    strong_bond_parity: BondParity,
}

impl ChainSpec {
    pub fn new(n: usize, j: f64, delta: f64, strong_bond_parity: BondParity) -> Result<Self> {
        if n < 4 || n % 4 != 0 {
            return Err(Error::InvalidChain(format!(
                "N = {n} must be at least 4 and divisible by 4"
            )));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidChain(format!("J = {j} must be positive")));
        }
        if !(delta >= 0.0 && delta < j) {
            return Err(Error::InvalidChain(format!(
                "staggering Δ = {delta} must satisfy 0 <= Δ < J = {j}"
            )));
        }
        Ok(Self { n, j, delta, strong_bond_parity })
    }

    /// Even-parity chain, the default orientation.
    pub fn even(n: usize, j: f64, delta: f64) -> Result<Self> {
        Self::new(n, j, delta, BondParity::Even)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn strong_bond_parity(&self) -> BondParity {
        self.strong_bond_parity
    }

    pub fn with_parity(&self, parity: BondParity) -> Self {
        Self { strong_bond_parity: parity, ..*self }
    }

    /// Δ with the sign that places `J + Δ(-1)^n` on the strong bonds.
    pub fn signed_delta(&self) -> f64 {
        self.strong_bond_parity.sign() * self.delta
    }

    pub fn is_strong(&self, bond: usize) -> bool {
        match self.strong_bond_parity {
            BondParity::Even => bond % 2 == 0,
            BondParity::Odd => bond % 2 == 1,
        }
    }

    /// Dimensionless coupling of bond `n`.
    pub fn bond_coupling(&self, bond: usize) -> f64 {
        if self.is_strong(bond) {
            self.j + self.delta
        } else {
            self.j - self.delta
        }
    }

    /// `√(J² + Δ²)`, the coupling scale entering the critical line. The gap of
    /// the dimerized ring actually closes at `Γ = 𝒥·√(J² − Δ²)`; this form is
    /// kept as the conventional reference scale.
    pub fn critical_coupling(&self) -> f64 {
        self.j.hypot(self.delta)
    }
}

/// One row of a tabulated schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub s: f64,
    #[serde(rename = "J_GHz")]
    pub coupling: f64,
    #[serde(rename = "Gamma_GHz")]
    pub field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnnealSchedule {
    /// `𝒥(s) = 𝒥1·s`, `Γ(s) = Γ0·(1 − s)`.
    Linear { gamma0: f64, j_final: f64 },
    /// Piecewise-linear interpolation of the rows.
    Tabulated { rows: Vec<ScheduleRow> },
}

impl AnnealSchedule {
    pub fn linear(gamma0: f64, j_final: f64) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite() && j_final > 0.0 && j_final.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "linear schedule needs Γ0 > 0 and 𝒥1 > 0, got Γ0 = {gamma0}, 𝒥1 = {j_final}"
            )));
        }
        Ok(AnnealSchedule::Linear { gamma0, j_final })
    }

    pub fn tabulated(rows: Vec<ScheduleRow>) -> Result<Self> {
        validate_rows(&rows)?;
        Ok(AnnealSchedule::Tabulated { rows })
    }

    /// Smooth stand-in for a hardware schedule: `Γ(s) = Γ0 (1 − s)²` and
    /// `𝒥(s) = 𝒥1·s`, tabulated on 41 points. With Γ0 = 11 GHz and
    /// 𝒥1 = 15 GHz the critical point of a weakly staggered chain sits near
    /// s = 1/3.
    pub fn hardware_like(gamma0: f64, j_final: f64) -> Result<Self> {
        let rows = (0..=40)
            .map(|i| {
                let s = i as f64 / 40.0;
                ScheduleRow { s, coupling: j_final * s, field: gamma0 * (1.0 - s).powi(2) }
            })
            .collect();
        Self::tabulated(rows)
    }

    /// Reads the `s,J_GHz,Gamma_GHz` CSV format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["s", "J_GHz", "Gamma_GHz"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::InvalidSchedule(format!(
                "expected header s,J_GHz,Gamma_GHz, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ScheduleRow>, _>>()?;
        Self::tabulated(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        match self {
            AnnealSchedule::Tabulated { rows } => {
                for row in rows {
                    w.serialize(row)?;
                }
            }
            AnnealSchedule::Linear { .. } => {
                for s in [0.0, 1.0] {
                    let (coupling, field) = self.eval(s)?;
                    w.serialize(ScheduleRow { s, coupling, field })?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Instantaneous `(𝒥(s), Γ(s))` in GHz.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ParameterOutOfRange(s));
        }
        Ok(self.eval_unchecked(s))
    }

    /// [`eval`](Self::eval) without the range check, for integrator inner
    /// loops. `s` is clamped to `[0, 1]`.
    pub fn eval_unchecked(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        match self {
            AnnealSchedule::Linear { gamma0, j_final } => (j_final * s, gamma0 * (1.0 - s)),
            AnnealSchedule::Tabulated { rows } => {
                let upper = rows.partition_point(|r| r.s < s).clamp(1, rows.len() - 1);
                let (a, b) = (&rows[upper - 1], &rows[upper]);
                let w = (s - a.s) / (b.s - a.s);
                (
                    a.coupling + w * (b.coupling - a.coupling),
                    a.field + w * (b.field - a.field),
                )
            }
        }
    }

    /// Interior points where the envelopes are not smooth.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            AnnealSchedule::Linear { .. } => Vec::new(),
            AnnealSchedule::Tabulated { rows } => {
                rows.iter().map(|r| r.s).filter(|&s| s > 0.0 && s < 1.0).collect()
            }
        }
    }

    /// Multiplies both envelopes by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self {
            AnnealSchedule::Linear { gamma0, j_final } => {
                Self::linear(gamma0 * factor, j_final * factor)
            }
            AnnealSchedule::Tabulated { rows } => Self::tabulated(
                rows.iter()
                    .map(|r| ScheduleRow {
                        s: r.s,
                        coupling: r.coupling * factor,
                        field: r.field * factor,
                    })
                    .collect(),
            ),
        }
    }

    /// `Γ(0)` in GHz.
    pub fn initial_field(&self) -> f64 {
        self.eval_unchecked(0.0).1
    }
}

fn validate_rows(rows: &[ScheduleRow]) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidSchedule(msg));
    if rows.len() < 2 {
        return bad("table needs at least two rows".into());
    }
    if rows[0].s != 0.0 || rows[rows.len() - 1].s != 1.0 {
        return bad("table must start at s = 0 and end at s = 1".into());
    }
    for w in rows.windows(2) {
        if !(w[1].s > w[0].s) {
            return bad(format!("s must be strictly increasing (at s = {})", w[1].s));
        }
        if w[1].coupling < w[0].coupling {
            return bad(format!("J(s) decreases at s = {}", w[1].s));
        }
        if w[1].field > w[0].field {
            return bad(format!("Gamma(s) increases at s = {}", w[1].s));
        }
    }
    if rows.iter().any(|r| r.coupling < 0.0 || r.field < 0.0 || !r.coupling.is_finite() || !r.field.is_finite()) {
        return bad("envelopes must be finite and non-negative".into());
    }
    if rows[0].coupling != 0.0 {
        return bad("J(0) must be 0".into());
    }
    if rows[rows.len() - 1].field != 0.0 {
        return bad("Gamma(1) must be 0".into());
    }
    Ok(())
}

/// Anneal setup for one quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchParams {
    pub chain: ChainSpec,
    pub schedule: AnnealSchedule,
    /// Anneal duration in ns. Zero is the sudden quench.
    pub tau: f64,
    pub integrator_tol: f64,
}

impl QuenchParams {
    pub fn new(chain: ChainSpec, schedule: AnnealSchedule, tau: f64, integrator_tol: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau = {tau} must be >= 0")));
        }
        if !(integrator_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {integrator_tol} must be > 0")));
        }
        Ok(Self { chain, schedule, tau, integrator_tol })
    }
}

/// Root of `√(J² + Δ²)·𝒥(s) − Γ(s)` on `[0, 1]`, by bisection to 1e-10 in s.
pub fn critical_s(schedule: &AnnealSchedule, chain: &ChainSpec) -> Result<f64> {
    let g = chain.critical_coupling();
    let f = |s: f64| {
        let (coupling, field) = schedule.eval_unchecked(s);
        g * coupling - field
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoCriticalPoint(format!(
            "f(0) = {flo}, f(1) = {fhi} have the same sign"
        )));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Coherence window used for the first detectability condition, in ns.
pub const DEFAULT_COHERENCE_NS: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub tau_max_ns: f64,
    pub delta_tau_ns: f64,
    pub omega_ghz: f64,
    pub t_device_mk: f64,
    pub coherence_ns: f64,
    /// `1/(2Δτ)` in GHz.
    pub nyquist_ghz: f64,
    /// `hΩ/k_B` in mK, Ω an ordinary frequency.
    pub t_star_h_mk: f64,
    /// `ħΩ/k_B` in mK.
    pub t_star_hbar_mk: f64,
    pub coherence_ok: bool,
    pub nyquist_ok: bool,
    pub temperature_ok: bool,
}

impl FeasibilityReport {
    pub fn all_ok(&self) -> bool {
        self.coherence_ok && self.nyquist_ok && self.temperature_ok
    }
}

pub fn feasibility_check(tau_max: f64, delta_tau: f64, omega: f64, t_device: f64) -> FeasibilityReport {
    feasibility_check_with(tau_max, delta_tau, omega, t_device, DEFAULT_COHERENCE_NS)
}

pub fn feasibility_check_with(
    tau_max: f64,
    delta_tau: f64,
    omega: f64,
    t_device: f64,
    coherence_ns: f64,
) -> FeasibilityReport {
    let nyquist_ghz = 1.0 / (2.0 * delta_tau);
    let t_star_h_mk = PLANCK * omega * 1e9 / BOLTZMANN * 1e3;
    let t_star_hbar_mk = t_star_h_mk / std::f64::consts::TAU;
    FeasibilityReport {
        tau_max_ns: tau_max,
        delta_tau_ns: delta_tau,
        omega_ghz: omega,
        t_device_mk: t_device,
        coherence_ns,
        nyquist_ghz,
        t_star_h_mk,
        t_star_hbar_mk,
        coherence_ok: tau_max <= coherence_ns,
        nyquist_ok: omega < nyquist_ghz,
        temperature_ok: t_device < t_star_h_mk,
    }
}

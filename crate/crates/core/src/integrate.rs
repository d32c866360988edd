//! Adaptive Dormand–Prince 8(5,3) stepping for small fixed-size ODE systems.
//!
//! Coefficients are Hairer's DOP853 tableau. The error estimate blends the
//! fifth- and third-order embedded solutions as in the reference code.

#[rustfmt::skip]
mod tableau {
pub(super) const C: [f64; 12] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
pub(super) const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
pub(super) const B: [f64; 12] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
pub(super) const E3: [f64; 12] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082];
pub(super) const E5: [f64; 12] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294];
}
use tableau::{A, B, C, E3, E5};

const STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.333;
const MAX_FACTOR: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrateError {
    StepUnderflow { t: f64 },
    TooManySteps { t: f64 },
    NonFinite { t: f64 },
}

impl std::fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegrateError::StepUnderflow { t } => write!(f, "step size underflow at s = {t}"),
            IntegrateError::TooManySteps { t } => write!(f, "step budget exhausted at s = {t}"),
            IntegrateError::NonFinite { t } => write!(f, "non-finite state at s = {t}"),
        }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` in place.
///
/// `rhs(t, y, dy)` writes the derivative into `dy`. Components are scaled
/// by `tol·(1 + |y_i|)`; a step is accepted when the blended RMS error is
/// below one. Complex systems are passed as interleaved or split real parts.
pub fn dop853<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y: &mut [f64; N],
    tol: f64,
    max_steps: usize,
) -> Result<StepStats, IntegrateError>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
{
    let mut stats = StepStats { accepted: 0, rejected: 0 };
    if t1 <= t0 || N == 0 {
        return Ok(stats);
    }
    let mut k = [[0.0_f64; N]; STAGES];
    let mut f_new = [0.0_f64; N];

    let span = t1 - t0;
    let mut t = t0;
    rhs(t, y, &mut k[0]);

    let d0 = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let d1 = k[0].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut h = if d1 > 0.0 { (0.05 * d0 / d1).min(span) } else { span };
    h = h.max(span * 1e-12);

    while t < t1 {
        if stats.accepted + stats.rejected >= max_steps {
            return Err(IntegrateError::TooManySteps { t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        for s in 1..STAGES {
            let (done, rest) = k.split_at_mut(s);
            let mut tmp = *y;
            for (kj, &a) in done.iter().zip(&A[s][..s]) {
                if a != 0.0 {
                    let ha = h * a;
                    for (t_i, k_i) in tmp.iter_mut().zip(kj) {
                        *t_i += ha * k_i;
                    }
                }
            }
            rhs(t + C[s] * h, &tmp, &mut rest[0]);
        }

        let mut y_new = *y;
        for (kj, &b) in k.iter().zip(&B) {
            if b != 0.0 {
                let hb = h * b;
                for (yn, k_i) in y_new.iter_mut().zip(kj) {
                    *yn += hb * k_i;
                }
            }
        }

        let mut err5 = 0.0_f64;
        let mut err3 = 0.0_f64;
        for i in 0..N {
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for j in 0..STAGES {
                e5 += E5[j] * k[j][i];
                e3 += E3[j] * k[j][i];
            }
            let scale = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err5 += (e5 / scale).powi(2);
            err3 += (e3 / scale).powi(2);
        }
        let denom = err5 + 0.01 * err3;
        let err = if denom > 0.0 { h * err5 / (denom * N as f64).sqrt() } else { 0.0 };
        if !err.is_finite() {
            return Err(IntegrateError::NonFinite { t });
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            *y = y_new;
            rhs(t, y, &mut f_new);
            k[0] = f_new;
            stats.accepted += 1;
            let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.125)).clamp(MIN_FACTOR, MAX_FACTOR) };
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.125)).clamp(MIN_FACTOR, 1.0);
        }
        if h < span * 1e-14 {
            return Err(IntegrateError::StepUnderflow { t });
        }
    }
    Ok(stats)
}

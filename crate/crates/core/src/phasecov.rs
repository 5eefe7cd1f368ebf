//! Asymmetric phase-covariant cloner for equatorial qudit states:
//!
//! ```text
//! |i> -> alpha |i>|i>|i> + beta/sqrt(d-1) sum_{j != i} (cos t |i>|j> + sin t |j>|i>) |j>
//! ```
//!
//! with registers ordered (clone 1, clone 2, ancilla). The symmetric
//! machine is the `t = pi/4` case.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::clone::reduced_register;
use crate::cloner::optimize_v;
use crate::error::{Error, Result};
use crate::optimize::{bisect, maximize_bounded};
use crate::qudit::{Dimension, QuditState, TripartiteState};

/// Tolerance on `alpha^2 + beta^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Per-state agreement required of the oracle.
pub const ORACLE_TOL: f64 = 1e-10;

/// Gap below which the equivalence with the `g = d-1` cloner is accepted.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

const THETA_SCAN_POINTS: usize = 200;
const THETA_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCovCloner {
    dim: Dimension,
    alpha: f64,
    beta: f64,
    theta: f64,
}

impl PhaseCovCloner {
    pub fn new(dim: Dimension, alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::out_of_range("alpha", alpha, "[0, 1]"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::out_of_range("beta", beta, "[0, 1]"));
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::out_of_range("theta", theta, "[0, pi/2]"));
        }
        let n = alpha * alpha + beta * beta;
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                what: "(alpha, beta)",
                norm_sq: n,
            });
        }
        Ok(PhaseCovCloner {
            dim,
            alpha,
            beta,
            theta,
        })
    }

    /// `alpha = cos phi`, `beta = sin phi` with `phi` in `[0, pi/2]`.
    pub fn from_angles(dim: Dimension, phi: f64, theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&phi) {
            return Err(Error::out_of_range("phi", phi, "[0, pi/2]"));
        }
        Self::new(dim, phi.cos().clamp(0.0, 1.0), phi.sin().clamp(0.0, 1.0), theta)
    }

    /// The symmetric machine with the given `beta`.
    pub fn symmetric(dim: Dimension, beta: f64) -> Result<Self> {
        Self::new(dim, (1.0 - beta * beta).max(0.0).sqrt(), beta, FRAC_PI_4)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Output of the transformation on `psi`.
    pub fn apply(&self, psi: &QuditState) -> Result<TripartiteState> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                found: psi.dim().get(),
            });
        }
        let d = self.dim.get();
        let off = self.beta / ((d - 1) as f64).sqrt();
        let (c, s) = (off * self.theta.cos(), off * self.theta.sin());
        let mut out = TripartiteState::zeros(self.dim);
        let idx = |a: usize, b: usize, e: usize| (a * d + b) * d + e;
        let amps = out.amplitudes_mut();
        for (i, &p) in psi.amplitudes().iter().enumerate() {
            amps[idx(i, i, i)] += p * self.alpha;
            for j in (0..d).filter(|&j| j != i) {
                amps[idx(i, j, j)] += p * c;
                amps[idx(j, i, j)] += p * s;
            }
        }
        Ok(out)
    }
}

/// `(1/sqrt d) sum_j exp(i phi_j) |j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquatorialState {
    phases: Vec<f64>,
}

impl EquatorialState {
    pub fn new(dim: Dimension, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != dim.get() {
            return Err(Error::DimensionMismatch {
                expected: dim.get(),
                found: phases.len(),
            });
        }
        Ok(EquatorialState { phases })
    }

    /// Phases drawn uniformly from `[0, 2 pi)`.
    pub fn random<R: Rng + ?Sized>(dim: Dimension, rng: &mut R) -> Self {
        EquatorialState {
            phases: (0..dim.get()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
        }
    }

    /// Reads the phases off a state with uniform-modulus amplitudes.
    pub fn from_state(psi: &QuditState) -> Result<Self> {
        let d = psi.dim().get();
        let m = 1.0 / (d as f64).sqrt();
        let mut phases = Vec::with_capacity(d);
        for a in psi.amplitudes() {
            if (a.norm() - m).abs() > 1e-12 {
                return Err(Error::Numerical(format!(
                    "amplitude modulus {} is not 1/sqrt({d})",
                    a.norm()
                )));
            }
            phases.push(a.arg());
        }
        Ok(EquatorialState { phases })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn to_state(&self) -> QuditState {
        let d = self.phases.len();
        let m = 1.0 / (d as f64).sqrt();
        let amps = self.phases.iter().map(|&p| C64::from_polar(m, p)).collect();
        QuditState::from_raw(
            Dimension::new(d).expect("phase vector length is a validated dimension"),
            amps,
        )
    }
}

/// `F(t) = 1/d + (2 alpha beta/d) sqrt(d-1) t + beta^2 (d-2)/d t^2`.
fn clone_fidelity(d: f64, alpha: f64, beta: f64, t: f64) -> f64 {
    1.0 / d + 2.0 * alpha * beta / d * (d - 1.0).sqrt() * t + beta * beta * (d - 2.0) / d * t * t
}

/// `(F_1, F_2)`: the closed forms with `t = cos theta` and `t = sin theta`.
pub fn phasecov_fidelities(c: &PhaseCovCloner) -> (f64, f64) {
    let d = c.dim.as_f64();
    (
        clone_fidelity(d, c.alpha, c.beta, c.theta.cos()),
        clone_fidelity(d, c.alpha, c.beta, c.theta.sin()),
    )
}

/// `(<phi|rho_1|phi>, <phi|rho_2|phi>)` for each state from the dense output.
pub fn phasecov_fidelities_per_state(c: &PhaseCovCloner, states: &[EquatorialState]) -> Result<Vec<(f64, f64)>> {
    states
        .iter()
        .map(|s| {
            let psi = s.to_state();
            let out = c.apply(&psi)?;
            Ok((
                reduced_register(&out, 0).expectation(&psi),
                reduced_register(&out, 1).expectation(&psi),
            ))
        })
        .collect()
}

/// Average of [`phasecov_fidelities_per_state`] over the sample.
pub fn phasecov_fidelities_oracle(c: &PhaseCovCloner, states: &[EquatorialState]) -> Result<(f64, f64)> {
    if states.is_empty() {
        return Err(Error::out_of_range("equatorial sample size", 0, ">= 1"));
    }
    let per = phasecov_fidelities_per_state(c, states)?;
    let n = per.len() as f64;
    let (s1, s2) = per.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    Ok((s1 / n, s2 / n))
}

/// `(1/(4d)) (d + 2 + sqrt(d^2 + 4d - 4))`.
pub fn phasecov_symmetric_optimum(dim: Dimension) -> f64 {
    let d = dim.as_f64();
    (d + 2.0 + (d * d + 4.0 * d - 4.0).sqrt()) / (4.0 * d)
}

/// With `psi = 2 phi`, `F_1 = 1/d + b + r sin(psi - delta)` where
/// `a = t sqrt(d-1)/d`, `b = (d-2) t^2/(2d)`, `r = hypot(a, b)` and
/// `delta = atan2(b, a)`. On `psi in [0, pi]` it rises to `1/d + b + r` at
/// `psi = pi/2 + delta` and falls after.
#[derive(Debug, Clone, Copy)]
struct Sinusoid {
    base: f64,
    r: f64,
    delta: f64,
}

impl Sinusoid {
    fn new(d: f64, t: f64) -> Self {
        let a = t * (d - 1.0).sqrt() / d;
        let b = (d - 2.0) * t * t / (2.0 * d);
        Sinusoid {
            base: 1.0 / d + b,
            r: a.hypot(b),
            delta: b.atan2(a),
        }
    }

    fn max(&self) -> f64 {
        self.base + self.r
    }

    /// Both `psi` in `[0, pi]` with `F = target`, if any.
    fn solve(&self, target: f64) -> Vec<f64> {
        if self.r == 0.0 {
            return Vec::new();
        }
        let s = (target - self.base) / self.r;
        if s > 1.0 + 1e-12 {
            return Vec::new();
        }
        let asin = s.clamp(-1.0, 1.0).asin();
        [self.delta + asin, self.delta + PI - asin]
            .into_iter()
            .filter(|&p| (-1e-15..=PI + 1e-15).contains(&p))
            .map(|p| p.clamp(0.0, PI))
            .collect()
    }
}

/// Best `(phi, F_2)` at fixed `theta` subject to `F_1 = target`.
fn best_at_theta(d: f64, theta: f64, target: f64) -> Option<(f64, f64)> {
    let f1 = Sinusoid::new(d, theta.cos());
    f1.solve(target)
        .into_iter()
        .map(|psi| {
            let phi = 0.5 * psi;
            (phi, clone_fidelity(d, phi.cos(), phi.sin(), theta.sin()))
        })
        .fold(None, |best: Option<(f64, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
}

/// Maximizes `F_2` subject to `F_1 = target` over `(beta, theta)`.
///
/// Targets at or above the symmetric optimum put the second clone on the
/// weaker side (`theta <= pi/4`); lower targets use `theta >= pi/4`.
pub fn phasecov_tradeoff(dim: Dimension, f1_target: f64) -> Result<(PhaseCovCloner, f64)> {
    let d = dim.as_f64();
    if !(1.0 / d - 1e-15..=1.0).contains(&f1_target) {
        return Err(Error::out_of_range(
            "F_1 target",
            f1_target,
            format!("[1/{}, 1]", dim.get()),
        ));
    }
    let (lo, mut hi) = if f1_target >= phasecov_symmetric_optimum(dim) {
        (0.0, FRAC_PI_4)
    } else {
        (FRAC_PI_4, FRAC_PI_2)
    };
    // max_phi F_1 falls with theta; clip the range to where the target is reachable.
    let reach = |theta: f64| Sinusoid::new(d, theta.cos()).max() - f1_target;
    if reach(hi) < 0.0 {
        if reach(lo) < -1e-12 {
            return Err(Error::Infeasible {
                radicand: "F_1 target",
                value: reach(lo),
            });
        }
        hi = bisect(reach, lo, hi, THETA_TOL).unwrap_or(lo);
    }

    let objective = |theta: f64| best_at_theta(d, theta, f1_target).map_or(f64::NEG_INFINITY, |b| b.1);
    let best = maximize_bounded(objective, lo, hi, THETA_SCAN_POINTS, THETA_TOL);
    let (phi, f2) = best_at_theta(d, best.x, f1_target)
        .ok_or_else(|| Error::Numerical(format!("no feasible theta for F_1 = {f1_target}")))?;
    let c = PhaseCovCloner::from_angles(dim, phi.clamp(0.0, FRAC_PI_2), best.x)?;
    Ok((c, f2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalencePoint {
    pub f1: f64,
    pub f2_phasecov: f64,
    pub f_eve_cloner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub d: usize,
    pub points: Vec<EquivalencePoint>,
    pub max_gap: f64,
}

impl EquivalenceReport {
    pub fn passes(&self) -> bool {
        self.max_gap <= EQUIVALENCE_TOL
    }
}

/// `n` evenly spaced `F_1` values from the symmetric optimum to 1.
pub fn symmetric_to_one_grid(dim: Dimension, n: usize) -> Vec<f64> {
    let lo = phasecov_symmetric_optimum(dim);
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    1.0
                } else {
                    lo + (1.0 - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Compares the phase-covariant trade-off against the `g = d-1` cloner.
pub fn equivalence_report(dim: Dimension, grid: &[f64]) -> Result<EquivalenceReport> {
    let g = dim.get() - 1;
    let points = grid
        .iter()
        .map(|&f| {
            let (_, f2) = phasecov_tradeoff(dim, f)?;
            let fe = optimize_v(dim, g, f)?.value;
            Ok(EquivalencePoint {
                f1: f,
                f2_phasecov: f2,
                f_eve_cloner: fe,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gap = points
        .iter()
        .map(|p| (p.f2_phasecov - p.f_eve_cloner).abs())
        .fold(0.0, f64::max);
    Ok(EquivalenceReport {
        d: dim.get(),
        points,
        max_gap,
    })
}

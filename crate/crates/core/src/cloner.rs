//! The balanced optimal-cloner family.
//!
//! For a protocol using the computational basis plus `k = 0 .. g-1`, the
//! cloner maximizing all of Eve's fidelities at fixed `F_B` has
//!
//! ```text
//! a_00 = v,  a_0n = x (n != 0),  a_{m,km} = x (m != 0, k < g),  otherwise y
//! x = sqrt((F_B - v^2) / (d-1)),  y = sqrt((1 + g v^2 - (g+1) F_B) / ((d-1)(d-g)))
//! F_E = ([v + (d-1) x]^2 + (d-1) [g x + (d-g) y]^2) / d
//! ```
//!
//! with the single free parameter `v` left to a bounded scalar maximizer.

use serde::Serialize;

use crate::clone::{check_g, fourier_dual, ParameterMatrix};
use crate::error::{Error, Result};
use crate::optimize::{bisect, maximize_bounded, INTERVAL_TOL, SCAN_POINTS};
use crate::qudit::Dimension;

/// Agreement required between numerical and analytic optima.
pub const ANALYTIC_TOL: f64 = 1e-9;

/// Radicands above `-RADICAND_SLACK` are treated as zero.
const RADICAND_SLACK: f64 = 1e-12;

/// Half-width of the bracket used to polish the golden-section optimum
/// with a bisection on the analytic slope.
const POLISH_HALF_WIDTH: f64 = 1e-6;

pub(crate) fn check_f_bob(dim: Dimension, f_bob: f64) -> Result<()> {
    let lo = 1.0 / dim.as_f64();
    if f_bob.is_finite() && f_bob >= lo - 1e-15 && f_bob <= 1.0 + 1e-15 {
        Ok(())
    } else {
        Err(Error::out_of_range("F_B", f_bob, format!("[1/{dim}, 1]")))
    }
}

/// A member of the balanced family, `(d, g, F_B, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancedCloner {
    dim: Dimension,
    g: usize,
    f_bob: f64,
    v: f64,
}

impl BalancedCloner {
    pub fn new(dim: Dimension, g: usize, f_bob: f64, v: f64) -> Result<Self> {
        check_g(dim, g)?;
        check_f_bob(dim, f_bob)?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::out_of_range("v", v, "v >= 0"));
        }
        let d = dim.get();
        let x_rad = f_bob - v * v;
        if x_rad < -RADICAND_SLACK {
            return Err(Error::Infeasible {
                radicand: "x (F_B - v^2)",
                value: x_rad,
            });
        }
        if g < d {
            let y_rad = y_radicand(g, f_bob, v);
            if y_rad < -RADICAND_SLACK {
                return Err(Error::Infeasible {
                    radicand: "y (1 + g v^2 - (g+1) F_B)",
                    value: y_rad,
                });
            }
        } else {
            let forced = forced_v(dim, f_bob);
            if (v - forced).abs() > ANALYTIC_TOL {
                return Err(Error::Infeasible {
                    radicand: "normalization at g = d (v must equal sqrt(((d+1) F_B - 1)/d))",
                    value: v - forced,
                });
            }
        }
        Ok(BalancedCloner { dim, g, f_bob, v })
    }

    /// The `g = d` member, whose `v` is fixed by normalization.
    pub fn universal(dim: Dimension, f_bob: f64) -> Result<Self> {
        check_f_bob(dim, f_bob)?;
        Self::new(dim, dim.get(), f_bob, forced_v(dim, f_bob))
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn f_bob(&self) -> f64 {
        self.f_bob
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn x(&self) -> f64 {
        x_value(self.dim.as_f64(), self.f_bob, self.v)
    }

    /// `None` when `g = d` (every off-row entry is `x`).
    pub fn y(&self) -> Option<f64> {
        let d = self.dim.get();
        (self.g < d).then(|| y_value(self.dim.as_f64(), self.g as f64, self.f_bob, self.v))
    }
}

fn y_radicand(g: usize, f_bob: f64, v: f64) -> f64 {
    1.0 + g as f64 * v * v - (g as f64 + 1.0) * f_bob
}

fn x_value(d: f64, f_bob: f64, v: f64) -> f64 {
    ((f_bob - v * v).max(0.0) / (d - 1.0)).sqrt()
}

fn y_value(d: f64, g: f64, f_bob: f64, v: f64) -> f64 {
    ((1.0 + g * v * v - (g + 1.0) * f_bob).max(0.0) / ((d - 1.0) * (d - g))).sqrt()
}

fn forced_v(dim: Dimension, f_bob: f64) -> f64 {
    let d = dim.as_f64();
    (((d + 1.0) * f_bob - 1.0).max(0.0) / d).sqrt()
}

/// Feasible `v` range `[max(0, sqrt(((g+1) F_B - 1)/g)), sqrt(F_B)]`;
/// a single point when `g = d`.
pub fn feasible_v_interval(dim: Dimension, g: usize, f_bob: f64) -> Result<(f64, f64)> {
    check_g(dim, g)?;
    check_f_bob(dim, f_bob)?;
    let f_bob = f_bob.clamp(0.0, 1.0);
    if g == dim.get() {
        let v = forced_v(dim, f_bob);
        return Ok((v, v));
    }
    let g = g as f64;
    let lo = (((g + 1.0) * f_bob - 1.0) / g).max(0.0).sqrt();
    Ok((lo, f_bob.sqrt()))
}

/// The cloner's `(a_mn)`, all entries real and nonnegative.
pub fn balanced_matrix(c: &BalancedCloner) -> Result<ParameterMatrix> {
    let d = c.dim.get();
    let g = c.g;
    let (v, x, y) = (c.v, c.x(), c.y().unwrap_or(0.0));
    ParameterMatrix::from_real(c.dim, |m, n| {
        if m == 0 {
            if n == 0 {
                v
            } else {
                x
            }
        } else if (0..g).any(|k| (k * m) % d == n) {
            x
        } else {
            y
        }
    })
}

pub(crate) fn eve_fidelity_raw(d: usize, g: usize, f_bob: f64, v: f64) -> f64 {
    let df = d as f64;
    let gf = g as f64;
    let x = x_value(df, f_bob, v);
    let y = if g < d { y_value(df, gf, f_bob, v) } else { 0.0 };
    let p = v + (df - 1.0) * x;
    let q = gf * x + (df - gf) * y;
    (p * p + (df - 1.0) * q * q) / df
}

/// `dF_E/dv` at fixed `F_B`.
fn eve_fidelity_slope(d: usize, g: usize, f_bob: f64, v: f64) -> f64 {
    let df = d as f64;
    let gf = g as f64;
    let x = x_value(df, f_bob, v);
    let p = v + (df - 1.0) * x;
    let dx = -v / ((df - 1.0) * x);
    let (q, dq) = if g < d {
        let y = y_value(df, gf, f_bob, v);
        let dy = gf * v / ((df - 1.0) * (df - gf) * y);
        (gf * x + (df - gf) * y, gf * dx + (df - gf) * dy)
    } else {
        (gf * x, gf * dx)
    };
    2.0 / df * (p * (1.0 + (df - 1.0) * dx) + (df - 1.0) * q * dq)
}

/// Eve's fidelity, identical in all `g + 1` bases.
pub fn eve_fidelity(c: &BalancedCloner) -> f64 {
    eve_fidelity_raw(c.dim.get(), c.g, c.f_bob, c.v)
}

/// Result of a one-dimensional optimization over `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VOptimum {
    pub v: f64,
    pub value: f64,
}

/// `v` maximizing `F_E` at fixed `F_B`, with the maximum.
pub fn optimize_v(dim: Dimension, g: usize, f_bob: f64) -> Result<VOptimum> {
    let (lo, hi) = feasible_v_interval(dim, g, f_bob)?;
    let d = dim.get();
    let f = |v: f64| eve_fidelity_raw(d, g, f_bob, v);
    if g == d {
        return Ok(VOptimum { v: lo, value: f(lo) });
    }
    let coarse = maximize_bounded_v(f, lo, hi);
    Ok(polish(coarse, lo, hi, f, |v| eve_fidelity_slope(d, g, f_bob, v)))
}

/// Golden-section leaves `v` uncertain at the `sqrt(eps)` level because
/// the objective is flat at its peak; the slope changes sign linearly, so
/// bisecting it pins `v` to machine precision.
fn polish(coarse: VOptimum, lo: f64, hi: f64, f: impl Fn(f64) -> f64, slope: impl Fn(f64) -> f64) -> VOptimum {
    let a = (coarse.v - POLISH_HALF_WIDTH).max(lo);
    let b = (coarse.v + POLISH_HALF_WIDTH).min(hi);
    let (sa, sb) = (slope(a), slope(b));
    if !(sa > 0.0 && sb < 0.0) {
        return coarse;
    }
    match bisect(&slope, a, b, 0.0) {
        Ok(v) => {
            let value = f(v);
            if value >= coarse.value - 1e-15 {
                VOptimum { v, value }
            } else {
                coarse
            }
        }
        Err(_) => coarse,
    }
}

impl From<crate::optimize::Maximum> for VOptimum {
    fn from(m: crate::optimize::Maximum) -> Self {
        VOptimum { v: m.x, value: m.value }
    }
}

pub(crate) fn maximize_bounded_v(f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> VOptimum {
    maximize_bounded(f, lo, hi, SCAN_POINTS, INTERVAL_TOL).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticG1 {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub f_eve: f64,
}

/// Two-basis optimum: `v = F_B`, `F_E = (sqrt F_B + sqrt((d-1)(1-F_B)))^2 / d`.
pub fn analytic_g1(dim: Dimension, f_bob: f64) -> Result<AnalyticG1> {
    check_f_bob(dim, f_bob)?;
    let d = dim.as_f64();
    let f = f_bob.min(1.0);
    Ok(AnalyticG1 {
        v: f,
        x: (f * (1.0 - f) / (d - 1.0)).sqrt(),
        y: (1.0 - f) / (d - 1.0),
        f_eve: (f.sqrt() + ((d - 1.0) * (1.0 - f)).sqrt()).powi(2) / d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticGd {
    pub v: f64,
    pub x: f64,
    pub f_eve: f64,
}

/// `(d+1)`-basis optimum (the universal cloner).
pub fn analytic_gd(dim: Dimension, f_bob: f64) -> Result<AnalyticGd> {
    check_f_bob(dim, f_bob)?;
    let d = dim.as_f64();
    let f = f_bob.min(1.0);
    let rad = (d + 1.0) * f - 1.0;
    if rad < 0.0 {
        return Err(Error::Infeasible {
            radicand: "(d+1) F_B - 1",
            value: rad,
        });
    }
    Ok(AnalyticGd {
        v: (rad / d).sqrt(),
        x: ((1.0 - f) / (d * (d - 1.0))).sqrt(),
        f_eve: (rad.sqrt() + ((d - 1.0) * (1.0 - f)).sqrt()).powi(2) / (d * d) + (1.0 - f),
    })
}

/// The `F_E = F_B` point of the optimal cloner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricSolution {
    pub d: usize,
    pub g: usize,
    pub fidelity: f64,
    pub v: f64,
    /// Infinite for `g = d`, where the ellipse degenerates.
    pub lambda_plus: f64,
    /// Always `1 / fidelity`.
    pub lambda_minus: f64,
    pub p_dg: f64,
    /// `F_E*(F) - F` recomputed through [`optimize_v`].
    pub residual: f64,
}

/// `P(d, g) = sqrt((g+3)^2 - 8 (d-g)(g+1)/d)`.
pub fn p_dg(d: usize, g: usize) -> f64 {
    let (df, gf) = (d as f64, g as f64);
    ((gf + 3.0).powi(2) - 8.0 * (df - gf) * (gf + 1.0) / df).sqrt()
}

/// Symmetric cloner: for `g < d`, `F = 1/lambda_-` from the ellipse in
/// `(u, v) = (sqrt(F - v^2), v)`; for `g = d`, the root of `F_E(F) = F` on
/// the universal-cloner curve.
pub fn symmetric_solution(dim: Dimension, g: usize) -> Result<SymmetricSolution> {
    check_g(dim, g)?;
    let d = dim.get();
    let (df, gf) = (d as f64, g as f64);
    let p = p_dg(d, g);

    let (fidelity, v, lambda_plus) = if g < d {
        let denom = (gf + 3.0) - p;
        let fidelity = 2.0 / df * (df - gf) / denom;
        let shift = df / (2.0 * (gf + 1.0)) * p - 1.0 - df / 2.0 * (gf - 1.0) / (gf + 1.0);
        let v = (2.0 / df * (df - 1.0) * (df - gf) / denom / ((df - 1.0) + shift * shift)).sqrt();
        let lambda_plus = df / (2.0 * (df - gf)) * ((gf + 3.0) + p);
        (fidelity, v, lambda_plus)
    } else {
        let fidelity = bisect(
            |f| analytic_gd(dim, f).map(|a| a.f_eve - f).unwrap_or(f64::NAN),
            1.0 / df,
            1.0,
            0.0,
        )?;
        (fidelity, forced_v(dim, fidelity), f64::INFINITY)
    };

    let residual = optimize_v(dim, g, fidelity)?.value - fidelity;
    if residual.abs() > ANALYTIC_TOL {
        return Err(Error::Numerical(format!(
            "symmetric point for d={d}, g={g} is not on the optimal curve (residual {residual:e})"
        )));
    }
    Ok(SymmetricSolution {
        d,
        g,
        fidelity,
        v,
        lambda_plus,
        lambda_minus: 1.0 / fidelity,
        p_dg: p,
        residual,
    })
}

/// One sample of the `F_E*(F_B)` and `v*(F_B)` curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub f_bob: f64,
    pub f_eve: f64,
    pub v: f64,
    /// Produced by exchanging the roles of Bob and Eve.
    pub mirrored: bool,
}

/// `points` evenly spaced values from `1/d` to `1` inclusive.
pub fn uniform_grid(dim: Dimension, points: usize) -> Vec<f64> {
    let lo = 1.0 / dim.as_f64();
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        n => (0..n)
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

/// Optimal-cloner curve on `grid`.
///
/// Points with `F_B >= F_sym` come straight from [`optimize_v`]. Below
/// the symmetric point Bob and Eve swap roles: the point `(F_B, F_E)` is
/// the mirror of `(F_E, F_B)` on the direct branch, realized by the Fourier
/// dual of that branch's cloner, whose `b_00` is reported as `v`.
pub fn fidelity_curve(dim: Dimension, g: usize, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::out_of_range("grid length", 0, ">= 1"));
    }
    check_g(dim, g)?;
    for &f in grid {
        check_f_bob(dim, f)?;
    }
    let f_sym = symmetric_solution(dim, g)?.fidelity;
    grid.iter()
        .map(|&f_bob| {
            if f_bob >= f_sym {
                let opt = optimize_v(dim, g, f_bob)?;
                Ok(CurvePoint {
                    f_bob,
                    f_eve: opt.value,
                    v: opt.v,
                    mirrored: false,
                })
            } else {
                mirrored_point(dim, g, f_bob, f_sym)
            }
        })
        .collect()
}

fn mirrored_point(dim: Dimension, g: usize, f_bob: f64, f_sym: f64) -> Result<CurvePoint> {
    let direct_f_bob = if f_bob <= 1.0 / dim.as_f64() {
        1.0
    } else {
        bisect(
            |f| optimize_v(dim, g, f).map(|o| o.value - f_bob).unwrap_or(f64::NAN),
            f_sym,
            1.0,
            1e-15,
        )?
    };
    let opt = optimize_v(dim, g, direct_f_bob)?;
    let cloner = BalancedCloner::new(dim, g, direct_f_bob, opt.v)?;
    let dual = fourier_dual(&balanced_matrix(&cloner)?);
    Ok(CurvePoint {
        f_bob,
        f_eve: direct_f_bob,
        v: dual.get(0, 0).re,
        mirrored: true,
    })
}

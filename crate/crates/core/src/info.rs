//! Mutual information between Alice and Bob / Alice and Eve, the one-way
//! key rate `r = I_AB - I_AE`, and the critical disturbances where `r`
//! vanishes.
//!
//! Eve measures her two registers jointly. Writing the transformation of
//! `|a>_A` as
//!
//! ```text
//! sum_{m,j} (1/sqrt d) sum_n a_mn omega^(n(a-j)) |a+m>_B |j+m>_E' |j>_E
//! ```
//!
//! her outcome is equivalent to the pair `(m, e')` with `m = E' - E` and
//! `e' = E`, which gives `p(m, e'|a) = (1/d) |sum_n a_mn omega^(n(a-e'))|^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clone::{check_g, oracle_output, ParameterMatrix};
use crate::cloner::{check_f_bob, feasible_v_interval, maximize_bounded_v, optimize_v, BalancedCloner, VOptimum};
use crate::error::{Error, Result};
use crate::optimize::bisect;
use crate::qudit::{Dimension, QuditState};

/// Row-normalization tolerance of conditional distributions.
pub const DIST_TOL: f64 = 1e-10;

/// Width of the final bisection bracket on `F_B`.
pub const ROOT_TOL: f64 = 1e-10;

/// Number of points in the sign-change scan of `r(F_B)`.
pub const ROOT_SCAN_POINTS: usize = 256;

/// Offsets of the scanned `F_B` bracket from `1/d` and from `1`.
pub const ROOT_BRACKET_LOW_OFFSET: f64 = 1e-6;
pub const ROOT_BRACKET_HIGH_OFFSET: f64 = 1e-9;

/// Dimensions covered by the published disturbance tables.
pub const TABLE_DIMENSIONS: [usize; 4] = [2, 3, 5, 7];

/// `-sum p log2 p` with `0 log 0 = 0`.
fn shannon_entropy<'a>(p: impl IntoIterator<Item = &'a f64>) -> f64 {
    p.into_iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `I_AB = log2 d + F log2 F + (1-F) log2((1-F)/(d-1))`.
pub fn info_ab(dim: Dimension, f_bob: f64) -> Result<f64> {
    check_f_bob(dim, f_bob)?;
    let d = dim.as_f64();
    let f = f_bob.clamp(0.0, 1.0);
    let mut i = d.log2();
    if f > 0.0 {
        i += f * f.log2();
    }
    if f < 1.0 {
        i += (1.0 - f) * ((1.0 - f) / (d - 1.0)).log2();
    }
    Ok(i.max(0.0))
}

/// `p(m, e'|a)` and `p(m, e')` for uniformly distributed `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackDistribution {
    dim: Dimension,
    p_cond: Vec<f64>,
    p_joint: Vec<f64>,
}

impl AttackDistribution {
    fn from_conditional(dim: Dimension, p_cond: Vec<f64>) -> Self {
        let d = dim.get();
        let mut p_joint = vec![0.0; d * d];
        for row in p_cond.chunks(d * d) {
            for (j, p) in p_joint.iter_mut().zip(row) {
                *j += p / d as f64;
            }
        }
        AttackDistribution { dim, p_cond, p_joint }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    /// `p(m, e'|a)`.
    pub fn conditional(&self, a: usize, m: usize, e: usize) -> f64 {
        let d = self.dim.get();
        self.p_cond[(a * d + m) * d + e]
    }

    /// `p(m, e')`.
    pub fn joint(&self, m: usize, e: usize) -> f64 {
        self.p_joint[m * self.dim.get() + e]
    }

    /// `sum_{m,e'} p(m, e'|a)` for each `a`.
    pub fn row_sums(&self) -> Vec<f64> {
        let d = self.dim.get();
        self.p_cond.chunks(d * d).map(|r| r.iter().sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.p_cond.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &AttackDistribution) -> f64 {
        self.p_cond
            .iter()
            .zip(&other.p_cond)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// General closed form for an arbitrary cloner.
pub fn attack_distribution(a: &ParameterMatrix) -> AttackDistribution {
    let dim = a.dim();
    let d = dim.get();
    let roots = dim.roots_of_unity();
    let mut p_cond = vec![0.0; d * d * d];
    for alice in 0..d {
        for m in 0..d {
            for e in 0..d {
                let s = dim.wrap(alice as i64 - e as i64);
                let amp: num_complex::Complex64 = (0..d).map(|n| a.get(m, n) * roots[(n * s) % d]).sum();
                p_cond[(alice * d + m) * d + e] = amp.norm_sqr() / d as f64;
            }
        }
    }
    AttackDistribution::from_conditional(dim, p_cond)
}

/// Closed form specialised to the balanced family. With `t = a - e'`:
///
/// ```text
/// m = 0, t = 0:   [v + (d-1) x]^2 / d
/// m = 0, t != 0:  (v - x)^2 / d
/// m != 0, t = 0:  [g x + (d-g) y]^2 / d
/// m != 0, t != 0: (x - y)^2 / d * |(1 - w^(mgt)) / (1 - w^(mt))|^2
/// ```
pub fn restricted_attack_distribution(c: &BalancedCloner) -> AttackDistribution {
    let dim = c.dim();
    let d = dim.get();
    let df = d as f64;
    let g = c.g();
    let (v, x, y) = (c.v(), c.x(), c.y().unwrap_or(0.0));

    // Per-(m, t) probabilities; every row a is a cyclic shift in e'.
    let mut by_shift = vec![0.0; d * d];
    for m in 0..d {
        for t in 0..d {
            by_shift[m * d + t] = match (m, t) {
                (0, 0) => (v + (df - 1.0) * x).powi(2) / df,
                (0, _) => (v - x).powi(2) / df,
                (_, 0) => (g as f64 * x + (df - g as f64) * y).powi(2) / df,
                _ => {
                    let num = (1.0 - dim.omega_pow((m * g * t) as i64)).norm_sqr();
                    let den = (1.0 - dim.omega_pow((m * t) as i64)).norm_sqr();
                    (x - y).powi(2) / df * num / den
                }
            };
        }
    }
    let mut p_cond = vec![0.0; d * d * d];
    for alice in 0..d {
        for m in 0..d {
            for e in 0..d {
                let t = dim.wrap(alice as i64 - e as i64);
                p_cond[(alice * d + m) * d + e] = by_shift[m * d + t];
            }
        }
    }
    AttackDistribution::from_conditional(dim, p_cond)
}

/// The same distribution read off the dense output state: for input
/// `|a>`, `p(m, e'|a) = sum_b |<b, e'+m, e'|out>|^2`.
pub fn oracle_attack_distribution(a: &ParameterMatrix) -> Result<AttackDistribution> {
    let dim = a.dim();
    let d = dim.get();
    let mut p_cond = vec![0.0; d * d * d];
    for alice in 0..d {
        let out = oracle_output(a, &QuditState::basis(dim, alice)?)?;
        let amps = out.amplitudes();
        for m in 0..d {
            for e in 0..d {
                p_cond[(alice * d + m) * d + e] = (0..d).map(|b| amps[out.index(b, (e + m) % d, e)].norm_sqr()).sum();
            }
        }
    }
    Ok(AttackDistribution::from_conditional(dim, p_cond))
}

/// `I_AE = H(M, E') - sum_a (1/d) H(M, E' | A = a)`.
pub fn info_ae(dist: &AttackDistribution) -> f64 {
    let d = dist.dim.get();
    let h_joint = shannon_entropy(&dist.p_joint);
    let h_cond: f64 = dist.p_cond.chunks(d * d).map(shannon_entropy).sum::<f64>() / d as f64;
    (h_joint - h_cond).max(0.0)
}

fn info_ae_balanced(dim: Dimension, g: usize, f_bob: f64, v: f64) -> Result<f64> {
    let c = BalancedCloner::new(dim, g, f_bob, v)?;
    Ok(info_ae(&restricted_attack_distribution(&c)))
}

/// `v` maximizing Eve's information at fixed `F_B` (value is `I_AE` in bits).
pub fn optimize_v_information(dim: Dimension, g: usize, f_bob: f64) -> Result<VOptimum> {
    let (lo, hi) = feasible_v_interval(dim, g, f_bob)?;
    if g == dim.get() {
        return Ok(VOptimum {
            v: lo,
            value: info_ae_balanced(dim, g, f_bob, lo)?,
        });
    }
    let mut failure = None;
    let best = maximize_bounded_v(
        |v| match info_ae_balanced(dim, g, f_bob, v) {
            Ok(i) => i,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
    );
    match failure {
        Some(e) if !best.value.is_finite() => Err(e),
        _ => Ok(best),
    }
}

/// How Eve picks `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
pub enum AttackKind {
    /// `v` maximizes `I_AE` (critical disturbance `D_I`).
    #[serde(rename = "di")]
    #[value(name = "di")]
    InformationOptimal,
    /// `v` maximizes `F_E` (critical disturbance `D_F`).
    #[serde(rename = "df")]
    #[value(name = "df")]
    ClonerOptimal,
}

impl AttackKind {
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::InformationOptimal => "di",
            AttackKind::ClonerOptimal => "df",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoResult {
    pub i_ab: f64,
    pub i_ae: f64,
    pub rate: f64,
    pub f_bob: f64,
    pub v_used: f64,
}

/// Key rate of the balanced attack at `F_B` with `v` chosen per `kind`.
pub fn evaluate_attack(dim: Dimension, g: usize, f_bob: f64, kind: AttackKind) -> Result<InfoResult> {
    let i_ab = info_ab(dim, f_bob)?;
    let (v, i_ae) = match kind {
        AttackKind::InformationOptimal => {
            let o = optimize_v_information(dim, g, f_bob)?;
            (o.v, o.value)
        }
        AttackKind::ClonerOptimal => {
            let v = optimize_v(dim, g, f_bob)?.v;
            (v, info_ae_balanced(dim, g, f_bob, v)?)
        }
    };
    Ok(InfoResult {
        i_ab,
        i_ae,
        rate: i_ab - i_ae,
        f_bob,
        v_used: v,
    })
}

/// `(d, g, D)` where the key rate vanishes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalDisturbanceRecord {
    pub d: usize,
    pub g: usize,
    pub kind: AttackKind,
    /// `1 - F_B` at the root, in `[0, 1]`.
    pub disturbance: f64,
    /// `100 * disturbance`, full precision.
    pub percent: f64,
    /// `percent` rounded half-up to two decimals.
    pub percent_rounded: f64,
    pub f_bob_root: f64,
    pub v_at_root: f64,
    /// Sign changes of `r` seen in the scan; the root nearest `F_B = 1` is
    /// reported, more than one is worth a look.
    pub sign_changes: usize,
}

/// Half-up rounding to `decimals` places (inputs here are nonnegative).
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale + 0.5).floor() / scale
}

/// Scans `r(F_B)` on `[1/d + 1e-6, 1 - 1e-9]`, takes the sign change
/// nearest `F_B = 1` and bisects it to [`ROOT_TOL`].
pub fn critical_disturbance(dim: Dimension, g: usize, kind: AttackKind) -> Result<CriticalDisturbanceRecord> {
    check_g(dim, g)?;
    let d = dim.get();
    let lo = 1.0 / dim.as_f64() + ROOT_BRACKET_LOW_OFFSET;
    let hi = 1.0 - ROOT_BRACKET_HIGH_OFFSET;
    let n = ROOT_SCAN_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let rates = grid
        .iter()
        .map(|&f| evaluate_attack(dim, g, f, kind).map(|r| r.rate))
        .collect::<Result<Vec<f64>>>()?;

    let changes: Vec<usize> = (0..n - 1)
        .filter(|&i| (rates[i] > 0.0) != (rates[i + 1] > 0.0))
        .collect();
    let &i = changes.last().ok_or(Error::NoSignChange { d, g })?;

    let root = bisect(
        |f| evaluate_attack(dim, g, f, kind).map(|r| r.rate).unwrap_or(f64::NAN),
        grid[i],
        grid[i + 1],
        ROOT_TOL,
    )?;
    let at_root = evaluate_attack(dim, g, root, kind)?;
    let disturbance = 1.0 - root;
    let percent = 100.0 * disturbance;
    Ok(CriticalDisturbanceRecord {
        d,
        g,
        kind,
        disturbance,
        percent,
        percent_rounded: round_half_up(percent, 2),
        f_bob_root: root,
        v_at_root: at_root.v_used,
        sign_changes: changes.len(),
    })
}

/// All 17 cells `d in {2, 3, 5, 7}, g = 1..d`, sorted by `(d, g)`.
/// Cells are solved in parallel; failures are collected, not short-circuited.
pub fn table_sweep(kind: AttackKind) -> Result<Vec<CriticalDisturbanceRecord>> {
    let cells: Vec<(usize, usize)> = TABLE_DIMENSIONS
        .iter()
        .flat_map(|&d| (1..=d).map(move |g| (d, g)))
        .collect();
    let results: Vec<((usize, usize), Result<CriticalDisturbanceRecord>)> = cells
        .par_iter()
        .map(|&(d, g)| {
            (
                (d, g),
                Dimension::new(d).and_then(|dim| critical_disturbance(dim, g, kind)),
            )
        })
        .collect();

    let failed: Vec<(usize, usize)> = results
        .iter()
        .filter(|(_, r)| r.is_err())
        .map(|(cell, _)| *cell)
        .collect();
    if !failed.is_empty() {
        return Err(Error::CellFailures(failed));
    }
    let mut records: Vec<CriticalDisturbanceRecord> = results.into_iter().filter_map(|(_, r)| r.ok()).collect();
    records.sort_by_key(|r| (r.d, r.g));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::{balanced_matrix, BalancedCloner};

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn info_ab_endpoints() {
        for d in [2, 3, 5, 7] {
            let dm = dim(d);
            assert!((info_ab(dm, 1.0).unwrap() - (d as f64).log2()).abs() < 1e-15);
            assert!(info_ab(dm, 1.0 / d as f64).unwrap().abs() < 1e-15);
        }
        assert!(info_ab(dim(3), 0.2).is_err());
    }

    #[test]
    fn info_ab_qubit_value() {
        // 1 - h(0.15)
        let h = -(0.85f64 * 0.85f64.log2() + 0.15 * 0.15f64.log2());
        assert!((info_ab(dim(2), 0.85).unwrap() - (1.0 - h)).abs() < 1e-15);
        assert!((info_ab(dim(2), 0.85).unwrap() - 0.390159).abs() < 1e-6);
    }

    #[test]
    fn identity_cloner_leaks_nothing() {
        for d in [2, 3, 5] {
            let dist = attack_distribution(&ParameterMatrix::identity(dim(d)));
            for a in 0..d {
                for e in 0..d {
                    assert!((dist.conditional(a, 0, e) - 1.0 / d as f64).abs() < 1e-15);
                    for m in 1..d {
                        assert_eq!(dist.conditional(a, m, e), 0.0);
                    }
                }
            }
            assert!(info_ae(&dist).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_cloner_leaks_everything() {
        for d in [2, 3, 5, 7] {
            let dist = attack_distribution(&ParameterMatrix::uniform(dim(d)));
            assert!((info_ae(&dist) - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_form_matches_general() {
        for (d, g, f, v) in [
            (3, 1, 0.85, 0.88),
            (5, 2, 0.8, 0.86),
            (7, 4, 0.75, 0.85),
            (5, 5, 0.8, -1.0),
        ] {
            let dm = dim(d);
            let c = if v < 0.0 {
                BalancedCloner::universal(dm, f).unwrap()
            } else {
                BalancedCloner::new(dm, g, f, v).unwrap()
            };
            let general = attack_distribution(&balanced_matrix(&c).unwrap());
            let restricted = restricted_attack_distribution(&c);
            assert!(general.max_abs_diff(&restricted) < 1e-12);
        }
    }

    #[test]
    fn universal_cloner_v_is_forced() {
        let dm = dim(3);
        let o = optimize_v_information(dm, 3, 0.8).unwrap();
        let c = BalancedCloner::universal(dm, 0.8).unwrap();
        assert_eq!(o.v, c.v());
        assert_eq!(o.value, info_ae(&restricted_attack_distribution(&c)));
    }

    #[test]
    fn information_and_fidelity_optima_differ() {
        let dm = dim(3);
        let vi = optimize_v_information(dm, 2, 0.85).unwrap().v;
        let vf = optimize_v(dm, 2, 0.85).unwrap().v;
        assert!((vi - vf).abs() > 1e-4, "{vi} vs {vf}");
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(14.645, 2), 14.65);
        assert_eq!(round_half_up(14.6446, 2), 14.64);
        assert_eq!(round_half_up(22.99476, 2), 22.99);
    }

    #[test]
    fn qubit_bb84_threshold() {
        let r = critical_disturbance(dim(2), 1, AttackKind::InformationOptimal).unwrap();
        assert_eq!(r.percent_rounded, 14.64);
        assert!((r.percent - 14.64).abs() <= 0.01);
        assert_eq!(r.sign_changes, 1);
    }
}

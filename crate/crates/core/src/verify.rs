//! Cross-module property suites behind the `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clone::{
    bob_side_expansion, check_error_restrictions, eve_side_expansion, fidelities_closed_form, fidelities_oracle,
    fourier_dual, oracle_output, ParameterMatrix, FIDELITY_TOL,
};
use crate::cloner::{balanced_matrix, fidelity_curve, optimize_v, symmetric_solution, uniform_grid, BalancedCloner};
use crate::error::{Error, Result};
use crate::info::{
    attack_distribution, critical_disturbance, info_ab, info_ae, optimize_v_information, oracle_attack_distribution,
    restricted_attack_distribution, AttackKind, DIST_TOL,
};
use crate::output::{render, CurveRow, Format, SymmetricRow};
use crate::phasecov::{
    equivalence_report, phasecov_fidelities, phasecov_fidelities_per_state, phasecov_symmetric_optimum,
    symmetric_to_one_grid, EquatorialState, PhaseCovCloner, ORACLE_TOL,
};
use crate::qudit::{bell_state, mub_state, Dimension, MubLabel, QuditState, STATE_TOL};

/// Random matrices per dimension in the oracle and entropy suites.
pub const RANDOM_MATRICES: usize = 100;
/// Random phase vectors per dimension in the covariance check.
pub const RANDOM_PHASES: usize = 20;
/// Grid size of the phase-covariant equivalence sweep.
pub const EQUIVALENCE_POINTS: usize = 25;
/// Agreement required between the two dual expansions and the oracle.
pub const EXPANSION_TOL: f64 = 1e-12;

const ORACLE_DIMS: [usize; 3] = [2, 3, 5];
const ALL_DIMS: [usize; 4] = [2, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracle,
    Mub,
    Restrictions,
    Symmetric,
    Phasecov,
    Entropy,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Oracle,
        Suite::Mub,
        Suite::Restrictions,
        Suite::Symmetric,
        Suite::Phasecov,
        Suite::Entropy,
        Suite::Determinism,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Empty means every suite.
    pub only: Vec<Suite>,
    /// Restricts every suite to this dimension.
    pub d: Option<Dimension>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: Vec::new(),
            d: None,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    /// Largest deviation seen by a toleranced check.
    pub worst: f64,
    /// First failure, or empty.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: usize,
    worst: f64,
    detail: Option<String>,
}

impl Tally {
    fn within(&mut self, dev: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if dev.is_finite() {
            self.worst = self.worst.max(dev);
        }
        if dev.is_nan() || dev > tol {
            self.fail(format!("{}: deviation {dev:e} > {tol:e}", what()));
        }
    }

    fn holds(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.fail(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        self.detail.get_or_insert(msg);
    }

    fn finish(self, suite: Suite) -> SuiteResult {
        SuiteResult {
            suite,
            passed: self.failures == 0,
            checks: self.checks,
            failures: self.failures,
            worst: self.worst,
            detail: self.detail.unwrap_or_default(),
        }
    }
}

fn dims(opts: &VerifyOptions, default: &[usize]) -> Vec<Dimension> {
    match opts.d {
        Some(d) => vec![d],
        None => default.iter().map(|&d| Dimension::new(d).expect("prime")).collect(),
    }
}

fn rng_for(seed: u64, suite: Suite, d: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 8) | d as u64);
    rng
}

fn random_state<R: Rng>(dim: Dimension, rng: &mut R) -> QuditState {
    let raw: Vec<num_complex::Complex64> = (0..dim.get())
        .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    QuditState::new(dim, raw.into_iter().map(|c| c / n).collect()).expect("normalized by construction")
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let suites: Vec<Suite> = if opts.only.is_empty() {
        Suite::ALL.to_vec()
    } else {
        let mut s = opts.only.clone();
        s.sort();
        s.dedup();
        s
    };
    let suites = suites.par_iter().map(|&s| run_suite(s, opts)).collect();
    VerifyReport {
        seed: opts.seed,
        suites,
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteResult {
    let mut t = Tally::default();
    match suite {
        Suite::Oracle => oracle(&mut t, opts),
        Suite::Mub => mub(&mut t, opts),
        Suite::Restrictions => restrictions(&mut t, opts),
        Suite::Symmetric => symmetric(&mut t, opts),
        Suite::Phasecov => phasecov(&mut t, opts),
        Suite::Entropy => entropy(&mut t, opts),
        Suite::Determinism => determinism(&mut t, opts),
    }
    t.finish(suite)
}

fn oracle(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ORACLE_DIMS) {
        let d = dim.get();
        let mut rng = rng_for(opts.seed, Suite::Oracle, d);
        for i in 0..RANDOM_MATRICES {
            let a = ParameterMatrix::random(dim, &mut rng);
            let closed = fidelities_closed_form(&a, d).expect("g = d is valid");
            if let Some(o) = t.result(fidelities_oracle(&a, d), || format!("d={d} matrix {i} oracle")) {
                t.within(closed.max_abs_diff(&o), FIDELITY_TOL, || {
                    format!("d={d} matrix {i} fidelities")
                });
            }
            if let Some(o) = t.result(oracle_attack_distribution(&a), || format!("d={d} matrix {i}")) {
                t.within(attack_distribution(&a).max_abs_diff(&o), DIST_TOL, || {
                    format!("d={d} matrix {i} attack distribution")
                });
            }

            // Bob's view of a is Eve's view of its dual and vice versa.
            let dual = fourier_dual(&a).to_parameter_matrix().expect("dual is normalized");
            let swapped = fidelities_closed_form(&dual, d).expect("g = d is valid");
            let dev = closed
                .f_bob
                .iter()
                .zip(&swapped.f_eve)
                .chain(closed.f_eve.iter().zip(&swapped.f_bob))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            t.within(dev, FIDELITY_TOL, || format!("d={d} matrix {i} Bob/Eve duality"));

            let psi = random_state(dim, &mut rng);
            let out = oracle_output(&a, &psi).expect("dimensions match");
            let bob = bob_side_expansion(&a, &psi).expect("dimensions match");
            let eve = eve_side_expansion(&a, &psi).expect("dimensions match");
            t.within(out.max_abs_diff(&bob), EXPANSION_TOL, || {
                format!("d={d} matrix {i} Bob-side expansion")
            });
            t.within(out.max_abs_diff(&eve), EXPANSION_TOL, || {
                format!("d={d} matrix {i} Eve-side expansion")
            });
        }
    }
}

fn mub(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ALL_DIMS) {
        let d = dim.get();
        let bases = MubLabel::all(dim);
        t.holds(bases.len() == d + 1, || format!("d={d}: {} bases", bases.len()));
        let states: Vec<Vec<QuditState>> = bases
            .iter()
            .map(|&b| (0..d).map(|i| mub_state(dim, b, i).expect("valid label")).collect())
            .collect();
        let unbiased = 1.0 / (d as f64).sqrt();
        for (p, bp) in states.iter().enumerate() {
            for (q, bq) in states.iter().enumerate() {
                for (i, s) in bp.iter().enumerate() {
                    for (j, r) in bq.iter().enumerate() {
                        let overlap = s.inner(r).norm();
                        let expected = match (p == q, i == j) {
                            (true, true) => 1.0,
                            (true, false) => 0.0,
                            _ => unbiased,
                        };
                        t.within((overlap - expected).abs(), STATE_TOL, || {
                            format!("d={d} <{i}|{j}> in bases {:?}/{:?}", bases[p], bases[q])
                        });
                    }
                }
            }
        }
        let bells: Vec<_> = (0..d as i64)
            .flat_map(|m| (0..d as i64).map(move |n| (m, n)))
            .map(|(m, n)| bell_state(dim, m, n).expect("in range"))
            .collect();
        for (x, bx) in bells.iter().enumerate() {
            for (y, by) in bells.iter().enumerate() {
                let expected = if x == y { 1.0 } else { 0.0 };
                t.within((bx.inner(by).norm() - expected).abs(), STATE_TOL, || {
                    format!("d={d} Bell states {x}/{y}")
                });
            }
        }
    }
}

fn restrictions(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ALL_DIMS) {
        let d = dim.get();
        for g in 1..=d {
            let Some(sym) = t.result(symmetric_solution(dim, g), || format!("d={d} g={g}")) else {
                continue;
            };
            let n = 9;
            for i in 0..n {
                let f = sym.fidelity + (1.0 - sym.fidelity) * i as f64 / (n - 1) as f64;
                let vs = [
                    optimize_v(dim, g, f).map(|o| o.v),
                    optimize_v_information(dim, g, f).map(|o| o.v),
                ];
                for v in vs {
                    let m = v
                        .and_then(|v| BalancedCloner::new(dim, g, f, v))
                        .and_then(|c| balanced_matrix(&c));
                    let Some(a) = t.result(m, || format!("d={d} g={g} F={f}")) else {
                        continue;
                    };
                    if let Some(r) = t.result(check_error_restrictions(&a, g), || format!("d={d} g={g}")) {
                        t.within(r.max_violation, crate::clone::MATRIX_TOL, || {
                            format!("d={d} g={g} F={f} error classes")
                        });
                        t.within((r.f_bob - f).abs(), FIDELITY_TOL, || {
                            format!("d={d} g={g} F={f} Bob fidelity")
                        });
                    }
                }
            }
        }
    }
}

fn symmetric(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ALL_DIMS) {
        let d = dim.get();
        let mut previous = f64::INFINITY;
        for g in 1..=d {
            let Some(s) = t.result(symmetric_solution(dim, g), || format!("d={d} g={g}")) else {
                continue;
            };
            t.within(s.residual.abs(), 1e-9, || format!("d={d} g={g} fixed point"));
            t.holds(s.fidelity < previous, || {
                format!("d={d} g={g}: symmetric fidelity not decreasing")
            });
            previous = s.fidelity;
            if g == d - 1 {
                t.within((s.fidelity - phasecov_symmetric_optimum(dim)).abs(), 1e-10, || {
                    format!("d={d} phase-covariant symmetric optimum")
                });
            }
            if d == 2 {
                let expected = if g == 1 {
                    1.0 / (4.0 - 2.0 * 2f64.sqrt())
                } else {
                    5.0 / 6.0
                };
                t.within((s.fidelity - expected).abs(), 1e-10, || {
                    format!("qubit g={g} symmetric fidelity")
                });
            }
        }
    }
}

fn phasecov(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ORACLE_DIMS) {
        let d = dim.get();
        let mut rng = rng_for(opts.seed, Suite::Phasecov, d);
        let phi = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let theta = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let c = PhaseCovCloner::from_angles(dim, phi, theta).expect("angles in range");
        let (f1, f2) = phasecov_fidelities(&c);
        let mirror = PhaseCovCloner::from_angles(dim, phi, std::f64::consts::FRAC_PI_2 - theta).expect("in range");
        let (m1, m2) = phasecov_fidelities(&mirror);
        t.within((f1 - m2).abs().max((f2 - m1).abs()), 1e-14, || {
            format!("d={d} exchange symmetry")
        });

        let states: Vec<EquatorialState> = (0..RANDOM_PHASES)
            .map(|_| EquatorialState::random(dim, &mut rng))
            .collect();
        if let Some(per) = t.result(phasecov_fidelities_per_state(&c, &states), || format!("d={d} oracle")) {
            for (i, (o1, o2)) in per.into_iter().enumerate() {
                t.within((o1 - f1).abs().max((o2 - f2).abs()), ORACLE_TOL, || {
                    format!("d={d} equatorial state {i}")
                });
            }
        }

        let grid = symmetric_to_one_grid(dim, EQUIVALENCE_POINTS);
        if let Some(r) = t.result(equivalence_report(dim, &grid), || format!("d={d} equivalence")) {
            t.within(r.max_gap, crate::phasecov::EQUIVALENCE_TOL, || {
                format!("d={d} equivalence gap")
            });
            let monotone = r
                .points
                .windows(2)
                .all(|w| w[1].f2_phasecov <= w[0].f2_phasecov + 1e-12);
            t.holds(monotone, || format!("d={d} trade-off not non-increasing"));
        }
    }
}

fn entropy(t: &mut Tally, opts: &VerifyOptions) {
    for dim in dims(opts, &ALL_DIMS) {
        let d = dim.get();
        let max = dim.as_f64().log2();
        let in_bounds = |i: f64| (0.0..=max + 1e-12).contains(&i);
        let mut rng = rng_for(opts.seed, Suite::Entropy, d);
        for i in 0..RANDOM_MATRICES {
            let dist = attack_distribution(&ParameterMatrix::random(dim, &mut rng));
            let rows = dist.row_sums().into_iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
            t.within(rows, DIST_TOL, || format!("d={d} matrix {i} row sums"));
            t.holds(dist.min_entry() >= 0.0, || {
                format!("d={d} matrix {i} negative probability")
            });
            let iae = info_ae(&dist);
            t.holds(in_bounds(iae), || format!("d={d} matrix {i}: I_AE = {iae}"));
        }
        for f in uniform_grid(dim, 21) {
            match info_ab(dim, f) {
                Ok(i) => t.holds(in_bounds(i), || format!("d={d} F={f}: I_AB = {i}")),
                Err(e) => t.fail(format!("d={d} F={f}: {e}")),
            }
            for g in 1..=d {
                let c = optimize_v(dim, g, f).and_then(|o| BalancedCloner::new(dim, g, f, o.v));
                if let Ok(c) = c {
                    let i = info_ae(&restricted_attack_distribution(&c));
                    t.holds(in_bounds(i), || format!("d={d} g={g} F={f}: I_AE = {i}"));
                }
            }
        }
    }
}

fn determinism(t: &mut Tally, opts: &VerifyOptions) {
    let once = |dim: Dimension| -> Result<Vec<String>> {
        let d = dim.get();
        let grid = uniform_grid(dim, 21);
        let mut curve = Vec::new();
        let mut sym = Vec::new();
        for g in 1..=d {
            curve.extend(fidelity_curve(dim, g, &grid)?.iter().map(|p| CurveRow::new(d, g, p)));
            sym.push(SymmetricRow::from(&symmetric_solution(dim, g)?));
        }
        let cell = critical_disturbance(dim, 1, AttackKind::InformationOptimal)?;
        Ok(vec![
            render(Format::Csv, "curve", opts.seed, &curve)?,
            render(Format::Json, "curve", opts.seed, &curve)?,
            render(Format::Csv, "symmetric", opts.seed, &sym)?,
            render(Format::Json, "table", opts.seed, &[cell])?,
        ])
    };
    for dim in dims(opts, &[3]) {
        let d = dim.get();
        let runs: Result<(Vec<String>, Vec<String>)> = once(dim).and_then(|a| Ok((a, once(dim)?)));
        if let Some((a, b)) = t.result(runs, || format!("d={d} rendering")) {
            for (x, y) in a.iter().zip(&b) {
                t.holds(x.as_bytes() == y.as_bytes(), || format!("d={d}: rerun output differs"));
            }
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Suite as clap::ValueEnum>::from_str(s, true).map_err(|_| {
            Error::out_of_range(
                "suite",
                s,
                "oracle|mub|restrictions|symmetric|phasecov|entropy|determinism",
            )
        })
    }
}

//! Eve's cloning transformation `U = sum_mn a_mn (U_mn (x) U_{m,-n} (x) I)`
//! acting on `|psi>_A |Phi_00>_{E'E}`.
//!
//! Tripartite output vectors are indexed lexicographically by
//! `(B, E', E)`. The closed-form fidelities are checked against a dense
//! state-vector oracle that builds the full `d^3` output and traces out
//! the other two parties.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qudit::{
    bell_state_wrapped, mub_state, pauli_apply_raw, Dimension, MubLabel, PauliLabel, QuditState, TripartiteState,
};

/// Normalization tolerance for parameter matrices.
pub const MATRIX_TOL: f64 = 1e-10;

/// Agreement tolerance between closed-form and oracle fidelities.
pub const FIDELITY_TOL: f64 = 1e-10;

/// Hermiticity / trace tolerance for reduced density matrices.
pub const DENSITY_TOL: f64 = 1e-12;

/// Most negative eigenvalue accepted for a reduced density matrix.
pub const EIGEN_FLOOR: f64 = -1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);

/// The `d x d` matrix `(a_mn)` defining the cloner. Row `m` is the shift,
/// column `n` the phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMatrix {
    dim: Dimension,
    entries: Vec<C64>,
}

impl ParameterMatrix {
    /// Rejects input whose squared norm differs from 1 by more than
    /// [`MATRIX_TOL`]; nothing is renormalized.
    pub fn new(dim: Dimension, entries: Vec<C64>) -> Result<Self> {
        let d = dim.get();
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: entries.len(),
            });
        }
        let norm_sq: f64 = entries.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > MATRIX_TOL {
            return Err(Error::NotNormalized {
                what: "parameter matrix",
                norm_sq,
            });
        }
        Ok(ParameterMatrix { dim, entries })
    }

    pub fn from_fn(dim: Dimension, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let d = dim.get();
        let entries = (0..d * d).map(|i| f(i / d, i % d)).collect();
        Self::new(dim, entries)
    }

    pub fn from_real(dim: Dimension, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_fn(dim, |m, n| C64::new(f(m, n), 0.0))
    }

    /// `a_mn = delta_m0 delta_n0`: Bob receives the state untouched.
    pub fn identity(dim: Dimension) -> Self {
        let mut entries = vec![ZERO; dim.get() * dim.get()];
        entries[0] = C64::new(1.0, 0.0);
        ParameterMatrix { dim, entries }
    }

    /// `a_mn = 1/d`: Eve keeps a perfect copy.
    pub fn uniform(dim: Dimension) -> Self {
        let d = dim.get();
        ParameterMatrix {
            dim,
            entries: vec![C64::new(1.0 / d as f64, 0.0); d * d],
        }
    }

    /// Random complex matrix with entries uniform in the unit square,
    /// normalized.
    pub fn random<R: Rng + ?Sized>(dim: Dimension, rng: &mut R) -> Self {
        let d = dim.get();
        let mut entries: Vec<C64> = (0..d * d)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for e in &mut entries {
            *e /= norm;
        }
        ParameterMatrix { dim, entries }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    /// `a_mn` with both indices taken modulo `d`.
    #[inline]
    pub fn get(&self, m: usize, n: usize) -> C64 {
        let d = self.dim.get();
        self.entries[(m % d) * d + n % d]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `(b_mn)`, the discrete Fourier transform of `(a_mn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMatrix {
    dim: Dimension,
    entries: Vec<C64>,
}

impl DualMatrix {
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> C64 {
        let d = self.dim.get();
        self.entries[(m % d) * d + n % d]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Reinterprets the dual as a cloner in its own right (Bob and Eve
    /// exchanged).
    pub fn to_parameter_matrix(&self) -> Result<ParameterMatrix> {
        ParameterMatrix::new(self.dim, self.entries.clone())
    }
}

/// `b_mn = (1/d) sum_{k,r} a_kr omega^(kn - rm)`.
pub fn fourier_dual(a: &ParameterMatrix) -> DualMatrix {
    let dim = a.dim;
    let d = dim.get();
    let roots = dim.roots_of_unity();
    let mut entries = vec![ZERO; d * d];
    for m in 0..d {
        for n in 0..d {
            let mut acc = ZERO;
            for k in 0..d {
                for r in 0..d {
                    acc += a.get(k, r) * roots[dim.wrap((k * n) as i64 - (r * m) as i64)];
                }
            }
            entries[m * d + n] = acc / d as f64;
        }
    }
    DualMatrix { dim, entries }
}

fn check_dim(expected: Dimension, found: Dimension) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: expected.get(),
            found: found.get(),
        })
    }
}

/// Applies the cloner to `|psi>_A |Phi_00>_{E'E}` by explicit summation
/// over all `(m, n)`, `j` and ancilla index.
pub fn oracle_output(a: &ParameterMatrix, psi: &QuditState) -> Result<TripartiteState> {
    let dim = a.dim;
    check_dim(dim, psi.dim())?;
    let d = dim.get();
    let ancilla = 1.0 / dim.as_f64().sqrt();
    let mut out = TripartiteState::zeros(dim);
    let amps_psi = psi.amplitudes();
    for m in 0..d {
        for n in 0..d {
            let amn = a.get(m, n);
            if amn == ZERO {
                continue;
            }
            for (j, &cj) in amps_psi.iter().enumerate() {
                // U_mn on A: |j> -> omega^(jn) |j+m>
                let bob = (j + m) % d;
                let phase_a = dim.omega_pow((j * n) as i64);
                for k in 0..d {
                    // U_{m,-n} on E': |k> -> omega^(-kn) |k+m>, E keeps |k>.
                    let phase_e = dim.omega_pow(-((k * n) as i64));
                    let idx = out.index(bob, (k + m) % d, k);
                    out.amplitudes_mut()[idx] += amn * cj * phase_a * phase_e * ancilla;
                }
            }
        }
    }
    Ok(out)
}

/// Bob-side expansion `sum_mn a_mn omega^(mn) U_mn|psi>_B (x) |Phi_{-m,n}>_{E'E}`.
///
/// The `omega^(mn)` factor comes from moving `U_{m,-n}` off the `E'`
/// register of `|Phi_00>`; without it the expansion does not reproduce
/// the transformation.
pub fn bob_side_expansion(a: &ParameterMatrix, psi: &QuditState) -> Result<TripartiteState> {
    let dim = a.dim;
    check_dim(dim, psi.dim())?;
    let d = dim.get();
    let mut out = TripartiteState::zeros(dim);
    for m in 0..d {
        for n in 0..d {
            let bob = QuditState::from_raw(
                dim,
                pauli_apply_raw(PauliLabel::new(dim, m as i64, n as i64), psi.amplitudes()),
            );
            let pair = bell_state_wrapped(dim, -(m as i64), n as i64);
            let term = TripartiteState::qudit_then_pair(&bob, &pair)?;
            out.add_scaled(a.get(m, n) * dim.omega_pow((m * n) as i64), &term);
        }
    }
    Ok(out)
}

/// Eve-side expansion `sum_mn b_mn |Phi_{m,n}>_{BE'} (x) U_mn|psi>_E`.
pub fn eve_side_expansion(a: &ParameterMatrix, psi: &QuditState) -> Result<TripartiteState> {
    let dim = a.dim;
    check_dim(dim, psi.dim())?;
    let d = dim.get();
    let b = fourier_dual(a);
    let mut out = TripartiteState::zeros(dim);
    for m in 0..d {
        for n in 0..d {
            let eve = QuditState::from_raw(
                dim,
                pauli_apply_raw(PauliLabel::new(dim, m as i64, n as i64), psi.amplitudes()),
            );
            let pair = bell_state_wrapped(dim, m as i64, n as i64);
            let term = TripartiteState::pair_then_qudit(&pair, &eve)?;
            out.add_scaled(b.get(m, n), &term);
        }
    }
    Ok(out)
}

/// Which register of the `(B, E', E)` output to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Bob,
    EveAncilla,
    Eve,
}

impl Party {
    pub fn register(self) -> usize {
        match self {
            Party::Bob => 0,
            Party::EveAncilla => 1,
            Party::Eve => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: Dimension,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &QuditState) -> f64 {
        let v = psi.amplitudes();
        let d = self.dim.get();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += v[i].conj() * self.entries[(i, j)] * v[j];
            }
        }
        acc.re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim.get();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian, unit trace, no eigenvalue below [`EIGEN_FLOOR`].
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > DENSITY_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({h:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr}")));
        }
        let min = self.eigenvalues()[0];
        if min < EIGEN_FLOOR {
            return Err(Error::Numerical(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Partial trace keeping one register of a tripartite pure state.
pub fn reduced_density(state: &TripartiteState, party: Party) -> DensityMatrix {
    reduced_register(state, party.register())
}

/// Partial trace keeping register `keep` (0, 1 or 2).
pub fn reduced_register(state: &TripartiteState, keep: usize) -> DensityMatrix {
    assert!(keep < 3, "register index {keep} out of range");
    let dim = state.dim();
    let d = dim.get();
    let amps = state.amplitudes();
    let mut rho = DMatrix::from_element(d, d, ZERO);
    // Move the kept register to the front: idx(keep = i, others = (p, q)).
    let idx = |i: usize, p: usize, q: usize| match keep {
        0 => (i * d + p) * d + q,
        1 => (p * d + i) * d + q,
        _ => (p * d + q) * d + i,
    };
    for i in 0..d {
        for j in 0..d {
            let mut acc = ZERO;
            for p in 0..d {
                for q in 0..d {
                    acc += amps[idx(i, p, q)] * amps[idx(j, p, q)].conj();
                }
            }
            rho[(i, j)] = acc;
        }
    }
    DensityMatrix { dim, entries: rho }
}

/// Bob's and Eve's fidelities in each of the `g + 1` protocol bases,
/// computational basis first, then `k = 0 .. g-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelitySet {
    pub d: usize,
    pub g: usize,
    pub f_bob: Vec<f64>,
    pub f_eve: Vec<f64>,
}

impl FidelitySet {
    pub fn max_abs_diff(&self, other: &FidelitySet) -> f64 {
        self.f_bob
            .iter()
            .zip(&other.f_bob)
            .chain(self.f_eve.iter().zip(&other.f_eve))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_g(dim: Dimension, g: usize) -> Result<()> {
    if g >= 1 && g <= dim.get() {
        Ok(())
    } else {
        Err(Error::out_of_range("g", g, format!("1 <= g <= {}", dim.get())))
    }
}

/// Closed-form fidelities:
/// `F_B = sum_n |a_0n|^2`, `F_B^(k) = sum_m |a_{m,km}|^2`,
/// `F_E = (1/d) sum_m |sum_n a_mn|^2`, `F_E^(k) = (1/d) sum_n |sum_m a_{m,n+km}|^2`.
pub fn fidelities_closed_form(a: &ParameterMatrix, g: usize) -> Result<FidelitySet> {
    let dim = a.dim;
    check_g(dim, g)?;
    let d = dim.get();
    let inv_d = 1.0 / d as f64;

    let mut f_bob = Vec::with_capacity(g + 1);
    let mut f_eve = Vec::with_capacity(g + 1);
    f_bob.push((0..d).map(|n| a.get(0, n).norm_sqr()).sum());
    f_eve.push(
        inv_d
            * (0..d)
                .map(|m| (0..d).map(|n| a.get(m, n)).sum::<C64>().norm_sqr())
                .sum::<f64>(),
    );
    for k in 0..g {
        f_bob.push((0..d).map(|m| a.get(m, k * m).norm_sqr()).sum());
        f_eve.push(
            inv_d
                * (0..d)
                    .map(|n| (0..d).map(|m| a.get(m, n + k * m)).sum::<C64>().norm_sqr())
                    .sum::<f64>(),
        );
    }
    Ok(FidelitySet { d, g, f_bob, f_eve })
}

/// Fidelities from the state-vector oracle, averaged over the `d` symbols
/// of each basis. Fails if the per-symbol fidelity varies by more than
/// [`FIDELITY_TOL`] within a basis.
pub fn fidelities_oracle(a: &ParameterMatrix, g: usize) -> Result<FidelitySet> {
    let dim = a.dim;
    check_g(dim, g)?;
    let d = dim.get();
    let mut f_bob = Vec::with_capacity(g + 1);
    let mut f_eve = Vec::with_capacity(g + 1);
    for basis in MubLabel::protocol_bases(g) {
        let mut bob = Vec::with_capacity(d);
        let mut eve = Vec::with_capacity(d);
        for i in 0..d {
            let psi = mub_state(dim, basis, i)?;
            let out = oracle_output(a, &psi)?;
            bob.push(reduced_density(&out, Party::Bob).expectation(&psi));
            eve.push(reduced_density(&out, Party::Eve).expectation(&psi));
        }
        for (who, vals) in [("Bob", &bob), ("Eve", &eve)] {
            let (lo, hi) = min_max(vals);
            if hi - lo > FIDELITY_TOL {
                return Err(Error::Numerical(format!(
                    "{who}'s fidelity depends on the symbol in basis {} (spread {:e})",
                    basis.index(),
                    hi - lo
                )));
            }
        }
        f_bob.push(bob.iter().sum::<f64>() / d as f64);
        f_eve.push(eve.iter().sum::<f64>() / d as f64);
    }
    Ok(FidelitySet { d, g, f_bob, f_eve })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Probabilities of each of Bob's error classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub f_bob: f64,
    /// `sum_j |a_mj|^2` for shift `m = 0 .. d-1`.
    pub shift_classes: Vec<f64>,
    /// `sum_i |a_{i, k i - m}|^2`, outer index `k = 0 .. g-1`, inner `m`.
    pub basis_classes: Vec<Vec<f64>>,
    pub max_violation: f64,
    pub passes: bool,
}

/// Checks that every basis has error class `m = 0` with probability `F_B`
/// and every `m != 0` with probability `(1 - F_B)/(d - 1)`.
pub fn check_error_restrictions(a: &ParameterMatrix, g: usize) -> Result<RestrictionReport> {
    let dim = a.dim;
    check_g(dim, g)?;
    let d = dim.get();
    let shift_classes: Vec<f64> = (0..d).map(|m| (0..d).map(|j| a.get(m, j).norm_sqr()).sum()).collect();
    let basis_classes: Vec<Vec<f64>> = (0..g)
        .map(|k| {
            (0..d)
                .map(|m| (0..d).map(|i| a.get(i, (k * i + d * d - m) % d).norm_sqr()).sum())
                .collect()
        })
        .collect();

    let f_bob = shift_classes[0];
    let off = (1.0 - f_bob) / (d as f64 - 1.0);
    let expected = |m: usize| if m == 0 { f_bob } else { off };
    let max_violation = std::iter::once(&shift_classes)
        .chain(basis_classes.iter())
        .flat_map(|row| row.iter().enumerate().map(|(m, p)| (p - expected(m)).abs()))
        .fold(0.0, f64::max);
    Ok(RestrictionReport {
        f_bob,
        shift_classes,
        basis_classes,
        max_violation,
        passes: max_violation <= MATRIX_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn unnormalized_matrix_is_rejected() {
        let err = ParameterMatrix::from_real(dim(2), |_, _| 1.0).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        assert!(ParameterMatrix::new(dim(2), vec![ZERO; 3]).is_err());
    }

    #[test]
    fn dual_of_delta_is_flat() {
        for d in [2, 3, 5] {
            let b = fourier_dual(&ParameterMatrix::identity(dim(d)));
            for e in b.entries() {
                assert!((e - C64::new(1.0 / d as f64, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dual_of_flat_is_delta() {
        for d in [2, 3, 5, 7] {
            let b = fourier_dual(&ParameterMatrix::uniform(dim(d)));
            for (i, e) in b.entries().iter().enumerate() {
                let expect = if i == 0 { 1.0 } else { 0.0 };
                assert!((e - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_cloner_on_zero() {
        let d = dim(2);
        let psi = QuditState::basis(d, 0).unwrap();
        let out = oracle_output(&ParameterMatrix::identity(d), &psi).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut expect = vec![ZERO; 8];
        expect[0] = C64::new(h, 0.0); // |0>|00>
        expect[3] = C64::new(h, 0.0); // |0>|11>
        for (a, e) in out.amplitudes().iter().zip(&expect) {
            assert!((a - e).norm() < 1e-12);
        }
    }

    #[test]
    fn reduced_density_of_product_state() {
        let d = dim(3);
        let psi = QuditState::basis(d, 0).unwrap();
        let out = oracle_output(&ParameterMatrix::identity(d), &psi).unwrap();
        let rho = reduced_density(&out, Party::Bob);
        rho.validate().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!((rho.entries()[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        // Eve's half of a maximally entangled pair is maximally mixed.
        let rho_e = reduced_density(&out, Party::Eve);
        assert!((rho_e.entries()[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_flat_fidelities() {
        for d in [2, 3, 5] {
            let dm = dim(d);
            for g in 1..=d {
                let f = fidelities_closed_form(&ParameterMatrix::identity(dm), g).unwrap();
                assert!(f.f_bob.iter().all(|x| (x - 1.0).abs() < 1e-14));
                assert!(f.f_eve.iter().all(|x| (x - 1.0 / d as f64).abs() < 1e-14));
                let f = fidelities_closed_form(&ParameterMatrix::uniform(dm), g).unwrap();
                assert!(f.f_bob.iter().all(|x| (x - 1.0 / d as f64).abs() < 1e-14));
                assert!(f.f_eve.iter().all(|x| (x - 1.0).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn identity_oracle_equals_closed_form() {
        let d = dim(3);
        let a = ParameterMatrix::identity(d);
        let o = fidelities_oracle(&a, 3).unwrap();
        let c = fidelities_closed_form(&a, 3).unwrap();
        assert!(o.max_abs_diff(&c) < 1e-14);
    }

    #[test]
    fn g_out_of_range() {
        let a = ParameterMatrix::identity(dim(3));
        assert!(fidelities_closed_form(&a, 0).is_err());
        assert!(fidelities_closed_form(&a, 4).is_err());
        assert!(fidelities_oracle(&a, 4).is_err());
        assert!(check_error_restrictions(&a, 0).is_err());
    }

    #[test]
    fn random_matrix_density_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 5] {
            let dm = dim(d);
            let a = ParameterMatrix::random(dm, &mut rng);
            for basis in MubLabel::all(dm) {
                let psi = mub_state(dm, basis, 1).unwrap();
                let out = oracle_output(&a, &psi).unwrap();
                assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
                for p in [Party::Bob, Party::EveAncilla, Party::Eve] {
                    reduced_density(&out, p).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn identity_restrictions() {
        let r = check_error_restrictions(&ParameterMatrix::identity(dim(5)), 3).unwrap();
        assert!(r.passes);
        assert_eq!(r.f_bob, 1.0);
        assert_eq!(r.shift_classes[0], 1.0);
        assert!(r.shift_classes[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn random_matrix_fails_restrictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ParameterMatrix::random(dim(3), &mut rng);
        assert!(!check_error_restrictions(&a, 1).unwrap().passes);
    }
}

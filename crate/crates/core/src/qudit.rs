//! Dense linear algebra for a single prime-dimensional qudit and small
//! products of qudits.
//!
//! Everything here is built from roots of unity with exponents reduced
//! modulo `d` before exponentiation, so states are exact up to the last
//! ulp of `sin`/`cos`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used for every norm / overlap assertion on qudit states.
pub const STATE_TOL: f64 = 1e-12;

/// Hilbert-space dimension of a qudit. Always a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if is_prime(d) {
            Ok(Dimension(d))
        } else {
            Err(Error::InvalidDimension(d))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Reduces an arbitrary (possibly negative) integer modulo `d`.
    #[inline]
    pub fn wrap(self, r: i64) -> usize {
        r.rem_euclid(self.0 as i64) as usize
    }

    /// `omega^r` with `omega = exp(2 pi i / d)`.
    pub fn omega_pow(self, r: i64) -> C64 {
        let r = self.wrap(r);
        C64::from_polar(1.0, 2.0 * PI * r as f64 / self.0 as f64)
    }

    /// All `d` powers `omega^0 .. omega^(d-1)`, for table lookups in hot loops.
    pub fn roots_of_unity(self) -> Vec<C64> {
        (0..self.0).map(|r| self.omega_pow(r as i64)).collect()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// One of the `d + 1` mutually unbiased bases.
///
/// `Computational` is `{|i>}` (index `-1`); `Tilde(k)` is `{|i~(k)>}` for
/// `k = 0 .. d-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MubLabel {
    Computational,
    Tilde(usize),
}

impl MubLabel {
    pub fn from_index(dim: Dimension, k: i64) -> Result<Self> {
        match k {
            -1 => Ok(MubLabel::Computational),
            k if k >= 0 && (k as usize) < dim.get() => Ok(MubLabel::Tilde(k as usize)),
            _ => Err(Error::out_of_range(
                "basis label",
                k,
                format!("-1 <= k < {}", dim.get()),
            )),
        }
    }

    pub fn index(self) -> i64 {
        match self {
            MubLabel::Computational => -1,
            MubLabel::Tilde(k) => k as i64,
        }
    }

    /// All `d + 1` labels, computational basis first.
    pub fn all(dim: Dimension) -> Vec<MubLabel> {
        std::iter::once(MubLabel::Computational)
            .chain((0..dim.get()).map(MubLabel::Tilde))
            .collect()
    }

    /// The `g + 1` bases used by a `(g+1)`-basis protocol.
    pub fn protocol_bases(g: usize) -> Vec<MubLabel> {
        std::iter::once(MubLabel::Computational)
            .chain((0..g).map(MubLabel::Tilde))
            .collect()
    }
}

/// Weyl-Heisenberg displacement `U_mn = X^m Z^n`, `U_mn|j> = omega^(jn)|j+m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    dim: Dimension,
    shift: usize,
    phase: usize,
}

impl PauliLabel {
    /// Indices are reduced modulo `d`, so `U_{m,-n}` can be written directly.
    pub fn new(dim: Dimension, shift: i64, phase: i64) -> Self {
        PauliLabel {
            dim,
            shift: dim.wrap(shift),
            phase: dim.wrap(phase),
        }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn phase(&self) -> usize {
        self.phase
    }
}

/// Pure state of one qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    dim: Dimension,
    amps: Vec<C64>,
}

impl QuditState {
    pub fn new(dim: Dimension, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dim.get() {
            return Err(Error::DimensionMismatch {
                expected: dim.get(),
                found: amps.len(),
            });
        }
        let norm_sq = norm_sqr(&amps);
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized {
                what: "qudit state",
                norm_sq,
            });
        }
        Ok(QuditState { dim, amps })
    }

    pub(crate) fn from_raw(dim: Dimension, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), dim.get());
        QuditState { dim, amps }
    }

    pub fn basis(dim: Dimension, i: usize) -> Result<Self> {
        mub_state(dim, MubLabel::Computational, i)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuditState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// True when the two states are the same ray (equal up to global phase).
    pub fn same_ray(&self, other: &QuditState, tol: f64) -> bool {
        self.dim == other.dim && (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

/// `|i>` of the basis `basis`.
///
/// For `Tilde(k)` the amplitudes are `omega^(i(d-j) - k s_j) / sqrt(d)` with
/// `s_j = j + (j+1) + ... + (d-1)`. For `d = 2` this phase family collapses
/// (`s_0 = s_1`), so the second qubit basis is taken as the `Y` eigenbasis
/// `(|0> + i (-1)^i |1>) / sqrt 2`, the unique completion to three MUBs that
/// keeps `U_{m,km}` as the stabilizing displacement of basis `k`.
pub fn mub_state(dim: Dimension, basis: MubLabel, i: usize) -> Result<QuditState> {
    let d = dim.get();
    if i >= d {
        return Err(Error::out_of_range("symbol", i, format!("0 <= i < {d}")));
    }
    let amps = match basis {
        MubLabel::Computational => {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[i] = C64::new(1.0, 0.0);
            v
        }
        MubLabel::Tilde(k) if k >= d => return Err(Error::out_of_range("basis label", k, format!("-1 <= k < {d}"))),
        MubLabel::Tilde(1) if d == 2 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let sign = if i == 0 { 1.0 } else { -1.0 };
            vec![C64::new(s, 0.0), C64::new(0.0, sign * s)]
        }
        MubLabel::Tilde(k) => {
            let norm = 1.0 / dim.as_f64().sqrt();
            (0..d)
                .map(|j| {
                    let s_j = tail_sum(d, j) as i64;
                    let exp = (i * (d - j)) as i64 - (k as i64) * s_j;
                    dim.omega_pow(exp) * norm
                })
                .collect()
        }
    };
    Ok(QuditState::from_raw(dim, amps))
}

/// `j + (j+1) + ... + (d-1)`.
fn tail_sum(d: usize, j: usize) -> usize {
    (j..d).sum()
}

pub fn apply_pauli(label: PauliLabel, state: &QuditState) -> Result<QuditState> {
    let dim = state.dim;
    if label.dim != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.get(),
            found: label.dim.get(),
        });
    }
    Ok(QuditState::from_raw(dim, pauli_apply_raw(label, &state.amps)))
}

pub(crate) fn pauli_apply_raw(label: PauliLabel, amps: &[C64]) -> Vec<C64> {
    let dim = label.dim;
    let d = dim.get();
    let mut out = vec![C64::new(0.0, 0.0); d];
    for (j, &c) in amps.iter().enumerate() {
        out[(j + label.shift) % d] = dim.omega_pow((j * label.phase) as i64) * c;
    }
    out
}

/// Pure state of two qudits, index `j1 * d + j2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim: Dimension,
    amps: Vec<C64>,
}

impl BipartiteState {
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn inner(&self, other: &BipartiteState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `|Phi_mn> = (I (x) U_{m,-n}) |Phi_00>`, `|Phi_00> = sum_j |jj> / sqrt(d)`.
pub fn bell_state(dim: Dimension, m: i64, n: i64) -> Result<BipartiteState> {
    let d = dim.get() as i64;
    if !(0..d).contains(&m) || !(0..d).contains(&n) {
        return Err(Error::out_of_range(
            "Bell index",
            format!("({m}, {n})"),
            format!("0 <= m, n < {d}"),
        ));
    }
    Ok(bell_state_wrapped(dim, m, n))
}

/// Same as [`bell_state`] with indices taken modulo `d`.
pub(crate) fn bell_state_wrapped(dim: Dimension, m: i64, n: i64) -> BipartiteState {
    let d = dim.get();
    let u = PauliLabel::new(dim, m, -n);
    let norm = 1.0 / dim.as_f64().sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        let target = (j + u.shift) % d;
        amps[j * d + target] = dim.omega_pow((j * u.phase) as i64) * norm;
    }
    BipartiteState { dim, amps }
}

/// Pure state of three qudits, lexicographic index `(r0 * d + r1) * d + r2`.
///
/// For the cloning attack the registers are `(B, E', E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    dim: Dimension,
    amps: Vec<C64>,
}

impl TripartiteState {
    pub(crate) fn zeros(dim: Dimension) -> Self {
        let d = dim.get();
        TripartiteState {
            dim,
            amps: vec![C64::new(0.0, 0.0); d * d * d],
        }
    }

    /// `|a> (x) |bc>`.
    pub fn qudit_then_pair(a: &QuditState, bc: &BipartiteState) -> Result<Self> {
        check_same(a.dim, bc.dim)?;
        let amps = a
            .amps
            .iter()
            .flat_map(|&x| bc.amps.iter().map(move |&y| x * y))
            .collect();
        Ok(TripartiteState { dim: a.dim, amps })
    }

    /// `|ab> (x) |c>`.
    pub fn pair_then_qudit(ab: &BipartiteState, c: &QuditState) -> Result<Self> {
        check_same(ab.dim, c.dim)?;
        let amps = ab
            .amps
            .iter()
            .flat_map(|&x| c.amps.iter().map(move |&y| x * y))
            .collect();
        Ok(TripartiteState { dim: ab.dim, amps })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    #[inline]
    pub fn index(&self, r0: usize, r1: usize, r2: usize) -> usize {
        let d = self.dim.get();
        (r0 * d + r1) * d + r2
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `self += c * other`.
    pub(crate) fn add_scaled(&mut self, c: C64, other: &TripartiteState) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    pub fn max_abs_diff(&self, other: &TripartiteState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_same(a: Dimension, b: Dimension) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.get(),
            found: b.get(),
        })
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

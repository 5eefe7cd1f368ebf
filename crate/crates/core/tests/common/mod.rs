//! Reference implementations for tests. They share no code with the
//! library beyond its public value types: operators are built as dense
//! matrices and applied by matrix-vector products.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type Mat = Vec<Vec<C>>;

pub fn omega(d: usize, r: i64) -> C {
    let r = r.rem_euclid(d as i64) as f64;
    C::from_polar(1.0, 2.0 * PI * r / d as f64)
}

pub fn zeros(n: usize) -> Mat {
    vec![vec![C::new(0.0, 0.0); n]; n]
}

/// `X^m Z^n` as a dense matrix: `|j> -> w^{jn} |j+m>`.
pub fn pauli(d: usize, m: i64, n: i64) -> Mat {
    let mut u = zeros(d);
    for j in 0..d {
        let row = (j as i64 + m).rem_euclid(d as i64) as usize;
        u[row][j] = omega(d, j as i64 * n);
    }
    u
}

pub fn identity(d: usize) -> Mat {
    let mut u = zeros(d);
    for (i, r) in u.iter_mut().enumerate() {
        r[i] = C::new(1.0, 0.0);
    }
    u
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (p, q) = (a.len(), b.len());
    let mut out = zeros(p * q);
    for i in 0..p {
        for j in 0..p {
            for k in 0..q {
                for l in 0..q {
                    out[i * q + k][j * q + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn add_scaled(acc: &mut Mat, c: C, m: &Mat) {
    for (r, mr) in acc.iter_mut().zip(m) {
        for (x, y) in r.iter_mut().zip(mr) {
            *x += c * y;
        }
    }
}

pub fn matvec(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn tensor(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `(1/sqrt d) sum_j |jj>`.
pub fn phi00(d: usize) -> Vec<C> {
    let mut v = vec![C::new(0.0, 0.0); d * d];
    for j in 0..d {
        v[j * d + j] = C::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

/// `(I (x) U_{m,-n}) |Phi_00>`.
pub fn bell(d: usize, m: i64, n: i64) -> Vec<C> {
    matvec(&kron(&identity(d), &pauli(d, m, -n)), &phi00(d))
}

/// Cloner operator `sum a_mn U_mn (x) U_{m,-n} (x) I` on `d^3`.
pub fn cloner_operator(d: usize, a: &[C]) -> Mat {
    let mut op = zeros(d * d * d);
    for m in 0..d {
        for n in 0..d {
            let term = kron(
                &kron(&pauli(d, m as i64, n as i64), &pauli(d, m as i64, -(n as i64))),
                &identity(d),
            );
            add_scaled(&mut op, a[m * d + n], &term);
        }
    }
    op
}

pub fn clone_output(d: usize, op: &Mat, psi: &[C]) -> Vec<C> {
    matvec(op, &tensor(psi, &phi00(d)))
}

/// Reduced density matrix of register `keep` of a `d^3` vector.
pub fn reduce(d: usize, v: &[C], keep: usize) -> Mat {
    let mut rho = zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for a2 in 0..d {
                    for b2 in 0..d {
                        for c2 in 0..d {
                            let (i, j, same) = match keep {
                                0 => (a, a2, b == b2 && c == c2),
                                1 => (b, b2, a == a2 && c == c2),
                                _ => (c, c2, a == a2 && b == b2),
                            };
                            if same {
                                rho[i][j] += v[(a * d + b) * d + c] * v[(a2 * d + b2) * d + c2].conj();
                            }
                        }
                    }
                }
            }
        }
    }
    rho
}

pub fn expectation(rho: &Mat, psi: &[C]) -> f64 {
    inner(psi, &matvec(rho, psi)).re
}

/// Basis states used by the tests: computational first, then the
/// `U_{1,k}` eigenbases for `k = 0 .. d-1`.
pub fn basis_state(d: usize, basis: i64, i: usize) -> Vec<C> {
    let mut v = vec![C::new(0.0, 0.0); d];
    if basis < 0 {
        v[i] = C::new(1.0, 0.0);
        return v;
    }
    // Project |0> onto the i-th eigenspace of X Z^k with
    // P = (1/d) sum_t (U / lambda)^t.
    let u = pauli(d, 1, basis);
    let lambda = eigenvalues_of_shift(d, basis)[i];
    let mut acc = vec![C::new(0.0, 0.0); d];
    let mut cur = vec![C::new(0.0, 0.0); d];
    cur[0] = C::new(1.0, 0.0);
    for _ in 0..d {
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += c;
        }
        cur = matvec(&u, &cur).into_iter().map(|x| x / lambda).collect();
    }
    let n = inner(&acc, &acc).re.sqrt();
    acc.into_iter().map(|x| x / n).collect()
}

/// Eigenvalues of `X Z^k`: the `d` roots of `(X Z^k)^d = w^{k d(d-1)/2} I`.
fn eigenvalues_of_shift(d: usize, k: i64) -> Vec<C> {
    let total = omega(d, k * (d * (d - 1) / 2) as i64);
    let base = C::from_polar(1.0, total.arg() / d as f64);
    (0..d).map(|t| base * omega(d, t as i64)).collect()
}

/// Bob and Eve fidelities averaged over the `d` states of each of the
/// `g + 1` bases, straight from the dense output.
pub fn dense_fidelities(d: usize, g: usize, a: &[C]) -> (Vec<f64>, Vec<f64>) {
    let op = cloner_operator(d, a);
    let mut bob = Vec::new();
    let mut eve = Vec::new();
    for basis in std::iter::once(-1).chain(0..g as i64) {
        let (mut fb, mut fe) = (0.0, 0.0);
        for i in 0..d {
            let psi = basis_state(d, basis, i);
            let out = clone_output(d, &op, &psi);
            fb += expectation(&reduce(d, &out, 0), &psi);
            fe += expectation(&reduce(d, &out, 2), &psi);
        }
        bob.push(fb / d as f64);
        eve.push(fe / d as f64);
    }
    (bob, eve)
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Mutual information between Alice's symbol and the raw computational
/// outcomes of Eve's two registers.
pub fn dense_info_ae(d: usize, a: &[C]) -> f64 {
    let op = cloner_operator(d, a);
    let mut joint = vec![0.0; d * d];
    let mut h_cond = 0.0;
    for sym in 0..d {
        let out = clone_output(d, &op, &basis_state(d, -1, sym));
        let mut p = vec![0.0; d * d];
        for b in 0..d {
            for e in 0..d * d {
                p[e] += out[b * d * d + e].norm_sqr();
            }
        }
        h_cond += entropy(&p) / d as f64;
        for (j, x) in joint.iter_mut().zip(&p) {
            *j += x / d as f64;
        }
    }
    entropy(&joint) - h_cond
}

pub fn info_ab(d: usize, f: f64) -> f64 {
    let df = d as f64;
    let mut i = df.log2();
    if f > 0.0 {
        i += f * f.log2();
    }
    if f < 1.0 {
        i += (1.0 - f) * ((1.0 - f) / (df - 1.0)).log2();
    }
    i
}

/// Entries of the balanced matrix, built directly from the case list.
pub fn balanced(d: usize, g: usize, f: f64, v: f64) -> Vec<C> {
    let df = d as f64;
    let x = ((f - v * v) / (df - 1.0)).max(0.0).sqrt();
    let y = if g < d {
        ((1.0 + g as f64 * v * v - (g as f64 + 1.0) * f) / ((df - 1.0) * (df - g as f64)))
            .max(0.0)
            .sqrt()
    } else {
        0.0
    };
    let mut a = vec![C::new(y, 0.0); d * d];
    a[0] = C::new(v, 0.0);
    for n in 1..d {
        a[n] = C::new(x, 0.0);
    }
    for m in 1..d {
        for k in 0..g {
            a[m * d + (k * m) % d] = C::new(x, 0.0);
        }
    }
    a
}

/// `F_E` of the balanced matrix from the explicit sum over entries.
pub fn balanced_eve_fidelity(d: usize, g: usize, f: f64, v: f64) -> f64 {
    let a = balanced(d, g, f, v);
    (0..d)
        .map(|m| (0..d).map(|n| a[m * d + n]).sum::<C>().norm_sqr())
        .sum::<f64>()
        / d as f64
}

/// Dense-scan maximum of `f` on `[lo, hi]` followed by local refinement.
pub fn scan_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    if hi - lo < 1e-15 {
        return (lo, f(lo));
    }
    let mut best = (lo, f(lo));
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let y = f(x);
        if y > best.1 {
            best = (x, y);
        }
    }
    let mut h = (hi - lo) / n as f64;
    let mut x = best.0;
    while h > 1e-14 {
        for cand in [x - h, x + h] {
            let c = cand.clamp(lo, hi);
            let y = f(c);
            if y > best.1 {
                best = (c, y);
            }
        }
        if best.0 == x {
            h *= 0.5;
        }
        x = best.0;
    }
    best
}

/// Published critical disturbances in percent, rows `d = 2, 3, 5, 7`.
pub const TABLE_DI: [(usize, &[f64]); 4] = [
    (2, &[14.64, 15.64]),
    (3, &[21.13, 22.47, 22.67]),
    (5, &[27.60, 28.91, 29.12, 29.20, 29.23]),
    (7, &[30.90, 32.10, 32.26, 32.32, 32.36, 32.38, 32.39]),
];

pub const TABLE_DF: [(usize, &[f64]); 4] = [
    (2, &[14.64, 15.64]),
    (3, &[21.13, 22.99, 22.67]),
    (5, &[27.64, 29.75, 29.83, 29.63, 29.23]),
    (7, &[31.10, 33.24, 33.16, 33.00, 32.83, 32.64, 32.39]),
];

pub fn published(table: &[(usize, &[f64]); 4], d: usize, g: usize) -> f64 {
    table.iter().find(|(dd, _)| *dd == d).expect("tabulated d").1[g - 1]
}

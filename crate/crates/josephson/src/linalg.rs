//! Dense complex linear algebra at desk scale.
//!
//! Everything here is sized for oracle duty: eigendecomposition by cyclic
//! Jacobi rotations (exact-ish, slow, dependency-free), pfaffians by
//! recursive expansion, and tiny real solves for least-squares fits. The
//! sparse fast paths live in [`crate::fock`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::Float;

use crate::Error;

/// Hermitian-enough threshold for refusing an eigendecomposition.
const HERMITICITY_TOL: f64 = 1e-9;

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (xi, yi) in x.iter().zip(y.iter_mut()) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: Complex64, x: &mut [Complex64]) {
    for xi in x {
        *xi *= alpha;
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.n, self.n)
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                let d = (self.at(i, j) - self.at(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn off_diagonal_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.at(i, j).norm_sqr();
                }
            }
        }
        s
    }

    /// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues ascending with matching eigenvector columns.
    /// Deterministic: fixed sweep order, no pivot search.
    pub fn eigh(&self) -> Result<Eigh, Error> {
        let defect = self.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let n = self.n;
        let mut a = self.clone();
        // Work on the exactly hermitian average so roundoff in the input
        // cannot leak into the rotations.
        for i in 0..n {
            for j in 0..n {
                let sym = 0.5 * (a.at(i, j) + a.at(j, i).conj());
                a.set(i, j, sym);
            }
        }
        let mut v = DenseMatrix::identity(n);
        let scale_sq: f64 = a.data.iter().map(|x| x.norm_sqr()).sum();
        let stop = (scale_sq * 1e-30).max(f64::MIN_POSITIVE);

        for _sweep in 0..60 {
            if a.off_diagonal_sq() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a.at(p, q);
                    let babs = b.norm();
                    if babs == 0.0 {
                        continue;
                    }
                    let app = a.at(p, p).re;
                    let aqq = a.at(q, q).re;
                    // Rotation angle with |tan| <= 1 zeroing the (p,q) entry.
                    let t = if app == aqq {
                        1.0
                    } else {
                        let tau = (app - aqq) / (2.0 * babs);
                        let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                        sgn / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let w = b / babs; // phase of the pivot entry

                    let new_pp = c * c * app + s * s * aqq + 2.0 * c * s * babs;
                    let new_qq = s * s * app + c * c * aqq - 2.0 * c * s * babs;
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = a.at(i, p);
                        let aiq = a.at(i, q);
                        let nip = aip * c + aiq * w.conj() * s;
                        let niq = -aip * w * s + aiq * c;
                        a.set(i, p, nip);
                        a.set(p, i, nip.conj());
                        a.set(i, q, niq);
                        a.set(q, i, niq.conj());
                    }
                    a.set(p, p, Complex64::new(new_pp, 0.0));
                    a.set(q, q, Complex64::new(new_qq, 0.0));
                    a.set(p, q, Complex64::new(0.0, 0.0));
                    a.set(q, p, Complex64::new(0.0, 0.0));
                    for i in 0..n {
                        let vip = v.at(i, p);
                        let viq = v.at(i, q);
                        v.set(i, p, vip * c + viq * w.conj() * s);
                        v.set(i, q, -vip * w * s + viq * c);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a.at(i, i)
                .re
                .partial_cmp(&a.at(j, j).re)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let values: Vec<f64> = order.iter().map(|&i| a.at(i, i).re).collect();
        let mut vectors = DenseMatrix::zeros(n);
        for (newcol, &oldcol) in order.iter().enumerate() {
            for i in 0..n {
                vectors.set(i, newcol, v.at(i, oldcol));
            }
        }
        Ok(Eigh { values, vectors })
    }
}

/// Result of [`DenseMatrix::eigh`]: `A = V diag(values) V^H`, columns of
/// `vectors` orthonormal, `values` ascending.
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Eigh {
    /// Apply `f` to the spectrum: computes `V diag(f(lambda)) V^H x`.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.values.len();
        debug_assert_eq!(x.len(), n);
        // y_k = <v_k, x>
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += self.vectors.at(i, k).conj() * x[i];
            }
            y[k] = acc * f(self.values[k]);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += self.vectors.at(i, k) * y[k];
            }
            out[i] = acc;
        }
        out
    }
}

/// Pfaffian of an antisymmetric matrix by recursive first-row expansion.
/// Intended for small matrices (Wick contractions cap at 12x12); odd
/// dimension returns 0. Antisymmetry is the caller's contract; only the
/// upper triangle is read.
pub fn pfaffian(a: &DenseMatrix) -> Complex64 {
    let n = a.n();
    if n % 2 != 0 {
        return Complex64::new(0.0, 0.0);
    }
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let active: Vec<usize> = (0..n).collect();
    pf_rec(a, &active)
}

fn pf_rec(a: &DenseMatrix, active: &[usize]) -> Complex64 {
    if active.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let i = active[0];
    let mut total = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    for pos in 1..active.len() {
        let j = active[pos];
        let aij = a.at(i, j);
        if aij.norm_sqr() != 0.0 {
            let rest: Vec<usize> = active[1..]
                .iter()
                .copied()
                .filter(|&k| k != j)
                .collect();
            total += aij * sign * pf_rec(a, &rest);
        }
        sign = -sign;
    }
    total
}

/// In-place Gaussian elimination with partial pivoting for a small real
/// system `a x = b`; `a` is n x n row-major. Returns the solution in `b`.
pub fn solve_real(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), Error> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-14 {
            return Err(Error::Validation(alloc::format!(
                "singular normal equations at column {}",
                col
            )));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

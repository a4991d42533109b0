//! Occupation-number representation of fermionic modes.
//!
//! A basis state is a bit pattern: bit `j` set means mode `j` occupied.
//! Creation into mode `j` carries the sign `(-1)^(occupied modes below j)`,
//! so the basis state for an occupied set `S` is the ordered product of
//! creators with ascending mode index applied to the vacuum, with a plus
//! sign. Every sign in the crate derives from this one convention.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{self, DenseMatrix};
use crate::{Error, Result};

/// Hard cap on the mode count: dimension 2^24 is the memory guard.
pub const MAX_MODES: usize = 24;

/// Norm slack accepted by expectation values before a state counts as
/// unnormalized.
const NORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n_modes: usize,
}

impl FockBasis {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(Error::Capacity {
                n_modes,
                max_modes: MAX_MODES,
            });
        }
        Ok(FockBasis { n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_modes
    }

    pub fn occupied(&self, state: usize, mode: usize) -> bool {
        state & (1usize << mode) != 0
    }

    /// `a_mode^dag` on a basis state: `None` if already occupied, else the
    /// target state and the fermionic sign.
    #[inline]
    pub fn raise(&self, state: usize, mode: usize) -> Option<(usize, f64)> {
        let bit = 1usize << mode;
        if state & bit != 0 {
            None
        } else {
            Some((state | bit, parity_below(state, mode)))
        }
    }

    /// `a_mode` on a basis state: `None` if empty, else target and sign.
    #[inline]
    pub fn lower(&self, state: usize, mode: usize) -> Option<(usize, f64)> {
        let bit = 1usize << mode;
        if state & bit == 0 {
            None
        } else {
            Some((state & !bit, parity_below(state, mode)))
        }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            Err(Error::IndexOutOfRange {
                index: mode,
                bound: self.n_modes,
            })
        } else {
            Ok(())
        }
    }
}

#[inline]
fn parity_below(state: usize, mode: usize) -> f64 {
    let below = state & ((1usize << mode) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One ladder factor in a normal-ordered-or-not product. Products are
/// written operator-order left to right; the rightmost factor acts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }
}

/// Normalized amplitude vector over a [`FockBasis`].
#[derive(Clone, Debug)]
pub struct StateVector {
    n_modes: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    pub fn vacuum(basis: FockBasis) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amp[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_modes: basis.n_modes,
            amp,
        }
    }

    pub fn basis_state(basis: FockBasis, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                bound: basis.dim(),
            });
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amp[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_modes: basis.n_modes,
            amp,
        })
    }

    /// Build from raw amplitudes, normalizing. A numerically zero vector is
    /// rejected.
    pub fn from_amplitudes(basis: FockBasis, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != basis.dim() {
            return Err(Error::Validation(alloc::format!(
                "amplitude vector length {} does not match dimension {}",
                amp.len(),
                basis.dim()
            )));
        }
        let norm = linalg::norm2(&amp);
        if norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        let mut amp = amp;
        let inv = Complex64::new(1.0 / norm, 0.0);
        linalg::scale(inv, &mut amp);
        Ok(StateVector {
            n_modes: basis.n_modes,
            amp,
        })
    }

    pub fn basis(&self) -> FockBasis {
        FockBasis {
            n_modes: self.n_modes,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    pub fn norm(&self) -> f64 {
        linalg::norm2(&self.amp)
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_same_modes(self.n_modes, other.n_modes)?;
        Ok(linalg::inner(&self.amp, &other.amp))
    }

    /// Multiply each basis amplitude by a unit-modulus factor of the basis
    /// index (diagonal gauge action). Norm is untouched.
    pub fn phase_rotated(&self, phase: impl Fn(usize) -> Complex64) -> StateVector {
        let amp = self
            .amp
            .iter()
            .enumerate()
            .map(|(s, a)| a * phase(s))
            .collect();
        StateVector {
            n_modes: self.n_modes,
            amp,
        }
    }
}

fn check_same_modes(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::BasisMismatch {
            left_modes: left,
            right_modes: right,
        })
    } else {
        Ok(())
    }
}

/// Sparse row-major complex operator on the Fock space. Immutable after
/// construction; the hermitian flag is tracked, never trusted — see
/// [`SparseOperator::hermiticity_defect`].
#[derive(Clone, Debug)]
pub struct SparseOperator {
    n_modes: usize,
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    pub fn zero(basis: FockBasis) -> Self {
        SparseOperator {
            n_modes: basis.n_modes,
            dim: basis.dim(),
            row_ptr: vec![0; basis.dim() + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(basis: FockBasis) -> Self {
        let dim = basis.dim();
        SparseOperator {
            n_modes: basis.n_modes,
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![Complex64::new(1.0, 0.0); dim],
            hermitian: true,
        }
    }

    /// Assemble from (row, col, value) triplets; duplicates merge, exact
    /// zeros drop.
    pub fn from_triplets(basis: FockBasis, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        let dim = basis.dim();
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut it = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v.norm_sqr() != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator {
            n_modes: basis.n_modes,
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        }
    }

    /// Sum of ladder-operator products: `sum_i coeff_i * prod(ops_i)`.
    /// Built column by column over the whole basis.
    pub fn from_monomials(basis: FockBasis, terms: &[(Complex64, Vec<Ladder>)]) -> Result<Self> {
        for (_, ops) in terms {
            for op in ops {
                basis.check_mode(op.mode)?;
            }
        }
        let mut triplets = Vec::new();
        for source in 0..basis.dim() {
            for (coeff, ops) in terms {
                let mut state = source;
                let mut sign = 1.0f64;
                let mut dead = false;
                for op in ops.iter().rev() {
                    let step = if op.dagger {
                        basis.raise(state, op.mode)
                    } else {
                        basis.lower(state, op.mode)
                    };
                    match step {
                        Some((next, s)) => {
                            state = next;
                            sign *= s;
                        }
                        None => {
                            dead = true;
                            break;
                        }
                    }
                }
                if !dead {
                    triplets.push((state, source, coeff * sign));
                }
            }
        }
        Ok(Self::from_triplets(basis, triplets))
    }

    /// Single creation or annihilation operator.
    pub fn ladder(basis: FockBasis, mode: usize, dagger: bool) -> Result<Self> {
        basis.check_mode(mode)?;
        Ok(Self::from_monomials(
            basis,
            &[(Complex64::new(1.0, 0.0), vec![Ladder { mode, dagger }])],
        )
        .expect("mode already checked"))
    }

    /// Occupation-number operator for one mode (diagonal).
    pub fn number(basis: FockBasis, mode: usize) -> Result<Self> {
        basis.check_mode(mode)?;
        let mut triplets = Vec::with_capacity(basis.dim() / 2);
        for s in 0..basis.dim() {
            if basis.occupied(s, mode) {
                triplets.push((s, s, Complex64::new(1.0, 0.0)));
            }
        }
        let mut op = Self::from_triplets(basis, triplets);
        op.hermitian = true;
        Ok(op)
    }

    /// Diagonal operator from a real diagonal.
    pub fn diagonal_real(basis: FockBasis, diag: &[f64]) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::Validation(alloc::format!(
                "diagonal length {} does not match dimension {}",
                diag.len(),
                basis.dim()
            )));
        }
        let triplets = diag
            .iter()
            .enumerate()
            .map(|(s, &d)| (s, s, Complex64::new(d, 0.0)))
            .collect();
        let mut op = Self::from_triplets(basis, triplets);
        op.hermitian = true;
        Ok(op)
    }

    pub fn basis(&self) -> FockBasis {
        FockBasis {
            n_modes: self.n_modes,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_marked_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Verify hermiticity and set the flag, or report the defect.
    pub fn mark_hermitian(&mut self, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian { defect });
        }
        self.hermitian = true;
        Ok(())
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out.hermitian = self.hermitian && alpha.im == 0.0;
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((self.col_idx[k], r, self.values[k].conj()));
            }
        }
        let mut out = Self::from_triplets(self.basis(), triplets);
        out.hermitian = self.hermitian;
        out
    }

    pub fn add(&self, rhs: &SparseOperator) -> Result<Self> {
        self.add_scaled(rhs, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, rhs: &SparseOperator) -> Result<Self> {
        self.add_scaled(rhs, Complex64::new(-1.0, 0.0))
    }

    /// `self + alpha * rhs`, merged row-wise.
    pub fn add_scaled(&self, rhs: &SparseOperator, alpha: Complex64) -> Result<Self> {
        check_same_modes(self.n_modes, rhs.n_modes)?;
        let dim = self.dim;
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() + rhs.nnz());
        let mut values = Vec::with_capacity(self.nnz() + rhs.nnz());
        for r in 0..dim {
            let (mut i, endi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut j, endj) = (rhs.row_ptr[r], rhs.row_ptr[r + 1]);
            while i < endi || j < endj {
                let v;
                let c;
                if j >= endj || (i < endi && self.col_idx[i] < rhs.col_idx[j]) {
                    c = self.col_idx[i];
                    v = self.values[i];
                    i += 1;
                } else if i >= endi || rhs.col_idx[j] < self.col_idx[i] {
                    c = rhs.col_idx[j];
                    v = alpha * rhs.values[j];
                    j += 1;
                } else {
                    c = self.col_idx[i];
                    v = self.values[i] + alpha * rhs.values[j];
                    i += 1;
                    j += 1;
                }
                if v.norm_sqr() != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Ok(SparseOperator {
            n_modes: self.n_modes,
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian: self.hermitian && rhs.hermitian && alpha.im == 0.0,
        })
    }

    /// Sparse-sparse product with a dense per-row accumulator.
    pub fn mul(&self, rhs: &SparseOperator) -> Result<Self> {
        check_same_modes(self.n_modes, rhs.n_modes)?;
        let dim = self.dim;
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..dim {
            touched.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.col_idx[k];
                let av = self.values[k];
                for k2 in rhs.row_ptr[mid]..rhs.row_ptr[mid + 1] {
                    let c = rhs.col_idx[k2];
                    if acc[c].norm_sqr() == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    acc[c] += av * rhs.values[k2];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c];
                acc[c] = Complex64::new(0.0, 0.0);
                if v.norm_sqr() != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Ok(SparseOperator {
            n_modes: self.n_modes,
            dim,
            row_ptr,
            col_idx,
            values,
            hermitian: false,
        })
    }

    pub fn commutator(&self, rhs: &SparseOperator) -> Result<Self> {
        let ab = self.mul(rhs)?;
        let ba = rhs.mul(self)?;
        ab.sub(&ba)
    }

    pub fn anticommutator(&self, rhs: &SparseOperator) -> Result<Self> {
        let ab = self.mul(rhs)?;
        let ba = rhs.mul(self)?;
        ab.add(&ba)
    }

    /// `[self, diag]` for a real diagonal operator: entrywise
    /// `A_rc (d_c - d_r)`. Same result as the generic commutator, one pass.
    pub fn commutator_with_real_diagonal(&self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::Validation(alloc::format!(
                "diagonal length {} does not match dimension {}",
                diag.len(),
                self.dim
            )));
        }
        let mut out = self.clone();
        out.hermitian = false;
        let mut write = 0usize;
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let v = self.values[k] * (diag[c] - diag[r]);
                if v.norm_sqr() != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                    write += 1;
                }
            }
            row_ptr[r + 1] = write;
        }
        out.row_ptr = row_ptr;
        out.col_idx = col_idx;
        out.values = values;
        Ok(out)
    }

    /// `D^H A D` for a diagonal unitary given by its diagonal entries.
    pub fn conjugate_by_diagonal(&self, diag: &[Complex64]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::Validation(alloc::format!(
                "diagonal length {} does not match dimension {}",
                diag.len(),
                self.dim
            )));
        }
        let mut out = self.clone();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                out.values[k] = diag[r].conj() * self.values[k] * diag[c];
            }
        }
        out.hermitian = false;
        Ok(out)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        match self.add_scaled(&self.adjoint(), Complex64::new(-1.0, 0.0)) {
            Ok(diff) => diff.max_abs(),
            Err(_) => unreachable!("same basis by construction"),
        }
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `<v|A|v>`; the state must be normalized.
    pub fn expectation(&self, v: &StateVector) -> Result<Complex64> {
        check_same_modes(self.n_modes, v.n_modes)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let av = self.apply(&v.amp);
        Ok(linalg::inner(&v.amp, &av))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m.set(r, self.col_idx[k], self.values[k]);
            }
        }
        m
    }

    /// Row iteration for structure inspection: (row, col, value) triples.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((r, self.col_idx[k], self.values[k]));
            }
        }
        out
    }
}

/// Apply a ladder product to raw amplitudes; the rightmost factor acts
/// first. The result is generally unnormalized.
pub fn apply_monomial(basis: FockBasis, ops: &[Ladder], amp: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(amp.len(), basis.dim());
    let mut cur = amp.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for op in ops.iter().rev() {
        for slot in next.iter_mut() {
            *slot = Complex64::new(0.0, 0.0);
        }
        for s in 0..basis.dim() {
            let a = cur[s];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let step = if op.dagger {
                basis.raise(s, op.mode)
            } else {
                basis.lower(s, op.mode)
            };
            if let Some((target, sign)) = step {
                next[target] += a * sign;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `<v| prod(ops) |v>` without materializing an operator matrix.
pub fn monomial_expectation(basis: FockBasis, ops: &[Ladder], v: &StateVector) -> Result<Complex64> {
    check_same_modes(basis.n_modes, v.n_modes)?;
    for op in ops {
        basis.check_mode(op.mode)?;
    }
    let w = apply_monomial(basis, ops, v.amplitudes());
    Ok(linalg::inner(v.amplitudes(), &w))
}

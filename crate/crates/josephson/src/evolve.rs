//! Schrödinger propagation `i d|v>/dt = H(t)|v>`.
//!
//! The workhorse is an adaptive-step Lanczos propagator: each step applies
//! `exp(-i tau H(t_mid))` in a small Krylov subspace, with step doubling as
//! the error estimate (the midpoint freeze makes the scheme second order for
//! time-dependent drives and exact-to-Krylov-truncation for constant ones).
//! Accepted steps keep the norm at 1 to machine precision.
//!
//! For small dimensions a dense eigendecomposition propagator is available
//! as the oracle path; every dynamic result in the test suite is
//! cross-checked against it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::fock::{SparseOperator, StateVector};
use crate::linalg::{self, DenseMatrix, Eigh};
use crate::{Error, Result};

/// Krylov subspace size per step. Truncation error is still caught by step
/// doubling; this is a cost knob, not a correctness one.
const KRYLOV_DIM: usize = 16;

/// Hermiticity slack accepted for a generator.
const GENERATOR_HERMITICITY_TOL: f64 = 1e-10;

/// Largest dimension the dense oracle propagator will take on.
pub const DENSE_ORACLE_MAX_MODES: usize = 12;

/// Time-dependent generator: structurally a fixed set of sparse operators,
/// with scalar time dependence only.
pub trait Hamiltonian {
    fn n_modes(&self) -> usize;
    fn dim(&self) -> usize;
    /// `y = H(t) x`.
    fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64]);
    /// Worst hermiticity defect over the structural parts.
    fn hermiticity_defect(&self) -> f64;
}

impl Hamiltonian for SparseOperator {
    fn n_modes(&self) -> usize {
        SparseOperator::n_modes(self)
    }

    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }

    fn apply(&self, _t: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_into(x, y);
    }

    fn hermiticity_defect(&self) -> f64 {
        SparseOperator::hermiticity_defect(self)
    }
}

/// `H(t) = base + amplitude(t) * drive`.
pub struct DrivenOperator<'a, F: Fn(f64) -> f64> {
    pub base: &'a SparseOperator,
    pub drive: &'a SparseOperator,
    pub amplitude: F,
}

impl<'a, F: Fn(f64) -> f64> Hamiltonian for DrivenOperator<'a, F> {
    fn n_modes(&self) -> usize {
        self.base.n_modes()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64]) {
        self.base.apply_into(x, y);
        let amp = (self.amplitude)(t);
        if amp != 0.0 {
            let extra = self.drive.apply(x);
            linalg::axpy(Complex64::new(amp, 0.0), &extra, y);
        }
    }

    fn hermiticity_defect(&self) -> f64 {
        self.base
            .hermiticity_defect()
            .max(self.drive.hermiticity_defect())
    }
}

/// Propagate through `t_grid`, invoking `observe(index, t, state)` at every
/// grid point (including the first). Returns the final state. Streaming
/// variant of [`evolve`] for long runs where keeping the whole trajectory
/// would be wasteful.
pub fn evolve_observed<H: Hamiltonian>(
    v: &StateVector,
    h: &H,
    t_grid: &[f64],
    tol: f64,
    mut observe: impl FnMut(usize, f64, &StateVector) -> Result<()>,
) -> Result<StateVector> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Validation(alloc::format!(
            "integrator tolerance must be positive and finite, got {:e}",
            tol
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::Validation("empty time grid".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(alloc::format!(
                "time grid not strictly increasing at t = {}",
                w[1]
            )));
        }
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation("non-finite time grid entry".into()));
    }
    if v.n_modes() != h.n_modes() {
        return Err(Error::BasisMismatch {
            left_modes: v.n_modes(),
            right_modes: h.n_modes(),
        });
    }
    let defect = h.hermiticity_defect();
    if defect > GENERATOR_HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }

    let mut state = v.clone();
    observe(0, t_grid[0], &state)?;
    let mut t = t_grid[0];
    let mut step = t_grid[1] - t_grid[0];
    let mut lanczos = Lanczos::new(h.dim());

    for (idx, &t_target) in t_grid.iter().enumerate().skip(1) {
        loop {
            let remaining = t_target - t;
            if remaining <= 1e-14 * t_target.abs().max(1.0) {
                break;
            }
            let tau = step.min(remaining);
            // one full step vs two half steps
            let full = lanczos.step(h, t, tau, state.amplitudes());
            let half_mid = lanczos.step(h, t, 0.5 * tau, state.amplitudes());
            let half = lanczos.step(h, t + 0.5 * tau, 0.5 * tau, &half_mid);
            let mut err = 0.0f64;
            for (a, b) in full.iter().zip(&half) {
                err += (a - b).norm_sqr();
            }
            let err = err.sqrt();
            let budget = tol * tau;
            if err <= budget {
                let amps = state.amplitudes_mut();
                amps.copy_from_slice(&half);
                let norm = linalg::norm2(amps);
                if (norm - 1.0).abs() > 1e-8 {
                    return Err(Error::IntegrationFailure {
                        t,
                        step: tau,
                        error_estimate: (norm - 1.0).abs(),
                        tolerance: 1e-8,
                    });
                }
                linalg::scale(Complex64::new(1.0 / norm, 0.0), amps);
                t += tau;
                let grow = if err == 0.0 {
                    4.0
                } else {
                    (0.8 * (budget / err).powf(1.0 / 3.0)).clamp(0.3, 4.0)
                };
                step = tau * grow;
            } else {
                step = 0.5 * tau;
                if step < 1e-12 * t.abs().max(1.0) {
                    return Err(Error::IntegrationFailure {
                        t,
                        step,
                        error_estimate: err,
                        tolerance: budget,
                    });
                }
            }
        }
        t = t_target;
        observe(idx, t_target, &state)?;
    }
    Ok(state)
}

/// Propagate and collect the state at every grid point.
pub fn evolve<H: Hamiltonian>(
    v: &StateVector,
    h: &H,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(t_grid.len());
    evolve_observed(v, h, t_grid, tol, |_, _, state| {
        out.push(state.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Scratch space for Lanczos steps, reused across the whole run.
struct Lanczos {
    dim: usize,
    basis: Vec<Vec<Complex64>>,
}

impl Lanczos {
    fn new(dim: usize) -> Self {
        Lanczos {
            dim,
            basis: Vec::new(),
        }
    }

    /// `exp(-i tau H(t + tau/2)) x` for a normalized `x`.
    fn step<H: Hamiltonian>(&mut self, h: &H, t: f64, tau: f64, x: &[Complex64]) -> Vec<Complex64> {
        let m_max = KRYLOV_DIM.min(self.dim);
        let t_mid = t + 0.5 * tau;
        self.basis.clear();
        self.basis.push(x.to_vec());
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];

        for j in 0..m_max {
            h.apply(t_mid, &self.basis[j], &mut w);
            let alpha = linalg::inner(&self.basis[j], &w).re;
            alphas.push(alpha);
            linalg::axpy(Complex64::new(-alpha, 0.0), &self.basis[j].clone(), &mut w);
            if j > 0 {
                let beta_prev = betas[j - 1];
                linalg::axpy(
                    Complex64::new(-beta_prev, 0.0),
                    &self.basis[j - 1].clone(),
                    &mut w,
                );
            }
            // full reorthogonalization; m is small, exactness is cheap
            for prev in &self.basis {
                let overlap = linalg::inner(prev, &w);
                if overlap.norm_sqr() != 0.0 {
                    linalg::axpy(-overlap, prev, &mut w);
                }
            }
            let beta = linalg::norm2(&w);
            let scale_est = alphas.iter().fold(1.0f64, |m, a| m.max(a.abs()));
            if j + 1 == m_max || beta <= 1e-13 * scale_est {
                break;
            }
            betas.push(beta);
            let mut next = w.clone();
            linalg::scale(Complex64::new(1.0 / beta, 0.0), &mut next);
            self.basis.push(next);
        }

        let m = alphas.len();
        let mut tmat = DenseMatrix::zeros(m);
        for j in 0..m {
            tmat.set(j, j, Complex64::new(alphas[j], 0.0));
            if j + 1 < m {
                tmat.set(j, j + 1, Complex64::new(betas[j], 0.0));
                tmat.set(j + 1, j, Complex64::new(betas[j], 0.0));
            }
        }
        let eig = tmat.eigh().expect("tridiagonal projection is hermitian");
        let mut e1 = vec![Complex64::new(0.0, 0.0); m];
        e1[0] = Complex64::new(1.0, 0.0);
        let y = eig.apply_function(
            |lambda| (Complex64::new(0.0, -1.0) * lambda * tau).exp(),
            &e1,
        );
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (coeff, vecj) in y.iter().zip(&self.basis) {
            linalg::axpy(*coeff, vecj, &mut out);
        }
        out
    }
}

/// Dense exact propagator for small systems; the oracle path for the Krylov
/// integrator.
pub struct DensePropagator {
    n_modes: usize,
    eig: Eigh,
}

impl DensePropagator {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        if h.n_modes() > DENSE_ORACLE_MAX_MODES {
            return Err(Error::Capacity {
                n_modes: h.n_modes(),
                max_modes: DENSE_ORACLE_MAX_MODES,
            });
        }
        let defect = h.hermiticity_defect();
        if defect > GENERATOR_HERMITICITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let eig = h.to_dense().eigh()?;
        Ok(DensePropagator {
            n_modes: h.n_modes(),
            eig,
        })
    }

    /// `exp(-i H dt) |v>`.
    pub fn advance(&self, v: &StateVector, dt: f64) -> Result<StateVector> {
        if v.n_modes() != self.n_modes {
            return Err(Error::BasisMismatch {
                left_modes: v.n_modes(),
                right_modes: self.n_modes,
            });
        }
        let amps = self.eig.apply_function(
            |lambda| (Complex64::new(0.0, -1.0) * lambda * dt).exp(),
            v.amplitudes(),
        );
        StateVector::from_amplitudes(v.basis(), amps)
    }

    pub fn trajectory(&self, v: &StateVector, t_grid: &[f64]) -> Result<Vec<StateVector>> {
        if t_grid.is_empty() {
            return Err(Error::Validation("empty time grid".into()));
        }
        for w in t_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Validation(alloc::format!(
                    "time grid not strictly increasing at t = {}",
                    w[1]
                )));
            }
        }
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            out.push(self.advance(v, t - t_grid[0])?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockBasis, Ladder};
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian_op(basis: FockBasis, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = basis.n_modes();
        let mut terms: Vec<(Complex64, Vec<Ladder>)> = Vec::new();
        for i in 0..n {
            terms.push((
                c(rng.gen_range(-1.0..1.0), 0.0),
                vec![Ladder::create(i), Ladder::annihilate(i)],
            ));
            for j in (i + 1)..n {
                let amp = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                terms.push((amp, vec![Ladder::create(i), Ladder::annihilate(j)]));
                terms.push((amp.conj(), vec![Ladder::create(j), Ladder::annihilate(i)]));
            }
        }
        let mut h = SparseOperator::from_monomials(basis, &terms).unwrap();
        h.mark_hermitian(1e-12).unwrap();
        h
    }

    fn random_state(basis: FockBasis, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp: Vec<Complex64> = (0..basis.dim())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::from_amplitudes(basis, amp).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_constant() {
        let basis = FockBasis::new(3).unwrap();
        let h = SparseOperator::zero(basis);
        let v = random_state(basis, 5);
        let traj = evolve(&v, &h, &[0.0, 0.4, 1.7, 3.0], 1e-10).unwrap();
        for state in &traj {
            let overlap = state.inner(&v).unwrap();
            assert!((overlap - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_phase_closed_form() {
        // H = omega n0 on |1>: amplitude e^{-i omega t}; omega=1, t=pi -> -1
        let basis = FockBasis::new(1).unwrap();
        let h = SparseOperator::number(basis, 0).unwrap();
        let v = StateVector::basis_state(basis, 1).unwrap();
        let traj = evolve(&v, &h, &[0.0, PI], 1e-10).unwrap();
        let amp = traj[1].amplitudes()[1];
        assert!((amp - c(-1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn norm_and_energy_conserved() {
        let basis = FockBasis::new(4).unwrap();
        let h = random_hermitian_op(basis, 11);
        let v = random_state(basis, 12);
        let e0 = h.expectation(&v).unwrap().re;
        let tol = 1e-9;
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let traj = evolve(&v, &h, &grid, tol).unwrap();
        for state in &traj {
            assert!((state.norm() - 1.0).abs() < 1e-10);
            let e = h.expectation(state).unwrap().re;
            assert!((e - e0).abs() < tol * grid.last().unwrap() * 10.0);
        }
    }

    #[test]
    fn reverse_evolution_returns_to_start() {
        let basis = FockBasis::new(3).unwrap();
        let h = random_hermitian_op(basis, 3);
        let hneg = h.scale(c(-1.0, 0.0));
        let v = random_state(basis, 4);
        let tol = 1e-9;
        let fwd = evolve(&v, &h, &[0.0, 2.5], tol).unwrap();
        let back = evolve(&fwd[1], &hneg, &[0.0, 2.5], tol).unwrap();
        let overlap = back[1].inner(&v).unwrap();
        assert!((overlap - c(1.0, 0.0)).norm() < 10.0 * tol);
    }

    #[test]
    fn krylov_matches_dense_oracle() {
        let basis = FockBasis::new(5).unwrap();
        let h = random_hermitian_op(basis, 21);
        let v = random_state(basis, 22);
        let grid = [0.0, 0.7, 1.9, 4.0];
        let tol = 1e-10;
        let krylov = evolve(&v, &h, &grid, tol).unwrap();
        let oracle = DensePropagator::new(&h).unwrap().trajectory(&v, &grid).unwrap();
        for (a, b) in krylov.iter().zip(&oracle) {
            let mut worst = 0.0f64;
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                worst = worst.max((x - y).norm());
            }
            assert!(worst < 1e-8, "trajectory mismatch {}", worst);
        }
    }

    #[test]
    fn non_hermitian_generator_rejected() {
        let basis = FockBasis::new(2).unwrap();
        let bad = SparseOperator::ladder(basis, 0, true).unwrap();
        let v = StateVector::vacuum(basis);
        assert!(matches!(
            evolve(&v, &bad, &[0.0, 1.0], 1e-8),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn impossible_tolerance_reports_step_underflow() {
        let basis = FockBasis::new(3).unwrap();
        let h = random_hermitian_op(basis, 33);
        let v = random_state(basis, 34);
        match evolve(&v, &h, &[0.0, 1.0], 1e-300) {
            Err(Error::IntegrationFailure { step, .. }) => assert!(step < 1e-11),
            other => panic!("expected integration failure, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn grid_must_increase() {
        let basis = FockBasis::new(2).unwrap();
        let h = SparseOperator::zero(basis);
        let v = StateVector::vacuum(basis);
        assert!(evolve(&v, &h, &[0.0, 0.0], 1e-8).is_err());
        assert!(evolve(&v, &h, &[1.0, 0.5], 1e-8).is_err());
        assert!(evolve(&v, &h, &[], 1e-8).is_err());
    }

    #[test]
    fn driven_phase_accumulates_integral_of_amplitude() {
        // H(t) = t * n0 on |1>: exact amplitude e^{-i t^2/2}
        let basis = FockBasis::new(1).unwrap();
        let zero = SparseOperator::zero(basis);
        let n0 = SparseOperator::number(basis, 0).unwrap();
        let h = DrivenOperator {
            base: &zero,
            drive: &n0,
            amplitude: |t: f64| t,
        };
        let v = StateVector::basis_state(basis, 1).unwrap();
        let t_end = 2.0f64;
        let traj = evolve(&v, &h, &[0.0, t_end], 1e-9).unwrap();
        let want = (c(0.0, -1.0) * (t_end * t_end / 2.0)).exp();
        let got = traj[1].amplitudes()[1];
        assert!((got - want).norm() < 1e-7, "driven phase error {}", (got - want).norm());
    }

    #[test]
    fn dense_propagator_respects_mode_cap() {
        // capacity guard is on the mode count, not the build cost
        let basis = FockBasis::new(13);
        // 13 modes is above the oracle cap but below the basis cap
        let basis = basis.unwrap();
        let h = SparseOperator::zero(basis);
        assert!(matches!(
            DensePropagator::new(&h),
            Err(Error::Capacity { .. })
        ));
    }
}

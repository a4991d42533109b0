//! Mean-field pairing state per region and its quasi-free expectation
//! engine.
//!
//! Each region is solved on its own chain: the hopping matrix is
//! diagonalized into real orthogonal orbitals with energies `eps_k`, and the
//! gap `Delta` solves the self-consistency condition
//!
//! ```text
//! Delta = (g / M) sum_k Delta / (2 E_k),   E_k = sqrt((eps_k - mu)^2 + Delta^2)
//! ```
//!
//! for an all-to-all separable pairing kernel over the `M` sites of the
//! region. Coherence factors are `u_k^2 = (1 + xi_k/E_k)/2`,
//! `v_k^2 = (1 - xi_k/E_k)/2` with `xi_k = eps_k - mu`; the pairing phase
//! `theta` multiplies every anomalous amplitude by `e^{i theta}`.
//!
//! The state itself is carried as one-body covariance data: the normal part
//! `G_ab = <a^dag_a a_b>` and the anomalous part `F_ab = <a_a a_b>`
//! (antisymmetric). All higher moments come from Wick contraction, evaluated
//! as a pfaffian. This representation has no Fock-space dimension attached,
//! so it scales to region sizes far beyond exact diagonalization; for small
//! systems [`embed_product_state`] realizes the same state as an explicit
//! vector so the two expectation engines can be compared on identical
//! operators.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::fock::{apply_monomial, FockBasis, Ladder, StateVector};
use crate::junction::{bonds, Boundary, JunctionSpec, Region, Spin};
use crate::linalg::{self, DenseMatrix};
use crate::{Error, Result};

/// Longest monomial the pfaffian contraction accepts.
pub const MAX_WICK_LEN: usize = 12;

/// Bisection depth for the gap equation; the bracket shrinks by 2^-ITERS,
/// far below f64 resolution.
const GAP_BISECTION_ITERS: usize = 160;

#[derive(Clone, Debug)]
pub struct BcsSolution {
    /// Gap magnitude; zero in the normal phase.
    pub delta: f64,
    /// Pairing phase in radians.
    pub theta: f64,
    pub mu: f64,
    pub t_hop: f64,
    /// Coupling the gap was solved at.
    pub g: f64,
    pub m_sites: usize,
    pub boundary: Boundary,
    /// Orbital energies of the hopping matrix, ascending.
    pub eps: Vec<f64>,
    /// `u_k >= 0` coherence factors.
    pub u: Vec<f64>,
    /// `v_k >= 0` coherence factors.
    pub v: Vec<f64>,
    /// Real orthogonal orbitals, row-major `orbitals[x * m_sites + k]`.
    pub orbitals: Vec<f64>,
    /// Self-consistency residual `|Delta - (g/M) sum Delta/(2 E_k)|`.
    pub residual: f64,
}

impl BcsSolution {
    pub fn with_phase(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.eps[k] - self.mu
    }

    pub fn quasiparticle_energy(&self, k: usize) -> f64 {
        (self.xi(k).powi(2) + self.delta * self.delta).sqrt()
    }

    /// `<P> / e^{i theta} = sum_k u_k v_k`; the extensive pair amplitude.
    pub fn pair_sum(&self) -> f64 {
        self.u.iter().zip(&self.v).map(|(u, v)| u * v).sum()
    }

    /// Volume-averaged on-site pair amplitude `Psi`, without the phase.
    pub fn mean_pair_amplitude(&self) -> f64 {
        self.pair_sum() / self.m_sites as f64
    }

    fn orbital(&self, x: usize, k: usize) -> f64 {
        self.orbitals[x * self.m_sites + k]
    }
}

/// Eigensystem of the single-region hopping matrix.
fn kinetic_orbitals(
    m_sites: usize,
    t_hop: f64,
    boundary: Boundary,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut h = DenseMatrix::zeros(m_sites);
    for (x, y) in bonds(m_sites, boundary) {
        h.add_at(x, y, Complex64::new(-t_hop, 0.0));
        h.add_at(y, x, Complex64::new(-t_hop, 0.0));
    }
    let eig = h.eigh()?;
    let mut orbitals = vec![0.0; m_sites * m_sites];
    for x in 0..m_sites {
        for k in 0..m_sites {
            let z = eig.vectors.at(x, k);
            // real symmetric input keeps the Jacobi rotations real
            debug_assert!(z.im.abs() < 1e-12);
            orbitals[x * m_sites + k] = z.re;
        }
    }
    Ok((eig.values, orbitals))
}

fn gap_kernel_sum(eps: &[f64], mu: f64, g: f64, m: usize, delta: f64) -> f64 {
    let s: f64 = eps
        .iter()
        .map(|&e| {
            let xi = e - mu;
            1.0 / (2.0 * (xi * xi + delta * delta).sqrt())
        })
        .sum();
    g / m as f64 * s
}

/// Solve the gap equation on one region.
///
/// Returns the `Delta >= 0` branch the bisection lands on: the nontrivial
/// root when the kernel sum exceeds 1 at `Delta = tol`, otherwise exactly
/// zero. `tol` bounds the accepted self-consistency residual.
pub fn solve_gap(
    m_sites: usize,
    t_hop: f64,
    mu: f64,
    g: f64,
    boundary: Boundary,
    tol: f64,
) -> Result<BcsSolution> {
    if m_sites < 1 {
        return Err(Error::Validation(alloc::format!(
            "region must have at least one site, got {}",
            m_sites
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Validation(alloc::format!(
            "gap tolerance must be positive and finite, got {}",
            tol
        )));
    }
    if !(g >= 0.0) || !g.is_finite() || !t_hop.is_finite() || !mu.is_finite() {
        return Err(Error::Validation(alloc::format!(
            "couplings must be finite with g >= 0 (t_hop={}, mu={}, g={})",
            t_hop,
            mu,
            g
        )));
    }
    let (eps, orbitals) = kinetic_orbitals(m_sites, t_hop, boundary)?;

    let delta;
    let residual;
    if g == 0.0 || gap_kernel_sum(&eps, mu, g, m_sites, tol) <= 1.0 {
        // kernel too weak even at vanishing gap: normal phase, and
        // Delta = 0 satisfies the equation identically
        delta = 0.0;
        residual = 0.0;
    } else {
        // f(d) = kernel(d) - 1 is strictly decreasing in d, positive at
        // d = tol, and f(g) <= -1/2 since E_k >= g there
        let mut lo = tol;
        let mut hi = g;
        let f_lo = gap_kernel_sum(&eps, mu, g, m_sites, lo) - 1.0;
        let f_hi = gap_kernel_sum(&eps, mu, g, m_sites, hi) - 1.0;
        if !(f_hi < 0.0) {
            return Err(Error::SolverFailure {
                lo,
                hi,
                f_lo,
                f_hi,
                iterations: 0,
            });
        }
        for _ in 0..GAP_BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if gap_kernel_sum(&eps, mu, g, m_sites, mid) - 1.0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let d = 0.5 * (lo + hi);
        let r = (d - d * gap_kernel_sum(&eps, mu, g, m_sites, d)).abs();
        if r > tol {
            return Err(Error::SolverFailure {
                lo,
                hi,
                f_lo,
                f_hi,
                iterations: GAP_BISECTION_ITERS,
            });
        }
        delta = d;
        residual = r;
    }

    let mut u = Vec::with_capacity(m_sites);
    let mut v = Vec::with_capacity(m_sites);
    for &e in &eps {
        let xi = e - mu;
        let energy = (xi * xi + delta * delta).sqrt();
        if energy == 0.0 {
            // only reachable at delta = 0 on a zero mode; empty by convention
            u.push(1.0);
            v.push(0.0);
        } else {
            u.push(((1.0 + xi / energy) / 2.0).sqrt());
            v.push(((1.0 - xi / energy) / 2.0).sqrt());
        }
    }

    Ok(BcsSolution {
        delta,
        theta: 0.0,
        mu,
        t_hop,
        g,
        m_sites,
        boundary,
        eps,
        u,
        v,
        orbitals,
        residual,
    })
}

/// Invert the gap equation: the coupling whose self-consistent gap is
/// `target_delta` on the given region.
pub fn coupling_for_gap(
    m_sites: usize,
    t_hop: f64,
    mu: f64,
    boundary: Boundary,
    target_delta: f64,
) -> Result<f64> {
    if !(target_delta > 0.0) || !target_delta.is_finite() {
        return Err(Error::Validation(alloc::format!(
            "target gap must be positive and finite, got {}",
            target_delta
        )));
    }
    let (eps, _) = kinetic_orbitals(m_sites, t_hop, boundary)?;
    let s: f64 = eps
        .iter()
        .map(|&e| {
            let xi = e - mu;
            1.0 / (2.0 * (xi * xi + target_delta * target_delta).sqrt())
        })
        .sum();
    Ok(m_sites as f64 / s)
}

/// One-body covariance data of a quasi-free state over `n_modes` fermion
/// modes: `g[a][b] = <a^dag_a a_b>`, `f[a][b] = <a_a a_b>`.
#[derive(Clone, Debug)]
pub struct QuasiFreeState {
    g: DenseMatrix,
    f: DenseMatrix,
}

impl QuasiFreeState {
    pub fn n_modes(&self) -> usize {
        self.g.n()
    }

    pub fn normal(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn anomalous(&self) -> &DenseMatrix {
        &self.f
    }

    /// Contraction of an ordered operator pair.
    fn contract(&self, left: Ladder, right: Ladder) -> Complex64 {
        match (left.dagger, right.dagger) {
            (false, false) => self.f.at(left.mode, right.mode),
            (true, true) => self.f.at(right.mode, left.mode).conj(),
            (true, false) => self.g.at(left.mode, right.mode),
            (false, true) => {
                let delta = if left.mode == right.mode {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                delta - self.g.at(right.mode, left.mode)
            }
        }
    }
}

fn check_geometry(spec: &JunctionSpec, sol1: &BcsSolution, sol2: &BcsSolution) -> Result<()> {
    spec.validate()?;
    for (name, sol, l) in [("region 1", sol1, spec.l1), ("region 2", sol2, spec.l2)] {
        if sol.m_sites != l {
            return Err(Error::Validation(alloc::format!(
                "{} solution has {} sites but the junction needs {}",
                name,
                sol.m_sites,
                l
            )));
        }
        if sol.boundary != spec.boundary {
            return Err(Error::Validation(alloc::format!(
                "{} solution was solved with a different boundary",
                name
            )));
        }
    }
    Ok(())
}

/// Write one region's covariance blocks using `mode_of(site, spin)`.
fn fill_region(
    g: &mut DenseMatrix,
    f: &mut DenseMatrix,
    sol: &BcsSolution,
    mode_of: impl Fn(usize, Spin) -> usize,
) {
    let m = sol.m_sites;
    let phase = Complex64::from_polar(1.0, sol.theta);
    for x in 0..m {
        for y in 0..m {
            let mut gxy = 0.0;
            let mut phixy = 0.0;
            for k in 0..m {
                let oo = sol.orbital(x, k) * sol.orbital(y, k);
                gxy += oo * sol.v[k] * sol.v[k];
                phixy += oo * sol.u[k] * sol.v[k];
            }
            for spin in [Spin::Up, Spin::Down] {
                g.set(mode_of(x, spin), mode_of(y, spin), Complex64::new(gxy, 0.0));
            }
            let amp = phase * phixy;
            f.set(mode_of(x, Spin::Down), mode_of(y, Spin::Up), amp);
            f.set(mode_of(x, Spin::Up), mode_of(y, Spin::Down), -amp);
        }
    }
}

/// Product covariance of two region solutions over the junction mode layout.
/// No Fock space is built, so this works at any region size.
pub fn covariance(
    spec: &JunctionSpec,
    sol1: &BcsSolution,
    sol2: &BcsSolution,
) -> Result<QuasiFreeState> {
    check_geometry(spec, sol1, sol2)?;
    let n = spec.n_modes();
    let mut g = DenseMatrix::zeros(n);
    let mut f = DenseMatrix::zeros(n);
    fill_region(&mut g, &mut f, sol1, |x, s| spec.mode(Region::One, x, s));
    fill_region(&mut g, &mut f, sol2, |x, s| spec.mode(Region::Two, x, s));
    Ok(QuasiFreeState { g, f })
}

/// Covariance of a single region alone, modes ordered `2 x + spin`.
pub fn single_region_covariance(sol: &BcsSolution) -> QuasiFreeState {
    let n = 2 * sol.m_sites;
    let mut g = DenseMatrix::zeros(n);
    let mut f = DenseMatrix::zeros(n);
    fill_region(&mut g, &mut f, sol, |x, s| 2 * x + s.index());
    QuasiFreeState { g, f }
}

/// Expectation of a ladder monomial in a quasi-free state, by pfaffian
/// contraction. Odd monomials vanish; the empty monomial is 1.
pub fn wick_expect(state: &QuasiFreeState, ops: &[Ladder]) -> Result<Complex64> {
    if ops.len() > MAX_WICK_LEN {
        return Err(Error::MonomialTooLong {
            len: ops.len(),
            max_len: MAX_WICK_LEN,
        });
    }
    for op in ops {
        if op.mode >= state.n_modes() {
            return Err(Error::IndexOutOfRange {
                index: op.mode,
                bound: state.n_modes(),
            });
        }
    }
    if ops.len() % 2 != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = ops.len();
    let mut a = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = state.contract(ops[i], ops[j]);
            a.set(i, j, c);
            a.set(j, i, -c);
        }
    }
    Ok(linalg::pfaffian(&a))
}

/// Expectation of a sum of coefficient-weighted monomials.
pub fn meanfield_expectation(
    state: &QuasiFreeState,
    terms: &[(Complex64, Vec<Ladder>)],
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (coeff, ops) in terms {
        acc += coeff * wick_expect(state, ops)?;
    }
    Ok(acc)
}

/// Realize the product of the two region states as an explicit Fock vector:
/// per orbital `k`, `|psi> <- (u_k + v_k e^{i theta} C^dag_{k up} C^dag_{k down}) |psi>`
/// with `C^dag_{k s} = sum_x O_{xk} a^dag_{(r,x,s)}`.
pub fn embed_product_state(
    spec: &JunctionSpec,
    basis: FockBasis,
    sol1: &BcsSolution,
    sol2: &BcsSolution,
) -> Result<StateVector> {
    check_geometry(spec, sol1, sol2)?;
    spec.check_basis(basis)?;
    let dim = basis.dim();
    let mut amp = vec![Complex64::new(0.0, 0.0); dim];
    amp[0] = Complex64::new(1.0, 0.0);
    for (region, sol) in [(Region::One, sol1), (Region::Two, sol2)] {
        let m = sol.m_sites;
        let phase = Complex64::from_polar(1.0, sol.theta);
        for k in 0..m {
            let mut next: Vec<Complex64> = amp
                .iter()
                .map(|z| z * Complex64::new(sol.u[k], 0.0))
                .collect();
            for x in 0..m {
                for y in 0..m {
                    let w = sol.orbital(x, k) * sol.orbital(y, k) * sol.v[k];
                    if w == 0.0 {
                        continue;
                    }
                    let mono = [
                        Ladder::create(spec.mode(region, x, Spin::Up)),
                        Ladder::create(spec.mode(region, y, Spin::Down)),
                    ];
                    let created = apply_monomial(basis, &mono, &amp);
                    linalg::axpy(phase * w, &created, &mut next);
                }
            }
            amp = next;
        }
    }
    StateVector::from_amplitudes(basis, amp)
}

/// Pair-correlation scan of one region: `C(d) = avg_x <b^dag_x b_{x+d}>`
/// with on-site pair `b_x = a_{x down} a_{x up}`. Periodic regions wrap;
/// open regions average over the sites where `x + d` exists.
#[derive(Clone, Debug)]
pub struct OdlroScan {
    pub separations: Vec<usize>,
    pub correlations: Vec<Complex64>,
    /// `|Psi|^2` with `Psi` the volume-averaged on-site pair amplitude;
    /// the factorization value `C(d)` approaches at large `d`.
    pub plateau: f64,
    /// `|C(d) - plateau|` per separation.
    pub deviations: Vec<f64>,
}

pub fn odlro_scan(sol: &BcsSolution, max_separation: usize) -> Result<OdlroScan> {
    let m = sol.m_sites;
    if max_separation >= m {
        return Err(Error::Validation(alloc::format!(
            "max separation {} does not fit a region of {} sites",
            max_separation,
            m
        )));
    }
    let state = single_region_covariance(sol);
    let mode = |x: usize, s: Spin| 2 * x + s.index();
    let psi = sol.mean_pair_amplitude();
    let plateau = psi * psi;
    let mut separations = Vec::new();
    let mut correlations = Vec::new();
    let mut deviations = Vec::new();
    for d in 0..=max_separation {
        let base_sites = if sol.boundary == Boundary::Periodic {
            m
        } else {
            m - d
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..base_sites {
            let y = (x + d) % m;
            let ops = [
                Ladder::create(mode(x, Spin::Up)),
                Ladder::create(mode(x, Spin::Down)),
                Ladder::annihilate(mode(y, Spin::Down)),
                Ladder::annihilate(mode(y, Spin::Up)),
            ];
            acc += wick_expect(&state, &ops)?;
        }
        let c = acc / base_sites as f64;
        separations.push(d);
        deviations.push((c - Complex64::new(plateau, 0.0)).norm());
        correlations.push(c);
    }
    Ok(OdlroScan {
        separations,
        correlations,
        plateau,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::monomial_expectation;
    use crate::junction::{charge_op, RegionSel};

    const TOL: f64 = 1e-12;

    fn frozen_two_site(g12: f64, theta1: f64, theta2: f64) -> (JunctionSpec, BcsSolution, BcsSolution) {
        let spec = JunctionSpec::two_site(g12);
        let sol1 = solve_gap(1, 0.0, 0.0, 1.0, spec.boundary, TOL)
            .unwrap()
            .with_phase(theta1);
        let sol2 = solve_gap(1, 0.0, 0.0, 1.0, spec.boundary, TOL)
            .unwrap()
            .with_phase(theta2);
        (spec, sol1, sol2)
    }

    #[test]
    fn zero_coupling_has_no_gap() {
        let sol = solve_gap(5, 1.0, 0.3, 0.0, Boundary::Periodic, TOL).unwrap();
        assert_eq!(sol.delta, 0.0);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn flat_band_gap_is_half_the_coupling() {
        // t = 0, mu = 0 gives xi_k = 0 for every orbital, so the gap
        // equation reads Delta = g/2 and u = v = 1/sqrt(2) at any size.
        for m in [1, 4, 7] {
            let sol = solve_gap(m, 0.0, 0.0, 1.0, Boundary::Open, TOL).unwrap();
            assert!((sol.delta - 0.5).abs() < 1e-12);
            assert!(sol.residual <= TOL);
            for k in 0..m {
                assert!((sol.u[k] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
                assert!((sol.v[k] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherence_factors_are_normalized() {
        // g large enough that the kernel sum exceeds 1 at this filling
        let sol = solve_gap(6, 1.0, 0.3, 3.0, Boundary::Periodic, TOL).unwrap();
        assert!(sol.delta > 0.0);
        for k in 0..6 {
            let s = sol.u[k] * sol.u[k] + sol.v[k] * sol.v[k];
            assert!((s - 1.0).abs() < 1e-12);
            assert!(sol.u[k] >= 0.0 && sol.v[k] >= 0.0);
        }
    }

    #[test]
    fn gap_grows_with_coupling() {
        let mut last = 0.0;
        for g in [0.8, 1.2, 2.0, 3.5] {
            let sol = solve_gap(8, 1.0, 0.0, g, Boundary::Periodic, TOL).unwrap();
            assert!(sol.delta > last, "delta {} at g {}", sol.delta, g);
            last = sol.delta;
        }
    }

    #[test]
    fn coupling_for_gap_round_trips() {
        let target = 1.0;
        let g = coupling_for_gap(16, 1.0, 0.0, Boundary::Periodic, target).unwrap();
        let sol = solve_gap(16, 1.0, 0.0, g, Boundary::Periodic, TOL).unwrap();
        assert!((sol.delta - target).abs() < 1e-9, "got {}", sol.delta);
    }

    #[test]
    fn orbitals_are_orthonormal() {
        let sol = solve_gap(9, 0.7, 0.1, 1.0, Boundary::Open, TOL).unwrap();
        for k in 0..9 {
            for l in 0..9 {
                let dot: f64 = (0..9).map(|x| sol.orbital(x, k) * sol.orbital(x, l)).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn covariance_frozen_two_site_entries() {
        let (spec, sol1, sol2) = frozen_two_site(0.1, core::f64::consts::FRAC_PI_2, 0.0);
        let state = covariance(&spec, &sol1, &sol2).unwrap();
        // mode 0 = (r1, up), mode 1 = (r1, down)
        let f = state.anomalous();
        let g = state.normal();
        assert!((f.at(1, 0) - Complex64::new(0.0, 0.5)).norm() < 1e-12);
        assert!((f.at(0, 1) - Complex64::new(0.0, -0.5)).norm() < 1e-12);
        assert!((f.at(3, 2) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((g.at(0, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        // no cross-region one-body coherence in a product state
        assert_eq!(f.at(1, 2).norm(), 0.0);
        assert_eq!(g.at(0, 2).norm(), 0.0);
    }

    #[test]
    fn anomalous_block_is_antisymmetric_and_normal_block_contractive() {
        let spec = JunctionSpec {
            l1: 3,
            l2: 2,
            t_hop: 1.0,
            mu: 0.2,
            ..JunctionSpec::two_site(0.1)
        };
        let sol1 = solve_gap(3, 1.0, 0.2, 2.0, spec.boundary, TOL)
            .unwrap()
            .with_phase(0.8);
        let sol2 = solve_gap(2, 1.0, 0.2, 2.2, spec.boundary, TOL)
            .unwrap()
            .with_phase(-0.4);
        let state = covariance(&spec, &sol1, &sol2).unwrap();
        let n = state.n_modes();
        let f = state.anomalous();
        let g = state.normal();
        for a in 0..n {
            for b in 0..n {
                assert!((f.at(a, b) + f.at(b, a)).norm() < 1e-13);
                assert!((g.at(a, b) - g.at(b, a).conj()).norm() < 1e-13);
            }
        }
        // occupations are probabilities
        let eig = g.eigh().unwrap();
        for v in eig.values {
            assert!(v >= -1e-12 && v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn wick_reproduces_onsite_pair_occupation() {
        // single flat-band site: occupations perfectly correlated,
        // <n_up n_down> = v^2
        let sol = solve_gap(1, 0.0, 0.0, 1.0, Boundary::Open, TOL).unwrap();
        let state = single_region_covariance(&sol);
        let ops = [
            Ladder::create(0),
            Ladder::annihilate(0),
            Ladder::create(1),
            Ladder::annihilate(1),
        ];
        let got = wick_expect(&state, &ops).unwrap();
        assert!((got - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn odd_monomials_vanish_and_long_ones_error() {
        let sol = solve_gap(2, 0.5, 0.0, 1.0, Boundary::Open, TOL).unwrap();
        let state = single_region_covariance(&sol);
        let odd = [Ladder::create(0), Ladder::annihilate(1), Ladder::create(2)];
        assert_eq!(wick_expect(&state, &odd).unwrap().norm(), 0.0);
        let long: Vec<Ladder> = (0..14)
            .map(|i| Ladder::create(i % 4))
            .collect();
        match wick_expect(&state, &long) {
            Err(Error::MonomialTooLong { len: 14, max_len: 12 }) => {}
            other => panic!("expected MonomialTooLong, got {:?}", other.map(|_| ())),
        }
        assert!((wick_expect(&state, &[]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn embedded_two_site_state_has_the_four_frozen_amplitudes() {
        let theta1 = 0.9;
        let theta2 = -0.4;
        let (spec, sol1, sol2) = frozen_two_site(0.1, theta1, theta2);
        let basis = spec.basis().unwrap();
        let psi = embed_product_state(&spec, basis, &sol1, &sol2).unwrap();
        let amp = psi.amplitudes();
        let half = 0.5;
        let expect = [
            (0usize, Complex64::new(half, 0.0)),
            (3, Complex64::from_polar(half, theta1)),
            (12, Complex64::from_polar(half, theta2)),
            (15, Complex64::from_polar(half, theta1 + theta2)),
        ];
        for (idx, want) in expect {
            assert!(
                (amp[idx] - want).norm() < 1e-12,
                "index {} got {} want {}",
                idx,
                amp[idx],
                want
            );
        }
        let named: f64 = expect.iter().map(|(i, _)| amp[*i].norm_sqr()).sum();
        assert!((named - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedded_charge_matches_occupation() {
        let (spec, sol1, sol2) = frozen_two_site(0.1, 0.0, 0.0);
        let basis = spec.basis().unwrap();
        let psi = embed_product_state(&spec, basis, &sol1, &sol2).unwrap();
        let q1 = charge_op(&spec, basis, RegionSel::One).unwrap();
        let got = q1.expectation(&psi).unwrap();
        // <n_up + n_down> = 2 v^2 = 1, charge = -|e|
        assert!((got - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn wick_agrees_with_exact_on_the_embedded_state() {
        let theta1 = 1.1;
        let theta2 = 0.3;
        let spec = JunctionSpec {
            l1: 2,
            l2: 2,
            t_hop: 0.6,
            mu: -0.1,
            ..JunctionSpec::two_site(0.25)
        };
        let sol1 = solve_gap(2, 0.6, -0.1, 1.4, spec.boundary, TOL)
            .unwrap()
            .with_phase(theta1);
        let sol2 = solve_gap(2, 0.6, -0.1, 1.8, spec.boundary, TOL)
            .unwrap()
            .with_phase(theta2);
        let basis = spec.basis().unwrap();
        let psi = embed_product_state(&spec, basis, &sol1, &sol2).unwrap();
        let state = covariance(&spec, &sol1, &sol2).unwrap();
        let monomials: Vec<Vec<Ladder>> = vec![
            vec![Ladder::create(0), Ladder::annihilate(0)],
            vec![Ladder::create(2), Ladder::annihilate(4)],
            vec![Ladder::annihilate(1), Ladder::annihilate(0)],
            vec![
                Ladder::create(0),
                Ladder::create(1),
                Ladder::annihilate(5),
                Ladder::annihilate(4),
            ],
            vec![
                Ladder::create(0),
                Ladder::create(3),
                Ladder::annihilate(3),
                Ladder::annihilate(0),
            ],
            vec![
                Ladder::create(0),
                Ladder::create(1),
                Ladder::create(4),
                Ladder::annihilate(4),
                Ladder::annihilate(1),
                Ladder::annihilate(0),
            ],
        ];
        for ops in monomials {
            let exact = monomial_expectation(basis, &ops, &psi).unwrap();
            let mf = wick_expect(&state, &ops).unwrap();
            assert!(
                (exact - mf).norm() < 1e-11,
                "ops {:?}: exact {} vs wick {}",
                ops,
                exact,
                mf
            );
        }
    }

    #[test]
    fn phase_only_enters_anomalous_amplitudes() {
        let sol = solve_gap(3, 0.8, 0.1, 1.5, Boundary::Open, TOL).unwrap();
        let rotated = sol.clone().with_phase(0.7);
        let plain = single_region_covariance(&sol);
        let turned = single_region_covariance(&rotated);
        let n = plain.n_modes();
        let twist = Complex64::from_polar(1.0, 0.7);
        for a in 0..n {
            for b in 0..n {
                assert!((plain.normal().at(a, b) - turned.normal().at(a, b)).norm() < 1e-14);
                assert!(
                    (plain.anomalous().at(a, b) * twist - turned.anomalous().at(a, b)).norm()
                        < 1e-14
                );
            }
        }
    }

    #[test]
    fn pair_scan_decays_to_the_amplitude_plateau() {
        let m = 12;
        let g = coupling_for_gap(m, 1.0, 0.0, Boundary::Periodic, 1.0).unwrap();
        let sol = solve_gap(m, 1.0, 0.0, g, Boundary::Periodic, TOL).unwrap();
        let scan = odlro_scan(&sol, m / 2).unwrap();
        // the scan must match the closed contraction C(d) = |Phi(0)|^2 + G(0,d)^2
        let state = single_region_covariance(&sol);
        for (i, &d) in scan.separations.iter().enumerate() {
            let mut expect = Complex64::new(0.0, 0.0);
            for x in 0..m {
                let y = (x + d) % m;
                let phi_x = state.anomalous().at(2 * x + 1, 2 * x);
                let phi_y = state.anomalous().at(2 * y + 1, 2 * y);
                let gxy = state.normal().at(2 * x, 2 * y);
                expect += phi_x.conj() * phi_y + gxy * gxy;
            }
            expect /= m as f64;
            assert!((scan.correlations[i] - expect).norm() < 1e-12);
        }
        // far separations sit near the plateau, and d = 0 sits well above
        assert!(scan.deviations[0] > 10.0 * scan.deviations[m / 2]);
    }
}

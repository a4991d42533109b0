//! Two-region lattice junction.
//!
//! Geometry: region 1 has sites `0..L1`, region 2 has sites `0..L2`, each a
//! chain with open or periodic ends. Modes are ordered region-major, then
//! site, then spin (up before down):
//!
//! ```text
//! mode(r, x, s) = offset(r) + 2 x + s,   offset(1) = 0, offset(2) = 2 L1
//! ```
//!
//! The Hamiltonian splits as `H = H1 + H2 + H12`:
//!
//! * `H_r = -t_hop sum_<xy>s (a^dag_xs a_ys + h.c.) - mu sum n
//!          - (2 g_rr / volume_norm) P_r^dag P_r`
//! * `H12 = -(2 g12 / volume_norm) (P1^dag P2 + P2^dag P1)` plus the
//!   optional single-particle bridge `-cross_hop sum_s (a^dag a + h.c.)`
//!   between the facing edge sites,
//!
//! with the pair annihilator `P_r = sum_{x in r} a_{x,down} a_{x,up}` and
//! `volume_norm = L1 + L2`. The factor 2 on the pairing couplings comes from
//! summing the spin-singlet quartic kernel over both spin orderings; all
//! closed-form amplitudes quoted in tests assume it.
//!
//! Charge carries the electron sign convention: `Q(region) = -|e| sum n`,
//! so `[Q, a^dag] = -|e| a^dag`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{FockBasis, Ladder, SparseOperator};
use crate::{Error, Result};

/// Hermiticity acceptance for constructed operators.
const BUILD_TOL: f64 = 1e-12;

/// Cap on the current-operator reduction residual before the model is
/// declared inconsistent.
const REDUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    One,
    Two,
}

/// Region selector for charge and number operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionSel {
    One,
    Two,
    Both,
}

#[derive(Clone, Debug)]
pub struct JunctionSpec {
    pub l1: usize,
    pub l2: usize,
    pub t_hop: f64,
    pub mu: f64,
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
    /// `|e| > 0`; the physical electron charge is `-|e|`.
    pub charge_unit: f64,
    pub boundary: Boundary,
    /// Single-particle hopping across the junction (default 0: ideal phase
    /// boundary). Nonzero only for the clustering null test.
    pub cross_hop: f64,
}

impl JunctionSpec {
    /// One site per region; the workhorse of every closed-form check.
    pub fn two_site(g12: f64) -> Self {
        JunctionSpec {
            l1: 1,
            l2: 1,
            t_hop: 0.0,
            mu: 0.0,
            g11: 1.0,
            g22: 1.0,
            g12,
            charge_unit: 1.0,
            boundary: Boundary::Periodic,
            cross_hop: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l1 < 1 || self.l2 < 1 {
            return Err(Error::Validation(alloc::format!(
                "region sizes must be at least 1 (got L1={}, L2={})",
                self.l1,
                self.l2
            )));
        }
        if !(self.charge_unit > 0.0) {
            return Err(Error::Validation(alloc::format!(
                "charge unit must be positive, got {}",
                self.charge_unit
            )));
        }
        if self.g11 < 0.0 || self.g22 < 0.0 {
            return Err(Error::Validation(alloc::format!(
                "intra-region couplings must be nonnegative (g11={}, g22={})",
                self.g11,
                self.g22
            )));
        }
        for (name, v) in [
            ("t_hop", self.t_hop),
            ("mu", self.mu),
            ("g11", self.g11),
            ("g22", self.g22),
            ("g12", self.g12),
            ("charge_unit", self.charge_unit),
            ("cross_hop", self.cross_hop),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(alloc::format!("{} is not finite", name)));
            }
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn volume_norm(&self) -> f64 {
        self.n_sites() as f64
    }

    pub fn sites(&self, region: Region) -> usize {
        match region {
            Region::One => self.l1,
            Region::Two => self.l2,
        }
    }

    pub fn intra_coupling(&self, region: Region) -> f64 {
        match region {
            Region::One => self.g11,
            Region::Two => self.g22,
        }
    }

    pub fn mode(&self, region: Region, site: usize, spin: Spin) -> usize {
        let offset = match region {
            Region::One => 0,
            Region::Two => 2 * self.l1,
        };
        offset + 2 * site + spin.index()
    }

    /// Bitmask over the modes selected by `sel`.
    pub fn mode_mask(&self, sel: RegionSel) -> usize {
        let all = (1usize << self.n_modes()) - 1;
        let r1 = (1usize << (2 * self.l1)) - 1;
        match sel {
            RegionSel::One => r1,
            RegionSel::Two => all & !r1,
            RegionSel::Both => all,
        }
    }

    pub fn basis(&self) -> Result<FockBasis> {
        self.validate()?;
        FockBasis::new(self.n_modes())
    }

    pub(crate) fn check_basis(&self, basis: FockBasis) -> Result<()> {
        self.validate()?;
        if basis.n_modes() != self.n_modes() {
            return Err(Error::BasisMismatch {
                left_modes: basis.n_modes(),
                right_modes: self.n_modes(),
            });
        }
        Ok(())
    }
}

/// Nearest-neighbour bonds of a chain of `l` sites. A two-site ring would
/// double its single bond, so the periodic wrap joins in only for `l > 2`.
pub(crate) fn bonds(l: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 0..l.saturating_sub(1) {
        out.push((x, x + 1));
    }
    if boundary == Boundary::Periodic && l > 2 {
        out.push((l - 1, 0));
    }
    out
}

/// `P_region = sum_{x in region} a_{x,down} a_{x,up}`.
pub fn pair_op(spec: &JunctionSpec, basis: FockBasis, region: Region) -> Result<SparseOperator> {
    spec.check_basis(basis)?;
    let mut terms = Vec::new();
    for x in 0..spec.sites(region) {
        terms.push((
            Complex64::new(1.0, 0.0),
            vec![
                Ladder::annihilate(spec.mode(region, x, Spin::Down)),
                Ladder::annihilate(spec.mode(region, x, Spin::Up)),
            ],
        ));
    }
    SparseOperator::from_monomials(basis, &terms)
}

/// Hopping and chemical-potential terms of one region.
fn single_particle_terms(
    spec: &JunctionSpec,
    region: Region,
) -> Vec<(Complex64, Vec<Ladder>)> {
    let mut terms = Vec::new();
    for (x, y) in bonds(spec.sites(region), spec.boundary) {
        for spin in [Spin::Up, Spin::Down] {
            let mx = spec.mode(region, x, spin);
            let my = spec.mode(region, y, spin);
            let amp = Complex64::new(-spec.t_hop, 0.0);
            terms.push((amp, vec![Ladder::create(mx), Ladder::annihilate(my)]));
            terms.push((amp, vec![Ladder::create(my), Ladder::annihilate(mx)]));
        }
    }
    if spec.mu != 0.0 {
        for x in 0..spec.sites(region) {
            for spin in [Spin::Up, Spin::Down] {
                let m = spec.mode(region, x, spin);
                terms.push((
                    Complex64::new(-spec.mu, 0.0),
                    vec![Ladder::create(m), Ladder::annihilate(m)],
                ));
            }
        }
    }
    terms
}

fn region_hamiltonian(
    spec: &JunctionSpec,
    basis: FockBasis,
    region: Region,
) -> Result<SparseOperator> {
    let sp = SparseOperator::from_monomials(basis, &single_particle_terms(spec, region))?;
    let g = spec.intra_coupling(region);
    if g == 0.0 {
        return Ok(sp);
    }
    let p = pair_op(spec, basis, region)?;
    let pairing = p
        .adjoint()
        .mul(&p)?
        .scale(Complex64::new(-2.0 * g / spec.volume_norm(), 0.0));
    sp.add(&pairing)
}

/// Monomials of the pair-transfer term with an explicitly complex coupling:
/// `-(2/volume_norm) (c P1^dag P2 + conj(c) P2^dag P1)`. The physical
/// Hamiltonian uses real `c = g12`; the complex form exists because gauge
/// conjugation rotates `c` in the plane. Basis-free, so the mean-field
/// engine can evaluate the same terms past the exact-diagonalization cap.
pub fn cross_pair_monomials(
    spec: &JunctionSpec,
    coupling: Complex64,
) -> Vec<(Complex64, Vec<Ladder>)> {
    let s = -2.0 / spec.volume_norm();
    let mut terms = Vec::new();
    for x in 0..spec.l1 {
        for y in 0..spec.l2 {
            terms.push((
                coupling * s,
                vec![
                    Ladder::create(spec.mode(Region::One, x, Spin::Up)),
                    Ladder::create(spec.mode(Region::One, x, Spin::Down)),
                    Ladder::annihilate(spec.mode(Region::Two, y, Spin::Down)),
                    Ladder::annihilate(spec.mode(Region::Two, y, Spin::Up)),
                ],
            ));
            terms.push((
                coupling.conj() * s,
                vec![
                    Ladder::create(spec.mode(Region::Two, y, Spin::Up)),
                    Ladder::create(spec.mode(Region::Two, y, Spin::Down)),
                    Ladder::annihilate(spec.mode(Region::One, x, Spin::Down)),
                    Ladder::annihilate(spec.mode(Region::One, x, Spin::Up)),
                ],
            ));
        }
    }
    terms
}

/// Single-particle bridge between the facing edge sites (region 1 site
/// `L1-1`, region 2 site `0`). Empty when `cross_hop` is zero.
pub fn bridge_monomials(spec: &JunctionSpec) -> Vec<(Complex64, Vec<Ladder>)> {
    let mut terms = Vec::new();
    if spec.cross_hop == 0.0 {
        return terms;
    }
    for spin in [Spin::Up, Spin::Down] {
        let m1 = spec.mode(Region::One, spec.l1 - 1, spin);
        let m2 = spec.mode(Region::Two, 0, spin);
        let amp = Complex64::new(-spec.cross_hop, 0.0);
        terms.push((amp, vec![Ladder::create(m1), Ladder::annihilate(m2)]));
        terms.push((amp, vec![Ladder::create(m2), Ladder::annihilate(m1)]));
    }
    terms
}

/// Monomials of the full junction term `H12` (pair transfer plus bridge).
pub fn junction_monomials(spec: &JunctionSpec) -> Vec<(Complex64, Vec<Ladder>)> {
    let mut terms = if spec.g12 != 0.0 {
        cross_pair_monomials(spec, Complex64::new(spec.g12, 0.0))
    } else {
        Vec::new()
    };
    terms.extend(bridge_monomials(spec));
    terms
}

/// Monomials of the tunneling current `[i H12, Q1]` in reduced form:
/// `-2i gamma |e| (P1^dag P2 - P2^dag P1)` with `gamma = 2 g12 /
/// volume_norm`, plus the bridge contribution `-i cross_hop |e|
/// sum_s (a^dag_1s a_2s - a^dag_2s a_1s)`.
pub fn current_monomials(spec: &JunctionSpec) -> Vec<(Complex64, Vec<Ladder>)> {
    let e = spec.charge_unit;
    let mut terms = Vec::new();
    if spec.g12 != 0.0 {
        let gamma = 2.0 * spec.g12 / spec.volume_norm();
        let amp = Complex64::new(0.0, -2.0 * gamma * e);
        for x in 0..spec.l1 {
            for y in 0..spec.l2 {
                terms.push((
                    amp,
                    vec![
                        Ladder::create(spec.mode(Region::One, x, Spin::Up)),
                        Ladder::create(spec.mode(Region::One, x, Spin::Down)),
                        Ladder::annihilate(spec.mode(Region::Two, y, Spin::Down)),
                        Ladder::annihilate(spec.mode(Region::Two, y, Spin::Up)),
                    ],
                ));
                terms.push((
                    -amp,
                    vec![
                        Ladder::create(spec.mode(Region::Two, y, Spin::Up)),
                        Ladder::create(spec.mode(Region::Two, y, Spin::Down)),
                        Ladder::annihilate(spec.mode(Region::One, x, Spin::Down)),
                        Ladder::annihilate(spec.mode(Region::One, x, Spin::Up)),
                    ],
                ));
            }
        }
    }
    if spec.cross_hop != 0.0 {
        let amp = Complex64::new(0.0, -spec.cross_hop * e);
        for spin in [Spin::Up, Spin::Down] {
            let m1 = spec.mode(Region::One, spec.l1 - 1, spin);
            let m2 = spec.mode(Region::Two, 0, spin);
            terms.push((amp, vec![Ladder::create(m1), Ladder::annihilate(m2)]));
            terms.push((-amp, vec![Ladder::create(m2), Ladder::annihilate(m1)]));
        }
    }
    terms
}

/// Pair-transfer term as an operator; see [`cross_pair_monomials`].
pub fn cross_pair_operator(
    spec: &JunctionSpec,
    basis: FockBasis,
    coupling: Complex64,
) -> Result<SparseOperator> {
    spec.check_basis(basis)?;
    SparseOperator::from_monomials(basis, &cross_pair_monomials(spec, coupling))
}

fn junction_term(spec: &JunctionSpec, basis: FockBasis) -> Result<SparseOperator> {
    SparseOperator::from_monomials(basis, &junction_monomials(spec))
}

#[derive(Clone, Debug)]
pub struct HamiltonianSplit {
    pub h_total: SparseOperator,
    pub h1: SparseOperator,
    pub h2: SparseOperator,
    pub h12: SparseOperator,
}

pub fn build_hamiltonian(spec: &JunctionSpec, basis: FockBasis) -> Result<HamiltonianSplit> {
    spec.check_basis(basis)?;
    let mut h1 = region_hamiltonian(spec, basis, Region::One)?;
    let mut h2 = region_hamiltonian(spec, basis, Region::Two)?;
    let mut h12 = junction_term(spec, basis)?;
    let mut h_total = h1.add(&h2)?.add(&h12)?;
    h1.mark_hermitian(BUILD_TOL)?;
    h2.mark_hermitian(BUILD_TOL)?;
    h12.mark_hermitian(BUILD_TOL)?;
    h_total.mark_hermitian(BUILD_TOL)?;
    Ok(HamiltonianSplit {
        h_total,
        h1,
        h2,
        h12,
    })
}

/// Occupation counts per basis state over the selected modes.
fn occupation_diag(spec: &JunctionSpec, basis: FockBasis, sel: RegionSel) -> Vec<f64> {
    let mask = spec.mode_mask(sel);
    (0..basis.dim())
        .map(|s| (s & mask).count_ones() as f64)
        .collect()
}

/// `Q(sel) = -|e| sum_{modes in sel} n`. Diagonal.
pub fn charge_op(spec: &JunctionSpec, basis: FockBasis, sel: RegionSel) -> Result<SparseOperator> {
    spec.check_basis(basis)?;
    let diag: Vec<f64> = occupation_diag(spec, basis, sel)
        .into_iter()
        .map(|n| -spec.charge_unit * n)
        .collect();
    SparseOperator::diagonal_real(basis, &diag)
}

/// `N(sel) = sum_{modes in sel} n`. Diagonal.
pub fn number_op(spec: &JunctionSpec, basis: FockBasis, sel: RegionSel) -> Result<SparseOperator> {
    spec.check_basis(basis)?;
    SparseOperator::diagonal_real(basis, &occupation_diag(spec, basis, sel))
}

/// Diagonal entries of `exp(i phi N(sel))`; the gauge rotation.
pub fn number_phase_diagonal(
    spec: &JunctionSpec,
    basis: FockBasis,
    sel: RegionSel,
    phi: f64,
) -> Result<Vec<Complex64>> {
    spec.check_basis(basis)?;
    Ok(occupation_diag(spec, basis, sel)
        .into_iter()
        .map(|n| Complex64::from_polar(1.0, phi * n))
        .collect())
}

/// Tunneling-current operator with its reduction residual.
#[derive(Clone, Debug)]
pub struct CurrentOp {
    /// `[i H_total, Q1]`, hermitian.
    pub op: SparseOperator,
    /// `|| [i H_total, Q1] - [i H12, Q1] ||_max`; zero when every charge
    /// transfer between the regions goes through the junction term.
    pub reduction_residual: f64,
}

/// Build `[i H_total, Q1]` and verify it reduces to `[i H12, Q1]`.
pub fn current_op(split: &HamiltonianSplit, q1: &SparseOperator) -> Result<CurrentOp> {
    let i = Complex64::new(0.0, 1.0);
    let j_total = split.h_total.commutator(q1)?.scale(i);
    let j_12 = split.h12.commutator(q1)?.scale(i);
    let reduction_residual = j_total.sub(&j_12)?.max_abs();
    if reduction_residual > REDUCTION_TOL {
        return Err(Error::ModelInconsistency {
            residual: reduction_residual,
            tolerance: REDUCTION_TOL,
        });
    }
    let mut op = j_total;
    op.mark_hermitian(BUILD_TOL)?;
    Ok(CurrentOp {
        op,
        reduction_residual,
    })
}

/// Max-norm residuals of charge conservation.
#[derive(Clone, Copy, Debug)]
pub struct ConservationReport {
    /// `|| [H_total, Q(both)] ||_max`
    pub full: f64,
    /// `|| [H1, Q(region 1)] ||_max`
    pub region1: f64,
    /// `|| [H2, Q(region 2)] ||_max`
    pub region2: f64,
}

impl ConservationReport {
    pub fn max(&self) -> f64 {
        self.full.max(self.region1).max(self.region2)
    }
}

pub fn verify_conservation(
    split: &HamiltonianSplit,
    spec: &JunctionSpec,
    basis: FockBasis,
) -> Result<ConservationReport> {
    let q_both = charge_op(spec, basis, RegionSel::Both)?;
    let q1 = charge_op(spec, basis, RegionSel::One)?;
    let q2 = charge_op(spec, basis, RegionSel::Two)?;
    Ok(ConservationReport {
        full: split.h_total.commutator(&q_both)?.max_abs(),
        region1: split.h1.commutator(&q1)?.max_abs(),
        region2: split.h2.commutator(&q2)?.max_abs(),
    })
}

//! Experiment drivers: phase sweeps of current and junction energy, voltage
//! drive with spectral analysis, gauge-shift equivalence, factorization
//! checks, and cross-validation of the two expectation engines.
//!
//! Phase convention everywhere: the control parameter is the phase
//! difference `delta_theta = theta1 - theta2`, realized as
//! `(theta1, theta2) = (delta_theta, 0)`. With the spin-summed pairing
//! kernel the two-site closed forms are `J = -0.1 sin(delta_theta)` and
//! `<H12> = -0.05 cos(delta_theta)` at `g12 = 0.1`, `|e| = 1`,
//! `u = v = 1/sqrt(2)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::bcs::{
    covariance, embed_product_state, meanfield_expectation, solve_gap, wick_expect, BcsSolution,
    QuasiFreeState,
};
use crate::evolve::evolve_observed;
use crate::fock::{monomial_expectation, FockBasis, Ladder, SparseOperator, StateVector};
use crate::junction::{
    build_hamiltonian, charge_op, current_monomials, current_op, junction_monomials,
    number_phase_diagonal, JunctionSpec, Region, RegionSel, Spin,
};
use crate::linalg::solve_real;
use crate::{Error, Result};

/// Self-consistency tolerance used when sweeps solve the regional gaps.
pub const GAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Fock-space expectation on the embedded product vector.
    Exact,
    /// Wick-contraction expectation on the product covariance.
    MeanField,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::MeanField => "meanfield",
        }
    }
}

/// Least-squares fit onto `{1, cos, sin}` (or `{1, cos}`).
#[derive(Clone, Copy, Debug)]
pub struct TrigFit {
    pub constant: f64,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
    /// `max_i |value_i - fit(grid_i)|`.
    pub residual: f64,
}

impl TrigFit {
    pub fn eval(&self, angle: f64) -> f64 {
        self.constant + self.cos_coeff * angle.cos() + self.sin_coeff * angle.sin()
    }
}

/// OLS via the 3x3 (or 2x2) normal equations; exact enough at desk scale
/// because the basis functions are O(1) on the grid.
pub fn fit_trig(grid: &[f64], values: &[f64], with_sin: bool) -> Result<TrigFit> {
    if grid.len() != values.len() || grid.len() < 3 {
        return Err(Error::Validation(alloc::format!(
            "trig fit needs at least 3 aligned samples, got {} angles and {} values",
            grid.len(),
            values.len()
        )));
    }
    let n = if with_sin { 3 } else { 2 };
    let basis = |angle: f64, j: usize| match j {
        0 => 1.0,
        1 => angle.cos(),
        _ => angle.sin(),
    };
    let mut ata = vec![0.0; n * n];
    let mut aty = vec![0.0; n];
    for (&x, &y) in grid.iter().zip(values) {
        for j in 0..n {
            let bj = basis(x, j);
            aty[j] += bj * y;
            for k in 0..n {
                ata[j * n + k] += bj * basis(x, k);
            }
        }
    }
    solve_real(&mut ata, &mut aty, n)?;
    let fit = TrigFit {
        constant: aty[0],
        cos_coeff: aty[1],
        sin_coeff: if with_sin { aty[2] } else { 0.0 },
        residual: 0.0,
    };
    let residual = grid
        .iter()
        .zip(values)
        .map(|(&x, &y)| (y - fit.eval(x)).abs())
        .fold(0.0, f64::max);
    Ok(TrigFit { residual, ..fit })
}

/// One observable swept over a strictly increasing control grid.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: TrigFit,
    pub engine: Engine,
}

/// `n` equally spaced angles on `[0, 2 pi)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * core::f64::consts::PI / n as f64;
    (0..n).map(|i| i as f64 * step).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Validation("empty control grid".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(alloc::format!(
                "control grid must be strictly increasing, got {} then {}",
                w[0],
                w[1]
            )));
        }
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("control grid contains non-finite angles".into()));
    }
    Ok(())
}

/// Gap solutions of the two regions at phase zero.
pub fn region_solutions(spec: &JunctionSpec) -> Result<(BcsSolution, BcsSolution)> {
    spec.validate()?;
    let sol1 = solve_gap(spec.l1, spec.t_hop, spec.mu, spec.g11, spec.boundary, GAP_TOL)?;
    let sol2 = solve_gap(spec.l2, spec.t_hop, spec.mu, spec.g22, spec.boundary, GAP_TOL)?;
    Ok((sol1, sol2))
}

fn product_vector(
    spec: &JunctionSpec,
    basis: FockBasis,
    sols: &(BcsSolution, BcsSolution),
    delta_theta: f64,
) -> Result<StateVector> {
    let sol1 = sols.0.clone().with_phase(delta_theta);
    embed_product_state(spec, basis, &sol1, &sols.1)
}

fn product_covariance(
    spec: &JunctionSpec,
    sols: &(BcsSolution, BcsSolution),
    delta_theta: f64,
) -> Result<QuasiFreeState> {
    let sol1 = sols.0.clone().with_phase(delta_theta);
    covariance(spec, &sol1, &sols.1)
}

fn sweep(
    spec: &JunctionSpec,
    grid: &[f64],
    engine: Engine,
    terms: &[(Complex64, Vec<Ladder>)],
    exact_op: impl FnOnce(&JunctionSpec, FockBasis) -> Result<SparseOperator>,
    with_sin: bool,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let sols = region_solutions(spec)?;
    let mut values = Vec::with_capacity(grid.len());
    match engine {
        Engine::Exact => {
            let basis = spec.basis()?;
            let op = exact_op(spec, basis)?;
            for &dt in grid {
                let psi = product_vector(spec, basis, &sols, dt)?;
                values.push(op.expectation(&psi)?.re);
            }
        }
        Engine::MeanField => {
            for &dt in grid {
                let state = product_covariance(spec, &sols, dt)?;
                values.push(meanfield_expectation(&state, terms)?.re);
            }
        }
    }
    let fit = fit_trig(grid, &values, with_sin)?;
    Ok(SweepResult {
        grid: grid.to_vec(),
        values,
        fit,
        engine,
    })
}

/// Tunneling current vs. phase difference. The separable-kernel law is a
/// pure sinusoid, so the fitted constant and cosine parts are diagnostics
/// that should sit at round-off.
pub fn dc_sweep(spec: &JunctionSpec, grid: &[f64], engine: Engine) -> Result<SweepResult> {
    sweep(
        spec,
        grid,
        engine,
        &current_monomials(spec),
        |spec, basis| {
            let split = build_hamiltonian(spec, basis)?;
            let q1 = charge_op(spec, basis, RegionSel::One)?;
            Ok(current_op(&split, &q1)?.op)
        },
        true,
    )
}

/// Junction energy vs. phase difference, fit onto `{1, cos}`.
pub fn energy_sweep(spec: &JunctionSpec, grid: &[f64], engine: Engine) -> Result<SweepResult> {
    sweep(
        spec,
        grid,
        engine,
        &junction_monomials(spec),
        |spec, basis| Ok(build_hamiltonian(spec, basis)?.h12),
        false,
    )
}

#[derive(Clone, Copy, Debug)]
pub struct AcParams {
    pub voltage: f64,
    /// Initial phase difference.
    pub theta0: f64,
    pub t_final: f64,
    pub n_samples: usize,
    /// Integrator tolerance (per unit time error budget).
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct AcResult {
    pub times: Vec<f64>,
    pub current: Vec<f64>,
    pub charge1: Vec<f64>,
    /// Location of the dominant nonzero-frequency spectral peak.
    pub peak_omega: f64,
    /// `2 |e| V`.
    pub expected_omega: f64,
    /// DFT bin spacing `2 pi / t_final`.
    pub binwidth: f64,
    /// `max_i |(Q1(t_{i+1}) - Q1(t_{i-1})) / 2 dt - J(t_i)|` over interior
    /// samples; limited by the sampling stencil, not just the integrator.
    pub ehrenfest_max: f64,
}

/// Hann-windowed periodogram peak over bins `1..=n/2`.
fn dominant_frequency(samples: &[f64], dt: f64) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = 0.5
                * (1.0
                    - (2.0 * core::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
            (x - mean) * w
        })
        .collect();
    let binwidth = 2.0 * core::f64::consts::PI / (n as f64 * dt);
    let mut best_k = 1;
    let mut best_power = -1.0;
    for k in 1..=n / 2 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &x) in windowed.iter().enumerate() {
            let phase = -2.0 * core::f64::consts::PI * (k * i) as f64 / n as f64;
            acc += x * Complex64::from_polar(1.0, phase);
        }
        let power = acc.norm_sqr();
        if power > best_power {
            best_power = power;
            best_k = k;
        }
    }
    (best_k as f64 * binwidth, binwidth)
}

/// Drive the junction with a scalar potential `V` on region 1 and record
/// the current and region-1 charge along the evolved state.
///
/// The expected oscillation frequency is `2 |e| V`; `t_final` must cover at
/// least 8 of those periods so the spectral bin at the expected frequency is
/// resolvable. The Ehrenfest residual is reported, not asserted; callers
/// compare it against their own multiple of `tol`.
pub fn ac_run(spec: &JunctionSpec, params: &AcParams) -> Result<AcResult> {
    spec.validate()?;
    let AcParams {
        voltage,
        theta0,
        t_final,
        n_samples,
        tol,
    } = *params;
    if !voltage.is_finite() || !theta0.is_finite() {
        return Err(Error::Validation("voltage and theta0 must be finite".into()));
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Validation(alloc::format!(
            "final time must be positive and finite, got {}",
            t_final
        )));
    }
    if n_samples < 16 {
        return Err(Error::Validation(alloc::format!(
            "need at least 16 samples, got {}",
            n_samples
        )));
    }
    let expected_omega = 2.0 * spec.charge_unit * voltage.abs();
    if voltage != 0.0 {
        let needed = 8.0 * 2.0 * core::f64::consts::PI / expected_omega;
        if t_final < needed {
            return Err(Error::Validation(alloc::format!(
                "t_final {} covers fewer than 8 expected periods (need >= {})",
                t_final,
                needed
            )));
        }
    }

    let sols = region_solutions(spec)?;
    let basis = spec.basis()?;
    let split = build_hamiltonian(spec, basis)?;
    let q1 = charge_op(spec, basis, RegionSel::One)?;
    let cur = current_op(&split, &q1)?.op;
    let mut driven = split
        .h_total
        .add(&q1.scale(Complex64::new(voltage, 0.0)))?;
    driven.mark_hermitian(1e-12)?;

    let psi0 = product_vector(spec, basis, &sols, theta0)?;
    let dt = t_final / n_samples as f64;
    let times: Vec<f64> = (0..n_samples).map(|i| i as f64 * dt).collect();
    let mut current = vec![0.0; n_samples];
    let mut charge1 = vec![0.0; n_samples];
    evolve_observed(&psi0, &driven, &times, tol, |i, _t, psi| {
        current[i] = cur.expectation(psi)?.re;
        charge1[i] = q1.expectation(psi)?.re;
        Ok(())
    })?;

    let mut ehrenfest_max: f64 = 0.0;
    for i in 1..n_samples - 1 {
        let dq = (charge1[i + 1] - charge1[i - 1]) / (2.0 * dt);
        ehrenfest_max = ehrenfest_max.max((dq - current[i]).abs());
    }
    let (peak_omega, binwidth) = dominant_frequency(&current, dt);
    Ok(AcResult {
        times,
        current,
        charge1,
        peak_omega,
        expected_omega,
        binwidth,
        ehrenfest_max,
    })
}

/// Max over the grid of `|J(exp(i phi N1) psi(dt)) - J(psi(dt + 2 phi))|`:
/// rotating region 1 by the number phase advances the pair phase by
/// `2 phi` because the pair carries two units of charge.
pub fn gauge_check(spec: &JunctionSpec, phi: f64, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    if !phi.is_finite() {
        return Err(Error::Validation("phi must be finite".into()));
    }
    let sols = region_solutions(spec)?;
    let basis = spec.basis()?;
    let split = build_hamiltonian(spec, basis)?;
    let q1 = charge_op(spec, basis, RegionSel::One)?;
    let cur = current_op(&split, &q1)?.op;
    let u = number_phase_diagonal(spec, basis, RegionSel::One, phi)?;
    let mut max_disc: f64 = 0.0;
    for &dt in grid {
        let rotated = product_vector(spec, basis, &sols, dt)?.phase_rotated(|s| u[s]);
        let shifted = product_vector(spec, basis, &sols, dt + 2.0 * phi)?;
        let j_rot = cur.expectation(&rotated)?.re;
        let j_shift = cur.expectation(&shifted)?.re;
        max_disc = max_disc.max((j_rot - j_shift).abs());
    }
    Ok(max_disc)
}

/// Outcome of the factorization checks on a product state.
#[derive(Clone, Debug)]
pub struct ClusterReport {
    /// Number of mixed-region monomial pairs tested.
    pub pair_count: usize,
    /// Max `|<AB> - <A><B>|` over the family, exact engine.
    pub max_pair_defect: f64,
    /// Same family through Wick contraction.
    pub max_meanfield_pair_defect: f64,
    /// Per quartic region pattern `(i, j, k, l)`: its current contribution
    /// on the product state, exact engine.
    pub pattern_currents: Vec<([Region; 4], f64)>,
    /// Largest current contribution among patterns other than
    /// `(1,1,2,2)` and `(2,2,1,1)`.
    pub max_spurious_pattern: f64,
    /// Smallest contribution among the two surviving patterns.
    pub min_surviving_pattern: f64,
    /// Mean-field expectation of the bridge (single-particle cross hop)
    /// current on the product covariance; vanishes because the product
    /// state has no cross-region one-body coherence.
    pub bridge_current_meanfield: f64,
    /// `|<AB> - <A><B>|` for `A = P1^dag`, `B = P2` on the engineered
    /// entangled two-pair state; 0.5 by construction.
    pub entangled_defect: f64,
}

/// Structured family of region-local monomials: all single ladders plus a
/// set of quadratics, giving odd-odd and even-even cross pairs.
fn region_monomial_family(spec: &JunctionSpec, region: Region) -> Vec<Vec<Ladder>> {
    let mut family = Vec::new();
    let sites = spec.sites(region);
    for x in 0..sites {
        for spin in [Spin::Up, Spin::Down] {
            let m = spec.mode(region, x, spin);
            family.push(vec![Ladder::create(m)]);
            family.push(vec![Ladder::annihilate(m)]);
        }
    }
    for x in 0..sites {
        let up = spec.mode(region, x, Spin::Up);
        let down = spec.mode(region, x, Spin::Down);
        family.push(vec![Ladder::create(up), Ladder::annihilate(up)]);
        family.push(vec![Ladder::create(up), Ladder::create(down)]);
        family.push(vec![Ladder::annihilate(down), Ladder::annihilate(up)]);
        family.push(vec![Ladder::create(up), Ladder::annihilate(down)]);
    }
    family
}

fn concat(a: &[Ladder], b: &[Ladder]) -> Vec<Ladder> {
    let mut ops = Vec::with_capacity(a.len() + b.len());
    ops.extend_from_slice(a);
    ops.extend_from_slice(b);
    ops
}

/// Quartic pattern sum `T_p` with a uniform unit kernel in the singlet
/// channel: `sum a^dag_{x up} a^dag_{y down} a_{z down} a_{w up}` with the
/// four site sums running over the regions named by the pattern.
fn pattern_monomials(spec: &JunctionSpec, pattern: [Region; 4]) -> Vec<(Complex64, Vec<Ladder>)> {
    let mut terms = Vec::new();
    for x in 0..spec.sites(pattern[0]) {
        for y in 0..spec.sites(pattern[1]) {
            for z in 0..spec.sites(pattern[2]) {
                for w in 0..spec.sites(pattern[3]) {
                    terms.push((
                        Complex64::new(1.0, 0.0),
                        vec![
                            Ladder::create(spec.mode(pattern[0], x, Spin::Up)),
                            Ladder::create(spec.mode(pattern[1], y, Spin::Down)),
                            Ladder::annihilate(spec.mode(pattern[2], z, Spin::Down)),
                            Ladder::annihilate(spec.mode(pattern[3], w, Spin::Up)),
                        ],
                    ));
                }
            }
        }
    }
    terms
}

/// Region-1 charge raised by the pattern: creators minus annihilators.
fn pattern_charge_transfer(pattern: [Region; 4]) -> f64 {
    let weight = |r: Region, sign: f64| if r == Region::One { sign } else { 0.0 };
    weight(pattern[0], 1.0) + weight(pattern[1], 1.0)
        - weight(pattern[2], 1.0)
        - weight(pattern[3], 1.0)
}

fn exact_expectation(
    basis: FockBasis,
    psi: &StateVector,
    terms: &[(Complex64, Vec<Ladder>)],
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (coeff, ops) in terms {
        acc += coeff * monomial_expectation(basis, ops, psi)?;
    }
    Ok(acc)
}

/// Run the factorization checks. Phases are fixed internally away from the
/// sin nodes so the surviving patterns are visibly nonzero.
pub fn cluster_check(spec: &JunctionSpec) -> Result<ClusterReport> {
    spec.validate()?;
    let sols = region_solutions(spec)?;
    let basis = spec.basis()?;
    let delta_theta = 0.7;
    let psi = product_vector(spec, basis, &sols, delta_theta)?;
    let state = product_covariance(spec, &sols, delta_theta)?;

    let fam1 = region_monomial_family(spec, Region::One);
    let fam2 = region_monomial_family(spec, Region::Two);
    let mut pair_count = 0;
    let mut max_pair_defect: f64 = 0.0;
    let mut max_meanfield_pair_defect: f64 = 0.0;
    for a in &fam1 {
        for b in &fam2 {
            let ab = concat(a, b);
            let exact = monomial_expectation(basis, &ab, &psi)?
                - monomial_expectation(basis, a, &psi)?
                    * monomial_expectation(basis, b, &psi)?;
            let mf = wick_expect(&state, &ab)?
                - wick_expect(&state, a)? * wick_expect(&state, b)?;
            max_pair_defect = max_pair_defect.max(exact.norm());
            max_meanfield_pair_defect = max_meanfield_pair_defect.max(mf.norm());
            pair_count += 1;
        }
    }

    let e = spec.charge_unit;
    let vnorm = spec.volume_norm();
    let mut pattern_currents = Vec::with_capacity(16);
    let mut max_spurious: f64 = 0.0;
    let mut min_surviving = f64::INFINITY;
    for bits in 0..16usize {
        let pick = |b: usize| {
            if bits >> b & 1 == 0 {
                Region::One
            } else {
                Region::Two
            }
        };
        let pattern = [pick(3), pick(2), pick(1), pick(0)];
        let transfer = pattern_charge_transfer(pattern);
        let t_val = exact_expectation(basis, &psi, &pattern_monomials(spec, pattern))?;
        // current contribution of H_p = -(T_p + T_p^dag)/volume_norm:
        // <[i H_p, Q1]> = (2 |e| transfer / volume_norm) Im<T_p>
        let contribution = 2.0 * e * transfer / vnorm * t_val.im;
        let surviving = pattern == [Region::One, Region::One, Region::Two, Region::Two]
            || pattern == [Region::Two, Region::Two, Region::One, Region::One];
        if surviving {
            min_surviving = min_surviving.min(contribution.abs());
        } else {
            max_spurious = max_spurious.max(contribution.abs());
        }
        pattern_currents.push((pattern, contribution));
    }

    // bridge current through the mean-field engine: force a nonzero cross
    // hop and keep only its current terms by zeroing g12
    let bridge_spec = JunctionSpec {
        g12: 0.0,
        cross_hop: 0.35,
        ..spec.clone()
    };
    let bridge_current_meanfield =
        meanfield_expectation(&state, &current_monomials(&bridge_spec))?.norm();

    // engineered non-clustering state in the minimal junction
    let two = JunctionSpec::two_site(0.1);
    let two_basis = two.basis()?;
    let mut amp = vec![Complex64::new(0.0, 0.0); two_basis.dim()];
    amp[3] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    amp[12] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let entangled = StateVector::from_amplitudes(two_basis, amp)?;
    let p1_dag = [Ladder::create(0), Ladder::create(1)];
    let p2 = [Ladder::annihilate(3), Ladder::annihilate(2)];
    let ab = concat(&p1_dag, &p2);
    let defect = monomial_expectation(two_basis, &ab, &entangled)?
        - monomial_expectation(two_basis, &p1_dag, &entangled)?
            * monomial_expectation(two_basis, &p2, &entangled)?;

    Ok(ClusterReport {
        pair_count,
        max_pair_defect,
        max_meanfield_pair_defect,
        pattern_currents,
        max_spurious_pattern: max_spurious,
        min_surviving_pattern: min_surviving,
        bridge_current_meanfield,
        entangled_defect: defect.norm(),
    })
}

/// Max discrepancy between the two engines' `J(delta_theta)` over the grid;
/// errors above `1e-10` because the engines evaluate the same state.
pub fn oracle_check(spec: &JunctionSpec, grid: &[f64]) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let exact = dc_sweep(spec, grid, Engine::Exact)?;
    let meanfield = dc_sweep(spec, grid, Engine::MeanField)?;
    let max_discrepancy = exact
        .values
        .iter()
        .zip(&meanfield.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if max_discrepancy > TOL {
        return Err(Error::OracleMismatch {
            max_discrepancy,
            tolerance: TOL,
        });
    }
    Ok(max_discrepancy)
}

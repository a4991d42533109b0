//! Experiment dispatch behind the subcommands.
//!
//! Each run writes `summary.json`; kinds with tabular output also write
//! `result.csv` plus a matching `plot.gp` when the format asks for CSV.
//! Exit codes: 0 clean, 1 a physics check or engine cross-check failed,
//! 2 bad usage or config, 3 capacity or solver limits.

use std::path::Path;

use josephson::bcs::{coupling_for_gap, covariance, odlro_scan, solve_gap, wick_expect};
use josephson::experiments::{
    ac_run, cluster_check, dc_sweep, energy_sweep, gauge_check, oracle_check, phase_grid,
    region_solutions, AcParams, Engine, SweepResult, GAP_TOL,
};
use josephson::fock::{FockBasis, Ladder, SparseOperator};
use josephson::junction::{
    build_hamiltonian, charge_op, current_op, verify_conservation, Boundary, JunctionSpec,
    Region, RegionSel, Spin,
};
use josephson::Error;
use num_complex::Complex64;
use serde_json::json;

use crate::config::{Config, Kind};
use crate::output::{plot_script, write_csv, Check, Summary};

/// Absolute tolerance (per unit response amplitude) on the closed-form
/// phase laws.
const LAW_TOL: f64 = 1e-10;

pub struct RunOutput {
    pub csv: Option<(&'static str, Vec<Vec<f64>>)>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

fn classify(err: &Error) -> (u8, &'static str) {
    match err {
        Error::Capacity { .. } => (3, "capacity"),
        Error::IntegrationFailure { .. } => (3, "integration_failure"),
        Error::SolverFailure { .. } => (3, "solver_failure"),
        Error::Validation(_) => (2, "invalid_config"),
        Error::OracleMismatch { .. } => (1, "oracle_mismatch"),
        Error::ModelInconsistency { .. } => (1, "model_inconsistency"),
        _ => (1, "internal"),
    }
}

pub fn execute(kind: Kind, cfg: &Config, out_dir: &Path) -> u8 {
    let engine_label = match kind {
        Kind::Dc | Kind::Energy => cfg.experiment.engine.name(),
        Kind::Ac => Engine::Exact.name(),
        Kind::Odlro => Engine::MeanField.name(),
        Kind::Oracle | Kind::Validate => "both",
    };
    let mut summary = Summary::new(kind, engine_label, cfg.echo(kind));
    if let Err(err) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create {}: {}", out_dir.display(), err);
        return 2;
    }
    let mut csv = None;
    match run_kind(kind, cfg) {
        Ok(out) => {
            summary.results = out.results;
            summary.push_checks(out.checks);
            csv = out.csv;
        }
        Err(err) => {
            let (code, reason) = classify(&err);
            eprintln!("error: {}", err);
            summary.fail(code, reason, err.to_string());
        }
    }
    if cfg.output.format.wants_csv() {
        if let Some((header, rows)) = &csv {
            let written = write_csv(&out_dir.join("result.csv"), header, rows).and_then(|_| {
                match plot_script(kind) {
                    Some(script) => std::fs::write(out_dir.join("plot.gp"), script)
                        .map_err(anyhow::Error::from),
                    None => Ok(()),
                }
            });
            if let Err(err) = written {
                eprintln!("error: {}", err);
                return 2;
            }
        }
    }
    if let Err(err) = summary.write(out_dir) {
        eprintln!("error: {}", err);
        return 2;
    }
    for check in &summary.checks {
        println!(
            "check {}: {} ({})",
            check.name,
            if check.passed { "ok" } else { "FAIL" },
            check.op
        );
    }
    println!(
        "{}: {} (exit {})",
        kind.name(),
        summary.status,
        summary.exit_code
    );
    summary.exit_code
}

fn run_kind(kind: Kind, cfg: &Config) -> josephson::Result<RunOutput> {
    match kind {
        Kind::Dc => run_dc(cfg),
        Kind::Energy => run_energy(cfg),
        Kind::Ac => run_ac(cfg),
        Kind::Odlro => run_odlro(cfg),
        Kind::Oracle => run_oracle(cfg),
        Kind::Validate => run_validate(cfg),
    }
}

fn sweep_rows(sweep: &SweepResult) -> Vec<Vec<f64>> {
    sweep
        .grid
        .iter()
        .zip(&sweep.values)
        .map(|(&t, &v)| vec![t, v])
        .collect()
}

fn amplitude_scale(values: &[f64]) -> f64 {
    values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

fn run_dc(cfg: &Config) -> josephson::Result<RunOutput> {
    let grid = phase_grid(cfg.experiment.grid);
    let sweep = dc_sweep(&cfg.model, &grid, cfg.experiment.engine)?;
    let (sol1, sol2) = region_solutions(&cfg.model)?;
    let scale = amplitude_scale(&sweep.values);
    let checks = vec![
        Check::le("sinusoid_fit_residual", sweep.fit.residual, LAW_TOL * scale),
        Check::le("constant_component", sweep.fit.constant.abs(), LAW_TOL * scale),
        Check::le("cosine_component", sweep.fit.cos_coeff.abs(), LAW_TOL * scale),
    ];
    let results = json!({
        "critical_current": sweep.fit.sin_coeff.abs(),
        "sin_coeff": sweep.fit.sin_coeff,
        "fit_residual": sweep.fit.residual,
        "gap_region1": sol1.delta,
        "gap_region2": sol2.delta,
    });
    Ok(RunOutput {
        csv: Some(("delta_theta,observable", sweep_rows(&sweep))),
        results,
        checks,
    })
}

fn run_energy(cfg: &Config) -> josephson::Result<RunOutput> {
    let grid = phase_grid(cfg.experiment.grid);
    let sweep = energy_sweep(&cfg.model, &grid, cfg.experiment.engine)?;
    let (sol1, sol2) = region_solutions(&cfg.model)?;
    let scale = amplitude_scale(&sweep.values);
    let mut checks = vec![Check::le(
        "cosine_fit_residual",
        sweep.fit.residual,
        LAW_TOL * scale,
    )];
    // attractive cross coupling binds at zero phase difference, so the
    // cosine coefficient is negative whenever both regions carry a gap
    if cfg.model.g12 > 0.0 && sol1.delta > 0.0 && sol2.delta > 0.0 {
        checks.push(Check::lt(
            "binding_cosine_coefficient",
            sweep.fit.cos_coeff,
            0.0,
        ));
    }
    let results = json!({
        "constant": sweep.fit.constant,
        "cos_coeff": sweep.fit.cos_coeff,
        "fit_residual": sweep.fit.residual,
        "gap_region1": sol1.delta,
        "gap_region2": sol2.delta,
    });
    Ok(RunOutput {
        csv: Some(("delta_theta,observable", sweep_rows(&sweep))),
        results,
        checks,
    })
}

fn run_ac(cfg: &Config) -> josephson::Result<RunOutput> {
    let e = cfg.model.charge_unit;
    let v = cfg.experiment.voltage;
    let t_final = match cfg.experiment.t_final {
        Some(t) => t,
        None if v != 0.0 => 8.0 * 2.0 * std::f64::consts::PI / (2.0 * e * v.abs()),
        None => {
            return Err(Error::Validation(
                "experiment.T is required when experiment.V = 0".into(),
            ))
        }
    };
    let params = AcParams {
        voltage: v,
        theta0: cfg.experiment.theta0,
        t_final,
        n_samples: cfg.experiment.n_samples,
        tol: cfg.experiment.tol,
    };
    let res = ac_run(&cfg.model, &params)?;
    let rows: Vec<Vec<f64>> = res
        .times
        .iter()
        .zip(&res.current)
        .zip(&res.charge1)
        .map(|((&t, &j), &q)| vec![t, j, q])
        .collect();
    let mut checks = vec![Check::le(
        "ehrenfest_residual",
        res.ehrenfest_max,
        100.0 * params.tol,
    )];
    if v != 0.0 {
        checks.push(Check::le(
            "spectral_peak_offset",
            (res.peak_omega - res.expected_omega).abs(),
            res.binwidth,
        ));
    }
    let results = json!({
        "expected_omega": res.expected_omega,
        "peak_omega": res.peak_omega,
        "binwidth": res.binwidth,
        "ehrenfest_max": res.ehrenfest_max,
        "t_final": t_final,
    });
    Ok(RunOutput {
        csv: Some(("time,current,charge_region1", rows)),
        results,
        checks,
    })
}

fn run_odlro(cfg: &Config) -> josephson::Result<RunOutput> {
    let spec = &cfg.model;
    let m = spec.l1;
    let coupling = match cfg.experiment.target_gap {
        Some(target) => coupling_for_gap(m, spec.t_hop, spec.mu, spec.boundary, target)?,
        None => spec.g11,
    };
    let sol = solve_gap(m, spec.t_hop, spec.mu, coupling, spec.boundary, GAP_TOL)?;
    let max_sep = cfg.experiment.max_separation.unwrap_or(m / 2);
    let scan = odlro_scan(&sol, max_sep)?;
    let rows: Vec<Vec<f64>> = scan
        .separations
        .iter()
        .zip(&scan.correlations)
        .zip(&scan.deviations)
        .map(|((&d, c), &dev)| vec![d as f64, c.re, c.im, dev])
        .collect();
    let near = scan.deviations.get(2.min(max_sep)).copied().unwrap_or(0.0);
    let far = scan.deviations.last().copied().unwrap_or(0.0);
    let results = json!({
        "sites": m,
        "coupling": coupling,
        "gap": sol.delta,
        "plateau": scan.plateau,
        "deviation_near": near,
        "deviation_far": far,
    });
    Ok(RunOutput {
        csv: Some((
            "separation,correlation_real,correlation_imag,plateau_deviation",
            rows,
        )),
        results,
        checks: Vec::new(),
    })
}

fn run_oracle(cfg: &Config) -> josephson::Result<RunOutput> {
    let grid = phase_grid(cfg.experiment.grid);
    let exact = dc_sweep(&cfg.model, &grid, Engine::Exact)?;
    let meanfield = dc_sweep(&cfg.model, &grid, Engine::MeanField)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut max_disc: f64 = 0.0;
    for ((&t, &a), &b) in grid.iter().zip(&exact.values).zip(&meanfield.values) {
        let d = (a - b).abs();
        max_disc = max_disc.max(d);
        rows.push(vec![t, d]);
    }
    let checks = vec![Check::le("engine_agreement", max_disc, LAW_TOL)];
    let results = json!({
        "max_discrepancy": max_disc,
        "grid_points": grid.len(),
    });
    Ok(RunOutput {
        csv: Some(("delta_theta,observable", rows)),
        results,
        checks,
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn unit_f64(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// Small junctions with mixed couplings, signs, and boundaries; 12 modes at
/// most so the exact engine stays fast.
fn seeded_spec(state: &mut u64) -> JunctionSpec {
    JunctionSpec {
        l1: 1 + (splitmix64(state) % 3) as usize,
        l2: 1 + (splitmix64(state) % 3) as usize,
        t_hop: 2.0 * unit_f64(state) - 1.0,
        mu: unit_f64(state) - 0.5,
        g11: 2.0 * unit_f64(state),
        g22: 2.0 * unit_f64(state),
        g12: 2.0 * unit_f64(state) - 1.0,
        charge_unit: 0.5 + unit_f64(state),
        boundary: if splitmix64(state) & 1 == 0 {
            Boundary::Open
        } else {
            Boundary::Periodic
        },
        cross_hop: unit_f64(state) - 0.5,
    }
}

/// `b^dag_{to} b_{from}`: move a full on-site pair between sites.
fn pair_hop(
    spec: &JunctionSpec,
    to: (Region, usize),
    from: (Region, usize),
) -> [Ladder; 4] {
    [
        Ladder::create(spec.mode(to.0, to.1, Spin::Up)),
        Ladder::create(spec.mode(to.0, to.1, Spin::Down)),
        Ladder::annihilate(spec.mode(from.0, from.1, Spin::Down)),
        Ladder::annihilate(spec.mode(from.0, from.1, Spin::Up)),
    ]
}

/// Junction with a deep-weak-link hierarchy: the drive scale dominates every
/// internal scale, so the driven current is close to a clean oscillation at
/// twice the bias frequency.
fn weak_link_spec() -> JunctionSpec {
    JunctionSpec {
        l1: 2,
        l2: 2,
        t_hop: 0.0,
        mu: 0.0,
        g11: 0.004,
        g22: 0.004,
        g12: 0.01,
        charge_unit: 1.0,
        boundary: Boundary::Open,
        cross_hop: 0.0,
    }
}

/// The invariant suite: algebra, conservation, the phase laws, gauge
/// covariance, factorization, engine agreement, dynamics, and the
/// correlation plateau. Every check lands in the summary.
fn run_validate(cfg: &Config) -> josephson::Result<RunOutput> {
    let mut checks = Vec::new();

    // canonical anticommutation relations on four modes
    {
        let basis = FockBasis::new(4)?;
        let ident = SparseOperator::identity(basis);
        let mut worst: f64 = 0.0;
        for p in 0..4 {
            let ap = SparseOperator::ladder(basis, p, false)?;
            let ap_dag = SparseOperator::ladder(basis, p, true)?;
            for q in 0..4 {
                let aq = SparseOperator::ladder(basis, q, false)?;
                let aq_dag = SparseOperator::ladder(basis, q, true)?;
                let mut mixed = ap.anticommutator(&aq_dag)?;
                if p == q {
                    mixed = mixed.sub(&ident)?;
                }
                worst = worst
                    .max(mixed.max_abs())
                    .max(ap.anticommutator(&aq)?.max_abs())
                    .max(ap_dag.anticommutator(&aq_dag)?.max_abs());
            }
        }
        checks.push(Check::le("car_algebra", worst, 1e-12));
    }

    // charge conservation and current reduction over a seeded model family
    {
        let mut state = cfg.output.seed ^ 0x6A09_E667_F3BC_C909;
        let mut worst_conservation: f64 = 0.0;
        let mut worst_reduction: f64 = 0.0;
        for _ in 0..20 {
            let spec = seeded_spec(&mut state);
            let basis = spec.basis()?;
            let split = build_hamiltonian(&spec, basis)?;
            let report = verify_conservation(&split, &spec, basis)?;
            worst_conservation = worst_conservation
                .max(report.full)
                .max(report.region1)
                .max(report.region2);
            let q1 = charge_op(&spec, basis, RegionSel::One)?;
            worst_reduction = worst_reduction.max(current_op(&split, &q1)?.reduction_residual);
        }
        checks.push(Check::le("charge_conservation", worst_conservation, 1e-12));
        checks.push(Check::le("current_reduction", worst_reduction, 1e-12));
    }

    // frozen minimal-junction laws, both engines
    {
        let spec = JunctionSpec::two_site(0.1);
        let grid = phase_grid(17);
        for engine in [Engine::Exact, Engine::MeanField] {
            let sweep = dc_sweep(&spec, &grid, engine)?;
            let worst = sweep
                .grid
                .iter()
                .zip(&sweep.values)
                .map(|(&t, &j)| (j + 0.1 * t.sin()).abs())
                .fold(0.0, f64::max);
            checks.push(Check::le(&format!("dc_law_{}", engine.name()), worst, LAW_TOL));
            let energy = energy_sweep(&spec, &grid, engine)?;
            let worst_e = energy
                .grid
                .iter()
                .zip(&energy.values)
                .map(|(&t, &h)| (h + 0.05 * t.cos()).abs())
                .fold(0.0, f64::max);
            checks.push(Check::le(
                &format!("energy_law_{}", engine.name()),
                worst_e,
                LAW_TOL,
            ));
        }
    }

    // the current is odd and 2 pi periodic in the phase difference
    {
        let spec = JunctionSpec::two_site(0.1);
        let grid = vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5];
        let sweep = dc_sweep(&spec, &grid, Engine::Exact)?;
        let n = sweep.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n / 2 {
            worst = worst.max((sweep.values[i] + sweep.values[n - 1 - i]).abs());
        }
        let base = vec![0.3, 0.9, 1.7];
        let shifted: Vec<f64> = base
            .iter()
            .map(|t| t + 2.0 * std::f64::consts::PI)
            .collect();
        let a = dc_sweep(&spec, &base, Engine::Exact)?;
        let b = dc_sweep(&spec, &shifted, Engine::Exact)?;
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).abs());
        }
        checks.push(Check::le("dc_symmetry", worst, LAW_TOL));
    }

    // rotating region 1 by a number phase advances the pair phase twice
    {
        let spec = JunctionSpec {
            l1: 2,
            l2: 2,
            t_hop: 0.7,
            mu: 0.25,
            g11: 1.8,
            g22: 1.6,
            g12: 0.3,
            charge_unit: 1.0,
            boundary: Boundary::Open,
            cross_hop: 0.0,
        };
        let grid = phase_grid(9);
        let mut worst: f64 = 0.0;
        for phi in [
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
        ] {
            worst = worst.max(gauge_check(&spec, phi, &grid)?);
        }
        checks.push(Check::le("gauge_invariance", worst, LAW_TOL));
    }

    // product states factorize across regions; an engineered pair
    // superposition does not
    {
        let spec = JunctionSpec {
            l1: 2,
            l2: 2,
            t_hop: 0.3,
            mu: 0.1,
            g11: 1.6,
            g22: 1.4,
            g12: 0.25,
            charge_unit: 1.0,
            boundary: Boundary::Open,
            cross_hop: 0.0,
        };
        let report = cluster_check(&spec)?;
        checks.push(Check::le("cluster_pair_defect", report.max_pair_defect, LAW_TOL));
        checks.push(Check::le(
            "cluster_meanfield_pair_defect",
            report.max_meanfield_pair_defect,
            LAW_TOL,
        ));
        checks.push(Check::le(
            "cluster_spurious_patterns",
            report.max_spurious_pattern,
            LAW_TOL,
        ));
        checks.push(Check::ge(
            "cluster_surviving_pattern",
            report.min_surviving_pattern,
            1e-6,
        ));
        checks.push(Check::le(
            "cluster_bridge_meanfield",
            report.bridge_current_meanfield,
            1e-12,
        ));
        checks.push(Check::le(
            "cluster_entangled_defect",
            (report.entangled_defect - 0.5).abs(),
            LAW_TOL,
        ));
    }

    // the engines agree point by point on the dc sweep
    {
        let grid = phase_grid(17);
        let small = oracle_check(&JunctionSpec::two_site(0.1), &grid)?;
        let larger = JunctionSpec {
            l1: 3,
            l2: 3,
            t_hop: 0.5,
            mu: 0.2,
            g11: 2.2,
            g22: 2.0,
            g12: 0.15,
            charge_unit: 1.0,
            boundary: Boundary::Periodic,
            cross_hop: 0.0,
        };
        let big = oracle_check(&larger, &grid)?;
        checks.push(Check::le("engine_agreement", small.max(big), LAW_TOL));
    }

    // a constant bias drives an oscillation at twice the bias frequency;
    // zero bias on a symmetric junction drives nothing
    {
        let spec = weak_link_spec();
        let v = 0.25;
        let t_final = 8.0 * 2.0 * std::f64::consts::PI / (2.0 * v);
        let res = ac_run(
            &spec,
            &AcParams {
                voltage: v,
                theta0: 0.0,
                t_final,
                n_samples: 1024,
                tol: 1e-6,
            },
        )?;
        checks.push(Check::le(
            "ac_spectral_peak",
            (res.peak_omega - res.expected_omega).abs(),
            res.binwidth,
        ));
        checks.push(Check::le("ac_ehrenfest", res.ehrenfest_max, 1e-4));
        let null = ac_run(
            &spec,
            &AcParams {
                voltage: 0.0,
                theta0: 0.0,
                t_final: 40.0,
                n_samples: 256,
                tol: 1e-6,
            },
        )?;
        let drift = null.current.iter().fold(0.0_f64, |m, j| m.max(j.abs()));
        checks.push(Check::le("ac_zero_bias_null", drift, 1e-4));
    }

    // pair correlations flatten onto the factorization plateau, and the
    // cross-region correlation is the product of the two pair amplitudes;
    // mu sits off half filling because the bipartite symmetry at mu = 0
    // zeroes the even-separation normal correlations outright
    {
        let m = 64;
        let coupling = coupling_for_gap(m, 1.0, 0.5, Boundary::Periodic, 1.0)?;
        let sol = solve_gap(m, 1.0, 0.5, coupling, Boundary::Periodic, GAP_TOL)?;
        let scan = odlro_scan(&sol, m / 2)?;
        let near = scan.deviations[2];
        let far = scan.deviations[m / 2];
        checks.push(Check::ge(
            "odlro_plateau_ratio",
            near / far.max(1e-300),
            100.0,
        ));

        let spec64 = JunctionSpec {
            l1: m,
            l2: m,
            t_hop: 1.0,
            mu: 0.5,
            g11: coupling,
            g22: coupling,
            g12: 0.05,
            charge_unit: 1.0,
            boundary: Boundary::Periodic,
            cross_hop: 0.0,
        };
        let sol1 = sol.clone().with_phase(0.8);
        let sol2 = sol.clone().with_phase(0.3);
        let state = covariance(&spec64, &sol1, &sol2)?;
        let amp = sol.mean_pair_amplitude();
        let expect12 = Complex64::from_polar(amp * amp, sol2.theta - sol1.theta);
        let expect21 = expect12.conj();
        let mut worst: f64 = 0.0;
        for &x in &[0usize, 16, 32, 48] {
            for &y in &[0usize, 16, 32, 48] {
                let c12 = wick_expect(
                    &state,
                    &pair_hop(&spec64, (Region::One, x), (Region::Two, y)),
                )?;
                let c21 = wick_expect(
                    &state,
                    &pair_hop(&spec64, (Region::Two, y), (Region::One, x)),
                )?;
                worst = worst
                    .max((c12 - expect12).norm())
                    .max((c21 - expect21).norm());
            }
        }
        checks.push(Check::le("odlro_cross_region", worst, 1e-12));
    }

    let results = json!({
        "check_count": checks.len(),
        "seeded_specs": 20,
        "seed": cfg.output.seed,
    });
    Ok(RunOutput {
        csv: None,
        results,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn dc_run_reports_the_critical_current() {
        let out = run_dc(&Config::default()).unwrap();
        assert!(out.checks.iter().all(|c| c.passed));
        let jc = out.results["critical_current"].as_f64().unwrap();
        assert!((jc - 0.1).abs() < 1e-10);
        let (header, rows) = out.csv.as_ref().unwrap();
        assert_eq!(*header, "delta_theta,observable");
        assert_eq!(rows.len(), 17);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(classify(&Error::Validation("x".into())), (2, "invalid_config"));
        assert_eq!(
            classify(&Error::Capacity {
                n_modes: 30,
                max_modes: 24
            })
            .0,
            3
        );
        assert_eq!(
            classify(&Error::ModelInconsistency {
                residual: 1.0,
                tolerance: 1e-10
            })
            .0,
            1
        );
    }

    #[test]
    fn zero_bias_without_duration_is_a_config_error() {
        let mut cfg = Config::default();
        cfg.experiment.voltage = 0.0;
        match run_ac(&cfg) {
            Err(Error::Validation(_)) => {}
            other => panic!("expected a validation error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn invariant_suite_is_green() {
        let out = run_validate(&Config::default()).unwrap();
        let failed: Vec<&str> = out
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        assert!(failed.is_empty(), "failed checks: {:?}", failed);
        assert!(out.checks.len() >= 15);
        assert!(out.csv.is_none());
    }

    #[test]
    fn execute_writes_summary_csv_and_plot() {
        let dir = std::env::temp_dir().join("josephson-cli-exec-test");
        let _ = std::fs::remove_dir_all(&dir);
        let code = execute(Kind::Dc, &Config::default(), &dir);
        assert_eq!(code, 0);
        let summary = std::fs::read_to_string(dir.join("summary.json")).unwrap();
        assert!(summary.contains("\"schema_version\": 1"));
        assert!(summary.contains("\"status\": \"pass\""));
        assert!(dir.join("result.csv").exists());
        assert!(dir.join("plot.gp").exists());
    }
}

//! Acceptance gate for the toolkit: one test per criterion, each printing a
//! pass/fail line with its runtime (visible under `--nocapture`) and
//! asserting both the stated tolerance and the runtime budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use josephson::bcs::{
    covariance, coupling_for_gap, embed_product_state, odlro_scan, solve_gap, wick_expect,
    QuasiFreeState,
};
use josephson::experiments::{
    ac_run, cluster_check, dc_sweep, energy_sweep, gauge_check, phase_grid, AcParams, Engine,
    GAP_TOL,
};
use josephson::fock::{
    apply_monomial, monomial_expectation, FockBasis, Ladder, SparseOperator, StateVector,
};
use josephson::junction::{
    build_hamiltonian, charge_op, current_op, verify_conservation, Boundary, JunctionSpec,
    Region, RegionSel, Spin,
};
use josephson::linalg;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion<F: FnOnce()>(number: u32, name: &str, budget_s: f64, body: F) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed().as_secs_f64();
    let ok = outcome.is_ok() && elapsed <= budget_s;
    println!(
        "criterion {:02} {}: {} ({:.2}s)",
        number,
        name,
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    if let Err(payload) = outcome {
        std::panic::resume_unwind(payload);
    }
    assert!(
        elapsed <= budget_s,
        "criterion {:02} exceeded its {:.0}s budget: {:.2}s",
        number,
        budget_s,
        elapsed
    );
}

/// Both regions comfortably gapped; small enough for fast exact sweeps.
fn eight_mode_spec() -> JunctionSpec {
    JunctionSpec {
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
    }
}

/// Largest exact-engine model exercised here: 12 modes, both regions gapped.
fn twelve_mode_spec() -> JunctionSpec {
    JunctionSpec {
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
    }
}

/// 12-mode junction whose drive scale dominates every internal scale.
fn weak_link_spec() -> JunctionSpec {
    JunctionSpec {
        l1: 3,
        l2: 3,
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

#[test]
fn criterion_01_canonical_anticommutators() {
    criterion(1, "canonical anticommutation relations", 5.0, || {
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            let basis = FockBasis::new(n).unwrap();
            let ident = SparseOperator::identity(basis);
            for p in 0..n {
                let ap = SparseOperator::ladder(basis, p, false).unwrap();
                let ap_dag = SparseOperator::ladder(basis, p, true).unwrap();
                for q in 0..n {
                    let aq = SparseOperator::ladder(basis, q, false).unwrap();
                    let aq_dag = SparseOperator::ladder(basis, q, true).unwrap();
                    let mut mixed = ap.anticommutator(&aq_dag).unwrap();
                    if p == q {
                        mixed = mixed.sub(&ident).unwrap();
                    }
                    worst = worst
                        .max(mixed.max_abs())
                        .max(ap.anticommutator(&aq).unwrap().max_abs())
                        .max(ap_dag.anticommutator(&aq_dag).unwrap().max_abs());
                }
            }
        }
        assert!(worst <= 1e-12, "anticommutator defect {}", worst);
    });
}

/// Junctions with mixed couplings, signs, and boundaries; 12 modes at most.
fn seeded_spec(rng: &mut ChaCha8Rng) -> JunctionSpec {
    JunctionSpec {
        l1: rng.gen_range(1..=3),
        l2: rng.gen_range(1..=3),
        t_hop: rng.gen_range(-1.0..1.0),
        mu: rng.gen_range(-0.5..0.5),
        g11: rng.gen_range(0.0..2.0),
        g22: rng.gen_range(0.0..2.0),
        g12: rng.gen_range(-1.0..1.0),
        charge_unit: rng.gen_range(0.5..1.5),
        boundary: if rng.gen_bool(0.5) {
            Boundary::Open
        } else {
            Boundary::Periodic
        },
        cross_hop: rng.gen_range(-0.5..0.5),
    }
}

#[test]
fn criterion_02_charge_conservation() {
    criterion(2, "charge conservation", 30.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let spec = seeded_spec(&mut rng);
            let basis = spec.basis().unwrap();
            let split = build_hamiltonian(&spec, basis).unwrap();
            let report = verify_conservation(&split, &spec, basis).unwrap();
            worst = worst
                .max(report.full)
                .max(report.region1)
                .max(report.region2);
        }
        assert!(worst <= 1e-12, "conservation defect {}", worst);
    });
}

#[test]
fn criterion_03_current_reduction() {
    criterion(3, "junction current reduction", 30.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let spec = seeded_spec(&mut rng);
            let basis = spec.basis().unwrap();
            let split = build_hamiltonian(&spec, basis).unwrap();
            let q1 = charge_op(&spec, basis, RegionSel::One).unwrap();
            worst = worst.max(current_op(&split, &q1).unwrap().reduction_residual);
        }
        assert!(worst <= 1e-12, "reduction residual {}", worst);
    });
}

#[test]
fn criterion_04_dc_current_phase_law() {
    criterion(4, "dc current-phase law", 10.0, || {
        let spec = JunctionSpec::two_site(0.1);
        let grid = phase_grid(17);
        for engine in [Engine::Exact, Engine::MeanField] {
            let sweep = dc_sweep(&spec, &grid, engine).unwrap();
            for (&t, &j) in sweep.grid.iter().zip(&sweep.values) {
                assert!(
                    (j + 0.1 * t.sin()).abs() <= 1e-10,
                    "{} engine at {}: {}",
                    engine.name(),
                    t,
                    j
                );
            }
            assert!(sweep.fit.residual <= 1e-10, "fit residual {}", sweep.fit.residual);
        }
        let sym = vec![-2.6, -1.3, -0.4, 0.4, 1.3, 2.6];
        let s = dc_sweep(&spec, &sym, Engine::Exact).unwrap();
        for i in 0..3 {
            assert!(
                (s.values[i] + s.values[5 - i]).abs() <= 1e-10,
                "current is not odd at {}",
                sym[i]
            );
        }
        let base = vec![0.25, 1.1, 2.0];
        let shifted: Vec<f64> = base
            .iter()
            .map(|t| t + 2.0 * std::f64::consts::PI)
            .collect();
        let a = dc_sweep(&spec, &base, Engine::Exact).unwrap();
        let b = dc_sweep(&spec, &shifted, Engine::Exact).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-10, "current is not 2 pi periodic");
        }
    });
}

#[test]
fn criterion_05_junction_energy_law() {
    criterion(5, "junction energy law", 10.0, || {
        let grid = phase_grid(17);
        let two = JunctionSpec::two_site(0.1);
        for engine in [Engine::Exact, Engine::MeanField] {
            let sweep = energy_sweep(&two, &grid, engine).unwrap();
            for (&t, &h) in sweep.grid.iter().zip(&sweep.values) {
                assert!(
                    (h + 0.05 * t.cos()).abs() <= 1e-10,
                    "{} engine at {}: {}",
                    engine.name(),
                    t,
                    h
                );
            }
        }
        // attractive cross coupling binds at zero phase difference on every
        // gapped spec tested here
        let tested = [
            JunctionSpec::two_site(0.1),
            JunctionSpec::two_site(0.5),
            eight_mode_spec(),
            twelve_mode_spec(),
        ];
        for spec in &tested {
            for engine in [Engine::Exact, Engine::MeanField] {
                let fit = energy_sweep(spec, &grid, engine).unwrap().fit;
                assert!(
                    fit.cos_coeff < 0.0,
                    "cos coefficient {} not negative for g12 = {}",
                    fit.cos_coeff,
                    spec.g12
                );
            }
        }
    });
}

#[test]
fn criterion_06_ac_oscillation() {
    criterion(6, "ac oscillation at twice the bias", 120.0, || {
        let spec = weak_link_spec();
        for v in [0.1, 0.25, 0.4] {
            let t_final = 8.0 * 2.0 * std::f64::consts::PI / (2.0 * v);
            let res = ac_run(
                &spec,
                &AcParams {
                    voltage: v,
                    theta0: 0.0,
                    t_final,
                    n_samples: 2048,
                    tol: 1e-6,
                },
            )
            .unwrap();
            assert!(
                (res.peak_omega - res.expected_omega).abs() <= res.binwidth,
                "V = {}: peak {} expected {} binwidth {}",
                v,
                res.peak_omega,
                res.expected_omega,
                res.binwidth
            );
            assert!(
                res.ehrenfest_max <= 1e-4,
                "V = {}: charge-current mismatch {}",
                v,
                res.ehrenfest_max
            );
        }
    });
}

#[test]
fn criterion_07_gauge_shift() {
    criterion(7, "number-phase gauge shift", 20.0, || {
        let spec = eight_mode_spec();
        let grid = phase_grid(9);
        for phi in [
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
            std::f64::consts::PI,
        ] {
            let disc = gauge_check(&spec, phi, &grid).unwrap();
            assert!(disc <= 1e-10, "phi = {}: discrepancy {}", phi, disc);
        }
    });
}

#[test]
fn criterion_08_cluster_factorization() {
    criterion(8, "cluster factorization", 60.0, || {
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
        let report = cluster_check(&spec).unwrap();
        assert!(report.pair_count >= 50, "only {} pairs", report.pair_count);
        assert!(
            report.max_pair_defect <= 1e-10,
            "exact factorization defect {}",
            report.max_pair_defect
        );
        assert!(
            report.max_meanfield_pair_defect <= 1e-10,
            "mean-field factorization defect {}",
            report.max_meanfield_pair_defect
        );
        assert!(
            (report.entangled_defect - 0.5).abs() <= 1e-10,
            "entangled-state defect {} instead of 0.5",
            report.entangled_defect
        );
        assert!(
            report.max_spurious_pattern <= 1e-10,
            "stray pattern current {}",
            report.max_spurious_pattern
        );
        assert!(
            report.min_surviving_pattern > 1e-6,
            "surviving patterns too small to witness: {}",
            report.min_surviving_pattern
        );
    });
}

fn oracle_pair(
    spec: &JunctionSpec,
    theta1: f64,
    theta2: f64,
) -> (FockBasis, StateVector, QuasiFreeState) {
    let sol1 = solve_gap(spec.l1, spec.t_hop, spec.mu, spec.g11, spec.boundary, GAP_TOL)
        .unwrap()
        .with_phase(theta1);
    let sol2 = solve_gap(spec.l2, spec.t_hop, spec.mu, spec.g22, spec.boundary, GAP_TOL)
        .unwrap()
        .with_phase(theta2);
    let basis = spec.basis().unwrap();
    let psi = embed_product_state(spec, basis, &sol1, &sol2).unwrap();
    let state = covariance(spec, &sol1, &sol2).unwrap();
    (basis, psi, state)
}

/// Depth-first sweep over every ladder monomial up to `max_len`, sharing
/// suffix applications so each node costs one ladder pass. Returns the
/// number of monomials compared and the worst defect.
fn oracle_dfs(
    basis: FockBasis,
    psi: &StateVector,
    state: &QuasiFreeState,
    max_len: usize,
) -> (usize, f64) {
    fn level(
        basis: FockBasis,
        psi: &StateVector,
        state: &QuasiFreeState,
        ops: &mut Vec<Ladder>,
        applied: &[Complex64],
        max_len: usize,
        count: &mut usize,
        worst: &mut f64,
    ) {
        if ops.len() == max_len {
            return;
        }
        for mode in 0..basis.n_modes() {
            for dagger in [false, true] {
                let op = Ladder { mode, dagger };
                // extending on the left of the product applies after the
                // suffix already in `applied`
                let next = apply_monomial(basis, &[op], applied);
                ops.push(op);
                let exact = linalg::inner(psi.amplitudes(), &next);
                let mono: Vec<Ladder> = ops.iter().rev().copied().collect();
                let mean = wick_expect(state, &mono).unwrap();
                let defect = (exact - mean).norm();
                if defect > *worst {
                    *worst = defect;
                }
                *count += 1;
                level(basis, psi, state, ops, &next, max_len, count, worst);
                ops.pop();
            }
        }
    }
    let mut ops = Vec::new();
    let mut count = 0;
    let mut worst = 0.0;
    let root = psi.amplitudes().to_vec();
    level(basis, psi, state, &mut ops, &root, max_len, &mut count, &mut worst);
    (count, worst)
}

#[test]
fn criterion_09_wick_oracle_equivalence() {
    criterion(9, "mean-field vs exact expectations", 60.0, || {
        // four modes: every monomial up to length 6
        let two = JunctionSpec::two_site(0.1);
        let (basis4, psi4, state4) = oracle_pair(&two, 0.7, 0.0);
        let (count4, worst4) = oracle_dfs(basis4, &psi4, &state4, 6);
        assert_eq!(count4, 299_592);
        assert!(worst4 <= 1e-10, "4-mode defect {}", worst4);

        // twelve modes: every monomial up to length 4, then seeded longer
        // monomials covering every creator/annihilator pattern
        let big = twelve_mode_spec();
        let (basis12, psi12, state12) = oracle_pair(&big, 0.9, 0.2);
        let (count12, worst12) = oracle_dfs(basis12, &psi12, &state12, 4);
        assert_eq!(count12, 346_200);
        assert!(worst12 <= 1e-10, "12-mode defect {}", worst12);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst_long: f64 = 0.0;
        for len in [5usize, 6] {
            for pattern in 0..(1u32 << len) {
                for _ in 0..40 {
                    let ops: Vec<Ladder> = (0..len)
                        .map(|i| Ladder {
                            mode: rng.gen_range(0..12),
                            dagger: pattern >> i & 1 == 1,
                        })
                        .collect();
                    let exact = monomial_expectation(basis12, &ops, &psi12).unwrap();
                    let mean = wick_expect(&state12, &ops).unwrap();
                    worst_long = worst_long.max((exact - mean).norm());
                }
            }
        }
        assert!(worst_long <= 1e-10, "long-monomial defect {}", worst_long);
    });
}

/// `b^dag_{to} b_{from}`: move a full on-site pair between sites.
fn pair_hop(spec: &JunctionSpec, to: (Region, usize), from: (Region, usize)) -> [Ladder; 4] {
    [
        Ladder::create(spec.mode(to.0, to.1, Spin::Up)),
        Ladder::create(spec.mode(to.0, to.1, Spin::Down)),
        Ladder::annihilate(spec.mode(from.0, from.1, Spin::Down)),
        Ladder::annihilate(spec.mode(from.0, from.1, Spin::Up)),
    ]
}

#[test]
fn criterion_10_long_range_order() {
    criterion(10, "pair-correlation plateau", 10.0, || {
        // mu off half filling: the bipartite symmetry at mu = 0 zeroes the
        // even-separation normal correlations, hollowing out the comparison
        let m = 64;
        let coupling = coupling_for_gap(m, 1.0, 0.5, Boundary::Periodic, 1.0).unwrap();
        let sol = solve_gap(m, 1.0, 0.5, coupling, Boundary::Periodic, GAP_TOL).unwrap();
        assert!((sol.delta - 1.0).abs() <= 1e-9, "gap {}", sol.delta);
        let scan = odlro_scan(&sol, m / 2).unwrap();
        assert!(
            scan.deviations[2] >= 100.0 * scan.deviations[m / 2],
            "near {} vs far {}",
            scan.deviations[2],
            scan.deviations[m / 2]
        );

        let spec = JunctionSpec {
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
        let state = covariance(&spec, &sol1, &sol2).unwrap();
        let amp = sol.mean_pair_amplitude();
        let expect12 = Complex64::from_polar(amp * amp, sol2.theta - sol1.theta);
        let expect21 = expect12.conj();
        let mut worst: f64 = 0.0;
        for x in 0..m {
            for y in 0..m {
                let c12 = wick_expect(
                    &state,
                    &pair_hop(&spec, (Region::One, x), (Region::Two, y)),
                )
                .unwrap();
                let c21 = wick_expect(
                    &state,
                    &pair_hop(&spec, (Region::Two, y), (Region::One, x)),
                )
                .unwrap();
                worst = worst
                    .max((c12 - expect12).norm())
                    .max((c21 - expect21).norm());
            }
        }
        assert!(worst <= 1e-12, "cross-region defect {}", worst);
    });
}

#[test]
fn criterion_11_deterministic_csv() {
    criterion(11, "byte-identical sweep reruns", 5.0, || {
        let tmp = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("determinism");
        let _ = std::fs::remove_dir_all(&tmp);
        std::fs::create_dir_all(&tmp).unwrap();
        let config_path = tmp.join("run.conf");
        let config_text = concat!(
            "# minimal junction sweep\n",
            "model.L1 = 1\n",
            "model.L2 = 1\n",
            "model.g12 = 0.1\n",
            "experiment.kind = dc\n",
            "experiment.grid = 17\n",
        );
        std::fs::write(&config_path, config_text).unwrap();
        let mut outputs = Vec::new();
        for run in ["first", "second"] {
            let out_dir = tmp.join(run);
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_josephson"))
                .arg("dc-sweep")
                .arg("--config")
                .arg(&config_path)
                .arg("--out")
                .arg(&out_dir)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "dc-sweep exited with {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(std::fs::read(out_dir.join("result.csv")).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "reruns differ");
        assert!(!outputs[0].is_empty());
    });
}

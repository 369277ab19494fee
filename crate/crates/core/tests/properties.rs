use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use gsd_core::ipea::{wrap_time, Term, WrappedEvolution};
use gsd_core::model::{build_hamiltonian, diagonalize, optimize_trial, HeisenbergParams};
use gsd_core::noise::dephase;
use gsd_core::pea::{compute_spectrum, evolve_probe, sample_series};
use gsd_core::pulsec::{
    canonical_angle, compile_controlled_evolution, parse_program, program_unitary, verify_equivalence,
};
use gsd_core::qcore::{expm_hermitian, DensityMatrix, OperatorMatrix, StateVector};
use gsd_core::tomo::{magnetization, purity_projection, spectral_weights};
use gsd_core::{Params, State};

fn params() -> impl Strategy<Value = Params> {
    (0.2f64..3.0, 0.0f64..2.0).prop_map(|(j, r)| HeisenbergParams::new(j, r * j).unwrap())
}

fn state(dim: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| StateVector::normalized(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn mixed(dim: usize) -> impl Strategy<Value = DensityMatrix<f64>> {
    (state(dim), state(dim), 0.0f64..1.0).prop_map(|(a, b, w)| a.density().mix(&b.density(), w).unwrap())
}

fn hermitian(dim: usize) -> impl Strategy<Value = OperatorMatrix<f64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
        let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in r..dim {
                let (a, b) = v[r * dim + c];
                let z = if r == c { Complex64::new(a, 0.0) } else { Complex64::new(a, b) };
                e[r * dim + c] = z;
                e[c * dim + r] = z.conj();
            }
        }
        OperatorMatrix::hermitian(dim, e).unwrap()
    })
}

fn min_eigenvalue(rho: &DensityMatrix<f64>) -> f64 {
    rho.eigenvalues().unwrap().into_iter().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_preserves_trace_and_positivity(h in hermitian(8), t in -10.0f64..10.0, rho in mixed(8)) {
        let u = expm_hermitian(&h, t).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
        let out = rho.evolve(&u).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(min_eigenvalue(&out) > -1e-10);
        prop_assert!((out.purity() - rho.purity()).abs() < 1e-10);
    }

    #[test]
    fn probe_coherence_matches_level_sum(p in params(), psi in state(4), t in 0.0f64..50.0) {
        let h = build_hamiltonian(&p).unwrap();
        let table = diagonalize(&p).unwrap();
        let expected: Complex64 = table
            .levels
            .iter()
            .map(|l| Complex64::from_polar(0.5 * l.vector.overlap(&psi).unwrap(), l.energy * t))
            .sum();
        let got = evolve_probe(&psi, &h, t).unwrap().m;
        prop_assert!((got - expected).norm() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn spectrum_satisfies_parseval(p in params(), psi in state(4), n in 16usize..160) {
        let dt = 0.8 / p.j;
        prop_assume!(diagonalize(&p).unwrap().energies().iter().all(|e| e.abs() * dt < PI));
        let records = sample_series(&psi, &build_hamiltonian(&p).unwrap(), dt, n).unwrap();
        let spectrum = compute_spectrum(&records, p.j).unwrap();
        prop_assert_eq!(spectrum.grid.len(), n);
        let lhs: f64 = spectrum.grid.iter().map(|g| g.amplitude.norm_sqr()).sum();
        let rhs: f64 = records.iter().map(|r| r.m.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn wrapped_factors_equal_direct_ones(p in params(), t in 0.0f64..1e6) {
        let t = t / p.j;
        for term in Term::ALL {
            let wrapped = wrap_time(t, term, &p).unwrap();
            if let Some(period) = term.period(&p) {
                prop_assert!((0.0..period).contains(&wrapped));
            }
            let g = term.generator(&p).unwrap();
            let diff = expm_hermitian(&g, t).unwrap().max_abs_diff(&expm_hermitian(&g, wrapped).unwrap()).unwrap();
            prop_assert!(diff < 1e-8, "{term:?} t={t} diff={diff}");
        }
    }

    #[test]
    fn wrapped_evolution_is_exact(p in params(), t in 0.0f64..200.0, psi in state(4)) {
        let exact = psi.apply(&expm_hermitian(&build_hamiltonian(&p).unwrap(), t).unwrap()).unwrap();
        let split = psi.apply(&WrappedEvolution::new(&p).unwrap().unitary(t).unwrap()).unwrap();
        prop_assert!((exact.inner(&split).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn dephasing_is_a_channel(rho in mixed(8), d1 in 0.0f64..3.0, d2 in 0.0f64..3.0, q1 in 0usize..3, q2 in 0usize..3) {
        let ab = dephase(&dephase(&rho, q1, d1, 1.0).unwrap(), q2, d2, 0.4).unwrap();
        let ba = dephase(&dephase(&rho, q2, d2, 0.4).unwrap(), q1, d1, 1.0).unwrap();
        prop_assert!((ab.trace() - 1.0).abs() < 1e-12);
        prop_assert!(min_eigenvalue(&ab) > -1e-10);
        for (x, y) in ab.entries().iter().zip(ba.entries()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        for k in 0..8 {
            prop_assert!((ab.get(k, k) - rho.get(k, k)).norm() < 1e-15);
        }
    }

    #[test]
    fn metrics_are_consistent(a in mixed(4), b in mixed(4), w in 0.0f64..1.0, p in params()) {
        let mix = a.mix(&b, w).unwrap();
        let lin = w * magnetization(&a).unwrap() + (1.0 - w) * magnetization(&b).unwrap();
        prop_assert!((magnetization(&mix).unwrap() - lin).abs() < 1e-12);

        let table = diagonalize(&p).unwrap();
        let (q, proj) = purity_projection(&mix, Some(&table.ground().vector)).unwrap();
        prop_assert!(proj.unwrap() <= 1.0 + 1e-12, "F > sqrt(Q): Q={q}");

        let weights = spectral_weights(&mix, &table).unwrap();
        prop_assert!((weights.values().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(weights.values().all(|&x| x >= -1e-15));
    }

    #[test]
    fn eigenstates_carry_unit_indicator_weight(p in params(), k in 0usize..4) {
        let table = diagonalize(&p).unwrap();
        let weights = spectral_weights(&table.levels[k].vector.density(), &table).unwrap();
        for (label, w) in weights {
            let expect = if label == table.levels[k].label { 1.0 } else { 0.0 };
            prop_assert!((w - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn compiled_evolution_matches_oracle(p in params(), s in 0.0f64..1.0) {
        let t = s * 8.0 * PI / p.j;
        let prog = compile_controlled_evolution(t, &p).unwrap();
        let oracle = expm_hermitian(&build_hamiltonian(&p).unwrap(), t).unwrap().controlled_by_last(1);
        let (eq, dev) = verify_equivalence(&program_unitary(&prog).unwrap(), &oracle).unwrap();
        prop_assert!(eq, "deviation {dev}");

        let text = prog.to_text().unwrap();
        let back = parse_program::<f64>(&text).unwrap();
        prop_assert_eq!(back.to_text().unwrap(), text);
        prop_assert_eq!(back, prog);
    }

    #[test]
    fn canonical_angles_stay_in_range(theta in -1e4f64..1e4) {
        let c = canonical_angle(theta);
        prop_assert!(c > -2.0 * PI && c <= 2.0 * PI);
        let turns = (theta - c) / (4.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn optimizer_finds_the_fixed_trial(p in params()) {
        let tp = optimize_trial(&p).unwrap();
        prop_assert!((tp.theta + PI / 4.0).abs() < 1e-6);
        prop_assert!((tp.phi - PI / 2.0).abs() < 1e-6);
    }
}

use sepcheck_core::enumeration::{is_product, product_index};
use sepcheck_core::linalg::{hs_distance, partial_transpose, BipartiteDims, Subsystem};
use sepcheck_core::scheduler::Certificate;
use sepcheck_core::states::{
    bell, isotropic, max_mixed, random_rational_mixture, werner, Bell, RandomSeparableSpec,
};
use sepcheck_core::{run, A2Mode, DensityMatrix, EntanglementCertificate, RunConfig, VerdictKind};

fn dims22() -> BipartiteDims {
    BipartiteDims::new(2, 2).unwrap()
}

/// Checks whatever certificate the verdict carries against the input state.
fn assert_sound(rho: &DensityMatrix, cert: &Certificate, tol: f64) {
    match cert {
        Certificate::Decomposition(d) => {
            assert!(d.len() <= rho.dim() * rho.dim());
            let total: f64 = d.pairs.iter().map(|(w, _)| w).sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(hs_distance(&d.reconstruct(), rho.matrix()).unwrap() <= tol);
            for (w, atom) in &d.pairs {
                assert!(*w > 0.0);
                assert!(is_product(&atom.to_pure(), 1e-10).is_product);
            }
        }
        Certificate::Entanglement(EntanglementCertificate::NegativePartialTranspose {
            min_eigenvalue,
            eigenvector,
            ..
        }) => {
            let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::B).unwrap();
            let value = pt.expectation(eigenvector).re;
            assert!((value - min_eigenvalue).abs() < 1e-9);
            assert!(*min_eigenvalue < 0.0);
        }
        _ => {}
    }
}

#[test]
fn rational_mixtures_found_at_low_height() {
    for seed in 0..10 {
        let spec = RandomSeparableSpec {
            seed,
            count: 3,
            dims: dims22(),
            max_denominator: 2,
        };
        let mix = random_rational_mixture(&spec).unwrap();
        let v = run(&mix.state, &RunConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Separable, "seed {seed}");
        assert_sound(&mix.state, &v.certificate, 1e-8);
        let last = v.separable_counters.indices_visited - 1;
        let height = product_index(last, dims22()).height();
        assert!(
            height <= spec.max_denominator + 1,
            "seed {seed}: height {height}"
        );
    }
}

#[test]
fn verdicts_are_sound_and_exclusive() {
    let mut states = vec![max_mixed(dims22()), bell(Bell::PsiMinus)];
    for p in [0.1, 0.3, 0.5, 0.9] {
        states.push(isotropic(p, 2).unwrap());
        states.push(werner(p, 2).unwrap());
    }
    for rho in &states {
        let mut kinds = Vec::new();
        for mode in [A2Mode::Grow, A2Mode::Tuple] {
            for eta in [0.05, 0.2] {
                let cfg = RunConfig {
                    eta,
                    mode,
                    budget: 3000,
                    ..RunConfig::default()
                };
                let v = run(rho, &cfg).unwrap();
                assert_sound(rho, &v.certificate, cfg.hull_tol);
                kinds.push(v.kind);
            }
        }
        let ent = kinds.contains(&VerdictKind::Entangled);
        let sep = kinds.contains(&VerdictKind::Separable);
        assert!(!(ent && sep), "{kinds:?}");
    }
}

#[test]
fn flags_respect_budget_and_order() {
    let rho = isotropic(1.0 / 3.0, 2).unwrap();
    let cfg = RunConfig {
        eta: 0.2,
        ..RunConfig::default()
    };
    let v = run(&rho, &cfg).unwrap();
    assert_eq!(v.kind, VerdictKind::Border);
    let (f1, f2) = (v.flags.f1_step.unwrap(), v.flags.f2_step.unwrap());
    assert_eq!(v.steps, f1.max(f2));
    assert_eq!(f1, 1);
    assert!(v.stream_steps.separable_rho_s <= v.steps);
}

#[test]
fn rank_deficient_inputs_never_border() {
    let rho = sepcheck_core::states::validate(
        &sepcheck_core::ComplexMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]),
        dims22(),
    )
    .unwrap();
    let v = run(&rho, &RunConfig::default()).unwrap();
    assert!(v.range_mode && !v.rho_e_valid);
    assert_eq!(v.kind, VerdictKind::Separable);
    assert_sound(&rho, &v.certificate, 1e-8);
}

#[test]
fn identical_runs_identical_json() {
    let spec = RandomSeparableSpec {
        seed: 7,
        count: 3,
        dims: dims22(),
        max_denominator: 3,
    };
    let rho = random_rational_mixture(&spec).unwrap().state;
    let a = serde_json::to_string(&run(&rho, &RunConfig::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&rho, &RunConfig::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

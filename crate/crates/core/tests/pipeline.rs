use photomo_core::{
    build_state, build_table, fidelity, make_grid, reconstruct, Complex64, Error, ForwardModel, KernelParams, Locking,
    SRange, Shots, SqueezeSpec, StateSpec,
};

#[test]
fn lossy_round_trip_through_public_api() {
    let rho = build_state(&StateSpec::Thermal(0.3), 10).unwrap().rho;
    let grid = make_grid(4.0, 32, 32).unwrap();
    let model = ForwardModel {
        eta: 0.8,
        ..ForwardModel::ideal(9)
    };
    let table = build_table(&rho, &grid, &model).unwrap();
    let p = KernelParams::auto(0.8, 1.0).unwrap();
    let report = reconstruct(&table, &p, &grid, 10).unwrap();
    assert!(fidelity(&report.rho_hat, &rho).unwrap() > 0.99);
    assert!((report.raw_trace - 1.0).abs() < 0.02);
    assert!(report.n_truncation_error_estimate.is_finite());
}

#[test]
fn table_and_kernel_must_agree() {
    let rho = build_state(&StateSpec::Fock(0), 6).unwrap().rho;
    let grid = make_grid(3.0, 8, 8).unwrap();
    let table = build_table(&rho, &grid, &ForwardModel::ideal(5)).unwrap();
    let wrong_eta = KernelParams::new(-0.6, 0.7, 1.0).unwrap();
    assert!(matches!(reconstruct(&table, &wrong_eta, &grid, 6), Err(Error::TableMismatch(_))));
    let other_grid = make_grid(3.5, 8, 8).unwrap();
    let p = KernelParams::new(-0.5, 1.0, 1.0).unwrap();
    assert!(matches!(reconstruct(&table, &p, &other_grid, 6), Err(Error::TableMismatch(_))));
}

#[test]
fn squeezing_reopens_the_admissible_interval() {
    assert!(matches!(
        KernelParams::auto(0.4, 1.0),
        Err(Error::Inadmissible { range: SRange::Empty, .. })
    ));
    let zeta = SqueezeSpec::from_delta(3f64.sqrt(), 0.0).unwrap();
    let p = KernelParams::auto(0.4, zeta.delta()).unwrap();
    assert!((p.s - (-1.0 - 0.5) / 2.0).abs() < 1e-12);
}

#[test]
fn sampled_tables_are_seed_deterministic() {
    let rho = build_state(&StateSpec::Coherent(Complex64::new(0.6, -0.2)), 10).unwrap().rho;
    let grid = make_grid(3.0, 6, 6).unwrap();
    let model = |seed| ForwardModel {
        shots: Shots::Count(5000),
        seed,
        locking: Locking::Fixed,
        ..ForwardModel::ideal(6)
    };
    let a = build_table(&rho, &grid, &model(3)).unwrap();
    let b = build_table(&rho, &grid, &model(3)).unwrap();
    let c = build_table(&rho, &grid, &model(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.data(), c.data());
}

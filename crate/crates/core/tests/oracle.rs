use dollard_core::dense::DenseOracle;
use dollard_core::moller::{elastic_unitarity_defect, s_matrix_on_packet, Reference};
use dollard_core::*;

fn tiny() -> (Grid, State, PotentialSpec) {
    let g = make_grid(64, 32.0, 1.0).unwrap();
    let psi = gaussian_packet(&g, &PacketSpec::new(-4.0, 2.0, 1.5)).unwrap();
    (g, psi, PotentialSpec::coulomb(0.5, 1.0))
}

#[test]
fn split_step_matches_dense_propagator() {
    let (g, psi, pot) = tiny();
    let oracle = DenseOracle::new(&g, &pot).unwrap();
    let cfg = StepperConfig::new(0.001);
    let t = 0.2;
    let split = full_propagate(&psi, 0.0, t, &pot, &SwitchingSpec::off(), &cfg).unwrap();
    let exact = oracle.propagate(&psi, t);
    let d = distance(&split, &exact).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn split_step_is_second_order() {
    let (g, psi, pot) = tiny();
    let oracle = DenseOracle::new(&g, &pot).unwrap();
    let exact = oracle.propagate(&psi, 2.0);
    let err = |dt: f64| {
        let cfg = StepperConfig::new(dt);
        let s = full_propagate(&psi, 0.0, 2.0, &pot, &SwitchingSpec::off(), &cfg).unwrap();
        distance(&s, &exact).unwrap()
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn dense_propagator_matrix_agrees_with_its_action() {
    let (g, psi, pot) = tiny();
    let oracle = DenseOracle::new(&g, &pot).unwrap();
    let via_matrix = oracle.apply(&oracle.propagator(0.7), &psi);
    assert!(distance(&via_matrix, &oracle.propagate(&psi, 0.7)).unwrap() < 1e-12);
}

#[test]
fn packet_s_matrix_matches_dense_oracle() {
    let (g, psi, pot) = tiny();
    let psi = psi.to_position();
    let oracle = DenseOracle::new(&g, &pot).unwrap();
    let cfg = StepperConfig::new(0.001);
    let horizon = 0.1;
    let split = s_matrix_on_packet(
        &psi,
        horizon,
        &Reference::Dollard,
        &pot,
        &SwitchingSpec::off(),
        &cfg,
    )
    .unwrap();
    let dense = oracle.apply(&oracle.dollard_s_matrix(horizon, pot.alpha), &psi);
    let d = distance(&split, &dense).unwrap();
    assert!(d < 1e-5, "{d}");
    let hist = elastic_unitarity_defect(&split, &dense).unwrap();
    assert!(hist < 1e-5, "{hist}");
}

#[test]
fn dense_oracle_refuses_large_grids() {
    let g = make_grid(2048, 1024.0, 1.0).unwrap();
    assert!(DenseOracle::new(&g, &PotentialSpec::coulomb(0.5, 1.0)).is_err());
}

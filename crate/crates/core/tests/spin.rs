use extsqd_core::config::Sector;
use extsqd_core::hamiltonian::hubbard_chain;
use extsqd_core::observables::{
    classify_roots, occupancy_profile, spin_correlation, spin_report, total_s_squared, OrbitalGroup, SpinClass,
};
use extsqd_core::pipelines::{run_fci, SolverOptions};
use extsqd_core::sampling::update_model;

fn two_site(u: f64) -> extsqd_core::pipelines::CIState {
    let h = hubbard_chain(2, 1.0, u, false).unwrap();
    run_fci(&h, Sector::new(2, 1, 1).unwrap(), 4, 100, &SolverOptions::default()).unwrap().0
}

#[test]
fn two_site_hubbard_spectrum_and_spin() {
    let u = 4.0;
    let st = two_site(u);
    let ground = (u - (u * u + 16.0f64).sqrt()) / 2.0;
    assert!((st.energies[0] - ground).abs() < 1e-10);
    assert!(st.energies[1].abs() < 1e-10);
    assert!(total_s_squared(&st.root(0)).abs() < 1e-8);
    assert!((total_s_squared(&st.root(1)) - 2.0).abs() < 1e-8);
    let labels: Vec<String> = classify_roots(&st).into_iter().map(|l| l.label).collect();
    assert_eq!(labels, vec!["S0", "T1", "S1", "S2"]);
}

#[test]
fn large_u_singlet_is_antiferromagnetic() {
    let st = two_site(50.0);
    let (raw, connected) =
        spin_correlation(&st.root(0), &OrbitalGroup::new("left", [0]), &OrbitalGroup::new("right", [1])).unwrap();
    assert!((raw + 0.75).abs() < 0.02, "{raw}");
    assert!((connected - raw).abs() < 1e-12);
}

#[test]
fn occupancy_profile_agrees_with_recovery_model() {
    let st = two_site(3.0);
    let v = st.root(0);
    let p = occupancy_profile(&v);
    let m = update_model(&v);
    for k in 0..2 {
        assert!((p.alpha[k] - m.occ_alpha[k]).abs() < 1e-12);
        assert!((p.beta[k] - m.occ_beta[k]).abs() < 1e-12);
    }
    assert!((p.total.iter().sum::<f64>() - 2.0).abs() < 1e-10);
}

#[test]
fn report_covers_groups_and_pairs() {
    let st = two_site(4.0);
    let groups = [OrbitalGroup::new("left", [0]), OrbitalGroup::new("right", [1])];
    let rep = spin_report(&st, &groups).unwrap();
    assert_eq!(rep.len(), 4);
    assert_eq!(rep[0].groups.len(), 2);
    assert_eq!(rep[0].correlations.len(), 1);
    assert!((rep[0].groups[0].n_up - 0.5).abs() < 1e-10);
}

#[test]
fn mixed_states_are_labelled_not_rejected() {
    use extsqd_core::config::Configuration;
    use extsqd_core::pipelines::{CIState, Method};
    use nalgebra::DMatrix;
    // a single open-shell determinant is half singlet, half triplet
    let s = Sector::new(2, 1, 1).unwrap();
    let basis = extsqd_core::config::SubspaceBasis::new([Configuration::from_occupations(2, [0], [1])]);
    let st = CIState::new(s, basis, DMatrix::from_element(1, 1, 1.0), vec![0.0], Method::Sqd).unwrap();
    let l = &classify_roots(&st)[0];
    assert_eq!(l.class, SpinClass::Mixed);
    assert!(l.label.starts_with("mixed("));
}

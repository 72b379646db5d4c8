//! One test per acceptance criterion. All tests share a single verifier so the
//! expensive standard runs are computed once per process.
//!
//! Thresholds live as constants in `annuflow::verify`; the one-line outcome of
//! each criterion is printed (`cargo test --test acceptance -- --nocapture`).

use std::sync::OnceLock;

use annuflow::verify::{Verdict, Verifier};

fn verifier() -> &'static Verifier {
    static VERIFIER: OnceLock<Verifier> = OnceLock::new();
    VERIFIER.get_or_init(|| Verifier::new(false))
}

fn criterion(id: u8) {
    let outcome = verifier().check(id);
    println!("{outcome}");
    assert_ne!(outcome.verdict, Verdict::Skipped, "{outcome}");
    assert!(outcome.passed(), "{outcome}");
}

#[test]
fn c01_couette_steady_state() {
    criterion(1);
}

#[test]
fn c02_annular_poiseuille_steady_state() {
    criterion(2);
}

#[test]
fn c03_fourth_order_spatial_convergence() {
    criterion(3);
}

#[test]
fn c04_second_order_temporal_convergence() {
    criterion(4);
}

#[test]
fn c05_axial_velocity_vanishes_without_gradient() {
    criterion(5);
}

#[test]
fn c06_concentration_bounded_and_monotone() {
    criterion(6);
}

#[test]
fn c07_mid_gap_viscosity_grows() {
    criterion(7);
}

#[test]
fn c08_swirl_profile_concavity() {
    criterion(8);
}

#[test]
fn c09_axial_flow_suppressed_by_thickening() {
    criterion(9);
}

#[test]
fn c10_models_stay_close() {
    criterion(10);
}

#[test]
fn c11_rest_state_and_determinism() {
    criterion(11);
}

#[test]
fn c12_grid_self_convergence() {
    criterion(12);
}

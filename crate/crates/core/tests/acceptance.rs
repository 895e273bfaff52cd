//! Acceptance criteria A1-A10 over their full field lists; one line per criterion.

use gl2modp::acceptance::{default_fields, run};

const SEED: u64 = 2024;

fn criterion(id: &str) {
    let report = run(id, &default_fields(id), SEED);
    println!("{}", report.line());
    assert!(report.pass(), "{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
}

#[test]
fn a01_hecke_quadratic_relation() {
    criterion("A1");
}

#[test]
fn a02_exactness_at_q_equals_p() {
    criterion("A2");
}

#[test]
fn a03_envelope_dimensions() {
    criterion("A3");
}

#[test]
fn a04_socle_basis_hecke_action() {
    criterion("A4");
}

#[test]
fn a05_dictionary() {
    criterion("A5");
}

#[test]
fn a06_full_hecke_extension() {
    criterion("A6");
}

#[test]
fn a07_tree_window_is_supersingular() {
    criterion("A7");
}

#[test]
fn a08_iso_restriction_round_trip() {
    criterion("A8");
}

#[test]
fn a09_trivial_pattern_fixed_class() {
    criterion("A9");
}

#[test]
fn a10_supersingular_census() {
    criterion("A10");
}

//! One test per acceptance criterion; each prints a PASS/FAIL line.

use bottleneck::regression::run_criterion;

fn criterion(id: u8) {
    let row = run_criterion(id);
    println!(
        "criterion {:>2} {:<30} {}  {}",
        row.id,
        row.name,
        if row.passed { "PASS" } else { "FAIL" },
        row.detail
    );
    assert!(row.passed, "criterion {} failed: {}", row.id, row.detail);
}

#[test]
fn c01_formula_regression() {
    criterion(1);
}

#[test]
fn c02_ambient_stability() {
    criterion(2);
}

#[test]
fn c03_plane_curves() {
    criterion(3);
}

#[test]
fn c04_complete_intersection_curves() {
    criterion(4);
}

#[test]
fn c05_surfaces() {
    criterion(5);
}

#[test]
fn c06_epsilon_oracle() {
    criterion(6);
}

#[test]
fn c07_schubert_oracle() {
    criterion(7);
}

#[test]
fn c08_solver_analytic_anchors() {
    criterion(8);
}

#[test]
fn c09_solver_reference_anchors() {
    criterion(9);
}

#[test]
fn c10_system_fidelity() {
    criterion(10);
}

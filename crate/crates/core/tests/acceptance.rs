//! Acceptance gate: every criterion of the build contract is asserted at its
//! stated tolerance, one test per criterion. Run with `-- --nocapture` to see
//! the pass/fail lines.

use abel_volterra::acceptance::{self, CriterionResult};

fn check(r: CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_1_preliminary_example_oracle() {
    check(acceptance::criterion_1());
}

#[test]
fn criterion_2_constant_modulation_abel_oracle() {
    check(acceptance::criterion_2());
}

#[test]
fn criterion_3_scaling_identity() {
    check(acceptance::criterion_3());
}

#[test]
fn criterion_4_calibration_residual() {
    check(acceptance::criterion_4());
}

#[test]
fn criterion_5_zero_catalog() {
    check(acceptance::criterion_5());
}

#[test]
fn criterion_6_triangulation_m0() {
    check(acceptance::criterion_6());
}

#[test]
fn criterion_7_divergence_demonstration() {
    check(acceptance::criterion_7());
}

#[test]
fn criterion_8_invariant_suites() {
    check(acceptance::criterion_8());
}

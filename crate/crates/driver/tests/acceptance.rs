//! Every acceptance criterion at its stated tolerance and time budget.
//!
//! Run with `cargo test -p ergolin-driver --test acceptance -- --nocapture` to see
//! the PASS/FAIL lines. `ERGOLIN_SEED` overrides the master seed (42).

use ergolin_driver::suite::run_criterion;

fn seed() -> u64 {
    std::env::var("ERGOLIN_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(42)
}

fn check(id: u8) {
    let r = run_criterion(id, seed()).expect("criterion exists");
    println!("{}", r.line());
    assert!(r.passed, "criterion {id} failed: {}", r.detail);
}

#[test]
fn c01_denjoy_koksma_certificate() {
    check(1);
}

#[test]
fn c02_oren_dichotomy() {
    check(2);
}

#[test]
fn c03_rational_rotation_coboundary() {
    check(3);
}

#[test]
fn c04_kac_clt() {
    check(4);
}

#[test]
fn c05_doubling_coboundary_obstruction() {
    check(5);
}

#[test]
fn c06_kernel_eigen_relation() {
    check(6);
}

#[test]
fn c07_product_cross_check() {
    check(7);
}

#[test]
fn c08_classifier_cases() {
    check(8);
}

#[test]
fn c09_log_norm_slope() {
    check(9);
}

#[test]
fn c10_nonuniversality_certificate() {
    check(10);
}

#[test]
fn c11_entire_normal_form() {
    check(11);
}

#[test]
fn c12_zero_one_echo() {
    check(12);
}

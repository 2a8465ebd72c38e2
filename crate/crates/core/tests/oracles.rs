//! Values frozen from independent 30-digit brute-force lattice sums.

#![allow(clippy::excessive_precision)]

use std::path::PathBuf;

use num_complex::Complex64;
use thetanull::charalg::Characteristic;
use thetanull::io::{read_json, ZVector};
use thetanull::siegel::PeriodMatrix;
use thetanull::thetanum::{eval_theta, eval_thetanull, jet_at_zero, ThetaConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn omega_g3() -> PeriodMatrix {
    read_json(&fixture("omega_g3.json")).unwrap()
}

fn ch(s: &str) -> Characteristic {
    s.parse().unwrap()
}

fn assert_close(got: Complex64, want: Complex64, bound: f64) {
    let err = (got - want).norm();
    // oracle digits carry ~1e-19 of their own rounding
    assert!(err <= bound + 1e-18, "got {got}, want {want}, err {err:e} > bound {bound:e}");
}

#[test]
fn thetanull_at_i() {
    let omega = PeriodMatrix::scalar(Complex64::new(0.0, 1.0)).unwrap();
    let v = eval_thetanull(&ch("[0|0]"), &omega, &ThetaConfig::default()).unwrap();
    assert_close(v.value, Complex64::new(1.0864348112133080146, 0.0), v.tail_bound);
    assert!(v.tail_bound <= 1e-10);
}

#[test]
fn second_derivative_at_i() {
    let omega = PeriodMatrix::scalar(Complex64::new(0.0, 1.0)).unwrap();
    let jet = jet_at_zero(&ch("[0|0]"), &omega, &ThetaConfig::default()).unwrap();
    assert_close(jet.hessian[(0, 0)], Complex64::new(-3.4131356215119423801, 0.0), jet.hessian_bound);
}

#[test]
fn genus_three_thetanulls() {
    let omega = omega_g3();
    let cfg = ThetaConfig::default();
    let cases = [
        ("[000|000]", 1.1192687296241632003, 0.09857969197720477137),
        ("[110|110]", 0.29463414379155673726, -0.067669140197369037663),
        ("[011|001]", 0.0, 0.0),
        ("[101|100]", 0.0, 0.0),
    ];
    for (delta, re, im) in cases {
        let v = eval_thetanull(&ch(delta), &omega, &cfg).unwrap();
        assert_close(v.value, Complex64::new(re, im), v.tail_bound);
    }
}

#[test]
fn genus_three_at_complex_z() {
    let omega = omega_g3();
    let z = read_json::<ZVector>(&fixture("z_g3.json")).unwrap().to_complex().unwrap();
    let v = eval_theta(&ch("[110|100]"), &omega, &z, &ThetaConfig::default()).unwrap();
    assert_close(v.value, Complex64::new(-0.31115446027963220725, 0.013508808085566962657), v.tail_bound);
}

#[test]
fn looser_tolerance_is_still_honest() {
    let omega = omega_g3();
    let cfg = ThetaConfig::with_tol(1e-4);
    let v = eval_thetanull(&ch("[000|000]"), &omega, &cfg).unwrap();
    assert!(v.tail_bound <= 1e-4);
    assert_close(v.value, Complex64::new(1.1192687296241632003, 0.09857969197720477137), v.tail_bound);
}

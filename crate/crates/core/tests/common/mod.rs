#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

/// Composite Simpson rule on `[a, b]` with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn gaussian(x: f64) -> f64 {
    (-x * x).exp()
}

pub fn gaussian_x(x: f64) -> f64 {
    -2.0 * x * (-x * x).exp()
}

pub fn sech2(x: f64) -> f64 {
    1.0 / x.cosh().powi(2)
}

pub fn sech2_x(x: f64) -> f64 {
    -2.0 * x.tanh() / x.cosh().powi(2)
}

/// Five-point central first and second differences of periodic samples.
pub fn central_differences(f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = f.len();
    let at = |j: usize, d: isize| f[(j as isize + d).rem_euclid(n as isize) as usize];
    let d1 = (0..n)
        .map(|j| (-at(j, 2) + 8.0 * at(j, 1) - 8.0 * at(j, -1) + at(j, -2)) / (12.0 * h))
        .collect();
    let d2 = (0..n)
        .map(|j| (-at(j, 2) + 16.0 * at(j, 1) - 30.0 * at(j, 0) + 16.0 * at(j, -1) - at(j, -2)) / (12.0 * h * h))
        .collect();
    (d1, d2)
}

pub fn dispwave(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dispwave"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .next()
        .unwrap_or("")
        .to_string()
}

pub fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    first_line(&path)
}

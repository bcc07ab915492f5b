//! Small dense polynomial helpers. Coefficients are stored ascending by power,
//! `c[0] + c[1] x + ... + c[k] x^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Index of the highest coefficient that is not exactly zero, or `None` for the zero polynomial.
pub fn degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|&v| v != 0.0)
}

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

pub fn eval_complex(c: &[f64], x: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &v| acc * x + v)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &v)| i as f64 * v)
        .collect()
}

/// Product of two polynomials (coefficient convolution).
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Roots as eigenvalues of the companion matrix. High-order zero coefficients
/// are dropped first; a constant polynomial has no roots.
pub fn roots(c: &[f64]) -> Vec<Complex64> {
    let n = match degree(c) {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

fn trim(mut c: Vec<f64>, tol: f64) -> Vec<f64> {
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    for v in c.iter_mut() {
        if v.abs() <= tol * scale {
            *v = 0.0;
        }
    }
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

fn normalize(c: Vec<f64>) -> Vec<f64> {
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    c.into_iter().map(|v| v / scale).collect()
}

/// Greatest common divisor by the Euclidean algorithm. Remainder coefficients
/// below `tol` relative to the remainder's largest coefficient are treated as
/// zero. The result is scaled to unit max-norm; a degree-0 result means the
/// inputs are coprime.
pub fn gcd(a: &[f64], b: &[f64], tol: f64) -> Vec<f64> {
    let mut a = trim(a.to_vec(), tol);
    let mut b = trim(b.to_vec(), tol);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    if b.is_empty() {
        return normalize(a);
    }
    a = normalize(a);
    b = normalize(b);
    loop {
        let r = trim(rem(&a, &b), tol);
        if r.is_empty() {
            return b;
        }
        a = b;
        b = normalize(r);
    }
}

/// Remainder of `a / b`; `b` must have a nonzero leading coefficient.
fn rem(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let factor = r[dr] / lead;
        for (j, &bj) in b.iter().enumerate() {
            r[dr - db + j] -= factor * bj;
        }
        r.pop();
    }
    r
}

//! Linear stability on the coupled test system `p' = gamma q`, `q' = delta p`
//! with `gamma delta < 0`. With `z = dt sqrt(-gamma delta)` the recurrence is
//! governed by `rho_p rho_q + z^2 sigma_p sigma_q`.

use num_complex::Complex64;

use crate::lmm::PlmMethod;
use crate::poly;

/// Resolution of [`imaginary_axis_interval`].
pub const SCAN_STEP: f64 = 1e-3;

/// Coefficients (ascending) of `rho_p rho_q + z^2 sigma_p sigma_q`.
pub fn stability_polynomial(method: &PlmMethod, z: f64) -> Vec<f64> {
    let rr = poly::mul(method.p_pair.rho(), method.q_pair.rho());
    let ss = poly::mul(method.p_pair.sigma(), method.q_pair.sigma());
    poly::add(&rr, &poly::scale(&ss, z * z))
}

pub fn stability_roots(method: &PlmMethod, z: f64) -> Vec<Complex64> {
    poly::roots(&stability_polynomial(method, z))
}

pub fn max_root_modulus(method: &PlmMethod, z: f64) -> f64 {
    stability_roots(method, z)
        .iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max)
}

/// Largest scanned `z <= z_max` such that every scanned point up to it has
/// max root modulus at most `1 + tol`; 0 when the first point already fails.
pub fn imaginary_axis_interval(method: &PlmMethod, tol: f64, z_max: f64) -> f64 {
    let steps = (z_max / SCAN_STEP + 1e-9).floor() as usize;
    let mut best = 0.0;
    for i in 1..=steps {
        let z = i as f64 * SCAN_STEP;
        if max_root_modulus(method, z) > 1.0 + tol {
            break;
        }
        best = z;
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityScan {
    pub method: String,
    pub z_values: Vec<f64>,
    pub max_moduli: Vec<f64>,
}

/// Max root modulus at `n` equally spaced points in `(0, z_max]`.
pub fn scan(method: &PlmMethod, z_max: f64, n: usize) -> StabilityScan {
    let z_values: Vec<f64> = (1..=n).map(|i| z_max * i as f64 / n as f64).collect();
    let max_moduli = z_values.iter().map(|&z| max_root_modulus(method, z)).collect();
    StabilityScan {
        method: method.name.clone(),
        z_values,
        max_moduli,
    }
}

/// Least-squares slope of `log(maxmod - 1)` against `log z`.
pub fn growth_exponent(method: &PlmMethod, z_lo: f64, z_hi: f64, n: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let z = z_lo * (z_hi / z_lo).powf(i as f64 / (n - 1) as f64);
            (z.ln(), (max_root_modulus(method, z) - 1.0).ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

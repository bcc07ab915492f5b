//! Generating-polynomial pairs, partitioned methods built from them, and the
//! catalog of named methods.
//!
//! A pair `(rho, sigma)` of degree `k` defines the multistep recurrence
//! `sum_j rho_j y_{n+j} = dt * sum_j sigma_j f_{n+j}`. Coefficients are stored
//! ascending by power and `sigma` is zero-padded to length `k + 1`, so a zero
//! top coefficient of `sigma` means the scheme is explicit.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;

/// Tolerance for the consistency conditions `rho(1) = 0`, `rho'(1) = sigma(1)`.
pub const CONSISTENCY_TOL: f64 = 1e-12;
/// Distance from the unit circle under which a root counts as unit-modulus.
pub const UNIT_ROOT_TOL: f64 = 1e-10;
/// Coefficient tolerance of the irreducibility (GCD) check.
pub const GCD_TOL: f64 = 1e-12;
/// Tolerance of the coefficient reflection rules in [`GeneratingPair::is_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-14;

/// Highest Taylor index inspected by order detection.
const MAX_TAYLOR_INDEX: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingPair {
    rho: Vec<f64>,
    sigma: Vec<f64>,
}

impl GeneratingPair {
    /// Builds and validates a pair. `sigma` may be shorter than `rho`; it is
    /// padded with zeros.
    pub fn new(rho: Vec<f64>, mut sigma: Vec<f64>) -> Result<Self> {
        if rho.len() < 2 {
            return Err(Error::BadParams("rho must have degree at least 1".into()));
        }
        let k = rho.len() - 1;
        if rho[k] == 0.0 {
            return Err(Error::BadParams(
                "leading coefficient of rho must be nonzero".into(),
            ));
        }
        if sigma.len() > k + 1 {
            if sigma[k + 1..].iter().any(|&v| v != 0.0) {
                return Err(Error::BadParams(
                    "sigma has higher degree than rho".into(),
                ));
            }
            sigma.truncate(k + 1);
        }
        sigma.resize(k + 1, 0.0);
        if rho.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("generating polynomial coefficients"));
        }

        let pair = Self { rho, sigma };
        pair.check_consistency()?;
        pair.check_zero_stability()?;
        if poly::gcd(&pair.rho, &pair.sigma, GCD_TOL).len() > 1 {
            return Err(Error::Reducible);
        }
        Ok(pair)
    }

    fn coefficient_scale(&self) -> f64 {
        self.rho
            .iter()
            .chain(self.sigma.iter())
            .map(|v| v.abs())
            .sum()
    }

    fn check_consistency(&self) -> Result<()> {
        let scale = self.coefficient_scale();
        let rho1 = poly::eval(&self.rho, 1.0);
        if rho1.abs() > CONSISTENCY_TOL * scale {
            return Err(Error::InconsistentPair(format!("rho(1) = {rho1:e}")));
        }
        let drho1 = poly::eval(&poly::derivative(&self.rho), 1.0);
        let sigma1 = poly::eval(&self.sigma, 1.0);
        if (drho1 - sigma1).abs() > CONSISTENCY_TOL * scale {
            return Err(Error::InconsistentPair(format!(
                "rho'(1) = {drho1} differs from sigma(1) = {sigma1}"
            )));
        }
        if sigma1.abs() <= CONSISTENCY_TOL * scale {
            return Err(Error::InconsistentPair("sigma(1) = 0".into()));
        }
        Ok(())
    }

    fn check_zero_stability(&self) -> Result<()> {
        let drho = poly::derivative(&self.rho);
        let scale: f64 = self.rho.iter().map(|v| v.abs()).sum();
        for root in poly::roots(&self.rho) {
            let modulus = root.norm();
            if modulus > 1.0 + UNIT_ROOT_TOL {
                return Err(Error::NotZeroStable(format!(
                    "root {root} has modulus {modulus}"
                )));
            }
            if (modulus - 1.0).abs() <= UNIT_ROOT_TOL
                && poly::eval_complex(&drho, root).norm() < 1e-6 * scale
            {
                return Err(Error::NotZeroStable(format!(
                    "unit-modulus root {root} is multiple"
                )));
            }
        }
        Ok(())
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of steps `k` (degree of rho).
    pub fn steps(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn is_explicit(&self) -> bool {
        self.sigma[self.steps()] == 0.0
    }

    /// True iff `a_{k-j} = -a_j` and `b_{k-j} = b_j` for all `j`.
    pub fn is_symmetric(&self) -> bool {
        let k = self.steps();
        (0..=k).all(|j| {
            (self.rho[k - j] + self.rho[j]).abs() <= SYMMETRY_TOL
                && (self.sigma[k - j] - self.sigma[j]).abs() <= SYMMETRY_TOL
        })
    }

    /// Roots of rho within [`UNIT_ROOT_TOL`] of the unit circle.
    pub fn unit_roots(&self) -> Vec<Complex64> {
        poly::roots(&self.rho)
            .into_iter()
            .filter(|r| (r.norm() - 1.0).abs() <= UNIT_ROOT_TOL)
            .collect()
    }

    /// Growth factors `sigma(x) / (x rho'(x))` attached to every unit root of
    /// rho other than 1.
    pub fn unit_root_multipliers(&self) -> Vec<(Complex64, Complex64)> {
        let drho = poly::derivative(&self.rho);
        self.unit_roots()
            .into_iter()
            .filter(|r| (r - 1.0).norm() > 1e-8)
            .map(|r| {
                let lambda = poly::eval_complex(&self.sigma, r) / (r * poly::eval_complex(&drho, r));
                (r, lambda)
            })
            .collect()
    }

    /// Raw Taylor coefficients `C_m` of `rho(E) Y - dt sigma(E) Y'` at `dt = 1`
    /// on the monomial basis: the residual equals `sum_m C_m dt^m Y^{(m)}`.
    fn taylor_coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(MAX_TAYLOR_INDEX + 1);
        for m in 0..=MAX_TAYLOR_INDEX {
            let mut c = 0.0;
            for (j, (&a, &b)) in self.rho.iter().zip(self.sigma.iter()).enumerate() {
                let jf = j as f64;
                c += a * jf.powi(m as i32) / factorial(m);
                if m >= 1 {
                    c -= b * jf.powi(m as i32 - 1) / factorial(m - 1);
                }
            }
            out.push(c);
        }
        out
    }

    /// Order `r` and error constants `c_j` for `j = r ..= r + extra`, in the
    /// normalization `rho(E)Y - dt sigma(E)Y' = sigma(E) sum_j c_j dt^{j+1} Y^{(j+1)}`.
    fn order_and_constants(&self, extra: usize) -> Result<(usize, Vec<f64>)> {
        let raw = self.taylor_coefficients();
        let k = self.steps() as f64;
        let scale = self.coefficient_scale();
        let is_zero =
            |m: usize, v: f64| v.abs() <= 1e-12 * scale * (k.powi(m as i32) / factorial(m)).max(1.0);

        let order = match (0..raw.len()).find(|&m| !is_zero(m, raw[m])) {
            Some(m) if m >= 2 => m - 1,
            _ => {
                return Err(Error::InconsistentPair(
                    "method has order 0".into(),
                ))
            }
        };

        // sigma(E) Z = sum_i s_i dt^i Z^{(i)}
        let s: Vec<f64> = (0..=MAX_TAYLOR_INDEX)
            .map(|i| {
                self.sigma
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| b * (j as f64).powi(i as i32) / factorial(i))
                    .sum()
            })
            .collect();

        let mut consts = Vec::with_capacity(extra + 1);
        for idx in 0..=extra {
            let m = order + 1 + idx;
            if m > MAX_TAYLOR_INDEX {
                break;
            }
            let mut v = raw[m];
            for i in 1..=idx {
                v -= consts[idx - i] * s[i];
            }
            consts.push(v / s[0]);
        }
        Ok((order, consts))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Order `r` of the pair and its error constants `c_r, ..., c_{r+3}`.
pub fn detect_order(pair: &GeneratingPair) -> Result<(usize, Vec<f64>)> {
    pair.order_and_constants(3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlmMethod {
    pub name: String,
    pub p_pair: GeneratingPair,
    pub q_pair: GeneratingPair,
    pub order: usize,
    pub symmetric: bool,
    /// `c_{j,p}` for `j = r .. 2r-1`.
    pub error_constants_p: Vec<f64>,
    /// `c_{j,q}` for `j = r .. 2r-1`.
    pub error_constants_q: Vec<f64>,
}

impl PlmMethod {
    pub fn new(p_pair: GeneratingPair, q_pair: GeneratingPair, name: impl Into<String>) -> Result<Self> {
        let (rp, _) = detect_order(&p_pair)?;
        let (rq, _) = detect_order(&q_pair)?;
        if rp != rq {
            return Err(Error::OrderMismatch { p: rp, q: rq });
        }
        let extra = rp.saturating_sub(1);
        let (_, cp) = p_pair.order_and_constants(extra)?;
        let (_, cq) = q_pair.order_and_constants(extra)?;
        Ok(Self {
            name: name.into(),
            symmetric: p_pair.is_symmetric() && q_pair.is_symmetric(),
            p_pair,
            q_pair,
            order: rp,
            error_constants_p: cp,
            error_constants_q: cq,
        })
    }

    /// Same method with the roles of the partitions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            name: format!("{}-swapped", self.name),
            p_pair: self.q_pair.clone(),
            q_pair: self.p_pair.clone(),
            order: self.order,
            symmetric: self.symmetric,
            error_constants_p: self.error_constants_q.clone(),
            error_constants_q: self.error_constants_p.clone(),
        }
    }

    /// Number of back values one step consumes, `max(k_p, k_q)`.
    pub fn steps(&self) -> usize {
        self.p_pair.steps().max(self.q_pair.steps())
    }

    pub fn is_explicit(&self) -> bool {
        self.p_pair.is_explicit() && self.q_pair.is_explicit()
    }

    /// Unit roots shared by rho_p and rho_q other than 1.
    pub fn common_unit_roots(&self) -> Vec<Complex64> {
        let q_roots = self.q_pair.unit_roots();
        self.p_pair
            .unit_roots()
            .into_iter()
            .filter(|r| (r - 1.0).norm() > 1e-8)
            .filter(|r| q_roots.iter().any(|s| (r - s).norm() < 1e-8))
            .collect()
    }
}

/// Builds a method; alias of [`PlmMethod::new`].
pub fn make_method(p_pair: GeneratingPair, q_pair: GeneratingPair, name: &str) -> Result<PlmMethod> {
    PlmMethod::new(p_pair, q_pair, name)
}

pub const SPLMM2: &str = "SPLMM2";
pub const NSPLMM2: &str = "NSPLMM2";
pub const NSNPLMM3: &str = "NSNPLMM3";

fn pair(rho: &[f64], sigma: &[f64]) -> GeneratingPair {
    GeneratingPair::new(rho.to_vec(), sigma.to_vec()).expect("catalog pair is valid")
}

/// Leapfrog: rho = (x-1)(x+1), sigma = 2x.
pub fn leapfrog() -> GeneratingPair {
    pair(&[-1.0, 0.0, 1.0], &[0.0, 2.0])
}

/// Symmetric three-step pair rho = (x-1)(x^2+1), sigma = x^2 + x.
pub fn symmetric_three_step() -> GeneratingPair {
    pair(&[-1.0, 1.0, -1.0, 1.0], &[0.0, 1.0, 1.0])
}

/// Two-step Adams-Bashforth: rho = x(x-1), sigma = (3x - 1)/2.
pub fn adams2() -> GeneratingPair {
    pair(&[0.0, -1.0, 1.0], &[-0.5, 1.5])
}

/// Three-step Adams-Bashforth: rho = x^2(x-1), sigma = (23x^2 - 16x + 5)/12.
pub fn adams3() -> GeneratingPair {
    pair(&[0.0, 0.0, -1.0, 1.0], &[5.0 / 12.0, -16.0 / 12.0, 23.0 / 12.0])
}

/// Explicit Euler: rho = x - 1, sigma = 1.
pub fn euler() -> GeneratingPair {
    pair(&[-1.0, 1.0], &[1.0])
}

/// The three named methods used in the experiments.
pub fn catalog() -> BTreeMap<String, PlmMethod> {
    let mut m = BTreeMap::new();
    let mk = |p, q, name: &str| PlmMethod::new(p, q, name).expect("catalog method is valid");
    m.insert(SPLMM2.to_string(), mk(leapfrog(), symmetric_three_step(), SPLMM2));
    m.insert(NSPLMM2.to_string(), mk(leapfrog(), adams2(), NSPLMM2));
    m.insert(NSNPLMM3.to_string(), mk(adams3(), adams3(), NSNPLMM3));
    m
}

pub fn method_by_name(name: &str) -> Result<PlmMethod> {
    catalog()
        .remove(name)
        .ok_or_else(|| Error::UnknownMethod(name.to_string()))
}

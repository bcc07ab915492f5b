//! Fourier-collocation NLS system `i u_t + u_xx + |u|^{2 sigma} u = 0` written
//! for `u = P + iQ`, its scaled invariants, and the travelling soliton family.
//!
//! Scaled invariants, with `dx = l/N` and `D`, `A` the first and second
//! derivative operators:
//! - mass `(dx/2) sum (P^2 + Q^2)`
//! - momentum `(dx/2) (P.DQ - Q.DP)`
//! - energy `-(dx/2) [Q.AQ + P.AP + sum |u|^{2 sigma + 2} / (sigma + 1)]`

use crate::error::{check_len, Error, Result};
use crate::spectral::{dot, SpectralGrid};
use crate::system::{PartitionedSystem, State};

pub type NlsState = State;

pub const INVARIANT_NAMES: [&str; 3] = ["mass", "momentum", "energy"];

/// Parameters of the travelling soliton. `speed` is the group velocity and
/// `frequency` the phase rotation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub frequency: f64,
    pub speed: f64,
    pub x0: f64,
    pub theta0: f64,
}

impl SolitonParams {
    /// Parameters with shape parameter `a = frequency - speed^2 / 4`.
    pub fn from_shape(a: f64, speed: f64, x0: f64, theta0: f64) -> Self {
        Self {
            frequency: a + speed * speed / 4.0,
            speed,
            x0,
            theta0,
        }
    }

    pub fn shape(&self) -> f64 {
        self.frequency - self.speed * self.speed / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.shape();
        if !(a > 0.0) {
            return Err(Error::BadParams(format!(
                "soliton shape parameter must be positive, got {a}"
            )));
        }
        Ok(())
    }
}

/// `|u|^{2 sigma}` pointwise with `0^sigma = 0`.
fn modulus_power(p: &[f64], q: &[f64], sigma: f64) -> Result<Vec<f64>> {
    let out: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let r2 = a * a + b * b;
            if r2 == 0.0 {
                0.0
            } else if sigma == 1.0 {
                r2
            } else {
                (sigma * r2.ln()).exp()
            }
        })
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("nonlinear term"));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct NlsModel {
    grid: SpectralGrid,
    sigma: f64,
    soliton: SolitonParams,
    /// Multiplicative factors applied to `(P, Q)` of the initial soliton.
    perturbation: (f64, f64),
}

impl NlsModel {
    pub fn new(grid: SpectralGrid, sigma: f64, soliton: SolitonParams) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::BadParams(format!("nonlinearity exponent must be positive, got {sigma}")));
        }
        soliton.validate()?;
        Ok(Self {
            grid,
            sigma,
            soliton,
            perturbation: (1.0, 1.0),
        })
    }

    pub fn with_perturbation(mut self, a1: f64, a2: f64) -> Self {
        self.perturbation = (a1, a2);
        self
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn soliton_params(&self) -> &SolitonParams {
        &self.soliton
    }

    pub fn rhs_state(&self, s: &NlsState) -> Result<(Vec<f64>, Vec<f64>)> {
        self.rhs(&s.p, &s.q)
    }

    /// `(mass, momentum, energy)`.
    pub fn invariants_of(&self, p: &[f64], q: &[f64]) -> Result<(f64, f64, f64)> {
        let n = self.grid.n();
        check_len(n, p.len())?;
        check_len(n, q.len())?;
        let half = 0.5 * self.grid.dx();
        let (dp, dq) = self.grid.diff1_pair(p, q)?;
        let (ap, aq) = self.grid.diff2_pair(p, q)?;
        let pw = modulus_power(p, q, self.sigma)?;
        let mass = half * (dot(p, p) + dot(q, q));
        let momentum = half * (dot(p, &dq) - dot(q, &dp));
        let potential: f64 = p
            .iter()
            .zip(q)
            .zip(&pw)
            .map(|((a, b), w)| (a * a + b * b) * w)
            .sum::<f64>()
            / (self.sigma + 1.0);
        let energy = -half * (dot(q, &aq) + dot(p, &ap) + potential);
        if !(mass.is_finite() && momentum.is_finite() && energy.is_finite()) {
            return Err(Error::NonFinite("invariants"));
        }
        Ok((mass, momentum, energy))
    }

    /// Gradient of the scaled energy.
    pub fn energy_gradient(&self, p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dx = self.grid.dx();
        let (ap, aq) = self.grid.diff2_pair(p, q)?;
        let pw = modulus_power(p, q, self.sigma)?;
        let gp = (0..p.len()).map(|j| -dx * (ap[j] + pw[j] * p[j])).collect();
        let gq = (0..q.len()).map(|j| -dx * (aq[j] + pw[j] * q[j])).collect();
        Ok((gp, gq))
    }

    /// Gradient of the scaled mass.
    pub fn mass_gradient(&self, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dx = self.grid.dx();
        (p.iter().map(|v| dx * v).collect(), q.iter().map(|v| dx * v).collect())
    }

    /// Gradient of the scaled momentum.
    pub fn momentum_gradient(&self, p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dx = self.grid.dx();
        let (dp, dq) = self.grid.diff1_pair(p, q)?;
        Ok((dq.iter().map(|v| dx * v).collect(), dp.iter().map(|v| -dx * v).collect()))
    }

    /// Nodal soliton at time `t`, before any perturbation.
    pub fn soliton(&self, t: f64) -> Result<NlsState> {
        soliton(&self.soliton, self.sigma, &self.grid, t)
    }
}

/// Nodal values of the travelling soliton at time `t`.
pub fn soliton(params: &SolitonParams, sigma: f64, grid: &SpectralGrid, t: f64) -> Result<NlsState> {
    params.validate()?;
    let a = params.shape();
    let amp = (a * (sigma + 1.0)).powf(0.5 / sigma);
    let width = sigma * a.sqrt();
    let mut p = Vec::with_capacity(grid.n());
    let mut q = Vec::with_capacity(grid.n());
    for &x in grid.nodes() {
        let xi = x - params.speed * t - params.x0;
        let rho = amp * (1.0 / (width * xi).cosh()).powf(1.0 / sigma);
        let phase = 0.5 * params.speed * xi + params.theta0 + params.frequency * t;
        p.push(rho * phase.cos());
        q.push(rho * phase.sin());
    }
    Ok(State { p, q, t })
}

/// Scales `P` by `a1` and `Q` by `a2`.
pub fn perturb(state: &NlsState, a1: f64, a2: f64) -> NlsState {
    State {
        p: state.p.iter().map(|v| a1 * v).collect(),
        q: state.q.iter().map(|v| a2 * v).collect(),
        t: state.t,
    }
}

impl PartitionedSystem for NlsModel {
    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn rhs(&self, p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (ap, aq) = self.grid.diff2_pair(p, q)?;
        let pw = modulus_power(p, q, self.sigma)?;
        let dp = (0..p.len()).map(|j| -aq[j] - pw[j] * q[j]).collect();
        let dq = (0..p.len()).map(|j| ap[j] + pw[j] * p[j]).collect();
        Ok((dp, dq))
    }

    fn invariant_names(&self) -> Vec<&'static str> {
        INVARIANT_NAMES.to_vec()
    }

    fn invariants(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        let (m, i, h) = self.invariants_of(p, q)?;
        Ok(vec![m, i, h])
    }

    fn initial_state(&self) -> Result<State> {
        let s = self.soliton(0.0)?;
        Ok(perturb(&s, self.perturbation.0, self.perturbation.1))
    }

    fn exact(&self, t: f64) -> Option<Result<State>> {
        if self.perturbation == (1.0, 1.0) {
            Some(self.soliton(t))
        } else {
            None
        }
    }
}

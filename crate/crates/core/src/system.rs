//! Partitioned state and the interface the integrator needs from a model.

use crate::error::{check_len, Error, Result};

/// A partitioned pair of real vectors at time `t`: `(P, Q)` for NLS,
/// `(Gamma, W)` for Boussinesq.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn new(p: Vec<f64>, q: Vec<f64>, t: f64) -> Result<Self> {
        check_len(p.len(), q.len())?;
        let s = Self { p, q, t };
        if !s.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        Ok(s)
    }

    pub fn zeros(n: usize, t: f64) -> Self {
        Self {
            p: vec![0.0; n],
            q: vec![0.0; n],
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|v| v.is_finite())
    }

    /// Max norm over both partitions.
    pub fn max_norm(&self) -> f64 {
        self.p.iter().chain(&self.q).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance over both partitions.
    pub fn max_diff(&self, other: &State) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// An autonomous partitioned ODE system `P' = f(P, Q)`, `Q' = g(P, Q)` with
/// monitored invariants.
pub trait PartitionedSystem: Send + Sync {
    /// Length of each partition.
    fn dim(&self) -> usize;

    fn rhs(&self, p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    fn invariant_names(&self) -> Vec<&'static str>;

    fn invariants(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>>;

    /// State at `t = 0`.
    fn initial_state(&self) -> Result<State>;

    /// Exact solution at `t`, when one is known.
    fn exact(&self, _t: f64) -> Option<Result<State>> {
        None
    }
}

/// Scalar linear test system `p' = gamma q`, `q' = delta p`. With
/// `gamma delta < 0` it is a harmonic oscillator of frequency
/// `sqrt(-gamma delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCoupled {
    pub gamma: f64,
    pub delta: f64,
    pub p0: f64,
    pub q0: f64,
}

impl LinearCoupled {
    /// `p' = -q`, `q' = p` starting from `(1, 0)`; solution `(cos t, sin t)`.
    pub fn harmonic() -> Self {
        Self { gamma: -1.0, delta: 1.0, p0: 1.0, q0: 0.0 }
    }
}

impl PartitionedSystem for LinearCoupled {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(1, p.len())?;
        check_len(1, q.len())?;
        Ok((vec![self.gamma * q[0]], vec![self.delta * p[0]]))
    }

    fn invariant_names(&self) -> Vec<&'static str> {
        vec!["quadratic"]
    }

    /// `delta p^2 - gamma q^2`, conserved by the exact flow.
    fn invariants(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.delta * p[0] * p[0] - self.gamma * q[0] * q[0]])
    }

    fn initial_state(&self) -> Result<State> {
        State::new(vec![self.p0], vec![self.q0], 0.0)
    }

    fn exact(&self, t: f64) -> Option<Result<State>> {
        let gd = self.gamma * self.delta;
        if gd >= 0.0 {
            return None;
        }
        let w = (-gd).sqrt();
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let p = self.p0 * c + self.gamma / w * self.q0 * s;
        let q = self.q0 * c + self.delta / w * self.p0 * s;
        Some(State::new(vec![p], vec![q], t))
    }
}

//! Fourier-collocation `(a, b, c, d)` Boussinesq system for surface elevation
//! `Gamma` and horizontal velocity `W`, its scaled invariants, solitary waves
//! and Gaussian initial data.
//!
//! `D` below is the first-derivative operator and `D^2` means `D` applied
//! twice, so the Helmholtz inverses and the invariants share one Nyquist
//! convention. Scaled invariants with `dx = l/N`:
//! - `M1 = dx sum Gamma`, `M2 = dx sum W`
//! - `I = dx [Gamma.W + b DGamma.DW]` (requires `b = d`)
//! - `H = (dx/2) [Gamma.Gamma + W.W - a DW.DW - c DGamma.DGamma + Gamma.W^2]` (requires `b = d`)

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::spectral::{dot, SpectralGrid};
use crate::system::{PartitionedSystem, State};

pub type BoussinesqState = State;

/// Tolerance on `a + b + c + d = 1/3`.
pub const PARAM_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoussinesqParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BoussinesqParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if a > 0.0 || c > 0.0 || b < 0.0 || d < 0.0 {
            return Err(Error::BadParams(format!(
                "need a, c <= 0 and b, d >= 0; got a={a}, b={b}, c={c}, d={d}"
            )));
        }
        let sum = a + b + c + d;
        if (sum - 1.0 / 3.0).abs() > PARAM_SUM_TOL {
            return Err(Error::BadParams(format!("a + b + c + d = {sum}, expected 1/3")));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.b == self.d
    }
}

/// Bona-Smith family: `a = 0`, `b = d = (theta^2 - 1/3)/2`, `c = 2/3 - theta^2`.
pub fn bona_smith_params(theta_sq: f64) -> Result<BoussinesqParams> {
    if !(theta_sq > 1.0 / 3.0 && theta_sq <= 1.0) {
        return Err(Error::BadParams(format!(
            "theta^2 must lie in (1/3, 1], got {theta_sq}"
        )));
    }
    let b = (theta_sq - 1.0 / 3.0) / 2.0;
    BoussinesqParams::new(0.0, b, 2.0 / 3.0 - theta_sq, b)
}

/// Positive root of `beta^2 + c_s beta - 2 = 0`.
pub fn beta_from_speed(speed: f64) -> f64 {
    0.5 * (-speed + (speed * speed + 8.0).sqrt())
}

/// Explicit `sech^2` solitary wave with `W = beta Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaryWave {
    pub beta: f64,
    pub x0: f64,
    pub amplitude: f64,
    pub width: f64,
    pub speed: f64,
}

impl SolitaryWave {
    pub fn new(beta: f64, params: &BoussinesqParams, x0: f64) -> Result<Self> {
        let b2 = beta * beta;
        if !(beta > 0.0 && b2 < 1.0) {
            return Err(Error::BadParams(format!("beta must lie in (0, 1), got {beta}")));
        }
        let denom = (params.a - params.b) * b2 + 2.0 * params.b;
        let width_sq = 2.0 * (1.0 - b2) / denom / 4.0;
        if !(width_sq > 0.0 && width_sq.is_finite()) {
            return Err(Error::BadParams(format!(
                "no real solitary-wave width for beta = {beta}"
            )));
        }
        Ok(Self {
            beta,
            x0,
            amplitude: 3.0 * (1.0 - b2) / b2,
            width: width_sq.sqrt(),
            speed: (2.0 - b2) / beta,
        })
    }

    /// Nodal profile at time `t`; the travelling coordinate is wrapped into the
    /// periodic cell.
    pub fn state(&self, grid: &SpectralGrid, t: f64) -> State {
        let l = grid.length();
        let gamma: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| {
                let xi = (x - self.speed * t - self.x0 + 0.5 * l).rem_euclid(l) - 0.5 * l;
                self.amplitude / (self.width * xi).cosh().powi(2)
            })
            .collect();
        let w = gamma.iter().map(|v| self.beta * v).collect();
        State { p: gamma, q: w, t }
    }
}

pub fn solitary_wave_bb(
    beta: f64,
    params: &BoussinesqParams,
    x0: f64,
    grid: &SpectralGrid,
    t: f64,
) -> Result<BoussinesqState> {
    Ok(SolitaryWave::new(beta, params, x0)?.state(grid, t))
}

/// Gaussian datum `Gamma = amp exp(-rate (x - x0)^2)`, `W = ratio Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDatum {
    pub amp: f64,
    pub rate: f64,
    pub ratio: f64,
    pub x0: f64,
}

impl GaussianDatum {
    pub fn state(&self, grid: &SpectralGrid) -> Result<State> {
        if !(self.rate > 0.0) {
            return Err(Error::BadParams(format!("Gaussian rate must be positive, got {}", self.rate)));
        }
        let gamma: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| self.amp * (-self.rate * (x - self.x0).powi(2)).exp())
            .collect();
        let w = gamma.iter().map(|v| self.ratio * v).collect();
        Ok(State { p: gamma, q: w, t: 0.0 })
    }
}

pub fn gaussian_data(amp: f64, rate: f64, ratio: f64, x0: f64, grid: &SpectralGrid) -> Result<BoussinesqState> {
    GaussianDatum { amp, rate, ratio, x0 }.state(grid)
}

/// How the quadratic terms are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonlinearForm {
    /// `D(W Gamma)` and `D(W^2/2)`. Keeps `H` an exact invariant of the
    /// semidiscrete flow.
    #[default]
    Conservative,
    /// `D(W Gamma)` and the pointwise product `W DW`. Keeps `I` an exact
    /// invariant instead of `H`.
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    SolitaryWave(SolitaryWave),
    Gaussian(GaussianDatum),
}

#[derive(Debug, Clone)]
pub struct BoussinesqModel {
    grid: SpectralGrid,
    params: BoussinesqParams,
    form: NonlinearForm,
    initial: InitialData,
}

impl BoussinesqModel {
    pub fn new(grid: SpectralGrid, params: BoussinesqParams, initial: InitialData) -> Self {
        Self {
            grid,
            params,
            form: NonlinearForm::default(),
            initial,
        }
    }

    pub fn with_form(mut self, form: NonlinearForm) -> Self {
        self.form = form;
        self
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn params(&self) -> &BoussinesqParams {
        &self.params
    }

    pub fn initial_data(&self) -> &InitialData {
        &self.initial
    }

    /// `(M1, M2, I, H)`, the last two only for `b = d`.
    pub fn invariants_of(&self, gamma: &[f64], w: &[f64]) -> Result<(f64, f64, Option<f64>, Option<f64>)> {
        let n = self.grid.n();
        check_len(n, gamma.len())?;
        check_len(n, w.len())?;
        let dx = self.grid.dx();
        let m1 = dx * gamma.iter().sum::<f64>();
        let m2 = dx * w.iter().sum::<f64>();
        if !self.params.is_hamiltonian() {
            return Ok((m1, m2, None, None));
        }
        let BoussinesqParams { a, b, c, .. } = self.params;
        let (dg, dw) = self.grid.diff1_pair(gamma, w)?;
        let i = dx * (dot(gamma, w) + b * dot(&dg, &dw));
        let cubic: f64 = gamma.iter().zip(w).map(|(g, v)| g * v * v).sum();
        let h = 0.5 * dx * (dot(gamma, gamma) + dot(w, w) - a * dot(&dw, &dw) - c * dot(&dg, &dg) + cubic);
        if ![m1, m2, i, h].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("invariants"));
        }
        Ok((m1, m2, Some(i), Some(h)))
    }

    /// `v + coef D^2 v` for both partitions, each with its own coefficient.
    fn shifted_second_derivative(
        &self,
        u: &[f64],
        cu: f64,
        v: &[f64],
        cv: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.grid.odd_wavenumbers();
        let (uh, vh) = self.grid.forward_pair(u, v)?;
        let us: Vec<Complex64> = uh.iter().zip(k).map(|(z, k)| z * (1.0 - cu * k * k)).collect();
        let vs: Vec<Complex64> = vh.iter().zip(k).map(|(z, k)| z * (1.0 - cv * k * k)).collect();
        self.grid.inverse_pair(&us, &vs)
    }

    fn require_hamiltonian(&self, what: &'static str) -> Result<()> {
        if self.params.is_hamiltonian() {
            Ok(())
        } else {
            Err(Error::NotHamiltonian(what))
        }
    }

    /// Gradient of the scaled `H`.
    pub fn hamiltonian_gradient(&self, gamma: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.require_hamiltonian("H")?;
        let dx = self.grid.dx();
        let (lg, lw) = self.shifted_second_derivative(gamma, self.params.c, w, self.params.a)?;
        let gg = (0..gamma.len()).map(|j| dx * (lg[j] + 0.5 * w[j] * w[j])).collect();
        let gw = (0..gamma.len()).map(|j| dx * (lw[j] + gamma[j] * w[j])).collect();
        Ok((gg, gw))
    }

    /// Gradient of the scaled `I`: `dx ((I - b D^2) W, (I - b D^2) Gamma)`.
    pub fn impulse_gradient(&self, gamma: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.require_hamiltonian("I")?;
        let dx = self.grid.dx();
        let b = self.params.b;
        let (lw, lg) = self.shifted_second_derivative(w, -b, gamma, -b)?;
        Ok((lw.iter().map(|v| dx * v).collect(), lg.iter().map(|v| dx * v).collect()))
    }

    /// Gradients of the scaled `M1` and `M2`.
    pub fn linear_gradients(&self) -> [(Vec<f64>, Vec<f64>); 2] {
        let n = self.grid.n();
        let dx = self.grid.dx();
        [
            (vec![dx; n], vec![0.0; n]),
            (vec![0.0; n], vec![dx; n]),
        ]
    }
}

impl PartitionedSystem for BoussinesqModel {
    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn rhs(&self, gamma: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.grid.n();
        check_len(n, gamma.len())?;
        check_len(n, w.len())?;
        let BoussinesqParams { a, b, c, d } = self.params;
        let (x, y) = match self.form {
            NonlinearForm::Conservative => {
                let x: Vec<f64> = gamma.iter().zip(w).map(|(g, v)| g * v).collect();
                let y: Vec<f64> = w.iter().map(|v| 0.5 * v * v).collect();
                (x, y)
            }
            NonlinearForm::Pointwise => {
                let x: Vec<f64> = gamma.iter().zip(w).map(|(g, v)| g * v).collect();
                let dw = self.grid.diff1(w)?;
                let y = (0..n).map(|j| w[j] * dw[j]).collect();
                (x, y)
            }
        };
        let k = self.grid.odd_wavenumbers();
        let (wh, gh) = self.grid.forward_pair(w, gamma)?;
        let (xh, yh) = self.grid.forward_pair(&x, &y)?;
        let mut sg = vec![Complex64::new(0.0, 0.0); n];
        let mut sw = vec![Complex64::new(0.0, 0.0); n];
        let conservative = self.form == NonlinearForm::Conservative;
        for j in 0..n {
            let k2 = k[j] * k[j];
            let ik = Complex64::new(0.0, k[j]);
            let (lin_g, lin_w) = (ik * wh[j] * (1.0 - a * k2), ik * gh[j] * (1.0 - c * k2));
            let nl_g = ik * xh[j];
            let nl_w = if conservative { ik * yh[j] } else { yh[j] };
            sg[j] = -(lin_g + nl_g) / (1.0 + b * k2);
            sw[j] = -(lin_w + nl_w) / (1.0 + d * k2);
        }
        let (dg, dw) = self.grid.inverse_pair(&sg, &sw)?;
        if dg.iter().chain(&dw).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Boussinesq right-hand side"));
        }
        Ok((dg, dw))
    }

    fn invariant_names(&self) -> Vec<&'static str> {
        if self.params.is_hamiltonian() {
            vec!["M1", "M2", "I", "H"]
        } else {
            vec!["M1", "M2"]
        }
    }

    fn invariants(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        let (m1, m2, i, h) = self.invariants_of(p, q)?;
        let mut out = vec![m1, m2];
        out.extend(i);
        out.extend(h);
        Ok(out)
    }

    fn initial_state(&self) -> Result<State> {
        match &self.initial {
            InitialData::SolitaryWave(sw) => Ok(sw.state(&self.grid, 0.0)),
            InitialData::Gaussian(g) => g.state(&self.grid),
        }
    }

    fn exact(&self, t: f64) -> Option<Result<State>> {
        match &self.initial {
            InitialData::SolitaryWave(sw) => Some(Ok(sw.state(&self.grid, t))),
            InitialData::Gaussian(_) => None,
        }
    }
}

//! PLMM stepping, starting procedures, a classical RK4 reference solver and
//! invariant recording.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lmm::{GeneratingPair, PlmMethod};
use crate::system::{PartitionedSystem, State};

/// Relative tolerance of every fixed-point solve.
pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 50;
/// Max-norm above which a run is declared blown up.
pub const BLOWUP_NORM: f64 = 1e6;
/// Largest number of RK4 substeps per step used by [`StartKind::ReferenceRk`].
pub const MAX_RK_SUBSTEPS: usize = 1024;
/// Bound on the step-doubling estimate accepted by [`reference_solve`].
pub const REFERENCE_TOL: f64 = 1e-10;

type Vectors = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartKind {
    /// Nodal values of the exact solution.
    ExactNodal,
    /// Implicit midpoint rule, second order.
    ImplicitMidpoint,
    /// RK4 with substeps refined until the local error is below
    /// `0.01 dt^(target_order + 1)`.
    ReferenceRk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StartingProcedure {
    pub kind: StartKind,
    pub target_order: usize,
}

impl StartingProcedure {
    pub fn exact() -> Self {
        Self { kind: StartKind::ExactNodal, target_order: 0 }
    }

    pub fn midpoint() -> Self {
        Self { kind: StartKind::ImplicitMidpoint, target_order: 2 }
    }

    pub fn reference(target_order: usize) -> Self {
        Self { kind: StartKind::ReferenceRk, target_order }
    }
}

/// The last `K` states of a run with their right-hand sides. Level `n` sits
/// at `t0 + n dt`.
#[derive(Debug, Clone)]
pub struct History {
    states: VecDeque<State>,
    rhs: VecDeque<Vectors>,
    capacity: usize,
    t0: f64,
    dt: f64,
    /// Level of the newest state.
    newest: usize,
}

impl History {
    /// History whose first level is `first`.
    pub fn new(capacity: usize, t0: f64, dt: f64) -> Self {
        Self {
            states: VecDeque::with_capacity(capacity),
            rhs: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            t0,
            dt,
            newest: 0,
        }
    }

    pub fn time_of(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    /// Appends the next level; its time stamp is overwritten with `t0 + n dt`.
    pub fn push(&mut self, mut state: State, rhs: Vectors) {
        if !self.states.is_empty() {
            self.newest += 1;
        }
        state.t = self.time_of(self.newest);
        if self.states.len() == self.capacity {
            self.states.pop_front();
            self.rhs.pop_front();
        }
        self.states.push_back(state);
        self.rhs.push_back(rhs);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn newest_level(&self) -> usize {
        self.newest
    }

    pub fn newest(&self) -> &State {
        self.states.back().expect("history is not empty")
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.states.iter()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// State `back` levels before the newest one.
    fn back(&self, back: usize) -> (&State, &Vectors) {
        let i = self.states.len() - 1 - back;
        (&self.states[i], &self.rhs[i])
    }
}

fn eval_rhs(system: &dyn PartitionedSystem, p: &[f64], q: &[f64]) -> Result<Vectors> {
    let (f, g) = system.rhs(p, q)?;
    if f.iter().chain(&g).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    Ok((f, g))
}

#[derive(Clone, Copy)]
enum Part {
    P,
    Q,
}

/// Known part of the update of one partition, `(dt sum_{j<k} b_j f_j - sum_{j<k} a_j y_j) / a_k`,
/// and the weight `dt b_k / a_k` of the unknown newest derivative.
fn known_part(pair: &GeneratingPair, hist: &History, dt: f64, part: Part) -> (Vec<f64>, f64) {
    let k = pair.steps();
    let (alpha, beta) = (pair.rho(), pair.sigma());
    let lead = alpha[k];
    let dim = hist.newest().p.len();
    let mut acc = vec![0.0; dim];
    for j in 0..k {
        let (state, rhs) = hist.back(k - 1 - j);
        let (y, f) = match part {
            Part::P => (&state.p, &rhs.0),
            Part::Q => (&state.q, &rhs.1),
        };
        let (a, b) = (alpha[j] / lead, dt * beta[j] / lead);
        for i in 0..dim {
            acc[i] += b * f[i] - a * y[i];
        }
    }
    (acc, dt * beta[k] / lead)
}

/// One PLMM step. Returns the new state and its right-hand side; the history
/// is not modified.
pub fn plmm_step(
    method: &PlmMethod,
    hist: &History,
    system: &dyn PartitionedSystem,
    dt: f64,
) -> Result<(State, Vectors)> {
    let needed = method.steps();
    if hist.len() < needed {
        return Err(Error::ShortHistory { needed, got: hist.len() });
    }
    let (base_p, wp) = known_part(&method.p_pair, hist, dt, Part::P);
    let (base_q, wq) = known_part(&method.q_pair, hist, dt, Part::Q);
    let t = hist.time_of(hist.newest_level() + 1);

    if wp == 0.0 && wq == 0.0 {
        let rhs = eval_rhs(system, &base_p, &base_q)?;
        return Ok((State { p: base_p, q: base_q, t }, rhs));
    }

    let mut p = hist.newest().p.clone();
    let mut q = hist.newest().q.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let (f, g) = eval_rhs(system, &p, &q)?;
        let np: Vec<f64> = base_p.iter().zip(&f).map(|(b, v)| b + wp * v).collect();
        let nq: Vec<f64> = base_q.iter().zip(&g).map(|(b, v)| b + wq * v).collect();
        let change = p
            .iter()
            .zip(&np)
            .chain(q.iter().zip(&nq))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = np.iter().chain(&nq).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        p = np;
        q = nq;
        residual = change / scale;
        if !residual.is_finite() {
            break;
        }
        if residual <= FIXED_POINT_TOL {
            let rhs = eval_rhs(system, &p, &q)?;
            return Ok((State { p, q, t }, rhs));
        }
    }
    Err(Error::FixedPointDiverged { iterations: FIXED_POINT_MAX_ITER, residual })
}

/// One implicit midpoint step, solved by fixed-point iteration.
pub fn implicit_midpoint_step(system: &dyn PartitionedSystem, s: &State, dt: f64) -> Result<State> {
    let (f0, g0) = eval_rhs(system, &s.p, &s.q)?;
    let mut p: Vec<f64> = s.p.iter().zip(&f0).map(|(y, f)| y + dt * f).collect();
    let mut q: Vec<f64> = s.q.iter().zip(&g0).map(|(y, g)| y + dt * g).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let mp: Vec<f64> = s.p.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
        let mq: Vec<f64> = s.q.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let (f, g) = eval_rhs(system, &mp, &mq)?;
        let np: Vec<f64> = s.p.iter().zip(&f).map(|(y, v)| y + dt * v).collect();
        let nq: Vec<f64> = s.q.iter().zip(&g).map(|(y, v)| y + dt * v).collect();
        let change = p
            .iter()
            .zip(&np)
            .chain(q.iter().zip(&nq))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = np.iter().chain(&nq).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        p = np;
        q = nq;
        residual = change / scale;
        if !residual.is_finite() {
            break;
        }
        if residual <= FIXED_POINT_TOL {
            return Ok(State { p, q, t: s.t + dt });
        }
    }
    Err(Error::FixedPointDiverged { iterations: FIXED_POINT_MAX_ITER, residual })
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

/// One classical RK4 step.
pub fn rk4_step(system: &dyn PartitionedSystem, s: &State, h: f64) -> Result<State> {
    let (k1p, k1q) = eval_rhs(system, &s.p, &s.q)?;
    let (k2p, k2q) = eval_rhs(system, &axpy(&s.p, 0.5 * h, &k1p), &axpy(&s.q, 0.5 * h, &k1q))?;
    let (k3p, k3q) = eval_rhs(system, &axpy(&s.p, 0.5 * h, &k2p), &axpy(&s.q, 0.5 * h, &k2q))?;
    let (k4p, k4q) = eval_rhs(system, &axpy(&s.p, h, &k3p), &axpy(&s.q, h, &k3q))?;
    let comb = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len())
            .map(|i| y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
            .collect()
    };
    Ok(State {
        p: comb(&s.p, &k1p, &k2p, &k3p, &k4p),
        q: comb(&s.q, &k1q, &k2q, &k3q, &k4q),
        t: s.t + h,
    })
}

/// `m` RK4 substeps covering `dt`.
fn rk4_substeps(system: &dyn PartitionedSystem, s: &State, dt: f64, m: usize) -> Result<State> {
    let h = dt / m as f64;
    let mut cur = s.clone();
    for _ in 0..m {
        cur = rk4_step(system, &cur, h)?;
    }
    cur.t = s.t + dt;
    Ok(cur)
}

/// Smallest power-of-two substep count whose step-doubling estimate over one
/// step of size `dt` is at most `tol`, together with that estimate.
fn substeps_for(system: &dyn PartitionedSystem, s: &State, dt: f64, tol: f64, cap: usize) -> Result<(usize, f64)> {
    let mut m = 1;
    let mut coarse = rk4_substeps(system, s, dt, m)?;
    loop {
        let fine = rk4_substeps(system, s, dt, 2 * m)?;
        let estimate = coarse.max_diff(&fine) * 16.0 / 15.0;
        if estimate <= tol || 2 * m >= cap {
            return Ok((2 * m, estimate));
        }
        m *= 2;
        coarse = fine;
    }
}

/// Fills a history with the `K = max(k_p, k_q)` starting levels of both partitions.
pub fn make_start(
    method: &PlmMethod,
    proc: StartingProcedure,
    system: &dyn PartitionedSystem,
    dt: f64,
) -> Result<History> {
    let k = method.steps();
    let mut hist = History::new(k, 0.0, dt);
    let mut cur = system.initial_state()?;
    cur.t = 0.0;
    let substeps = match proc.kind {
        StartKind::ReferenceRk => {
            let scale = cur.max_norm().max(1.0);
            let tol = (0.01 * dt.abs().powi(proc.target_order as i32 + 1)).max(1e-14 * scale);
            substeps_for(system, &cur, dt, tol, MAX_RK_SUBSTEPS)?.0
        }
        _ => 0,
    };
    for level in 0..k {
        let t = level as f64 * dt;
        if level > 0 {
            cur = match proc.kind {
                StartKind::ExactNodal => system.exact(t).ok_or(Error::NoExactSolution)??,
                StartKind::ImplicitMidpoint => implicit_midpoint_step(system, &cur, dt)?,
                StartKind::ReferenceRk => rk4_substeps(system, &cur, dt, substeps)?,
            };
        } else if proc.kind == StartKind::ExactNodal {
            cur = system.exact(0.0).ok_or(Error::NoExactSolution)??;
        }
        let rhs = eval_rhs(system, &cur.p, &cur.q)?;
        hist.push(cur.clone(), rhs);
    }
    Ok(hist)
}

/// Scaled invariants at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRecord {
    pub t: f64,
    pub values: Vec<f64>,
    /// `|value - value at t0|`.
    pub deviations: Vec<f64>,
    /// Max-norm error against the exact solution, when one exists.
    pub sol_err: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpMarker {
    pub t: f64,
    pub step: usize,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub names: Vec<&'static str>,
    pub records: Vec<InvariantRecord>,
    pub blowup: Option<BlowUpMarker>,
    pub final_state: State,
    /// States captured at the requested snapshot times.
    pub snapshots: Vec<State>,
}

impl RunOutput {
    pub fn blew_up(&self) -> bool {
        self.blowup.is_some()
    }

    /// Largest deviation of invariant `idx` over records with `t` in `[a, b]`.
    pub fn max_deviation(&self, idx: usize, a: f64, b: f64) -> f64 {
        self.records
            .iter()
            .filter(|r| r.t >= a && r.t <= b)
            .map(|r| r.deviations[idx])
            .fold(0.0, f64::max)
    }

    pub fn invariant_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Times at which the state is captured (rounded to the nearest step).
    pub snapshot_times: Vec<f64>,
}

impl RunSpec {
    pub fn new(dt: f64, t_end: f64, record_every: usize) -> Self {
        Self { dt, t_end, record_every, snapshot_times: Vec::new() }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::BadParams(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::BadParams(format!("final time must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::BadParams("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

struct Recorder<'a> {
    system: &'a dyn PartitionedSystem,
    reference: Vec<f64>,
    records: Vec<InvariantRecord>,
}

impl Recorder<'_> {
    fn record(&mut self, s: &State) -> Result<()> {
        let values = self.system.invariants(&s.p, &s.q)?;
        if self.records.is_empty() && self.reference.is_empty() {
            self.reference = values.clone();
        }
        let deviations = values.iter().zip(&self.reference).map(|(v, r)| (v - r).abs()).collect();
        let sol_err = match self.system.exact(s.t) {
            Some(e) => Some(e?.max_diff(s)),
            None => None,
        };
        self.records.push(InvariantRecord { t: s.t, values, deviations, sol_err });
        Ok(())
    }
}

/// Runs `method` to `spec.t_end`, recording invariants every
/// `spec.record_every` steps and at the final step. A state whose max norm
/// exceeds [`BLOWUP_NORM`] (or is non-finite) truncates the run; records up to
/// that point are kept.
pub fn integrate(
    method: &PlmMethod,
    proc: StartingProcedure,
    system: &dyn PartitionedSystem,
    spec: &RunSpec,
) -> Result<RunOutput> {
    spec.validate()?;
    let dt = spec.dt;
    let n_steps = spec.steps();
    let snapshot_steps: Vec<usize> =
        spec.snapshot_times.iter().map(|t| (t / dt).round() as usize).collect();
    let mut snapshots = Vec::new();

    let mut hist = make_start(method, proc, system, dt)?;
    let mut rec = Recorder { system, reference: Vec::new(), records: Vec::new() };
    let names = system.invariant_names();

    let visit = |s: &State, n: usize, rec: &mut Recorder, snaps: &mut Vec<State>| -> Result<()> {
        if n % spec.record_every == 0 || n == n_steps {
            rec.record(s)?;
        }
        if snapshot_steps.contains(&n) {
            snaps.push(s.clone());
        }
        Ok(())
    };

    for (n, s) in hist.states().enumerate() {
        if n <= n_steps {
            visit(s, n, &mut rec, &mut snapshots)?;
        }
    }

    let mut blowup = None;
    let mut n = hist.newest_level();
    while n < n_steps {
        let next = match plmm_step(method, &hist, system, dt) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) | Err(Error::FixedPointDiverged { .. }) => {
                blowup = Some(BlowUpMarker { t: hist.time_of(n + 1), step: n + 1, norm: f64::INFINITY });
                break;
            }
            Err(e) => return Err(e),
        };
        n += 1;
        let norm = next.0.max_norm();
        if !(norm <= BLOWUP_NORM) {
            blowup = Some(BlowUpMarker { t: hist.time_of(n), step: n, norm });
            break;
        }
        hist.push(next.0, next.1);
        visit(hist.newest(), n, &mut rec, &mut snapshots)?;
    }

    Ok(RunOutput {
        names,
        records: rec.records,
        blowup,
        final_state: hist.newest().clone(),
        snapshots,
    })
}

/// RK4 trajectory with fixed step `dt_ref`, sampled every `sample_every`
/// steps (and at the end). Fails with [`Error::ReferenceTooCoarse`] if the
/// step-doubling estimate of the first step exceeds [`REFERENCE_TOL`].
pub fn reference_solve(
    system: &dyn PartitionedSystem,
    dt_ref: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Vec<State>> {
    if !(dt_ref > 0.0) || !(t_end > 0.0) || sample_every == 0 {
        return Err(Error::BadParams("reference run needs dt, T > 0 and sample_every >= 1".into()));
    }
    let mut cur = system.initial_state()?;
    let half = rk4_substeps(system, &cur, dt_ref, 2)?;
    let full = rk4_step(system, &cur, dt_ref)?;
    let estimate = full.max_diff(&half) * 16.0 / 15.0;
    if estimate > REFERENCE_TOL {
        return Err(Error::ReferenceTooCoarse { estimate, limit: REFERENCE_TOL });
    }
    let n_steps = (t_end / dt_ref).round() as usize;
    let mut out = vec![cur.clone()];
    for n in 1..=n_steps {
        cur = rk4_step(system, &cur, dt_ref)?;
        cur.t = n as f64 * dt_ref;
        let norm = cur.max_norm();
        if !(norm <= BLOWUP_NORM) {
            return Err(Error::BlowUp { t: cur.t, norm });
        }
        if n % sample_every == 0 || n == n_steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

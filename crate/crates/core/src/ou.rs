//! Exact simulation of Lévy-driven Ornstein–Uhlenbeck paths
//! `dX_t = -a X_t dt + dL_t` on an equidistant grid.
//!
//! Each path carries, per observation interval, the raw Wiener increment
//! `sigma_w * (W_{t+1} - W_t)`, the raw jump increment `J_{t+1} - J_t` and the
//! drift increment `-a \int X ds`, so that `dw + dd` is the exact increment of
//! the continuous martingale part `X^c = sigma_w W - a \int X ds`.

use crate::error::{Error, Result};
use crate::levy::{gamma_variate, poisson_events, JumpFamily, LevyModel};
use crate::rng::RngStream;

pub const DEFAULT_GAMMA_SUBSTEPS: usize = 8;

/// How the initial state is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StartMode {
    /// Start at `x0`.
    Fixed,
    /// Start at `x0`, run a discarded burn-in of length `10 / a` on the
    /// observation step, and use its final state.
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuModel {
    a: f64,
    x0: f64,
    levy: LevyModel,
    start: StartMode,
    gamma_substeps: usize,
}

impl OuModel {
    /// `a` must be positive (stationary regime).
    pub fn new(a: f64, x0: f64, levy: LevyModel) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("a must be positive, got {a}")));
        }
        if !x0.is_finite() {
            return Err(Error::invalid(format!("x0 must be finite, got {x0}")));
        }
        Ok(OuModel {
            a,
            x0,
            levy,
            start: StartMode::Fixed,
            gamma_substeps: DEFAULT_GAMMA_SUBSTEPS,
        })
    }

    pub fn with_start(mut self, start: StartMode) -> Self {
        self.start = start;
        self
    }

    /// Sub-steps per observation interval used to atomize gamma increments.
    pub fn with_gamma_substeps(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("gamma_substeps must be >= 1"));
        }
        self.gamma_substeps = m;
        Ok(self)
    }

    pub fn with_a(self, a: f64) -> Result<Self> {
        Ok(OuModel { start: self.start, gamma_substeps: self.gamma_substeps, ..Self::new(a, self.x0, self.levy)? })
    }

    pub fn with_levy(mut self, levy: LevyModel) -> Self {
        self.levy = levy;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn levy(&self) -> &LevyModel {
        &self.levy
    }

    pub fn start(&self) -> StartMode {
        self.start
    }

    pub fn gamma_substeps(&self) -> usize {
        self.gamma_substeps
    }
}

/// Equidistant observation times `t_i = i * dt`, `i = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservationGrid {
    n: usize,
    dt: f64,
}

impl ObservationGrid {
    pub fn new(n: usize, dt: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("grid needs n >= 2 intervals, got {n}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(ObservationGrid { n, dt })
    }

    /// Grid of `n` intervals covering `[0, horizon]`.
    pub fn from_horizon(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        Self::new(n, horizon / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }
}

/// A simulated path with its per-interval ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedPath {
    pub grid: ObservationGrid,
    /// `n + 1` observations.
    pub x: Vec<f64>,
    /// Wiener contribution `sigma_w * dW` per interval.
    pub dw: Vec<f64>,
    /// Drift contribution `-a \int X ds` per interval.
    pub dd: Vec<f64>,
    /// Raw jump increment `dJ` per interval.
    pub dj: Vec<f64>,
    /// True jump counts per interval; `None` for infinite-activity drivers.
    pub jump_count: Option<Vec<u32>>,
}

impl SimulatedPath {
    pub fn total_jumps(&self) -> Option<u64> {
        self.jump_count
            .as_ref()
            .map(|c| c.iter().map(|&k| k as u64).sum())
    }

    /// Largest violation of `x[i+1] - x[i] = dw + dd + dj`, relative to the
    /// magnitude of the terms involved.
    pub fn max_decomposition_error(&self) -> f64 {
        (0..self.grid.n)
            .map(|i| {
                let dx = self.x[i + 1] - self.x[i];
                let sum = self.dw[i] + self.dd[i] + self.dj[i];
                let scale = [self.x[i], self.x[i + 1], self.dw[i], self.dd[i], self.dj[i]]
                    .iter()
                    .fold(1.0f64, |m, v| m.max(v.abs()));
                (dx - sum).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// Increments `dw[i] + dd[i]` of the continuous martingale part.
pub fn continuous_part_increments(path: &SimulatedPath) -> Vec<f64> {
    path.dw.iter().zip(&path.dd).map(|(w, d)| w + d).collect()
}

/// Per-interval constants of the exact Gaussian transition.
struct Transition {
    a: f64,
    dt: f64,
    decay: f64,
    /// `sqrt(dt)`, scale of the raw Wiener increment.
    w_scale: f64,
    /// Regression coefficient of `\int e^{-a(dt-s)} dW_s` on `W_dt`.
    beta: f64,
    /// Conditional standard deviation of the integral given `W_dt`.
    resid_sd: f64,
    sigma: f64,
    jumps: JumpFamily,
    substeps: usize,
    /// `exp(-a (dt - k h))` for the gamma sub-step atoms, `k = 1..=m`.
    atom_weights: Vec<f64>,
}

impl Transition {
    fn new(model: &OuModel, dt: f64) -> Self {
        let a = model.a;
        let var_int = -(-2.0 * a * dt).exp_m1() / (2.0 * a);
        let cov = -(-a * dt).exp_m1() / a;
        let beta = cov / dt;
        let resid_sd = (var_int - cov * beta).max(0.0).sqrt();
        let m = model.gamma_substeps;
        let h = dt / m as f64;
        let atom_weights = (1..=m).map(|k| (-a * (dt - k as f64 * h)).exp()).collect();
        Transition {
            a,
            dt,
            decay: (-a * dt).exp(),
            w_scale: dt.sqrt(),
            beta,
            resid_sd,
            sigma: model.levy.sigma_w(),
            jumps: model.levy.jumps(),
            substeps: m,
            atom_weights,
        }
    }

    /// Advance one interval from `x`. Returns `(x_next, dw, dj, jump_count)`.
    #[inline]
    fn step(&self, rng: &mut RngStream, x: f64) -> (f64, f64, f64, u32) {
        let (dw, gauss) = if self.sigma > 0.0 {
            let w = self.w_scale * rng.standard_normal();
            let int = self.beta * w + self.resid_sd * rng.standard_normal();
            (self.sigma * w, self.sigma * int)
        } else {
            (0.0, 0.0)
        };
        let mut dj = 0.0;
        let mut jump_x = 0.0;
        let mut count = 0u32;
        match self.jumps {
            JumpFamily::None => {}
            JumpFamily::CompoundPoisson { intensity, height_std } => {
                let (a, dt) = (self.a, self.dt);
                poisson_events(rng, intensity, height_std, dt, |offset, z| {
                    dj += z;
                    jump_x += z * (-a * (dt - offset)).exp();
                    count += 1;
                });
            }
            JumpFamily::Gamma { c, rate } => {
                let shape = c * self.dt / self.substeps as f64;
                for w in &self.atom_weights {
                    let g = gamma_variate(rng, shape) / rate;
                    dj += g;
                    jump_x += g * w;
                }
            }
        }
        (self.decay * x + gauss + jump_x, dw, dj, count)
    }
}

/// Simulate `X` on `grid` from the explicit solution of the Langevin equation.
///
/// The Gaussian part is exact: `(\int e^{-a(dt-s)} dW_s, W_dt)` is drawn as a
/// bivariate normal. Compound Poisson jumps are exact. Gamma increments are
/// drawn on `gamma_substeps` sub-steps and placed at each sub-step's right
/// endpoint.
pub fn simulate_path(model: &OuModel, grid: &ObservationGrid, rng: &mut RngStream) -> SimulatedPath {
    let n = grid.n;
    let tr = Transition::new(model, grid.dt);

    let mut x0 = model.x0;
    if model.start == StartMode::Stationary {
        let burn = (10.0 / model.a / grid.dt).ceil() as usize;
        for _ in 0..burn {
            x0 = tr.step(rng, x0).0;
        }
    }

    let mut x = Vec::with_capacity(n + 1);
    let mut dw = Vec::with_capacity(n);
    let mut dd = Vec::with_capacity(n);
    let mut dj = Vec::with_capacity(n);
    let finite = model.levy.jumps().is_finite_activity();
    let mut counts = if finite { Vec::with_capacity(n) } else { Vec::new() };

    x.push(x0);
    let mut cur = x0;
    for _ in 0..n {
        let (next, w, j, k) = tr.step(rng, cur);
        dw.push(w);
        dj.push(j);
        dd.push((next - cur) - w - j);
        if finite {
            counts.push(k);
        }
        x.push(next);
        cur = next;
    }

    SimulatedPath {
        grid: *grid,
        x,
        dw,
        dd,
        dj,
        jump_count: finite.then_some(counts),
    }
}

//! Driving Lévy processes and exact samplers for their increments.
//!
//! A driver is `L = sigma_w * W + J` with `J` either absent, compound Poisson
//! with centered Gaussian heights, or a gamma subordinator with Lévy density
//! `c x^-1 exp(-rate x)` on `x > 0`.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Jump part of the driving Lévy process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JumpFamily {
    None,
    /// `intensity` jumps per unit time, heights `N(0, height_std^2)`.
    CompoundPoisson { intensity: f64, height_std: f64 },
    /// Gamma subordinator: increments over `dt` are `Gamma(c * dt, rate)`.
    Gamma { c: f64, rate: f64 },
}

impl JumpFamily {
    pub fn name(&self) -> &'static str {
        match self {
            JumpFamily::None => "none",
            JumpFamily::CompoundPoisson { .. } => "compound_poisson",
            JumpFamily::Gamma { .. } => "gamma",
        }
    }

    /// Finite number of jumps on compact intervals.
    pub fn is_finite_activity(&self) -> bool {
        !matches!(self, JumpFamily::Gamma { .. })
    }
}

/// Validated driving process: Wiener volatility plus one jump family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyModel {
    sigma_w: f64,
    jumps: JumpFamily,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl LevyModel {
    pub fn new(sigma_w: f64, jumps: JumpFamily) -> Result<Self> {
        if !(sigma_w.is_finite() && sigma_w >= 0.0) {
            return Err(Error::invalid(format!("sigma_w must be >= 0, got {sigma_w}")));
        }
        match jumps {
            // sigma_w = 0 without jumps is the noiseless Langevin equation
            JumpFamily::None => {}
            JumpFamily::CompoundPoisson { intensity, height_std } => {
                positive("intensity", intensity)?;
                positive("height_std", height_std)?;
            }
            JumpFamily::Gamma { c, rate } => {
                positive("c", c)?;
                positive("rate", rate)?;
            }
        }
        Ok(LevyModel { sigma_w, jumps })
    }

    /// Brownian-only driver.
    pub fn gaussian(sigma_w: f64) -> Result<Self> {
        Self::new(sigma_w, JumpFamily::None)
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    pub fn jumps(&self) -> JumpFamily {
        self.jumps
    }

    /// `sigma_w = 0` and no jumps.
    pub fn is_deterministic(&self) -> bool {
        self.sigma_w == 0.0 && self.jumps == JumpFamily::None
    }

    /// Blumenthal–Getoor index of the jump part. Both supported families have
    /// index 0; a driver without jumps reports 0 as well.
    pub fn blumenthal_getoor_index(&self) -> f64 {
        0.0
    }

    /// `E[L_1]`: zero for the symmetric families, `c / rate` for gamma.
    pub fn mean_rate(&self) -> f64 {
        match self.jumps {
            JumpFamily::Gamma { c, rate } => c / rate,
            _ => 0.0,
        }
    }

    /// `Var(L_1) = sigma_w^2 + \int x^2 mu(dx)`.
    pub fn variance_rate(&self) -> f64 {
        self.sigma_w * self.sigma_w + jump_variance_rate(self)
    }

    /// Metadata flag for drivers outside the symmetric, zero-drift setting the
    /// estimator theory is stated for. The model is still simulated.
    pub fn assumption_note(&self) -> Option<&'static str> {
        match self.jumps {
            JumpFamily::Gamma { .. } => Some("assumption-violating: asymmetric jumps"),
            _ => None,
        }
    }
}

/// Jump events of a compound Poisson increment over `[0, dt)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JumpBatch {
    pub total: f64,
    /// `(offset, height)` with offsets in `[0, dt)`, increasing.
    pub events: Vec<(f64, f64)>,
}

impl JumpBatch {
    pub fn count(&self) -> usize {
        self.events.len()
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("dt must be positive, got {dt}")))
    }
}

/// One draw of `sigma_w * (W_{t+dt} - W_t)`.
pub fn sample_wiener_increment(rng: &mut RngStream, sigma_w: f64, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    if sigma_w == 0.0 {
        return Ok(0.0);
    }
    Ok(sigma_w * dt.sqrt() * rng.standard_normal())
}

/// Compound Poisson increment over an interval of length `dt`.
///
/// Arrival times are generated from unit-exponential gaps, so the number of
/// events is exactly `Poisson(intensity * dt)` and, conditional on the count,
/// the offsets are the order statistics of i.i.d. uniforms on `[0, dt)`.
pub fn sample_compound_poisson_increment(
    rng: &mut RngStream,
    intensity: f64,
    height_std: f64,
    dt: f64,
) -> Result<JumpBatch> {
    check_dt(dt)?;
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(Error::invalid(format!("intensity must be >= 0, got {intensity}")));
    }
    if !(height_std.is_finite() && height_std >= 0.0) {
        return Err(Error::invalid(format!("height_std must be >= 0, got {height_std}")));
    }
    let mut batch = JumpBatch::default();
    poisson_events(rng, intensity, height_std, dt, |offset, height| {
        batch.total += height;
        batch.events.push((offset, height));
    });
    Ok(batch)
}

/// Streams compound Poisson events on `[0, dt)` into `emit` without allocating.
#[inline]
pub(crate) fn poisson_events(
    rng: &mut RngStream,
    intensity: f64,
    height_std: f64,
    dt: f64,
    mut emit: impl FnMut(f64, f64),
) {
    if intensity == 0.0 {
        return;
    }
    let mut t = rng.standard_exponential() / intensity;
    while t < dt {
        let height = height_std * rng.standard_normal();
        emit(t, height);
        t += rng.standard_exponential() / intensity;
    }
}

/// One draw of a gamma subordinator increment, `Gamma(shape = c * dt, rate)`.
pub fn sample_gamma_increment(rng: &mut RngStream, c: f64, rate: f64, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    positive("c", c)?;
    positive("rate", rate)?;
    Ok(gamma_variate(rng, c * dt) / rate)
}

/// Unit-rate `Gamma(shape)` variate.
///
/// The integer part of the shape is a sum of unit exponentials; the
/// fractional part `alpha` in `(0, 1)` uses Jöhnk's rejection sampler
/// `E * X / (X + Y)` with `X = U^(1/alpha)`, `Y = V^(1/(1-alpha))`, accepted
/// when `X + Y <= 1`. The acceptance test runs on logarithms because
/// `U^(1/alpha)` underflows for the tiny shapes of high-frequency grids.
pub(crate) fn gamma_variate(rng: &mut RngStream, shape: f64) -> f64 {
    let whole = shape.floor();
    let frac = shape - whole;
    let mut total = 0.0;
    if whole > 0.0 {
        let mut log_prod = 0.0;
        for _ in 0..whole as u64 {
            log_prod += rng.uniform_open0().ln();
        }
        total -= log_prod;
    }
    if frac > 0.0 {
        total += johnk(rng, frac);
    }
    total
}

fn johnk(rng: &mut RngStream, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    loop {
        let log_x = rng.uniform_open0().ln() / alpha;
        let log_y = rng.uniform_open0().ln() / (1.0 - alpha);
        let hi = log_x.max(log_y);
        let log_sum = hi + ((log_x - hi).exp() + (log_y - hi).exp()).ln();
        if log_sum <= 0.0 {
            let e = rng.standard_exponential();
            return e * (log_x - log_sum).exp();
        }
    }
}

/// Second moment of the Lévy measure, `\int x^2 mu(dx)`.
pub fn jump_variance_rate(model: &LevyModel) -> f64 {
    match model.jumps {
        JumpFamily::None => 0.0,
        JumpFamily::CompoundPoisson { intensity, height_std } => intensity * height_std * height_std,
        JumpFamily::Gamma { c, rate } => c / (rate * rate),
    }
}

//! Time-domain oracle for the reduced induction system `dB/dt = M·B`.
//!
//! Classical RK4 integration, growth-rate fitting from the trajectory alone,
//! and a cross-check of the fitted rate against the characteristic roots.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::FilamentGeometry;
use crate::operator::{build_matrix, CoefficientScheme, DynamoMatrix, OperatorError, PlasmaParams};
use crate::spectrum::{characteristic_roots, Spectrum};

/// Fits with a larger RMS deviation are not trusted.
pub const FIT_VALID_RESIDUAL: f64 = 1e-3;
/// Cross-check pass threshold on rate and frequency residuals.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

const RENORM_HIGH: f64 = 1e100;
const RENORM_LOW: f64 = 1e-100;
const VANISHED: f64 = 1e-300;
const MAX_STORED_SAMPLES: usize = 400_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("time step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("end time {t_end} must be at least one step {dt}")]
    HorizonTooShort { t_end: f64, dt: f64 },
    #[error("initial state must be finite and nonzero")]
    ZeroInitialState,
    #[error("operator matrix has non-finite entries")]
    NonFiniteMatrix,
    #[error("trajectory has {0} samples, at least 10 are needed")]
    TooShort(usize),
    #[error("DEGENERATE_FIT: |B| vanished at t = {0}")]
    DegenerateFit(f64),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Sampled solution. The physical state at sample `k` is
/// `states[k] · exp(log_scale[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub log_scale: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> [f64; 2] {
        let f = self.log_scale[k].exp();
        [self.states[k][0] * f, self.states[k][1] * f]
    }

    pub fn last_state(&self) -> [f64; 2] {
        self.state(self.len() - 1)
    }

    /// `ln‖B(t_k)‖`, computed without leaving the renormalized range.
    pub fn log_norm(&self, k: usize) -> f64 {
        let [x, y] = self.states[k];
        x.hypot(y).ln() + self.log_scale[k]
    }
}

fn rk4_step(m: &DynamoMatrix, b: [f64; 2], h: f64) -> [f64; 2] {
    let axpy = |v: [f64; 2], a: f64, w: [f64; 2]| [v[0] + a * w[0], v[1] + a * w[1]];
    let k1 = m.apply(b);
    let k2 = m.apply(axpy(b, 0.5 * h, k1));
    let k3 = m.apply(axpy(b, 0.5 * h, k2));
    let k4 = m.apply(axpy(b, h, k3));
    [
        b[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        b[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Classical RK4 with uniform steps no longer than `dt`, keeping every sample.
pub fn integrate(m: &DynamoMatrix, b0: [f64; 2], t_end: f64, dt: f64) -> Result<Trajectory, SimError> {
    integrate_strided(m, b0, t_end, dt, 1)
}

/// Like [`integrate`] but stores only every `stride`-th sample (plus the last).
pub fn integrate_strided(
    m: &DynamoMatrix,
    b0: [f64; 2],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, SimError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SimError::NonPositiveStep(dt));
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(SimError::HorizonTooShort { t_end, dt });
    }
    let n0 = b0[0].hypot(b0[1]);
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(SimError::ZeroInitialState);
    }
    if !m.is_finite() {
        return Err(SimError::NonFiniteMatrix);
    }
    let stride = stride.max(1);
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;

    let cap = steps / stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        log_scale: Vec::with_capacity(cap),
    };
    let mut b = b0;
    let mut log = 0.0;
    traj.times.push(0.0);
    traj.states.push(b);
    traj.log_scale.push(log);

    for k in 1..=steps {
        b = rk4_step(m, b, h);
        let norm = b[0].hypot(b[1]);
        if norm > RENORM_HIGH || (norm < RENORM_LOW && norm > 0.0) {
            b = [b[0] / norm, b[1] / norm];
            log += norm.ln();
        }
        if k % stride == 0 || k == steps {
            traj.times.push(if k == steps { t_end } else { k as f64 * h });
            traj.states.push(b);
            traj.log_scale.push(log);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRateFit {
    pub re_gamma: f64,
    pub im_gamma: f64,
    pub fit_residual: f64,
    /// Number of half-turns of the field direction inside the fit window.
    pub half_turns: usize,
}

impl GrowthRateFit {
    pub fn is_valid(&self) -> bool {
        self.fit_residual >= 0.0 && self.fit_residual < FIT_VALID_RESIDUAL
    }

    pub fn is_rotating(&self) -> bool {
        self.half_turns > 0
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, rms residual)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (x0, y0) = points[0];
    let points: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x - x0, y - y0)).collect();
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    (slope, (rss / n).sqrt())
}

fn wrap_pi(d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// Fits `Re γ` and `Im γ` from a trajectory after discarding the first 20%.
///
/// If the field direction turns by at least half a revolution inside the
/// window, `log‖B‖` is sampled each time the direction returns to its
/// window-start orientation; for a linear flow these samples lie exactly on
/// a line of slope `Re γ`, and the return period gives `Im γ`. Otherwise the
/// slope is fitted over every retained sample and `Im γ = 0`.
pub fn fit_growth_rate(traj: &Trajectory) -> Result<GrowthRateFit, SimError> {
    let n = traj.len();
    if n < 10 {
        return Err(SimError::TooShort(n));
    }
    let start = n / 5;

    let mut log_norms = Vec::with_capacity(n - start);
    for k in start..n {
        let [x, y] = traj.states[k];
        let ln = traj.log_norm(k);
        if x.hypot(y) < VANISHED || !ln.is_finite() {
            return Err(SimError::DegenerateFit(traj.times[k]));
        }
        log_norms.push(ln);
    }
    let times = &traj.times[start..];

    let mut phase = Vec::with_capacity(log_norms.len());
    let mut prev = traj.states[start][1].atan2(traj.states[start][0]);
    let mut acc = 0.0;
    for k in start..n {
        let a = traj.states[k][1].atan2(traj.states[k][0]);
        acc += wrap_pi(a - prev);
        prev = a;
        phase.push(acc);
    }
    let total = *phase.last().unwrap();
    let dir = if total >= 0.0 { 1.0 } else { -1.0 };
    let half = std::f64::consts::PI;

    let mut strobe = vec![(times[0], log_norms[0])];
    let mut turns = vec![(times[0], 0.0)];
    let mut next = 1usize;
    for j in 0..phase.len() - 1 {
        let (p0, p1) = (dir * phase[j], dir * phase[j + 1]);
        while p1 >= next as f64 * half && p0 < next as f64 * half {
            let level = next as f64 * half;
            let u = (level - p0) / (p1 - p0);
            let t = times[j] + u * (times[j + 1] - times[j]);
            let ln = log_norms[j] + u * (log_norms[j + 1] - log_norms[j]);
            strobe.push((t, ln));
            turns.push((t, level));
            next += 1;
        }
    }
    let half_turns = strobe.len() - 1;

    if half_turns > 0 {
        let (re, resid) = least_squares(&strobe);
        let (im, _) = least_squares(&turns);
        Ok(GrowthRateFit {
            re_gamma: re,
            im_gamma: im,
            fit_residual: resid,
            half_turns,
        })
    } else {
        let pts: Vec<(f64, f64)> = times.iter().copied().zip(log_norms).collect();
        let (re, resid) = least_squares(&pts);
        Ok(GrowthRateFit {
            re_gamma: re,
            im_gamma: 0.0,
            fit_residual: resid,
            half_turns: 0,
        })
    }
}

/// Closed-form `exp(M t)` for a real 2×2 matrix.
///
/// With `s = tr/2` and `q² = s² − det`,
/// `exp(Mt) = e^{st} [c(t) I + S(t)(M − sI)]` where `c = cosh(qt)`,
/// `S = sinh(qt)/q` (circular functions when `q² < 0`).
pub fn expm(m: &DynamoMatrix, t: f64) -> [[f64; 2]; 2] {
    let s = 0.5 * m.trace();
    let q2 = s * s - m.det();
    let (c, sfun) = if q2 > 0.0 {
        let q = q2.sqrt();
        let x = q * t;
        if x.abs() < 1e-6 {
            (1.0 + x * x / 2.0, t * (1.0 + x * x / 6.0))
        } else {
            (x.cosh(), x.sinh() / q)
        }
    } else if q2 < 0.0 {
        let w = (-q2).sqrt();
        let x = w * t;
        if x.abs() < 1e-6 {
            (1.0 - x * x / 2.0, t * (1.0 - x * x / 6.0))
        } else {
            (x.cos(), x.sin() / w)
        }
    } else {
        (1.0, t)
    };
    let e = (s * t).exp();
    [
        [e * (c + sfun * (m.m11 - s)), e * sfun * m.m12],
        [e * sfun * m.m21, e * (c + sfun * (m.m22 - s))],
    ]
}

pub fn expm_apply(m: &DynamoMatrix, t: f64, b0: [f64; 2]) -> [f64; 2] {
    let e = expm(m, t);
    [
        e[0][0] * b0[0] + e[0][1] * b0[1],
        e[1][0] * b0[0] + e[1][1] * b0[1],
    ]
}

/// Terminal RK4 error against the exact solution.
pub fn terminal_error(m: &DynamoMatrix, b0: [f64; 2], t_end: f64, dt: f64) -> Result<f64, SimError> {
    let traj = integrate(m, b0, t_end, dt)?;
    let got = traj.last_state();
    let want = expm_apply(m, t_end, b0);
    Ok((got[0] - want[0]).hypot(got[1] - want[1]))
}

/// `err(dt) / err(dt/2)`; about 16 for a fourth-order method.
pub fn convergence_ratio(m: &DynamoMatrix, b0: [f64; 2], t_end: f64, dt: f64) -> Result<f64, SimError> {
    Ok(terminal_error(m, b0, t_end, dt)? / terminal_error(m, b0, t_end, 0.5 * dt)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// First integration horizon.
    pub t_end: f64,
    /// Horizons double until the fitted rate settles or this is exceeded.
    pub max_t_end: f64,
    /// Change in fitted rate between successive horizons considered settled.
    pub settle_tol: f64,
    pub b0: [f64; 2],
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 20.0,
            max_t_end: 2560.0,
            settle_tol: 1e-7,
            b0: [1.0, 0.5],
        }
    }
}

/// Fits the dominant growth rate of `m`, lengthening the horizon until the
/// estimate stops moving. Returns the fit and the horizon used.
pub fn fit_dominant_rate(m: &DynamoMatrix, cfg: &SimConfig) -> Result<(GrowthRateFit, f64), SimError> {
    let mut horizon = cfg.t_end;
    let mut prev: Option<f64> = None;
    loop {
        let steps = (horizon / cfg.dt).ceil() as usize;
        let stride = steps / MAX_STORED_SAMPLES + 1;
        let traj = integrate_strided(m, cfg.b0, horizon, cfg.dt, stride)?;
        let fit = fit_growth_rate(&traj)?;
        let settled = fit.is_valid()
            && (fit.half_turns >= 2
                || prev.is_some_and(|p| (p - fit.re_gamma).abs() < cfg.settle_tol));
        if settled || horizon * 2.0 > cfg.max_t_end {
            return Ok((fit, horizon));
        }
        prev = Some(fit.re_gamma);
        horizon *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    pub spectrum: Spectrum,
    pub fit: GrowthRateFit,
    pub horizon: f64,
    /// `|fitted Re γ − max Re γ|`.
    pub re_residual: f64,
    /// `|fitted Im γ − |Im γ||`, only for a conjugate pair.
    pub im_residual: Option<f64>,
}

impl CrossCheck {
    pub fn passed(&self) -> bool {
        self.re_residual < CROSS_CHECK_TOL && self.im_residual.is_none_or(|r| r < CROSS_CHECK_TOL)
    }

    pub fn max_residual(&self) -> f64 {
        self.re_residual.max(self.im_residual.unwrap_or(0.0))
    }
}

/// Compares the spectral roots of one matrix with the rate fitted from the
/// time evolution of another (normally the same).
pub fn compare(spectral: &DynamoMatrix, temporal: &DynamoMatrix, cfg: &SimConfig) -> Result<CrossCheck, SimError> {
    let spectrum = characteristic_roots(spectral);
    let (fit, horizon) = fit_dominant_rate(temporal, cfg)?;
    let re_residual = (fit.re_gamma - spectrum.max_re()).abs();
    let im_residual = spectrum
        .is_conjugate_pair()
        .then(|| (fit.im_gamma - spectrum.gamma_plus.im.abs()).abs());
    Ok(CrossCheck {
        spectrum,
        fit,
        horizon,
        re_residual,
        im_residual,
    })
}

pub fn cross_check(
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    scheme: &dyn CoefficientScheme,
) -> Result<CrossCheck, SimError> {
    cross_check_with(geom, params, scheme, scheme, &SimConfig::default())
}

/// Cross-check with separately chosen spectral and temporal schemes.
pub fn cross_check_with(
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    spectral_scheme: &dyn CoefficientScheme,
    temporal_scheme: &dyn CoefficientScheme,
    cfg: &SimConfig,
) -> Result<CrossCheck, SimError> {
    let spectral = build_matrix(geom, params, spectral_scheme)?;
    let temporal = build_matrix(geom, params, temporal_scheme)?;
    compare(&spectral, &temporal, cfg)
}

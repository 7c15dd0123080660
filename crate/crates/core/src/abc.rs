//! ABC flows, their twisted flux-tube representation and the tube-frame
//! growth-rate system.

use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Width of the exclusion band around `sin θ = 0` and `cos θ = 0`.
pub const SINGULAR_BAND: f64 = 1e-12;

/// Largest imaginary part tolerated when summing the complex-exponential form.
pub const IMAG_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbcError {
    #[error("complex-form ABC velocity has imaginary residual {0:e}")]
    ImaginaryResidual(f64),
    #[error("{function} is singular at theta = {theta} ({which} within {SINGULAR_BAND:e} of zero)")]
    SingularTheta {
        function: &'static str,
        theta: f64,
        which: &'static str,
    },
    #[error("tube radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("tube radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("torsion must be nonzero for the toroidal constraint")]
    ZeroTorsion,
    #[error("resistivity must be nonnegative, got {0}")]
    NegativeResistivity(f64),
}

impl AbcError {
    pub fn is_singularity(&self) -> bool {
        matches!(self, AbcError::SingularTheta { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct AbcParams {
    pub A: f64,
    pub B: f64,
    pub C: f64,
}

impl AbcParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { A: a, B: b, C: c }
    }

    pub fn is_strong_stagnation(&self) -> bool {
        self.B == 0.0 && self.C == 0.0
    }
}

/// ABC field assembled from its complex-exponential modes,
///
/// `A[(i,1,0)e^{iz} + c.c.] + B[(0,i,1)e^{ix} + c.c.] + C[(1,0,i)e^{iy} + c.c.]`,
/// which is real: `2(−A sin z + C cos y, A cos z − B sin x, B cos x − C sin y)`.
pub fn abc_velocity_paper(params: &AbcParams, p: &Vec3) -> Result<Vec3, AbcError> {
    let (v, imag) = abc_velocity_complex(params, p);
    let scale = 1.0f64.max(params.A.abs() + params.B.abs() + params.C.abs());
    if imag > IMAG_TOL * scale {
        return Err(AbcError::ImaginaryResidual(imag));
    }
    Ok(v)
}

/// Real part of the complex-exponential sum and its largest imaginary
/// component.
pub fn abc_velocity_complex(params: &AbcParams, p: &Vec3) -> (Vec3, f64) {
    let i = Complex64::i();
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    let mode = |dir: [Complex64; 3], phase: f64| -> [Complex64; 3] {
        let e = Complex64::from_polar(1.0, phase);
        let ec = Complex64::from_polar(1.0, -phase);
        let conj = [dir[0].conj(), dir[1].conj(), dir[2].conj()];
        [
            dir[0] * e + conj[0] * ec,
            dir[1] * e + conj[1] * ec,
            dir[2] * e + conj[2] * ec,
        ]
    };
    let a = mode([i, one, zero], p.z);
    let b = mode([zero, i, one], p.x);
    let c = mode([one, zero, i], p.y);

    let mut out = Vec3::zeros();
    let mut imag = 0.0f64;
    for k in 0..3 {
        let v = a[k] * params.A + b[k] * params.B + c[k] * params.C;
        out[k] = v.re;
        imag = imag.max(v.im.abs());
    }
    (out, imag)
}

/// Textbook ABC field `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
pub fn abc_velocity_standard(params: &AbcParams, p: &Vec3) -> Vec3 {
    let AbcParams { A, B, C } = *params;
    Vec3::new(
        A * p.z.sin() + C * p.y.cos(),
        B * p.x.sin() + A * p.z.cos(),
        C * p.y.sin() + B * p.x.cos(),
    )
}

/// Point in twisted flux-tube coordinates; the twist angle is
/// `θ(s) = θ₀ − τ₀ s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubePoint {
    pub r: f64,
    pub s: f64,
    pub theta0: f64,
    pub tau0: f64,
}

impl TubePoint {
    pub fn new(r: f64, s: f64, theta0: f64, tau0: f64) -> Result<Self, AbcError> {
        if !(r >= 0.0) {
            return Err(AbcError::NegativeRadius(r));
        }
        Ok(Self {
            r,
            s,
            theta0,
            tau0,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta0 - self.tau0 * self.s
    }
}

pub fn tube_to_cartesian(tp: &TubePoint) -> Vec3 {
    let (sin, cos) = tp.theta().sin_cos();
    Vec3::new(tp.r * cos, tp.r * sin, tp.s)
}

/// Which exponent closes the `B` term of the radial bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialBracket {
    /// `e^{ir cos θ} − e^{−ir sin θ}`.
    #[default]
    Mixed,
    /// `e^{ir cos θ} − e^{−ir cos θ}`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeVelocity {
    pub v_s: f64,
    pub v_r: f64,
    /// Imaginary part discarded from the radial bracket.
    pub v_r_imag: f64,
}

/// Toroidal and radial ABC velocity in tube coordinates.
pub fn tube_velocity(
    params: &AbcParams,
    tp: &TubePoint,
    bracket: RadialBracket,
) -> Result<TubeVelocity, AbcError> {
    if !(tp.r >= 0.0) {
        return Err(AbcError::NegativeRadius(tp.r));
    }
    let theta = tp.theta();
    let (sin_t, cos_t) = theta.sin_cos();
    if sin_t.abs() < SINGULAR_BAND {
        return Err(AbcError::SingularTheta {
            function: "tube_velocity",
            theta,
            which: "sin(theta)",
        });
    }
    let r = tp.r;
    let i = Complex64::i();
    let e = |phase: f64| Complex64::from_polar(1.0, phase);

    let v_s = params.B * (e(r * cos_t) + e(-r * cos_t)) + params.C * (e(r * sin_t) + e(-r * sin_t));

    let m = e(r * tp.s) - e(-r * tp.s);
    let n = e(r * sin_t) - e(-r * sin_t);
    let closing = match bracket {
        RadialBracket::Mixed => e(-r * sin_t),
        RadialBracket::Symmetric => e(-r * cos_t),
    };
    let inner = i * params.A * m + i * params.C * n + i * r * params.B * (e(r * cos_t) - closing);
    let v_r = inner / (sin_t * (1.0 + r));

    Ok(TubeVelocity {
        v_s: v_s.re,
        v_r: v_r.re,
        v_r_imag: v_r.im,
    })
}

/// Radial flow on the tube axis in its literal form, `A csc θ · s`.
pub fn axis_radial_flow(a: f64, theta: f64, s: f64) -> Result<f64, AbcError> {
    let sin_t = theta.sin();
    if sin_t.abs() < SINGULAR_BAND {
        return Err(AbcError::SingularTheta {
            function: "axis_radial_flow",
            theta,
            which: "sin(theta)",
        });
    }
    Ok(a / sin_t * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StagnationClass {
    /// `B = C = 0`: toroidal flow vanishes identically, no dynamo action.
    StrongStagnation,
    NoStagnationConstraint,
}

impl StagnationClass {
    pub fn name(self) -> &'static str {
        match self {
            StagnationClass::StrongStagnation => "STRONG_STAGNATION",
            StagnationClass::NoStagnationConstraint => "NO_STAGNATION_CONSTRAINT",
        }
    }

    pub fn supports_dynamo(self) -> bool {
        self == StagnationClass::NoStagnationConstraint
    }
}

impl fmt::Display for StagnationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn stagnation_classify(params: &AbcParams) -> StagnationClass {
    if params.is_strong_stagnation() {
        StagnationClass::StrongStagnation
    } else {
        StagnationClass::NoStagnationConstraint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeField {
    pub b_s: f64,
    pub b_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TubeGrowthClass {
    Marginal,
    TrivialField,
    SlowCandidate,
}

impl TubeGrowthClass {
    pub fn name(self) -> &'static str {
        match self {
            TubeGrowthClass::Marginal => "MARGINAL",
            TubeGrowthClass::TrivialField => "TRIVIAL_FIELD",
            TubeGrowthClass::SlowCandidate => "SLOW_CANDIDATE",
        }
    }
}

impl fmt::Display for TubeGrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeGrowth {
    /// Local growth rate; only determined in the ideal, nontrivial case.
    pub gamma: Option<f64>,
    pub class: TubeGrowthClass,
    /// Toroidal amplitude `B_θ / (τ₀ r²)` forced by marginality.
    pub b_s_constraint: Option<f64>,
}

/// Local growth rate of the stretching-only tube system.
///
/// Without diffusion a nonzero poloidal field forces `γ = 0` and pins the
/// toroidal amplitude; with diffusion only a slow-dynamo candidate is
/// reported.
pub fn tube_growth_rate(field: &TubeField, tp: &TubePoint, eta: f64) -> Result<TubeGrowth, AbcError> {
    if !(tp.r > 0.0) {
        return Err(AbcError::NonPositiveRadius(tp.r));
    }
    if !(eta >= 0.0) {
        return Err(AbcError::NegativeResistivity(eta));
    }
    if field.b_theta == 0.0 {
        return Ok(TubeGrowth {
            gamma: None,
            class: TubeGrowthClass::TrivialField,
            b_s_constraint: None,
        });
    }
    if eta > 0.0 {
        return Ok(TubeGrowth {
            gamma: None,
            class: TubeGrowthClass::SlowCandidate,
            b_s_constraint: None,
        });
    }
    if tp.tau0 == 0.0 {
        return Err(AbcError::ZeroTorsion);
    }
    Ok(TubeGrowth {
        gamma: Some(0.0),
        class: TubeGrowthClass::Marginal,
        b_s_constraint: Some(field.b_theta / (tp.tau0 * tp.r * tp.r)),
    })
}

/// Residuals of the three stretching equations for a trial `γ`, given the
/// local radial flow and its arclength gradient.
///
/// Returns `[toroidal, poloidal·sin, poloidal·cos]`.
pub fn tube_system_residuals(
    field: &TubeField,
    tp: &TubePoint,
    gamma: f64,
    v_r: f64,
    dvr_ds: f64,
) -> [f64; 3] {
    let r2 = tp.r * tp.r;
    let (sin_t, cos_t) = tp.theta().sin_cos();
    let bracket = field.b_s - field.b_theta / (tp.tau0 * r2);
    [
        gamma * field.b_s - bracket * tp.tau0 * v_r * cos_t,
        gamma * field.b_theta / r2 * sin_t + bracket * dvr_ds * cos_t,
        gamma * field.b_theta / r2 * cos_t - bracket * dvr_ds * sin_t,
    ]
}

/// Arclength gradient of the radial flow at a strong stagnation point,
/// `A[(1 + tan²θ)τ₀² + cos s]`.
pub fn radial_flow_gradient(a: f64, theta: f64, tau0: f64, s: f64) -> Result<f64, AbcError> {
    let cos_t = theta.cos();
    if cos_t.abs() < SINGULAR_BAND {
        return Err(AbcError::SingularTheta {
            function: "radial_flow_gradient",
            theta,
            which: "cos(theta)",
        });
    }
    let tan = theta.tan();
    Ok(a * ((1.0 + tan * tan) * tau0 * tau0 + s.cos()))
}

/// Central-difference divergence of a vector field.
pub fn divergence_fd<F: Fn(&Vec3) -> Vec3>(field: F, p: &Vec3, h: f64) -> f64 {
    (0..3)
        .map(|k| {
            let mut hi = *p;
            let mut lo = *p;
            hi[k] += h;
            lo[k] -= h;
            (field(&hi)[k] - field(&lo)[k]) / (2.0 * h)
        })
        .sum()
}

/// Central-difference curl of a vector field.
pub fn curl_fd<F: Fn(&Vec3) -> Vec3>(field: F, p: &Vec3, h: f64) -> Vec3 {
    let d = |axis: usize, comp: usize| {
        let mut hi = *p;
        let mut lo = *p;
        hi[axis] += h;
        lo[axis] -= h;
        (field(&hi)[comp] - field(&lo)[comp]) / (2.0 * h)
    };
    Vec3::new(d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0))
}

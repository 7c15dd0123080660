//! Velocity decomposition along the filament and the mean-field α coefficient.

use thiserror::Error;

use crate::geometry::FilamentGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("mean square of the normal flow must be finite and nonnegative, got {0}")]
    NegativeMeanSquare(f64),
    #[error("flow component {name} is not finite")]
    NonFinite { name: &'static str },
}

/// Flow `v = v_s t + v_n n` with the ensemble mean square of `v_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowProfile {
    pub v_s: f64,
    pub v_n: f64,
    pub v_n_meansq: f64,
}

impl FlowProfile {
    pub fn new(v_s: f64, v_n: f64, v_n_meansq: f64) -> Result<Self, FlowError> {
        if !v_s.is_finite() {
            return Err(FlowError::NonFinite { name: "v_s" });
        }
        if !v_n.is_finite() {
            return Err(FlowError::NonFinite { name: "v_n" });
        }
        if !v_n_meansq.is_finite() || v_n_meansq < 0.0 {
            return Err(FlowError::NegativeMeanSquare(v_n_meansq));
        }
        Ok(Self {
            v_s,
            v_n,
            v_n_meansq,
        })
    }

    /// Tangential-only flow.
    pub fn tangential(v_s: f64) -> Self {
        Self {
            v_s,
            v_n: 0.0,
            v_n_meansq: 0.0,
        }
    }

    /// Field equipartition `B_n = B_b` holds iff `v_s = −1`.
    pub fn supports_equipartition(&self) -> bool {
        self.v_s == -1.0
    }
}

/// `α = −κ₀ ⟨v_n²⟩`.
pub fn alpha_helicity(geom: &FilamentGeometry, flow: &FlowProfile) -> f64 {
    -geom.kappa0 * flow.v_n_meansq
}

/// Binormal amplitude produced from the normal one, `B_b = −B_n v_s`.
pub fn binormal_transfer(b_n: f64, flow: &FlowProfile) -> f64 {
    -b_n * flow.v_s
}

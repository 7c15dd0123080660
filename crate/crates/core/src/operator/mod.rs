//! The 2×2 evolution operator `dB/dt = M·B` for `B = (B_n, B_b)`.
//!
//! [`build_matrix`] produces `M` through a registered [`CoefficientScheme`];
//! the eigenproblem is `det(γI − M) = 0`. [`paper_matrix`] keeps the
//! γ-embedded matrices in their literal form (including the flipped
//! sign on the second row) so that they can be compared against `M`.

mod scheme;

pub use scheme::{
    scheme, CoefficientScheme, DegenerateBranch, ExactLaplacian, LaminarBranch, LinearBinormal,
    QuadraticBinormal, SchemeRegistry, SchemeTag, ZeroHelicityQuartic, BRANCH_TOL,
};

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::flow::FlowProfile;
use crate::geometry::FilamentGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("unknown scheme '{name}' (known: {})", known.join(", "))]
    UnknownScheme { name: String, known: Vec<&'static str> },
    #[error("scheme {scheme} has no helicity term; alpha must be 0 (got {alpha})")]
    HelicityForbidden { scheme: SchemeTag, alpha: f64 },
    #[error("scheme {scheme}: {detail}")]
    BranchCondition { scheme: SchemeTag, detail: String },
    #[error("invalid plasma parameter {name} = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("matrix variant {variant:?} requires {requirement}")]
    VariantMismatch {
        variant: MatrixVariant,
        requirement: &'static str,
    },
}

/// Physical inputs of the reduced induction system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaParams {
    pub alpha: f64,
    /// Turbulent diffusivity.
    pub beta: f64,
    /// Lyapunov exponent of `|B| = B₀ e^{λt}`.
    pub lambda_exp: f64,
    pub eta: f64,
    pub flow: FlowProfile,
}

impl PlasmaParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        lambda_exp: f64,
        eta: f64,
        flow: FlowProfile,
    ) -> Result<Self, OperatorError> {
        let finite = |name, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(OperatorError::InvalidParam {
                    name,
                    value,
                    reason: "must be finite",
                })
            }
        };
        finite("alpha", alpha)?;
        finite("beta", beta)?;
        finite("lambda", lambda_exp)?;
        finite("eta", eta)?;
        if beta < 0.0 {
            return Err(OperatorError::InvalidParam {
                name: "beta",
                value: beta,
                reason: "must be nonnegative",
            });
        }
        if eta < 0.0 {
            return Err(OperatorError::InvalidParam {
                name: "eta",
                value: eta,
                reason: "must be nonnegative",
            });
        }
        Ok(Self {
            alpha,
            beta,
            lambda_exp,
            eta,
            flow,
        })
    }

    /// Laminar parameters with `λ = 1`, so that `αλ = alpha_lambda`.
    pub fn laminar(alpha_lambda: f64, v_s: f64) -> Self {
        Self {
            alpha: alpha_lambda,
            beta: 0.0,
            lambda_exp: 1.0,
            eta: 0.0,
            flow: FlowProfile::tangential(v_s),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// α and λ only ever act through their product.
    pub fn alpha_lambda(&self) -> f64 {
        self.alpha * self.lambda_exp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamoMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub scheme: SchemeTag,
}

impl DynamoMatrix {
    pub fn new(rows: [[f64; 2]; 2], scheme: SchemeTag) -> Self {
        Self {
            m11: rows[0][0],
            m12: rows[0][1],
            m21: rows[1][0],
            m22: rows[1][1],
            scheme,
        }
    }

    /// `c·I`.
    pub fn scalar(c: f64, scheme: SchemeTag) -> Self {
        Self::new([[c, 0.0], [0.0, c]], scheme)
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            m11: self.m11 * c,
            m12: self.m12 * c,
            m21: self.m21 * c,
            m22: self.m22 * c,
            scheme: self.scheme,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn to_nalgebra(&self) -> Matrix2<f64> {
        Matrix2::new(self.m11, self.m12, self.m21, self.m22)
    }

    /// `det(γI − M)` at a complex γ.
    pub fn characteristic_at(&self, gamma: Complex64) -> Complex64 {
        (gamma - self.m11) * (gamma - self.m22) - self.m12 * self.m21
    }
}

pub fn build_matrix(
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    scheme: &dyn CoefficientScheme,
) -> Result<DynamoMatrix, OperatorError> {
    scheme.assemble(geom, params)
}

/// Literal γ-embedded operator matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixVariant {
    /// General turbulent operator with helicity.
    General18,
    /// Laminar (`β = 0`) operator.
    Laminar19,
    /// Zero-helicity turbulent operator.
    Turbulent24,
    /// Vanishing-β limit of the zero-helicity operator.
    Limit25,
}

impl MatrixVariant {
    pub const ALL: [MatrixVariant; 4] = [
        MatrixVariant::General18,
        MatrixVariant::Laminar19,
        MatrixVariant::Turbulent24,
        MatrixVariant::Limit25,
    ];
}

pub type ComplexMatrix2 = [[Complex64; 2]; 2];

pub fn complex_det(m: &ComplexMatrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// The matrix exactly as written for `variant`, with γ substituted.
pub fn paper_matrix(
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    variant: MatrixVariant,
    gamma: Complex64,
) -> Result<ComplexMatrix2, OperatorError> {
    let k = Complex64::from(geom.kappa0);
    let k2 = k * k;
    let beta = params.beta;
    let al = Complex64::from(params.alpha_lambda());
    let v_s = params.flow.v_s;

    let require = |ok: bool, requirement| {
        if ok {
            Ok(())
        } else {
            Err(OperatorError::VariantMismatch {
                variant,
                requirement,
            })
        }
    };

    let m = match variant {
        MatrixVariant::General18 => [
            [gamma + 2.0 * beta * k2 - al, -k],
            [-(al + k * v_s), -(gamma + beta * k2)],
        ],
        MatrixVariant::Laminar19 => {
            require(beta == 0.0, "beta = 0")?;
            [[gamma - al, -k], [-(al + k * v_s), -gamma]]
        }
        MatrixVariant::Turbulent24 => {
            require(params.alpha == 0.0, "alpha = 0")?;
            [
                [gamma + 2.0 * beta * k2, -k],
                [-(k * v_s), -(gamma + beta * k2 * k2)],
            ]
        }
        MatrixVariant::Limit25 => {
            require(params.alpha == 0.0 && beta == 0.0, "alpha = 0 and beta = 0")?;
            [[gamma, -k], [-(k * v_s), -gamma]]
        }
    };
    Ok(m)
}

/// Determinants of the literal matrix and of `γI − M` at the same γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiteralResidual {
    pub variant: MatrixVariant,
    pub gamma: Complex64,
    pub literal_det: Complex64,
    pub evolution_det: Complex64,
}

impl LiteralResidual {
    /// True when the literal matrix fails to annihilate γ.
    pub fn literal_inconsistent(&self, tol: f64) -> bool {
        self.literal_det.norm() > tol
    }
}

pub fn literal_residual(
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    variant: MatrixVariant,
    gamma: Complex64,
    scheme: &dyn CoefficientScheme,
) -> Result<LiteralResidual, OperatorError> {
    let literal = paper_matrix(geom, params, variant, gamma)?;
    let m = build_matrix(geom, params, scheme)?;
    Ok(LiteralResidual {
        variant,
        gamma,
        literal_det: complex_det(&literal),
        evolution_det: m.characteristic_at(gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> FilamentGeometry {
        FilamentGeometry::helical(1.0).unwrap()
    }

    fn rows_close(m: &DynamoMatrix, want: [[f64; 2]; 2]) -> bool {
        m.rows()
            .iter()
            .flatten()
            .zip(want.iter().flatten())
            .all(|(a, b)| (a - b).abs() < 1e-15)
    }

    #[test]
    fn eq18_laminar_example() {
        let m = build_matrix(&unit(), &PlasmaParams::laminar(-1.0, -1.0), &QuadraticBinormal).unwrap();
        assert!(rows_close(&m, [[-1.0, 1.0], [-2.0, 0.0]]));
    }

    #[test]
    fn curvature_coupling_only() {
        let p = PlasmaParams::laminar(0.0, -1.0);
        for s in SchemeRegistry::with_defaults().iter().filter(|s| !s.tag().is_branch()) {
            let m = build_matrix(&unit(), &p, s.as_ref()).unwrap();
            assert!(rows_close(&m, [[0.0, 1.0], [-1.0, 0.0]]), "{}", s.name());
        }
    }

    #[test]
    fn eq24_example() {
        let p = PlasmaParams::laminar(0.0, -1.0).with_beta(0.1);
        let m = build_matrix(&unit(), &p, &ZeroHelicityQuartic).unwrap();
        assert!(rows_close(&m, [[-0.2, 1.0], [-1.0, -0.1]]));
    }

    #[test]
    fn eq24_rejects_helicity() {
        let p = PlasmaParams::laminar(0.5, -1.0);
        assert!(matches!(
            build_matrix(&unit(), &p, &ZeroHelicityQuartic),
            Err(OperatorError::HelicityForbidden { .. })
        ));
    }

    #[test]
    fn binormal_exponents() {
        let g = FilamentGeometry::helical(2.0).unwrap();
        let p = PlasmaParams::laminar(0.0, 0.0).with_beta(1.0);
        let m22 = |s: &dyn CoefficientScheme| build_matrix(&g, &p, s).unwrap().m22;
        assert_eq!(m22(&LinearBinormal), -2.0);
        assert_eq!(m22(&QuadraticBinormal), -4.0);
        assert_eq!(m22(&ExactLaplacian), -4.0);
        assert_eq!(m22(&ZeroHelicityQuartic), -16.0);
    }

    #[test]
    fn params_validation() {
        let f = FlowProfile::tangential(-1.0);
        assert!(PlasmaParams::new(0.0, -1.0, 1.0, 0.0, f).is_err());
        assert!(PlasmaParams::new(0.0, 0.0, 1.0, -1.0, f).is_err());
        assert!(PlasmaParams::new(f64::NAN, 0.0, 1.0, 0.0, f).is_err());
        assert!(PlasmaParams::new(-1.0, 0.5, 2.0, 0.1, f).is_ok());
    }

    #[test]
    fn degenerate_scheme_is_scalar() {
        let g = FilamentGeometry::helical(1.5).unwrap();
        let m = build_matrix(&g, &PlasmaParams::laminar(-3.0, -1.0), &DegenerateBranch).unwrap();
        assert!(rows_close(&m, [[1.5, 0.0], [0.0, 1.5]]));
        assert!(build_matrix(&g, &PlasmaParams::laminar(-1.0, -1.0), &DegenerateBranch).is_err());
    }

    #[test]
    fn laminar_branch_requires_condition() {
        let m = build_matrix(&unit(), &PlasmaParams::laminar(-1.0, -1.0), &LaminarBranch).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m.m11 - phi).abs() < 1e-15);
        assert!((m.m22 - (1.0 - phi)).abs() < 1e-15);
        let g3 = FilamentGeometry::helical(3.0).unwrap();
        assert!(build_matrix(&g3, &PlasmaParams::laminar(-1.0, -1.0), &LaminarBranch).is_err());
    }

    #[test]
    fn limit25_literal_matrix() {
        let i = Complex64::i();
        let m = paper_matrix(&unit(), &PlasmaParams::laminar(0.0, -1.0), MatrixVariant::Limit25, i).unwrap();
        assert_eq!(m, [[i, -Complex64::from(1.0)], [Complex64::from(1.0), -i]]);
        // i·(−i) − (−1)(1) = 2: the literal sign convention does not annihilate ±i.
        assert_eq!(complex_det(&m), Complex64::from(2.0));
        let ev = build_matrix(&unit(), &PlasmaParams::laminar(0.0, -1.0), &QuadraticBinormal).unwrap();
        assert_eq!(ev.characteristic_at(i), Complex64::from(0.0));
        assert_eq!(ev.characteristic_at(-i), Complex64::from(0.0));
    }

    #[test]
    fn general18_all_zero() {
        let g = FilamentGeometry::new(0.0, 0.0).unwrap();
        let m = paper_matrix(&g, &PlasmaParams::laminar(0.0, 0.0), MatrixVariant::General18, 0.0.into()).unwrap();
        assert!(m.iter().flatten().all(|z| *z == Complex64::from(0.0)));
    }

    #[test]
    fn laminar19_substitution() {
        let p = PlasmaParams::laminar(-1.0, -1.0);
        let one = Complex64::from(1.0);
        let m = paper_matrix(&unit(), &p, MatrixVariant::Laminar19, one).unwrap();
        let want = [[2.0, -1.0], [2.0, -1.0]];
        for (row, wrow) in m.iter().zip(want.iter()) {
            for (z, w) in row.iter().zip(wrow.iter()) {
                assert_eq!(*z, Complex64::from(*w));
            }
        }
        assert_eq!(complex_det(&m), Complex64::from(0.0));

        let phi = Complex64::from((1.0 + 5f64.sqrt()) / 2.0);
        let at_phi = paper_matrix(&unit(), &p, MatrixVariant::Laminar19, phi).unwrap();
        // −(φ² + φ − 2) = −√5
        assert!((complex_det(&at_phi) - Complex64::from(-(5f64.sqrt()))).norm() < 1e-14);
    }

    #[test]
    fn variant_guards() {
        let turbulent = PlasmaParams::laminar(-1.0, -1.0).with_beta(0.2);
        let z = Complex64::from(0.0);
        assert!(paper_matrix(&unit(), &turbulent, MatrixVariant::Laminar19, z).is_err());
        assert!(paper_matrix(&unit(), &turbulent, MatrixVariant::Turbulent24, z).is_err());
        assert!(paper_matrix(&unit(), &turbulent, MatrixVariant::Limit25, z).is_err());
        assert!(paper_matrix(&unit(), &turbulent, MatrixVariant::General18, z).is_ok());
    }

    fn arb_inputs() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
        (0.0f64..5.0, -5.0f64..5.0, 0.1f64..2.0, 0.0f64..1.0, -2.0f64..2.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn trace_and_det_formulas((k, alpha, lambda, beta, v_s) in arb_inputs()) {
            let g = FilamentGeometry::new(k, k).unwrap();
            let p = PlasmaParams::new(alpha, beta, lambda, 0.0, FlowProfile::tangential(v_s)).unwrap();
            let al = alpha * lambda;
            for (s, power) in [(&LinearBinormal as &dyn CoefficientScheme, 1), (&QuadraticBinormal, 2), (&ExactLaplacian, 2)] {
                let m = build_matrix(&g, &p, s).unwrap();
                let kp = k.powi(power);
                let trace = al - 2.0 * beta * k * k - beta * kp;
                let det = -beta * kp * (al - 2.0 * beta * k * k) - k * (al + k * v_s);
                let scale = 1.0 + trace.abs() + det.abs();
                prop_assert!((m.trace() - trace).abs() < 1e-12 * scale);
                prop_assert!((m.det() - det).abs() < 1e-12 * scale);
                prop_assert_eq!(m.m12, k);
            }
        }

        #[test]
        fn exact_equals_eq18((k, alpha, lambda, beta, v_s) in arb_inputs(), tau in -5.0f64..5.0) {
            let g = FilamentGeometry::new(k, tau).unwrap();
            let p = PlasmaParams::new(alpha, beta, lambda, 0.0, FlowProfile::tangential(v_s)).unwrap();
            let a = build_matrix(&g, &p, &ExactLaplacian).unwrap();
            let b = build_matrix(&g, &p, &QuadraticBinormal).unwrap();
            prop_assert_eq!(a.rows(), b.rows());
        }

        #[test]
        fn eq24_invariants((k, _a, lambda, beta, v_s) in arb_inputs()) {
            let g = FilamentGeometry::new(k, k).unwrap();
            let p = PlasmaParams::new(0.0, beta, lambda, 0.0, FlowProfile::tangential(v_s)).unwrap();
            let m = build_matrix(&g, &p, &ZeroHelicityQuartic).unwrap();
            prop_assert_eq!(m.m11, -2.0 * beta * (k * k));
            prop_assert_eq!(m.m12, k);
        }
    }
}

//! Coefficient schemes for the reduced `(B_n, B_b)` evolution operator.
//!
//! Each scheme is a strategy object behind [`CoefficientScheme`] and is looked
//! up by name in a [`SchemeRegistry`]. The four diffusive schemes differ only
//! in how turbulent diffusion damps the binormal component; the two
//! closed-form branch schemes realize a known spectrum as a diagonal
//! operator so that it can be swept and integrated like any other.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{DynamoMatrix, OperatorError, PlasmaParams};
use crate::geometry::{frame_laplacian_exact, FilamentGeometry};

/// Validity tolerance for closed-form branch conditions.
pub const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeTag {
    Eq13_14,
    Eq18,
    Eq24ZeroHelicity,
    Exact,
    LaminarBranch,
    DegenerateBranch,
}

impl SchemeTag {
    /// The four diffusive coefficient schemes, in declaration order.
    pub const COEFFICIENT: [SchemeTag; 4] = [
        SchemeTag::Eq13_14,
        SchemeTag::Eq18,
        SchemeTag::Eq24ZeroHelicity,
        SchemeTag::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeTag::Eq13_14 => "eq13_14",
            SchemeTag::Eq18 => "eq18",
            SchemeTag::Eq24ZeroHelicity => "eq24",
            SchemeTag::Exact => "exact",
            SchemeTag::LaminarBranch => "laminar",
            SchemeTag::DegenerateBranch => "degenerate",
        }
    }

    pub fn is_branch(self) -> bool {
        matches!(self, SchemeTag::LaminarBranch | SchemeTag::DegenerateBranch)
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule that turns geometry and plasma parameters into an evolution matrix.
pub trait CoefficientScheme: Send + Sync + fmt::Debug {
    fn tag(&self) -> SchemeTag;

    fn name(&self) -> &'static str {
        self.tag().name()
    }

    /// Extra lookup names accepted by the registry.
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    fn describe(&self) -> &'static str;

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError>;
}

/// Common evolution form
/// `[[αλ + β·c_n, κ₀], [αλ + κ₀ v_s, β·c_b]]`, with the helicity product
/// dropped when `helicity` is false.
fn diffusive_matrix(
    tag: SchemeTag,
    geom: &FilamentGeometry,
    params: &PlasmaParams,
    normal_coef: f64,
    binormal_coef: f64,
    helicity: bool,
) -> DynamoMatrix {
    let k = geom.kappa0;
    let al = if helicity { params.alpha_lambda() } else { 0.0 };
    DynamoMatrix {
        m11: al + params.beta * normal_coef,
        m12: k,
        m21: al + k * params.flow.v_s,
        m22: params.beta * binormal_coef,
        scheme: tag,
    }
}

fn normal_damping(k: f64) -> f64 {
    -2.0 * (k * k)
}

/// Binormal damping linear in curvature.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearBinormal;

impl CoefficientScheme for LinearBinormal {
    fn tag(&self) -> SchemeTag {
        SchemeTag::Eq13_14
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["eq13-14", "linear"]
    }

    fn describe(&self) -> &'static str {
        "binormal damping -beta*kappa0"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        let k = geom.kappa0;
        Ok(diffusive_matrix(self.tag(), geom, params, normal_damping(k), -k, true))
    }
}

/// Binormal damping quadratic in curvature.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticBinormal;

impl CoefficientScheme for QuadraticBinormal {
    fn tag(&self) -> SchemeTag {
        SchemeTag::Eq18
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["quadratic"]
    }

    fn describe(&self) -> &'static str {
        "binormal damping -beta*kappa0^2"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        let k = geom.kappa0;
        Ok(diffusive_matrix(
            self.tag(),
            geom,
            params,
            normal_damping(k),
            -(k * k),
            true,
        ))
    }
}

/// Zero-helicity turbulent operator with quartic binormal damping.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHelicityQuartic;

impl CoefficientScheme for ZeroHelicityQuartic {
    fn tag(&self) -> SchemeTag {
        SchemeTag::Eq24ZeroHelicity
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["eq24_zero_helicity", "zero_helicity"]
    }

    fn describe(&self) -> &'static str {
        "zero helicity, binormal damping -beta*kappa0^4"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        if params.alpha != 0.0 {
            return Err(OperatorError::HelicityForbidden {
                scheme: self.tag(),
                alpha: params.alpha,
            });
        }
        let k = geom.kappa0;
        let k2 = k * k;
        Ok(diffusive_matrix(
            self.tag(),
            geom,
            params,
            normal_damping(k),
            -(k2 * k2),
            false,
        ))
    }
}

/// Diffusion coefficients read off the exact second derivatives of a
/// helical frame with torsion equal to curvature.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactLaplacian;

impl CoefficientScheme for ExactLaplacian {
    fn tag(&self) -> SchemeTag {
        SchemeTag::Exact
    }

    fn describe(&self) -> &'static str {
        "coefficients from the exact frame Laplacian of the helical filament"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        let helical = FilamentGeometry {
            kappa0: geom.kappa0,
            tau0: geom.kappa0,
            helical_equipartition: true,
        };
        let lap = frame_laplacian_exact(&helical);
        Ok(diffusive_matrix(
            self.tag(),
            geom,
            params,
            lap.normal_coefficient(),
            lap.binormal_coefficient(),
            true,
        ))
    }
}

/// Golden-ratio laminar pair `αλ(−1 ± √5)/2`, valid only on `κ₀ = −αλ`.
///
/// Realized as `diag(γ₊, γ₋)`; β and `v_s` do not enter.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaminarBranch;

impl CoefficientScheme for LaminarBranch {
    fn tag(&self) -> SchemeTag {
        SchemeTag::LaminarBranch
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["golden", "laminar_branch"]
    }

    fn describe(&self) -> &'static str {
        "closed-form laminar pair on kappa0 = -alpha*lambda, diagonal realization"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        let (gp, gm) = crate::spectrum::paper_closed_form_laminar(params.alpha_lambda(), geom.kappa0)
            .map_err(|e| OperatorError::BranchCondition {
                scheme: self.tag(),
                detail: e.to_string(),
            })?;
        Ok(DynamoMatrix {
            m11: gp,
            m12: 0.0,
            m21: 0.0,
            m22: gm,
            scheme: self.tag(),
        })
    }
}

/// Double root `γ = κ₀` on the locus `αλ = −2κ₀`, realized as `κ₀ I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DegenerateBranch;

impl CoefficientScheme for DegenerateBranch {
    fn tag(&self) -> SchemeTag {
        SchemeTag::DegenerateBranch
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["degenerate_branch"]
    }

    fn describe(&self) -> &'static str {
        "double root gamma = kappa0 on alpha*lambda = -2*kappa0, realized as kappa0*I"
    }

    fn assemble(
        &self,
        geom: &FilamentGeometry,
        params: &PlasmaParams,
    ) -> Result<DynamoMatrix, OperatorError> {
        let branch = crate::spectrum::degenerate_branch(geom.kappa0);
        let al = params.alpha_lambda();
        if (al - branch.alpha_lambda).abs() > BRANCH_TOL * (1.0 + geom.kappa0.abs()) {
            return Err(OperatorError::BranchCondition {
                scheme: self.tag(),
                detail: format!(
                    "alpha*lambda = {al} is off the degenerate locus alpha*lambda = -2*kappa0 = {}",
                    branch.alpha_lambda
                ),
            });
        }
        Ok(DynamoMatrix::scalar(branch.gamma, self.tag()))
    }
}

/// Name-indexed collection of schemes.
#[derive(Debug, Clone, Default)]
pub struct SchemeRegistry {
    schemes: BTreeMap<SchemeTag, Arc<dyn CoefficientScheme>>,
    names: BTreeMap<String, SchemeTag>,
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every built-in scheme.
    pub fn with_defaults() -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(LinearBinormal));
        reg.register(Arc::new(QuadraticBinormal));
        reg.register(Arc::new(ZeroHelicityQuartic));
        reg.register(Arc::new(ExactLaplacian));
        reg.register(Arc::new(LaminarBranch));
        reg.register(Arc::new(DegenerateBranch));
        reg
    }

    /// Registers a scheme under its name and aliases, replacing any scheme
    /// with the same tag.
    pub fn register(&mut self, scheme: Arc<dyn CoefficientScheme>) {
        let tag = scheme.tag();
        self.names.insert(scheme.name().to_ascii_lowercase(), tag);
        for alias in scheme.aliases() {
            self.names.insert(alias.to_ascii_lowercase(), tag);
        }
        self.schemes.insert(tag, scheme);
    }

    /// Case-insensitive lookup by name or alias.
    pub fn get(&self, name: &str) -> Result<Arc<dyn CoefficientScheme>, OperatorError> {
        self.names
            .get(&name.trim().to_ascii_lowercase())
            .and_then(|tag| self.schemes.get(tag))
            .cloned()
            .ok_or_else(|| OperatorError::UnknownScheme {
                name: name.to_string(),
                known: self.names(),
            })
    }

    pub fn by_tag(&self, tag: SchemeTag) -> Option<Arc<dyn CoefficientScheme>> {
        self.schemes.get(&tag).cloned()
    }

    /// Primary names, in tag order.
    pub fn names(&self) -> Vec<&'static str> {
        self.schemes.values().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn CoefficientScheme>> {
        self.schemes.values()
    }
}

/// Default-registry lookup.
pub fn scheme(name: &str) -> Result<Arc<dyn CoefficientScheme>, OperatorError> {
    SchemeRegistry::with_defaults().get(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_name_and_alias() {
        let reg = SchemeRegistry::with_defaults();
        assert_eq!(reg.get("eq18").unwrap().tag(), SchemeTag::Eq18);
        assert_eq!(reg.get("EQ24_ZERO_HELICITY").unwrap().tag(), SchemeTag::Eq24ZeroHelicity);
        assert_eq!(reg.get(" Exact ").unwrap().tag(), SchemeTag::Exact);
        assert_eq!(reg.get("EQ13_14").unwrap().tag(), SchemeTag::Eq13_14);
        assert_eq!(
            reg.names(),
            vec!["eq13_14", "eq18", "eq24", "exact", "laminar", "degenerate"]
        );
    }

    #[test]
    fn unknown_scheme_lists_known_names() {
        let err = SchemeRegistry::with_defaults().get("eq99").unwrap_err();
        match err {
            OperatorError::UnknownScheme { name, known } => {
                assert_eq!(name, "eq99");
                assert!(known.contains(&"eq18"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_scheme_can_be_registered() {
        #[derive(Debug)]
        struct Frozen;
        impl CoefficientScheme for Frozen {
            fn tag(&self) -> SchemeTag {
                SchemeTag::Eq18
            }
            fn aliases(&self) -> &'static [&'static str] {
                &["frozen"]
            }
            fn describe(&self) -> &'static str {
                "test double"
            }
            fn assemble(
                &self,
                _geom: &FilamentGeometry,
                _params: &PlasmaParams,
            ) -> Result<DynamoMatrix, OperatorError> {
                Ok(DynamoMatrix::scalar(0.0, SchemeTag::Eq18))
            }
        }
        let mut reg = SchemeRegistry::with_defaults();
        reg.register(Arc::new(Frozen));
        let s = reg.get("frozen").unwrap();
        assert_eq!(s.describe(), "test double");
    }
}

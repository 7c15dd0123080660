//! Growth-rate spectra of the 2×2 evolution operator.
//!
//! Roots of `γ² − tr(M) γ + det(M) = 0`, the closed-form laminar and
//! degenerate branches, mode classification and the Anosov reference
//! constants.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::operator::DynamoMatrix;

/// Separates numerical zero from physical growth.
pub const EPS_CLASS: f64 = 1e-9;

/// Diffusivities sampled by [`classify`], in the order they are visited.
pub const BETA_SEQUENCE: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(
        "closed-form laminar branch requires kappa0 = -alpha*lambda (got kappa0 = {kappa0}, alpha*lambda = {alpha_lambda})"
    )]
    LaminarCondition { alpha_lambda: f64, kappa0: f64 },
    #[error("growth rate sequence is not monotone as beta -> 0: {samples:?}")]
    NonConvergent { samples: Vec<(f64, f64)> },
    #[error("spectrum family could not be evaluated at beta = {beta}: {reason}")]
    Family { beta: f64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthClass {
    Fast,
    Slow,
    Marginal,
    Decaying,
}

impl GrowthClass {
    pub fn name(self) -> &'static str {
        match self {
            GrowthClass::Fast => "FAST",
            GrowthClass::Slow => "SLOW",
            GrowthClass::Marginal => "MARGINAL",
            GrowthClass::Decaying => "DECAYING",
        }
    }

    fn of(re: f64) -> Self {
        if re > EPS_CLASS {
            GrowthClass::Fast
        } else if re < -EPS_CLASS {
            GrowthClass::Decaying
        } else {
            GrowthClass::Marginal
        }
    }
}

/// Growth tag plus the oscillatory / degenerate qualifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeClass {
    pub growth: GrowthClass,
    /// Purely imaginary pair: `|Re γ±| ≤ ε`, `|Im γ±| > ε`.
    pub oscillatory: bool,
    /// `|Δ| ≤ ε`.
    pub degenerate: bool,
}

impl ModeClass {
    fn pointwise(gamma_plus: Complex64, discriminant: f64) -> Self {
        Self {
            growth: GrowthClass::of(gamma_plus.re),
            oscillatory: gamma_plus.re.abs() <= EPS_CLASS && gamma_plus.im.abs() > EPS_CLASS,
            degenerate: discriminant.abs() <= EPS_CLASS,
        }
    }

    pub fn is_fast(&self) -> bool {
        self.growth == GrowthClass::Fast
    }
}

impl fmt::Display for ModeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.growth.name())?;
        if self.oscillatory {
            f.write_str("+OSCILLATORY")?;
        }
        if self.degenerate {
            f.write_str("+DEGENERATE")?;
        }
        Ok(())
    }
}

impl Serialize for ModeClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    /// `b² − 4ac` of the monic characteristic quadratic.
    pub discriminant: f64,
    /// Pointwise classification of this operator.
    pub classification: ModeClass,
}

impl Spectrum {
    pub fn max_re(&self) -> f64 {
        self.gamma_plus.re
    }

    pub fn is_conjugate_pair(&self) -> bool {
        self.discriminant < 0.0
    }
}

/// Both roots of `γ² − trace·γ + det`, ordered so that `Re γ₊ ≥ Re γ₋`
/// (and `Im γ₊ ≥ 0` for a conjugate pair).
pub fn quadratic_roots(trace: f64, det: f64) -> (Complex64, Complex64, f64) {
    let disc = trace * trace - 4.0 * det;
    if disc < 0.0 {
        let re = 0.5 * trace;
        let im = 0.5 * (-disc).sqrt();
        return (Complex64::new(re, im), Complex64::new(re, -im), disc);
    }
    let sq = disc.sqrt();
    // Larger-magnitude root first, the other from Vieta, avoiding cancellation.
    let q = if trace >= 0.0 {
        0.5 * (trace + sq)
    } else {
        0.5 * (trace - sq)
    };
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
    let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    (Complex64::from(hi), Complex64::from(lo), disc)
}

pub fn characteristic_roots(m: &DynamoMatrix) -> Spectrum {
    let (gamma_plus, gamma_minus, discriminant) = quadratic_roots(m.trace(), m.det());
    Spectrum {
        gamma_plus,
        gamma_minus,
        discriminant,
        classification: ModeClass::pointwise(gamma_plus, discriminant),
    }
}

/// Laminar golden-ratio pair `αλ(−1 ± √5)/2`, returned as `(γ₊, γ₋)` with
/// the `+√5` root first.
///
/// Only valid on `κ₀ = −αλ` (within 1e-12).
pub fn paper_closed_form_laminar(alpha_lambda: f64, kappa0: f64) -> Result<(f64, f64), SpectrumError> {
    if (kappa0 + alpha_lambda).abs() > 1e-12 {
        return Err(SpectrumError::LaminarCondition {
            alpha_lambda,
            kappa0,
        });
    }
    let s5 = 5f64.sqrt();
    let a = alpha_lambda * (-1.0 + s5) / 2.0;
    let b = alpha_lambda * (-1.0 - s5) / 2.0;
    Ok(if a >= b { (a, b) } else { (b, a) })
}

/// Double root of the laminar quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegenerateRoot {
    pub alpha_lambda: f64,
    pub gamma: f64,
}

/// `αλ = −2κ₀` makes the laminar discriminant vanish; the double root is `γ = κ₀`.
pub fn degenerate_branch(kappa0: f64) -> DegenerateRoot {
    DegenerateRoot {
        alpha_lambda: -2.0 * kappa0,
        gamma: kappa0,
    }
}

/// The laminar quadratic in its literal form: `γ² + αλγ − (αλ + κ₀)κ₀`.
pub fn literal_laminar_quadratic(gamma: f64, alpha_lambda: f64, kappa0: f64) -> f64 {
    gamma * gamma + alpha_lambda * gamma - (alpha_lambda + kappa0) * kappa0
}

/// Its discriminant in the same form: `α²λ² + 4(αλ + κ₀)κ₀`.
pub fn literal_laminar_discriminant(alpha_lambda: f64, kappa0: f64) -> f64 {
    alpha_lambda * alpha_lambda + 4.0 * (alpha_lambda + kappa0) * kappa0
}

/// Classifies a β-parameterized family of spectra by its ideal limit.
///
/// FAST when `Re γ₊(0) > ε`; SLOW when growth appears at sampled β > 0 but
/// not in the limit; DECAYING when `Re γ₊(0) < −ε`; MARGINAL otherwise.
/// The oscillatory and degenerate qualifiers come from `β = 0`.
pub fn classify<F>(family: F) -> Result<ModeClass, SpectrumError>
where
    F: Fn(f64) -> Result<Spectrum, SpectrumError>,
{
    let limit = family(0.0)?;
    let mut samples = Vec::with_capacity(BETA_SEQUENCE.len() + 1);
    for &beta in &BETA_SEQUENCE {
        samples.push((beta, family(beta)?.max_re()));
    }
    let g0 = limit.max_re();
    samples.push((0.0, g0));

    let scale = samples.iter().fold(1.0f64, |m, &(_, g)| m.max(g.abs()));
    let tol = EPS_CLASS * scale;
    let non_increasing = samples.windows(2).all(|w| w[1].1 <= w[0].1 + tol);
    let non_decreasing = samples.windows(2).all(|w| w[1].1 >= w[0].1 - tol);
    if !(non_increasing || non_decreasing) {
        return Err(SpectrumError::NonConvergent { samples });
    }

    let growth = if g0 > EPS_CLASS {
        GrowthClass::Fast
    } else if samples[..BETA_SEQUENCE.len()]
        .iter()
        .any(|&(_, g)| g > EPS_CLASS)
    {
        GrowthClass::Slow
    } else if g0 < -EPS_CLASS {
        GrowthClass::Decaying
    } else {
        GrowthClass::Marginal
    };
    Ok(ModeClass {
        growth,
        ..ModeClass::pointwise(limit.gamma_plus, limit.discriminant)
    })
}

/// Classification of the family member at `beta`.
///
/// Growth at this point is FAST if it survives the ideal limit and SLOW if
/// it does not; the qualifiers are those of the point itself.
pub fn classify_at<F>(family: F, beta: f64) -> Result<(Spectrum, ModeClass), SpectrumError>
where
    F: Fn(f64) -> Result<Spectrum, SpectrumError>,
{
    let point = family(beta)?;
    let mut class = point.classification;
    if class.growth == GrowthClass::Fast && beta != 0.0 {
        let limit = classify(&family)?;
        if limit.growth != GrowthClass::Fast {
            class.growth = GrowthClass::Slow;
        }
    }
    Ok((point, class))
}

/// Arnold cat-map eigenvalues `(3 ± √5)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnosovReference {
    pub stretching: f64,
    pub squeezing: f64,
}

pub fn anosov_reference() -> AnosovReference {
    let s5 = 5f64.sqrt();
    AnosovReference {
        stretching: (3.0 + s5) / 2.0,
        squeezing: (3.0 - s5) / 2.0,
    }
}

/// Curvature-scaled filament pair `κ(−1 + √5)/2`, `κ(−1 − √5)/2`.
pub fn curvature_scaled_pair(kappa: f64) -> (f64, f64) {
    let s5 = 5f64.sqrt();
    (kappa * (-1.0 + s5) / 2.0, kappa * (-1.0 - s5) / 2.0)
}

/// The golden ratio `(1 + √5)/2`.
pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SchemeTag;
    use proptest::prelude::*;

    fn mat(rows: [[f64; 2]; 2]) -> DynamoMatrix {
        DynamoMatrix::new(rows, SchemeTag::Eq18)
    }

    fn constant(m: DynamoMatrix) -> impl Fn(f64) -> Result<Spectrum, SpectrumError> {
        move |_| Ok(characteristic_roots(&m))
    }

    #[test]
    fn rotation_is_oscillatory() {
        let s = characteristic_roots(&mat([[0.0, 1.0], [-1.0, 0.0]]));
        assert_eq!(s.gamma_plus, Complex64::new(0.0, 1.0));
        assert_eq!(s.gamma_minus, Complex64::new(0.0, -1.0));
        assert_eq!(s.classification.to_string(), "MARGINAL+OSCILLATORY");
    }

    #[test]
    fn zero_matrix_is_marginal_degenerate() {
        let s = characteristic_roots(&mat([[0.0; 2]; 2]));
        assert_eq!(s.gamma_plus, Complex64::from(0.0));
        assert_eq!(s.gamma_minus, Complex64::from(0.0));
        assert_eq!(s.discriminant, 0.0);
        assert_eq!(s.classification.to_string(), "MARGINAL+DEGENERATE");
    }

    #[test]
    fn decaying_pair() {
        // trace −1, det 2: (−1 ± i√7)/2
        let s = characteristic_roots(&mat([[-1.0, 1.0], [-2.0, 0.0]]));
        let want = Complex64::new(-0.5, 7f64.sqrt() / 2.0);
        assert!((s.gamma_plus - want).norm() < 1e-15);
        assert!((s.gamma_minus - want.conj()).norm() < 1e-15);
        assert_eq!(s.discriminant, -7.0);
        assert_eq!(s.classification.growth, GrowthClass::Decaying);
        assert!(!s.classification.oscillatory);
        assert!(s.is_conjugate_pair());
    }

    #[test]
    fn golden_pair() {
        let phi = golden_ratio();
        let (p, m) = paper_closed_form_laminar(-1.0, 1.0).unwrap();
        assert!((p - phi).abs() < 1e-12);
        assert!((m - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((p - 1.618_033_988_749_895).abs() < 1e-15);

        let (p2, m2) = paper_closed_form_laminar(-2.0, 2.0).unwrap();
        assert!((p2 - (1.0 + 5f64.sqrt())).abs() < 1e-12);
        assert!((m2 - (1.0 - 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn golden_pair_guard() {
        let err = paper_closed_form_laminar(-1.0, 3.0).unwrap_err();
        assert!(err.to_string().contains("kappa0 = -alpha*lambda"));
    }

    #[test]
    fn degenerate_examples() {
        assert_eq!(
            degenerate_branch(1.0),
            DegenerateRoot {
                alpha_lambda: -2.0,
                gamma: 1.0
            }
        );
        assert_eq!(degenerate_branch(0.0).gamma, 0.0);
        let d = degenerate_branch(2.5);
        assert_eq!((d.alpha_lambda, d.gamma), (-5.0, 2.5));
        assert!(literal_laminar_quadratic(d.gamma, d.alpha_lambda, 2.5).abs() < 1e-12);
        assert!(literal_laminar_discriminant(d.alpha_lambda, 2.5).abs() < 1e-12);
    }

    #[test]
    fn literal_quadratic_misses_golden_root() {
        // Roots (1 ± √5)/2 solve γ² − γ − 1, not the literal γ² − γ.
        let phi = golden_ratio();
        assert!((literal_laminar_quadratic(phi, -1.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let fast = classify(constant(DynamoMatrix::scalar(1.0, SchemeTag::DegenerateBranch))).unwrap();
        assert_eq!(fast.growth, GrowthClass::Fast);
        assert!(fast.degenerate);

        let decaying = classify(constant(mat([[-1.0, 0.0], [0.0, -2.0]]))).unwrap();
        assert_eq!(decaying.growth, GrowthClass::Decaying);

        // α = 0 rotation damped by β: marginal in the limit.
        let family = |beta: f64| {
            Ok(characteristic_roots(&mat([
                [-2.0 * beta, 1.0],
                [-1.0, -beta],
            ])))
        };
        let c = classify(family).unwrap();
        assert_eq!(c.growth, GrowthClass::Marginal);
        assert!(c.oscillatory);
    }

    #[test]
    fn classify_slow_and_nonconvergent() {
        // Growth proportional to β: positive at finite β, zero in the limit.
        let slow = |beta: f64| Ok(characteristic_roots(&mat([[beta, 0.0], [0.0, -1.0]])));
        assert_eq!(classify(slow).unwrap().growth, GrowthClass::Slow);
        let (_, at) = classify_at(slow, 0.1).unwrap();
        assert_eq!(at.growth, GrowthClass::Slow);

        let wiggle = |beta: f64| {
            let g = if beta == 1e-3 { 1.0 } else { 0.0 };
            Ok(characteristic_roots(&mat([[g, 0.0], [0.0, -1.0]])))
        };
        assert!(matches!(
            classify(wiggle),
            Err(SpectrumError::NonConvergent { .. })
        ));
    }

    #[test]
    fn anosov_constants() {
        let a = anosov_reference();
        assert!((a.stretching - 2.618_033_988_749_895).abs() < 1e-12);
        assert!((a.squeezing - 0.381_966_011_250_105).abs() < 1e-12);
        assert!((golden_ratio().powi(2) - a.stretching).abs() < 1e-12);
        let (p, m) = curvature_scaled_pair(-1.0);
        assert!((p - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((m - golden_ratio()).abs() < 1e-15);
    }

    fn arb_matrix() -> impl Strategy<Value = DynamoMatrix> {
        prop::array::uniform4(-10.0f64..10.0)
            .prop_map(|v| mat([[v[0], v[1]], [v[2], v[3]]]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn vieta_duality(m in arb_matrix()) {
            let s = characteristic_roots(&m);
            let sum = s.gamma_plus + s.gamma_minus;
            let prod = s.gamma_plus * s.gamma_minus;
            let scale = 1.0 + m.trace().abs() + m.det().abs();
            prop_assert!((sum - Complex64::from(m.trace())).norm() <= 1e-12 * scale);
            prop_assert!((prod - Complex64::from(m.det())).norm() <= 1e-12 * scale);
            prop_assert!(s.gamma_plus.re >= s.gamma_minus.re);
        }

        #[test]
        fn conjugate_symmetry(m in arb_matrix()) {
            let s = characteristic_roots(&m);
            if s.discriminant < 0.0 {
                prop_assert_eq!(s.gamma_plus.im, -s.gamma_minus.im);
                prop_assert_eq!(s.gamma_plus.re, s.gamma_minus.re);
            } else {
                prop_assert_eq!(s.gamma_plus.im, 0.0);
                prop_assert_eq!(s.gamma_minus.im, 0.0);
            }
        }

        #[test]
        fn degenerate_branch_consistent(k in 0.01f64..10.0) {
            let d = degenerate_branch(k);
            prop_assert!(literal_laminar_quadratic(d.gamma, d.alpha_lambda, k).abs() < 1e-10);
            prop_assert!(literal_laminar_discriminant(d.alpha_lambda, k).abs() < 1e-10);
        }

        #[test]
        fn rescaling_preserves_growth_class(m in arb_matrix(), c in 0.1f64..10.0) {
            let base = characteristic_roots(&m);
            prop_assume!(base.max_re().abs() > 1e-6);
            let scaled = characteristic_roots(&m.scaled(c));
            let rel = (scaled.max_re() - c * base.max_re()).abs() / (1.0 + c * base.max_re().abs());
            prop_assert!(rel < 1e-10);
            let a = classify(constant(m)).unwrap().growth;
            let b = classify(constant(m.scaled(c))).unwrap().growth;
            prop_assert_eq!(a, b);
        }
    }
}

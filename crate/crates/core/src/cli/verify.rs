//! Seeded self-verification suites and the geometry check command.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Axis, ConfigError, RunConfig};
use super::output::{Cell, Table};
use super::CliError;
use crate::abc::{
    abc_velocity_paper, abc_velocity_standard, axis_radial_flow, curl_fd, divergence_fd, radial_flow_gradient, tube_growth_rate,
    tube_system_residuals,
    AbcParams, TubeField, TubeGrowthClass, TubePoint, Vec3,
};
use crate::flow::FlowProfile;
use crate::geometry::{frame_laplacian_exact, frenet_derivative, helix_frame, FilamentGeometry, HelixSpec};
use crate::operator::{build_matrix, scheme, DynamoMatrix, PlasmaParams, SchemeTag};
use crate::sim::{compare, convergence_ratio, fit_dominant_rate, integrate, SimConfig, CROSS_CHECK_TOL};
use crate::spectrum::{characteristic_roots, degenerate_branch, literal_laminar_discriminant, GrowthClass};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_DRAWS: u64 = 100;
pub const DEFAULT_ORDER_DT: f64 = 0.05;
pub const FD_TOL: f64 = 1e-6;
pub const ORDER_RATIO_MIN: f64 = 12.0;

const FD_STEP: f64 = 1e-5;

/// Outcome of one verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual; for `rk4_order` the smallest error ratio.
    pub worst: f64,
    pub threshold: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Temporal side integrates a different coefficient scheme.
    SchemeMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub draws: usize,
    pub sim: SimConfig,
    pub order_dt: f64,
    pub fault: Fault,
}

impl VerifyOptions {
    pub fn from_config(cfg: &RunConfig, seed: u64) -> Result<Self, ConfigError> {
        let mut sim = SimConfig::default();
        sim.dt = positive(cfg, "verify.dt", sim.dt)?;
        sim.t_end = positive(cfg, "verify.t_end", sim.t_end)?;
        sim.max_t_end = sim.max_t_end.max(sim.t_end);
        let fault = match cfg.str("verify.fault") {
            None | Some("none") => Fault::None,
            Some("scheme_mismatch") => Fault::SchemeMismatch,
            Some(other) => {
                return Err(cfg.error(
                    "verify.fault",
                    format!("unknown fault mode '{other}' (expected none or scheme_mismatch)"),
                ))
            }
        };
        let draws = cfg.u64("verify.draws")?.unwrap_or(DEFAULT_DRAWS);
        if draws == 0 {
            return Err(cfg.error("verify.draws", "must be at least 1"));
        }
        Ok(Self {
            seed,
            draws: draws as usize,
            sim,
            order_dt: positive(cfg, "verify.order_dt", DEFAULT_ORDER_DT)?,
            fault,
        })
    }
}

fn positive(cfg: &RunConfig, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v = cfg.f64_or(key, default)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(cfg.error(key, "must be positive"))
    }
}

/// Independent stream per suite so results do not depend on suite order.
fn suite_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn summarize(suite: &'static str, residuals: &[f64], threshold: f64) -> SuiteResult {
    SuiteResult {
        suite,
        cases: residuals.len(),
        failures: residuals.iter().filter(|r| !(**r < threshold)).count(),
        worst: residuals.iter().copied().fold(0.0, f64::max),
        threshold,
    }
}

/// Largest central-difference mismatch of the Frenet derivatives, and the
/// largest orthonormality defect, over the sample arclengths.
pub fn helix_residuals(spec: &HelixSpec, arclengths: &[f64]) -> Result<(f64, f64), CliError> {
    let mut fd = 0.0f64;
    let mut defect = 0.0f64;
    for &s in arclengths {
        let at = |s| helix_frame(spec, s).map_err(|e| CliError::Domain(e.to_string()));
        let mid = at(s)?;
        let (hi, lo) = (at(s + FD_STEP)?, at(s - FD_STEP)?);
        let d = frenet_derivative(&mid.frame, &mid.geom);
        let num = |a: Vec3, b: Vec3| (a - b) / (2.0 * FD_STEP);
        fd = fd
            .max((num(hi.frame.t, lo.frame.t) - d.dt).amax())
            .max((num(hi.frame.n, lo.frame.n) - d.dn).amax())
            .max((num(hi.frame.b, lo.frame.b) - d.db).amax());
        defect = defect.max(mid.frame.orthonormality_defect());
    }
    Ok((fd, defect))
}

fn random_helix(rng: &mut ChaCha8Rng) -> (HelixSpec, Vec<f64>) {
    let a = rng.random_range(0.1..3.0);
    let b = rng.random_range(-3.0..3.0);
    let s = (0..10).map(|_| rng.random_range(-10.0..10.0)).collect();
    (HelixSpec { a, b_pitch: b }, s)
}

pub fn suite_frenet(opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let mut rng = suite_rng(opts.seed, 1);
    let helices: Vec<_> = (0..opts.draws).map(|_| random_helix(&mut rng)).collect();
    let mut residuals = helices
        .par_iter()
        .map(|(spec, s)| helix_residuals(spec, s).map(|(fd, defect)| fd.max(defect)))
        .collect::<Result<Vec<_>, _>>()?;
    // Simplified frame diffusion misses exactly τ₀² = κ₀² on the normal.
    for k in [0.5, 1.0, 2.0] {
        let geom = FilamentGeometry::helical(k).map_err(|e| CliError::Domain(e.to_string()))?;
        residuals.push((frame_laplacian_exact(&geom).normal_residual() - k * k).abs());
    }
    Ok(summarize("frenet", &residuals, FD_TOL))
}

/// Random draw from the documented parameter box with `τ₀ = κ₀`, `λ = 1`.
fn random_point(rng: &mut ChaCha8Rng) -> (FilamentGeometry, PlasmaParams) {
    let k = rng.random_range(0.1..=5.0);
    let al = rng.random_range(-5.0..=5.0);
    let beta = rng.random_range(0.0..=1.0);
    let v_s = rng.random_range(-2.0..=2.0);
    let geom = FilamentGeometry {
        kappa0: k,
        tau0: k,
        helical_equipartition: true,
    };
    let params = PlasmaParams {
        alpha: al,
        beta,
        lambda_exp: 1.0,
        eta: 0.0,
        flow: FlowProfile::tangential(v_s),
    };
    (geom, params)
}

pub fn suite_oracle(opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let spectral = scheme(SchemeTag::Eq18.name())?;
    let temporal = match opts.fault {
        Fault::None => spectral.clone(),
        Fault::SchemeMismatch => scheme(SchemeTag::Eq13_14.name())?,
    };
    let mut rng = suite_rng(opts.seed, 2);
    let draws: Vec<_> = (0..opts.draws).map(|_| random_point(&mut rng)).collect();
    let residuals = draws
        .par_iter()
        .map(|(geom, params)| -> Result<f64, CliError> {
            let s = build_matrix(geom, params, spectral.as_ref())?;
            let t = build_matrix(geom, params, temporal.as_ref())?;
            Ok(compare(&s, &t, &opts.sim)?.max_residual())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize("oracle", &residuals, CROSS_CHECK_TOL))
}

pub fn suite_oscillatory(opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let geom = FilamentGeometry::helical(1.0).map_err(|e| CliError::Domain(e.to_string()))?;
    let params = PlasmaParams::laminar(0.0, -1.0);
    let m = build_matrix(&geom, &params, scheme("eq18")?.as_ref())?;
    let spec = characteristic_roots(&m);
    let root_err = (spec.gamma_plus.re.abs() + (spec.gamma_plus.im - 1.0).abs())
        .max(spec.gamma_minus.re.abs() + (spec.gamma_minus.im + 1.0).abs());

    let b0 = opts.sim.b0;
    let n0 = b0[0].hypot(b0[1]);
    let traj = integrate(&m, b0, 100.0, opts.sim.dt)?;
    let drift = (0..traj.len())
        .map(|k| (traj.log_norm(k).exp() - n0).abs() / n0)
        .fold(0.0, f64::max);
    let (fit, _) = fit_dominant_rate(&m, &opts.sim)?;
    let freq_err = (fit.im_gamma - 1.0).abs().max(fit.re_gamma.abs());

    Ok(SuiteResult {
        suite: "oscillatory",
        cases: 3,
        failures: [root_err < 1e-12, drift < 1e-5, freq_err < CROSS_CHECK_TOL]
            .iter()
            .filter(|ok| !**ok)
            .count(),
        worst: root_err.max(drift).max(freq_err),
        threshold: CROSS_CHECK_TOL,
    })
}

pub fn suite_degenerate(opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let branch = scheme(SchemeTag::DegenerateBranch.name())?;
    let kappas = Axis {
        min: 0.01,
        max: 10.0,
        count: 100,
    }
    .values();
    let outcomes = kappas
        .par_iter()
        .map(|&k| -> Result<(f64, bool), CliError> {
            let geom = FilamentGeometry::helical(k).map_err(|e| CliError::Domain(e.to_string()))?;
            let al = degenerate_branch(k).alpha_lambda;
            let m = build_matrix(&geom, &PlasmaParams::laminar(al, -1.0), branch.as_ref())?;
            let spec = characteristic_roots(&m);
            let disc = literal_laminar_discriminant(al, k).abs().max(spec.discriminant.abs());
            let root = (spec.gamma_plus.re - k).abs().max((spec.gamma_minus.re - k).abs());
            let fast = spec.classification.growth == GrowthClass::Fast && spec.classification.degenerate;
            let (fit, _) = fit_dominant_rate(&m, &opts.sim)?;
            let rate = (fit.re_gamma - k).abs();
            let ok = disc < 1e-10 && root < 1e-10 && fast && rate < CROSS_CHECK_TOL;
            Ok((disc.max(root).max(rate), ok))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteResult {
        suite: "degenerate",
        cases: outcomes.len(),
        failures: outcomes.iter().filter(|(_, ok)| !ok).count(),
        worst: outcomes.iter().map(|(r, _)| *r).fold(0.0, f64::max),
        threshold: CROSS_CHECK_TOL,
    })
}

pub fn suite_rk4_order(opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let mut rng = suite_rng(opts.seed, 3);
    let mut ratios = Vec::with_capacity(20);
    for _ in 0..20 {
        let mut e = [0.0; 4];
        e.iter_mut().for_each(|x| *x = rng.random_range(-1.0..=1.0));
        let m = DynamoMatrix::new([[e[0], e[1]], [e[2], e[3]]], SchemeTag::Exact);
        ratios.push(convergence_ratio(&m, [1.0, 0.5], 1.0, opts.order_dt)?);
    }
    Ok(SuiteResult {
        suite: "rk4_order",
        cases: ratios.len(),
        failures: ratios.iter().filter(|r| !(**r >= ORDER_RATIO_MIN)).count(),
        worst: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        threshold: ORDER_RATIO_MIN,
    })
}

/// Complex-form equivalence, divergence and Beltrami checks over random points.
pub fn suite_abc(opts: &VerifyOptions) -> Result<Vec<SuiteResult>, CliError> {
    let mut rng = suite_rng(opts.seed, 4);
    let (mut form, mut div, mut beltrami) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..1000 {
        let params = AbcParams::new(
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
        );
        let p = Vec3::new(
            rng.random_range(-PI..=PI),
            rng.random_range(-PI..=PI),
            rng.random_range(-PI..=PI),
        );
        let complex = abc_velocity_paper(&params, &p).map_err(|e| CliError::Domain(e.to_string()))?;
        form.push((complex - abc_velocity_standard(&params, &-p) * 2.0).amax());
        let field = |q: &Vec3| abc_velocity_standard(&params, q);
        div.push(divergence_fd(field, &p, 1e-4).abs());
        beltrami.push((curl_fd(field, &p, 1e-4) - field(&p)).amax());
    }
    Ok(vec![
        summarize("abc_form", &form, 1e-12),
        summarize("abc_divergence", &div, 1e-6),
        summarize("abc_beltrami", &beltrami, 1e-5),
    ])
}

pub fn suite_tube(_opts: &VerifyOptions) -> Result<SuiteResult, CliError> {
    let rs = Axis {
        min: 0.1,
        max: 2.0,
        count: 10,
    }
    .values();
    let thetas = Axis {
        min: 0.1,
        max: 3.0,
        count: 10,
    }
    .values();
    let field = TubeField {
        b_s: 0.0,
        b_theta: 1.0,
    };
    let mut residuals = Vec::with_capacity(100);
    for &r in &rs {
        for &th in &thetas {
            let tp = TubePoint::new(r, 0.5, th, 1.0).map_err(|e| CliError::Domain(e.to_string()))?;
            let ideal = tube_growth_rate(&field, &tp, 0.0).map_err(|e| CliError::Domain(e.to_string()))?;
            let slow = tube_growth_rate(&field, &tp, 0.1).map_err(|e| CliError::Domain(e.to_string()))?;
            let residual = match (ideal.gamma, ideal.b_s_constraint) {
                (Some(g), Some(b_s)) if ideal.class == TubeGrowthClass::Marginal && g == 0.0 => {
                    let pinned = TubeField { b_s, ..field };
                    let theta = tp.theta();
                    let v_r = axis_radial_flow(1.0, theta, tp.s).map_err(|e| CliError::Domain(e.to_string()))?;
                    let dvr = radial_flow_gradient(1.0, theta, tp.tau0, tp.s)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    tube_system_residuals(&pinned, &tp, g, v_r, dvr)
                        .iter()
                        .fold(0.0f64, |m, x| m.max(x.abs()))
                }
                _ => f64::INFINITY,
            };
            let residual = if slow.class == TubeGrowthClass::SlowCandidate {
                residual
            } else {
                f64::INFINITY
            };
            residuals.push(residual);
        }
    }
    Ok(summarize("tube", &residuals, 1e-12))
}

pub const VERIFY_COLUMNS: [&str; 6] = ["suite", "passed", "cases", "failures", "worst", "threshold"];

pub fn run_suites(opts: &VerifyOptions) -> Result<Vec<SuiteResult>, CliError> {
    type Suite = fn(&VerifyOptions) -> Result<SuiteResult, CliError>;
    let suites: [Suite; 6] = [
        suite_frenet,
        suite_oracle,
        suite_oscillatory,
        suite_degenerate,
        suite_rk4_order,
        suite_tube,
    ];
    let (rest, abc) = rayon::join(
        || suites.par_iter().map(|f| f(opts)).collect::<Result<Vec<_>, _>>(),
        || suite_abc(opts),
    );
    let mut out = rest?;
    out.extend(abc?);
    Ok(out)
}

pub fn cmd_verify(cfg: &RunConfig, seed: u64) -> Result<(Table, bool), CliError> {
    let opts = VerifyOptions::from_config(cfg, seed)?;
    let results = run_suites(&opts)?;
    let mut table = Table::new(VERIFY_COLUMNS.to_vec());
    for r in &results {
        table.push(vec![
            r.suite.into(),
            r.passed().into(),
            r.cases.into(),
            r.failures.into(),
            r.worst.into(),
            r.threshold.into(),
        ]);
    }
    let fault = match opts.fault {
        Fault::None => "none",
        Fault::SchemeMismatch => "scheme_mismatch",
    };
    table.note("fault", fault);
    let all = results.iter().all(SuiteResult::passed);
    table.note("all_passed", all);
    Ok((table, all))
}

pub const FRENET_COLUMNS: [&str; 7] = [
    "a",
    "b_pitch",
    "kappa",
    "tau",
    "max_fd_residual",
    "orthonormality_defect",
    "passed",
];

pub fn cmd_frenet_check(cfg: &RunConfig, seed: u64) -> Result<(Table, bool), CliError> {
    let grid = |key: &str| cfg.axis(key).map(|a| a.map(|a| a.values()));
    let explicit = cfg.contains("helix.a") || cfg.contains("helix.b_pitch");
    let arclengths = grid("helix.s")?;
    let mut rng = suite_rng(seed, 1);
    let cases: Vec<(HelixSpec, Vec<f64>)> = if explicit {
        let a_vals = grid("helix.a")?.unwrap_or_else(|| vec![1.0]);
        let b_vals = grid("helix.b_pitch")?.unwrap_or_else(|| vec![1.0]);
        let s = arclengths.clone().unwrap_or_else(|| Axis { min: -10.0, max: 10.0, count: 10 }.values());
        let mut out = Vec::new();
        for &a in &a_vals {
            for &b in &b_vals {
                let spec = HelixSpec::new(a, b).map_err(|e| cfg.error("helix.a", e.to_string()))?;
                out.push((spec, s.clone()));
            }
        }
        out
    } else {
        let draws = cfg.u64("helix.draws")?.unwrap_or(DEFAULT_DRAWS);
        (0..draws)
            .map(|_| {
                let (spec, s) = random_helix(&mut rng);
                (spec, arclengths.clone().unwrap_or(s))
            })
            .collect()
    };
    let results = cases
        .par_iter()
        .map(|(spec, s)| helix_residuals(spec, s).map(|r| (*spec, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(FRENET_COLUMNS.to_vec());
    let mut all = true;
    for (spec, (fd, defect)) in results {
        let ok = fd < FD_TOL && defect < FD_TOL;
        all &= ok;
        table.push(vec![
            spec.a.into(),
            spec.b_pitch.into(),
            spec.curvature().into(),
            spec.torsion().into(),
            fd.into(),
            defect.into(),
            Cell::Bool(ok),
        ]);
    }
    table.note("all_passed", all);
    Ok((table, all))
}

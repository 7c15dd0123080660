//! Single-point spectra and parameter sweeps.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::{Axis, ConfigError, RunConfig};
use super::output::{Cell, Table};
use super::CliError;
use crate::flow::{alpha_helicity, FlowProfile};
use crate::geometry::FilamentGeometry;
use crate::operator::{build_matrix, CoefficientScheme, DynamoMatrix, PlasmaParams, SchemeTag, BRANCH_TOL};
use crate::spectrum::{
    characteristic_roots, classify_at, degenerate_branch, paper_closed_form_laminar, Spectrum,
    SpectrumError,
};

pub const DEFAULT_ROW_CAP: u64 = 10_000_000;

pub const SWEEP_COLUMNS: [&str; 13] = [
    "kappa0",
    "tau0",
    "v_s",
    "alpha",
    "lambda",
    "beta",
    "scheme",
    "re_gamma_plus",
    "im_gamma_plus",
    "re_gamma_minus",
    "im_gamma_minus",
    "discriminant",
    "classification",
];

/// Sweepable inputs, in row-ordering priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    Kappa0,
    Tau0,
    VS,
    Alpha,
    Lambda,
    Beta,
}

const PARAMS: [Param; 6] = [
    Param::Kappa0,
    Param::Tau0,
    Param::VS,
    Param::Alpha,
    Param::Lambda,
    Param::Beta,
];

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::Kappa0 => "kappa0",
            Param::Tau0 => "tau0",
            Param::VS => "v_s",
            Param::Alpha => "alpha",
            Param::Lambda => "lambda",
            Param::Beta => "beta",
        }
    }

    fn fixed_key(self) -> &'static str {
        match self {
            Param::Kappa0 => "geometry.kappa0",
            Param::Tau0 => "geometry.tau0",
            Param::VS => "flow.v_s",
            Param::Alpha => "plasma.alpha",
            Param::Lambda => "plasma.lambda",
            Param::Beta => "plasma.beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    Grid(Axis),
    /// Multiple of κ₀.
    Coupled(f64),
    /// `α = −κ₀⟨v_n²⟩`.
    Helicity { v_n: f64, meansq: f64 },
}

/// Resolved inputs for a spectrum query or sweep.
#[derive(Debug, Clone)]
pub struct PointPlan {
    sources: [Source; 6],
    pub eta: f64,
    pub scheme: Arc<dyn CoefficientScheme>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inputs {
    pub kappa0: f64,
    pub tau0: f64,
    pub v_s: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    v_n: f64,
    meansq: f64,
}

impl PointPlan {
    pub fn from_config(cfg: &RunConfig, scheme: Arc<dyn CoefficientScheme>) -> Result<Self, ConfigError> {
        let helicity = cfg.f64("flow.v_n_meansq")?;
        let v_n = cfg.f64_or("flow.v_n", 0.0)?;
        let mut sources = [Source::Coupled(0.0); 6];
        for (slot, p) in sources.iter_mut().zip(PARAMS) {
            let fixed_key = p.fixed_key();
            let sweep_key = format!("sweep.{}", p.name());
            let couple_key = format!("couple.{}", p.name());
            let fixed = cfg.f64(fixed_key)?;
            let grid = cfg.axis(&sweep_key)?;
            let coupled = if p == Param::Kappa0 { None } else { cfg.f64(&couple_key)? };
            let given = [fixed.is_some(), grid.is_some(), coupled.is_some()];
            if given.iter().filter(|g| **g).count() > 1 {
                let key = if grid.is_some() { sweep_key } else { couple_key };
                return Err(cfg.error(&key, format!("{} is set more than once (fixed, sweep or couple)", p.name())));
            }
            if p == Param::Alpha && helicity.is_some() && given.iter().any(|g| *g) {
                return Err(cfg.error(
                    "flow.v_n_meansq",
                    "alpha is derived from flow.v_n_meansq; do not also set it",
                ));
            }
            *slot = match (fixed, grid, coupled) {
                (Some(v), _, _) => Source::Grid(Axis::point(v)),
                (_, Some(axis), _) => Source::Grid(axis),
                (_, _, Some(f)) => Source::Coupled(f),
                _ => match p {
                    Param::Kappa0 => {
                        return Err(ConfigError {
                            line: None,
                            key: Some("geometry.kappa0".into()),
                            message: "required (set geometry.kappa0 or sweep.kappa0)".into(),
                        })
                    }
                    Param::Tau0 => Source::Coupled(1.0),
                    Param::VS => Source::Grid(Axis::point(-1.0)),
                    Param::Alpha => match helicity {
                        Some(meansq) => Source::Helicity { v_n, meansq },
                        None => Source::Grid(Axis::point(0.0)),
                    },
                    Param::Lambda => Source::Grid(Axis::point(1.0)),
                    Param::Beta => Source::Grid(Axis::point(0.0)),
                },
            };
        }
        let eta = cfg.f64_or("plasma.eta", 0.0)?;
        Ok(Self { sources, eta, scheme })
    }

    /// Number of grid points, or `None` on overflow.
    pub fn row_count(&self) -> Option<u64> {
        self.sources.iter().try_fold(1u64, |acc, s| match s {
            Source::Grid(a) => acc.checked_mul(a.count as u64),
            _ => Some(acc),
        })
    }

    /// All grid points in lexicographic order, κ₀ varying slowest.
    pub fn points(&self) -> Vec<Inputs> {
        let grids: Vec<Vec<f64>> = self
            .sources
            .iter()
            .map(|s| match s {
                Source::Grid(a) => a.values(),
                _ => vec![f64::NAN],
            })
            .collect();
        let total: usize = grids.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = [0usize; 6];
        for _ in 0..total {
            let pick = |i: usize| grids[i][idx[i]];
            let kappa0 = pick(0);
            let resolve = |i: usize| match self.sources[i] {
                Source::Grid(_) => pick(i),
                Source::Coupled(f) => f * kappa0,
                Source::Helicity { .. } => f64::NAN,
            };
            let (v_n, meansq) = match self.sources[3] {
                Source::Helicity { v_n, meansq } => (v_n, meansq),
                _ => (0.0, 0.0),
            };
            let mut inputs = Inputs {
                kappa0,
                tau0: resolve(1),
                v_s: resolve(2),
                alpha: resolve(3),
                lambda: resolve(4),
                beta: resolve(5),
                v_n,
                meansq,
            };
            if let Source::Helicity { .. } = self.sources[3] {
                inputs.alpha = -kappa0 * meansq;
            }
            out.push(inputs);
            for d in (0..6).rev() {
                idx[d] += 1;
                if idx[d] < grids[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub inputs: Inputs,
    pub spectrum: Spectrum,
    /// Mode class, or `NONCONVERGENT` when the β-sequence is not monotone.
    pub classification: String,
}

fn domain(inputs: &Inputs, err: impl std::fmt::Display) -> CliError {
    CliError::Domain(format!(
        "at kappa0={}, tau0={}, v_s={}, alpha={}, lambda={}, beta={}: {err}",
        inputs.kappa0, inputs.tau0, inputs.v_s, inputs.alpha, inputs.lambda, inputs.beta
    ))
}

pub fn evaluate(inputs: &Inputs, eta: f64, scheme: &dyn CoefficientScheme) -> Result<Evaluated, CliError> {
    let geom = FilamentGeometry::new(inputs.kappa0, inputs.tau0).map_err(|e| domain(inputs, e))?;
    let flow = FlowProfile::new(inputs.v_s, inputs.v_n, inputs.meansq).map_err(|e| domain(inputs, e))?;
    if inputs.meansq != 0.0 {
        debug_assert_eq!(alpha_helicity(&geom, &flow), inputs.alpha);
    }
    let params =
        PlasmaParams::new(inputs.alpha, inputs.beta, inputs.lambda, eta, flow).map_err(|e| domain(inputs, e))?;
    let family = |beta: f64| -> Result<Spectrum, SpectrumError> {
        build_matrix(&geom, &params.with_beta(beta), scheme)
            .map(|m| characteristic_roots(&m))
            .map_err(|e| SpectrumError::Family {
                beta,
                reason: e.to_string(),
            })
    };
    let point = family(inputs.beta).map_err(|e| domain(inputs, e))?;
    let classification = match classify_at(family, inputs.beta) {
        Ok((_, class)) => class.to_string(),
        Err(SpectrumError::NonConvergent { .. }) => "NONCONVERGENT".to_string(),
        Err(e) => return Err(domain(inputs, e)),
    };
    Ok(Evaluated {
        inputs: *inputs,
        spectrum: point,
        classification,
    })
}

fn row(ev: &Evaluated, scheme: &str) -> Vec<Cell> {
    let i = &ev.inputs;
    let s = &ev.spectrum;
    vec![
        i.kappa0.into(),
        i.tau0.into(),
        i.v_s.into(),
        i.alpha.into(),
        i.lambda.into(),
        i.beta.into(),
        scheme.into(),
        s.gamma_plus.re.into(),
        s.gamma_plus.im.into(),
        s.gamma_minus.re.into(),
        s.gamma_minus.im.into(),
        s.discriminant.into(),
        ev.classification.clone().into(),
    ]
}

/// Closed-form branch values that apply at a point, with their distance
/// from the matrix roots.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    pub branch: &'static str,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub classification: String,
    pub matrix_difference: f64,
}

pub fn applicable_branches(ev: &Evaluated) -> Vec<BranchReport> {
    let i = &ev.inputs;
    if i.beta != 0.0 {
        return Vec::new();
    }
    let al = i.alpha * i.lambda;
    let diff = |gp: f64, gm: f64| {
        let s = &ev.spectrum;
        (s.gamma_plus - gp).norm().max((s.gamma_minus - gm).norm())
    };
    let class_of = |gp: f64, gm: f64, tag: SchemeTag| {
        characteristic_roots(&DynamoMatrix::new([[gp, 0.0], [0.0, gm]], tag))
            .classification
            .to_string()
    };
    let mut out = Vec::new();
    if let Ok((gp, gm)) = paper_closed_form_laminar(al, i.kappa0) {
        out.push(BranchReport {
            branch: "laminar",
            gamma_plus: gp,
            gamma_minus: gm,
            classification: class_of(gp, gm, SchemeTag::LaminarBranch),
            matrix_difference: diff(gp, gm),
        });
    }
    let deg = degenerate_branch(i.kappa0);
    if (al - deg.alpha_lambda).abs() <= BRANCH_TOL * (1.0 + i.kappa0.abs()) {
        out.push(BranchReport {
            branch: "degenerate",
            gamma_plus: deg.gamma,
            gamma_minus: deg.gamma,
            classification: class_of(deg.gamma, deg.gamma, SchemeTag::DegenerateBranch),
            matrix_difference: diff(deg.gamma, deg.gamma),
        });
    }
    out
}

pub fn cmd_spectrum(cfg: &RunConfig, scheme: Arc<dyn CoefficientScheme>) -> Result<Table, CliError> {
    if cfg.has_prefix("sweep.") {
        let key = ["kappa0", "tau0", "v_s", "alpha", "lambda", "beta", "row_cap"]
            .iter()
            .map(|a| format!("sweep.{a}"))
            .find(|k| cfg.contains(k))
            .unwrap_or_default();
        return Err(cfg.error(&key, "spectrum takes single-point parameters; use the sweep command").into());
    }
    let plan = PointPlan::from_config(cfg, scheme)?;
    let inputs = plan.points()[0];
    let ev = evaluate(&inputs, plan.eta, plan.scheme.as_ref())?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    table.push(row(&ev, plan.scheme.name()));
    for b in applicable_branches(&ev) {
        let p = b.branch;
        table.note(format!("branch.{p}.gamma_plus"), b.gamma_plus);
        table.note(format!("branch.{p}.gamma_minus"), b.gamma_minus);
        table.note(format!("branch.{p}.classification"), b.classification);
        table.note(format!("branch.{p}.matrix_difference"), b.matrix_difference);
    }
    Ok(table)
}

pub fn cmd_sweep(cfg: &RunConfig, scheme: Arc<dyn CoefficientScheme>) -> Result<Table, CliError> {
    let has_axis = ["kappa0", "tau0", "v_s", "alpha", "lambda", "beta"]
        .iter()
        .any(|a| cfg.contains(&format!("sweep.{a}")));
    if !has_axis {
        return Err(ConfigError::new("sweep needs at least one sweep.<axis> = min:max:count grid").into());
    }
    let plan = PointPlan::from_config(cfg, scheme)?;
    let cap = cfg.u64("sweep.row_cap")?.unwrap_or(DEFAULT_ROW_CAP);
    let rows = plan.row_count();
    if rows.is_none_or(|n| n > cap) {
        let shown = rows.map_or_else(|| "more than 2^64".to_string(), |n| n.to_string());
        let key = if cfg.contains("sweep.row_cap") { "sweep.row_cap" } else { "sweep" };
        return Err(cfg
            .error(key, format!("grid has {shown} rows, exceeding the row cap of {cap}"))
            .into());
    }
    let points = plan.points();
    let evaluated: Vec<Evaluated> = points
        .par_iter()
        .map(|p| evaluate(p, plan.eta, plan.scheme.as_ref()))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(SWEEP_COLUMNS.to_vec());
    let name = plan.scheme.name();
    for ev in &evaluated {
        table.push(row(ev, name));
    }
    Ok(table)
}

//! ABC flow evaluation, tube-coordinate grids, stagnation and growth queries.

use std::f64::consts::FRAC_PI_4;

use super::config::{Axis, ConfigError, RunConfig};
use super::output::{Cell, Table};
use super::spectra::DEFAULT_ROW_CAP;
use super::CliError;
use crate::abc::{
    abc_velocity_paper, abc_velocity_standard, stagnation_classify, tube_growth_rate, tube_velocity, AbcParams,
    RadialBracket, TubeField, TubePoint, Vec3,
};

fn amplitudes(cfg: &RunConfig) -> Result<AbcParams, ConfigError> {
    Ok(AbcParams::new(
        cfg.require_f64("abc.A")?,
        cfg.require_f64("abc.B")?,
        cfg.require_f64("abc.C")?,
    ))
}

fn values(cfg: &RunConfig, key: &str, default: f64) -> Result<Vec<f64>, ConfigError> {
    Ok(cfg.axis(key)?.unwrap_or(Axis::point(default)).values())
}

/// Cartesian product of the given axes, first axis varying slowest.
fn product(cfg: &RunConfig, axes: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ConfigError> {
    let total = axes
        .iter()
        .try_fold(1u64, |acc, a| acc.checked_mul(a.len() as u64))
        .filter(|n| *n <= cfg.u64("sweep.row_cap").ok().flatten().unwrap_or(DEFAULT_ROW_CAP));
    let Some(total) = total else {
        return Err(ConfigError::new("grid exceeds the row cap"));
    };
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
        for d in (0..axes.len()).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

fn domain(err: impl std::fmt::Display) -> CliError {
    CliError::Domain(err.to_string())
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = amplitudes(cfg)?;
    let axes = [
        values(cfg, "abc.x", 0.0)?,
        values(cfg, "abc.y", 0.0)?,
        values(cfg, "abc.z", 0.0)?,
    ];
    let mut table = Table::new(vec![
        "x",
        "y",
        "z",
        "complex_x",
        "complex_y",
        "complex_z",
        "standard_x",
        "standard_y",
        "standard_z",
        "reflection_residual",
    ]);
    for p in product(cfg, &axes)? {
        let p = Vec3::new(p[0], p[1], p[2]);
        let complex = abc_velocity_paper(&params, &p).map_err(domain)?;
        let standard = abc_velocity_standard(&params, &p);
        let residual = (complex - abc_velocity_standard(&params, &-p) * 2.0).amax();
        table.push(vec![
            p.x.into(),
            p.y.into(),
            p.z.into(),
            complex.x.into(),
            complex.y.into(),
            complex.z.into(),
            standard.x.into(),
            standard.y.into(),
            standard.z.into(),
            residual.into(),
        ]);
    }
    Ok(table)
}

fn bracket(cfg: &RunConfig) -> Result<RadialBracket, ConfigError> {
    match cfg.str("abc.bracket") {
        None | Some("mixed") => Ok(RadialBracket::Mixed),
        Some("symmetric") => Ok(RadialBracket::Symmetric),
        Some(other) => Err(cfg.error(
            "abc.bracket",
            format!("unknown bracket '{other}' (expected mixed or symmetric)"),
        )),
    }
}

pub fn cmd_tube(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = amplitudes(cfg)?;
    let bracket = bracket(cfg)?;
    let axes = [
        values(cfg, "tube.r", 1.0)?,
        values(cfg, "tube.s", 0.0)?,
        values(cfg, "tube.theta0", FRAC_PI_4)?,
        values(cfg, "tube.tau0", 1.0)?,
    ];
    let mut table = Table::new(vec!["r", "s", "theta0", "tau0", "theta", "v_s", "v_r", "v_r_imag"]);
    let mut masked = 0usize;
    for p in product(cfg, &axes)? {
        let tp = TubePoint::new(p[0], p[1], p[2], p[3]).map_err(domain)?;
        match tube_velocity(&params, &tp, bracket) {
            Ok(v) => table.push(vec![
                tp.r.into(),
                tp.s.into(),
                tp.theta0.into(),
                tp.tau0.into(),
                tp.theta().into(),
                v.v_s.into(),
                v.v_r.into(),
                v.v_r_imag.into(),
            ]),
            Err(e) if e.is_singularity() => masked += 1,
            Err(e) => return Err(domain(e)),
        }
    }
    table.note("masked", masked);
    Ok(table)
}

pub fn cmd_stagnation(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = amplitudes(cfg)?;
    let class = stagnation_classify(&params);
    let mut table = Table::new(vec!["A", "B", "C", "classification", "dynamo_action"]);
    table.push(vec![
        params.A.into(),
        params.B.into(),
        params.C.into(),
        class.name().into(),
        if class.supports_dynamo() {
            "not excluded"
        } else {
            "no dynamo action"
        }
        .into(),
    ]);
    Ok(table)
}

pub fn cmd_growth(cfg: &RunConfig) -> Result<Table, CliError> {
    let axes = [
        values(cfg, "tube.r", 1.0)?,
        values(cfg, "tube.s", 0.0)?,
        values(cfg, "tube.theta0", FRAC_PI_4)?,
        values(cfg, "tube.tau0", 1.0)?,
        values(cfg, "tube.b_theta", 1.0)?,
    ];
    let eta = cfg.f64_or("plasma.eta", 0.0)?;
    let mut table = Table::new(vec![
        "r",
        "s",
        "theta0",
        "tau0",
        "b_theta",
        "eta",
        "gamma",
        "classification",
        "b_s_constraint",
    ]);
    for p in product(cfg, &axes)? {
        let tp = TubePoint::new(p[0], p[1], p[2], p[3]).map_err(domain)?;
        let field = TubeField { b_s: 0.0, b_theta: p[4] };
        let g = tube_growth_rate(&field, &tp, eta).map_err(domain)?;
        table.push(vec![
            tp.r.into(),
            tp.s.into(),
            tp.theta0.into(),
            tp.tau0.into(),
            field.b_theta.into(),
            eta.into(),
            g.gamma.into(),
            Cell::Text(g.class.name().to_string()),
            g.b_s_constraint.into(),
        ]);
    }
    Ok(table)
}

//! Oracle cross-check, SLD residual suite and commutator-order fits.

use nalgebra::Matrix4;
use rayon::prelude::*;
use superres_core::bounds::{log_log_slope, log_space, qfi_state_matrix, BoundKind, BoundMatrix};
use superres_core::model::{bloch_derivative, bloch_vector};
use superres_core::oracle::{cross_check, validation_grid, OracleOptions, ValidationRow};
use superres_core::sld::{
    commutator_report, extended_basis, separation_derivative_extended, sld_scalar, sld_separation_with,
};
use superres_core::{pauli, Complex, OpticalConfig, Param, ParamPoint, Result};

use crate::error::{CliError, CliResult};

pub const ORACLE_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL_2: f64 = 1e-10;
pub const RESIDUAL_TOL_4: f64 = 1e-8;
pub const SLOPE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Eight points, for smoke runs.
    Quick,
    /// The 81-point grid in the geometric frame and at α = 0.3.
    Default,
}

impl Preset {
    pub fn parse(name: &str) -> CliResult<Preset> {
        match name {
            "quick" => Ok(Preset::Quick),
            "default" => Ok(Preset::Default),
            other => Err(CliError::Usage(format!(
                "unknown preset '{other}', expected quick or default"
            ))),
        }
    }

    pub fn points(self, sigma: f64) -> Vec<(ParamPoint, f64)> {
        let grid = match self {
            Preset::Default => validation_grid(sigma),
            Preset::Quick => {
                let mut v = Vec::new();
                for q in [0.25, 0.75] {
                    for gr in [-0.5, 0.5] {
                        v.push(ParamPoint::new(sigma, q, gr, 0.2).expect("valid point"));
                    }
                }
                v
            }
        };
        [0.5, 0.3]
            .iter()
            .flat_map(|&a| grid.iter().map(move |p| (*p, a)))
            .collect()
    }
}

/// Deliberate defects used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the frame-rotation constant ν in the separation SLD.
    NuSign,
}

impl Fault {
    pub fn parse(name: &str) -> CliResult<Fault> {
        match name {
            "nu-sign" => Ok(Fault::NuSign),
            other => Err(CliError::Usage(format!("unknown fault '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# version: {}\n", crate::VERSION);
        for c in &self.checks {
            out.push_str(&format!(
                "# check {}: {} ({})\n",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.detail
            ));
        }
        out.push_str("s,q,gamma_r,gamma_i,alpha,entry,closed_form,oracle,rel_error,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}_{},{:e},{:e},{:e},{}\n",
                r.point.s,
                r.point.q,
                r.point.gamma_r,
                r.point.gamma_i,
                r.alpha,
                r.row.name(),
                r.col.name(),
                r.closed_form,
                r.oracle,
                r.rel_error,
                r.rel_error <= ORACLE_TOL
            ));
        }
        out
    }
}

/// The four SLDs in `{e₁..e₄}`, the separation one built from possibly tampered constants.
fn operators(p: &ParamPoint, cfg: &OpticalConfig, fault: Option<Fault>) -> Result<[Matrix4<Complex>; 4]> {
    let mut data = extended_basis(p, cfg)?;
    if fault == Some(Fault::NuSign) {
        data.nu = -data.nu;
    }
    Ok([
        sld_separation_with(p, cfg, &data)?.matrix(),
        sld_scalar(p, cfg, Param::Q)?.embed4(),
        sld_scalar(p, cfg, Param::GammaR)?.embed4(),
        sld_scalar(p, cfg, Param::GammaI)?.embed4(),
    ])
}

fn closed_form(p: &ParamPoint, cfg: &OpticalConfig, fault: Option<Fault>) -> Result<BoundMatrix> {
    if fault.is_none() {
        return qfi_state_matrix(p, cfg);
    }
    let ops = operators(p, cfg, fault)?;
    let rho = pauli::embed_upper(&bloch_vector(p, cfg)?.density_matrix());
    let f = Matrix4::from_fn(|i, j| (rho * (ops[i] * ops[j] + ops[j] * ops[i])).trace().re / 2.0);
    Ok(BoundMatrix::new(f, BoundKind::QfiState))
}

/// Largest 2×2 and 4×4 Lyapunov residuals, each SLD against the untampered derivative.
fn residuals(p: &ParamPoint, cfg: &OpticalConfig, fault: Option<Fault>) -> Result<(f64, f64)> {
    let rho = bloch_vector(p, cfg)?.density_matrix();
    let mut worst2: f64 = 0.0;
    for param in [Param::Q, Param::GammaR, Param::GammaI] {
        let drho = pauli::from_bloch(0.0, &(bloch_derivative(p, cfg, param)? * 0.5));
        let l = sld_scalar(p, cfg, param)?.matrix();
        worst2 = worst2.max(pauli::lyapunov_residual(&rho, &drho, &l));
    }
    let drho4 = separation_derivative_extended(p, cfg, &extended_basis(p, cfg)?)?;
    let l4 = operators(p, cfg, fault)?[0];
    Ok((worst2, pauli::lyapunov_residual(&pauli::embed_upper(&rho), &drho4, &l4)))
}

/// Fitted orders of the commutator norms and weak-commutativity traces at a generic point.
pub fn commutator_slopes(cfg: &OpticalConfig) -> Result<Vec<(String, f64, f64)>> {
    let (q, gr, gi) = (0.3, 0.3, 0.2);
    let cfg = cfg.with_alpha(q);
    let s = log_space(1e-3 * cfg.sigma, 1e-2 * cfg.sigma, 6);
    let reports = s
        .iter()
        .map(|&s| commutator_report(&ParamPoint::new(s, q, gr, gi)?, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (a, b) = (Param::ALL[i].name(), Param::ALL[j].name());
            let norms: Vec<f64> = reports.iter().map(|r| r.norms[i][j]).collect();
            let weak: Vec<f64> = reports.iter().map(|r| r.weak[i][j]).collect();
            let expect = if i == 0 { 0.0 } else { 1.0 };
            out.push((format!("norm[{a},{b}]"), log_log_slope(&s, &norms), expect));
            out.push((format!("weak[{a},{b}]"), log_log_slope(&s, &weak), expect + 1.0));
        }
    }
    Ok(out)
}

pub fn run_validate(preset: Preset, fault: Option<Fault>) -> CliResult<ValidationReport> {
    let cfg = OpticalConfig::standard();
    let points = preset.points(cfg.sigma);
    let opts = OracleOptions::default();

    let mut rows = Vec::with_capacity(points.len() * 16);
    for alpha in [0.5, 0.3] {
        let subset: Vec<ParamPoint> = points.iter().filter(|(_, a)| *a == alpha).map(|(p, _)| *p).collect();
        rows.extend(cross_check(&subset, &cfg.with_alpha(alpha), &opts, |p, c| {
            closed_form(p, c, fault)
        })?);
    }
    let worst = rows.iter().cloned().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error));
    let mut checks = vec![Check {
        name: "oracle_equivalence",
        passed: worst.is_some_and(|w| w.rel_error <= ORACLE_TOL),
        detail: worst.map_or("no rows".into(), |w| {
            format!(
                "worst {:e} at {} alpha={} entry {}_{}",
                w.rel_error,
                w.point,
                w.alpha,
                w.row.name(),
                w.col.name()
            )
        }),
    }];

    let res = points
        .par_iter()
        .map(|(p, a)| residuals(p, &cfg.with_alpha(*a), fault))
        .collect::<Result<Vec<_>>>()?;
    let (r2, r4) = res
        .iter()
        .fold((0.0f64, 0.0f64), |(x, y), (a, b)| (x.max(*a), y.max(*b)));
    checks.push(Check {
        name: "sld_residual_2x2",
        passed: r2 < RESIDUAL_TOL_2,
        detail: format!("max residual {r2:e}"),
    });
    checks.push(Check {
        name: "sld_residual_4x4",
        passed: r4 < RESIDUAL_TOL_4,
        detail: format!("max residual {r4:e}"),
    });

    let slopes = commutator_slopes(&cfg)?;
    let bad: Vec<String> = slopes
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > SLOPE_TOL)
        .map(|(n, got, want)| format!("{n} slope {got:.4} expected {want}"))
        .collect();
    checks.push(Check {
        name: "commutator_orders",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} slopes within {SLOPE_TOL}", slopes.len())
        } else {
            bad.join("; ")
        },
    });
    Ok(ValidationReport { rows, checks })
}

//! Datasets behind the eight figures.

use rayon::prelude::*;
use superres_core::bounds::{
    boundary_limit, in_figure_units, indirect_info, log_space, qubit_approx_info, van_trees_parts,
};
use superres_core::measurement::{spade_fisher_s, BinaryPovm, DerivativeMode, PovmKind};
use superres_core::{Basis, OpticalConfig, Param, ParamPoint};

use crate::dataset::{Dataset, Row};
use crate::error::{CliError, CliResult};

pub const FIGURES: [&str; 8] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

const UNITS_NOTE: &str = "columns without _raw are in units of (delta/4 sigma^2)";

/// Command-line overrides; `None` keeps the figure's default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOptions {
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub points: Option<usize>,
    pub gammas: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub q: Option<f64>,
}

impl FigureOptions {
    fn config(&self) -> CliResult<OpticalConfig> {
        let std = OpticalConfig::standard();
        Ok(OpticalConfig::new(
            self.sigma.unwrap_or(std.sigma),
            self.delta.unwrap_or(std.delta),
            0.5,
        )?)
    }

    fn points(&self, default: usize) -> CliResult<usize> {
        match self.points {
            Some(n) if n < 2 => Err(CliError::Usage(format!("--points must be at least 2, got {n}"))),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    fn gammas(&self, default: &[f64]) -> Vec<f64> {
        self.gammas.clone().unwrap_or_else(|| default.to_vec())
    }
}

const DEFAULT_GAMMAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];

pub fn run_figure(id: &str, opts: &FigureOptions) -> CliResult<Dataset> {
    let cfg = opts.config()?;
    let mut ds = match id {
        "fig1" => fig1(&cfg, opts)?,
        "fig2" => fig2(&cfg, opts)?,
        "fig3" => fig3(&cfg, opts)?,
        "fig4" => fig4(&cfg, opts)?,
        "fig5" => fig5(&cfg, opts)?,
        "fig6" => fig6(&cfg, opts)?,
        "fig7" => fig7(&cfg, opts)?,
        "fig8" => fig8(&cfg, opts)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown figure '{other}', expected one of {}",
                FIGURES.join(", ")
            )))
        }
    };
    ds.meta("delta", cfg.delta);
    ds.meta("sigma", cfg.sigma);
    Ok(ds)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluate `f` over `keys` in parallel and keep the input order.
fn sweep<F>(keys: Vec<Vec<f64>>, f: F) -> Vec<Row>
where
    F: Fn(&[f64]) -> Result<Row, String> + Sync,
{
    keys.into_par_iter()
        .map(|k| f(&k).unwrap_or_else(|reason| Row::skipped(k.clone(), reason)))
        .collect()
}

fn grid2(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect()
}

/// Each name followed by its `_raw` twin.
fn with_raw(names: &[String]) -> Vec<String> {
    names.iter().flat_map(|n| [n.clone(), format!("{n}_raw")]).collect()
}

fn units_and_raw(values: &[f64], cfg: &OpticalConfig) -> Vec<f64> {
    values.iter().flat_map(|&v| [in_figure_units(v, cfg), v]).collect()
}

fn diagonal_columns() -> Vec<String> {
    let names: Vec<String> = Param::ALL
        .iter()
        .flat_map(|p| ["quantum", "classical", "total"].map(|part| format!("{}_{part}", p.name())))
        .collect();
    with_raw(&names)
}

fn diagonal_values(p: &ParamPoint, cfg: &OpticalConfig) -> superres_core::Result<Vec<f64>> {
    let parts = van_trees_parts(p, cfg)?;
    let raw: Vec<f64> = (0..4)
        .flat_map(|i| {
            [
                parts.quantum[(i, i)],
                parts.classical[(i, i)],
                parts.total.entries[(i, i)],
            ]
        })
        .collect();
    Ok(units_and_raw(&raw, cfg))
}

fn fig1(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let q = opts.q.unwrap_or(0.5);
    let s = log_space(1e-2 * cfg.sigma, 6.0 * cfg.sigma, opts.points(60)?);
    let mut ds = Dataset::new("fig1", &["gamma_r", "s_over_sigma"], diagonal_columns());
    ds.meta("description", "van Trees diagonals versus separation");
    ds.meta("q", q);
    ds.meta("alpha", "centroid");
    ds.meta("units", UNITS_NOTE);
    let keys = grid2(
        &opts.gammas(&DEFAULT_GAMMAS),
        &s.iter().map(|v| v / cfg.sigma).collect::<Vec<_>>(),
    );
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(k[1] * cfg.sigma, q, k[0], 0.0).map_err(|e| e.to_string())?;
        let c = cfg.with_alpha(q);
        Ok(Row::ok(k.to_vec(), diagonal_values(&p, &c).map_err(|e| e.to_string())?))
    });
    Ok(ds)
}

fn fig2(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let s = opts.s.unwrap_or(1e-3) * cfg.sigma;
    let mut ds = Dataset::new("fig2", &["gamma_r", "q"], diagonal_columns());
    ds.meta(
        "description",
        "van Trees diagonals versus relative intensity, geometric frame",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("alpha", 0.5);
    ds.meta("units", UNITS_NOTE);
    let keys = grid2(&opts.gammas(&DEFAULT_GAMMAS), &linspace(0.0, 1.0, opts.points(101)?));
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(s, k[1], k[0], 0.0).map_err(|e| e.to_string())?;
        Ok(Row::ok(
            k.to_vec(),
            diagonal_values(&p, &cfg.with_alpha(0.5)).map_err(|e| e.to_string())?,
        ))
    });
    Ok(ds)
}

fn fig3(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let s = opts.s.unwrap_or(1e-3) * cfg.sigma;
    let names: Vec<String> = ["ss_quantum", "ss_classical", "ss_total"].map(String::from).to_vec();
    let mut ds = Dataset::new("fig3", &["gamma_r", "q"], with_raw(&names));
    ds.meta(
        "description",
        "van Trees ss diagonal versus relative intensity, centroid frame",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("alpha", "centroid");
    ds.meta("units", UNITS_NOTE);
    ds.meta("endpoints", "q = 0 and q = 1 rows hold one-sided limits");
    let keys = grid2(&opts.gammas(&DEFAULT_GAMMAS), &linspace(0.0, 1.0, opts.points(101)?));
    let at = |q: f64, gr: f64| -> superres_core::Result<[f64; 3]> {
        let p = ParamPoint::new(s, q, gr, 0.0)?;
        let parts = van_trees_parts(&p, &cfg.with_alpha(q))?;
        Ok([
            parts.quantum[(0, 0)],
            parts.classical[(0, 0)],
            parts.total.entries[(0, 0)],
        ])
    };
    ds.rows = sweep(keys, |k| {
        let (gr, q) = (k[0], k[1]);
        if q == 0.0 || q == 1.0 {
            // √(q(1-q)) terms leave an O(√h) spread between the two extrapolations.
            let mut raw = [0.0; 3];
            for (i, slot) in raw.iter_mut().enumerate() {
                *slot = boundary_limit(|x| Ok(at(x, gr)?[i]), q, 1e-3).map_err(|e| e.to_string())?;
            }
            return Ok(Row::noted(k.to_vec(), units_and_raw(&raw, cfg), "limit"));
        }
        Ok(Row::ok(
            k.to_vec(),
            units_and_raw(&at(q, gr).map_err(|e| e.to_string())?, cfg),
        ))
    });
    Ok(ds)
}

fn fig4(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    const FIXED_ALPHA: f64 = 0.7;
    const MARKER_Q: f64 = 0.75;
    let s = opts.s.unwrap_or(1e-3) * cfg.sigma;
    let names: Vec<String> = ["qfi_ss_centroid", "qfi_ss_fixed"].map(String::from).to_vec();
    let mut columns = with_raw(&names);
    columns.push("marker".into());
    let mut ds = Dataset::new("fig4", &["gamma_r", "q"], columns);
    ds.meta(
        "description",
        "n̄ times the ss QFI with the origin on the centroid and at a fixed weight",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("fixed_alpha", FIXED_ALPHA);
    ds.meta("marker_q", MARKER_Q);
    ds.meta("units", UNITS_NOTE);
    let keys = grid2(&opts.gammas(&DEFAULT_GAMMAS), &linspace(0.0, 1.0, opts.points(101)?));
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(s, k[1], k[0], 0.0).map_err(|e| e.to_string())?;
        let ss = |alpha: f64| -> Result<f64, String> {
            Ok(van_trees_parts(&p, &cfg.with_alpha(alpha))
                .map_err(|e| e.to_string())?
                .quantum[(0, 0)])
        };
        let mut values = units_and_raw(&[ss(k[1])?, ss(FIXED_ALPHA)?], cfg);
        values.push(if (k[1] - MARKER_Q).abs() < 1e-12 { 1.0 } else { 0.0 });
        Ok(Row::ok(k.to_vec(), values))
    });
    Ok(ds)
}

fn fig5(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let q = opts.q.unwrap_or(0.5);
    let names: Vec<String> = ["exact_ss", "qubit_ss", "extra_ss"].map(String::from).to_vec();
    let mut columns = with_raw(&names);
    columns.push("relative_difference".into());
    let mut ds = Dataset::new("fig5", &["gamma_r", "s_over_sigma"], columns);
    ds.meta(
        "description",
        "van Trees ss diagonal: full model, qubit part and the remainder",
    );
    ds.meta("q", q);
    ds.meta("alpha", "centroid");
    ds.meta("qubit_basis", "centroid modes differentiated with s");
    ds.meta("units", UNITS_NOTE);
    let s = log_space(1e-3, 6.0, opts.points(60)?);
    let keys = grid2(&opts.gammas(&[-0.5, 0.0, 0.5]), &s);
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(k[1] * cfg.sigma, q, k[0], 0.0).map_err(|e| e.to_string())?;
        let c = cfg.with_alpha(q);
        let exact = van_trees_parts(&p, &c).map_err(|e| e.to_string())?.total.diag(Param::S);
        let qubit = qubit_approx_info(&p, &c, Basis::CentroidV)
            .map_err(|e| e.to_string())?
            .diag(Param::S);
        let mut values = units_and_raw(&[exact, qubit, exact - qubit], cfg);
        values.push((qubit - exact).abs() / exact);
        Ok(Row::ok(k.to_vec(), values))
    });
    Ok(ds)
}

const SORTERS: [(&str, PovmKind, DerivativeMode); 4] = [
    ("aligned_exact", PovmKind::ProjectorV, DerivativeMode::Exact),
    (
        "aligned_qubit_approx",
        PovmKind::ProjectorV,
        DerivativeMode::QubitApprox,
    ),
    ("misaligned_exact", PovmKind::ProjectorE, DerivativeMode::Exact),
    (
        "misaligned_qubit_approx",
        PovmKind::ProjectorE,
        DerivativeMode::QubitApprox,
    ),
];

fn fig6(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let s = opts.s.unwrap_or(1e-2) * cfg.sigma;
    let mut names = vec!["qfi_ss".to_string()];
    names.extend(SORTERS.iter().map(|(n, _, _)| n.to_string()));
    let mut ds = Dataset::new("fig6", &["gamma_r", "q"], with_raw(&names));
    ds.meta(
        "description",
        "n̄ times the ss Fisher information of binary sorters against n̄ times the ss QFI",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("alpha", "centroid");
    ds.meta("aligned", "sorts the centroid mode v1");
    ds.meta("misaligned", "sorts the geometric mode e2");
    ds.meta(
        "negative_control",
        "misaligned_qubit_approx differentiates the qubit model and over-estimates the information",
    );
    ds.meta("units", UNITS_NOTE);
    let keys = grid2(&opts.gammas(&[-0.5, 0.5]), &linspace(0.0, 1.0, opts.points(101)?));
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(s, k[1], k[0], 0.0).map_err(|e| e.to_string())?;
        let c = cfg.with_alpha(k[1]);
        let mut raw = vec![van_trees_parts(&p, &c).map_err(|e| e.to_string())?.quantum[(0, 0)]];
        for (_, kind, mode) in SORTERS {
            raw.push(spade_fisher_s(&p, &c, &BinaryPovm::new(kind), mode, false).map_err(|e| e.to_string())?);
        }
        Ok(Row::ok(k.to_vec(), units_and_raw(&raw, cfg)))
    });
    Ok(ds)
}

fn fig7(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let s = opts.s.unwrap_or(1e-3) * cfg.sigma;
    let mut ds = Dataset::new("fig7", &["gamma_r", "q"], vec!["relative_difference".into()]);
    ds.meta(
        "description",
        "(FI aligned - FI misaligned)/FI aligned for the exact sorter derivatives",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("alpha", "centroid");
    let keys = grid2(&opts.gammas(&DEFAULT_GAMMAS), &linspace(0.0, 1.0, opts.points(101)?));
    ds.rows = sweep(keys, |k| {
        let p = ParamPoint::new(s, k[1], k[0], 0.0).map_err(|e| e.to_string())?;
        let d = superres_core::measurement::misalignment_relative_difference(&p, &cfg.with_alpha(k[1]))
            .map_err(|e| e.to_string())?;
        Ok(Row::ok(k.to_vec(), vec![d]))
    });
    Ok(ds)
}

fn fig8(cfg: &OpticalConfig, opts: &FigureOptions) -> CliResult<Dataset> {
    let s = opts.s.unwrap_or(1e-4) * cfg.sigma;
    let q = opts.q.unwrap_or(0.4);
    let names: Vec<String> = ["direct_ss", "indirect_ss"].map(String::from).to_vec();
    let mut columns = with_raw(&names);
    columns.extend(["relative_difference", "bijective", "s0_over_sigma"].map(String::from));
    let mut ds = Dataset::new("fig8", &["gamma_r", "gamma_i"], columns);
    ds.meta(
        "description",
        "(direct - indirect)/direct for the van Trees ss information",
    );
    ds.meta("s_over_sigma", s / cfg.sigma);
    ds.meta("q", q);
    ds.meta("alpha", "centroid");
    ds.meta(
        "indirect_branch",
        "gamma_r < 0 rows assume the measured purity exceeds r_inf",
    );
    ds.meta("units", UNITS_NOTE);
    let axis = linspace(-0.9, 0.9, opts.points(19)?);
    ds.rows = sweep(grid2(&axis, &axis), |k| {
        let p = ParamPoint::new(s, q, k[0], k[1]).map_err(|e| e.to_string())?;
        let c = cfg.with_alpha(q);
        let direct = van_trees_parts(&p, &c).map_err(|e| e.to_string())?.total.diag(Param::S);
        let ind = indirect_info(&p, &c, true).map_err(|e| e.to_string())?;
        let indirect = ind.bound.diag(Param::S);
        let mut values = units_and_raw(&[direct, indirect], cfg);
        values.push((direct - indirect) / direct);
        values.push(if ind.bijective { 1.0 } else { 0.0 });
        values.push(ind.s0.map_or(f64::NAN, |v| v / cfg.sigma));
        Ok(Row::ok(k.to_vec(), values))
    });
    Ok(ds)
}

//! Monte Carlo runs: sample detection records, fit them, compare the spread to the bound.

use rayon::prelude::*;
use superres_core::bounds::van_trees_info;
use superres_core::measurement::{mle_estimate, simulate_detections, DetectionRecord, MleSummary};
use superres_core::Param;

use crate::error::{CliError, CliResult};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSummary {
    pub param: Param,
    pub truth: f64,
    pub mean: f64,
    pub variance: f64,
    /// Diagonal of the inverse van Trees information over the free block, for all slots.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub records: Vec<DetectionRecord>,
    pub fit: MleSummary,
    pub summary: Vec<FreeSummary>,
}

pub fn run_simulate(sc: &Scenario) -> CliResult<SimulationOutput> {
    let records = (0..sc.repetitions)
        .into_par_iter()
        .map(|t| simulate_detections(&sc.point, &sc.cfg, &sc.measurement, sc.slots, sc.seed, t))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = mle_estimate(&records, &sc.cfg, &sc.point, &sc.measurement, &sc.free)?;

    let info = van_trees_info(&sc.point, &sc.cfg)?.entries * sc.slots as f64;
    let idx: Vec<usize> = sc.free.iter().map(|f| f.param.index()).collect();
    let block = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |i, j| info[(idx[i], idx[j])]);
    let inverse = block
        .try_inverse()
        .ok_or_else(|| CliError::Core(superres_core::Error::Estimation("van Trees block is singular".into())))?;
    let summary = sc
        .free
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let k = f.param.index();
            let bound = inverse[(i, i)];
            FreeSummary {
                param: f.param,
                truth: sc.point.get(f.param),
                mean: fit.mean[k],
                variance: fit.sample_variance[k],
                bound,
                ratio: fit.sample_variance[k] / bound,
            }
        })
        .collect();
    Ok(SimulationOutput { records, fit, summary })
}

impl SimulationOutput {
    /// Records as CSV with the scenario in `#` metadata.
    pub fn records_csv(&self, sc: &Scenario) -> String {
        let mut out = String::new();
        let p = &sc.point;
        for (k, v) in [
            ("version", crate::VERSION.to_string()),
            ("measurement", sc.measurement.name()),
            ("s", p.s.to_string()),
            ("q", p.q.to_string()),
            ("gamma_r", p.gamma_r.to_string()),
            ("gamma_i", p.gamma_i.to_string()),
            ("delta", sc.cfg.delta.to_string()),
            ("sigma", sc.cfg.sigma.to_string()),
            ("alpha", format!("{} ({})", sc.frame, sc.cfg.alpha)),
            ("seed", sc.seed.to_string()),
        ] {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(DetectionRecord::CSV_HEADER);
        out.push('\n');
        for (t, r) in self.records.iter().enumerate() {
            out.push_str(&r.csv_row(t as u64, sc.seed));
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::from("param,truth,mean,variance,van_trees_bound,ratio\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{}\n",
                s.param.name(),
                s.truth,
                s.mean,
                s.variance,
                s.bound,
                s.ratio
            ));
        }
        out
    }
}

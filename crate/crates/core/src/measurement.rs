//! Classical Fisher information of concrete measurements and Monte Carlo estimation.
//!
//! A binary mode sorter projects each detected boson onto one real mode `m` or its
//! complement. Modes here are finite real combinations of displaced Gaussians, so every
//! probability is a closed-form Gaussian overlap.

use nalgebra::Matrix2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::bounds::{prior_fisher, BoundKind, BoundMatrix};
use crate::error::{Error, Result};
use crate::model::{
    basis_coefficients, bloch_derivative, bloch_vector, centroid_rotation, mean_photon_number, overlap_c, Basis,
    OpticalConfig, Param, ParamPoint,
};
use crate::pauli;

const DEGENERATE_PROB: f64 = 1e-30;

/// Which mode the binary sorter isolates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PovmKind {
    /// The intensity-weighted mode v₁.
    ProjectorV,
    /// The sum mode e₂.
    ProjectorE,
    /// Ground HG mode at the intensity centroid.
    Hg0Centroid,
    /// Ground HG mode at the geometric centre.
    Hg0Geometric,
}

impl PovmKind {
    pub const ALL: [PovmKind; 4] = [
        PovmKind::ProjectorV,
        PovmKind::ProjectorE,
        PovmKind::Hg0Centroid,
        PovmKind::Hg0Geometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PovmKind::ProjectorV => "projector_v",
            PovmKind::ProjectorE => "projector_e",
            PovmKind::Hg0Centroid => "hg0_centroid",
            PovmKind::Hg0Geometric => "hg0_geometric",
        }
    }

    pub fn parse(text: &str) -> Option<PovmKind> {
        PovmKind::ALL.into_iter().find(|k| k.name() == text.trim())
    }
}

/// `{P_m, I - P_m}`. Outcome 0 is "found in m".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryPovm {
    pub kind: PovmKind,
}

impl BinaryPovm {
    pub fn new(kind: PovmKind) -> Self {
        BinaryPovm { kind }
    }

    /// Centre of the HG₀ mode relative to the frame origin, for the HG₀ kinds.
    pub fn center(&self, p: &ParamPoint, cfg: &OpticalConfig) -> Option<f64> {
        let (x1, x2) = cfg.source_positions(p.s);
        match self.kind {
            PovmKind::Hg0Centroid => Some(p.q * x1 + (1.0 - p.q) * x2),
            PovmKind::Hg0Geometric => Some(0.5 * (x1 + x2)),
            _ => None,
        }
    }

    /// `(p₀, p₁)` for a detected boson.
    pub fn probabilities(&self, p: &ParamPoint, cfg: &OpticalConfig) -> Result<[f64; 2]> {
        let p0 = detection_model(p, cfg, self.kind)?.p0;
        Ok([p0, 1.0 - p0])
    }
}

/// How ∂p/∂s is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeMode {
    /// The sorter stays where it was set up; only the sources move.
    Exact,
    /// The sorter is rebuilt at every s, which is what differentiating the qubit model does.
    QubitApprox,
}

impl DerivativeMode {
    pub fn name(self) -> &'static str {
        match self {
            DerivativeMode::Exact => "exact",
            DerivativeMode::QubitApprox => "qubit_approx",
        }
    }
}

/// A Gaussian component of the measured mode with its velocity under s.
#[derive(Debug, Clone, Copy)]
struct Component {
    weight: f64,
    center: f64,
    velocity: f64,
}

struct Detection {
    p0: f64,
    dp0_exact: f64,
    dp0_moving: f64,
}

fn gauss(u: f64, sigma: f64) -> f64 {
    (-u * u / (8.0 * sigma * sigma)).exp()
}

fn components(p: &ParamPoint, cfg: &OpticalConfig, kind: PovmKind) -> Result<Vec<Component>> {
    let (x1, x2) = cfg.source_positions(p.s);
    Ok(match kind {
        PovmKind::ProjectorV | PovmKind::ProjectorE => {
            let (w1, w2) = if kind == PovmKind::ProjectorV {
                let b = basis_coefficients(p, cfg, Basis::CentroidV)?;
                (b.rows[0][0], b.rows[0][1])
            } else {
                let c = overlap_c(p.s, cfg.sigma)?;
                if c >= 1.0 - crate::model::OVERLAP_TOL {
                    return Err(Error::DegenerateOverlap { s: p.s, c });
                }
                let w = 1.0 / (2.0 * (1.0 + c)).sqrt();
                (w, w)
            };
            // Weights also move with s in the qubit picture; that motion is handled in Bloch form.
            vec![
                Component {
                    weight: w1,
                    center: x1,
                    velocity: f64::NAN,
                },
                Component {
                    weight: w2,
                    center: x2,
                    velocity: f64::NAN,
                },
            ]
        }
        PovmKind::Hg0Centroid => vec![Component {
            weight: 1.0,
            center: p.q * x1 + (1.0 - p.q) * x2,
            velocity: cfg.alpha - p.q,
        }],
        PovmKind::Hg0Geometric => vec![Component {
            weight: 1.0,
            center: 0.5 * (x1 + x2),
            velocity: cfg.alpha - 0.5,
        }],
    })
}

fn detection_model(p: &ParamPoint, cfg: &OpticalConfig, kind: PovmKind) -> Result<Detection> {
    p.validate()?;
    let sigma = cfg.sigma;
    let (x1, x2) = cfg.source_positions(p.s);
    let (v1, v2) = (-(1.0 - cfg.alpha), cfg.alpha);
    let comps = components(p, cfg, kind)?;
    let c = overlap_c(p.s, sigma)?;
    let dc = -p.s * c / (4.0 * sigma * sigma);
    let g = (p.q * (1.0 - p.q)).sqrt();
    let norm = 1.0 + 2.0 * c * p.gamma_r * g;
    if norm <= crate::model::DENOMINATOR_TOL {
        return Err(Error::DegenerateState { denominator: norm });
    }
    let dnorm = 2.0 * dc * p.gamma_r * g;

    // Amplitudes ⟨m|ψ⟩, ⟨m|φ⟩ and their s-derivatives with the mode frozen or moving.
    let amp = |src: f64, src_v: f64, moving: bool| -> (f64, f64) {
        comps.iter().fold((0.0, 0.0), |(a, da), k| {
            let u = k.center - src;
            let vel = if moving { k.velocity } else { 0.0 };
            let gk = gauss(u, sigma);
            (
                a + k.weight * gk,
                da - k.weight * u * (vel - src_v) / (4.0 * sigma * sigma) * gk,
            )
        })
    };
    let numerator = |a: f64, b: f64| p.q * a * a + (1.0 - p.q) * b * b + 2.0 * g * p.gamma_r * a * b;
    let dnumerator = |a: f64, da: f64, b: f64, db: f64| {
        2.0 * p.q * a * da + 2.0 * (1.0 - p.q) * b * db + 2.0 * g * p.gamma_r * (da * b + a * db)
    };
    let (a, da) = amp(x1, v1, false);
    let (b, db) = amp(x2, v2, false);
    let num = numerator(a, b);
    let p0 = num / norm;
    let dp0_exact = (dnumerator(a, da, b, db) * norm - num * dnorm) / (norm * norm);

    let dp0_moving = match kind {
        PovmKind::Hg0Centroid | PovmKind::Hg0Geometric => {
            let (a, da) = amp(x1, v1, true);
            let (b, db) = amp(x2, v2, true);
            (dnumerator(a, da, b, db) * norm - num * dnorm) / (norm * norm)
        }
        PovmKind::ProjectorV | PovmKind::ProjectorE => qubit_projector_derivative(p, cfg, kind)?,
    };
    Ok(Detection {
        p0,
        dp0_exact,
        dp0_moving,
    })
}

/// `d/ds ⟨m(s)|ρ(s)|m(s)⟩` from the Bloch derivative in the basis that carries m.
fn qubit_projector_derivative(p: &ParamPoint, cfg: &OpticalConfig, kind: PovmKind) -> Result<f64> {
    let r = bloch_vector(p, cfg)?.r_vec;
    let dr = bloch_derivative(p, cfg, Param::S)?;
    match kind {
        // e₂ is the second basis vector, so p₀ = (1 - r_z)/2.
        PovmKind::ProjectorE => Ok(-0.5 * dr.z),
        _ => {
            let rot = centroid_rotation(p, cfg)?;
            let u = pauli::real2(&rot.u);
            let du = pauli::real2(&rot.du_ds);
            let rho = pauli::from_bloch(0.5, &(r * 0.5));
            let a = pauli::from_bloch(0.0, &(dr * 0.5));
            let d: Matrix2<crate::Complex> =
                u * a * u.transpose() + du * rho * u.transpose() + u * rho * du.transpose();
            Ok(d[(0, 0)].re)
        }
    }
}

/// `(p₀, ∂p₀/∂s)` under the chosen derivative mode.
pub fn outcome_probability(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    povm: &BinaryPovm,
    mode: DerivativeMode,
) -> Result<(f64, f64)> {
    let det = detection_model(p, cfg, povm.kind)?;
    let dp = match mode {
        DerivativeMode::Exact => det.dp0_exact,
        DerivativeMode::QubitApprox => det.dp0_moving,
    };
    Ok((det.p0, dp))
}

/// Fisher information for s carried by one detected boson.
pub fn binary_fisher_s(p: &ParamPoint, cfg: &OpticalConfig, povm: &BinaryPovm, mode: DerivativeMode) -> Result<f64> {
    let (p0, dp) = outcome_probability(p, cfg, povm, mode)?;
    let p1 = 1.0 - p0;
    if p0 * p1 <= DEGENERATE_PROB || !(p0 * p1).is_finite() {
        return Err(Error::DegenerateProbabilities {
            p0,
            params: format!("{p}, {}", povm.kind.name()),
        });
    }
    Ok(dp * dp / (p0 * p1))
}

/// Per-slot Fisher information for s: `n̄·FI[p] (+ prior FI when requested)`.
pub fn spade_fisher_s(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    povm: &BinaryPovm,
    mode: DerivativeMode,
    with_prior: bool,
) -> Result<f64> {
    let nbar = mean_photon_number(p, cfg)?;
    let mut fi = nbar * binary_fisher_s(p, cfg, povm, mode)?;
    if with_prior {
        fi += prior_fisher(p, cfg)?.diag(Param::S);
    }
    Ok(fi)
}

/// `(FI_aligned - FI_misaligned)/FI_aligned` for the exact sorter FI per detected boson.
///
/// Aligned sorts v₁, misaligned sorts e₂; both are evaluated in the frame of `cfg`.
pub fn misalignment_relative_difference(p: &ParamPoint, cfg: &OpticalConfig) -> Result<f64> {
    let aligned = binary_fisher_s(p, cfg, &BinaryPovm::new(PovmKind::ProjectorV), DerivativeMode::Exact)?;
    let misaligned = binary_fisher_s(p, cfg, &BinaryPovm::new(PovmKind::ProjectorE), DerivativeMode::Exact)?;
    Ok((aligned - misaligned) / aligned)
}

/// Fisher information of photon counting alone, which is the Bernoulli arrival FI.
pub fn counting_fisher(p: &ParamPoint, cfg: &OpticalConfig) -> Result<BoundMatrix> {
    let f = prior_fisher(p, cfg)?;
    Ok(BoundMatrix::new(f.entries, BoundKind::PriorFi))
}

/// What each slot records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measurement {
    /// Detected or not. Detections land in outcome 0.
    Counting,
    /// Counting followed by a binary sorter on each detected boson.
    Spade(BinaryPovm),
}

impl Measurement {
    fn p0(&self, p: &ParamPoint, cfg: &OpticalConfig) -> Result<f64> {
        match self {
            Measurement::Counting => Ok(1.0),
            Measurement::Spade(povm) => Ok(povm.probabilities(p, cfg)?[0]),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Measurement::Counting => "counting".into(),
            Measurement::Spade(povm) => format!("spade:{}", povm.kind.name()),
        }
    }
}

/// Outcome counts over `slot_count` coherence times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DetectionRecord {
    pub slot_count: u64,
    pub vacuum: u64,
    pub out0: u64,
    pub out1: u64,
}

impl DetectionRecord {
    pub fn detections(&self) -> u64 {
        self.out0 + self.out1
    }

    pub fn is_consistent(&self) -> bool {
        self.vacuum + self.out0 + self.out1 == self.slot_count
    }

    pub const CSV_HEADER: &'static str = "trial,slots,n_vacuum,n_out0,n_out1,seed";

    pub fn csv_row(&self, trial: u64, seed: u64) -> String {
        format!(
            "{trial},{},{},{},{},{seed}",
            self.slot_count, self.vacuum, self.out0, self.out1
        )
    }
}

impl std::ops::Add for DetectionRecord {
    type Output = DetectionRecord;
    fn add(self, o: DetectionRecord) -> DetectionRecord {
        DetectionRecord {
            slot_count: self.slot_count + o.slot_count,
            vacuum: self.vacuum + o.vacuum,
            out0: self.out0 + o.out0,
            out1: self.out1 + o.out1,
        }
    }
}

/// Independent stream for one trial; reproducible under any scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sample `slots` coherence times.
///
/// Slots are independent and identically distributed, so the per-slot draws are replaced by
/// their exact joint law: a binomial detection count split binomially between outcomes.
pub fn simulate_detections(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    measurement: &Measurement,
    slots: u64,
    seed: u64,
    trial: u64,
) -> Result<DetectionRecord> {
    if slots == 0 {
        return Err(Error::Input("slot count must be positive".into()));
    }
    let nbar = mean_photon_number(p, cfg)?;
    if nbar == 0.0 {
        return Ok(DetectionRecord {
            slot_count: slots,
            vacuum: slots,
            out0: 0,
            out1: 0,
        });
    }
    let p0 = measurement.p0(p, cfg)?.clamp(0.0, 1.0);
    let mut rng = trial_rng(seed, trial);
    let binom = |n: u64, prob: f64| {
        Binomial::new(n, prob).map_err(|e| Error::Configuration(format!("binomial({n}, {prob}): {e}")))
    };
    let hits = binom(slots, nbar)?.sample(&mut rng);
    let out0 = binom(hits, p0)?.sample(&mut rng);
    Ok(DetectionRecord {
        slot_count: slots,
        vacuum: slots - hits,
        out0,
        out1: hits - out0,
    })
}

/// Multinomial log-likelihood of one record; `-∞` where the model is undefined.
pub fn log_likelihood(record: &DetectionRecord, p: &ParamPoint, cfg: &OpticalConfig, measurement: &Measurement) -> f64 {
    let eval = || -> Result<f64> {
        let nbar = mean_photon_number(p, cfg)?;
        let p0 = if record.detections() > 0 {
            measurement.p0(p, cfg)?
        } else {
            1.0
        };
        let term = |n: u64, prob: f64| {
            if n == 0 {
                0.0
            } else if prob <= 0.0 {
                f64::NEG_INFINITY
            } else {
                n as f64 * prob.ln()
            }
        };
        Ok(term(record.vacuum, 1.0 - nbar) + term(record.out0, nbar * p0) + term(record.out1, nbar * (1.0 - p0)))
    };
    eval().unwrap_or(f64::NEG_INFINITY)
}

/// A parameter left free in the fit, with its search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleSummary {
    pub estimates: Vec<ParamPoint>,
    pub mean: [f64; 4],
    /// Unbiased sample variance across records; zero for fixed parameters.
    pub sample_variance: [f64; 4],
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximise `f` on `[lo, hi]`: coarse grid, then golden section on the best bracket.
fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let grid: Vec<f64> = (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = (0..grid.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Estimation(
            "likelihood undefined on the whole search interval".into(),
        ));
    }
    let (mn, mx) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if finite.len() == vals.len() && mx - mn <= 1e-12 * mx.abs().max(1.0) {
        return Err(Error::Estimation(
            "flat likelihood: the data carry no information".into(),
        ));
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let tol = 1e-12 * (hi - lo).abs().max(1e-300);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    // Endpoints are candidates too when the maximum sits on the boundary.
    Ok([mid, grid[best]]
        .into_iter()
        .max_by(|&x, &y| f(x).total_cmp(&f(y)))
        .unwrap())
}

/// Fit one record by coordinate-wise golden-section search over the free parameters.
pub fn mle_single(
    record: &DetectionRecord,
    cfg: &OpticalConfig,
    template: &ParamPoint,
    measurement: &Measurement,
    free: &[FreeParam],
) -> Result<ParamPoint> {
    if free.is_empty() {
        return Err(Error::Estimation("no free parameter to estimate".into()));
    }
    let mut theta = *template;
    for fp in free {
        theta = theta.with(fp.param, 0.5 * (fp.lo + fp.hi));
    }
    for _ in 0..50 {
        let before = theta;
        for fp in free {
            let x = maximize_1d(
                |v| log_likelihood(record, &theta.with(fp.param, v), cfg, measurement),
                fp.lo,
                fp.hi,
            )?;
            theta = theta.with(fp.param, x);
        }
        let moved = free
            .iter()
            .map(|fp| (theta.get(fp.param) - before.get(fp.param)).abs())
            .fold(0.0, f64::max);
        if free.len() == 1 || moved < 1e-10 {
            break;
        }
    }
    Ok(theta)
}

/// Fit every record and report the spread of the estimates.
pub fn mle_estimate(
    records: &[DetectionRecord],
    cfg: &OpticalConfig,
    template: &ParamPoint,
    measurement: &Measurement,
    free: &[FreeParam],
) -> Result<MleSummary> {
    if records.is_empty() {
        return Err(Error::Estimation("no records".into()));
    }
    let estimates = records
        .par_iter()
        .map(|r| mle_single(r, cfg, template, measurement, free))
        .collect::<Result<Vec<_>>>()?;
    let n = estimates.len() as f64;
    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for e in &estimates {
        for (m, v) in mean.iter_mut().zip(e.as_array()) {
            *m += v / n;
        }
    }
    if estimates.len() > 1 {
        for e in &estimates {
            for ((s, m), v) in var.iter_mut().zip(mean).zip(e.as_array()) {
                *s += (v - m) * (v - m) / (n - 1.0);
            }
        }
    }
    Ok(MleSummary {
        estimates,
        mean,
        sample_variance: var,
    })
}

/// Score `∂ₛ ln L` of one record at the true parameters.
pub fn score_s(
    record: &DetectionRecord,
    p: &ParamPoint,
    cfg: &OpticalConfig,
    measurement: &Measurement,
) -> Result<f64> {
    let nbar = mean_photon_number(p, cfg)?;
    let dnbar = crate::model::mean_photon_number_gradient(p, cfg)?[0];
    let (p0, dp0) = match measurement {
        Measurement::Counting => (1.0, 0.0),
        Measurement::Spade(povm) => outcome_probability(p, cfg, povm, DerivativeMode::Exact)?,
    };
    let mut score = -(record.vacuum as f64) * dnbar / (1.0 - nbar) + record.detections() as f64 * dnbar / nbar;
    if record.out0 > 0 {
        score += record.out0 as f64 * dp0 / p0;
    }
    if record.out1 > 0 {
        score -= record.out1 as f64 * dp0 / (1.0 - p0);
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::qfi_state_matrix;

    fn cfg() -> OpticalConfig {
        OpticalConfig::standard()
    }

    fn povm(kind: PovmKind) -> BinaryPovm {
        BinaryPovm::new(kind)
    }

    #[test]
    fn modes_coincide_at_half_in_geometric_frame() {
        let p = ParamPoint::new(0.3, 0.5, 0.4, 0.1).unwrap();
        for kind in PovmKind::ALL {
            let a = binary_fisher_s(&p, &cfg(), &povm(kind), DerivativeMode::Exact).unwrap();
            let b = binary_fisher_s(&p, &cfg(), &povm(kind), DerivativeMode::QubitApprox).unwrap();
            assert!((a - b).abs() < 1e-12 * a, "{kind:?}");
        }
    }

    #[test]
    fn exact_projector_derivative_matches_block_formula() {
        let p = ParamPoint::new(0.2, 0.7, 0.3, 0.2).unwrap();
        let c = cfg().with_alpha(0.35);
        let r = bloch_vector(&p, &c).unwrap().r_vec;
        let nu = crate::sld::extended_basis(&p, &c).unwrap().nu;
        let dr = bloch_derivative(&p, &c, Param::S).unwrap();
        let (_, exact) = outcome_probability(&p, &c, &povm(PovmKind::ProjectorE), DerivativeMode::Exact).unwrap();
        let (_, qubit) = outcome_probability(&p, &c, &povm(PovmKind::ProjectorE), DerivativeMode::QubitApprox).unwrap();
        assert!((qubit + 0.5 * dr.z).abs() < 1e-14);
        // Exact minus qubit is 2ν Re ρ₁₂ = ν r_x.
        assert!((exact - qubit - nu * r.x).abs() < 1e-12);
    }

    #[test]
    fn probabilities_match_bloch_state() {
        let p = ParamPoint::new(0.8, 0.3, -0.2, 0.4).unwrap();
        let r = bloch_vector(&p, &cfg()).unwrap().r_vec;
        let [p0, p1] = povm(PovmKind::ProjectorE).probabilities(&p, &cfg()).unwrap();
        assert!((p0 - 0.5 * (1.0 - r.z)).abs() < 1e-14);
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aligned_sorter_attains_qfi() {
        for (q, gr) in [(0.3, 0.0), (0.75, 0.5), (0.5, -0.5), (0.2, 0.8)] {
            let p = ParamPoint::new(1e-3, q, gr, 0.0).unwrap();
            let c = cfg().with_alpha(q);
            let fi = binary_fisher_s(&p, &c, &povm(PovmKind::ProjectorV), DerivativeMode::Exact).unwrap();
            let qfi = qfi_state_matrix(&p, &c).unwrap().diag(Param::S);
            assert!((fi / qfi - 1.0).abs() < 1e-3, "{q} {gr}: {fi} {qfi}");
        }
    }

    #[test]
    fn misalignment_examples() {
        let p = ParamPoint::new(1e-3, 0.5, 0.3, 0.0).unwrap();
        assert!(misalignment_relative_difference(&p, &cfg()).unwrap().abs() < 1e-8);
        let p = ParamPoint::new(1e-3, 0.2, 0.0, 0.0).unwrap();
        let c = cfg().with_alpha(0.2);
        let d = misalignment_relative_difference(&p, &c).unwrap();
        assert!(d > 0.0);
        let v = spade_fisher_s(&p, &c, &povm(PovmKind::ProjectorV), DerivativeMode::Exact, false).unwrap();
        let e = spade_fisher_s(&p, &c, &povm(PovmKind::ProjectorE), DerivativeMode::Exact, false).unwrap();
        assert!((d - (1.0 - e / v)).abs() < 1e-12);
    }

    #[test]
    fn counting_equals_prior() {
        let p = ParamPoint::new(0.7, 0.4, 0.5, 0.1).unwrap();
        assert_eq!(
            counting_fisher(&p, &cfg()).unwrap().entries,
            prior_fisher(&p, &cfg()).unwrap().entries
        );
    }

    #[test]
    fn degenerate_probabilities_are_reported() {
        let p = ParamPoint::new(0.5, 1.0, 0.0, 0.0).unwrap();
        // A single pure source seen through its own mode is never found elsewhere.
        let c = cfg().with_alpha(1.0);
        let err = binary_fisher_s(&p, &c, &povm(PovmKind::ProjectorV), DerivativeMode::Exact);
        assert!(matches!(err, Err(Error::DegenerateProbabilities { .. })));
    }

    #[test]
    fn simulation_is_deterministic_and_consistent() {
        let p = ParamPoint::new(1.0, 0.5, 0.0, 0.0).unwrap();
        let m = Measurement::Spade(povm(PovmKind::ProjectorV));
        let a = simulate_detections(&p, &cfg(), &m, 100_000, 7, 3).unwrap();
        let b = simulate_detections(&p, &cfg(), &m, 100_000, 7, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.is_consistent());
        let other = simulate_detections(&p, &cfg(), &m, 100_000, 7, 4).unwrap();
        assert_ne!(a, other);
        assert!(simulate_detections(&p, &cfg(), &m, 0, 7, 0).is_err());
    }

    #[test]
    fn dark_source_gives_only_vacuum() {
        let p = ParamPoint::new(0.0, 0.5, -1.0, 0.0).unwrap();
        let r = simulate_detections(&p, &cfg(), &Measurement::Counting, 1000, 1, 0).unwrap();
        assert_eq!(r.vacuum, 1000);
    }

    #[test]
    fn all_vacuum_record_has_flat_likelihood() {
        let rec = DetectionRecord {
            slot_count: 1000,
            vacuum: 1000,
            out0: 0,
            out1: 0,
        };
        let t = ParamPoint::new(0.5, 0.5, 0.0, 0.0).unwrap();
        let free = [FreeParam {
            param: Param::S,
            lo: 0.01,
            hi: 3.0,
        }];
        let m = Measurement::Spade(povm(PovmKind::ProjectorV));
        assert!(matches!(
            mle_estimate(&[rec], &cfg(), &t, &m, &free),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn golden_section_finds_interior_and_boundary_maxima() {
        let x = maximize_1d(|x| -(x - 0.37).powi(2), 0.0, 1.0).unwrap();
        assert!((x - 0.37).abs() < 1e-9);
        let x = maximize_1d(|x| x, 0.0, 1.0).unwrap();
        assert!((x - 1.0).abs() < 1e-9);
    }
}

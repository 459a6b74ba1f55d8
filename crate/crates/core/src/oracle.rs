//! Brute-force reference built on a truncated Hermite–Gauss expansion.
//!
//! Nothing here uses the closed forms of the other modules. PSFs are expanded as displaced
//! ground states, ρ⁽¹⁾ is assembled as a dense matrix, derivatives come from finite
//! differences with Richardson extrapolation or from differentiating the expansions, and
//! SLDs are solved in the eigenbasis of ρ.

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use rayon::prelude::*;

use crate::bounds::{BoundKind, BoundMatrix};
use crate::error::{Error, Result};
use crate::model::{OpticalConfig, Param, ParamPoint};
use crate::Complex;

pub const DEFAULT_ORDER: usize = 40;
pub const DEFAULT_STEP: f64 = 1e-5;
const KERNEL_TOL: f64 = 1e-12;
const RICHARDSON_TOL: f64 = 1e-4;

/// Displaced Gaussian amplitude in the HG basis centred at the frame origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    pub center: f64,
    pub order: usize,
    pub coeffs: DVector<f64>,
}

impl ModeExpansion {
    /// `1 - Σ coeff²`, the weight lost to truncation.
    pub fn truncation_error(&self) -> f64 {
        1.0 - self.coeffs.norm_squared()
    }

    pub fn truncation_warning(&self, tol: f64) -> Option<String> {
        let eps = self.truncation_error();
        (eps > tol).then(|| {
            format!(
                "HG truncation at N = {} leaves weight {eps:e} for a centre at {}",
                self.order, self.center
            )
        })
    }
}

/// Coherent-state coefficients `e^{-d²/8}(d/2)ⁿ/√n!` with `d = offset/σ`.
pub fn expand_psf(center_offset: f64, sigma: f64, order: usize) -> Result<ModeExpansion> {
    if order == 0 {
        return Err(Error::Domain("HG truncation order must be at least 1".into()));
    }
    if !(sigma > 0.0) || !center_offset.is_finite() {
        return Err(Error::Domain(format!(
            "invalid PSF centre {center_offset} or width {sigma}"
        )));
    }
    Ok(ModeExpansion {
        center: center_offset,
        order,
        coeffs: coherent_coeffs(center_offset / sigma, order),
    })
}

fn coherent_coeffs(d: f64, order: usize) -> DVector<f64> {
    let amp = d / 2.0;
    let mut out = DVector::zeros(order);
    let mut term = (-d * d / 8.0).exp();
    for n in 0..order {
        out[n] = term;
        term *= amp / ((n + 1) as f64).sqrt();
    }
    out
}

/// Derivative of [`expand_psf`] coefficients with respect to the centre.
pub fn expansion_derivative(center_offset: f64, sigma: f64, order: usize) -> DVector<f64> {
    let d = center_offset / sigma;
    // One extra order so the ladder term of the last coefficient is exact.
    let c = coherent_coeffs(d, order + 1);
    DVector::from_fn(order, |n, _| {
        let ladder = if n > 0 { (n as f64).sqrt() * c[n - 1] } else { 0.0 };
        (0.5 * ladder - 0.25 * d * c[n]) / sigma
    })
}

/// ρ⁽¹⁾ as a dense Hermitian matrix in the truncated HG basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub dim: usize,
    pub matrix: DMatrix<Complex>,
}

struct Sources {
    psi: DVector<f64>,
    phi: DVector<f64>,
    dpsi: DVector<f64>,
    dphi: DVector<f64>,
}

fn sources(s: f64, alpha: f64, sigma: f64, order: usize) -> Sources {
    let (x1, x2) = (-(1.0 - alpha) * s, alpha * s);
    Sources {
        psi: coherent_coeffs(x1 / sigma, order),
        phi: coherent_coeffs(x2 / sigma, order),
        dpsi: expansion_derivative(x1, sigma, order) * -(1.0 - alpha),
        dphi: expansion_derivative(x2, sigma, order) * alpha,
    }
}

fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<Complex> {
    (a * b.transpose()).map(|x| Complex::new(x, 0.0))
}

fn trace_re(m: &DMatrix<Complex>) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Unnormalised `M(θ)` with no domain checks, so difference stencils may step outside.
fn unnormalised(theta: [f64; 4], alpha: f64, sigma: f64, order: usize) -> DMatrix<Complex> {
    let [s, q, gr, gi] = theta;
    let src = sources(s, alpha, sigma, order);
    let g = (q * (1.0 - q)).max(0.0).sqrt();
    let gamma = Complex::new(gr, gi);
    let pf = outer(&src.psi, &src.phi);
    outer(&src.psi, &src.psi) * Complex::new(q, 0.0)
        + outer(&src.phi, &src.phi) * Complex::new(1.0 - q, 0.0)
        + (&pf * gamma + pf.transpose() * gamma.conj()) * Complex::new(g, 0.0)
}

fn normalised(theta: [f64; 4], alpha: f64, sigma: f64, order: usize) -> Result<DMatrix<Complex>> {
    let m = unnormalised(theta, alpha, sigma, order);
    let t = trace_re(&m);
    if !(t > 0.0) {
        return Err(Error::DegenerateState { denominator: t });
    }
    Ok(m / Complex::new(t, 0.0))
}

pub fn dense_state(p: &ParamPoint, cfg: &OpticalConfig, order: usize) -> Result<DenseState> {
    p.validate()?;
    Ok(DenseState {
        dim: order,
        matrix: normalised(p.as_array(), cfg.alpha, cfg.sigma, order)?,
    })
}

/// How the oracle differentiates ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeScheme {
    /// Central differences at h and h/2 combined by Richardson extrapolation.
    FiniteDifference { h: f64 },
    /// Differentiate the HG expansions directly.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub order: usize,
    pub scheme: DerivativeScheme,
    /// Parameters to include; excluded rows and columns of the QFI are left at zero.
    pub params: [bool; 4],
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            order: DEFAULT_ORDER,
            scheme: DerivativeScheme::FiniteDifference { h: DEFAULT_STEP },
            params: [true; 4],
        }
    }
}

impl OracleOptions {
    pub fn analytic() -> Self {
        OracleOptions {
            scheme: DerivativeScheme::Analytic,
            ..Default::default()
        }
    }

    pub fn only(mut self, params: &[Param]) -> Self {
        self.params = [false; 4];
        for p in params {
            self.params[p.index()] = true;
        }
        self
    }
}

fn analytic_derivative(p: &ParamPoint, cfg: &OpticalConfig, param: Param, order: usize) -> Result<DMatrix<Complex>> {
    let src = sources(p.s, cfg.alpha, cfg.sigma, order);
    let (q, gamma) = (p.q, Complex::new(p.gamma_r, p.gamma_i));
    let g = (q * (1.0 - q)).sqrt();
    let pf = outer(&src.psi, &src.phi);
    let coherent = |m: &DMatrix<Complex>| m * gamma + m.transpose() * gamma.conj();
    let dm = match param {
        Param::S => {
            let dpp = outer(&src.dpsi, &src.psi);
            let dff = outer(&src.dphi, &src.phi);
            let cross = outer(&src.dpsi, &src.phi) + outer(&src.psi, &src.dphi);
            (&dpp + dpp.transpose()) * Complex::new(q, 0.0)
                + (&dff + dff.transpose()) * Complex::new(1.0 - q, 0.0)
                + coherent(&cross) * Complex::new(g, 0.0)
        }
        Param::Q => {
            if g == 0.0 {
                return Err(Error::Boundary(format!("∂ρ/∂q undefined at q = {q}")));
            }
            outer(&src.psi, &src.psi) - outer(&src.phi, &src.phi)
                + coherent(&pf) * Complex::new((1.0 - 2.0 * q) / (2.0 * g), 0.0)
        }
        Param::GammaR => (&pf + pf.transpose()) * Complex::new(g, 0.0),
        Param::GammaI => (&pf - pf.transpose()) * Complex::new(0.0, g),
    };
    let m = unnormalised(p.as_array(), cfg.alpha, cfg.sigma, order);
    let t = trace_re(&m);
    if !(t > 0.0) {
        return Err(Error::DegenerateState { denominator: t });
    }
    let dt = trace_re(&dm);
    Ok(dm / Complex::new(t, 0.0) - m * Complex::new(dt / (t * t), 0.0))
}

fn difference_quotient(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    param: Param,
    order: usize,
    h: f64,
) -> Result<DMatrix<Complex>> {
    let j = param.index();
    let mut up = p.as_array();
    let mut dn = p.as_array();
    up[j] += h;
    dn[j] -= h;
    if param == Param::S && dn[j] < 0.0 {
        return Err(Error::Domain(format!("step h = {h} exceeds s = {}", p.s)));
    }
    if param == Param::Q && (dn[j] < 0.0 || up[j] > 1.0) {
        return Err(Error::Domain(format!("step h = {h} leaves q ∈ [0, 1] at q = {}", p.q)));
    }
    let a = normalised(up, cfg.alpha, cfg.sigma, order)?;
    let b = normalised(dn, cfg.alpha, cfg.sigma, order)?;
    Ok((a - b) / Complex::new(2.0 * h, 0.0))
}

/// `∂ρ/∂θ` in the HG basis.
pub fn state_derivative(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    param: Param,
    opts: &OracleOptions,
) -> Result<DMatrix<Complex>> {
    p.validate()?;
    match opts.scheme {
        DerivativeScheme::Analytic => analytic_derivative(p, cfg, param, opts.order),
        DerivativeScheme::FiniteDifference { h } => {
            let step = if param == Param::S { h * cfg.sigma } else { h };
            let coarse = difference_quotient(p, cfg, param, opts.order, step)?;
            let fine = difference_quotient(p, cfg, param, opts.order, step / 2.0)?;
            let extrapolated = (&fine * Complex::new(4.0, 0.0) - &coarse) / Complex::new(3.0, 0.0);
            let scale = extrapolated.norm().max(f64::MIN_POSITIVE);
            let disagreement = (&fine - &coarse).norm() / scale;
            if disagreement > RICHARDSON_TOL {
                return Err(Error::Step { h: step, disagreement });
            }
            Ok(extrapolated)
        }
    }
}

/// SLD solving `∂ρ = (ρΛ + Λρ)/2` in the eigenbasis of ρ, zero on the kernel.
pub fn numeric_sld(rho: &DenseState, drho: &DMatrix<Complex>) -> Result<DMatrix<Complex>> {
    if drho.nrows() != rho.dim || drho.ncols() != rho.dim {
        return Err(Error::Input(format!(
            "derivative is {}×{}, state is {}×{}",
            drho.nrows(),
            drho.ncols(),
            rho.dim,
            rho.dim
        )));
    }
    let defect = (drho - drho.adjoint()).norm();
    if defect > 1e-10 * drho.norm().max(1.0) {
        return Err(Error::Input(format!(
            "state derivative is not Hermitian (defect {defect:e})"
        )));
    }
    // High-order coefficients underflow towards subnormals, which poisons the QR sweeps;
    // entries that small carry no weight at this precision.
    let flushed = rho
        .matrix
        .map(|z| if z.norm() < 1e-60 { Complex::new(0.0, 0.0) } else { z });
    let eig = SymmetricEigen::new(flushed);
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let cutoff = KERNEL_TOL * trace_re(&rho.matrix);
    let d = v.adjoint() * drho * v;
    let inner = DMatrix::from_fn(rho.dim, rho.dim, |j, k| {
        let sum = lam[j] + lam[k];
        if sum > cutoff {
            d[(j, k)] * Complex::new(2.0 / sum, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Ok(v * inner * v.adjoint())
}

/// Frobenius norm of `∂ρ - (ρΛ + Λρ)/2`.
pub fn sld_residual(rho: &DenseState, drho: &DMatrix<Complex>, sld: &DMatrix<Complex>) -> f64 {
    let sym = (&rho.matrix * sld + sld * &rho.matrix) * Complex::new(0.5, 0.0);
    (drho - sym).norm()
}

/// QFI matrix from numerically solved SLDs.
pub fn numeric_qfi(p: &ParamPoint, cfg: &OpticalConfig, opts: &OracleOptions) -> Result<BoundMatrix> {
    let rho = dense_state(p, cfg, opts.order)?;
    let mut slds: Vec<Option<DMatrix<Complex>>> = Vec::with_capacity(4);
    for param in Param::ALL {
        if opts.params[param.index()] {
            let d = state_derivative(p, cfg, param, opts)?;
            slds.push(Some(numeric_sld(&rho, &d)?));
        } else {
            slds.push(None);
        }
    }
    let mut f = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            if let (Some(a), Some(b)) = (&slds[i], &slds[j]) {
                let v = trace_re(&(a * &rho.matrix * b));
                f[(i, j)] = v;
                f[(j, i)] = v;
            }
        }
    }
    Ok(BoundMatrix::new(f, BoundKind::QfiState))
}

/// Inner products between the source modes and their s-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceOverlaps {
    pub psi_phi: f64,
    pub psi_dphi: f64,
    pub phi_dpsi: f64,
    pub dpsi_dpsi: f64,
    pub dphi_dphi: f64,
    pub dpsi_dphi: f64,
}

pub fn source_overlaps(p: &ParamPoint, cfg: &OpticalConfig, order: usize) -> SourceOverlaps {
    let src = sources(p.s, cfg.alpha, cfg.sigma, order);
    SourceOverlaps {
        psi_phi: src.psi.dot(&src.phi),
        psi_dphi: src.psi.dot(&src.dphi),
        phi_dpsi: src.phi.dot(&src.dpsi),
        dpsi_dpsi: src.dpsi.dot(&src.dpsi),
        dphi_dphi: src.dphi.dot(&src.dphi),
        dpsi_dphi: src.dpsi.dot(&src.dphi),
    }
}

/// The geometric basis, its s-derivative and its Gram–Schmidt completion, all in HG space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFrame {
    pub e: [DVector<f64>; 2],
    pub de: [DVector<f64>; 2],
    pub omega1_sq: f64,
    pub omega2_sq: f64,
    pub mu: f64,
    pub nu: f64,
    pub e3: DVector<f64>,
    pub e4: Option<DVector<f64>>,
}

impl ModeFrame {
    /// Columns e₁..e₄; a missing e₄ becomes a zero column.
    pub fn columns(&self) -> DMatrix<Complex> {
        let n = self.e3.len();
        let zero = DVector::zeros(n);
        let cols = [&self.e[0], &self.e[1], &self.e3, self.e4.as_ref().unwrap_or(&zero)];
        DMatrix::from_fn(n, 4, |i, j| Complex::new(cols[j][i], 0.0))
    }

    /// Embed a 4×4 operator given in `{e₁, e₂, e₃, e₄}` into HG space.
    pub fn embed(&self, op: &Matrix4<Complex>) -> DMatrix<Complex> {
        let e = self.columns();
        let op = DMatrix::from_fn(4, 4, |i, j| op[(i, j)]);
        &e * op * e.adjoint()
    }

    /// Compress an HG-space operator onto `{e₁, e₂}`.
    pub fn project2(&self, m: &DMatrix<Complex>) -> nalgebra::Matrix2<Complex> {
        let e = self.columns();
        let full = e.adjoint() * m * e;
        nalgebra::Matrix2::from_fn(|i, j| full[(i, j)])
    }
}

pub fn mode_frame(p: &ParamPoint, cfg: &OpticalConfig, order: usize) -> Result<ModeFrame> {
    let src = sources(p.s, cfg.alpha, cfg.sigma, order);
    let c = src.psi.dot(&src.phi);
    let dc = src.dpsi.dot(&src.phi) + src.psi.dot(&src.dphi);
    let diff = &src.psi - &src.phi;
    let sum = &src.psi + &src.phi;
    // Norms from the vectors themselves, to avoid the 1 - c cancellation at small s.
    let (nd, ns) = (diff.norm(), sum.norm());
    if nd < 1e-7 {
        return Err(Error::DegenerateOverlap { s: p.s, c });
    }
    let e1 = &diff / nd;
    let e2 = &sum / ns;
    // d/ds of (ψ ∓ φ)/‖ψ ∓ φ‖, with ‖ψ ∓ φ‖² = 2(1 ∓ c).
    let de1 = (&src.dpsi - &src.dphi) / nd + &diff * (dc / (nd * nd * nd));
    let de2 = (&src.dpsi + &src.dphi) / ns - &sum * (dc / (ns * ns * ns));

    let omega1_sq = de1.norm_squared();
    let omega2_sq = de2.norm_squared();
    let mu = de1.dot(&de2);
    let nu = de1.dot(&e2);
    let perp1 = &de1 - &e1 * e1.dot(&de1) - &e2 * e2.dot(&de1);
    let a = perp1.norm();
    if a <= 0.0 {
        return Err(Error::NumericDegeneracy {
            what: "‖∂ₛe₁ ⊥ span{e₁, e₂}‖",
            value: a,
            params: format!("{p}"),
        });
    }
    let e3 = &perp1 / a;
    let perp2 = &de2 - &e1 * e1.dot(&de2) - &e2 * e2.dot(&de2) - &e3 * e3.dot(&de2);
    let d = perp2.norm();
    let e4 = (d > 1e-12 * a).then(|| &perp2 / d);
    Ok(ModeFrame {
        e: [e1, e2],
        de: [de1, de2],
        omega1_sq,
        omega2_sq,
        mu,
        nu,
        e3,
        e4,
    })
}

/// Bloch vector of ρ compressed onto `{e₁, e₂}`: `(tr σₓρ, tr σ_yρ, tr σ_zρ)`.
pub fn oracle_bloch_vector(p: &ParamPoint, cfg: &OpticalConfig, order: usize) -> Result<[f64; 3]> {
    let rho = dense_state(p, cfg, order)?;
    let frame = mode_frame(p, cfg, order)?;
    let m = frame.project2(&rho.matrix);
    Ok([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, m[(0, 0)].re - m[(1, 1)].re])
}

/// One comparison between a closed-form entry and its oracle value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub point: ParamPoint,
    pub alpha: f64,
    pub row: Param,
    pub col: Param,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

/// Relative error, measured against the diagonal scale when the reference entry is a structural zero.
pub fn entry_error(closed: f64, oracle: f64, diag_i: f64, diag_j: f64) -> f64 {
    let scale = (diag_i.abs() * diag_j.abs()).sqrt();
    let denom = if oracle.abs() < 1e-8 * scale {
        scale
    } else {
        oracle.abs()
    };
    if denom == 0.0 {
        (closed - oracle).abs()
    } else {
        (closed - oracle).abs() / denom
    }
}

/// The 3×3×3×3 cross-check grid over (s/σ, q, γ_R, γ_I).
pub fn validation_grid(sigma: f64) -> Vec<ParamPoint> {
    let mut out = Vec::new();
    for s in [0.1, 1.0, 2.0] {
        for q in [0.25, 0.5, 0.75] {
            for gr in [-0.5, 0.0, 0.5] {
                for gi in [0.0, 0.2, 0.4] {
                    if let Ok(p) = ParamPoint::new(s * sigma, q, gr, gi) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Compare closed-form and oracle QFI matrices over `points`, in input order.
pub fn cross_check<F>(
    points: &[ParamPoint],
    cfg: &OpticalConfig,
    opts: &OracleOptions,
    closed_form: F,
) -> Result<Vec<ValidationRow>>
where
    F: Fn(&ParamPoint, &OpticalConfig) -> Result<BoundMatrix> + Sync,
{
    let per_point: Vec<Result<Vec<ValidationRow>>> = points
        .par_iter()
        .map(|p| {
            let a = closed_form(p, cfg)?.entries;
            let b = numeric_qfi(p, cfg, opts)?.entries;
            let mut rows = Vec::with_capacity(16);
            for row in Param::ALL {
                for col in Param::ALL {
                    let (i, j) = (row.index(), col.index());
                    rows.push(ValidationRow {
                        point: *p,
                        alpha: cfg.alpha,
                        row,
                        col,
                        closed_form: a[(i, j)],
                        oracle: b[(i, j)],
                        rel_error: entry_error(a[(i, j)], b[(i, j)], b[(i, i)], b[(j, j)]),
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::with_capacity(points.len() * 16);
    for rows in per_point {
        out.extend(rows?);
    }
    Ok(out)
}

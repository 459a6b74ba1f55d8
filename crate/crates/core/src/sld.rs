//! Symmetric logarithmic derivatives.
//!
//! The q, γ_R and γ_I derivatives of ρ⁽¹⁾ stay inside span{ψ, φ}, so their SLDs are
//! 2×2 operators. Moving the sources also moves the modes themselves, and the separation
//! SLD needs two extra orthonormal directions `e₃, e₄` built from `∂ₛe₁, ∂ₛe₂`.

use nalgebra::{Matrix2, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::model::{bloch_derivative, bloch_vector, purity_deficit, Basis, Kernel, OpticalConfig, Param, ParamPoint};
use crate::pauli;
use crate::Complex;

/// States with `1 - r² ≤ PURE_DEFICIT_TOL` are treated as pure.
///
/// The deficit is evaluated in closed form without cancellation, so the cut can sit far
/// below what a threshold on `r` itself would allow.
pub const PURE_DEFICIT_TOL: f64 = 1e-24;
/// Threshold applied by [`sld_purity`], which only sees `r`.
pub const PURITY_TOL: f64 = 1e-8;

/// `lam0·I + lam_vec·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOperator {
    pub lam0: f64,
    pub lam_vec: Vector3<f64>,
    pub basis: Basis,
}

impl BlochOperator {
    pub fn zero(basis: Basis) -> Self {
        BlochOperator {
            lam0: 0.0,
            lam_vec: Vector3::zeros(),
            basis,
        }
    }

    pub fn matrix(&self) -> Matrix2<Complex> {
        pauli::from_bloch(self.lam0, &self.lam_vec)
    }

    pub fn embed4(&self) -> Matrix4<Complex> {
        pauli::embed_upper(&self.matrix())
    }

    /// `tr[Λ_a ρ Λ_b]` real part for `ρ = (I + r·σ)/2`.
    pub fn correlation(&self, other: &BlochOperator, r: &Vector3<f64>) -> f64 {
        self.lam0 * other.lam0
            + self.lam_vec.dot(&other.lam_vec)
            + r.dot(&(self.lam_vec * other.lam0 + other.lam_vec * self.lam0))
    }
}

impl std::ops::Add for BlochOperator {
    type Output = BlochOperator;
    fn add(self, rhs: BlochOperator) -> BlochOperator {
        BlochOperator {
            lam0: self.lam0 + rhs.lam0,
            lam_vec: self.lam_vec + rhs.lam_vec,
            basis: self.basis,
        }
    }
}

/// Solution of `½ v·σ = ½{ρ, Λ}` given `k = (r·v)/(1 - r²)`.
pub(crate) fn qubit_sld(r: &Vector3<f64>, v: &Vector3<f64>, k: f64, basis: Basis) -> BlochOperator {
    BlochOperator {
        lam0: -k,
        lam_vec: v + r * k,
        basis,
    }
}

/// Same as [`qubit_sld`] with `k` formed from a dot product. Loses accuracy near purity one.
pub fn sld_from_bloch(r: &Vector3<f64>, v: &Vector3<f64>, basis: Basis) -> Result<BlochOperator> {
    let deficit = 1.0 - r.norm_squared();
    if deficit <= PURE_DEFICIT_TOL {
        return Err(Error::SingularState { purity: r.norm() });
    }
    Ok(qubit_sld(r, v, r.dot(v) / deficit, basis))
}

/// Cancellation-free `1 - r²` and `(r·∂ᵢr)/(1 - r²) = -½∂ᵢ ln(1 - r²)` for every parameter.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeficitData {
    pub r: Vector3<f64>,
    pub deficit: f64,
    pub k: [f64; 4],
}

pub(crate) fn deficit_data(p: &ParamPoint, cfg: &OpticalConfig) -> Result<DeficitData> {
    let r = bloch_vector(p, cfg)?.r_vec;
    let deficit = purity_deficit(p, cfg)?;
    let kern = Kernel::new(p, cfg.sigma)?;
    if deficit <= PURE_DEFICIT_TOL || p.is_fully_coherent() || kern.g == 0.0 {
        return Err(Error::SingularState {
            purity: (1.0 - deficit).max(0.0).sqrt(),
        });
    }
    let (c, g, n) = (kern.c, kern.g, kern.norm);
    let coh = 1.0 - p.gamma_abs_sq();
    let sigma2 = cfg.sigma * cfg.sigma;
    let sin_ratio = p.s * c * c / (4.0 * sigma2 * kern.sin * kern.sin);
    let dln = [
        2.0 * sin_ratio - 2.0 * (2.0 * kern.dc * p.gamma_r * g) / n,
        (1.0 - 2.0 * p.q) / (g * g) - 2.0 * (c * p.gamma_r * (1.0 - 2.0 * p.q) / g) / n,
        -2.0 * p.gamma_r / coh - 4.0 * c * g / n,
        -2.0 * p.gamma_i / coh,
    ];
    Ok(DeficitData {
        r,
        deficit,
        k: dln.map(|d| -0.5 * d),
    })
}

/// SLD for q, γ_R or γ_I in the geometric basis.
pub fn sld_scalar(p: &ParamPoint, cfg: &OpticalConfig, which: Param) -> Result<BlochOperator> {
    if which == Param::S {
        return Err(Error::Domain(
            "the separation SLD is four-dimensional; use sld_separation".into(),
        ));
    }
    if which == Param::Q && (p.q <= 0.0 || p.q >= 1.0) {
        return Err(Error::Boundary(format!("SLD for q undefined at q = {}", p.q)));
    }
    let dd = deficit_data(p, cfg)?;
    let v = bloch_derivative(p, cfg, which)?;
    Ok(qubit_sld(&dd.r, &v, dd.k[which.index()], Basis::GeometricE))
}

/// Overlap constants of the moving modes and the Gram–Schmidt completion `e₃, e₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedBasisData {
    pub beta: f64,
    pub zeta: f64,
    /// `‖∂ₛe₁‖²`
    pub omega1_sq: f64,
    /// `‖∂ₛe₂‖²`
    pub omega2_sq: f64,
    /// `⟨∂ₛe₁|∂ₛe₂⟩`
    pub mu: f64,
    /// `⟨∂ₛe₁|e₂⟩`
    pub nu: f64,
    /// Coefficients of `e₃` over `(∂ₛe₁, ∂ₛe₂, e₁, e₂)`.
    pub e3_coeffs: [f64; 4],
    /// Coefficients of `e₄`; `None` when `∂ₛe₂` adds no new direction.
    pub e4_coeffs: Option<[f64; 4]>,
}

impl ExtendedBasisData {
    /// Lower-triangular factor `M` with `∂ρ` off-diagonal block `ρM`.
    pub fn leak_factor(&self) -> Result<Matrix2<f64>> {
        let a_sq = self.omega1_sq - self.nu * self.nu;
        if !(a_sq > 0.0) {
            return Err(self.degeneracy("ω₁² - ν²", a_sq));
        }
        let a = a_sq.sqrt();
        let b = self.mu / a;
        let d_sq = self.omega2_sq - self.nu * self.nu - b * b;
        // Tiny negative values are rounding noise on an exact zero.
        if d_sq < -1e-10 * self.omega2_sq.abs().max(1e-300) {
            return Err(self.degeneracy("ω₂² - ν² - μ²/(ω₁² - ν²)", d_sq));
        }
        Ok(Matrix2::new(a, 0.0, b, d_sq.max(0.0).sqrt()))
    }

    fn degeneracy(&self, what: &'static str, value: f64) -> Error {
        Error::NumericDegeneracy {
            what,
            value,
            params: format!(
                "β={}, ω₁²={}, ω₂²={}, μ={}, ν={}",
                self.beta, self.omega1_sq, self.omega2_sq, self.mu, self.nu
            ),
        }
    }
}

/// `1 - e^{-x} - x e^{-2x}` without cancellation for small x.
fn leak_numerator(x: f64) -> f64 {
    if x > 0.5 {
        return -(-x).exp_m1() - x * (-2.0 * x).exp();
    }
    let mut sum = 0.0;
    let mut pow = x;
    let mut fact = 1.0;
    for m in 2..=40 {
        let prev_fact = fact;
        pow *= x;
        fact *= m as f64;
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        let term = sign / fact - (-2.0f64).powi(m - 1) / prev_fact;
        sum += pow * term;
    }
    sum
}

pub fn extended_basis(p: &ParamPoint, cfg: &OpticalConfig) -> Result<ExtendedBasisData> {
    p.validate()?;
    let sigma = cfg.sigma;
    let t = p.s / sigma;
    let alpha = cfg.alpha;
    let x = t * t / 8.0;
    let c = (-x).exp();
    let omc = -(-x).exp_m1();
    if !(c > 0.0) || c >= 1.0 - crate::model::OVERLAP_TOL {
        return Err(Error::DegenerateOverlap { s: p.s, c });
    }
    let sin_sq = -(-2.0 * x).exp_m1();
    let sin = sin_sq.sqrt();
    let w = alpha * (1.0 - alpha);
    let tilt = 1.0 - 2.0 * alpha;

    let beta = -t * c / 8.0;
    let zeta = (t * t - 4.0) * c / 64.0;
    let omega1_sq = (leak_numerator(x) / (8.0 * omc) - w * omc / 4.0 - w * t * t * c / 16.0) / omc;
    let omega2_sq =
        (tilt * tilt / 8.0 + w * omc / 4.0 + w * t * t * c / 16.0 - t * t * c * c / (64.0 * (1.0 + c))) / (1.0 + c);
    let mu = tilt / sin * (0.125 - 2.0 * beta * beta / sin_sq);
    let nu = beta * tilt / sin;

    let s2 = sigma * sigma;
    let mut data = ExtendedBasisData {
        beta: beta / sigma,
        zeta: zeta / s2,
        omega1_sq: omega1_sq / s2,
        omega2_sq: omega2_sq / s2,
        mu: mu / s2,
        nu: nu / sigma,
        e3_coeffs: [0.0; 4],
        e4_coeffs: None,
    };
    let m = data.leak_factor()?;
    let (a, b, d) = (m[(0, 0)], m[(1, 0)], m[(1, 1)]);
    let nu = data.nu;
    data.e3_coeffs = [1.0 / a, 0.0, 0.0, -nu / a];
    if d > 1e-12 * a {
        data.e4_coeffs = Some([-b / (a * d), 1.0 / d, nu / d, b * nu / (a * d)]);
    }
    Ok(data)
}

/// Four-dimensional separation SLD in `{e₁, e₂, e₃, e₄}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedOperator {
    /// Part of the upper block driven by `∂ₛr` alone.
    pub block_11_qubit: BlochOperator,
    /// Part driven by the rotation of `e₁, e₂` into each other; its identity part is zero.
    pub block_11_extra: BlochOperator,
    /// Coupling to the leaked directions. Real and lower triangular.
    pub block_12: Matrix2<f64>,
    pub block_22: Matrix2<f64>,
    pub basis_data: ExtendedBasisData,
}

impl ExtendedOperator {
    pub fn block_11(&self) -> BlochOperator {
        self.block_11_qubit + self.block_11_extra
    }

    pub fn matrix(&self) -> Matrix4<Complex> {
        pauli::embed4(
            &self.block_11().matrix(),
            &pauli::real2(&self.block_12),
            &pauli::real2(&self.block_22),
        )
    }
}

/// Bloch vector of the in-span rotation term of `∂ₛρ`, so that this term equals `d·σ`.
pub(crate) fn rotation_term(r: &Vector3<f64>, nu: f64) -> Vector3<f64> {
    Vector3::new(nu * r.z, 0.0, -nu * r.x)
}

pub fn sld_separation(p: &ParamPoint, cfg: &OpticalConfig) -> Result<ExtendedOperator> {
    let data = extended_basis(p, cfg)?;
    sld_separation_with(p, cfg, &data)
}

/// Separation SLD from caller-supplied basis constants.
pub fn sld_separation_with(p: &ParamPoint, cfg: &OpticalConfig, data: &ExtendedBasisData) -> Result<ExtendedOperator> {
    let dd = deficit_data(p, cfg)?;
    let dr = bloch_derivative(p, cfg, Param::S)?;
    let ex = rotation_term(&dd.r, data.nu);
    // The rotation term is orthogonal to r, so it leaves the identity part alone.
    let qubit = qubit_sld(&dd.r, &dr, dd.k[Param::S.index()], Basis::GeometricE);
    let extra = BlochOperator {
        lam0: 0.0,
        lam_vec: ex * 2.0,
        basis: Basis::GeometricE,
    };
    Ok(ExtendedOperator {
        block_11_qubit: qubit,
        block_11_extra: extra,
        block_12: data.leak_factor()? * 2.0,
        block_22: Matrix2::zeros(),
        basis_data: *data,
    })
}

/// `∂ₛρ` in `{e₁, e₂, e₃, e₄}`.
pub fn separation_derivative_extended(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    data: &ExtendedBasisData,
) -> Result<Matrix4<Complex>> {
    let state = bloch_vector(p, cfg)?;
    let r = state.r_vec;
    let dr = bloch_derivative(p, cfg, Param::S)?;
    let upper = pauli::from_bloch(0.0, &(dr * 0.5 + rotation_term(&r, data.nu)));
    let rho = state.density_matrix();
    let leak = rho * pauli::real2(&data.leak_factor()?);
    Ok(pauli::embed4(&upper, &leak, &Matrix2::zeros()))
}

/// SLD of the purity along a fixed Bloch direction.
pub fn sld_purity(r: f64, r_dir: &Vector3<f64>) -> Result<BlochOperator> {
    if r >= 1.0 - PURITY_TOL {
        return Err(Error::SingularState { purity: r });
    }
    if r <= 1e-12 {
        return Err(Error::UndefinedDirection { purity: r });
    }
    let n = r_dir.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("direction has norm {n}, expected 1")));
    }
    let inv = 1.0 / (1.0 - r * r);
    Ok(BlochOperator {
        lam0: -r * inv,
        lam_vec: r_dir * inv,
        basis: Basis::GeometricE,
    })
}

/// The four SLDs embedded in the common 4×4 frame, ordered (s, q, γ_R, γ_I).
pub fn all_slds(p: &ParamPoint, cfg: &OpticalConfig) -> Result<[Matrix4<Complex>; 4]> {
    Ok([
        sld_separation(p, cfg)?.matrix(),
        sld_scalar(p, cfg, Param::Q)?.embed4(),
        sld_scalar(p, cfg, Param::GammaR)?.embed4(),
        sld_scalar(p, cfg, Param::GammaI)?.embed4(),
    ])
}

/// Frobenius norms of `[Λᵢ, Λⱼ]` and moduli of `tr(ρ[Λᵢ, Λⱼ])`, indexed by [`Param::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    pub norms: [[f64; 4]; 4],
    pub weak: [[f64; 4]; 4],
}

pub fn commutator_report(p: &ParamPoint, cfg: &OpticalConfig) -> Result<CommutatorReport> {
    let ops = all_slds(p, cfg)?;
    let rho = pauli::embed_upper(&bloch_vector(p, cfg)?.density_matrix());
    let mut norms = [[0.0; 4]; 4];
    let mut weak = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let c = pauli::commutator(&ops[i], &ops[j]);
            norms[i][j] = c.norm();
            weak[i][j] = (rho * c).trace().norm();
        }
    }
    Ok(CommutatorReport { norms, weak })
}

//! Parameter and configuration types plus the closed-form single-boson state kernel.
//!
//! The conditional one-boson state of two Gaussian point sources with separation `s`,
//! relative intensity `q` and complex coherence `γ = γ_R + iγ_I` lives in the
//! two-dimensional span of the source modes `|ψ⟩, |φ⟩`. Everything here is expressed
//! in the geometric basis `{e₁, e₂}` unless stated otherwise.

use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};

/// `c ≥ 1 - OVERLAP_TOL` is treated as coincident PSFs.
pub const OVERLAP_TOL: f64 = 1e-14;
/// Smallest admissible normalisation `1 + 2cγ_R√(q(1-q))`.
pub const DENOMINATOR_TOL: f64 = 1e-12;
const GAMMA_SLACK: f64 = 1e-12;

/// The four estimated parameters, in the fixed order `(s, q, γ_R, γ_I)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    S,
    Q,
    GammaR,
    GammaI,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::S, Param::Q, Param::GammaR, Param::GammaI];

    pub fn index(self) -> usize {
        match self {
            Param::S => 0,
            Param::Q => 1,
            Param::GammaR => 2,
            Param::GammaI => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::S => "s",
            Param::Q => "q",
            Param::GammaR => "gamma_r",
            Param::GammaI => "gamma_i",
        }
    }

    pub fn parse(name: &str) -> Option<Param> {
        match name.trim() {
            "s" => Some(Param::S),
            "q" => Some(Param::Q),
            "gamma_r" | "gr" => Some(Param::GammaR),
            "gamma_i" | "gi" => Some(Param::GammaI),
            _ => None,
        }
    }
}

/// Estimation target θ = (s, q, γ_R, γ_I).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub s: f64,
    pub q: f64,
    pub gamma_r: f64,
    pub gamma_i: f64,
}

impl ParamPoint {
    pub fn new(s: f64, q: f64, gamma_r: f64, gamma_i: f64) -> Result<Self> {
        let p = ParamPoint { s, q, gamma_r, gamma_i };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.s, self.q, self.gamma_r, self.gamma_i];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameter in {self}")));
        }
        if self.s < 0.0 {
            return Err(Error::Domain(format!("separation s = {} < 0", self.s)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Domain(format!(
                "relative intensity q = {} outside [0, 1]",
                self.q
            )));
        }
        if self.gamma_abs_sq() > 1.0 + GAMMA_SLACK {
            return Err(Error::Domain(format!("|γ|² = {} exceeds 1", self.gamma_abs_sq())));
        }
        Ok(())
    }

    pub fn gamma_abs_sq(&self) -> f64 {
        self.gamma_r * self.gamma_r + self.gamma_i * self.gamma_i
    }

    /// |γ| = 1: admitted, but every SLD built on it is singular.
    pub fn is_fully_coherent(&self) -> bool {
        (1.0 - self.gamma_abs_sq()).abs() <= 1e-10
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::S => self.s,
            Param::Q => self.q,
            Param::GammaR => self.gamma_r,
            Param::GammaI => self.gamma_i,
        }
    }

    /// Copy with one coordinate replaced. No validation.
    pub fn with(&self, param: Param, value: f64) -> ParamPoint {
        let mut out = *self;
        match param {
            Param::S => out.s = value,
            Param::Q => out.q = value,
            Param::GammaR => out.gamma_r = value,
            Param::GammaI => out.gamma_i = value,
        }
        out
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s, self.q, self.gamma_r, self.gamma_i]
    }
}

impl std::fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(s={}, q={}, γ_R={}, γ_I={})",
            self.s, self.q, self.gamma_r, self.gamma_i
        )
    }
}

/// Choice of image-plane origin `x₀ = αx₁ + (1-α)x₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// α = 1/2, the geometric centre of the two PSFs.
    Geometric,
    /// α = q, the intensity centroid.
    Centroid,
    Custom(f64),
}

impl Frame {
    pub fn alpha(self, p: &ParamPoint) -> f64 {
        match self {
            Frame::Geometric => 0.5,
            Frame::Centroid => p.q,
            Frame::Custom(a) => a,
        }
    }

    pub fn parse(text: &str) -> Option<Frame> {
        match text.trim() {
            "geometric" => Some(Frame::Geometric),
            "centroid" => Some(Frame::Centroid),
            other => other.parse::<f64>().ok().map(Frame::Custom),
        }
    }
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frame::Geometric => write!(f, "geometric"),
            Frame::Centroid => write!(f, "centroid"),
            Frame::Custom(a) => write!(f, "{a}"),
        }
    }
}

/// PSF width, low-intensity scale and reference-frame weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConfig {
    pub sigma: f64,
    pub delta: f64,
    pub alpha: f64,
}

impl OpticalConfig {
    pub fn new(sigma: f64, delta: f64, alpha: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("PSF width σ = {sigma} must be positive")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Configuration(format!(
                "intensity scale δ = {delta} outside (0, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Configuration(format!("frame weight α = {alpha} outside [0, 1]")));
        }
        Ok(OpticalConfig { sigma, delta, alpha })
    }

    /// Figure defaults: σ = 1, δ = 10⁻², geometric frame.
    pub fn standard() -> Self {
        OpticalConfig {
            sigma: 1.0,
            delta: 1e-2,
            alpha: 0.5,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        OpticalConfig { alpha, ..*self }
    }

    pub fn with_frame(&self, frame: Frame, p: &ParamPoint) -> Self {
        self.with_alpha(frame.alpha(p))
    }

    /// Source positions `(x₁, x₂) = (-(1-α)s, αs)` relative to the frame origin.
    pub fn source_positions(&self, s: f64) -> (f64, f64) {
        (-(1.0 - self.alpha) * s, self.alpha * s)
    }
}

/// Orthonormal bases of span{ψ, φ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{e₁, e₂}`: the difference and sum modes.
    GeometricE,
    /// `{v₁, v₂}`: v₁ is the intensity-weighted mode.
    CentroidV,
}

/// Overlap `c = exp(-s²/8σ²)` of the two PSFs.
pub fn overlap_c(s: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("PSF width σ = {sigma} must be positive")));
    }
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("separation s = {s} < 0")));
    }
    Ok((-s * s / (8.0 * sigma * sigma)).exp())
}

/// Scalars shared by every closed form, with derivatives taken at fixed frame weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub c: f64,
    /// 1 - c
    pub omc: f64,
    /// √(1 - c²)
    pub sin: f64,
    /// √(q(1-q))
    pub g: f64,
    /// 1 + 2cγ_R g
    pub norm: f64,
    /// dc/ds
    pub dc: f64,
    /// d√(1-c²)/ds
    pub dsin: f64,
}

impl Kernel {
    pub fn new(p: &ParamPoint, sigma: f64) -> Result<Kernel> {
        p.validate()?;
        let c = overlap_c(p.s, sigma)?;
        let x = p.s * p.s / (8.0 * sigma * sigma);
        let omc = -(-x).exp_m1();
        let sin = (-(-2.0 * x).exp_m1()).sqrt();
        let g = (p.q * (1.0 - p.q)).max(0.0).sqrt();
        let norm = 1.0 + 2.0 * c * p.gamma_r * g;
        let dc = -p.s * c / (4.0 * sigma * sigma);
        // d√(1-c²)/ds = s c² / (4σ² √(1-c²)), with s/√(1-c²) → 2σ as s → 0.
        let s_over_sin = if sin > 0.0 { p.s / sin } else { 2.0 * sigma };
        let dsin = s_over_sin * c * c / (4.0 * sigma * sigma);
        Ok(Kernel {
            c,
            omc,
            sin,
            g,
            norm,
            dc,
            dsin,
        })
    }

    pub fn checked_norm(&self) -> Result<f64> {
        if self.norm <= DENOMINATOR_TOL {
            Err(Error::DegenerateState { denominator: self.norm })
        } else {
            Ok(self.norm)
        }
    }
}

/// Mean boson number per coherence time, `n̄ = δ(1 + 2cγ_R√(q(1-q)))`.
pub fn mean_photon_number(p: &ParamPoint, cfg: &OpticalConfig) -> Result<f64> {
    let k = Kernel::new(p, cfg.sigma)?;
    let nbar = cfg.delta * k.norm;
    if !(0.0..=1.0).contains(&nbar) {
        return Err(Error::Configuration(format!(
            "n̄ = {nbar} outside [0, 1]; δ = {} is too large",
            cfg.delta
        )));
    }
    Ok(nbar.max(0.0))
}

/// Gradient of n̄ with respect to (s, q, γ_R, γ_I).
pub fn mean_photon_number_gradient(p: &ParamPoint, cfg: &OpticalConfig) -> Result<[f64; 4]> {
    let k = Kernel::new(p, cfg.sigma)?;
    let d = cfg.delta;
    let dq = if p.gamma_r == 0.0 {
        0.0
    } else {
        if k.g == 0.0 {
            return Err(Error::Boundary(format!(
                "∂n̄/∂q diverges at q = {} with γ_R = {}",
                p.q, p.gamma_r
            )));
        }
        2.0 * d * k.c * p.gamma_r * (1.0 - 2.0 * p.q) / (2.0 * k.g)
    };
    Ok([2.0 * d * k.dc * p.gamma_r * k.g, dq, 2.0 * d * k.c * k.g, 0.0])
}

/// Bloch vector of ρ⁽¹⁾ with its cached overlap and n̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub r_vec: Vector3<f64>,
    pub basis: Basis,
    pub c: f64,
    pub nbar: f64,
}

impl BlochState {
    /// ρ⁽¹⁾ = (1 + r·σ)/2 in the state's own basis.
    pub fn density_matrix(&self) -> Matrix2<crate::Complex> {
        crate::pauli::from_bloch(0.5, &(self.r_vec * 0.5))
    }
}

/// Bloch vector in the geometric basis `{e₁, e₂}`.
pub fn bloch_vector(p: &ParamPoint, cfg: &OpticalConfig) -> Result<BlochState> {
    let k = Kernel::new(p, cfg.sigma)?;
    let norm = k.checked_norm()?;
    let r = bloch_components(p, &k) / -norm;
    Ok(BlochState {
        r_vec: r,
        basis: Basis::GeometricE,
        c: k.c,
        nbar: cfg.delta * norm,
    })
}

fn bloch_components(p: &ParamPoint, k: &Kernel) -> Vector3<f64> {
    Vector3::new(
        (1.0 - 2.0 * p.q) * k.sin,
        2.0 * p.gamma_i * k.g * k.sin,
        k.c + 2.0 * p.gamma_r * k.g,
    )
}

/// ∂r/∂θ in the geometric basis, treating the basis vectors as fixed (the qubit derivative).
pub fn bloch_derivative(p: &ParamPoint, cfg: &OpticalConfig, param: Param) -> Result<Vector3<f64>> {
    let k = Kernel::new(p, cfg.sigma)?;
    let norm = k.checked_norm()?;
    let v = bloch_components(p, &k);
    let (dv, dnorm) = match param {
        Param::S => (
            Vector3::new((1.0 - 2.0 * p.q) * k.dsin, 2.0 * p.gamma_i * k.g * k.dsin, k.dc),
            2.0 * k.dc * p.gamma_r * k.g,
        ),
        Param::Q => {
            if k.g == 0.0 {
                return Err(Error::Boundary(format!("∂r/∂q undefined at q = {}", p.q)));
            }
            let dg = (1.0 - 2.0 * p.q) / (2.0 * k.g);
            (
                Vector3::new(-2.0 * k.sin, 2.0 * p.gamma_i * dg * k.sin, 2.0 * p.gamma_r * dg),
                2.0 * k.c * p.gamma_r * dg,
            )
        }
        Param::GammaR => (Vector3::new(0.0, 0.0, 2.0 * k.g), 2.0 * k.c * k.g),
        Param::GammaI => (Vector3::new(0.0, 2.0 * k.g * k.sin, 0.0), 0.0),
    };
    Ok(-(dv * norm - v * dnorm) / (norm * norm))
}

/// Purity of ρ⁽¹⁾ and its two reference values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purity {
    /// r = |r|
    pub r: f64,
    /// 1 - r², evaluated without cancellation.
    pub deficit: f64,
    /// Purity of the incoherent mixture with the same (s, q).
    pub r_inc: f64,
    /// lim_{s→∞} r.
    pub r_inf: f64,
}

/// `1 - r² = 4q(1-q)(1-c²)(1-|γ|²) / (1 + 2cγ_R√(q(1-q)))²`.
pub fn purity_deficit(p: &ParamPoint, cfg: &OpticalConfig) -> Result<f64> {
    let k = Kernel::new(p, cfg.sigma)?;
    let norm = k.checked_norm()?;
    let coh = (1.0 - p.gamma_abs_sq()).max(0.0);
    Ok(4.0 * k.g * k.g * k.sin * k.sin * coh / (norm * norm))
}

pub fn purity(p: &ParamPoint, cfg: &OpticalConfig) -> Result<Purity> {
    let k = Kernel::new(p, cfg.sigma)?;
    let deficit = purity_deficit(p, cfg)?;
    let g2 = k.g * k.g;
    let r_inc = (1.0 - 4.0 * g2 * k.sin * k.sin).max(0.0).sqrt();
    let r_inf = (1.0 + 4.0 * g2 * (p.gamma_abs_sq() - 1.0)).max(0.0).sqrt();
    Ok(Purity {
        r: (1.0 - deficit).max(0.0).sqrt(),
        deficit,
        r_inc,
        r_inf,
    })
}

/// Location `s₀ = σ√(-8 ln c₀)`, `c₀ = -2γ_R√(q(1-q))`, of the purity minimum for γ_R < 0.
pub fn purity_minimum_location(p: &ParamPoint, sigma: f64) -> Option<f64> {
    let c0 = -2.0 * p.gamma_r * (p.q * (1.0 - p.q)).sqrt();
    if p.gamma_r < 0.0 && c0 > 0.0 && c0 <= 1.0 {
        Some(sigma * (-8.0 * c0.ln()).sqrt())
    } else {
        None
    }
}

/// Basis vectors as rows of coefficients over `(|ψ⟩, |φ⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisCoefficients {
    pub basis: Basis,
    pub rows: [[f64; 2]; 2],
    pub c: f64,
}

impl BasisCoefficients {
    /// Inner product under the Gram matrix `[[1, c], [c, 1]]`.
    pub fn inner(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.rows[i], self.rows[j]);
        a[0] * b[0] + a[1] * b[1] + self.c * (a[0] * b[1] + a[1] * b[0])
    }
}

pub fn basis_coefficients(p: &ParamPoint, cfg: &OpticalConfig, which: Basis) -> Result<BasisCoefficients> {
    let k = Kernel::new(p, cfg.sigma)?;
    if k.c >= 1.0 - OVERLAP_TOL {
        return Err(Error::DegenerateOverlap { s: p.s, c: k.c });
    }
    let rows = match which {
        Basis::GeometricE => {
            let a = 1.0 / (2.0 * k.omc).sqrt();
            let b = 1.0 / (2.0 * (1.0 + k.c)).sqrt();
            [[a, -a], [b, b]]
        }
        Basis::CentroidV => {
            let q = p.q;
            let n2 = 1.0 - 2.0 * q * (1.0 - q) * k.omc;
            let n = n2.sqrt();
            let d = (k.sin * k.sin * n2).sqrt();
            [[q / n, (1.0 - q) / n], [(1.0 - q * k.omc) / d, -(k.c + q * k.omc) / d]]
        }
    };
    Ok(BasisCoefficients {
        basis: which,
        rows,
        c: k.c,
    })
}

/// Real orthogonal map from `{e₁, e₂}` to `{v₁, v₂}` coordinates and its s-derivative.
///
/// Rows of `u` are v₁, v₂ expressed in the e-basis; `ρᵛ = U ρᵉ Uᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroidRotation {
    pub u: Matrix2<f64>,
    pub du_ds: Matrix2<f64>,
}

pub fn centroid_rotation(p: &ParamPoint, cfg: &OpticalConfig) -> Result<CentroidRotation> {
    let k = Kernel::new(p, cfg.sigma)?;
    if k.c >= 1.0 - OVERLAP_TOL {
        return Err(Error::DegenerateOverlap { s: p.s, c: k.c });
    }
    let tilt = 2.0 * p.q - 1.0;
    let w = (k.omc / (1.0 + k.c)).sqrt();
    let angle = (tilt * w).atan();
    let dw = -k.dc / ((1.0 + k.c) * (1.0 + k.c) * w);
    let dangle = tilt * dw / (1.0 + tilt * tilt * w * w);
    let (sn, cs) = angle.sin_cos();
    Ok(CentroidRotation {
        u: Matrix2::new(sn, cs, cs, -sn),
        du_ds: Matrix2::new(cs, -sn, -sn, -cs) * dangle,
    })
}

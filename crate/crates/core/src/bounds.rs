//! Information matrices over θ = (s, q, γ_R, γ_I): QFI, prior, van Trees, qubit and purity routes.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::model::{
    bloch_derivative, centroid_rotation, mean_photon_number, mean_photon_number_gradient, purity,
    purity_minimum_location, Basis, OpticalConfig, Param, ParamPoint,
};
use crate::pauli;
use crate::sld::{self, deficit_data, extended_basis, rotation_term, DeficitData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    QfiState,
    PriorFi,
    VanTreesInfo,
    QubitApprox,
    Indirect,
}

/// Symmetric 4×4 information matrix. Entry (j, k) carries units `1/(unit_j·unit_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMatrix {
    pub entries: Matrix4<f64>,
    pub kind: BoundKind,
}

impl BoundMatrix {
    pub fn new(entries: Matrix4<f64>, kind: BoundKind) -> Self {
        BoundMatrix { entries, kind }
    }

    pub fn get(&self, a: Param, b: Param) -> f64 {
        self.entries[(a.index(), b.index())]
    }

    pub fn diag(&self, a: Param) -> f64 {
        self.get(a, a)
    }

    pub fn scaled(&self, factor: f64, kind: BoundKind) -> Self {
        BoundMatrix::new(self.entries * factor, kind)
    }

    pub fn symmetry_defect(&self) -> f64 {
        (self.entries - self.entries.transpose()).abs().max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.entries + self.entries.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Moore–Penrose inverse dropping eigenvalues below `rel_tol·λ_max`.
    ///
    /// The prior is rank one and the quantum part loses rank as s → 0, so the plain
    /// inverse of an information matrix is often meaningless.
    pub fn pseudo_inverse(&self, rel_tol: f64) -> Matrix4<f64> {
        let sym = (self.entries + self.entries.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let cutoff = rel_tol * eig.eigenvalues.amax();
        let mut out = Matrix4::zeros();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > cutoff {
                let v = eig.eigenvectors.column(i);
                out += v * v.transpose() / lam;
            }
        }
        out
    }

    /// Lower bound on the Bayesian mean-squared error of each parameter.
    pub fn bmse_bound(&self) -> Matrix4<f64> {
        self.pseudo_inverse(1e-13)
    }
}

/// Convert an information value to figure units `δ/(4σ²)`.
pub fn in_figure_units(value: f64, cfg: &OpticalConfig) -> f64 {
    value * 4.0 * cfg.sigma * cfg.sigma / cfg.delta
}

/// Bloch "velocities" `vᵢ` with `∂ᵢρ = ½vᵢ·σ` inside span{e₁, e₂}, plus the leak term of ∂ₛρ.
struct Velocities {
    dd: DeficitData,
    v: [Vector3<f64>; 4],
    /// `4 tr(ρMMᵀ)`
    leak: f64,
}

fn velocities(p: &ParamPoint, cfg: &OpticalConfig) -> Result<Velocities> {
    let dd = deficit_data(p, cfg)?;
    let data = extended_basis(p, cfg)?;
    let mut v = [Vector3::zeros(); 4];
    for param in Param::ALL {
        v[param.index()] = bloch_derivative(p, cfg, param)?;
    }
    v[0] += rotation_term(&dd.r, data.nu) * 2.0;
    let r = dd.r;
    let (w1, w2, mu, nu) = (data.omega1_sq, data.omega2_sq, data.mu, data.nu);
    // ρ₁₁, ρ₂₂ and Re ρ₁₂ for ρ = (I + r·σ)/2.
    let leak = 4.0 * (0.5 * (1.0 + r.z) * (w1 - nu * nu) + r.x * mu + 0.5 * (1.0 - r.z) * (w2 - nu * nu));
    Ok(Velocities { dd, v, leak })
}

fn gram(v: &[Vector3<f64>; 4], k: &[f64; 4], deficit: f64) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| v[i].dot(&v[j]) + deficit * k[i] * k[j])
}

/// QFI matrix of ρ⁽¹⁾ per detected boson.
pub fn qfi_state_matrix(p: &ParamPoint, cfg: &OpticalConfig) -> Result<BoundMatrix> {
    let vel = velocities(p, cfg)?;
    let mut f = gram(&vel.v, &vel.dd.k, vel.dd.deficit);
    f[(0, 0)] += vel.leak;
    Ok(BoundMatrix::new(f, BoundKind::QfiState))
}

/// `Re tr[ΛᵢρΛⱼ]` assembled from the explicit 4×4 operators.
pub fn qfi_from_operators(p: &ParamPoint, cfg: &OpticalConfig) -> Result<Matrix4<f64>> {
    let slds = sld::all_slds(p, cfg)?;
    let rho = pauli::embed_upper(&crate::model::bloch_vector(p, cfg)?.density_matrix());
    Ok(Matrix4::from_fn(|i, j| (slds[i] * rho * slds[j]).trace().re))
}

/// Fisher information of the Bernoulli photon-arrival variable with mean n̄(θ).
pub fn prior_fisher(p: &ParamPoint, cfg: &OpticalConfig) -> Result<BoundMatrix> {
    let nbar = mean_photon_number(p, cfg)?;
    if nbar <= 0.0 || nbar >= 1.0 {
        return Err(Error::DegeneratePrior { nbar });
    }
    let grad = mean_photon_number_gradient(p, cfg)?;
    let scale = 1.0 / (nbar * (1.0 - nbar));
    Ok(BoundMatrix::new(
        Matrix4::from_fn(|i, j| grad[i] * grad[j] * scale),
        BoundKind::PriorFi,
    ))
}

/// Van Trees information split into its quantum and classical contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanTreesParts {
    /// n̄ times the state QFI.
    pub quantum: Matrix4<f64>,
    pub classical: Matrix4<f64>,
    pub total: BoundMatrix,
}

pub fn van_trees_parts(p: &ParamPoint, cfg: &OpticalConfig) -> Result<VanTreesParts> {
    let nbar = mean_photon_number(p, cfg)?;
    let quantum = qfi_state_matrix(p, cfg)?.entries * nbar;
    let classical = prior_fisher(p, cfg)?.entries;
    Ok(VanTreesParts {
        quantum,
        classical,
        total: BoundMatrix::new(quantum + classical, BoundKind::VanTreesInfo),
    })
}

/// `n̄ QFI + prior FI`; its inverse lower-bounds the Bayesian mean-squared error.
pub fn van_trees_info(p: &ParamPoint, cfg: &OpticalConfig) -> Result<BoundMatrix> {
    Ok(van_trees_parts(p, cfg)?.total)
}

/// Separation velocity and leak-free SLD data in the requested basis.
fn qubit_separation(
    p: &ParamPoint,
    cfg: &OpticalConfig,
    basis: Basis,
    dd: &DeficitData,
) -> Result<(Vector3<f64>, Matrix2<f64>)> {
    let dr = bloch_derivative(p, cfg, Param::S)?;
    match basis {
        Basis::GeometricE => Ok((dr, Matrix2::identity())),
        Basis::CentroidV => {
            let rot = centroid_rotation(p, cfg)?;
            let u = pauli::real2(&rot.u);
            let du = pauli::real2(&rot.du_ds);
            let rho = pauli::from_bloch(0.5, &(dd.r * 0.5));
            let a = pauli::from_bloch(0.0, &(dr * 0.5));
            let dv = u * a * u.transpose() + du * rho * u.transpose() + u * rho * du.transpose();
            let (_, half) = pauli::to_bloch(&dv);
            Ok((half * 2.0, rot.u))
        }
    }
}

/// Bloch vector of `U ρ Uᵀ` when `ρ = (I + r·σ)/2`.
fn rotate_bloch(u: &Matrix2<f64>, r: &Vector3<f64>) -> Vector3<f64> {
    let m = pauli::real2(u) * pauli::from_bloch(0.0, r) * pauli::real2(&u.transpose());
    pauli::to_bloch(&m).1
}

/// Van Trees information with the separation SLD replaced by its qubit part in `basis`.
///
/// In the centroid basis the basis vectors follow s, which is how the qubit model is
/// usually differentiated.
pub fn qubit_approx_info(p: &ParamPoint, cfg: &OpticalConfig, basis: Basis) -> Result<BoundMatrix> {
    let dd = deficit_data(p, cfg)?;
    let (vs, u) = qubit_separation(p, cfg, basis, &dd)?;
    let r = rotate_bloch(&u, &dd.r);
    let mut v = [vs, Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
    for param in [Param::Q, Param::GammaR, Param::GammaI] {
        v[param.index()] = rotate_bloch(&u, &bloch_derivative(p, cfg, param)?);
    }
    // The basis motion only rotates r, so r·vₛ and hence k are unchanged.
    debug_assert!((r.dot(&vs) - dd.r.dot(&bloch_derivative(p, cfg, Param::S)?)).abs() < 1e-9);
    let f = gram(&v, &dd.k, dd.deficit);
    let nbar = mean_photon_number(p, cfg)?;
    let prior = prior_fisher(p, cfg)?.entries;
    Ok(BoundMatrix::new(f * nbar + prior, BoundKind::QubitApprox))
}

/// QFI ss-entry with the frame weight α replaced by `alpha`.
fn qfi_ss_at(p: &ParamPoint, cfg: &OpticalConfig, alpha: f64) -> Result<f64> {
    Ok(qfi_state_matrix(p, &cfg.with_alpha(alpha))?.diag(Param::S))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignmentError {
    pub delta_qfi: f64,
    /// Log–log slope of the error over `[ε/10, ε]`.
    pub fitted_order: f64,
}

/// Error in the ss QFI caused by placing the origin at `q + ε` instead of the centroid.
pub fn centroid_misalignment_error(p: &ParamPoint, cfg: &OpticalConfig, epsilon: f64) -> Result<MisalignmentError> {
    if !(0.0..=1.0).contains(&(p.q + epsilon)) || epsilon == 0.0 {
        return Err(Error::Domain(format!(
            "frame weight q + ε = {} outside [0, 1] or ε = 0",
            p.q + epsilon
        )));
    }
    let reference = qfi_ss_at(p, cfg, p.q)?;
    let delta = |e: f64| -> Result<f64> { Ok((qfi_ss_at(p, cfg, p.q + e)? - reference).abs()) };
    let eps: Vec<f64> = log_space(epsilon.abs() / 10.0, epsilon.abs(), 6)
        .into_iter()
        .map(|e| e.copysign(epsilon))
        .collect();
    let errs = eps.iter().map(|&e| delta(e)).collect::<Result<Vec<_>>>()?;
    let abs_eps: Vec<f64> = eps.iter().map(|e| e.abs()).collect();
    Ok(MisalignmentError {
        delta_qfi: delta(epsilon)?,
        fitted_order: log_log_slope(&abs_eps, &errs),
    })
}

/// `∂θ_k/∂ϑ_l` for ϑ = (r, q, γ_R, γ_I).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianMatrix(pub Matrix4<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndirectInfo {
    pub bound: BoundMatrix,
    pub jacobian: JacobianMatrix,
    pub bijective: bool,
    pub s0: Option<f64>,
    pub r_inf: f64,
}

/// Van Trees information for θ obtained by estimating the purity r and mapping back.
///
/// For γ_R < 0 the map s ↦ r folds at `s₀`; the caller must then assert that the
/// measured purity lies above `r_∞`, which selects the branch s < s₀.
pub fn indirect_info(p: &ParamPoint, cfg: &OpticalConfig, assert_above_r_inf: bool) -> Result<IndirectInfo> {
    let pur = purity(p, cfg)?;
    let bijective = p.gamma_r >= 0.0;
    let s0 = purity_minimum_location(p, cfg.sigma);
    if !bijective {
        let s0v = s0.unwrap_or(f64::NAN);
        if !assert_above_r_inf || pur.r <= pur.r_inf {
            return Err(Error::NonBijective { s0: s0v });
        }
    }
    let dd = deficit_data(p, cfg)?;
    let r = pur.r;
    if r <= 1e-12 {
        return Err(Error::UndefinedDirection { purity: r });
    }
    // r ∂r/∂θ = -½ ∂(1-r²) = (1-r²) k.
    let dr: [f64; 4] = dd.k.map(|k| dd.deficit * k / r);
    if (dr[0] * cfg.sigma).abs() < 1e-14 {
        return Err(Error::SingularJacobian { dr_ds: dr[0] });
    }

    let r_hat = dd.r / r;
    let mut u = [r_hat, Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
    let mut k = [r / dd.deficit, 0.0, 0.0, 0.0];
    for param in [Param::Q, Param::GammaR, Param::GammaI] {
        u[param.index()] = bloch_derivative(p, cfg, param)?;
        k[param.index()] = dd.k[param.index()];
    }
    let g = gram(&u, &k, dd.deficit);

    // ∂ϑ/∂θ: r-row holds ∂r/∂θ, the rest is the identity.
    let mut d = Matrix4::identity();
    for j in 0..4 {
        d[(0, j)] = dr[j];
    }
    let mut jac = Matrix4::identity();
    jac[(0, 0)] = 1.0 / dr[0];
    for j in 1..4 {
        jac[(0, j)] = -dr[j] / dr[0];
    }

    let nbar = mean_photon_number(p, cfg)?;
    let prior = prior_fisher(p, cfg)?.entries;
    let info = d.transpose() * g * d * nbar + prior;
    Ok(IndirectInfo {
        bound: BoundMatrix::new(info, BoundKind::Indirect),
        jacobian: JacobianMatrix(jac),
        bijective,
        s0,
        r_inf: pur.r_inf,
    })
}

/// Invert r ↦ s on the monotone branch by bisection on `[1e-6σ, 40σ]`.
pub fn separation_from_purity(target_r: f64, template: &ParamPoint, cfg: &OpticalConfig) -> Result<f64> {
    let r_at = |s: f64| -> Result<f64> { Ok(purity(&template.with(Param::S, s), cfg)?.r) };
    let (mut lo, mut hi) = (1e-6 * cfg.sigma, 40.0 * cfg.sigma);
    if let Some(s0) = purity_minimum_location(template, cfg.sigma) {
        lo = lo.max(s0);
    }
    let (f_lo, f_hi) = (r_at(lo)? - target_r, r_at(hi)? - target_r);
    if f_lo * f_hi > 0.0 {
        return Err(Error::Domain(format!("purity {target_r} not attained on [{lo}, {hi}]")));
    }
    let dec = f_lo > 0.0;
    while hi - lo > 1e-12 * cfg.sigma {
        let mid = 0.5 * (lo + hi);
        if (r_at(mid)? > target_r) == dec {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-sided limit of `f` at `edge ∈ {0, 1}` from samples at h, 2h and 4h inside, h = 1e-8.
///
/// Two linear extrapolations are formed from the nearer and farther pairs; they must agree
/// to `rel_tol` of the sampled magnitude, which holds whenever f is smooth up to the edge.
pub fn boundary_limit<F>(f: F, edge: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const H: f64 = 1e-8;
    let inward = if edge <= 0.5 { 1.0 } else { -1.0 };
    let [f1, f2, f4] = [1.0, 2.0, 4.0].map(|k| f(edge + inward * k * H));
    let (f1, f2, f4) = (f1?, f2?, f4?);
    let near = 2.0 * f1 - f2;
    let far = 2.0 * f2 - f4;
    let scale = f1.abs().max(f2.abs()).max(f4.abs());
    if (near - far).abs() > rel_tol * scale && (near - far).abs() > f64::MIN_POSITIVE {
        return Err(Error::Step {
            h: H,
            disagreement: (near - far).abs() / scale.max(f64::MIN_POSITIVE),
        });
    }
    Ok(near)
}

/// `n` points evenly spaced in log between `a` and `b` inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i == n - 1 => b,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OpticalConfig {
        OpticalConfig::standard()
    }

    #[test]
    fn stable_assembly_matches_operator_traces() {
        for (s, q, gr, gi, a) in [
            (1.0, 0.3, 0.2, 0.1, 0.5),
            (1.0, 0.3, 0.2, 0.1, 0.3),
            (0.1, 0.75, 0.5, 0.0, 0.75),
            (2.0, 0.25, -0.5, 0.4, 0.5),
        ] {
            let p = ParamPoint::new(s, q, gr, gi).unwrap();
            let c = cfg().with_alpha(a);
            let f = qfi_state_matrix(&p, &c).unwrap().entries;
            let g = qfi_from_operators(&p, &c).unwrap();
            let scale = f.diagonal().map(|v| v.sqrt());
            for i in 0..4 {
                for j in 0..4 {
                    let tol = 1e-10 * scale[i] * scale[j];
                    assert!((f[(i, j)] - g[(i, j)]).abs() <= tol, "{i}{j}");
                }
            }
        }
    }

    #[test]
    fn incoherent_anchor() {
        let p = ParamPoint::new(1e-3, 0.5, 0.0, 0.0).unwrap();
        let c = cfg();
        let v = van_trees_info(&p, &c).unwrap().diag(Param::S);
        assert!((in_figure_units(v, &c) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prior_examples() {
        let c = cfg();
        // n̄ is flat in s, q and γ_I at γ_R = 0; only the γ_R direction remains.
        let p = ParamPoint::new(1.0, 0.3, 0.0, 0.7).unwrap();
        let f = prior_fisher(&p, &c).unwrap();
        let mut rest = f.entries;
        rest[(2, 2)] = 0.0;
        assert_eq!(rest.abs().max(), 0.0);
        assert!(f.diag(Param::GammaR) > 0.0);
        let p = ParamPoint::new(0.0, 0.5, -0.5, 0.0).unwrap();
        assert_eq!(prior_fisher(&p, &c).unwrap().diag(Param::S), 0.0);
        let p = ParamPoint::new(0.0, 0.5, -1.0, 0.0).unwrap();
        assert!(matches!(prior_fisher(&p, &c), Err(Error::DegeneratePrior { .. })));
        let p = ParamPoint::new(1.0, 0.0, 0.5, 0.0).unwrap();
        assert!(matches!(prior_fisher(&p, &c), Err(Error::Boundary(_))));
    }

    #[test]
    fn prior_matches_bernoulli_difference_quotient() {
        let c = cfg();
        let p = ParamPoint::new(1.0, 0.5, 0.5, 0.0).unwrap();
        let analytic = prior_fisher(&p, &c).unwrap().entries;
        let h = 1e-6;
        let grad: Vec<f64> = Param::ALL
            .iter()
            .map(|&a| {
                let up = mean_photon_number(&p.with(a, p.get(a) + h), &c).unwrap();
                let dn = mean_photon_number(&p.with(a, p.get(a) - h), &c).unwrap();
                (up - dn) / (2.0 * h)
            })
            .collect();
        let n = mean_photon_number(&p, &c).unwrap();
        for i in 0..4 {
            for j in i..4 {
                let fd = grad[i] * grad[j] / (n * (1.0 - n));
                assert!((fd - analytic[(i, j)]).abs() <= 1e-7 * analytic.abs().max() + 1e-14);
            }
        }
    }

    #[test]
    fn frame_covariance() {
        let p = ParamPoint::new(0.8, 0.3, 0.4, -0.2).unwrap();
        let a = qfi_state_matrix(&p, &cfg().with_alpha(0.5)).unwrap().entries;
        let b = qfi_state_matrix(&p, &cfg().with_alpha(0.3)).unwrap().entries;
        for i in 1..4 {
            for j in 1..4 {
                assert!((a[(i, j)] - b[(i, j)]).abs() < 1e-10);
            }
        }
        assert!((a[(0, 0)] - b[(0, 0)]).abs() > 1e-6);
    }

    #[test]
    fn qubit_approx_matches_at_half() {
        let c = cfg();
        let p = ParamPoint::new(1e-3, 0.5, 0.3, 0.0).unwrap();
        let exact = van_trees_info(&p, &c).unwrap().diag(Param::S);
        for basis in [Basis::GeometricE, Basis::CentroidV] {
            let qb = qubit_approx_info(&p, &c, basis).unwrap().diag(Param::S);
            assert!(((qb - exact) / exact).abs() < 1e-3);
        }
    }

    #[test]
    fn qubit_approx_overestimates_in_wrong_basis() {
        let p = ParamPoint::new(1e-2, 0.75, 0.5, 0.0).unwrap();
        let c = cfg();
        let exact = van_trees_info(&p, &c.with_alpha(0.75)).unwrap().diag(Param::S);
        let qb = qubit_approx_info(&p, &c, Basis::GeometricE).unwrap().diag(Param::S);
        assert!(qb > exact);
        let p = ParamPoint::new(1e-3, 0.75, 0.5, 0.0).unwrap();
        let exact = van_trees_info(&p, &c.with_alpha(0.75)).unwrap().diag(Param::S);
        let qv = qubit_approx_info(&p, &c, Basis::CentroidV).unwrap().diag(Param::S);
        assert!(((qv - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn misalignment_orders() {
        let c = cfg();
        for (q, gr, order) in [(0.75, 0.0, 2.0), (0.5, 0.5, 2.0), (0.75, 0.5, 1.0)] {
            let p = ParamPoint::new(1e-3, q, gr, 0.0).unwrap();
            let m = centroid_misalignment_error(&p, &c, 1e-2).unwrap();
            assert!((m.fitted_order - order).abs() < 0.1, "{q} {gr}: {}", m.fitted_order);
        }
    }

    #[test]
    fn indirect_guard_and_s0() {
        let c = cfg();
        let p = ParamPoint::new(1.0, 0.5, -0.5, 0.0).unwrap();
        match indirect_info(&p, &c, false) {
            Err(Error::NonBijective { s0 }) => {
                assert!((s0 - (8.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
                assert!((s0 - 2.3548).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
        // Purities above r_∞ are only reached on the branch s < s₀.
        let info = indirect_info(&p, &c, true).unwrap();
        assert!(!info.bijective);
        let far = ParamPoint::new(4.0, 0.5, -0.5, 0.0).unwrap();
        assert!(matches!(indirect_info(&far, &c, true), Err(Error::NonBijective { .. })));
        let p = ParamPoint::new(1.0, 0.4, 0.4, 0.2).unwrap();
        let info = indirect_info(&p, &c, false).unwrap();
        let direct = van_trees_info(&p, &c.with_alpha(0.4)).unwrap().diag(Param::S);
        assert!(info.bijective);
        assert!((direct - info.bound.diag(Param::S)) / direct > 0.0);
    }

    #[test]
    fn indirect_equals_direct_when_incoherent() {
        let c = cfg().with_alpha(0.4);
        let p = ParamPoint::new(1e-4, 0.4, 0.0, 0.0).unwrap();
        let direct = van_trees_info(&p, &c).unwrap().diag(Param::S);
        let ind = indirect_info(&p, &c, false).unwrap().bound.diag(Param::S);
        assert!(((direct - ind) / direct).abs() < 1e-8);
    }

    #[test]
    fn jacobian_inverts_forward_map() {
        let c = cfg();
        let p = ParamPoint::new(1.2, 0.3, 0.2, 0.1).unwrap();
        let info = indirect_info(&p, &c, false).unwrap();
        let h = 1e-6;
        let r = |pp: &ParamPoint| purity(pp, &c).unwrap().r;
        let drds = (r(&p.with(Param::S, 1.2 + h)) - r(&p.with(Param::S, 1.2 - h))) / (2.0 * h);
        assert!((info.jacobian.0[(0, 0)] * drds - 1.0).abs() < 1e-7);
    }

    #[test]
    fn purity_inversion_round_trip() {
        let c = cfg();
        let p = ParamPoint::new(1.7, 0.4, 0.3, 0.0).unwrap();
        let r = purity(&p, &c).unwrap().r;
        let s = separation_from_purity(r, &p, &c).unwrap();
        assert!((s - 1.7).abs() < 1e-9);
    }

    #[test]
    fn pseudo_inverse_of_rank_one() {
        let c = cfg();
        let p = ParamPoint::new(1.0, 0.5, 0.5, 0.0).unwrap();
        let pr = prior_fisher(&p, &c).unwrap();
        let pinv = pr.pseudo_inverse(1e-12);
        let back = pr.entries * pinv * pr.entries;
        assert!((back - pr.entries).abs().max() < 1e-9 * pr.entries.abs().max());
    }

    #[test]
    fn slope_fit() {
        let x = log_space(1e-3, 1e-2, 6);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        assert!((log_log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_limit_extrapolates_smooth_functions_only() {
        let v = boundary_limit(|q| Ok(3.0 + 2.0 * q), 0.0, 1e-6).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let v = boundary_limit(|q| Ok(1.0 - q), 1.0, 1e-6).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(boundary_limit(|q: f64| Ok(q.sqrt()), 0.0, 1e-6).is_err());
    }
}

//! Small-matrix helpers: Pauli decompositions, 4×4 embedding, Lyapunov residuals.

use nalgebra::{Matrix2, Matrix4, Vector3};

use crate::Complex;

fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// `a0·I + a·σ`.
pub fn from_bloch(a0: f64, a: &Vector3<f64>) -> Matrix2<Complex> {
    Matrix2::new(
        re(a0 + a.z),
        Complex::new(a.x, -a.y),
        Complex::new(a.x, a.y),
        re(a0 - a.z),
    )
}

/// Inverse of [`from_bloch`] for a Hermitian matrix.
pub fn to_bloch(m: &Matrix2<Complex>) -> (f64, Vector3<f64>) {
    let a0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    (a0, Vector3::new(off.re, -off.im, 0.5 * (m[(0, 0)].re - m[(1, 1)].re)))
}

pub fn real2(m: &Matrix2<f64>) -> Matrix2<Complex> {
    m.map(re)
}

/// Place `a` in the upper-left block and `b` in the upper-right block; the lower-left is `b†`.
pub fn embed4(a: &Matrix2<Complex>, b: &Matrix2<Complex>, d: &Matrix2<Complex>) -> Matrix4<Complex> {
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    out.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(&b.adjoint());
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    out
}

pub fn embed_upper(a: &Matrix2<Complex>) -> Matrix4<Complex> {
    let z = Matrix2::zeros();
    embed4(a, &z, &z)
}

/// Frobenius norm of `∂ρ - (ρΛ + Λρ)/2`.
pub fn lyapunov_residual<const D: usize>(
    rho: &nalgebra::SMatrix<Complex, D, D>,
    drho: &nalgebra::SMatrix<Complex, D, D>,
    sld: &nalgebra::SMatrix<Complex, D, D>,
) -> f64 {
    let half = re(0.5);
    (drho - (rho * sld + sld * rho) * half).norm()
}

pub fn commutator<const D: usize>(
    a: &nalgebra::SMatrix<Complex, D, D>,
    b: &nalgebra::SMatrix<Complex, D, D>,
) -> nalgebra::SMatrix<Complex, D, D> {
    a * b - b * a
}

pub fn hermiticity_defect<const D: usize>(m: &nalgebra::SMatrix<Complex, D, D>) -> f64 {
    (m - m.adjoint()).norm()
}

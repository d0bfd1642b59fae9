//! Voigt-notation operators for isotropic linear elasticity.
//!
//! Component ordering is `(xx, yy, xy)` in 2D and `(xx, yy, zz, xy, xz, yz)`
//! in 3D; shear strains are engineering strains.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneModel {
    Stress,
    Strain,
}

impl PlaneModel {
    pub fn theta(self) -> f64 {
        match self {
            PlaneModel::Stress => 1.0,
            PlaneModel::Strain => 2.0,
        }
    }

    pub fn from_theta(theta: u8) -> Result<Self> {
        match theta {
            1 => Ok(PlaneModel::Stress),
            2 => Ok(PlaneModel::Strain),
            t => Err(Error::InvalidArgument(format!("theta must be 1 or 2, got {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub plane: PlaneModel,
}

impl Material {
    pub fn new(e: f64, nu: f64, plane: PlaneModel) -> Result<Self> {
        if !(e > 0.0) || !(nu > -1.0 && nu < 0.5) {
            return Err(Error::InvalidArgument(format!("inadmissible material E={e}, nu={nu}")));
        }
        Ok(Self { e, nu, plane })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoigtDims {
    pub n_sd: usize,
    pub m_sd: usize,
    pub n_rr: usize,
}

impl VoigtDims {
    pub fn new(n_sd: usize) -> Result<Self> {
        if !(2..=3).contains(&n_sd) {
            return Err(Error::InvalidArgument(format!("spatial dimension {n_sd}")));
        }
        Ok(Self { n_sd, m_sd: n_sd * (n_sd + 1) / 2, n_rr: n_sd * (n_sd - 1) / 2 })
    }
}

/// Scaling factor of the constitutive matrix.
pub fn lambda_coeff(mat: &Material, dim: usize) -> Result<f64> {
    let nu = mat.nu;
    let denom = match dim {
        2 => (1.0 + nu) * (1.0 - mat.plane.theta() * nu),
        3 => (1.0 + nu) * (1.0 - 2.0 * nu),
        _ => return Err(Error::InvalidArgument(format!("spatial dimension {dim}"))),
    };
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularMaterial);
    }
    Ok(mat.e / denom)
}

/// Constitutive matrix `D` with `sigma_V = D eps_V`.
pub fn elasticity_matrix(mat: &Material, dim: usize) -> Result<DMatrix<f64>> {
    let lam = lambda_coeff(mat, dim)?;
    let nu = mat.nu;
    let d = match dim {
        2 => {
            let th = mat.plane.theta();
            let a = 1.0 + (1.0 - th) * nu;
            DMatrix::from_row_slice(3, 3, &[a, nu, 0.0, nu, a, 0.0, 0.0, 0.0, 0.5 * (1.0 - th * nu)])
        }
        _ => {
            let mut d = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] = if i == j { 1.0 - nu } else { nu };
                }
                d[(3 + i, 3 + i)] = 0.5 * (1.0 - 2.0 * nu);
            }
            d
        }
    };
    Ok(d * lam)
}

/// Symmetric square root of a symmetric positive definite matrix.
pub fn sqrt_spd(d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(d.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::SingularMaterial);
    }
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let r = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

/// `D` and its symmetric square root, computed once per material.
#[derive(Debug, Clone, PartialEq)]
pub struct Constitutive {
    pub d: DMatrix<f64>,
    pub d_sqrt: DMatrix<f64>,
}

impl Constitutive {
    pub fn elastic(mat: &Material, dim: usize) -> Result<Self> {
        let d = elasticity_matrix(mat, dim)?;
        let d_sqrt = sqrt_spd(&d)?;
        Ok(Self { d, d_sqrt })
    }

    /// Unit conductivity for the scalar problem.
    pub fn unit(n: usize) -> Self {
        Self { d: DMatrix::identity(n, n), d_sqrt: DMatrix::identity(n, n) }
    }
}

fn check_unit<const N: usize>(n: [f64; N]) -> Result<()> {
    let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal(norm));
    }
    Ok(())
}

// Symmetric-gradient pattern with the derivative replaced by `v`.
fn sym_pattern<const N: usize>(v: [f64; N]) -> DMatrix<f64> {
    if N == 2 {
        DMatrix::from_row_slice(3, 2, &[v[0], 0.0, 0.0, v[1], v[1], v[0]])
    } else {
        DMatrix::from_row_slice(
            6,
            3,
            &[
                v[0], 0.0, 0.0, //
                0.0, v[1], 0.0, //
                0.0, 0.0, v[2], //
                v[1], v[0], 0.0, //
                v[2], 0.0, v[0], //
                0.0, v[2], v[1],
            ],
        )
    }
}

// Skew pattern shared by the tangent and curl operators.
fn skew_pattern<const N: usize>(v: [f64; N]) -> DMatrix<f64> {
    if N == 2 {
        DMatrix::from_row_slice(1, 2, &[-v[1], v[0]])
    } else {
        DMatrix::from_row_slice(3, 3, &[0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0])
    }
}

/// `m_sd x n_sd` normal matrix: `N^T sigma_V` is the traction.
pub fn normal_matrix<const N: usize>(n: [f64; N]) -> Result<DMatrix<f64>> {
    check_unit(n)?;
    Ok(sym_pattern(n))
}

/// `n_rr x n_sd` tangent matrix.
pub fn tangent_matrix<const N: usize>(n: [f64; N]) -> Result<DMatrix<f64>> {
    check_unit(n)?;
    Ok(skew_pattern(n))
}

/// `B = grad_S` applied to `n_en` scalar basis functions; columns are
/// node-major (`u_x, u_y[, u_z]` of node 0, then node 1, ...).
pub fn strain_displacement_b<const N: usize>(grads: &[[f64; N]]) -> DMatrix<f64> {
    let m = N * (N + 1) / 2;
    let mut b = DMatrix::zeros(m, N * grads.len());
    for (a, g) in grads.iter().enumerate() {
        b.view_mut((0, N * a), (m, N)).copy_from(&sym_pattern(*g));
    }
    b
}

/// Curl operator on nodal displacements, `n_rr x (n_sd n_en)`.
pub fn curl_w<const N: usize>(grads: &[[f64; N]]) -> DMatrix<f64> {
    let r = N * (N - 1) / 2;
    let mut w = DMatrix::zeros(r, N * grads.len());
    for (a, g) in grads.iter().enumerate() {
        w.view_mut((0, N * a), (r, N)).copy_from(&skew_pattern(*g));
    }
    w
}

/// Curl of a field given its gradient `grad[i][j] = d u_i / d x_j`.
pub fn curl_of_gradient<const N: usize>(grad: [[f64; N]; N]) -> Vec<f64> {
    if N == 2 {
        vec![grad[1][0] - grad[0][1]]
    } else {
        vec![grad[2][1] - grad[1][2], grad[0][2] - grad[2][0], grad[1][0] - grad[0][1]]
    }
}

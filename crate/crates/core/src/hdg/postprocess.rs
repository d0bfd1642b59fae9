use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::physics::Physics;
use crate::ref_elem::{simplex_quadrature, ElementGeometry, LagrangeBasis, QuadratureRule, ReferenceElement};
use crate::voigt::{curl_w, strain_displacement_b, Constitutive};

/// Degree `k + 1` tables plus the degree `k` basis at the same points.
#[derive(Debug, Clone)]
pub struct PostprocessTables {
    pub star: ReferenceElement,
    /// `base_phi[q][i]`: degree-`k` basis at volume point `q`.
    pub base_phi: Vec<Vec<f64>>,
    pub face_rule: QuadratureRule,
}

impl PostprocessTables {
    pub fn new(k: usize) -> Result<Self> {
        let star = ReferenceElement::new(k + 1, 2, 2 * k + 4)?;
        let base = LagrangeBasis::new(k, 2)?;
        let base_phi = star.quadrature.points.iter().map(|&p| base.eval(p)).collect();
        let face_rule = simplex_quadrature(2 * k + 4, 1)?;
        Ok(Self { star, base_phi, face_rule })
    }
}

/// Postprocessed displacement on one element.
#[derive(Debug, Clone)]
pub struct Postprocessed {
    /// Degree `k + 1` coefficients, node-major.
    pub coeffs: Vec<f64>,
    /// `max_c |int (u* - u)_c| / (|K| max |u|)`.
    pub translation_residual: f64,
    /// `|int curl u* - int_dK T g| / (|dK| max |g|)`.
    pub rotation_residual: f64,
}

/// Solves `(G v, D^{1/2} G u*) = -(G v, L)` with degree `k + 1`, the mean
/// of `u*` fixed to the mean of `u` and its mean curl fixed by the boundary
/// data `g(j, x)` on local face `j` (trace or Dirichlet values).
pub fn postprocess_elastic(
    tables: &PostprocessTables,
    geom: &ElementGeometry,
    c: &Constitutive,
    l: &[f64],
    u: &[f64],
    g: impl Fn(usize, Point) -> [f64; 2],
) -> Result<Postprocessed> {
    let physics = Physics::Elastic;
    let nb = tables.star.basis.len();
    let n = 2 * nb;
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut cons = DMatrix::<f64>::zeros(3, n);
    let mut mean_u = [0.0; 2];
    for (q, (_, w)) in tables.star.quadrature.iter().enumerate() {
        let w = w * geom.det;
        let grads: Vec<[f64; 2]> = tables.star.grad[q].iter().map(|&gr| geom.phys_grad(gr)).collect();
        let b = strain_displacement_b(&grads);
        let bt = b.transpose();
        k += &bt * &c.d_sqrt * &b * w;
        let base = &tables.base_phi[q];
        let mut lq = DVector::<f64>::zeros(3);
        for (a, p) in base.iter().enumerate() {
            for s in 0..3 {
                lq[s] += p * l[a * 3 + s];
            }
        }
        rhs -= &bt * lq * w;
        let uq = physics.interpolate(base, u);
        mean_u[0] += w * uq[0];
        mean_u[1] += w * uq[1];
        for (a, p) in tables.star.phi[q].iter().enumerate() {
            cons[(0, 2 * a)] += w * p;
            cons[(1, 2 * a + 1)] += w * p;
        }
        let wc = curl_w(&grads);
        for col in 0..n {
            cons[(2, col)] += w * wc[(0, col)];
        }
    }
    let mut circulation = 0.0;
    let mut g_max: f64 = 0.0;
    let mut perimeter = 0.0;
    for j in 0..3 {
        let len = geom.face_lengths[j];
        let nrm = geom.normals[j];
        perimeter += len;
        for (p, w) in tables.face_rule.iter() {
            let x = geom.to_physical(ElementGeometry::face_ref_point(j, p[0]));
            let gx = g(j, x);
            g_max = g_max.max(gx[0].abs()).max(gx[1].abs());
            circulation += w * len * (-nrm[1] * gx[0] + nrm[0] * gx[1]);
        }
    }
    let targets = [mean_u[0], mean_u[1], circulation];

    // balance constraint rows against the stiffness before factorizing
    let alpha = k.amax() / cons.amax();
    let mut aug = DMatrix::<f64>::zeros(n + 3, n + 3);
    aug.view_mut((0, 0), (n, n)).copy_from(&k);
    aug.view_mut((n, 0), (3, n)).copy_from(&(&cons * alpha));
    aug.view_mut((0, n), (n, 3)).copy_from(&(cons.transpose() * alpha));
    let mut full_rhs = DVector::<f64>::zeros(n + 3);
    full_rhs.rows_mut(0, n).copy_from(&rhs);
    for i in 0..3 {
        full_rhs[n + i] = alpha * targets[i];
    }
    let sol = aug.lu().solve(&full_rhs).ok_or(Error::SingularLocal { element: usize::MAX })?;
    let coeffs: Vec<f64> = sol.as_slice()[..n].to_vec();
    let achieved = &cons * DVector::from_column_slice(&coeffs);

    let area = geom.area();
    let u_max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = |r: f64, scale: f64| if scale > 0.0 { r / scale } else { r };
    let translation_residual = rel(
        (achieved[0] - targets[0]).abs().max((achieved[1] - targets[1]).abs()),
        area * u_max,
    );
    let rotation_residual = rel((achieved[2] - targets[2]).abs(), perimeter * g_max);
    Ok(Postprocessed { coeffs, translation_residual, rotation_residual })
}

use nalgebra::{DMatrix, DVector};

use super::HdgTables;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::physics::Physics;
use crate::ref_elem::ElementGeometry;
use crate::voigt::Constitutive;

/// How a local face enters the element problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRole {
    /// Carries trace unknowns; `reversed` when the element traverses the
    /// face against the trace parametrization.
    Trace { reversed: bool },
    Dirichlet,
}

/// Element equations `A [L; u] = R g + b` for trace values `g`.
///
/// Unknown ordering: `L` first (`node * nstrain + row`), then `u`
/// (`node * ncomp + component`). Trace columns follow `trace_faces`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub a: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub b: DVector<f64>,
    /// `tau <mu, mu>` over the trace faces.
    pub trace_mass: DMatrix<f64>,
    pub trace_faces: Vec<usize>,
    pub n_l: usize,
}

impl LocalSystem {
    /// `||A x - R g - b|| / (||R g + b|| + ||A|| ||x||)`.
    pub fn residual(&self, x: &DVector<f64>, g: &DVector<f64>) -> f64 {
        let rhs = &self.r * g + &self.b;
        let r = (&self.a * x - &rhs).norm();
        let scale = rhs.norm() + self.a.norm() * x.norm();
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }
}

/// Builds the element system for the mixed form with `L = -D^{1/2} G u`.
#[allow(clippy::too_many_arguments)]
pub fn local_system(
    physics: Physics,
    tables: &HdgTables,
    geom: &ElementGeometry,
    c: &Constitutive,
    tau: f64,
    faces: [FaceRole; 3],
    f: impl Fn(Point) -> [f64; 2],
    u_d: impl Fn(Point) -> [f64; 2],
) -> LocalSystem {
    let (nc, ns) = (physics.ncomp(), physics.nstrain());
    let nb = tables.vol.basis.len();
    let nt = tables.trace.len();
    let (n_l, n_u) = (ns * nb, nc * nb);
    let trace_faces: Vec<usize> = (0..3).filter(|&j| matches!(faces[j], FaceRole::Trace { .. })).collect();
    let n_g = trace_faces.len() * nt * nc;

    let mut a = DMatrix::zeros(n_l + n_u, n_l + n_u);
    let mut r = DMatrix::zeros(n_l + n_u, n_g);
    let mut b = DVector::zeros(n_l + n_u);
    let mut trace_mass = DMatrix::zeros(n_g, n_g);

    for (q, (xi, w)) in tables.vol.quadrature.iter().enumerate() {
        let w = w * geom.det;
        let phi = &tables.vol.phi[q];
        let grads: Vec<[f64; 2]> = tables.vol.grad[q].iter().map(|&g| geom.phys_grad(g)).collect();
        let x = geom.to_physical(*xi);
        let fx = f(x);
        for a_ in 0..nb {
            // D^{1/2} G_a
            let dg = &c.d_sqrt * physics.grad_op(&grads[a_..a_ + 1]);
            for b_ in 0..nb {
                let m = w * phi[a_] * phi[b_];
                for s in 0..ns {
                    a[(a_ * ns + s, b_ * ns + s)] -= m;
                }
                for s in 0..ns {
                    for comp in 0..nc {
                        let v = w * dg[(s, comp)] * phi[b_];
                        a[(a_ * ns + s, n_l + b_ * nc + comp)] += v;
                        a[(n_l + b_ * nc + comp, a_ * ns + s)] += v;
                    }
                }
            }
            for comp in 0..nc {
                b[n_l + a_ * nc + comp] += w * phi[a_] * fx[comp];
            }
        }
    }

    let block = nt * nc;
    for j in 0..3 {
        let len = geom.face_lengths[j];
        let ntd = physics.normal_op(geom.normals[j]).transpose() * &c.d_sqrt;
        let slot = trace_faces.iter().position(|&t| t == j);
        for (q, (p, w)) in tables.face_rule.iter().enumerate() {
            let wl = w * len;
            let phi = &tables.face_phi[j][q];
            for a_ in 0..nb {
                for b_ in 0..nb {
                    let m = tau * wl * phi[a_] * phi[b_];
                    for comp in 0..nc {
                        a[(n_l + a_ * nc + comp, n_l + b_ * nc + comp)] += m;
                    }
                }
            }
            match faces[j] {
                FaceRole::Trace { reversed } => {
                    let mu = &tables.trace_phi[reversed as usize][q];
                    let off = slot.expect("trace face listed") * block;
                    for a_ in 0..nb {
                        for i in 0..nt {
                            let pm = wl * phi[a_] * mu[i];
                            for comp in 0..nc {
                                let col = off + i * nc + comp;
                                for s in 0..ns {
                                    r[(a_ * ns + s, col)] += pm * ntd[(comp, s)];
                                }
                                r[(n_l + a_ * nc + comp, col)] += tau * pm;
                            }
                        }
                    }
                    for i in 0..nt {
                        for k in 0..nt {
                            let m = tau * wl * mu[i] * mu[k];
                            for comp in 0..nc {
                                trace_mass[(off + i * nc + comp, off + k * nc + comp)] += m;
                            }
                        }
                    }
                }
                FaceRole::Dirichlet => {
                    let x = geom.to_physical(ElementGeometry::face_ref_point(j, p[0]));
                    let g = u_d(x);
                    for a_ in 0..nb {
                        for s in 0..ns {
                            let tg: f64 = (0..nc).map(|comp| ntd[(comp, s)] * g[comp]).sum();
                            b[a_ * ns + s] += wl * phi[a_] * tg;
                        }
                        for comp in 0..nc {
                            b[n_l + a_ * nc + comp] += tau * wl * phi[a_] * g[comp];
                        }
                    }
                }
            }
        }
    }
    LocalSystem { a, r, b, trace_mass, trace_faces, n_l }
}

/// Factorized element problem and its condensed trace contribution
/// `(tau M - R^T A^{-1} R) g = R^T A^{-1} b + ...`.
#[derive(Debug, Clone)]
pub struct LocalSolver {
    pub trace_faces: Vec<usize>,
    pub n_l: usize,
    /// `A^{-1} R`.
    pub z: DMatrix<f64>,
    /// `A^{-1} b`.
    pub x0: DVector<f64>,
    pub k: DMatrix<f64>,
    pub f: DVector<f64>,
}

impl LocalSolver {
    pub fn new(sys: &LocalSystem, element: usize) -> Result<Self> {
        let lu = sys.a.clone().lu();
        let z = lu.solve(&sys.r).ok_or(Error::SingularLocal { element })?;
        let x0 = lu.solve(&sys.b).ok_or(Error::SingularLocal { element })?;
        if z.iter().chain(x0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::SingularLocal { element });
        }
        let k = &sys.trace_mass - sys.r.transpose() * &z;
        let f = sys.r.transpose() * &x0;
        Ok(Self { trace_faces: sys.trace_faces.clone(), n_l: sys.n_l, z, x0, k, f })
    }

    /// `[L; u]` from the element's trace values.
    pub fn solve(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.z * g + &self.x0
    }
}

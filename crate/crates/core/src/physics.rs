//! Operators shared by the scalar (thermal) and vector (elastic) problems.
//!
//! Both are written as `-G^T D G u = f` with `G` the gradient (thermal) or
//! symmetric gradient (elastic) and `D` the identity or the Voigt
//! constitutive matrix. The HDG mixed variable is `L = -D^{1/2} G u`.

use nalgebra::DMatrix;

use crate::voigt::{normal_matrix, strain_displacement_b, Constitutive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Physics {
    Thermal,
    Elastic,
}

impl Physics {
    /// Unknowns per node.
    pub fn ncomp(self) -> usize {
        match self {
            Physics::Thermal => 1,
            Physics::Elastic => 2,
        }
    }

    /// Rows of `G u`.
    pub fn nstrain(self) -> usize {
        match self {
            Physics::Thermal => 2,
            Physics::Elastic => 3,
        }
    }

    /// `nstrain x (ncomp n)` matrix of `G` over `n` basis functions,
    /// columns node-major.
    pub fn grad_op(self, grads: &[[f64; 2]]) -> DMatrix<f64> {
        match self {
            Physics::Thermal => DMatrix::from_fn(2, grads.len(), |r, a| grads[a][r]),
            Physics::Elastic => strain_displacement_b(grads),
        }
    }

    /// `nstrain x ncomp` matrix such that `normal_op^T (D G u)` is the
    /// outward normal flux or traction.
    pub fn normal_op(self, n: [f64; 2]) -> DMatrix<f64> {
        match self {
            Physics::Thermal => DMatrix::from_column_slice(2, 1, &n),
            // normals come from element geometry and are unit to rounding
            Physics::Elastic => {
                let len = n[0].hypot(n[1]);
                normal_matrix([n[0] / len, n[1] / len]).expect("normalized")
            }
        }
    }

    /// `ncomp x (ncomp n)` interpolation matrix.
    pub fn value_op(self, phi: &[f64]) -> DMatrix<f64> {
        let nc = self.ncomp();
        let mut m = DMatrix::zeros(nc, nc * phi.len());
        for (a, &p) in phi.iter().enumerate() {
            for c in 0..nc {
                m[(c, a * nc + c)] = p;
            }
        }
        m
    }

    /// Field value at a point from node-major coefficients.
    pub fn interpolate(self, phi: &[f64], coeffs: &[f64]) -> [f64; 2] {
        let nc = self.ncomp();
        let mut v = [0.0; 2];
        for (a, &p) in phi.iter().enumerate() {
            for c in 0..nc {
                v[c] += p * coeffs[a * nc + c];
            }
        }
        v
    }

    /// `G u` at a point from node-major coefficients (padded to 3 entries).
    pub fn apply_grad(self, grads: &[[f64; 2]], coeffs: &[f64]) -> [f64; 3] {
        let g = self.grad_op(grads) * nalgebra::DVector::from_column_slice(coeffs);
        let mut out = [0.0; 3];
        out[..g.len()].copy_from_slice(g.as_slice());
        out
    }
}

/// Constitutive data per element, shared through a small table.
#[derive(Debug, Clone)]
pub struct MaterialMap {
    table: Vec<Constitutive>,
    elem: Vec<usize>,
}

impl MaterialMap {
    pub fn new(table: Vec<Constitutive>, elem: Vec<usize>) -> Self {
        assert!(elem.iter().all(|&i| i < table.len()));
        Self { table, elem }
    }

    pub fn uniform(c: Constitutive, n_elements: usize) -> Self {
        Self { table: vec![c], elem: vec![0; n_elements] }
    }

    pub fn get(&self, e: usize) -> &Constitutive {
        &self.table[self.elem[e]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let g = [[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(Physics::Thermal.grad_op(&g).shape(), (2, 2));
        assert_eq!(Physics::Elastic.grad_op(&g).shape(), (3, 4));
        assert_eq!(Physics::Elastic.normal_op([0.0, 1.0]).shape(), (3, 2));
        assert_eq!(Physics::Thermal.value_op(&[0.5, 0.5]).shape(), (1, 2));
        assert_eq!(Physics::Elastic.value_op(&[0.5, 0.5]).shape(), (2, 4));
    }

    #[test]
    fn thermal_flux_is_normal_derivative() {
        let g = Physics::Thermal.grad_op(&[[1.0, 0.0], [0.0, 1.0]]);
        let gu = g * nalgebra::DVector::from_vec(vec![2.0, 3.0]);
        let n = Physics::Thermal.normal_op([0.6, 0.8]);
        let flux = n.transpose() * gu;
        assert!((flux[0] - (0.6 * 2.0 + 0.8 * 3.0)).abs() < 1e-15);
    }

    #[test]
    fn interpolation_node_major() {
        let v = Physics::Elastic.interpolate(&[0.25, 0.75], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(v, [0.25 + 2.25, 0.5 + 3.0]);
    }
}

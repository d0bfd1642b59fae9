use super::basis::ReferenceElement;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Reference vertices of the unit triangle, in local-vertex order.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    /// `jac[r][c] = d x_r / d xi_c`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// Inverse transpose of the Jacobian.
    pub inv_t: [[f64; 2]; 2],
    /// Outward unit normal of local face `j` (vertex `j` to `j+1`).
    pub normals: [[f64; 2]; 3],
    pub face_lengths: [f64; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = (jac[0][0].abs() + jac[0][1].abs() + jac[1][0].abs() + jac[1][1].abs()).powi(2);
        if !(det > 1e-14 * scale) {
            return Err(Error::DegenerateElement { element: usize::MAX, area: 0.5 * det });
        }
        let inv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        let mut normals = [[0.0; 2]; 3];
        let mut face_lengths = [0.0; 3];
        for j in 0..3 {
            let (p, q) = (vertices[j], vertices[(j + 1) % 3]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = (dx * dx + dy * dy).sqrt();
            normals[j] = [dy / len, -dx / len];
            face_lengths[j] = len;
        }
        Ok(Self { vertices, jac, det, inv_t, normals, face_lengths })
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> Point {
        let a = self.vertices[0];
        [
            a[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            a[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, p: Point) -> [f64; 2] {
        let a = self.vertices[0];
        let d = [p[0] - a[0], p[1] - a[1]];
        // J^{-1} = inv_t^T
        [self.inv_t[0][0] * d[0] + self.inv_t[1][0] * d[1], self.inv_t[0][1] * d[0] + self.inv_t[1][1] * d[1]]
    }

    pub fn phys_grad(&self, g: [f64; 2]) -> [f64; 2] {
        [self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1], self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1]]
    }

    /// Reference point at parameter `s` along local face `j`.
    pub fn face_ref_point(j: usize, s: f64) -> [f64; 2] {
        let (p, q) = (REF_VERTICES[j], REF_VERTICES[(j + 1) % 3]);
        [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
    }

    /// Whether `p` lies in the closed triangle, up to a relative tolerance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let xi = self.to_reference(p);
        xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol
    }
}

/// Physical tables of a reference element on one triangle.
#[derive(Debug, Clone)]
pub struct MappedElement {
    pub geometry: ElementGeometry,
    /// `grads[q][i]`: physical gradient of basis `i` at quadrature point `q`.
    pub grads: Vec<Vec<[f64; 2]>>,
    /// Physical quadrature weights (`w_q * det J`).
    pub weights: Vec<f64>,
    pub points: Vec<Point>,
}

pub fn map_physical(vertices: [Point; 3], reference: &ReferenceElement) -> Result<MappedElement> {
    let geometry = ElementGeometry::new(vertices)?;
    let grads = reference
        .grad
        .iter()
        .map(|row| row.iter().map(|&g| geometry.phys_grad(g)).collect())
        .collect();
    let weights = reference.quadrature.weights.iter().map(|w| w * geometry.det).collect();
    let points = reference.quadrature.points.iter().map(|&xi| geometry.to_physical(xi)).collect();
    Ok(MappedElement { geometry, grads, weights, points })
}

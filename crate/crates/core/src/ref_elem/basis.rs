use super::quadrature::{simplex_quadrature, QuadratureRule};
use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 6;

/// Nodal Lagrange basis of complete degree `k` on a uniform lattice of the
/// reference segment `[0,1]` or triangle `(0,0) (1,0) (0,1)`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    dim: usize,
    nodes: Vec<[f64; 2]>,
    /// Integer barycentric coordinates `(i0, i1, i2)` summing to `k`,
    /// weights of reference vertices 0, 1, 2. Segment nodes use `(k - i, i, 0)`.
    lattice: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(k: usize, dim: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(Error::UnsupportedDegree(k));
        }
        let kf = k as f64;
        let (nodes, lattice): (Vec<[f64; 2]>, Vec<[usize; 3]>) = match dim {
            1 => ((0..=k).map(|i| [i as f64 / kf, 0.0]).collect(), (0..=k).map(|i| [k - i, i, 0]).collect()),
            2 => {
                let mut nodes = Vec::new();
                let mut lattice = Vec::new();
                for b in 0..=k {
                    for a in 0..=(k - b) {
                        nodes.push([a as f64 / kf, b as f64 / kf]);
                        lattice.push([k - a - b, a, b]);
                    }
                }
                (nodes, lattice)
            }
            _ => return Err(Error::InvalidArgument(format!("basis dimension {dim}"))),
        };
        Ok(Self { degree: k, dim, nodes, lattice })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn lattice(&self) -> &[[usize; 3]] {
        &self.lattice
    }

    /// Local nodes on face `j` (vertex `j` to `j + 1`), ordered from vertex
    /// `j` towards vertex `j + 1`.
    pub fn face_nodes(&self, j: usize) -> Vec<usize> {
        let (start, end, opp) = (j, (j + 1) % 3, (j + 2) % 3);
        let mut on: Vec<usize> = (0..self.len()).filter(|&i| self.lattice[i][opp] == 0).collect();
        on.sort_by_key(|&i| (self.lattice[i][end], std::cmp::Reverse(self.lattice[i][start])));
        on
    }

    fn barycentric(&self, xi: [f64; 2]) -> [f64; 3] {
        match self.dim {
            1 => [1.0 - xi[0], xi[0], 0.0],
            _ => [1.0 - xi[0] - xi[1], xi[0], xi[1]],
        }
    }

    pub fn eval(&self, xi: [f64; 2]) -> Vec<f64> {
        let l = self.barycentric(xi);
        let k = self.degree;
        self.lattice.iter().map(|idx| (0..3).map(|v| silvester(k, idx[v], l[v]).0).product()).collect()
    }

    /// Reference gradients; segment bases return `[d/ds, 0]`.
    pub fn eval_grad(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let l = self.barycentric(xi);
        let k = self.degree;
        // d lambda_v / d xi
        let dl: [[f64; 2]; 3] = match self.dim {
            1 => [[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
            _ => [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        self.lattice
            .iter()
            .map(|idx| {
                let f: [(f64, f64); 3] = std::array::from_fn(|v| silvester(k, idx[v], l[v]));
                let mut g = [0.0; 2];
                for v in 0..3 {
                    let others: f64 = (0..3).filter(|&w| w != v).map(|w| f[w].0).product();
                    g[0] += f[v].1 * others * dl[v][0];
                    g[1] += f[v].1 * others * dl[v][1];
                }
                g
            })
            .collect()
    }
}

/// `P_n(l) = prod_{m<n} (k l - m) / (m + 1)` and its derivative.
fn silvester(k: usize, n: usize, l: f64) -> (f64, f64) {
    let kf = k as f64;
    let factors: Vec<f64> = (0..n).map(|m| (kf * l - m as f64) / (m as f64 + 1.0)).collect();
    let value = factors.iter().product();
    let deriv = (0..n)
        .map(|j| {
            let rest: f64 = factors.iter().enumerate().filter(|&(m, _)| m != j).map(|(_, f)| f).product();
            kf / (j as f64 + 1.0) * rest
        })
        .sum();
    (value, deriv)
}

/// Basis tabulated once at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub basis: LagrangeBasis,
    pub quadrature: QuadratureRule,
    /// `phi[q][i]`: basis `i` at quadrature point `q`.
    pub phi: Vec<Vec<f64>>,
    /// `grad[q][i]`: reference gradient of basis `i` at point `q`.
    pub grad: Vec<Vec<[f64; 2]>>,
}

impl ReferenceElement {
    pub fn new(k: usize, dim: usize, quad_order: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(k, dim)?;
        let quadrature = simplex_quadrature(quad_order, dim)?;
        let phi = quadrature.points.iter().map(|&p| basis.eval(p)).collect();
        let grad = quadrature.points.iter().map(|&p| basis.eval_grad(p)).collect();
        Ok(Self { basis, quadrature, phi, grad })
    }
}

/// Degree-`k` basis with the default volume rule of order `2k + 2`.
pub fn lagrange_basis(k: usize, dim: usize) -> Result<ReferenceElement> {
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(Error::UnsupportedDegree(k));
    }
    ReferenceElement::new(k, dim, 2 * k + 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_and_kronecker() {
        for k in 1..=MAX_DEGREE {
            let tri = LagrangeBasis::new(k, 2).unwrap();
            assert_eq!(tri.len(), (k + 1) * (k + 2) / 2);
            let seg = LagrangeBasis::new(k, 1).unwrap();
            assert_eq!(seg.len(), k + 1);
            for b in [&tri, &seg] {
                for (j, &node) in b.nodes().iter().enumerate() {
                    let v = b.eval(node);
                    for (i, vi) in v.iter().enumerate() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((vi - expect).abs() < 1e-10, "k={k} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn linear_vertex_values() {
        let b = LagrangeBasis::new(1, 2).unwrap();
        assert!((b.eval([0.0, 0.0])[0] - 1.0).abs() < 1e-15);
        assert!(b.eval([1.0, 0.0])[0].abs() < 1e-15);
        let q = LagrangeBasis::new(2, 2).unwrap();
        let s: f64 = q.eval([1.0 / 3.0, 1.0 / 3.0]).iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partition_of_unity_and_gradient_sum() {
        for k in 1..=MAX_DEGREE {
            let r = lagrange_basis(k, 2).unwrap();
            for (phi, grad) in r.phi.iter().zip(&r.grad) {
                assert!((phi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let gx: f64 = grad.iter().map(|g| g[0]).sum();
                let gy: f64 = grad.iter().map(|g| g[1]).sum();
                assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12, "k={k}: {gx} {gy}");
            }
        }
    }

    #[test]
    fn cubic_segment_reproduces_cube() {
        let b = LagrangeBasis::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s: f64 = rng.random();
            let v: f64 = b.eval([s, 0.0]).iter().zip(b.nodes()).map(|(phi, n)| phi * n[0].powi(3)).sum();
            assert!((v - s.powi(3)).abs() < 1e-13);
        }
    }

    #[test]
    fn monomial_interpolation_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..=MAX_DEGREE {
            let b = LagrangeBasis::new(k, 2).unwrap();
            for p in 0..=k as i32 {
                for q in 0..=(k as i32 - p) {
                    for _ in 0..20 {
                        let (x, y): (f64, f64) = (rng.random(), rng.random());
                        let (x, y) = if x + y > 1.0 { (1.0 - x, 1.0 - y) } else { (x, y) };
                        let v: f64 = b
                            .eval([x, y])
                            .iter()
                            .zip(b.nodes())
                            .map(|(phi, n)| phi * n[0].powi(p) * n[1].powi(q))
                            .sum();
                        let exact = x.powi(p) * y.powi(q);
                        assert!((v - exact).abs() <= 1e-10 * exact.abs().max(1.0), "k={k} x^{p}y^{q}");
                    }
                }
            }
        }
    }

    #[test]
    fn face_nodes_ordered_along_face() {
        let b = LagrangeBasis::new(3, 2).unwrap();
        for j in 0..3 {
            let f = b.face_nodes(j);
            assert_eq!(f.len(), 4);
            assert_eq!(b.lattice()[f[0]][j], 3);
            assert_eq!(b.lattice()[f[3]][(j + 1) % 3], 3);
            assert_eq!(b.lattice()[f[1]][(j + 1) % 3], 1);
        }
    }

    #[test]
    fn rejects_bad_degree() {
        assert!(matches!(LagrangeBasis::new(0, 2), Err(Error::UnsupportedDegree(0))));
        assert!(matches!(lagrange_basis(7, 1), Err(Error::UnsupportedDegree(7))));
    }
}

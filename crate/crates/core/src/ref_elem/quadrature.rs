//! Gauss rules on the unit segment and collapsed (Duffy) rules on the
//! reference triangle `(0,0) (1,0) (0,1)`.

use crate::error::{Error, Result};

/// Highest polynomial order any rule is built for.
pub const MAX_ORDER: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates; segment rules use only the first entry.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Total degree integrated exactly.
    pub order: usize,
    pub dim: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 2], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1,1] -> [0,1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * weight;
        w[n - 1 - i] = 0.5 * weight;
    }
    (x, w)
}

/// Rule exact for polynomials of total degree `order` on the unit segment
/// (`dim = 1`) or the reference triangle (`dim = 2`).
pub fn simplex_quadrature(order: usize, dim: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedQuadrature(order));
    }
    match dim {
        1 => {
            let (x, w) = gauss_legendre_01(order / 2 + 1);
            Ok(QuadratureRule { points: x.iter().map(|&s| [s, 0.0]).collect(), weights: w, order, dim })
        }
        2 => {
            let (xu, wu) = gauss_legendre_01((order + 2).div_ceil(2));
            let (xv, wv) = gauss_legendre_01((order + 1).div_ceil(2));
            let mut points = Vec::with_capacity(xu.len() * xv.len());
            let mut weights = Vec::with_capacity(xu.len() * xv.len());
            for (&u, &a) in xu.iter().zip(&wu) {
                for (&v, &b) in xv.iter().zip(&wv) {
                    points.push([u, (1.0 - u) * v]);
                    weights.push(a * b * (1.0 - u));
                }
            }
            Ok(QuadratureRule { points, weights, order, dim })
        }
        _ => Err(Error::InvalidArgument(format!("quadrature dimension {dim}"))),
    }
}

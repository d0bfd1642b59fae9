use crate::driver::SolutionBundle;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::mesh::{Mesh, Point, Subdomain};
use crate::problems::ProblemDefinition;
use crate::ref_elem::{simplex_quadrature, ElementGeometry};

/// `sqrt(sum_e int_e |f_h - f|^2)` over elements tagged `region` (all
/// elements when `None`); `field` takes reference coordinates, `exact`
/// physical ones.
pub fn l2_error<const M: usize>(
    mesh: &Mesh,
    region: Option<Subdomain>,
    order: usize,
    field: impl Fn(usize, [f64; 2]) -> [f64; M] + Sync,
    exact: impl Fn(usize, Point) -> [f64; M] + Sync,
) -> Result<f64> {
    let rule = simplex_quadrature(order, 2)?;
    let parts = map_indexed(true, mesh.n_elements(), |e| -> Result<f64> {
        if region.is_some_and(|r| mesh.elem_subdomain()[e] != r) {
            return Ok(0.0);
        }
        let geom = ElementGeometry::new(mesh.vertices(e))?;
        let mut acc = 0.0;
        for (xi, w) in rule.iter() {
            let (fh, fe) = (field(e, *xi), exact(e, geom.to_physical(*xi)));
            acc += w * geom.det * fh.iter().zip(&fe).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total.sqrt())
}

/// L2 errors of one solve against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub u: f64,
    pub u_cg: f64,
    pub u_hdg: f64,
    /// All Voigt components (gradient components for the scalar problem).
    pub s: f64,
    pub s_cg: f64,
    pub s_hdg: f64,
    /// `u*` on the HDG elements.
    pub ustar: Option<f64>,
    /// `u` on CG elements together with `u*` on HDG elements.
    pub u_post: Option<f64>,
}

/// Quadrature order used for error integrals of a solve.
pub fn error_order(b: &SolutionBundle) -> usize {
    2 * b.params.k_cg.max(b.params.k_hdg + 1) + 2
}

pub fn solution_errors(b: &SolutionBundle, def: &ProblemDefinition) -> Result<ErrorNorms> {
    let (exact, stress) = match (&def.exact, &def.exact_stress) {
        (Some(u), Some(s)) => (u, s),
        _ => return Err(Error::InvalidArgument(format!("problem `{}` has no exact solution", def.name))),
    };
    let order = error_order(b);
    let m = &b.mesh;
    let ue = |e: usize, x: Point| exact(x, b.regions[e]);
    let se = |e: usize, x: Point| stress(x, b.regions[e]);
    let u_in = |r| l2_error(m, r, order, |e, xi| b.value(e, xi), ue);
    let s_in = |r| l2_error(m, r, order, |e, xi| b.stress(e, xi), se);
    let (u_cg, u_hdg) = (u_in(Some(Subdomain::Cg))?, u_in(Some(Subdomain::Hdg))?);
    let (s_cg, s_hdg) = (s_in(Some(Subdomain::Cg))?, s_in(Some(Subdomain::Hdg))?);
    let (ustar, u_post) = if b.ustar.is_some() {
        let star = l2_error(m, Some(Subdomain::Hdg), order, |e, xi| b.value_enhanced(e, xi), ue)?;
        (Some(star), Some(u_cg.hypot(star)))
    } else {
        (None, None)
    };
    Ok(ErrorNorms {
        u: u_cg.hypot(u_hdg),
        u_cg,
        u_hdg,
        s: s_cg.hypot(s_hdg),
        s_cg,
        s_hdg,
        ustar,
        u_post,
    })
}

/// Slopes `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn convergence_rates(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument("need two or more paired errors and sizes".into()));
    }
    if let Some(&bad) = errors.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::NonPositiveError(bad));
    }
    if hs.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidArgument("mesh sizes must be positive".into()));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| rate(e[0], e[1], h[0], h[1]))
        .collect())
}

pub fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// Vertical displacement at `p`.
pub fn tip_displacement(b: &SolutionBundle, p: Point) -> Result<f64> {
    Ok(b.value_at(p)?[1])
}

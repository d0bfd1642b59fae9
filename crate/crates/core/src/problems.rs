//! Model problems: the thermal square, the bimaterial elasticity square and
//! the bimaterial Cook's membrane.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{build_structured, build_structured_mapped, BoundaryKind, Mesh, Point, Rect, Subdomain, SubdomainSpec};
use crate::physics::{MaterialMap, Physics};
use crate::voigt::{elasticity_matrix, Constitutive, Material, PlaneModel};

/// Vector data (the second entry is ignored for scalar problems); the
/// subdomain argument is the physical region the point is evaluated in.
pub type PointFn = Arc<dyn Fn(Point, Subdomain) -> [f64; 2] + Send + Sync>;
/// `D G u` of the exact solution (gradient for the scalar problem).
pub type StressFn = Arc<dyn Fn(Point, Subdomain) -> [f64; 3] + Send + Sync>;
pub type RegionFn = Arc<dyn Fn(Point) -> Subdomain + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    ThermalSquare,
    ElasticitySquare,
    CooksMembrane,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::ThermalSquare => "thermal_square",
            ProblemKind::ElasticitySquare => "elasticity_square",
            ProblemKind::CooksMembrane => "cooks_membrane",
        }
    }

    pub fn physics(self) -> Physics {
        match self {
            ProblemKind::ThermalSquare => Physics::Thermal,
            _ => Physics::Elastic,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermal_square" => Ok(ProblemKind::ThermalSquare),
            "elasticity_square" => Ok(ProblemKind::ElasticitySquare),
            "cooks_membrane" => Ok(ProblemKind::CooksMembrane),
            other => Err(Error::InvalidArgument(format!("unknown problem `{other}`"))),
        }
    }
}

/// How meshes of a given refinement level are generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    /// `base.0 * 2^level` by `base.1 * 2^level` cells.
    Rect { rect: Rect, base: (usize, usize) },
    /// Unit-square grid of `2^(level+1)` cells per side pushed through the
    /// bilinear map onto the membrane.
    Cooks,
}

#[derive(Clone)]
pub struct ProblemDefinition {
    pub name: String,
    pub physics: Physics,
    pub family: MeshFamily,
    /// Tags and boundary labels in mesh-generation coordinates.
    pub spec: SubdomainSpec,
    /// Physical region of a point; selects material and data branches.
    pub region: RegionFn,
    /// Elastic materials of the CG and HDG regions.
    pub materials: Option<[Material; 2]>,
    pub exact: Option<PointFn>,
    pub exact_stress: Option<StressFn>,
    pub source: PointFn,
    pub dirichlet: PointFn,
    pub neumann: PointFn,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("physics", &self.physics)
            .field("family", &self.family)
            .field("materials", &self.materials)
            .finish_non_exhaustive()
    }
}

pub fn region_index(r: Subdomain) -> usize {
    match r {
        Subdomain::Cg => 0,
        Subdomain::Hdg => 1,
    }
}

impl ProblemDefinition {
    pub fn mesh(&self, level: usize) -> Result<Mesh> {
        match self.family {
            MeshFamily::Rect { rect, base } => build_structured(base.0 << level, base.1 << level, rect, &self.spec),
            MeshFamily::Cooks => {
                let n = 2usize << level;
                build_structured_mapped(n, n, Rect::unit(), &self.spec, cooks_map)
            }
        }
    }

    pub fn constitutive(&self, region: Subdomain) -> Result<Constitutive> {
        match (self.physics, &self.materials) {
            (Physics::Thermal, _) => Ok(Constitutive::unit(2)),
            (Physics::Elastic, Some(m)) => Constitutive::elastic(&m[region_index(region)], 2),
            (Physics::Elastic, None) => Err(Error::InvalidArgument("elastic problem without materials".into())),
        }
    }

    /// Element regions of `mesh`, from element barycenters.
    pub fn element_regions(&self, mesh: &Mesh) -> Vec<Subdomain> {
        (0..mesh.n_elements()).map(|e| (self.region)(mesh.barycenter(e))).collect()
    }

    pub fn material_map(&self, regions: &[Subdomain]) -> Result<MaterialMap> {
        let table = vec![self.constitutive(Subdomain::Cg)?, self.constitutive(Subdomain::Hdg)?];
        Ok(MaterialMap::new(table, regions.iter().map(|&r| region_index(r)).collect()))
    }
}

fn zero_fn() -> PointFn {
    Arc::new(|_, _| [0.0, 0.0])
}

fn square() -> Rect {
    Rect::new(-1.0, -1.0, 1.0, 1.0)
}

const THERMAL_A: f64 = PI / 2.0;

/// `u = cos(pi r / 2)`.
pub fn thermal_exact(x: f64, y: f64) -> f64 {
    (THERMAL_A * x.hypot(y)).cos()
}

pub fn thermal_gradient(x: f64, y: f64) -> [f64; 2] {
    let r = x.hypot(y);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let s = -THERMAL_A * (THERMAL_A * r).sin() / r;
    [s * x, s * y]
}

/// `f = -lap u = a^2 cos(a r) + a sin(a r) / r`, with the series
/// `2 a^2 - (2/3) a^4 r^2` near the origin.
pub fn thermal_source(x: f64, y: f64) -> f64 {
    let a = THERMAL_A;
    let r = x.hypot(y);
    if r < 1e-8 {
        return 2.0 * a * a - 2.0 / 3.0 * a.powi(4) * r * r;
    }
    a * a * (a * r).cos() + a * (a * r).sin() / r
}

// Coefficients of the manufactured elastic displacement.
fn elastic_coeffs(m: &Material) -> (f64, f64) {
    let (e, nu) = (m.e, m.nu);
    let a = 2.0 * (1.0 + nu) / e;
    let k = (1.0 + nu) * (1.0 - 2.0 * nu);
    (a, k / (k + nu * e))
}

// p(t) = t sin(pi t) and its first two derivatives.
fn p_terms(t: f64) -> [f64; 3] {
    let (s, c) = (PI * t).sin_cos();
    [t * s, s + PI * t * c, 2.0 * PI * c - PI * PI * t * s]
}

pub fn elasticity_exact(x: f64, y: f64, m: &Material) -> [f64; 2] {
    let (a, b) = elastic_coeffs(m);
    let tp = 2.0 * PI;
    let g = p_terms(x)[0] * p_terms(y)[0];
    [
        a * (tp * y).sin() * ((tp * x).cos() - 1.0) + b * g,
        a * (tp * x).sin() * (1.0 - (tp * y).cos()) + b * g,
    ]
}

/// `grad[i][j] = d u_i / d x_j`.
pub fn elasticity_gradient(x: f64, y: f64, m: &Material) -> [[f64; 2]; 2] {
    let (a, b) = elastic_coeffs(m);
    let tp = 2.0 * PI;
    let (px, py) = (p_terms(x), p_terms(y));
    let (gx, gy) = (px[1] * py[0], px[0] * py[1]);
    let (sx, cx) = (tp * x).sin_cos();
    let (sy, cy) = (tp * y).sin_cos();
    [
        [-a * tp * sy * sx + b * gx, a * tp * cy * (cx - 1.0) + b * gy],
        [a * tp * cx * (1.0 - cy) + b * gx, a * tp * sx * sy + b * gy],
    ]
}

/// Voigt stress `D grad_S u` of the exact displacement.
pub fn elasticity_stress(x: f64, y: f64, m: &Material) -> [f64; 3] {
    let g = elasticity_gradient(x, y, m);
    let d = elasticity_matrix(m, 2).expect("admissible material");
    let eps = nalgebra::Vector3::new(g[0][0], g[1][1], g[0][1] + g[1][0]);
    let s = d.fixed_view::<3, 3>(0, 0) * eps;
    [s[0], s[1], s[2]]
}

/// `f = -grad_S^T D grad_S u` of the exact displacement.
pub fn elasticity_source(x: f64, y: f64, m: &Material) -> [f64; 2] {
    let (a, b) = elastic_coeffs(m);
    let tp = 2.0 * PI;
    let s2 = tp * tp;
    let (px, py) = (p_terms(x), p_terms(y));
    let (gxx, gyy, gxy) = (px[2] * py[0], px[0] * py[2], px[1] * py[1]);
    let (sx, cx) = (tp * x).sin_cos();
    let (sy, cy) = (tp * y).sin_cos();
    let uxx = -a * s2 * sy * cx + b * gxx;
    let uxyy = -a * s2 * sy * (cx - 1.0) + b * gyy;
    let uxxy = -a * s2 * cy * sx + b * gxy;
    let vxx = -a * s2 * sx * (1.0 - cy) + b * gxx;
    let vyy = a * s2 * sx * cy + b * gyy;
    let vxy = a * s2 * cx * sy + b * gxy;
    let d = elasticity_matrix(m, 2).expect("admissible material");
    let (d11, d12, d33) = (d[(0, 0)], d[(0, 1)], d[(2, 2)]);
    [
        -(d11 * uxx + d12 * vxy + d33 * (uxyy + vxy)),
        -(d33 * (uxxy + vxx) + d12 * uxxy + d11 * vyy),
    ]
}

/// Thermal square `[-1,1]^2`, CG for `x > 0`, Dirichlet everywhere.
pub fn problem_thermal_square() -> ProblemDefinition {
    let region: RegionFn = Arc::new(|p: Point| if p[0] > 0.0 { Subdomain::Cg } else { Subdomain::Hdg });
    let r = region.clone();
    let exact: PointFn = Arc::new(|p, _| [thermal_exact(p[0], p[1]), 0.0]);
    ProblemDefinition {
        name: ProblemKind::ThermalSquare.name().into(),
        physics: Physics::Thermal,
        family: MeshFamily::Rect { rect: square(), base: (2, 2) },
        spec: SubdomainSpec::new(move |p| r(p), |_, _| BoundaryKind::Dirichlet),
        region,
        materials: None,
        exact: Some(exact.clone()),
        exact_stress: Some(Arc::new(|p, _| {
            let g = thermal_gradient(p[0], p[1]);
            [g[0], g[1], 0.0]
        })),
        source: Arc::new(|p, _| [thermal_source(p[0], p[1]), 0.0]),
        dirichlet: exact,
        neumann: zero_fn(),
    }
}

pub const ELASTIC_CG_MATERIAL: (f64, f64) = (250.0, 0.3);
pub const ELASTIC_HDG_MATERIAL: (f64, f64) = (25.0, 0.49999);

/// Bimaterial square, CG in the quadrants where `x y > 0`.
pub fn problem_elasticity_square(plane: PlaneModel) -> Result<ProblemDefinition> {
    let mats = [
        Material::new(ELASTIC_CG_MATERIAL.0, ELASTIC_CG_MATERIAL.1, plane)?,
        Material::new(ELASTIC_HDG_MATERIAL.0, ELASTIC_HDG_MATERIAL.1, plane)?,
    ];
    Ok(elasticity_square_with(mats))
}

/// Same layout and exact solution with arbitrary materials.
pub fn elasticity_square_with(mats: [Material; 2]) -> ProblemDefinition {
    let region: RegionFn = Arc::new(|p: Point| if p[0] * p[1] > 0.0 { Subdomain::Cg } else { Subdomain::Hdg });
    let r = region.clone();
    let exact: PointFn = Arc::new(move |p, s| elasticity_exact(p[0], p[1], &mats[region_index(s)]));
    ProblemDefinition {
        name: ProblemKind::ElasticitySquare.name().into(),
        physics: Physics::Elastic,
        family: MeshFamily::Rect { rect: square(), base: (2, 2) },
        spec: SubdomainSpec::new(move |p| r(p), |_, _| BoundaryKind::Dirichlet),
        region,
        materials: Some(mats),
        exact: Some(exact.clone()),
        exact_stress: Some(Arc::new(move |p, s| elasticity_stress(p[0], p[1], &mats[region_index(s)]))),
        source: Arc::new(move |p, s| elasticity_source(p[0], p[1], &mats[region_index(s)])),
        dirichlet: exact,
        neumann: zero_fn(),
    }
}

pub const COOKS_CORNERS: [Point; 4] = [[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]];
pub const COOKS_INNER: [Point; 4] = [[12.0, 20.25], [36.0, 38.75], [36.0, 50.25], [12.0, 38.75]];
pub const COOKS_TIP: Point = [48.0, 60.0];
pub const COOKS_LOAD: f64 = 100.0;

/// Bilinear map of the unit square onto the membrane.
pub fn cooks_map(p: Point) -> Point {
    let [u, v] = p;
    let w = [(1.0 - u) * (1.0 - v), u * (1.0 - v), u * v, (1.0 - u) * v];
    let mut x = [0.0; 2];
    for (wi, c) in w.iter().zip(COOKS_CORNERS) {
        x[0] += wi * c[0];
        x[1] += wi * c[1];
    }
    x
}

fn inside_convex(poly: &[Point; 4], p: Point) -> bool {
    (0..4).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % 4]);
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
    })
}

/// Cook's membrane: stiff compressible CG core inside a soft HDG frame,
/// clamped at `x = 0`, shear load on the right edge.
pub fn problem_cooks_membrane(nu_hdg: f64, plane: PlaneModel) -> Result<ProblemDefinition> {
    if !(nu_hdg < 0.5) {
        return Err(Error::InvalidArgument(format!("nu_hdg must be below 0.5, got {nu_hdg}")));
    }
    let mats = [Material::new(250.0, 0.35, plane)?, Material::new(80.0, nu_hdg, plane)?];
    let right_len = COOKS_CORNERS[2][1] - COOKS_CORNERS[1][1];
    let traction = COOKS_LOAD / right_len;
    let spec = SubdomainSpec::new(
        |p| {
            let inside = (0.25..=0.75).contains(&p[0]) && (0.25..=0.75).contains(&p[1]);
            if inside {
                Subdomain::Cg
            } else {
                Subdomain::Hdg
            }
        },
        |a, b| if a[0] == 0.0 && b[0] == 0.0 { BoundaryKind::Dirichlet } else { BoundaryKind::Neumann },
    );
    Ok(ProblemDefinition {
        name: ProblemKind::CooksMembrane.name().into(),
        physics: Physics::Elastic,
        family: MeshFamily::Cooks,
        spec,
        region: Arc::new(|p| if inside_convex(&COOKS_INNER, p) { Subdomain::Cg } else { Subdomain::Hdg }),
        materials: Some(mats),
        exact: None,
        exact_stress: None,
        source: zero_fn(),
        dirichlet: zero_fn(),
        neumann: Arc::new(move |p, _| if (p[0] - 48.0).abs() < 1e-9 { [0.0, traction] } else { [0.0, 0.0] }),
    })
}

/// Problem by name with the given plane model and HDG Poisson ratio (the
/// latter used by Cook's membrane only).
pub fn problem_by_kind(kind: ProblemKind, plane: PlaneModel, nu_hdg: f64) -> Result<ProblemDefinition> {
    match kind {
        ProblemKind::ThermalSquare => Ok(problem_thermal_square()),
        ProblemKind::ElasticitySquare => problem_elasticity_square(plane),
        ProblemKind::CooksMembrane => problem_cooks_membrane(nu_hdg, plane),
    }
}

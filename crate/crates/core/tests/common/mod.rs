//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod dd;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cghdg::hdg::{face_roles, local_system, HdgTables, TraceDofMap};
use cghdg::mesh::{BoundaryKind, FaceClass, Mesh, Point, Rect, Subdomain, SubdomainSpec};
use cghdg::physics::Physics;
use cghdg::problems::{
    elasticity_source, thermal_source, MeshFamily, PointFn, ProblemDefinition, RegionFn, StressFn,
};
use cghdg::ref_elem::{gauss_legendre_01, ElementGeometry, LagrangeBasis};
use cghdg::voigt::{Material, PlaneModel};

use dd::{Dd, HALF_PI, PI};

pub const FD_STEP: f64 = 1e-5;
pub const THERMAL_SOURCE_TOL: f64 = 1e-5;
pub const ELASTIC_SOURCE_TOL: f64 = 1e-4;
pub const SOURCE_POINTS: usize = 100;

// ---------------------------------------------------------------------------
// Finite-difference source oracles

fn thermal_u(x: Dd, y: Dd) -> Dd {
    (HALF_PI * (x * x + y * y).sqrt()).cos()
}

/// `-lap u` by the five-point stencil in double-double arithmetic.
pub fn fd_thermal_source(x: f64, y: f64) -> f64 {
    let h = FD_STEP;
    let (x, y) = (Dd::new(x), Dd::new(y));
    let (hx, hy) = (Dd::new(h), Dd::new(h));
    let c = thermal_u(x, y) * 4.0;
    let s = thermal_u(x + hx, y) + thermal_u(x - hx, y) + thermal_u(x, y + hy) + thermal_u(x, y - hy);
    (-(s - c) / (h * h)).to_f64()
}

// `x y sin(pi x) sin(pi y)` and the trigonometric part, straight from the
// closed-form displacement.
fn elastic_u(x: Dd, y: Dd, e: f64, nu: f64) -> [Dd; 2] {
    let a = Dd::new(2.0 * (1.0 + nu)) / e;
    let k = Dd::new(1.0 + nu) * Dd::new(1.0 - 2.0 * nu);
    let b = k / (k + Dd::new(nu) * e);
    let two_pi = PI * 2.0;
    let g = x * y * (PI * x).sin() * (PI * y).sin();
    let one = Dd::new(1.0);
    [
        a * (two_pi * y).sin() * ((two_pi * x).cos() - one) + b * g,
        a * (two_pi * x).sin() * (one - (two_pi * y).cos()) + b * g,
    ]
}

/// `(D11, D12, D33)` from Lame parameters.
pub fn lame_matrix(m: &Material) -> (f64, f64, f64) {
    let (e, nu) = (m.e, m.nu);
    let mu = e / (2.0 * (1.0 + nu));
    match m.plane {
        PlaneModel::Strain => {
            let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            (lambda + 2.0 * mu, lambda, mu)
        }
        PlaneModel::Stress => (e / (1.0 - nu * nu), e * nu / (1.0 - nu * nu), mu),
    }
}

fn fd_stress(x: Dd, y: Dd, m: &Material) -> [Dd; 3] {
    let h = Dd::new(FD_STEP);
    let u = |x, y| elastic_u(x, y, m.e, m.nu);
    let (px, mx, py, my) = (u(x + h, y), u(x - h, y), u(x, y + h), u(x, y - h));
    let two_h = FD_STEP * 2.0;
    let ux = (px[0] - mx[0]) / two_h;
    let vx = (px[1] - mx[1]) / two_h;
    let uy = (py[0] - my[0]) / two_h;
    let vy = (py[1] - my[1]) / two_h;
    let (d11, d12, d33) = lame_matrix(m);
    [ux * d11 + vy * d12, ux * d12 + vy * d11, (uy + vx) * d33]
}

/// `-div sigma` by nested central differences.
pub fn fd_elastic_source(x: f64, y: f64, m: &Material) -> [f64; 2] {
    let h = Dd::new(FD_STEP);
    let (x, y) = (Dd::new(x), Dd::new(y));
    let two_h = FD_STEP * 2.0;
    let (sxp, sxm) = (fd_stress(x + h, y, m), fd_stress(x - h, y, m));
    let (syp, sym) = (fd_stress(x, y + h, m), fd_stress(x, y - h, m));
    let fx = (sxp[0] - sxm[0]) / two_h + (syp[2] - sym[2]) / two_h;
    let fy = (sxp[2] - sxm[2]) / two_h + (syp[1] - sym[1]) / two_h;
    [-fx.to_f64(), -fy.to_f64()]
}

/// Worst relative deviation of `thermal_source` from the stencil at
/// seeded random points of `[-1,1]^2` plus points close to the origin.
pub fn thermal_source_defect(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Point> = (0..SOURCE_POINTS).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    pts.extend([[0.0, 0.0], [1e-9, 0.0], [0.0, -3e-9], [1e-7, 1e-7], [-2e-4, 1e-4]]);
    pts.iter()
        .map(|p| {
            let fd = fd_thermal_source(p[0], p[1]);
            (thermal_source(p[0], p[1]) - fd).abs() / fd.abs()
        })
        .fold(0.0, f64::max)
}

/// Worst relative (Euclidean) deviation of `elasticity_source` at seeded
/// points of each quadrant-type subdomain of the square.
pub fn elastic_source_defect(seed: u64, plane: PlaneModel) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stiff = Material::new(250.0, 0.3, plane).unwrap();
    let soft = Material::new(25.0, 0.49999, plane).unwrap();
    let mut worst: f64 = 0.0;
    // stiff material on quadrants (-,-) and (+,+), soft elsewhere
    for (m, same_sign) in [(stiff, true), (soft, false)] {
        for _ in 0..SOURCE_POINTS {
            let x: f64 = rng.random_range(-1.0..1.0);
            let mut y: f64 = rng.random_range(0.0..1.0);
            if (x > 0.0) != same_sign {
                y = -y;
            }
            let fd = fd_elastic_source(x, y, &m);
            let f = elasticity_source(x, y, &m);
            let d = (f[0] - fd[0]).hypot(f[1] - fd[1]);
            worst = worst.max(d / fd[0].hypot(fd[1]));
        }
    }
    worst
}

/// Defects of both source oracles, computed once per process.
pub fn source_defects() -> (f64, f64, f64) {
    static DEFECTS: OnceLock<(f64, f64, f64)> = OnceLock::new();
    *DEFECTS.get_or_init(|| {
        (
            thermal_source_defect(11),
            elastic_source_defect(12, PlaneModel::Strain),
            elastic_source_defect(13, PlaneModel::Stress),
        )
    })
}

/// Solver suites call this first and refuse to run when it fails.
pub fn source_oracles_pass() -> bool {
    let (t, es, ep) = source_defects();
    t <= THERMAL_SOURCE_TOL && es <= ELASTIC_SOURCE_TOL && ep <= ELASTIC_SOURCE_TOL
}

// ---------------------------------------------------------------------------
// Polynomial patch problems

/// Sum of `c x^i y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<(i32, i32, f64)>);

impl Poly {
    pub fn random(degree: i32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for i in 0..=degree {
            for j in 0..=degree - i {
                terms.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        Poly(terms)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.0.iter().map(|&(i, j, c)| c * p[0].powi(i) * p[1].powi(j)).sum()
    }

    pub fn dx(&self) -> Poly {
        Poly(self.0.iter().filter(|t| t.0 > 0).map(|&(i, j, c)| (i - 1, j, c * i as f64)).collect())
    }

    pub fn dy(&self) -> Poly {
        Poly(self.0.iter().filter(|t| t.1 > 0).map(|&(i, j, c)| (i, j - 1, c * j as f64)).collect())
    }
}

fn split_region() -> RegionFn {
    Arc::new(|p: Point| if p[0] > 0.0 { Subdomain::Cg } else { Subdomain::Hdg })
}

fn patch_definition(
    physics: Physics,
    materials: Option<[Material; 2]>,
    exact: PointFn,
    stress: StressFn,
    source: PointFn,
) -> ProblemDefinition {
    let region = split_region();
    let r = region.clone();
    ProblemDefinition {
        name: "patch".into(),
        physics,
        family: MeshFamily::Rect { rect: Rect::new(-1.0, -1.0, 1.0, 1.0), base: (2, 2) },
        spec: SubdomainSpec::new(move |p| r(p), |_, _| BoundaryKind::Dirichlet),
        region,
        materials,
        exact: Some(exact.clone()),
        exact_stress: Some(stress),
        source,
        dirichlet: exact,
        neumann: Arc::new(|_, _| [0.0, 0.0]),
    }
}

/// `-lap u = f` with polynomial `u`, CG for `x > 0`.
pub fn thermal_poly_problem(u: Poly) -> ProblemDefinition {
    let (ux, uy) = (u.dx(), u.dy());
    let (uxx, uyy) = (ux.dx(), uy.dy());
    let exact: PointFn = Arc::new(move |p, _| [u.eval(p), 0.0]);
    let stress: StressFn = Arc::new(move |p, _| [ux.eval(p), uy.eval(p), 0.0]);
    let source: PointFn = Arc::new(move |p, _| [-(uxx.eval(p) + uyy.eval(p)), 0.0]);
    patch_definition(Physics::Thermal, None, exact, stress, source)
}

/// Elasticity with polynomial displacement `(u, v)` and one material on
/// both sides.
pub fn elastic_poly_problem(u: Poly, v: Poly, m: Material) -> ProblemDefinition {
    let (d11, d12, d33) = lame_matrix(&m);
    let (ux, uy, vx, vy) = (u.dx(), u.dy(), v.dx(), v.dy());
    let (uxx, uxy, uyy) = (ux.dx(), ux.dy(), uy.dy());
    let (vxx, vxy, vyy) = (vx.dx(), vx.dy(), vy.dy());
    let exact: PointFn = Arc::new(move |p, _| [u.eval(p), v.eval(p)]);
    let stress: StressFn = Arc::new(move |p, _| {
        let (a, b) = (ux.eval(p), vy.eval(p));
        [d11 * a + d12 * b, d12 * a + d11 * b, d33 * (uy.eval(p) + vx.eval(p))]
    });
    let source: PointFn = Arc::new(move |p, _| {
        let (uxx, uxy, uyy) = (uxx.eval(p), uxy.eval(p), uyy.eval(p));
        let (vxx, vxy, vyy) = (vxx.eval(p), vxy.eval(p), vyy.eval(p));
        [
            -(d11 * uxx + d12 * vxy + d33 * (uyy + vxy)),
            -(d33 * (uxy + vxx) + d12 * uxy + d11 * vyy),
        ]
    });
    patch_definition(Physics::Elastic, Some([m, m]), exact, stress, source)
}

// ---------------------------------------------------------------------------
// Monolithic HDG oracle

/// Element unknowns `(L, u)` and traces from one dense solve of the
/// uncondensed system.
#[derive(Debug, Clone)]
pub struct Monolithic {
    pub l: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
}

/// Solves every element equation together with the trace equations
/// `-R^T x + tau M g = <mu, t_N>` on a mesh whose elements are all HDG.
pub fn monolithic_hdg(def: &ProblemDefinition, mesh: &Mesh, k: usize, tau: f64) -> Monolithic {
    let physics = def.physics;
    let nc = physics.ncomp();
    let regions = def.element_regions(mesh);
    let mats = def.material_map(&regions).unwrap();
    let tables = HdgTables::new(k).unwrap();
    let traces = TraceDofMap::new(mesh, k, nc);
    let systems: Vec<_> = (0..mesh.n_elements())
        .map(|e| {
            assert_eq!(mesh.elem_subdomain()[e], Subdomain::Hdg);
            let geom = ElementGeometry::new(mesh.vertices(e)).unwrap();
            let r = regions[e];
            local_system(
                physics,
                &tables,
                &geom,
                mats.get(e),
                tau,
                face_roles(mesh, &traces, e),
                |x| (def.source)(x, r),
                |x| (def.dirichlet)(x, r),
            )
        })
        .collect();
    let mut offsets = vec![0];
    for s in &systems {
        offsets.push(offsets.last().unwrap() + s.a.nrows());
    }
    let t0 = *offsets.last().unwrap();
    let n = t0 + traces.n_dofs();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (e, s) in systems.iter().enumerate() {
        let o = offsets[e];
        let nl = s.a.nrows();
        m.view_mut((o, o), (nl, nl)).copy_from(&s.a);
        rhs.rows_mut(o, nl).copy_from(&s.b);
        let cols: Vec<usize> = s
            .trace_faces
            .iter()
            .flat_map(|&j| traces.face_dofs(mesh.elem_faces()[e][j]).unwrap())
            .map(|d| t0 + d)
            .collect();
        for (c, &gc) in cols.iter().enumerate() {
            for i in 0..nl {
                m[(o + i, gc)] -= s.r[(i, c)];
                m[(gc, o + i)] -= s.r[(i, c)];
            }
            for (c2, &gc2) in cols.iter().enumerate() {
                m[(gc, gc2)] += s.trace_mass[(c, c2)];
            }
        }
    }
    // Neumann loads with the trace basis read from node 0 to node 1
    let basis = LagrangeBasis::new(k, 1).unwrap();
    let (qp, qw) = gauss_legendre_01(k + 3);
    for (f, class) in mesh.face_class().iter().enumerate() {
        if *class != FaceClass::Neumann {
            continue;
        }
        let face = &mesh.faces()[f];
        let (a, b) = (mesh.nodes()[face.nodes[0]], mesh.nodes()[face.nodes[1]]);
        let len = mesh.face_length(f);
        let dofs = traces.face_dofs(f).unwrap();
        for (s, w) in qp.iter().zip(&qw) {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let t = (def.neumann)(x, regions[face.left]);
            for (i, mu) in basis.eval([*s, 0.0]).iter().enumerate() {
                for c in 0..nc {
                    rhs[t0 + dofs.start + i * nc + c] += w * len * mu * t[c];
                }
            }
        }
    }
    let x = m.lu().solve(&rhs).expect("nonsingular monolithic system");
    let (mut l, mut u) = (Vec::new(), Vec::new());
    for (e, s) in systems.iter().enumerate() {
        let o = offsets[e];
        l.push(x.as_slice()[o..o + s.n_l].to_vec());
        u.push(x.as_slice()[o + s.n_l..offsets[e + 1]].to_vec());
    }
    Monolithic { l, u, trace: x.as_slice()[t0..].to_vec() }
}

// ---------------------------------------------------------------------------
// Plain P1 reference solver

/// Linear Lagrange solve of `-lap u = f` with constant `f` and nodal
/// Dirichlet values on every boundary node; returns nodal values.
pub fn plain_p1_thermal(mesh: &Mesh, f: f64, u_d: impl Fn(Point) -> f64) -> Vec<f64> {
    let n = mesh.nodes().len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for tri in mesh.elements() {
        let p = tri.map(|i| mesh.nodes()[i]);
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        // gradient of the hat function at vertex i is (y_j - y_k, x_k - x_j) / 2A
        let g: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let (j, l) = ((i + 1) % 3, (i + 2) % 3);
                [(p[j][1] - p[l][1]) / area2, (p[l][0] - p[j][0]) / area2]
            })
            .collect();
        let area = area2.abs() / 2.0;
        for i in 0..3 {
            rhs[tri[i]] += f * area / 3.0;
            for j in 0..3 {
                k[(tri[i], tri[j])] += area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    let mut fixed = vec![false; n];
    for face in mesh.faces().iter().filter(|f| f.right.is_none()) {
        for &v in &face.nodes {
            fixed[v] = true;
        }
    }
    for v in 0..n {
        if fixed[v] {
            let g = u_d(mesh.nodes()[v]);
            for r in 0..n {
                if !fixed[r] {
                    rhs[r] -= k[(r, v)] * g;
                }
            }
        }
    }
    for v in 0..n {
        if fixed[v] {
            k.row_mut(v).fill(0.0);
            k.column_mut(v).fill(0.0);
            k[(v, v)] = 1.0;
            rhs[v] = u_d(mesh.nodes()[v]);
        }
    }
    k.lu().solve(&rhs).unwrap().as_slice().to_vec()
}

/// Largest entrywise difference divided by the largest magnitude in `want`.
pub fn rel_diff(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.iter().zip(want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

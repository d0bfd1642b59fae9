//! Continuous Galerkin subdomain: dof numbering, element operators and the
//! Nitsche interface terms against the HDG trace.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::hdg::TraceDofMap;
use crate::linsys::TripletList;
use crate::mesh::{FaceClass, Mesh, Point, Subdomain};
use crate::physics::{MaterialMap, Physics};
use crate::ref_elem::{
    map_physical, simplex_quadrature, ElementGeometry, LagrangeBasis, MappedElement, QuadratureRule,
    ReferenceElement,
};

/// Data evaluated per element at a physical point.
pub type ElemFn<'a> = &'a (dyn Fn(usize, Point) -> [f64; 2] + Sync);

/// Volume and face tables for one CG degree.
#[derive(Debug, Clone)]
pub struct CgTables {
    pub vol: ReferenceElement,
    pub face_rule: QuadratureRule,
    /// `face_phi[j][q][i]`: basis `i` at point `q` of local face `j`.
    pub face_phi: [Vec<Vec<f64>>; 3],
}

impl CgTables {
    pub fn new(k: usize) -> Result<Self> {
        let vol = ReferenceElement::new(k, 2, 2 * k + 2)?;
        let face_rule = simplex_quadrature(2 * k + 2, 1)?;
        let face_phi = std::array::from_fn(|j| {
            face_rule.points.iter().map(|p| vol.basis.eval(ElementGeometry::face_ref_point(j, p[0]))).collect()
        });
        Ok(Self { vol, face_rule, face_phi })
    }

    pub fn degree(&self) -> usize {
        self.vol.basis.degree()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Vertex(usize),
    /// Edge endpoints (ascending) and the lattice weight of the first one.
    Edge(usize, usize, usize),
    Interior(usize, usize),
}

/// Global numbering of CG nodes and dofs; dof = node * ncomp + component.
#[derive(Debug, Clone)]
pub struct DofMapCG {
    ncomp: usize,
    elem_nodes: Vec<Vec<usize>>,
    node_coords: Vec<Point>,
    dirichlet: Vec<Option<f64>>,
}

impl DofMapCG {
    /// Numbers the nodes of every CG element of `mesh` and flags dofs on
    /// Dirichlet faces with `u_D(element, x)`.
    pub fn new(mesh: &Mesh, basis: &LagrangeBasis, ncomp: usize, u_d: ElemFn) -> Result<Self> {
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut node_coords = Vec::new();
        let mut elem_nodes = vec![Vec::new(); mesh.n_elements()];
        for e in 0..mesh.n_elements() {
            if mesh.elem_subdomain()[e] != Subdomain::Cg {
                continue;
            }
            let tri = mesh.elements()[e];
            let geom = ElementGeometry::new(mesh.vertices(e))
                .map_err(|_| Error::DegenerateElement { element: e, area: 0.0 })?;
            let mut nodes = Vec::with_capacity(basis.len());
            for (i, lat) in basis.lattice().iter().enumerate() {
                let nz: Vec<usize> = (0..3).filter(|&v| lat[v] > 0).collect();
                let key = match nz.len() {
                    1 => NodeKey::Vertex(tri[nz[0]]),
                    2 => {
                        let (a, b) = (nz[0], nz[1]);
                        if tri[a] < tri[b] {
                            NodeKey::Edge(tri[a], tri[b], lat[a])
                        } else {
                            NodeKey::Edge(tri[b], tri[a], lat[b])
                        }
                    }
                    _ => NodeKey::Interior(e, i),
                };
                let id = *index.entry(key).or_insert_with(|| {
                    node_coords.push(geom.to_physical(basis.nodes()[i]));
                    node_coords.len() - 1
                });
                nodes.push(id);
            }
            elem_nodes[e] = nodes;
        }
        let mut dirichlet = vec![None; node_coords.len() * ncomp];
        for e in 0..mesh.n_elements() {
            if elem_nodes[e].is_empty() {
                continue;
            }
            for j in 0..3 {
                if mesh.face_class()[mesh.elem_faces()[e][j]] != FaceClass::Dirichlet {
                    continue;
                }
                for i in basis.face_nodes(j) {
                    let node = elem_nodes[e][i];
                    if dirichlet[node * ncomp].is_none() {
                        let g = u_d(e, node_coords[node]);
                        for c in 0..ncomp {
                            dirichlet[node * ncomp + c] = Some(g[c]);
                        }
                    }
                }
            }
        }
        Ok(Self { ncomp, elem_nodes, node_coords, dirichlet })
    }

    pub fn n_dofs(&self) -> usize {
        self.node_coords.len() * self.ncomp
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn is_cg(&self, e: usize) -> bool {
        !self.elem_nodes[e].is_empty()
    }

    pub fn elem_nodes(&self, e: usize) -> &[usize] {
        &self.elem_nodes[e]
    }

    pub fn elem_dofs(&self, e: usize) -> Vec<usize> {
        let nc = self.ncomp;
        self.elem_nodes[e].iter().flat_map(|&n| (0..nc).map(move |c| n * nc + c)).collect()
    }

    pub fn node_coord(&self, n: usize) -> Point {
        self.node_coords[n]
    }

    pub fn dirichlet(&self) -> &[Option<f64>] {
        &self.dirichlet
    }
}

/// `int G^T D G` over one element.
pub fn element_stiffness(physics: Physics, me: &MappedElement, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = physics.ncomp() * me.grads[0].len();
    let mut k = DMatrix::zeros(n, n);
    for (grads, &w) in me.grads.iter().zip(&me.weights) {
        let g = physics.grad_op(grads);
        k += (g.transpose() * d * &g) * w;
    }
    k
}

/// `int phi f` over one element.
pub fn element_load(physics: Physics, reference: &ReferenceElement, me: &MappedElement, f: impl Fn(Point) -> [f64; 2]) -> DVector<f64> {
    let nc = physics.ncomp();
    let mut v = DVector::zeros(nc * reference.basis.len());
    for ((phi, &w), &x) in reference.phi.iter().zip(&me.weights).zip(&me.points) {
        let fx = f(x);
        for (a, p) in phi.iter().enumerate() {
            for c in 0..nc {
                v[a * nc + c] += w * p * fx[c];
            }
        }
    }
    v
}

/// `int_face phi t` over local face `j`.
pub fn face_load(physics: Physics, tables: &CgTables, geom: &ElementGeometry, j: usize, t: impl Fn(Point) -> [f64; 2]) -> DVector<f64> {
    let nc = physics.ncomp();
    let mut v = DVector::zeros(nc * tables.vol.basis.len());
    let len = geom.face_lengths[j];
    for ((p, w), phi) in tables.face_rule.iter().zip(&tables.face_phi[j]) {
        let x = geom.to_physical(ElementGeometry::face_ref_point(j, p[0]));
        let tx = t(x);
        for (a, ph) in phi.iter().enumerate() {
            for c in 0..nc {
                v[a * nc + c] += w * len * ph * tx[c];
            }
        }
    }
    v
}

/// Nitsche contributions of one interface face.
#[derive(Debug, Clone)]
pub struct NitscheBlocks {
    /// CG rows, CG columns.
    pub cc: DMatrix<f64>,
    /// CG rows, trace columns; the trace-row block is its transpose.
    pub ct: DMatrix<f64>,
    /// Trace rows, trace columns.
    pub tt: DMatrix<f64>,
}

/// Interface terms on local face `j` of a CG element. The trace is
/// parametrized from `ends[0]` to `ends[1]`; the normal is outward from the
/// CG element.
#[allow(clippy::too_many_arguments)]
pub fn nitsche_face(
    physics: Physics,
    cg_basis: &LagrangeBasis,
    trace_basis: &LagrangeBasis,
    rule: &QuadratureRule,
    geom: &ElementGeometry,
    j: usize,
    ends: [Point; 2],
    d: &DMatrix<f64>,
    gamma: f64,
) -> Result<NitscheBlocks> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("Nitsche parameter must be positive, got {gamma}")));
    }
    let nc = physics.ncomp();
    let (nb, nt) = (nc * cg_basis.len(), nc * trace_basis.len());
    let h = (ends[1][0] - ends[0][0]).hypot(ends[1][1] - ends[0][1]);
    let pen = gamma / h;
    let ntr = physics.normal_op(geom.normals[j]).transpose() * d;
    let mut cc = DMatrix::zeros(nb, nb);
    let mut ct = DMatrix::zeros(nb, nt);
    let mut tt = DMatrix::zeros(nt, nt);
    for (p, w) in rule.iter() {
        let s = p[0];
        let x = [ends[0][0] + s * (ends[1][0] - ends[0][0]), ends[0][1] + s * (ends[1][1] - ends[0][1])];
        let xi = geom.to_reference(x);
        let phi = physics.value_op(&cg_basis.eval(xi));
        let grads: Vec<[f64; 2]> = cg_basis.eval_grad(xi).into_iter().map(|g| geom.phys_grad(g)).collect();
        let tr = &ntr * physics.grad_op(&grads);
        let psi = physics.value_op(&trace_basis.eval([s, 0.0]));
        let wh = w * h;
        let phi_t = phi.transpose();
        let tr_t = tr.transpose();
        cc += (&phi_t * &phi * pen - &phi_t * &tr - &tr_t * &phi) * wh;
        ct += (&tr_t * &psi - &phi_t * &psi * pen) * wh;
        tt += (psi.transpose() * &psi) * (pen * wh);
    }
    Ok(NitscheBlocks { cc, ct, tt })
}

// Element dofs, stiffness and load.
type ElementBlock = (Vec<usize>, DMatrix<f64>, DVector<f64>);

/// Adds the CG stiffness, loads and Dirichlet constraints to `out`, whose
/// first `dofs.n_dofs()` indices are the CG dofs.
#[allow(clippy::too_many_arguments)]
pub fn assemble_cg(
    physics: Physics,
    mesh: &Mesh,
    dofs: &DofMapCG,
    tables: &CgTables,
    mats: &MaterialMap,
    source: ElemFn,
    neumann: ElemFn,
    out: &mut TripletList,
    parallel: bool,
) -> Result<()> {
    let blocks = map_indexed(parallel, mesh.n_elements(), |e| -> Result<Option<ElementBlock>> {
        if !dofs.is_cg(e) {
            return Ok(None);
        }
        let me = map_physical(mesh.vertices(e), &tables.vol)
            .map_err(|_| Error::DegenerateElement { element: e, area: 0.0 })?;
        let k = element_stiffness(physics, &me, &mats.get(e).d);
        let mut f = element_load(physics, &tables.vol, &me, |x| source(e, x));
        for j in 0..3 {
            if mesh.face_class()[mesh.elem_faces()[e][j]] == FaceClass::Neumann {
                f += face_load(physics, tables, &me.geometry, j, |x| neumann(e, x));
            }
        }
        Ok(Some((dofs.elem_dofs(e), k, f)))
    });
    for b in blocks {
        if let Some((d, k, f)) = b? {
            out.add_block(&d, &d, &k);
            out.add_vector(&d, f.as_slice());
        }
    }
    for (i, g) in dofs.dirichlet().iter().enumerate() {
        if let Some(g) = g {
            out.fix(i, *g);
        }
    }
    Ok(())
}

/// Adds the Nitsche interface terms. CG dofs start at 0, trace dofs at
/// `trace_offset`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_nitsche(
    physics: Physics,
    mesh: &Mesh,
    dofs: &DofMapCG,
    cg_basis: &LagrangeBasis,
    traces: &TraceDofMap,
    trace_basis: &LagrangeBasis,
    trace_offset: usize,
    mats: &MaterialMap,
    gamma: f64,
    out: &mut TripletList,
    parallel: bool,
) -> Result<()> {
    let order = 2 * cg_basis.degree().max(trace_basis.degree()) + 2;
    let rule = simplex_quadrature(order, 1)?;
    let interface: Vec<usize> =
        (0..mesh.faces().len()).filter(|&f| mesh.face_class()[f] == FaceClass::Interface).collect();
    let blocks = map_indexed(parallel, interface.len(), |i| -> Result<_> {
        let f = interface[i];
        let (c, _) = mesh.interface_sides(f).ok_or(Error::NoInterface)?;
        let j = mesh.local_face(c, f).expect("face belongs to element");
        let face = &mesh.faces()[f];
        let ends = [mesh.nodes()[face.nodes[0]], mesh.nodes()[face.nodes[1]]];
        let geom = ElementGeometry::new(mesh.vertices(c))
            .map_err(|_| Error::DegenerateElement { element: c, area: 0.0 })?;
        let blocks = nitsche_face(physics, cg_basis, trace_basis, &rule, &geom, j, ends, &mats.get(c).d, gamma)?;
        let tdofs: Vec<usize> = traces
            .face_dofs(f)
            .ok_or_else(|| Error::InvalidMesh(format!("interface face {f} has no trace dofs")))?
            .map(|t| t + trace_offset)
            .collect();
        Ok((dofs.elem_dofs(c), tdofs, blocks))
    });
    for b in blocks {
        let (cd, td, nb) = b?;
        out.add_block(&cd, &cd, &nb.cc);
        out.add_block(&cd, &td, &nb.ct);
        out.add_block(&td, &cd, &nb.ct.transpose());
        out.add_block(&td, &td, &nb.tt);
    }
    Ok(())
}

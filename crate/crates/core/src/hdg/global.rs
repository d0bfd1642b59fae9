use nalgebra::DVector;

use super::local::{local_system, FaceRole, LocalSolver};
use super::{HdgTables, TraceDofMap};
use crate::cg::ElemFn;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::linsys::TripletList;
use crate::mesh::{FaceClass, Mesh, Subdomain};
use crate::physics::{MaterialMap, Physics};
use crate::ref_elem::ElementGeometry;

/// Everything the HDG element loops read.
#[derive(Clone, Copy)]
pub struct HdgContext<'a> {
    pub physics: Physics,
    pub mesh: &'a Mesh,
    pub traces: &'a TraceDofMap,
    pub tables: &'a HdgTables,
    pub mats: &'a MaterialMap,
    pub tau: f64,
    pub source: ElemFn<'a>,
    pub dirichlet: ElemFn<'a>,
    pub neumann: ElemFn<'a>,
}

/// Elementwise HDG fields, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HdgElementField {
    /// Mixed variable `L = -D^{1/2} G u`, `node * nstrain + row`.
    pub l: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn face_roles(mesh: &Mesh, traces: &TraceDofMap, e: usize) -> [FaceRole; 3] {
    let tri = mesh.elements()[e];
    std::array::from_fn(|j| {
        let f = mesh.elem_faces()[e][j];
        if traces.has_trace(f) {
            FaceRole::Trace { reversed: tri[j] != mesh.faces()[f].nodes[0] }
        } else {
            FaceRole::Dirichlet
        }
    })
}

/// Global trace dofs (without offset) of an element, in solver order.
pub fn element_trace_dofs(mesh: &Mesh, traces: &TraceDofMap, solver: &LocalSolver, e: usize) -> Vec<usize> {
    solver
        .trace_faces
        .iter()
        .flat_map(|&j| traces.face_dofs(mesh.elem_faces()[e][j]).expect("trace face"))
        .collect()
}

pub fn build_local_solvers(ctx: &HdgContext, parallel: bool) -> Result<Vec<Option<LocalSolver>>> {
    if !(ctx.tau > 0.0) {
        return Err(Error::InvalidArgument(format!("stabilization must be positive, got {}", ctx.tau)));
    }
    let mesh = ctx.mesh;
    map_indexed(parallel, mesh.n_elements(), |e| {
        if mesh.elem_subdomain()[e] != Subdomain::Hdg {
            return Ok(None);
        }
        let geom = ElementGeometry::new(mesh.vertices(e)).map_err(|_| Error::DegenerateElement { element: e, area: 0.0 })?;
        let sys = local_system(
            ctx.physics,
            ctx.tables,
            &geom,
            ctx.mats.get(e),
            ctx.tau,
            face_roles(mesh, ctx.traces, e),
            |x| (ctx.source)(e, x),
            |x| (ctx.dirichlet)(e, x),
        );
        LocalSolver::new(&sys, e).map(Some)
    })
    .into_iter()
    .collect()
}

/// Adds condensed element blocks and Neumann loads at trace rows
/// `offset + trace dof`.
pub fn assemble_hdg(ctx: &HdgContext, solvers: &[Option<LocalSolver>], offset: usize, out: &mut TripletList) -> Result<()> {
    let mesh = ctx.mesh;
    let nc = ctx.physics.ncomp();
    for (e, s) in solvers.iter().enumerate() {
        let Some(s) = s else { continue };
        let dofs: Vec<usize> = element_trace_dofs(mesh, ctx.traces, s, e).into_iter().map(|d| d + offset).collect();
        out.add_block(&dofs, &dofs, &s.k);
        out.add_vector(&dofs, s.f.as_slice());
        for j in 0..3 {
            let f = mesh.elem_faces()[e][j];
            if mesh.face_class()[f] != FaceClass::Neumann {
                continue;
            }
            let face = &mesh.faces()[f];
            let (p0, p1) = (mesh.nodes()[face.nodes[0]], mesh.nodes()[face.nodes[1]]);
            let len = mesh.face_length(f);
            let range = ctx.traces.face_dofs(f).expect("Neumann faces carry traces");
            for (q, (p, w)) in ctx.tables.face_rule.iter().enumerate() {
                let s = p[0];
                let x = [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
                let t = (ctx.neumann)(e, x);
                for (i, mu) in ctx.tables.trace_phi[0][q].iter().enumerate() {
                    for c in 0..nc {
                        out.add_rhs(offset + range.start + i * nc + c, w * len * mu * t[c]);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Recovers `(L, u)` on every HDG element from the trace vector.
pub fn reconstruct(
    ctx: &HdgContext,
    solvers: &[Option<LocalSolver>],
    trace: &[f64],
    parallel: bool,
) -> Vec<Option<HdgElementField>> {
    let mesh = ctx.mesh;
    map_indexed(parallel, solvers.len(), |e| {
        let s = solvers[e].as_ref()?;
        let g = DVector::from_iterator(
            s.z.ncols(),
            element_trace_dofs(mesh, ctx.traces, s, e).into_iter().map(|d| trace[d]),
        );
        let x = s.solve(&g);
        Some(HdgElementField { l: x.as_slice()[..s.n_l].to_vec(), u: x.as_slice()[s.n_l..].to_vec() })
    })
}

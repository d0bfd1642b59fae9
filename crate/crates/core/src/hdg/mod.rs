//! Hybridizable discontinuous Galerkin subdomain: trace numbering, local
//! solvers with static condensation, condensed global assembly, field
//! reconstruction and the superconvergent elasticity postprocess.

mod global;
mod local;
mod postprocess;

pub use global::{
    assemble_hdg, build_local_solvers, element_trace_dofs, face_roles, reconstruct, HdgContext, HdgElementField,
};
pub use local::{local_system, FaceRole, LocalSolver, LocalSystem};
pub use postprocess::{postprocess_elastic, PostprocessTables, Postprocessed};

use std::ops::Range;

use crate::error::Result;
use crate::mesh::{FaceClass, Mesh, Subdomain};
use crate::ref_elem::{simplex_quadrature, ElementGeometry, LagrangeBasis, QuadratureRule, ReferenceElement};

/// One block of `(k + 1) * ncomp` trace dofs per face touching the HDG
/// subdomain that is not Dirichlet. Within a block the index is
/// `node * ncomp + component`, nodes ordered from `face.nodes[0]` to
/// `face.nodes[1]`.
#[derive(Debug, Clone)]
pub struct TraceDofMap {
    degree: usize,
    ncomp: usize,
    offsets: Vec<Option<usize>>,
    n_dofs: usize,
}

impl TraceDofMap {
    pub fn new(mesh: &Mesh, degree: usize, ncomp: usize) -> Self {
        let per_face = (degree + 1) * ncomp;
        let mut n_dofs = 0;
        let offsets = mesh
            .faces()
            .iter()
            .zip(mesh.face_class())
            .map(|(face, class)| {
                let touches_hdg = std::iter::once(face.left)
                    .chain(face.right)
                    .any(|e| mesh.elem_subdomain()[e] == Subdomain::Hdg);
                let traced = matches!(class, FaceClass::HdgInterior | FaceClass::Interface | FaceClass::Neumann);
                (touches_hdg && traced).then(|| {
                    n_dofs += per_face;
                    n_dofs - per_face
                })
            })
            .collect();
        Self { degree, ncomp, offsets, n_dofs }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn per_face(&self) -> usize {
        (self.degree + 1) * self.ncomp
    }

    pub fn has_trace(&self, f: usize) -> bool {
        self.offsets[f].is_some()
    }

    pub fn face_dofs(&self, f: usize) -> Option<Range<usize>> {
        self.offsets[f].map(|o| o..o + self.per_face())
    }
}

/// Reference tables for one HDG degree.
#[derive(Debug, Clone)]
pub struct HdgTables {
    pub vol: ReferenceElement,
    pub face_rule: QuadratureRule,
    /// `face_phi[j][q][i]`: volume basis `i` at point `q` of local face `j`.
    pub face_phi: [Vec<Vec<f64>>; 3],
    pub trace: LagrangeBasis,
    /// `trace_phi[r][q][i]`: trace basis at `s = t` (`r = 0`) or `s = 1 - t`
    /// (`r = 1`) for face parameter `t` of point `q`.
    pub trace_phi: [Vec<Vec<f64>>; 2],
}

impl HdgTables {
    pub fn new(k: usize) -> Result<Self> {
        let vol = ReferenceElement::new(k, 2, 2 * k + 2)?;
        let face_rule = simplex_quadrature(2 * k + 2, 1)?;
        let trace = LagrangeBasis::new(k, 1)?;
        let face_phi = std::array::from_fn(|j| {
            face_rule.points.iter().map(|p| vol.basis.eval(ElementGeometry::face_ref_point(j, p[0]))).collect()
        });
        let trace_phi = [
            face_rule.points.iter().map(|p| trace.eval([p[0], 0.0])).collect(),
            face_rule.points.iter().map(|p| trace.eval([1.0 - p[0], 0.0])).collect(),
        ];
        Ok(Self { vol, face_rule, face_phi, trace, trace_phi })
    }

    pub fn degree(&self) -> usize {
        self.vol.basis.degree()
    }
}

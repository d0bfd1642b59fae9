//! Structured triangular meshes split into a CG and an HDG subdomain.
//!
//! Elements are counterclockwise triangles. Local face `j` of an element
//! joins its vertices `j` and `(j + 1) % 3`. Faces store their two nodes in
//! ascending order, which also fixes the orientation used to parametrize
//! trace unknowns along the face.

mod io;

pub use io::{read_mesh, write_mesh};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subdomain {
    Cg,
    Hdg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceClass {
    CgInterior,
    HdgInterior,
    Interface,
    Dirichlet,
    Neumann,
}

impl FaceClass {
    pub fn is_boundary(self) -> bool {
        matches!(self, FaceClass::Dirichlet | FaceClass::Neumann)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Node indices, ascending.
    pub nodes: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

/// Assigns subdomain tags to elements and boundary labels to boundary faces.
#[derive(Clone)]
pub struct SubdomainSpec {
    subdomain: Arc<dyn Fn(Point) -> Subdomain + Send + Sync>,
    boundary: Arc<dyn Fn(Point, Point) -> BoundaryKind + Send + Sync>,
}

impl fmt::Debug for SubdomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SubdomainSpec { .. }")
    }
}

impl SubdomainSpec {
    pub fn new(
        subdomain: impl Fn(Point) -> Subdomain + Send + Sync + 'static,
        boundary: impl Fn(Point, Point) -> BoundaryKind + Send + Sync + 'static,
    ) -> Self {
        Self { subdomain: Arc::new(subdomain), boundary: Arc::new(boundary) }
    }

    /// Whole domain in one subdomain, Dirichlet everywhere.
    pub fn uniform(tag: Subdomain) -> Self {
        Self::new(move |_| tag, |_, _| BoundaryKind::Dirichlet)
    }

    pub fn with_subdomain(&self, subdomain: impl Fn(Point) -> Subdomain + Send + Sync + 'static) -> Self {
        Self { subdomain: Arc::new(subdomain), boundary: self.boundary.clone() }
    }

    pub fn subdomain_at(&self, p: Point) -> Subdomain {
        (self.subdomain)(p)
    }

    pub fn boundary_at(&self, a: Point, b: Point) -> BoundaryKind {
        (self.boundary)(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    elem_subdomain: Vec<Subdomain>,
    faces: Vec<Face>,
    face_class: Vec<FaceClass>,
    elem_faces: Vec<[usize; 3]>,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds face connectivity and classification from raw arrays.
    ///
    /// `boundary` labels every boundary face given its (ascending) node pair.
    pub fn from_parts(
        nodes: Vec<Point>,
        elements: Vec<[usize; 3]>,
        elem_subdomain: Vec<Subdomain>,
        mut boundary: impl FnMut([usize; 2]) -> Result<BoundaryKind>,
    ) -> Result<Self> {
        if elements.len() != elem_subdomain.len() {
            return Err(Error::InvalidMesh("one subdomain tag per element required".into()));
        }
        if elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        for (e, tri) in elements.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: e, area });
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut elem_faces = vec![[0usize; 3]; elements.len()];
        for (e, tri) in elements.iter().enumerate() {
            for j in 0..3 {
                let key = edge_key(tri[j], tri[(j + 1) % 3]);
                match lookup.get(&key) {
                    Some(&f) => {
                        if faces[f].right.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "face ({}, {}) shared by more than two elements",
                                key.0, key.1
                            )));
                        }
                        faces[f].right = Some(e);
                        elem_faces[e][j] = f;
                    }
                    None => {
                        lookup.insert(key, faces.len());
                        elem_faces[e][j] = faces.len();
                        faces.push(Face { nodes: [key.0, key.1], left: e, right: None });
                    }
                }
            }
        }

        let mut face_class = Vec::with_capacity(faces.len());
        for face in &faces {
            let class = match face.right {
                Some(r) => match (elem_subdomain[face.left], elem_subdomain[r]) {
                    (Subdomain::Cg, Subdomain::Cg) => FaceClass::CgInterior,
                    (Subdomain::Hdg, Subdomain::Hdg) => FaceClass::HdgInterior,
                    _ => FaceClass::Interface,
                },
                None => match boundary(face.nodes)? {
                    BoundaryKind::Dirichlet => FaceClass::Dirichlet,
                    BoundaryKind::Neumann => FaceClass::Neumann,
                },
            };
            face_class.push(class);
        }

        Ok(Self { nodes, elements, elem_subdomain, faces, face_class, elem_faces })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn elem_subdomain(&self) -> &[Subdomain] {
        &self.elem_subdomain
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_class(&self) -> &[FaceClass] {
        &self.face_class
    }

    /// Global face index of each local face of every element.
    pub fn elem_faces(&self) -> &[[usize; 3]] {
        &self.elem_faces
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self, e: usize) -> [Point; 3] {
        let t = self.elements[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn barycenter(&self, e: usize) -> Point {
        let v = self.vertices(e);
        [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0]
    }

    /// Length of a face, used as the local `h` in interface penalties.
    pub fn face_length(&self, f: usize) -> f64 {
        let [a, b] = self.faces[f].nodes;
        dist(self.nodes[a], self.nodes[b])
    }

    pub fn face_midpoint(&self, f: usize) -> Point {
        let [a, b] = self.faces[f].nodes;
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Area of all elements carrying `tag` (all elements when `None`).
    pub fn area(&self, tag: Option<Subdomain>) -> f64 {
        (0..self.n_elements())
            .filter(|&e| tag.is_none_or(|t| self.elem_subdomain[e] == t))
            .map(|e| {
                let v = self.vertices(e);
                signed_area(v[0], v[1], v[2])
            })
            .sum()
    }

    pub fn count_class(&self, class: FaceClass) -> usize {
        self.face_class.iter().filter(|&&c| c == class).count()
    }

    /// Element on the given side of an interface face.
    pub fn interface_sides(&self, f: usize) -> Option<(usize, usize)> {
        if self.face_class[f] != FaceClass::Interface {
            return None;
        }
        let face = &self.faces[f];
        let r = face.right?;
        if self.elem_subdomain[face.left] == Subdomain::Cg {
            Some((face.left, r))
        } else {
            Some((r, face.left))
        }
    }

    /// Local index (0..3) of face `f` inside element `e`.
    pub fn local_face(&self, e: usize, f: usize) -> Option<usize> {
        self.elem_faces[e].iter().position(|&g| g == f)
    }

    /// Re-tags elements; face classes of interior faces are recomputed,
    /// boundary labels are kept.
    pub fn retag(&self, mut tag: impl FnMut(usize) -> Subdomain) -> Result<Self> {
        let tags: Vec<Subdomain> = (0..self.n_elements()).map(&mut tag).collect();
        let labels: HashMap<[usize; 2], BoundaryKind> = self
            .faces
            .iter()
            .zip(&self.face_class)
            .filter(|(f, _)| f.right.is_none())
            .map(|(f, c)| {
                let kind = if *c == FaceClass::Neumann { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet };
                (f.nodes, kind)
            })
            .collect();
        Mesh::from_parts(self.nodes.clone(), self.elements.clone(), tags, |key| {
            labels.get(&key).copied().ok_or_else(|| Error::InvalidMesh("unlabelled boundary face".into()))
        })
    }

    /// Checks every structural invariant; used by tests and after I/O.
    pub fn validate(&self) -> Result<()> {
        for e in 0..self.n_elements() {
            let v = self.vertices(e);
            let area = signed_area(v[0], v[1], v[2]);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: e, area });
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let class = self.face_class[f];
            match face.right {
                None if !class.is_boundary() => {
                    return Err(Error::InvalidMesh(format!("boundary face {f} classified {class:?}")))
                }
                Some(r) => {
                    let different = self.elem_subdomain[face.left] != self.elem_subdomain[r];
                    if different != (class == FaceClass::Interface) || class.is_boundary() {
                        return Err(Error::InvalidMesh(format!("interior face {f} misclassified")));
                    }
                    for &el in &[face.left, r] {
                        let tri = self.elements[el];
                        if !face.nodes.iter().all(|n| tri.contains(n)) {
                            return Err(Error::InvalidMesh(format!("face {f} not conforming")));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Longest element edge over the whole mesh.
    pub fn characteristic_size(&self) -> f64 {
        characteristic_size(self)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Maximum element diameter (longest edge).
pub fn characteristic_size(m: &Mesh) -> f64 {
    (0..m.faces.len()).map(|f| m.face_length(f)).fold(0.0, f64::max)
}

// Sample points inside an element: centroids of its four uniform children.
fn interior_samples(v: [Point; 3]) -> [Point; 4] {
    let lerp = |w: [f64; 3]| {
        [
            w[0] * v[0][0] + w[1] * v[1][0] + w[2] * v[2][0],
            w[0] * v[0][1] + w[1] * v[1][1] + w[2] * v[2][1],
        ]
    };
    [
        lerp([4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]),
        lerp([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]),
        lerp([1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0]),
        lerp([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
    ]
}

fn tag_elements(nodes: &[Point], elements: &[[usize; 3]], spec: &SubdomainSpec) -> Result<Vec<Subdomain>> {
    elements
        .iter()
        .enumerate()
        .map(|(e, tri)| {
            let v = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            let samples = interior_samples(v);
            let tag = spec.subdomain_at(samples[3]);
            if samples[..3].iter().any(|&p| spec.subdomain_at(p) != tag) {
                return Err(Error::StraddlingElement { element: e });
            }
            Ok(tag)
        })
        .collect()
}

/// Splits an `nx` by `ny` grid of `domain` into `2 nx ny` triangles along
/// the lower-left to upper-right diagonal of every cell.
pub fn build_structured(nx: usize, ny: usize, domain: Rect, spec: &SubdomainSpec) -> Result<Mesh> {
    build_structured_mapped(nx, ny, domain, spec, |p| p)
}

/// Same as [`build_structured`] but node coordinates are pushed through
/// `map` after tagging, which happens in grid coordinates.
pub fn build_structured_mapped(
    nx: usize,
    ny: usize,
    domain: Rect,
    spec: &SubdomainSpec,
    map: impl Fn(Point) -> Point,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("nx and ny must be positive".into()));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(Error::InvalidArgument("degenerate rectangle".into()));
    }
    let (dx, dy) = ((domain.x1 - domain.x0) / nx as f64, (domain.y1 - domain.y0) / ny as f64);
    let mut grid_nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * dx };
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * dy };
            grid_nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push([p00, p10, p11]);
            elements.push([p00, p11, p01]);
        }
    }
    let tags = tag_elements(&grid_nodes, &elements, spec)?;
    let labels = |key: [usize; 2]| Ok(spec.boundary_at(grid_nodes[key[0]], grid_nodes[key[1]]));
    let grid = Mesh::from_parts(grid_nodes.clone(), elements, tags, labels)?;
    let nodes: Vec<Point> = grid_nodes.iter().map(|&p| map(p)).collect();
    let mesh = Mesh { nodes, ..grid };
    mesh.validate()?;
    Ok(mesh)
}

/// Splits every triangle into four congruent children; children inherit
/// the parent's subdomain tag and boundary faces keep their labels.
pub fn refine_uniform(m: &Mesh) -> Result<Mesh> {
    let mut nodes = m.nodes.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
        *midpoint.entry(edge_key(a, b)).or_insert_with(|| {
            let (pa, pb) = (nodes[a], nodes[b]);
            nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            nodes.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(4 * m.n_elements());
    let mut tags = Vec::with_capacity(4 * m.n_elements());
    let mut child_label: HashMap<(usize, usize), BoundaryKind> = HashMap::new();
    for (e, tri) in m.elements.iter().enumerate() {
        let [a, b, c] = *tri;
        let (ab, bc, ca) = (mid(a, b, &mut nodes), mid(b, c, &mut nodes), mid(c, a, &mut nodes));
        elements.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        tags.extend([m.elem_subdomain[e]; 4]);
        for (j, &(p, q, mpq)) in [(a, b, ab), (b, c, bc), (c, a, ca)].iter().enumerate() {
            let f = m.elem_faces[e][j];
            let kind = match m.face_class[f] {
                FaceClass::Dirichlet => BoundaryKind::Dirichlet,
                FaceClass::Neumann => BoundaryKind::Neumann,
                _ => continue,
            };
            child_label.insert(edge_key(p, mpq), kind);
            child_label.insert(edge_key(mpq, q), kind);
        }
    }
    Mesh::from_parts(nodes, elements, tags, |key| {
        child_label
            .get(&(key[0], key[1]))
            .copied()
            .ok_or_else(|| Error::InvalidMesh("refined boundary face without parent label".into()))
    })
}

/// Checks that no element of `m` straddles the interface described by `spec`.
pub fn check_no_straddling(m: &Mesh, spec: &SubdomainSpec) -> Result<()> {
    tag_elements(&m.nodes, &m.elements, spec).map(|_| ())
}

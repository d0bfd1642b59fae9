//! One coupled solve: dof numbering, assembly of the CG block, condensed HDG
//! trace block and Nitsche coupling, the global solve and field recovery.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cg::{assemble_cg, assemble_nitsche, CgTables, DofMapCG};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::hdg::{
    assemble_hdg, build_local_solvers, face_roles, postprocess_elastic, reconstruct, FaceRole, HdgContext,
    HdgElementField, HdgTables, LocalSolver, PostprocessTables, Postprocessed, TraceDofMap,
};
use crate::linsys::{relative_residual, solve_direct, symmetry_defect, SparseMatrix, TripletList};
use crate::mesh::{FaceClass, Mesh, Point, Subdomain};
use crate::physics::{MaterialMap, Physics};
use crate::problems::{problem_by_kind, ProblemDefinition, ProblemKind};
use crate::ref_elem::{ElementGeometry, LagrangeBasis};
use crate::voigt::PlaneModel;

pub const MAX_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    CgOnly,
    HdgOnly,
    Coupled,
}

impl SolveMode {
    pub fn name(self) -> &'static str {
        match self {
            SolveMode::CgOnly => "CG_ONLY",
            SolveMode::HdgOnly => "HDG_ONLY",
            SolveMode::Coupled => "COUPLED",
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CG_ONLY" => Ok(SolveMode::CgOnly),
            "HDG_ONLY" => Ok(SolveMode::HdgOnly),
            "COUPLED" => Ok(SolveMode::Coupled),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

/// Discretization parameters of one solve on a given mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub mode: SolveMode,
    pub k_cg: usize,
    pub k_hdg: usize,
    pub tau: f64,
    pub gamma: f64,
    pub postprocess: bool,
    pub parallel: bool,
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        for k in [self.k_cg, self.k_hdg] {
            if !(1..=MAX_DEGREE).contains(&k) {
                return Err(Error::UnsupportedDegree(k));
            }
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Named-problem solve request; unset `tau`/`gamma` take problem defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub problem: ProblemKind,
    pub mode: SolveMode,
    pub k_cg: usize,
    pub k_hdg: usize,
    pub level: usize,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub plane: PlaneModel,
    pub nu_hdg: f64,
    pub postprocess: bool,
    pub parallel: bool,
}

impl SolveConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            mode: SolveMode::Coupled,
            k_cg: 1,
            k_hdg: 1,
            level: 2,
            tau: None,
            gamma: None,
            plane: PlaneModel::Strain,
            nu_hdg: 0.4999,
            postprocess: false,
            parallel: true,
        }
    }

    pub fn default_tau(&self) -> f64 {
        match self.problem {
            ProblemKind::ThermalSquare | ProblemKind::CooksMembrane => 10.0,
            ProblemKind::ElasticitySquare => 2.5e2,
        }
    }

    pub fn default_gamma(&self) -> f64 {
        match self.problem {
            ProblemKind::ThermalSquare => 1e2,
            ProblemKind::ElasticitySquare if self.k_cg != self.k_hdg => 2.5e4,
            ProblemKind::ElasticitySquare => 2.5e3,
            ProblemKind::CooksMembrane => 1e4,
        }
    }

    pub fn params(&self) -> SolveParams {
        SolveParams {
            mode: self.mode,
            k_cg: self.k_cg,
            k_hdg: self.k_hdg,
            tau: self.tau.unwrap_or_else(|| self.default_tau()),
            gamma: self.gamma.unwrap_or_else(|| self.default_gamma()),
            postprocess: self.postprocess,
            parallel: self.parallel,
        }
    }

    pub fn definition(&self) -> Result<ProblemDefinition> {
        problem_by_kind(self.problem, self.plane, self.nu_hdg)
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub assembly: f64,
    pub solve: f64,
    pub recovery: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.assembly + self.solve + self.recovery
    }
}

/// Output of one solve. Element tags of `mesh` reflect the mode; `regions`
/// are the physical material regions.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub physics: Physics,
    pub params: SolveParams,
    pub mesh: Mesh,
    pub regions: Vec<Subdomain>,
    pub mats: MaterialMap,
    pub cg_basis: LagrangeBasis,
    pub hdg_basis: LagrangeBasis,
    pub trace_basis: LagrangeBasis,
    pub star_basis: LagrangeBasis,
    pub cg_dofs: DofMapCG,
    /// CG nodal values, `node * ncomp + component`.
    pub cg: Vec<f64>,
    pub traces: TraceDofMap,
    pub trace: Vec<f64>,
    pub hdg: Vec<Option<HdgElementField>>,
    pub ustar: Option<Vec<Option<Postprocessed>>>,
    pub symmetry_defect: f64,
    pub residual: f64,
    pub timings: Timings,
}

/// `(element, reference point)` pairs containing a physical point.
pub type Location = (usize, [f64; 2]);

impl SolutionBundle {
    pub fn n_cg(&self) -> usize {
        self.cg.len()
    }

    pub fn n_trace(&self) -> usize {
        self.trace.len()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        ElementGeometry::new(self.mesh.vertices(e)).expect("validated mesh")
    }

    pub fn is_cg(&self, e: usize) -> bool {
        self.mesh.elem_subdomain()[e] == Subdomain::Cg
    }

    /// Primary unknown at reference point `xi` of element `e`.
    pub fn value(&self, e: usize, xi: [f64; 2]) -> [f64; 2] {
        if self.is_cg(e) {
            let coeffs: Vec<f64> = self.cg_dofs.elem_dofs(e).iter().map(|&d| self.cg[d]).collect();
            self.physics.interpolate(&self.cg_basis.eval(xi), &coeffs)
        } else {
            let f = self.hdg[e].as_ref().expect("HDG element field");
            self.physics.interpolate(&self.hdg_basis.eval(xi), &f.u)
        }
    }

    /// `D G u` on CG elements and `-D^{1/2} L` on HDG elements (the
    /// gradient for the scalar problem).
    pub fn stress(&self, e: usize, xi: [f64; 2]) -> [f64; 3] {
        let c = self.mats.get(e);
        let ns = self.physics.nstrain();
        let mut out = [0.0; 3];
        if self.is_cg(e) {
            let geom = self.geometry(e);
            let coeffs: Vec<f64> = self.cg_dofs.elem_dofs(e).iter().map(|&d| self.cg[d]).collect();
            let grads: Vec<[f64; 2]> = self.cg_basis.eval_grad(xi).into_iter().map(|g| geom.phys_grad(g)).collect();
            let gu = self.physics.apply_grad(&grads, &coeffs);
            for s in 0..ns {
                out[s] = (0..ns).map(|t| c.d[(s, t)] * gu[t]).sum();
            }
        } else {
            let f = self.hdg[e].as_ref().expect("HDG element field");
            let phi = self.hdg_basis.eval(xi);
            let mut l = [0.0; 3];
            for (a, p) in phi.iter().enumerate() {
                for s in 0..ns {
                    l[s] += p * f.l[a * ns + s];
                }
            }
            for s in 0..ns {
                out[s] = -(0..ns).map(|t| c.d_sqrt[(s, t)] * l[t]).sum::<f64>();
            }
        }
        out
    }

    /// Postprocessed displacement on HDG elements, if computed.
    pub fn ustar(&self, e: usize, xi: [f64; 2]) -> Option<[f64; 2]> {
        let p = self.ustar.as_ref()?[e].as_ref()?;
        Some(self.physics.interpolate(&self.star_basis.eval(xi), &p.coeffs))
    }

    /// `u*` on HDG elements and `u` on CG elements.
    pub fn value_enhanced(&self, e: usize, xi: [f64; 2]) -> [f64; 2] {
        self.ustar(e, xi).unwrap_or_else(|| self.value(e, xi))
    }

    /// Trace value on face `f` at parameter `s` from `face.nodes[0]`.
    pub fn trace_value(&self, f: usize, s: f64) -> Option<[f64; 2]> {
        let range = self.traces.face_dofs(f)?;
        Some(self.physics.interpolate(&self.trace_basis.eval([s, 0.0]), &self.trace[range]))
    }

    /// All elements containing `p` (up to a relative tolerance).
    pub fn locate(&self, p: Point) -> Vec<Location> {
        (0..self.n_elements())
            .filter_map(|e| {
                let g = self.geometry(e);
                g.contains(p, 1e-10).then(|| (e, g.to_reference(p)))
            })
            .collect()
    }

    /// Value at a physical point averaged over the elements containing it.
    pub fn value_at(&self, p: Point) -> Result<[f64; 2]> {
        let locs = self.locate(p);
        if locs.is_empty() {
            return Err(Error::PointOutside(p[0], p[1]));
        }
        let mut v = [0.0; 2];
        for &(e, xi) in &locs {
            let u = self.value(e, xi);
            v[0] += u[0];
            v[1] += u[1];
        }
        let n = locs.len() as f64;
        Ok([v[0] / n, v[1] / n])
    }

    pub fn max_postprocess_residuals(&self) -> Option<(f64, f64)> {
        let pp = self.ustar.as_ref()?;
        Some(pp.iter().flatten().fold((0.0f64, 0.0f64), |(t, r), p| {
            (t.max(p.translation_residual), r.max(p.rotation_residual))
        }))
    }
}

/// Assembled coupled system before the solve.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub n_cg: usize,
    pub n_trace: usize,
}

fn mode_mesh(mesh: &Mesh, mode: SolveMode) -> Result<Mesh> {
    match mode {
        SolveMode::Coupled => {
            if mesh.count_class(FaceClass::Interface) == 0 {
                return Err(Error::NoInterface);
            }
            Ok(mesh.clone())
        }
        SolveMode::CgOnly => mesh.retag(|_| Subdomain::Cg),
        SolveMode::HdgOnly => mesh.retag(|_| Subdomain::Hdg),
    }
}

type DataFn<'a> = Box<dyn Fn(usize, Point) -> [f64; 2] + Sync + 'a>;

// Numbering, tables and element data shared by assembly and recovery.
struct Discretization<'a> {
    physics: Physics,
    mesh: Mesh,
    regions: Vec<Subdomain>,
    mats: MaterialMap,
    cg_tables: CgTables,
    cg_dofs: DofMapCG,
    hdg_tables: HdgTables,
    traces: TraceDofMap,
    source: DataFn<'a>,
    dirichlet: DataFn<'a>,
    neumann: DataFn<'a>,
}

impl<'a> Discretization<'a> {
    fn new(def: &'a ProblemDefinition, mesh: &Mesh, params: &SolveParams) -> Result<Self> {
        params.validate()?;
        let physics = def.physics;
        let nc = physics.ncomp();
        let regions = def.element_regions(mesh);
        let mesh = mode_mesh(mesh, params.mode)?;
        let mats = def.material_map(&regions)?;
        let data = |f: &'a crate::problems::PointFn| -> DataFn<'a> {
            let r = regions.clone();
            Box::new(move |e, x| f(x, r[e]))
        };
        let (source, dirichlet, neumann) = (data(&def.source), data(&def.dirichlet), data(&def.neumann));
        let cg_tables = CgTables::new(params.k_cg)?;
        let cg_dofs = DofMapCG::new(&mesh, &cg_tables.vol.basis, nc, &*dirichlet)?;
        let hdg_tables = HdgTables::new(params.k_hdg)?;
        let traces = TraceDofMap::new(&mesh, params.k_hdg, nc);
        Ok(Self { physics, mesh, regions, mats, cg_tables, cg_dofs, hdg_tables, traces, source, dirichlet, neumann })
    }

    fn ctx(&self, tau: f64) -> HdgContext<'_> {
        HdgContext {
            physics: self.physics,
            mesh: &self.mesh,
            traces: &self.traces,
            tables: &self.hdg_tables,
            mats: &self.mats,
            tau,
            source: &*self.source,
            dirichlet: &*self.dirichlet,
            neumann: &*self.neumann,
        }
    }

    fn assemble(&self, params: &SolveParams) -> Result<(Vec<Option<LocalSolver>>, AssembledSystem)> {
        let ctx = self.ctx(params.tau);
        let solvers = build_local_solvers(&ctx, params.parallel)?;
        let (n_cg, n_trace) = (self.cg_dofs.n_dofs(), self.traces.n_dofs());
        let mut list = TripletList::new(n_cg + n_trace);
        assemble_cg(
            self.physics,
            &self.mesh,
            &self.cg_dofs,
            &self.cg_tables,
            &self.mats,
            &*self.source,
            &*self.neumann,
            &mut list,
            params.parallel,
        )?;
        assemble_hdg(&ctx, &solvers, n_cg, &mut list)?;
        if self.mesh.count_class(FaceClass::Interface) > 0 {
            assemble_nitsche(
                self.physics,
                &self.mesh,
                &self.cg_dofs,
                &self.cg_tables.vol.basis,
                &self.traces,
                &self.hdg_tables.trace,
                n_cg,
                &self.mats,
                params.gamma,
                &mut list,
                params.parallel,
            )?;
        }
        let (matrix, rhs) = list.finalize()?;
        Ok((solvers, AssembledSystem { matrix, rhs, n_cg, n_trace }))
    }
}

/// Solves `def` on `mesh` (tags as generated by the problem's spec).
pub fn solve_problem(def: &ProblemDefinition, mesh: &Mesh, params: &SolveParams) -> Result<SolutionBundle> {
    if params.postprocess && def.physics != Physics::Elastic {
        return Err(Error::InvalidArgument("the postprocess is defined for elasticity only".into()));
    }
    let start = Instant::now();
    let disc = Discretization::new(def, mesh, params)?;
    let (solvers, sys) = disc.assemble(params)?;
    let defect = symmetry_defect(&sys.matrix);
    let assembly = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let empty = sys.matrix.dim() == 0;
    let x = if empty { Vec::new() } else { solve_direct(&sys.matrix, &sys.rhs)? };
    let residual = if empty { 0.0 } else { relative_residual(&sys.matrix, &x, &sys.rhs) };
    let solve = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let trace = x[sys.n_cg..].to_vec();
    let hdg = reconstruct(&disc.ctx(params.tau), &solvers, &trace, params.parallel);
    let mut bundle = SolutionBundle {
        physics: disc.physics,
        params: *params,
        regions: disc.regions.clone(),
        mats: disc.mats.clone(),
        cg_basis: disc.cg_tables.vol.basis.clone(),
        hdg_basis: disc.hdg_tables.vol.basis.clone(),
        trace_basis: disc.hdg_tables.trace.clone(),
        star_basis: LagrangeBasis::new(params.k_hdg + 1, 2)?,
        cg_dofs: disc.cg_dofs.clone(),
        cg: x[..sys.n_cg].to_vec(),
        traces: disc.traces.clone(),
        trace,
        hdg,
        ustar: None,
        symmetry_defect: defect,
        residual,
        timings: Timings { assembly, solve, recovery: 0.0 },
        mesh: disc.mesh.clone(),
    };
    if params.postprocess {
        bundle.ustar = Some(postprocess_all(&bundle, &*disc.dirichlet)?);
    }
    bundle.timings.recovery = start.elapsed().as_secs_f64();
    Ok(bundle)
}

fn postprocess_all(
    b: &SolutionBundle,
    dirichlet: &(dyn Fn(usize, Point) -> [f64; 2] + Sync),
) -> Result<Vec<Option<Postprocessed>>> {
    let tables = PostprocessTables::new(b.params.k_hdg)?;
    let mesh = &b.mesh;
    map_indexed(b.params.parallel, mesh.n_elements(), |e| {
        let Some(field) = b.hdg[e].as_ref() else { return Ok(None) };
        let geom = b.geometry(e);
        let roles = face_roles(mesh, &b.traces, e);
        let g = |j: usize, x: Point| match roles[j] {
            FaceRole::Dirichlet => dirichlet(e, x),
            FaceRole::Trace { .. } => {
                let f = mesh.elem_faces()[e][j];
                let face = &mesh.faces()[f];
                let (p0, p1) = (mesh.nodes()[face.nodes[0]], mesh.nodes()[face.nodes[1]]);
                let d = [p1[0] - p0[0], p1[1] - p0[1]];
                let s = ((x[0] - p0[0]) * d[0] + (x[1] - p0[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]);
                b.trace_value(f, s).expect("traced face")
            }
        };
        postprocess_elastic(&tables, &geom, b.mats.get(e), &field.l, &field.u, g)
            .map(Some)
            .map_err(|err| match err {
                Error::SingularLocal { .. } => Error::SingularLocal { element: e },
                other => other,
            })
    })
    .into_iter()
    .collect()
}

/// Nonuniform strategy: CG degree `k_hdg + 1` with the HDG postprocess.
pub fn mixed_degree_solve(def: &ProblemDefinition, mesh: &Mesh, params: &SolveParams) -> Result<SolutionBundle> {
    if params.k_cg != params.k_hdg + 1 {
        return Err(Error::InvalidArgument(format!(
            "mixed degree needs k_cg = k_hdg + 1, got {} and {}",
            params.k_cg, params.k_hdg
        )));
    }
    if !params.postprocess {
        return Err(Error::InvalidArgument("mixed degree needs the postprocess".into()));
    }
    solve_problem(def, mesh, params)
}

/// Builds the problem and mesh named by `config` and solves.
pub fn solve(config: &SolveConfig) -> Result<SolutionBundle> {
    let def = config.definition()?;
    let mesh = def.mesh(config.level)?;
    solve_problem(&def, &mesh, &config.params())
}

/// Assembles without solving, for inspection of the block structure.
pub fn assemble_only(def: &ProblemDefinition, mesh: &Mesh, params: &SolveParams) -> Result<AssembledSystem> {
    let disc = Discretization::new(def, mesh, params)?;
    Ok(disc.assemble(params)?.1)
}

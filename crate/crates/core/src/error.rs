use thiserror::Error;

/// Errors raised while building meshes, assembling or solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element {element} straddles the subdomain interface")]
    StraddlingElement { element: usize },

    #[error("degenerate element {element} (signed area {area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    #[error("unsupported polynomial degree {0} (allowed 1..=6)")]
    UnsupportedDegree(usize),

    #[error("quadrature order {0} exceeds the implemented maximum")]
    UnsupportedQuadrature(usize),

    #[error("nearly incompressible limit: material parameters make lambda singular")]
    SingularMaterial,

    #[error("vector is not of unit length (norm {0})")]
    NonUnitNormal(f64),

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("singular factorization at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("singular local system on element {element}")]
    SingularLocal { element: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("coupled mode requires at least one interface face")]
    NoInterface,

    #[error("point ({0}, {1}) is outside the mesh")]
    PointOutside(f64, f64),

    #[error("nonpositive error value {0:e} in rate computation")]
    NonPositiveError(f64),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

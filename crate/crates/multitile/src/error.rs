use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lattice vector {index} is not orthogonal to the subspace H (defect {defect:.3e})")]
    NotOrthogonal { index: usize, defect: f64 },

    #[error("gamma_basis vectors are linearly dependent")]
    DegenerateLattice,

    #[error("h_basis vectors are linearly dependent")]
    DegenerateSubspace,

    #[error("rank(Gamma) + dim(H) = {rank} < {dim}: dual group is not discrete")]
    NotFullRank { rank: usize, dim: usize },

    #[error("bad measure spec: {0}")]
    BadSpec(String),

    #[error("translation field {field} maps node {node} outside the group (distance {distance:.3e})")]
    NotInGroup {
        field: usize,
        node: usize,
        distance: f64,
    },

    #[error(
        "components {comp_a} and {comp_b} overlap at nodes {node_a} and {node_b} (distance {distance:.3e})"
    )]
    OverlappingComponents {
        comp_a: usize,
        comp_b: usize,
        node_a: usize,
        node_b: usize,
        distance: f64,
    },

    #[error("size mismatch: {0} group elements vs {1} translations")]
    SizeMismatch(usize, usize),

    #[error("singular-value bound violated: sigma_min {sigma_min:.6e} < bound {bound:.6e}")]
    BoundViolation { sigma_min: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("vector search failed: {0}")]
    SearchFailed(String),

    #[error("translates {0} and {1} collide (difference lies in the dual lattice)")]
    CollidingTranslates(usize, usize),

    #[error("duplicate frequency at indices {0} and {1}")]
    DuplicateFrequency(usize, usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("bad scenario parameter: {0}")]
    BadParams(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("pipeline error at stage `{stage}`: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Tag an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Pipeline {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

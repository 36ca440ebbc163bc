use thiserror::Error;

/// Errors shared by the operator modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("ball under-resolved: radius {radius} < 4 * spacing {spacing}")]
    UnderResolvedBall { radius: f64, spacing: f64 },

    #[error("ball too close to the box boundary: need |center_j| <= half_length - 4*radius (axis {axis})")]
    InsufficientPadding { axis: usize },

    #[error("grids of the operands do not match")]
    GridMismatch,

    #[error("degenerate region: no quadrature weight")]
    DegenerateRegion,

    #[error("invalid exponent p = {0}; need p >= 1")]
    InvalidExponent(f64),

    #[error("constant field on ball: zero gradient denominator")]
    ConstantOnBall,

    #[error("negative density sample: {0}")]
    NegativeDensity(f64),

    #[error("annulus gap under-resolved: {nodes} nodes across the gap, need >= {required}")]
    GapUnderResolved { nodes: usize, required: usize },

    #[error("annulus has no active nodes")]
    EmptyAnnulus,

    #[error("sparse factorization failed: {0}")]
    SingularSystem(String),

    #[error("divergence solve did not converge: relative residual {residual:.3e} > {tolerance:.3e}")]
    SolverNotConverged { residual: f64, tolerance: f64 },

    #[error(
        "compatibility check failed: |div| on ball = {div_on_ball:.3e}, \
         max defect component mean = {defect_mean:.3e}, allowed {allowed:.3e}"
    )]
    IncompatibleField {
        div_on_ball: f64,
        defect_mean: f64,
        allowed: f64,
    },

    #[error("adiabatic exponent gamma = {0} outside existence theory (need gamma > 3/2)")]
    GammaOutOfRange(f64),

    #[error("empty sweep: no epsilon values")]
    EmptySweep,

    #[error("non-finite sample encountered in {0}")]
    NonFinite(&'static str),

    #[error("snapshot io: {0}")]
    SnapshotIo(String),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

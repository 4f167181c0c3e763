use thiserror::Error;

/// Errors raised by the laboratory. Every variant maps to a module-qualified
/// code through [`Error::code`], which the runner prints on failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // model
    #[error("scaling function is not positive at r = {r} (k = {k})")]
    NonPositiveK { r: f64, k: f64 },
    #[error("scaling bound violated at r = {r}: -r k'/k = {ratio}")]
    ViolatedBound { r: f64, ratio: f64 },
    #[error("decay specification incomplete: missing {0}")]
    IncompleteSpec(&'static str),
    #[error("perturbation is not in a supported scattering class: {0}")]
    NotScatteringClass(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    // grid
    #[error("grid too coarse: h^2 * symbol scale = {0:.3e} exceeds 0.1")]
    GridTooCoarse(f64),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("Fourier coefficients of {0} are not Hermitian-symmetric")]
    NonHermitianCoeffs(&'static str),
    #[error("theta mode {mode} exceeds cross-section cutoff {cutoff}")]
    ModeOutOfRange { mode: i64, cutoff: usize },

    // phase modifier
    #[error("long-range coefficient not admissible: |a1L({r})| = {value} >= 1/2")]
    NonAdmissible { r: f64, value: f64 },
    #[error("1/nu = {0} is an integer")]
    IntegerNuInverse(f64),
    #[error("point (r = {r}, rho = {rho}) outside the phase domain")]
    OutOfDomain { r: f64, rho: f64 },
    #[error("non-positive sample {value} at r = {r}")]
    NonPositiveSample { r: f64, value: f64 },
    #[error("invalid decay index nu = {0}")]
    InvalidNu(f64),

    // pdo
    #[error("symbol momentum support does not match the field's momentum grid")]
    SupportMismatch,
    #[error("unsupported symbol: {0}")]
    UnsupportedSymbolDegree(String),
    #[error("momentum window touches zero")]
    WindowTouchesZero,

    // propagator
    #[error("boundary leak: mass {mass:.3e} near the artificial boundary at t = {t}")]
    BoundaryLeak { mass: f64, t: f64 },
    #[error("linear solver failed: {0}")]
    SolverFail(String),
    #[error("packet clipped by the grid: tail mass {0:.3e}")]
    PacketClipped(f64),
    #[error("time step too large: dt * spectral radius = {0:.3e} > 0.5")]
    StepTooLarge(f64),

    // diagnostics
    #[error("window [{lo}, {hi}] touches the threshold at 0")]
    WindowTouchesThreshold { lo: f64, hi: f64 },
    #[error("eta = {eta:.3e} is below the resolution floor {floor:.3e}")]
    ResolutionFloor { eta: f64, floor: f64 },
    #[error("no finite constant C <= {0} certifies the form inequality")]
    NoFiniteC(f64),
    #[error("problem too large for dense eigendecomposition: dimension {0}")]
    TooLarge(usize),
    #[error("window overlaps point spectrum at {0}")]
    WindowHitsEigenvalue(f64),

    // runner
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("run summaries are not comparable: {0}")]
    SchemaDrift(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Module-qualified identifier, e.g. `grid_ops.GridTooCoarse`.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NonPositiveK { .. } => "model_core.NonPositiveK",
            ViolatedBound { .. } => "model_core.ViolatedBound",
            IncompleteSpec(_) => "model_core.IncompleteSpec",
            NotScatteringClass(_) => "model_core.NotScatteringClass",
            InvalidModel(_) => "model_core.InvalidModel",
            GridTooCoarse(_) => "grid_ops.GridTooCoarse",
            GridTooSmall(_) => "grid_ops.GridTooSmall",
            DimensionMismatch(..) => "grid_ops.DimensionMismatch",
            GridMismatch(_) => "grid_ops.GridMismatch",
            NonHermitianCoeffs(_) => "grid_ops.NonHermitianCoeffs",
            ModeOutOfRange { .. } => "grid_ops.ModeOutOfRange",
            NonAdmissible { .. } => "phase_modifier.NonAdmissible",
            IntegerNuInverse(_) => "phase_modifier.IntegerNuInverse",
            OutOfDomain { .. } => "phase_modifier.OutOfDomain",
            NonPositiveSample { .. } => "phase_modifier.NonPositiveSample",
            InvalidNu(_) => "phase_modifier.InvalidNu",
            SupportMismatch => "osc_pdo.SupportMismatch",
            UnsupportedSymbolDegree(_) => "osc_pdo.UnsupportedSymbolDegree",
            WindowTouchesZero => "osc_pdo.WindowTouchesZero",
            BoundaryLeak { .. } => "propagator.BoundaryLeak",
            SolverFail(_) => "propagator.SolverFail",
            PacketClipped(_) => "propagator.PacketClipped",
            StepTooLarge(_) => "propagator.StepTooLarge",
            WindowTouchesThreshold { .. } => "spectral_diagnostics.WindowTouchesThreshold",
            ResolutionFloor { .. } => "spectral_diagnostics.ResolutionFloor",
            NoFiniteC(_) => "spectral_diagnostics.NoFiniteC",
            TooLarge(_) => "spectral_diagnostics.TooLarge",
            WindowHitsEigenvalue(_) => "spectral_diagnostics.WindowHitsEigenvalue",
            ConfigInvalid(_) => "cli_runner.ConfigInvalid",
            SchemaDrift(_) => "cli_runner.SchemaDrift",
            Io(_) => "cli_runner.Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

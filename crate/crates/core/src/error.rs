use thiserror::Error;

/// Errors surfaced by hoflab computations.
///
/// Validation errors mean a precondition on the inputs was violated;
/// the `*Failure` variants mean a numerical contract did not hold at
/// runtime (these map to a distinct CLI exit code).
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("unknown edge type `{0}` for this lattice")]
    UnknownEdgeType(String),

    #[error("flux 2π·{p}/{q} on a torus requires the side length to be a multiple of q = {q}, got L = {l}")]
    IncommensurateTorus { p: i64, q: i64, l: usize },

    #[error("p/q = {p}/{q} is not a reduced fraction (gcd = {gcd})")]
    NotReduced { p: i64, q: i64, gcd: i64 },

    #[error("magnetic translation by ({g1},{g2}) is incompatible with the {l}×{l} torus at this flux")]
    IncompatibleTranslation { g1: i64, g2: i64, l: usize },

    #[error("Chambers polynomial extraction failed: k-residual stddev {stddev:.3e} exceeds {tol:.1e}")]
    ChambersResidual { stddev: f64, tol: f64 },

    #[error("Dirac certification failed at p/q = {p}/{q}: touching residual {residual:.3e} > 1e-6")]
    DiracCertification { p: i64, q: i64, residual: f64 },

    #[error("degenerate lowest eigenvalue E_1 at the Dirac momentum (gap to E_2 = {gap:.3e})")]
    DegenerateGroundBranch { gap: f64 },

    #[error("band {band} is not isolated on the k-grid (touching detected); Chern number undefined")]
    BandTouching { band: usize },

    #[error("spectral gap {gap} closed at flux 2π·{p}/{q}")]
    GapClosed { gap: usize, p: i64, q: i64 },

    #[error("IDS-vs-flux fit is not affine: residual {residual:.3e} exceeds {tol:.1e} of the IDS range")]
    NonAffineIds { residual: f64, tol: f64 },

    #[error("evolution box too small: need L ≥ {required}, got {got} (wavefront must not reach the boundary)")]
    BoxTooSmall { required: usize, got: usize },

    #[error("disorder-broadened bands overlap at λ = {lambda}; outside the regime of the trace formula")]
    BandOverlap { lambda: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{0}")]
    Validation(String),
}

impl Error {
    /// True for violations of numerical contracts (CLI exit code 2),
    /// false for input validation errors (exit code 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ChambersResidual { .. }
                | Error::DiracCertification { .. }
                | Error::DegenerateGroundBranch { .. }
                | Error::BandTouching { .. }
                | Error::GapClosed { .. }
                | Error::NonAffineIds { .. }
                | Error::BandOverlap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

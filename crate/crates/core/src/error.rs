use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {0} is not positive")]
    NonPositiveRadius(f64),
    #[error("quadric signature is not that of a cone (eigenvalues {0:?})")]
    NotACone([f64; 3]),
    #[error("cone matrix is singular (det {0:e})")]
    SingularCone(f64),
    #[error("camera center is inside or on the ellipsoid (delta' A delta = {0})")]
    CameraInsideEllipsoid(f64),
    #[error("ellipse is degenerate")]
    DegenerateEllipse,
    #[error("eigenvalue clustering is ambiguous (gap ratio {0:.3})")]
    AmbiguousClustering(f64),
    #[error("negative radicand {0:e} when recovering mu from sigma")]
    NegativeRadicand(f64),
    #[error("trace of the inverse cone matrix is zero")]
    ZeroTraceInverse,
    #[error("negative radicand {0:e} for the camera distance; orientation is inconsistent")]
    NegativeRadicandK(f64),
    #[error("reconstructed ellipsoid matrix is not positive definite")]
    InconsistentDistance,
    #[error("ellipsoid eigenvalues are too close for the triaxial solver")]
    DegenerateVandermonde,
    #[error("m = {0} is outside the feasible set")]
    InfeasibleM(f64),
    #[error("solver branch does not match the ellipsoid/cone classes")]
    WrongClass,
    #[error("{ellipsoid} ellipsoid cannot project to a {cone} cone")]
    ImpossibleCoOccurrence {
        ellipsoid: &'static str,
        cone: &'static str,
    },
    #[error("locus is empty")]
    EmptyLocus,
    #[error("feasible set is unbounded")]
    UnboundedLocus,
    #[error("ellipsoid is not entirely in front of the camera")]
    BehindCamera,
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error("loci do not intersect (spread {0:e})")]
    NoIntersection(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

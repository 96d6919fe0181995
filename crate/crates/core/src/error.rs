use crate::model::{SiteId, VehicleId};
use thiserror::Error;

/// Errors raised when constructing or querying model values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("site ids must be contiguous from 1: expected {expected}, found {found}")]
    NonContiguousIds { expected: SiteId, found: SiteId },
    #[error("site {site}: window [{open}, {close}] does not fit in [0, {horizon}]")]
    WindowOutOfHorizon {
        site: SiteId,
        open: f64,
        close: f64,
        horizon: f64,
    },
    #[error("site {site}: supply quantity {quantity} is negative or not finite")]
    InvalidQuantity { site: SiteId, quantity: f64 },
    #[error("site {site}: supply profile does not match instance mode {mode}")]
    ProfileModeMismatch { site: SiteId, mode: &'static str },
    #[error("site {site}: a linear ramp needs a window of positive length")]
    DegenerateRamp { site: SiteId },
    #[error("fleet size must be at least 1")]
    EmptyFleet,
    #[error("capacity must be positive and finite, got {0}")]
    InvalidCapacity(f64),
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("coordinate is not finite")]
    NonFiniteCoordinate,
    #[error("unknown site id {0}")]
    UnknownSite(SiteId),
    #[error("site {0} appears more than once in the visit order")]
    RepeatedSite(SiteId),
}

/// Errors raised by the solvers and reductions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver expects mode {expected}, instance is {found}")]
    WrongMode {
        expected: &'static str,
        found: &'static str,
    },
    #[error("instance has {sites} sites, above the exhaustive limit of {limit}")]
    TooLarge { sites: usize, limit: usize },
    #[error("instance has {vehicles} vehicles, above the exhaustive limit of {limit}")]
    TooManyVehicles { vehicles: usize, limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("re-assignment precondition violated for vehicle {vehicle}, site {site}: {reason}")]
    Precondition {
        vehicle: VehicleId,
        site: SiteId,
        reason: String,
    },
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T, E = SolveError> = std::result::Result<T, E>;

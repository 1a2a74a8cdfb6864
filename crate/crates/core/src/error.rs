use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid, packet, stepper or schedule parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called on a state outside its domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The wavepacket reached the edge of the monitored window during a run.
    #[error("support margin violated at t = {time}: {mass_outside:.3e} of the norm is outside |x| <= {window}")]
    SupportMargin {
        time: f64,
        mass_outside: f64,
        window: f64,
    },

    /// A classical transport estimate says the packet cannot stay inside the
    /// monitored window for the requested horizon.
    #[error("preflight failed: {0}")]
    Preflight(String),

    #[error("states live on different grids")]
    GridMismatch,

    /// Adjacent phase increments are too far apart to unwrap reliably.
    #[error("phase unwrap ambiguity: {0}; refine the schedule")]
    UnwrapAmbiguity(String),

    #[error("fit rejected: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by samplers, clocks, and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// The covariance matrix handed to an MVN or LGCP target is not
    /// symmetric positive definite.
    #[error("covariance not SPD")]
    CovarianceNotSpd,

    /// A thinning envelope failed to dominate its rate at a candidate point.
    #[error("thinning bound violated for {target} at t = {t}: rate {rate} > bound {bound}")]
    BoundViolation {
        target: String,
        t: f64,
        rate: f64,
        bound: f64,
    },

    /// Bounce reflection requested at a point where the gradient vanishes.
    #[error("bounce at critical point (|gradient| = {norm:e})")]
    BounceAtCriticalPoint { norm: f64 },

    /// The coordinate-sampler kernel has zero total rate, which only happens
    /// at a critical point of the potential with zero refresh rate.
    #[error("transition kernel undefined at critical point with lambda_ref = 0")]
    UndefinedTransition,

    /// A velocity left the sampler's velocity set.
    #[error("{sampler}: {detail}")]
    InvalidVelocity {
        sampler: &'static str,
        detail: String,
    },

    /// A statistic was requested on a constant series.
    #[error("degenerate series")]
    DegenerateSeries,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A dataset file did not match its schema.
    #[error("{path}:{line}: {message}")]
    DataFormat {
        path: String,
        line: usize,
        message: String,
    },

    /// Lyapunov function undefined: zero refresh rate at a point where the
    /// directional gradient term also vanishes.
    #[error("Lyapunov undefined (zero refresh rate at critical point)")]
    LyapunovUndefined,

    /// A run aborted mid-trajectory; carries the event index and position
    /// for post-mortem context.
    #[error("run aborted at event {event} (t = {time}, |x| = {position_norm:e}): {source}")]
    RunAborted {
        event: usize,
        time: f64,
        position_norm: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

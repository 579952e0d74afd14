use std::fmt;

use crate::maxent::SolverReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in a simulation an error happened.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub time: f64,
    pub cell: Option<(usize, usize)>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cell {
            Some((i, j)) => write!(f, "t={} cell=({i},{j})", self.time),
            None => write!(f, "t={}", self.time),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite integrand value at node {node}")]
    NonFinite { node: f64 },

    #[error("moment vector is not realizable: {0}")]
    NotRealizable(String),

    /// Canonical moment `index` (1-based) is undefined because the vector lies on the
    /// boundary of the moment space; `partial` holds the canonical moments computed so far.
    #[error("moment vector on the boundary of the moment space (p{index} undefined)")]
    BoundaryOfMomentSpace { index: usize, partial: Vec<f64> },

    #[error("operation not supported for the {0} basis")]
    UnsupportedBasis(&'static str),

    #[error("singular integral: negative order {order} on an interval starting at 0")]
    SingularIntegral { order: f64 },

    #[error("maximum-entropy solver did not converge after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    NonConvergence(SolverReport),

    #[error("ill-conditioned linear system: {0}")]
    Conditioning(String),

    #[error("CFL condition violated: dt*max|u|/dx = {courant} > 1")]
    Cfl { courant: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{location}: {source}")]
    At {
        location: Location,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, time: f64, cell: Option<(usize, usize)>) -> Self {
        Error::At { location: Location { time, cell }, source: Box::new(self) }
    }

    /// Innermost error, with any location context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}

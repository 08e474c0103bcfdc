use thiserror::Error;

/// Failure modes of one renormalization attempt.  The sign field feeds the
/// parameter bisection: -1 means the map behaved like the escaping
/// (super-strong) side, +1 like the non-renormalizable (weak) side.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("renormalization step failed ({msg})")]
    Renorm { msg: &'static str, side: i32, level: usize },

    #[error("iteration `{what}` did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { what: &'static str, iters: usize, residual: f64 },

    #[error("no sign change while bracketing {what}")]
    Bracket { what: &'static str },

    #[error("{what} fell outside its admissible range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("{op} needs tower depth {needed} but only {have} levels were built")]
    TowerTooShallow { op: &'static str, needed: usize, have: usize },

    #[error("extended-domain data unavailable at level {level}; manifold operations need it")]
    NoExtendedDomain { level: usize },

    #[error("curves do not intersect: {0}")]
    NoIntersection(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn renorm(msg: &'static str, side: i32) -> Self {
        Error::Renorm { msg, side, level: 0 }
    }

    pub fn at_level(self, level: usize) -> Self {
        match self {
            Error::Renorm { msg, side, .. } => Error::Renorm { msg, side, level },
            e => e,
        }
    }

    /// Bisection side indicator if this failure carries one.
    pub fn side(&self) -> Option<i32> {
        match self {
            Error::Renorm { side, .. } => Some(*side),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

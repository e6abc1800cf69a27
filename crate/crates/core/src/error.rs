use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A user-supplied setting is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("axis {axis} has {count} nodes, at least {min} are required")]
    TooFewNodes { axis: usize, count: usize, min: usize },

    #[error("axis index {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("position {position:?} lies outside the domain")]
    OutsideDomain { position: [f64; 3] },

    #[error("microphones outside the domain: indices {0:?}")]
    MicrophonesOutside(Vec<usize>),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("CFL number {cfl:.4} exceeds 1; largest admissible time step is {max_dt:.6e} s")]
    Cfl { cfl: f64, max_dt: f64 },

    #[error("non-finite value in {field} at step {step}")]
    NonFinite { step: usize, field: &'static str },

    #[error("non-admissible state at step {step}: {field} = {value:e} at node {node}")]
    NotAdmissible {
        step: usize,
        field: &'static str,
        node: usize,
        value: f64,
    },

    #[error("zero pivot in tridiagonal factorization at row {0}")]
    ZeroPivot(usize),

    #[error("time level mismatch: requested {requested}, available {available}")]
    TimeLevel { requested: usize, available: usize },

    #[error("missing target sample for microphone {mic} at step {step}")]
    MissingTarget { mic: usize, step: usize },

    #[error("empty accumulation window")]
    EmptyWindow,

    #[error("sensitivity map is identically zero")]
    NoSignal,

    #[error("signal band [{low}, {high}] Hz is not inside (0, {nyquist}) Hz")]
    Band { low: f64, high: f64, nyquist: f64 },

    /// Raised inside the optimization loop; carries the loop index.
    #[error("loop {iteration}: {source}")]
    Loop {
        iteration: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Attach the optimization loop index.
    pub fn in_loop(self, iteration: usize) -> Self {
        Error::Loop {
            iteration,
            source: alloc::boxed::Box::new(self),
        }
    }

    /// Replace the step index carried by numerical aborts.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::NonFinite { field, .. } => Error::NonFinite { step, field },
            Error::NotAdmissible {
                field, node, value, ..
            } => Error::NotAdmissible {
                step,
                field,
                node,
                value,
            },
            other => other,
        }
    }

    /// True for errors caused by the numerics rather than the configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. } | Error::NotAdmissible { .. } | Error::ZeroPivot(_) => true,
            Error::Loop { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

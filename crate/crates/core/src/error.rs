use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a hypergraph needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex index {index} out of range for {n} vertices (triple #{triple})")]
    OutOfRange { index: i64, n: usize, triple: usize },
    #[error("triple #{triple} {members:?} repeats a vertex")]
    DegenerateTriple { triple: usize, members: [i64; 3] },
    #[error("torus side length must be at least 5, got {0}")]
    TooSmallTorus(usize),
    #[error("torus dimension must be at least 1")]
    ZeroDimension,
    #[error("torus with side {side} and dimension {dim} is too large")]
    TorusTooLarge { side: usize, dim: usize },
    #[error("{name} = {value} is not a probability")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("vertex {0} belongs to no hyperedge")]
    IsolatedVertex(usize),
    #[error("state has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("power series must start with a_0 = 1 and a_1 = 1, got {0:?}")]
    InvalidCoefficients(Vec<f64>),
    #[error("normalization z = {z} is not positive at vertex {vertex}")]
    NonpositiveNormalization { vertex: usize, z: f64 },
    #[error("normalization z = {z} is not finite at vertex {vertex}")]
    NonFiniteNormalization { vertex: usize, z: f64 },
    #[error("state {value} at vertex {vertex} is not in {{-1, +1}}")]
    NonBinaryState { vertex: usize, value: f64 },
    #[error("local normalization {denominator} is not positive at vertex {vertex}")]
    SingularLocalNormalization { vertex: usize, denominator: f64 },
    #[error("state {value} at vertex {vertex} is neither {lo} nor {hi}")]
    BadRange { vertex: usize, value: f64, lo: f64, hi: f64 },
    #[error("lambda {lambda} outside (-{limit}, {limit})")]
    LambdaOutOfRange { lambda: f64, limit: f64 },
    #[error("closed form has a vanishing denominator ({0})")]
    SingularDenominator(f64),
    #[error("degree-weighted initial sum vanishes, shift is undefined")]
    ZeroWeightedSum,
    #[error("motif graph is disconnected; the prediction is undefined")]
    Disconnected,
    #[error("second eigenvalue nu = {0} is not below 1")]
    NuNotLessThanOne(f64),
    #[error("ensemble initial probability is {0}, anti-concentration requires 1/2")]
    WrongInitProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not prefix-free: {0} is a proper prefix of {1}")]
    NotPrefixFree(String, String),

    #[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
    InvalidBits(String),

    #[error("cannot parse rational {0:?}")]
    InvalidRational(String),

    #[error("power of a set containing the empty string (n = {0})")]
    PowerOfEpsilon(usize),

    #[error("threshold {0} must be > 1")]
    InvalidThreshold(String),

    #[error("martingale is not normed: value at the empty string is {0}")]
    NotNormed(String),

    #[error("invalid martingale table: {0}")]
    InvalidTable(String),

    #[error("zero capital at prefix {0:?} while averaging translated martingales")]
    ZeroPrefix(String),

    #[error("dead capital at {0:?}")]
    DeadCapital(String),

    #[error("capital already reached the threshold at {0:?}")]
    AlreadyWon(String),

    #[error("not a winning set: {0}")]
    NotWinningSet(String),

    #[error("set is not bounded: measure {0} >= 1")]
    Unbounded(String),

    #[error("tails escape the cover: {}", .0.join(", "))]
    TailEscapes(Vec<String>),

    #[error("test level {0} was not supplied")]
    MissingLevel(usize),

    #[error("invalid test family: {0}")]
    InvalidTest(String),

    #[error("conditional measure is 1 at {0:?}")]
    FullConditional(String),

    #[error("threshold {threshold} must satisfy measure {measure} < q < 1")]
    BadThreshold { threshold: String, measure: String },

    #[error("slack violated: {0}")]
    SlackViolated(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("no escape at stage {stage}: every block of W is fully covered")]
    NoEscape {
        stage: usize,
        certificate: Box<crate::diagonal::CoveringCertificate>,
    },

    #[error("Kraft-Chaitin weight {0} exceeds 1")]
    WeightOverflow(String),

    #[error("staged values are not monotone: {0}")]
    NonMonotone(String),

    #[error("target sum {target} is smaller than the current sum {sum}")]
    NTooSmall { target: String, sum: String },

    #[error("{0} is not a dyadic rational in [0, 1]")]
    NonDyadicAlpha(String),

    #[error("series value {0} exceeds 1")]
    ValueOverOne(String),

    #[error("exponent weight {weight} is not below 1/q = {bound}")]
    WeightTooLarge { weight: String, bound: String },

    #[error("stage {0} was not supplied")]
    MissingStage(usize),

    #[error("expansion too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown subcommand {0:?}")]
    UnknownSubcommand(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant name, used in CLI reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotPrefixFree(..) => "NotPrefixFree",
            Error::InvalidBits(_) => "InvalidBits",
            Error::InvalidRational(_) => "InvalidRational",
            Error::PowerOfEpsilon(_) => "PowerOfEpsilon",
            Error::InvalidThreshold(_) => "InvalidThreshold",
            Error::NotNormed(_) => "NotNormed",
            Error::InvalidTable(_) => "InvalidTable",
            Error::ZeroPrefix(_) => "ZeroPrefix",
            Error::DeadCapital(_) => "DeadCapital",
            Error::AlreadyWon(_) => "AlreadyWon",
            Error::NotWinningSet(_) => "NotWinningSet",
            Error::Unbounded(_) => "Unbounded",
            Error::TailEscapes(_) => "TailEscapes",
            Error::MissingLevel(_) => "MissingLevel",
            Error::InvalidTest(_) => "InvalidTest",
            Error::FullConditional(_) => "FullConditional",
            Error::BadThreshold { .. } => "BadThreshold",
            Error::SlackViolated(_) => "SlackViolated",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::NoEscape { .. } => "NoEscape",
            Error::WeightOverflow(_) => "WeightOverflow",
            Error::NonMonotone(_) => "NonMonotone",
            Error::NTooSmall { .. } => "NTooSmall",
            Error::NonDyadicAlpha(_) => "NonDyadicAlpha",
            Error::ValueOverOne(_) => "ValueOverOne",
            Error::WeightTooLarge { .. } => "WeightTooLarge",
            Error::MissingStage(_) => "MissingStage",
            Error::TooLarge(_) => "TooLarge",
            Error::Parse(_) => "ParseError",
            Error::UnknownSubcommand(_) => "UnknownSubcommand",
            Error::Io(_) => "Io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("order cap exceeded: the group has more than {cap} elements")]
    OrderCap { cap: usize },
    #[error("subgroup cap exceeded: more than {cap} subgroups")]
    SubgroupCap { cap: usize },
    #[error("too many maximal classes: {found} exceeds the limit of {limit}")]
    TooManyMaximalClasses { found: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the given set is not a subgroup")]
    NotSubgroup,
    #[error("the given subgroup is not normal")]
    NotNormal,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("empty index set")]
    EmptySet,
    #[error("waiting time is almost surely infinite: a union of sets has measure zero")]
    InfiniteWaitingTime,
    #[error("state space cap exceeded: {found} sets, at most {limit} allowed")]
    StateCap { found: usize, limit: usize },
    #[error("invalid json: {0}")]
    Json(String),
}

impl Error {
    // Stable short code for machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegreeMismatch(..) => "degree_mismatch",
            Error::InvalidPermutation(_) => "invalid_permutation",
            Error::OrderCap { .. } => "order_cap",
            Error::SubgroupCap { .. } => "subgroup_cap",
            Error::TooManyMaximalClasses { .. } => "maximal_class_cap",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotSubgroup => "not_subgroup",
            Error::NotNormal => "not_normal",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::EmptySet => "empty_set",
            Error::InfiniteWaitingTime => "infinite_waiting_time",
            Error::StateCap { .. } => "state_cap",
            Error::Json(_) => "invalid_json",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

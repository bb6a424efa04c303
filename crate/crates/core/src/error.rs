use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("belief operator `L` is not allowed in propositional formulas")]
    BeliefInPropositional,

    #[error("connective `{0}` is not in the basis")]
    ConnectiveNotInBasis(String),

    #[error("assignment has no value for atom `{0}`")]
    MissingAtom(String),

    #[error("resource limit exceeded: {what} ({actual} > {limit})")]
    ResourceLimit { what: String, limit: usize, actual: usize },

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("not a pseudo-clique: {0}")]
    NotPseudoClique(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn limit(what: impl Into<String>, limit: usize, actual: usize) -> Self {
        Error::ResourceLimit {
            what: what.into(),
            limit,
            actual,
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors produced anywhere in the composition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document{}: {message}", location(.file, .line))]
    Parse {
        file: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(String),

    #[error("concept `{0}` has an undefined parent `{1}`")]
    UndefinedParent(String, String),

    #[error("cyclic parent chain through concept `{0}`")]
    CyclicTaxonomy(String),

    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),

    #[error("unresolved concept references: {}", .0.join(", "))]
    UnresolvedReferences(Vec<String>),

    #[error("invalid service repository: {0}")]
    InvalidRepository(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("request cannot be satisfied; uncovered wanted concepts: {}", .uncovered.join(", "))]
    UnsatisfiableRequest { uncovered: Vec<String> },

    #[error("service `{service}` has {width} distinct inputs, over the {limit}-bit limit")]
    InputWidthExceeded {
        service: String,
        width: usize,
        limit: u32,
    },

    #[error("inputs of service `{0}` cannot be covered by its precursors")]
    UncoverableInputs(String),

    #[error("service `{0}` is not part of the graph")]
    NotInGraph(String),

    #[error("instance has {size} services, over the oracle limit of {limit}")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("no subset of services satisfies the request")]
    Infeasible,

    #[error("contradictory generator parameters: {0}")]
    InvalidParams(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(file: &Option<String>, line: &Option<usize>) -> String {
    match (file, line) {
        (Some(f), Some(l)) => format!(" ({f}:{l})"),
        (Some(f), None) => format!(" ({f})"),
        (None, Some(l)) => format!(" (line {l})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            file: None,
            line: None,
            message: message.into(),
        }
    }

    /// Attach a file name to a parse error that does not carry one yet.
    pub fn in_file(self, path: &str) -> Self {
        match self {
            Error::Parse {
                file: None,
                line,
                message,
            } => Error::Parse {
                file: Some(path.to_string()),
                line,
                message,
            },
            other => other,
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsatisfiableRequest { .. } | Error::Infeasible => 2,
            Error::Parse { .. }
            | Error::DuplicateConcept(_)
            | Error::UndefinedParent(..)
            | Error::CyclicTaxonomy(_)
            | Error::UnknownConcept(_)
            | Error::UnresolvedReferences(_)
            | Error::InvalidRepository(_)
            | Error::InvalidRequest(_)
            | Error::InvalidParams(_)
            | Error::Io(_) => 3,
            Error::InputWidthExceeded { .. } | Error::InstanceTooLarge { .. } => 4,
            Error::UncoverableInputs(_) | Error::NotInGraph(_) | Error::Internal(_) => 1,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::DuplicateConcept(_) => "duplicate_concept",
            Error::UndefinedParent(..) => "undefined_parent",
            Error::CyclicTaxonomy(_) => "cyclic_taxonomy",
            Error::UnknownConcept(_) => "unknown_concept",
            Error::UnresolvedReferences(_) => "unresolved_references",
            Error::InvalidRepository(_) => "invalid_repository",
            Error::InvalidRequest(_) => "invalid_request",
            Error::UnsatisfiableRequest { .. } => "unsatisfiable_request",
            Error::InputWidthExceeded { .. } => "input_width_exceeded",
            Error::UncoverableInputs(_) => "uncoverable_inputs",
            Error::NotInGraph(_) => "not_in_graph",
            Error::InstanceTooLarge { .. } => "instance_too_large",
            Error::Infeasible => "infeasible",
            Error::InvalidParams(_) => "invalid_params",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::diagram::Alphabet;

/// Errors raised while constructing diagrams.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("cannot compose sequentially: left side has {left_out} output wire(s), right side has {right_in} input wire(s)")]
    SeqMismatch { left_out: usize, right_in: usize },
    #[error("feedback needs at least one input and one output wire, got {ins}->{outs}")]
    FbArity { ins: usize, outs: usize },
    #[error("cannot mix {left:?} and {right:?} basics in one diagram")]
    AlphabetMix { left: Alphabet, right: Alphabet },
    #[error("{construct} expects a {expected} diagram, got {ins}->{outs}")]
    MacroArity {
        construct: &'static str,
        expected: &'static str,
        ins: usize,
        outs: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{what}: expected arity {expected}, found {found}")]
    Arity {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("diagram uses the {found:?} alphabet but the instance expects {expected}")]
    WrongAlphabet {
        expected: &'static str,
        found: Alphabet,
    },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("series is not invertible (zero constant term)")]
    NotInvertible,
    #[error("imprecision overflow: order {order} exceeds truncation degree {trunc}")]
    ImprecisionOverflow { order: usize, trunc: usize },
    #[error("address space exhausted: allocating {cells} cell(s) at address {at} does not fit the model (addrs={addrs}, values {lo}..{hi})")]
    AddressSpaceExhausted {
        at: i64,
        cells: usize,
        addrs: usize,
        lo: i64,
        hi: i64,
    },
    #[error("cost expression is negative ({value}) at {store}")]
    NegativeCost { value: i64, store: String },
    #[error("triple does not hold: {0}")]
    TripleFalse(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

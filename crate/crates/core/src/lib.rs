//! Abstract Hoare logic over traced block diagrams.
//!
//! One proof kernel ([`kernel`]) checks and synthesizes derivations with the
//! rules Ax, Con, Seq, Par and Fb. It is instantiated by four verification
//! functors: partial correctness of flowcharts ([`fc`]), running time
//! ([`rt`]), separation logic on bounded heaps ([`pointer`]) and stream
//! circuits over truncated power series ([`stream`]).

pub mod config;
pub mod cost;
pub mod diagram;
pub mod error;
pub mod expr;
pub mod fc;
pub mod flowchart;
pub mod gen;
pub mod kernel;
pub mod pointer;
pub mod rt;
pub mod script;
pub mod sexpr;
pub mod stream;

pub use config::{Config, CostModel};
pub use cost::NatInf;
pub use diagram::{Alphabet, Basic, Diagram, Node};
pub use error::{Error, Result, TypeError};

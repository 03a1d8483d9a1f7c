//! ReAct question-answering runtime with an optional focused mode that
//! restates the question before every reasoning step and stops as soon as an
//! action repeats.

pub mod backend;
pub mod config;
pub mod engine;
pub mod harness;
pub mod prompting;
pub mod tools;
pub mod trace;
pub mod transcript;

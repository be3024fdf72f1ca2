//! The cell expression language: a deliberately small, deterministic grammar
//! of assignments and builtin calls.

pub mod ast;
mod lexer;
mod parser;

pub use parser::parse_cell;

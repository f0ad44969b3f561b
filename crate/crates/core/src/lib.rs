//! Typeclass instance resolution.

pub mod bench;
pub mod cli;
pub mod corpus;
pub mod hierarchy;
pub mod lint;
pub mod syntax;
pub mod synth;
pub mod term;

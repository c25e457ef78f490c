//! Front end for the resolution engine: a line-oriented input language
//! for algebras, modules, maps, and short exact sequences, plus command
//! dispatch with human- and machine-readable reports.

pub mod parse;
pub mod run;

//! Core of the LTL-to-circuit toolkit: temporal logic, and-inverter graphs,
//! explicit-state model checking, realizability oracles, specification
//! pattern mining, dataset generation and tokenization.

pub mod aiger;
pub mod datagen;
pub mod oracle;
pub mod ltl;
pub mod mine;
pub mod random;
pub mod specs;
pub mod tokenizer;
pub mod verify;

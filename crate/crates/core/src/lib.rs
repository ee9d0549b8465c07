//! Block-based ansatz search for variational quantum eigensolvers.
//!
//! A genome of two-qubit blocks decodes into a [`circuit::Circuit`], which is
//! trained against a problem [`pauli::Hamiltonian`] on an exact statevector
//! simulator. The [`search`] loop asks a [`llm::Proposer`] for genomes and
//! feeds scored history back into the next prompt.

pub mod bench;
pub mod circuit;
pub mod llm;
pub mod pauli;
pub mod problems;
pub mod search;
pub mod simulator;
pub mod vqe;

//! Termination proofs for left-linear term rewriting systems.
//!
//! A rewriting system is compiled into a signature of algebraic circuits
//! (gates wired into acyclic port networks) together with rewrite rules on
//! those circuits: one rule per term rule, plus resource-management rules
//! that push explicit copy/erase/swap gates out of the way.  Termination is
//! then certified by a circuit interpretation: every gate is assigned
//! descending currents (polynomial output sizes) and a heat (a polynomial
//! cost, scalar or multiset).  A rule set terminates when every rule weakly
//! decreases currents and strictly decreases heat, with weaker obligations
//! available for restricted syntactic classes.

pub mod circuit;
pub mod cli;
pub mod engine;
pub mod interp;
pub mod prover;
pub mod translation;
pub mod trs;

//! Recognizability-based realizability over ordinal Turing machines,
//! executed on hereditarily finite sets.

pub mod formula;
pub mod hfset;
pub mod kp;
pub mod ordinal;
pub mod ordset;
pub mod otm;
pub mod proofcalc;
pub mod realizability;
pub mod recognizer;
pub mod selftest;
pub mod setcode;

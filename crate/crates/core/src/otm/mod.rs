//! Ordinal Turing machines: the micro machine, the macro VM in which the
//! realizer programs are written, and the library of those programs.

use std::fmt;

use thiserror::Error;

use crate::ordset::OrdSet;

mod exec;
pub mod library;
pub mod macro_vm;
pub mod micro;

pub use exec::{run_program, synth_program, MalformedOperand};
pub use macro_vm::{macro_run, macro_synth, MacroProgram};
pub use micro::{micro_run, micro_run_with, MicroLimits, MicroProgram};

/// Default fuel budget, in macro instructions or micro steps.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Halted {
        output_bit: bool,
        output_set: OrdSet,
        steps: u64,
    },
    FuelExhausted {
        steps: u64,
    },
    LimitUndetermined {
        steps: u64,
    },
}

impl RunResult {
    pub fn accepted(&self) -> Option<bool> {
        match self {
            RunResult::Halted { output_bit, .. } => Some(*output_bit),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RunResult::Halted { steps, .. }
            | RunResult::FuelExhausted { steps }
            | RunResult::LimitUndetermined { steps } => *steps,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            RunResult::Halted { .. } => "halted",
            RunResult::FuelExhausted { .. } => "fuel-exhausted",
            RunResult::LimitUndetermined { .. } => "limit-undetermined",
        }
    }
}

impl fmt::Display for RunResult {
    /// The small record form: `status`, `output_bit`, `output_set`,
    /// `steps_used`, one per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status {}", self.status())?;
        if let RunResult::Halted {
            output_bit,
            output_set,
            ..
        } = self
        {
            writeln!(f, "output_bit {}", u8::from(*output_bit))?;
            writeln!(f, "output_set {output_set}")?;
        }
        write!(f, "steps_used {}", self.steps())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, token {token}: {msg}")]
pub struct AsmError {
    pub line: usize,
    pub token: usize,
    pub msg: String,
}

/// Either kind of machine program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Macro(MacroProgram),
    Micro(MicroProgram),
}

impl Program {
    /// Canonical text; assembling it yields an equal program.
    pub fn disassemble(&self) -> String {
        match self {
            Program::Macro(p) => p.to_string(),
            Program::Micro(p) => p.to_string(),
        }
    }
}

/// Texts whose first meaningful line is `micro` are transition tables;
/// everything else is macro assembly.
pub fn assemble(text: &str) -> Result<Program, AsmError> {
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty());
    if first == Some("micro") {
        micro::assemble_micro(text).map(Program::Micro)
    } else {
        macro_vm::assemble_macro(text).map(Program::Macro)
    }
}

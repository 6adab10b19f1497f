//! Relational empirical and hidden-variable models: property checkers,
//! canonical realizations, no-go witnesses, and deciders for the classes
//! LHV ⊂ QM ⊂ NS^p ⊂ NS of non-local behaviour.

pub mod catalog;
pub mod cli;
pub mod constructions;
pub mod deciders;
pub mod format;
pub mod lp;
pub mod model;
pub mod probabilistic;
pub mod properties;
pub mod quantum;
pub mod rational;

pub use model::{
    Cell, EmpiricalModel, HiddenVariableModel, HvCell, ModelError, PartialTuple, Permutation, Slot, SystemType,
};
pub use probabilistic::{ProbEmpiricalModel, ProbHVModel};
pub use properties::{EmpiricalProperty, HiddenProperty, ProbProperty, Violation};
pub use rational::Rational;

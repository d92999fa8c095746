//! Exact term algebra for deriving and checking the single equations for f.

pub mod derive;
pub mod parse;
pub mod plan;
pub mod printed;
pub mod termsum;

pub use derive::{derive_eta, derive_scalar_equation};
pub use plan::{emit_evaluator, golden_plan, EvalPlan, Form};
pub use termsum::{diff_termsums, Base, Monomial, TermSum};

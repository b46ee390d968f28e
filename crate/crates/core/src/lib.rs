//! Exact construction and verification of analytic bijections of
//! `Q ∩ [0,1]`.

pub mod avoid;
pub mod basic;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod heights;
pub mod lex;
pub mod pila;
pub mod poly;
pub mod rat;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use rat::{Rat, UnitRat, Verdict};

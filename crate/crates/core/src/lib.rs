//! Parse, validate and numerically evaluate tensor formulas written with the
//! `tensor1` OpenMath content dictionary.
//!
//! The crate is layered bottom-up:
//!
//! - [`om`]: OpenMath object model, XML reader/writer and a compact text syntax.
//! - [`autodiff`]: scalar expression trees with forward-mode derivatives.
//! - [`tensor`]: charts, frames and dense row-major tensors with their
//!   transformation laws.
//! - [`semantics`]: validation and evaluation of `tensor1` formulas against an
//!   environment of frames and tensors.
//! - [`cd`]: the `tensor1` content dictionary document.

pub mod autodiff;
pub mod cd;
pub mod om;
pub mod semantics;
pub mod symbols;
pub mod tensor;

//! Arithmetically refined session types.

pub mod arith;
pub mod ast;
pub mod equality;
pub mod naming;
pub mod oracle;
pub mod syntax;
pub mod tcm;
pub mod validity;

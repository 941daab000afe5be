//! Gauge integrals of vector-valued functions and of the multifunctions
//! `G(t) = conv{0, g(t)}` they determine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demos;
pub mod error;
pub mod function;
pub mod geometry;
pub mod integrate;
pub mod partition;

pub use error::{Error, Result};

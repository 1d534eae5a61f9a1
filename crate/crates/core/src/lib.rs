#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod kernels;
pub mod policy;
pub mod series;
pub mod sim;

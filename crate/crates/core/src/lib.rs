#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bv;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod functional;
pub mod integrand;
pub mod linalg;
pub mod mesh;
pub mod minimize;
pub mod qc;
pub mod qslb;
pub mod quadrature;
pub mod report;
pub mod sequences;
pub mod verdict;

pub use error::{Error, Result};
pub use linalg::{Mat, Point};

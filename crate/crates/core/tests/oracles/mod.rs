//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the code under test to compute an
//! expected value; it only uses the library's data types and `predict` as the
//! ground truth for where an instance lands.

#![allow(dead_code)]

pub mod chi_square;
pub mod gen;
pub mod gradient;
pub mod split;
pub mod whatif;

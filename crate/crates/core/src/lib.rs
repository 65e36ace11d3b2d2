//! Exact verification of spherical designs, their minimal-type certificates,
//! derived codes and the combinatorial structures they induce.

pub mod exactnum;
pub mod gegenbauer;
pub mod configs;
pub mod design;
pub mod derived;
pub mod minimaltype;
pub mod structure;
pub mod dimfilter;

pub use exactnum::{QuadExt, Rational};


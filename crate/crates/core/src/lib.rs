//! Exact construction and verification of witness configurations for
//! isometries of ε-symmetric forms and for bilinear forms under twisted
//! conjugation, together with minimal-length data for elliptic conjugacy
//! classes of exceptional Weyl groups.

pub mod error;
pub mod block_seq;
pub mod exact_scalar;
pub mod iso_models;
pub mod iso_witness;
pub mod profile;
pub mod report;
pub mod suites;
pub mod twisted_models;
pub mod twisted_witness;
pub mod weyl;

pub use error::{Result, WitError};
pub use exact_scalar::{GaussRational, Matrix, Poly, Rational, Vector};

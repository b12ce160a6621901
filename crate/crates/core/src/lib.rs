//! Construction of RLWE instances over subfields of cyclotomic fields and
//! the statistical attacks that exploit reduction modulo small primes.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod attacks;
pub mod cyclo_group;
pub mod embedding;
pub mod error;
pub mod finite_field;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod real;
pub mod residue;
pub mod rlwe;
pub mod rng;
pub mod stats;

pub use attacks::{AttackReport, BinChoice, Verdict};
pub use cyclo_group::SubgroupDescriptor;
pub use error::{Error, Result};
pub use lattice::{LatticeBundle, SigmaMode};
pub use residue::ResidueContext;
pub use rlwe::{DualObservation, DualParams, FieldGeometry, InstanceParams, RlweInstance, RlweSample, SecretMode};
pub use stats::{BinSpec, TestResult};

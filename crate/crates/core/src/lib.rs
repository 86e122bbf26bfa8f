//! Construction and verification of collections of `2n − 2` periodic orbits
//! of `zⁿ` whose multipliers are locally independent in the space of
//! degree-`n` rational maps.
//!
//! The pieces, bottom up:
//!
//! * [`ratmap`]: rational maps on the sphere, multipliers, resultant, the
//!   `2n − 2` parameter family through `zⁿ`;
//! * [`periodic`]: exact periodic points of `zⁿ` as residues, counting,
//!   Newton continuation to nearby maps;
//! * [`derivatives`]: closed-form multiplier derivatives and the
//!   finite-difference oracle;
//! * [`jacobian`]: the multiplier Jacobian and its leading minors;
//! * [`certificate`]: the inductive search and its verification;
//! * [`cli`]: the batch command front end.

// `!(x > t)` is used deliberately so that NaN counts as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod cli;
pub mod decimal;
pub mod derivatives;
pub mod error;
pub mod exec;
pub mod jacobian;
pub mod linalg;
pub mod periodic;
pub mod poly;
pub mod ratmap;

pub use certificate::{
    check_period_conditions, construct_certificate, explore_beyond_conditions, order_periods,
    verify_certificate, CertOptions, Certificate, ConditionReport, Verification,
};
pub use error::{Error, Result};
pub use periodic::{PeriodVector, RootPoint};
pub use ratmap::{ParamVector, RationalMap, SpherePoint};

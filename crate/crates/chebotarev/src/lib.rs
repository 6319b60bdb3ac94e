pub mod bitset;
pub mod chebotarev_engine;
pub mod closed_forms;
pub mod coupon_collector;
pub mod decimal;
pub mod error;
pub mod group_core;
pub mod numtheory;
pub mod scalar;
pub mod simulation;
pub mod subgroup_lattice;
pub mod sym_alt;
pub mod tables;

pub type Rational = num_rational::BigRational;

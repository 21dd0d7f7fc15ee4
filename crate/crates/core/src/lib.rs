//! Levin search over a learned program prior, with incremental training.

pub mod grammar;
pub mod induction;
pub mod machine;
pub mod search;
pub mod transfer;

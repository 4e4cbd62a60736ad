//! Concrete program domains.

pub mod animals;
pub mod regex;

//! Auxiliary gadgets with attached certificates: regular expanders,
//! Reed–Solomon codes and (m,l)-set systems.

pub mod code;
pub mod expander;
pub mod field;
pub mod setsystem;

pub use code::{build_code, list_count, verify_code, Code, ListCount};
pub use expander::{build_expander, second_eigenvalue, ExpanderBuild, RegularGraph, SpectralCertificate};
pub use setsystem::{build_set_system, hypercube_set_system, verify_set_system, SetSystem};

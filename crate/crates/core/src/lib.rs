//! Recognition of P- and P0-tensors, structured tensor classes, H-eigenpairs
//! and the tensor complementarity problem, on dense real tensors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod classes;
pub mod error;
pub mod examples;
pub mod io;
pub mod linalg;
pub mod pcheck;
pub mod provenance;
pub mod sampling;
pub mod spectral;
pub mod tcp;
pub mod tensor;

pub use budget::SearchBudget;
pub use error::{Error, Result};
pub use pcheck::{check_p, check_p0, check_s, phi_p, phi_p0, PVerdict, Property};
pub use provenance::Provenance;
pub use spectral::{find_h_eigenpairs, nqz_spectral_radius, EigenPair, SpectralRadiusResult};
pub use tcp::{explore_solutions, solve_tcp, TcpInstance, TcpSolution};
pub use tensor::{IndexSet, Tensor};

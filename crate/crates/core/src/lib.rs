//! Lattice points under `h^a r^b ≤ x`: exact counts, the Voronoi-type
//! expansion of the error term, its mean-square constant, and the
//! Diophantine counting used in the mean-square analysis.

pub mod cli;
pub mod constants;
pub mod dioph;
pub mod error;
pub mod lattice;
pub mod meansq;
pub mod precision;
pub mod voronoi;
pub mod zeta;

pub use error::{Error, Result};
pub use lattice::{
    d_ab, delta, f_sum, main_term, psi, psi_expansion_residual, summatory_exact, ErrorSample,
    MainTerm, Orientation, Params,
};
pub use precision::DoubleDouble;
pub use zeta::{zeta, ZetaValue};

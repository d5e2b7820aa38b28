//! Ground states and action minimizers of the two-dimensional focusing NLS
//! with an attractive Coulomb potential and a point interaction at the
//! origin.

mod banded;
pub mod functionals;
pub mod grid;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod spectral;
pub mod verify;

//! Born-rule chances, locality conditions and Monte Carlo CHSH experiments
//! for polarization-entangled photon pairs.

pub mod chance;
pub mod harness;
pub mod lhv;
pub mod locality;
pub mod qcore;
pub mod spacetime;

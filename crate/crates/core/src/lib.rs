//! Simulation and analysis toolkit for nonlocal two-qubit gates built by gate
//! teleportation over a photonic quantum network with a multimode memory.

pub mod afcpulse;
pub mod algo;
pub mod analysis;
pub mod config;
pub mod error;
pub mod netsim;
pub mod photon;
pub mod qsim;
pub mod teleport;

pub use error::{Error, Result};

// The guide's chapters, compiled so their examples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/photons.md")]
    mod photons {}
    #[doc = include_str!("../../../book/src/teleportation.md")]
    mod teleportation {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

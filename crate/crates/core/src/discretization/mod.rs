//! Grids, kernels, grid and pair functions, the double-sum quadrature and
//! the approximation constructions.

mod approximate;
mod grid;
mod gridfn;
mod kernel;
mod quadrature;

pub use approximate::{approximate, mollifier_weights, mollify, Approximation};
pub use grid::{build_grid, BoxSpec, Component, DomainSpec, Grid, MAX_PAIRS};
pub use gridfn::{GridFunction, PairFunction};
pub use kernel::{build_kernel, Kernel, KernelSpec};
pub use quadrature::{pairwise_sum, Discretization};

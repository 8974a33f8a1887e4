//! Grids on unions of boxes, kernels and the plain double-sum quadrature.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, BoxSpec, Discretization, DomainSpec, Grid, KernelSpec};

fn main() -> orlicz::Result<()> {
    // an L-shaped domain from two rectangles
    let domain = DomainSpec {
        boxes: vec![BoxSpec::rect([0.0, 0.0], [1.0, 0.5], [16, 8]), BoxSpec::rect([0.0, 0.5], [0.5, 1.0], [8, 8])],
    };
    let grid = Arc::new(Grid::new(&domain)?);
    println!("{} nodes, |Ω| = {}, diameter {:.4}", grid.len(), grid.total_measure(), grid.diameter());

    let kernels = [
        ("indicator r=0.25", KernelSpec::Indicator { r: 0.25 }),
        ("gaussian σ=0.2", KernelSpec::Gaussian { sigma: 0.2, r0: None }),
        ("exponential λ=4", KernelSpec::Exp { lambda: 4.0, r0: None }),
    ];
    for (name, spec) in kernels {
        let disc = Discretization::new(grid.clone(), Arc::new(build_kernel(&spec, 2)?))?;
        // ∫∫ a(x - y) dx dy
        let mass = disc.pair_sum(|_, _| 1.0)?;
        let k = disc.kernel();
        println!("{name:<18} c0 = {:.4}  r0 = {:.4}  ∫∫a = {mass:.6}", k.c0(), k.r0());
    }
    Ok(())
}

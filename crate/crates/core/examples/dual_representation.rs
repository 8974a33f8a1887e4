//! The bounded functional generated by `w`, evaluated directly and through
//! its pair kernel.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec};
use orlicz::norms::{luxemburg, Modular};
use orlicz::phi::{build_phi, PhiExpression};
use orlicz::solver::{apply_pair_kernel, dual_apply, dual_kernel_representation};

fn main() -> orlicz::Result<()> {
    let grid = Arc::new(Grid::new(&DomainSpec::unit_interval(64))?);
    let disc =
        Discretization::new(grid.clone(), Arc::new(build_kernel(&KernelSpec::Gaussian { sigma: 0.3, r0: None }, 1)?))?;
    let phi = build_phi(&PhiExpression::power(2.5, 1.0))?;
    let w = GridFunction::from_expr(&grid, "exp(x0) * sin(3*x0)")?;

    let lambda = luxemburg(&disc, &phi, Modular::F(&w))?.value;
    println!("|w| = {lambda:.10}, φ_w(w) = {:.10}, |w|² = {:.10}", dual_apply(&disc, &phi, &w, &w)?, lambda * lambda);
    let kernel = dual_kernel_representation(&disc, &phi, &w)?;
    for src in ["x0", "x0^3 - x0", "cos(5*x0)"] {
        let u = GridFunction::from_expr(&grid, src)?;
        let direct = dual_apply(&disc, &phi, &w, &u)?;
        let via_kernel = apply_pair_kernel(&disc, &kernel, &u)?;
        println!("u = {src:<10} φ_w(u) = {direct:+.12}  kernel = {via_kernel:+.12}");
    }
    Ok(())
}

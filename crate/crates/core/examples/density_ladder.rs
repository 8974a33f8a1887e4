//! Approximation ladder for a discontinuous function and the mollification
//! rate for a smooth one.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec};
use orlicz::harness::{density_ladder, mollification_order};
use orlicz::phi::{build_phi, PhiExpression};

fn main() -> orlicz::Result<()> {
    let grid = Arc::new(Grid::new(&DomainSpec::unit_interval(1024))?);
    let disc = Discretization::new(grid.clone(), Arc::new(build_kernel(&KernelSpec::constant_on(1.0), 1)?))?;
    let phi = build_phi(&PhiExpression::square())?;

    let u = GridFunction::from_expr(&grid, "x0*step(x0 - 0.25)*step(0.75 - x0)")?;
    let ladder: Vec<f64> = (0..6).map(|k| 0.2 / f64::powi(2.0, k)).collect();
    println!("truncation, cutoff and mollification:");
    for r in density_ladder(&disc, &phi, &u, &ladder, None)? {
        println!("  eps = {:<8} F(u - u_eps) = {:.3e}", r.eps, r.gap);
    }

    let smooth = GridFunction::from_expr(&grid, "step(x0 - 0.25)*step(0.75 - x0)*sin(2*pi*(x0 - 0.25))^4")?;
    let (rungs, order) = mollification_order(&disc, &phi, &smooth, &[0.2, 0.1, 0.05, 0.025])?;
    println!("mollification only:");
    for r in &rungs {
        println!("  eps = {:<8} |u - u_eps|_F = {:.3e}", r.eps, r.gap);
    }
    println!("observed order {order:.3}");
    Ok(())
}

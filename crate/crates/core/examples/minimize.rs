//! Minimizes the energy for a manufactured right-hand side and recovers the
//! function it was built from.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec};
use orlicz::phi::{build_phi, PhiExpression};
use orlicz::solver::{el_residual, minimize, Energy, SolverOptions};

fn main() -> orlicz::Result<()> {
    let grid = Arc::new(Grid::new(&DomainSpec::unit_interval(48))?);
    let disc =
        Discretization::new(grid.clone(), Arc::new(build_kernel(&KernelSpec::Gaussian { sigma: 0.3, r0: None }, 1)?))?;
    let phi = build_phi(&PhiExpression::sum(vec![PhiExpression::square(), PhiExpression::power(3.0, 0.25)]))?;
    let p = phi.p_minus();

    let truth = GridFunction::from_expr(&grid, "cos(3*x0) - x0")?;
    let g = Energy::manufactured_rhs(&disc, &phi, p, &truth)?;
    let opts = SolverOptions::default();
    for start in ["0", "5*sin(7*x0)"] {
        let u0 = GridFunction::from_expr(&grid, start)?;
        let r = minimize(&disc, &phi, p, &g, &u0, &opts)?;
        let err = r.u_star.sub(&truth)?.max_abs();
        println!(
            "start {start:<12} {} iterations, E: {:.6} -> {:.10}, |∇E| = {:.1e}, residual {:.1e}, max error {err:.1e}",
            r.iterations,
            r.initial_energy,
            r.energy,
            r.grad_norm,
            el_residual(&disc, &phi, p, &r.u_star, &g)?
        );
    }
    Ok(())
}

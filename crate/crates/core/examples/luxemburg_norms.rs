//! Luxemburg norms of one function under several integrands, with the
//! modular sandwich and the equivalence of the two norms.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec};
use orlicz::norms::{f_norm, g_norm, luxemburg, verify_sandwich, Modular};
use orlicz::phi::{build_phi, PhiExpression};

fn main() -> orlicz::Result<()> {
    let grid = Arc::new(Grid::new(&DomainSpec::unit_interval(200))?);
    let disc = Discretization::new(grid.clone(), Arc::new(build_kernel(&KernelSpec::constant_on(1.0), 1)?))?;
    let u = GridFunction::from_expr(&grid, "x0")?;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let phi = build_phi(&PhiExpression::power(p, 1.0))?;
        let lux = luxemburg(&disc, &phi, Modular::F(&u))?;
        let s = verify_sandwich(&disc, &phi, &u)?;
        let (f, g) = (f_norm(&disc, &phi, &u)?, g_norm(&disc, &phi, &u)?);
        println!(
            "p = {p}: |u|_F = {:.6} ({} bisections)  {:.4} <= F(u) = {:.4} <= {:.4}  f = {f:.6}  g = {g:.6}  g/f = {:.4}",
            lux.value, lux.iterations, s.lower, s.functional, s.upper, g / f
        );
    }
    Ok(())
}

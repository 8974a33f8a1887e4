//! The nonlocal functionals of one function and one pair function.

use std::sync::Arc;

use orlicz::discretization::{build_kernel, Discretization, DomainSpec, Grid, GridFunction, KernelSpec, PairFunction};
use orlicz::functionals::{
    eval_F, eval_F_power, eval_G, eval_H, eval_H_star, eval_ell, eval_pairing_Phi, m_subspace_residual,
};
use orlicz::phi::{build_phi, PhiExpression};

fn main() -> orlicz::Result<()> {
    let grid = Arc::new(Grid::new(&DomainSpec::unit_interval(128))?);
    let disc =
        Discretization::new(grid.clone(), Arc::new(build_kernel(&KernelSpec::Gaussian { sigma: 0.25, r0: None }, 1)?))?;
    let phi = build_phi(&PhiExpression::sum(vec![PhiExpression::square(), PhiExpression::power(3.0, 0.5)]))?;
    let u = GridFunction::from_expr(&grid, "sin(2*pi*x0)")?;
    let v = GridFunction::from_expr(&grid, "x0^2")?;

    println!("F(u)        = {:.10}", eval_F(&disc, &phi, &u)?.value());
    println!("G(u)        = {:.10}", eval_G(&disc, &phi, phi.p_minus(), &u)?.value());
    println!("F_2(u)      = {:.10}", eval_F_power(&disc, 2.0, &u)?.value());
    println!("ℓ(u, v)     = {:.10}", eval_ell(&disc, &phi, &u, &v)?);
    println!("Φ(u, v)     = {:.10}", eval_pairing_Phi(&disc, &phi, &u, &v)?);

    let du = PairFunction::difference(&u);
    println!("H(Δu)       = {:.10}", eval_H(&disc, &phi, &du)?.value());
    println!("H*(Δu / 4)  = {:.10}", eval_H_star(&disc, &phi, &du.scale(0.25))?.value());
    // a product s(x)s(y) is balanced, an antisymmetric difference is not
    let s = v.values().to_vec();
    let n = s.len();
    let balanced = PairFunction::dense(n, (0..n * n).map(|k| s[k / n] * s[k % n]).collect())?;
    println!(
        "M-residual  = {:.3e} (product), {:.3e} (difference)",
        m_subspace_residual(&disc, &balanced)?,
        m_subspace_residual(&disc, &du)?
    );
    Ok(())
}

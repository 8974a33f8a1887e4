//! Builds integrands with the combinators, prints their growth constants and
//! compares the declared constants with sampled ones.

use orlicz::expr::Expr;
use orlicz::phi::{
    build_phi, check_conditions, conjugate, estimate_growth_constants, FieldSpec, PhiExpression, SamplingConfig,
};

fn main() -> orlicz::Result<()> {
    let sampling = SamplingConfig::default();
    let cases = [
        ("z^2", PhiExpression::square()),
        ("z^(2 + x0*y0)", PhiExpression::power(FieldSpec::expr("2 + x0*y0")?, 1.0)),
        ("z^1.5 + 0.5 z^3", PhiExpression::sum(vec![PhiExpression::power(1.5, 1.0), PhiExpression::power(3.0, 0.5)])),
        ("z^2 ln(1 + z)", PhiExpression::psi_multiply(PhiExpression::square(), PhiExpression::log(1.0, 1.0))),
        (
            "z^2 + z^4/(1+x0)",
            PhiExpression::Custom {
                expr: Expr::parse("z^2 + z^4 / (1 + x0)")?,
                p_minus: Some(2.0),
                p_plus: Some(4.0),
                beta: None,
            },
        ),
    ];
    println!("{:<18} {:>6} {:>6} {:>8} {:>8} {:>9} {:>8}", "phi", "p-", "p+", "beta", "beta^", "admissible", "phi*(1)");
    for (name, e) in cases {
        let phi = build_phi(&e)?;
        let est = estimate_growth_constants(&phi, &sampling)?;
        let ok = check_conditions(&phi, &sampling).pass();
        let star = conjugate(&phi, 1.0, &[0.5], &[0.5])?;
        let g = phi.growth();
        println!(
            "{name:<18} {:>6.3} {:>6.3} {:>8.3} {:>8.3} {:>9} {star:>8.4}",
            g.p_minus, g.p_plus, g.beta, est.constants.beta, ok
        );
    }
    Ok(())
}

//! The four canonical integrand families with randomized parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FieldSpec, PhiExpression};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `b(x,y) z^p(x,y)`
    VariablePower,
    /// `b1 z^p1 + b2 z^p2`
    SumOfPowers,
    /// `10 B z² + B sin³ z`
    SinePerturbation,
    /// `z^p ln^γ(1 + Υ z)`
    LogMultiplied,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::VariablePower, Family::SumOfPowers, Family::SinePerturbation, Family::LogMultiplied];

    pub fn name(self) -> &'static str {
        match self {
            Family::VariablePower => "variable_power",
            Family::SumOfPowers => "sum_of_powers",
            Family::SinePerturbation => "sine_perturbation",
            Family::LogMultiplied => "log_multiplied",
        }
    }

    /// A random member with exponents in roughly `[1.3, 4]`.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> PhiExpression {
        self.sample_with_floor(rng, 1.3)
    }

    /// A random member whose lower exponent is at least `p_floor` (at
    /// least 2 for the perturbation family).
    pub fn sample_with_floor<R: Rng + ?Sized>(self, rng: &mut R, p_floor: f64) -> PhiExpression {
        let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
        let field = |s: String| FieldSpec::expr(&s).expect("family field parses");
        match self {
            Family::VariablePower => {
                let p0 = r(p_floor, p_floor + 1.5);
                let amp = r(0.0, 0.5);
                let freq = r(0.5, 3.0);
                let b1 = r(0.0, 0.5);
                PhiExpression::power(
                    field(format!("{p0} + {amp}*sin({freq}*x0*y0)^2")),
                    field(format!("1 + {b1}*cos(x0 + y0)^2")),
                )
            }
            Family::SumOfPowers => {
                let p1 = r(p_floor, p_floor + 0.7);
                let p2 = r(p1 + 0.3, p1 + 1.5);
                PhiExpression::sum(vec![PhiExpression::power(p1, r(0.5, 2.0)), PhiExpression::power(p2, r(0.5, 2.0))])
            }
            Family::SinePerturbation => {
                let k = r(0.0, 1.0);
                let b = format!("(1 + {k}*x0*y0)");
                PhiExpression::perturb(
                    PhiExpression::power(2.0, field(format!("10*{b}"))),
                    PhiExpression::custom(&format!("{b}*sin(z)^3")).expect("family term parses"),
                )
            }
            Family::LogMultiplied => {
                let p = r(p_floor, p_floor + 1.0);
                let g1 = r(0.0, 1.0);
                let u0 = r(0.5, 2.0);
                PhiExpression::psi_multiply(
                    PhiExpression::power(p, 1.0),
                    PhiExpression::log(field(format!("1 + {g1}*x0*y0")), field(format!("{u0} + y0"))),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{build_phi, check_conditions, SamplingConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_family_builds_and_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for family in Family::ALL {
            for _ in 0..3 {
                let e = family.sample(&mut rng);
                let phi = build_phi(&e).unwrap_or_else(|err| panic!("{}: {err}", family.name()));
                let report = check_conditions(&phi, &SamplingConfig::default());
                assert!(report.pass(), "{}: {report:?}", family.name());
            }
        }
    }

    #[test]
    fn floor_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for family in Family::ALL {
            let phi = build_phi(&family.sample_with_floor(&mut rng, 2.0)).unwrap();
            assert!(phi.p_minus() >= 2.0);
        }
    }
}

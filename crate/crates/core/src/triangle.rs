//! t-norms and the triangle functions they induce on D+.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distfn::{eps0, StepDistFn};
use crate::error::{Error, Result};
use crate::num::{ExtReal, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TNorm {
    #[serde(rename = "min")]
    Minimum,
    #[serde(rename = "prod")]
    Product,
    #[serde(rename = "luk")]
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Minimum, TNorm::Product, TNorm::Lukasiewicz];

    pub fn apply(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            TNorm::Minimum => a.min(b).clone(),
            TNorm::Product => a * b,
            TNorm::Lukasiewicz => {
                let s = a + b - Rational::one();
                if s > Rational::zero() {
                    s
                } else {
                    Rational::zero()
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TNorm::Minimum => "min",
            TNorm::Product => "prod",
            TNorm::Lukasiewicz => "luk",
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(TNorm::Minimum),
            "prod" => Ok(TNorm::Product),
            "luk" => Ok(TNorm::Lukasiewicz),
            other => Err(Error::parse(format!("unknown t-norm {other:?} (expected min|prod|luk)"))),
        }
    }
}

/// The triangle function `τ_T(F, G)(x) = sup_{u+v=x} T(F(u), G(v))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriangleFn {
    pub tnorm: TNorm,
}

impl TriangleFn {
    pub fn new(tnorm: TNorm) -> Self {
        TriangleFn { tnorm }
    }

    /// Sup-convolution of two step functions in D+.
    ///
    /// `F(u) = α_i` requires `u > a_i` and `G(x - u) = β_j` requires
    /// `u < x - b_j`, so both hold for some `u` iff `x > a_i + b_j`. The sup
    /// is therefore a max over jump pairs with `a_i + b_j < x`, and the
    /// result is a step function with jumps among the pairwise sums.
    pub fn apply(&self, f: &StepDistFn, g: &StepDistFn) -> Result<StepDistFn> {
        f.require_distance()?;
        g.require_distance()?;
        let mut cands: Vec<(ExtReal, Rational)> = Vec::with_capacity(f.jumps().len() * g.jumps().len());
        for (a, alpha) in f.jumps() {
            for (b, beta) in g.jumps() {
                cands.push((a + b, self.tnorm.apply(alpha, beta)));
            }
        }
        cands.sort_by(|x, y| x.0.cmp(&y.0));
        let mut jumps: Vec<(ExtReal, Rational)> = Vec::new();
        let mut running = Rational::zero();
        for (loc, val) in cands {
            if val > running {
                running = val;
            }
            match jumps.last_mut() {
                Some(last) if last.0 == loc => last.1 = running.clone(),
                _ => jumps.push((loc, running.clone())),
            }
        }
        StepDistFn::new(jumps, true)
    }
}

pub fn apply_tau(tau: &TriangleFn, f: &StepDistFn, g: &StepDistFn) -> Result<StepDistFn> {
    tau.apply(f, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleLaw {
    Commutativity,
    Associativity,
    Monotonicity,
    Identity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawViolation {
    pub law: TriangleLaw,
    pub sample: usize,
    pub inputs: Vec<StepDistFn>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawReport {
    pub tnorm: TNorm,
    pub samples: usize,
    pub first_violation: Option<LawViolation>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks the triangle-function laws on `samples` random triples drawn by
/// `draw`. Monotonicity uses `F' = max(F, H)` so that `F <= F'` holds by
/// construction.
pub fn verify_triangle_laws<R: Rng>(
    tau: &TriangleFn,
    samples: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> StepDistFn,
) -> Result<LawReport> {
    let e0 = eps0();
    for sample in 0..samples {
        let f = draw(rng);
        let g = draw(rng);
        let h = draw(rng);
        let violation = |law| {
            Some(LawViolation { law, sample, inputs: vec![f.clone(), g.clone(), h.clone()] })
        };
        let fg = tau.apply(&f, &g)?;
        let first = if fg != tau.apply(&g, &f)? {
            violation(TriangleLaw::Commutativity)
        } else if tau.apply(&fg, &h)? != tau.apply(&f, &tau.apply(&g, &h)?)? {
            violation(TriangleLaw::Associativity)
        } else if !tau.apply(&f, &g)?.leq(&tau.apply(&f.max(&h), &g)?) {
            violation(TriangleLaw::Monotonicity)
        } else if tau.apply(&f, &e0)? != f || tau.apply(&e0, &f)? != f {
            violation(TriangleLaw::Identity)
        } else {
            None
        };
        if first.is_some() {
            return Ok(LawReport { tnorm: tau.tnorm, samples, first_violation: first });
        }
    }
    Ok(LawReport { tnorm: tau.tnorm, samples, first_violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfn::unit_step;
    use crate::num::rat;

    fn step(q: Rational) -> StepDistFn {
        unit_step(ExtReal::Finite(q))
    }

    #[test]
    fn tnorm_boundary() {
        for t in TNorm::ALL {
            for a in [rat(0, 1), rat(1, 3), rat(7, 10), rat(1, 1)] {
                assert_eq!(t.apply(&a, &rat(1, 1)), a);
                assert_eq!(t.apply(&a, &rat(0, 1)), rat(0, 1));
            }
        }
        assert_eq!(TNorm::Lukasiewicz.apply(&rat(1, 2), &rat(1, 4)), rat(0, 1));
        assert_eq!(TNorm::Product.apply(&rat(1, 2), &rat(1, 4)), rat(1, 8));
    }

    #[test]
    fn unit_steps_add() {
        for t in TNorm::ALL {
            let tau = TriangleFn::new(t);
            assert_eq!(tau.apply(&step(rat(1, 5)), &step(rat(1, 2))).unwrap(), step(rat(7, 10)));
        }
    }

    #[test]
    fn eps0_is_identity() {
        let f = StepDistFn::from_finite(&[(rat(0, 1), rat(1, 10)), (rat(1, 2), rat(3, 5)), (rat(4, 1), rat(1, 1))], true)
            .unwrap();
        for t in TNorm::ALL {
            let tau = TriangleFn::new(t);
            assert_eq!(tau.apply(&eps0(), &f).unwrap(), f);
            assert_eq!(tau.apply(&f, &eps0()).unwrap(), f);
        }
    }

    #[test]
    fn rejects_non_distance_input() {
        let tau = TriangleFn::new(TNorm::Minimum);
        let general = unit_step(ExtReal::from(-1));
        assert!(matches!(tau.apply(&general, &eps0()), Err(Error::NotDistance(_))));
    }

    #[test]
    fn product_of_two_level_steps() {
        let f = StepDistFn::from_finite(&[(rat(1, 1), rat(1, 2)), (rat(2, 1), rat(1, 1))], true).unwrap();
        let tau = TriangleFn::new(TNorm::Product);
        let got = tau.apply(&f, &f).unwrap();
        // pair sums: 2 -> 1/4, 3 -> 1/2, 4 -> 1
        let want = StepDistFn::from_finite(
            &[(rat(2, 1), rat(1, 4)), (rat(3, 1), rat(1, 2)), (rat(4, 1), rat(1, 1))],
            true,
        )
        .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn tnorm_names_round_trip() {
        for t in TNorm::ALL {
            assert_eq!(t.name().parse::<TNorm>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.name()));
        }
        assert!("max".parse::<TNorm>().is_err());
    }
}

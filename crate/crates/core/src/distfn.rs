//! Step distribution functions and the modified Lévy metric.
//!
//! A [`StepDistFn`] is a left-continuous, nondecreasing step function on the
//! extended real line with finitely many jumps. Its value at `-inf` is 0 and
//! its value at `inf` is 1; in between it may stay below 1 (mass at infinity
//! is allowed, as for members of D+).

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, ExtReal, Rational};

/// Default half-width of the final bisection bracket for [`levy_distance`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest accepted tolerance.
pub const MAX_TOL: f64 = 1e-6;
/// Smallest accepted tolerance; keeps the dyadic bisection points within
/// exact 128-bit rational arithmetic.
pub const MIN_TOL: f64 = 1e-15;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawStepDistFn", into = "RawStepDistFn")]
pub struct StepDistFn {
    /// `(location, value from just after location)`, strictly increasing in
    /// location and value. Locations are finite or `-inf`.
    jumps: Vec<(ExtReal, Rational)>,
    distance: bool,
}

#[derive(Serialize, Deserialize)]
struct RawStepDistFn {
    jumps: Vec<Jump>,
    /// Omitted: inferred from the jump locations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct Jump(ExtReal, #[serde(with = "num::serde_rational")] Rational);

impl TryFrom<RawStepDistFn> for StepDistFn {
    type Error = Error;

    fn try_from(raw: RawStepDistFn) -> Result<Self> {
        let distance = raw.distance.unwrap_or_else(|| raw.jumps.iter().all(|Jump(a, _)| !a.is_negative()));
        StepDistFn::new(raw.jumps.into_iter().map(|Jump(a, v)| (a, v)).collect(), distance)
    }
}

impl From<StepDistFn> for RawStepDistFn {
    fn from(f: StepDistFn) -> Self {
        RawStepDistFn { jumps: f.jumps.into_iter().map(|(a, v)| Jump(a, v)).collect(), distance: Some(f.distance) }
    }
}

impl PartialEq for StepDistFn {
    fn eq(&self, other: &Self) -> bool {
        self.jumps == other.jumps
    }
}

impl Eq for StepDistFn {}

impl StepDistFn {
    /// Builds a step function from `(location, value after)` pairs.
    ///
    /// Locations must be strictly increasing and values nondecreasing in
    /// `[0, 1]`. A jump at `inf` carries no information and is dropped, as
    /// are entries that do not change the value. With `distance` set the
    /// function must also belong to D+ (no jump below 0).
    pub fn new(jumps: Vec<(ExtReal, Rational)>, distance: bool) -> Result<Self> {
        let mut canon: Vec<(ExtReal, Rational)> = Vec::with_capacity(jumps.len());
        let mut prev_loc: Option<&ExtReal> = None;
        let mut prev_val = Rational::zero();
        for (loc, val) in &jumps {
            if let Some(p) = prev_loc {
                if loc <= p {
                    return Err(Error::InvalidDistribution(format!(
                        "jump locations not strictly increasing at {loc}"
                    )));
                }
            }
            if !num::is_unit(val) {
                return Err(Error::InvalidDistribution(format!("value {val} at {loc} outside [0,1]")));
            }
            if *val < prev_val {
                return Err(Error::InvalidDistribution(format!("values decrease at {loc}")));
            }
            prev_loc = Some(loc);
            if *loc == ExtReal::PosInf || *val == prev_val {
                continue;
            }
            prev_val = val.clone();
            canon.push((loc.clone(), val.clone()));
        }
        let f = StepDistFn { jumps: canon, distance };
        if distance {
            if let Some((loc, _)) = f.jumps.iter().find(|(loc, _)| loc.is_negative()) {
                return Err(Error::NotDistance(format!("jump at {loc} < 0")));
            }
        }
        Ok(f)
    }

    /// Convenience constructor from finite rational jumps.
    pub fn from_finite(jumps: &[(Rational, Rational)], distance: bool) -> Result<Self> {
        Self::new(jumps.iter().map(|(x, v)| (ExtReal::Finite(x.clone()), v.clone())).collect(), distance)
    }

    pub fn jumps(&self) -> &[(ExtReal, Rational)] {
        &self.jumps
    }

    /// Whether this function was declared (and validated) as a member of D+.
    pub fn is_distance(&self) -> bool {
        self.distance
    }

    /// Returns the same function flagged as a member of D+, if it is one.
    pub fn into_distance(self) -> Result<Self> {
        StepDistFn::new(self.jumps, true)
    }

    pub fn require_distance(&self) -> Result<()> {
        if self.distance {
            Ok(())
        } else {
            Err(Error::NotDistance("function not flagged as a distance distribution".into()))
        }
    }

    pub fn is_eps0(&self) -> bool {
        self.jumps.len() == 1 && self.jumps[0].0 == ExtReal::Finite(Rational::zero()) && self.jumps[0].1.is_one()
    }

    /// Left-continuous evaluation.
    pub fn eval(&self, x: &ExtReal) -> Rational {
        if *x == ExtReal::PosInf {
            return Rational::one();
        }
        let idx = self.jumps.partition_point(|(loc, _)| loc < x);
        if idx == 0 {
            Rational::zero()
        } else {
            self.jumps[idx - 1].1.clone()
        }
    }

    pub fn eval_at(&self, x: &Rational) -> Rational {
        let idx = self.jumps.partition_point(|(loc, _)| match loc {
            ExtReal::Finite(l) => l < x,
            ExtReal::NegInf => true,
            ExtReal::PosInf => false,
        });
        if idx == 0 {
            Rational::zero()
        } else {
            self.jumps[idx - 1].1.clone()
        }
    }

    /// Right limit `f(x+)`.
    pub fn eval_right(&self, x: &ExtReal) -> Rational {
        if *x == ExtReal::PosInf {
            return Rational::one();
        }
        let idx = self.jumps.partition_point(|(loc, _)| loc <= x);
        if idx == 0 {
            Rational::zero()
        } else {
            self.jumps[idx - 1].1.clone()
        }
    }

    /// `self <= other` everywhere on `[-inf, inf]`.
    pub fn leq(&self, other: &StepDistFn) -> bool {
        self.jumps
            .iter()
            .chain(other.jumps.iter())
            .all(|(x, _)| self.eval(x) <= other.eval(x) && self.eval_right(x) <= other.eval_right(x))
    }

    /// Pointwise maximum; again a step distribution function.
    pub fn max(&self, other: &StepDistFn) -> StepDistFn {
        let mut locs: Vec<&ExtReal> = self.jumps.iter().chain(other.jumps.iter()).map(|(x, _)| x).collect();
        locs.sort();
        locs.dedup();
        let jumps = locs
            .into_iter()
            .map(|x| {
                let a = self.eval_right(x);
                let b = other.eval_right(x);
                (x.clone(), if a > b { a } else { b })
            })
            .collect();
        StepDistFn::new(jumps, self.distance && other.distance).expect("max of step distribution functions")
    }

    /// `x -> self(x / factor)` for `factor > 0`.
    pub fn rescale(&self, factor: &Rational) -> StepDistFn {
        assert!(factor.is_positive(), "rescale factor must be positive");
        StepDistFn {
            jumps: self.jumps.iter().map(|(x, v)| (x.scale(factor), v.clone())).collect(),
            distance: self.distance,
        }
    }

    /// `x -> self(x - by)`.
    pub fn shift(&self, by: &Rational) -> StepDistFn {
        let jumps = self.jumps.iter().map(|(x, v)| (x.shift(by), v.clone())).collect();
        let distance = self.distance && !by.is_negative();
        StepDistFn { jumps, distance }
    }
}

impl fmt::Display for StepDistFn {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, v)) in self.jumps.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({x}, {})", ExtReal::Finite(v.clone()))?;
        }
        f.write_str("}")
    }
}

/// The unit step at `q`: 0 on `[-inf, q]`, 1 on `(q, inf]`.
pub fn unit_step(q: ExtReal) -> StepDistFn {
    let distance = !q.is_negative();
    if q == ExtReal::PosInf {
        return StepDistFn { jumps: Vec::new(), distance };
    }
    StepDistFn { jumps: vec![(q, Rational::one())], distance }
}

pub fn eps0() -> StepDistFn {
    unit_step(ExtReal::Finite(Rational::zero()))
}

pub fn eval(f: &StepDistFn, x: &ExtReal) -> Rational {
    f.eval(x)
}

/// True iff `g <= f` everywhere. Checking the merged jump grid (value and
/// right limit at every jump of either function) is exact for step
/// functions.
pub fn pointwise_leq(f: &StepDistFn, g: &StepDistFn) -> bool {
    g.leq(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyDistance {
    pub value: f64,
    /// Half-width of the final bisection bracket.
    pub tolerance: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Whether `w` satisfies the four Lévy inequalities for `f` and `g` on the
/// open window `(-1/w, 1/w)`.
///
/// All four sides are step functions of `x`, so they are constant between
/// consecutive points of the set of jump locations shifted by `0, +w, -w`
/// together with the window ends. Checking one interior point per such
/// piece decides the predicate exactly.
pub fn levy_window_holds(f: &StepDistFn, g: &StepDistFn, w: &Rational) -> bool {
    assert!(w.is_positive());
    let half = w.recip();
    let lo = -half.clone();
    let hi = half;
    let mut cuts: Vec<Rational> = vec![lo.clone(), hi.clone()];
    for (loc, _) in f.jumps.iter().chain(g.jumps.iter()) {
        if let ExtReal::Finite(a) = loc {
            for c in [a - w, a.clone(), a + w] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let two = num::int(2);
    cuts.windows(2).all(|pair| {
        let x = (&pair[0] + &pair[1]) / &two;
        let fx = f.eval_at(&x);
        let gx = g.eval_at(&x);
        let f_lo = f.eval_at(&(&x - w));
        let f_hi = f.eval_at(&(&x + w));
        let g_lo = g.eval_at(&(&x - w));
        let g_hi = g.eval_at(&(&x + w));
        &f_lo - w <= gx && gx <= &f_hi + w && &g_lo - w <= fx && fx <= &g_hi + w
    })
}

/// The modified Lévy distance, by bisection on `w` over `(0, 1]`.
///
/// Feasibility is monotone in `w` and `w = 1` is always feasible, so the
/// bracket `[lo, hi]` keeps `hi` feasible throughout. The midpoint of the
/// final bracket is returned.
pub fn levy_distance(f: &StepDistFn, g: &StepDistFn, tol: f64) -> Result<LevyDistance> {
    check_tol(tol)?;
    if f == g {
        return Ok(LevyDistance { value: 0.0, tolerance: 0.0 });
    }
    let two = num::int(2);
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    let mut half_width = 0.5f64;
    while half_width > tol {
        let mid = (&lo + &hi) / &two;
        if levy_window_holds(f, g, &mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        half_width /= 2.0;
    }
    let value = num::to_f64(&((&lo + &hi) / &two));
    Ok(LevyDistance { value, tolerance: half_width })
}

/// `h(t) > 1 - t`, i.e. `h` lies in the strong `t`-ball around ε_0.
pub fn near_eps0(h: &StepDistFn, t: &Rational) -> Result<bool> {
    h.require_distance()?;
    if !t.is_positive() {
        return Err(Error::Precondition(format!("t must be positive, got {t}")));
    }
    Ok(h.eval_at(t) > Rational::one() - t)
}

/// Exact `inf { t > 0 : h(t) > 1 - t }` for `h` in D+.
///
/// Used as the scale of a finite PM space. Since `t -> h(t) - (1 - t)` is
/// increasing, the infimum is either a jump location or a point where a
/// flat piece crosses the line `1 - t`.
pub fn eps0_radius(h: &StepDistFn) -> Rational {
    let one = Rational::one();
    let mut best = one.clone();
    let mut prev_val = Rational::zero();
    let mut prev_loc = Rational::zero();
    let pieces = h.jumps.iter().filter_map(|(x, v)| x.as_finite().map(|x| (x.clone(), v.clone())));
    for (loc, val) in pieces.chain(std::iter::once((one.clone(), one.clone()))) {
        // On (prev_loc, loc] the value is prev_val; t works there iff t > 1 - prev_val.
        let cross = &one - &prev_val;
        let cand = if cross > prev_loc { cross } else { prev_loc.clone() };
        if cand < loc && cand < best {
            best = cand;
        }
        prev_loc = loc;
        prev_val = val;
        if prev_loc >= best {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn step(q: Rational) -> StepDistFn {
        unit_step(ExtReal::Finite(q))
    }

    #[test]
    fn unit_step_values() {
        let e0 = eps0();
        assert_eq!(e0.eval(&ExtReal::from(0)), rat(0, 1));
        assert_eq!(e0.eval_at(&rat(1, 2)), rat(1, 1));
        let e1 = step(rat(1, 1));
        assert_eq!(e1.eval_at(&rat(1, 1)), rat(0, 1));
        assert_eq!(e1.eval_at(&rat(10001, 10000)), rat(1, 1));
        let einf = unit_step(ExtReal::NegInf);
        assert_eq!(einf.eval(&ExtReal::NegInf), rat(0, 1));
        assert_eq!(einf.eval_at(&rat(-1_000_000, 1)), rat(1, 1));
        assert!(!einf.is_distance());
        let top = unit_step(ExtReal::PosInf);
        assert_eq!(top.eval_at(&rat(1_000_000, 1)), rat(0, 1));
        assert_eq!(top.eval(&ExtReal::PosInf), rat(1, 1));
    }

    #[test]
    fn eval_piecewise() {
        let f = StepDistFn::from_finite(&[(rat(0, 1), rat(2, 5)), (rat(2, 1), rat(1, 1))], true).unwrap();
        assert_eq!(f.eval_at(&rat(1, 1)), rat(2, 5));
        assert_eq!(f.eval_at(&rat(0, 1)), rat(0, 1));
        assert_eq!(f.eval_at(&rat(2, 1)), rat(2, 5));
        assert_eq!(f.eval_at(&rat(3, 1)), rat(1, 1));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(StepDistFn::from_finite(&[(rat(1, 1), rat(1, 2)), (rat(1, 1), rat(1, 1))], false).is_err());
        assert!(StepDistFn::from_finite(&[(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 4))], false).is_err());
        assert!(StepDistFn::from_finite(&[(rat(0, 1), rat(3, 2))], false).is_err());
        assert!(matches!(
            StepDistFn::from_finite(&[(rat(-1, 1), rat(1, 2))], true),
            Err(Error::NotDistance(_))
        ));
    }

    #[test]
    fn canonical_form_drops_flat_entries() {
        let f = StepDistFn::from_finite(&[(rat(0, 1), rat(0, 1)), (rat(1, 1), rat(1, 1)), (rat(2, 1), rat(1, 1))], true)
            .unwrap();
        assert_eq!(f, step(rat(1, 1)));
    }

    #[test]
    fn leq_on_unit_steps() {
        let e1 = step(rat(1, 1));
        let e2 = step(rat(2, 1));
        assert!(pointwise_leq(&e1, &e1));
        assert!(pointwise_leq(&e1, &e2));
        assert!(!pointwise_leq(&e2, &e1));
    }

    #[test]
    fn levy_basic_values() {
        let tol = 1e-9;
        let e0 = eps0();
        let d = levy_distance(&step(rat(3, 10)), &e0, tol).unwrap();
        assert!((d.value - 0.3).abs() <= 1e-6, "{d:?}");
        let d = levy_distance(&step(rat(2, 1)), &e0, tol).unwrap();
        assert!((d.value - 1.0).abs() <= tol, "{d:?}");
        assert_eq!(levy_distance(&e0, &e0, tol).unwrap().value, 0.0);
        assert!(d.tolerance <= tol);
    }

    #[test]
    fn levy_rejects_bad_tolerance() {
        let e0 = eps0();
        for tol in [0.0, -1.0, 0.1, f64::NAN, 1e-30] {
            assert!(matches!(levy_distance(&e0, &e0, tol), Err(Error::InvalidTolerance(_))));
        }
    }

    #[test]
    fn near_eps0_examples() {
        let h = StepDistFn::from_finite(&[(rat(1, 5), rat(9, 10)), (rat(3, 1), rat(1, 1))], true).unwrap();
        assert!(near_eps0(&eps0(), &rat(1, 2)).unwrap());
        assert!(!near_eps0(&step(rat(1, 1)), &rat(1, 2)).unwrap());
        assert!(near_eps0(&h, &rat(2, 5)).unwrap());
        let general = unit_step(ExtReal::from(-1));
        assert!(matches!(near_eps0(&general, &rat(1, 2)), Err(Error::NotDistance(_))));
    }

    #[test]
    fn eps0_radius_matches_levy() {
        let h = StepDistFn::from_finite(&[(rat(1, 5), rat(9, 10)), (rat(3, 1), rat(1, 1))], true).unwrap();
        assert_eq!(eps0_radius(&h), rat(1, 5));
        assert_eq!(eps0_radius(&step(rat(3, 10))), rat(3, 10));
        assert_eq!(eps0_radius(&step(rat(2, 1))), rat(1, 1));
        let flat = StepDistFn::from_finite(&[(rat(1, 10), rat(1, 2))], true).unwrap();
        // value 1/2 from 0.1 onward: 1/2 > 1 - t iff t > 1/2
        assert_eq!(eps0_radius(&flat), rat(1, 2));
        for f in [h, step(rat(3, 10)), flat] {
            let d = levy_distance(&f, &eps0(), 1e-9).unwrap();
            assert!((d.value - num::to_f64(&eps0_radius(&f))).abs() <= 2e-9);
        }
    }

    #[test]
    fn json_form() {
        let f: StepDistFn = serde_json::from_str(r#"{"jumps": [[0.2, 0.9], [3, 1]], "distance": true}"#).unwrap();
        assert_eq!(f.eval_at(&rat(1, 2)), rat(9, 10));
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(back, r#"{"jumps":[[0.2,0.9],[3,1]],"distance":true}"#);
        let g: StepDistFn = serde_json::from_str(r#"{"jumps": [["-inf", 1]]}"#).unwrap();
        assert_eq!(g, unit_step(ExtReal::NegInf));
    }
}

//! Brute-force f64 oracle for the modified Lévy distance, checked against
//! the exact bisection in the library.

use pmseq_core::distfn::{eps0, levy_distance, unit_step, StepDistFn, DEFAULT_TOL};
use pmseq_core::num::rat;
use pmseq_core::ExtReal;
use proptest::prelude::*;

/// Step function as `(location, value after location)` in f64;
/// left-continuous, so `F(a) ` is the value before the jump at `a`.
struct F64Step(Vec<(f64, f64)>);

impl F64Step {
    fn of(f: &StepDistFn) -> Self {
        F64Step(f.jumps().iter().map(|(a, v)| (a.to_f64(), pmseq_core::num::to_f64(v))).collect())
    }

    fn at(&self, x: f64) -> f64 {
        self.0.iter().filter(|(a, _)| *a < x).map(|(_, v)| *v).last().unwrap_or(0.0)
    }
}

/// Samples the four inequalities on a uniform grid of the window and just
/// beside every shifted jump location.
fn feasible(f: &F64Step, g: &F64Step, w: f64) -> bool {
    let (lo, hi) = (-1.0 / w, 1.0 / w);
    let mut xs: Vec<f64> = (1..4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).collect();
    for &(a, _) in f.0.iter().chain(&g.0) {
        if a.is_finite() {
            for c in [a - w, a, a + w] {
                xs.extend([c - 1e-11, c + 1e-11]);
            }
        }
    }
    xs.into_iter().filter(|&x| x > lo && x < hi).all(|x| {
        let (fx, gx) = (f.at(x), g.at(x));
        f.at(x - w) - w <= gx + 1e-12
            && gx <= f.at(x + w) + w + 1e-12
            && g.at(x - w) - w <= fx + 1e-12
            && fx <= g.at(x + w) + w + 1e-12
    })
}

fn oracle(f: &StepDistFn, g: &StepDistFn) -> f64 {
    let (f, g) = (F64Step::of(f), F64Step::of(g));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = (lo + hi) / 2.0;
        if feasible(&f, &g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn step(num: i128, den: i128) -> StepDistFn {
    unit_step(ExtReal::Finite(rat(num, den)))
}

#[test]
fn unit_step_at_three_tenths() {
    let d = levy_distance(&step(3, 10), &eps0(), DEFAULT_TOL).unwrap().value;
    assert!((d - 0.3).abs() <= 1e-6);
    assert!((oracle(&step(3, 10), &eps0()) - 0.3).abs() <= 1e-6);
}

#[test]
fn unit_steps_approach_eps0() {
    let mut prev = f64::INFINITY;
    for n in 1..=120 {
        let d = levy_distance(&step(1, n), &eps0(), DEFAULT_TOL).unwrap().value;
        assert!(d <= prev + 2e-9, "not monotone at n = {n}");
        if n > 100 {
            assert!(d < 0.01);
        }
        prev = d;
    }
}

fn dist_fn() -> impl Strategy<Value = StepDistFn> {
    (1usize..=4)
        .prop_flat_map(|k| {
            (
                proptest::sample::subsequence((0..=24i128).collect::<Vec<_>>(), k),
                proptest::sample::subsequence((1..=12i128).collect::<Vec<_>>(), k),
                any::<bool>(),
            )
        })
        .prop_map(|(locs, mut vals, reach_one)| {
            if reach_one {
                *vals.last_mut().unwrap() = 12;
            }
            let jumps: Vec<_> = locs.iter().zip(&vals).map(|(&l, &v)| (rat(l, 8), rat(v, 12))).collect();
            StepDistFn::from_finite(&jumps, true).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bisection_matches_oracle(f in dist_fn(), g in dist_fn()) {
        let d = levy_distance(&f, &g, DEFAULT_TOL).unwrap().value;
        let o = oracle(&f, &g);
        prop_assert!((d - o).abs() <= 1e-6, "library {d} oracle {o}");
    }

    #[test]
    fn eps0_radius_matches_oracle(h in dist_fn()) {
        let d = levy_distance(&h, &eps0(), DEFAULT_TOL).unwrap().value;
        prop_assert!((d - oracle(&h, &eps0())).abs() <= 1e-6);
    }
}

//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always visible.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use pmseq_core::analysis::{Analyzer, RawPattern, Verdict};
use pmseq_core::density::{empirical_density, exact_density, LambdaSeq, SetDescription};
use pmseq_core::distfn::{eps0, levy_distance, near_eps0, unit_step, StepDistFn, DEFAULT_TOL};
use pmseq_core::harness::{self, random_distance_fn, random_space_fn, PlantSpec, SpaceSpec, SuiteConfig};
use pmseq_core::num::{int, rat, to_f64, Rational};
use pmseq_core::triangle::verify_triangle_laws;
use pmseq_core::{ExtReal, PMSpace, TNorm, TriangleFn};

const SEED: u64 = 42;
const HORIZON: u64 = 1_000_000;
const EPS: f64 = 0.02;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Sampling oracle for d_L in f64, independent of the exact predicate.
fn sampled_levy(f: &StepDistFn, g: &StepDistFn) -> f64 {
    let steps = |h: &StepDistFn| -> Vec<(f64, f64)> { h.jumps().iter().map(|(a, v)| (a.to_f64(), to_f64(v))).collect() };
    let (f, g) = (steps(f), steps(g));
    let at = |h: &[(f64, f64)], x: f64| h.iter().filter(|(a, _)| *a < x).map(|(_, v)| *v).last().unwrap_or(0.0);
    let feasible = |w: f64| {
        let mut xs: Vec<f64> = (1..4000).map(|i| -1.0 / w + 2.0 / w * i as f64 / 4000.0).collect();
        for &(a, _) in f.iter().chain(&g) {
            for c in [a - w, a, a + w] {
                xs.extend([c - 1e-11, c + 1e-11]);
            }
        }
        xs.into_iter().filter(|x| x.abs() < 1.0 / w).all(|x| {
            at(&f, x - w) - w <= at(&g, x) + 1e-12
                && at(&g, x) <= at(&f, x + w) + w + 1e-12
                && at(&g, x - w) - w <= at(&f, x) + 1e-12
                && at(&f, x) <= at(&g, x + w) + w + 1e-12
        })
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = (lo + hi) / 2.0;
        if feasible(mid) {
            hi = mid
        } else {
            lo = mid
        }
    }
    hi
}

fn levy_and_eps0_balls() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let fns: Vec<StepDistFn> = (0..1000).map(|_| random_distance_fn(&mut rng)).collect();
    let e0 = eps0();
    let band = 2.0 * DEFAULT_TOL;
    let mut compared = 0;
    for h in &fns {
        let d = levy_distance(h, &e0, DEFAULT_TOL).map_err(|e| e.to_string())?.value;
        for i in 1..=19 {
            let t = rat(i, 20);
            if (d - to_f64(&t)).abs() <= band {
                continue;
            }
            compared += 1;
            let near = near_eps0(h, &t).map_err(|e| e.to_string())?;
            ensure(near == (d < to_f64(&t)), || format!("h(t) > 1-t disagrees with d_L < t at t={t}, d_L={d}, h={h:?}"))?;
        }
    }
    let d = |a: &StepDistFn, b: &StepDistFn| levy_distance(a, b, DEFAULT_TOL).unwrap().value;
    for _ in 0..1000 {
        let (f, g, h) = (&random_distance_fn(&mut rng), &random_distance_fn(&mut rng), &random_distance_fn(&mut rng));
        ensure(d(f, f) == 0.0, || "d(f, f) != 0".into())?;
        ensure((d(f, g) - d(g, f)).abs() <= 3e-9, || "asymmetric".into())?;
        ensure(d(f, h) <= d(f, g) + d(g, h) + 3e-9, || "triangle inequality".into())?;
        ensure((d(f, g) == 0.0) == (f == g), || "d = 0 off the diagonal".into())?;
    }
    let e3 = unit_step(ExtReal::Finite(rat(3, 10)));
    let lib = d(&e3, &e0);
    let oracle = sampled_levy(&e3, &e0);
    ensure((lib - 0.3).abs() <= 1e-6 && (oracle - 0.3).abs() <= 1e-6, || format!("d_L(ε_0.3, ε_0): library {lib}, oracle {oracle}"))?;
    Ok(format!("{compared} (h, t) comparisons, 1000 metric triples, d_L(ε_0.3, ε_0) = {lib:.9}"))
}

fn triangle_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for t in TNorm::ALL {
        let tau = TriangleFn::new(t);
        let r = verify_triangle_laws(&tau, 200, &mut rng, |r| random_distance_fn(r)).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{t}: {:?}", r.first_violation))?;
        for _ in 0..100 {
            let a = rat(rng.random_range(0..=500), rng.random_range(1..=12));
            let b = rat(rng.random_range(0..=500), rng.random_range(1..=12));
            let got = tau
                .apply(&unit_step(ExtReal::Finite(a.clone())), &unit_step(ExtReal::Finite(b.clone())))
                .map_err(|e| e.to_string())?;
            ensure(got == unit_step(ExtReal::Finite(&a + &b)), || format!("{t}: τ(ε_{a}, ε_{b})"))?;
        }
    }
    Ok("min, prod, luk: 200 triples and 100 unit-step pairs each".into())
}

fn menger_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    for n in 1..=12usize {
        let names = harness::labels(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        for t in TNorm::ALL {
            for _ in 0..3 {
                let tau = TriangleFn::new(t);
                let eq = PMSpace::build_equilateral(&refs, &random_space_fn(&mut rng), tau).map_err(|e| e.to_string())?;
                let pos: Vec<i128> = (0..n).map(|_| rng.random_range(0..40)).collect();
                let rho: Vec<Vec<Rational>> = pos.iter().map(|a| pos.iter().map(|b| int((a - b).abs())).collect()).collect();
                let distinct = (0..n).all(|i| (0..i).all(|j| pos[i] != pos[j]));
                let mut spaces = vec![eq];
                if distinct {
                    spaces.push(PMSpace::build_simple(&refs, &rho, &random_space_fn(&mut rng), tau).map_err(|e| e.to_string())?);
                }
                for s in spaces {
                    let r = s.verify_axioms().map_err(|e| e.to_string())?;
                    ensure(r.passed, || format!("{n}-point space fails: {:?}", r.violation))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} spaces with 1 to 12 points"))
}

fn density_calculus() -> Check {
    for lambda in LambdaSeq::FAMILIES {
        for d in 1..=12u64 {
            for start in 1..=d {
                let ap = SetDescription::ap(start, d).unwrap();
                ensure(exact_density(&ap, &lambda, HORIZON).exact_value() == Some(&rat(1, d as i128)), || format!("AP({start},{d})"))?;
                for n in [1_000u64, 10_000, 100_000] {
                    let err = (to_f64(&empirical_density(&ap, &lambda, n)) - 1.0 / d as f64).abs();
                    ensure(err <= d as f64 / lambda.at(n) as f64, || format!("AP({start},{d}) under {} at n={n}: error {err}", lambda.name()))?;
                }
            }
        }
        let fin = SetDescription::finite([3u64, 17, 400, 9999]).unwrap();
        let null = SetDescription::union(vec![fin, SetDescription::Squares]);
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        ensure(exact_density(&null, &lambda, HORIZON).exact_value() == Some(&zero), || "null union".into())?;
        ensure(exact_density(&null.clone().complement(), &lambda, HORIZON).exact_value() == Some(&one), || "complement".into())?;
    }
    for d in 1..=12u64 {
        let ap = SetDescription::ap(1, d).unwrap();
        let natural = (1..=100_000u64).filter(|k| (k - 1) % d == 0).count() as f64 / 100_000.0;
        let v = to_f64(&empirical_density(&ap, &LambdaSeq::Identity, 100_000));
        ensure(v == natural, || format!("identity λ is not natural density for step {d}"))?;
    }
    Ok("APs with step 1..12 under identity, ceil-sqrt, half; null union and complement exact".into())
}

fn two_point_spec(exceptions: SetDescription) -> PlantSpec {
    let f0 = StepDistFn::from_finite(&[(rat(1, 1), rat(1, 1))], true).unwrap();
    PlantSpec {
        space: SpaceSpec::Equilateral { points: vec!["a".into(), "b".into()], f0, tau: TNorm::Minimum },
        limit: Some("a".into()),
        base: None,
        exceptions,
        exception_values: Some(RawPattern::Const { value: "b".into() }),
        lambda: LambdaSeq::Identity,
        horizon: HORIZON,
        eps: EPS,
        seed: SEED,
    }
}

fn lambda_separation() -> Check {
    let windows = SetDescription::windows(LambdaSeq::CeilSqrt, 4, 1).unwrap();
    let seq = harness::generate(&two_point_spec(windows)).map_err(|e| e.to_string())?;
    let report = |lambda: &LambdaSeq| {
        Analyzer::new(&seq, lambda, HORIZON, EPS).and_then(|a| a.check_convergence("a")).map_err(|e| e.to_string())
    };
    let sqrt = report(&LambdaSeq::CeilSqrt)?;
    let ident = report(&LambdaSeq::Identity)?;
    let upper = |r: &pmseq_core::ConvergenceReport| r.per_t.iter().map(|s| s.null.upper()).fold(0.0, f64::max);
    ensure(sqrt.verdict == Verdict::Diverges && upper(&sqrt) >= 0.5, || format!("ceil-sqrt: {:?}, upper {}", sqrt.verdict, upper(&sqrt)))?;
    ensure(ident.converges() && upper(&ident) <= EPS, || format!("identity: {:?}, upper {}", ident.verdict, upper(&ident)))?;
    Ok(format!("ceil-sqrt diverges (density {:.3}), identity converges (density {:.5})", upper(&sqrt), upper(&ident)))
}

fn run_verify() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pmseq"))
        .args(["verify", "--suite", "all", "--seed", "42"])
        .env_remove("PMSEQ_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || format!("exit status {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

/// Suite entries that realize the convergence, Cauchy and point-set
/// results.
const SUITE_ENTRIES: [&str; 16] = [
    "limit-uniqueness",
    "eventually-constant",
    "full-density-extraction",
    "full-density-converse",
    "almost-everywhere-agreement",
    "convergent-is-cauchy",
    "pairwise-null-exceptions",
    "distance-sequence-cauchy",
    "cauchy-forms",
    "point-set-chain",
    "limit-points-of-convergent",
    "null-perturbation",
    "cluster-set-closed",
    "avoided-set-null",
    "nonthin-forces-cluster",
    "bounded-has-cluster",
];

fn property_suite(report: &[u8]) -> Check {
    let report: Value = serde_json::from_slice(report).map_err(|e| e.to_string())?;
    let entries = report["entries"].as_array().ok_or("no entries")?;
    for id in SUITE_ENTRIES {
        let e = entries.iter().find(|e| e["property"] == id).ok_or_else(|| format!("missing entry {id}"))?;
        let (n, passed) = (e["instances"].as_u64().unwrap(), e["passed"].as_u64().unwrap());
        ensure(n >= 100 && passed == n, || format!("{id}: {passed}/{n}"))?;
    }
    // The failure path: a broken space must leave a witness that replays.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = SuiteConfig {
        properties: vec!["menger-axioms".into()],
        instances: 5,
        corrupt_axioms: true,
        ..SuiteConfig::default()
    };
    let broken = harness::run_suite(&cfg, Some(dir.path())).map_err(|e| e.to_string())?;
    let name = broken.entries[0].witness.clone().ok_or("corrupted space produced no witness")?;
    let w: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(&name)).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(!broken.pass && w["counterexample"]["detail"]["report"]["violation"]["axiom"] == 3, || "witness lacks the axiom-3 violation".into())?;
    Ok(format!("{} entries, all instances pass; corrupted space leaves {name}", SUITE_ENTRIES.len()))
}

fn squares_extraction() -> Check {
    let mut mins = Vec::new();
    for lambda in LambdaSeq::FAMILIES {
        let spec = PlantSpec { lambda: lambda.clone(), ..two_point_spec(SetDescription::Squares) };
        let seq = harness::generate(&spec).map_err(|e| e.to_string())?;
        let x = Analyzer::new(&seq, &lambda, HORIZON, EPS)
            .and_then(|a| a.extract_full_density_subsequence("a"))
            .map_err(|e| e.to_string())?;
        let min = x.min_ratio_from_1e4.ok_or("horizon below 10^4")?;
        ensure(min >= 0.98, || format!("{}: G density {min} below 0.98", lambda.name()))?;
        ensure(x.tails.iter().all(|t| t.ok), || format!("{}: G-subsequence leaves a neighbourhood after u_t", lambda.name()))?;
        mins.push(format!("{} {min:.4}", lambda.name()));
    }
    Ok(format!("min G density from 10^4: {}", mins.join(", ")))
}

fn main() {
    let mut results: Vec<(&str, Check)> = vec![
        ("1 levy metric and eps0 balls", levy_and_eps0_balls()),
        ("2 triangle laws", triangle_laws()),
        ("3 menger axioms", menger_axioms()),
        ("4 density calculus", density_calculus()),
        ("5 lambda vs natural separation", lambda_separation()),
    ];
    let first = run_verify();
    let second = run_verify();
    results.push((
        "6 property suite",
        first.as_ref().map_err(Clone::clone).and_then(|r| property_suite(r)),
    ));
    results.push(("7 squares extraction", squares_extraction()));
    results.push((
        "8 reproducibility",
        match (&first, &second) {
            (Ok(a), Ok(b)) if a == b => Ok(format!("two runs, {} identical bytes", a.len())),
            (Ok(_), Ok(_)) => Err("reports differ".into()),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        },
    ));
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}")
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

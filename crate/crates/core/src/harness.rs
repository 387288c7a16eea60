//! Planted instances and the property suite.
//!
//! Every property runs on seeded random instances. The generator for
//! instance `i` of property `p` is seeded from `(seed, p, i)` alone, so
//! results do not depend on scheduling and reports are byte-for-byte
//! reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    check_cauchy_equivalences, metric_cauchy, pairwise_distance_sequence, Analyzer, IndexedSequence, MetricSequence,
    Pattern, RawPattern, SymbolicSequence, Verdict,
};
use crate::density::{
    self, empirical_density, exact_density, LambdaSeq, NullRoute, SetDescription,
};
use crate::distfn::{eps0, eps0_radius, levy_distance, near_eps0, unit_step, StepDistFn, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::num::{self, rat, ExtReal, Rational};
use crate::pmspace::{PMSpace, PointSet};
use crate::triangle::{verify_triangle_laws, TNorm, TriangleFn};

pub const DEFAULT_HORIZON: u64 = 1_000_000;
pub const DEFAULT_EPS: f64 = 0.02;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_INSTANCES: usize = 100;

/// Property ids in report order.
pub const PROPERTIES: [&str; 23] = [
    "menger-axioms",
    "neighbourhoods",
    "levy-metric",
    "eps0-balls",
    "triangle-laws",
    "density-calculus",
    "lambda-separation",
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

/// Properties that run more instances by default.
const HEAVY: [(&str, usize); 2] = [("limit-uniqueness", 500), ("point-set-chain", 500)];

// ---------------------------------------------------------------- generators

fn random_rat(rng: &mut impl Rng, lo: i128, hi: i128, den: i128) -> Rational {
    rat(rng.random_range(lo..=hi), den)
}

/// Random member of D+ with one to four jumps at multiples of 1/8 in
/// `[0, 3]`. The last value is 1 about two times in three.
pub fn random_distance_fn(rng: &mut impl Rng) -> StepDistFn {
    random_fn_from(rng, 0)
}

/// As [`random_distance_fn`] but vanishing on `[0, 1/4]`, which keeps the
/// scale of generated spaces at least 1/4.
pub fn random_space_fn(rng: &mut impl Rng) -> StepDistFn {
    random_fn_from(rng, 2)
}

fn random_fn_from(rng: &mut impl Rng, first_loc: i128) -> StepDistFn {
    let k = rng.random_range(1..=4usize);
    let mut locs: Vec<i128> = (first_loc..=24).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    locs.sort();
    let mut vals: Vec<i128> = (1..=12).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    vals.sort();
    if rng.random_bool(2.0 / 3.0) {
        *vals.last_mut().unwrap() = 12;
    }
    let jumps: Vec<(Rational, Rational)> = locs.iter().zip(&vals).map(|(&l, &v)| (rat(l, 8), rat(v, 12))).collect();
    StepDistFn::from_finite(&jumps, true).expect("generated jumps are valid")
}

pub fn random_tnorm(rng: &mut impl Rng) -> TNorm {
    *TNorm::ALL.choose(rng).unwrap()
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Equilateral or metric-induced space on `n` points.
pub fn random_space_with(rng: &mut impl Rng, n: usize) -> Result<PMSpace> {
    let names = labels(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let tau = TriangleFn::new(random_tnorm(rng));
    if rng.random_bool(0.5) {
        PMSpace::build_equilateral(&refs, &random_space_fn(rng), tau)
    } else {
        // Distinct integer positions on a line.
        let mut pos: Vec<i128> = (0..4 * n as i128).collect::<Vec<_>>().choose_multiple(rng, n).copied().collect();
        pos.shuffle(rng);
        let rho: Vec<Vec<Rational>> =
            pos.iter().map(|a| pos.iter().map(|b| num::int((a - b).abs())).collect()).collect();
        PMSpace::build_simple(&refs, &rho, &random_space_fn(rng), tau)
    }
}

pub fn random_space(rng: &mut impl Rng) -> Result<PMSpace> {
    let n = rng.random_range(2..=5);
    random_space_with(rng, n)
}

pub fn random_lambda(rng: &mut impl Rng) -> LambdaSeq {
    LambdaSeq::FAMILIES.choose(rng).unwrap().clone()
}

/// A set that is λ-null for the given λ, by construction.
pub fn random_null_set(rng: &mut impl Rng, lambda: &LambdaSeq) -> SetDescription {
    let finite = |rng: &mut dyn rand::RngCore| {
        let k = rng.random_range(1..=8);
        SetDescription::finite((0..k).map(|_| rng.random_range(1..=2000u64))).unwrap()
    };
    let sparse_windows = *lambda != LambdaSeq::CeilSqrt;
    let choice = rng.random_range(0..if sparse_windows { 6 } else { 4 });
    match choice {
        0 => finite(rng),
        1 => SetDescription::Squares,
        2 => SetDescription::union(vec![finite(rng), SetDescription::Squares]),
        3 => {
            let ap = SetDescription::ap(rng.random_range(1..=5), rng.random_range(2..=5)).unwrap();
            SetDescription::inter(vec![ap, SetDescription::Squares])
        }
        4 => SetDescription::windows(LambdaSeq::CeilSqrt, *[4u64, 8].choose(rng).unwrap(), 1).unwrap(),
        _ => SetDescription::union(vec![
            SetDescription::windows(LambdaSeq::CeilSqrt, 4, 2).unwrap(),
            SetDescription::Squares,
        ]),
    }
}

/// A set that is decisively not λ-null.
pub fn random_nonnull_set(rng: &mut impl Rng, lambda: &LambdaSeq) -> SetDescription {
    match rng.random_range(0..if *lambda == LambdaSeq::CeilSqrt { 3 } else { 2 }) {
        0 => SetDescription::ap(rng.random_range(1..=4), rng.random_range(2..=4)).unwrap(),
        1 => SetDescription::finite((1..=rng.random_range(1..=50u64)).collect::<Vec<_>>()).unwrap().complement(),
        _ => SetDescription::windows(LambdaSeq::CeilSqrt, 4, 1).unwrap(),
    }
}

fn random_cycle(rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<usize> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| rng.random_range(0..n)).collect()
}

fn random_pattern(rng: &mut impl Rng, n: usize) -> Pattern {
    let prefix_len = if rng.random_bool(0.3) { rng.random_range(1..=10) } else { 0 };
    Pattern::eventually((0..prefix_len).map(|_| rng.random_range(0..n)).collect(), random_cycle(rng, n, 4))
}

/// `x_k = limit` off a λ-null exception set.
fn planted_convergent(rng: &mut impl Rng, space: &Arc<PMSpace>, lambda: &LambdaSeq) -> Result<(SymbolicSequence, usize)> {
    let n = space.len();
    let limit = rng.random_range(0..n);
    let exceptions = random_null_set(rng, lambda);
    let values = Pattern::periodic(random_cycle(rng, n, 3));
    let seq = SymbolicSequence::new(space.clone(), IndexedSequence::new(Pattern::constant(limit), exceptions, values))?;
    Ok((seq, limit))
}

/// Arbitrary sequence: random eventually periodic base, null or non-null
/// exceptions.
fn random_sequence(rng: &mut impl Rng, space: &Arc<PMSpace>, lambda: &LambdaSeq) -> Result<SymbolicSequence> {
    let n = space.len();
    let base = random_pattern(rng, n);
    let exceptions = match rng.random_range(0..3) {
        0 => SetDescription::empty(),
        1 => random_null_set(rng, lambda),
        _ => random_nonnull_set(rng, lambda),
    };
    let values = Pattern::periodic(random_cycle(rng, n, 3));
    SymbolicSequence::new(space.clone(), IndexedSequence::new(base, exceptions, values))
}

// ---------------------------------------------------------------- plant specs

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceSpec {
    Equilateral { points: Vec<String>, f0: StepDistFn, tau: TNorm },
    Simple {
        points: Vec<String>,
        #[serde(with = "rational_table")]
        rho: Vec<Vec<Rational>>,
        g: StepDistFn,
        tau: TNorm,
    },
    /// Random space on `points` points, drawn from the plant seed.
    Random { points: usize },
    Explicit { space: PMSpace },
}

mod rational_table {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Cell(#[serde(with = "num::serde_rational")] Rational);

    pub fn serialize<S: Serializer>(t: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Cell>> = t.iter().map(|r| r.iter().map(|c| Cell(c.clone())).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let rows: Vec<Vec<Cell>> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.into_iter().map(|c| c.0).collect()).collect())
    }
}

impl SpaceSpec {
    pub fn build(&self, rng: &mut impl Rng) -> Result<PMSpace> {
        match self {
            SpaceSpec::Equilateral { points, f0, tau } => {
                let refs: Vec<&str> = points.iter().map(String::as_str).collect();
                PMSpace::build_equilateral(&refs, f0, TriangleFn::new(*tau))
            }
            SpaceSpec::Simple { points, rho, g, tau } => {
                let refs: Vec<&str> = points.iter().map(String::as_str).collect();
                PMSpace::build_simple(&refs, rho, g, TriangleFn::new(*tau))
            }
            SpaceSpec::Random { points } => {
                if *points == 0 {
                    return Err(Error::Precondition("a random space needs at least one point".into()));
                }
                random_space_with(rng, *points)
            }
            SpaceSpec::Explicit { space } => space.clone().validated(),
        }
    }
}

fn default_lambda() -> LambdaSeq {
    LambdaSeq::Identity
}
fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}
fn default_eps() -> f64 {
    DEFAULT_EPS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Description of a planted instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantSpec {
    pub space: SpaceSpec,
    /// Planted limit; absent or `"none"` for instances without one.
    #[serde(default)]
    pub limit: Option<String>,
    /// Base pattern; defaults to the constant limit, or to a random
    /// two-point cycle when there is no limit.
    #[serde(default)]
    pub base: Option<RawPattern>,
    #[serde(default = "SetDescription::empty")]
    pub exceptions: SetDescription,
    #[serde(default)]
    pub exception_values: Option<RawPattern>,
    #[serde(default = "default_lambda")]
    pub lambda: LambdaSeq,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn pattern_labels(p: &RawPattern) -> Vec<&str> {
    match p {
        RawPattern::Const { value } => vec![value.as_str()],
        RawPattern::Periodic { prefix, cycle } => prefix.iter().chain(cycle).map(String::as_str).collect(),
    }
}

/// Builds the planted sequence. With a limit set, the exception set is the
/// only place where terms differ from it.
pub fn generate(spec: &PlantSpec) -> Result<SymbolicSequence> {
    density::check_horizon(spec.horizon)?;
    density::check_eps(spec.eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let space = Arc::new(spec.space.build(&mut rng)?);
    let n = space.len();
    let limit = spec.limit.as_ref().filter(|l| l.as_str() != "none");
    let (base, values) = match limit {
        Some(limit) => {
            space.index(limit)?;
            let base = RawPattern::Const { value: limit.clone() };
            if let Some(b) = &spec.base {
                if pattern_labels(b) != [limit.as_str()] {
                    return Err(Error::Precondition("base pattern must be the constant limit".into()));
                }
            }
            let values = match &spec.exception_values {
                Some(v) => {
                    if pattern_labels(v).contains(&limit.as_str()) {
                        return Err(Error::Precondition(format!("exception value equals the limit {limit:?}")));
                    }
                    v.clone()
                }
                None if spec.exceptions.is_literally_empty() => base.clone(),
                None => {
                    let others: Vec<&String> = space.points().iter().filter(|p| *p != limit).collect();
                    let pick = others
                        .choose(&mut rng)
                        .ok_or_else(|| Error::Precondition("no point other than the limit for exceptions".into()))?;
                    RawPattern::Const { value: (*pick).clone() }
                }
            };
            (base, values)
        }
        None => {
            let base = match &spec.base {
                Some(b) => b.clone(),
                None => {
                    if n < 2 {
                        return Err(Error::Precondition("an oscillating instance needs two points".into()));
                    }
                    let pair: Vec<&String> = space.points().choose_multiple(&mut rng, 2).collect();
                    RawPattern::Periodic { prefix: vec![], cycle: pair.into_iter().cloned().collect() }
                }
            };
            let values = spec.exception_values.clone().unwrap_or_else(|| base.clone());
            (base, values)
        }
    };
    SymbolicSequence::from_labels(space, &base, spec.exceptions.clone(), Some(&values))
}

// ---------------------------------------------------------------- suite

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Property ids; `"all"` expands to every property.
    pub properties: Vec<String>,
    pub instances: usize,
    /// Per-property instance counts.
    pub overrides: BTreeMap<String, usize>,
    pub seed: u64,
    pub horizon: u64,
    pub eps: f64,
    /// Replace the first `menger-axioms` instance by an asymmetric space,
    /// to exercise the failure path.
    pub corrupt_axioms: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            properties: vec!["all".into()],
            instances: DEFAULT_INSTANCES,
            overrides: HEAVY.iter().map(|(p, n)| (p.to_string(), *n)).collect(),
            seed: DEFAULT_SEED,
            horizon: DEFAULT_HORIZON,
            eps: DEFAULT_EPS,
            corrupt_axioms: false,
        }
    }
}

impl SuiteConfig {
    pub fn property_ids(&self) -> Result<Vec<&'static str>> {
        let mut out: Vec<&'static str> = Vec::new();
        for p in &self.properties {
            if p == "all" {
                out.extend(PROPERTIES);
            } else {
                let id = PROPERTIES
                    .iter()
                    .find(|q| **q == p.as_str())
                    .ok_or_else(|| Error::Precondition(format!("unknown property {p:?}")))?;
                out.push(id);
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|p| seen.insert(*p));
        Ok(out)
    }

    fn instances_for(&self, p: &str) -> usize {
        self.overrides.get(p).copied().unwrap_or(self.instances)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub property: String,
    pub instances: usize,
    pub passed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl SuiteEntry {
    pub fn ok(&self) -> bool {
        self.passed == self.instances
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub horizon: u64,
    pub eps: f64,
    pub entries: Vec<SuiteEntry>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn table(&self) -> String {
        let mut out = format!("seed {}  horizon {}  eps {}\n", self.seed, self.horizon, self.eps);
        out.push_str(&format!("{:<28} {:>9} {:>7}  result\n", "property", "instances", "passed"));
        for e in &self.entries {
            let result = if e.ok() { "pass".to_string() } else { format!("FAIL {}", e.witness.as_deref().unwrap_or("")) };
            out.push_str(&format!("{:<28} {:>9} {:>7}  {}\n", e.property, e.instances, e.passed, result));
        }
        out.push_str(if self.pass { "overall: pass\n" } else { "overall: FAIL\n" });
        out
    }
}

/// Shared parameters for one property instance.
pub struct Ctx {
    pub horizon: u64,
    pub eps: f64,
    pub instance: usize,
    pub corrupt_axioms: bool,
}

/// `Err` carries the counterexample.
type Outcome = std::result::Result<(), Value>;

fn fail(reason: impl Into<String>, detail: Value) -> Outcome {
    Err(json!({ "reason": reason.into(), "detail": detail }))
}

fn check(cond: bool, reason: &str, detail: impl FnOnce() -> Value) -> Outcome {
    if cond {
        Ok(())
    } else {
        fail(reason, detail())
    }
}

fn lift<T>(r: Result<T>, what: &str, detail: impl FnOnce() -> Value) -> std::result::Result<T, Value> {
    r.map_err(|e| json!({ "reason": format!("{what}: {e}"), "detail": detail() }))
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed for instance `i` of property `p`.
pub fn instance_seed(seed: u64, property: &str, instance: usize) -> u64 {
    let mut h = seed ^ fnv1a(property).rotate_left(17);
    h ^= (instance as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    h
}

pub fn run_property(property: &str, ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    match property {
        "menger-axioms" => prop_menger(ctx, rng),
        "neighbourhoods" => prop_neighbourhoods(rng),
        "levy-metric" => prop_levy_metric(rng),
        "eps0-balls" => prop_eps0_balls(rng),
        "triangle-laws" => prop_triangle_laws(rng),
        "density-calculus" => prop_density_calculus(rng),
        "lambda-separation" => prop_lambda_separation(ctx, rng),
        "limit-uniqueness" => prop_limit_uniqueness(ctx, rng),
        "eventually-constant" => prop_eventually_constant(ctx, rng),
        "full-density-extraction" => prop_extraction(ctx, rng),
        "full-density-converse" => prop_converse(ctx, rng),
        "almost-everywhere-agreement" => prop_agreement(ctx, rng),
        "convergent-is-cauchy" => prop_convergent_cauchy(ctx, rng),
        "pairwise-null-exceptions" => prop_pair_off(ctx, rng),
        "distance-sequence-cauchy" => prop_distance_sequence(ctx, rng),
        "cauchy-forms" => prop_cauchy_forms(ctx, rng),
        "point-set-chain" => prop_point_chain(ctx, rng),
        "limit-points-of-convergent" => prop_limit_points(ctx, rng),
        "null-perturbation" => prop_null_perturbation(ctx, rng),
        "cluster-set-closed" => prop_cluster_closed(ctx, rng),
        "avoided-set-null" => prop_avoided_null(ctx, rng),
        "nonthin-forces-cluster" => prop_nonthin(ctx, rng),
        "bounded-has-cluster" => prop_bounded(ctx, rng),
        other => fail(format!("unknown property {other}"), Value::Null),
    }
}

/// Runs the configured properties. Failing instances are reported, never
/// raised; the first failure of each property is written to `witness_dir`
/// when given.
pub fn run_suite(config: &SuiteConfig, witness_dir: Option<&Path>) -> Result<SuiteReport> {
    let props = config.property_ids()?;
    let jobs: Vec<(usize, usize)> =
        props.iter().enumerate().flat_map(|(pi, p)| (0..config.instances_for(p)).map(move |i| (pi, i))).collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(pi, i)| {
            let ctx = Ctx { horizon: config.horizon, eps: config.eps, instance: i, corrupt_axioms: config.corrupt_axioms };
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(config.seed, props[pi], i));
            run_property(props[pi], &ctx, &mut rng)
        })
        .collect();

    let mut entries: Vec<SuiteEntry> = props
        .iter()
        .map(|p| SuiteEntry {
            property: p.to_string(),
            instances: config.instances_for(p),
            passed: 0,
            first_counterexample: None,
            witness: None,
        })
        .collect();
    for (&(pi, i), outcome) in jobs.iter().zip(outcomes) {
        let entry = &mut entries[pi];
        match outcome {
            Ok(()) => entry.passed += 1,
            Err(detail) if entry.first_counterexample.is_none() => {
                let witness = json!({
                    "property": props[pi],
                    "instance": i,
                    "seed": config.seed,
                    "instance_seed": instance_seed(config.seed, props[pi], i),
                    "horizon": config.horizon,
                    "eps": config.eps,
                    "counterexample": detail,
                });
                let name = format!("witness-{}-{}.json", props[pi], i);
                if let Some(dir) = witness_dir {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join(&name), serde_json::to_string_pretty(&witness)?)?;
                }
                entry.first_counterexample = Some(witness);
                entry.witness = Some(name);
            }
            Err(_) => {}
        }
    }
    let pass = entries.iter().all(SuiteEntry::ok);
    Ok(SuiteReport { seed: config.seed, horizon: config.horizon, eps: config.eps, entries, pass })
}

/// Re-runs one instance, e.g. from a witness file.
pub fn replay(property: &str, instance_seed: u64, horizon: u64, eps: f64) -> std::result::Result<(), Value> {
    let ctx = Ctx { horizon, eps, instance: usize::MAX, corrupt_axioms: false };
    run_property(property, &ctx, &mut ChaCha8Rng::seed_from_u64(instance_seed))
}

// ---------------------------------------------------------------- properties

fn space_or_fail(rng: &mut ChaCha8Rng) -> std::result::Result<Arc<PMSpace>, Value> {
    lift(random_space(rng), "space generation", || Value::Null).map(Arc::new)
}

fn seq_json(s: &SymbolicSequence) -> Value {
    s.to_json_value()
}

fn analyzer(s: &SymbolicSequence, lambda: &LambdaSeq, ctx: &Ctx) -> std::result::Result<Analyzer, Value> {
    lift(Analyzer::new(s, lambda, ctx.horizon, ctx.eps), "analyzer", || seq_json(s))
}

fn prop_menger(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let mut n = rng.random_range(1..=12);
    let corrupt = ctx.corrupt_axioms && ctx.instance == 0;
    if corrupt {
        n = n.max(2);
    }
    let mut space = lift(random_space_with(rng, n), "construction", || json!({ "points": n }))?;
    if corrupt {
        let mut dist: Vec<Vec<StepDistFn>> =
            (0..n).map(|i| (0..n).map(|j| space.dist(i, j).clone()).collect()).collect();
        dist[0][1] = dist[0][1].rescale(&num::int(2));
        space = lift(PMSpace::from_matrix(space.points().to_vec(), dist, space.tau()), "corruption", || Value::Null)?;
    }
    let report = lift(space.verify_axioms(), "verify_axioms", || Value::Null)?;
    check(report.passed, "Menger axioms fail", || json!({ "space": space, "report": report }))
}

fn prop_neighbourhoods(rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let n = space.len();
    let detail = || json!({ "space": space.as_ref() });
    let mut radii = space.t_grid();
    radii.extend((0..4).map(|_| random_rat(rng, 1, 40, 20)));
    radii.sort();
    let e0 = eps0();
    for (ri, r) in radii.iter().enumerate() {
        let vic = lift(space.vicinity(r), "vicinity", detail)?;
        for x in 0..n {
            let nb = lift(space.strong_neighborhood(x, r), "neighbourhood", detail)?;
            let from_vic: PointSet = (0..n).filter(|&y| vic.contains(x, y)).collect();
            check(nb == from_vic, "neighbourhood differs from vicinity section", || json!({ "r": r.to_string(), "x": x }))?;
            check(nb.contains(&x), "neighbourhood misses its centre", || json!({ "r": r.to_string(), "x": x }))?;
            if let Some(r2) = radii.get(ri + 1) {
                let wider = lift(space.strong_neighborhood(x, r2), "neighbourhood", detail)?;
                check(nb.is_subset(&wider), "neighbourhoods not monotone in r", || json!({ "r": r.to_string(), "x": x }))?;
            }
            for y in 0..n {
                let d = lift(levy_distance(space.dist(x, y), &e0, DEFAULT_TOL), "d_L", detail)?.value;
                let rf = num::to_f64(r);
                if (d - rf).abs() > 2e-9 {
                    check((d < rf) == nb.contains(&y), "d_L form of the neighbourhood disagrees", || {
                        json!({ "r": r.to_string(), "x": x, "y": y, "d_L": d })
                    })?;
                }
            }
        }
        let grid = space.t_grid();
        let eta = lift(space.find_eta(r, &grid), "find_eta", detail)?;
        check(eta.is_some(), "no η on the grid", || json!({ "r": r.to_string() }))?;
    }
    let t_small = &space.t_grid()[0];
    for x in 0..n {
        let nb = lift(space.strong_neighborhood(x, t_small), "neighbourhood", detail)?;
        check(nb == [x].into(), "neighbourhood below scale is not a singleton", || json!({ "x": x }))?;
    }
    let a: PointSet = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if !a.is_empty() {
        let k = lift(space.strong_closure(&a), "closure", detail)?;
        let kk = lift(space.strong_closure(&k), "closure", detail)?;
        check(a.is_subset(&k) && k == kk, "closure not extensive and idempotent", || json!({ "a": a, "k": k }))?;
    }
    Ok(())
}

fn prop_levy_metric(rng: &mut ChaCha8Rng) -> Outcome {
    const BAND: f64 = 3e-9;
    for _ in 0..3 {
        let f = random_distance_fn(rng);
        let g = random_distance_fn(rng);
        let h = random_distance_fn(rng);
        let detail = || json!({ "f": f, "g": g, "h": h });
        let d = |a: &StepDistFn, b: &StepDistFn| lift(levy_distance(a, b, DEFAULT_TOL), "d_L", detail).map(|d| d.value);
        let (fg, gf, gh, fh, ff) = (d(&f, &g)?, d(&g, &f)?, d(&g, &h)?, d(&f, &h)?, d(&f, &f)?);
        check(ff == 0.0, "d_L(f, f) != 0", detail)?;
        check((0.0..=1.0).contains(&fg), "d_L out of [0, 1]", detail)?;
        check((fg - gf).abs() <= BAND, "d_L not symmetric", detail)?;
        check(fh <= fg + gh + BAND, "triangle inequality fails", detail)?;
        check((f == g) == (fg == 0.0), "d_L vanishes off the diagonal", detail)?;
    }
    Ok(())
}

fn prop_eps0_balls(rng: &mut ChaCha8Rng) -> Outcome {
    let e0 = eps0();
    for _ in 0..10 {
        let h = random_distance_fn(rng);
        let dl = lift(levy_distance(&h, &e0, DEFAULT_TOL), "d_L", || json!({ "h": h }))?.value;
        let exact = num::to_f64(&eps0_radius(&h));
        check((dl - exact).abs() <= 2e-9, "bisection disagrees with the exact radius", || json!({ "h": h, "d_L": dl, "exact": exact }))?;
        for i in 1..=19 {
            let t = rat(i, 20);
            let tf = num::to_f64(&t);
            if (dl - tf).abs() <= 2e-9 {
                continue;
            }
            let near = lift(near_eps0(&h, &t), "near_eps0", || json!({ "h": h }))?;
            check(near == (dl < tf), "h(t) > 1 - t disagrees with d_L(h, ε_0) < t", || json!({ "h": h, "t": tf, "d_L": dl }))?;
        }
    }
    Ok(())
}

fn prop_triangle_laws(rng: &mut ChaCha8Rng) -> Outcome {
    for t in TNorm::ALL {
        let tau = TriangleFn::new(t);
        let report = lift(verify_triangle_laws(&tau, 2, rng, |r| random_distance_fn(r)), "laws", || json!({ "tnorm": t }))?;
        check(report.passed(), "triangle law fails", || json!(report))?;
        let a = random_rat(rng, 0, 40, 8);
        let b = random_rat(rng, 0, 40, 6);
        let got = lift(tau.apply(&unit_step(ExtReal::Finite(a.clone())), &unit_step(ExtReal::Finite(b.clone()))), "τ", || Value::Null)?;
        let want = unit_step(ExtReal::Finite(&a + &b));
        check(got == want, "τ(ε_a, ε_b) != ε_(a+b)", || json!({ "tnorm": t, "a": a.to_string(), "b": b.to_string() }))?;
    }
    Ok(())
}

fn prop_density_calculus(rng: &mut ChaCha8Rng) -> Outcome {
    let lambda = random_lambda(rng);
    let d = rng.random_range(1..=12u64);
    let start = rng.random_range(1..=d);
    let ap = SetDescription::ap(start, d).unwrap();
    let detail = || json!({ "lambda": lambda, "ap": [start, d] });
    let exact = exact_density(&ap, &lambda, 1000);
    check(exact.exact_value() == Some(&rat(1, d as i128)), "AP density is not 1/d", detail)?;
    for n in [1_000u64, 10_000, 100_000] {
        let emp = num::to_f64(&empirical_density(&ap, &lambda, n));
        check((0.0..=1.0).contains(&emp), "empirical density out of [0, 1]", detail)?;
        check((emp - 1.0 / d as f64).abs() <= d as f64 / lambda.at(n) as f64, "count deviates from 1/d", || {
            json!({ "lambda": lambda, "ap": [start, d], "n": n, "empirical": emp })
        })?;
    }
    let a = random_null_set(rng, &LambdaSeq::CeilSqrt);
    let b = random_null_set(rng, &LambdaSeq::CeilSqrt);
    let zero = rat(0, 1);
    let one = rat(1, 1);
    for (what, set, want) in [
        ("null union", SetDescription::union(vec![a.clone(), b.clone()]), &zero),
        ("complement of null", a.clone().complement(), &one),
        ("subset of null", SetDescription::inter(vec![ap.clone(), a.clone()]), &zero),
    ] {
        let v = exact_density(&set, &lambda, 1000);
        check(v.exact_value() == Some(want), what, || json!({ "set": set, "lambda": lambda }))?;
    }
    let fin = SetDescription::finite((0..rng.random_range(1..20)).map(|_| rng.random_range(1..=500u64))).unwrap();
    for (set, natural) in [(&ap, rat(1, d as i128)), (&fin, zero.clone())] {
        check(exact_density(set, &LambdaSeq::Identity, 1000).exact_value() == Some(&natural), "identity λ is not natural density", || json!({ "set": set }))?;
        let emp = num::to_f64(&empirical_density(set, &LambdaSeq::Identity, 100_000));
        check((emp - num::to_f64(&natural)).abs() <= d as f64 / 100_000.0 + 1e-3, "natural density count off", || json!({ "set": set, "empirical": emp }))?;
    }
    Ok(())
}

fn prop_lambda_separation(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let n = space.len();
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    let windows = SetDescription::windows(LambdaSeq::CeilSqrt, 4, 1).unwrap();
    let seq = lift(
        SymbolicSequence::new(space.clone(), IndexedSequence::new(Pattern::constant(a), windows, Pattern::constant(b))),
        "sequence",
        || Value::Null,
    )?;
    let label = space.label(a).to_string();
    let sqrt = lift(analyzer(&seq, &LambdaSeq::CeilSqrt, ctx)?.check_convergence(&label), "converge", || seq_json(&seq))?;
    let ident = lift(analyzer(&seq, &LambdaSeq::Identity, ctx)?.check_convergence(&label), "converge", || seq_json(&seq))?;
    let max_upper = |r: &crate::analysis::ConvergenceReport| r.per_t.iter().map(|s| s.null.upper()).fold(0.0, f64::max);
    check(sqrt.verdict == Verdict::Diverges && max_upper(&sqrt) >= 0.5, "ceil-sqrt λ does not diverge decisively", || json!(sqrt))?;
    check(ident.converges() && max_upper(&ident) <= ctx.eps, "identity λ does not converge decisively", || json!(ident))
}

fn prop_limit_uniqueness(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (seq, planted) = if rng.random_bool(0.5) {
        let (s, l) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
        (s, Some(l))
    } else {
        (lift(random_sequence(rng, &space, &lambda), "sequence", || Value::Null)?, None)
    };
    let found = lift(analyzer(&seq, &lambda, ctx)?.find_limit(), "find_limit", || json!({ "seq": seq_json(&seq), "lambda": lambda }))?;
    if let Some(l) = planted {
        check(found.as_deref() == Some(space.label(l)), "planted limit not found", || json!({ "seq": seq_json(&seq), "lambda": lambda, "found": found }))?;
    }
    Ok(())
}

fn prop_eventually_constant(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let n = space.len();
    let c = rng.random_range(0..n);
    let prefix = (0..rng.random_range(0..=20)).map(|_| rng.random_range(0..n)).collect();
    let seq = lift(SymbolicSequence::new(space.clone(), IndexedSequence::plain(Pattern::eventually(prefix, vec![c]))), "sequence", || Value::Null)?;
    for lambda in LambdaSeq::FAMILIES {
        let r = lift(analyzer(&seq, &lambda, ctx)?.check_convergence(space.label(c)), "converge", || seq_json(&seq))?;
        check(r.converges(), "eventually constant sequence does not converge", || json!({ "seq": seq_json(&seq), "report": r }))?;
    }
    Ok(())
}

fn prop_extraction(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (seq, l) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let detail = || json!({ "seq": seq_json(&seq), "lambda": lambda });
    let x = lift(analyzer(&seq, &lambda, ctx)?.extract_full_density_subsequence(space.label(l)), "extract", detail)?;
    check(x.converges, "G-subsequence does not converge", || json!({ "seq": seq_json(&seq), "extraction": x }))?;
    let min = x.min_ratio_top_decade;
    check(min >= 1.0 - ctx.eps, "G density does not approach 1", || json!({ "seq": seq_json(&seq), "lambda": lambda, "min_ratio": min }))
}

fn prop_converse(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let n = space.len();
    let l = rng.random_range(0..n);
    // G = complement of a null set; off G anything goes.
    let off_g = random_null_set(rng, &lambda);
    let seq = lift(
        SymbolicSequence::new(space.clone(), IndexedSequence::new(Pattern::constant(l), off_g, random_pattern(rng, n))),
        "sequence",
        || Value::Null,
    )?;
    let r = lift(analyzer(&seq, &lambda, ctx)?.check_convergence(space.label(l)), "converge", || seq_json(&seq))?;
    check(r.converges(), "full-density convergent subsequence does not give convergence", || json!({ "seq": seq_json(&seq), "report": r }))
}

fn prop_agreement(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let n = space.len();
    let l = rng.random_range(0..n);
    let prefix: Vec<usize> = (0..rng.random_range(0..=15)).map(|_| rng.random_range(0..n)).collect();
    let g = Pattern::eventually(prefix, vec![l]);
    let x = lift(
        SymbolicSequence::new(space.clone(), IndexedSequence::new(g, random_null_set(rng, &lambda), random_pattern(rng, n))),
        "sequence",
        || Value::Null,
    )?;
    let r = lift(analyzer(&x, &lambda, ctx)?.check_convergence(space.label(l)), "converge", || seq_json(&x))?;
    check(r.converges(), "a.e. agreement with a convergent sequence does not give convergence", || json!({ "seq": seq_json(&x), "report": r }))
}

fn prop_convergent_cauchy(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (seq, _) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let r = lift(analyzer(&seq, &lambda, ctx)?.check_cauchy(), "cauchy", || seq_json(&seq))?;
    check(r.cauchy, "convergent sequence not Cauchy", || json!({ "seq": seq_json(&seq), "lambda": lambda, "report": r }))
}

fn prop_pair_off(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (seq, _) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let r = lift(analyzer(&seq, &lambda, ctx)?.pair_off_null_set(), "pair_off_null_set", || json!({ "seq": seq_json(&seq), "lambda": lambda }))?;
    for s in &r.per_t {
        check(s.null.is_null(), "H_t is not null", || json!({ "seq": seq_json(&seq), "step": s }))?;
        check(s.pairs_checked > 0, "no sampled pairs off H_t", || json!({ "seq": seq_json(&seq), "step": s }))?;
    }
    Ok(())
}

fn prop_distance_sequence(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (x, _) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let (g, _) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let detail = || json!({ "x": seq_json(&x), "g": seq_json(&g), "lambda": lambda });
    let (m, _) = lift(pairwise_distance_sequence(&x, &g), "pairwise", detail)?;
    let ok = lift(metric_cauchy(&m, &lambda, ctx.horizon, ctx.eps), "metric cauchy", detail)?;
    check(ok, "distance sequence of Cauchy sequences is not Cauchy", detail)
}

fn prop_cauchy_forms(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let lambda = random_lambda(rng);
    let k = rng.random_range(2..=5);
    let mut vals: Vec<Rational> = Vec::new();
    while vals.len() < k {
        let v = random_rat(rng, -20, 20, 4);
        if !vals.contains(&v) {
            vals.push(v);
        }
    }
    let seq = match rng.random_range(0..3) {
        0 => IndexedSequence::new(Pattern::constant(rng.random_range(0..k)), random_null_set(rng, &lambda), random_pattern(rng, k)),
        1 => IndexedSequence::plain(random_pattern(rng, k)),
        _ => IndexedSequence::new(random_pattern(rng, k), random_nonnull_set(rng, &lambda), random_pattern(rng, k)),
    };
    let detail = || json!({ "values": vals.iter().map(|v| v.to_string()).collect::<Vec<_>>(), "lambda": lambda });
    let m = lift(MetricSequence::rational(seq, vals.clone()), "sequence", detail)?;
    let r = lift(check_cauchy_equivalences(&m, &lambda, ctx.horizon, ctx.eps), "cauchy forms", detail)?;
    check(r.agree, "the three Cauchy forms disagree", || json!({ "values": vals.iter().map(|v| v.to_string()).collect::<Vec<_>>(), "report": r }))
}

fn prop_point_chain(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let seq = lift(random_sequence(rng, &space, &lambda), "sequence", || Value::Null)?;
    lift(analyzer(&seq, &lambda, ctx)?.point_sets(), "point_sets", || json!({ "seq": seq_json(&seq), "lambda": lambda }))?;
    Ok(())
}

fn prop_limit_points(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let (seq, l) = lift(planted_convergent(rng, &space, &lambda), "plant", || Value::Null)?;
    let ps = lift(analyzer(&seq, &lambda, ctx)?.point_sets(), "point_sets", || seq_json(&seq))?;
    let want: BTreeSet<String> = [space.label(l).to_string()].into();
    check(ps.stat_limit_points == want && ps.stat_cluster_points == want, "limit points of a convergent sequence", || {
        json!({ "seq": seq_json(&seq), "lambda": lambda, "points": ps })
    })
}

fn prop_null_perturbation(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let n = space.len();
    let base = random_pattern(rng, n);
    let x = lift(SymbolicSequence::new(space.clone(), IndexedSequence::plain(base.clone())), "sequence", || Value::Null)?;
    let y = lift(
        SymbolicSequence::new(space.clone(), IndexedSequence::new(base, random_null_set(rng, &lambda), random_pattern(rng, n))),
        "sequence",
        || Value::Null,
    )?;
    let px = lift(analyzer(&x, &lambda, ctx)?.point_sets(), "point_sets", || seq_json(&x))?;
    let py = lift(analyzer(&y, &lambda, ctx)?.point_sets(), "point_sets", || seq_json(&y))?;
    check(
        px.stat_limit_points == py.stat_limit_points && px.stat_cluster_points == py.stat_cluster_points,
        "null perturbation changes statistical limit or cluster points",
        || json!({ "x": seq_json(&x), "y": seq_json(&y), "lambda": lambda, "px": px, "py": py }),
    )
}

fn label_set(space: &PMSpace, s: &BTreeSet<String>) -> PointSet {
    s.iter().map(|l| space.index(l).expect("label from this space")).collect()
}

fn prop_cluster_closed(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let seq = lift(random_sequence(rng, &space, &lambda), "sequence", || Value::Null)?;
    let ps = lift(analyzer(&seq, &lambda, ctx)?.point_sets(), "point_sets", || seq_json(&seq))?;
    let gamma = label_set(&space, &ps.stat_cluster_points);
    if gamma.is_empty() {
        return Ok(());
    }
    let closure = lift(space.strong_closure(&gamma), "closure", || Value::Null)?;
    check(closure == gamma, "cluster set is not closed", || json!({ "seq": seq_json(&seq), "lambda": lambda, "points": ps }))
}

fn prop_avoided_null(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let seq = lift(random_sequence(rng, &space, &lambda), "sequence", || Value::Null)?;
    let an = analyzer(&seq, &lambda, ctx)?;
    let ps = lift(an.point_sets(), "point_sets", || seq_json(&seq))?;
    let outside: Vec<String> = space.points().iter().filter(|p| !ps.stat_cluster_points.contains(*p)).cloned().collect();
    let c: BTreeSet<String> = outside.into_iter().filter(|_| rng.random_bool(0.7)).collect();
    if c.is_empty() {
        return Ok(());
    }
    let v = lift(an.classify_points(&c), "classify", || Value::Null)?;
    check(v.is_null(), "set avoiding the cluster points is visited on a non-null set", || {
        json!({ "seq": seq_json(&seq), "lambda": lambda, "c": c, "verdict": v })
    })
}

fn prop_nonthin(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let seq = lift(random_sequence(rng, &space, &lambda), "sequence", || Value::Null)?;
    let an = analyzer(&seq, &lambda, ctx)?;
    let ps = lift(an.point_sets(), "point_sets", || seq_json(&seq))?;
    let heavy: Vec<&String> = ps.fibers.iter().filter(|(_, c)| !c.is_null()).map(|(l, _)| l).collect();
    let Some(anchor) = heavy.choose(rng) else {
        return fail("no point is visited on a non-null set", json!({ "seq": seq_json(&seq), "points": ps }));
    };
    let mut c: BTreeSet<String> = space.points().iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
    c.insert((*anchor).clone());
    let v = lift(an.classify_points(&c), "classify", || Value::Null)?;
    check(!v.is_null(), "superset of a non-null fiber classified null", || json!({ "seq": seq_json(&seq), "c": c }))?;
    check(ps.stat_cluster_points.intersection(&c).next().is_some(), "nonthin subsequence in C without a cluster point in C", || {
        json!({ "seq": seq_json(&seq), "lambda": lambda, "c": c, "points": ps })
    })
}

fn prop_bounded(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let space = space_or_fail(rng)?;
    let lambda = random_lambda(rng);
    let n = space.len();
    let mut members: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if members.is_empty() {
        members.push(rng.random_range(0..n));
    }
    let cycle: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| *members.choose(rng).unwrap()).collect();
    let seq = lift(
        SymbolicSequence::new(
            space.clone(),
            IndexedSequence::new(Pattern::periodic(cycle), random_null_set(rng, &lambda), random_pattern(rng, n)),
        ),
        "sequence",
        || Value::Null,
    )?;
    let ps = lift(analyzer(&seq, &lambda, ctx)?.point_sets(), "point_sets", || seq_json(&seq))?;
    let c: BTreeSet<String> = members.iter().map(|&i| space.label(i).to_string()).collect();
    check(
        !ps.stat_cluster_points.is_empty() && ps.stat_cluster_points.is_subset(&c),
        "bounded sequence without cluster points in C",
        || json!({ "seq": seq_json(&seq), "lambda": lambda, "c": c, "points": ps }),
    )
}

/// Route of a null verdict, for reports.
pub fn route_name(r: &NullRoute) -> &'static str {
    match r {
        NullRoute::Exact { .. } => "exact",
        NullRoute::Empirical { .. } => "empirical",
    }
}

//! Strong λ-statistical convergence, Cauchyness and limit/cluster points of
//! sequences in a finite PM space.
//!
//! A sequence is symbolic: an eventually periodic base pattern overridden on
//! an exception set. Every index set the analyzers need has the form
//! `{k : x_k ∈ S}` for a set of points `S`, which [`IndexedSequence::indices_with`]
//! turns back into a [`SetDescription`]. Density questions then go to the
//! `density` module, exactly where possible and over the horizon otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{self, Checkpoint, DensityProfile, LambdaSeq, NullClass, NullVerdict, SetDescription};
use crate::distfn::{eps0, levy_distance, StepDistFn, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::num::{self, Rational};
use crate::pmspace::{PMSpace, PointSet};

/// Eventually periodic pattern of value indices, read at index `k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Pattern {
    pub fn constant(v: usize) -> Self {
        Pattern { prefix: Vec::new(), cycle: vec![v] }
    }

    pub fn periodic(cycle: Vec<usize>) -> Self {
        Pattern { prefix: Vec::new(), cycle }
    }

    pub fn eventually(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        Pattern { prefix, cycle }
    }

    pub fn at(&self, k: u64) -> usize {
        let m = self.prefix.len() as u64;
        if k <= m {
            self.prefix[(k - 1) as usize]
        } else {
            self.cycle[((k - 1 - m) % self.cycle.len() as u64) as usize]
        }
    }

    pub fn values(&self) -> BTreeSet<usize> {
        self.prefix.iter().chain(&self.cycle).copied().collect()
    }

    /// `{k : pattern(k) ∈ s}`.
    pub fn indices_in(&self, s: &PointSet) -> SetDescription {
        let m = self.prefix.len() as u64;
        let p = self.cycle.len() as u64;
        let head: Vec<u64> = (1..=m).filter(|&k| s.contains(&self.prefix[(k - 1) as usize])).collect();
        let hits: Vec<u64> = (0..p).filter(|&r| s.contains(&self.cycle[r as usize])).collect();
        let mut parts = vec![SetDescription::Finite { elements: head.into_iter().collect() }];
        if hits.len() as u64 == p {
            parts.push(SetDescription::tail(m + 1));
        } else {
            parts.extend(hits.into_iter().map(|r| SetDescription::Ap { start: m + 1 + r, step: p }));
        }
        SetDescription::union(parts)
    }

    fn check(&self, n_values: usize) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::InvalidSequence("pattern cycle must be nonempty".into()));
        }
        if self.prefix.iter().chain(&self.cycle).any(|&v| v >= n_values) {
            return Err(Error::InvalidSequence("pattern refers to an unknown value".into()));
        }
        Ok(())
    }

    fn to_raw(&self, labels: &[String]) -> RawPattern {
        let names = |v: &[usize]| v.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>();
        if self.prefix.is_empty() && self.cycle.len() == 1 {
            RawPattern::Const { value: labels[self.cycle[0]].clone() }
        } else {
            RawPattern::Periodic { prefix: names(&self.prefix), cycle: names(&self.cycle) }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RawPattern {
    Const {
        value: String,
    },
    Periodic {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        prefix: Vec<String>,
        cycle: Vec<String>,
    },
}

impl RawPattern {
    fn resolve(&self, lookup: impl Fn(&str) -> Result<usize>) -> Result<Pattern> {
        match self {
            RawPattern::Const { value } => Ok(Pattern::constant(lookup(value)?)),
            RawPattern::Periodic { prefix, cycle } => Ok(Pattern::eventually(
                prefix.iter().map(|l| lookup(l)).collect::<Result<_>>()?,
                cycle.iter().map(|l| lookup(l)).collect::<Result<_>>()?,
            )),
        }
    }
}

/// Base pattern overridden by a second pattern on an exception set, over
/// value indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexedSequence {
    pub base: Pattern,
    pub exceptions: SetDescription,
    pub exception_values: Pattern,
}

impl IndexedSequence {
    pub fn new(base: Pattern, exceptions: SetDescription, exception_values: Pattern) -> Self {
        IndexedSequence { base, exceptions, exception_values }
    }

    pub fn plain(base: Pattern) -> Self {
        IndexedSequence { exception_values: base.clone(), base, exceptions: SetDescription::empty() }
    }

    pub fn term(&self, k: u64) -> usize {
        assert!(k >= 1, "sequences are indexed from 1");
        if self.exceptions.contains(k) {
            self.exception_values.at(k)
        } else {
            self.base.at(k)
        }
    }

    /// `x_1..x_horizon` at indices `1..`; slot 0 is unused.
    pub fn terms_upto(&self, horizon: u64) -> Vec<u16> {
        let exc = self.exceptions.indicator(horizon);
        let mut v: Vec<u16> = (0..=horizon)
            .map(|k| {
                let p = if exc[k as usize] { &self.exception_values } else { &self.base };
                p.at(k.max(1)) as u16
            })
            .collect();
        v[0] = 0;
        v
    }

    /// `{k : x_k ∈ s}` as `(B_s ∖ E) ∪ (E ∩ V_s)`.
    pub fn indices_with(&self, s: &PointSet) -> SetDescription {
        let b = self.base.indices_in(s);
        let e = &self.exceptions;
        if e.is_literally_empty() {
            return b;
        }
        let v = self.exception_values.indices_in(s);
        if v.is_literally_empty() {
            return SetDescription::inter(vec![b, e.clone().complement()]);
        }
        if b.is_literally_empty() {
            return SetDescription::inter(vec![e.clone(), v]);
        }
        if v.is_literally_full() {
            return SetDescription::union(vec![b, e.clone()]);
        }
        if b.is_literally_full() {
            return SetDescription::union(vec![e.clone().complement(), v]);
        }
        SetDescription::union(vec![
            SetDescription::inter(vec![b, e.clone().complement()]),
            SetDescription::inter(vec![e.clone(), v]),
        ])
    }

    fn check(&self, n_values: usize) -> Result<()> {
        self.base.check(n_values)?;
        self.exception_values.check(n_values)
    }
}

/// A sequence `x = {x_k}` in a finite PM space.
#[derive(Clone, Debug)]
pub struct SymbolicSequence {
    space: Arc<PMSpace>,
    index: IndexedSequence,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    space: serde_json::Value,
    base: RawPattern,
    #[serde(default = "SetDescription::empty")]
    exceptions: SetDescription,
    #[serde(default)]
    exception_values: Option<RawPattern>,
}

impl SymbolicSequence {
    pub fn new(space: Arc<PMSpace>, index: IndexedSequence) -> Result<Self> {
        index.check(space.len())?;
        Ok(SymbolicSequence { space, index })
    }

    /// Convenience constructor from labels.
    pub fn from_labels(
        space: Arc<PMSpace>,
        base: &RawPattern,
        exceptions: SetDescription,
        exception_values: Option<&RawPattern>,
    ) -> Result<Self> {
        let base = base.resolve(|l| space.index(l))?;
        let exception_values = match exception_values {
            Some(p) => p.resolve(|l| space.index(l))?,
            None => base.clone(),
        };
        Self::new(space, IndexedSequence::new(base, exceptions, exception_values))
    }

    pub fn constant(space: Arc<PMSpace>, label: &str) -> Result<Self> {
        let i = space.index(label)?;
        Self::new(space, IndexedSequence::plain(Pattern::constant(i)))
    }

    /// Reads the JSON form. `space` is either an inline PM space or a path
    /// to one, resolved against `base_dir`.
    pub fn from_json(json: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawSequence = serde_json::from_str(json)?;
        let space = match &raw.space {
            serde_json::Value::String(path) => {
                let p = match base_dir {
                    Some(d) => d.join(path),
                    None => path.into(),
                };
                PMSpace::from_json(&std::fs::read_to_string(&p)?)?
            }
            v => PMSpace::deserialize(v)?,
        };
        Self::from_labels(Arc::new(space), &raw.base, raw.exceptions, raw.exception_values.as_ref())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let labels = self.space.points();
        let raw = RawSequence {
            space: serde_json::to_value(self.space.as_ref()).expect("space serializes"),
            base: self.index.base.to_raw(labels),
            exceptions: self.index.exceptions.clone(),
            exception_values: Some(self.index.exception_values.to_raw(labels)),
        };
        serde_json::to_value(raw).expect("sequence serializes")
    }

    pub fn space(&self) -> &PMSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<PMSpace> {
        &self.space
    }

    pub fn index(&self) -> &IndexedSequence {
        &self.index
    }

    pub fn term(&self, k: u64) -> usize {
        self.index.term(k)
    }

    pub fn term_label(&self, k: u64) -> &str {
        self.space.label(self.term(k))
    }

    pub fn indices_with(&self, s: &PointSet) -> SetDescription {
        self.index.indices_with(s)
    }

    /// Same space and exceptions, different patterns.
    pub fn with_index(&self, index: IndexedSequence) -> Result<Self> {
        Self::new(self.space.clone(), index)
    }
}

pub fn term(seq: &SymbolicSequence, k: u64) -> String {
    seq.term_label(k).to_string()
}

/// Null verdicts for sets `{k : x_k ∈ S}`, cached by `S`.
struct NullOracle {
    lambda: LambdaSeq,
    horizon: u64,
    eps: f64,
    terms: OnceLock<Vec<u16>>,
    cache: Mutex<BTreeMap<PointSet, NullVerdict>>,
}

impl NullOracle {
    fn new(lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<Self> {
        density::check_horizon(horizon)?;
        density::check_eps(eps)?;
        Ok(NullOracle {
            lambda: lambda.clone(),
            horizon,
            eps,
            terms: OnceLock::new(),
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    fn terms(&self, build: impl FnOnce(u64) -> Vec<u16>) -> &[u16] {
        self.terms.get_or_init(|| build(self.horizon))
    }

    fn indicator(&self, s: &PointSet, f: impl FnOnce(u64) -> Vec<u16>) -> Vec<bool> {
        let mut mask = [false; 1 << 16];
        for &p in s {
            mask[p] = true;
        }
        let mut ind: Vec<bool> = self.terms(f).iter().map(|&v| mask[v as usize]).collect();
        ind[0] = false;
        ind
    }

    fn verdict(&self, s: &PointSet, desc: &SetDescription, f: impl FnOnce(u64) -> Vec<u16>) -> NullVerdict {
        if let Some(v) = self.cache.lock().unwrap().get(s) {
            return v.clone();
        }
        let v = match density::exact_null(desc) {
            Some(v) => v,
            None => density::classify_profile(&DensityProfile::from_indicator(&self.indicator(s, f), &self.lambda), self.eps),
        };
        self.cache.lock().unwrap().insert(s.clone(), v.clone());
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converges { point: String },
    Diverges,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStep {
    #[serde(with = "num::serde_rational")]
    pub t: Rational,
    /// `{j : F_{x_j L}(t) <= 1 - t}`.
    pub exceptions: SetDescription,
    pub null: NullVerdict,
    /// Whether `{y : d_L(F_yL, ε_0) >= t}` picks the same points, ignoring
    /// points within the bisection band of `t`.
    pub dl_form_agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub candidate: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub lambda: LambdaSeq,
    pub horizon: u64,
    pub eps: f64,
    pub per_t: Vec<ConvergenceStep>,
}

impl ConvergenceReport {
    pub fn converges(&self) -> bool {
        matches!(self.verdict, Verdict::Converges { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyStep {
    #[serde(with = "num::serde_rational")]
    pub t: Rational,
    pub n0: Option<u64>,
    pub n0_label: Option<String>,
    pub null: Option<NullVerdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyReport {
    pub cauchy: bool,
    pub pool_size: usize,
    pub per_t: Vec<CauchyStep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOffStep {
    #[serde(with = "num::serde_rational")]
    pub t: Rational,
    #[serde(with = "num::serde_rational")]
    pub gamma: Rational,
    pub n0: u64,
    pub h_t: SetDescription,
    pub g_t: SetDescription,
    pub null: NullVerdict,
    pub pairs_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOffReport {
    pub per_t: Vec<PairOffStep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Threshold {
    pub t: u64,
    pub u_t: u64,
    pub g_t: SetDescription,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCheck {
    #[serde(with = "num::serde_rational")]
    pub t: Rational,
    /// First index from which every member of G up to the horizon lies in
    /// the strong t-neighbourhood of the limit.
    pub tail_from: u64,
    pub certified_by: u64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Extraction {
    pub candidate: String,
    pub t_max: u64,
    pub thresholds: Vec<Threshold>,
    pub g: SetDescription,
    pub checkpoints: Vec<Checkpoint>,
    /// Smallest ratio `|G ∩ I_n| / λ_n` over `10^4 <= n <= horizon`.
    pub min_ratio_from_1e4: Option<f64>,
    /// Smallest ratio over the top decade `[horizon/10, horizon]`.
    pub min_ratio_top_decade: f64,
    pub tails: Vec<TailCheck>,
    pub converges: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSets {
    pub strong_limit_points: BTreeSet<String>,
    pub stat_limit_points: BTreeSet<String>,
    pub stat_cluster_points: BTreeSet<String>,
    pub fibers: BTreeMap<String, NullClass>,
}

/// Analyzer for one sequence under fixed `(λ, horizon, eps)`.
pub struct Analyzer {
    seq: SymbolicSequence,
    oracle: NullOracle,
    grid: Vec<Rational>,
}

/// Indices probed for a Cauchy witness beyond the first outside the
/// exceptions.
const POOL_HEAD: usize = 100;
const SAMPLED_PAIRS: usize = 10_000;
const DL_BAND: f64 = 2e-9;

impl Analyzer {
    pub fn new(seq: &SymbolicSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<Self> {
        Ok(Analyzer { seq: seq.clone(), oracle: NullOracle::new(lambda, horizon, eps)?, grid: seq.space.t_grid() })
    }

    pub fn sequence(&self) -> &SymbolicSequence {
        &self.seq
    }

    pub fn grid(&self) -> &[Rational] {
        &self.grid
    }

    fn space(&self) -> &PMSpace {
        &self.seq.space
    }

    /// Verdict for `{k : x_k ∈ s}`.
    pub fn null_of(&self, s: &PointSet) -> NullVerdict {
        let desc = self.seq.indices_with(s);
        let idx = &self.seq.index;
        self.oracle.verdict(s, &desc, |h| idx.terms_upto(h))
    }

    fn terms(&self) -> &[u16] {
        let idx = &self.seq.index;
        self.oracle.terms(|h| idx.terms_upto(h))
    }

    fn far(&self, y: usize, t: &Rational) -> PointSet {
        (0..self.space().len()).filter(|&z| !self.space().is_close(z, y, t)).collect()
    }

    fn near(&self, y: usize, t: &Rational) -> PointSet {
        (0..self.space().len()).filter(|&z| self.space().is_close(z, y, t)).collect()
    }

    pub fn check_convergence(&self, candidate: &str) -> Result<ConvergenceReport> {
        let l = self.space().index(candidate)?;
        let e0 = eps0();
        let dl: Vec<f64> = (0..self.space().len())
            .map(|y| levy_distance(self.space().dist(y, l), &e0, DEFAULT_TOL).map(|d| d.value))
            .collect::<Result<_>>()?;
        let mut per_t = Vec::with_capacity(self.grid.len());
        for t in &self.grid {
            let far = self.far(l, t);
            let tf = num::to_f64(t);
            let dl_form_agrees =
                (0..dl.len()).filter(|&y| (dl[y] - tf).abs() > DL_BAND).all(|y| (dl[y] >= tf) == far.contains(&y));
            per_t.push(ConvergenceStep {
                t: t.clone(),
                exceptions: self.seq.indices_with(&far),
                null: self.null_of(&far),
                dl_form_agrees,
            });
        }
        let verdict = if per_t.iter().all(|s| s.null.is_null()) {
            Verdict::Converges { point: candidate.to_string() }
        } else if per_t.iter().any(|s| !s.null.is_null() && s.null.is_decisively_nonnull(self.oracle.eps)) {
            Verdict::Diverges
        } else {
            Verdict::Inconclusive
        };
        Ok(ConvergenceReport {
            candidate: candidate.to_string(),
            verdict,
            lambda: self.oracle.lambda.clone(),
            horizon: self.oracle.horizon,
            eps: self.oracle.eps,
            per_t,
        })
    }

    /// The unique strong λ-statistical limit, if any. Two passing candidates
    /// is an invariant violation.
    pub fn find_limit(&self) -> Result<Option<String>> {
        let mut found: Vec<String> = Vec::new();
        for label in self.space().points() {
            if self.check_convergence(label)?.converges() {
                found.push(label.clone());
            }
        }
        match found.len() {
            0 => Ok(None),
            1 => Ok(found.pop()),
            _ => Err(Error::Invariant(format!("several strong λ-statistical limits: {found:?}"))),
        }
    }

    /// Candidate `N0` values: the first indices outside the exceptions, then
    /// powers of two, keeping the first index for each label.
    fn cauchy_pool(&self) -> Vec<u64> {
        let h = self.oracle.horizon;
        let mut pool: Vec<u64> = (1..=h).filter(|&k| !self.seq.index.exceptions.contains(k)).take(POOL_HEAD).collect();
        let mut k = 1u64;
        while k <= h {
            pool.push(k);
            k *= 2;
        }
        let mut seen = BTreeSet::new();
        pool.into_iter().filter(|&k| seen.insert(self.seq.term(k))).collect()
    }

    pub fn check_cauchy(&self) -> Result<CauchyReport> {
        let pool = self.cauchy_pool();
        let mut per_t = Vec::with_capacity(self.grid.len());
        for t in &self.grid {
            let mut step = CauchyStep { t: t.clone(), n0: None, n0_label: None, null: None };
            for &k in &pool {
                let z = self.seq.term(k);
                let v = self.null_of(&self.far(z, t));
                if v.is_null() {
                    step = CauchyStep {
                        t: t.clone(),
                        n0: Some(k),
                        n0_label: Some(self.space().label(z).to_string()),
                        null: Some(v),
                    };
                    break;
                }
            }
            per_t.push(step);
        }
        Ok(CauchyReport { cauchy: per_t.iter().all(|s| s.n0.is_some()), pool_size: pool.len(), per_t })
    }

    /// For each grid `t`, a null `H_t` off which all terms are pairwise
    /// `t`-close, built from a Cauchy witness at a radius `γ` with
    /// `V(γ) ∘ V(γ) ⊆ V(t)`.
    pub fn pair_off_null_set(&self) -> Result<PairOffReport> {
        let cauchy = self.check_cauchy()?;
        if !cauchy.cauchy {
            return Err(Error::Precondition("sequence is not strong λ-statistically Cauchy".into()));
        }
        let witness: BTreeMap<&Rational, u64> = cauchy.per_t.iter().map(|s| (&s.t, s.n0.unwrap())).collect();
        let mut per_t = Vec::with_capacity(self.grid.len());
        for (ti, t) in self.grid.iter().enumerate() {
            let below: Vec<Rational> = self.grid.iter().filter(|g| *g <= t).cloned().collect();
            let gamma = self.space().find_eta(t, &below)?.ok_or_else(|| {
                Error::Invariant(format!("no grid radius γ <= {t} with V(γ)∘V(γ) ⊆ V(t)"))
            })?;
            let n0 = witness[&gamma];
            let anchor = self.seq.term(n0);
            let near = self.near(anchor, &gamma);
            let far = self.far(anchor, &gamma);
            for &a in &near {
                for &b in &near {
                    if !self.space().is_close(a, b, t) {
                        return Err(Error::Invariant(format!(
                            "points {} and {} lie off H_t but are not {t}-close",
                            self.space().label(a),
                            self.space().label(b)
                        )));
                    }
                }
            }
            let pairs_checked = self.check_sampled_pairs(t, &near, ti as u64)?;
            let h_t = self.seq.indices_with(&far);
            per_t.push(PairOffStep {
                t: t.clone(),
                gamma,
                n0,
                g_t: h_t.clone().complement(),
                h_t,
                null: self.null_of(&far),
                pairs_checked,
            });
        }
        Ok(PairOffReport { per_t })
    }

    fn check_sampled_pairs(&self, t: &Rational, keep: &PointSet, stream: u64) -> Result<usize> {
        let terms = self.terms();
        let h = self.oracle.horizon;
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a1f ^ stream);
        let draw = |rng: &mut ChaCha8Rng| -> Option<u64> {
            (0..64).map(|_| rng.random_range(1..=h)).find(|&k| keep.contains(&(terms[k as usize] as usize)))
        };
        let mut checked = 0;
        for _ in 0..SAMPLED_PAIRS {
            let (Some(k), Some(j)) = (draw(&mut rng), draw(&mut rng)) else { continue };
            let (a, b) = (terms[k as usize] as usize, terms[j as usize] as usize);
            if !self.space().is_close(a, b, t) {
                return Err(Error::Invariant(format!("indices {k}, {j} outside H_t are not {t}-close")));
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// The full-density index set `G` along which `x` strongly converges to
    /// `candidate`.
    pub fn extract_full_density_subsequence(&self, candidate: &str) -> Result<Extraction> {
        let l = self.space().index(candidate)?;
        if !self.check_convergence(candidate)?.converges() {
            return Err(Error::Precondition(format!("sequence does not converge to {candidate}")));
        }
        let horizon = self.oracle.horizon;
        let lambda = &self.oracle.lambda;
        let terms = self.terms();
        let t_min = num::to_f64(&self.grid[0]);
        let t_max = 16u64.max((1.0 / t_min).ceil() as u64 + 1);

        let mut thresholds: Vec<Threshold> = Vec::new();
        let mut near_sets: Vec<PointSet> = Vec::new();
        let mut prev_u = 0u64;
        // G_t only changes when the near set does. The window at n fails
        // count / λ_n > (t - 1) / t iff t * miss_n >= λ_n with
        // miss_n = λ_n - count_n, so scanning down from the horizon, the
        // first failure for any t is among the n where λ_n / miss_n reaches
        // a new minimum.
        let mut cached: Option<(PointSet, Vec<bool>, Vec<(u64, u64, u64)>)> = None;
        for t in 1..=t_max {
            let near = self.near(l, &num::rat(1, t as i128));
            if cached.as_ref().is_none_or(|c| c.0 != near) {
                let member: Vec<bool> =
                    std::iter::once(false).chain(terms[1..].iter().map(|&v| near.contains(&(v as usize)))).collect();
                let profile = DensityProfile::from_indicator(&member, lambda);
                let mut records: Vec<(u64, u64, u64)> = Vec::new();
                for n in (1..=horizon).rev() {
                    let lam = lambda.at(n);
                    let miss = lam - profile.count(n);
                    let lower = match records.last() {
                        _ if miss == 0 => false,
                        None => true,
                        Some(&(_, l0, m0)) => lam * m0 < l0 * miss,
                    };
                    if lower {
                        records.push((n, lam, miss));
                    }
                }
                cached = Some((near.clone(), member, records));
            }
            let (_, member, records) = cached.as_ref().unwrap();
            let last_bad = records.iter().find(|&&(_, lam, miss)| t * miss >= lam).map_or(0, |r| r.0);
            if last_bad == horizon {
                return Err(Error::HorizonTooSmall {
                    horizon,
                    detail: format!("density of G_t at t = {t} does not exceed {}/{t} at the horizon", t - 1),
                });
            }
            let mut u = (last_bad + 1).max(prev_u + 1);
            while u <= horizon && !member[u as usize] {
                u += 1;
            }
            if u > horizon {
                return Err(Error::HorizonTooSmall { horizon, detail: format!("no member of G_t beyond u at t = {t}") });
            }
            thresholds.push(Threshold { t, u_t: u, g_t: self.seq.indices_with(&near) });
            near_sets.push(near);
            prev_u = u;
        }

        let u: Vec<u64> = thresholds.iter().map(|th| th.u_t).collect();
        let mut g_ind = vec![false; horizon as usize + 1];
        let mut piece = 0usize;
        for q in 1..=horizon {
            while piece < u.len() && q >= u[piece] {
                piece += 1;
            }
            g_ind[q as usize] = piece == 0 || near_sets[piece - 1].contains(&(terms[q as usize] as usize));
        }
        let mut parts = vec![SetDescription::range(1, u[0] - 1)];
        for i in 0..u.len() {
            let span = if i + 1 < u.len() {
                SetDescription::range(u[i], u[i + 1] - 1)
            } else {
                SetDescription::tail(u[i])
            };
            parts.push(SetDescription::inter(vec![span, thresholds[i].g_t.clone()]));
        }
        let g = SetDescription::union(parts);

        let profile = DensityProfile::from_indicator(&g_ind, lambda);
        let min_ratio_from_1e4 = (horizon >= 10_000).then(|| {
            (10_000..=horizon).map(|n| profile.ratio(n)).fold(f64::INFINITY, f64::min)
        });
        let min_ratio_top_decade =
            (profile.top_decade_start()..=horizon).map(|n| profile.ratio(n)).fold(f64::INFINITY, f64::min);
        let mut tails = Vec::new();
        for t in &self.grid {
            let close: Vec<bool> = (0..self.space().len()).map(|v| self.space().is_close(v, l, t)).collect();
            let last_out = (1..=horizon)
                .rev()
                .find(|&q| g_ind[q as usize] && !close[terms[q as usize] as usize])
                .unwrap_or(0);
            let s = (num::int(1) / t).ceil().to_integer().clamp(1, t_max as i128) as usize;
            let certified_by = u[s - 1];
            tails.push(TailCheck { t: t.clone(), tail_from: last_out + 1, certified_by, ok: last_out < certified_by });
        }
        Ok(Extraction {
            candidate: candidate.to_string(),
            t_max,
            thresholds,
            g,
            checkpoints: profile.evidence(),
            min_ratio_from_1e4,
            min_ratio_top_decade,
            converges: tails.iter().all(|c| c.ok),
            tails,
        })
    }

    pub fn point_sets(&self) -> Result<PointSets> {
        let n = self.space().len();
        let horizon = self.oracle.horizon;
        let mut strong = BTreeSet::new();
        let mut stat_limit = BTreeSet::new();
        let mut cluster = BTreeSet::new();
        let mut fibers = BTreeMap::new();
        for y in 0..n {
            let label = self.space().label(y).to_string();
            let fiber: PointSet = [y].into();
            let desc = self.seq.indices_with(&fiber);
            // Recurring past the top decade of the horizon stands in for
            // "infinitely often" when the description does not decide it.
            let infinite = desc.is_infinite_symbolic().unwrap_or_else(|| {
                self.terms()[(horizon / 10) as usize..].iter().any(|&v| v as usize == y)
            });
            if infinite {
                strong.insert(label.clone());
            }
            let fv = self.null_of(&fiber);
            if !fv.is_null() {
                stat_limit.insert(label.clone());
            }
            if self.grid.iter().all(|t| !self.null_of(&self.near(y, t)).is_null()) {
                cluster.insert(label.clone());
            }
            fibers.insert(label, fv.class);
        }
        if !stat_limit.is_subset(&cluster) || !cluster.is_subset(&strong) {
            return Err(Error::Invariant(format!(
                "expected Λ ⊆ Γ ⊆ L, got Λ = {stat_limit:?}, Γ = {cluster:?}, L = {strong:?}"
            )));
        }
        Ok(PointSets { strong_limit_points: strong, stat_limit_points: stat_limit, stat_cluster_points: cluster, fibers })
    }

    /// `{k : x_k ∈ c}` classified.
    pub fn classify_points(&self, c: &BTreeSet<String>) -> Result<NullVerdict> {
        let s: PointSet = c.iter().map(|l| self.space().index(l)).collect::<Result<_>>()?;
        Ok(self.null_of(&s))
    }
}

pub fn check_convergence(
    seq: &SymbolicSequence,
    candidate: &str,
    lambda: &LambdaSeq,
    horizon: u64,
    eps: f64,
) -> Result<ConvergenceReport> {
    Analyzer::new(seq, lambda, horizon, eps)?.check_convergence(candidate)
}

pub fn find_limit(seq: &SymbolicSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<Option<String>> {
    Analyzer::new(seq, lambda, horizon, eps)?.find_limit()
}

pub fn check_cauchy(seq: &SymbolicSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<CauchyReport> {
    Analyzer::new(seq, lambda, horizon, eps)?.check_cauchy()
}

pub fn pair_off_null_set(seq: &SymbolicSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<PairOffReport> {
    Analyzer::new(seq, lambda, horizon, eps)?.pair_off_null_set()
}

pub fn extract_full_density_subsequence(
    seq: &SymbolicSequence,
    candidate: &str,
    lambda: &LambdaSeq,
    horizon: u64,
    eps: f64,
) -> Result<Extraction> {
    Analyzer::new(seq, lambda, horizon, eps)?.extract_full_density_subsequence(candidate)
}

pub fn point_sets(seq: &SymbolicSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<PointSets> {
    Analyzer::new(seq, lambda, horizon, eps)?.point_sets()
}

/// A sequence with finitely many distinct values in an ordinary metric
/// space, e.g. `(D+, d_L)` or the rationals with `|a - b|`.
pub struct MetricSequence {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    fibers: Vec<SetDescription>,
    source: TermSource,
}

enum TermSource {
    Single(IndexedSequence),
    Pair(IndexedSequence, IndexedSequence, Vec<Vec<usize>>),
}

impl TermSource {
    fn term(&self, k: u64) -> usize {
        match self {
            TermSource::Single(s) => s.term(k),
            TermSource::Pair(x, g, value_of) => value_of[x.term(k)][g.term(k)],
        }
    }

    fn terms_upto(&self, horizon: u64) -> Vec<u16> {
        match self {
            TermSource::Single(s) => s.terms_upto(horizon),
            TermSource::Pair(x, g, value_of) => x
                .terms_upto(horizon)
                .into_iter()
                .zip(g.terms_upto(horizon))
                .map(|(a, b)| value_of[a as usize][b as usize] as u16)
                .collect(),
        }
    }
}

impl MetricSequence {
    /// Rational values under the absolute-value metric. Pattern entries of
    /// `seq` index into `values`.
    pub fn rational(seq: IndexedSequence, values: Vec<Rational>) -> Result<Self> {
        seq.check(values.len())?;
        let dist = values.iter().map(|a| values.iter().map(|b| num::to_f64(&(a - b)).abs()).collect()).collect();
        let fibers = (0..values.len()).map(|i| seq.indices_with(&[i].into())).collect();
        Ok(MetricSequence { labels: values.iter().map(|v| v.to_string()).collect(), dist, fibers, source: TermSource::Single(seq) })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn term(&self, k: u64) -> usize {
        self.source.term(k)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    fn describe(&self, s: &PointSet) -> SetDescription {
        SetDescription::union(s.iter().map(|&v| self.fibers[v].clone()).collect())
    }

    /// Radii at which the Cauchy conditions can change: below, between and
    /// above the distinct positive distances.
    pub fn eta_grid(&self) -> Vec<f64> {
        let mut ds: Vec<f64> = self.dist.iter().flatten().copied().filter(|&d| d > 0.0).collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        if ds.is_empty() {
            return vec![1.0];
        }
        let mut grid = vec![ds[0] / 2.0];
        grid.extend(ds.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        grid.push(ds[ds.len() - 1] * 2.0);
        grid
    }
}

/// `k -> F_{x_k g_k}` for two sequences over the same space, as a sequence
/// in `(D+, d_L)`.
pub fn pairwise_distance_sequence(x: &SymbolicSequence, g: &SymbolicSequence) -> Result<(MetricSequence, Vec<StepDistFn>)> {
    if !Arc::ptr_eq(&x.space, &g.space) && x.space != g.space {
        return Err(Error::Precondition("sequences live in different spaces".into()));
    }
    let space = x.space();
    let n = space.len();
    let mut values: Vec<StepDistFn> = Vec::new();
    let mut value_of = vec![vec![0usize; n]; n];
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let f = space.dist(a, b);
            let v = match values.iter().position(|u| u == f) {
                Some(v) => v,
                None => {
                    values.push(f.clone());
                    members.push(Vec::new());
                    values.len() - 1
                }
            };
            value_of[a][b] = v;
            members[v].push((a, b));
        }
    }
    let mut dist = vec![vec![0.0; values.len()]; values.len()];
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = levy_distance(&values[i], &values[j], DEFAULT_TOL)?.value;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let fibers = members
        .iter()
        .map(|pairs| {
            SetDescription::union(
                pairs
                    .iter()
                    .map(|&(a, b)| SetDescription::inter(vec![x.indices_with(&[a].into()), g.indices_with(&[b].into())]))
                    .collect(),
            )
        })
        .collect();
    let labels = values.iter().map(|f| f.to_string()).collect();
    let seq = MetricSequence {
        labels,
        dist,
        fibers,
        source: TermSource::Pair(x.index.clone(), g.index.clone(), value_of),
    };
    Ok((seq, values))
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyFormsStep {
    pub eta: f64,
    /// Some occurring value `x_{N0}` leaves a null set of far terms.
    pub cauchy: bool,
    pub n0_value: Option<String>,
    /// A null `G` off which all terms are pairwise `η`-close.
    pub pairwise: bool,
    pub kept_values: Option<Vec<String>>,
    /// The indices `j` whose far set `D_j(η)` is not null form a null set.
    pub bad_indices_null: bool,
    /// The first form at `η/2`, which forces the other two at `η`.
    pub cauchy_half: bool,
    /// The implications between the forms at `η` and `η/2` hold.
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyFormsReport {
    pub per_eta: Vec<CauchyFormsStep>,
    pub cauchy: bool,
    pub agree: bool,
}

/// Largest number of optional values tried when searching for the kept set
/// in the pairwise-closeness condition.
const MAX_OPTIONAL: usize = 12;

struct MetricAnalyzer<'a> {
    seq: &'a MetricSequence,
    oracle: NullOracle,
}

impl MetricAnalyzer<'_> {
    fn null_of(&self, s: &PointSet) -> NullVerdict {
        let desc = self.seq.describe(s);
        self.oracle.verdict(s, &desc, |h| self.seq.source.terms_upto(h))
    }

    fn far(&self, v: usize, eta: f64) -> PointSet {
        (0..self.seq.len()).filter(|&u| self.seq.dist[v][u] >= eta).collect()
    }

    fn occurs(&self, v: usize) -> bool {
        self.oracle.terms(|h| self.seq.source.terms_upto(h))[1..].iter().any(|&u| u as usize == v)
    }

    fn n0(&self, eta: f64) -> Option<usize> {
        (0..self.seq.len()).filter(|&v| self.occurs(v)).find(|&v| self.null_of(&self.far(v, eta)).is_null())
    }

    fn step(&self, eta: f64) -> CauchyFormsStep {
        let n = self.seq.len();
        let name = |v: usize| self.seq.labels[v].clone();
        let n0 = self.n0(eta);
        let cauchy_half = self.n0(eta / 2.0).is_some();

        let positive: PointSet = (0..n).filter(|&v| !self.null_of(&[v].into()).is_null()).collect();
        let optional: Vec<usize> = (0..n).filter(|v| !positive.contains(v)).collect();
        let mut kept: Option<PointSet> = None;
        if optional.len() <= MAX_OPTIONAL {
            let mut masks: Vec<u32> = (0..1u32 << optional.len()).collect();
            masks.sort_by_key(|m| m.count_ones());
            for m in masks {
                let mut k = positive.clone();
                k.extend(optional.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v));
                let clique = k.iter().all(|&a| k.iter().all(|&b| self.seq.dist[a][b] < eta));
                if !clique {
                    continue;
                }
                let rest: PointSet = (0..n).filter(|v| !k.contains(v)).collect();
                if self.null_of(&rest).is_null() {
                    kept = Some(k);
                    break;
                }
            }
        }

        let bad: PointSet = (0..n).filter(|&v| !self.null_of(&self.far(v, eta)).is_null()).collect();
        let bad_indices_null = self.null_of(&bad).is_null();

        let cauchy = n0.is_some();
        let pairwise = kept.is_some();
        CauchyFormsStep {
            eta,
            cauchy,
            n0_value: n0.map(name),
            pairwise,
            kept_values: kept.map(|k| k.into_iter().map(name).collect()),
            bad_indices_null,
            cauchy_half,
            agree: (!pairwise || cauchy) && (!bad_indices_null || cauchy) && (!cauchy_half || (pairwise && bad_indices_null)),
        }
    }
}

/// Evaluates the three forms of λ-statistical Cauchyness at each radius of
/// [`MetricSequence::eta_grid`]. They are equivalent as statements about
/// every `η`; at a single radius the pairwise form trades `η` for `η/2`.
pub fn check_cauchy_equivalences(seq: &MetricSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<CauchyFormsReport> {
    let an = MetricAnalyzer { seq, oracle: NullOracle::new(lambda, horizon, eps)? };
    let per_eta: Vec<CauchyFormsStep> = seq.eta_grid().into_iter().map(|eta| an.step(eta)).collect();
    let cauchy = per_eta.iter().all(|s| s.cauchy);
    let agree = per_eta.iter().all(|s| s.agree)
        && cauchy == per_eta.iter().all(|s| s.pairwise)
        && cauchy == per_eta.iter().all(|s| s.bad_indices_null);
    Ok(CauchyFormsReport { per_eta, cauchy, agree })
}

/// λ-statistical Cauchyness of a metric sequence on its radius grid.
pub fn metric_cauchy(seq: &MetricSequence, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<bool> {
    let an = MetricAnalyzer { seq, oracle: NullOracle::new(lambda, horizon, eps)? };
    Ok(seq.eta_grid().into_iter().all(|eta| {
        (0..seq.len()).any(|v| an.occurs(v) && an.null_of(&an.far(v, eta)).is_null())
    }))
}

/// Whether `t` is at most the radius below which every strong neighbourhood
/// of `space` is a singleton.
pub fn below_scale(space: &PMSpace, t: &Rational) -> bool {
    (0..space.len()).all(|x| (0..space.len()).all(|y| x == y || !space.is_close(x, y, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfn::unit_step;
    use crate::num::{int, ExtReal};
    use crate::triangle::{TNorm, TriangleFn};

    const H: u64 = 1_000_000;
    const EPS: f64 = 0.02;

    fn space() -> Arc<PMSpace> {
        let f0 = unit_step(ExtReal::Finite(int(1)));
        Arc::new(PMSpace::build_equilateral(&["a", "b", "c"], &f0, TriangleFn::new(TNorm::Minimum)).unwrap())
    }

    fn konst(l: &str) -> RawPattern {
        RawPattern::Const { value: l.into() }
    }

    fn planted(exc: SetDescription) -> SymbolicSequence {
        SymbolicSequence::from_labels(space(), &konst("a"), exc, Some(&konst("b"))).unwrap()
    }

    fn alternating() -> SymbolicSequence {
        let p = RawPattern::Periodic { prefix: vec![], cycle: vec!["a".into(), "b".into()] };
        SymbolicSequence::from_labels(space(), &p, SetDescription::empty(), None).unwrap()
    }

    fn windows4() -> SetDescription {
        SetDescription::windows(LambdaSeq::CeilSqrt, 4, 1).unwrap()
    }

    #[test]
    fn terms() {
        let s = SymbolicSequence::constant(space(), "a").unwrap();
        assert_eq!(term(&s, 7), "a");
        assert_eq!(term(&planted(SetDescription::Squares), 9), "b");
        assert_eq!(term(&alternating(), 4), "b");
    }

    #[test]
    fn convergence_examples() {
        let c = SymbolicSequence::constant(space(), "a").unwrap();
        assert!(check_convergence(&c, "a", &LambdaSeq::Identity, H, EPS).unwrap().converges());
        let sq = planted(SetDescription::Squares);
        assert!(check_convergence(&sq, "a", &LambdaSeq::Identity, H, EPS).unwrap().converges());
        let w = planted(windows4());
        let r = check_convergence(&w, "a", &LambdaSeq::CeilSqrt, H, EPS).unwrap();
        assert_eq!(r.verdict, Verdict::Diverges);
        assert!(check_convergence(&w, "a", &LambdaSeq::Identity, H, EPS).unwrap().converges());
        assert!(r.per_t.iter().all(|s| s.dl_form_agrees));
    }

    #[test]
    fn limits() {
        assert_eq!(find_limit(&planted(SetDescription::Squares), &LambdaSeq::Half, H, EPS).unwrap().as_deref(), Some("a"));
        assert_eq!(find_limit(&alternating(), &LambdaSeq::Identity, H, EPS).unwrap(), None);
    }

    #[test]
    fn cauchy() {
        let c = SymbolicSequence::constant(space(), "a").unwrap();
        let r = check_cauchy(&c, &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(r.cauchy && r.per_t.iter().all(|s| s.n0 == Some(1)));
        assert!(check_cauchy(&planted(SetDescription::Squares), &LambdaSeq::CeilSqrt, H, EPS).unwrap().cauchy);
        assert!(!check_cauchy(&alternating(), &LambdaSeq::Identity, H, EPS).unwrap().cauchy);
    }

    #[test]
    fn pair_off() {
        let e = SetDescription::union(vec![SetDescription::Squares, SetDescription::finite([3, 7]).unwrap()]);
        let r = pair_off_null_set(&planted(e.clone()), &LambdaSeq::Identity, H, EPS).unwrap();
        for s in &r.per_t {
            assert!(s.null.is_null());
            for k in 1..5000 {
                assert!(!s.h_t.contains(k) || e.contains(k));
            }
        }
        assert!(matches!(pair_off_null_set(&alternating(), &LambdaSeq::Identity, H, EPS), Err(Error::Precondition(_))));
    }

    #[test]
    fn extraction_on_squares() {
        let x = extract_full_density_subsequence(&planted(SetDescription::Squares), "a", &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(x.converges);
        assert!(x.min_ratio_from_1e4.unwrap() >= 0.98);
        let c = SymbolicSequence::constant(space(), "a").unwrap();
        let xc = extract_full_density_subsequence(&c, "a", &LambdaSeq::Identity, 10_000, EPS).unwrap();
        assert_eq!(xc.min_ratio_from_1e4, Some(1.0));
        assert!(matches!(
            extract_full_density_subsequence(&alternating(), "a", &LambdaSeq::Identity, 10_000, EPS),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn point_set_examples() {
        let ps = point_sets(&alternating(), &LambdaSeq::Identity, H, EPS).unwrap();
        let ab: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        assert_eq!(ps.stat_limit_points, ab);
        assert_eq!(ps.stat_cluster_points, ab);
        let fin = planted(SetDescription::finite([2, 5, 11]).unwrap());
        let ps = point_sets(&fin, &LambdaSeq::CeilSqrt, H, EPS).unwrap();
        let a: BTreeSet<String> = ["a".to_string()].into();
        assert_eq!(ps.strong_limit_points, a);
        assert_eq!(ps.stat_cluster_points, a);
        let ws = point_sets(&planted(windows4()), &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(ws.strong_limit_points.contains("b"));
        assert_eq!(ws.stat_limit_points, a);
    }

    #[test]
    fn pairwise() {
        let c = SymbolicSequence::constant(space(), "a").unwrap();
        let (m, _) = pairwise_distance_sequence(&c, &c).unwrap();
        assert!(metric_cauchy(&m, &LambdaSeq::Identity, H, EPS).unwrap());
        let (m, _) = pairwise_distance_sequence(&alternating(), &c).unwrap();
        assert!(!metric_cauchy(&m, &LambdaSeq::Identity, H, EPS).unwrap());
        let x = planted(SetDescription::Squares);
        let (m, _) = pairwise_distance_sequence(&x, &planted(SetDescription::finite([4, 8]).unwrap())).unwrap();
        assert!(metric_cauchy(&m, &LambdaSeq::Identity, H, EPS).unwrap());
    }

    #[test]
    fn cauchy_forms_agree() {
        let vals = vec![int(0), num::rat(1, 2), int(3)];
        let konst = IndexedSequence::plain(Pattern::constant(0));
        let r = check_cauchy_equivalences(&MetricSequence::rational(konst, vals.clone()).unwrap(), &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(r.agree && r.cauchy);
        let planted = IndexedSequence::new(Pattern::constant(1), SetDescription::Squares, Pattern::periodic(vec![0, 2]));
        let r = check_cauchy_equivalences(&MetricSequence::rational(planted, vals.clone()).unwrap(), &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(r.agree && r.cauchy);
        let alt = IndexedSequence::plain(Pattern::periodic(vec![0, 2]));
        let r = check_cauchy_equivalences(&MetricSequence::rational(alt, vals).unwrap(), &LambdaSeq::Identity, H, EPS).unwrap();
        assert!(r.agree && !r.cauchy);
        assert!(!r.per_eta[0].cauchy && !r.per_eta[0].pairwise && !r.per_eta[0].bad_indices_null);
    }

    #[test]
    fn sequence_json() {
        let json = r#"{
            "space": {"points": ["a", "b"], "tau": "min", "dist": [["a", "b", {"jumps": [[1, 1]]}]]},
            "base": {"kind": "const", "value": "a"},
            "exceptions": {"kind": "squares"},
            "exception_values": {"kind": "const", "value": "b"}
        }"#;
        let s = SymbolicSequence::from_json(json, None).unwrap();
        assert_eq!(term(&s, 16), "b");
        let back = SymbolicSequence::from_json(&s.to_json_value().to_string(), None).unwrap();
        assert_eq!(back.index(), s.index());
    }
}

//! λ-sequences, windows `I_n = [n - λ_n + 1, n]` and λ-density of subsets
//! of ℕ.
//!
//! Subsets are described symbolically by [`SetDescription`]. Densities are
//! computed exactly where the description allows it (Boolean combinations of
//! arithmetic progressions, finite sets and the squares) and otherwise
//! estimated by scanning every window in the top decade of a finite horizon.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::Zero;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{self, Rational};

/// A member of Δ∞ with integer values, so that `|I_n| = λ_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LambdaSeq {
    /// `λ_n = n`; λ-density is natural density.
    Identity,
    /// `λ_n = ⌈√n⌉`.
    CeilSqrt,
    /// `λ_n = ⌊n/2⌋ + 1`.
    Half,
    /// Explicit values `λ_1, λ_2, ...`; continued with unit increments past
    /// the end of the table.
    Table(Arc<[u64]>),
}

/// Floor square root; the float estimate is off by at most one here.
fn isqrt(m: u64) -> u64 {
    let mut s = (m as f64).sqrt() as u64;
    while s * s > m {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= m {
        s += 1;
    }
    s
}

impl LambdaSeq {
    pub const FAMILIES: [LambdaSeq; 3] = [LambdaSeq::Identity, LambdaSeq::CeilSqrt, LambdaSeq::Half];

    /// A table-backed sequence, checked on the table's own range.
    pub fn table(values: Vec<u64>) -> Result<Self> {
        let seq = LambdaSeq::Table(values.into());
        let len = match &seq {
            LambdaSeq::Table(t) => t.len() as u64,
            _ => unreachable!(),
        };
        check_local(&seq, len.max(1))?;
        Ok(seq)
    }

    pub fn at(&self, n: u64) -> u64 {
        debug_assert!(n >= 1);
        match self {
            LambdaSeq::Identity => n,
            LambdaSeq::CeilSqrt => isqrt(n - 1) + 1,
            LambdaSeq::Half => n / 2 + 1,
            LambdaSeq::Table(t) => {
                let len = t.len() as u64;
                if n <= len {
                    t[(n - 1) as usize]
                } else {
                    t.last().copied().unwrap_or(1) + (n - len)
                }
            }
        }
    }

    /// `I_n` as an inclusive pair `(lo, hi)`.
    pub fn window(&self, n: u64) -> (u64, u64) {
        assert!(n >= 1, "windows are indexed from 1");
        (n + 1 - self.at(n), n)
    }

    pub fn name(&self) -> String {
        match self {
            LambdaSeq::Identity => "identity".into(),
            LambdaSeq::CeilSqrt => "ceil-sqrt".into(),
            LambdaSeq::Half => "half".into(),
            LambdaSeq::Table(t) => format!("table[{}]", t.len()),
        }
    }
}

impl fmt::Display for LambdaSeq {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for LambdaSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(LambdaSeq::Identity),
            "ceil-sqrt" => Ok(LambdaSeq::CeilSqrt),
            "half" => Ok(LambdaSeq::Half),
            other => Err(Error::parse(format!("unknown lambda family {other:?} (expected identity|ceil-sqrt|half)"))),
        }
    }
}

impl Serialize for LambdaSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct TableForm<'a> {
            table: &'a [u64],
        }
        match self {
            LambdaSeq::Table(t) => TableForm { table: t }.serialize(s),
            named => s.serialize_str(&named.name()),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Form {
            Named(String),
            Table { table: Vec<u64> },
        }
        match Form::deserialize(d)? {
            Form::Named(s) => s.parse().map_err(de::Error::custom),
            Form::Table { table } => LambdaSeq::table(table).map_err(de::Error::custom),
        }
    }
}

fn check_local(seq: &LambdaSeq, upto: u64) -> Result<()> {
    let first = seq.at(1);
    if first != 1 {
        return Err(Error::InvalidLambda(format!("λ_1 = {first}, expected 1 (n = 1)")));
    }
    let mut prev = first;
    for n in 2..=upto {
        let cur = seq.at(n);
        if cur < prev {
            return Err(Error::InvalidLambda(format!("λ decreases at n = {n} ({prev} -> {cur})")));
        }
        if cur > prev + 1 {
            return Err(Error::InvalidLambda(format!("λ_{n} = {cur} > λ_{} + 1 = {}", n - 1, prev + 1)));
        }
        prev = cur;
    }
    Ok(())
}

/// Checks `λ_1 = 1`, monotonicity and `λ_{n+1} <= λ_n + 1` for `n <= horizon`,
/// and growth over the second half of the horizon as the finite stand-in
/// for `λ_n -> ∞`.
pub fn validate_lambda(seq: &LambdaSeq, horizon: u64) -> Result<()> {
    let horizon = horizon.max(2);
    check_local(seq, horizon)?;
    let mid = horizon.div_ceil(2);
    if seq.at(horizon) <= seq.at(mid) {
        return Err(Error::InvalidLambda(format!(
            "λ does not grow between n = {mid} and n = {horizon}; not unbounded over the horizon"
        )));
    }
    Ok(())
}

pub fn window(seq: &LambdaSeq, n: u64) -> (u64, u64) {
    seq.window(n)
}

/// Symbolic subset of ℕ = {1, 2, ...}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawSet")]
pub enum SetDescription {
    Finite { elements: BTreeSet<u64> },
    /// `{start + j * step : j >= 0}`.
    Ap { start: u64, step: u64 },
    /// `{1, 4, 9, ...}`.
    Squares,
    /// `⋃_{j >= from} I_{base^j}`, windows taken with respect to `lambda`.
    Windows { lambda: LambdaSeq, base: u64, from: u32 },
    Union { sets: Vec<SetDescription> },
    Inter { sets: Vec<SetDescription> },
    Compl { set: Box<SetDescription> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawSet {
    Finite { elements: Vec<u64> },
    Ap { start: u64, step: u64 },
    Squares,
    Windows {
        lambda: LambdaSeq,
        base: u64,
        #[serde(default = "default_from")]
        from: u32,
    },
    Union { sets: Vec<SetDescription> },
    Inter { sets: Vec<SetDescription> },
    Compl { set: Box<SetDescription> },
}

fn default_from() -> u32 {
    1
}

impl TryFrom<RawSet> for SetDescription {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        Ok(match raw {
            RawSet::Finite { elements } => SetDescription::finite(elements)?,
            RawSet::Ap { start, step } => SetDescription::ap(start, step)?,
            RawSet::Squares => SetDescription::Squares,
            RawSet::Windows { lambda, base, from } => SetDescription::windows(lambda, base, from)?,
            RawSet::Union { sets } => SetDescription::Union { sets },
            RawSet::Inter { sets } => SetDescription::Inter { sets },
            RawSet::Compl { set } => SetDescription::Compl { set },
        })
    }
}

/// Residue pattern of a set that agrees, up to a λ-null set, with a
/// periodic set.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Periodic {
    period: u64,
    mask: Vec<bool>,
}

const MAX_PERIOD: u64 = 1 << 20;

impl Periodic {
    fn constant(v: bool) -> Self {
        Periodic { period: 1, mask: vec![v] }
    }

    fn is_empty(&self) -> bool {
        self.mask.iter().all(|&b| !b)
    }

    fn is_full(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    fn lift(&self, period: u64) -> Vec<bool> {
        (0..period).map(|r| self.mask[(r % self.period) as usize]).collect()
    }

    fn combine(&self, other: &Periodic, op: impl Fn(bool, bool) -> bool) -> Option<Periodic> {
        let period = self.period.lcm(&other.period);
        if period > MAX_PERIOD {
            return None;
        }
        let a = self.lift(period);
        let b = other.lift(period);
        Some(Periodic { period, mask: a.iter().zip(&b).map(|(&x, &y)| op(x, y)).collect() })
    }

    fn density(&self) -> Rational {
        num::rat(self.mask.iter().filter(|&&b| b).count() as i128, self.period as i128)
    }
}

impl SetDescription {
    pub fn empty() -> Self {
        SetDescription::Finite { elements: BTreeSet::new() }
    }

    pub fn naturals() -> Self {
        SetDescription::Ap { start: 1, step: 1 }
    }

    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let elements: BTreeSet<u64> = elements.into_iter().collect();
        if elements.contains(&0) {
            return Err(Error::InvalidSet("0 is not a natural number here; indices start at 1".into()));
        }
        Ok(SetDescription::Finite { elements })
    }

    pub fn ap(start: u64, step: u64) -> Result<Self> {
        if start == 0 || step == 0 {
            return Err(Error::InvalidSet(format!("progression needs start >= 1 and step >= 1, got ({start}, {step})")));
        }
        Ok(SetDescription::Ap { start, step })
    }

    pub fn windows(lambda: LambdaSeq, base: u64, from: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSet(format!("window base must be >= 2, got {base}")));
        }
        Ok(SetDescription::Windows { lambda, base, from })
    }

    /// `[lo, hi]` as `[lo, ∞) \ [hi + 1, ∞)`.
    pub fn range(lo: u64, hi: u64) -> Self {
        let lo = lo.max(1);
        if hi < lo {
            return Self::empty();
        }
        SetDescription::inter(vec![SetDescription::Ap { start: lo, step: 1 }, SetDescription::tail(hi + 1).complement()])
    }

    /// `[from, ∞)`.
    pub fn tail(from: u64) -> Self {
        SetDescription::Ap { start: from.max(1), step: 1 }
    }

    pub fn is_literally_empty(&self) -> bool {
        matches!(self, SetDescription::Finite { elements } if elements.is_empty())
    }

    pub fn is_literally_full(&self) -> bool {
        matches!(self, SetDescription::Ap { start: 1, step: 1 })
    }

    pub fn union(sets: Vec<SetDescription>) -> Self {
        let mut out = Vec::new();
        for s in sets {
            if s.is_literally_full() {
                return s;
            }
            if let SetDescription::Union { sets } = s {
                out.extend(sets);
            } else if !s.is_literally_empty() {
                out.push(s);
            }
        }
        match out.len() {
            0 => Self::empty(),
            1 => out.pop().unwrap(),
            _ => SetDescription::Union { sets: out },
        }
    }

    pub fn inter(sets: Vec<SetDescription>) -> Self {
        let mut out = Vec::new();
        for s in sets {
            if s.is_literally_empty() {
                return s;
            }
            if let SetDescription::Inter { sets } = s {
                out.extend(sets);
            } else if !s.is_literally_full() {
                out.push(s);
            }
        }
        match out.len() {
            0 => Self::naturals(),
            1 => out.pop().unwrap(),
            _ => SetDescription::Inter { sets: out },
        }
    }

    pub fn complement(self) -> Self {
        match self {
            SetDescription::Compl { set } => *set,
            s if s.is_literally_empty() => Self::naturals(),
            s if s.is_literally_full() => Self::empty(),
            s => SetDescription::Compl { set: Box::new(s) },
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        if k == 0 {
            return false;
        }
        match self {
            SetDescription::Finite { elements } => elements.contains(&k),
            SetDescription::Ap { start, step } => k >= *start && (k - start) % step == 0,
            SetDescription::Squares => {
                let r = isqrt(k);
                r * r == k
            }
            SetDescription::Windows { lambda, base, from } => {
                // Left ends m - λ_m + 1 are nondecreasing in m, so the first
                // window end at or above k decides membership.
                let mut m = match base.checked_pow(*from) {
                    Some(m) => m,
                    None => return false,
                };
                while m < k {
                    m = match m.checked_mul(*base) {
                        Some(next) => next,
                        None => return false,
                    };
                }
                lambda.window(m).0 <= k
            }
            SetDescription::Union { sets } => sets.iter().any(|s| s.contains(k)),
            SetDescription::Inter { sets } => sets.iter().all(|s| s.contains(k)),
            SetDescription::Compl { set } => !set.contains(k),
        }
    }

    /// Membership bitmap for `1..=horizon`; index 0 is unused.
    pub fn indicator(&self, horizon: u64) -> Vec<bool> {
        let len = horizon as usize + 1;
        match self {
            SetDescription::Finite { elements } => {
                let mut v = vec![false; len];
                for &e in elements.range(..=horizon) {
                    v[e as usize] = true;
                }
                v
            }
            SetDescription::Ap { start, step } => {
                let mut v = vec![false; len];
                let mut k = *start;
                while k <= horizon {
                    v[k as usize] = true;
                    k += step;
                }
                v
            }
            SetDescription::Squares => {
                let mut v = vec![false; len];
                let mut r = 1u64;
                while r * r <= horizon {
                    v[(r * r) as usize] = true;
                    r += 1;
                }
                v
            }
            SetDescription::Windows { lambda, base, from } => {
                let mut v = vec![false; len];
                let mut m = base.checked_pow(*from);
                while let Some(end) = m {
                    let (lo, hi) = lambda.window(end);
                    if lo > horizon {
                        break;
                    }
                    for k in lo..=hi.min(horizon) {
                        v[k as usize] = true;
                    }
                    m = end.checked_mul(*base);
                }
                v
            }
            SetDescription::Union { sets } => {
                let mut v = vec![false; len];
                for s in sets {
                    for (a, b) in v.iter_mut().zip(s.indicator(horizon)) {
                        *a |= b;
                    }
                }
                v
            }
            SetDescription::Inter { sets } => {
                let mut v = vec![true; len];
                for s in sets {
                    for (a, b) in v.iter_mut().zip(s.indicator(horizon)) {
                        *a &= b;
                    }
                }
                v[0] = false;
                v
            }
            SetDescription::Compl { set } => {
                let mut v = set.indicator(horizon);
                for b in v.iter_mut() {
                    *b = !*b;
                }
                v[0] = false;
                v
            }
        }
    }

    /// Members up to `horizon`, in increasing order.
    pub fn members(&self, horizon: u64) -> impl Iterator<Item = u64> {
        self.indicator(horizon).into_iter().enumerate().filter(|(_, b)| *b).map(|(k, _)| k as u64)
    }

    fn modulo_null(&self) -> Option<Periodic> {
        match self {
            SetDescription::Finite { .. } | SetDescription::Squares => Some(Periodic::constant(false)),
            SetDescription::Ap { start, step } => {
                let mut mask = vec![false; *step as usize];
                mask[(start % step) as usize] = true;
                if *step > MAX_PERIOD {
                    return None;
                }
                Some(Periodic { period: *step, mask })
            }
            SetDescription::Windows { .. } => None,
            SetDescription::Union { sets } => {
                let parts: Vec<Option<Periodic>> = sets.iter().map(|s| s.modulo_null()).collect();
                if parts.iter().flatten().any(|p| p.is_full()) {
                    return Some(Periodic::constant(true));
                }
                let mut acc = Periodic::constant(false);
                for p in parts {
                    acc = acc.combine(&p?, |a, b| a || b)?;
                }
                Some(acc)
            }
            SetDescription::Inter { sets } => {
                let parts: Vec<Option<Periodic>> = sets.iter().map(|s| s.modulo_null()).collect();
                if parts.iter().flatten().any(|p| p.is_empty()) {
                    return Some(Periodic::constant(false));
                }
                let mut acc = Periodic::constant(true);
                for p in parts {
                    acc = acc.combine(&p?, |a, b| a && b)?;
                }
                Some(acc)
            }
            SetDescription::Compl { set } => {
                let p = set.modulo_null()?;
                Some(Periodic { period: p.period, mask: p.mask.iter().map(|b| !b).collect() })
            }
        }
    }

    /// Whether the set is infinite, when that follows from the description.
    pub fn is_infinite_symbolic(&self) -> Option<bool> {
        if let Some(p) = self.modulo_null() {
            if !p.is_empty() {
                return Some(true);
            }
        }
        match self {
            SetDescription::Finite { .. } => Some(false),
            SetDescription::Ap { .. } | SetDescription::Squares | SetDescription::Windows { .. } => Some(true),
            SetDescription::Union { sets } => {
                let parts: Vec<Option<bool>> = sets.iter().map(|s| s.is_infinite_symbolic()).collect();
                if parts.contains(&Some(true)) {
                    Some(true)
                } else if parts.iter().all(|p| *p == Some(false)) {
                    Some(false)
                } else {
                    None
                }
            }
            SetDescription::Inter { sets } => sets.iter().any(|s| s.is_infinite_symbolic() == Some(false)).then_some(false),
            SetDescription::Compl { set } => match set.as_ref() {
                SetDescription::Finite { .. } => Some(true),
                _ => None,
            },
        }
    }

    /// Symbolic answer when available, otherwise "has a member in the upper
    /// half of the horizon".
    pub fn is_infinite(&self, horizon: u64) -> bool {
        self.is_infinite_symbolic().unwrap_or_else(|| self.indicator(horizon).iter().skip((horizon / 2) as usize + 1).any(|&b| b))
    }
}

impl fmt::Display for SetDescription {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            SetDescription::Finite { elements } if elements.len() <= 8 => {
                let items: Vec<String> = elements.iter().map(|e| e.to_string()).collect();
                write!(f, "{{{}}}", items.join(","))
            }
            SetDescription::Finite { elements } => write!(f, "finite[{}]", elements.len()),
            SetDescription::Ap { start, step } => write!(f, "{start}+{step}ℕ₀"),
            SetDescription::Squares => f.write_str("squares"),
            SetDescription::Windows { lambda, base, from } => write!(f, "⋃_{{j>={from}}} I^{lambda}_{{{base}^j}}"),
            SetDescription::Union { sets } => {
                let items: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
                write!(f, "({})", items.join(" ∪ "))
            }
            SetDescription::Inter { sets } => {
                let items: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
                write!(f, "({})", items.join(" ∩ "))
            }
            SetDescription::Compl { set } => write!(f, "ℕ∖{set}"),
        }
    }
}

/// `|M ∩ I_n| / λ_n`, counted exactly.
pub fn empirical_density(m: &SetDescription, lambda: &LambdaSeq, n: u64) -> Rational {
    let (lo, hi) = lambda.window(n);
    let count = (lo..=hi).filter(|&k| m.contains(k)).count();
    num::rat(count as i128, lambda.at(n) as i128)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    pub count: u64,
    pub lambda_n: u64,
    pub ratio: f64,
}

/// Window counts for every `n <= horizon`, from prefix sums.
pub struct DensityProfile {
    lambda: LambdaSeq,
    prefix: Vec<u32>,
}

impl DensityProfile {
    pub fn new(m: &SetDescription, lambda: &LambdaSeq, horizon: u64) -> Self {
        Self::from_indicator(&m.indicator(horizon), lambda)
    }

    pub fn from_indicator(indicator: &[bool], lambda: &LambdaSeq) -> Self {
        let mut prefix = Vec::with_capacity(indicator.len());
        let mut acc = 0u32;
        prefix.push(0);
        for &b in &indicator[1..] {
            acc += b as u32;
            prefix.push(acc);
        }
        DensityProfile { lambda: lambda.clone(), prefix }
    }

    pub fn horizon(&self) -> u64 {
        self.prefix.len() as u64 - 1
    }

    pub fn count(&self, n: u64) -> u64 {
        let (lo, hi) = self.lambda.window(n);
        (self.prefix[hi as usize] - self.prefix[lo as usize - 1]) as u64
    }

    pub fn ratio(&self, n: u64) -> f64 {
        self.count(n) as f64 / self.lambda.at(n) as f64
    }

    pub fn checkpoint(&self, n: u64) -> Checkpoint {
        Checkpoint { n, count: self.count(n), lambda_n: self.lambda.at(n), ratio: self.ratio(n) }
    }

    /// First index of the top decade `[horizon/10, horizon]`.
    pub fn top_decade_start(&self) -> u64 {
        (self.horizon() / 10).max(1)
    }

    /// `(argmin, argmax)` of the ratio over `n` in `[from, horizon]`.
    pub fn extremes(&self, from: u64) -> (u64, u64) {
        let mut lo = (from, f64::INFINITY);
        let mut hi = (from, f64::NEG_INFINITY);
        for n in from..=self.horizon() {
            let r = self.ratio(n);
            if r < lo.1 {
                lo = (n, r);
            }
            if r > hi.1 {
                hi = (n, r);
            }
        }
        (lo.0, hi.0)
    }

    /// Checkpoints at decades, at `horizon / 2^i` within the top decade, and
    /// at the extreme ratios of the top decade.
    pub fn evidence(&self) -> Vec<Checkpoint> {
        let h = self.horizon();
        let start = self.top_decade_start();
        let mut ns: BTreeSet<u64> = BTreeSet::new();
        let mut d = 1000u64;
        while d < h {
            ns.insert(d);
            d *= 10;
        }
        let mut n = h;
        while n >= start && n >= 1 {
            ns.insert(n);
            n /= 2;
        }
        let (lo, hi) = self.extremes(start);
        ns.insert(lo);
        ns.insert(hi);
        ns.into_iter().filter(|&n| n >= 1).map(|n| self.checkpoint(n)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityVerdict {
    Exact {
        #[serde(with = "num::serde_rational")]
        value: Rational,
    },
    Empirical { liminf: f64, limsup: f64, oscillating: bool, evidence: Vec<Checkpoint> },
}

impl DensityVerdict {
    pub fn exact_value(&self) -> Option<&Rational> {
        match self {
            DensityVerdict::Exact { value } => Some(value),
            _ => None,
        }
    }
}

/// Spread between limsup and liminf estimates beyond which an empirical
/// density is reported as oscillating.
pub const OSCILLATION_TOL: f64 = 0.05;

/// λ-density, exact when the description reduces modulo null sets to a
/// periodic set, else estimated over the top decade of `horizon`.
pub fn exact_density(m: &SetDescription, lambda: &LambdaSeq, horizon: u64) -> DensityVerdict {
    if let Some(p) = m.modulo_null() {
        return DensityVerdict::Exact { value: p.density() };
    }
    let profile = DensityProfile::new(m, lambda, horizon);
    let (lo, hi) = profile.extremes(profile.top_decade_start());
    let liminf = profile.ratio(lo);
    let limsup = profile.ratio(hi);
    DensityVerdict::Empirical { liminf, limsup, oscillating: limsup - liminf > OSCILLATION_TOL, evidence: profile.evidence() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullClass {
    Null,
    Positive,
    Oscillating,
}

impl NullClass {
    pub fn is_null(self) -> bool {
        self == NullClass::Null
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum NullRoute {
    Exact {
        #[serde(with = "num::serde_rational")]
        value: Rational,
    },
    Empirical { liminf: f64, limsup: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullVerdict {
    pub class: NullClass,
    #[serde(flatten)]
    pub route: NullRoute,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub evidence: Vec<Checkpoint>,
}

impl NullVerdict {
    pub fn is_null(&self) -> bool {
        self.class.is_null()
    }

    /// Upper density estimate: the exact value or the empirical limsup.
    pub fn upper(&self) -> f64 {
        match &self.route {
            NullRoute::Exact { value } => num::to_f64(value),
            NullRoute::Empirical { limsup, .. } => *limsup,
        }
    }

    /// Non-null with a margin: exact positive, or limsup at least `10 * eps`.
    pub fn is_decisively_nonnull(&self, eps: f64) -> bool {
        match &self.route {
            NullRoute::Exact { value } => !value.is_zero(),
            NullRoute::Empirical { limsup, .. } => *limsup >= 10.0 * eps,
        }
    }
}

pub const MIN_HORIZON: u64 = 1000;

/// Finite-horizon surrogate for `d_λ(M) = 0`, scanning every `n` in the top
/// decade of the horizon.
pub fn classify_null(m: &SetDescription, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<NullVerdict> {
    check_horizon(horizon)?;
    Ok(classify_profile(&DensityProfile::new(m, lambda, horizon), eps))
}

pub fn classify_profile(profile: &DensityProfile, eps: f64) -> NullVerdict {
    let (lo, hi) = profile.extremes(profile.top_decade_start());
    let liminf = profile.ratio(lo);
    let limsup = profile.ratio(hi);
    let class = if limsup <= eps {
        NullClass::Null
    } else if liminf > eps {
        NullClass::Positive
    } else {
        NullClass::Oscillating
    };
    NullVerdict { class, route: NullRoute::Empirical { liminf, limsup }, evidence: profile.evidence() }
}

/// Verdict from the symbolic description alone, when it reduces to a
/// periodic set modulo a null set.
pub fn exact_null(m: &SetDescription) -> Option<NullVerdict> {
    let value = m.modulo_null()?.density();
    let class = if value.is_zero() { NullClass::Null } else { NullClass::Positive };
    Some(NullVerdict { class, route: NullRoute::Exact { value }, evidence: Vec::new() })
}

/// Exact verdict when the description allows it, else [`classify_null`].
pub fn decide_null(m: &SetDescription, lambda: &LambdaSeq, horizon: u64, eps: f64) -> Result<NullVerdict> {
    check_horizon(horizon)?;
    match exact_null(m) {
        Some(v) => Ok(v),
        None => classify_null(m, lambda, horizon, eps),
    }
}

pub fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 0.1 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("eps must lie in (0, 0.1], got {eps}")))
    }
}

pub fn check_horizon(horizon: u64) -> Result<()> {
    if horizon < MIN_HORIZON {
        return Err(Error::Precondition(format!("horizon {horizon} below minimum {MIN_HORIZON}")));
    }
    if horizon > u32::MAX as u64 {
        return Err(Error::Precondition(format!("horizon {horizon} too large")));
    }
    Ok(())
}

/// Writes checkpoints as CSV with header `n,count,lambda_n,ratio`.
pub fn write_csv<W: Write>(mut out: W, rows: &[Checkpoint]) -> std::io::Result<()> {
    writeln!(out, "n,count,lambda_n,ratio")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.count, r.lambda_n, r.ratio)?;
    }
    Ok(())
}

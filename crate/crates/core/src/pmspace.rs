//! Finite probabilistic metric spaces under the strong topology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::distfn::{eps0, levy_distance, StepDistFn, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::num::{self, Rational};
use crate::triangle::{TNorm, TriangleFn};

pub type PointSet = BTreeSet<usize>;

/// A finite PM space `(X, F, τ)`. The distance map is stored as a full
/// matrix; use [`PMSpace::verify_axioms`] on spaces that did not come from a
/// checked builder.
#[derive(Clone, Debug, PartialEq)]
pub struct PMSpace {
    points: Vec<String>,
    dist: Vec<Vec<StepDistFn>>,
    tau: TriangleFn,
    scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: u8,
    pub points: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub points: usize,
    pub triples_checked: usize,
    pub violation: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn into_result(self) -> Result<()> {
        match self.violation {
            None => Ok(()),
            Some(v) => Err(Error::Axiom { axiom: v.axiom, witness: format!("{:?}: {}", v.points, v.detail) }),
        }
    }
}

/// The strong `r`-vicinity: all pairs `(x, y)` with `F_xy(r) > 1 - r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vicinity {
    pub r: Rational,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Vicinity {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    /// `V ∘ V = {(x, z) : (x, y), (y, z) ∈ V for some y}`.
    pub fn compose(&self, other: &Vicinity) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &(x, y) in &self.pairs {
            for &(_, z) in other.pairs.range((y, 0)..=(y, usize::MAX)) {
                out.insert((x, z));
            }
        }
        out
    }
}

impl PMSpace {
    /// Assembles a space without checking the Menger axioms. Labels must be
    /// unique and every entry must be a distance distribution function.
    pub fn from_matrix(points: Vec<String>, dist: Vec<Vec<StepDistFn>>, tau: TriangleFn) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("a PM space needs at least one point".into()));
        }
        let unique: BTreeSet<&String> = points.iter().collect();
        if unique.len() != points.len() {
            return Err(Error::Precondition("duplicate point labels".into()));
        }
        if dist.len() != points.len() || dist.iter().any(|row| row.len() != points.len()) {
            return Err(Error::Precondition("distance matrix shape does not match point count".into()));
        }
        for row in &dist {
            for f in row {
                f.require_distance()?;
            }
        }
        let scale = compute_scale(&dist)?;
        Ok(PMSpace { points, dist, tau, scale })
    }

    /// Equilateral space: `F(p, q) = f0` for every `p != q`.
    pub fn build_equilateral(points: &[&str], f0: &StepDistFn, tau: TriangleFn) -> Result<Self> {
        f0.require_distance()?;
        if points.len() > 1 && f0.is_eps0() {
            return Err(Error::Axiom { axiom: 2, witness: "off-diagonal distance equals ε_0".into() });
        }
        let n = points.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { eps0() } else { f0.clone() }).collect())
            .collect();
        let space = Self::from_matrix(points.iter().map(|s| s.to_string()).collect(), dist, tau)?;
        space.verify_axioms()?.into_result()?;
        Ok(space)
    }

    /// Space induced by an ordinary metric: `F(p, q)(x) = G(x / rho(p, q))`.
    /// For a step `G` this is again a step function, so no discretization is
    /// needed.
    pub fn build_simple(points: &[&str], rho: &[Vec<Rational>], g: &StepDistFn, tau: TriangleFn) -> Result<Self> {
        g.require_distance()?;
        if g.is_eps0() {
            return Err(Error::Precondition("G must differ from ε_0".into()));
        }
        check_metric(points.len(), rho)?;
        let n = points.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { eps0() } else { g.rescale(&rho[i][j]) }).collect())
            .collect();
        let space = Self::from_matrix(points.iter().map(|s| s.to_string()).collect(), dist, tau)?;
        space.verify_axioms()?.into_result()?;
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn labels(&self, set: &PointSet) -> BTreeSet<String> {
        set.iter().map(|&i| self.points[i].clone()).collect()
    }

    pub fn tau(&self) -> TriangleFn {
        self.tau
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.points.iter().position(|p| p == label).ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn all_points(&self) -> PointSet {
        (0..self.len()).collect()
    }

    pub fn dist(&self, x: usize, y: usize) -> &StepDistFn {
        &self.dist[x][y]
    }

    /// Exhaustive check of the four Menger conditions.
    pub fn verify_axioms(&self) -> Result<AxiomReport> {
        let n = self.len();
        let fail = |axiom: u8, pts: &[usize], detail: String, triples: usize| AxiomReport {
            passed: false,
            points: n,
            triples_checked: triples,
            violation: Some(AxiomViolation {
                axiom,
                points: pts.iter().map(|&i| self.points[i].clone()).collect(),
                detail,
            }),
        };
        for x in 0..n {
            if !self.dist[x][x].is_eps0() {
                return Ok(fail(1, &[x], format!("F(x,x) = {} != ε_0", self.dist[x][x]), 0));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if x != y && self.dist[x][y].is_eps0() {
                    return Ok(fail(2, &[x, y], "F(x,y) = ε_0 for distinct points".into(), 0));
                }
                if self.dist[x][y] != self.dist[y][x] {
                    return Ok(fail(
                        3,
                        &[x, y],
                        format!("F(x,y) = {} but F(y,x) = {}", self.dist[x][y], self.dist[y][x]),
                        0,
                    ));
                }
            }
        }
        let mut triples = 0;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    triples += 1;
                    let bound = self.tau.apply(&self.dist[x][y], &self.dist[y][z])?;
                    if !bound.leq(&self.dist[x][z]) {
                        return Ok(fail(
                            4,
                            &[x, y, z],
                            format!("τ(F(x,y), F(y,z)) = {bound} exceeds F(x,z) = {}", self.dist[x][z]),
                            triples,
                        ));
                    }
                }
            }
        }
        Ok(AxiomReport { passed: true, points: n, triples_checked: triples, violation: None })
    }

    pub fn validated(self) -> Result<Self> {
        self.verify_axioms()?.into_result()?;
        Ok(self)
    }

    /// `F_xy(r) > 1 - r`.
    pub fn is_close(&self, x: usize, y: usize, r: &Rational) -> bool {
        self.dist[x][y].eval_at(r) > Rational::one() - r
    }

    pub fn strong_neighborhood(&self, x: usize, r: &Rational) -> Result<PointSet> {
        check_radius(r)?;
        if x >= self.len() {
            return Err(Error::UnknownPoint(format!("#{x}")));
        }
        Ok((0..self.len()).filter(|&y| self.is_close(x, y, r)).collect())
    }

    /// Neighbourhood of a whole set: points within `r` of some member.
    pub fn neighborhood_of_set(&self, set: &PointSet, r: &Rational) -> PointSet {
        (0..self.len()).filter(|&y| set.iter().any(|&x| self.is_close(x, y, r))).collect()
    }

    pub fn vicinity(&self, r: &Rational) -> Result<Vicinity> {
        check_radius(r)?;
        let n = self.len();
        let pairs = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| self.is_close(x, y, r)).collect();
        Ok(Vicinity { r: r.clone(), pairs })
    }

    /// Minimum off-diagonal `d_L(F_xy, ε_0)`; 1 for a one-point space.
    pub fn t_star(&self) -> f64 {
        self.scale
    }

    /// The finite set of radii on which "for every t > 0" is evaluated:
    /// `t*/2, t*, 2t*, 4t*, ...` up to and including 2.
    pub fn t_grid(&self) -> Vec<Rational> {
        scale_grid(self.scale)
    }

    /// `k(A) = {a : for every t > 0 some b ∈ A has F_ab(t) > 1 - t}`, on the
    /// t-grid.
    pub fn strong_closure(&self, set: &PointSet) -> Result<PointSet> {
        if set.is_empty() {
            return Err(Error::Precondition("strong closure of an empty set".into()));
        }
        let grid = self.t_grid();
        Ok((0..self.len()).filter(|&a| grid.iter().all(|t| set.iter().any(|&b| self.is_close(a, b, t)))).collect())
    }

    /// Largest `η` in `grid` with `V(η) ∘ V(η) ⊆ V(r)`.
    pub fn find_eta(&self, r: &Rational, grid: &[Rational]) -> Result<Option<Rational>> {
        let target = self.vicinity(r)?;
        let mut sorted: Vec<&Rational> = grid.iter().filter(|e| e.is_positive()).collect();
        sorted.sort_by(|a, b| b.cmp(a));
        for eta in sorted {
            let v = self.vicinity(eta)?;
            if v.compose(&v).is_subset(&target.pairs) {
                return Ok(Some(eta.clone()));
            }
        }
        Ok(None)
    }
}

fn check_radius(r: &Rational) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("radius must be positive, got {r}")))
    }
}

fn compute_scale(dist: &[Vec<StepDistFn>]) -> Result<f64> {
    let e0 = eps0();
    let mut best: Option<f64> = None;
    for (i, row) in dist.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            if i < j && !f.is_eps0() {
                let d = levy_distance(f, &e0, DEFAULT_TOL)?.value;
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
    }
    Ok(best.unwrap_or(1.0))
}

/// `s/2, s, 2s, 4s, ...` capped at 2, as dyadic rationals.
pub fn scale_grid(scale: f64) -> Vec<Rational> {
    let two = num::int(2);
    let mut grid: Vec<Rational> = vec![num::from_f64_dyadic(scale / 2.0)];
    let mut t = scale;
    while t < 2.0 {
        grid.push(num::from_f64_dyadic(t));
        t *= 2.0;
    }
    grid.push(two);
    grid.retain(|t| t.is_positive());
    grid.sort();
    grid.dedup();
    grid
}

fn check_metric(n: usize, rho: &[Vec<Rational>]) -> Result<()> {
    if rho.len() != n || rho.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMetric("table shape does not match point count".into()));
    }
    for i in 0..n {
        if !rho[i][i].is_zero() {
            return Err(Error::InvalidMetric(format!("rho({i},{i}) != 0")));
        }
        for j in 0..n {
            if i != j && !rho[i][j].is_positive() {
                return Err(Error::InvalidMetric(format!("rho({i},{j}) must be positive")));
            }
            if rho[i][j] != rho[j][i] {
                return Err(Error::InvalidMetric(format!("rho not symmetric at ({i},{j})")));
            }
            for k in 0..n {
                if rho[i][k] > &rho[i][j] + &rho[j][k] {
                    return Err(Error::InvalidMetric(format!("triangle inequality fails for ({i},{j},{k})")));
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    points: Vec<String>,
    tau: TNorm,
    #[serde(default)]
    dist: Vec<(String, String, StepDistFn)>,
}

impl PMSpace {
    /// Reads the JSON form. Omitted diagonal entries are ε_0 and a missing
    /// `(q, p)` entry is filled from `(p, q)`. Axioms are not checked here.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: RawSpace = serde_json::from_str(json)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawSpace) -> Result<Self> {
        let n = raw.points.len();
        let idx: BTreeMap<&str, usize> = raw.points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let mut table: Vec<Vec<Option<StepDistFn>>> = vec![vec![None; n]; n];
        for (p, q, f) in raw.dist {
            let i = *idx.get(p.as_str()).ok_or_else(|| Error::UnknownPoint(p.clone()))?;
            let j = *idx.get(q.as_str()).ok_or_else(|| Error::UnknownPoint(q.clone()))?;
            if table[i][j].is_some() {
                return Err(Error::Precondition(format!("duplicate distance entry ({p}, {q})")));
            }
            table[i][j] = Some(f.into_distance()?);
        }
        for i in 0..n {
            for j in 0..n {
                if table[i][j].is_none() {
                    table[i][j] = if i == j { Some(eps0()) } else { table[j][i].clone() };
                }
            }
        }
        let mut dist = Vec::with_capacity(n);
        for (i, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (j, f) in row.into_iter().enumerate() {
                out.push(f.ok_or_else(|| {
                    Error::Precondition(format!("missing distance for ({}, {})", raw.points[i], raw.points[j]))
                })?);
            }
            dist.push(out);
        }
        Self::from_matrix(raw.points, dist, TriangleFn::new(raw.tau))
    }

    fn to_raw(&self) -> RawSpace {
        let n = self.len();
        let mut dist = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let emit = if i == j { !self.dist[i][i].is_eps0() } else { i < j || self.dist[i][j] != self.dist[j][i] };
                if emit {
                    dist.push((self.points[i].clone(), self.points[j].clone(), self.dist[i][j].clone()));
                }
            }
        }
        RawSpace { points: self.points.clone(), tau: self.tau.tnorm, dist }
    }
}

impl Serialize for PMSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PMSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpace::deserialize(d)?;
        PMSpace::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PMSpace {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "PM space {{{}}} with τ_{}", self.points.join(", "), self.tau.tnorm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfn::unit_step;
    use crate::num::{int, rat, ExtReal};

    fn step(q: Rational) -> StepDistFn {
        unit_step(ExtReal::Finite(q))
    }

    fn tmin() -> TriangleFn {
        TriangleFn::new(TNorm::Minimum)
    }

    fn equilateral_e1() -> PMSpace {
        PMSpace::build_equilateral(&["a", "b", "c"], &step(int(1)), tmin()).unwrap()
    }

    fn line3(g: &StepDistFn) -> Result<PMSpace> {
        let rho = vec![vec![int(0), int(1), int(2)], vec![int(1), int(0), int(1)], vec![int(2), int(1), int(0)]];
        PMSpace::build_simple(&["a", "b", "c"], &rho, g, tmin())
    }

    #[test]
    fn equilateral_builds() {
        let s = equilateral_e1();
        assert!(s.verify_axioms().unwrap().passed);
        assert!(PMSpace::build_equilateral(&["a"], &step(int(3)), tmin()).is_ok());
        assert!(matches!(
            PMSpace::build_equilateral(&["a", "b"], &eps0(), tmin()),
            Err(Error::Axiom { axiom: 2, .. })
        ));
    }

    #[test]
    fn simple_space_from_metric() {
        let two = PMSpace::build_simple(&["p", "q"], &[vec![int(0), int(1)], vec![int(1), int(0)]], &step(int(1)), tmin())
            .unwrap();
        assert_eq!(two.dist(0, 1), &step(int(1)));
        let s = line3(&step(int(1))).unwrap();
        assert_eq!(s.dist(0, 2), &step(int(2)));
        let bad = vec![vec![int(0), int(1), int(5)], vec![int(1), int(0), int(1)], vec![int(5), int(1), int(0)]];
        assert!(matches!(
            PMSpace::build_simple(&["a", "b", "c"], &bad, &step(int(1)), tmin()),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn axiom_violations_are_reported() {
        let e1 = step(int(1));
        let e2 = step(int(2));
        let asym = PMSpace::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![eps0(), e1.clone()], vec![e2, eps0()]],
            tmin(),
        )
        .unwrap();
        let r = asym.verify_axioms().unwrap();
        assert_eq!(r.violation.unwrap().axiom, 3);
        let degenerate =
            PMSpace::from_matrix(vec!["a".into(), "b".into()], vec![vec![eps0(), eps0()], vec![eps0(), eps0()]], tmin())
                .unwrap();
        assert_eq!(degenerate.verify_axioms().unwrap().violation.unwrap().axiom, 2);
        // a -- b -- c with F_ab = F_bc = ε_1 but F_ac = ε_3 breaks axiom (4)
        let e3 = step(int(3));
        let far = PMSpace::from_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![eps0(), e1.clone(), e3.clone()],
                vec![e1.clone(), eps0(), e1.clone()],
                vec![e3, e1, eps0()],
            ],
            tmin(),
        )
        .unwrap();
        let v = far.verify_axioms().unwrap().violation.unwrap();
        assert_eq!(v.axiom, 4);
        assert_eq!(v.points.len(), 3);
    }

    #[test]
    fn neighborhoods() {
        let s = equilateral_e1();
        assert_eq!(s.strong_neighborhood(0, &rat(1, 2)).unwrap(), PointSet::from([0]));
        assert_eq!(s.strong_neighborhood(0, &rat(3, 2)).unwrap(), s.all_points());
        assert_eq!(s.strong_neighborhood(1, &int(2)).unwrap(), s.all_points());
        assert!(s.strong_neighborhood(0, &int(0)).is_err());
        assert!(s.strong_neighborhood(7, &int(1)).is_err());
    }

    #[test]
    fn closure_is_discrete_on_finite_spaces() {
        let s = equilateral_e1();
        assert_eq!(s.strong_closure(&PointSet::from([0])).unwrap(), PointSet::from([0]));
        assert_eq!(s.strong_closure(&s.all_points()).unwrap(), s.all_points());
        assert!(s.strong_closure(&PointSet::new()).is_err());
    }

    #[test]
    fn vicinities() {
        let s = equilateral_e1();
        let v = s.vicinity(&rat(1, 2)).unwrap();
        assert_eq!(v.pairs, (0..3).map(|i| (i, i)).collect());
        assert_eq!(s.vicinity(&rat(3, 2)).unwrap().pairs.len(), 9);
        let t = num::from_f64_dyadic(s.t_star() + 1e-6);
        assert_eq!(s.vicinity(&t).unwrap().pairs.len(), 9);
    }

    #[test]
    fn eta_search() {
        let s = equilateral_e1();
        assert_eq!(s.find_eta(&rat(3, 2), &[rat(3, 2)]).unwrap(), Some(rat(3, 2)));
        assert_eq!(s.find_eta(&rat(1, 2), &[rat(1, 2), rat(1, 4)]).unwrap(), Some(rat(1, 2)));
        // F_ab(1/2) = 3/5 > 1/2 but F_ac(1/2) = 0: V(1/2) is not transitive.
        let g = StepDistFn::from_finite(&[(rat(3, 10), rat(3, 5)), (int(2), int(1))], true).unwrap();
        let line = line3(&g).unwrap();
        assert_eq!(line.find_eta(&rat(1, 2), &[rat(1, 2)]).unwrap(), None);
        let grid = line.t_grid();
        assert!(line.find_eta(&rat(1, 2), &grid).unwrap().is_some());
    }

    #[test]
    fn t_grid_shape() {
        let s = equilateral_e1();
        assert!((s.t_star() - 1.0).abs() < 1e-8);
        let g = s.t_grid();
        assert_eq!(g.last().unwrap(), &int(2));
        assert!(num::to_f64(&g[0]) < s.t_star());
        let single = PMSpace::build_equilateral(&["a"], &step(int(1)), tmin()).unwrap();
        assert_eq!(single.t_star(), 1.0);
    }

    #[test]
    fn json_loader_fills_symmetry() {
        let json = r#"{"points": ["a", "b"], "tau": "min", "dist": [["a", "b", {"jumps": [[1, 1]], "distance": true}]]}"#;
        let s = PMSpace::from_json(json).unwrap();
        assert_eq!(s.dist(1, 0), &step(int(1)));
        assert!(s.verify_axioms().unwrap().passed);
        let again = PMSpace::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
        let missing = r#"{"points": ["a", "b", "c"], "tau": "luk", "dist": [["a", "b", {"jumps": [[1, 1]]}]]}"#;
        assert!(PMSpace::from_json(missing).is_err());
    }
}

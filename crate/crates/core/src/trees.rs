//! Regular rooted trees with regular colorings, and their type-(I) / type-(II) subtrees.
//!
//! A vertex is its path of child indices. Child `j` of any vertex has color
//! `1 + ⌊j / (N/D)⌋`, so every color class has exactly `N/D` members. Trees are never
//! materialized; searches call a survival predicate on demand.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::serde_bigint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeShape {
    successors: u32,
    colors: u32,
    depth_limit: u32,
}

impl TreeShape {
    pub fn new(successors: u32, colors: u32, depth_limit: u32) -> Result<Self> {
        if colors == 0 || successors == 0 || !successors.is_multiple_of(colors) {
            return Err(Error::InvalidParams(format!(
                "need D | N with N, D ≥ 1 (got N = {successors}, D = {colors})"
            )));
        }
        Ok(Self {
            successors,
            colors,
            depth_limit,
        })
    }

    pub fn successors(&self) -> u32 {
        self.successors
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn depth_limit(&self) -> u32 {
        self.depth_limit
    }

    /// `N/D`.
    pub fn per_color(&self) -> u32 {
        self.successors / self.colors
    }

    /// Color in `1..=D` of child index `j`.
    pub fn color_of(&self, child: u32) -> u32 {
        1 + child / self.per_color()
    }

    /// Child indices of color `i`, in increasing order.
    pub fn children_of_color(&self, color: u32) -> std::ops::Range<u32> {
        let w = self.per_color();
        (color - 1) * w..color * w
    }
}

/// A vertex, identified by its path from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex {
    path: Vec<u32>,
}

impl Vertex {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn from_path(path: Vec<u32>) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &[u32] {
        &self.path
    }

    pub fn level(&self) -> u32 {
        self.path.len() as u32
    }

    pub fn child(&self, j: u32) -> Vertex {
        let mut path = self.path.clone();
        path.push(j);
        Vertex { path }
    }

    pub fn parent(&self) -> Option<Vertex> {
        let (_, init) = self.path.split_last()?;
        Some(Vertex { path: init.to_vec() })
    }

    /// Ancestors from the root down to `self`, inclusive.
    pub fn prefixes(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..=self.path.len()).map(|i| Vertex {
            path: self.path[..i].to_vec(),
        })
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.path)
    }
}

/// A depth-`h` type-(I) subtree: each included vertex above depth `h` keeps exactly one
/// successor of every color, listed in color order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeIWitness {
    pub depth: u32,
    pub choices: BTreeMap<Vertex, Vec<u32>>,
}

impl TypeIWitness {
    /// Vertices of the witness at `level`, in path order.
    pub fn level(&self, level: u32) -> Vec<Vertex> {
        let mut current = vec![Vertex::root()];
        for _ in 0..level {
            current = current
                .iter()
                .flat_map(|v| self.choices[v].iter().map(move |&j| v.child(j)))
                .collect();
        }
        current
    }

    /// Structural and survival check; returns a description of the first defect.
    pub fn validate(&self, shape: &TreeShape, survives: impl Fn(&Vertex) -> bool) -> Result<()> {
        let bad = |msg: String| Err(Error::Violation(msg));
        for level in 0..=self.depth {
            for v in self.level(level) {
                if !survives(&v) {
                    return bad(format!("witness vertex {v} does not survive"));
                }
                if level == self.depth {
                    continue;
                }
                let Some(kids) = self.choices.get(&v) else {
                    return bad(format!("witness vertex {v} has no chosen successors"));
                };
                if kids.len() != shape.colors() as usize {
                    return bad(format!("vertex {v} keeps {} successors, expected {}", kids.len(), shape.colors()));
                }
                for (i, &j) in kids.iter().enumerate() {
                    if j >= shape.successors() || shape.color_of(j) != i as u32 + 1 {
                        return bad(format!("vertex {v}: successor {j} is not of color {}", i + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Backtracking search for a depth-`h` type-(I) subtree inside the survivors.
///
/// Children are tried in index order, so the witness is the lexicographically first
/// one. `None` proves that no such subtree of depth `h` exists.
pub fn find_type_i<F>(shape: &TreeShape, survives: F, h: u32) -> Result<Option<TypeIWitness>>
where
    F: Fn(&Vertex) -> bool,
{
    if h > shape.depth_limit() {
        return Err(Error::Precondition(format!("depth {h} exceeds the limit {}", shape.depth_limit())));
    }
    let root = Vertex::root();
    if !survives(&root) {
        return Err(Error::RootDead);
    }
    let mut choices = BTreeMap::new();
    if extend(shape, &survives, &root, h, &mut choices) {
        Ok(Some(TypeIWitness { depth: h, choices }))
    } else {
        Ok(None)
    }
}

/// Tries to grow a type-(I) subtree of depth `remaining` below the surviving vertex `v`.
fn extend<F>(shape: &TreeShape, survives: &F, v: &Vertex, remaining: u32, choices: &mut BTreeMap<Vertex, Vec<u32>>) -> bool
where
    F: Fn(&Vertex) -> bool,
{
    if remaining == 0 {
        return true;
    }
    let mut picked = Vec::with_capacity(shape.colors() as usize);
    for color in 1..=shape.colors() {
        let found = shape.children_of_color(color).find(|&j| {
            let child = v.child(j);
            if !survives(&child) {
                return false;
            }
            let mut trial = BTreeMap::new();
            if extend(shape, survives, &child, remaining - 1, &mut trial) {
                choices.append(&mut trial);
                true
            } else {
                false
            }
        });
        match found {
            Some(j) => picked.push(j),
            None => return false,
        }
    }
    choices.insert(v.clone(), picked);
    true
}

/// Per-level survivor counts `a_0, …, a_h` of the type-(II) subtree that keeps, below
/// each vertex, all successors of color `choice(vertex)`. A vertex counts when it and
/// all its ancestors survive.
pub fn type_ii_trace<F, C>(shape: &TreeShape, survives: F, choice: C, h: u32) -> Vec<u64>
where
    F: Fn(&Vertex) -> bool,
    C: Fn(&Vertex) -> u32,
{
    let mut counts = vec![1u64];
    let mut frontier = vec![Vertex::root()];
    for _ in 0..h {
        let mut next = Vec::new();
        for v in &frontier {
            for j in shape.children_of_color(choice(v)) {
                let child = v.child(j);
                if survives(&child) {
                    next.push(child);
                }
            }
        }
        counts.push(next.len() as u64);
        frontier = next;
    }
    counts
}

/// One step of the growth recursion `a_n ≥ m² a_{n−1} − Σ_{k=1}^n (3m−2)^k a_{n−k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub n: u32,
    pub a_n: u64,
    #[serde(with = "serde_bigint")]
    pub lower_bound: BigInt,
    pub recursion_holds: bool,
    /// `a_n > 88 a_{n−1}`.
    pub exceeds_88: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub steps: Vec<GrowthStep>,
    pub violations: u32,
    pub flagged: u32,
    /// `m² − 88 Σ_{k≥1} ((3m−2)/88)^k`, as `"num/den"`.
    pub slack: String,
    pub slack_exceeds_88: bool,
}

/// `m² − 88·Σ_{k≥1} ((3m−2)/88)^k`, exactly; `2392/27` for `m = 12`.
pub fn growth_slack(m: u32) -> Result<BigRational> {
    let ratio = BigRational::new(BigInt::from(3 * m as i64 - 2), 88.into());
    if ratio >= BigRational::from_integer(1.into()) {
        return Err(Error::Precondition(format!("(3m−2)/88 ≥ 1 for m = {m}; the series diverges")));
    }
    let one = BigRational::from_integer(1.into());
    let series = &ratio / (&one - &ratio);
    Ok(BigRational::from_integer(BigInt::from(m) * m) - BigRational::from_integer(88.into()) * series)
}

/// Checks the growth recursion on observed counts and flags every `a_n ≤ 88 a_{n−1}`.
pub fn verify_growth(counts: &[u64], m: u32) -> Result<GrowthReport> {
    if m != 12 {
        return Err(Error::Precondition(format!("growth check is stated for m = 12, got {m}")));
    }
    let square = BigInt::from(m) * m;
    let line = BigInt::from(3 * m - 2);
    let mut steps = Vec::new();
    for n in 1..counts.len() {
        let prev = BigInt::from(counts[n - 1]);
        let mut bound = &square * &prev;
        let mut power = line.clone();
        for k in 1..=n {
            bound -= &power * counts[n - k];
            power *= &line;
        }
        let a_n = BigInt::from(counts[n]);
        steps.push(GrowthStep {
            n: n as u32,
            a_n: counts[n],
            recursion_holds: a_n >= bound,
            exceeds_88: a_n > prev * 88,
            lower_bound: bound,
        });
    }
    let slack = growth_slack(m)?;
    Ok(GrowthReport {
        violations: steps.iter().filter(|s| !s.recursion_holds).count() as u32,
        flagged: steps.iter().filter(|s| !s.exceeds_88).count() as u32,
        slack_exceeds_88: slack > BigRational::from_integer(88.into()),
        slack: crate::quad::rational_to_string(&slack),
        steps,
    })
}

impl GrowthReport {
    pub fn all_positive_bounds(&self) -> bool {
        self.steps.iter().all(|s| s.lower_bound.is_positive() || s.lower_bound.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Existence of a depth-`h` type-(I) subtree by bottom-up evaluation over the full tree.
    fn oracle(shape: &TreeShape, alive: &HashSet<Vec<u32>>, h: u32) -> bool {
        // good[d] = set of vertices at level d that root a type-(I) subtree of depth h − d
        let mut levels: Vec<Vec<Vec<u32>>> = vec![vec![vec![]]];
        for _ in 0..h {
            let next = levels
                .last()
                .unwrap()
                .iter()
                .flat_map(|p| {
                    (0..shape.successors()).map(move |j| {
                        let mut c = p.clone();
                        c.push(j);
                        c
                    })
                })
                .collect();
            levels.push(next);
        }
        let mut good: HashSet<Vec<u32>> = levels[h as usize].iter().filter(|p| alive.contains(*p)).cloned().collect();
        for d in (0..h as usize).rev() {
            good = levels[d]
                .iter()
                .filter(|p| alive.contains(*p))
                .filter(|p| {
                    (1..=shape.colors()).all(|i| {
                        shape.children_of_color(i).any(|j| {
                            let mut c = (*p).clone();
                            c.push(j);
                            good.contains(&c)
                        })
                    })
                })
                .cloned()
                .collect();
        }
        good.contains(&vec![])
    }

    fn random_alive(shape: &TreeShape, depth: u32, seed: u64, death_rate: f64) -> HashSet<Vec<u32>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut alive = HashSet::new();
        alive.insert(vec![]);
        let mut frontier = vec![vec![]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in &frontier {
                for j in 0..shape.successors() {
                    let mut c: Vec<u32> = p.clone();
                    c.push(j);
                    if rng.gen::<f64>() >= death_rate {
                        alive.insert(c.clone());
                    }
                    next.push(c);
                }
            }
            frontier = next;
        }
        alive
    }

    #[test]
    fn coloring_is_regular() {
        let shape = TreeShape::new(3600, 25, 3).unwrap();
        let mut counts = [0; 26];
        for j in 0..3600 {
            counts[shape.color_of(j) as usize] += 1;
        }
        assert!(counts[1..].iter().all(|&c| c == 144));
        assert!(TreeShape::new(10, 4, 1).is_err());
    }

    #[test]
    fn full_tree_has_first_children_witness() {
        let shape = TreeShape::new(4, 2, 3).unwrap();
        let w = find_type_i(&shape, |_| true, 3).unwrap().unwrap();
        assert_eq!(w.choices[&Vertex::root()], vec![0, 2]);
        assert_eq!(w.level(3).len(), 8);
        w.validate(&shape, |_| true).unwrap();
    }

    #[test]
    fn missing_color_blocks_witness() {
        let shape = TreeShape::new(4, 2, 3).unwrap();
        let kill = |v: &Vertex| !(v.level() == 1 && shape.color_of(v.path()[0]) == 1);
        assert!(find_type_i(&shape, kill, 1).unwrap().is_none());
        assert!(find_type_i(&shape, kill, 3).unwrap().is_none());
        assert!(find_type_i(&shape, kill, 0).unwrap().is_some());
        assert_eq!(find_type_i(&shape, |v: &Vertex| v.level() > 0, 1), Err(Error::RootDead));
    }

    #[test]
    fn trace_examples() {
        let shape = TreeShape::new(16, 4, 4).unwrap();
        assert_eq!(type_ii_trace(&shape, |_| true, |_| 2, 3), vec![1, 4, 16, 64]);
        assert_eq!(type_ii_trace(&shape, |v: &Vertex| v.level() <= 1, |_| 1, 3), vec![1, 4, 0, 0]);
    }

    #[test]
    fn growth_examples() {
        assert_eq!(growth_slack(12).unwrap(), BigRational::new(2392.into(), 27.into()));
        let r = verify_growth(&[1, 110], 12).unwrap();
        assert_eq!((r.violations, r.flagged), (0, 0));
        assert_eq!(r.steps[0].lower_bound, BigInt::from(110));
        assert_eq!(r.slack, "2392/27");
        let r = verify_growth(&[1, 80], 12).unwrap();
        assert_eq!(r.flagged, 1);
        assert_eq!(r.violations, 1);
        assert!(verify_growth(&[1], 11).is_err());
    }

    #[test]
    fn random_predicates_match_oracle() {
        let shape = TreeShape::new(16, 4, 4).unwrap();
        for seed in 0..40 {
            let alive = random_alive(&shape, 3, seed, 0.55);
            let pred = |v: &Vertex| alive.contains(v.path());
            for h in 0..=3 {
                let found = find_type_i(&shape, pred, h).unwrap();
                assert_eq!(found.is_some(), oracle(&shape, &alive, h), "seed {seed} h {h}");
                if let Some(w) = found {
                    w.validate(&shape, pred).unwrap();
                }
            }
        }
    }

    /// Outcome, for every type-(II) choice function below `v` (enumerated explicitly),
    /// of whether the resulting subtree keeps a survivor at relative depth `d`.
    fn spec_outcomes(shape: &TreeShape, alive: &HashSet<Vec<u32>>, v: &[u32], d: u32) -> Vec<bool> {
        let here = alive.contains(v);
        if d == 0 {
            return vec![here];
        }
        let mut out = Vec::new();
        for color in 1..=shape.colors() {
            let per_child: Vec<Vec<bool>> = shape
                .children_of_color(color)
                .map(|j| {
                    let mut c = v.to_vec();
                    c.push(j);
                    spec_outcomes(shape, alive, &c, d - 1)
                })
                .collect();
            // cartesian product over the independent choices below each child
            let mut combos = vec![false];
            for outcomes in &per_child {
                combos = combos.iter().flat_map(|&acc| outcomes.iter().map(move |&b| acc || b)).collect();
            }
            out.extend(combos.into_iter().map(|reached| here && reached));
        }
        out
    }

    #[test]
    fn finite_hypothesis_yields_witness() {
        let shape = TreeShape::new(4, 2, 4).unwrap();
        for seed in 0..30 {
            let alive = random_alive(&shape, 4, seed, 0.3);
            for h in 1..=2u32 {
                if spec_outcomes(&shape, &alive, &[], h * shape.colors()).into_iter().all(|b| b) {
                    let pred = |v: &Vertex| alive.contains(v.path());
                    assert!(find_type_i(&shape, pred, h).unwrap().is_some(), "seed {seed} h {h}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn witness_prefixes_are_witnesses(seed in 0u64..1000) {
            let shape = TreeShape::new(8, 2, 3).unwrap();
            let alive = random_alive(&shape, 3, seed, 0.4);
            let pred = |v: &Vertex| alive.contains(v.path());
            if find_type_i(&shape, pred, 3).unwrap().is_some() {
                for h in 0..3 {
                    prop_assert!(find_type_i(&shape, pred, h).unwrap().is_some());
                }
            }
        }
    }
}

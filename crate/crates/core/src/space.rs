//! Finite T0 spaces.
//!
//! A finite T0 space is the same thing as a finite partial order: every
//! point `x` has a smallest open neighbourhood `minimal_open(x)`, and the
//! opens are exactly the up-sets of the specialization order
//! `x <= y  iff  y in minimal_open(x)`. Point subsets are bitmasks.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest space accepted; the open lattice is stored explicitly.
pub const MAX_POINTS: usize = 16;

/// Default upper bound for [`enumerate_spaces`].
pub const ENUMERATION_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("not T0: points {0} and {1} are topologically indistinguishable")]
    NotT0(usize, usize),
    #[error("too many points: {0} (limit {MAX_POINTS})")]
    TooManyPoints(usize),
    #[error("point index {index} out of range for {len} points")]
    PointOutOfRange { index: usize, len: usize },
    #[error("open family is missing the empty set or the whole space")]
    MissingTrivialOpens,
    #[error("open family not closed under {0}")]
    NotClosed(&'static str),
    #[error("map assigns {got} values to {expected} points")]
    MapArity { expected: usize, got: usize },
    #[error("map value {value} at point {point} is not a codomain point")]
    MapValue { point: usize, value: usize },
    #[error("horizon {horizon} too small: point has {needed} open neighbourhoods")]
    HorizonTooSmall { horizon: usize, needed: usize },
    #[error("enumeration size {0} outside 1..={ENUMERATION_CAP}")]
    EnumerationCap(usize),
}

/// A subset of the points of a space, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointSet(pub u32);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn full(n: usize) -> PointSet {
        if n >= 32 {
            PointSet(u32::MAX)
        } else {
            PointSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(x: usize) -> PointSet {
        PointSet(1 << x)
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(pts: I) -> PointSet {
        PointSet(pts.into_iter().fold(0, |acc, x| acc | (1 << x)))
    }

    pub fn contains(self, x: usize) -> bool {
        self.0 >> x & 1 == 1
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn union(self, o: PointSet) -> PointSet {
        PointSet(self.0 | o.0)
    }
    pub fn intersect(self, o: PointSet) -> PointSet {
        PointSet(self.0 & o.0)
    }
    pub fn minus(self, o: PointSet) -> PointSet {
        PointSet(self.0 & !o.0)
    }
    pub fn is_subset(self, o: PointSet) -> bool {
        self.0 & !o.0 == 0
    }
    pub fn insert(&mut self, x: usize) {
        self.0 |= 1 << x;
    }

    /// Lowest point index in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(x)
        })
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite T0 topological space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    /// Sorted by (cardinality, bitmask); `opens[0]` is empty, the last is the
    /// whole space.
    opens: Vec<PointSet>,
    minimal: Vec<PointSet>,
}

impl FiniteSpace {
    /// Topology generated by `subbasis` (closing under finite unions and
    /// intersections, adjoining the empty set and the whole space).
    pub fn build(labels: Vec<String>, subbasis: &[PointSet]) -> Result<FiniteSpace, SpaceError> {
        let n = labels.len();
        check_size(n)?;
        let full = PointSet::full(n);
        for s in subbasis {
            if let Some(x) = s.minus(full).first() {
                return Err(SpaceError::PointOutOfRange { index: x, len: n });
            }
        }
        let minimal = (0..n)
            .map(|x| {
                subbasis
                    .iter()
                    .filter(|s| s.contains(x))
                    .fold(full, |acc, s| acc.intersect(*s))
            })
            .collect();
        Self::from_minimal(labels, minimal)
    }

    /// Accepts an explicit open family and checks it is a T0 topology.
    pub fn from_opens(labels: Vec<String>, opens: &[PointSet]) -> Result<FiniteSpace, SpaceError> {
        let n = labels.len();
        check_size(n)?;
        let full = PointSet::full(n);
        for s in opens {
            if let Some(x) = s.minus(full).first() {
                return Err(SpaceError::PointOutOfRange { index: x, len: n });
            }
        }
        if !opens.contains(&PointSet::EMPTY) || !opens.contains(&full) {
            return Err(SpaceError::MissingTrivialOpens);
        }
        let set: std::collections::HashSet<PointSet> = opens.iter().copied().collect();
        for a in &set {
            for b in &set {
                if !set.contains(&a.union(*b)) {
                    return Err(SpaceError::NotClosed("union"));
                }
                if !set.contains(&a.intersect(*b)) {
                    return Err(SpaceError::NotClosed("intersection"));
                }
            }
        }
        let minimal = (0..n)
            .map(|x| set.iter().filter(|u| u.contains(x)).fold(full, |acc, u| acc.intersect(*u)))
            .collect();
        Self::from_minimal(labels, minimal)
    }

    /// The up-set topology of a partial order given as `le[x][y]` meaning
    /// `x <= y`.
    pub fn from_order(labels: Vec<String>, le: &[Vec<bool>]) -> Result<FiniteSpace, SpaceError> {
        let n = labels.len();
        check_size(n)?;
        let minimal = (0..n)
            .map(|x| PointSet::from_points((0..n).filter(|&y| le[x][y])))
            .collect();
        Self::from_minimal(labels, minimal)
    }

    fn from_minimal(labels: Vec<String>, minimal: Vec<PointSet>) -> Result<FiniteSpace, SpaceError> {
        let n = labels.len();
        for x in 0..n {
            for y in x + 1..n {
                if minimal[x] == minimal[y] {
                    return Err(SpaceError::NotT0(x, y));
                }
            }
        }
        let opens = up_sets(n, &minimal);
        Ok(FiniteSpace { labels, opens, minimal })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn opens(&self) -> &[PointSet] {
        &self.opens
    }

    pub fn is_open(&self, a: PointSet) -> bool {
        a.iter().all(|x| self.minimal[x].is_subset(a))
    }

    pub fn is_closed(&self, a: PointSet) -> bool {
        self.is_open(self.points().minus(a))
    }

    pub fn minimal_open(&self, x: usize) -> PointSet {
        self.minimal[x]
    }

    /// `x <= y` in the specialization order.
    pub fn le(&self, x: usize, y: usize) -> bool {
        self.minimal[x].contains(y)
    }

    /// Smallest closed superset: the down-closure of `a`.
    pub fn closure(&self, a: PointSet) -> PointSet {
        PointSet::from_points((0..self.len()).filter(|&x| !self.minimal[x].intersect(a).is_empty()))
    }

    /// Indices (into [`Self::opens`]) of the opens containing `x`, ascending.
    pub fn neighbourhoods(&self, x: usize) -> Vec<usize> {
        (0..self.opens.len()).filter(|&i| self.opens[i].contains(x)).collect()
    }

    /// `x` is isolated in the subspace `sub`.
    pub fn is_isolated_in(&self, x: usize, sub: PointSet) -> bool {
        self.minimal[x].intersect(sub) == PointSet::singleton(x)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn check_size(n: usize) -> Result<(), SpaceError> {
    if n > MAX_POINTS {
        Err(SpaceError::TooManyPoints(n))
    } else {
        Ok(())
    }
}

/// All unions of minimal opens, sorted by (cardinality, bits).
fn up_sets(n: usize, minimal: &[PointSet]) -> Vec<PointSet> {
    let mut out = vec![PointSet::EMPTY];
    // Each up-set is the union of the minimal opens of its points; grow the
    // family one point at a time.
    for &m in &minimal[..n] {
        let grown: Vec<PointSet> = out.iter().map(|u| u.union(m)).collect();
        out.extend(grown);
        out.sort_unstable();
        out.dedup();
    }
    out.sort_by_key(|u| (u.len(), u.0));
    out
}

fn labels_of<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// The Sierpinski space on `⊥ = 0`, `⊤ = 1` with `{⊤}` open.
pub fn sierpinski() -> FiniteSpace {
    FiniteSpace::build(labels_of(&["⊥", "⊤"]), &[PointSet::singleton(1)]).unwrap()
}

/// The discrete space on `k` points labelled `0..k`.
pub fn discrete(k: usize) -> FiniteSpace {
    let labels = (0..k).map(|i| i.to_string()).collect();
    let subbasis: Vec<_> = (0..k).map(PointSet::singleton).collect();
    FiniteSpace::build(labels, &subbasis).unwrap()
}

/// Truncation of the flat domain: `⊥` (index 0) below `k` isolated points
/// labelled `0..k` (indices `1..=k`).
pub fn flat(k: usize) -> FiniteSpace {
    let mut labels = vec!["⊥".to_string()];
    labels.extend((0..k).map(|i| i.to_string()));
    let subbasis: Vec<_> = (1..=k).map(PointSet::singleton).collect();
    FiniteSpace::build(labels, &subbasis).unwrap()
}

/// A total function between finite spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    pub domain: Arc<FiniteSpace>,
    pub codomain: Arc<FiniteSpace>,
    assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        assignment: Vec<usize>,
    ) -> Result<PointMap, SpaceError> {
        if assignment.len() != domain.len() {
            return Err(SpaceError::MapArity { expected: domain.len(), got: assignment.len() });
        }
        if let Some(point) = assignment.iter().position(|&v| v >= codomain.len()) {
            return Err(SpaceError::MapValue { point, value: assignment[point] });
        }
        Ok(PointMap { domain, codomain, assignment })
    }

    pub fn identity(space: Arc<FiniteSpace>) -> PointMap {
        let assignment = (0..space.len()).collect();
        PointMap { domain: space.clone(), codomain: space, assignment }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn image(&self, a: PointSet) -> PointSet {
        PointSet::from_points(a.iter().map(|x| self.assignment[x]))
    }

    pub fn preimage(&self, b: PointSet) -> PointSet {
        PointSet::from_points((0..self.domain.len()).filter(|&x| b.contains(self.assignment[x])))
    }

    /// Continuity at `x` of the restriction of the map to `sub` (which must
    /// contain `x`), in the subspace topology.
    pub fn is_continuous_at_within(&self, x: usize, sub: PointSet) -> bool {
        let nbhd = self.domain.minimal_open(x).intersect(sub);
        self.image(nbhd).is_subset(self.codomain.minimal_open(self.assignment[x]))
    }

    pub fn is_continuous_on(&self, sub: PointSet) -> bool {
        sub.iter().all(|x| self.is_continuous_at_within(x, sub))
    }

    pub fn is_continuous(&self) -> bool {
        self.is_continuous_on(self.domain.points())
    }

    /// Every total map between two spaces, in lexicographic order of the
    /// assignment vector.
    pub fn all(domain: Arc<FiniteSpace>, codomain: Arc<FiniteSpace>) -> impl Iterator<Item = PointMap> {
        let (n, k) = (domain.len(), codomain.len());
        let total = if k == 0 && n > 0 { 0 } else { k.pow(n as u32) };
        (0..total).map(move |mut code| {
            let mut assignment = vec![0; n];
            for slot in assignment.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            PointMap { domain: domain.clone(), codomain: codomain.clone(), assignment }
        })
    }
}

/// Continuity at `x`: the minimal open of `x` maps into the minimal open of
/// `f(x)`.
pub fn is_continuous_at(f: &PointMap, x: usize) -> bool {
    f.is_continuous_at_within(x, f.domain.points())
}

/// A finite sequence of points with a claimed limit. The sequence is read
/// as eventually repeating its last entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentSequence {
    pub entries: Vec<usize>,
    pub limit: usize,
}

impl ConvergentSequence {
    /// First index from which every entry lies in the minimal open of the
    /// limit, if the final entry does.
    pub fn eventual(&self, space: &FiniteSpace) -> Option<usize> {
        let target = space.minimal_open(self.limit);
        let tail = self.entries.iter().rev().take_while(|&&e| target.contains(e)).count();
        (tail > 0).then(|| self.entries.len() - tail)
    }
}

/// Convergence in a finite space is eventual membership in the minimal open
/// of the limit.
pub fn converges(space: &FiniteSpace, seq: &ConvergentSequence) -> bool {
    seq.eventual(space).is_some()
}

/// Labelled T0 topologies on exactly `n` points, one per labelled partial
/// order, in a fixed order.
pub fn enumerate_spaces(n: usize) -> Result<impl Iterator<Item = FiniteSpace>, SpaceError> {
    if n == 0 || n > ENUMERATION_CAP {
        return Err(SpaceError::EnumerationCap(n));
    }
    Ok(enumerate_unchecked(n))
}

/// Like [`enumerate_spaces`] without the size cap; intended for tooling
/// that knows what it is asking for.
pub fn enumerate_unchecked(n: usize) -> impl Iterator<Item = FiniteSpace> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
        .collect();
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    (0u64..1 << pairs.len()).filter_map(move |code| {
        let mut le = vec![vec![false; n]; n];
        for (x, row) in le.iter_mut().enumerate() {
            row[x] = true;
        }
        for (bit, &(x, y)) in pairs.iter().enumerate() {
            if code >> bit & 1 == 1 {
                if le[y][x] {
                    return None;
                }
                le[x][y] = true;
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if le[x][y] && le[y][z] && !le[x][z] {
                        return None;
                    }
                }
            }
        }
        FiniteSpace::from_order(labels.clone(), &le).ok()
    })
}

/// A finite name prefix: indices into the space's open list. The listed
/// opens are the positive information read so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NamePrefix {
    pub listed: Vec<usize>,
}

impl NamePrefix {
    /// Intersection of the first `k` listed opens (the whole space for
    /// `k == 0`). `None` if an index is out of range.
    pub fn evidence(&self, space: &FiniteSpace, k: usize) -> Option<PointSet> {
        self.listed[..k]
            .iter()
            .try_fold(space.points(), |acc, &i| space.opens().get(i).map(|u| acc.intersect(*u)))
    }

    /// All listed opens share a point.
    pub fn is_consistent(&self, space: &FiniteSpace) -> bool {
        self.evidence(space, self.listed.len()).is_some_and(|e| !e.is_empty())
    }

    /// Lists exactly the opens containing `x`, each at least once.
    pub fn is_complete_for(&self, space: &FiniteSpace, x: usize) -> bool {
        let nbhds = space.neighbourhoods(x);
        self.listed.iter().all(|i| nbhds.contains(i)) && nbhds.iter().all(|i| self.listed.contains(i))
    }
}

/// How [`canonical_names`] chooses among the possible names.
#[derive(Debug, Clone, Copy)]
pub struct NameConfig {
    /// Enumerate every name when there are at most this many sequences of
    /// the given horizon.
    pub exhaustive_limit: usize,
    /// Random names to add otherwise.
    pub samples: usize,
    pub seed: u64,
}

impl Default for NameConfig {
    fn default() -> Self {
        NameConfig { exhaustive_limit: 4096, samples: 8, seed: 0 }
    }
}

/// Name prefixes of length `horizon` for `x`: sequences over the opens
/// containing `x` in which each such open occurs at least once.
///
/// Always includes the ascending prefix (smallest open first, padded by
/// repeating the last open) and the descending one (whole space first).
/// When few enough sequences exist, all of them are returned; otherwise
/// `config.samples` seeded random shuffles are added.
pub fn canonical_names(
    space: &FiniteSpace,
    x: usize,
    horizon: usize,
    config: &NameConfig,
) -> Result<Vec<NamePrefix>, SpaceError> {
    let nbhds = space.neighbourhoods(x);
    let k = nbhds.len();
    if horizon < k {
        return Err(SpaceError::HorizonTooSmall { horizon, needed: k });
    }
    let pad = |mut v: Vec<usize>| {
        let last = *v.last().unwrap();
        v.resize(horizon, last);
        NamePrefix { listed: v }
    };
    let mut out = vec![pad(nbhds.clone()), pad(nbhds.iter().rev().copied().collect())];

    let count = (k as u128).checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if count <= config.exhaustive_limit as u128 {
        let mut seq = vec![0usize; horizon];
        'outer: loop {
            let listed: Vec<usize> = seq.iter().map(|&j| nbhds[j]).collect();
            if nbhds.iter().all(|i| listed.contains(i)) {
                out.push(NamePrefix { listed });
            }
            for slot in seq.iter_mut().rev() {
                *slot += 1;
                if *slot < k {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..config.samples {
            let mut listed = nbhds.clone();
            while listed.len() < horizon {
                listed.push(nbhds[rng.gen_range(0..k)]);
            }
            listed.shuffle(&mut rng);
            out.push(NamePrefix { listed });
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|n| seen.insert(n.listed.clone()));
    Ok(out)
}

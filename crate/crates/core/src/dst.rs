//! Level of discontinuity, piecewise decompositions, the difference
//! hierarchy and Cantor-Bendixson derivatives on finite spaces.
//!
//! Every chain here stabilizes after at most `|X|` steps, so stage indices
//! are plain integers.

use std::collections::BTreeSet;

use crate::space::{FiniteSpace, PointMap, PointSet};

/// Stages `L_0 = X ⊋ L_1 ⊋ ... ⊋ L_level = ∅`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelChain {
    pub stages: Vec<PointSet>,
    pub level: usize,
}

/// Open sets `U_0, U_1, ...`; piece `β` is `U_β` minus the union of the
/// earlier sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub opens: Vec<PointSet>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn pieces(&self) -> Vec<PointSet> {
        let mut seen = PointSet::EMPTY;
        self.opens
            .iter()
            .map(|u| {
                let piece = u.minus(seen);
                seen = seen.union(*u);
                piece
            })
            .collect()
    }

    /// Replace each `U_β` by the union of `U_γ` for `γ <= β`. Pieces are
    /// unchanged.
    pub fn cumulative(&self) -> Decomposition {
        let mut acc = PointSet::EMPTY;
        Decomposition {
            opens: self
                .opens
                .iter()
                .map(|u| {
                    acc = acc.union(*u);
                    acc
                })
                .collect(),
        }
    }
}

/// An increasing sequence of sets `A_0 ⊆ A_1 ⊆ ...`; its length is the
/// index `α` of the difference operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffSetSpec {
    pub sets: Vec<PointSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CBChain {
    /// `X^(0), X^(1), ...` up to and including the first repeated stage.
    pub derivatives: Vec<PointSet>,
    pub rank: usize,
    pub kernel: PointSet,
}

/// Points of `stage` at which the restriction of `f` to `stage` is
/// discontinuous.
fn discontinuities(f: &PointMap, stage: PointSet) -> PointSet {
    PointSet::from_points(stage.iter().filter(|&x| !f.is_continuous_at_within(x, stage)))
}

pub fn level_chain(f: &PointMap) -> LevelChain {
    let space = &f.domain;
    let mut stages = vec![space.points()];
    loop {
        let cur = *stages.last().unwrap();
        if cur.is_empty() {
            break;
        }
        let next = space.closure(discontinuities(f, cur));
        // maximal points of a non-empty stage are continuity points, so a
        // T0 space always shrinks
        assert!(next != cur, "level chain stalled on a non-empty stage");
        stages.push(next);
    }
    let level = stages.len() - 1;
    LevelChain { stages, level }
}

/// `U_β = X \ L_{β+1}` for `β < Lev(f)`.
pub fn dalpha_decomposition(f: &PointMap) -> Decomposition {
    let chain = level_chain(f);
    let all = f.domain.points();
    Decomposition {
        opens: chain.stages[1..].iter().map(|l| all.minus(*l)).collect(),
    }
}

/// Every set open, pieces covering the domain, and `f` continuous on every
/// piece in the subspace topology.
pub fn is_valid_decomposition(f: &PointMap, d: &Decomposition) -> bool {
    let space = &f.domain;
    if !d.opens.iter().all(|u| u.is_subset(space.points()) && space.is_open(*u)) {
        return false;
    }
    let pieces = d.pieces();
    let covered = pieces.iter().fold(PointSet::EMPTY, |acc, p| acc.union(*p));
    covered == space.points() && pieces.iter().all(|p| f.is_continuous_on(*p))
}

/// Shortest valid decomposition found by exhaustive search over increasing
/// open chains `U_0 ⊆ ... ⊆ U_{α-1} = X`.
pub fn min_piecewise_decomposition(f: &PointMap) -> Decomposition {
    let space = &f.domain;
    let opens = space.opens();
    for alpha in 1..=space.len().max(1) {
        let mut chain = Vec::with_capacity(alpha);
        if search_chain(f, opens, alpha, &mut chain) {
            return Decomposition { opens: chain };
        }
    }
    unreachable!("the canonical decomposition has length Lev(f) <= |X|")
}

fn search_chain(f: &PointMap, opens: &[PointSet], alpha: usize, chain: &mut Vec<PointSet>) -> bool {
    let prev = chain.last().copied().unwrap_or(PointSet::EMPTY);
    let full = f.domain.points();
    if chain.len() + 1 == alpha {
        let piece = full.minus(prev);
        if f.is_continuous_on(piece) {
            chain.push(full);
            return true;
        }
        return false;
    }
    for &u in opens {
        if !prev.is_subset(u) || u == full {
            continue;
        }
        if !f.is_continuous_on(u.minus(prev)) {
            continue;
        }
        chain.push(u);
        if search_chain(f, opens, alpha, chain) {
            return true;
        }
        chain.pop();
    }
    false
}

/// Smallest `α` for which some increasing open chain of length `α` is a
/// valid decomposition of `f`.
pub fn min_piecewise_level(f: &PointMap) -> usize {
    if f.domain.is_empty() {
        return 0;
    }
    min_piecewise_decomposition(f).len()
}

fn parity(beta: usize) -> usize {
    beta % 2
}

/// Union of the pieces `A_β \ ⋃_{γ<β} A_γ` over `β < α` whose parity differs
/// from that of `α`.
pub fn difference_set(spec: &DiffSetSpec) -> PointSet {
    let alpha = spec.sets.len();
    let mut seen = PointSet::EMPTY;
    let mut out = PointSet::EMPTY;
    for (beta, a) in spec.sets.iter().enumerate() {
        if parity(beta) != parity(alpha) {
            out = out.union(a.minus(seen));
        }
        seen = seen.union(*a);
    }
    out
}

/// Every set obtainable as a difference set of an increasing open chain of
/// length `alpha`.
pub fn sigma_minus1_class(space: &FiniteSpace, alpha: usize) -> BTreeSet<PointSet> {
    let mut out = BTreeSet::new();
    let mut chain = Vec::with_capacity(alpha);
    walk_open_chains(space.opens(), alpha, &mut chain, &mut |c| {
        out.insert(difference_set(&DiffSetSpec { sets: c.to_vec() }));
    });
    out
}

/// A witness chain for `a ∈ Σ⁻¹_α`, if one exists.
pub fn sigma_minus1_witness(space: &FiniteSpace, a: PointSet, alpha: usize) -> Option<DiffSetSpec> {
    let mut found = None;
    let mut chain = Vec::with_capacity(alpha);
    walk_open_chains(space.opens(), alpha, &mut chain, &mut |c| {
        if found.is_none() && difference_set(&DiffSetSpec { sets: c.to_vec() }) == a {
            found = Some(DiffSetSpec { sets: c.to_vec() });
        }
    });
    found
}

pub fn in_sigma_minus1(space: &FiniteSpace, a: PointSet, alpha: usize) -> bool {
    sigma_minus1_witness(space, a, alpha).is_some()
}

fn walk_open_chains(
    opens: &[PointSet],
    alpha: usize,
    chain: &mut Vec<PointSet>,
    visit: &mut dyn FnMut(&[PointSet]),
) {
    if chain.len() == alpha {
        visit(chain);
        return;
    }
    let prev = chain.last().copied().unwrap_or(PointSet::EMPTY);
    for &u in opens {
        if prev.is_subset(u) {
            chain.push(u);
            walk_open_chains(opens, alpha, chain, visit);
            chain.pop();
        }
    }
}

/// Limit points of `sub` in its subspace topology.
pub fn derived_set(space: &FiniteSpace, sub: PointSet) -> PointSet {
    PointSet::from_points(sub.iter().filter(|&x| !space.is_isolated_in(x, sub)))
}

pub fn cb_chain(space: &FiniteSpace) -> CBChain {
    let mut derivatives = vec![space.points()];
    loop {
        let cur = *derivatives.last().unwrap();
        let next = derived_set(space, cur);
        if next == cur {
            break;
        }
        derivatives.push(next);
    }
    let rank = derivatives.len() - 1;
    let kernel = derivatives[rank];
    CBChain { derivatives, rank, kernel }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{discrete, flat, sierpinski};
    use std::sync::Arc;

    fn set(pts: &[usize]) -> PointSet {
        PointSet::from_points(pts.iter().copied())
    }

    fn sierpinski_step() -> PointMap {
        PointMap::new(Arc::new(sierpinski()), Arc::new(discrete(2)), vec![0, 1]).unwrap()
    }

    fn flat_step() -> PointMap {
        // points ⊥,0,1 ; f(⊥)=f(0)=0, f(1)=1
        PointMap::new(Arc::new(flat(2)), Arc::new(discrete(2)), vec![0, 0, 1]).unwrap()
    }

    #[test]
    fn level_examples() {
        let cont = PointMap::identity(Arc::new(discrete(3)));
        assert_eq!(level_chain(&cont), LevelChain { stages: vec![set(&[0, 1, 2]), set(&[])], level: 1 });
        assert_eq!(
            level_chain(&sierpinski_step()),
            LevelChain { stages: vec![set(&[0, 1]), set(&[0]), set(&[])], level: 2 }
        );
        assert_eq!(
            level_chain(&flat_step()),
            LevelChain { stages: vec![set(&[0, 1, 2]), set(&[0]), set(&[])], level: 2 }
        );
    }

    #[test]
    fn canonical_decomposition_examples() {
        let cont = PointMap::identity(Arc::new(sierpinski()));
        assert_eq!(dalpha_decomposition(&cont).opens, vec![set(&[0, 1])]);
        let d = dalpha_decomposition(&sierpinski_step());
        assert_eq!(d.opens, vec![set(&[1]), set(&[0, 1])]);
        assert_eq!(d.pieces(), vec![set(&[1]), set(&[0])]);
        assert_eq!(dalpha_decomposition(&flat_step()).opens, vec![set(&[1, 2]), set(&[0, 1, 2])]);
    }

    #[test]
    fn decomposition_validity_examples() {
        let f = sierpinski_step();
        assert!(is_valid_decomposition(&f, &dalpha_decomposition(&f)));
        assert!(!is_valid_decomposition(&f, &Decomposition { opens: vec![set(&[0, 1])] }));
        assert!(!is_valid_decomposition(&f, &Decomposition { opens: vec![set(&[1])] }));
        // {⊥} is not open
        assert!(!is_valid_decomposition(&f, &Decomposition { opens: vec![set(&[0]), set(&[0, 1])] }));
    }

    #[test]
    fn min_level_examples() {
        let cont = PointMap::identity(Arc::new(flat(2)));
        assert_eq!(min_piecewise_level(&cont), 1);
        assert_eq!(min_piecewise_level(&sierpinski_step()), 2);
        assert_eq!(min_piecewise_level(&flat_step()), 2);
    }

    #[test]
    fn difference_set_examples() {
        assert_eq!(difference_set(&DiffSetSpec { sets: vec![set(&[1])] }), set(&[1]));
        assert_eq!(difference_set(&DiffSetSpec { sets: vec![set(&[1]), set(&[0, 1])] }), set(&[0]));
        assert_eq!(difference_set(&DiffSetSpec { sets: vec![] }), PointSet::EMPTY);
        // α = 3: even β = 0, 2 contribute
        let three = DiffSetSpec { sets: vec![set(&[2]), set(&[1, 2]), set(&[0, 1, 2])] };
        assert_eq!(difference_set(&three), set(&[0, 2]));
    }

    #[test]
    fn sigma_minus1_examples() {
        let s = sierpinski();
        assert!(in_sigma_minus1(&s, set(&[0]), 2));
        assert!(!in_sigma_minus1(&s, set(&[0]), 1));
        assert!(in_sigma_minus1(&s, s.points(), 1));
        assert!(in_sigma_minus1(&flat(2), flat(2).points(), 1));
        let class = sigma_minus1_class(&s, 1);
        assert_eq!(class.into_iter().collect::<Vec<_>>(), s.opens().to_vec());
    }

    #[test]
    fn cb_examples() {
        let d = discrete(3);
        assert_eq!(cb_chain(&d), CBChain { derivatives: vec![set(&[0, 1, 2]), set(&[])], rank: 1, kernel: set(&[]) });
        assert_eq!(
            cb_chain(&flat(2)),
            CBChain { derivatives: vec![set(&[0, 1, 2]), set(&[0]), set(&[])], rank: 2, kernel: set(&[]) }
        );
        assert_eq!(
            cb_chain(&sierpinski()),
            CBChain { derivatives: vec![set(&[0, 1]), set(&[0]), set(&[])], rank: 2, kernel: set(&[]) }
        );
    }
}

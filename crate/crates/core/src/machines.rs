//! Mind-change machines reading finite name prefixes.
//!
//! Both machines compute their tag causally, one emission per symbol read
//! once some piece is active. The guess attached to a tag is what the
//! active piece's continuous realizer outputs on the whole prefix that was
//! read, so a guess can only change together with the tag. Emitting a
//! realizer's output on the partial prefix would change the guess inside a
//! block of equal tags (identity on a discrete space, read as `X, {1}`).

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::dst::{cb_chain, dalpha_decomposition, is_valid_decomposition, level_chain, Decomposition};
use crate::ordinal::Ordinal;
use crate::runs::{validate_run, Guess, RunVerdict, TaggedRun};
use crate::space::{canonical_names, flat, FiniteSpace, NameConfig, NamePrefix, PointMap, PointSet, SpaceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("cover violation: every piece refuted at symbol {0}")]
    CoverViolation(usize),
    #[error("inconsistent name at symbol {0}")]
    InconsistentName(usize),
    #[error("no piece activated")]
    NoPieceActivated,
    #[error("decomposition is not valid for the map")]
    InvalidDecomposition,
    #[error("piece {0} is malformed")]
    MalformedPiece(usize),
}

/// A closed piece of a cover together with the positive evidence that
/// activates it and the evidence that rules it out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefutablePiece {
    pub membership: PointSet,
    pub inside_evidence: PointSet,
    pub refutation: PointSet,
    pub guess_table: BTreeMap<usize, usize>,
}

impl RefutablePiece {
    /// Shape invariants, plus agreement with `f` and continuity of `f` on
    /// the piece.
    pub fn is_well_formed(&self, f: &PointMap) -> bool {
        let space = &f.domain;
        self.membership.is_subset(self.inside_evidence.minus(self.refutation))
            && space.is_open(self.inside_evidence)
            && space.is_open(self.refutation)
            && self.guess_table.keys().copied().eq(self.membership.iter())
            && self.membership.iter().all(|x| self.guess_table[&x] == f.apply(x))
            && f.is_continuous_on(self.membership)
    }
}

/// Pieces of `d` listed from the last to the first: piece `β` is activated
/// by `U_β` and refuted by the union of the earlier opens.
pub fn pieces_from_decomposition(f: &PointMap, d: &Decomposition) -> Vec<RefutablePiece> {
    let cum = d.cumulative();
    let pieces = d.pieces();
    (0..d.len())
        .rev()
        .map(|b| RefutablePiece {
            membership: pieces[b],
            inside_evidence: cum.opens[b],
            refutation: if b == 0 { PointSet::EMPTY } else { cum.opens[b - 1] },
            guess_table: pieces[b].iter().map(|x| (x, f.apply(x))).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineReport {
    pub run: TaggedRun,
    pub converged_to: Guess,
    pub name_used: NamePrefix,
}

/// Evidence after each symbol. Fails on an out-of-range index or when the
/// listed opens stop sharing a point.
fn evidence_trail(space: &FiniteSpace, name: &NamePrefix) -> Result<Vec<PointSet>, MachineError> {
    let mut e = space.points();
    let mut trail = Vec::with_capacity(name.listed.len());
    for (k, &i) in name.listed.iter().enumerate() {
        let u = space.opens().get(i).ok_or(MachineError::InconsistentName(k))?;
        e = e.intersect(*u);
        if e.is_empty() {
            return Err(MachineError::InconsistentName(k));
        }
        trail.push(e);
    }
    Ok(trail)
}

/// The piece realizer applied to the whole prefix: the piece point the
/// evidence pins down, else the lowest piece point still consistent, else
/// the lowest one consistent when the piece was activated.
fn realize(space: &FiniteSpace, piece: PointSet, full: PointSet, activation: PointSet) -> Option<usize> {
    piece
        .iter()
        .find(|&y| space.minimal_open(y) == full)
        .or_else(|| piece.intersect(full).first())
        .or_else(|| piece.intersect(activation).first())
}

fn finish(run: TaggedRun, name: &NamePrefix) -> Result<MachineReport, MachineError> {
    let converged_to = run.limit().cloned().ok_or(MachineError::NoPieceActivated)?;
    Ok(MachineReport { run, converged_to, name_used: name.clone() })
}

/// Piece-index machine: the pointer only moves forward, past pieces the
/// evidence refutes or misses, and the tag counts the pieces left.
pub fn glue_machine(
    f: &PointMap,
    pieces: &[RefutablePiece],
    name: &NamePrefix,
) -> Result<MachineReport, MachineError> {
    let space = &f.domain;
    if let Some(i) = pieces.iter().position(|p| !p.is_well_formed(f)) {
        return Err(MachineError::MalformedPiece(i));
    }
    let trail = evidence_trail(space, name)?;
    let mut p = 0;
    // pointer per emission, and the evidence each piece was activated on
    let mut emitted: Vec<usize> = Vec::new();
    let mut activation: BTreeMap<usize, PointSet> = BTreeMap::new();
    for (k, &e) in trail.iter().enumerate() {
        while p < pieces.len() && (e.is_subset(pieces[p].refutation) || e.intersect(pieces[p].membership).is_empty()) {
            p += 1;
        }
        if p == pieces.len() {
            return Err(MachineError::CoverViolation(k));
        }
        if e.is_subset(pieces[p].inside_evidence) {
            activation.entry(p).or_insert(e);
            emitted.push(p);
        }
    }
    let full = trail.last().copied().unwrap_or(space.points());
    let mut run = TaggedRun::new(Ordinal::omega(), true);
    for p in emitted {
        let piece = &pieces[p];
        let y = realize(space, piece.membership, full, activation[&p]).expect("active piece meets its evidence");
        run.push(Ordinal::natural((pieces.len() - 1 - p) as u64), Guess::point(piece.guess_table[&y]));
    }
    finish(run, name)
}

/// Ordinal-counter machine: the counter is the least `γ` whose cumulative
/// open contains the evidence, and it can only drop.
pub fn ordinal_counter_machine(
    d: &Decomposition,
    f: &PointMap,
    name: &NamePrefix,
) -> Result<MachineReport, MachineError> {
    let plan = CounterPlan::new(d, f)?;
    finish(plan.run(name)?, name)
}

/// A decomposition checked once against its map, ready to run on many
/// names.
struct CounterPlan<'a> {
    f: &'a PointMap,
    cumulative: Vec<PointSet>,
    pieces: Vec<PointSet>,
}

impl<'a> CounterPlan<'a> {
    fn new(d: &Decomposition, f: &'a PointMap) -> Result<CounterPlan<'a>, MachineError> {
        if !is_valid_decomposition(f, d) {
            return Err(MachineError::InvalidDecomposition);
        }
        Ok(CounterPlan { f, cumulative: d.cumulative().opens, pieces: d.pieces() })
    }

    fn run(&self, name: &NamePrefix) -> Result<TaggedRun, MachineError> {
        let space = &self.f.domain;
        let trail = evidence_trail(space, name)?;
        let mut counters = Vec::with_capacity(trail.len());
        let mut activation = vec![None; self.pieces.len()];
        for &e in &trail {
            if let Some(g) = self.cumulative.iter().position(|u| e.is_subset(*u)) {
                activation[g].get_or_insert(e);
                counters.push(g);
            }
        }
        let full = trail.last().copied().unwrap_or(space.points());
        let mut run = TaggedRun::new(Ordinal::natural(self.pieces.len() as u64), false);
        for g in counters {
            let y = realize(space, self.pieces[g], full, activation[g].unwrap()).expect("active piece meets its evidence");
            run.push(Ordinal::natural(g as u64), Guess::point(self.f.apply(y)));
        }
        if run.steps.is_empty() {
            return Err(MachineError::NoPieceActivated);
        }
        Ok(run)
    }
}

/// Decomposition `U_β = X \ X^(β+1)` from the derivative chain, closed off
/// by `X` itself when the kernel is non-empty.
pub fn cb_decomposition(space: &FiniteSpace) -> Decomposition {
    let chain = cb_chain(space);
    let all = space.points();
    let mut opens: Vec<PointSet> = chain.derivatives[1..=chain.rank].iter().map(|d| all.minus(*d)).collect();
    if opens.last() != Some(&all) {
        opens.push(all);
    }
    Decomposition { opens }
}

/// Injective on the points outside the kernel, in index order, into the
/// non-bottom points of a flat space; the kernel goes to bottom.
pub fn cb_map(space: Arc<FiniteSpace>) -> PointMap {
    let kernel = cb_chain(&space).kernel;
    let k = space.len() - kernel.len();
    let mut next = 0;
    let assignment = (0..space.len())
        .map(|x| {
            if kernel.contains(x) {
                0
            } else {
                next += 1;
                next
            }
        })
        .collect();
    PointMap::new(space, Arc::new(flat(k)), assignment).expect("cb map fits its codomain")
}

pub fn cb_identifier(space: &Arc<FiniteSpace>, name: &NamePrefix) -> Result<MachineReport, MachineError> {
    ordinal_counter_machine(&cb_decomposition(space), &cb_map(space.clone()), name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointStats {
    pub point: usize,
    pub names: usize,
    pub max_mind_changes: usize,
    pub max_tag: Ordinal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationFailure {
    pub point: usize,
    pub name: NamePrefix,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationSummary {
    pub level: usize,
    pub points: Vec<PointStats>,
}

impl SimulationSummary {
    pub fn max_mind_changes(&self) -> usize {
        self.points.iter().map(|p| p.max_mind_changes).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Names(#[from] SpaceError),
    #[error("{} failing run(s), first at point {}: {}", .0.len(), .0[0].point, .0[0].reason)]
    Failures(Vec<SimulationFailure>),
}

/// Runs the counter machine with the canonical decomposition on every
/// canonical name of every point and checks validity, the limit and the
/// tag bound.
pub fn simulate_all(f: &PointMap, horizon: usize) -> Result<SimulationSummary, SimulationError> {
    simulate_all_with(f, horizon, &NameConfig::default())
}

pub fn simulate_all_with(
    f: &PointMap,
    horizon: usize,
    config: &NameConfig,
) -> Result<SimulationSummary, SimulationError> {
    let names = (0..f.domain.len())
        .map(|x| canonical_names(&f.domain, x, horizon, config))
        .collect::<Result<Vec<_>, _>>()?;
    simulate_on_names(f, &names)
}

/// [`simulate_all`] over precomputed names: `names[x]` lists the names of
/// point `x`.
pub fn simulate_on_names(f: &PointMap, names: &[Vec<NamePrefix>]) -> Result<SimulationSummary, SimulationError> {
    let space = &f.domain;
    assert_eq!(names.len(), space.len(), "one name list per point");
    let level = level_chain(f).level;
    let plan = CounterPlan::new(&dalpha_decomposition(f), f).expect("canonical decomposition is valid");
    let bound = Ordinal::natural(level as u64);
    let mut points = Vec::with_capacity(space.len());
    let mut failures = Vec::new();
    for x in space.points().iter() {
        let mut stats = PointStats { point: x, names: names[x].len(), max_mind_changes: 0, max_tag: Ordinal::zero() };
        for name in &names[x] {
            let mut fail = |reason: String| failures.push(SimulationFailure { point: x, name: name.clone(), reason });
            let run = match plan.run(name) {
                Ok(r) => r,
                Err(e) => {
                    fail(e.to_string());
                    continue;
                }
            };
            match validate_run(&run) {
                RunVerdict::Invalid { reason, index } => fail(format!("invalid run: {reason} at step {index}")),
                RunVerdict::Valid { limit, .. } if limit != Guess::point(f.apply(x)) => {
                    fail(format!("limit {:?}, expected {}", limit.payload(), f.apply(x)))
                }
                RunVerdict::Valid { .. } => {}
            }
            let top = run.max_tag().cloned().unwrap_or_default();
            if top >= bound {
                fail(format!("tag {top} not below level {level}"));
            }
            stats.max_mind_changes = stats.max_mind_changes.max(run.mind_changes());
            stats.max_tag = stats.max_tag.max(top);
        }
        points.push(stats);
    }
    if failures.is_empty() {
        Ok(SimulationSummary { level, points })
    } else {
        Err(SimulationError::Failures(failures))
    }
}

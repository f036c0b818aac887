//! Finite traces of limit computations.
//!
//! A [`TaggedRun`] is a finite prefix of an output of the bounded
//! mind-change operator: a sequence of `(tag, guess)` pairs where tags never
//! increase and every change of guess is paid for with a strict tag drop.
//! A [`PlainRun`] drops the tags; it models the finitely-changing and the
//! pointwise-converging operators.
//!
//! Traces are finite, so "limit" always means the last guess observed and
//! verdicts describe the trace as seen, never its unseen continuation.

use thiserror::Error;

use crate::ordinal::{Ordinal, Term};

/// An output token. Equality is equality of payloads, so producers must
/// serialize canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guess(Vec<u64>);

impl Guess {
    /// Panics on an empty payload.
    pub fn new(payload: Vec<u64>) -> Guess {
        assert!(!payload.is_empty(), "guess payload must be non-empty");
        Guess(payload)
    }

    pub fn point(x: usize) -> Guess {
        Guess(vec![x as u64])
    }

    pub fn payload(&self) -> &[u64] {
        &self.0
    }

    pub fn into_payload(self) -> Vec<u64> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub tag: Ordinal,
    pub guess: Guess,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedRun {
    pub steps: Vec<Step>,
    pub bound: Ordinal,
    /// Allow the first block of equal tags to sit at the bound itself.
    pub bound_inclusive: bool,
    /// Component index recorded by [`join_encode`].
    pub component: Option<u64>,
}

impl TaggedRun {
    pub fn new(bound: Ordinal, bound_inclusive: bool) -> TaggedRun {
        TaggedRun { steps: Vec::new(), bound, bound_inclusive, component: None }
    }

    pub fn push(&mut self, tag: Ordinal, guess: Guess) {
        self.steps.push(Step { tag, guess });
    }

    pub fn limit(&self) -> Option<&Guess> {
        self.steps.last().map(|s| &s.guess)
    }

    pub fn guesses(&self) -> impl Iterator<Item = &Guess> {
        self.steps.iter().map(|s| &s.guess)
    }

    pub fn mind_changes(&self) -> usize {
        mind_changes(self.guesses())
    }

    pub fn max_tag(&self) -> Option<&Ordinal> {
        self.steps.iter().map(|s| &s.tag).max()
    }

    /// Tags at the steps where the guess changes.
    pub fn change_point_tags(&self) -> Vec<Ordinal> {
        self.steps
            .windows(2)
            .filter(|w| w[0].guess != w[1].guess)
            .map(|w| w[1].tag.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainRun {
    pub steps: Vec<Guess>,
}

impl PlainRun {
    pub fn limit(&self) -> Option<&Guess> {
        self.steps.last()
    }

    pub fn mind_changes(&self) -> usize {
        mind_changes(&self.steps)
    }

    /// First index from which the guess never changes within the trace.
    pub fn stabilization_index(&self) -> usize {
        stabilization(&self.steps)
    }
}

/// Number of positions where consecutive guesses differ.
pub fn mind_changes<'a, I: IntoIterator<Item = &'a Guess>>(guesses: I) -> usize {
    let mut it = guesses.into_iter();
    let Some(mut prev) = it.next() else { return 0 };
    let mut n = 0;
    for g in it {
        if g != prev {
            n += 1;
        }
        prev = g;
    }
    n
}

fn stabilization<G: PartialEq>(steps: &[G]) -> usize {
    match steps.last() {
        None => 0,
        Some(last) => steps.len() - steps.iter().rev().take_while(|g| *g == last).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    EmptyRun,
    TagIncreased,
    GuessChangedWithoutTagChange,
    TagNotBelowBound,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Violation::EmptyRun => "empty run",
            Violation::TagIncreased => "tag increased",
            Violation::GuessChangedWithoutTagChange => "guess changed without tag change",
            Violation::TagNotBelowBound => "tag not below bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunVerdict {
    Valid { limit: Guess, stabilized_at: usize },
    Invalid { reason: Violation, index: usize },
}

impl RunVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, RunVerdict::Valid { .. })
    }
}

/// Checks the bound, weak tag descent, and that guesses only change across
/// a strict tag drop. Reports the first violation.
pub fn validate_run(r: &TaggedRun) -> RunVerdict {
    if r.steps.is_empty() {
        return RunVerdict::Invalid { reason: Violation::EmptyRun, index: 0 };
    }
    let mut opening_block = true;
    for (i, step) in r.steps.iter().enumerate() {
        if i > 0 {
            let prev = &r.steps[i - 1];
            if step.tag > prev.tag {
                return RunVerdict::Invalid { reason: Violation::TagIncreased, index: i };
            }
            if step.tag == prev.tag && step.guess != prev.guess {
                return RunVerdict::Invalid { reason: Violation::GuessChangedWithoutTagChange, index: i };
            }
            if step.tag != prev.tag {
                opening_block = false;
            }
        }
        let within = step.tag < r.bound || (r.bound_inclusive && opening_block && step.tag == r.bound);
        if !within {
            return RunVerdict::Invalid { reason: Violation::TagNotBelowBound, index: i };
        }
    }
    RunVerdict::Valid {
        limit: r.steps.last().unwrap().guess.clone(),
        stabilized_at: stabilization(&r.steps.iter().map(|s| &s.guess).collect::<Vec<_>>()),
    }
}

/// Verdict for an untagged run read as a pointwise-converging sequence of
/// guesses, judged over the last `horizon` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlainVerdict {
    /// Constant over at least `horizon` trailing steps, from `index` on.
    ConvergedBy { index: usize },
    /// Not constant, but the trailing window only ever extends earlier
    /// guesses, which is consistent with prefix-wise convergence.
    ContradictionFree,
    /// Some position changed value inside the trailing window.
    Undecided { last_conflict: usize },
}

pub fn validate_plain_run(r: &PlainRun, horizon: usize) -> PlainVerdict {
    let s = r.stabilization_index();
    if !r.steps.is_empty() && r.steps.len() - s >= horizon.max(1) {
        return PlainVerdict::ConvergedBy { index: s };
    }
    let start = r.steps.len().saturating_sub(horizon);
    let mut last_conflict = None;
    for i in start.max(1)..r.steps.len() {
        let (a, b) = (r.steps[i - 1].payload(), r.steps[i].payload());
        if a.iter().zip(b).any(|(x, y)| x != y) {
            last_conflict = Some(i);
        }
    }
    match last_conflict {
        Some(i) => PlainVerdict::Undecided { last_conflict: i },
        None => PlainVerdict::ContradictionFree,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("component indices disagree at step {index}: {first} vs {found}")]
    MixedComponents { index: usize, first: u64, found: u64 },
    #[error("guess at step {0} carries no payload after its component index")]
    EmptyComponentPayload(usize),
    #[error("limits disagree between components {0} and {1}")]
    LimitsDisagree(usize, usize),
    #[error("component {index} is not a valid run: {reason} at step {step}")]
    InvalidComponent { index: usize, reason: Violation, step: usize },
    #[error("meet of an empty family")]
    EmptyMeet,
    #[error("bound shrink: {new} < {old}")]
    BoundShrink { new: Ordinal, old: Ordinal },
    #[error("outer guess {0} does not decode to a run")]
    Deserialize(usize),
    #[error("outer guess {index} decodes to an invalid run: {reason}")]
    InvalidInner { index: usize, reason: Violation },
}

/// Prefix every guess with the component index `i`.
pub fn join_encode(i: u64, r: &TaggedRun) -> TaggedRun {
    TaggedRun {
        steps: r
            .steps
            .iter()
            .map(|s| {
                let mut payload = Vec::with_capacity(s.guess.0.len() + 1);
                payload.push(i);
                payload.extend_from_slice(&s.guess.0);
                Step { tag: s.tag.clone(), guess: Guess(payload) }
            })
            .collect(),
        bound: r.bound.clone(),
        bound_inclusive: r.bound_inclusive,
        component: Some(i),
    }
}

/// Strip and return the common component index.
pub fn join_decode(r: &TaggedRun) -> Result<(u64, TaggedRun), RunError> {
    let mut component = r.component;
    let mut steps = Vec::with_capacity(r.steps.len());
    for (index, s) in r.steps.iter().enumerate() {
        let (&head, rest) = s.guess.0.split_first().expect("guesses are non-empty");
        match component {
            Some(first) if first != head => {
                return Err(RunError::MixedComponents { index, first, found: head });
            }
            _ => component = Some(head),
        }
        if rest.is_empty() {
            return Err(RunError::EmptyComponentPayload(index));
        }
        steps.push(Step { tag: s.tag.clone(), guess: Guess(rest.to_vec()) });
    }
    let run = TaggedRun { steps, bound: r.bound.clone(), bound_inclusive: r.bound_inclusive, component: None };
    Ok((component.unwrap_or(0), run))
}

/// Tuple run of several runs converging to the same limit.
///
/// Step `n` tuples the `n`-th guesses (shorter runs repeat their last step)
/// and carries the natural sum of the component tags, so a change in any
/// component is paid for by a strict drop of the sum. The bound is the
/// natural sum of the component bounds.
pub fn meet_encode(rs: &[TaggedRun]) -> Result<TaggedRun, RunError> {
    if rs.is_empty() {
        return Err(RunError::EmptyMeet);
    }
    let mut limits = Vec::with_capacity(rs.len());
    for (index, r) in rs.iter().enumerate() {
        match validate_run(r) {
            RunVerdict::Valid { limit, .. } => limits.push(limit),
            RunVerdict::Invalid { reason, index: step } => {
                return Err(RunError::InvalidComponent { index, reason, step });
            }
        }
    }
    if let Some(k) = limits.iter().position(|l| *l != limits[0]) {
        return Err(RunError::LimitsDisagree(0, k));
    }
    let len = rs.iter().map(|r| r.steps.len()).max().unwrap();
    let bound = rs.iter().fold(Ordinal::zero(), |acc, r| acc.natural_sum(&r.bound));
    let mut out = TaggedRun::new(bound, rs.iter().any(|r| r.bound_inclusive));
    for n in 0..len {
        let mut tag = Ordinal::zero();
        let mut payload = vec![rs.len() as u64];
        for r in rs {
            let s = &r.steps[n.min(r.steps.len() - 1)];
            tag = tag.natural_sum(&s.tag);
            payload.push(s.guess.0.len() as u64);
            payload.extend_from_slice(&s.guess.0);
        }
        out.push(tag, Guess(payload));
    }
    Ok(out)
}

/// Split a tuple guess produced by [`meet_encode`] into its components.
pub fn meet_components(g: &Guess) -> Option<Vec<Guess>> {
    let (&k, mut rest) = g.0.split_first()?;
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let (&len, tail) = rest.split_first()?;
        let len = usize::try_from(len).ok()?;
        if len == 0 || tail.len() < len {
            return None;
        }
        out.push(Guess(tail[..len].to_vec()));
        rest = &tail[len..];
    }
    rest.is_empty().then_some(out)
}

/// The limit a meet run stands for: the limit of its first component.
pub fn meet_limit(r: &TaggedRun) -> Option<Guess> {
    meet_components(r.limit()?)?.into_iter().next()
}

/// Same steps under a larger bound.
pub fn embed(r: &TaggedRun, new_bound: Ordinal) -> Result<TaggedRun, RunError> {
    if new_bound < r.bound {
        return Err(RunError::BoundShrink { new: new_bound, old: r.bound.clone() });
    }
    Ok(TaggedRun { bound: new_bound, ..r.clone() })
}

/// Collapse a run whose guesses are themselves serialized runs.
///
/// Consecutive equal outer guesses form one block; each block contributes
/// the guesses of its inner run once. The result changes at most
/// `(outer changes + 1) * (max inner changes + 1) - 1` times and ends on
/// the inner limit of the final block.
pub fn flatten(outer: &PlainRun) -> Result<PlainRun, RunError> {
    let mut steps = Vec::new();
    let mut prev: Option<&Guess> = None;
    for (index, g) in outer.steps.iter().enumerate() {
        let inner = decode_run(g.payload()).ok_or(RunError::Deserialize(index))?;
        if let RunVerdict::Invalid { reason, .. } = validate_run(&inner) {
            return Err(RunError::InvalidInner { index, reason });
        }
        if prev != Some(g) {
            steps.extend(inner.steps.into_iter().map(|s| s.guess));
        }
        prev = Some(g);
    }
    Ok(PlainRun { steps })
}

fn encode_ordinal(o: &Ordinal, out: &mut Vec<u64>) {
    out.push(o.terms().len() as u64);
    for Term { exponent, coefficient } in o.terms() {
        encode_ordinal(exponent, out);
        out.push(*coefficient);
    }
}

fn decode_ordinal(src: &mut &[u64]) -> Option<Ordinal> {
    let n = take(src)?;
    let mut terms = Vec::new();
    for _ in 0..n {
        let e = decode_ordinal(src)?;
        let c = take(src)?;
        terms.push((e, c));
    }
    Ordinal::make(terms).ok()
}

fn take(src: &mut &[u64]) -> Option<u64> {
    let (&h, rest) = src.split_first()?;
    *src = rest;
    Some(h)
}

/// Serialize a tagged run into naturals, for nesting runs as guesses.
pub fn encode_run(r: &TaggedRun) -> Vec<u64> {
    let mut out = vec![r.bound_inclusive as u64];
    encode_ordinal(&r.bound, &mut out);
    out.push(r.steps.len() as u64);
    for s in &r.steps {
        encode_ordinal(&s.tag, &mut out);
        out.push(s.guess.0.len() as u64);
        out.extend_from_slice(&s.guess.0);
    }
    out
}

pub fn decode_run(src: &[u64]) -> Option<TaggedRun> {
    let mut src = src;
    let inclusive = match take(&mut src)? {
        0 => false,
        1 => true,
        _ => return None,
    };
    let bound = decode_ordinal(&mut src)?;
    let n = take(&mut src)?;
    let mut run = TaggedRun::new(bound, inclusive);
    for _ in 0..n {
        let tag = decode_ordinal(&mut src)?;
        let len = usize::try_from(take(&mut src)?).ok()?;
        if len == 0 || src.len() < len {
            return None;
        }
        run.push(tag, Guess(src[..len].to_vec()));
        src = &src[len..];
    }
    src.is_empty().then_some(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(k: u64) -> Guess {
        Guess::new(vec![k])
    }

    fn run(bound: u64, steps: &[(u64, u64)]) -> TaggedRun {
        let mut r = TaggedRun::new(bound.into(), false);
        for &(t, x) in steps {
            r.push(t.into(), g(x));
        }
        r
    }

    #[test]
    fn validate_examples() {
        let ok = run(3, &[(2, 1), (1, 1), (0, 2)]);
        assert_eq!(validate_run(&ok), RunVerdict::Valid { limit: g(2), stabilized_at: 2 });
        assert_eq!(
            validate_run(&run(3, &[(1, 1), (1, 2)])),
            RunVerdict::Invalid { reason: Violation::GuessChangedWithoutTagChange, index: 1 }
        );
        assert_eq!(
            validate_run(&run(3, &[(0, 1), (1, 1)])),
            RunVerdict::Invalid { reason: Violation::TagIncreased, index: 1 }
        );
        assert_eq!(
            validate_run(&run(3, &[(3, 1)])),
            RunVerdict::Invalid { reason: Violation::TagNotBelowBound, index: 0 }
        );
        assert_eq!(validate_run(&run(3, &[])), RunVerdict::Invalid { reason: Violation::EmptyRun, index: 0 });
    }

    #[test]
    fn bound_inclusive_only_covers_opening_block() {
        let mut r = run(3, &[(3, 1), (3, 1), (2, 2)]);
        assert!(!validate_run(&r).is_valid());
        r.bound_inclusive = true;
        assert!(validate_run(&r).is_valid());
        // opening block at the bound may not change its guess
        let mut bad = run(3, &[(3, 1), (3, 2)]);
        bad.bound_inclusive = true;
        assert!(!validate_run(&bad).is_valid());
    }

    #[test]
    fn mind_change_examples() {
        assert_eq!(run(3, &[(2, 1), (1, 2), (0, 3)]).mind_changes(), 2);
        assert_eq!(run(3, &[(2, 1), (2, 1)]).mind_changes(), 0);
        let plain = PlainRun { steps: vec![g(1), g(2), g(1)] };
        assert_eq!(plain.mind_changes(), 2);
    }

    #[test]
    fn join_examples() {
        let r = run(3, &[(2, 1), (0, 5)]);
        let enc = join_encode(2, &r);
        assert_eq!(enc.steps[0].guess.payload(), &[2, 1]);
        let (i, back) = join_decode(&enc).unwrap();
        assert_eq!((i, back), (2, r.clone()));

        let mut mixed = join_encode(1, &r);
        mixed.component = None;
        mixed.steps[1].guess = Guess::new(vec![2, 5]);
        assert_eq!(
            join_decode(&mixed),
            Err(RunError::MixedComponents { index: 1, first: 1, found: 2 })
        );

        let constant = run(1, &[(0, 7), (0, 7)]);
        let enc = join_encode(0, &constant);
        assert!(enc.steps.iter().all(|s| s.guess.payload() == [0, 7]));
    }

    #[test]
    fn meet_examples() {
        let r = run(3, &[(2, 1), (0, 4)]);
        let m = meet_encode(&[r.clone(), r.clone()]).unwrap();
        assert!(validate_run(&m).is_valid());
        assert_eq!(meet_limit(&m), Some(g(4)));
        assert_eq!(m.bound, Ordinal::natural(6));

        let other = run(3, &[(1, 3)]);
        assert_eq!(meet_encode(&[r.clone(), other]), Err(RunError::LimitsDisagree(0, 1)));

        let single = meet_encode(std::slice::from_ref(&r)).unwrap();
        assert_eq!(single.steps.len(), r.steps.len());
        for (a, b) in single.steps.iter().zip(&r.steps) {
            assert_eq!(a.tag, b.tag);
            assert_eq!(meet_components(&a.guess).unwrap(), vec![b.guess.clone()]);
        }
    }

    #[test]
    fn meet_pays_for_changes_hidden_under_a_larger_tag() {
        // a pointwise maximum of tags would stay at 5 while the tuple changes
        let a = run(6, &[(5, 1), (5, 1)]);
        let b = run(6, &[(3, 2), (2, 1)]);
        let m = meet_encode(&[a, b]).unwrap();
        assert!(validate_run(&m).is_valid());
        assert_eq!(m.change_point_tags(), vec![Ordinal::natural(7)]);
    }

    #[test]
    fn embed_examples() {
        let r = run(2, &[(1, 1), (0, 2)]);
        let e = embed(&r, Ordinal::omega()).unwrap();
        assert!(validate_run(&e).is_valid());
        assert_eq!(e.limit(), r.limit());
        assert_eq!(embed(&r, 2.into()).unwrap(), r);
        assert!(matches!(embed(&r, 1.into()), Err(RunError::BoundShrink { .. })));
    }

    #[test]
    fn run_codec_round_trip() {
        let mut r = run(4, &[(3, 1), (1, 9)]);
        r.bound = "w^(w+1)*2+3".parse().unwrap();
        r.bound_inclusive = true;
        assert_eq!(decode_run(&encode_run(&r)), Some(r));
        assert_eq!(decode_run(&[0, 0, 1]), None);
        assert_eq!(decode_run(&[2]), None);
    }

    #[test]
    fn flatten_examples() {
        let inner = run(3, &[(2, 1), (1, 2), (0, 3)]);
        let outer = PlainRun { steps: vec![Guess::new(encode_run(&inner)); 3] };
        let flat = flatten(&outer).unwrap();
        assert_eq!(flat.limit(), Some(&g(3)));
        assert_eq!(flat.mind_changes(), 2);

        let bad = PlainRun { steps: vec![Guess::new(encode_run(&inner)), g(77)] };
        assert_eq!(flatten(&bad), Err(RunError::Deserialize(1)));
    }

    #[test]
    fn plain_verdicts() {
        let conv = PlainRun { steps: vec![g(1), g(2), g(2), g(2)] };
        assert_eq!(validate_plain_run(&conv, 3), PlainVerdict::ConvergedBy { index: 1 });
        let growing = PlainRun {
            steps: vec![Guess::new(vec![1]), Guess::new(vec![1, 2]), Guess::new(vec![1, 2, 3])],
        };
        assert_eq!(validate_plain_run(&growing, 3), PlainVerdict::ContradictionFree);
        let flipping = PlainRun { steps: vec![g(1), g(2), g(1)] };
        assert_eq!(validate_plain_run(&flipping, 3), PlainVerdict::Undecided { last_conflict: 2 });
    }
}

//! Polynomials over Q, reduced Gröbner bases, and an online ideal learner
//! whose mind changes are paid for by the ordinal rank of the staircase.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ordinal::{omega_pow, validate_strictly_decreasing, Ordinal};
use crate::runs::{Guess, Step, TaggedRun};

pub type Monomial = Vec<u32>;

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn quotient(b: &[u32], a: &[u32]) -> Monomial {
    b.iter().zip(a).map(|(y, x)| y - x).collect()
}

fn degree(a: &[u32]) -> u64 {
    a.iter().map(|&e| e as u64).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderKind {
    Lex,
    GrLex,
    #[default]
    GRevLex,
}

impl FromStr for OrderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lex" => Ok(OrderKind::Lex),
            "grlex" => Ok(OrderKind::GrLex),
            "grevlex" => Ok(OrderKind::GRevLex),
            _ => Err(format!("unknown monomial order `{s}` (expected lex, grlex or grevlex)")),
        }
    }
}

/// A monomial order together with a variable priority: `perm[0]` is the
/// most significant variable. No permutation means `x1 > x2 > ...`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub perm: Option<Vec<usize>>,
}

impl MonomialOrder {
    pub fn new(kind: OrderKind) -> MonomialOrder {
        MonomialOrder { kind, perm: None }
    }

    /// Panics unless `perm` is a permutation of `0..perm.len()`.
    pub fn with_perm(kind: OrderKind, perm: Vec<usize>) -> MonomialOrder {
        let mut seen = vec![false; perm.len()];
        for &i in &perm {
            assert!(i < perm.len() && !seen[i], "not a permutation: {perm:?}");
            seen[i] = true;
        }
        MonomialOrder { kind, perm: Some(perm) }
    }

    fn var(&self, i: usize) -> usize {
        self.perm.as_ref().map_or(i, |p| p[i])
    }

    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        let n = a.len();
        let lex = || (0..n).map(|i| a[self.var(i)].cmp(&b[self.var(i)])).find(|o| o.is_ne()).unwrap_or(Ordering::Equal);
        match self.kind {
            OrderKind::Lex => lex(),
            OrderKind::GrLex => degree(a).cmp(&degree(b)).then_with(lex),
            OrderKind::GRevLex => degree(a).cmp(&degree(b)).then_with(|| {
                (0..n)
                    .rev()
                    .map(|i| b[self.var(i)].cmp(&a[self.var(i)]))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            }),
        }
    }
}

/// A polynomial in `n` variables with exact rational coefficients. No zero
/// coefficient is ever stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Polynomial {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Polynomial {
        Polynomial::term(vec![0; n], c)
    }

    pub fn monomial(exps: Monomial) -> Polynomial {
        Polynomial::term(exps, BigRational::one())
    }

    pub fn term(exps: Monomial, c: BigRational) -> Polynomial {
        let mut p = Polynomial::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Sum of the given terms; repeated monomials are combined.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(n: usize, terms: I) -> Polynomial {
        let mut p = Polynomial::zero(n);
        for (m, c) in terms {
            assert_eq!(m.len(), n, "exponent vector of the wrong length");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[u32]) -> Option<&BigRational> {
        self.terms.get(m)
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| degree(m)).max()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading_term(&self, order: &MonomialOrder) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn leading_monomial(&self, order: &MonomialOrder) -> Option<&Monomial> {
        self.leading_term(order).map(|t| t.0)
    }

    /// `self -= c * x^shift * other`
    fn sub_scaled(&mut self, c: &BigRational, shift: &[u32], other: &Polynomial) {
        for (m, d) in &other.terms {
            let moved: Monomial = m.iter().zip(shift).map(|(a, b)| a + b).collect();
            self.add_term(moved, -(c * d));
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n);
        }
        Polynomial { n: self.n, terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn monic(&self, order: &MonomialOrder) -> Polynomial {
        match self.leading_term(order) {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (m, c) in &self.terms {
            out.sub_scaled(&-c.clone(), m, other);
        }
        out
    }
}

/// Normal form of `p` modulo `basis`: repeatedly cancel the leading term
/// with the first basis element whose leading monomial divides it, or move
/// it to the remainder.
pub fn reduce(p: &Polynomial, basis: &[Polynomial], order: &MonomialOrder) -> Polynomial {
    let leads: Vec<(&Monomial, &BigRational)> =
        basis.iter().filter_map(|g| g.leading_term(order)).collect();
    let live: Vec<&Polynomial> = basis.iter().filter(|g| !g.is_zero()).collect();
    let mut p = p.clone();
    let mut rem = Polynomial::zero(p.n);
    while let Some((m, c)) = p.leading_term(order).map(|(m, c)| (m.clone(), c.clone())) {
        match leads.iter().position(|(lm, _)| divides(lm, &m)) {
            Some(i) => {
                let (lm, lc) = leads[i];
                p.sub_scaled(&(&c / lc), &quotient(&m, lm), live[i]);
            }
            None => {
                p.terms.remove(&m);
                rem.terms.insert(m, c);
            }
        }
    }
    rem
}

fn s_polynomial(f: &Polynomial, g: &Polynomial, order: &MonomialOrder) -> Polynomial {
    let (fm, fc) = f.leading_term(order).unwrap();
    let (gm, gc) = g.leading_term(order).unwrap();
    let l = lcm(fm, gm);
    let mut s = Polynomial::zero(f.n);
    s.sub_scaled(&-fc.recip(), &quotient(&l, fm), f);
    s.sub_scaled(&gc.recip(), &quotient(&l, gm), g);
    s
}

/// The reduced Gröbner basis of the ideal generated by `gens`: monic,
/// inter-reduced, sorted by leading monomial from largest to smallest.
/// Empty for the zero ideal.
pub fn buchberger(gens: &[Polynomial], order: &MonomialOrder) -> Vec<Polynomial> {
    let mut g: Vec<Polynomial> = gens.iter().filter(|p| !p.is_zero()).map(|p| p.monic(order)).collect();
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    while let Some((i, j)) = pairs.pop() {
        let (a, b) = (g[i].leading_monomial(order).unwrap(), g[j].leading_monomial(order).unwrap());
        if a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0) {
            continue;
        }
        let r = reduce(&s_polynomial(&g[i], &g[j], order), &g, order);
        if !r.is_zero() {
            let k = g.len();
            g.push(r.monic(order));
            pairs.extend((0..k).map(|i| (i, k)));
        }
    }
    // drop generators whose leading monomial another one divides
    let mut minimal: Vec<Polynomial> = Vec::new();
    for (i, p) in g.iter().enumerate() {
        let m = p.leading_monomial(order).unwrap();
        let redundant = g.iter().enumerate().any(|(j, q)| {
            let lm = q.leading_monomial(order).unwrap();
            j != i && divides(lm, m) && (lm != m || j < i)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    let reduced: Vec<Polynomial> = (0..minimal.len())
        .map(|i| {
            let others: Vec<Polynomial> =
                minimal.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| q.clone()).collect();
            reduce(&minimal[i], &others, order).monic(order)
        })
        .collect();
    sort_basis(reduced, order)
}

fn sort_basis(mut basis: Vec<Polynomial>, order: &MonomialOrder) -> Vec<Polynomial> {
    basis.sort_by(|a, b| order.cmp(b.leading_monomial(order).unwrap(), a.leading_monomial(order).unwrap()));
    basis
}

/// Reduced-basis test: monic, no term of a generator divisible by another
/// generator's leading monomial, and every S-polynomial reduces to zero.
pub fn is_reduced_groebner_basis(basis: &[Polynomial], order: &MonomialOrder) -> bool {
    let leads: Vec<&Monomial> = match basis.iter().map(|g| g.leading_monomial(order)).collect::<Option<_>>() {
        Some(l) => l,
        None => return false,
    };
    let monic = basis.iter().all(|g| g.leading_term(order).unwrap().1.is_one());
    let inter = basis.iter().enumerate().all(|(i, g)| {
        g.terms.keys().all(|m| leads.iter().enumerate().all(|(j, l)| j == i || !divides(l, m)))
    });
    let closed = (0..basis.len())
        .all(|j| (0..j).all(|i| reduce(&s_polynomial(&basis[i], &basis[j], order), basis, order).is_zero()));
    monic && inter && closed
}

fn minimal_generators(leading: &[Monomial]) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = Vec::new();
    for (i, m) in leading.iter().enumerate() {
        let redundant = leading.iter().enumerate().any(|(j, l)| j != i && divides(l, m) && (l != m || j < i));
        if !redundant {
            out.push(m.clone());
        }
    }
    out.sort();
    out
}

/// Ordinal rank of the staircase (the monomials outside the ideal generated
/// by `leading`). Must strictly drop whenever the ideal strictly grows, and
/// equal `ω^n` for the zero ideal.
pub trait StaircaseRank {
    fn rank(&self, leading: &[Monomial], n: usize) -> Ordinal;
}

/// Sums `ω^|S|` over the maximal flats of the staircase: sets of monomials
/// with the coordinates in `S` free and the others fixed, lying entirely
/// outside the ideal, and not contained in a larger such set.
///
/// Shrinking the staircase either removes a maximal flat or splits it into
/// finitely many flats of lower dimension, so the natural sum strictly
/// drops.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaximalFlatRank;

impl StaircaseRank for MaximalFlatRank {
    fn rank(&self, leading: &[Monomial], n: usize) -> Ordinal {
        let gens = minimal_generators(leading);
        // beyond the largest generator exponent a coordinate might as well be free
        let bound: Vec<u32> = (0..n).map(|j| gens.iter().map(|g| g[j]).max().unwrap_or(0)).collect();
        let outside = |free: u32, v: &[u32]| {
            gens.iter().all(|g| (0..n).any(|j| free >> j & 1 == 0 && g[j] > v[j]))
        };
        let mut count = vec![0u64; n + 1];
        for free in 0..1u32 << n {
            let fixed: Vec<usize> = (0..n).filter(|&j| free >> j & 1 == 0).collect();
            if fixed.iter().any(|&j| bound[j] == 0) {
                continue;
            }
            let mut v = vec![0u32; n];
            'values: loop {
                if outside(free, &v) && fixed.iter().all(|&j| !outside(free | 1 << j, &v)) {
                    count[n - fixed.len()] += 1;
                }
                for &j in &fixed {
                    v[j] += 1;
                    if v[j] < bound[j] {
                        continue 'values;
                    }
                    v[j] = 0;
                }
                break;
            }
        }
        count
            .iter()
            .enumerate()
            .rev()
            .fold(Ordinal::zero(), |acc, (d, &c)| acc.natural_sum(&omega_pow(Ordinal::natural(d as u64), c)))
    }
}

/// Closed forms in one and two variables, [`MaximalFlatRank`] above that.
///
/// In two variables the rank is `ω·ℓ + m`: `ℓ` counts the coordinate lines
/// lying entirely outside the ideal and `m` the remaining staircase
/// monomials.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormRank;

impl StaircaseRank for ClosedFormRank {
    fn rank(&self, leading: &[Monomial], n: usize) -> Ordinal {
        let gens = minimal_generators(leading);
        if gens.is_empty() {
            return omega_pow(Ordinal::natural(n as u64), 1);
        }
        match n {
            1 => Ordinal::natural(gens[0][0] as u64),
            2 => {
                let c = gens.iter().map(|g| g[0]).min().unwrap();
                let r = gens.iter().map(|g| g[1]).min().unwrap();
                let cmax = gens.iter().map(|g| g[0]).max().unwrap();
                let rmax = gens.iter().map(|g| g[1]).max().unwrap();
                let m = (c..cmax)
                    .flat_map(|i| (r..rmax).map(move |j| [i, j]))
                    .filter(|p| !gens.iter().any(|g| divides(g, p)))
                    .count() as u64;
                omega_pow(Ordinal::natural(1), (c + r) as u64).natural_sum(&Ordinal::natural(m))
            }
            _ => MaximalFlatRank.rank(leading, n),
        }
    }
}

pub fn staircase_tag(leading: &[Monomial], n: usize) -> Ordinal {
    ClosedFormRank.rank(leading, n)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VariableCountMismatch { expected: usize, got: usize },
    #[error("rank contract violated: tag {new} is not below {old} after a basis change")]
    TagContract { old: Ordinal, new: Ordinal },
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("targets not strictly decreasing at index {0}")]
    NotDecreasing(usize),
    #[error("unrealizable tag {0}")]
    UnrealizableTag(Ordinal),
    #[error("adversary supports one or two variables, not {0}")]
    AdversaryArity(usize),
    #[error("empty enumeration")]
    EmptyEnumeration,
}

/// Structured naturals: `n`, the generator count, then per generator the
/// term count and per term the exponents, a sign bit and the digit vectors
/// of numerator and denominator. Equal for equal reduced bases.
pub fn encode_basis(n: usize, basis: &[Polynomial], order: &MonomialOrder) -> Guess {
    fn digits(out: &mut Vec<u64>, x: &BigUint) {
        let d = x.to_u64_digits();
        out.push(d.len() as u64);
        out.extend(d);
    }
    let mut out = vec![n as u64, basis.len() as u64];
    for g in basis {
        let mut terms: Vec<_> = g.terms().collect();
        terms.sort_by(|a, b| order.cmp(b.0, a.0));
        out.push(terms.len() as u64);
        for (m, c) in terms {
            out.extend(m.iter().map(|&e| e as u64));
            out.push((c.numer().sign() == Sign::Minus) as u64);
            digits(&mut out, c.numer().magnitude());
            digits(&mut out, c.denom().magnitude());
        }
    }
    Guess::new(out)
}

pub fn decode_basis(g: &Guess) -> Option<Vec<Polynomial>> {
    let mut src = g.payload();
    let mut take = || -> Option<u64> {
        let (&h, rest) = src.split_first()?;
        src = rest;
        Some(h)
    };
    let n = take()? as usize;
    let count = take()?;
    let mut basis = Vec::new();
    for _ in 0..count {
        let nterms = take()?;
        let mut p = Polynomial::zero(n);
        for _ in 0..nterms {
            let m: Monomial = (0..n).map(|_| take().and_then(|e| u32::try_from(e).ok())).collect::<Option<_>>()?;
            let negative = take()? == 1;
            let mut big = || -> Option<BigUint> {
                let len = take()?;
                let d: Vec<u64> = (0..len).map(|_| take()).collect::<Option<_>>()?;
                Some(BigUint::from_slice(
                    &d.iter().flat_map(|x| [*x as u32, (*x >> 32) as u32]).collect::<Vec<_>>(),
                ))
            };
            let num = big()?;
            let den = big()?;
            if den.is_zero() {
                return None;
            }
            let sign = if negative { Sign::Minus } else { Sign::Plus };
            p.add_term(m, BigRational::new(BigInt::from_biguint(sign, num), BigInt::from(den)));
        }
        basis.push(p);
    }
    src.is_empty().then_some(basis)
}

/// Learner state after a prefix of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerState {
    pub n: usize,
    pub order: MonomialOrder,
    pub basis: Vec<Polynomial>,
    pub tag: Ordinal,
    pub emitted: TaggedRun,
}

impl GroebnerState {
    /// Starts at the zero ideal with tag `ω^n`. With `bound_inclusive` the
    /// run bound is `ω^n` itself; otherwise `ω^n + 1`.
    pub fn new(n: usize, order: MonomialOrder, bound_inclusive: bool) -> GroebnerState {
        let top = omega_pow(Ordinal::natural(n as u64), 1);
        let bound = if bound_inclusive { top.clone() } else { top.natural_sum(&Ordinal::natural(1)) };
        GroebnerState { n, order, basis: Vec::new(), tag: top, emitted: TaggedRun::new(bound, bound_inclusive) }
    }

    pub fn guess(&self) -> Guess {
        encode_basis(self.n, &self.basis, &self.order)
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis.iter().map(|g| g.leading_monomial(&self.order).unwrap().clone()).collect()
    }
}

/// One learner transition with the default rank.
pub fn learner_step(state: GroebnerState, p: &Polynomial) -> Result<(GroebnerState, Step), GroebnerError> {
    learner_step_with(state, p, &ClosedFormRank)
}

pub fn learner_step_with(
    mut state: GroebnerState,
    p: &Polynomial,
    rank: &dyn StaircaseRank,
) -> Result<(GroebnerState, Step), GroebnerError> {
    if p.nvars() != state.n {
        return Err(GroebnerError::VariableCountMismatch { expected: state.n, got: p.nvars() });
    }
    if !reduce(p, &state.basis, &state.order).is_zero() {
        let mut gens = state.basis.clone();
        gens.push(p.clone());
        state.basis = buchberger(&gens, &state.order);
        let tag = rank.rank(&state.leading_monomials(), state.n);
        if tag >= state.tag {
            return Err(GroebnerError::TagContract { old: state.tag, new: tag });
        }
        state.tag = tag;
    }
    let step = Step { tag: state.tag.clone(), guess: state.guess() };
    state.emitted.steps.push(step.clone());
    Ok((state, step))
}

/// A finite prefix of an enumeration of an ideal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealEnumeration {
    pub n: usize,
    pub items: Vec<Polynomial>,
}

impl IdealEnumeration {
    pub fn new(n: usize, items: Vec<Polynomial>) -> Result<IdealEnumeration, GroebnerError> {
        match items.iter().find(|p| p.nvars() != n) {
            Some(p) => Err(GroebnerError::VariableCountMismatch { expected: n, got: p.nvars() }),
            None => Ok(IdealEnumeration { n, items }),
        }
    }

    /// One polynomial per line; blank lines are skipped. The variable count
    /// defaults to the largest index used (at least 1).
    pub fn parse(text: &str, n: Option<usize>) -> Result<IdealEnumeration, GroebnerError> {
        let lines: Vec<(usize, &str)> =
            text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty()).collect();
        let n = match n {
            Some(n) => n,
            None => {
                let mut top = 1;
                for &(line, l) in &lines {
                    top = top.max(max_variable(l).map_err(|e| e.at_line(line))?);
                }
                top
            }
        };
        let items = lines
            .into_iter()
            .map(|(line, l)| parse_polynomial(l, n).map_err(|e| e.at_line(line)))
            .collect::<Result<_, _>>()?;
        Ok(IdealEnumeration { n, items })
    }
}

impl fmt::Display for IdealEnumeration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.items {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerOutcome {
    pub run: TaggedRun,
    pub basis: Vec<Polynomial>,
}

impl LearnerOutcome {
    /// Tags at the steps where the basis changes, starting from the empty
    /// basis of the zero ideal.
    pub fn change_point_tags(&self, n: usize, order: &MonomialOrder) -> Vec<Ordinal> {
        let mut prev = encode_basis(n, &[], order);
        let mut out = Vec::new();
        for s in &self.run.steps {
            if s.guess != prev {
                out.push(s.tag.clone());
                prev = s.guess.clone();
            }
        }
        out
    }
}

pub fn run_learner(
    e: &IdealEnumeration,
    order: &MonomialOrder,
    bound_inclusive: bool,
) -> Result<LearnerOutcome, GroebnerError> {
    run_learner_with(e, order, bound_inclusive, &ClosedFormRank)
}

pub fn run_learner_with(
    e: &IdealEnumeration,
    order: &MonomialOrder,
    bound_inclusive: bool,
    rank: &dyn StaircaseRank,
) -> Result<LearnerOutcome, GroebnerError> {
    let mut state = GroebnerState::new(e.n, order.clone(), bound_inclusive);
    for p in &e.items {
        state = learner_step_with(state, p, rank)?.0;
    }
    Ok(LearnerOutcome { run: state.emitted, basis: state.basis })
}

/// Learner on the disjoint union of the polynomial rings over all `n`: the
/// first item fixes `n`, and tags live below `ω^ω`.
pub fn run_union_learner(items: &[Polynomial], order: &MonomialOrder) -> Result<LearnerOutcome, GroebnerError> {
    let first = items.first().ok_or(GroebnerError::EmptyEnumeration)?;
    let e = IdealEnumeration::new(first.nvars(), items.to_vec())?;
    let mut out = run_learner(&e, order, false)?;
    out.run.bound = omega_pow(Ordinal::omega(), 1);
    Ok(out)
}

/// An enumeration on which the learner's change-point tags are exactly
/// `targets`, built from monomials.
pub fn adversary(targets: &[Ordinal], n: usize) -> Result<IdealEnumeration, GroebnerError> {
    validate_strictly_decreasing(targets).map_err(GroebnerError::NotDecreasing)?;
    let top = omega_pow(Ordinal::natural(n as u64), 1);
    if let Some(t) = targets.iter().find(|t| **t >= top) {
        return Err(GroebnerError::UnrealizableTag(t.clone()));
    }
    let items = match n {
        1 => targets
            .iter()
            .map(|t| t.as_natural().map(|d| Polynomial::monomial(vec![d as u32])))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| GroebnerError::UnrealizableTag(targets[0].clone()))?,
        2 => adversary_plane(targets)?,
        _ => return Err(GroebnerError::AdversaryArity(n)),
    };
    if items.is_empty() {
        return Ok(IdealEnumeration { n, items: vec![Polynomial::zero(n)] });
    }
    Ok(IdealEnumeration { n, items })
}

const ADVERSARY_BUDGET: usize = 200_000;

fn split_plane_tag(t: &Ordinal) -> (u64, u64) {
    let mut l = 0;
    let mut m = 0;
    for term in t.terms() {
        match term.exponent.as_natural() {
            Some(1) => l = term.coefficient,
            _ => m = term.coefficient,
        }
    }
    (l, m)
}

/// Depth-first search for monomials whose successive staircase tags hit
/// the targets exactly. Candidates stay inside a box large enough to
/// realize every target.
fn adversary_plane(targets: &[Ordinal]) -> Result<Vec<Polynomial>, GroebnerError> {
    let side = targets.iter().map(split_plane_tag).map(|(l, m)| l + m).max().unwrap_or(0) as u32 + 1;
    struct Search<'a> {
        targets: &'a [Ordinal],
        side: u32,
        nodes: usize,
        deepest: usize,
    }
    impl Search<'_> {
        fn go(&mut self, ideal: &mut Vec<Monomial>, k: usize) -> bool {
            self.deepest = self.deepest.max(k);
            if k == self.targets.len() {
                return true;
            }
            for a in 0..=self.side {
                for b in 0..=self.side {
                    if self.nodes >= ADVERSARY_BUDGET {
                        return false;
                    }
                    let m = vec![a, b];
                    if ideal.iter().any(|g| divides(g, &m)) {
                        continue;
                    }
                    self.nodes += 1;
                    ideal.push(m);
                    if staircase_tag(ideal, 2) == self.targets[k] && self.go(ideal, k + 1) {
                        return true;
                    }
                    ideal.pop();
                }
            }
            false
        }
    }
    let mut s = Search { targets, side, nodes: 0, deepest: 0 };
    let mut ideal = Vec::new();
    if s.go(&mut ideal, 0) {
        Ok(ideal.into_iter().map(Polynomial::monomial).collect())
    } else {
        Err(GroebnerError::UnrealizableTag(targets[s.deepest.min(targets.len() - 1)].clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyParseError {
    pub column: usize,
    pub msg: String,
}

impl PolyParseError {
    fn at_line(self, line: usize) -> GroebnerError {
        GroebnerError::Parse { line, column: self.column, msg: self.msg }
    }
}

impl fmt::Display for PolyParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.msg)
    }
}

impl std::error::Error for PolyParseError {}

fn max_variable(s: &str) -> Result<usize, PolyParseError> {
    let mut top = 0;
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            // bare `x` counts as `x1`
            let k: usize = if j == start { 1 } else { s[start..j].parse().unwrap_or(usize::MAX) };
            top = top.max(k);
            i = j;
        } else {
            i += 1;
        }
    }
    Ok(top)
}

/// Parses `3/4*x1^2*x2 - x2 + 1/2` style input over `x1..xn`. With one
/// variable `x` may stand for `x1`.
pub fn parse_polynomial(s: &str, n: usize) -> Result<Polynomial, PolyParseError> {
    let mut p = PolyParser { s: s.as_bytes(), pos: 0, n };
    let out = p.poly()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
}

impl PolyParser<'_> {
    fn err(&self, msg: &str) -> PolyParseError {
        PolyParseError { column: self.pos + 1, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> Result<BigUint, PolyParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    fn small(&mut self, what: &str) -> Result<u32, PolyParseError> {
        let at = self.pos;
        u32::try_from(self.digits()?).map_err(|_| PolyParseError { column: at + 1, msg: format!("{what} too large") })
    }

    fn poly(&mut self) -> Result<Polynomial, PolyParseError> {
        let mut out = Polynomial::zero(self.n);
        let mut negative = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negative = true;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            let (m, c) = self.term()?;
            out.add_term(m, if negative { -c } else { c });
            match self.peek() {
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                _ => return Ok(out),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<(Monomial, BigRational), PolyParseError> {
        let mut m = vec![0u32; self.n];
        let mut c = BigRational::one();
        loop {
            match self.peek() {
                Some(b'x') => {
                    self.pos += 1;
                    let at = self.pos;
                    // a bare `x` is the only variable of a univariate ring
                    let bare = !self.peek().is_some_and(|b| b.is_ascii_digit());
                    if bare && self.n != 1 {
                        return Err(self.err("bare `x` is only allowed with one variable"));
                    }
                    let k = if bare { 1 } else { self.small("variable index")? as usize };
                    if k == 0 || k > self.n {
                        return Err(PolyParseError {
                            column: at + 1,
                            msg: format!("variable x{k} outside x1..x{}", self.n),
                        });
                    }
                    let e = if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.small("exponent")?
                    } else {
                        1
                    };
                    m[k - 1] = m[k - 1].checked_add(e).ok_or_else(|| self.err("exponent too large"))?;
                }
                Some(b) if b.is_ascii_digit() => {
                    let num = self.digits()?;
                    let den = if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let at = self.pos;
                        let d = self.digits()?;
                        if d.is_zero() {
                            return Err(PolyParseError { column: at + 1, msg: "zero denominator".into() });
                        }
                        d
                    } else {
                        BigUint::one()
                    };
                    c *= BigRational::new(BigInt::from(num), BigInt::from(den));
                }
                _ => return Err(self.err("expected a coefficient or a variable")),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok((m, c));
            }
        }
    }
}

impl fmt::Display for Polynomial {
    /// Terms from the largest exponent vector down, e.g. `x1^2 - 3/4*x2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (i, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let a = c.abs();
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| if e == 1 { format!("x{}", k + 1) } else { format!("x{}^{e}", k + 1) })
                .collect();
            let coef = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
            match (vars.is_empty(), a.is_one()) {
                (true, _) => f.write_str(&coef)?,
                (false, true) => f.write_str(&vars.join("*"))?,
                (false, false) => write!(f, "{coef}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

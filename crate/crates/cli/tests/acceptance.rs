//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any
//! criterion fails.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mindchange::dst::cb_chain;
use mindchange::groebner::{
    adversary, buchberger, run_learner, staircase_tag, IdealEnumeration, Monomial, MonomialOrder, Polynomial,
};
use mindchange::ordinal::{omega_pow, validate_strictly_decreasing, Ordinal};
use mindchange::runs::{
    decode_run, embed, encode_run, flatten, join_decode, join_encode, meet_encode, meet_limit, validate_run, Guess,
    PlainRun, RunError, TaggedRun,
};
use mindchange::space::{discrete, enumerate_spaces, sierpinski, FiniteSpace, PointSet};
use mindchange_cli::sweep::{run_sweep, SweepConfig, CB, DIFF_HIERARCHY, LEVEL_MATCH, LEVEL_SIZE, MACHINES};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const CORPUS_POINTS: usize = 4;
const POSET_COUNTS: [usize; 4] = [1, 3, 19, 219];
const LEVEL_BUDGET: Duration = Duration::from_secs(60);
const LEVEL_JOBS: usize = 4;
const ALPHAS: [usize; 4] = [1, 2, 3, 4];

const UNIVARIATE_RUNS: usize = 200;
const UNIVARIATE_MAX_DEGREE: u32 = 8;
const UNIVARIATE_MAX_ITEMS: usize = 12;
const BIVARIATE_RUNS: usize = 100;
const BIVARIATE_MAX_DEGREE: u32 = 6;
const BIVARIATE_MAX_ITEMS: usize = 10;
const ADVERSARY_ROUND_TRIPS: usize = 20;

const JOIN_RUNS: usize = 10_000;
const MEET_TUPLES: usize = 1_000;
const FLATTEN_RUNS: usize = 1_000;
const EMBED_RUNS: usize = 1_000;
const ORDINAL_CASES: usize = 10_000;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, k: usize, ok: bool, what: &str, detail: String) {
        println!("{} [{k}] {what}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.failed += !ok as usize;
    }
}

fn codomains() -> Vec<(String, Arc<FiniteSpace>)> {
    vec![
        ("2".into(), Arc::new(discrete(2))),
        ("S".into(), Arc::new(sierpinski())),
        ("3".into(), Arc::new(discrete(3))),
    ]
}

fn sweep_config(checks: &[&'static str], codomains: Vec<(String, Arc<FiniteSpace>)>, jobs: usize) -> SweepConfig {
    SweepConfig {
        max_points: CORPUS_POINTS,
        codomains,
        alphas: ALPHAS.to_vec(),
        checks: checks.iter().copied().collect(),
        jobs,
        horizon: None,
        seed: SEED,
    }
}

/// Maps from every corpus space into codomains of the given sizes.
fn expected_maps(sizes: &[usize]) -> usize {
    (1..=CORPUS_POINTS)
        .map(|n| POSET_COUNTS[n - 1] * sizes.iter().map(|k| k.pow(n as u32)).sum::<usize>())
        .sum()
}

fn corpus_criteria(r: &mut Report) {
    let counts: Vec<usize> = (1..=CORPUS_POINTS).map(|n| enumerate_spaces(n).unwrap().count()).collect();
    let corpus_ok = counts == POSET_COUNTS;

    let started = Instant::now();
    let level = run_sweep(&sweep_config(&[LEVEL_MATCH], codomains(), LEVEL_JOBS)).unwrap();
    let took = started.elapsed();
    let maps = expected_maps(&[2, 2, 3]);
    r.line(
        1,
        corpus_ok && level.failures.is_empty() && level.maps == maps && took <= LEVEL_BUDGET,
        "level equals brute-force piecewise level",
        format!(
            "{} spaces {:?}, {} maps into 2/S/3, {} counterexamples, {:.2}s at jobs {LEVEL_JOBS} (budget {}s)",
            level.spaces,
            counts,
            level.maps,
            level.failures.len(),
            took.as_secs_f64(),
            LEVEL_BUDGET.as_secs()
        ),
    );

    let diff = run_sweep(&sweep_config(&[DIFF_HIERARCHY], vec![("2".into(), Arc::new(discrete(2)))], 1)).unwrap();
    let checks = diff.passed.get(DIFF_HIERARCHY).copied().unwrap_or(0) as usize;
    r.line(
        2,
        diff.failures.is_empty() && checks == expected_maps(&[2]) * ALPHAS.len(),
        "level bound iff both preimages in the difference hierarchy",
        format!("{checks} (map, alpha) pairs for alpha in {ALPHAS:?}, {} counterexamples", diff.failures.len()),
    );

    let rest = run_sweep(&sweep_config(&[MACHINES, LEVEL_SIZE, CB], codomains(), LEVEL_JOBS)).unwrap();
    let machines = rest.passed.get(MACHINES).copied().unwrap_or(0) as usize;
    r.line(
        3,
        rest.failures_for(MACHINES) == 0 && machines == maps,
        "counter machine soundness on every canonical name",
        format!("{machines} maps simulated, {} failures", rest.failures_for(MACHINES)),
    );
    let sized = rest.passed.get(LEVEL_SIZE).copied().unwrap_or(0) as usize;
    r.line(
        4,
        rest.failures_for(LEVEL_SIZE) == 0 && sized == maps,
        "level at most the number of points",
        format!("{sized} maps, {} failures", rest.failures_for(LEVEL_SIZE)),
    );

    // rank by iterating the limit-point operator straight from the opens
    let mut rank_mismatch = 0;
    let mut spaces = 0;
    for n in 1..=CORPUS_POINTS {
        for s in enumerate_spaces(n).unwrap() {
            spaces += 1;
            let mut cur = s.points();
            let mut rank = 0;
            loop {
                let next = PointSet::from_points(cur.iter().filter(|&x| {
                    s.opens()
                        .iter()
                        .filter(|u| u.contains(x))
                        .all(|u| !u.intersect(cur).minus(PointSet::singleton(x)).is_empty())
                }));
                if next == cur {
                    break;
                }
                cur = next;
                rank += 1;
            }
            rank_mismatch += (rank != cb_chain(&s).rank) as usize;
        }
    }
    let runs = rest.passed.get(CB).copied().unwrap_or(0);
    r.line(
        7,
        rest.failures_for(CB) == 0 && rank_mismatch == 0 && runs > 0,
        "point identifier within the rank bound",
        format!(
            "{runs} identifier runs, {} over bound or wrong, rank oracle mismatches {rank_mismatch}/{spaces}",
            rest.failures_for(CB)
        ),
    );
}

fn q(rng: &mut ChaCha8Rng) -> BigRational {
    let num = rng.gen_range(-9i64..=9);
    let num = if num == 0 { 1 } else { num };
    BigRational::new(BigInt::from(num), BigInt::from(rng.gen_range(1i64..=4)))
}

fn random_monomial(rng: &mut ChaCha8Rng, n: usize, max_deg: u32) -> Monomial {
    let mut m = vec![0u32; n];
    let mut budget = rng.gen_range(0..=max_deg);
    for e in m.iter_mut() {
        let take = rng.gen_range(0..=budget);
        *e = take;
        budget -= take;
    }
    m.rotate_left(rng.gen_range(0..n));
    m
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32, max_terms: usize) -> Polynomial {
    let k = rng.gen_range(1..=max_terms);
    Polynomial::from_terms(n, (0..k).map(|_| (random_monomial(rng, n, max_deg), q(rng))).collect::<Vec<_>>())
}

/// Items are zero, unrelated, or multiples of a hidden common factor, so
/// the ideals are often proper.
fn random_enumeration(rng: &mut ChaCha8Rng, n: usize, max_deg: u32, max_items: usize) -> IdealEnumeration {
    let hidden_deg = rng.gen_range(0..=max_deg / 2);
    let hidden = random_poly(rng, n, hidden_deg, 3);
    let len = rng.gen_range(1..=max_items);
    let items = (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0 => Polynomial::zero(n),
            1 | 2 => random_poly(rng, n, max_deg, 3),
            _ => {
                let hd = hidden.total_degree().unwrap_or(0) as u32;
                hidden.mul(&random_poly(rng, n, max_deg.saturating_sub(hd), 2))
            }
        })
        .collect();
    IdealEnumeration::new(n, items).unwrap()
}

fn dense(p: &Polynomial) -> Vec<BigRational> {
    let mut v = vec![BigRational::from_integer(0.into()); p.total_degree().unwrap_or(0) as usize + 1];
    for (m, c) in p.terms() {
        v[m[0] as usize] = c.clone();
    }
    trimmed(v)
}

fn trimmed(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().is_some_and(|c| *c == BigRational::from_integer(0.into())) {
        v.pop();
    }
    v
}

/// Euclid on dense coefficient vectors; the result is monic, empty for 0.
fn gcd(a: Vec<BigRational>, b: Vec<BigRational>) -> Vec<BigRational> {
    let (mut a, mut b) = (trimmed(a), trimmed(b));
    while !b.is_empty() {
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let f = a.last().unwrap() / b.last().unwrap();
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &f * c;
            }
            a = trimmed(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(lead) = a.last().cloned() {
        a.iter_mut().for_each(|c| *c /= &lead);
    }
    a
}

fn univariate_criterion(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let order = MonomialOrder::default();
    let (mut oracle_ok, mut tags_ok, mut emissions) = (0, 0, 0);
    for _ in 0..UNIVARIATE_RUNS {
        let e = random_enumeration(&mut rng, 1, UNIVARIATE_MAX_DEGREE, UNIVARIATE_MAX_ITEMS);
        let out = run_learner(&e, &order, true).unwrap();
        oracle_ok += (out.basis == buchberger(&e.items, &order)) as usize;
        let mut g = Vec::new();
        let mut exact = validate_run(&out.run).is_valid();
        for (p, step) in e.items.iter().zip(&out.run.steps) {
            g = gcd(g, dense(p));
            if !g.is_empty() {
                emissions += 1;
                exact &= step.tag == Ordinal::natural(g.len() as u64 - 1);
            }
        }
        tags_ok += exact as usize;
    }
    r.line(
        5,
        oracle_ok == UNIVARIATE_RUNS && tags_ok == UNIVARIATE_RUNS,
        "one-variable learner",
        format!(
            "seed {}, oracle match {oracle_ok}/{UNIVARIATE_RUNS}, gcd-degree tags exact in {tags_ok}/{UNIVARIATE_RUNS} runs ({emissions} emissions)",
            SEED ^ 5
        ),
    );
}

/// Tags of a random walk through monomial ideals in two variables, which
/// are realizable by construction.
fn random_targets(rng: &mut ChaCha8Rng) -> Vec<Ordinal> {
    let mut ideal: Vec<Monomial> = Vec::new();
    let mut out = Vec::new();
    let steps = rng.gen_range(1..=6);
    for _ in 0..steps {
        let m = vec![rng.gen_range(0..5), rng.gen_range(0..5)];
        if ideal.iter().any(|g| g[0] <= m[0] && g[1] <= m[1]) {
            continue;
        }
        ideal.push(m);
        out.push(staircase_tag(&ideal, 2));
    }
    out
}

fn bivariate_criterion(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let order = MonomialOrder::default();
    let omega2 = omega_pow(Ordinal::natural(2), 1);
    let (mut oracle_ok, mut descent_ok, mut proper) = (0, 0, 0);
    for _ in 0..BIVARIATE_RUNS {
        let e = random_enumeration(&mut rng, 2, BIVARIATE_MAX_DEGREE, BIVARIATE_MAX_ITEMS);
        let out = run_learner(&e, &order, true).unwrap();
        proper += !out.basis.iter().any(|g| g.total_degree() == Some(0)) as usize;
        oracle_ok += (out.basis == buchberger(&e.items, &order)) as usize;
        let tags = out.change_point_tags(2, &order);
        descent_ok += (validate_run(&out.run).is_valid()
            && validate_strictly_decreasing(&tags).is_ok()
            && tags.iter().all(|t| *t < omega2)) as usize;
    }
    let mut trips = 0;
    let mut targets_seen = Vec::new();
    for _ in 0..ADVERSARY_ROUND_TRIPS {
        let targets = random_targets(&mut rng);
        let ok = adversary(&targets, 2)
            .and_then(|e| run_learner(&e, &order, true))
            .map(|out| out.change_point_tags(2, &order) == targets)
            .unwrap_or(false);
        trips += ok as usize;
        targets_seen.push(targets.len());
    }
    r.line(
        6,
        oracle_ok == BIVARIATE_RUNS && descent_ok == BIVARIATE_RUNS && trips == ADVERSARY_ROUND_TRIPS,
        "two-variable learner and adversary",
        format!(
            "seed {}, oracle match {oracle_ok}/{BIVARIATE_RUNS} ({proper} proper ideals), strict descent below w^2 {descent_ok}/{BIVARIATE_RUNS}, adversary round trips {trips}/{ADVERSARY_ROUND_TRIPS} (target lengths {targets_seen:?})",
            SEED ^ 6
        ),
    );
}

/// A valid run under a natural bound, with random drops and guesses.
fn random_run(rng: &mut ChaCha8Rng) -> TaggedRun {
    let bound = rng.gen_range(1u64..10);
    let inclusive = rng.gen_bool(0.3);
    let mut tag = if inclusive { bound } else { bound - 1 };
    let mut guess = vec![rng.gen_range(0..4)];
    let mut run = TaggedRun::new(bound.into(), inclusive);
    for _ in 0..rng.gen_range(1..15) {
        if tag > 0 && rng.gen_bool(0.4) {
            tag -= rng.gen_range(1..=tag);
            guess = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..4)).collect();
        }
        run.push(tag.into(), Guess::new(guess.clone()));
    }
    run
}

fn with_limit(mut run: TaggedRun, limit: &Guess) -> TaggedRun {
    if run.limit() != Some(limit) {
        let last = run.steps.last().unwrap().tag.as_natural().unwrap();
        if last == 0 {
            // no room to change: restart one level up
            run = TaggedRun::new(run.bound.clone(), run.bound_inclusive);
            run.push(Ordinal::zero(), limit.clone());
        } else {
            run.push((last - 1).into(), limit.clone());
        }
    }
    run
}

fn run_algebra_criterion(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut join_ok = 0;
    for _ in 0..JOIN_RUNS {
        let run = random_run(&mut rng);
        let i = rng.gen_range(0..8);
        let enc = join_encode(i, &run);
        join_ok += (validate_run(&enc).is_valid() && join_decode(&enc) == Ok((i, run))) as usize;
    }

    let (mut agree_ok, mut disagree_ok) = (0, 0);
    for _ in 0..MEET_TUPLES {
        let limit = Guess::new(vec![rng.gen_range(0..4), 7]);
        let k = rng.gen_range(1..5);
        let runs: Vec<TaggedRun> = (0..k).map(|_| with_limit(random_run(&mut rng), &limit)).collect();
        agree_ok += meet_encode(&runs)
            .map(|m| validate_run(&m).is_valid() && meet_limit(&m) == Some(limit.clone()))
            .unwrap_or(false) as usize;

        let mut bad = runs.clone();
        let other = Guess::new(vec![9, 9, 9]);
        let j = rng.gen_range(0..=bad.len());
        bad.insert(j, with_limit(random_run(&mut rng), &other));
        disagree_ok += matches!(meet_encode(&bad), Err(RunError::LimitsDisagree(..))) as usize;
    }

    let mut flatten_ok = 0;
    for _ in 0..FLATTEN_RUNS {
        let inner: Vec<TaggedRun> = (0..rng.gen_range(1..5)).map(|_| random_run(&mut rng)).collect();
        let mut steps = Vec::new();
        for run in &inner {
            for _ in 0..rng.gen_range(1..4) {
                steps.push(Guess::new(encode_run(run)));
            }
        }
        let outer = PlainRun { steps };
        let blocks = outer.mind_changes() + 1;
        let cmax = inner.iter().map(|r| r.mind_changes()).max().unwrap();
        let last = decode_run(outer.limit().unwrap().payload()).unwrap();
        flatten_ok += flatten(&outer)
            .map(|f| f.limit() == last.limit() && f.mind_changes() < blocks * (cmax + 1))
            .unwrap_or(false) as usize;
    }

    let mut embed_ok = 0;
    for _ in 0..EMBED_RUNS {
        let run = random_run(&mut rng);
        let bigger = if rng.gen_bool(0.5) {
            Ordinal::natural(run.bound.as_natural().unwrap() + rng.gen_range(0..5))
        } else {
            omega_pow(Ordinal::natural(rng.gen_range(1..4)), rng.gen_range(1..4))
        };
        embed_ok += embed(&run, bigger)
            .map(|e| validate_run(&e).is_valid() && e.limit() == run.limit())
            .unwrap_or(false) as usize;
    }

    r.line(
        8,
        join_ok == JOIN_RUNS
            && agree_ok == MEET_TUPLES
            && disagree_ok == MEET_TUPLES
            && flatten_ok == FLATTEN_RUNS
            && embed_ok == EMBED_RUNS,
        "run algebra",
        format!(
            "seed {}, join {join_ok}/{JOIN_RUNS}, meet agree {agree_ok}/{MEET_TUPLES}, meet reject {disagree_ok}/{MEET_TUPLES}, flatten {flatten_ok}/{FLATTEN_RUNS}, embed {embed_ok}/{EMBED_RUNS}",
            SEED ^ 8
        ),
    );
}

/// Below `w^w`: natural exponents only.
fn random_ordinal(rng: &mut ChaCha8Rng) -> Ordinal {
    let mut exps: BTreeSet<u64> = BTreeSet::new();
    for _ in 0..rng.gen_range(0..5) {
        exps.insert(rng.gen_range(0..6));
    }
    let terms = exps.into_iter().rev().map(|e| (Ordinal::natural(e), rng.gen_range(1..5))).collect();
    Ordinal::make(terms).unwrap()
}

/// Independent comparison on (exponent, coefficient) lists.
fn oracle_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
    let flat = |o: &Ordinal| -> Vec<(u64, u64)> {
        o.terms().iter().map(|t| (t.exponent.as_natural().unwrap(), t.coefficient)).collect()
    };
    flat(a).cmp(&flat(b))
}

fn ordinal_criterion(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let mut laws = 0;
    let mut round_trips = 0;
    for _ in 0..ORDINAL_CASES {
        let (a, b, c) = (random_ordinal(&mut rng), random_ordinal(&mut rng), random_ordinal(&mut rng));
        let exactly_one = [(a < b), (a == b), (a > b)].iter().filter(|x| **x).count() == 1;
        let antisymmetric = !(a <= b && b <= a) || a == b;
        let transitive = !(a <= b && b <= c) || a <= c;
        let agrees = a.cmp(&b) == oracle_cmp(&a, &b) && b.cmp(&c) == oracle_cmp(&b, &c);
        laws += (exactly_one && antisymmetric && transitive && agrees) as usize;
        round_trips += (a.to_string().parse::<Ordinal>().ok() == Some(a.clone())) as usize;
    }
    r.line(
        9,
        laws == ORDINAL_CASES && round_trips == ORDINAL_CASES,
        "ordinal order laws and parse of format",
        format!("seed {}, order laws {laws}/{ORDINAL_CASES}, round trips {round_trips}/{ORDINAL_CASES}", SEED ^ 9),
    );
}

fn main() {
    // cargo passes harness flags such as --nocapture; none change the suite
    println!("acceptance suite, seed {SEED}");
    let mut r = Report { failed: 0 };
    corpus_criteria(&mut r);
    univariate_criterion(&mut r);
    bivariate_criterion(&mut r);
    run_algebra_criterion(&mut r);
    ordinal_criterion(&mut r);
    println!("{} criterion line(s) failed", r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}

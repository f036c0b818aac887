//! Exhaustive verification over every small space and every map out of it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use mindchange::dst::{
    cb_chain, dalpha_decomposition, is_valid_decomposition, level_chain, min_piecewise_level,
    sigma_minus1_class,
};
use mindchange::machines::{cb_identifier, cb_map, simulate_on_names};
use mindchange::runs::{validate_run, Guess};
use mindchange::space::{canonical_names, enumerate_spaces, FiniteSpace, NameConfig, PointMap, PointSet, ENUMERATION_CAP};
use rayon::prelude::*;
use serde::Serialize;

use crate::formats::SpaceFile;

pub const LEVEL_MATCH: &str = "level-equals-min-piecewise";
pub const DIFF_HIERARCHY: &str = "level-vs-difference-hierarchy";
pub const MACHINES: &str = "machine-soundness";
pub const LEVEL_SIZE: &str = "level-at-most-size";
pub const CANONICAL: &str = "canonical-decomposition-valid";
pub const CB: &str = "cb-identifier";

pub const ALL_CHECKS: [&str; 6] = [LEVEL_MATCH, DIFF_HIERARCHY, MACHINES, LEVEL_SIZE, CANONICAL, CB];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub max_points: usize,
    /// Named codomains with their spaces.
    pub codomains: Vec<(String, Arc<FiniteSpace>)>,
    pub alphas: Vec<usize>,
    pub checks: BTreeSet<&'static str>,
    pub jobs: usize,
    /// Name length; defaults per space to one more than the largest number
    /// of open neighbourhoods of a point.
    pub horizon: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub space: SpaceFile,
    pub codomain: Option<SpaceFile>,
    pub map: Option<Vec<usize>>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    pub spaces: usize,
    pub maps: usize,
    /// Passed instances per check.
    pub passed: BTreeMap<String, u64>,
    pub failures: Vec<Counterexample>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SweepReport {
    pub fn failures_for(&self, check: &str) -> usize {
        self.failures.iter().filter(|c| c.check == check).count()
    }

    fn absorb(&mut self, other: SweepReport) {
        self.spaces += other.spaces;
        self.maps += other.maps;
        for (k, v) in other.passed {
            *self.passed.entry(k).or_default() += v;
        }
        self.failures.extend(other.failures);
    }
}

fn default_horizon(s: &FiniteSpace) -> usize {
    (0..s.len()).map(|x| s.neighbourhoods(x).len()).max().unwrap_or(0) + 1
}

struct Task<'a> {
    cfg: &'a SweepConfig,
    space: Arc<FiniteSpace>,
    report: SweepReport,
}

impl Task<'_> {
    fn on(&self, check: &str) -> bool {
        self.cfg.checks.contains(check)
    }

    fn record(&mut self, check: &str, ok: bool, f: Option<&PointMap>, detail: impl FnOnce() -> String) {
        if ok {
            *self.report.passed.entry(check.to_string()).or_default() += 1;
        } else {
            self.report.failures.push(Counterexample {
                check: check.to_string(),
                space: SpaceFile::from_space(&self.space),
                codomain: f.map(|f| SpaceFile::from_space(&f.codomain)),
                map: f.map(|f| f.assignment().to_vec()),
                detail: detail(),
            });
        }
    }

    fn run(mut self) -> SweepReport {
        let s = self.space.clone();
        let horizon = self.cfg.horizon.unwrap_or_else(|| default_horizon(&s));
        let names = NameConfig { seed: self.cfg.seed, ..NameConfig::default() };
        self.report.spaces = 1;
        // difference-hierarchy classes depend only on the space
        let classes: BTreeMap<usize, BTreeSet<PointSet>> = if self.on(DIFF_HIERARCHY) {
            self.cfg.alphas.iter().map(|&a| (a, sigma_minus1_class(&s, a))).collect()
        } else {
            BTreeMap::new()
        };
        // names depend only on the space as well
        let point_names = if self.on(MACHINES) {
            match (0..s.len()).map(|x| canonical_names(&s, x, horizon, &names)).collect::<Result<Vec<_>, _>>() {
                Ok(v) => v,
                Err(e) => {
                    self.record(MACHINES, false, None, || e.to_string());
                    return self.report;
                }
            }
        } else {
            Vec::new()
        };
        for (cname, cod) in &self.cfg.codomains {
            for f in PointMap::all(s.clone(), cod.clone()) {
                self.report.maps += 1;
                let lev = level_chain(&f).level;
                if self.on(LEVEL_MATCH) {
                    let brute = min_piecewise_level(&f);
                    self.record(LEVEL_MATCH, lev == brute, Some(&f), || format!("Lev={lev}, brute-force={brute}"));
                }
                if self.on(LEVEL_SIZE) {
                    self.record(LEVEL_SIZE, lev <= s.len(), Some(&f), || format!("Lev={lev} > |X|={}", s.len()));
                }
                if self.on(CANONICAL) {
                    let ok = is_valid_decomposition(&f, &dalpha_decomposition(&f));
                    self.record(CANONICAL, ok, Some(&f), || "canonical decomposition invalid".into());
                }
                if self.on(DIFF_HIERARCHY) && cname == "2" {
                    for (&alpha, class) in &classes {
                        let both = class.contains(&f.preimage(PointSet::singleton(0)))
                            && class.contains(&f.preimage(PointSet::singleton(1)));
                        self.record(DIFF_HIERARCHY, (lev <= alpha) == both, Some(&f), || {
                            format!("alpha={alpha}: Lev={lev}, both preimages in class: {both}")
                        });
                    }
                }
                if self.on(MACHINES) {
                    let res = simulate_on_names(&f, &point_names);
                    self.record(MACHINES, res.is_ok(), Some(&f), || res.unwrap_err().to_string());
                }
            }
        }
        if self.on(CB) {
            self.check_cb(horizon, &names);
        }
        self.report
    }

    fn check_cb(&mut self, horizon: usize, config: &NameConfig) {
        let s = self.space.clone();
        let rank = cb_chain(&s).rank;
        let p = cb_map(s.clone());
        for x in 0..s.len() {
            let names = match canonical_names(&s, x, horizon, config) {
                Ok(n) => n,
                Err(e) => {
                    self.record(CB, false, None, || e.to_string());
                    continue;
                }
            };
            for name in names {
                let detail = match cb_identifier(&s, &name) {
                    Err(e) => Some(e.to_string()),
                    Ok(r) if !validate_run(&r.run).is_valid() => Some("invalid run".into()),
                    Ok(r) if r.converged_to != Guess::point(p.apply(x)) => Some(format!("wrong limit at point {x}")),
                    Ok(r) if r.run.mind_changes() > rank => {
                        Some(format!("{} mind changes above rank {rank}", r.run.mind_changes()))
                    }
                    Ok(_) => None,
                };
                let ok = detail.is_none();
                self.record(CB, ok, None, || format!("{} (name {:?})", detail.unwrap(), name.listed));
            }
        }
    }
}

/// Runs every selected check on every space with `1..=max_points` points.
/// The merged report does not depend on the number of jobs.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.max_points == 0 || cfg.max_points > ENUMERATION_CAP {
        bail!("max points must be in 1..={ENUMERATION_CAP}, got {}", cfg.max_points);
    }
    let start = Instant::now();
    let mut spaces = Vec::new();
    for n in 1..=cfg.max_points {
        spaces.extend(enumerate_spaces(n)?.map(Arc::new));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.max(1)).build()?;
    let parts: Vec<SweepReport> = pool.install(|| {
        spaces
            .into_par_iter()
            .map(|space| Task { cfg, space, report: SweepReport::default() }.run())
            .collect()
    });
    let mut report = SweepReport::default();
    for p in parts {
        report.absorb(p);
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

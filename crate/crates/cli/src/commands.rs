//! One function per verb. Each returns a text report, the same report as
//! JSON, and an exit code: 0 when every check passes, 1 on a
//! counterexample. Errors are usage or input problems.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use mindchange::dst::{
    cb_chain, dalpha_decomposition, level_chain, min_piecewise_decomposition, sigma_minus1_class,
    sigma_minus1_witness,
};
use mindchange::groebner::{adversary, buchberger, run_learner, IdealEnumeration, MonomialOrder};
use mindchange::machines::{cb_decomposition, cb_identifier, cb_map, simulate_all_with};
use mindchange::ordinal::Ordinal;
use mindchange::runs::{validate_plain_run, validate_run, PlainVerdict, RunVerdict};
use mindchange::space::{canonical_names, FiniteSpace, NameConfig, PointSet};
use serde_json::{json, Value};

use crate::formats::{read_json, show_set, write_json, AnyRun, MapFile, RunFile, SpaceFile};
use crate::sweep::{run_sweep, SweepConfig};

pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub exit: i32,
}

fn load_space(path: &Path) -> Result<Arc<FiniteSpace>> {
    let f: SpaceFile = read_json(path)?;
    Ok(Arc::new(f.to_space().with_context(|| format!("space {}", path.display()))?))
}

fn sets(s: &FiniteSpace, v: &[PointSet]) -> Vec<String> {
    v.iter().map(|a| show_set(s, *a)).collect()
}

pub fn analyze_level(space: &Path, map: &Path) -> Result<Outcome> {
    let s = load_space(space)?;
    let m: MapFile = read_json(map)?;
    let f = m.to_map(s.clone()).with_context(|| format!("map {}", map.display()))?;
    let chain = level_chain(&f);
    let d = dalpha_decomposition(&f);
    let brute = min_piecewise_decomposition(&f);
    let matched = chain.level == brute.len();
    let verdict = if matched { "MATCH" } else { "MISMATCH" };
    let mut text = format!("Lev={}, brute-force={}, {verdict}\n", chain.level, brute.len());
    text += &format!("stages: {}\n", sets(&s, &chain.stages).join(" > "));
    text += &format!("decomposition: {}\n", sets(&s, &d.opens).join(" <= "));
    text += &format!("pieces: {}\n", sets(&s, &d.pieces()).join(" "));
    Ok(Outcome {
        text,
        json: json!({
            "level": chain.level,
            "brute_force": brute.len(),
            "match": matched,
            "stages": sets(&s, &chain.stages),
            "decomposition": sets(&s, &d.opens),
            "pieces": sets(&s, &d.pieces()),
        }),
        exit: if matched { 0 } else { 1 },
    })
}

pub fn validate_run_file(path: &Path, horizon: Option<usize>) -> Result<Outcome> {
    let f: RunFile = read_json(path)?;
    Ok(match f.to_run()? {
        AnyRun::Tagged(r) => match validate_run(&r) {
            RunVerdict::Valid { limit, stabilized_at } => Outcome {
                text: format!(
                    "VALID limit={:?} stabilized at step {stabilized_at}, {} mind change(s)\n",
                    limit.payload(),
                    r.mind_changes()
                ),
                json: json!({"valid": true, "limit": limit.payload(), "stabilized_at": stabilized_at,
                             "mind_changes": r.mind_changes()}),
                exit: 0,
            },
            RunVerdict::Invalid { reason, index } => Outcome {
                text: format!("INVALID {reason} at step {index}\n"),
                json: json!({"valid": false, "reason": reason.to_string(), "step": index}),
                exit: 1,
            },
        },
        AnyRun::Plain(r) => {
            let h = horizon.unwrap_or(3);
            let (text, value, exit) = match validate_plain_run(&r, h) {
                PlainVerdict::ConvergedBy { index } => {
                    (format!("CONVERGED by step {index}"), json!({"verdict": "converged", "index": index}), 0)
                }
                PlainVerdict::ContradictionFree => {
                    ("CONTRADICTION-FREE".to_string(), json!({"verdict": "contradiction-free"}), 0)
                }
                PlainVerdict::Undecided { last_conflict } => (
                    format!("UNDECIDED last conflict at step {last_conflict}"),
                    json!({"verdict": "undecided", "last_conflict": last_conflict}),
                    1,
                ),
            };
            Outcome { text: format!("{text} (horizon {h}, {} mind change(s))\n", r.mind_changes()), json: value, exit }
        }
    })
}

pub fn learn_groebner(
    path: &Path,
    n: Option<usize>,
    order: &MonomialOrder,
    bound_inclusive: bool,
    out: Option<&Path>,
) -> Result<Outcome> {
    let text_in = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let e = IdealEnumeration::parse(&text_in, n).with_context(|| format!("parsing {}", path.display()))?;
    let res = run_learner(&e, order, bound_inclusive)?;
    let oracle = buchberger(&e.items, order);
    let matched = oracle == res.basis;
    let tags: Vec<String> = res.run.steps.iter().map(|s| s.tag.to_string()).collect();
    let changes: Vec<String> = res.change_point_tags(e.n, order).iter().map(Ordinal::to_string).collect();
    let basis: Vec<String> = res.basis.iter().map(|p| p.to_string()).collect();
    let max_tag = res.run.max_tag().map(Ordinal::to_string).unwrap_or_default();
    let verdict = if matched { "ORACLE MATCH" } else { "ORACLE MISMATCH" };
    let mut text = format!("tags: {}\n", tags.join(", "));
    text += &format!("change-point tags: {}\n", changes.join(", "));
    text += &format!("final basis: {{{}}}\n", basis.join(", "));
    text += &format!("mind changes: {}, max tag: {max_tag}\n{verdict}\n", res.run.mind_changes());
    let summary = json!({
        "n": e.n,
        "basis": basis,
        "change_point_tags": changes,
        "mind_changes": res.run.mind_changes(),
        "max_tag": max_tag,
        "oracle_match": matched,
    });
    if let Some(out) = out {
        let mut file = RunFile::from_tagged(&res.run);
        file.summary = Some(summary.clone());
        write_json(out, &file)?;
    }
    Ok(Outcome { text, json: summary, exit: if matched { 0 } else { 1 } })
}

pub fn adversary_cmd(n: usize, targets: &[String], order: &MonomialOrder, out: Option<&Path>) -> Result<Outcome> {
    let targets: Vec<Ordinal> = targets
        .iter()
        .map(|t| t.parse().with_context(|| format!("target `{t}`")))
        .collect::<Result<_>>()?;
    let e = adversary(&targets, n)?;
    let res = run_learner(&e, order, true)?;
    let got = res.change_point_tags(n, order);
    let ok = got == targets;
    if let Some(out) = out {
        std::fs::write(out, e.to_string()).with_context(|| format!("writing {}", out.display()))?;
    }
    let lines: Vec<String> = e.items.iter().map(|p| p.to_string()).collect();
    let got_s: Vec<String> = got.iter().map(Ordinal::to_string).collect();
    let text = format!(
        "{}\nchange-point tags: {}\n{}\n",
        lines.join("\n"),
        got_s.join(", "),
        if ok { "ROUND TRIP OK" } else { "ROUND TRIP MISMATCH" }
    );
    Ok(Outcome { text, json: json!({"enumeration": lines, "change_point_tags": got_s, "round_trip": ok}), exit: if ok { 0 } else { 1 } })
}

pub fn cb(space: &Path, horizon: Option<usize>, seed: u64) -> Result<Outcome> {
    let s = load_space(space)?;
    let chain = cb_chain(&s);
    let d = cb_decomposition(&s);
    let p = cb_map(s.clone());
    let h = horizon.unwrap_or_else(|| (0..s.len()).map(|x| s.neighbourhoods(x).len()).max().unwrap_or(0) + 1);
    let cfg = NameConfig { seed, ..NameConfig::default() };
    let mut text = format!("rank={}, kernel={}\n", chain.rank, show_set(&s, chain.kernel));
    text += &format!("derivatives: {}\n", sets(&s, &chain.derivatives).join(" > "));
    text += &format!("decomposition: {}\n", sets(&s, &d.opens).join(" <= "));
    let mut points = Vec::new();
    let mut failures = 0;
    for x in 0..s.len() {
        let names = canonical_names(&s, x, h, &cfg)?;
        let mut worst = 0;
        let mut sound = true;
        for name in &names {
            let r = cb_identifier(&s, name)?;
            worst = worst.max(r.run.mind_changes());
            sound &= validate_run(&r.run).is_valid()
                && r.converged_to.payload() == [p.apply(x) as u64]
                && r.run.mind_changes() <= chain.rank;
        }
        failures += !sound as usize;
        let label = &s.labels()[x];
        text += &format!(
            "  {label}: p={}, {} name(s), max mind changes {worst}, {}\n",
            p.codomain.labels()[p.apply(x)],
            names.len(),
            if sound { "ok" } else { "FAIL" }
        );
        points.push(json!({"point": label, "p": p.apply(x), "names": names.len(), "max_mind_changes": worst, "ok": sound}));
    }
    Ok(Outcome {
        text,
        json: json!({"rank": chain.rank, "kernel": show_set(&s, chain.kernel),
                     "derivatives": sets(&s, &chain.derivatives), "points": points}),
        exit: if failures == 0 { 0 } else { 1 },
    })
}

pub fn diff_hierarchy(space: &Path, alpha: usize, set: Option<&[usize]>) -> Result<Outcome> {
    let s = load_space(space)?;
    if alpha == 0 {
        bail!("alpha must be at least 1");
    }
    match set {
        Some(pts) => {
            if let Some(&x) = pts.iter().find(|&&x| x >= s.len()) {
                bail!("point index {x} out of range");
            }
            let a = PointSet::from_points(pts.iter().copied());
            let w = sigma_minus1_witness(&s, a, alpha);
            let text = match &w {
                Some(w) => format!("{} in level {alpha}: witness {}\n", show_set(&s, a), sets(&s, &w.sets).join(" <= ")),
                None => format!("{} not in level {alpha}\n", show_set(&s, a)),
            };
            Ok(Outcome {
                text,
                json: json!({"set": show_set(&s, a), "alpha": alpha, "member": w.is_some(),
                             "witness": w.map(|w| sets(&s, &w.sets))}),
                exit: 0,
            })
        }
        None => {
            let class: Vec<PointSet> = sigma_minus1_class(&s, alpha).into_iter().collect();
            let shown = sets(&s, &class);
            Ok(Outcome {
                text: format!("level {alpha}: {} set(s)\n  {}\n", class.len(), shown.join("\n  ")),
                json: json!({"alpha": alpha, "sets": shown}),
                exit: 0,
            })
        }
    }
}

pub fn simulate(space: &Path, map: &Path, horizon: Option<usize>, seed: u64) -> Result<Outcome> {
    let s = load_space(space)?;
    let m: MapFile = read_json(map)?;
    let f = m.to_map(s.clone())?;
    let h = horizon.unwrap_or_else(|| (0..s.len()).map(|x| s.neighbourhoods(x).len()).max().unwrap_or(0) + 1);
    let cfg = NameConfig { seed, ..NameConfig::default() };
    Ok(match simulate_all_with(&f, h, &cfg) {
        Ok(sum) => Outcome {
            text: format!("Lev={}, max mind changes {}, all runs sound\n", sum.level, sum.max_mind_changes()),
            json: json!({"level": sum.level, "max_mind_changes": sum.max_mind_changes(), "sound": true}),
            exit: 0,
        },
        Err(e) => Outcome { text: format!("FAIL {e}\n"), json: json!({"sound": false, "error": e.to_string()}), exit: 1 },
    })
}

pub fn sweep(cfg: &SweepConfig, replay: &Path) -> Result<Outcome> {
    let r = run_sweep(cfg)?;
    let mut text = format!(
        "seed {}, {} space(s), {} map(s), {:.1}s\n",
        cfg.seed,
        r.spaces,
        r.maps,
        r.elapsed.as_secs_f64()
    );
    for check in &cfg.checks {
        text += &format!("  {check}: {} passed, {} failed\n", r.passed.get(*check).copied().unwrap_or(0), r.failures_for(check));
    }
    let exit = if r.failures.is_empty() {
        text += "zero failures\n";
        0
    } else {
        write_json(replay, &r.failures)?;
        text += &format!("{} counterexample(s) written to {}\n", r.failures.len(), replay.display());
        1
    };
    Ok(Outcome { text, json: serde_json::to_value(&r)?, exit })
}

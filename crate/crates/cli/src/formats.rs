//! JSON file formats for spaces, maps and runs.
//!
//! ```text
//! space: {"points": ["a","b"], "opens": [[],[1],[0,1]]}
//! map:   {"map": [0,1], "codomain": "2" | "S" | "discrete:k" | "flat:k" | <space>}
//! run:   {"bound": "w+1", "bound_inclusive": true, "steps": [{"tag": "w", "guess": [0]}]}
//! ```
//!
//! A run whose steps carry no tags is a plain run; it needs no bound.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use mindchange::ordinal::Ordinal;
use mindchange::runs::{Guess, PlainRun, TaggedRun};
use mindchange::space::{discrete, flat, sierpinski, FiniteSpace, PointMap, PointSet, MAX_POINTS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub points: Vec<String>,
    pub opens: Vec<Vec<usize>>,
}

impl SpaceFile {
    pub fn from_space(s: &FiniteSpace) -> SpaceFile {
        SpaceFile {
            points: s.labels().to_vec(),
            opens: s.opens().iter().map(|u| u.iter().collect()).collect(),
        }
    }

    pub fn to_space(&self) -> Result<FiniteSpace> {
        if self.points.len() > MAX_POINTS {
            bail!("at most {MAX_POINTS} points are supported, got {}", self.points.len());
        }
        let mut opens = Vec::with_capacity(self.opens.len());
        for (i, u) in self.opens.iter().enumerate() {
            if let Some(&x) = u.iter().find(|&&x| x >= self.points.len()) {
                bail!("opens[{i}]: point index {x} out of range for {} points", self.points.len());
            }
            opens.push(PointSet::from_points(u.iter().copied()));
        }
        Ok(FiniteSpace::from_opens(self.points.clone(), &opens)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodomainSpec {
    Named(String),
    Space(SpaceFile),
}

impl CodomainSpec {
    pub fn to_space(&self) -> Result<FiniteSpace> {
        match self {
            CodomainSpec::Named(name) => named_space(name),
            CodomainSpec::Space(s) => s.to_space(),
        }
    }
}

/// `2` and `3` are discrete spaces, `S` is Sierpinski space,
/// `discrete:k` and `flat:k` the obvious families.
pub fn named_space(name: &str) -> Result<FiniteSpace> {
    let sized = |rest: &str| -> Result<usize> {
        let k: usize = rest.parse().with_context(|| format!("bad size in `{name}`"))?;
        if k == 0 || k >= MAX_POINTS {
            bail!("size out of range in `{name}`");
        }
        Ok(k)
    };
    match name {
        "2" => Ok(discrete(2)),
        "3" => Ok(discrete(3)),
        "S" => Ok(sierpinski()),
        _ => match name.split_once(':') {
            Some(("discrete", k)) => Ok(discrete(sized(k)?)),
            Some(("flat", k)) => Ok(flat(sized(k)?)),
            _ => Err(anyhow!("unknown space `{name}` (expected 2, 3, S, discrete:k or flat:k)")),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub map: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<CodomainSpec>,
}

impl MapFile {
    pub fn to_map(&self, domain: Arc<FiniteSpace>) -> Result<PointMap> {
        let codomain = match &self.codomain {
            Some(c) => c.to_space().context("codomain")?,
            None => discrete(2),
        };
        Ok(PointMap::new(domain, Arc::new(codomain), self.map.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub guess: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_inclusive: Option<bool>,
    pub steps: Vec<StepFile>,
    /// Extra data a producer attaches, e.g. the final basis; ignored on read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

pub enum AnyRun {
    Tagged(TaggedRun),
    Plain(PlainRun),
}

fn guess(i: usize, g: &[u64]) -> Result<Guess> {
    if g.is_empty() {
        bail!("steps[{i}]: empty guess");
    }
    Ok(Guess::new(g.to_vec()))
}

impl RunFile {
    pub fn from_tagged(r: &TaggedRun) -> RunFile {
        RunFile {
            bound: Some(r.bound.to_string()),
            bound_inclusive: Some(r.bound_inclusive),
            steps: r
                .steps
                .iter()
                .map(|s| StepFile { tag: Some(s.tag.to_string()), guess: s.guess.payload().to_vec() })
                .collect(),
            summary: None,
        }
    }

    pub fn from_plain(r: &PlainRun) -> RunFile {
        RunFile {
            bound: None,
            bound_inclusive: None,
            steps: r.steps.iter().map(|g| StepFile { tag: None, guess: g.payload().to_vec() }).collect(),
            summary: None,
        }
    }

    pub fn to_run(&self) -> Result<AnyRun> {
        let tagged = self.steps.iter().filter(|s| s.tag.is_some()).count();
        if tagged == 0 && self.bound.is_none() {
            let steps = self.steps.iter().enumerate().map(|(i, s)| guess(i, &s.guess)).collect::<Result<_>>()?;
            return Ok(AnyRun::Plain(PlainRun { steps }));
        }
        if tagged != self.steps.len() {
            bail!("either every step carries a tag or none does");
        }
        let bound: Ordinal = self
            .bound
            .as_deref()
            .ok_or_else(|| anyhow!("a tagged run needs a bound"))?
            .parse()
            .context("bound")?;
        let mut run = TaggedRun::new(bound, self.bound_inclusive.unwrap_or(false));
        for (i, s) in self.steps.iter().enumerate() {
            let tag: Ordinal = s.tag.as_deref().unwrap().parse().with_context(|| format!("steps[{i}].tag"))?;
            run.push(tag, guess(i, &s.guess)?);
        }
        Ok(AnyRun::Tagged(run))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// `{a,b}` using the space's labels.
pub fn show_set(s: &FiniteSpace, a: PointSet) -> String {
    let labels: Vec<&str> = a.iter().map(|x| s.labels()[x].as_str()).collect();
    format!("{{{}}}", labels.join(","))
}

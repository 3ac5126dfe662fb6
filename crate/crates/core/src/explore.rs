//! Breadth-first component exploration and its regular / simple variants.
//!
//! Starting from a root, the oldest white vertex `u` of the list scans the
//! uncoloured vertices in increasing index order. Every neighbour found is
//! coloured white; which neighbours also join the list depends on the mode:
//!
//! * `Full` lists every neighbour.
//! * `Regular` lists neighbours sharing exactly one attribute with `u`.
//! * `Simple` lists regular neighbours `g` with `S(g) ∩ H = ∅`, where `H` is
//!   the union of the sets of white list members younger than `u`, minus the
//!   attributes of list members up to and including `u`. A simple child
//!   joins the list before the next candidate is checked.
//!
//! Neighbours that are coloured but not listed are counted per set size as
//! irregular (two or more shared attributes) or complex (regular, but
//! touching `H`).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Attribute, GraphSample, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Regular,
    Simple,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Full, Mode::Regular, Mode::Simple];
}

/// How the threshold `ω(n)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OmegaRepr", into = "OmegaRepr")]
pub enum OmegaRule {
    /// `⌈ln n⌉`, at least 2.
    Log,
    /// `⌈n^(2/3)⌉`, at least 2.
    TwoThirds,
    Fixed(usize),
}

impl OmegaRule {
    pub fn omega(self, n: usize) -> usize {
        match self {
            OmegaRule::Log => ((n as f64).ln().ceil() as usize).max(2),
            OmegaRule::TwoThirds => ((n as f64).powf(2.0 / 3.0).ceil() as usize).max(2),
            OmegaRule::Fixed(k) => k,
        }
    }
}

impl FromStr for OmegaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(OmegaRule::Log),
            "twothirds" => Ok(OmegaRule::TwoThirds),
            other => other.parse::<usize>().map(OmegaRule::Fixed).map_err(|_| {
                Error::Config(format!(
                    "omega must be log, twothirds or an integer, got {other:?}"
                ))
            }),
        }
    }
}

impl fmt::Display for OmegaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaRule::Log => f.write_str("log"),
            OmegaRule::TwoThirds => f.write_str("twothirds"),
            OmegaRule::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OmegaRepr {
    Fixed(usize),
    Named(String),
}

impl TryFrom<OmegaRepr> for OmegaRule {
    type Error = Error;

    fn try_from(r: OmegaRepr) -> Result<Self> {
        match r {
            OmegaRepr::Fixed(k) => Ok(OmegaRule::Fixed(k)),
            OmegaRepr::Named(s) => s.parse(),
        }
    }
}

impl From<OmegaRule> for OmegaRepr {
    fn from(r: OmegaRule) -> Self {
        match r {
            OmegaRule::Fixed(k) => OmegaRepr::Fixed(k),
            named => OmegaRepr::Named(named.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExplorationConfig {
    pub mode: Mode,
    pub omega: usize,
    /// Stop as soon as the list holds `omega` vertices.
    pub stop_at_omega: bool,
    /// Stop once this many vertices are coloured.
    pub colored_budget: Option<usize>,
}

impl ExplorationConfig {
    /// Default stop rule: list reaches `omega` or `3 omega` vertices are
    /// coloured, whichever comes first.
    pub fn new(mode: Mode, omega: usize) -> Self {
        ExplorationConfig {
            mode,
            omega,
            stop_at_omega: true,
            colored_budget: Some(3 * omega),
        }
    }

    /// Explores until the component (or the mode's tree) is exhausted.
    pub fn exhaustive(mode: Mode, omega: usize) -> Self {
        ExplorationConfig {
            mode,
            omega,
            stop_at_omega: false,
            colored_budget: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.omega < 2 || self.omega > n {
            return Err(Error::InvalidExploration(format!(
                "omega = {} must lie in [2, n = {n}]",
                self.omega
            )));
        }
        if self.colored_budget.is_some_and(|b| b < 1) {
            return Err(Error::InvalidExploration(
                "colored budget must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn stop_rule(&self) -> String {
        let mut parts = Vec::new();
        if self.stop_at_omega {
            parts.push(format!("list>={}", self.omega));
        }
        if let Some(b) = self.colored_budget {
            parts.push(format!("colored>={b}"));
        }
        if parts.is_empty() {
            "exhaustive".into()
        } else {
            parts.join(" or ")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No white vertex left to scan.
    Exhausted,
    ReachedOmega,
    ColoredBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationRecord {
    pub root: Vertex,
    /// Listed vertices in discovery order, starting with the root.
    pub list: Vec<Vertex>,
    /// Union of the sets of listed vertices, sorted.
    pub used_attributes: Vec<Attribute>,
    /// Irregular children per set size.
    pub irregular_count: BTreeMap<usize, usize>,
    /// Complex children per set size (simple mode only).
    pub complex_count: BTreeMap<usize, usize>,
    pub colored: usize,
    pub stop: StopReason,
    pub stopped: bool,
    pub is_big: bool,
}

/// Reusable per-worker scratch; one instance per thread.
#[derive(Debug, Clone)]
pub struct Explorer {
    epoch: u32,
    colored: Vec<u32>,
    in_scanned: Vec<u32>,
    white_count: Vec<u32>,
    touched: Vec<Attribute>,
    shared: Vec<u32>,
    candidates: Vec<Vertex>,
}

impl Explorer {
    pub fn new(g: &GraphSample) -> Self {
        Explorer {
            epoch: 0,
            colored: vec![0; g.n()],
            in_scanned: vec![0; g.m()],
            white_count: vec![0; g.m()],
            touched: Vec::new(),
            shared: vec![0; g.n()],
            candidates: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        if self.epoch == u32::MAX {
            self.colored.fill(0);
            self.in_scanned.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }

    fn push_white(&mut self, g: &GraphSample, v: usize) {
        for &w in g.set(v) {
            if self.white_count[w as usize] == 0 {
                self.touched.push(w);
            }
            self.white_count[w as usize] += 1;
        }
    }

    pub fn explore(
        &mut self,
        g: &GraphSample,
        root: usize,
        cfg: &ExplorationConfig,
    ) -> ExplorationRecord {
        let epoch = self.next_epoch();
        let simple = cfg.mode == Mode::Simple;
        let mut list: Vec<Vertex> = vec![root as Vertex];
        let mut irregular_count = BTreeMap::new();
        let mut complex_count = BTreeMap::new();
        self.colored[root] = epoch;
        let mut colored = 1usize;
        if simple {
            self.push_white(g, root);
        }

        let mut head = 0;
        let stop = 'outer: loop {
            let Some(&u) = list.get(head) else {
                break StopReason::Exhausted;
            };
            head += 1;
            let u = u as usize;
            for &w in g.set(u) {
                self.in_scanned[w as usize] = epoch;
                if simple {
                    self.white_count[w as usize] -= 1;
                }
            }

            self.candidates.clear();
            for &w in g.set(u) {
                for &c in g.holders(w as usize) {
                    let c = c as usize;
                    if c != u && self.colored[c] != epoch {
                        if self.shared[c] == 0 {
                            self.candidates.push(c as Vertex);
                        }
                        self.shared[c] += 1;
                    }
                }
            }
            self.candidates.sort_unstable();

            let mut reason = None;
            for idx in 0..self.candidates.len() {
                let c = self.candidates[idx] as usize;
                let shared = std::mem::take(&mut self.shared[c]);
                if reason.is_some() {
                    continue;
                }
                self.colored[c] = epoch;
                colored += 1;
                let size = g.set(c).len();
                let listed = match cfg.mode {
                    Mode::Full => {
                        if shared >= 2 {
                            *irregular_count.entry(size).or_insert(0) += 1;
                        }
                        true
                    }
                    Mode::Regular | Mode::Simple if shared >= 2 => {
                        *irregular_count.entry(size).or_insert(0) += 1;
                        false
                    }
                    Mode::Regular => true,
                    Mode::Simple => {
                        let touches_h = g.set(c).iter().any(|&w| {
                            self.in_scanned[w as usize] != epoch && self.white_count[w as usize] > 0
                        });
                        if touches_h {
                            *complex_count.entry(size).or_insert(0) += 1;
                        }
                        !touches_h
                    }
                };
                if listed {
                    list.push(c as Vertex);
                    if simple {
                        self.push_white(g, c);
                    }
                }
                if cfg.stop_at_omega && list.len() >= cfg.omega {
                    reason = Some(StopReason::ReachedOmega);
                } else if cfg.colored_budget.is_some_and(|b| colored >= b) {
                    reason = Some(StopReason::ColoredBudget);
                }
            }
            if let Some(r) = reason {
                break 'outer r;
            }
        };

        for w in self.touched.drain(..) {
            self.white_count[w as usize] = 0;
        }

        let mut used_attributes: Vec<Attribute> = list
            .iter()
            .flat_map(|&v| g.set(v as usize))
            .copied()
            .collect();
        used_attributes.sort_unstable();
        used_attributes.dedup();
        let is_big = list.len() >= cfg.omega;
        ExplorationRecord {
            root: root as Vertex,
            list,
            used_attributes,
            irregular_count,
            complex_count,
            colored,
            stop,
            stopped: stop != StopReason::Exhausted,
            is_big,
        }
    }
}

/// One-off exploration with fresh scratch.
pub fn explore_component(
    g: &GraphSample,
    v: usize,
    cfg: &ExplorationConfig,
) -> Result<ExplorationRecord> {
    cfg.validate(g.n())?;
    if v >= g.n() {
        return Err(Error::InvalidExploration(format!(
            "vertex {v} out of range"
        )));
    }
    Ok(Explorer::new(g).explore(g, v, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BigVertexCensus {
    pub omega: usize,
    pub stop_rule: String,
    pub b_full: usize,
    pub b_regular: usize,
    pub b_simple: usize,
    /// Roots whose full exploration met an irregular edge before stopping.
    pub irregular_roots: usize,
    #[serde(skip)]
    pub big_full: Vec<bool>,
    #[serde(skip)]
    pub big_regular: Vec<bool>,
    #[serde(skip)]
    pub big_simple: Vec<bool>,
}

impl BigVertexCensus {
    /// `vertex,big_full,big_regular,big_simple` with 0/1 flags.
    pub fn write_flags_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertex,big_full,big_regular,big_simple")?;
        for v in 0..self.big_full.len() {
            writeln!(
                out,
                "{v},{},{},{}",
                self.big_full[v] as u8, self.big_regular[v] as u8, self.big_simple[v] as u8
            )?;
        }
        out.flush()
    }
}

/// Explores from every vertex in all three modes, each with fresh colouring.
/// `colored_budget` of `None` disables the coloured-vertex budget.
pub fn big_vertex_census(
    g: &GraphSample,
    omega: usize,
    colored_budget: Option<usize>,
) -> Result<BigVertexCensus> {
    let configs = Mode::ALL.map(|mode| ExplorationConfig {
        colored_budget,
        ..ExplorationConfig::new(mode, omega)
    });
    for cfg in &configs {
        cfg.validate(g.n())?;
    }
    let flags: Vec<([bool; 3], bool)> = (0..g.n())
        .into_par_iter()
        .map_init(
            || Explorer::new(g),
            |ex, v| {
                let full = ex.explore(g, v, &configs[0]);
                let regular = ex.explore(g, v, &configs[1]);
                let simple = ex.explore(g, v, &configs[2]);
                (
                    [full.is_big, regular.is_big, simple.is_big],
                    !full.irregular_count.is_empty(),
                )
            },
        )
        .collect();
    let column = |i: usize| flags.iter().map(|(f, _)| f[i]).collect::<Vec<_>>();
    let (big_full, big_regular, big_simple) = (column(0), column(1), column(2));
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
    Ok(BigVertexCensus {
        omega,
        stop_rule: configs[0].stop_rule(),
        b_full: count(&big_full),
        b_regular: count(&big_regular),
        b_simple: count(&big_simple),
        irregular_roots: flags.iter().filter(|(_, irr)| *irr).count(),
        big_full,
        big_regular,
        big_simple,
    })
}

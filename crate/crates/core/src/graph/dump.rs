//! Plain-text graph dump used for cross-implementation fixtures.
//!
//! ```text
//! {"n":3,"m":4,"seed":7}
//! 0: 1 3
//! 1:
//! 2: 0
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Attribute, GraphParams, GraphSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

pub fn write_dump<W: Write>(g: &GraphSample, mut out: W) -> std::io::Result<()> {
    let header = DumpHeader {
        n: g.n(),
        m: g.m(),
        seed: g.seed,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string(&header).expect("header serializes")
    )?;
    for (v, set) in g.sets().enumerate() {
        write!(out, "{v}:")?;
        for w in set {
            write!(out, " {w}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Reads a dump back. The size bound of the result is the largest set seen.
pub fn read_dump<R: BufRead>(input: R) -> Result<GraphSample> {
    let mut lines = input.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Dump("empty input".into()))?
        .map_err(|e| Error::Dump(e.to_string()))?;
    let header: DumpHeader =
        serde_json::from_str(&header_line).map_err(|e| Error::Dump(format!("header: {e}")))?;
    let mut sets: Vec<Vec<Attribute>> = Vec::with_capacity(header.n);
    for (expected, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Dump(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::Dump(format!("missing ':' in {line:?}")))?;
        if id.trim().parse::<usize>().ok() != Some(expected) {
            return Err(Error::Dump(format!(
                "expected vertex {expected}, got {id:?}"
            )));
        }
        let set = rest
            .split_whitespace()
            .map(|w| {
                w.parse::<Attribute>()
                    .map_err(|e| Error::Dump(format!("{w:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    let size_bound = sets.iter().map(Vec::len).max().unwrap_or(0);
    GraphSample::from_sets(
        GraphParams::new(header.n, header.m)?,
        header.seed,
        size_bound,
        sets,
    )
}

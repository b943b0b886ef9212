//! Measures the output and work blowup of MEF on `combineAll`.

use std::time::{Duration, Instant};

use serde_json::json;

use crate::dsl::{catalog, Evaluator};
use crate::enforce::mef;
use crate::error::{Error, Result};
use crate::labeled::{to_input, LabeledSet};
use crate::lattice::PrincipalUniverse;

pub const MAX_BLOWUP_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupRow {
    pub n: usize,
    pub output_size: usize,
    pub sub_runs: usize,
    pub elapsed: Duration,
}

impl BlowupRow {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "output_size": self.output_size,
            "sub_runs": self.sub_runs,
            "wall_time_us": self.elapsed.as_micros() as u64,
        })
    }
}

/// Runs `MEF[combineAll]` on `toInput({1..n})`.
pub fn blowup_row(n: usize, fuel: u64) -> Result<BlowupRow> {
    if n > MAX_BLOWUP_N {
        return Err(Error::UniverseTooLarge {
            elements: n,
            limit: MAX_BLOWUP_N,
        });
    }
    // n = 0 still needs a well-formed universe; the input is then empty.
    let universe = PrincipalUniverse::numbered(n.max(1))?;
    let x = if n == 0 {
        LabeledSet::new()
    } else {
        to_input(universe.top())
    };
    let p = catalog::program("combineAll", &universe)?;
    let start = Instant::now();
    let run = mef(&Evaluator::new(&p, fuel), &x);
    let elapsed = start.elapsed();
    let output_size = run.outcome.terminated().map_or(0, LabeledSet::len);
    Ok(BlowupRow {
        n,
        output_size,
        sub_runs: run.sub_runs.len(),
        elapsed,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Relative spread allowed between tail masses and the mass limit.
pub const TAIL_MASS_TOLERANCE: f64 = 0.10;

/// A finite stretch of a bounded sequence `u_n`. Each entry carries its own
/// grid; grids may grow but must share the cell width and stay aligned.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SequenceWire", into = "SequenceWire")]
pub struct FunctionSequence {
    entries: Vec<GridFunction>,
    mass_limit: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceWire {
    entries: Vec<GridFunction>,
}

impl TryFrom<SequenceWire> for FunctionSequence {
    type Error = Error;

    fn try_from(w: SequenceWire) -> Result<Self> {
        FunctionSequence::new(w.entries)
    }
}

impl From<FunctionSequence> for SequenceWire {
    fn from(s: FunctionSequence) -> Self {
        SequenceWire { entries: s.entries }
    }
}

/// Index of the first tail entry: the tail is the last third.
pub fn tail_start(len: usize) -> usize {
    len - len.div_ceil(3)
}

impl FunctionSequence {
    /// Estimates `λ` as the mean tail mass and checks that every tail mass is
    /// within 10% of it.
    pub fn new(entries: Vec<GridFunction>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Structure("sequence has no entries".into()))?
            .grid();
        if entries.iter().any(|e| e.grid().dim() != first.dim()) {
            return Err(Error::Structure("entries disagree on dimension".into()));
        }
        let tail = &entries[tail_start(entries.len())..];
        let mass_limit = tail.iter().map(GridFunction::mass).sum::<f64>() / tail.len() as f64;
        if !(mass_limit > 0.0 && mass_limit.is_finite()) {
            return Err(Error::Invariant {
                name: "tail-mass",
                detail: format!("mass limit {mass_limit} is not positive"),
            });
        }
        if let Some(bad) = tail
            .iter()
            .map(GridFunction::mass)
            .find(|m| (m - mass_limit).abs() > TAIL_MASS_TOLERANCE * mass_limit)
        {
            return Err(Error::Invariant {
                name: "tail-mass",
                detail: format!("tail mass {bad} is more than 10% away from {mass_limit}"),
            });
        }
        Ok(FunctionSequence { entries, mass_limit })
    }

    pub fn entries(&self) -> &[GridFunction] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass_limit(&self) -> f64 {
        self.mass_limit
    }

    /// The grid with the largest box.
    pub fn largest_grid(&self) -> Grid {
        self.entries
            .iter()
            .map(GridFunction::grid)
            .fold(self.entries[0].grid(), |a, b| if b.half_width() > a.half_width() { b } else { a })
    }

    /// All entries embedded into [`Self::largest_grid`].
    pub fn embedded(&self) -> Result<Vec<GridFunction>> {
        let target = self.largest_grid();
        self.entries.iter().map(|e| e.embed_into(target)).collect()
    }
}

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::seeded_shuffle;
use crate::error::{Error, Result};

const SPLIT_STREAM: &str = "split";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Train/val/test partition of record ids, serialized as three id lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub train: Vec<u64>,
    pub val: Vec<u64>,
    pub test: Vec<u64>,
}

impl SplitAssignment {
    pub fn ids(&self, which: Split) -> &[u64] {
        match which {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self) -> HashMap<u64, Split> {
        Split::ALL
            .iter()
            .flat_map(|&s| self.ids(s).iter().map(move |&id| (id, s)))
            .collect()
    }
}

/// Shuffles `ids` under `seed` and cuts at `floor(0.5 n)` and `floor(0.8 n)`,
/// giving the 5:3:2 proportion exactly whenever `n` is a multiple of ten.
///
/// Ids are expected to be unique.
pub fn split(ids: &[u64], seed: u64) -> SplitAssignment {
    let n = ids.len();
    let shuffled = seeded_shuffle(ids.to_vec(), seed, SPLIT_STREAM);
    let (train_end, val_end) = (n / 2, n * 4 / 5);
    SplitAssignment {
        seed,
        train: shuffled[..train_end].to_vec(),
        val: shuffled[train_end..val_end].to_vec(),
        test: shuffled[val_end..].to_vec(),
    }
}

pub fn write_split(assignment: &SplitAssignment, path: &Path) -> Result<()> {
    let json = serde_json::to_vec_pretty(assignment).map_err(|e| Error::json(path, e))?;
    crate::fsutil::write_atomic(path, &json)
}

pub fn read_split(path: &Path) -> Result<SplitAssignment> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

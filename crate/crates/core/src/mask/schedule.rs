use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Fine,
    Rough,
    BBox,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Fine => "Fine",
            Stage::Rough => "Rough",
            Stage::BBox => "BBox",
        }
    }

    /// Case-insensitive `fine`, `rough` or `bbox`.
    pub fn parse(s: &str) -> Option<Stage> {
        match s.to_ascii_lowercase().as_str() {
            "fine" => Some(Stage::Fine),
            "rough" => Some(Stage::Rough),
            "bbox" => Some(Stage::BBox),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Consecutive step counts for the fine, rough and bounding-box stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub fine_steps: usize,
    pub rough_steps: usize,
    pub bbox_steps: usize,
}

impl Default for AnnealingSchedule {
    /// 3000 fine, 1500 rough, 1500 bounding-box steps.
    fn default() -> Self {
        Self::new(3000, 1500, 1500)
    }
}

impl AnnealingSchedule {
    pub fn new(fine_steps: usize, rough_steps: usize, bbox_steps: usize) -> Self {
        Self {
            fine_steps,
            rough_steps,
            bbox_steps,
        }
    }

    /// Splits `total` steps 2:1:1. Fine gets `ceil(total / 2)`, rough gets
    /// `ceil` of half the remainder, bbox gets the rest.
    pub fn scaled(total: usize) -> Self {
        let fine = total.div_ceil(2);
        let rest = total - fine;
        let rough = rest.div_ceil(2);
        Self::new(fine, rough, rest - rough)
    }

    pub fn total(&self) -> usize {
        self.fine_steps + self.rough_steps + self.bbox_steps
    }

    pub fn stage(&self, step: usize) -> Result<Stage> {
        if step < self.fine_steps {
            Ok(Stage::Fine)
        } else if step < self.fine_steps + self.rough_steps {
            Ok(Stage::Rough)
        } else if step < self.total() {
            Ok(Stage::BBox)
        } else {
            Err(Error::ScheduleExhausted {
                step,
                total: self.total(),
            })
        }
    }
}

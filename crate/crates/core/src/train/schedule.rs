use crate::error::{Error, Result};

/// Train on windows of `window_length` for `epochs` passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stage {
    pub window_length: usize,
    pub epochs: usize,
}

/// Stages with strictly doubling window lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurriculumSchedule {
    stages: Vec<Stage>,
}

/// Epochs spent on the longest windows.
pub const FINAL_STAGE_EPOCHS: usize = 100;
pub const FULL_MAX_LENGTH: usize = 256;

impl CurriculumSchedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("schedule has no stages".into()));
        }
        if let Some(bad) = stages.iter().find(|s| s.window_length == 0 || s.epochs == 0) {
            return Err(Error::InvalidArgument(format!("stage {bad:?} must have positive length and epochs")));
        }
        if let Some(w) = stages.windows(2).find(|w| w[1].window_length != 2 * w[0].window_length) {
            return Err(Error::InvalidArgument(format!(
                "window lengths must double: {} is followed by {}",
                w[0].window_length, w[1].window_length
            )));
        }
        Ok(Self { stages })
    }

    /// Lengths `2, 4, …, max_length` with one epoch each, except the last
    /// stage which runs [`FINAL_STAGE_EPOCHS`].
    pub fn doubling_to(max_length: usize) -> Result<Self> {
        if max_length < 2 || !max_length.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "maximum window length must be a power of two ≥ 2, got {max_length}"
            )));
        }
        let mut stages = Vec::new();
        let mut len = 2;
        while len <= max_length {
            let epochs = if len == max_length { FINAL_STAGE_EPOCHS } else { 1 };
            stages.push(Stage {
                window_length: len,
                epochs,
            });
            len *= 2;
        }
        Self::new(stages)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn total_epochs(&self) -> usize {
        self.stages.iter().map(|s| s.epochs).sum()
    }

    pub fn max_length(&self) -> usize {
        self.stages.last().map_or(0, |s| s.window_length)
    }
}

/// `(2,1), (4,1), …, (128,1), (256,100)`.
pub fn default_schedule() -> CurriculumSchedule {
    CurriculumSchedule::doubling_to(FULL_MAX_LENGTH).expect("256 is a power of two")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stages() {
        let s = default_schedule();
        assert_eq!(s.stages().len(), 8);
        let lens: Vec<usize> = s.stages().iter().map(|s| s.window_length).collect();
        let epochs: Vec<usize> = s.stages().iter().map(|s| s.epochs).collect();
        assert_eq!(lens, vec![2, 4, 8, 16, 32, 64, 128, 256]);
        assert_eq!(epochs, vec![1, 1, 1, 1, 1, 1, 1, 100]);
        assert_eq!(s.total_epochs(), 107);
    }

    #[test]
    fn truncated() {
        let s = CurriculumSchedule::doubling_to(32).unwrap();
        assert_eq!(s.stages().len(), 5);
        assert_eq!(s.stages()[4], Stage { window_length: 32, epochs: 100 });
        assert!(CurriculumSchedule::doubling_to(48).is_err());
        assert!(CurriculumSchedule::doubling_to(1).is_err());
    }

    #[test]
    fn rejects_non_doubling() {
        let st = |l, e| Stage { window_length: l, epochs: e };
        assert!(CurriculumSchedule::new(vec![st(2, 1), st(6, 1)]).is_err());
        assert!(CurriculumSchedule::new(vec![st(2, 0)]).is_err());
        assert!(CurriculumSchedule::new(vec![]).is_err());
        assert!(CurriculumSchedule::new(vec![st(3, 2), st(6, 1)]).is_ok());
    }
}

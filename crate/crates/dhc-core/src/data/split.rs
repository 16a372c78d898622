//! Day-based train/test splitting and rolling windows.
//!
//! The season is cut into a repeating eight-day pattern: seven train days
//! followed by one test day. Rolling evaluation slides a seven-day training
//! window one day at a time, always testing on the following day.

use std::ops::Range;

use super::Dataset;
use crate::{Error, Result};

/// Assigns each day by its position in the repeating 7+1 pattern.
pub fn split_7_1(ds: &Dataset) -> (Dataset, Dataset) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, s) in ds.samples.iter().enumerate() {
        if ds.day_index(i) % 8 == 7 {
            test.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    (Dataset { samples: train }, Dataset { samples: test })
}

/// One rolling step: sample ranges of the training window and its test day.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingWindow {
    /// First training day of the window.
    pub start_day: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Sliding windows of `window_days` training days, each tested on the next
/// day. Requires the dataset to cover at least `window_days + 1` days.
pub fn rolling_windows(ds: &Dataset, window_days: usize) -> Result<Vec<RollingWindow>> {
    if window_days == 0 {
        return Err(Error::InvalidInput("window must cover at least one day".into()));
    }
    let num_days = ds.num_days();
    if num_days < window_days + 1 {
        return Err(Error::OutOfRange(format!(
            "dataset covers {num_days} days, rolling needs at least {}",
            window_days + 1
        )));
    }

    // Day boundaries as sample indices; samples are chronologically sorted.
    let mut day_start = vec![ds.len(); num_days + 1];
    for i in (0..ds.len()).rev() {
        day_start[ds.day_index(i)] = i;
    }
    day_start[num_days] = ds.len();
    // Days with no samples inherit the next day's boundary.
    for d in (0..num_days).rev() {
        if day_start[d] == ds.len() && day_start[d + 1] < ds.len() {
            day_start[d] = day_start[d + 1];
        }
    }

    let mut windows = Vec::new();
    for d in 0..=num_days - window_days - 1 {
        windows.push(RollingWindow {
            start_day: d,
            train: day_start[d]..day_start[d + window_days],
            test: day_start[d + window_days]..day_start[d + window_days + 1],
        });
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tests::tiny_dataset;

    #[test]
    fn eight_days_split_seven_one() {
        let ds = tiny_dataset(8, 4);
        let (train, test) = split_7_1(&ds);
        assert_eq!(train.len(), 7 * 4);
        assert_eq!(test.len(), 4);
        assert_eq!(train.len() + test.len(), ds.len());
        // Disjoint by construction: test rows are exactly the day-7 rows.
        assert!(test.samples.iter().all(|s| train
            .samples
            .iter()
            .all(|t| t.timestamp != s.timestamp)));
    }

    #[test]
    fn ninety_six_days_split_84_12() {
        let ds = tiny_dataset(96, 2);
        let (train, test) = split_7_1(&ds);
        // 84 distinct train days, 12 distinct test days, 2 samples each.
        assert_eq!(train.len(), 84 * 2);
        assert_eq!(test.len(), 12 * 2);
    }

    #[test]
    fn rolling_window_counts() {
        let ds = tiny_dataset(8, 3);
        let windows = rolling_windows(&ds, 7).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].train, 0..21);
        assert_eq!(windows[0].test, 21..24);

        let ds = tiny_dataset(96, 1);
        assert_eq!(rolling_windows(&ds, 7).unwrap().len(), 89);
    }

    #[test]
    fn rolling_layout_is_contiguous() {
        let ds = tiny_dataset(12, 2);
        let windows = rolling_windows(&ds, 7).unwrap();
        assert_eq!(windows.len(), 5);
        for (k, w) in windows.iter().enumerate() {
            assert_eq!(w.start_day, k);
            assert_eq!(w.train.len(), 14);
            assert_eq!(w.test.len(), 2);
            assert_eq!(w.train.end, w.test.start);
        }
        // Sliding by one day.
        assert_eq!(windows[1].train.start, 2);
    }

    #[test]
    fn too_short_dataset_is_rejected() {
        let ds = tiny_dataset(7, 2);
        assert!(rolling_windows(&ds, 7).is_err());
    }

    #[test]
    fn splits_are_pure_functions_of_day_indices() {
        let ds = tiny_dataset(20, 3);
        let a = split_7_1(&ds);
        let b = split_7_1(&ds);
        assert_eq!(a.0.samples, b.0.samples);
        assert_eq!(a.1.samples, b.1.samples);
        assert_eq!(
            rolling_windows(&ds, 7).unwrap(),
            rolling_windows(&ds, 7).unwrap()
        );
    }
}

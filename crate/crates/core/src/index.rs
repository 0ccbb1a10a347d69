//! Timestamp-indexed cumulative event counts.
//!
//! The stream is scanned once; afterwards any closed window `[a, b]` is answered
//! as the difference of two partial sums found by binary search, globally or for
//! a single pixel.

use std::collections::BTreeMap;

use crate::error::{EvafError, Result};
use crate::event::{EventStream, Pixel, SweepConfig};

#[derive(Debug, Clone)]
pub struct PrefixIndex {
    /// Timestamp of event ordinal `i`; the cumulative count up to and including
    /// ordinal `i` is `i + 1`.
    timestamps: Vec<u64>,
    /// Sorted timestamps per pixel, row-major.
    per_pixel: Vec<Vec<u64>>,
    /// Row-major ids of pixels that saw at least one event.
    active: Vec<u32>,
    width: u16,
    height: u16,
    sweep: SweepConfig,
}

impl PrefixIndex {
    pub fn build(stream: &EventStream) -> Self {
        let width = stream.width();
        let height = stream.height();
        let mut timestamps = Vec::with_capacity(stream.len());
        let mut per_pixel = vec![Vec::new(); stream.pixel_count()];
        for e in stream.events() {
            timestamps.push(e.t);
            per_pixel[e.y as usize * width as usize + e.x as usize].push(e.t);
        }
        let active = per_pixel
            .iter()
            .enumerate()
            .filter(|(_, ts)| !ts.is_empty())
            .map(|(i, _)| i as u32)
            .collect();
        PrefixIndex {
            timestamps,
            per_pixel,
            active,
            width,
            height,
            sweep: *stream.sweep(),
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn sweep(&self) -> &SweepConfig {
        &self.sweep
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    /// Cumulative count of events with timestamp `<= t`.
    pub fn cumulative_count(&self, t: u64) -> u64 {
        upper(&self.timestamps, t) as u64
    }

    /// Number of events with `a <= t <= b`.
    pub fn count_window(&self, a: u64, b: u64) -> Result<u64> {
        check_window(a, b)?;
        Ok(count_sorted(&self.timestamps, a, b))
    }

    /// Per-pixel counts in `[a, b]`; only pixels with at least one event appear.
    pub fn per_pixel_counts(&self, a: u64, b: u64) -> Result<BTreeMap<Pixel, u64>> {
        check_window(a, b)?;
        let mut counts = BTreeMap::new();
        self.for_each_pixel_count(a, b, |id, n| {
            counts.insert(self.pixel_of(id), n);
        });
        Ok(counts)
    }

    /// Count for a single pixel; pixels outside the sensor count zero.
    pub fn pixel_count(&self, pixel: Pixel, a: u64, b: u64) -> Result<u64> {
        check_window(a, b)?;
        if pixel.x >= self.width || pixel.y >= self.height {
            return Ok(0);
        }
        let id = pixel.y as usize * self.width as usize + pixel.x as usize;
        Ok(count_sorted(&self.per_pixel[id], a, b))
    }

    /// Visits every active pixel with a non-zero count in `[a, b]`. The caller
    /// guarantees `a <= b`.
    pub(crate) fn for_each_pixel_count(&self, a: u64, b: u64, mut f: impl FnMut(u32, u64)) {
        for &id in &self.active {
            let n = count_sorted(&self.per_pixel[id as usize], a, b);
            if n > 0 {
                f(id, n);
            }
        }
    }

    fn pixel_of(&self, id: u32) -> Pixel {
        let w = self.width as u32;
        Pixel::new((id % w) as u16, (id / w) as u16)
    }

    /// Timestamps of one pixel, for inspection.
    pub fn pixel_timestamps(&self, pixel: Pixel) -> &[u64] {
        if pixel.x >= self.width || pixel.y >= self.height {
            return &[];
        }
        &self.per_pixel[pixel.y as usize * self.width as usize + pixel.x as usize]
    }
}

fn check_window(a: u64, b: u64) -> Result<()> {
    if a > b {
        return Err(EvafError::InvertedWindow {
            a: a as f64,
            b: b as f64,
        });
    }
    Ok(())
}

fn upper(ts: &[u64], t: u64) -> usize {
    ts.partition_point(|&x| x <= t)
}

fn count_sorted(ts: &[u64], a: u64, b: u64) -> u64 {
    (upper(ts, b) - ts.partition_point(|&x| x < a)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, Polarity};

    fn stream(events: &[(u64, u16, u16)]) -> EventStream {
        let events = events
            .iter()
            .map(|&(t, x, y)| Event::new(t, x, y, Polarity::On))
            .collect();
        EventStream::new(events, 4, 4, SweepConfig::new(0, 1000, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn final_cumulative_count() {
        let idx = PrefixIndex::build(&stream(&[(100, 0, 0), (200, 1, 0), (300, 2, 0)]));
        assert_eq!(idx.cumulative_count(u64::MAX), 3);
        assert_eq!(idx.cumulative_count(99), 0);
        assert_eq!(idx.cumulative_count(200), 2);
    }

    #[test]
    fn per_pixel_lists() {
        let idx = PrefixIndex::build(&stream(&[(5, 1, 1), (6, 1, 1)]));
        assert_eq!(idx.pixel_timestamps(Pixel::new(1, 1)), &[5, 6]);
    }

    #[test]
    fn window_counts() {
        let idx = PrefixIndex::build(&stream(&[(100, 0, 0), (200, 1, 0), (300, 2, 0)]));
        assert_eq!(idx.count_window(50, 250).unwrap(), 2);
        assert_eq!(idx.count_window(400, 500).unwrap(), 0);
        assert_eq!(idx.count_window(0, 1000).unwrap(), 3);
        // closed on both ends, degenerate windows are legal
        assert_eq!(idx.count_window(200, 200).unwrap(), 1);
        assert_eq!(idx.count_window(100, 300).unwrap(), 3);
        assert!(matches!(idx.count_window(5, 4), Err(EvafError::InvertedWindow { .. })));
    }

    #[test]
    fn sparse_pixel_counts() {
        let idx = PrefixIndex::build(&stream(&[(5, 0, 0), (6, 0, 0), (7, 3, 2)]));
        let counts = idx.per_pixel_counts(5, 7).unwrap();
        assert_eq!(counts.len(), 2);
        assert_eq!(counts[&Pixel::new(0, 0)], 2);
        assert_eq!(counts[&Pixel::new(3, 2)], 1);
        assert!(idx.per_pixel_counts(8, 100).unwrap().is_empty());
        assert!(idx.per_pixel_counts(9, 8).is_err());
    }

    #[test]
    fn empty_stream_gives_empty_index() {
        let idx = PrefixIndex::build(&stream(&[]));
        assert!(idx.is_empty());
        assert_eq!(idx.count_window(0, 1000).unwrap(), 0);
    }
}

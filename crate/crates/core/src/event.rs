//! Event data types and the linear focal sweep.

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};

/// Sign of a log-intensity change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Off,
    On,
}

impl Polarity {
    pub fn from_i64(p: i64) -> Option<Self> {
        match p {
            1 => Some(Polarity::On),
            -1 => Some(Polarity::Off),
            _ => None,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Polarity::On => 1.0,
            Polarity::Off => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::On => 1,
            Polarity::Off => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::On => Polarity::Off,
            Polarity::Off => Polarity::On,
        }
    }
}

/// Sensor pixel coordinate, `x` is the column and `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: u16,
    pub y: u16,
}

impl Pixel {
    pub fn new(x: u16, y: u16) -> Self {
        Pixel { x, y }
    }
}

/// One asynchronous brightness-change sample. Timestamps are integer microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub x: u16,
    pub y: u16,
    pub p: Polarity,
}

impl Event {
    pub fn new(t: u64, x: u16, y: u16, p: Polarity) -> Self {
        Event { t, x, y, p }
    }

    pub fn pixel(&self) -> Pixel {
        Pixel::new(self.x, self.y)
    }
}

/// Linear mapping between sweep time (µs) and lens focal position (motor units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub t_start: u64,
    pub t_end: u64,
    pub p_min: f64,
    pub p_max: f64,
}

impl SweepConfig {
    pub fn new(t_start: u64, t_end: u64, p_min: f64, p_max: f64) -> Result<Self> {
        let sweep = SweepConfig {
            t_start,
            t_end,
            p_min,
            p_max,
        };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_end <= self.t_start {
            return Err(EvafError::invalid(format!(
                "sweep t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            )));
        }
        if !(self.p_max > self.p_min) || !self.p_min.is_finite() || !self.p_max.is_finite() {
            return Err(EvafError::invalid(format!(
                "sweep p_max ({}) must exceed p_min ({})",
                self.p_max, self.p_min
            )));
        }
        Ok(())
    }

    /// Sweep length in microseconds.
    pub fn duration_us(&self) -> u64 {
        self.t_end - self.t_start
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_us() as f64 * 1e-6
    }

    pub fn position_range(&self) -> f64 {
        self.p_max - self.p_min
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start as f64 && t <= self.t_end as f64
    }

    /// Focal position at integer timestamp `t`.
    pub fn time_to_position(&self, t: u64) -> Result<f64> {
        self.position_at(t as f64)
    }

    /// Focal position at a fractional timestamp (µs). Search results live between
    /// integer timestamps, so this is the general form.
    pub fn position_at(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            return Err(EvafError::OutsideSweep {
                t,
                t_start: self.t_start,
                t_end: self.t_end,
            });
        }
        let frac = (t - self.t_start as f64) / self.duration_us() as f64;
        if frac >= 1.0 {
            return Ok(self.p_max);
        }
        Ok(self.p_min + frac * (self.p_max - self.p_min))
    }

    /// Inverse of [`position_at`](Self::position_at); the result is clamped to the sweep.
    pub fn position_to_time(&self, p: f64) -> f64 {
        let frac = ((p - self.p_min) / self.position_range()).clamp(0.0, 1.0);
        self.t_start as f64 + frac * self.duration_us() as f64
    }
}

/// Time-sorted events together with sensor geometry and sweep metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    events: Vec<Event>,
    width: u16,
    height: u16,
    sweep: SweepConfig,
}

impl EventStream {
    /// Validates ordering, geometry and sweep bounds.
    pub fn new(events: Vec<Event>, width: u16, height: u16, sweep: SweepConfig) -> Result<Self> {
        sweep.validate()?;
        if width == 0 || height == 0 {
            return Err(EvafError::invalid("sensor geometry must be non-empty"));
        }
        let mut previous = sweep.t_start;
        for (i, e) in events.iter().enumerate() {
            if e.x >= width || e.y >= height {
                return Err(EvafError::PixelOutOfBounds {
                    x: e.x as u32,
                    y: e.y as u32,
                    width: width as u32,
                    height: height as u32,
                });
            }
            if e.t < sweep.t_start || e.t > sweep.t_end {
                return Err(EvafError::OutsideSweep {
                    t: e.t as f64,
                    t_start: sweep.t_start,
                    t_end: sweep.t_end,
                });
            }
            if e.t < previous {
                return Err(EvafError::TimestampRegression {
                    line: i + 1,
                    t: e.t,
                    previous,
                });
            }
            previous = e.t;
        }
        Ok(EventStream {
            events,
            width,
            height,
            sweep,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn sweep(&self) -> &SweepConfig {
        &self.sweep
    }

    /// Same stream with every polarity inverted.
    pub fn with_flipped_polarity(&self) -> Self {
        let events = self.events.iter().map(|e| Event { p: e.p.flipped(), ..*e }).collect();
        EventStream { events, ..*self }
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

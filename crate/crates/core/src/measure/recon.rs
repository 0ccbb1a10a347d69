//! Direct-integration frame reconstruction.
//!
//! Each event adds `p * C` to its pixel; an optional exponential decay (per
//! second) leaks the accumulated value back toward zero. With zero decay the
//! frame is the plain integral, which drifts when noise is unbalanced.

use crate::error::{EvafError, Result};
use crate::event::{Event, EventStream};
use crate::grid::Grid;

/// Reconstructed log intensity at time `t` (relative to the sweep start).
#[derive(Debug, Clone, PartialEq)]
pub struct ReconFrame {
    pub log_intensity: Grid,
    pub t: u64,
}

impl ReconFrame {
    pub fn mean_abs(&self) -> f64 {
        let data = self.log_intensity.data();
        if data.is_empty() {
            return 0.0;
        }
        data.iter().map(|v| v.abs()).sum::<f64>() / data.len() as f64
    }
}

/// Incremental integrator; frames at increasing times share work.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    events: &'a [Event],
    width: usize,
    contrast: f64,
    decay: f64,
    state: Vec<f64>,
    next: usize,
    t: u64,
}

impl<'a> Integrator<'a> {
    pub fn new(stream: &'a EventStream, contrast: f64, decay: f64) -> Result<Self> {
        if !(decay >= 0.0) || !decay.is_finite() {
            return Err(EvafError::invalid(format!("decay must be non-negative, got {decay}")));
        }
        if !(contrast > 0.0) || !contrast.is_finite() {
            return Err(EvafError::invalid(format!(
                "contrast threshold must be positive, got {contrast}"
            )));
        }
        Ok(Integrator {
            events: stream.events(),
            width: stream.width() as usize,
            contrast,
            decay,
            state: vec![0.0; stream.pixel_count()],
            next: 0,
            t: stream.sweep().t_start,
        })
    }

    /// Integrates every event with timestamp `<= t`. Times must not decrease.
    pub fn advance_to(&mut self, t: u64) {
        assert!(t >= self.t, "integrator cannot move backwards ({} -> {t})", self.t);
        if self.decay > 0.0 {
            let factor = (-self.decay * (t - self.t) as f64 * 1e-6).exp();
            self.state.iter_mut().for_each(|v| *v *= factor);
        }
        while let Some(e) = self.events.get(self.next) {
            if e.t > t {
                break;
            }
            let weight = if self.decay > 0.0 {
                (-self.decay * (t - e.t) as f64 * 1e-6).exp()
            } else {
                1.0
            };
            self.state[e.y as usize * self.width + e.x as usize] += e.p.sign() * self.contrast * weight;
            self.next += 1;
        }
        self.t = t;
    }

    pub fn frame(&self) -> ReconFrame {
        let height = self.state.len() / self.width.max(1);
        ReconFrame {
            log_intensity: Grid::new(self.width, height, self.state.clone()),
            t: self.t,
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// Frame at `t` from direct integration of all events up to and including `t`.
pub fn reconstruct_frame(stream: &EventStream, t: u64, decay: f64, contrast: f64) -> Result<ReconFrame> {
    let sweep = stream.sweep();
    if t < sweep.t_start || t > sweep.t_end {
        return Err(EvafError::OutsideSweep {
            t: t as f64,
            t_start: sweep.t_start,
            t_end: sweep.t_end,
        });
    }
    let mut integrator = Integrator::new(stream, contrast, decay)?;
    integrator.advance_to(t);
    Ok(integrator.frame())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Polarity, SweepConfig};

    fn stream(events: Vec<Event>) -> EventStream {
        EventStream::new(events, 3, 2, SweepConfig::new(0, 1_000_000, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn single_event() {
        let s = stream(vec![Event::new(10, 2, 1, Polarity::On)]);
        let f = reconstruct_frame(&s, 100, 0.0, 0.2).unwrap();
        assert_eq!(f.log_intensity.get(2, 1), 0.2);
        assert_eq!(f.log_intensity.data().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn opposite_events_cancel() {
        let s = stream(vec![
            Event::new(10, 0, 0, Polarity::On),
            Event::new(20, 0, 0, Polarity::Off),
        ]);
        let f = reconstruct_frame(&s, 20, 0.0, 0.2).unwrap();
        assert_eq!(f.log_intensity.get(0, 0), 0.0);
        // before the second event only the first counts
        let f = reconstruct_frame(&s, 19, 0.0, 0.2).unwrap();
        assert_eq!(f.log_intensity.get(0, 0), 0.2);
    }

    #[test]
    fn decay_leaks_toward_zero() {
        let s = stream(vec![Event::new(0, 0, 0, Polarity::On)]);
        let f = reconstruct_frame(&s, 1_000_000, 2.0, 0.2).unwrap();
        assert!((f.log_intensity.get(0, 0) - 0.2 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn incremental_matches_one_shot() {
        let events: Vec<Event> = (0..50)
            .map(|i| {
                Event::new(
                    i * 1000,
                    (i % 3) as u16,
                    (i % 2) as u16,
                    if i % 3 == 0 { Polarity::Off } else { Polarity::On },
                )
            })
            .collect();
        let s = stream(events);
        let mut integ = Integrator::new(&s, 0.2, 1.5).unwrap();
        for t in [5_000, 17_500, 49_000] {
            integ.advance_to(t);
            let direct = reconstruct_frame(&s, t, 1.5, 0.2).unwrap();
            for (a, b) in integ
                .frame()
                .log_intensity
                .data()
                .iter()
                .zip(direct.log_intensity.data())
            {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = stream(vec![]);
        assert!(reconstruct_frame(&s, 0, -1.0, 0.2).is_err());
        assert!(reconstruct_frame(&s, 2_000_000, 0.0, 0.2).is_err());
    }
}

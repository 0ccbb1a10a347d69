use evaf_core::{Event, EventStream, Pixel, Polarity, PrefixIndex, SweepConfig};
use proptest::prelude::*;

const T_END: u64 = 100_000;

fn stream_strategy(max_events: usize) -> impl Strategy<Value = EventStream> {
    prop::collection::vec((0..=T_END, 0u16..6, 0u16..5, any::<bool>()), 0..max_events).prop_map(|mut raw| {
        raw.sort_by_key(|e| e.0);
        let events = raw
            .into_iter()
            .map(|(t, x, y, on)| Event::new(t, x, y, if on { Polarity::On } else { Polarity::Off }))
            .collect();
        EventStream::new(events, 6, 5, SweepConfig::new(0, T_END, 220.0, 3750.0).unwrap()).unwrap()
    })
}

fn window() -> impl Strategy<Value = (u64, u64)> {
    (0..=T_END, 0..=T_END).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

fn brute(stream: &EventStream, a: u64, b: u64) -> u64 {
    stream.events().iter().filter(|e| (a..=b).contains(&e.t)).count() as u64
}

proptest! {
    #[test]
    fn count_window_matches_linear_scan(stream in stream_strategy(400), (a, b) in window()) {
        let index = PrefixIndex::build(&stream);
        prop_assert_eq!(index.count_window(a, b).unwrap(), brute(&stream, a, b));
    }

    #[test]
    fn adjacent_windows_add_up(stream in stream_strategy(400), (a, c) in window(), split in 0.0f64..1.0) {
        let index = PrefixIndex::build(&stream);
        let b = a + ((c - a) as f64 * split) as u64;
        let left = index.count_window(a, b).unwrap();
        let right = if b < c { index.count_window(b + 1, c).unwrap() } else { 0 };
        prop_assert_eq!(left + right, index.count_window(a, c).unwrap());
    }

    #[test]
    fn per_pixel_counts_sum_to_window_count(stream in stream_strategy(400), (a, b) in window()) {
        let index = PrefixIndex::build(&stream);
        let map = index.per_pixel_counts(a, b).unwrap();
        prop_assert!(map.values().all(|&n| n > 0));
        prop_assert_eq!(map.values().sum::<u64>(), index.count_window(a, b).unwrap());
        for (pixel, n) in &map {
            let direct = stream
                .events()
                .iter()
                .filter(|e| e.pixel() == *pixel && (a..=b).contains(&e.t))
                .count() as u64;
            prop_assert_eq!(*n, direct);
        }
    }

    #[test]
    fn polarity_does_not_change_counts(stream in stream_strategy(200), (a, b) in window()) {
        let index = PrefixIndex::build(&stream);
        let flipped = PrefixIndex::build(&stream.with_flipped_polarity());
        prop_assert_eq!(index.per_pixel_counts(a, b).unwrap(), flipped.per_pixel_counts(a, b).unwrap());
    }
}

#[test]
fn cumulative_count_is_monotone_and_total() {
    let events = vec![
        Event::new(100, 0, 0, Polarity::On),
        Event::new(200, 1, 0, Polarity::Off),
        Event::new(300, 1, 1, Polarity::On),
    ];
    let stream = EventStream::new(events, 2, 2, SweepConfig::new(0, 1000, 0.0, 1.0).unwrap()).unwrap();
    let index = PrefixIndex::build(&stream);
    assert_eq!(index.cumulative_count(1000), 3);
    assert_eq!(index.cumulative_count(99), 0);
    assert_eq!(index.cumulative_count(200), 2);
    assert_eq!(index.pixel_count(Pixel::new(1, 1), 0, 1000).unwrap(), 1);
}

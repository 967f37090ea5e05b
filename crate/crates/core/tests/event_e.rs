//! Frequency of the h-event against the aggregated Hoeffding bound.

use percolab::events::event_e_holds;
use percolab::sampler::sample_configuration;
use percolab::{BoxSpec, SeedSpec};

#[test]
fn event_frequency_respects_the_aggregated_bound() {
    let (n, p) = (16u32, 0.5927);
    let bbox = BoxSpec::centered(2, n).unwrap();
    let seed = SeedSpec::new(16);
    let samples = 10_000u64;
    let holds = (0..samples)
        .filter(|&i| event_e_holds(&sample_configuration(&bbox, p, &seed, i).unwrap(), n, p).unwrap())
        .count();
    let frequency = holds as f64 / samples as f64;
    let volume = bbox.volume() as f64;
    let ln_n = f64::from(n).ln();
    let pq = p * (1.0 - p);
    let bound = 2.0 * volume * volume * (-2.0 * ln_n * ln_n * pq * pq).exp();
    assert!(frequency >= 1.0 - bound, "frequency {frequency}, bound {bound}");
    // The bound exceeds 1 at every reachable size. The event itself is rare
    // here: one open boundary site with three closed neighbours already has
    // h = 3/(1-p) - 1/p above 2 ln 16.
    assert!(bound > 1.0);
}

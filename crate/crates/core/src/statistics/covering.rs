use serde::Serialize;

use crate::cluster::{crossing_clusters, label_clusters};
use crate::error::{Error, Result};
use crate::events::{two_arms_box, TwoArmsBoxSpec};
use crate::lattice::{BoxSpec, Point};
use super::estimate::{tally, MonteCarlo};
use super::fgh::closure_multiplicity;
use crate::sampler::{open_threshold, sample_with_threshold, Configuration};

/// Centres along one axis of tiles of width `2k+1` laid from `-n`; the last
/// tile is pulled inward to end exactly at `n`.
fn axis_centres(n: i32, k: i32) -> Vec<i32> {
    let mut centres = Vec::new();
    let mut c = -n + k;
    while c + k <= n {
        centres.push(c);
        c += 2 * k + 1;
    }
    if centres.last().is_none_or(|&last| last + k < n) {
        centres.push(n - k);
    }
    centres
}

/// Translates of `Λ(k)` inside `Λ(n)` covering `∂^in Λ(n)`: the tiles of a
/// product grid that touch the boundary. Tiles are disjoint when `2k+1`
/// divides `2n+1` and overlap along the last row otherwise.
pub fn build_covering(dim: usize, n: u32, k: u32) -> Result<Vec<BoxSpec>> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "covering needs 1 <= k <= n (k={k}, n={n})"
        )));
    }
    let outer = BoxSpec::centered(dim, n)?;
    let centres = axis_centres(n as i32, k as i32);
    let m = centres.len();
    let mut boxes = Vec::new();
    let mut digits = vec![0usize; dim];
    loop {
        if digits.iter().any(|&j| j == 0 || j == m - 1) {
            let coords: Vec<i32> = digits.iter().map(|&j| centres[j]).collect();
            let tile = BoxSpec::new(Point::new(&coords)?, k)?;
            debug_assert!(outer.contains_box(&tile));
            boxes.push(tile);
        }
        let mut axis = 0;
        loop {
            if axis == dim {
                return Ok(boxes);
            }
            digits[axis] += 1;
            if digits[axis] < m {
                break;
            }
            digits[axis] = 0;
            axis += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GoodBad {
    pub good: usize,
    pub bad: usize,
    pub crossing: usize,
    /// `|crossing| <= good + |∂^in Λ(k)| bad`.
    pub bound_holds: bool,
}

/// Classifies each covering tile `c + Λ(k)` by the two-arms box event on
/// the sub-configuration `c + Λ(k+ell)`, and checks the crossing-count bound.
pub fn count_good_bad(config: &Configuration, covering: &[BoxSpec], ell: u32) -> Result<GoodBad> {
    let outer = *config.bbox();
    let n = outer
        .radius()
        .checked_sub(ell)
        .ok_or_else(|| Error::InvalidParameter(format!("ell={ell} exceeds {outer}")))?;
    let crossing = crossing_clusters(&label_clusters(config), n)?.len();
    let (mut good, mut bad) = (0, 0);
    let mut rim = 0;
    for tile in covering {
        let spec = TwoArmsBoxSpec::around(tile.center(), tile.radius(), ell)?;
        let window = BoxSpec::new(tile.center(), tile.radius() + ell)?;
        if two_arms_box(&config.sub_box(&window)?, &spec)? {
            bad += 1;
        } else {
            good += 1;
        }
        rim = rim.max(tile.internal_boundary_len());
    }
    Ok(GoodBad {
        good,
        bad,
        crossing,
        bound_holds: crossing <= good + rim * bad,
    })
}

/// Violation counts of the pathwise bounds over sampled configurations of
/// `Λ(n+ell)`: `|𝒞| <= |∂^in Λ(n)|`, at most `2d` crossing closures through
/// any site, and the good/bad covering bound with tiles of radius `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    pub samples: u64,
    pub seed: u64,
    pub crossing_violations: u64,
    pub multiplicity_violations: u64,
    pub covering_violations: u64,
    /// Largest value seen, clamped one past its bound.
    pub max_crossing: u64,
    pub max_multiplicity: u64,
    pub tiles: usize,
}

impl CountingReport {
    pub fn violations(&self) -> u64 {
        self.crossing_violations + self.multiplicity_violations + self.covering_violations
    }
}

pub fn counting_bounds_report(
    dim: usize,
    n: u32,
    k: u32,
    ell: u32,
    p: f64,
    mc: &MonteCarlo,
) -> Result<CountingReport> {
    let threshold = open_threshold(p)?;
    let covering = build_covering(dim, n, k)?;
    let outer = BoxSpec::centered(dim, crate::lattice::checked_radius(n, ell)?)?;
    let rim = outer.with_radius(n)?.internal_boundary_len();
    // Slots: covering-bound violations, a histogram of |𝒞| clamped at
    // rim+1, then a histogram of the multiplicity clamped at 2d+1.
    let cross_base = 1;
    let mult_base = cross_base + rim + 2;
    let hist = tally(mc, mult_base + 2 * dim + 2, |i, acc| {
        let config = sample_with_threshold(&outer, threshold, &mc.seed, i);
        let gb = count_good_bad(&config, &covering, ell)?;
        let multiplicity = closure_multiplicity(&config, n)?;
        acc[0] += u64::from(!gb.bound_holds);
        acc[cross_base + gb.crossing.min(rim + 1)] += 1;
        acc[mult_base + multiplicity.min(2 * dim + 1)] += 1;
        Ok(())
    })?;
    let highest = |h: &[u64]| h.iter().rposition(|&c| c > 0).unwrap_or(0) as u64;
    let crossing = &hist[cross_base..mult_base];
    let multiplicity = &hist[mult_base..];
    Ok(CountingReport {
        samples: mc.samples,
        seed: mc.seed.global_seed,
        crossing_violations: crossing[rim + 1],
        multiplicity_violations: multiplicity[2 * dim + 1],
        covering_violations: hist[0],
        max_crossing: highest(crossing),
        max_multiplicity: highest(multiplicity),
        tiles: covering.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_configuration, SeedSpec};
    use std::collections::BTreeSet;

    fn bound(dim: usize, n: u32, k: u32) -> f64 {
        2.0 * dim as f64 * (2.0 * f64::from(n) / f64::from(k)).powi(dim as i32 - 1)
    }

    #[test]
    fn exact_tiling_of_nine_by_nine() {
        let tiles = build_covering(2, 4, 1).unwrap();
        assert_eq!(tiles.len(), 8);
        let mut seen = BTreeSet::new();
        for t in &tiles {
            for s in t.sites() {
                assert!(seen.insert(s), "tiles overlap at {s}");
            }
        }
        assert!(!seen.contains(&Point::origin(2).unwrap()));
        assert_eq!(build_covering(2, 4, 4).unwrap(), vec![BoxSpec::centered(2, 4).unwrap()]);
        assert!(build_covering(2, 3, 4).is_err());
    }

    #[test]
    fn coverings_cover_and_obey_the_count_bound() {
        for dim in 2..=3 {
            for n in 1..=9 {
                for k in 1..=n {
                    let tiles = build_covering(dim, n, k).unwrap();
                    let outer = BoxSpec::centered(dim, n).unwrap();
                    assert!(tiles.iter().all(|t| outer.contains_box(t)));
                    assert!(tiles.len() as f64 <= bound(dim, n, k), "d={dim} n={n} k={k}");
                    if dim == 2 || n <= 5 {
                        for x in crate::lattice::boundary(&outer, crate::lattice::Side::Internal) {
                            assert!(tiles.iter().any(|t| t.contains(&x)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extremes_are_all_good() {
        let b = BoxSpec::centered(2, 8).unwrap();
        let tiles = build_covering(2, 4, 2).unwrap();
        for config in [Configuration::all_closed(&b), Configuration::all_open(&b)] {
            let gb = count_good_bad(&config, &tiles, 4).unwrap();
            assert_eq!(gb.bad, 0);
            assert!(gb.bound_holds);
        }
    }

    #[test]
    fn bound_holds_on_samples() {
        let b = BoxSpec::centered(2, 8).unwrap();
        let tiles = build_covering(2, 5, 2).unwrap();
        let seed = SeedSpec::new(3);
        for i in 0..300 {
            let config = sample_configuration(&b, 0.5927, &seed, i).unwrap();
            assert!(count_good_bad(&config, &tiles, 3).unwrap().bound_holds);
        }
    }

    #[test]
    fn counting_report_on_a_small_run() {
        let mc = MonteCarlo::new(500, 3);
        let r = counting_bounds_report(2, 4, 2, 3, 0.5927, &mc).unwrap();
        assert_eq!(r.violations(), 0);
        assert!(r.max_crossing >= 1 && r.max_crossing <= 32);
        assert!(r.max_multiplicity <= 4);
        assert_eq!(r, counting_bounds_report(2, 4, 2, 3, 0.5927, &mc.with_workers(3)).unwrap());
    }

}

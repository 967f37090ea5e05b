//! Exact probabilities by summing over every configuration of a tiny box.
//!
//! The enumerator walks configurations in Gray-code order and hands each
//! one, as a bitmask, to a functional. Results are tallied per number of
//! open sites, so a single pass yields exact values for every `p`: the
//! weight of a configuration with `m` open sites is `p^m (1-p)^(V-m)`.
//!
//! Cluster structure here is computed by bitmask flood fill, independently
//! of the union-find labeling used everywhere else, so the oracle can
//! referee the main engine.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Point};
use crate::sampler::Configuration;
use crate::scalar::{parse_rational, Scalar};
use crate::Rational;

/// Default largest box volume enumerated without an explicit override.
pub const DEFAULT_CAP: usize = 20;
/// Largest volume ever enumerated (`2^25` configurations).
pub const HARD_CAP: usize = 25;

const CHUNKS: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationPlan {
    bbox: BoxSpec,
    cap: usize,
    workers: usize,
}

impl EnumerationPlan {
    pub fn new(bbox: BoxSpec) -> Result<Self> {
        Self::with_cap(bbox, DEFAULT_CAP)
    }

    /// Allows volumes up to [`HARD_CAP`]; expect minutes at 25 sites.
    pub fn with_override(bbox: BoxSpec) -> Result<Self> {
        Self::with_cap(bbox, HARD_CAP)
    }

    pub fn with_cap(bbox: BoxSpec, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_CAP);
        if bbox.volume() > cap {
            return Err(Error::EnumerationCap {
                volume: bbox.volume(),
                cap,
            });
        }
        Ok(EnumerationPlan {
            bbox,
            cap,
            workers: 1,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn volume(&self) -> usize {
        self.bbox.volume()
    }
}

/// Neighbour masks of a small box, one bit per site in index order.
#[derive(Clone, Debug)]
pub struct SmallBox {
    bbox: BoxSpec,
    neighbours: Vec<u64>,
    boundary: u64,
}

impl SmallBox {
    pub fn new(bbox: &BoxSpec) -> Result<Self> {
        if bbox.volume() > 64 {
            return Err(Error::EnumerationCap {
                volume: bbox.volume(),
                cap: 64,
            });
        }
        let neighbours = bbox
            .sites()
            .map(|x| {
                x.neighbours()
                    .filter_map(|y| bbox.index_of(&y))
                    .fold(0u64, |m, j| m | 1 << j)
            })
            .collect();
        let boundary = bbox
            .internal_boundary_mask()
            .into_iter()
            .enumerate()
            .fold(0u64, |m, (i, on)| if on { m | 1 << i } else { m });
        Ok(SmallBox {
            bbox: *bbox,
            neighbours,
            boundary,
        })
    }

    pub fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    /// Mask of `∂^in` of the whole box.
    pub fn boundary(&self) -> u64 {
        self.boundary
    }

    pub fn bit(&self, x: &Point) -> Option<u32> {
        self.bbox.index_of(x).map(|i| i as u32)
    }

    pub fn mask_of<'a>(&self, sites: impl IntoIterator<Item = &'a Point>) -> u64 {
        sites
            .into_iter()
            .filter_map(|x| self.bit(x))
            .fold(0, |m, b| m | 1 << b)
    }

    /// Mask of a box contained in this one.
    pub fn box_mask(&self, inner: &BoxSpec) -> u64 {
        self.mask_of(inner.sites().collect::<Vec<_>>().iter())
    }

    /// Union of the neighbourhoods of the sites in `set`.
    fn spread(&self, set: u64) -> u64 {
        let mut out = 0;
        let mut rest = set;
        while rest != 0 {
            out |= self.neighbours[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        out
    }

    /// In-box sites adjacent to `set` and not in it.
    pub fn outer_boundary(&self, set: u64) -> u64 {
        self.spread(set) & !set
    }

    /// Open cluster (as a mask) of the sites in `start`, which must be open.
    pub fn grow(&self, open: u64, start: u64) -> u64 {
        let mut cluster = start & open;
        let mut frontier = cluster;
        while frontier != 0 {
            frontier = self.spread(frontier) & open & !cluster;
            cluster |= frontier;
        }
        cluster
    }

    /// Every open cluster, lowest site first.
    pub fn clusters(&self, open: u64) -> Vec<u64> {
        let mut rest = open;
        let mut out = Vec::new();
        while rest != 0 {
            let c = self.grow(open, rest & rest.wrapping_neg());
            out.push(c);
            rest &= !c;
        }
        out
    }
}

/// One enumerated configuration.
#[derive(Clone, Copy, Debug)]
pub struct SmallConfig<'a> {
    pub geometry: &'a SmallBox,
    pub open: u64,
}

impl SmallConfig<'_> {
    pub fn is_open(&self, x: &Point) -> bool {
        self.geometry
            .bit(x)
            .is_some_and(|b| self.open >> b & 1 == 1)
    }

    pub fn open_count(&self) -> u32 {
        self.open.count_ones()
    }

    pub fn to_configuration(&self) -> Configuration {
        Configuration::from_mask(self.geometry.bbox(), self.open)
            .expect("small box fits a mask")
    }
}

/// Counts of configurations per (key, number of open sites).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Law<K: Ord> {
    volume: usize,
    counts: BTreeMap<K, Vec<u64>>,
}

/// Exact weights `p^m (1-p)^(V-m)` for `m = 0..=V`.
pub fn weights<T: Scalar>(volume: usize, p: &T) -> Vec<T> {
    let q = T::one() - p.clone();
    (0..=volume)
        .map(|m| p.powu(m as u32) * q.powu((volume - m) as u32))
        .collect()
}

impl<K: Ord + Clone> Law<K> {
    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }

    /// Number of configurations with key `key` and `m` open sites.
    pub fn count(&self, key: &K, m: usize) -> u64 {
        self.counts.get(key).map_or(0, |c| c[m])
    }

    pub fn total_configurations(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    /// Exact law of the key at parameter `p`.
    pub fn distribution(&self, p: &Rational) -> BTreeMap<K, Rational> {
        let w = weights(self.volume, p);
        self.counts
            .iter()
            .map(|(k, c)| {
                let mass = c
                    .iter()
                    .zip(&w)
                    .filter(|(&n, _)| n > 0)
                    .fold(Rational::zero(), |acc, (&n, wm)| acc + wm * Rational::from_i64(n as i64));
                (k.clone(), mass)
            })
            .collect()
    }
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

fn chunk_bounds(total: u64, chunk: u64) -> (u64, u64) {
    let step = total.div_ceil(CHUNKS).max(1);
    ((chunk * step).min(total), ((chunk + 1) * step).min(total))
}

fn run_pool<R: Send>(plan: &EnumerationPlan, job: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Law of `f` over all configurations of the plan's box.
pub fn enumerate_law<K, F>(plan: &EnumerationPlan, f: F) -> Result<Law<K>>
where
    K: Ord + Clone + Send,
    F: Fn(&SmallConfig<'_>) -> K + Sync,
{
    let geometry = SmallBox::new(plan.bbox())?;
    let volume = plan.volume();
    let total = 1u64 << volume;
    let merged = run_pool(plan, || {
        (0..CHUNKS)
            .into_par_iter()
            .map(|chunk| {
                let (lo, hi) = chunk_bounds(total, chunk);
                let mut local: BTreeMap<K, Vec<u64>> = BTreeMap::new();
                for i in lo..hi {
                    let config = SmallConfig {
                        geometry: &geometry,
                        open: gray(i),
                    };
                    let m = config.open_count() as usize;
                    local.entry(f(&config)).or_insert_with(|| vec![0; volume + 1])[m] += 1;
                }
                local
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, counts) in b {
                    let slot = a.entry(k).or_insert_with(|| vec![0; volume + 1]);
                    for (x, y) in slot.iter_mut().zip(counts) {
                        *x += y;
                    }
                }
                a
            })
    })?;
    Ok(Law {
        volume,
        counts: merged,
    })
}

/// Per-open-count sums of `K` integer statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sums<const K: usize> {
    volume: usize,
    sums: Vec<[i128; K]>,
}

impl<const K: usize> Sums<K> {
    /// `E[statistic j]` at parameter `p`.
    pub fn expectation(&self, j: usize, p: &Rational) -> Rational {
        weights(self.volume, p)
            .iter()
            .zip(&self.sums)
            .fold(Rational::zero(), |acc, (w, s)| {
                acc + w * Rational::from_integer(s[j].into())
            })
    }

    /// `E[Σ_j coeffs[j] · statistic j]`.
    pub fn combination(&self, coeffs: &[Rational; K], p: &Rational) -> Rational {
        (0..K).fold(Rational::zero(), |acc, j| {
            acc + &coeffs[j] * self.expectation(j, p)
        })
    }
}

pub fn enumerate_sums<const K: usize, F>(plan: &EnumerationPlan, f: F) -> Result<Sums<K>>
where
    F: Fn(&SmallConfig<'_>) -> [i64; K] + Sync,
{
    let geometry = SmallBox::new(plan.bbox())?;
    let volume = plan.volume();
    let total = 1u64 << volume;
    let sums = run_pool(plan, || {
        (0..CHUNKS)
            .into_par_iter()
            .map(|chunk| {
                let (lo, hi) = chunk_bounds(total, chunk);
                let mut local = vec![[0i128; K]; volume + 1];
                for i in lo..hi {
                    let config = SmallConfig {
                        geometry: &geometry,
                        open: gray(i),
                    };
                    let slot = &mut local[config.open_count() as usize];
                    for (acc, v) in slot.iter_mut().zip(f(&config)) {
                        *acc += i128::from(v);
                    }
                }
                local
            })
            .reduce(
                || vec![[0i128; K]; volume + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        for j in 0..K {
                            x[j] += y[j];
                        }
                    }
                    a
                },
            )
    })?;
    Ok(Sums { volume, sums })
}

fn check_rational_probability(p: &Rational) -> Result<()> {
    if p.is_open_unit() {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p.to_string()))
    }
}

/// `P(predicate)` exactly.
pub fn exact_probability<F>(plan: &EnumerationPlan, p: &Rational, predicate: F) -> Result<Rational>
where
    F: Fn(&SmallConfig<'_>) -> bool + Sync,
{
    check_rational_probability(p)?;
    let sums = enumerate_sums(plan, |c| [i64::from(predicate(c))])?;
    Ok(sums.expectation(0, p))
}

/// `E[statistic]` exactly, for an integer-valued statistic.
pub fn exact_expectation<F>(plan: &EnumerationPlan, p: &Rational, statistic: F) -> Result<Rational>
where
    F: Fn(&SmallConfig<'_>) -> i64 + Sync,
{
    check_rational_probability(p)?;
    let sums = enumerate_sums(plan, |c| [statistic(c)])?;
    Ok(sums.expectation(0, p))
}

/// Bitmask versions of the cluster statistics the exact checks need.
pub mod masks {
    use super::SmallBox;

    /// Clusters meeting `inner` and the outer box boundary.
    pub fn crossing(geometry: &SmallBox, open: u64, inner: u64) -> Vec<u64> {
        geometry
            .clusters(open)
            .into_iter()
            .filter(|c| c & inner != 0 && c & geometry.boundary() != 0)
            .collect()
    }

    /// `(|F|, |G|, |H|)` for the given inner box mask.
    pub fn fgh(geometry: &SmallBox, open: u64, inner: u64) -> (u32, u32, u32) {
        let crossing = crossing(geometry, open, inner);
        let mut f = 0u64;
        let mut g = 0u64;
        let mut h = 0u64;
        for c in &crossing {
            f |= c & inner;
            let rim = geometry.outer_boundary(*c) & inner;
            h |= g & rim;
            g |= rim;
        }
        (f.count_ones(), g.count_ones(), h.count_ones())
    }

    /// `(|C̄(x) ∩ inner|, |C(x) ∩ inner|)`, with `C̄(x) = {x}` for closed `x`.
    pub fn closure(geometry: &SmallBox, open: u64, x: u32, inner: u64) -> (u32, u32) {
        let bit = 1u64 << x;
        if open & bit == 0 {
            return ((bit & inner).count_ones(), 0);
        }
        let cluster = geometry.grow(open, bit);
        let closure = cluster | geometry.outer_boundary(cluster);
        ((closure & inner).count_ones(), (cluster & inner).count_ones())
    }

    /// Two neighbours of site `x` in distinct open clusters touching the box boundary.
    pub fn two_arms(geometry: &SmallBox, open: u64, x: u32) -> bool {
        let mut rest = geometry.outer_boundary(1u64 << x) & open;
        let mut arms = 0;
        while rest != 0 {
            let cluster = geometry.grow(open, rest & rest.wrapping_neg());
            rest &= !cluster;
            if cluster & geometry.boundary() != 0 {
                arms += 1;
                if arms == 2 {
                    return true;
                }
            }
        }
        false
    }

    /// Sites of `inner` with a neighbour joined to the outer boundary by an
    /// open path avoiding the site, as `(open ones, closed ones)`.
    pub fn neighbour_arms(geometry: &SmallBox, open: u64, inner: u64) -> (u32, u32) {
        let (mut on, mut off) = (0, 0);
        let mut rest = inner;
        while rest != 0 {
            let x = rest.trailing_zeros();
            rest &= rest - 1;
            let without = open & !(1u64 << x);
            let reaching = geometry
                .clusters(without)
                .into_iter()
                .filter(|c| c & geometry.boundary() != 0)
                .fold(0u64, |m, c| m | c);
            if geometry.outer_boundary(1u64 << x) & reaching != 0 {
                if open >> x & 1 == 1 {
                    on += 1;
                } else {
                    off += 1;
                }
            }
        }
        (on, off)
    }
}

/// Format tag written as the first line of golden fixture files.
pub const GOLDEN_FORMAT: &str = "# percolab-golden v1";

/// Renders `(fingerprint, value)` rows as a golden fixture CSV.
pub fn golden_csv(rows: &[(String, Rational)]) -> String {
    let mut out = format!("{GOLDEN_FORMAT}\nfingerprint,value\n");
    for (key, value) in rows {
        let _ = writeln!(out, "{key},{value}");
    }
    out
}

pub fn parse_golden(text: &str) -> Result<Vec<(String, Rational)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(GOLDEN_FORMAT) {
        return Err(Error::Parse("missing golden format tag".into()));
    }
    if lines.next().map(str::trim) != Some("fingerprint,value") {
        return Err(Error::Parse("missing golden header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let (key, value) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::Parse(format!("bad golden row {line:?}")))?;
            let value = parse_rational(value)
                .ok_or_else(|| Error::Parse(format!("bad fraction in {line:?}")))?;
            Ok((key.to_string(), value))
        })
        .collect()
}

/// Same value for every `p`: the total weight is one.
pub fn total_mass(volume: usize, p: &Rational) -> Rational {
    weights(volume, p).iter().enumerate().fold(Rational::zero(), |acc, (m, w)| {
        acc + w * Rational::from_integer(num_integer::binomial(volume as u64, m as u64).into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{crossing_clusters, label_clusters};
    use num_traits::One;
    use crate::statistics::compute_fgh;

    fn square(n: u32) -> BoxSpec {
        BoxSpec::centered(2, n).unwrap()
    }

    fn frac(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn trivial_predicates() {
        let plan = EnumerationPlan::new(square(1)).unwrap();
        let p = frac(1, 3);
        let origin = Point::origin(2).unwrap();
        assert_eq!(exact_probability(&plan, &p, |c| c.is_open(&origin)).unwrap(), p);
        assert_eq!(
            exact_probability(&plan, &p, |c| c.open_count() == 9).unwrap(),
            p.powu(9)
        );
        assert_eq!(
            exact_expectation(&plan, &p, |c| i64::from(c.open_count())).unwrap(),
            Rational::from_i64(9) * &p
        );
        assert!(total_mass(9, &p).is_one());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            EnumerationPlan::new(square(2)),
            Err(Error::EnumerationCap { volume: 25, cap: 20 })
        ));
        assert!(EnumerationPlan::with_override(square(2)).is_ok());
        assert!(EnumerationPlan::with_cap(square(3), 100).is_err());
    }

    #[test]
    fn gray_order_visits_every_mask_once() {
        let mut seen: Vec<u64> = (0..1u64 << 10).map(gray).collect();
        seen.sort_unstable();
        assert!(seen.iter().copied().eq(0..1 << 10));
        for i in 1..1u64 << 10 {
            assert_eq!((gray(i) ^ gray(i - 1)).count_ones(), 1);
        }
    }

    #[test]
    fn partitioning_does_not_change_results() {
        let plan = EnumerationPlan::new(square(1)).unwrap();
        let f = |c: &SmallConfig<'_>| c.geometry.clusters(c.open).len();
        let one = enumerate_law(&plan, f).unwrap();
        let four = enumerate_law(&plan.with_workers(4), f).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.total_configurations(), 512);
    }

    #[test]
    fn bitmask_clusters_agree_with_union_find() {
        let b = BoxSpec::centered(2, 1).unwrap();
        let geometry = SmallBox::new(&b).unwrap();
        for open in 0..1u64 << 9 {
            let config = Configuration::from_mask(&b, open).unwrap();
            let labeling = label_clusters(&config);
            assert_eq!(geometry.clusters(open).len(), labeling.cluster_count());
            let inner = geometry.box_mask(&b.with_radius(0).unwrap());
            assert_eq!(
                masks::crossing(&geometry, open, inner).len(),
                crossing_clusters(&labeling, 0).unwrap().len()
            );
        }
    }

    #[test]
    fn bitmask_fgh_agrees_with_set_version() {
        let b = BoxSpec::centered(2, 2).unwrap();
        let geometry = SmallBox::new(&b).unwrap();
        let inner = geometry.box_mask(&square(1));
        let mut state = 0x1234_5678_9abc_def0u64;
        for _ in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let open = (state >> 20) & ((1 << 25) - 1);
            let config = Configuration::from_mask(&b, open).unwrap();
            let sets = compute_fgh(&config, 1).unwrap();
            assert_eq!(
                masks::fgh(&geometry, open, inner),
                (sets.f.len() as u32, sets.g.len() as u32, sets.h.len() as u32)
            );
        }
    }

    #[test]
    fn golden_round_trip() {
        let rows = vec![("a;d=2".to_string(), frac(3, 7)), ("b".to_string(), frac(-1, 2))];
        assert_eq!(parse_golden(&golden_csv(&rows)).unwrap(), rows);
        assert!(parse_golden("fingerprint,value\n").is_err());
    }
}

//! Growth of `C̄(x) ∩ Λ(n)` site by site, after conditioning on the annulus.
//!
//! The annulus configuration `η` on `Λ(n+ell) \ Λ(n)` is fixed first. The
//! explorer then keeps an active queue `A`, the opened sites `O` and the
//! visited closed sites `C`, all inside `Λ(n)`. Each step pops the front of
//! `A`, asks a bit source for its status and, if it is open, appends the
//! sites of `Λ(n)` adjacent to it directly or through an open path of `η`.
//! When `A` runs dry, `O ∪ C` is `C̄(x) ∩ Λ(n)`.

use std::collections::{BTreeSet, VecDeque};

use crate::cluster::UnionFind;
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Point};
use crate::sampler::{Configuration, PartialConfiguration};

/// Supplies the status of the site being explored.
pub trait BitSource {
    fn next_bit(&mut self, site: &Point) -> Option<bool>;
}

/// Bits taken in order from a sequence, ignoring which site asks.
pub struct SequenceBits<I> {
    bits: I,
}

impl<I: Iterator<Item = bool>> SequenceBits<I> {
    pub fn new(bits: impl IntoIterator<IntoIter = I>) -> Self {
        SequenceBits {
            bits: bits.into_iter(),
        }
    }
}

impl<I: Iterator<Item = bool>> BitSource for SequenceBits<I> {
    fn next_bit(&mut self, _site: &Point) -> Option<bool> {
        self.bits.next()
    }
}

/// Reads statuses out of a full configuration, so that exploring replays it.
pub struct ReplayBits<'a> {
    config: &'a Configuration,
}

impl<'a> ReplayBits<'a> {
    pub fn new(config: &'a Configuration) -> Self {
        ReplayBits { config }
    }
}

impl BitSource for ReplayBits<'_> {
    fn next_bit(&mut self, site: &Point) -> Option<bool> {
        self.config.status(site)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationState {
    pub active: VecDeque<Point>,
    pub opened: BTreeSet<Point>,
    pub closed_visited: BTreeSet<Point>,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationOutcome {
    /// `C̄(x) ∩ Λ(n)`.
    pub closure: BTreeSet<Point>,
    /// Number of sites explored, `|C̄(x) ∩ Λ(n)|`.
    pub explored: usize,
    /// Number of explored sites found open, `|C(x) ∩ Λ(n)|`.
    pub opens: usize,
}

/// For each open cluster of `η`, the sites of `Λ(n)` adjacent to it.
#[derive(Clone, Debug)]
struct AnnulusFringe {
    component: Vec<u32>,
    fringe: Vec<Vec<Point>>,
}

const NONE: u32 = u32::MAX;

impl AnnulusFringe {
    fn new(eta: &PartialConfiguration, inner: &BoxSpec) -> Self {
        let bbox = eta.bbox();
        let volume = bbox.volume();
        let open = |i: usize| eta.status_index(i) == Some(true);
        let mut uf = UnionFind::new(volume);
        for i in 0..volume {
            if open(i) {
                for y in bbox.site(i).neighbours() {
                    if let Some(j) = bbox.index_of(&y) {
                        if j > i && open(j) {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
        let mut component = vec![NONE; volume];
        let mut fringe: Vec<BTreeSet<Point>> = Vec::new();
        let mut slot_of_root = vec![NONE; volume];
        for i in 0..volume {
            if !open(i) {
                continue;
            }
            let root = uf.find(i);
            if slot_of_root[root] == NONE {
                slot_of_root[root] = fringe.len() as u32;
                fringe.push(BTreeSet::new());
            }
            let slot = slot_of_root[root];
            component[i] = slot;
            for y in bbox.site(i).neighbours() {
                if inner.contains(&y) {
                    fringe[slot as usize].insert(y);
                }
            }
        }
        AnnulusFringe {
            component,
            fringe: fringe.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    fn of_index(&self, i: usize) -> &[Point] {
        match self.component[i] {
            NONE => &[],
            c => &self.fringe[c as usize],
        }
    }
}

fn check_domain(eta: &PartialConfiguration, n: u32, ell: u32) -> Result<BoxSpec> {
    let bbox = eta.bbox();
    let expected = BoxSpec::centered(bbox.dim(), crate::lattice::checked_radius(n, ell)?)?;
    if *bbox != expected {
        return Err(Error::BoxMismatch {
            expected,
            got: *bbox,
        });
    }
    let inner = expected.with_radius(n)?;
    for i in 0..bbox.volume() {
        let x = bbox.site(i);
        if inner.contains(&x) == eta.status_index(i).is_some() {
            return Err(Error::WrongDomain(format!(
                "annulus configuration must be defined exactly off Λ({n}); {x} disagrees"
            )));
        }
    }
    Ok(inner)
}

/// Step-by-step explorer; clone it to branch on both outcomes of a bit.
#[derive(Clone, Debug)]
pub struct Explorer {
    bbox: BoxSpec,
    inner: BoxSpec,
    fringe: std::sync::Arc<AnnulusFringe>,
    queued: Vec<bool>,
    state: ExplorationState,
}

impl Explorer {
    pub fn new(eta: &PartialConfiguration, x: &Point, n: u32, ell: u32) -> Result<Self> {
        let inner = check_domain(eta, n, ell)?;
        let bbox = *eta.bbox();
        let xi = bbox.index_of(x).ok_or(Error::OutsideBox {
            point: *x,
            bbox,
        })?;
        let fringe = AnnulusFringe::new(eta, &inner);
        // A site of Λ(n) starts alone: anything it reaches through the
        // annulus is picked up once it is found open.
        let start: Vec<Point> = if inner.contains(x) {
            vec![*x]
        } else {
            fringe.of_index(xi).to_vec()
        };
        let mut queued = vec![false; bbox.volume()];
        for s in &start {
            queued[bbox.index_of(s).expect("in box")] = true;
        }
        Ok(Explorer {
            bbox,
            inner,
            fringe: std::sync::Arc::new(fringe),
            queued,
            state: ExplorationState {
                active: start.into(),
                opened: BTreeSet::new(),
                closed_visited: BTreeSet::new(),
                step: 0,
            },
        })
    }

    pub fn state(&self) -> &ExplorationState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.active.is_empty()
    }

    /// The site the next bit decides.
    pub fn next_site(&self) -> Option<Point> {
        self.state.active.front().copied()
    }

    /// Consumes one bit for the front of the active queue.
    pub fn apply(&mut self, open: bool) {
        let Some(site) = self.state.active.pop_front() else {
            return;
        };
        self.state.step += 1;
        if !open {
            self.state.closed_visited.insert(site);
            return;
        }
        self.state.opened.insert(site);
        let mut fresh: Vec<Point> = site
            .neighbours()
            .filter(|y| self.inner.contains(y))
            .collect();
        for y in site.neighbours() {
            if let Some(j) = self.bbox.index_of(&y) {
                if !self.inner.contains(&y) {
                    fresh.extend_from_slice(self.fringe.of_index(j));
                }
            }
        }
        fresh.sort_unstable();
        fresh.dedup();
        for y in fresh {
            let j = self.bbox.index_of(&y).expect("inner site");
            if !self.queued[j] {
                self.queued[j] = true;
                self.state.active.push_back(y);
            }
        }
    }

    pub fn step(&mut self, bits: &mut dyn BitSource) -> Result<bool> {
        let Some(site) = self.next_site() else {
            return Ok(false);
        };
        let bit = bits
            .next_bit(&site)
            .ok_or(Error::BitSourceExhausted(self.state.step))?;
        self.apply(bit);
        Ok(true)
    }

    pub fn outcome(&self) -> ExplorationOutcome {
        let closure: BTreeSet<Point> = self
            .state
            .opened
            .union(&self.state.closed_visited)
            .copied()
            .collect();
        ExplorationOutcome {
            explored: closure.len(),
            opens: self.state.opened.len(),
            closure,
        }
    }

    pub fn run(mut self, bits: &mut dyn BitSource) -> Result<ExplorationOutcome> {
        while self.step(bits)? {}
        Ok(self.outcome())
    }
}

/// `A_0`: the sites of `Λ(n)` the exploration starts from.
pub fn initial_active_set(
    eta: &PartialConfiguration,
    x: &Point,
    n: u32,
    ell: u32,
) -> Result<BTreeSet<Point>> {
    Ok(Explorer::new(eta, x, n, ell)?.state.active.into_iter().collect())
}

pub fn explore(
    eta: &PartialConfiguration,
    bits: &mut dyn BitSource,
    x: &Point,
    n: u32,
    ell: u32,
) -> Result<ExplorationOutcome> {
    Explorer::new(eta, x, n, ell)?.run(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::label_clusters;
    use crate::sampler::{restrict, restrict_to_annulus, sample_configuration, ConfigBuilder, SeedSpec};
    use crate::statistics::{closure_counts, h_from_counts, h_statistic};

    fn pt(c: &[i32]) -> Point {
        Point::new(c).unwrap()
    }

    fn closed_eta(n: u32, ell: u32) -> PartialConfiguration {
        let b = BoxSpec::centered(2, n + ell).unwrap();
        restrict_to_annulus(&Configuration::all_closed(&b), n).unwrap()
    }

    #[test]
    fn initial_sets() {
        let origin = pt(&[0, 0]);
        let eta0 = closed_eta(2, 0);
        assert_eq!(initial_active_set(&eta0, &origin, 2, 0).unwrap(), [origin].into());
        assert!(initial_active_set(&closed_eta(1, 2), &pt(&[3, 0]), 1, 2).unwrap().is_empty());

        let b = BoxSpec::centered(2, 3).unwrap();
        let config = ConfigBuilder::closed(&b)
            .segment(&pt(&[3, 0]), 0, -1, 2, true)
            .unwrap()
            .build();
        let eta = restrict_to_annulus(&config, 1).unwrap();
        let start = initial_active_set(&eta, &pt(&[3, 0]), 1, 2).unwrap();
        assert_eq!(start, [pt(&[1, 0])].into());
    }

    #[test]
    fn single_closed_probe() {
        let eta = closed_eta(2, 1);
        let y = pt(&[1, 1]);
        let out = explore(&eta, &mut SequenceBits::new(std::iter::repeat(false)), &y, 2, 1).unwrap();
        assert_eq!(out.closure, [y].into());
        assert_eq!((out.explored, out.opens), (1, 0));
    }

    #[test]
    fn rejects_wrong_domain_and_exhaustion() {
        let b = BoxSpec::centered(2, 2).unwrap();
        let full = restrict(&Configuration::all_open(&b), b.sites().collect::<Vec<_>>().iter()).unwrap();
        assert!(matches!(
            Explorer::new(&full, &pt(&[0, 0]), 1, 1),
            Err(Error::WrongDomain(_))
        ));
        let eta = closed_eta(1, 1);
        let err = explore(&eta, &mut SequenceBits::new([true, true]), &pt(&[0, 0]), 1, 1);
        assert!(matches!(err, Err(Error::BitSourceExhausted(_))));
    }

    #[test]
    fn invariants_hold_at_every_step() {
        let outer = BoxSpec::centered(2, 5).unwrap();
        let inner = outer.with_radius(3).unwrap();
        let seed = SeedSpec::new(77);
        for i in 0..200 {
            let config = sample_configuration(&outer, 0.5927, &seed, i).unwrap();
            let eta = restrict_to_annulus(&config, 3).unwrap();
            let mut explorer = Explorer::new(&eta, &pt(&[0, 0]), 3, 2).unwrap();
            let mut bits = ReplayBits::new(&config);
            let mut visited = 0;
            while explorer.step(&mut bits).unwrap() {
                let s = explorer.state();
                let active: BTreeSet<Point> = s.active.iter().copied().collect();
                assert_eq!(active.len(), s.active.len());
                assert!(active.is_disjoint(&s.opened));
                assert!(active.is_disjoint(&s.closed_visited));
                assert!(s.opened.is_disjoint(&s.closed_visited));
                assert!(active.iter().chain(&s.opened).chain(&s.closed_visited).all(|x| inner.contains(x)));
                assert_eq!(s.opened.len() + s.closed_visited.len(), visited + 1);
                visited += 1;
                assert!(s.step <= inner.volume());
            }
        }
    }

    #[test]
    fn replay_matches_cluster_engine_everywhere() {
        let outer = BoxSpec::centered(2, 4).unwrap();
        let inner = outer.with_radius(2).unwrap();
        let seed = SeedSpec::new(13);
        let p = 0.5927;
        for i in 0..100 {
            let config = sample_configuration(&outer, p, &seed, i).unwrap();
            let eta = restrict_to_annulus(&config, 2).unwrap();
            let labeling = label_clusters(&config);
            for x in outer.sites() {
                let out = explore(&eta, &mut ReplayBits::new(&config), &x, 2, 2).unwrap();
                let expected = match labeling.label(&x) {
                    Some(l) => labeling.closure_of(l).closure_within(&inner),
                    None if inner.contains(&x) => [x].into(),
                    None => BTreeSet::new(),
                };
                assert_eq!(out.closure, expected, "sample {i}, x = {x}");
                assert_eq!((out.explored, out.opens), closure_counts(&labeling, &x, &inner));
                let h = h_statistic(out.closure.iter(), &config, &p).unwrap();
                let by_counts = h_from_counts(out.opens as u64, (out.explored - out.opens) as u64, &p).unwrap();
                let identity = (p * out.explored as f64 - out.opens as f64) / (p * (1.0 - p));
                assert!((h - by_counts).abs() < 1e-9 && (h - identity).abs() < 1e-9);
            }
        }
    }
}

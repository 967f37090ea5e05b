//! Open clusters of a configuration restricted to its box, cluster closures,
//! and the collection of clusters crossing from an inner box to the outer
//! boundary.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Point, Side};
use crate::sampler::Configuration;

/// Disjoint-set forest with union by size and path compression.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i as u32;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = i as u32;
        while cur != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root as usize
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

const NO_LABEL: u32 = u32::MAX;

/// Cluster label of every open site. A label is the smallest site index in
/// its cluster, so labels do not depend on union order.
pub struct ClusterLabeling<'a> {
    config: &'a Configuration,
    labels: Vec<u32>,
    count: usize,
    members: OnceLock<Vec<(u32, Vec<u32>)>>,
}

impl std::fmt::Debug for ClusterLabeling<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClusterLabeling")
            .field("bbox", self.config.bbox())
            .field("clusters", &self.count)
            .finish()
    }
}

pub fn label_clusters(config: &Configuration) -> ClusterLabeling<'_> {
    let bbox = config.bbox();
    let volume = bbox.volume();
    let dim = bbox.dim();
    let side = bbox.side();
    let strides = bbox.strides();
    let mut uf = UnionFind::new(volume);
    let mut local = [0usize; crate::lattice::MAX_DIM];
    for i in 0..volume {
        if config.is_open_index(i) {
            for axis in 0..dim {
                if local[axis] + 1 < side {
                    let j = i + strides[axis];
                    if config.is_open_index(j) {
                        uf.union(i, j);
                    }
                }
            }
        }
        for slot in local.iter_mut().take(dim) {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }

    let mut canonical = vec![NO_LABEL; volume];
    let mut labels = vec![NO_LABEL; volume];
    let mut count = 0;
    for (i, label) in labels.iter_mut().enumerate() {
        if config.is_open_index(i) {
            let root = uf.find(i);
            if canonical[root] == NO_LABEL {
                canonical[root] = i as u32;
                count += 1;
            }
            *label = canonical[root];
        }
    }
    ClusterLabeling {
        config,
        labels,
        count,
        members: OnceLock::new(),
    }
}

impl<'a> ClusterLabeling<'a> {
    pub fn config(&self) -> &'a Configuration {
        self.config
    }

    pub fn bbox(&self) -> &BoxSpec {
        self.config.bbox()
    }

    pub fn cluster_count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn label_index(&self, index: usize) -> Option<u32> {
        let l = self.labels[index];
        (l != NO_LABEL).then_some(l)
    }

    /// Label of the cluster containing `x`; `None` when `x` is closed or outside.
    pub fn label(&self, x: &Point) -> Option<u32> {
        self.bbox().index_of(x).and_then(|i| self.label_index(i))
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<u32>> + '_ {
        self.labels.iter().map(|&l| (l != NO_LABEL).then_some(l))
    }

    /// All clusters as (label, member site indices), sorted by label.
    pub fn clusters(&self) -> &[(u32, Vec<u32>)] {
        self.members.get_or_init(|| {
            let mut slot = vec![NO_LABEL; self.labels.len()];
            let mut groups: Vec<(u32, Vec<u32>)> = Vec::with_capacity(self.count);
            for (i, &l) in self.labels.iter().enumerate() {
                if l == NO_LABEL {
                    continue;
                }
                let s = &mut slot[l as usize];
                if *s == NO_LABEL {
                    *s = groups.len() as u32;
                    groups.push((l, Vec::new()));
                }
                groups[*s as usize].1.push(i as u32);
            }
            groups
        })
    }

    pub fn member_indices(&self, label: u32) -> &[u32] {
        let clusters = self.clusters();
        match clusters.binary_search_by_key(&label, |(l, _)| *l) {
            Ok(pos) => &clusters[pos].1,
            Err(_) => &[],
        }
    }

    pub fn members(&self, label: u32) -> BTreeSet<Point> {
        self.member_indices(label)
            .iter()
            .map(|&i| self.bbox().site(i as usize))
            .collect()
    }

    /// Labels of clusters meeting the internal boundary of the configuration box.
    pub fn boundary_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.labels.len()];
        for (i, on) in self.bbox().internal_boundary_mask().into_iter().enumerate() {
            if on {
                if let Some(l) = self.label_index(i) {
                    flags[l as usize] = true;
                }
            }
        }
        flags
    }

    pub fn connected(&self, x: &Point, y: &Point) -> bool {
        match (self.label(x), self.label(y)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub fn closure_of(&self, label: u32) -> Closure {
        closure_and_delta(&self.members(label))
    }
}

/// `C(x)`; empty when `x` is closed.
pub fn cluster_of(labeling: &ClusterLabeling<'_>, x: &Point) -> Result<BTreeSet<Point>> {
    if !labeling.bbox().contains(x) {
        return Err(Error::OutsideBox {
            point: *x,
            bbox: *labeling.bbox(),
        });
    }
    Ok(match labeling.label(x) {
        Some(l) => labeling.members(l),
        None => BTreeSet::new(),
    })
}

/// A set together with its external boundary, closure and the next shell out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub cluster: BTreeSet<Point>,
    /// `∂^out C` in the ambient lattice.
    pub outer_boundary: BTreeSet<Point>,
    /// `C ∪ ∂^out C`.
    pub closure: BTreeSet<Point>,
    /// Sites outside the closure adjacent to `∂^out C`.
    pub delta: BTreeSet<Point>,
}

impl Closure {
    pub fn closure_within(&self, bbox: &BoxSpec) -> BTreeSet<Point> {
        self.closure.iter().filter(|x| bbox.contains(x)).copied().collect()
    }

    pub fn outer_boundary_within(&self, bbox: &BoxSpec) -> BTreeSet<Point> {
        self.outer_boundary
            .iter()
            .filter(|x| bbox.contains(x))
            .copied()
            .collect()
    }

    pub fn delta_within(&self, bbox: &BoxSpec) -> BTreeSet<Point> {
        self.delta.iter().filter(|x| bbox.contains(x)).copied().collect()
    }
}

pub fn closure_and_delta(cluster: &BTreeSet<Point>) -> Closure {
    let outer_boundary: BTreeSet<Point> = cluster
        .iter()
        .flat_map(|x| x.neighbours().collect::<Vec<_>>())
        .filter(|y| !cluster.contains(y))
        .collect();
    let closure: BTreeSet<Point> = cluster.union(&outer_boundary).copied().collect();
    let delta = outer_boundary
        .iter()
        .flat_map(|x| x.neighbours().collect::<Vec<_>>())
        .filter(|y| !closure.contains(y))
        .collect();
    Closure {
        cluster: cluster.clone(),
        outer_boundary,
        closure,
        delta,
    }
}

/// Clusters of a configuration on `center + Λ(n+ell)` that meet both
/// `center + Λ(n)` and the internal boundary of the outer box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingClusters {
    pub n: u32,
    pub ell: u32,
    pub labels: Vec<u32>,
}

impl CrossingClusters {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Site indices (in `outer` numbering) of a box contained in `outer`.
pub(crate) fn sub_box_indices(outer: &BoxSpec, inner: &BoxSpec) -> Vec<usize> {
    inner
        .sites()
        .map(|x| outer.index_of(&x).expect("inner box inside outer box"))
        .collect()
}

pub fn crossing_clusters(labeling: &ClusterLabeling<'_>, n: u32) -> Result<CrossingClusters> {
    let outer = *labeling.bbox();
    if n > outer.radius() {
        return Err(Error::InvalidParameter(format!(
            "inner radius {n} exceeds {outer}"
        )));
    }
    let inner = outer.with_radius(n)?;
    let touches = labeling.boundary_flags();
    let mut labels: Vec<u32> = sub_box_indices(&outer, &inner)
        .into_iter()
        .filter_map(|i| labeling.label_index(i))
        .filter(|&l| touches[l as usize])
        .collect();
    labels.sort_unstable();
    labels.dedup();
    let crossing = CrossingClusters {
        n,
        ell: outer.radius() - n,
        labels,
    };
    assert!(
        crossing.len() <= inner.internal_boundary_len(),
        "{} crossing clusters exceed |∂^in Λ({n})|",
        crossing.len()
    );
    Ok(crossing)
}

/// Convenience wrapper labelling `config` first.
pub fn crossing_clusters_of(config: &Configuration, n: u32) -> Result<CrossingClusters> {
    crossing_clusters(&label_clusters(config), n)
}

/// `∂^in` of an arbitrary finite set, for callers needing it outside boxes.
pub fn internal_boundary_of(set: &BTreeSet<Point>) -> BTreeSet<Point> {
    set.iter()
        .filter(|x| x.neighbours().any(|y| !set.contains(&y)))
        .copied()
        .collect()
}

pub fn box_boundary(bbox: &BoxSpec) -> BTreeSet<Point> {
    crate::lattice::boundary(bbox, Side::Internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::ConfigBuilder;

    fn p(c: &[i32]) -> Point {
        Point::new(c).unwrap()
    }

    fn square(n: u32) -> BoxSpec {
        BoxSpec::centered(2, n).unwrap()
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(3));
        assert_eq!(uf.len(), 5);
    }

    #[test]
    fn fully_open_and_closed_boxes() {
        let b = square(1);
        let open = Configuration::all_open(&b);
        let lab = label_clusters(&open);
        assert_eq!(lab.cluster_count(), 1);
        assert_eq!(lab.members(0).len(), 9);
        assert_eq!(cluster_of(&lab, &p(&[0, 0])).unwrap().len(), 9);

        let closed = Configuration::all_closed(&b);
        let lab = label_clusters(&closed);
        assert_eq!(lab.cluster_count(), 0);
        assert!(cluster_of(&lab, &p(&[0, 0])).unwrap().is_empty());
        assert!(cluster_of(&lab, &p(&[2, 0])).is_err());
    }

    #[test]
    fn checkerboard_is_all_singletons() {
        let b = square(2);
        let statuses: Vec<bool> = b
            .sites()
            .map(|x| (x.coord(0) + x.coord(1)).rem_euclid(2) == 0)
            .collect();
        let config = Configuration::from_statuses(&b, &statuses).unwrap();
        let lab = label_clusters(&config);
        assert_eq!(lab.cluster_count(), 13);
        assert!(lab.clusters().iter().all(|(_, m)| m.len() == 1));
    }

    #[test]
    fn labels_are_smallest_indices() {
        let b = square(2);
        let config = ConfigBuilder::closed(&b)
            .segment(&p(&[-2, 1]), 0, 1, 5, true)
            .unwrap()
            .build();
        let lab = label_clusters(&config);
        let expected = b.index_of(&p(&[-2, 1])).unwrap() as u32;
        assert_eq!(lab.label(&p(&[2, 1])), Some(expected));
    }

    #[test]
    fn singleton_closure_and_delta() {
        let c: BTreeSet<Point> = [p(&[0, 0])].into_iter().collect();
        let cl = closure_and_delta(&c);
        assert_eq!(cl.closure.len(), 5);
        assert_eq!(cl.delta.len(), 8);
        assert!(cl.delta.iter().all(|z| z.l1_distance(&p(&[0, 0])) == 2));
        assert!(cl.delta.is_disjoint(&cl.closure));
    }

    #[test]
    fn closure_at_box_edge_uses_ambient_lattice() {
        let b = square(1);
        let config = ConfigBuilder::closed(&b).open_site(&p(&[1, 1])).unwrap().build();
        let lab = label_clusters(&config);
        let cl = lab.closure_of(lab.label(&p(&[1, 1])).unwrap());
        assert_eq!(cl.outer_boundary.len(), 4);
        assert_eq!(cl.outer_boundary_within(&b).len(), 2);
        assert_eq!(cl.closure_within(&b).len(), 3);
    }

    #[test]
    fn crossing_counts() {
        let b = square(4);
        assert_eq!(crossing_clusters_of(&Configuration::all_open(&b), 1).unwrap().len(), 1);
        assert_eq!(crossing_clusters_of(&Configuration::all_closed(&b), 1).unwrap().len(), 0);

        let config = ConfigBuilder::closed(&b)
            .open_ray(&p(&[-1, 0]), 1, 1)
            .unwrap()
            .open_ray(&p(&[1, 0]), 1, 1)
            .unwrap()
            .build();
        let crossing = crossing_clusters_of(&config, 1).unwrap();
        assert_eq!(crossing.len(), 2);
        assert_eq!(crossing.ell, 3);
        assert!(crossing_clusters_of(&config, 5).is_err());
    }

    #[test]
    fn internal_boundary_of_set() {
        let c: BTreeSet<Point> = square(1).sites().collect();
        assert_eq!(internal_boundary_of(&c), box_boundary(&square(1)));
    }
}

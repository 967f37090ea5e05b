use std::collections::BTreeSet;

use serde::Serialize;

use crate::cluster::{crossing_clusters, label_clusters, sub_box_indices, ClusterLabeling};
use crate::error::Result;
use crate::lattice::Point;
use crate::sampler::Configuration;

/// The sets `F`, `G`, `H` of a configuration on `Λ(n+ell)`.
///
/// `F` collects the sites of `Λ(n)` lying in a crossing cluster, `G` the
/// sites of `Λ(n)` in the external boundary of one, and `H` the sites of
/// `Λ(n)` in the external boundaries of two distinct ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FghSets {
    pub n: u32,
    pub f: BTreeSet<Point>,
    pub g: BTreeSet<Point>,
    pub h: BTreeSet<Point>,
    /// `Σ_C |∂^out C ∩ Λ(n)|` over crossing clusters.
    pub boundary_incidences: usize,
}

impl FghSets {
    pub fn union_len(&self) -> usize {
        self.f.len() + self.g.len()
    }
}

/// Distinct crossing labels among the in-box neighbours of `x`, written into `out`.
fn adjacent_labels(
    labeling: &ClusterLabeling<'_>,
    crossing: &[bool],
    x: &Point,
    out: &mut Vec<u32>,
) {
    out.clear();
    for y in x.neighbours() {
        if let Some(l) = labeling.label(&y) {
            if crossing[l as usize] && !out.contains(&l) {
                out.push(l);
            }
        }
    }
}

fn crossing_mask(labeling: &ClusterLabeling<'_>, n: u32) -> Result<Vec<bool>> {
    let crossing = crossing_clusters(labeling, n)?;
    let mut mask = vec![false; labeling.bbox().volume()];
    for l in crossing.labels {
        mask[l as usize] = true;
    }
    Ok(mask)
}

pub fn compute_fgh(config: &Configuration, n: u32) -> Result<FghSets> {
    let labeling = label_clusters(config);
    let crossing = crossing_mask(&labeling, n)?;
    let bbox = config.bbox();
    let inner = bbox.with_radius(n)?;
    let mut sets = FghSets {
        n,
        f: BTreeSet::new(),
        g: BTreeSet::new(),
        h: BTreeSet::new(),
        boundary_incidences: 0,
    };
    let mut around = Vec::with_capacity(8);
    for i in sub_box_indices(bbox, &inner) {
        let x = bbox.site(i);
        match labeling.label_index(i) {
            Some(l) => {
                if crossing[l as usize] {
                    sets.f.insert(x);
                }
            }
            None => {
                adjacent_labels(&labeling, &crossing, &x, &mut around);
                sets.boundary_incidences += around.len();
                if !around.is_empty() {
                    sets.g.insert(x);
                }
                if around.len() >= 2 {
                    sets.h.insert(x);
                }
            }
        }
    }
    Ok(sets)
}

fn reaches_boundary(labeling: &ClusterLabeling<'_>, touches: &[bool], y: &Point) -> bool {
    labeling
        .label(y)
        .map(|l| touches[l as usize])
        .unwrap_or(false)
}

/// Sites of `Λ(n)` where membership in `F ∪ G` disagrees with "some
/// neighbour is joined to `∂^in Λ(n+ell)` by an open path". All of them lie
/// on `∂^in Λ(n)`: an isolated open site of the outer boundary when
/// `ell = 0`, or a closed site touching a cluster that reaches the outer
/// boundary without entering `Λ(n)`.
pub fn characterization_mismatches(config: &Configuration, n: u32) -> Result<Vec<Point>> {
    let fgh = compute_fgh(config, n)?;
    let labeling = label_clusters(config);
    let touches = labeling.boundary_flags();
    let inner = config.bbox().with_radius(n)?;
    Ok(inner
        .sites()
        .filter(|x| {
            let member = fgh.f.contains(x) || fgh.g.contains(x);
            let armed = x.neighbours().any(|y| reaches_boundary(&labeling, &touches, &y));
            member != armed
        })
        .collect())
}

/// Sites of `Λ(n)` having a neighbour joined to `∂^in Λ(n+ell)` by an open
/// path that avoids the site itself, split by the site's own status. The
/// event does not look at the site, so `E|open| = p E|open ∪ closed|` holds
/// exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighbourArmSets {
    pub open: BTreeSet<Point>,
    pub closed: BTreeSet<Point>,
}

pub fn neighbour_arm_sets(config: &Configuration, n: u32) -> Result<NeighbourArmSets> {
    let inner = config.bbox().with_radius(n)?;
    let labeling = label_clusters(config);
    let touches = labeling.boundary_flags();
    let mut sets = NeighbourArmSets {
        open: BTreeSet::new(),
        closed: BTreeSet::new(),
    };
    for x in inner.sites() {
        if config.is_open(&x) {
            let mut without = config.clone();
            without.set(&x, false)?;
            let relabeled = label_clusters(&without);
            let flags = relabeled.boundary_flags();
            if x.neighbours().any(|y| reaches_boundary(&relabeled, &flags, &y)) {
                sets.open.insert(x);
            }
        } else if x.neighbours().any(|y| reaches_boundary(&labeling, &touches, &y)) {
            sets.closed.insert(x);
        }
    }
    Ok(sets)
}

/// Largest number of crossing-cluster closures `C̄` sharing a site of the box.
pub fn closure_multiplicity(config: &Configuration, n: u32) -> Result<usize> {
    let labeling = label_clusters(config);
    let crossing = crossing_mask(&labeling, n)?;
    let mut around = Vec::with_capacity(8);
    let mut worst = 0;
    for (i, x) in config.bbox().sites().enumerate() {
        let count = match labeling.label_index(i) {
            Some(l) => usize::from(crossing[l as usize]),
            None => {
                adjacent_labels(&labeling, &crossing, &x, &mut around);
                around.len()
            }
        };
        worst = worst.max(count);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::sampler::{sample_configuration, ConfigBuilder, SeedSpec};

    fn square(n: u32) -> BoxSpec {
        BoxSpec::centered(2, n).unwrap()
    }

    #[test]
    fn extremes() {
        let open = compute_fgh(&Configuration::all_open(&square(3)), 2).unwrap();
        assert_eq!(open.f.len(), 25);
        assert!(open.g.is_empty() && open.h.is_empty());
        let closed = compute_fgh(&Configuration::all_closed(&square(3)), 2).unwrap();
        assert!(closed.f.is_empty() && closed.g.is_empty() && closed.h.is_empty());
    }

    #[test]
    fn two_columns_share_a_closed_separator() {
        let p = |c: &[i32]| Point::new(c).unwrap();
        let config = ConfigBuilder::closed(&square(3))
            .segment(&p(&[-1, -3]), 1, 1, 7, true)
            .unwrap()
            .segment(&p(&[1, -3]), 1, 1, 7, true)
            .unwrap()
            .build();
        let sets = compute_fgh(&config, 1).unwrap();
        assert_eq!(sets.f.len(), 6);
        assert_eq!(sets.h, [p(&[0, -1]), p(&[0, 0]), p(&[0, 1])].into_iter().collect());
        assert_eq!(sets.g.len(), 3);
        assert_eq!(sets.boundary_incidences, 6);
    }

    #[test]
    fn structural_invariants_on_samples() {
        let seed = SeedSpec::new(11);
        for i in 0..200 {
            let config = sample_configuration(&square(4), 0.59, &seed, i).unwrap();
            let sets = compute_fgh(&config, 2).unwrap();
            assert!(sets.f.is_disjoint(&sets.g));
            assert!(sets.h.is_subset(&sets.g));
            assert!(sets.f.iter().all(|x| config.is_open(x)));
            assert!(sets.g.iter().all(|x| !config.is_open(x)));
            // |H| <= Σ|∂^out C ∩ Λ(n)| - |G|
            assert!(sets.h.len() <= sets.boundary_incidences - sets.g.len());
            let inner = square(2);
            for x in characterization_mismatches(&config, 2).unwrap() {
                assert!(inner.is_internal_boundary(&x), "{x} is interior");
            }
            assert!(closure_multiplicity(&config, 2).unwrap() <= 4);
        }
    }

    #[test]
    fn isolated_corner_is_the_zero_width_mismatch() {
        let corner = Point::new(&[1, 1]).unwrap();
        let config = ConfigBuilder::closed(&square(1)).open_site(&corner).unwrap().build();
        let sets = compute_fgh(&config, 1).unwrap();
        assert!(sets.f.contains(&corner));
        assert_eq!(characterization_mismatches(&config, 1).unwrap(), vec![corner]);
        let arms = neighbour_arm_sets(&config, 1).unwrap();
        assert!(!arms.open.contains(&corner));
    }
}

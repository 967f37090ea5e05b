//! The explorer, driven by fresh bits, reproduces the law of `C̄(x) ∩ Λ(n)`.

use std::collections::BTreeMap;

use percolab::exploration::Explorer;
use percolab::oracle::{enumerate_law, masks, EnumerationPlan, SmallBox};
use percolab::sampler::restrict_to_annulus;
use percolab::{BoxSpec, Configuration, Point};

type Counts = BTreeMap<(u32, u32), Vec<u64>>;

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * u64::from(n - i) / u64::from(i + 1))
}

/// Walks every bit sequence the explorer can ask for, crediting each leaf
/// with the full configurations it stands for.
fn branch(explorer: Explorer, base_open: u32, inner_volume: u32, volume: usize, out: &mut Counts) {
    if explorer.is_done() {
        let outcome = explorer.outcome();
        let key = (outcome.explored as u32, outcome.opens as u32);
        let free = inner_volume - explorer.state().step as u32;
        let slot = out.entry(key).or_insert_with(|| vec![0; volume + 1]);
        for j in 0..=free {
            slot[(base_open + outcome.opens as u32 + j) as usize] += binomial(free, j);
        }
        return;
    }
    let mut open = explorer.clone();
    open.apply(true);
    branch(open, base_open, inner_volume, volume, out);
    let mut closed = explorer;
    closed.apply(false);
    branch(closed, base_open, inner_volume, volume, out);
}

fn check_site(x: Point, n: u32, ell: u32) {
    let bbox = BoxSpec::centered(2, n + ell).unwrap();
    let inner = BoxSpec::centered(2, n).unwrap();
    let geometry = SmallBox::new(&bbox).unwrap();
    let inner_mask = geometry.box_mask(&inner);
    let annulus_bits: Vec<u32> = (0..bbox.volume() as u32)
        .filter(|b| inner_mask >> b & 1 == 0)
        .collect();
    let volume = bbox.volume();

    let mut explored = Counts::new();
    for sub in 0u64..1 << annulus_bits.len() {
        let mask = annulus_bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, b)| m | (sub >> i & 1) << b);
        let config = Configuration::from_mask(&bbox, mask).unwrap();
        let eta = restrict_to_annulus(&config, n).unwrap();
        let explorer = Explorer::new(&eta, &x, n, ell).unwrap();
        branch(explorer, sub.count_ones(), inner.volume() as u32, volume, &mut explored);
    }

    let x_bit = geometry.bit(&x).unwrap();
    let plan = EnumerationPlan::with_override(bbox).unwrap();
    let law = enumerate_law(&plan, |c| masks::closure(c.geometry, c.open, x_bit, inner_mask)).unwrap();

    let keys: Vec<_> = law.keys().cloned().collect();
    assert_eq!(keys, explored.keys().cloned().collect::<Vec<_>>(), "support differs at {x}");
    for key in keys {
        for m in 0..=volume {
            assert_eq!(law.count(&key, m), explored[&key][m], "{x}: key {key:?}, {m} open");
        }
    }
}

#[test]
fn joint_law_at_the_centre() {
    check_site(Point::origin(2).unwrap(), 1, 1);
}

#[test]
fn joint_law_at_a_corner_of_the_inner_box() {
    check_site(Point::new(&[1, -1]).unwrap(), 1, 1);
}

#[test]
fn joint_law_from_the_annulus() {
    check_site(Point::new(&[2, 1]).unwrap(), 1, 1);
}

#[test]
fn joint_law_without_annulus() {
    check_site(Point::new(&[0, 1]).unwrap(), 2, 0);
}

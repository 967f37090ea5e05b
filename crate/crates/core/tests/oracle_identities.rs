//! Exact identities by full enumeration.

use num_traits::{One, Zero};
use percolab::oracle::{enumerate_sums, masks, EnumerationPlan, SmallBox, Sums};
use percolab::{BoxSpec, Point, Rational};

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn plan(n: u32, ell: u32) -> EnumerationPlan {
    EnumerationPlan::with_override(BoxSpec::centered(2, n + ell).unwrap()).unwrap()
}

fn probabilities() -> [Rational; 3] {
    [q(1, 3), q(1, 2), q(2, 3)]
}

fn h_mean(sums: &Sums<2>, p: &Rational) -> Rational {
    let explored = sums.expectation(0, p);
    let opens = sums.expectation(1, p);
    (explored - &opens) / (Rational::one() - p) - opens / p
}

#[test]
fn h_has_mean_zero_for_every_site() {
    let (n, ell) = (1, 0);
    let plan = plan(n, ell);
    let geometry = SmallBox::new(plan.bbox()).unwrap();
    let inner = geometry.box_mask(&BoxSpec::centered(2, n).unwrap());
    for x in plan.bbox().sites() {
        let bit = geometry.bit(&x).unwrap();
        let sums = enumerate_sums(&plan, |c| {
            let (k, o) = masks::closure(c.geometry, c.open, bit, inner);
            [i64::from(k), i64::from(o)]
        })
        .unwrap();
        for p in probabilities() {
            assert!(h_mean(&sums, &p).is_zero(), "x={x}, p={p}");
        }
    }
}

#[test]
fn h_has_mean_zero_with_an_annulus() {
    let (n, ell) = (1, 1);
    let plan = plan(n, ell);
    let geometry = SmallBox::new(plan.bbox()).unwrap();
    let inner = geometry.box_mask(&BoxSpec::centered(2, n).unwrap());
    for x in [Point::origin(2).unwrap(), Point::new(&[2, -1]).unwrap()] {
        let bit = geometry.bit(&x).unwrap();
        let sums = enumerate_sums(&plan, |c| {
            let (k, o) = masks::closure(c.geometry, c.open, bit, inner);
            [i64::from(k), i64::from(o)]
        })
        .unwrap();
        for p in probabilities() {
            assert!(h_mean(&sums, &p).is_zero(), "x={x}, p={p}");
        }
    }
}

#[test]
fn literal_f_and_g_miss_the_identity_by_known_amounts() {
    let plan = plan(1, 0);
    let geometry = SmallBox::new(plan.bbox()).unwrap();
    let inner = geometry.box_mask(plan.bbox());
    let sums = enumerate_sums(&plan, |c| {
        let (f, g, _) = masks::fgh(c.geometry, c.open, inner);
        [i64::from(f), i64::from(g)]
    })
    .unwrap();
    // Residuals of E|F| - p E|F ∪ G| from an independent brute force.
    let expected = [q(4576, 6561), q(25, 64), q(880, 6561)];
    for (p, want) in probabilities().iter().zip(expected) {
        let f = sums.expectation(0, p);
        let g = sums.expectation(1, p);
        let union = &f + &g;
        assert_eq!(&f - p * &union, want, "p={p}");
        assert_eq!(&g - (Rational::one() - p) * &union, -want, "p={p}");
    }
}

#[test]
fn neighbour_arm_split_is_exact() {
    for (n, ell) in [(1, 0), (1, 1)] {
        let plan = plan(n, ell);
        let geometry = SmallBox::new(plan.bbox()).unwrap();
        let inner = geometry.box_mask(&BoxSpec::centered(2, n).unwrap());
        let sums = enumerate_sums(&plan, |c| {
            let (on, off) = masks::neighbour_arms(c.geometry, c.open, inner);
            [i64::from(on), i64::from(off)]
        })
        .unwrap();
        for p in probabilities() {
            let on = sums.expectation(0, &p);
            let off = sums.expectation(1, &p);
            let total = &on + &off;
            assert!(!total.is_zero());
            assert_eq!(on, &p * &total, "n={n}, ell={ell}, p={p}");
            assert_eq!(off, (Rational::one() - &p) * &total, "n={n}, ell={ell}, p={p}");
        }
    }
}

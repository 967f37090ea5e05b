//! Geometry of the integer lattice: points, cubic boxes, boundaries and the
//! site indexing every other module relies on.
//!
//! Sites of a box are numbered row-major with the lowest coordinate varying
//! fastest: the site `x` of `center + Λ(n)` has index
//! `Σ_j (x_j - center_j + n) * (2n+1)^j`. Bit-packed configurations and
//! serialized payloads use this order, so it must never change.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

/// Coordinates (and center offsets plus radii) stay below this bound.
pub const COORD_LIMIT: i64 = 1 << 20;

/// A point of `Z^d`, `2 <= d <= 4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl Point {
    pub fn new(coords: &[i32]) -> Result<Self> {
        check_dim(coords.len())?;
        let mut buf = [0; MAX_DIM];
        for (slot, &c) in buf.iter_mut().zip(coords) {
            if i64::from(c).abs() >= COORD_LIMIT {
                return Err(Error::CoordinateOverflow(i64::from(c)));
            }
            *slot = c;
        }
        Ok(Point {
            dim: coords.len() as u8,
            coords: buf,
        })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Point {
            dim: dim as u8,
            coords: [0; MAX_DIM],
        })
    }

    /// The point `value * e_axis`.
    pub fn on_axis(dim: usize, axis: usize, value: i32) -> Result<Self> {
        let mut p = Point::origin(dim)?;
        if axis >= dim {
            return Err(Error::InvalidParameter(format!("axis {axis} in dimension {dim}")));
        }
        p.coords[axis] = value;
        Ok(p)
    }

    /// Parses a comma separated coordinate list such as `"-2,0"`.
    pub fn parse(text: &str) -> Result<Self> {
        let coords = text
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::Parse(format!("bad coordinate {c:?} in point {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Point::new(&coords)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    pub fn offset(&self, axis: usize, delta: i32) -> Point {
        let mut p = *self;
        p.coords[axis] += delta;
        p
    }

    pub fn translate(&self, by: &Point) -> Point {
        let mut p = *self;
        for axis in 0..self.dim() {
            p.coords[axis] += by.coords[axis];
        }
        p
    }

    pub fn l1_distance(&self, other: &Point) -> i64 {
        (0..self.dim())
            .map(|a| (i64::from(self.coords[a]) - i64::from(other.coords[a])).abs())
            .sum()
    }

    pub fn linf_distance(&self, other: &Point) -> i64 {
        (0..self.dim())
            .map(|a| (i64::from(self.coords[a]) - i64::from(other.coords[a])).abs())
            .max()
            .unwrap_or(0)
    }

    /// The `2d` nearest neighbours, axis by axis, minus before plus.
    pub fn neighbours(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.dim()).flat_map(move |axis| [self.offset(axis, -1), self.offset(axis, 1)])
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for Point {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Point::parse(text)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for c in self.coords() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Nearest neighbours of `x` in `Z^dim`.
pub fn neighbors(x: &Point, dim: usize) -> Result<Vec<Point>> {
    check_dim(dim)?;
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.dim(),
        });
    }
    Ok(x.neighbours().collect())
}

/// The cubic box `center + Λ(radius)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxSpec {
    center: Point,
    radius: u32,
}

impl BoxSpec {
    pub fn new(center: Point, radius: u32) -> Result<Self> {
        for &c in center.coords() {
            let extent = i64::from(c).abs() + i64::from(radius);
            if extent >= COORD_LIMIT {
                return Err(Error::CoordinateOverflow(extent));
            }
        }
        Ok(BoxSpec { center, radius })
    }

    /// `Λ(radius)` centered at the origin.
    pub fn centered(dim: usize, radius: u32) -> Result<Self> {
        BoxSpec::new(Point::origin(dim)?, radius)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    #[inline]
    pub fn center(&self) -> Point {
        self.center
    }

    #[inline]
    pub fn radius(&self) -> u32 {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    pub fn volume(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    /// Same center, different radius.
    pub fn with_radius(&self, radius: u32) -> Result<Self> {
        BoxSpec::new(self.center, radius)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim() && x.linf_distance(&self.center) <= i64::from(self.radius)
    }

    pub fn contains_box(&self, other: &BoxSpec) -> bool {
        other.dim() == self.dim()
            && other.center.linf_distance(&self.center) + i64::from(other.radius)
                <= i64::from(self.radius)
    }

    /// Index of `x` in the row-major order, `None` outside the box.
    pub fn index_of(&self, x: &Point) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let side = self.side();
        let n = self.radius as i32;
        let mut index = 0usize;
        for axis in (0..self.dim()).rev() {
            let local = (x.coord(axis) - self.center.coord(axis) + n) as usize;
            index = index * side + local;
        }
        Some(index)
    }

    /// Inverse of [`BoxSpec::index_of`]. Panics when `index >= volume`.
    pub fn site(&self, mut index: usize) -> Point {
        assert!(index < self.volume(), "site index {index} out of range for {self}");
        let side = self.side();
        let n = self.radius as i32;
        let mut p = self.center;
        for axis in 0..self.dim() {
            let local = (index % side) as i32;
            index /= side;
            p.coords[axis] = self.center.coord(axis) - n + local;
        }
        p
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.volume()).map(move |i| self.site(i))
    }

    /// Index distance between neighbours along each axis.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for stride in strides.iter_mut().take(self.dim()) {
            *stride = s;
            s *= self.side();
        }
        strides
    }

    pub fn is_internal_boundary(&self, x: &Point) -> bool {
        self.contains(x) && x.linf_distance(&self.center) == i64::from(self.radius)
    }

    /// Per-site flags for the internal boundary, indexed like the box.
    pub fn internal_boundary_mask(&self) -> Vec<bool> {
        let side = self.side();
        let last = side - 1;
        let dim = self.dim();
        (0..self.volume())
            .map(|mut i| {
                let mut on_edge = false;
                for _ in 0..dim {
                    let local = i % side;
                    i /= side;
                    on_edge |= local == 0 || local == last;
                }
                on_edge
            })
            .collect()
    }

    /// `|∂^in box|`, computed from the closed form.
    pub fn internal_boundary_len(&self) -> usize {
        let d = self.dim() as u32;
        if self.radius == 0 {
            1
        } else {
            self.side().pow(d) - (self.side() - 2).pow(d)
        }
    }
}

impl fmt::Debug for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+Λ({})", self.center, self.radius)
    }
}

impl Serialize for BoxSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("BoxSpec", 3)?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("center", &self.center)?;
        s.serialize_field("radius", &self.radius)?;
        s.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Internal,
    External,
}

/// Internal or external boundary of a box, taken in the ambient lattice.
pub fn boundary(bbox: &BoxSpec, side: Side) -> BTreeSet<Point> {
    let mask = bbox.internal_boundary_mask();
    let internal = mask
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| bbox.site(i));
    match side {
        Side::Internal => internal.collect(),
        Side::External => internal
            .flat_map(|x| x.neighbours().collect::<Vec<_>>())
            .filter(|y| !bbox.contains(y))
            .collect(),
    }
}

/// `Λ(n+ell) \ Λ(n)` around the origin.
pub fn annulus_sites(n: u32, ell: u32, dim: usize) -> Result<BTreeSet<Point>> {
    let inner = BoxSpec::centered(dim, n)?;
    let outer = BoxSpec::centered(dim, checked_radius(n, ell)?)?;
    Ok(outer.sites().filter(|x| !inner.contains(x)).collect())
}

pub(crate) fn checked_radius(n: u32, ell: u32) -> Result<u32> {
    let total = i64::from(n) + i64::from(ell);
    if total >= COORD_LIMIT {
        return Err(Error::CoordinateOverflow(total));
    }
    Ok(total as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i32]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn internal_boundary_of_small_square() {
        let b = BoxSpec::centered(2, 1).unwrap();
        let bd = boundary(&b, Side::Internal);
        assert_eq!(bd.len(), 8);
        assert!(!bd.contains(&p(&[0, 0])));

        let b0 = BoxSpec::centered(2, 0).unwrap();
        let bd0 = boundary(&b0, Side::Internal);
        assert_eq!(bd0.into_iter().collect::<Vec<_>>(), vec![p(&[0, 0])]);
    }

    #[test]
    fn internal_boundary_bound_for_many_radii() {
        for n in 1..=8 {
            for dim in 2..=3 {
                let b = BoxSpec::centered(dim, n).unwrap();
                let len = boundary(&b, Side::Internal).len();
                assert_eq!(len, b.internal_boundary_len());
                let bound = 2 * dim * (2 * n as usize + 1).pow(dim as u32 - 1);
                assert!(len <= bound, "n={n} d={dim}: {len} > {bound}");
            }
        }
    }

    #[test]
    fn external_boundary_excludes_corners() {
        let b = BoxSpec::centered(2, 1).unwrap();
        let ext = boundary(&b, Side::External);
        assert_eq!(ext.len(), 12);
        assert!(!ext.contains(&p(&[2, 2])));
        assert!(ext.iter().all(|x| !b.contains(x)));
    }

    #[test]
    fn neighbour_order_and_count() {
        let o = Point::origin(2).unwrap();
        assert_eq!(
            neighbors(&o, 2).unwrap(),
            vec![p(&[-1, 0]), p(&[1, 0]), p(&[0, -1]), p(&[0, 1])]
        );
        let o3 = Point::origin(3).unwrap();
        let nb = neighbors(&o3, 3).unwrap();
        assert_eq!(nb.len(), 6);
        assert!(!nb.contains(&o3));
        assert!(neighbors(&o3, 2).is_err());
    }

    #[test]
    fn annulus_cardinalities() {
        assert!(annulus_sites(1, 0, 2).unwrap().is_empty());
        assert_eq!(annulus_sites(1, 1, 2).unwrap().len(), 16);
        assert_eq!(annulus_sites(2, 3, 3).unwrap().len(), 1206);
    }

    #[test]
    fn boundary_plus_interior_is_volume() {
        for dim in 2..=3 {
            for n in 0..=6 {
                let b = BoxSpec::centered(dim, n).unwrap();
                let interior = b
                    .sites()
                    .filter(|x| x.neighbours().all(|y| b.contains(&y)))
                    .count();
                assert_eq!(boundary(&b, Side::Internal).len() + interior, b.volume());
            }
        }
    }

    #[test]
    fn boundary_and_annulus_stay_outside_inner_box() {
        for ell in 1..=3 {
            let inner = BoxSpec::centered(2, 2).unwrap();
            let outer = BoxSpec::centered(2, 2 + ell).unwrap();
            for x in boundary(&outer, Side::Internal)
                .iter()
                .chain(annulus_sites(2, ell, 2).unwrap().iter())
            {
                assert!(outer.contains(x));
                assert!(!inner.contains(x));
            }
        }
    }

    #[test]
    fn index_round_trip_translated_box() {
        let b = BoxSpec::new(p(&[3, -2, 5]), 2).unwrap();
        for i in 0..b.volume() {
            assert_eq!(b.index_of(&b.site(i)), Some(i));
        }
        assert_eq!(b.site(0), p(&[1, -4, 3]));
        assert_eq!(b.site(1), p(&[2, -4, 3]));
        assert_eq!(b.index_of(&p(&[0, 0, 0])), None);
    }

    #[test]
    fn overflow_guard() {
        assert!(BoxSpec::centered(2, 1 << 20).is_err());
        assert!(checked_radius((1 << 20) - 1, 1).is_err());
        assert!(Point::new(&[1, 2, 3, 4, 5]).is_err());
        assert!(Point::new(&[1]).is_err());
    }

    #[test]
    fn parse_point() {
        assert_eq!(Point::parse("-2,0").unwrap(), p(&[-2, 0]));
        assert_eq!(Point::parse("(1, 2, 3)").unwrap(), p(&[1, 2, 3]));
        assert!(Point::parse("1;2").is_err());
    }
}

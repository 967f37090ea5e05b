//! Event detectors evaluated on a single configuration.
//!
//! Box events are defined relative to the center of the configuration box,
//! so the same code serves `Λ(n)` and its translates.

use serde::Serialize;

use crate::cluster::{crossing_clusters, label_clusters, sub_box_indices};
use crate::error::{Error, Result};
use crate::lattice::{checked_radius, BoxSpec, Point};
use crate::sampler::Configuration;
use crate::statistics::h_statistic;

/// Anything that can be decided on a configuration of a fixed box.
pub trait Event: Sync {
    /// The box on which configurations must be drawn.
    fn bbox(&self) -> &BoxSpec;

    fn holds(&self, config: &Configuration) -> Result<bool>;

    fn describe(&self) -> String;
}

fn require_box(config: &Configuration, expected: &BoxSpec) -> Result<()> {
    if config.bbox() != expected {
        return Err(Error::BoxMismatch {
            expected: *expected,
            got: *config.bbox(),
        });
    }
    Ok(())
}

/// `two-arms(x, n)`: in the configuration restricted to `x + Λ(n)`, two
/// neighbours of `x` lie in distinct open clusters that both reach the
/// internal boundary of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoArmsSiteSpec {
    pub x: Point,
    pub n: u32,
    #[serde(skip)]
    bbox: BoxSpec,
}

impl TwoArmsSiteSpec {
    pub fn new(x: Point, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("two-arms(x, n) needs n >= 1".into()));
        }
        Ok(TwoArmsSiteSpec {
            x,
            n,
            bbox: BoxSpec::new(x, n)?,
        })
    }

    pub fn at_origin(dim: usize, n: u32) -> Result<Self> {
        TwoArmsSiteSpec::new(Point::origin(dim)?, n)
    }
}

pub fn two_arms_site(config: &Configuration, spec: &TwoArmsSiteSpec) -> Result<bool> {
    require_box(config, &spec.bbox)?;
    let labeling = label_clusters(config);
    let touches = labeling.boundary_flags();
    let mut arm: Option<u32> = None;
    for y in spec.x.neighbours() {
        if let Some(l) = labeling.label(&y) {
            if touches[l as usize] {
                match arm {
                    None => arm = Some(l),
                    Some(first) if first != l => return Ok(true),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(false)
}

impl Event for TwoArmsSiteSpec {
    fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    fn holds(&self, config: &Configuration) -> Result<bool> {
        two_arms_site(config, self)
    }

    fn describe(&self) -> String {
        format!("two_arms_site(x={}, n={})", self.x, self.n)
    }
}

/// `two-arms(Λ(n), a, b, ell)`: the clusters of `a` and `b` in `Λ(n+ell)` are
/// non-empty, disjoint, and both meet `∂^in Λ(n+ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoArmsPairSpec {
    pub n: u32,
    pub a: Point,
    pub b: Point,
    pub ell: u32,
    #[serde(skip)]
    bbox: BoxSpec,
}

impl TwoArmsPairSpec {
    pub fn new(n: u32, a: Point, b: Point, ell: u32) -> Result<Self> {
        Self::around(Point::origin(a.dim())?, n, a, b, ell)
    }

    pub fn around(center: Point, n: u32, a: Point, b: Point, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("pair two-arms needs ell >= 1".into()));
        }
        if a == b {
            return Err(Error::InvalidParameter("pair two-arms needs a != b".into()));
        }
        let inner = BoxSpec::new(center, n)?;
        for x in [a, b] {
            if !inner.contains(&x) {
                return Err(Error::OutsideBox { point: x, bbox: inner });
            }
        }
        Ok(TwoArmsPairSpec {
            n,
            a,
            b,
            ell,
            bbox: BoxSpec::new(center, checked_radius(n, ell)?)?,
        })
    }
}

pub fn two_arms_pair(config: &Configuration, spec: &TwoArmsPairSpec) -> Result<bool> {
    require_box(config, &spec.bbox)?;
    let labeling = label_clusters(config);
    let (la, lb) = match (labeling.label(&spec.a), labeling.label(&spec.b)) {
        (Some(la), Some(lb)) => (la, lb),
        _ => return Ok(false),
    };
    if la == lb {
        return Ok(false);
    }
    let touches = labeling.boundary_flags();
    Ok(touches[la as usize] && touches[lb as usize])
}

impl Event for TwoArmsPairSpec {
    fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    fn holds(&self, config: &Configuration) -> Result<bool> {
        two_arms_pair(config, self)
    }

    fn describe(&self) -> String {
        format!(
            "two_arms_pair(n={}, a={}, b={}, ell={})",
            self.n, self.a, self.b, self.ell
        )
    }
}

/// `two-arms(Λ(n), ell)`: at least two distinct clusters of `Λ(n+ell)` join
/// `Λ(n)` to `∂^in Λ(n+ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwoArmsBoxSpec {
    pub n: u32,
    pub ell: u32,
    #[serde(skip)]
    bbox: BoxSpec,
}

impl TwoArmsBoxSpec {
    pub fn new(dim: usize, n: u32, ell: u32) -> Result<Self> {
        Self::around(Point::origin(dim)?, n, ell)
    }

    pub fn around(center: Point, n: u32, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("box two-arms needs ell >= 1".into()));
        }
        Ok(TwoArmsBoxSpec {
            n,
            ell,
            bbox: BoxSpec::new(center, checked_radius(n, ell)?)?,
        })
    }
}

pub fn two_arms_box(config: &Configuration, spec: &TwoArmsBoxSpec) -> Result<bool> {
    require_box(config, &spec.bbox)?;
    Ok(crossing_clusters(&label_clusters(config), spec.n)?.len() >= 2)
}

impl Event for TwoArmsBoxSpec {
    fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    fn holds(&self, config: &Configuration) -> Result<bool> {
        two_arms_box(config, self)
    }

    fn describe(&self) -> String {
        format!("two_arms_box(n={}, ell={})", self.n, self.ell)
    }
}

/// `x` and `y` joined by an open path inside the configuration box. An open
/// site is connected to itself.
pub fn connected_in_box(config: &Configuration, x: &Point, y: &Point) -> Result<bool> {
    for z in [x, y] {
        if !config.bbox().contains(z) {
            return Err(Error::OutsideBox {
                point: *z,
                bbox: *config.bbox(),
            });
        }
    }
    Ok(label_clusters(config).connected(x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectionSpec {
    pub x: Point,
    pub y: Point,
    pub bbox: BoxSpec,
}

impl ConnectionSpec {
    pub fn new(bbox: BoxSpec, x: Point, y: Point) -> Result<Self> {
        for z in [x, y] {
            if !bbox.contains(&z) {
                return Err(Error::OutsideBox { point: z, bbox });
            }
        }
        Ok(ConnectionSpec { x, y, bbox })
    }
}

impl Event for ConnectionSpec {
    fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    fn holds(&self, config: &Configuration) -> Result<bool> {
        require_box(config, &self.bbox)?;
        connected_in_box(config, &self.x, &self.y)
    }

    fn describe(&self) -> String {
        format!("connected({} <-> {} in {})", self.x, self.y, self.bbox)
    }
}

/// `x` joined to the internal boundary of the box by an open path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryConnectionSpec {
    pub x: Point,
    pub bbox: BoxSpec,
}

impl BoundaryConnectionSpec {
    pub fn new(bbox: BoxSpec, x: Point) -> Result<Self> {
        if !bbox.contains(&x) {
            return Err(Error::OutsideBox { point: x, bbox });
        }
        Ok(BoundaryConnectionSpec { x, bbox })
    }
}

impl Event for BoundaryConnectionSpec {
    fn bbox(&self) -> &BoxSpec {
        &self.bbox
    }

    fn holds(&self, config: &Configuration) -> Result<bool> {
        require_box(config, &self.bbox)?;
        let labeling = label_clusters(config);
        Ok(match labeling.label(&self.x) {
            Some(l) => labeling.boundary_flags()[l as usize],
            None => false,
        })
    }

    fn describe(&self) -> String {
        format!("connected({} <-> boundary of {})", self.x, self.bbox)
    }
}

/// The good event for the h statistic: every crossing cluster `C` satisfies
/// `|h(C̄ ∩ Λ(n))| < ln(n) |C̄ ∩ Λ(n)|^{1/2}`.
pub fn event_e_holds(config: &Configuration, n: u32, p: f64) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidParameter("the h-event needs n >= 2".into()));
    }
    crate::sampler::check_probability(p)?;
    let labeling = label_clusters(config);
    let crossing = crossing_clusters(&labeling, n)?;
    let inner = config.bbox().with_radius(n)?;
    let log_n = f64::from(n).ln();
    for &label in &crossing.labels {
        let closure = labeling.closure_of(label).closure_within(&inner);
        let h = h_statistic(closure.iter(), config, &p)?;
        if h.abs() >= log_n * (closure.len() as f64).sqrt() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Indices of `Λ(n)` inside the configuration box, for callers scanning sub-boxes.
pub fn inner_indices(config: &Configuration, n: u32) -> Result<Vec<usize>> {
    let inner = config.bbox().with_radius(n)?;
    Ok(sub_box_indices(config.bbox(), &inner))
}

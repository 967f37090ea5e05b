//! Flat `key = value` experiment plans, validated into typed experiments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use percolab::lattice::{BoxSpec, Point};
use percolab::oracle::EnumerationPlan;
use percolab::sampler::default_critical_p;
use percolab::scalar::parse_rational;
use percolab::{Rational, Scalar};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    TwoArmsSite,
    TwoArmsBox,
    TwoArmsPair,
    Connection,
    BoundaryConnection,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::TwoArmsSite => "two-arms-site",
            EventKind::TwoArmsBox => "two-arms-box",
            EventKind::TwoArmsPair => "two-arms-pair",
            EventKind::Connection => "connection",
            EventKind::BoundaryConnection => "boundary-connection",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            EventKind::TwoArmsSite,
            EventKind::TwoArmsBox,
            EventKind::TwoArmsPair,
            EventKind::Connection,
            EventKind::BoundaryConnection,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// An event family indexed by the radius `n` of an estimate grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EventPlan {
    pub kind: EventKind,
    pub dim: usize,
    pub ell: u32,
    pub x: Option<Point>,
    pub y: Option<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Central { n: u32, ell: u32 },
    Hoeffding { n: u32, ell: u32, x: Point, t: Vec<f64> },
    Distant { n: u32, ell: u32, k: u32, a: Point, b: Point },
    ConnectionBound { n: u32, ell: u32, x: Point, y: Point, proxy: Option<u32> },
    Counting { n: u32, k: u32, ell: u32 },
}

impl Check {
    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Central { .. } => "central",
            Check::Hoeffding { .. } => "hoeffding",
            Check::Distant { .. } => "distant",
            Check::ConnectionBound { .. } => "connection-bound",
            Check::Counting { .. } => "counting",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// `E[h(C̄(x) ∩ Λ(n))]`, expected to vanish.
    H,
    /// `E|F| - p E|F ∪ G|` and `E|G| - (1-p) E|F ∪ G|`.
    Fg,
    /// The same split for sites with an armed neighbour.
    NeighbourArms,
    /// `P(two-arms(x, n))` on the box `x + Λ(n)`.
    TwoArmsSite,
    /// Exact Hoeffding table.
    Hoeffding,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::H => "h",
            Statistic::Fg => "fg",
            Statistic::NeighbourArms => "neighbour-arms",
            Statistic::TwoArmsSite => "two-arms-site",
            Statistic::Hoeffding => "hoeffding",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Statistic::H,
            Statistic::Fg,
            Statistic::NeighbourArms,
            Statistic::TwoArmsSite,
            Statistic::Hoeffding,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    /// Probabilities over a grid of radii; `fit` adds a power-law fit.
    Estimate {
        event: EventPlan,
        p: f64,
        radii: Vec<u32>,
        fit: bool,
    },
    Verify { dim: usize, p: f64, check: Check },
    Oracle {
        dim: usize,
        statistic: Statistic,
        n: u32,
        ell: u32,
        x: Point,
        p: Vec<Rational>,
        t: Vec<Rational>,
        allow_large: bool,
    },
    Exponents { from: u32, to: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub seed: u64,
    pub samples: u64,
    pub workers: usize,
    pub experiment: Experiment,
}

impl ExperimentPlan {
    pub fn kind(&self) -> &'static str {
        match &self.experiment {
            Experiment::Estimate { fit: false, .. } => "estimate",
            Experiment::Estimate { fit: true, .. } => "fit",
            Experiment::Verify { .. } => "verify",
            Experiment::Oracle { .. } => "oracle",
            Experiment::Exponents { .. } => "exponents",
        }
    }

    pub fn uses_sampling(&self) -> bool {
        matches!(
            self.experiment,
            Experiment::Estimate { .. } | Experiment::Verify { .. }
        )
    }

    /// Reads and validates a plan file; the name defaults to the file stem.
    pub fn from_file(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("plan")
            .to_string();
        Self::parse(&text, &stem).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Self, RunError> {
        let mut fields = Fields::parse(text)?;
        let plan = fields.build(default_name)?;
        fields.finish()?;
        Ok(plan)
    }

    /// Canonical plan text; parsing it gives back the same plan.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("kind", self.kind().into());
        put("name", self.name.clone());
        if self.uses_sampling() {
            put("seed", self.seed.to_string());
            put("samples", self.samples.to_string());
            put("workers", self.workers.to_string());
        }
        let points = |p: &Point| p.coords().iter().map(i32::to_string).collect::<Vec<_>>().join(",");
        match &self.experiment {
            Experiment::Estimate { event, p, radii, .. } => {
                put("event", event.kind.as_str().into());
                put("dim", event.dim.to_string());
                put("p", p.to_string());
                put("n", join(radii));
                if matches!(event.kind, EventKind::TwoArmsBox | EventKind::TwoArmsPair) {
                    put("ell", event.ell.to_string());
                }
                let (xk, yk) = match event.kind {
                    EventKind::TwoArmsPair => ("a", "b"),
                    _ => ("x", "y"),
                };
                if let Some(x) = &event.x {
                    put(xk, format!("({})", points(x)));
                }
                if let Some(y) = &event.y {
                    put(yk, format!("({})", points(y)));
                }
            }
            Experiment::Verify { dim, p, check } => {
                put("check", check.as_str().into());
                put("dim", dim.to_string());
                put("p", p.to_string());
                match check {
                    Check::Central { n, ell } => {
                        put("n", n.to_string());
                        put("ell", ell.to_string());
                    }
                    Check::Hoeffding { n, ell, x, t } => {
                        put("n", n.to_string());
                        put("ell", ell.to_string());
                        put("x", format!("({})", points(x)));
                        put("t", join(t));
                    }
                    Check::Distant { n, ell, k, a, b } => {
                        put("n", n.to_string());
                        put("ell", ell.to_string());
                        put("k", k.to_string());
                        put("a", format!("({})", points(a)));
                        put("b", format!("({})", points(b)));
                    }
                    Check::ConnectionBound { n, ell, x, y, proxy } => {
                        put("n", n.to_string());
                        put("ell", ell.to_string());
                        put("x", format!("({})", points(x)));
                        put("y", format!("({})", points(y)));
                        if let Some(m) = proxy {
                            put("proxy_radius", m.to_string());
                        }
                    }
                    Check::Counting { n, k, ell } => {
                        put("n", n.to_string());
                        put("k", k.to_string());
                        put("ell", ell.to_string());
                    }
                }
            }
            Experiment::Oracle { dim, statistic, n, ell, x, p, t, allow_large } => {
                put("statistic", statistic.as_str().into());
                put("dim", dim.to_string());
                put("n", n.to_string());
                put("ell", ell.to_string());
                put("x", format!("({})", points(x)));
                put("p", join(p));
                if !t.is_empty() {
                    put("t", join(t));
                }
                put("allow_large", allow_large.to_string());
            }
            Experiment::Exponents { from, to } => {
                put("from", from.to_string());
                put("to", to.to_string());
            }
        }
        out
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Raw fields, consumed as they are read so leftovers can be reported.
struct Fields {
    map: BTreeMap<String, String>,
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

impl Fields {
    fn parse(text: &str) -> Result<Self, RunError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() || v.is_empty() {
                return Err(invalid(format!("line {}: empty key or value", i + 1)));
            }
            if map.insert(k.clone(), v).is_some() {
                return Err(invalid(format!("line {}: duplicate key {k:?}", i + 1)));
            }
        }
        Ok(Fields { map })
    }

    fn finish(self) -> Result<(), RunError> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(invalid(format!("unknown or unused key {k:?}"))),
        }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String, RunError> {
        self.take(key).ok_or_else(|| invalid(format!("missing key {key:?}")))
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, RunError> {
        self.take(key)
            .map(|v| v.parse().map_err(|_| invalid(format!("{key}: cannot parse {v:?}"))))
            .transpose()
    }

    fn required_number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, RunError> {
        self.number(key)?.ok_or_else(|| invalid(format!("missing key {key:?}")))
    }

    fn point(&mut self, key: &str) -> Result<Option<Point>, RunError> {
        self.take(key)
            .map(|v| Point::parse(&v).map_err(|e| invalid(format!("{key}: {e}"))))
            .transpose()
    }

    fn rationals(&mut self, key: &str) -> Result<Vec<Rational>, RunError> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    parse_rational(s).ok_or_else(|| invalid(format!("{key}: cannot parse {s:?}")))
                })
                .collect(),
        }
    }

    /// Comma separated reals, each a decimal or a fraction `a/b`.
    fn reals(&mut self, key: &str) -> Result<Vec<f64>, RunError> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    let value = if s.contains('/') {
                        parse_rational(s).map(|q| q.to_f64())
                    } else {
                        s.parse::<f64>().ok()
                    };
                    value
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| invalid(format!("{key}: cannot parse {s:?}")))
                })
                .collect(),
        }
    }

    fn probability(&mut self, dim: usize) -> Result<f64, RunError> {
        let p = match self.reals("p")?.as_slice() {
            [] => default_critical_p(dim)
                .ok_or_else(|| invalid(format!("no default p for d={dim}; give p")))?,
            [one] => *one,
            _ => return Err(invalid("p: expected a single value")),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p={p} is not in (0, 1)")));
        }
        Ok(p)
    }

    fn dim(&mut self) -> Result<usize, RunError> {
        let dim = self.number("dim")?.unwrap_or(2);
        if !(2..=4).contains(&dim) {
            return Err(invalid(format!("dim={dim} is outside 2..=4")));
        }
        Ok(dim)
    }

    fn build(&mut self, default_name: &str) -> Result<ExperimentPlan, RunError> {
        let kind = self.required("kind")?;
        let name = self.take("name").unwrap_or_else(|| default_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(invalid(format!("name {name:?} is not a plain file name")));
        }
        let sampling = matches!(kind.as_str(), "estimate" | "fit" | "verify");
        let (seed, samples, workers) = if sampling {
            let seed = self.required_number("seed")?;
            let samples: u64 = self.required_number("samples")?;
            if samples == 0 {
                return Err(invalid("samples must be at least 1"));
            }
            let workers: usize = self.number("workers")?.unwrap_or(1);
            if workers == 0 {
                return Err(invalid("workers must be at least 1"));
            }
            (seed, samples, workers)
        } else {
            (0, 0, 1)
        };
        let experiment = match kind.as_str() {
            "estimate" | "fit" => self.estimate(kind == "fit")?,
            "verify" => self.verify()?,
            "oracle" => self.oracle()?,
            "exponents" => {
                let from = self.required_number("from")?;
                let to = self.required_number("to")?;
                if from < 2 || to < from || to > 64 {
                    return Err(invalid(format!("exponent range {from}..={to} must lie in 2..=64")));
                }
                Experiment::Exponents { from, to }
            }
            other => return Err(invalid(format!("unknown experiment kind {other:?}"))),
        };
        Ok(ExperimentPlan {
            name,
            seed,
            samples,
            workers,
            experiment,
        })
    }

    fn estimate(&mut self, fit: bool) -> Result<Experiment, RunError> {
        let kind_text = self.required("event")?;
        let kind = EventKind::parse(&kind_text)
            .ok_or_else(|| invalid(format!("unknown event {kind_text:?}")))?;
        let dim = self.dim()?;
        let p = self.probability(dim)?;
        let radii: Vec<u32> = self
            .required("n")?
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| invalid(format!("n: cannot parse {s:?}"))))
            .collect::<Result<_, _>>()?;
        if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n must be a strictly increasing list"));
        }
        if fit && radii.len() < 3 {
            return Err(invalid("a fit needs at least 3 radii"));
        }
        let ell = match kind {
            EventKind::TwoArmsBox | EventKind::TwoArmsPair => self.required_number("ell")?,
            _ => 0,
        };
        let (x, y) = match kind {
            EventKind::TwoArmsPair => (Some(self.required_point("a")?), Some(self.required_point("b")?)),
            EventKind::Connection => (Some(self.required_point("x")?), Some(self.required_point("y")?)),
            EventKind::TwoArmsSite | EventKind::BoundaryConnection => (self.point("x")?, None),
            EventKind::TwoArmsBox => (None, None),
        };
        let event = EventPlan { kind, dim, ell, x, y };
        for &n in &radii {
            event.build(n).map_err(|e| invalid(format!("n={n}: {e}")))?;
        }
        Ok(Experiment::Estimate { event, p, radii, fit })
    }

    fn required_point(&mut self, key: &str) -> Result<Point, RunError> {
        self.point(key)?.ok_or_else(|| invalid(format!("missing key {key:?}")))
    }

    fn verify(&mut self) -> Result<Experiment, RunError> {
        let check = self.required("check")?;
        let dim = self.dim()?;
        let p = self.probability(dim)?;
        let n: u32 = self.required_number("n")?;
        let ell: u32 = self.required_number("ell")?;
        let origin = Point::origin(dim).expect("valid dim");
        let check = match check.as_str() {
            "central" => Check::Central { n, ell },
            "hoeffding" => {
                let t = self.reals("t")?;
                if t.is_empty() {
                    return Err(invalid("hoeffding needs a t grid"));
                }
                let x = self.point("x")?.unwrap_or(origin);
                Check::Hoeffding { n, ell, x, t }
            }
            "distant" => {
                let k = self.required_number("k")?;
                if k == 0 || k >= ell {
                    return Err(invalid(format!("distant needs 1 <= k < ell (k={k}, ell={ell})")));
                }
                let a = self.required_point("a")?;
                let b = self.required_point("b")?;
                Check::Distant { n, ell, k, a, b }
            }
            "connection-bound" => {
                let x = self.required_point("x")?;
                let y = self.required_point("y")?;
                let proxy = self.number("proxy_radius")?;
                Check::ConnectionBound { n, ell, x, y, proxy }
            }
            "counting" => {
                let k = self.required_number("k")?;
                if k == 0 || k > n {
                    return Err(invalid(format!("counting needs 1 <= k <= n (k={k}, n={n})")));
                }
                Check::Counting { n, k, ell }
            }
            other => return Err(invalid(format!("unknown check {other:?}"))),
        };
        check_geometry(dim, &check)?;
        Ok(Experiment::Verify { dim, p, check })
    }

    fn oracle(&mut self) -> Result<Experiment, RunError> {
        let text = self.required("statistic")?;
        let statistic = Statistic::parse(&text)
            .ok_or_else(|| invalid(format!("unknown statistic {text:?}")))?;
        let dim = self.dim()?;
        let n: u32 = self.required_number("n")?;
        let ell: u32 = self.number("ell")?.unwrap_or(0);
        let x = self.point("x")?.unwrap_or(Point::origin(dim).expect("valid dim"));
        let p = self.rationals("p")?;
        if p.is_empty() {
            return Err(invalid("oracle plans need exact p values"));
        }
        if let Some(bad) = p.iter().find(|q| !q.is_open_unit()) {
            return Err(invalid(format!("p={bad} is not in (0, 1)")));
        }
        let t = self.rationals("t")?;
        if statistic == Statistic::Hoeffding && t.is_empty() {
            return Err(invalid("hoeffding needs a t grid"));
        }
        let allow_large = match self.take("allow_large").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(invalid(format!("allow_large: {other:?} is not a boolean"))),
        };
        if n == 0 {
            return Err(invalid("oracle plans need n >= 1"));
        }
        let bbox = if statistic == Statistic::TwoArmsSite {
            BoxSpec::new(x, n)
        } else {
            BoxSpec::centered(dim, n + ell)
        }
        .map_err(|e| invalid(e.to_string()))?;
        if x.dim() != dim || (statistic != Statistic::TwoArmsSite && !bbox.contains(&x)) {
            return Err(invalid(format!("x={x} must lie in {bbox}")));
        }
        let check = if allow_large {
            EnumerationPlan::with_override(bbox)
        } else {
            EnumerationPlan::new(bbox)
        };
        check.map_err(|e| RunError::Cap(e.to_string()))?;
        Ok(Experiment::Oracle {
            dim,
            statistic,
            n,
            ell,
            x,
            p,
            t,
            allow_large,
        })
    }
}

/// Geometry preconditions of each check, tested without sampling.
fn check_geometry(dim: usize, check: &Check) -> Result<(), RunError> {
    let fail = |msg: String| Err(invalid(msg));
    let inner = |n: u32| BoxSpec::centered(dim, n).map_err(|e| invalid(e.to_string()));
    let in_dim = |x: &Point| x.dim() == dim;
    match check {
        Check::Central { n, .. } if *n < 2 => fail("central needs n >= 2".into()),
        Check::Hoeffding { n, ell, x, t } => {
            if *n == 0 || t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return fail("hoeffding needs n >= 1 and t >= 0".into());
            }
            if !in_dim(x) || !inner(n + ell)?.contains(x) {
                return fail(format!("x={x} must lie in Λ({})", n + ell));
            }
            Ok(())
        }
        Check::Distant { n, a, b, .. } | Check::ConnectionBound { n, x: a, y: b, .. } => {
            let bx = inner(*n)?;
            for z in [a, b] {
                if !in_dim(z) || !bx.contains(z) {
                    return fail(format!("{z} must lie in Λ({n})"));
                }
            }
            if let Check::Distant { .. } = check {
                if a == b {
                    return fail("distant needs a != b".into());
                }
            }
            if let Check::ConnectionBound { ell: 0, .. } = check {
                return fail("connection-bound needs ell >= 1".into());
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

impl EventPlan {
    /// The event at radius `n`.
    pub fn build(&self, n: u32) -> percolab::Result<Box<dyn percolab::events::Event>> {
        use percolab::events::*;
        let origin = Point::origin(self.dim)?;
        let x = self.x.unwrap_or(origin);
        Ok(match self.kind {
            EventKind::TwoArmsSite => Box::new(TwoArmsSiteSpec::new(x, n)?),
            EventKind::TwoArmsBox => Box::new(TwoArmsBoxSpec::new(self.dim, n, self.ell)?),
            EventKind::TwoArmsPair => Box::new(TwoArmsPairSpec::new(
                n,
                x,
                self.y.expect("validated"),
                self.ell,
            )?),
            EventKind::Connection => Box::new(ConnectionSpec::new(
                BoxSpec::centered(self.dim, n)?,
                x,
                self.y.expect("validated"),
            )?),
            EventKind::BoundaryConnection => {
                Box::new(BoundaryConnectionSpec::new(BoxSpec::centered(self.dim, n)?, x)?)
            }
        })
    }
}

use serde::Serialize;

use super::estimate::{estimate_probability, tally, Estimate, MeanEstimate, MonteCarlo};
use super::h::h_from_counts;
use crate::cluster::{crossing_clusters, label_clusters, ClusterLabeling};
use crate::error::{Error, Result};
use crate::events::{
    BoundaryConnectionSpec, ConnectionSpec, TwoArmsPairSpec, TwoArmsSiteSpec,
};
use crate::lattice::{boundary, BoxSpec, Point, Side};
use crate::oracle::{enumerate_law, masks, EnumerationPlan, SmallConfig};
use crate::sampler::{check_probability, open_threshold, sample_with_threshold};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    ViolatedWithinNoise,
    Violated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::ViolatedWithinNoise => "violated-within-noise",
            Verdict::Violated => "violated",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which way the checked inequality points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `lhs <= rhs`
    AtMost,
    /// `lhs >= rhs`
    AtLeast,
}

/// A point value with a 95% interval around it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub point: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn exact(value: f64) -> Self {
        Interval {
            point: value,
            low: value,
            high: value,
        }
    }
}

impl From<&Estimate> for Interval {
    fn from(e: &Estimate) -> Self {
        Interval {
            point: e.p_hat,
            low: e.ci_low,
            high: e.ci_high,
        }
    }
}

impl From<&MeanEstimate> for Interval {
    fn from(e: &MeanEstimate) -> Self {
        Interval {
            point: e.mean,
            low: e.ci_low,
            high: e.ci_high,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedEstimate {
    pub name: String,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub direction: Direction,
    pub lhs: Interval,
    pub rhs: Interval,
    /// Slack of the point estimates in the direction of the inequality.
    pub margin: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub estimates: Vec<NamedEstimate>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    /// Verdict rule: satisfied when the intervals are ordered or the point
    /// estimates obey the inequality, violated when the intervals are
    /// ordered the wrong way, violated-within-noise otherwise.
    pub fn new(name: &str, direction: Direction, lhs: Interval, rhs: Interval, seed: u64) -> Self {
        let (small, big) = match direction {
            Direction::AtMost => (lhs, rhs),
            Direction::AtLeast => (rhs, lhs),
        };
        let verdict = if small.high <= big.low || small.point <= big.point {
            Verdict::Satisfied
        } else if small.low > big.high {
            Verdict::Violated
        } else {
            Verdict::ViolatedWithinNoise
        };
        InequalityReport {
            name: name.to_string(),
            direction,
            lhs,
            rhs,
            margin: big.point - small.point,
            verdict,
            seed,
            estimates: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn with_estimate(mut self, name: &str, estimate: Estimate) -> Self {
        self.estimates.push(NamedEstimate {
            name: name.to_string(),
            estimate,
        });
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Two-arms at the origin at radius `2n+ell` against the mean square root of
/// the number of crossing clusters of `Λ(n+ell)` plus the explicit remainder.
pub fn check_central_inequality(
    dim: usize,
    n: u32,
    ell: u32,
    p: f64,
    mc: &MonteCarlo,
) -> Result<InequalityReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("central inequality needs n >= 2".into()));
    }
    let threshold = open_threshold(p)?;
    let arms = TwoArmsSiteSpec::at_origin(dim, 2 * n + ell)?;
    let lhs = estimate_probability(&arms, p, &mc.derive("two-arms"))?;

    let outer = BoxSpec::centered(dim, n + ell)?;
    let inner = outer.with_radius(n)?;
    let rhs_mc = mc.derive("crossing");
    let hist = tally(&rhs_mc, inner.internal_boundary_len() + 1, |i, acc| {
        let config = sample_with_threshold(&outer, threshold, &rhs_mc.seed, i);
        acc[crossing_clusters(&label_clusters(&config), n)?.len()] += 1;
        Ok(())
    })?;
    let root = MeanEstimate::from_histogram(&hist, |c| (c as f64).sqrt());

    let d = dim as f64;
    let log_n = f64::from(n).ln();
    let volume = inner.volume() as f64;
    let coefficient = 2.0 * d * log_n / volume.sqrt();
    let pq = p * (1.0 - p);
    let remainder = 4.0 * d / pq * volume * volume * (-2.0 * log_n * log_n * pq * pq).exp();
    let rhs = Interval {
        point: coefficient * root.mean + remainder,
        low: coefficient * root.ci_low.max(0.0) + remainder,
        high: coefficient * root.ci_high + remainder,
    };
    Ok(InequalityReport::new(
        &format!("central(d={dim}, n={n}, ell={ell}, p={p})"),
        Direction::AtMost,
        Interval::from(&lhs),
        rhs,
        mc.seed.global_seed,
    )
    .with_estimate("two_arms_site", lhs)
    .with_note(format!(
        "mean sqrt|crossing| = {:.6} +- {:.6}; remainder = {remainder:.6e}",
        root.mean, root.stderr
    )))
}

/// `|C̄(x) ∩ inner|` and `|C(x) ∩ inner|`. A closed `x` counts as its own
/// closure, which is what the growth algorithm returns for it.
pub fn closure_counts(labeling: &ClusterLabeling<'_>, x: &Point, inner: &BoxSpec) -> (usize, usize) {
    let bbox = labeling.bbox();
    let Some(label) = labeling.label(x) else {
        return (usize::from(inner.contains(x)), 0);
    };
    let members = labeling.member_indices(label);
    let mut seen = vec![false; bbox.volume()];
    let mut opens = 0;
    let mut rim = 0;
    for &i in members {
        let site = bbox.site(i as usize);
        if inner.contains(&site) {
            opens += 1;
        }
        for y in site.neighbours() {
            if let Some(j) = bbox.index_of(&y) {
                if labeling.label_index(j) != Some(label) && !seen[j] && inner.contains(&y) {
                    seen[j] = true;
                    rim += 1;
                }
            }
        }
    }
    (opens + rim, opens)
}

/// `2 exp(-2 p^2 (1-p)^2 t^2 / k)`.
pub fn hoeffding_bound(p: f64, t: f64, k: usize) -> f64 {
    let pq = p * (1.0 - p);
    2.0 * (-2.0 * pq * pq * t * t / k as f64).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoeffdingCell {
    pub t: f64,
    pub k: usize,
    /// `P(|h| >= t, |C̄(x) ∩ Λ(n)| = k)`, empirical or exact.
    pub frequency: f64,
    pub stderr: f64,
    pub bound: f64,
    pub flagged: bool,
    /// Exact fraction when the cell comes from enumeration.
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoeffdingReport {
    pub dim: usize,
    pub n: u32,
    pub ell: u32,
    pub p: f64,
    pub x: Point,
    pub samples: u64,
    pub seed: u64,
    pub cells: Vec<HoeffdingCell>,
}

impl HoeffdingReport {
    pub fn flagged(&self) -> usize {
        self.cells.iter().filter(|c| c.flagged).count()
    }
}

fn check_hoeffding_inputs(n: u32, t_grid: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("tail report needs n >= 1".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter("t values must be finite and >= 0".into()));
    }
    Ok(())
}

/// Empirical `P(|h(C̄(x) ∩ Λ(n))| >= t, |C̄(x) ∩ Λ(n)| = k)` against the
/// two-sided Hoeffding bound, per observed `k` and every `t`. A cell is
/// flagged when it exceeds the bound by more than four standard errors.
pub fn hoeffding_tail_report(
    dim: usize,
    n: u32,
    ell: u32,
    p: f64,
    x: &Point,
    t_grid: &[f64],
    mc: &MonteCarlo,
) -> Result<HoeffdingReport> {
    check_hoeffding_inputs(n, t_grid)?;
    let threshold = open_threshold(p)?;
    let outer = BoxSpec::centered(dim, crate::lattice::checked_radius(n, ell)?)?;
    if !outer.contains(x) {
        return Err(Error::OutsideBox { point: *x, bbox: outer });
    }
    let inner = outer.with_radius(n)?;
    let v = inner.volume();
    let joint = tally(mc, (v + 1) * (v + 1), |i, acc| {
        let config = sample_with_threshold(&outer, threshold, &mc.seed, i);
        let (k, opens) = closure_counts(&label_clusters(&config), x, &inner);
        acc[k * (v + 1) + opens] += 1;
        Ok(())
    })?;
    let samples = mc.samples as f64;
    let mut cells = Vec::new();
    for k in 1..=v {
        let row = &joint[k * (v + 1)..(k + 1) * (v + 1)];
        if row.iter().all(|&c| c == 0) {
            continue;
        }
        for &t in t_grid {
            let hits: u64 = (0..=k)
                .filter(|&o| {
                    h_from_counts(o as u64, (k - o) as u64, &p).is_ok_and(|h| h.abs() >= t)
                })
                .map(|o| row[o])
                .sum();
            let frequency = hits as f64 / samples;
            let stderr = (frequency * (1.0 - frequency) / samples).sqrt();
            let bound = hoeffding_bound(p, t, k);
            cells.push(HoeffdingCell {
                t,
                k,
                frequency,
                stderr,
                bound,
                flagged: frequency > bound + 4.0 * stderr,
                exact: None,
            });
        }
    }
    Ok(HoeffdingReport {
        dim,
        n,
        ell,
        p,
        x: *x,
        samples: mc.samples,
        seed: mc.seed.global_seed,
        cells,
    })
}

/// The same table computed exactly by enumerating `Λ(n+ell)`. A cell is
/// flagged when its exact probability exceeds the bound at all.
pub fn hoeffding_exact(
    dim: usize,
    n: u32,
    ell: u32,
    p: &Rational,
    x: &Point,
    t_grid: &[Rational],
) -> Result<HoeffdingReport> {
    let outer = BoxSpec::centered(dim, crate::lattice::checked_radius(n, ell)?)?;
    let plan = EnumerationPlan::with_override(outer)?;
    let inner = outer.with_radius(n)?;
    let floats: Vec<f64> = t_grid.iter().map(Scalar::to_f64).collect();
    check_hoeffding_inputs(n, &floats)?;
    if !p.is_open_unit() {
        return Err(Error::InvalidProbability(p.to_string()));
    }
    let law = {
        let geometry = crate::oracle::SmallBox::new(&outer)?;
        let bit = geometry
            .bit(x)
            .ok_or(Error::OutsideBox { point: *x, bbox: outer })?;
        let inner_mask = geometry.box_mask(&inner);
        enumerate_law(&plan, move |c: &SmallConfig<'_>| {
            masks::closure(c.geometry, c.open, bit, inner_mask)
        })?
    };
    let dist = law.distribution(p);
    let pf = p.to_f64();
    let mut cells = Vec::new();
    for k in 1..=inner.volume() as u32 {
        if !dist.keys().any(|&(kk, _)| kk == k) {
            continue;
        }
        for (t, tf) in t_grid.iter().zip(&floats) {
            let mut mass = Rational::from_i64(0);
            for ((kk, opens), prob) in &dist {
                if *kk != k {
                    continue;
                }
                let h = h_from_counts(u64::from(*opens), u64::from(k - opens), p)?;
                if h.abs_value() >= *t {
                    mass += prob;
                }
            }
            let bound = hoeffding_bound(pf, *tf, k as usize);
            let frequency = mass.to_f64();
            cells.push(HoeffdingCell {
                t: *tf,
                k: k as usize,
                frequency,
                stderr: 0.0,
                bound,
                flagged: frequency > bound,
                exact: Some(mass.to_string()),
            });
        }
    }
    Ok(HoeffdingReport {
        dim,
        n,
        ell,
        p: pf,
        x: *x,
        samples: 0,
        seed: 0,
        cells,
    })
}

/// `P(two-arms(Λ(n),a,b,ell))` against
/// `(3^{4d}/p) (n+k)^{2d} P(two-arms(0, ell-k)) / P(a <-> b in Λ(n+k))`.
#[allow(clippy::too_many_arguments)]
pub fn distant_two_arms_report(
    dim: usize,
    n: u32,
    a: &Point,
    b: &Point,
    ell: u32,
    k: u32,
    p: f64,
    mc: &MonteCarlo,
) -> Result<InequalityReport> {
    check_probability(p)?;
    if k == 0 || k >= ell {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k < ell so that two-arms(0, ell-k) is non-degenerate (k={k}, ell={ell})"
        )));
    }
    let pair = TwoArmsPairSpec::new(n, *a, *b, ell)?;
    let lhs = estimate_probability(&pair, p, &mc.derive("pair"))?;
    let arms = estimate_probability(
        &TwoArmsSiteSpec::at_origin(dim, ell - k)?,
        p,
        &mc.derive("two-arms"),
    )?;
    let link = estimate_probability(
        &ConnectionSpec::new(BoxSpec::centered(dim, n + k)?, *a, *b)?,
        p,
        &mc.derive("connection"),
    )?;
    let d = dim as i32;
    let constant = 3f64.powi(4 * d) / p * f64::from(n + k).powi(2 * d);
    let ratio = |num: f64, den: f64| {
        if den > 0.0 {
            constant * num / den
        } else {
            f64::INFINITY
        }
    };
    let rhs = Interval {
        point: ratio(arms.p_hat, link.p_hat),
        low: ratio(arms.ci_low, link.ci_high),
        high: ratio(arms.ci_high, link.ci_low),
    };
    Ok(InequalityReport::new(
        &format!("distant(d={dim}, n={n}, a={a}, b={b}, ell={ell}, k={k}, p={p})"),
        Direction::AtMost,
        Interval::from(&lhs),
        rhs,
        mc.seed.global_seed,
    )
    .with_estimate("two_arms_pair", lhs)
    .with_estimate("two_arms_site", arms)
    .with_estimate("connection", link))
}

/// Estimate of `P(0 <-> ∂^in Λ(N))`, which decreases in `N` towards `θ(p)`.
pub fn theta_proxy(dim: usize, p: f64, big_n: u32, mc: &MonteCarlo) -> Result<Estimate> {
    if big_n == 0 {
        return Err(Error::InvalidParameter("theta proxy needs N >= 1".into()));
    }
    let event = BoundaryConnectionSpec::new(BoxSpec::centered(dim, big_n)?, Point::origin(dim)?)?;
    estimate_probability(&event, p, mc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestSite {
    pub site: Point,
    pub estimate: Estimate,
    pub all: Vec<(Point, Estimate)>,
    pub theta: Estimate,
    /// Whether the best estimate reaches `theta / |∂^in Λ(n)|` within the intervals.
    pub qualifies: bool,
}

/// The site of `∂^in Λ(n)` maximizing the estimated `P(0 <-> x in Λ(n))`.
/// Ties go to the smallest site.
pub fn find_best_boundary_site(dim: usize, p: f64, n: u32, mc: &MonteCarlo) -> Result<BestSite> {
    if n == 0 {
        return Err(Error::InvalidParameter("boundary search needs n >= 1".into()));
    }
    let threshold = open_threshold(p)?;
    let bbox = BoxSpec::centered(dim, n)?;
    let sites: Vec<Point> = boundary(&bbox, Side::Internal).into_iter().collect();
    let origin = Point::origin(dim)?;
    let hits_mc = mc.derive("boundary-sites");
    let hits = tally(&hits_mc, sites.len(), |i, acc| {
        let config = sample_with_threshold(&bbox, threshold, &hits_mc.seed, i);
        let labeling = label_clusters(&config);
        if let Some(l) = labeling.label(&origin) {
            for (slot, x) in acc.iter_mut().zip(&sites) {
                if labeling.label(x) == Some(l) {
                    *slot += 1;
                }
            }
        }
        Ok(())
    })?;
    let all: Vec<(Point, Estimate)> = sites
        .iter()
        .zip(&hits)
        .map(|(x, &h)| (*x, Estimate::from_counts(h, mc.samples, hits_mc.seed.global_seed)))
        .collect();
    let (site, estimate) = all
        .iter()
        .fold(None::<(Point, Estimate)>, |best, (x, e)| match best {
            Some((_, b)) if b.successes >= e.successes => best,
            _ => Some((*x, *e)),
        })
        .expect("boundary is non-empty");
    let theta = theta_proxy(dim, p, n, &mc.derive("theta"))?;
    let qualifies = estimate.ci_high >= theta.ci_low / sites.len() as f64;
    Ok(BestSite {
        site,
        estimate,
        all,
        theta,
        qualifies,
    })
}

/// `P(x <-> y in Λ(n+ell)) >= θ^2 - P(two-arms(Λ(n),x,y,ell))` with `θ`
/// replaced by `P(0 <-> ∂^in Λ(M))`, `M = 2n+ell` by default. Any path
/// from `x ∈ Λ(n)` to the boundary of `x + Λ(M)` crosses `∂^in Λ(n+ell)`,
/// so for that `M` the substituted inequality still follows from the
/// argument; for a smaller `M` it is only a diagnostic.
#[allow(clippy::too_many_arguments)]
pub fn clb_report(
    dim: usize,
    p: f64,
    n: u32,
    ell: u32,
    x: &Point,
    y: &Point,
    proxy_radius: Option<u32>,
    mc: &MonteCarlo,
) -> Result<InequalityReport> {
    check_probability(p)?;
    if ell == 0 {
        return Err(Error::InvalidParameter("connection bound needs ell >= 1".into()));
    }
    let inner = BoxSpec::centered(dim, n)?;
    for z in [x, y] {
        if !inner.contains(z) {
            return Err(Error::OutsideBox { point: *z, bbox: inner });
        }
    }
    let radius = proxy_radius.unwrap_or(2 * n + ell);
    let outer = BoxSpec::centered(dim, n + ell)?;
    let lhs = estimate_probability(&ConnectionSpec::new(outer, *x, *y)?, p, &mc.derive("connection"))?;
    let theta = theta_proxy(dim, p, radius, &mc.derive("theta"))?;
    let pair = if x == y {
        None
    } else {
        Some(estimate_probability(
            &TwoArmsPairSpec::new(n, *x, *y, ell)?,
            p,
            &mc.derive("pair"),
        )?)
    };
    let (pp, pl, ph) = pair.map_or((0.0, 0.0, 0.0), |e| (e.p_hat, e.ci_low, e.ci_high));
    let rhs = Interval {
        point: theta.p_hat.powi(2) - pp,
        low: theta.ci_low.powi(2) - ph,
        high: theta.ci_high.powi(2) - pl,
    };
    let mut report = InequalityReport::new(
        &format!("clb(d={dim}, n={n}, ell={ell}, x={x}, y={y}, p={p})"),
        Direction::AtLeast,
        Interval::from(&lhs),
        rhs,
        mc.seed.global_seed,
    )
    .with_estimate("connection", lhs)
    .with_estimate("theta_proxy", theta)
    .with_note(format!(
        "proxy-based: theta(p) replaced by P(0 <-> boundary of Λ({radius}))"
    ));
    if radius < 2 * n + ell {
        report = report.with_note("proxy radius below 2n+ell: diagnostic only");
    }
    if let Some(e) = pair {
        report = report.with_estimate("two_arms_pair", e);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::closure_and_delta;
    use crate::sampler::{sample_configuration, SeedSpec};

    fn pt(c: &[i32]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn verdict_rule() {
        let e = |p: f64, l: f64, h: f64| Interval { point: p, low: l, high: h };
        let ok = InequalityReport::new("a", Direction::AtMost, e(0.1, 0.05, 0.15), e(0.5, 0.4, 0.6), 0);
        assert_eq!(ok.verdict, Verdict::Satisfied);
        let bad = InequalityReport::new("b", Direction::AtMost, e(0.9, 0.8, 1.0), e(0.5, 0.4, 0.6), 0);
        assert_eq!(bad.verdict, Verdict::Violated);
        let noisy = InequalityReport::new("c", Direction::AtMost, e(0.55, 0.45, 0.65), e(0.5, 0.4, 0.6), 0);
        assert_eq!(noisy.verdict, Verdict::ViolatedWithinNoise);
        let flipped = InequalityReport::new("d", Direction::AtLeast, e(0.5, 0.4, 0.6), e(0.1, 0.0, 0.2), 0);
        assert_eq!(flipped.verdict, Verdict::Satisfied);
        assert!(flipped.margin > 0.0);
    }

    #[test]
    fn closure_counts_match_set_closure() {
        let outer = BoxSpec::centered(2, 4).unwrap();
        let inner = outer.with_radius(2).unwrap();
        let seed = SeedSpec::new(5);
        for i in 0..300 {
            let config = sample_configuration(&outer, 0.55, &seed, i).unwrap();
            let labeling = label_clusters(&config);
            for x in [pt(&[0, 0]), pt(&[2, 1]), pt(&[3, 0])] {
                let (k, opens) = closure_counts(&labeling, &x, &inner);
                match labeling.label(&x) {
                    Some(l) => {
                        let c = closure_and_delta(&labeling.members(l));
                        assert_eq!(k, c.closure_within(&inner).len());
                        assert_eq!(opens, c.cluster.iter().filter(|s| inner.contains(s)).count());
                    }
                    None => assert_eq!((k, opens), (usize::from(inner.contains(&x)), 0)),
                }
            }
        }
    }

    #[test]
    fn zero_t_is_never_flagged() {
        let mc = MonteCarlo::new(2000, 8);
        let report = hoeffding_tail_report(2, 2, 1, 0.5, &pt(&[0, 0]), &[0.0], &mc).unwrap();
        assert!(report.cells.iter().all(|c| c.bound >= 1.0 && !c.flagged));
        assert!(hoeffding_tail_report(2, 2, 1, 1.5, &pt(&[0, 0]), &[0.0], &mc).is_err());
    }

    #[test]
    fn exact_tail_cells_sum_to_one_at_zero() {
        let half = Rational::from_ratio(1, 2);
        let report = hoeffding_exact(2, 1, 0, &half, &pt(&[0, 0]), &[Rational::from_i64(0)]).unwrap();
        let total: f64 = report.cells.iter().map(|c| c.frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_rejects_bad_inputs() {
        let mc = MonteCarlo::new(10, 1);
        assert!(check_central_inequality(2, 1, 0, 0.5, &mc).is_err());
        assert!(check_central_inequality(2, 4, 0, 1.0, &mc).is_err());
    }

    #[test]
    fn distant_rejects_degenerate_inputs() {
        let mc = MonteCarlo::new(10, 1);
        let a = pt(&[-2, 0]);
        assert!(distant_two_arms_report(2, 2, &a, &a, 4, 2, 0.6, &mc).is_err());
        assert!(distant_two_arms_report(2, 2, &a, &pt(&[2, 0]), 4, 5, 0.6, &mc).is_err());
        assert!(distant_two_arms_report(2, 2, &a, &pt(&[2, 0]), 4, 4, 0.6, &mc).is_err());
    }

    #[test]
    fn theta_proxy_regimes() {
        let mc = MonteCarlo::new(4000, 21);
        assert!(theta_proxy(2, 0.99, 8, &mc).unwrap().p_hat >= 0.95);
        assert!(theta_proxy(2, 0.3, 32, &mc).unwrap().p_hat <= 0.05);
        let near = theta_proxy(2, 0.6, 8, &mc).unwrap();
        let far = theta_proxy(2, 0.6, 16, &mc.derive("far")).unwrap();
        assert!(far.p_hat <= near.ci_high + (far.ci_high - far.ci_low));
    }

    #[test]
    fn best_boundary_site_near_one() {
        let best = find_best_boundary_site(2, 0.99, 2, &MonteCarlo::new(3000, 4)).unwrap();
        assert!(best.estimate.p_hat >= 0.9);
        assert!(best.qualifies);
        let mean = best.all.iter().map(|(_, e)| e.p_hat).sum::<f64>() / best.all.len() as f64;
        assert!(best.estimate.p_hat >= mean);
    }

    #[test]
    fn clb_same_site_is_trivial() {
        let x = pt(&[0, 0]);
        let report = clb_report(2, 0.99, 2, 2, &x, &x, None, &MonteCarlo::new(2000, 6)).unwrap();
        assert_eq!(report.verdict, Verdict::Satisfied);
    }
}

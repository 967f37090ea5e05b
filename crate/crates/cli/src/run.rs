use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use percolab::exponents::exponent_table;
use percolab::oracle::{enumerate_sums, masks, EnumerationPlan, SmallBox};
use percolab::statistics::{
    check_central_inequality, clb_report, counting_bounds_report, distant_two_arms_report,
    estimate_probability, fit_exponent, hoeffding_exact, hoeffding_tail_report, Estimate,
    HoeffdingReport, InequalityReport, MonteCarlo, Verdict,
};
use percolab::{BoxSpec, Rational, Scalar};

use crate::plan::{Check, Experiment, ExperimentPlan, Statistic};
use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    Violated,
    ViolatedWithinNoise,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Violated => 2,
            Status::ViolatedWithinNoise => 5,
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Satisfied => Status::Success,
            Verdict::Violated => Status::Violated,
            Verdict::ViolatedWithinNoise => Status::ViolatedWithinNoise,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub name: String,
    pub status: Status,
    /// One line for the terminal.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Rows shared by the CSV and JSON outputs.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.clone()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Finite floats as JSON numbers, anything else as null.
fn real(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn fraction(q: &Rational) -> Value {
    Value::String(q.to_string())
}

struct Outcome {
    status: Status,
    summary: String,
    table: Table,
    details: Value,
}

pub fn run_plan(plan: &ExperimentPlan, out: &Path) -> Result<RunReport, RunError> {
    fs::create_dir_all(out)
        .map_err(|e| RunError::Runtime(format!("cannot create {}: {e}", out.display())))?;
    let started = Instant::now();
    let outcome = execute(plan)?;
    let elapsed = started.elapsed().as_secs_f64();

    let format = format!("percolab-{} v1", plan.kind());
    let mut csv_bytes = format!("# {format}\n").into_bytes();
    {
        let mut writer = csv::Writer::from_writer(&mut csv_bytes);
        writer
            .write_record(&outcome.table.columns)
            .and_then(|_| {
                outcome
                    .table
                    .rows
                    .iter()
                    .try_for_each(|r| writer.write_record(r.iter().map(cell)))
            })
            .and_then(|_| writer.flush().map_err(csv::Error::from))
            .map_err(|e| RunError::Runtime(e.to_string()))?;
    }
    let mut doc = json!({
        "format": format,
        "name": plan.name,
        "kind": plan.kind(),
        "plan": plan.render().replace(&format!("workers = {}\n", plan.workers), ""),
        "status": outcome.status,
        "rows": outcome.table.json_rows(),
        "details": outcome.details,
    });
    if plan.uses_sampling() {
        doc["seed"] = json!(plan.seed);
        doc["samples"] = json!(plan.samples);
    }
    let timing = json!({ "wall_clock_seconds": elapsed, "workers": plan.workers });

    let files = vec![
        out.join(format!("{}.csv", plan.name)),
        out.join(format!("{}.json", plan.name)),
        out.join(format!("{}.timing.json", plan.name)),
    ];
    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("json values serialize") + "\n";
    for (path, bytes) in files.iter().zip([csv_bytes, pretty(&doc).into_bytes(), pretty(&timing).into_bytes()]) {
        fs::write(path, bytes)
            .map_err(|e| RunError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    log::info!("{}: {} in {elapsed:.2}s", plan.name, outcome.summary);
    Ok(RunReport {
        name: plan.name.clone(),
        status: outcome.status,
        summary: outcome.summary,
        files,
    })
}

fn execute(plan: &ExperimentPlan) -> Result<Outcome, RunError> {
    let mc = MonteCarlo::new(plan.samples, plan.seed).with_workers(plan.workers);
    match &plan.experiment {
        Experiment::Estimate { event, p, radii, fit } => estimate(event, *p, radii, *fit, &mc),
        Experiment::Verify { dim, p, check } => verify(*dim, *p, check, &mc),
        Experiment::Oracle {
            dim,
            statistic,
            n,
            ell,
            x,
            p,
            t,
            allow_large,
        } => {
            let bbox = if *statistic == Statistic::TwoArmsSite {
                BoxSpec::new(*x, *n)?
            } else {
                BoxSpec::centered(*dim, n + ell)?
            };
            let enumeration = if *allow_large {
                EnumerationPlan::with_override(bbox)?
            } else {
                EnumerationPlan::new(bbox)?
            }
            .with_workers(plan.workers);
            oracle(&enumeration, *statistic, *dim, *n, *ell, x, p, t)
        }
        Experiment::Exponents { from, to } => exponents(*from, *to),
    }
}

fn estimate(
    event: &crate::plan::EventPlan,
    p: f64,
    radii: &[u32],
    fit: bool,
    mc: &MonteCarlo,
) -> Result<Outcome, RunError> {
    let mut table = Table::new(&[
        "n", "successes", "samples", "p_hat", "ci_low", "ci_high", "ln_n", "neg_ln_p_hat",
    ]);
    let mut points: Vec<(u32, Estimate)> = Vec::new();
    for &n in radii {
        let spec = event.build(n)?;
        let e = estimate_probability(spec.as_ref(), p, &mc.derive(&format!("n={n}")))?;
        let neg_ln = if e.p_hat > 0.0 { real(-e.p_hat.ln()) } else { Value::Null };
        table.push(vec![
            json!(n),
            json!(e.successes),
            json!(e.samples),
            real(e.p_hat),
            real(e.ci_low),
            real(e.ci_high),
            real(f64::from(n).ln()),
            neg_ln,
        ]);
        points.push((n, e));
    }
    let mut details = json!({ "event": event.kind.as_str(), "dim": event.dim, "p": p, "estimates": points });
    let summary = if fit {
        let usable: Vec<(u32, Estimate)> = points.iter().filter(|(_, e)| e.successes > 0).cloned().collect();
        let f = fit_exponent(&usable)?;
        details["fit"] = json!(f);
        format!("fitted exponent {:.4} ± {:.4} over {} radii", f.slope, f.stderr, f.points)
    } else {
        format!("{} radii estimated", radii.len())
    };
    Ok(Outcome {
        status: Status::Success,
        summary,
        table,
        details,
    })
}

fn inequality_outcome(report: InequalityReport) -> Outcome {
    let mut table = Table::new(&[
        "name", "direction", "lhs", "lhs_low", "lhs_high", "rhs", "rhs_low", "rhs_high", "margin", "verdict",
    ]);
    table.push(vec![
        json!(report.name),
        json!(report.direction),
        real(report.lhs.point),
        real(report.lhs.low),
        real(report.lhs.high),
        real(report.rhs.point),
        real(report.rhs.low),
        real(report.rhs.high),
        real(report.margin),
        json!(report.verdict.as_str()),
    ]);
    Outcome {
        status: report.verdict.into(),
        summary: format!("{}: {}", report.name, report.verdict),
        table,
        details: json!(report),
    }
}

/// Rows of a Hoeffding table; exact tables lead with `p` and carry the fraction.
fn hoeffding_outcome(report: HoeffdingReport, p: Option<&Rational>, table: &mut Table) -> usize {
    for c in &report.cells {
        table.push(match p {
            Some(p) => vec![fraction(p), json!(c.t), json!(c.k), json!(c.exact), real(c.bound), json!(c.flagged)],
            None => vec![
                json!(c.t),
                json!(c.k),
                real(c.frequency),
                real(c.stderr),
                real(c.bound),
                json!(c.flagged),
            ],
        });
    }
    report.flagged()
}

fn verify(dim: usize, p: f64, check: &Check, mc: &MonteCarlo) -> Result<Outcome, RunError> {
    Ok(match check {
        Check::Central { n, ell } => inequality_outcome(check_central_inequality(dim, *n, *ell, p, mc)?),
        Check::Distant { n, ell, k, a, b } => {
            inequality_outcome(distant_two_arms_report(dim, *n, a, b, *ell, *k, p, mc)?)
        }
        Check::ConnectionBound { n, ell, x, y, proxy } => {
            inequality_outcome(clb_report(dim, p, *n, *ell, x, y, *proxy, mc)?)
        }
        Check::Hoeffding { n, ell, x, t } => {
            let report = hoeffding_tail_report(dim, *n, *ell, p, x, t, mc)?;
            let mut table = Table::new(&["t", "k", "frequency", "stderr", "bound", "flagged"]);
            let flagged = hoeffding_outcome(report.clone(), None, &mut table);
            Outcome {
                status: if flagged == 0 { Status::Success } else { Status::Violated },
                summary: format!("{flagged} of {} cells above the bound", report.cells.len()),
                table,
                details: json!(report),
            }
        }
        Check::Counting { n, k, ell } => {
            let report = counting_bounds_report(dim, *n, *k, *ell, p, mc)?;
            let mut table = Table::new(&[
                "samples",
                "crossing_violations",
                "multiplicity_violations",
                "covering_violations",
                "max_crossing",
                "max_multiplicity",
                "tiles",
            ]);
            table.push(vec![
                json!(report.samples),
                json!(report.crossing_violations),
                json!(report.multiplicity_violations),
                json!(report.covering_violations),
                json!(report.max_crossing),
                json!(report.max_multiplicity),
                json!(report.tiles),
            ]);
            Outcome {
                status: if report.violations() == 0 { Status::Success } else { Status::Violated },
                summary: format!("{} violations in {} samples", report.violations(), report.samples),
                table,
                details: json!(report),
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    plan: &EnumerationPlan,
    statistic: Statistic,
    dim: usize,
    n: u32,
    ell: u32,
    x: &percolab::Point,
    ps: &[Rational],
    ts: &[Rational],
) -> Result<Outcome, RunError> {
    let geometry = SmallBox::new(plan.bbox())?;
    let inner = geometry.box_mask(&BoxSpec::centered(dim, n)?);
    let one = Rational::one();
    let mut all_zero = true;
    let (table, details) = match statistic {
        Statistic::H => {
            let bit = geometry.bit(x).expect("validated");
            let sums = enumerate_sums(plan, |c| {
                let (k, o) = masks::closure(c.geometry, c.open, bit, inner);
                [i64::from(k), i64::from(o)]
            })?;
            let mut table = Table::new(&["p", "expected_h"]);
            for p in ps {
                let explored = sums.expectation(0, p);
                let opens = sums.expectation(1, p);
                let h = (explored - &opens) / (&one - p) - opens / p;
                all_zero &= h.is_zero();
                table.push(vec![fraction(p), fraction(&h)]);
            }
            (table, json!({ "x": x }))
        }
        Statistic::Fg | Statistic::NeighbourArms => {
            let sums = enumerate_sums(plan, |c| {
                let (a, b) = if statistic == Statistic::Fg {
                    let (f, g, _) = masks::fgh(c.geometry, c.open, inner);
                    (f, g)
                } else {
                    masks::neighbour_arms(c.geometry, c.open, inner)
                };
                [i64::from(a), i64::from(b)]
            })?;
            let mut table = Table::new(&["p", "expected_open", "expected_closed", "residual_open", "residual_closed"]);
            for p in ps {
                let a = sums.expectation(0, p);
                let b = sums.expectation(1, p);
                let total = &a + &b;
                let ra = &a - p * &total;
                let rb = &b - (&one - p) * &total;
                all_zero &= ra.is_zero() && rb.is_zero();
                table.push(vec![fraction(p), fraction(&a), fraction(&b), fraction(&ra), fraction(&rb)]);
            }
            let sets = if statistic == Statistic::Fg {
                "open: |F|, closed: |G|, crossing clusters of the full box"
            } else {
                "sites with a neighbour joined to the boundary avoiding the site, split by status"
            };
            (table, json!({ "sets": sets }))
        }
        Statistic::TwoArmsSite => {
            let bit = geometry.bit(x).expect("centre of its own box");
            let sums = enumerate_sums(plan, |c| [i64::from(masks::two_arms(c.geometry, c.open, bit))])?;
            let mut table = Table::new(&["p", "probability", "decimal"]);
            for p in ps {
                let value = sums.expectation(0, p);
                table.push(vec![fraction(p), fraction(&value), real(value.to_f64())]);
            }
            (table, json!({ "x": x }))
        }
        Statistic::Hoeffding => {
            let mut table = Table::new(&["p", "t", "k", "exact", "bound", "flagged"]);
            let mut flagged = 0;
            for p in ps {
                flagged += hoeffding_outcome(hoeffding_exact(dim, n, ell, p, x, ts)?, Some(p), &mut table);
            }
            all_zero = flagged == 0;
            (table, json!({ "x": x, "flagged": flagged }))
        }
    };
    let identity = !matches!(statistic, Statistic::TwoArmsSite);
    let status = if !identity || all_zero { Status::Success } else { Status::Violated };
    let summary = match (identity, all_zero) {
        (false, _) => format!("{} exact values", table.rows.len()),
        (true, true) => "exact identity holds".to_string(),
        (true, false) => "exact identity fails".to_string(),
    };
    Ok(Outcome {
        status,
        summary,
        table,
        details,
    })
}

fn exponents(from: u32, to: u32) -> Result<Outcome, RunError> {
    let mut table = Table::new(&[
        "d",
        "gamma_limit",
        "gamma_limit_decimal",
        "sm_threshold",
        "sm_integer",
        "tm_threshold",
        "tm_integer",
        "ftwoarms_exponent",
        "connect_exponent",
    ]);
    let mut rows = Vec::new();
    for d in from..=to {
        let t = exponent_table(d)?;
        let r = t.row();
        table.push(vec![
            json!(r.d),
            json!(r.gamma_limit),
            real(t.gamma_limit.to_f64()),
            json!(r.sm_threshold),
            json!(r.sm_integer),
            json!(r.tm_threshold),
            json!(r.tm_integer),
            json!(r.ftwoarms_exponent),
            json!(r.connect_exponent),
        ]);
        rows.push(r);
    }
    Ok(Outcome {
        status: Status::Success,
        summary: format!("exponent table for d = {from}..={to}"),
        table,
        details: json!(rows),
    })
}

//! Randomized verification suites with a machine-readable report.

use std::str::FromStr;

use genbound::avgjoint::{emp_risk_diff, LearnerSpec};
use genbound::bounds::{self, discrete_report, gaussian_report, BoundReport};
use genbound::gaussian::{ExampleConfig, GenMethod, QuadratureSpec};
use genbound::instances::{self, Shape};
use genbound::measures::{self, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::sweep::point_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Discrete,
    Gaussian,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Discrete => "discrete",
            Suite::Gaussian => "gaussian",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Suite::Discrete),
            "gaussian" => Ok(Suite::Gaussian),
            "all" => Ok(Suite::All),
            other => Err(CliError::Config(format!("unknown suite {other:?}; expected discrete, gaussian or all"))),
        }
    }
}

/// Deliberate corruption of a computed value, to show the suite notices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Multiply the average-joint TV bound by this factor.
    ScaleAvgTv(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    pub quad: QuadratureSpec,
    pub fault: Option<Fault>,
}

impl VerifyConfig {
    pub fn new(suite: Suite, seed: u64, count: usize) -> Self {
        VerifyConfig { suite, seed, count, quad: QuadratureSpec::default(), fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub properties: Vec<Property>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.properties.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect()
    }
}

/// Running tally of one property: the slack `rhs - lhs` of each case and the
/// tolerance it must stay above.
struct Check {
    name: &'static str,
    tol: f64,
    cases: usize,
    violations: usize,
    worst: f64,
    errors: Vec<String>,
}

impl Check {
    fn new(name: &'static str, tol: f64) -> Self {
        Check { name, tol, cases: 0, violations: 0, worst: f64::INFINITY, errors: Vec::new() }
    }

    /// Record `lhs <= rhs + tol`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.slack(rhs - lhs);
    }

    /// Record `|a - b| <= tol`.
    fn eq(&mut self, a: f64, b: f64) {
        self.slack(-(a - b).abs());
    }

    fn slack(&mut self, s: f64) {
        self.cases += 1;
        self.worst = self.worst.min(s);
        if !(s >= -self.tol) {
            self.violations += 1;
        }
    }

    fn error(&mut self, e: impl std::fmt::Display) {
        self.cases += 1;
        self.violations += 1;
        if self.errors.len() < 3 {
            self.errors.push(e.to_string());
        }
    }

    fn finish(self) -> Property {
        let mut detail = format!("{} cases, {} violations", self.cases, self.violations);
        if self.worst.is_finite() {
            detail.push_str(&format!(", worst slack {:.3e} (tolerance {:.0e})", self.worst, self.tol));
        }
        for e in &self.errors {
            detail.push_str(&format!("; {e}"));
        }
        Property { name: self.name.into(), pass: self.violations == 0, detail }
    }
}

fn apply_fault(report: &mut BoundReport, fault: Option<Fault>) {
    if let (Some(Fault::ScaleAvgTv(k)), Some(v)) = (fault, report.avg_tv_bound) {
        report.avg_tv_bound = Some(k * v);
    }
}

const VALIDITY_TOL: f64 = 1e-9;
const ORDER_TOL: f64 = 1e-9;

/// Ordered pairs `(smaller, larger)` that the theory guarantees.
const ORDERINGS: [(&str, &str, &str); 7] = [
    ("order_w_avg_le_ind", "avg_w_bound", "ind_w_bound"),
    ("order_tv_avg_le_ind", "avg_tv_bound", "ind_tv_bound"),
    ("order_kl_avg_le_per_sample", "avg_kl_bound", "per_sample_kl_bound"),
    ("order_ismi_le_per_sample", "ismi", "per_sample_kl_bound"),
    ("order_per_sample_le_dataset", "per_sample_kl_bound", "mi_dataset_bound"),
    ("order_js_avg_le_per_sample", "js_avg_bound", "js_per_sample_bound"),
    ("order_lautum_avg_le_per_sample", "lautum_avg_bound", "lautum_per_sample_bound"),
];

fn discrete_suite(cfg: &VerifyConfig) -> Vec<Property> {
    let mut identity = Check::new("gen_identity", 1e-12);
    let mut validity = Check::new("bound_validity", VALIDITY_TOL);
    let mut orders: Vec<(Check, &str, &str)> =
        ORDERINGS.iter().map(|&(n, a, b)| (Check::new(n, ORDER_TOL), a, b)).collect();
    let mut collapse = Check::new("symmetric_collapse", 1e-9);
    let mut tv_forms = Check::new("tv_conditional_form", 1e-12);
    let mut tv_w = Check::new("tv_equals_indicator_w", 1e-14);
    let mut lp_cdf = Check::new("w1_lp_vs_cdf", 1e-9);
    let mut dv = Check::new("dv_gap_le_kl", 1e-12);
    let mut kr = Check::new("kr_witness_le_w1", 1e-12);
    let mut convex = Check::new("tv_kl_joint_convexity", 1e-12);
    let mut emp = Check::new("emp_diff_bound", VALIDITY_TOL);

    for i in 0..cfg.count {
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, i));
        let shape = Shape::default();

        match instances::random_learner(&mut rng, shape).and_then(|l| {
            let loss = instances::random_loss(&mut rng, &l, 0.0, 1.0)?;
            Ok((l.gen_error_direct(&loss)?, l.gen_error_via_avg(&loss)?))
        }) {
            Ok((a, b)) => identity.eq(a, b),
            Err(e) => identity.error(e),
        }

        let positive = i % 2 == 0;
        let iid = instances::random_iid_learner(&mut rng, shape, positive).and_then(|l| {
            let loss = instances::random_loss(&mut rng, &l, 0.0, 1.0)?;
            let mut r = discrete_report(&l, &loss, &[], &Metric::Indicator)?;
            apply_fault(&mut r, cfg.fault);
            let forms = (bounds::DiscreteDivergences::compute(&l)?.tv_avg, bounds::expected_tv_avg(&l)?);
            Ok((r, forms))
        });
        match iid {
            Ok((r, (tv_joint, tv_cond))) => {
                let gen = r.true_gen.map_or(0.0, |g| g.value.abs());
                for name in r.present() {
                    validity.le(gen, r.get(name).unwrap_or(f64::NAN));
                }
                for (check, a, b) in orders.iter_mut() {
                    if let (Some(x), Some(y)) = (r.get(a), r.get(b)) {
                        check.le(x, y);
                    }
                }
                tv_forms.eq(tv_joint, tv_cond);
            }
            Err(e) => validity.error(e),
        }

        match instances::random_exchangeable_learner(&mut rng, shape).and_then(|l| {
            let loss = instances::random_loss(&mut rng, &l, 0.0, 1.0)?;
            discrete_report(&l, &loss, &[], &Metric::Indicator)
        }) {
            Ok(mut r) => {
                apply_fault(&mut r, cfg.fault);
                for (a, b) in [
                    ("avg_w_bound", "ind_w_bound"),
                    ("avg_tv_bound", "ind_tv_bound"),
                    ("avg_kl_bound", "ismi"),
                    ("js_avg_bound", "js_per_sample_bound"),
                    ("lautum_avg_bound", "lautum_per_sample_bound"),
                ] {
                    collapse.eq(r.get(a).unwrap_or(f64::NAN), r.get(b).unwrap_or(f64::NAN));
                }
            }
            Err(e) => collapse.error(e),
        }

        let (p, q) = instances::random_pair_1d_disjoint(&mut rng, 6);
        match (measures::wasserstein1_lp(&p, &q, &Metric::Euclidean), measures::wasserstein1(&p, &q, &Metric::Euclidean)) {
            (Ok(a), Ok(b)) => {
                lp_cdf.eq(a, b);
                let xs: Vec<f64> =
                    p.support().iter().chain(q.support()).map(|x| x.coords.as_ref().map_or(f64::NAN, |c| c[0])).collect();
                let g = instances::random_lipschitz_witness(&mut rng, &xs);
                let (gp, gq) = g.split_at(p.len());
                kr.le(p.expectation(gp) - q.expectation(gq), b);
            }
            (Err(e), _) | (_, Err(e)) => lp_cdf.error(e),
        }

        let (p, q) = instances::random_pair_1d(&mut rng, 6);
        match (measures::tv(&p, &q), measures::wasserstein1(&p, &q, &Metric::Indicator)) {
            (Ok(a), Ok(b)) => tv_w.eq(a, b),
            (Err(e), _) | (_, Err(e)) => tv_w.error(e),
        }

        let support = p.support().to_vec();
        let qpos = instances::random_dist(&mut rng, support.clone(), true);
        let g: Vec<f64> = (0..support.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
        match (measures::dv_gap(&p, &qpos, &g), measures::kl(&p, &qpos)) {
            (Ok(a), Ok(b)) => dv.le(a, b),
            (Err(e), _) | (_, Err(e)) => dv.error(e),
        }

        let c = instances::random_dist(&mut rng, support.clone(), true);
        let d = instances::random_dist(&mut rng, support, true);
        let lambda: f64 = rng.random();
        let mixed = p.mix(&q, lambda).and_then(|pq| Ok((pq, c.mix(&d, lambda)?)));
        match mixed {
            Ok((pq, cd)) => {
                let tv = |a, b| measures::tv(a, b).unwrap_or(f64::NAN);
                let kl = |a, b| measures::kl(a, b).unwrap_or(f64::NAN);
                convex.le(tv(&pq, &cd), lambda * tv(&p, &c) + (1.0 - lambda) * tv(&q, &d));
                convex.le(kl(&pq, &cd), lambda * kl(&p, &c) + (1.0 - lambda) * kl(&q, &d));
            }
            Err(e) => convex.error(e),
        }

        match emp_pair(&mut rng, i % 5 == 4) {
            Ok((gap, bound)) => emp.le(gap.abs(), bound),
            Err(e) => emp.error(e),
        }
    }

    let mut out = vec![identity.finish(), validity.finish()];
    out.extend(orders.into_iter().map(|(c, _, _)| c.finish()));
    out.extend([collapse, tv_forms, tv_w, lp_cdf, dv, kr, convex, emp].into_iter().map(Check::finish));
    out
}

/// Two learners sharing the data law; with `different_n` the second sees one
/// more i.i.d. sample.
fn emp_pair(rng: &mut ChaCha8Rng, different_n: bool) -> genbound::Result<(f64, f64)> {
    let a = instances::random_iid_learner(rng, Shape { max_n: 2, ..Shape::default() }, true)?;
    let kw = a.w_support().len();
    let b = if different_n {
        let pz = a.sample_marginal(0)?;
        LearnerSpec::iid(a.n() + 1, &pz, a.w_support().to_vec(), |_| instances::random_probs(rng, kw, true))?
    } else {
        a.with_kernel(|_| instances::random_probs(rng, kw, true))?
    };
    let loss = instances::random_loss(rng, &a, 0.0, 1.0)?;
    let gap = emp_risk_diff(&a, &b, &loss)?;
    let (lo, hi) = loss.range();
    let bound = bounds::emp_diff_bound((hi - lo) / 2.0, bounds::emp_diff_divergence(&a, &b)?)?;
    Ok((gap, bound))
}

fn gaussian_suite(cfg: &VerifyConfig) -> Vec<Property> {
    let mut calibration = Check::new("gaussian_calibration", 0.0);
    let mut validity = Check::new("gaussian_bound_validity", 0.0);
    let mut tv_order = Check::new("gaussian_order_tv_avg_le_ind", 0.0);
    let mut w_order = Check::new("gaussian_order_w_avg_le_ind", 0.0);
    let mut js_order = Check::new("gaussian_order_js_avg_le_per_sample", 0.0);
    let mut lautum_order = Check::new("gaussian_order_lautum_avg_le_per_sample", 0.0);
    let mut relabel = Check::new("gaussian_relabel_symmetry", 1e-6);

    let slack = |r: &BoundReport, name: &str| r.numeric_error.get(name).copied().unwrap_or(0.0);
    for i in 0..cfg.count {
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, i));
        let t: f64 = rng.random_range(0.02..0.98);
        let reports = [t, 1.0 - t].map(|t| {
            ExampleConfig::new(10.0, 2.0, t).and_then(|ex| gaussian_report(&ex, &cfg.quad, GenMethod::Quadrature(cfg.quad)))
        });
        let [Ok(mut r), Ok(mut mirror)] = reports else {
            let [a, b] = reports;
            let e = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
            calibration.error(format!("t = {t:.4}: {e}"));
            continue;
        };
        calibration.slack(0.0);
        apply_fault(&mut r, cfg.fault);
        apply_fault(&mut mirror, cfg.fault);
        let gen = r.true_gen.expect("gaussian report has the true error");
        for name in r.present() {
            validity.le(gen.value.abs(), r.get(name).unwrap_or(f64::NAN) + gen.ci + slack(&r, name));
        }
        let order = |check: &mut Check, a: &str, b: &str| {
            if let (Some(x), Some(y)) = (r.get(a), r.get(b)) {
                check.le(x, y + slack(&r, a) + slack(&r, b));
            }
        };
        order(&mut tv_order, "avg_tv_bound", "ind_tv_bound");
        order(&mut w_order, "avg_w_bound", "ind_w_bound");
        order(&mut js_order, "js_avg_bound", "js_per_sample_bound");
        order(&mut lautum_order, "lautum_avg_bound", "lautum_per_sample_bound");
        for name in r.present() {
            let (x, y) = (r.get(name).unwrap_or(f64::NAN), mirror.get(name).unwrap_or(f64::NAN));
            relabel.slack(-(x - y).abs() / y.abs().max(1.0));
        }
    }
    [calibration, validity, tv_order, w_order, js_order, lautum_order, relabel].into_iter().map(Check::finish).collect()
}

/// Run the selected suites on `count` seeded instances each.
pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut properties = Vec::new();
    if cfg.count > 0 {
        if matches!(cfg.suite, Suite::Discrete | Suite::All) {
            properties.extend(discrete_suite(cfg));
        }
        if matches!(cfg.suite, Suite::Gaussian | Suite::All) {
            properties.extend(gaussian_suite(cfg));
        }
    }
    VerifyReport { suite: cfg.suite.name().into(), properties }
}

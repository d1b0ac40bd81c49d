//! Generalization-error upper bounds assembled from divergence values and
//! loss regularity constants, plus engines that feed them from a discrete
//! learner or from the Gaussian example.
//!
//! The scalar bound functions are pure arithmetic. Preconditions that depend
//! on the data law (i.i.d. samples, finite reverse KL) are enforced by the
//! engines, which record a refusal reason instead of a value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::avgjoint::{check_comparable, LearnerSpec, LossTable};
use crate::error::{Error, Result};
use crate::gaussian::{
    true_gen_error, ExampleConfig, ExampleQuantities, GenMethod, QuadValue, QuadratureSpec,
};
use crate::measures::{self, DiscreteDist, JointTable, Metric, PROB_TOLERANCE};

/// What is known about the loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossRegularity {
    /// `loss(., z)` is `constant`-Lipschitz under the engine's metric.
    Lipschitz { constant: f64 },
    /// `loss` takes values in `[a, b]`.
    Bounded { a: f64, b: f64 },
    /// `loss` is `sigma`-sub-Gaussian.
    SubGaussian { sigma: f64 },
}

impl LossRegularity {
    pub fn lipschitz(constant: f64) -> Result<Self> {
        LossRegularity::Lipschitz { constant }.validated()
    }

    pub fn bounded(a: f64, b: f64) -> Result<Self> {
        LossRegularity::Bounded { a, b }.validated()
    }

    pub fn subgaussian(sigma: f64) -> Result<Self> {
        LossRegularity::SubGaussian { sigma }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            LossRegularity::Lipschitz { constant } => constant > 0.0 && constant.is_finite(),
            LossRegularity::Bounded { a, b } => a.is_finite() && b.is_finite() && b > a,
            LossRegularity::SubGaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidConfig(format!("invalid loss regularity {self:?}")));
        }
        Ok(self)
    }

    /// Sub-Gaussian constant, derived as `(b - a) / 2` for bounded losses.
    pub fn subgaussian_sigma(&self) -> Option<f64> {
        match *self {
            LossRegularity::SubGaussian { sigma } => Some(sigma),
            LossRegularity::Bounded { a, b } => Some((b - a) / 2.0),
            LossRegularity::Lipschitz { .. } => None,
        }
    }

    /// Lipschitz constant under the indicator metric, `b - a` for bounded losses.
    pub fn indicator_lipschitz(&self) -> Option<f64> {
        match *self {
            LossRegularity::Bounded { a, b } => Some(b - a),
            _ => None,
        }
    }
}

fn check_constant(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidConfig(format!("{name} = {x} must be positive and finite")));
    }
    Ok(())
}

fn check_divergence(d: f64) -> Result<()> {
    if !(d >= 0.0) || d.is_infinite() {
        return Err(Error::NegativeDivergence(d));
    }
    Ok(())
}

fn check_js(d: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::LN_2).contains(&d) {
        return Err(Error::JsOutOfRange(d));
    }
    Ok(())
}

fn check_many(values: &[f64], check: fn(f64) -> Result<()>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("need at least one per-sample value".into()));
    }
    for &v in values {
        check(v)?;
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// `L * E_Z[W(avg P_{W|Z}, P_W)]`.
pub fn avg_w_bound(lipschitz: f64, expected_w: f64) -> Result<f64> {
    check_constant("lipschitz", lipschitz)?;
    check_divergence(expected_w)?;
    Ok(lipschitz * expected_w)
}

/// `(L / n) sum_i E_{Z_i}[W(P_{W|Z_i}, P_W)]`.
pub fn ind_w_bound(lipschitz: f64, per_sample_expected_w: &[f64]) -> Result<f64> {
    check_constant("lipschitz", lipschitz)?;
    Ok(lipschitz * check_many(per_sample_expected_w, check_divergence)?)
}

fn check_range(a: f64, b: f64) -> Result<f64> {
    LossRegularity::bounded(a, b)?;
    Ok(b - a)
}

/// `(b - a) TV(avg joint, P_W x avg P_Z)`.
pub fn avg_tv_bound(a: f64, b: f64, tv_value: f64) -> Result<f64> {
    let width = check_range(a, b)?;
    check_divergence(tv_value)?;
    Ok(width * tv_value)
}

/// `((b - a) / n) sum_i TV(P_{W,Z_i}, P_W x P_{Z_i})`.
pub fn ind_tv_bound(a: f64, b: f64, per_sample_tv: &[f64]) -> Result<f64> {
    let width = check_range(a, b)?;
    Ok(width * check_many(per_sample_tv, check_divergence)?)
}

/// `sqrt(2 sigma^2 D(avg joint || P_W x avg P_Z))`.
pub fn avg_kl_bound(sigma: f64, d_value: f64) -> Result<f64> {
    check_constant("sigma", sigma)?;
    check_divergence(d_value)?;
    Ok((2.0 * sigma * sigma * d_value).sqrt())
}

/// Individual-sample mutual information bound `(1/n) sum_i sqrt(2 sigma^2 I(W; Z_i))`.
pub fn ismi_bound(sigma: f64, mi_values: &[f64]) -> Result<f64> {
    check_constant("sigma", sigma)?;
    check_many(mi_values, check_divergence)?;
    let n = mi_values.len() as f64;
    Ok(mi_values.iter().map(|i| (2.0 * sigma * sigma * i).sqrt()).sum::<f64>() / n)
}

/// `sqrt((2 sigma^2 / n) sum_i I(W; Z_i))`, the per-sample KL bound.
pub fn per_sample_kl_bound(sigma: f64, mi_values: &[f64]) -> Result<f64> {
    check_constant("sigma", sigma)?;
    let mean = check_many(mi_values, check_divergence)?;
    Ok((2.0 * sigma * sigma * mean).sqrt())
}

/// `2 sqrt(2 sigma^2 JS(avg joint, P_W x avg P_Z))`.
pub fn js_avg_bound(sigma: f64, js_value: f64) -> Result<f64> {
    check_constant("sigma", sigma)?;
    check_js(js_value)?;
    Ok(2.0 * (2.0 * sigma * sigma * js_value).sqrt())
}

/// `2 sqrt((2 sigma^2 / n) sum_i JS(P_{W,Z_i}, P_W x P_{Z_i}))`.
pub fn js_per_sample_bound(sigma: f64, js_values: &[f64]) -> Result<f64> {
    check_constant("sigma", sigma)?;
    let mean = check_many(js_values, check_js)?;
    Ok(2.0 * (2.0 * sigma * sigma * mean).sqrt())
}

/// `sqrt(2 sigma^2 D(P_W x avg P_Z || avg joint))`.
pub fn lautum_avg_bound(sigma: f64, rev_kl: f64) -> Result<f64> {
    avg_kl_bound(sigma, rev_kl)
}

/// `sqrt((2 sigma^2 / n) sum_i L(W; Z_i))` with Lautum informations `L`.
pub fn lautum_per_sample_bound(sigma: f64, lautum_values: &[f64]) -> Result<f64> {
    per_sample_kl_bound(sigma, lautum_values)
}

/// `sqrt(2 sigma^2 D(avg joint A || avg joint B))`, bounding the expected
/// gap between the empirical risks of two learners.
pub fn emp_diff_bound(sigma: f64, d_ab: f64) -> Result<f64> {
    avg_kl_bound(sigma, d_ab)
}

/// `sqrt(2 sigma^2 I(W; S) / n)`.
pub fn mi_dataset_bound(sigma: f64, i_ws: f64, n: usize) -> Result<f64> {
    check_constant("sigma", sigma)?;
    check_divergence(i_ws)?;
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    Ok((2.0 * sigma * sigma * i_ws / n as f64).sqrt())
}

/// A generalization-error value with its uncertainty half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenValue {
    pub value: f64,
    pub ci: f64,
}

/// Every bound that the supplied regularity supports. Missing entries carry
/// a reason in `refusals`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub true_gen: Option<GenValue>,
    pub ismi: Option<f64>,
    pub avg_kl_bound: Option<f64>,
    pub per_sample_kl_bound: Option<f64>,
    pub mi_dataset_bound: Option<f64>,
    pub ind_tv_bound: Option<f64>,
    pub avg_tv_bound: Option<f64>,
    pub ind_w_bound: Option<f64>,
    pub avg_w_bound: Option<f64>,
    pub js_avg_bound: Option<f64>,
    pub js_per_sample_bound: Option<f64>,
    pub lautum_avg_bound: Option<f64>,
    pub lautum_per_sample_bound: Option<f64>,
    /// Numerical error estimate per entry, for engines that have one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub numeric_error: BTreeMap<String, f64>,
    /// Why an entry was not computed.
    #[serde(default)]
    pub refusals: BTreeMap<String, String>,
}

/// Names of the bound entries, in a fixed order.
pub const BOUND_NAMES: [&str; 13] = [
    "ismi",
    "avg_kl_bound",
    "per_sample_kl_bound",
    "mi_dataset_bound",
    "ind_tv_bound",
    "avg_tv_bound",
    "ind_w_bound",
    "avg_w_bound",
    "js_avg_bound",
    "js_per_sample_bound",
    "lautum_avg_bound",
    "lautum_per_sample_bound",
    "true_gen",
];

impl BoundReport {
    /// Fixed CSV header.
    pub const CSV_HEADER: &'static str =
        "t,true_gen,ci,ismi,avg_kl,ind_tv,avg_tv,ind_w,avg_w,js_avg,js_ps,lautum_avg,lautum_ps";

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "true_gen" => self.true_gen.map(|g| g.value),
            "ismi" => self.ismi,
            "avg_kl_bound" => self.avg_kl_bound,
            "per_sample_kl_bound" => self.per_sample_kl_bound,
            "mi_dataset_bound" => self.mi_dataset_bound,
            "ind_tv_bound" => self.ind_tv_bound,
            "avg_tv_bound" => self.avg_tv_bound,
            "ind_w_bound" => self.ind_w_bound,
            "avg_w_bound" => self.avg_w_bound,
            "js_avg_bound" => self.js_avg_bound,
            "js_per_sample_bound" => self.js_per_sample_bound,
            "lautum_avg_bound" => self.lautum_avg_bound,
            "lautum_per_sample_bound" => self.lautum_per_sample_bound,
            _ => None,
        }
    }

    fn slot(&mut self, name: &str) -> &mut Option<f64> {
        match name {
            "ismi" => &mut self.ismi,
            "avg_kl_bound" => &mut self.avg_kl_bound,
            "per_sample_kl_bound" => &mut self.per_sample_kl_bound,
            "mi_dataset_bound" => &mut self.mi_dataset_bound,
            "ind_tv_bound" => &mut self.ind_tv_bound,
            "avg_tv_bound" => &mut self.avg_tv_bound,
            "ind_w_bound" => &mut self.ind_w_bound,
            "avg_w_bound" => &mut self.avg_w_bound,
            "js_avg_bound" => &mut self.js_avg_bound,
            "js_per_sample_bound" => &mut self.js_per_sample_bound,
            "lautum_avg_bound" => &mut self.lautum_avg_bound,
            "lautum_per_sample_bound" => &mut self.lautum_per_sample_bound,
            other => panic!("unknown bound entry {other}"),
        }
    }

    /// Store `value` under `name`, or its error as a refusal.
    pub fn record(&mut self, name: &str, value: Result<f64>) {
        match value {
            Ok(v) => {
                *self.slot(name) = Some(v);
                self.refusals.remove(name);
            }
            Err(e) => self.refuse(name, e.to_string()),
        }
    }

    pub fn refuse(&mut self, name: &str, reason: impl Into<String>) {
        *self.slot(name) = None;
        self.refusals.insert(name.to_string(), reason.into());
    }

    /// Drop an entry without recording a refusal.
    pub fn clear(&mut self, name: &str) {
        if name == "true_gen" {
            self.true_gen = None;
        } else {
            *self.slot(name) = None;
        }
        self.numeric_error.remove(name);
    }

    /// Names of the bound entries that hold a value.
    pub fn present(&self) -> Vec<&'static str> {
        BOUND_NAMES[..12].iter().copied().filter(|n| self.get(n).is_some()).collect()
    }

    /// One CSV row in [`Self::CSV_HEADER`] order. Absent entries are empty cells.
    pub fn csv_row(&self) -> String {
        let gen = self.true_gen;
        let cells = [
            self.t,
            gen.map(|g| g.value),
            gen.map(|g| g.ci),
            self.ismi,
            self.avg_kl_bound,
            self.ind_tv_bound,
            self.avg_tv_bound,
            self.ind_w_bound,
            self.avg_w_bound,
            self.js_avg_bound,
            self.js_per_sample_bound,
            self.lautum_avg_bound,
            self.lautum_per_sample_bound,
        ];
        cells
            .iter()
            .map(|c| c.map(format_sig10).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Plain decimal with 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 10 && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}

/// Divergences of a discrete learner that the bounds consume.
#[derive(Debug, Clone)]
pub struct DiscreteDivergences {
    pub n: usize,
    pub iid: bool,
    /// `TV(avg joint, P_W x avg P_Z)`.
    pub tv_avg: f64,
    /// `TV(P_{W,Z_i}, P_W x P_{Z_i})`.
    pub tv_per_sample: Vec<f64>,
    pub kl_avg: f64,
    /// `I(W; Z_i)`.
    pub mi_per_sample: Vec<f64>,
    pub js_avg: f64,
    pub js_per_sample: Vec<f64>,
    pub lautum_avg: Result<f64>,
    pub lautum_per_sample: Result<Vec<f64>>,
    /// `I(W; S)`.
    pub mi_dataset: f64,
}

impl DiscreteDivergences {
    pub fn compute(learner: &LearnerSpec) -> Result<Self> {
        let avg = learner.average_joint();
        let product = avg.joint.product_of_marginals();
        let per_products: Vec<JointTable> = avg.per_sample.iter().map(JointTable::product_of_marginals).collect();
        let tv_per_sample = avg
            .per_sample
            .iter()
            .zip(&per_products)
            .map(|(j, p)| measures::raw::tv(j.flat(), p.flat()))
            .collect();
        let js_per_sample = avg
            .per_sample
            .iter()
            .zip(&per_products)
            .map(|(j, p)| measures::raw::js(j.flat(), p.flat()))
            .collect();
        Ok(DiscreteDivergences {
            n: learner.n(),
            iid: learner.is_iid(PROB_TOLERANCE),
            tv_avg: measures::raw::tv(avg.joint.flat(), product.flat()),
            tv_per_sample,
            kl_avg: measures::raw::kl(avg.joint.flat(), product.flat())?,
            mi_per_sample: avg.per_sample.iter().map(measures::mutual_information).collect(),
            js_avg: measures::raw::js(avg.joint.flat(), product.flat()),
            js_per_sample,
            lautum_avg: measures::raw::kl(product.flat(), avg.joint.flat()),
            lautum_per_sample: avg.per_sample.iter().map(measures::lautum_information).collect(),
            mi_dataset: learner.dataset_mutual_information(),
        })
    }
}

fn require_iid(learner: &LearnerSpec) -> Result<()> {
    if !learner.is_iid(PROB_TOLERANCE) {
        return Err(Error::NonIidInput);
    }
    Ok(())
}

fn expected_w(joint: &JointTable, pw: &DiscreteDist, metric: &Metric) -> Result<f64> {
    let pz = joint.marginal_z();
    let mut acc = 0.0;
    for (z, &mass) in pz.probs().iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let cond = joint.conditional_w(z).expect("sample point has positive mass");
        acc += mass * measures::wasserstein1(&cond, pw, metric)?;
    }
    Ok(acc)
}

/// `E_Z[W(avg P_{W|Z}, P_W)]` for an i.i.d. learner.
pub fn expected_w_avg(learner: &LearnerSpec, metric: &Metric) -> Result<f64> {
    require_iid(learner)?;
    let avg = learner.average_joint();
    expected_w(&avg.joint, &avg.hypothesis_marginal(), metric)
}

/// `E_{Z_i}[W(P_{W|Z_i}, P_W)]` for each sample of an i.i.d. learner.
pub fn expected_w_per_sample(learner: &LearnerSpec, metric: &Metric) -> Result<Vec<f64>> {
    require_iid(learner)?;
    let pw = learner.hypothesis_marginal();
    learner.per_sample_joints().iter().map(|j| expected_w(j, &pw, metric)).collect()
}

/// `E_Z[TV(avg P_{W|Z}, P_W)]`, the conditional form of the average-joint TV.
pub fn expected_tv_avg(learner: &LearnerSpec) -> Result<f64> {
    require_iid(learner)?;
    let avg = learner.average_joint();
    let pw = avg.hypothesis_marginal();
    let pz = avg.sample_marginal();
    let mut acc = 0.0;
    for (z, cond) in avg.conditional().into_iter().enumerate() {
        if let Some(cond) = cond {
            acc += pz.probs()[z] * measures::tv(&cond, &pw)?;
        }
    }
    Ok(acc)
}

/// `D(avg joint A || avg joint B)` for two comparable learners.
pub fn emp_diff_divergence(a: &LearnerSpec, b: &LearnerSpec) -> Result<f64> {
    check_comparable(a, b)?;
    let ja = a.average_joint().joint;
    let jb = b.average_joint().joint;
    measures::raw::kl(ja.flat(), jb.flat())
}

/// Which regularity supplies each family of bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Constants {
    sigma: Option<f64>,
    range: Option<(f64, f64)>,
    lipschitz: Option<f64>,
}

impl Constants {
    fn from(regularity: &[LossRegularity]) -> Result<Self> {
        let mut out = Constants { sigma: None, range: None, lipschitz: None };
        for r in regularity {
            match r.validated()? {
                LossRegularity::SubGaussian { sigma } => out.sigma = Some(sigma),
                LossRegularity::Bounded { a, b } => out.range = Some((a, b)),
                LossRegularity::Lipschitz { constant } => out.lipschitz = Some(constant),
            }
        }
        // explicit sub-Gaussian constants win over the Hoeffding one
        if out.sigma.is_none() {
            out.sigma = out.range.map(|(a, b)| (b - a) / 2.0);
        }
        Ok(out)
    }
}

const NO_SIGMA: &str = "needs a sub-Gaussian or bounded loss";
const NO_RANGE: &str = "needs a bounded loss";
const NO_LIPSCHITZ: &str = "needs a Lipschitz or bounded loss";

/// Full report for a discrete learner.
///
/// The loss table's declared range always counts as a bounded regularity.
/// Wasserstein bounds use `metric` with an explicit Lipschitz constant when
/// one is supplied, and otherwise the indicator metric with constant `b - a`.
pub fn discrete_report(
    learner: &LearnerSpec,
    loss: &LossTable,
    regularity: &[LossRegularity],
    metric: &Metric,
) -> Result<BoundReport> {
    let gen = learner.gen_error_direct(loss)?;
    let (a, b) = loss.range();
    let mut all = vec![LossRegularity::bounded(a, b)?];
    all.extend_from_slice(regularity);
    let k = Constants::from(&all)?;
    let d = DiscreteDivergences::compute(learner)?;

    let mut r = BoundReport { true_gen: Some(GenValue { value: gen, ci: 0.0 }), ..Default::default() };
    let iid = || if d.iid { Ok(()) } else { Err(Error::NonIidInput) };

    match k.sigma {
        Some(s) => {
            r.record("avg_kl_bound", avg_kl_bound(s, d.kl_avg));
            r.record("ismi", iid().and_then(|_| ismi_bound(s, &d.mi_per_sample)));
            r.record("per_sample_kl_bound", iid().and_then(|_| per_sample_kl_bound(s, &d.mi_per_sample)));
            r.record("mi_dataset_bound", iid().and_then(|_| mi_dataset_bound(s, d.mi_dataset, d.n)));
            r.record("js_avg_bound", js_avg_bound(s, d.js_avg));
            r.record("js_per_sample_bound", js_per_sample_bound(s, &d.js_per_sample));
            r.record("lautum_avg_bound", d.lautum_avg.clone().and_then(|l| lautum_avg_bound(s, l)));
            r.record(
                "lautum_per_sample_bound",
                d.lautum_per_sample.clone().and_then(|l| lautum_per_sample_bound(s, &l)),
            );
        }
        None => {
            for name in BOUND_NAMES[..4].iter().chain(&BOUND_NAMES[8..12]) {
                r.refuse(name, NO_SIGMA);
            }
        }
    }
    match k.range {
        Some((a, b)) => {
            r.record("avg_tv_bound", iid().and_then(|_| avg_tv_bound(a, b, d.tv_avg)));
            r.record("ind_tv_bound", iid().and_then(|_| ind_tv_bound(a, b, &d.tv_per_sample)));
        }
        None => {
            r.refuse("avg_tv_bound", NO_RANGE);
            r.refuse("ind_tv_bound", NO_RANGE);
        }
    }
    let w_setup = match (k.lipschitz, k.range) {
        (Some(l), _) => Some((l, metric.clone())),
        (None, Some((a, b))) => Some((b - a, Metric::Indicator)),
        (None, None) => None,
    };
    match w_setup {
        Some((l, m)) => {
            r.record("avg_w_bound", expected_w_avg(learner, &m).and_then(|e| avg_w_bound(l, e)));
            r.record("ind_w_bound", expected_w_per_sample(learner, &m).and_then(|e| ind_w_bound(l, &e)));
        }
        None => {
            r.refuse("avg_w_bound", NO_LIPSCHITZ);
            r.refuse("ind_w_bound", NO_LIPSCHITZ);
        }
    }
    Ok(r)
}

/// Full report for the Gaussian example at `cfg.t`.
///
/// The truncated loss is bounded in `[0, c^2]`, hence `c^2 / 2`-sub-Gaussian,
/// and `2c`-Lipschitz in `w` under the Euclidean metric. The dataset mutual
/// information is infinite for this deterministic learner, so that entry is
/// refused.
pub fn gaussian_report(cfg: &ExampleConfig, q: &QuadratureSpec, gen: GenMethod) -> Result<BoundReport> {
    let e = ExampleQuantities::compute(cfg, q)?;
    let truth = match gen {
        GenMethod::Quadrature(g) if g == *q => GenValue { value: e.gen.value, ci: e.gen.error },
        other => {
            let g = true_gen_error(cfg, other)?;
            GenValue { value: g.value, ci: g.ci_halfwidth }
        }
    };
    let s = cfg.subgaussian_sigma();
    let (a, b) = (0.0, cfg.c * cfg.c);
    let l = cfg.lipschitz();
    let mut r = BoundReport { t: Some(cfg.t), true_gen: Some(truth), ..Default::default() };

    // value plus the bound's sensitivity to the quadrature error of its input
    let mut put = |name: &str, f: &dyn Fn(&[f64]) -> Result<f64>, inputs: &[QuadValue]| -> Result<()> {
        let values: Vec<f64> = inputs.iter().map(|x| x.value).collect();
        let value = f(&values)?;
        let shifted: Vec<f64> = inputs.iter().map(|x| x.value + x.error).collect();
        let upper = f(&shifted).unwrap_or(value);
        r.record(name, Ok(value));
        r.numeric_error.insert(name.to_string(), (upper - value).abs());
        Ok(())
    };
    let exact = |v: f64| QuadValue { value: v, error: 0.0 };
    let js_cap = |x: QuadValue| QuadValue {
        value: x.value,
        error: x.error.min(std::f64::consts::LN_2 - x.value),
    };

    put("avg_kl_bound", &|v| avg_kl_bound(s, v[0]), &[e.avg_kl])?;
    put("ismi", &|v| ismi_bound(s, v), &[exact(e.mi[0]), exact(e.mi[1])])?;
    put("per_sample_kl_bound", &|v| per_sample_kl_bound(s, v), &[exact(e.mi[0]), exact(e.mi[1])])?;
    put("avg_tv_bound", &|v| avg_tv_bound(a, b, v[0]), &[e.tv_avg])?;
    put("ind_tv_bound", &|v| ind_tv_bound(a, b, v), &e.tv_per_sample)?;
    put("avg_w_bound", &|v| avg_w_bound(l, v[0]), &[e.w1_avg])?;
    put("ind_w_bound", &|v| ind_w_bound(l, v), &e.w1_per_sample)?;
    put("js_avg_bound", &|v| js_avg_bound(s, v[0]), &[js_cap(e.js_avg)])?;
    put(
        "js_per_sample_bound",
        &|v| js_per_sample_bound(s, v),
        &[js_cap(e.js_per_sample[0]), js_cap(e.js_per_sample[1])],
    )?;
    put("lautum_avg_bound", &|v| lautum_avg_bound(s, v[0]), &[e.lautum_avg])?;
    put("lautum_per_sample_bound", &|v| lautum_per_sample_bound(s, v), &e.lautum_per_sample)?;
    r.refuse("mi_dataset_bound", "I(W; S) is infinite for a deterministic learner on continuous data");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Point;

    fn coin() -> DiscreteDist {
        DiscreteDist::from_labels(&["0", "1"], vec![0.5, 0.5]).unwrap()
    }

    fn hyp() -> Vec<Point> {
        vec![Point::label("0"), Point::label("1")]
    }

    #[test]
    fn scalar_forms() {
        assert_eq!(avg_w_bound(2.0, 0.25).unwrap(), 0.5);
        assert_eq!(ind_w_bound(2.0, &[0.25, 0.75]).unwrap(), 1.0);
        assert_eq!(avg_tv_bound(0.0, 4.0, 0.25).unwrap(), 1.0);
        assert_eq!(ind_tv_bound(-1.0, 1.0, &[0.1, 0.3]).unwrap(), 0.4);
        assert_eq!(avg_kl_bound(1.0, 0.0).unwrap(), 0.0);
        assert!((avg_kl_bound(2.0, 0.5 * 2f64.ln()).unwrap() - 2.0 * 2f64.ln().sqrt()).abs() < 1e-15);
        assert_eq!(ismi_bound(1.0, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(ismi_bound(1.0, &[0.5, 2.0]).unwrap(), 1.5);
        assert_eq!(per_sample_kl_bound(1.0, &[0.5, 1.5]).unwrap(), 2f64.sqrt());
        assert_eq!(mi_dataset_bound(1.0, 2.0, 4).unwrap(), 1.0);
        let ln2 = std::f64::consts::LN_2;
        assert!((js_avg_bound(3.0, ln2).unwrap() - 2.0 * 3.0 * (2.0 * ln2).sqrt()).abs() < 1e-14);
        assert_eq!(js_per_sample_bound(1.0, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn scalar_input_errors() {
        assert_eq!(avg_kl_bound(1.0, -0.1), Err(Error::NegativeDivergence(-0.1)));
        assert!(matches!(ismi_bound(1.0, &[0.1, -1.0]), Err(Error::NegativeDivergence(_))));
        assert!(matches!(js_avg_bound(1.0, 0.7), Err(Error::JsOutOfRange(_))));
        assert!(matches!(js_per_sample_bound(1.0, &[-0.1]), Err(Error::JsOutOfRange(_))));
        assert!(matches!(avg_tv_bound(1.0, 1.0, 0.2), Err(Error::InvalidConfig(_))));
        assert!(matches!(avg_w_bound(0.0, 0.2), Err(Error::InvalidConfig(_))));
        assert!(matches!(ind_w_bound(1.0, &[]), Err(Error::InvalidConfig(_))));
        assert!(LossRegularity::subgaussian(-1.0).is_err());
    }

    #[test]
    fn bounded_derives_constants() {
        let r = LossRegularity::bounded(0.0, 4.0).unwrap();
        assert_eq!(r.subgaussian_sigma(), Some(2.0));
        assert_eq!(r.indicator_lipschitz(), Some(4.0));
        assert_eq!(LossRegularity::lipschitz(1.0).unwrap().subgaussian_sigma(), None);
    }

    #[test]
    fn constant_learner_has_zero_bounds() {
        let learner = LearnerSpec::iid(2, &coin(), hyp(), |_| vec![0.3, 0.7]).unwrap();
        let loss = LossTable::from_fn(0.0, 1.0, 2, 2, |w, z| (w != z) as u8 as f64).unwrap();
        let r = discrete_report(&learner, &loss, &[], &Metric::Indicator).unwrap();
        for name in r.present() {
            assert!(r.get(name).unwrap().abs() < 1e-15, "{name}");
        }
        assert_eq!(r.present().len(), 12);
        assert!(r.true_gen.unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn non_iid_refusals() {
        let z = vec![Point::label("a"), Point::label("b")];
        let p_s = vec![0.5, 0.0, 0.0, 0.5];
        let rows = vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.5, 0.5], vec![0.0, 1.0]];
        let learner = LearnerSpec::new(2, z, hyp(), p_s, rows).unwrap();
        let loss = LossTable::from_fn(0.0, 1.0, 2, 2, |w, z| (w != z) as u8 as f64).unwrap();
        let r = discrete_report(&learner, &loss, &[], &Metric::Indicator).unwrap();
        for name in ["avg_tv_bound", "ind_tv_bound", "avg_w_bound", "ind_w_bound", "ismi", "mi_dataset_bound"] {
            assert!(r.get(name).is_none(), "{name}");
            assert_eq!(r.refusals[name], Error::NonIidInput.to_string());
        }
        assert!(r.avg_kl_bound.is_some());
        assert!(r.refusals.contains_key("lautum_avg_bound"));
        assert_eq!(expected_w_avg(&learner, &Metric::Indicator), Err(Error::NonIidInput));
    }

    #[test]
    fn memorizing_learner_matches_hand_values() {
        // n = 1, W = Z on a fair coin: TV = 1/2, I = ln 2, JS and Lautum finite only for JS
        let learner = LearnerSpec::iid(1, &coin(), hyp(), |d| if d[0] == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .unwrap();
        let loss = LossTable::from_fn(0.0, 1.0, 2, 2, |w, z| (w != z) as u8 as f64).unwrap();
        let r = discrete_report(&learner, &loss, &[], &Metric::Indicator).unwrap();
        assert!((r.true_gen.unwrap().value - 0.5).abs() < 1e-15);
        assert!((r.avg_tv_bound.unwrap() - 0.5).abs() < 1e-15);
        assert!((r.avg_w_bound.unwrap() - 0.5).abs() < 1e-15);
        let kl = (2.0 * 0.25 * std::f64::consts::LN_2).sqrt();
        assert!((r.avg_kl_bound.unwrap() - kl).abs() < 1e-15);
        assert!((r.mi_dataset_bound.unwrap() - kl).abs() < 1e-15);
        assert!(r.lautum_avg_bound.is_none());
    }

    #[test]
    fn csv_row_format() {
        let mut r = BoundReport { t: Some(0.5), true_gen: Some(GenValue { value: 0.25, ci: 1e-3 }), ..Default::default() };
        r.record("ismi", Ok(2.0 * 2f64.ln().sqrt()));
        r.refuse("avg_kl_bound", "test");
        let row = r.csv_row();
        assert_eq!(row, "0.5000000000,0.2500000000,0.001000000000,1.665109222,,,,,,,,,");
        assert_eq!(row.split(',').count(), BoundReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(123.456), "123.4560000");
        assert_eq!(format_sig10(-0.00012345), "-0.0001234500000");
        assert_eq!(format_sig10(9.99999999999), "10.00000000");
        assert_eq!(format_sig10(1e12), "1000000000000");
    }

    #[test]
    fn report_json_round_trip() {
        let learner = LearnerSpec::iid(2, &coin(), hyp(), |d| vec![0.2 + 0.6 * d[0] as f64, 0.8 - 0.6 * d[0] as f64])
            .unwrap();
        let loss = LossTable::from_fn(0.0, 1.0, 2, 2, |w, z| (w != z) as u8 as f64).unwrap();
        let r = discrete_report(&learner, &loss, &[], &Metric::Indicator).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}

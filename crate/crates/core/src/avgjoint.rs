//! Discrete learners given as explicit tables, their average joint
//! distributions, and the exact expected generalization error.
//!
//! A training set is an `n`-tuple over the sample alphabet. Tuples are
//! indexed in mixed radix with the first sample as the most significant
//! digit, so tuple `s` has digits `s_1 .. s_n`. Everything here is exact
//! enumeration over all `|Z|^n` tuples in that fixed order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{dist::normalize, DiscreteDist, JointTable, Point, PROB_TOLERANCE};

/// Default cap on `|Z|^n`.
pub const DEFAULT_SIZE_CAP: u128 = 1_000_000;

/// Default tolerance for [`LearnerSpec::is_symmetric`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// A randomized learner `P(W | S)` together with the data law `P_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    n: usize,
    z_support: Vec<Point>,
    w_support: Vec<Point>,
    p_s: Vec<f64>,
    /// Row-major `|Z|^n x |W|`.
    p_w_given_s: Vec<f64>,
}

fn tuple_count(k: usize, n: usize, cap: u128) -> Result<usize> {
    let size = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::SizeCapExceeded { size, cap });
    }
    Ok(size as usize)
}

impl LearnerSpec {
    pub fn new(
        n: usize,
        z_support: Vec<Point>,
        w_support: Vec<Point>,
        p_s: Vec<f64>,
        p_w_given_s: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_cap(n, z_support, w_support, p_s, p_w_given_s, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(
        n: usize,
        z_support: Vec<Point>,
        w_support: Vec<Point>,
        p_s: Vec<f64>,
        p_w_given_s: Vec<Vec<f64>>,
        cap: u128,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("sample count n must be at least 1".into()));
        }
        // label checks
        DiscreteDist::uniform(z_support.clone())?;
        DiscreteDist::uniform(w_support.clone())?;
        let tuples = tuple_count(z_support.len(), n, cap)?;
        if p_s.len() != tuples {
            return Err(Error::InvalidProbabilities {
                field: "p_s".into(),
                reason: format!("{} entries for {tuples} tuples", p_s.len()),
            });
        }
        if p_w_given_s.len() != tuples {
            return Err(Error::InvalidProbabilities {
                field: "p_w_given_s".into(),
                reason: format!("{} rows for {tuples} tuples", p_w_given_s.len()),
            });
        }
        let p_s = normalize(p_s, "p_s")?;
        let mut flat = Vec::with_capacity(tuples * w_support.len());
        for (s, row) in p_w_given_s.into_iter().enumerate() {
            if row.len() != w_support.len() {
                return Err(Error::InvalidProbabilities {
                    field: format!("p_w_given_s[{s}]"),
                    reason: format!("{} entries for {} hypotheses", row.len(), w_support.len()),
                });
            }
            flat.extend(normalize(row, &format!("p_w_given_s[{s}]"))?);
        }
        Ok(LearnerSpec { n, z_support, w_support, p_s, p_w_given_s: flat })
    }

    /// Learner on i.i.d. samples from `pz`; `kernel` maps a tuple of sample
    /// indices to a distribution over `w_support`.
    pub fn iid(
        n: usize,
        pz: &DiscreteDist,
        w_support: Vec<Point>,
        mut kernel: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let k = pz.len();
        let tuples = tuple_count(k, n, DEFAULT_SIZE_CAP)?;
        let mut digits = vec![0usize; n];
        let mut p_s = Vec::with_capacity(tuples);
        let mut rows = Vec::with_capacity(tuples);
        for s in 0..tuples {
            decode(s, k, &mut digits);
            p_s.push(digits.iter().map(|&z| pz.probs()[z]).product());
            rows.push(kernel(&digits));
        }
        LearnerSpec::new(n, pz.support().to_vec(), w_support, p_s, rows)
    }

    /// Same data law and alphabets, different conditional table.
    pub fn with_kernel(&self, mut kernel: impl FnMut(&[usize]) -> Vec<f64>) -> Result<Self> {
        let rows = self.tuples().map(|(_, digits)| kernel(&digits)).collect();
        LearnerSpec::new(self.n, self.z_support.clone(), self.w_support.clone(), self.p_s.clone(), rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z_support(&self) -> &[Point] {
        &self.z_support
    }

    pub fn w_support(&self) -> &[Point] {
        &self.w_support
    }

    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    pub fn tuple_count(&self) -> usize {
        self.p_s.len()
    }

    pub fn conditional(&self, s: usize) -> &[f64] {
        let k = self.w_support.len();
        &self.p_w_given_s[s * k..(s + 1) * k]
    }

    /// All tuples in enumeration order, with their digits.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, Vec<usize>)> + '_ {
        let k = self.z_support.len();
        let n = self.n;
        (0..self.tuple_count()).map(move |s| {
            let mut digits = vec![0; n];
            decode(s, k, &mut digits);
            (s, digits)
        })
    }

    /// Marginal law of the `i`-th sample (0-based).
    pub fn sample_marginal(&self, i: usize) -> Result<DiscreteDist> {
        self.check_index(i)?;
        let mut probs = vec![0.0; self.z_support.len()];
        for (s, digits) in self.tuples() {
            probs[digits[i]] += self.p_s[s];
        }
        DiscreteDist::new(self.z_support.clone(), probs)
    }

    /// Hypothesis marginal `P_W`.
    pub fn hypothesis_marginal(&self) -> DiscreteDist {
        let mut probs = vec![0.0; self.w_support.len()];
        for (s, &ps) in self.p_s.iter().enumerate() {
            for (acc, pw) in probs.iter_mut().zip(self.conditional(s)) {
                *acc += ps * pw;
            }
        }
        DiscreteDist::new(self.w_support.clone(), probs).expect("mixture of distributions is normalized")
    }

    /// Whether `P_S` is the n-fold product of a single sample law.
    pub fn is_iid(&self, tol: f64) -> bool {
        let Ok(pz) = self.sample_marginal(0) else { return false };
        self.tuples().all(|(s, digits)| {
            let prod: f64 = digits.iter().map(|&z| pz.probs()[z]).product();
            (prod - self.p_s[s]).abs() <= tol
        })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    /// Joint law `P_{W, Z_i}` of the hypothesis and the `i`-th sample (0-based).
    pub fn per_sample_joint(&self, i: usize) -> Result<JointTable> {
        self.check_index(i)?;
        Ok(self.per_sample_joints().swap_remove(i))
    }

    /// `P_{W, Z_i}` for every `i`, from a single enumeration pass.
    pub fn per_sample_joints(&self) -> Vec<JointTable> {
        let kw = self.w_support.len();
        let kz = self.z_support.len();
        let mut tables = vec![vec![0.0; kw * kz]; self.n];
        for (s, digits) in self.tuples() {
            let ps = self.p_s[s];
            if ps == 0.0 {
                continue;
            }
            let row = self.conditional(s);
            for (table, &z) in tables.iter_mut().zip(&digits) {
                for (w, &pw) in row.iter().enumerate() {
                    table[w * kz + z] += ps * pw;
                }
            }
        }
        tables
            .into_iter()
            .map(|p| {
                JointTable::from_flat(self.w_support.clone(), self.z_support.clone(), p)
                    .expect("enumerated joint is normalized")
            })
            .collect()
    }

    /// Average joint `(1/n) sum_i P_{W, Z_i}` with its marginals and conditionals.
    pub fn average_joint(&self) -> AverageJoint {
        let per_sample = self.per_sample_joints();
        let weights = vec![1.0 / self.n as f64; self.n];
        let joint = JointTable::average(&per_sample, &weights).expect("tables share supports");
        AverageJoint { joint, per_sample }
    }

    /// True iff every `P_{W | Z_i = z}` matches `P_{W | Z_1 = z}` within `tol`.
    /// Sample points with zero mass under either sample are skipped.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let joints = self.per_sample_joints();
        let first = &joints[0];
        joints[1..].iter().all(|other| {
            (0..self.z_support.len()).all(|z| match (first.conditional_w(z), other.conditional_w(z)) {
                (Some(a), Some(b)) => a
                    .probs()
                    .iter()
                    .zip(b.probs())
                    .all(|(x, y)| (x - y).abs() <= tol),
                _ => true,
            })
        })
    }

    fn check_loss(&self, loss: &LossTable) -> Result<()> {
        if loss.rows() != self.w_support.len() || loss.cols() != self.z_support.len() {
            return Err(Error::AlphabetMismatch(format!(
                "loss table is {}x{}, learner alphabets are {}x{}",
                loss.rows(),
                loss.cols(),
                self.w_support.len(),
                self.z_support.len()
            )));
        }
        Ok(())
    }

    /// Expected generalization error straight from its definition:
    /// `E_{P_{W,S}}[L_P(W, P_S) - L_E(W, S)]`.
    pub fn gen_error_direct(&self, loss: &LossTable) -> Result<f64> {
        self.check_loss(loss)?;
        let kw = self.w_support.len();
        let inv_n = 1.0 / self.n as f64;
        let empirical = |w: usize, digits: &[usize]| -> f64 {
            digits.iter().map(|&z| loss.get(w, z)).sum::<f64>() * inv_n
        };
        // population risk of every hypothesis
        let mut population = vec![0.0; kw];
        for (s, digits) in self.tuples() {
            let ps = self.p_s[s];
            if ps == 0.0 {
                continue;
            }
            for (w, lp) in population.iter_mut().enumerate() {
                *lp += ps * empirical(w, &digits);
            }
        }
        let mut gen = 0.0;
        for (s, digits) in self.tuples() {
            let ps = self.p_s[s];
            if ps == 0.0 {
                continue;
            }
            for (w, &pw) in self.conditional(s).iter().enumerate() {
                if pw > 0.0 {
                    gen += ps * pw * (population[w] - empirical(w, &digits));
                }
            }
        }
        Ok(gen)
    }

    /// Expected generalization error through the average joint:
    /// `E_{P_W x avg P_Z}[loss] - E_{avg P_{W,Z}}[loss]`.
    pub fn gen_error_via_avg(&self, loss: &LossTable) -> Result<f64> {
        self.check_loss(loss)?;
        let avg = self.average_joint();
        let product = JointTable::product(&avg.hypothesis_marginal(), &avg.sample_marginal());
        Ok(product.expectation(loss.flat()) - avg.joint.expectation(loss.flat()))
    }

    /// Mutual information `I(W; S)` between the hypothesis and the whole training set.
    pub fn dataset_mutual_information(&self) -> f64 {
        let pw = self.hypothesis_marginal();
        let mut acc = 0.0;
        for (s, &ps) in self.p_s.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for (&pws, &pwm) in self.conditional(s).iter().zip(pw.probs()) {
                if pws > 0.0 {
                    acc += ps * pws * (pws / pwm).ln();
                }
            }
        }
        crate::measures::raw::flush_noise(acc, self.p_s.len() * pw.len())
    }
}

fn decode(mut s: usize, k: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = s % k;
        s /= k;
    }
}

/// `E_{avg P_{W_A, Z}}[loss] - E_{avg P_{W_B, Z}}[loss]`, the expected gap
/// between the empirical risks of two learners.
///
/// With equal sample counts the learners must share `P_S`. With different
/// counts both must draw i.i.d. samples from the same law.
pub fn emp_risk_diff(a: &LearnerSpec, b: &LearnerSpec, loss: &LossTable) -> Result<f64> {
    check_comparable(a, b)?;
    a.check_loss(loss)?;
    let ja = a.average_joint().joint;
    let jb = b.average_joint().joint;
    Ok(ja.expectation(loss.flat()) - jb.expectation(loss.flat()))
}

pub(crate) fn check_comparable(a: &LearnerSpec, b: &LearnerSpec) -> Result<()> {
    if a.z_support != b.z_support || a.w_support != b.w_support {
        return Err(Error::AlphabetMismatch("learners use different alphabets".into()));
    }
    if a.n == b.n {
        let same = a.p_s.iter().zip(&b.p_s).all(|(x, y)| (x - y).abs() <= PROB_TOLERANCE);
        if !same {
            return Err(Error::DataDistMismatch("learners see different P_S".into()));
        }
    } else {
        if !a.is_iid(PROB_TOLERANCE) || !b.is_iid(PROB_TOLERANCE) {
            return Err(Error::DataDistMismatch(
                "learners with different sample counts must both use i.i.d. samples".into(),
            ));
        }
        let (pa, pb) = (a.sample_marginal(0)?, b.sample_marginal(0)?);
        if pa.probs().iter().zip(pb.probs()).any(|(x, y)| (x - y).abs() > PROB_TOLERANCE) {
            return Err(Error::DataDistMismatch("learners sample from different laws".into()));
        }
    }
    Ok(())
}

/// Average joint of a learner together with its per-sample summands.
#[derive(Debug, Clone)]
pub struct AverageJoint {
    pub joint: JointTable,
    pub per_sample: Vec<JointTable>,
}

impl AverageJoint {
    /// Average sample law `(1/n) sum_i P_{Z_i}`.
    pub fn sample_marginal(&self) -> DiscreteDist {
        self.joint.marginal_z()
    }

    pub fn hypothesis_marginal(&self) -> DiscreteDist {
        self.joint.marginal_w()
    }

    /// Conditional of the average joint given each sample point; `None` at
    /// points the average sample law never visits.
    pub fn conditional(&self) -> Vec<Option<DiscreteDist>> {
        (0..self.joint.cols()).map(|z| self.joint.conditional_w(z)).collect()
    }

    /// Unweighted average of the per-sample conditionals `P_{W | Z_i = z}`,
    /// over the samples for which the conditional is defined. Agrees with
    /// [`Self::conditional`] when every sample has the same law.
    pub fn unweighted_conditional(&self) -> Vec<Option<DiscreteDist>> {
        (0..self.joint.cols())
            .map(|z| {
                let defined: Vec<DiscreteDist> =
                    self.per_sample.iter().filter_map(|j| j.conditional_w(z)).collect();
                if defined.is_empty() {
                    return None;
                }
                let k = defined.len() as f64;
                let mut probs = vec![0.0; self.joint.rows()];
                for d in &defined {
                    for (acc, p) in probs.iter_mut().zip(d.probs()) {
                        *acc += p / k;
                    }
                }
                DiscreteDist::new(self.joint.w_support().to_vec(), probs).ok()
            })
            .collect()
    }
}

/// Loss values `loss(w, z)` with a declared range `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossRepr", into = "LossRepr")]
pub struct LossTable {
    a: f64,
    b: f64,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LossRepr {
    a: f64,
    b: f64,
    values: Vec<Vec<f64>>,
}

impl TryFrom<LossRepr> for LossTable {
    type Error = Error;
    fn try_from(r: LossRepr) -> Result<Self> {
        LossTable::new(r.a, r.b, r.values)
    }
}

impl From<LossTable> for LossRepr {
    fn from(l: LossTable) -> Self {
        let values = l.values.chunks(l.cols).map(|r| r.to_vec()).collect();
        LossRepr { a: l.a, b: l.b, values }
    }
}

impl LossTable {
    pub fn new(a: f64, b: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < a {
            return Err(Error::InvalidConfig(format!("loss range [{a}, {b}] must satisfy 0 <= a <= b")));
        }
        let rows = values.len();
        let cols = values.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("loss table is empty".into()));
        }
        for (w, row) in values.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidConfig(format!("values[{w}] has {} columns, expected {cols}", row.len())));
            }
            for (z, &v) in row.iter().enumerate() {
                if !(a..=b).contains(&v) {
                    return Err(Error::InvalidConfig(format!("values[{w}][{z}] = {v} outside [{a}, {b}]")));
                }
            }
        }
        Ok(LossTable { a, b, rows, cols, values: values.concat() })
    }

    /// Loss given as a function of hypothesis and sample indices.
    pub fn from_fn(a: f64, b: f64, rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        LossTable::new(a, b, (0..rows).map(|w| (0..cols).map(|z| f(w, z)).collect()).collect())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, w: usize, z: usize) -> f64 {
        self.values[w * self.cols + z]
    }

    pub fn flat(&self) -> &[f64] {
        &self.values
    }
}

/// JSON form of a learner, with tuples keyed by comma-joined labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerJson {
    pub n: usize,
    pub z_support: Vec<Point>,
    pub w_support: Vec<Point>,
    pub p_s: BTreeMap<String, f64>,
    pub p_w_given_s: BTreeMap<String, Vec<f64>>,
}

impl TryFrom<LearnerJson> for LearnerSpec {
    type Error = Error;

    /// Missing `p_s` entries are zero. A tuple of zero probability may omit
    /// its conditional row; it is filled with the uniform distribution,
    /// which no reported quantity depends on.
    fn try_from(j: LearnerJson) -> Result<Self> {
        let k = j.z_support.len();
        let tuples = tuple_count(k, j.n, DEFAULT_SIZE_CAP)?;
        if j.n == 0 || k == 0 {
            return Err(Error::InvalidConfig("learner needs n >= 1 and a nonempty sample alphabet".into()));
        }
        let index: BTreeMap<&str, usize> =
            j.z_support.iter().enumerate().map(|(i, p)| (p.label.as_str(), i)).collect();
        let encode = |key: &str, field: &str| -> Result<usize> {
            let parts: Vec<&str> = key.split(',').map(str::trim).collect();
            if parts.len() != j.n {
                return Err(Error::InvalidProbabilities {
                    field: format!("{field}[{key:?}]"),
                    reason: format!("tuple has {} labels, expected {}", parts.len(), j.n),
                });
            }
            parts.iter().try_fold(0usize, |acc, label| {
                index.get(label).map(|&d| acc * k + d).ok_or_else(|| Error::InvalidProbabilities {
                    field: format!("{field}[{key:?}]"),
                    reason: format!("unknown sample label {label:?}"),
                })
            })
        };
        let mut p_s = vec![0.0; tuples];
        for (key, &p) in &j.p_s {
            p_s[encode(key, "p_s")?] = p;
        }
        let kw = j.w_support.len();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; tuples];
        for (key, row) in &j.p_w_given_s {
            rows[encode(key, "p_w_given_s")?] = Some(row.clone());
        }
        let mut digits = vec![0; j.n];
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(s, row)| match row {
                Some(r) => Ok(r),
                None if p_s[s] == 0.0 => Ok(vec![1.0 / kw as f64; kw]),
                None => {
                    decode(s, k, &mut digits);
                    let key: Vec<&str> = digits.iter().map(|&d| j.z_support[d].label.as_str()).collect();
                    Err(Error::InvalidProbabilities {
                        field: format!("p_w_given_s[{:?}]", key.join(",")),
                        reason: "missing conditional for a tuple of positive probability".into(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        LearnerSpec::new(j.n, j.z_support, j.w_support, p_s, rows)
    }
}

impl From<&LearnerSpec> for LearnerJson {
    fn from(l: &LearnerSpec) -> Self {
        let mut p_s = BTreeMap::new();
        let mut p_w_given_s = BTreeMap::new();
        for (s, digits) in l.tuples() {
            let key: Vec<&str> = digits.iter().map(|&d| l.z_support[d].label.as_str()).collect();
            let key = key.join(",");
            p_s.insert(key.clone(), l.p_s[s]);
            p_w_given_s.insert(key, l.conditional(s).to_vec());
        }
        LearnerJson {
            n: l.n,
            z_support: l.z_support.clone(),
            w_support: l.w_support.clone(),
            p_s,
            p_w_given_s,
        }
    }
}

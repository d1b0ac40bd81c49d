use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Construction tolerance on total probability mass.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// A support point: an opaque label, optionally carrying real coordinates.
///
/// Serializes as a bare string when it has no coordinates, otherwise as
/// `{"label": .., "coords": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PointRepr", into = "PointRepr")]
pub struct Point {
    pub label: String,
    pub coords: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Label(String),
    Full {
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<f64>>,
    },
}

impl From<PointRepr> for Point {
    fn from(r: PointRepr) -> Self {
        match r {
            PointRepr::Label(label) => Point { label, coords: None },
            PointRepr::Full { label, coords } => Point { label, coords },
        }
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        match p.coords {
            None => PointRepr::Label(p.label),
            Some(c) => PointRepr::Full { label: p.label, coords: Some(c) },
        }
    }
}

impl Point {
    pub fn label(label: impl Into<String>) -> Self {
        Point { label: label.into(), coords: None }
    }

    pub fn with_coords(label: impl Into<String>, coords: Vec<f64>) -> Self {
        Point { label: label.into(), coords: Some(coords) }
    }

    /// A point on the real line labelled by its value.
    pub fn real(x: f64) -> Self {
        Point::with_coords(format!("{x}"), vec![x])
    }
}

fn check_labels(support: &[Point]) -> Result<()> {
    for (i, p) in support.iter().enumerate() {
        if support[..i].iter().any(|q| q.label == p.label) {
            return Err(Error::DuplicateLabel(p.label.clone()));
        }
    }
    Ok(())
}

/// Validate a mass vector and renormalize it if its total is within tolerance.
pub(crate) fn normalize(mut probs: Vec<f64>, field: &str) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities {
            field: field.to_string(),
            reason: "empty".into(),
        });
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidProbabilities {
                field: format!("{field}[{i}]"),
                reason: format!("entry {p} is not a finite nonnegative number"),
            });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::InvalidProbabilities {
            field: field.to_string(),
            reason: format!("sums to {sum:.17}, not 1 within {PROB_TOLERANCE:e}"),
        });
    }
    if sum != 1.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(probs)
}

/// Finite probability vector over labelled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct DiscreteDist {
    support: Vec<Point>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    support: Vec<Point>,
    probs: Vec<f64>,
}

impl TryFrom<DistRepr> for DiscreteDist {
    type Error = Error;
    fn try_from(r: DistRepr) -> Result<Self> {
        DiscreteDist::new(r.support, r.probs)
    }
}

impl From<DiscreteDist> for DistRepr {
    fn from(d: DiscreteDist) -> Self {
        DistRepr { support: d.support, probs: d.probs }
    }
}

impl DiscreteDist {
    pub fn new(support: Vec<Point>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::InvalidProbabilities {
                field: "probs".into(),
                reason: format!("{} probabilities for {} support points", probs.len(), support.len()),
            });
        }
        check_labels(&support)?;
        let probs = normalize(probs, "probs")?;
        Ok(DiscreteDist { support, probs })
    }

    pub fn from_labels(labels: &[&str], probs: Vec<f64>) -> Result<Self> {
        DiscreteDist::new(labels.iter().map(|l| Point::label(*l)).collect(), probs)
    }

    /// Distribution on the real line, one point per coordinate.
    pub fn on_line(xs: &[f64], probs: Vec<f64>) -> Result<Self> {
        DiscreteDist::new(xs.iter().map(|&x| Point::real(x)).collect(), probs)
    }

    pub fn point_mass(point: Point) -> Self {
        DiscreteDist { support: vec![point], probs: vec![1.0] }
    }

    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        let k = support.len() as f64;
        let probs = vec![1.0 / k; support.len()];
        DiscreteDist::new(support, probs)
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.support.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Coordinates when every point is one-dimensional.
    pub(crate) fn coords_1d(&self) -> Option<Vec<f64>> {
        self.support
            .iter()
            .map(|p| match p.coords.as_deref() {
                Some([x]) => Some(*x),
                _ => None,
            })
            .collect()
    }

    /// Mixture `weight * self + (1 - weight) * other` on a shared support.
    pub fn mix(&self, other: &DiscreteDist, weight: f64) -> Result<DiscreteDist> {
        if self.labels() != other.labels() {
            return Err(Error::SupportMismatch("mixture of distributions on different supports".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| weight * a + (1.0 - weight) * b)
            .collect();
        DiscreteDist::new(self.support.clone(), probs)
    }
}

/// Joint probability matrix over hypothesis points (rows) and sample points
/// (columns), stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct JointTable {
    w_support: Vec<Point>,
    z_support: Vec<Point>,
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    w_support: Vec<Point>,
    z_support: Vec<Point>,
    p: Vec<Vec<f64>>,
}

impl TryFrom<JointRepr> for JointTable {
    type Error = Error;
    fn try_from(r: JointRepr) -> Result<Self> {
        JointTable::new(r.w_support, r.z_support, r.p)
    }
}

impl From<JointTable> for JointRepr {
    fn from(j: JointTable) -> Self {
        let cols = j.z_support.len();
        let p = j.p.chunks(cols).map(|r| r.to_vec()).collect();
        JointRepr { w_support: j.w_support, z_support: j.z_support, p }
    }
}

impl JointTable {
    pub fn new(w_support: Vec<Point>, z_support: Vec<Point>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != w_support.len() {
            return Err(Error::InvalidProbabilities {
                field: "p".into(),
                reason: format!("{} rows for {} hypotheses", rows.len(), w_support.len()),
            });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != z_support.len() {
                return Err(Error::InvalidProbabilities {
                    field: format!("p[{i}]"),
                    reason: format!("{} columns for {} samples", r.len(), z_support.len()),
                });
            }
        }
        JointTable::from_flat(w_support, z_support, rows.concat())
    }

    pub fn from_flat(w_support: Vec<Point>, z_support: Vec<Point>, p: Vec<f64>) -> Result<Self> {
        if p.len() != w_support.len() * z_support.len() {
            return Err(Error::InvalidProbabilities {
                field: "p".into(),
                reason: "table size does not match supports".into(),
            });
        }
        check_labels(&w_support)?;
        check_labels(&z_support)?;
        let p = normalize(p, "p")?;
        Ok(JointTable { w_support, z_support, p })
    }

    /// Product table `w x z`.
    pub fn product(w: &DiscreteDist, z: &DiscreteDist) -> JointTable {
        let p = w
            .probs()
            .iter()
            .flat_map(|a| z.probs().iter().map(move |b| a * b))
            .collect();
        JointTable {
            w_support: w.support().to_vec(),
            z_support: z.support().to_vec(),
            p,
        }
    }

    pub fn w_support(&self) -> &[Point] {
        &self.w_support
    }

    pub fn z_support(&self) -> &[Point] {
        &self.z_support
    }

    pub fn rows(&self) -> usize {
        self.w_support.len()
    }

    pub fn cols(&self) -> usize {
        self.z_support.len()
    }

    pub fn get(&self, w: usize, z: usize) -> f64 {
        self.p[w * self.cols() + z]
    }

    pub fn flat(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_w(&self) -> DiscreteDist {
        let probs = self.p.chunks(self.cols()).map(|r| r.iter().sum()).collect();
        DiscreteDist { support: self.w_support.clone(), probs }
    }

    pub fn marginal_z(&self) -> DiscreteDist {
        let mut probs = vec![0.0; self.cols()];
        for row in self.p.chunks(self.cols()) {
            for (acc, v) in probs.iter_mut().zip(row) {
                *acc += v;
            }
        }
        DiscreteDist { support: self.z_support.clone(), probs }
    }

    pub fn product_of_marginals(&self) -> JointTable {
        JointTable::product(&self.marginal_w(), &self.marginal_z())
    }

    /// Conditional distribution of W given the `z`-th sample point, or
    /// `None` when that point has zero mass.
    pub fn conditional_w(&self, z: usize) -> Option<DiscreteDist> {
        let col: Vec<f64> = (0..self.rows()).map(|w| self.get(w, z)).collect();
        let mass: f64 = col.iter().sum();
        if mass <= 0.0 {
            return None;
        }
        Some(DiscreteDist {
            support: self.w_support.clone(),
            probs: col.into_iter().map(|v| v / mass).collect(),
        })
    }

    /// `E[f(w, z)]` for a table of values laid out like the joint.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.p.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Flattened table as a distribution over `(w, z)` pairs.
    pub fn as_dist(&self) -> DiscreteDist {
        let support = self
            .w_support
            .iter()
            .flat_map(|w| {
                self.z_support
                    .iter()
                    .map(move |z| Point::label(format!("{}|{}", w.label, z.label)))
            })
            .collect();
        DiscreteDist { support, probs: self.p.clone() }
    }

    /// Entrywise weighted average of tables on the same supports.
    pub fn average(tables: &[JointTable], weights: &[f64]) -> Result<JointTable> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidConfig("averaging an empty list of tables".into()))?;
        let mut p = vec![0.0; first.p.len()];
        for (t, &wt) in tables.iter().zip(weights) {
            if t.w_support != first.w_support || t.z_support != first.z_support {
                return Err(Error::SupportMismatch("averaging tables on different supports".into()));
            }
            for (acc, v) in p.iter_mut().zip(&t.p) {
                *acc += wt * v;
            }
        }
        JointTable::from_flat(first.w_support.clone(), first.z_support.clone(), p)
    }
}

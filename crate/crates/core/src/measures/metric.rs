use std::fmt;
use std::sync::Arc;

use super::Point;
use crate::error::{Error, Result};

type CostFn = dyn Fn(&Point, &Point) -> f64 + Send + Sync;

/// Ground cost between support points.
#[derive(Clone)]
pub enum Metric {
    /// Euclidean norm of the coordinate difference.
    Euclidean,
    /// `1{label != label'}`; turns Wasserstein-1 into total variation.
    Indicator,
    /// Caller-supplied cost. Checked for symmetry, nonnegativity and a zero
    /// diagonal on every pair it is evaluated on.
    Custom(Arc<CostFn>),
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("Euclidean"),
            Metric::Indicator => f.write_str("Indicator"),
            Metric::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Metric {
    pub fn custom(f: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static) -> Self {
        Metric::Custom(Arc::new(f))
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        match self {
            Metric::Euclidean => {
                let (x, y) = match (&a.coords, &b.coords) {
                    (Some(x), Some(y)) => (x, y),
                    _ => {
                        let missing = if a.coords.is_none() { &a.label } else { &b.label };
                        return Err(Error::MetricUndefined(format!(
                            "point {missing:?} has no coordinates"
                        )));
                    }
                };
                if x.len() != y.len() {
                    return Err(Error::MetricUndefined(format!(
                        "points {:?} and {:?} have {} and {} coordinates",
                        a.label,
                        b.label,
                        x.len(),
                        y.len()
                    )));
                }
                Ok(x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
            }
            Metric::Indicator => Ok(if a.label == b.label { 0.0 } else { 1.0 }),
            Metric::Custom(f) => {
                let d = f(a, b);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "cost {d} between {:?} and {:?}",
                        a.label, b.label
                    )));
                }
                if a.label == b.label && d != 0.0 {
                    return Err(Error::InvalidMetric(format!("nonzero self-distance at {:?}", a.label)));
                }
                if f(b, a) != d {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric cost between {:?} and {:?}",
                        a.label, b.label
                    )));
                }
                Ok(d)
            }
        }
    }

    /// Row-major `|xs| x |ys|` cost matrix.
    pub fn cost_matrix(&self, xs: &[Point], ys: &[Point]) -> Result<Vec<Vec<f64>>> {
        xs.iter()
            .map(|x| ys.iter().map(|y| self.distance(x, y)).collect())
            .collect()
    }
}

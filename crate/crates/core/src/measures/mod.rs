//! Exact information measures between finite distributions.
//!
//! Every divergence is reported in nats. Operations that compare two
//! distributions require identical ordered supports; use [`align`] to merge
//! supports by label first.

pub(crate) mod dist;
mod metric;
pub mod transport;

pub use dist::{DiscreteDist, JointTable, Point, PROB_TOLERANCE};
pub use metric::Metric;

use crate::error::{Error, Result};

pub(crate) mod raw {
    //! Kernels over bare probability slices. Callers guarantee equal lengths.

    use crate::error::{Error, Result};

    /// A divergence sum of `terms` terms below this is rounding noise, and
    /// a square root would blow it up to about `1e-8`.
    pub fn flush_noise(acc: f64, terms: usize) -> f64 {
        if acc <= 4.0 * f64::EPSILON * terms.max(1) as f64 {
            0.0
        } else {
            acc
        }
    }

    pub fn kl(p: &[f64], q: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
            if pi == 0.0 {
                continue;
            }
            if qi == 0.0 {
                return Err(Error::AbsoluteContinuityViolation { index: i, mass: pi });
            }
            acc += pi * (pi / qi).ln();
        }
        Ok(flush_noise(acc, p.len()))
    }

    pub fn tv(p: &[f64], q: &[f64]) -> f64 {
        0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn js(p: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&pi, &qi) in p.iter().zip(q) {
            let m = 0.5 * (pi + qi);
            if pi > 0.0 {
                acc += 0.5 * pi * (pi / m).ln();
            }
            if qi > 0.0 {
                acc += 0.5 * qi * (qi / m).ln();
            }
        }
        acc.clamp(0.0, std::f64::consts::LN_2)
    }
}

fn check_same_support(p: &DiscreteDist, q: &DiscreteDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(format!(
            "support sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (i, (a, b)) in p.support().iter().zip(q.support()).enumerate() {
        if a.label != b.label {
            return Err(Error::SupportMismatch(format!(
                "label {:?} vs {:?} at index {i}",
                a.label, b.label
            )));
        }
    }
    Ok(())
}

/// Kullback-Leibler divergence `D(p || q)`.
///
/// Fails with [`Error::AbsoluteContinuityViolation`] when `p` puts mass where
/// `q` has none, rather than returning infinity.
pub fn kl(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    check_same_support(p, q)?;
    raw::kl(p.probs(), q.probs())
}

/// Total variation distance, half the L1 distance between the mass vectors.
pub fn tv(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    check_same_support(p, q)?;
    Ok(raw::tv(p.probs(), q.probs()))
}

/// Jensen-Shannon divergence against the midpoint mixture. Always in `[0, ln 2]`.
pub fn js(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    check_same_support(p, q)?;
    Ok(raw::js(p.probs(), q.probs()))
}

/// Wasserstein-1 distance under `metric`.
///
/// The supports may differ; costs are taken between every point of `p` and
/// every point of `q`. One-dimensional Euclidean inputs use the CDF formula,
/// everything else goes through the exact transportation simplex.
pub fn wasserstein1(p: &DiscreteDist, q: &DiscreteDist, metric: &Metric) -> Result<f64> {
    if matches!(metric, Metric::Euclidean) {
        if let (Some(xs), Some(ys)) = (p.coords_1d(), q.coords_1d()) {
            return Ok(transport::wasserstein1_cdf(&xs, p.probs(), &ys, q.probs()));
        }
    }
    wasserstein1_lp(p, q, metric)
}

/// Wasserstein-1 distance through the transport linear program only.
pub fn wasserstein1_lp(p: &DiscreteDist, q: &DiscreteDist, metric: &Metric) -> Result<f64> {
    let cost = metric.cost_matrix(p.support(), q.support())?;
    let plan = transport::solve(p.probs(), q.probs(), &cost)?;
    Ok(plan.cost)
}

/// Mutual information `D(J || J_W x J_Z)` of a joint table.
pub fn mutual_information(joint: &JointTable) -> f64 {
    let product = joint.product_of_marginals();
    raw::kl(joint.flat(), product.flat()).expect("joint is absolutely continuous w.r.t. its marginals")
}

/// Lautum information `D(J_W x J_Z || J)`.
pub fn lautum_information(joint: &JointTable) -> Result<f64> {
    let product = joint.product_of_marginals();
    raw::kl(product.flat(), joint.flat())
}

/// Gap `E_p[g] - ln E_q[exp g]` for a witness `g` given by its values on the
/// common support. Never exceeds `kl(p, q)`.
pub fn dv_gap(p: &DiscreteDist, q: &DiscreteDist, g: &[f64]) -> Result<f64> {
    check_same_support(p, q)?;
    if g.len() != p.len() {
        return Err(Error::SupportMismatch(format!(
            "witness has {} values for a support of {}",
            g.len(),
            p.len()
        )));
    }
    let ep: f64 = p.probs().iter().zip(g).map(|(pi, gi)| pi * gi).sum();
    // log-sum-exp over the q-support
    let gmax = g
        .iter()
        .zip(q.probs())
        .filter(|(_, &qi)| qi > 0.0)
        .map(|(&gi, _)| gi)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = g
        .iter()
        .zip(q.probs())
        .filter(|(_, &qi)| qi > 0.0)
        .map(|(gi, qi)| qi * (gi - gmax).exp())
        .sum();
    Ok(ep - (gmax + s.ln()))
}

/// Merge two distributions onto the union of their supports (by label),
/// padding with zero mass. Points keep the coordinates of their first
/// occurrence.
pub fn align(p: &DiscreteDist, q: &DiscreteDist) -> Result<(DiscreteDist, DiscreteDist)> {
    let mut support: Vec<Point> = p.support().to_vec();
    let mut pp = p.probs().to_vec();
    let mut qq = vec![0.0; support.len()];
    for (point, &mass) in q.support().iter().zip(q.probs()) {
        match support.iter().position(|s| s.label == point.label) {
            Some(i) => qq[i] = mass,
            None => {
                support.push(point.clone());
                pp.push(0.0);
                qq.push(mass);
            }
        }
    }
    Ok((
        DiscreteDist::new(support.clone(), pp)?,
        DiscreteDist::new(support, qq)?,
    ))
}

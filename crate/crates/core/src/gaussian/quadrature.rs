//! Iterated composite quadrature over the plane, adapted to Gaussian components.
//!
//! The outer axis is `z`. Its window is the union of every component's
//! `z`-marginal window `mean +- H std`. For each outer node the inner `w`
//! axis is cut at the endpoints of every component's conditional window
//! `E[w | z] +- H sd(w | z)`, and each elementary piece gets the resolution of
//! the narrowest component covering it, so a component of width `s` is always
//! sampled with about `points_per_axis` nodes across `2 H s`. Nearly singular
//! joints, whose mass sits on a thin ridge, are resolved without refining
//! the whole plane.

use rayon::prelude::*;

use super::{BivariateGaussian, GaussianMixture2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Simpson,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub half_width_sigmas: f64,
    pub points_per_axis: usize,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { half_width_sigmas: 8.0, points_per_axis: 1201, scheme: Scheme::Simpson }
    }
}

impl QuadratureSpec {
    pub fn with_points(points_per_axis: usize) -> Self {
        QuadratureSpec { points_per_axis, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width_sigmas >= 5.0) {
            return Err(Error::InvalidConfig(format!(
                "half_width_sigmas = {} must be at least 5",
                self.half_width_sigmas
            )));
        }
        if self.points_per_axis < 3 {
            return Err(Error::InvalidConfig("points_per_axis must be at least 3".into()));
        }
        if self.scheme == Scheme::Simpson && self.points_per_axis % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "Simpson needs an odd points_per_axis, got {}",
                self.points_per_axis
            )));
        }
        // mass outside the window along either axis, for a unit normal
        let tail_mass = 2.0 * libm::erfc(self.half_width_sigmas / std::f64::consts::SQRT_2);
        if tail_mass > 1e-10 {
            return Err(Error::WindowTooSmall { tail_mass });
        }
        Ok(())
    }

    /// The next coarser level, with roughly half the points per axis.
    pub fn coarser(&self) -> Self {
        let mut intervals = (self.points_per_axis - 1) / 2;
        if self.scheme == Scheme::Simpson && intervals % 2 == 1 {
            intervals += 1;
        }
        QuadratureSpec { points_per_axis: intervals.max(2) + 1, ..*self }
    }
}

/// A quadrature result with the absolute difference from the next coarser level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

/// Planar density built from Gaussian components.
pub trait Density2: Sync {
    fn ln_pdf(&self, w: f64, z: f64) -> f64;
    fn gaussian_components(&self) -> Vec<BivariateGaussian>;
}

impl Density2 for BivariateGaussian {
    fn ln_pdf(&self, w: f64, z: f64) -> f64 {
        BivariateGaussian::ln_pdf(self, w, z)
    }
    fn gaussian_components(&self) -> Vec<BivariateGaussian> {
        vec![*self]
    }
}

impl Density2 for GaussianMixture2 {
    fn ln_pdf(&self, w: f64, z: f64) -> f64 {
        GaussianMixture2::ln_pdf(self, w, z)
    }
    fn gaussian_components(&self) -> Vec<BivariateGaussian> {
        self.components().to_vec()
    }
}

/// Composite rule on the union of windows `center +- half_width * scale`.
fn axis_rule(windows: &[(f64, f64)], half_width: f64, points: usize, scheme: Scheme) -> Vec<(f64, f64)> {
    let spans: Vec<(f64, f64, f64)> = windows
        .iter()
        .map(|&(c, s)| (c - half_width * s, c + half_width * s, s))
        .collect();
    let mut cuts: Vec<f64> = spans.iter().flat_map(|&(lo, hi, _)| [lo, hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for pair in cuts.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        let mid = 0.5 * (x0 + x1);
        let finest = spans
            .iter()
            .filter(|&&(lo, hi, _)| lo <= mid && mid <= hi)
            .map(|&(_, _, s)| s)
            .fold(f64::INFINITY, f64::min);
        if !finest.is_finite() {
            // gap between windows: no component has mass here
            continue;
        }
        let step = 2.0 * half_width * finest / (points - 1) as f64;
        let mut intervals = ((x1 - x0) / step).ceil().max(1.0) as usize;
        if scheme == Scheme::Simpson && intervals % 2 == 1 {
            intervals += 1;
        }
        let h = (x1 - x0) / intervals as f64;
        for k in 0..=intervals {
            let x = if k == intervals { x1 } else { x0 + k as f64 * h };
            let wt = match scheme {
                Scheme::Simpson => {
                    let m = if k == 0 || k == intervals {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    m * h / 3.0
                }
                Scheme::Trapezoid => {
                    if k == 0 || k == intervals {
                        0.5 * h
                    } else {
                        h
                    }
                }
            };
            match nodes.last_mut() {
                Some(last) if k == 0 && last.0 == x => last.1 += wt,
                _ => nodes.push((x, wt)),
            }
        }
    }
    nodes
}

/// Integrate `K` functions of `(w, z)` at once over the grid adapted to
/// `components`. Rows are evaluated in parallel and summed in a fixed order,
/// so results do not depend on the thread count.
pub fn integrate<const K: usize, F>(components: &[BivariateGaussian], q: &QuadratureSpec, f: F) -> Result<[f64; K]>
where
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    q.validate()?;
    if components.is_empty() {
        return Err(Error::InvalidConfig("no components to integrate over".into()));
    }
    let h = q.half_width_sigmas;
    let z_windows: Vec<(f64, f64)> = components.iter().map(|g| g.z_marginal()).collect();
    let outer = axis_rule(&z_windows, h, q.points_per_axis, q.scheme);
    let rows: Vec<[f64; K]> = outer
        .par_iter()
        .map(|&(z, wz)| {
            let w_windows: Vec<(f64, f64)> = components.iter().map(|g| g.w_given_z(z)).collect();
            let inner = axis_rule(&w_windows, h, q.points_per_axis, q.scheme);
            let mut acc = [0.0; K];
            for (w, ww) in inner {
                let v = f(w, z);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += ww * x;
                }
            }
            acc.map(|a| a * wz)
        })
        .collect();
    let mut total = [0.0; K];
    for row in rows {
        for (t, r) in total.iter_mut().zip(row) {
            *t += r;
        }
    }
    Ok(total)
}

/// [`integrate`] at `q` and at the next coarser level; the error is their difference.
pub fn integrate_refined<const K: usize, F>(
    components: &[BivariateGaussian],
    q: &QuadratureSpec,
    f: F,
) -> Result<[QuadValue; K]>
where
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    let fine = integrate(components, q, &f)?;
    let coarse = integrate(components, &q.coarser(), &f)?;
    let mut out = [QuadValue { value: 0.0, error: 0.0 }; K];
    for k in 0..K {
        out[k] = QuadValue { value: fine[k], error: (fine[k] - coarse[k]).abs() };
    }
    Ok(out)
}

fn x_ln_x_ratio(ln_a: f64, ln_b: f64) -> f64 {
    // a ln(a / b), with 0 ln 0 = 0
    let a = ln_a.exp();
    if a == 0.0 {
        0.0
    } else {
        a * (ln_a - ln_b)
    }
}

fn check_mass(total: f64) -> Result<()> {
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::NormalizationDrift { integral: total });
    }
    Ok(())
}

fn union_components(a: &impl Density2, b: &impl Density2) -> Vec<BivariateGaussian> {
    let mut comps = a.gaussian_components();
    comps.extend(b.gaussian_components());
    comps
}

/// Differential entropy `-integral p ln p` of a mixture, in nats.
pub fn mixture_entropy(m: &GaussianMixture2, q: &QuadratureSpec) -> Result<QuadValue> {
    let [h, mass] = integrate_refined(m.components(), q, |w, z| {
        let lp = m.ln_pdf(w, z);
        let p = lp.exp();
        [if p > 0.0 { -p * lp } else { 0.0 }, p]
    })?;
    check_mass(mass.value)?;
    Ok(h)
}

/// Total variation `1/2 integral |a - b|`.
pub fn tv_2d(a: &impl Density2, b: &impl Density2, q: &QuadratureSpec) -> Result<QuadValue> {
    let comps = union_components(a, b);
    let [tv, ma, mb] = integrate_refined(&comps, q, |w, z| {
        let pa = a.ln_pdf(w, z).exp();
        let pb = b.ln_pdf(w, z).exp();
        [0.5 * (pa - pb).abs(), pa, pb]
    })?;
    check_mass(ma.value)?;
    check_mass(mb.value)?;
    Ok(QuadValue { value: tv.value.clamp(0.0, 1.0), error: tv.error })
}

/// Kullback-Leibler divergence `D(a || b)`.
pub fn kl_2d(a: &impl Density2, b: &impl Density2, q: &QuadratureSpec) -> Result<QuadValue> {
    let comps = union_components(a, b);
    let [d, ma] = integrate_refined(&comps, q, |w, z| {
        let (la, lb) = (a.ln_pdf(w, z), b.ln_pdf(w, z));
        [x_ln_x_ratio(la, lb), la.exp()]
    })?;
    check_mass(ma.value)?;
    Ok(QuadValue { value: d.value.max(0.0), error: d.error })
}

/// Jensen-Shannon divergence between `a` and `b`.
pub fn js_2d(a: &impl Density2, b: &impl Density2, q: &QuadratureSpec) -> Result<QuadValue> {
    let comps = union_components(a, b);
    let [d, ma, mb] = integrate_refined(&comps, q, |w, z| {
        let (la, lb) = (a.ln_pdf(w, z), b.ln_pdf(w, z));
        [js_density(la, lb), la.exp(), lb.exp()]
    })?;
    check_mass(ma.value)?;
    check_mass(mb.value)?;
    Ok(QuadValue { value: d.value.clamp(0.0, std::f64::consts::LN_2), error: d.error })
}

pub(crate) fn js_density(la: f64, lb: f64) -> f64 {
    let lm = super::log_sum_exp([la, lb].into_iter()) - std::f64::consts::LN_2;
    0.5 * x_ln_x_ratio(la, lm) + 0.5 * x_ln_x_ratio(lb, lm)
}

pub(crate) fn kl_density(la: f64, lb: f64) -> f64 {
    x_ln_x_ratio(la, lb)
}

/// Entropy of a correlated reference normal on the grid against its closed
/// form. Fails when they differ by more than `1e-6` nats.
pub fn calibrate(q: &QuadratureSpec) -> Result<f64> {
    let g = BivariateGaussian::new([0.0, 0.0], [[1.0, 0.6], [0.6, 1.0]])?;
    let h = mixture_entropy(&GaussianMixture2::single(g), q)?;
    let deviation = (h.value - g.entropy()).abs();
    if deviation > 1e-6 {
        return Err(Error::QuadratureCalibration { what: "reference normal entropy".into(), deviation });
    }
    Ok(deviation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::gaussian_mi;

    #[test]
    fn axis_rule_integrates_polynomials() {
        let nodes = axis_rule(&[(0.0, 1.0)], 5.0, 11, Scheme::Simpson);
        assert_eq!(nodes.len(), 11);
        let cubic: f64 = nodes.iter().map(|(x, w)| w * (x * x * x + x * x)).sum();
        assert!((cubic - 250.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn nested_windows_get_local_resolution() {
        let nodes = axis_rule(&[(0.0, 10.0), (3.0, 0.01)], 8.0, 101, Scheme::Simpson);
        // wide window at 100 intervals plus the narrow one at ~100 more
        assert!(nodes.len() < 320, "{}", nodes.len());
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - 160.0).abs() < 1e-10);
        for pair in nodes.windows(2) {
            assert!(pair[1].0 > pair[0].0);
        }
    }

    #[test]
    fn coarser_keeps_simpson_parity() {
        let q = QuadratureSpec::default();
        assert_eq!(q.coarser().points_per_axis, 601);
        assert_eq!(QuadratureSpec::with_points(1203).coarser().points_per_axis, 603);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::with_points(1200).validate().is_err());
        let narrow = QuadratureSpec { half_width_sigmas: 5.0, ..Default::default() };
        assert!(matches!(narrow.validate(), Err(Error::WindowTooSmall { .. })));
        let tiny = QuadratureSpec { half_width_sigmas: 4.0, ..Default::default() };
        assert!(matches!(tiny.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn self_calibration() {
        let dev = calibrate(&QuadratureSpec::default()).unwrap();
        assert!(dev < 1e-6);
    }

    #[test]
    fn single_component_entropy_matches_closed_form() {
        let g = BivariateGaussian::new([1.0, 2.0], [[50.0, 35.0], [35.0, 100.0]]).unwrap();
        let m = GaussianMixture2::single(g);
        let h = mixture_entropy(&m, &QuadratureSpec::default()).unwrap();
        assert!((h.value - g.entropy()).abs() < 1e-6);
        let twice = GaussianMixture2::new(vec![0.5, 0.5], vec![g, g]).unwrap();
        let h2 = mixture_entropy(&twice, &QuadratureSpec::default()).unwrap();
        assert!((h2.value - g.entropy()).abs() < 1e-6);
    }

    #[test]
    fn thin_ridge_entropy() {
        // det = 1 with variances near 100: correlation 0.99995
        let g = BivariateGaussian::new([0.0, 0.0], [[98.02, 99.0], [99.0, 100.0]]).unwrap();
        let h = mixture_entropy(&GaussianMixture2::single(g), &QuadratureSpec::default()).unwrap();
        assert!((h.value - g.entropy()).abs() < 1e-6, "{:?} vs {}", h, g.entropy());
    }

    #[test]
    fn tv_of_shifted_unit_normals() {
        let a = BivariateGaussian::independent([0.0, 0.0], 1.0, 1.0).unwrap();
        let b = BivariateGaussian::independent([0.0, 2.0], 1.0, 1.0).unwrap();
        let q = QuadratureSpec::default();
        let expected = libm::erf(1.0 / std::f64::consts::SQRT_2);
        let tv = tv_2d(&a, &b, &q).unwrap();
        // the kink of |a - b| along z = 1 limits Simpson to second order, so
        // the oracle is held to the reported error estimate
        assert!((tv.value - expected).abs() <= tv.error, "{tv:?}");
        assert!(tv.error < 1e-4);
        assert!((expected - 0.68269).abs() < 1e-5);
        assert!(tv_2d(&a, &a, &q).unwrap().value < 1e-10);
    }

    #[test]
    fn mi_by_quadrature() {
        let q = QuadratureSpec::default();
        for k in 1..=9 {
            let rho = k as f64 / 10.0;
            let joint = BivariateGaussian::new([0.0, 0.0], [[1.0, rho], [rho, 1.0]]).unwrap();
            let prod = BivariateGaussian::independent([0.0, 0.0], 1.0, 1.0).unwrap();
            let d = kl_2d(&joint, &prod, &q).unwrap();
            assert!((d.value - gaussian_mi(rho).unwrap()).abs() < 1e-5, "rho {rho}: {d:?}");
        }
    }

    #[test]
    fn js_is_symmetric_and_capped() {
        let a = BivariateGaussian::independent([0.0, 0.0], 1.0, 1.0).unwrap();
        let b = BivariateGaussian::new([1.0, 0.0], [[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let q = QuadratureSpec::with_points(401);
        let ab = js_2d(&a, &b, &q).unwrap().value;
        let ba = js_2d(&b, &a, &q).unwrap().value;
        assert!((ab - ba).abs() < 1e-12);
        assert!(ab > 0.0 && ab < std::f64::consts::LN_2);
    }
}

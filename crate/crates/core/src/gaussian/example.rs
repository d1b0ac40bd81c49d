use super::quadrature::{integrate_refined, js_density, kl_density, QuadValue, QuadratureSpec};
use super::{entropy_1d, gaussian_mi, std_normal_cdf, true_gen_mc, BivariateGaussian, GaussianMixture2, McSpec};
use crate::error::{Error, Result};

/// Parameters of the two-sample mean-estimation example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleConfig {
    pub sigma: f64,
    pub c: f64,
    pub t: f64,
    pub beta: f64,
}

impl ExampleConfig {
    pub fn new(sigma: f64, c: f64, t: f64) -> Result<Self> {
        ExampleConfig { sigma, c, t, beta: 0.0 }.validated()
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        ExampleConfig { beta, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("c = {} must be positive", self.c)));
        }
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Error::InvalidConfig(format!("t = {} must lie in (0, 1)", self.t)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidConfig("beta must be finite".into()));
        }
        Ok(self)
    }

    /// `Var W = sigma^2 (t^2 + (1 - t)^2)`.
    pub fn var_w(&self) -> f64 {
        self.sigma * self.sigma * (self.t * self.t + (1.0 - self.t).powi(2))
    }

    fn weight(&self, sample: Sample) -> f64 {
        match sample {
            Sample::First => self.t,
            Sample::Second => 1.0 - self.t,
        }
    }

    /// Sub-Gaussian constant of the truncated loss, half its range.
    pub fn subgaussian_sigma(&self) -> f64 {
        self.c * self.c / 2.0
    }

    /// Lipschitz constant of `w -> min((w - z)^2, c^2)`.
    pub fn lipschitz(&self) -> f64 {
        2.0 * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    First,
    Second,
}

impl Sample {
    pub const BOTH: [Sample; 2] = [Sample::First, Sample::Second];
}

/// Joint law of `(W, Z_i)`.
pub fn joint_of(cfg: &ExampleConfig, sample: Sample) -> BivariateGaussian {
    let s2 = cfg.sigma * cfg.sigma;
    let cov = cfg.weight(sample) * s2;
    BivariateGaussian::new([cfg.beta, cfg.beta], [[cfg.var_w(), cov], [cov, s2]])
        .expect("joint covariance is positive definite for 0 < t < 1")
}

/// `P_W x P_Z`.
pub fn product_of_marginals(cfg: &ExampleConfig) -> BivariateGaussian {
    BivariateGaussian::independent([cfg.beta, cfg.beta], cfg.var_w(), cfg.sigma * cfg.sigma)
        .expect("variances are positive")
}

/// Average joint, the equal-weight mixture of the two per-sample joints.
pub fn average_joint(cfg: &ExampleConfig) -> GaussianMixture2 {
    GaussianMixture2::new(
        vec![0.5, 0.5],
        vec![joint_of(cfg, Sample::First), joint_of(cfg, Sample::Second)],
    )
    .expect("weights are normalized")
}

/// Correlations of `(W, Z_1)` and `(W, Z_2)`: `t / sqrt(t^2 + (1-t)^2)` and
/// `(1 - t) / sqrt(t^2 + (1-t)^2)`.
pub fn correlations(cfg: &ExampleConfig) -> [f64; 2] {
    let norm = (cfg.t * cfg.t + (1.0 - cfg.t).powi(2)).sqrt();
    [cfg.t / norm, (1.0 - cfg.t) / norm]
}

pub fn truncated_square_loss(w: f64, z: f64, c: f64) -> f64 {
    ((w - z) * (w - z)).min(c * c)
}

/// Every quantity the bounds need, from one pass over a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleQuantities {
    pub h_w: f64,
    pub h_z: f64,
    /// Entropy of the average joint.
    pub h_avg: QuadValue,
    /// `D(avg joint || P_W x P_Z) = h_w + h_z - h_avg`.
    pub avg_kl: QuadValue,
    /// `I(W; Z_i)`, closed form.
    pub mi: [f64; 2],
    pub tv_avg: QuadValue,
    pub tv_per_sample: [QuadValue; 2],
    pub js_avg: QuadValue,
    pub js_per_sample: [QuadValue; 2],
    /// `D(P_W x P_Z || avg joint)`.
    pub lautum_avg: QuadValue,
    pub lautum_per_sample: [QuadValue; 2],
    /// `E_Z[W1(avg P_{W|Z}, P_W)]`.
    pub w1_avg: QuadValue,
    pub w1_per_sample: [QuadValue; 2],
    /// Generalization error of the truncated loss by quadrature.
    pub gen: QuadValue,
    /// Largest deviation of grid entropies from their closed forms.
    pub calibration: f64,
}

const CALIBRATION_TOLERANCE: f64 = 1e-6;

impl ExampleQuantities {
    pub fn compute(cfg: &ExampleConfig, q: &QuadratureSpec) -> Result<Self> {
        let p1 = joint_of(cfg, Sample::First);
        let p2 = joint_of(cfg, Sample::Second);
        let prod = product_of_marginals(cfg);
        let (mw, sw) = prod.w_marginal();
        let (mz, sz) = prod.z_marginal();
        let ln_half = 0.5f64.ln();
        let ln_norm_z = -0.5 * (2.0 * std::f64::consts::PI).ln() - sz.ln();
        let c = cfg.c;

        let v = integrate_refined(&[p1, p2, prod], q, |w, z| {
            let l1 = p1.ln_pdf(w, z);
            let l2 = p2.ln_pdf(w, z);
            let lp = prod.ln_pdf(w, z);
            let la = super::log_sum_exp([l1 + ln_half, l2 + ln_half].into_iter());
            let (d1, d2, dp, da) = (l1.exp(), l2.exp(), lp.exp(), la.exp());
            let neg_xlx = |d: f64, l: f64| if d > 0.0 { -d * l } else { 0.0 };

            // CDF gaps against P_W, weighted by the z-density
            let pz = (ln_norm_z - 0.5 * ((z - mz) / sz).powi(2)).exp();
            let f_w = std_normal_cdf((w - mw) / sw);
            let cdf = |g: &BivariateGaussian| {
                let (m, s) = g.w_given_z(z);
                std_normal_cdf((w - m) / s)
            };
            let (f1, f2) = (cdf(&p1), cdf(&p2));
            let fa = 0.5 * (f1 + f2);

            [
                neg_xlx(da, la),
                0.5 * (da - dp).abs(),
                0.5 * (d1 - dp).abs(),
                0.5 * (d2 - dp).abs(),
                js_density(la, lp),
                js_density(l1, lp),
                js_density(l2, lp),
                kl_density(lp, la),
                kl_density(lp, l1),
                kl_density(lp, l2),
                pz * (fa - f_w).abs(),
                pz * (f1 - f_w).abs(),
                pz * (f2 - f_w).abs(),
                truncated_square_loss(w, z, c) * (dp - da),
                neg_xlx(dp, lp),
                neg_xlx(d1, l1),
                neg_xlx(d2, l2),
                da,
            ]
        })?;

        let mass = v[17].value;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NormalizationDrift { integral: mass });
        }
        let checks = [
            ("product entropy", v[14].value, prod.entropy()),
            ("first joint entropy", v[15].value, p1.entropy()),
            ("second joint entropy", v[16].value, p2.entropy()),
        ];
        let mut calibration = 0.0f64;
        for (what, got, exact) in checks {
            let deviation = (got - exact).abs();
            if deviation > CALIBRATION_TOLERANCE {
                return Err(Error::QuadratureCalibration { what: what.into(), deviation });
            }
            calibration = calibration.max(deviation);
        }

        let h_w = entropy_1d(cfg.var_w())?;
        let h_z = entropy_1d(cfg.sigma * cfg.sigma)?;
        let [rho1, rho2] = correlations(cfg);
        let nonneg = |x: QuadValue| QuadValue { value: x.value.max(0.0), error: x.error };
        let tv = |x: QuadValue| QuadValue { value: x.value.clamp(0.0, 1.0), error: x.error };
        let js = |x: QuadValue| QuadValue { value: x.value.clamp(0.0, std::f64::consts::LN_2), error: x.error };
        Ok(ExampleQuantities {
            h_w,
            h_z,
            h_avg: v[0],
            avg_kl: nonneg(QuadValue { value: h_w + h_z - v[0].value, error: v[0].error }),
            mi: [gaussian_mi(rho1)?, gaussian_mi(rho2)?],
            tv_avg: tv(v[1]),
            tv_per_sample: [tv(v[2]), tv(v[3])],
            js_avg: js(v[4]),
            js_per_sample: [js(v[5]), js(v[6])],
            lautum_avg: nonneg(v[7]),
            lautum_per_sample: [nonneg(v[8]), nonneg(v[9])],
            w1_avg: nonneg(v[10]),
            w1_per_sample: [nonneg(v[11]), nonneg(v[12])],
            gen: v[13],
            calibration,
        })
    }
}

/// How to evaluate the true generalization error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenMethod {
    MonteCarlo(McSpec),
    Quadrature(QuadratureSpec),
}

/// A generalization-error estimate; `ci_halfwidth` is the 95% normal
/// interval for Monte Carlo and the refinement difference for quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenEstimate {
    pub value: f64,
    pub ci_halfwidth: f64,
}

/// `E_{P_W x P_Z}[loss] - 1/2 sum_i E_{P_{W,Z_i}}[loss]` for the truncated loss.
pub fn true_gen_error(cfg: &ExampleConfig, method: GenMethod) -> Result<GenEstimate> {
    match method {
        GenMethod::MonteCarlo(mc) => true_gen_mc(cfg, &mc),
        GenMethod::Quadrature(q) => {
            let p1 = joint_of(cfg, Sample::First);
            let p2 = joint_of(cfg, Sample::Second);
            let prod = product_of_marginals(cfg);
            let c = cfg.c;
            let [gen] = integrate_refined(&[p1, p2, prod], &q, |w, z| {
                let avg = 0.5 * (p1.pdf(w, z) + p2.pdf(w, z));
                [truncated_square_loss(w, z, c) * (prod.pdf(w, z) - avg)]
            })?;
            Ok(GenEstimate { value: gen.value, ci_halfwidth: gen.error })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_weight_joint() {
        let cfg = ExampleConfig::new(10.0, 2.0, 0.5).unwrap();
        assert!((cfg.var_w() - 50.0).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for s in Sample::BOTH {
            assert!((joint_of(&cfg, s).correlation() - r).abs() < 1e-15);
        }
        for rho in correlations(&cfg) {
            assert!((rho - r).abs() < 1e-15);
        }
    }

    #[test]
    fn correlation_formula_matches_covariance() {
        for k in 1..100 {
            let cfg = ExampleConfig::new(10.0, 2.0, k as f64 / 100.0).unwrap();
            let rho = correlations(&cfg);
            assert!((joint_of(&cfg, Sample::First).correlation() - rho[0]).abs() < 1e-14);
            assert!((joint_of(&cfg, Sample::Second).correlation() - rho[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn near_one_weight_copies_first_sample() {
        let cfg = ExampleConfig::new(10.0, 2.0, 0.999).unwrap();
        let [r1, r2] = correlations(&cfg);
        assert!((r1 - 1.0).abs() < 1e-3);
        // rho_2 = (1 - t) / sqrt(t^2 + (1 - t)^2) is about 1.001e-3 here, so
        // the limit is checked to first order in 1 - t.
        assert!((r2 - 0.001 / 0.999).abs() < 1e-6, "{r2}");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ExampleConfig::new(0.0, 2.0, 0.5).is_err());
        assert!(ExampleConfig::new(10.0, -1.0, 0.5).is_err());
        assert!(ExampleConfig::new(10.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_point_collapses_to_one_gaussian() {
        let cfg = ExampleConfig::new(10.0, 2.0, 0.5).unwrap();
        let q = QuadratureSpec::with_points(601);
        let x = ExampleQuantities::compute(&cfg, &q).unwrap();
        let half_ln2 = 0.5 * std::f64::consts::LN_2;
        assert!((x.avg_kl.value - half_ln2).abs() < 1e-6, "{:?}", x.avg_kl);
        assert!((x.tv_avg.value - x.tv_per_sample[0].value).abs() < 1e-9);
        let lautum = super::super::gaussian_lautum(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((x.lautum_avg.value - lautum).abs() < 1e-6);
        assert!((x.lautum_per_sample[1].value - lautum).abs() < 1e-6);
    }
}

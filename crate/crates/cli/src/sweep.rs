//! Sweep of the Gaussian example over the estimator weight `t`.

use genbound::bounds::{gaussian_report, BoundReport};
use genbound::gaussian::{calibrate, ExampleConfig, GenMethod, McSpec, QuadratureSpec};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// CSV column names next to the report entries they show.
pub const COLUMNS: [(&str, &str); 11] = [
    ("true_gen", "true_gen"),
    ("ismi", "ismi"),
    ("avg_kl", "avg_kl_bound"),
    ("ind_tv", "ind_tv_bound"),
    ("avg_tv", "avg_tv_bound"),
    ("ind_w", "ind_w_bound"),
    ("avg_w", "avg_w_bound"),
    ("js_avg", "js_avg_bound"),
    ("js_ps", "js_per_sample_bound"),
    ("lautum_avg", "lautum_avg_bound"),
    ("lautum_ps", "lautum_per_sample_bound"),
];

/// Report entry behind a CSV column name.
pub fn entry_for(column: &str) -> Option<&'static str> {
    COLUMNS.iter().find(|(c, _)| *c == column).map(|(_, e)| *e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sigma: f64,
    pub c: f64,
    pub t_grid: Vec<f64>,
    pub mc: McSpec,
    pub quad: QuadratureSpec,
    /// Columns to fill; the others stay empty.
    pub columns: Vec<String>,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sigma: 10.0,
            c: 2.0,
            t_grid: default_grid(),
            mc: McSpec::default(),
            quad: QuadratureSpec::default(),
            columns: COLUMNS.iter().map(|(c, _)| c.to_string()).collect(),
            jobs: None,
        }
    }
}

/// `0.01, 0.02, ..., 0.99`.
pub fn default_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

/// Parse `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: String| CliError::Config(format!("t-grid {spec:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let grid = if let [start, stop, count] = spec.split(':').collect::<Vec<_>>()[..] {
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count.trim().parse().map_err(|e| bad(format!("count: {e}")))?;
        match count {
            0 => return Err(bad("count must be positive".into())),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    Ok(grid)
}

/// Independent seed for grid point `index`, so results do not depend on
/// scheduling.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        ExampleConfig::new(self.sigma, self.c, 0.5).map_err(|e| CliError::Config(e.to_string()))?;
        if self.t_grid.is_empty() {
            return Err(CliError::Config("t-grid is empty".into()));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(CliError::Config(format!("t = {t} is not strictly inside (0, 1)")));
        }
        self.quad.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.mc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(c) = self.columns.iter().find(|c| entry_for(c).is_none()) {
            let known: Vec<_> = COLUMNS.iter().map(|(c, _)| *c).collect();
            return Err(CliError::Config(format!("unknown bound {c:?}; expected one of {}", known.join(", "))));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a sweep: one report per grid point, plus the indices of points
/// whose computation failed.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<BoundReport>,
    pub failed: Vec<usize>,
}

impl Sweep {
    pub fn csv(&self) -> String {
        let mut out = String::from(BoundReport::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

fn point(cfg: &SweepConfig, index: usize, t: f64) -> BoundReport {
    let mc = McSpec { seed: point_seed(cfg.mc.seed, index), ..cfg.mc };
    let computed = ExampleConfig::new(cfg.sigma, cfg.c, t)
        .and_then(|ex| gaussian_report(&ex, &cfg.quad, GenMethod::MonteCarlo(mc)));
    match computed {
        Ok(mut r) => {
            for (column, entry) in COLUMNS {
                if !cfg.columns.iter().any(|c| c == column) {
                    r.clear(entry);
                }
            }
            r
        }
        Err(e) => {
            log::warn!("t = {t}: {e}; row left empty");
            let mut r = BoundReport { t: Some(t), ..Default::default() };
            r.refusals.insert("row".into(), e.to_string());
            r
        }
    }
}

/// Evaluate every grid point. The quadrature self-calibration runs first and
/// aborts the sweep if it fails.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Sweep> {
    cfg.validate()?;
    let deviation = calibrate(&cfg.quad)?;
    log::info!("quadrature calibration deviation {deviation:.3e} nats");
    let work = || -> Vec<BoundReport> {
        cfg.t_grid.par_iter().enumerate().map(|(i, &t)| point(cfg, i, t)).collect()
    };
    let rows = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let failed = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.refusals.contains_key("row"))
        .map(|(i, _)| i)
        .collect();
    Ok(Sweep { rows, failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("0.25,0.5").unwrap(), vec![0.25, 0.5]);
        assert_eq!(parse_grid("0.1:0.3:3").unwrap().len(), 3);
        assert_eq!(parse_grid("0.5:0.9:1").unwrap(), vec![0.5]);
        assert!(parse_grid("0.1:x:3").is_err());
        assert!(parse_grid("").is_err());
        let d = default_grid();
        assert_eq!((d.len(), d[0], d[98]), (99, 0.01, 0.99));
    }

    #[test]
    fn validation() {
        let mut cfg = SweepConfig { t_grid: vec![0.0], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        cfg.t_grid = vec![0.5];
        cfg.columns = vec!["bogus".into()];
        assert!(cfg.validate().is_err());
        cfg.columns = vec!["ismi".into()];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn seeds_differ_per_point() {
        assert_ne!(point_seed(0, 0), point_seed(0, 1));
        assert_ne!(point_seed(0, 0), point_seed(1, 0));
        assert_eq!(point_seed(7, 3), point_seed(7, 3));
    }
}

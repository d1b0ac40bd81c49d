//! One PASS/FAIL line per acceptance criterion, with the pinned tolerances.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use genbound::avgjoint::{emp_risk_diff, LearnerSpec};
use genbound::bounds::{self, discrete_report, gaussian_report, BoundReport};
use genbound::gaussian::{
    calibrate, gaussian_mi, kl_2d, BivariateGaussian, ExampleConfig, GenMethod, QuadratureSpec,
};
use genbound::instances::{self, Shape};
use genbound::measures::{self, Metric};
use genbound_cli::discrete::run_discrete;
use genbound_cli::sweep::{run_sweep, Sweep, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Printed straight to stdout so the line shows even when output is captured.
fn verdict(id: &str, pass: bool, detail: String) {
    let line = format!("{} criterion {id}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id}: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn report(learner: &LearnerSpec, r: &mut ChaCha8Rng) -> BoundReport {
    let loss = instances::random_loss(r, learner, 0.0, 1.0).unwrap();
    discrete_report(learner, &loss, &[], &Metric::Indicator).unwrap()
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

const CHAIN: [(&str, &str); 7] = [
    ("avg_w_bound", "ind_w_bound"),
    ("avg_tv_bound", "ind_tv_bound"),
    ("avg_kl_bound", "ismi"),
    ("ismi", "mi_dataset_bound"),
    ("js_avg_bound", "js_per_sample_bound"),
    ("lautum_avg_bound", "lautum_per_sample_bound"),
    ("avg_kl_bound", "per_sample_kl_bound"),
];

#[test]
fn criterion_1_generalization_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let mut r = rng(1000 + i);
        let l = instances::random_learner(&mut r, Shape::default()).unwrap();
        let loss = instances::random_loss(&mut r, &l, 0.0, 1.0).unwrap();
        worst = worst.max((l.gen_error_direct(&loss).unwrap() - l.gen_error_via_avg(&loss).unwrap()).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        "1",
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("200 instances, max |direct - via avg| = {worst:.2e} (tol 1e-12), {:.2} s (limit 10 s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_bound_validity() {
    let names = [
        "avg_tv_bound",
        "ind_tv_bound",
        "avg_kl_bound",
        "ismi",
        "per_sample_kl_bound",
        "avg_w_bound",
        "ind_w_bound",
        "js_avg_bound",
        "js_per_sample_bound",
    ];
    let (mut worst, mut lautum_cases) = (f64::INFINITY, 0);
    for i in 0..100 {
        let mut r = rng(2000 + i);
        let positive = i % 2 == 0;
        let l = instances::random_iid_learner(&mut r, Shape::default(), positive).unwrap();
        let rep = report(&l, &mut r);
        let gen = rep.true_gen.unwrap().value.abs();
        let mut check = |name: &str| worst = worst.min(rep.get(name).unwrap() - gen);
        names.iter().for_each(|n| check(n));
        if positive {
            check("lautum_avg_bound");
            check("lautum_per_sample_bound");
            lautum_cases += 1;
        }
    }
    verdict(
        "2",
        worst >= -1e-9,
        format!("100 i.i.d. instances ({lautum_cases} strictly positive for Lautum), min bound - |gen| = {worst:.3e} (tol -1e-9)"),
    );
}

#[test]
fn criterion_3_orderings() {
    let mut worst = [f64::INFINITY; CHAIN.len()];
    let mut cases = [0usize; CHAIN.len()];
    for i in 0..100 {
        let mut r = rng(3000 + i);
        let l = instances::random_iid_learner(&mut r, Shape::default(), i % 2 == 0).unwrap();
        let rep = report(&l, &mut r);
        for (k, (a, b)) in CHAIN.iter().enumerate() {
            if let (Some(x), Some(y)) = (rep.get(a), rep.get(b)) {
                worst[k] = worst[k].min(y - x);
                cases[k] += 1;
            }
        }
    }
    let fixture = run_discrete(&fixture("asymmetric_learner.json"), &fixture("loss_indicator.json")).unwrap();
    let gaps: Vec<f64> = CHAIN.iter().map(|(a, b)| fixture.get(b).unwrap() - fixture.get(a).unwrap()).collect();

    let mut detail = Vec::new();
    let mut pass = true;
    for (k, (a, b)) in CHAIN.iter().enumerate() {
        let ok = worst[k] >= -1e-9 && gaps[k] > 1e-3;
        pass &= ok;
        detail.push(format!("{a} <= {b}: {} random, min slack {:.3e}, fixture gap {:.4}", cases[k], worst[k], gaps[k]));
    }
    verdict("3", pass, detail.join("; "));
}

#[test]
fn criterion_4_symmetric_collapse() {
    let pairs = [
        ("avg_w_bound", "ind_w_bound"),
        ("avg_tv_bound", "ind_tv_bound"),
        ("avg_kl_bound", "ismi"),
        ("avg_kl_bound", "per_sample_kl_bound"),
        ("js_avg_bound", "js_per_sample_bound"),
        ("lautum_avg_bound", "lautum_per_sample_bound"),
    ];
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mut r = rng(4000 + i);
        let l = instances::random_exchangeable_learner(&mut r, Shape::default()).unwrap();
        let rep = report(&l, &mut r);
        for (a, b) in pairs {
            let (x, y) = (rep.get(a).unwrap(), rep.get(b).unwrap());
            if x.max(y) > 1e-12 {
                worst = worst.max(rel(x, y));
            }
        }
    }
    let g = gaussian_report(&ExampleConfig::new(10.0, 2.0, 0.5).unwrap(), &QuadratureSpec::default(), GenMethod::Quadrature(QuadratureSpec::default()))
        .unwrap();
    let mut gworst = 0.0f64;
    for (a, b) in pairs {
        if let (Some(x), Some(y)) = (g.get(a), g.get(b)) {
            gworst = gworst.max(rel(x, y));
        }
    }
    verdict(
        "4",
        worst <= 1e-6 && gworst <= 1e-6,
        format!("max relative gap: exchangeable discrete {worst:.2e}, Gaussian t=0.5 {gworst:.2e} (tol 1e-6)"),
    );
}

fn sweep() -> &'static (Sweep, Duration) {
    static SWEEP: OnceLock<(Sweep, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let s = run_sweep(&SweepConfig::default()).unwrap();
        (s, start.elapsed())
    })
}

fn at(rows: &[BoundReport], t: f64) -> &BoundReport {
    rows.iter().find(|r| (r.t.unwrap() - t).abs() < 1e-12).unwrap()
}

#[test]
fn criterion_5a_symmetric_point_value() {
    let (s, _) = sweep();
    let v = at(&s.rows, 0.5).avg_kl_bound.unwrap();
    let want = 2.0 * std::f64::consts::LN_2.sqrt();
    verdict("5a", (v - want).abs() <= 1e-3, format!("avg_kl at t=0.5 = {v:.6}, 2 sqrt(ln 2) = {want:.6} (tol 1e-3)"));
}

#[test]
fn criterion_5b_average_joint_bounds_tighter_inside_the_band() {
    let (s, _) = sweep();
    let mut kl_bad = Vec::new();
    let mut tv_bad = Vec::new();
    let mut not_strict = Vec::new();
    for r in s.rows.iter().filter(|r| r.t.unwrap() > 0.1 && r.t.unwrap() < 0.9) {
        let t = r.t.unwrap();
        let kl_gap = r.ismi.unwrap() - r.avg_kl_bound.unwrap();
        let tv_gap = r.ind_tv_bound.unwrap() - r.avg_tv_bound.unwrap();
        if kl_gap < -1e-9 {
            kl_bad.push(format!("{t:.2} ({kl_gap:+.4})"));
        }
        if tv_gap < -1e-9 {
            tv_bad.push(format!("{t:.2}"));
        }
        if (t - 0.5).abs() > 0.015 && (kl_gap <= 0.0 || tv_gap <= 0.0) {
            not_strict.push(format!("{t:.2}"));
        }
    }
    verdict(
        "5b",
        kl_bad.is_empty() && tv_bad.is_empty() && not_strict.is_empty(),
        format!(
            "0.1 < t < 0.9: avg_kl > ismi at [{}]; avg_tv > ind_tv at [{}]; no strict gap away from 0.5 at [{}]",
            kl_bad.join(", "),
            tv_bad.join(", "),
            not_strict.join(", ")
        ),
    );
}

#[test]
fn criterion_5c_average_tv_is_tightest() {
    let (s, _) = sweep();
    let mut bad = Vec::new();
    for r in &s.rows {
        let tv = r.avg_tv_bound.unwrap();
        let others = [r.ismi.unwrap(), r.avg_kl_bound.unwrap(), r.ind_tv_bound.unwrap()];
        if others.iter().any(|&o| tv > o + 1e-9) {
            bad.push(format!("{:.2}", r.t.unwrap()));
        }
    }
    verdict("5c", bad.is_empty(), format!("{} grid points, avg_tv not minimal at [{}]", s.rows.len(), bad.join(", ")));
}

#[test]
fn criterion_5d_bounds_dominate_true_error() {
    let (s, elapsed) = sweep();
    let mut bad = Vec::new();
    let mut checked = 0;
    for r in &s.rows {
        let g = r.true_gen.unwrap();
        for name in r.present() {
            let slack = r.get(name).unwrap() - g.value.abs() + g.ci + r.numeric_error.get(name).copied().unwrap_or(0.0);
            checked += 1;
            if slack < 0.0 {
                bad.push(format!("{}@{:.2}", name, r.t.unwrap()));
            }
        }
    }
    let fast = *elapsed < Duration::from_secs(300);
    verdict(
        "5d",
        bad.is_empty() && s.failed.is_empty() && fast,
        format!(
            "{checked} (t, bound) pairs, violations [{}], failed rows {}, full 99-point sweep {:.1} s (limit 300 s)",
            bad.join(", "),
            s.failed.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_numeric_oracles() {
    let mut lp_cdf = 0.0f64;
    let mut tv_w = 0.0f64;
    for i in 0..100 {
        let mut r = rng(6000 + i);
        let (p, q) = instances::random_pair_1d_disjoint(&mut r, 7);
        let lp = measures::wasserstein1_lp(&p, &q, &Metric::Euclidean).unwrap();
        let cdf = measures::wasserstein1(&p, &q, &Metric::Euclidean).unwrap();
        lp_cdf = lp_cdf.max((lp - cdf).abs());
        let (p, q) = instances::random_pair_1d(&mut r, 7);
        tv_w = tv_w.max((measures::tv(&p, &q).unwrap() - measures::wasserstein1(&p, &q, &Metric::Indicator).unwrap()).abs());
    }
    let q = QuadratureSpec::default();
    let calibration = calibrate(&q).unwrap();
    let mut mi = 0.0f64;
    for k in 1..=9 {
        let rho = k as f64 / 10.0;
        let joint = BivariateGaussian::new([0.0, 0.0], [[1.0, rho], [rho, 1.0]]).unwrap();
        let product = BivariateGaussian::independent([0.0, 0.0], 1.0, 1.0).unwrap();
        mi = mi.max((kl_2d(&joint, &product, &q).unwrap().value - gaussian_mi(rho).unwrap()).abs());
    }
    verdict(
        "6",
        lp_cdf <= 1e-9 && tv_w <= 1e-14 && calibration <= 1e-6 && mi <= 1e-5,
        format!(
            "LP vs CDF {lp_cdf:.2e} (1e-9); TV vs indicator W1 {tv_w:.2e} (1e-14); entropy calibration {calibration:.2e} (1e-6); MI vs quadrature KL {mi:.2e} (1e-5)"
        ),
    );
}

#[test]
fn criterion_7_variational_witnesses() {
    let mut dv = f64::INFINITY;
    for i in 0..500 {
        let mut r = rng(7000 + i);
        let k = r.random_range(1..6);
        let support = instances::random_points(&mut r, "x", k);
        let p = instances::random_dist(&mut r, support.clone(), false);
        let q = instances::random_dist(&mut r, support, true);
        let g: Vec<f64> = (0..k).map(|_| r.random_range(-5.0..5.0)).collect();
        dv = dv.min(measures::kl(&p, &q).unwrap() - measures::dv_gap(&p, &q, &g).unwrap());
    }
    let mut kr = f64::INFINITY;
    for i in 0..200 {
        let mut r = rng(7500 + i);
        let (p, q) = instances::random_pair_1d_disjoint(&mut r, 6);
        let w = measures::wasserstein1(&p, &q, &Metric::Euclidean).unwrap();
        let xs: Vec<f64> = p.support().iter().chain(q.support()).map(|x| x.coords.as_ref().unwrap()[0]).collect();
        let g = instances::random_lipschitz_witness(&mut r, &xs);
        let (gp, gq) = g.split_at(p.len());
        kr = kr.min(w - (p.expectation(gp) - q.expectation(gq)));
    }
    verdict(
        "7",
        dv >= -1e-12 && kr >= -1e-12,
        format!("min kl - dv_gap over 500 witnesses {dv:.3e}; min W1 - KR gap over 200 witnesses {kr:.3e}"),
    );
}

#[test]
fn criterion_8_empirical_risk_difference() {
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let mut r = rng(8000 + i);
        let kz = r.random_range(2..4);
        let zs = instances::random_points(&mut r, "z", kz);
        let pz = instances::random_dist(&mut r, zs, true);
        let ws = instances::random_points(&mut r, "w", 3);
        let m = r.random_range(1..3);
        // every tenth pair trains B on one more sample than A
        let extra = usize::from(i % 10 == 0);
        let a = LearnerSpec::iid(m, &pz, ws.clone(), |_| instances::random_probs(&mut r, 3, true)).unwrap();
        let b = LearnerSpec::iid(m + extra, &pz, ws, |_| instances::random_probs(&mut r, 3, true)).unwrap();
        let loss = instances::random_loss(&mut r, &a, 0.0, 1.0).unwrap();
        let gap = emp_risk_diff(&a, &b, &loss).unwrap().abs();
        let bound = bounds::emp_diff_bound(0.5, bounds::emp_diff_divergence(&a, &b).unwrap()).unwrap();
        worst = worst.min(bound - gap);
    }
    verdict("8", worst >= -1e-9, format!("100 pairs (10 with different sample counts), min bound - |diff| = {worst:.3e}"));
}

#[test]
fn criterion_9_determinism() {
    let run = || {
        let cfg = SweepConfig {
            t_grid: vec![0.2, 0.5, 0.7],
            mc: genbound::gaussian::McSpec { n_samples: 50_000, seed: 11 },
            ..SweepConfig::default()
        };
        run_sweep(&cfg).unwrap().csv()
    };
    let (a, b) = (run(), run());
    let report = || {
        let r = run_discrete(&fixture("memorizer_learner.json"), &fixture("loss_indicator.json")).unwrap();
        serde_json::to_string_pretty(&r).unwrap()
    };
    let (x, y) = (report(), report());
    let verify = || {
        let cfg = genbound_cli::verify::VerifyConfig::new(genbound_cli::verify::Suite::Discrete, 5, 20);
        serde_json::to_string(&genbound_cli::verify::run_verify(&cfg)).unwrap()
    };
    let (u, v) = (verify(), verify());
    verdict(
        "9",
        a == b && x == y && u == v,
        format!("sweep CSV identical: {}; discrete JSON identical: {}; verify JSON identical: {}", a == b, x == y, u == v),
    );
}

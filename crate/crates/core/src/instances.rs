//! Seeded random instances for property checks and verification suites.
//!
//! Every generator takes the caller's RNG, so a fixed seed reproduces the
//! whole instance stream.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::avgjoint::{LearnerSpec, LossTable};
use crate::error::Result;
use crate::measures::{DiscreteDist, Point};

/// Random mass vector of length `k`. Without `positive`, entries are zeroed
/// with probability 0.3, always leaving at least one positive entry.
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, k: usize, positive: bool) -> Vec<f64> {
    let mut p: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    if !positive {
        let keep = rng.random_range(0..k);
        for (i, x) in p.iter_mut().enumerate() {
            if i != keep && rng.random_bool(0.3) {
                *x = 0.0;
            }
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Labels `prefix0 .. prefix{k-1}` placed at random points of `[-2, 2]`.
pub fn random_points<R: Rng + ?Sized>(rng: &mut R, prefix: &str, k: usize) -> Vec<Point> {
    (0..k)
        .map(|i| Point::with_coords(format!("{prefix}{i}"), vec![rng.random_range(-2.0..2.0)]))
        .collect()
}

pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, support: Vec<Point>, positive: bool) -> DiscreteDist {
    let p = random_probs(rng, support.len(), positive);
    DiscreteDist::new(support, p).expect("generated masses are normalized")
}

/// A pair of distributions on the same random one-dimensional support.
pub fn random_pair_1d<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> (DiscreteDist, DiscreteDist) {
    let k = rng.random_range(1..=max_k);
    let support = random_points(rng, "x", k);
    (random_dist(rng, support.clone(), false), random_dist(rng, support, false))
}

/// A pair of distributions on different random one-dimensional supports.
pub fn random_pair_1d_disjoint<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> (DiscreteDist, DiscreteDist) {
    let (kp, kq) = (rng.random_range(1..=max_k), rng.random_range(1..=max_k));
    let sp = random_points(rng, "p", kp);
    let sq = random_points(rng, "q", kq);
    (random_dist(rng, sp, false), random_dist(rng, sq, false))
}

/// Values of a random 1-Lipschitz function at the coordinates of `points`.
pub fn random_lipschitz_witness<R: Rng + ?Sized>(rng: &mut R, points: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    let mut g = vec![0.0; points.len()];
    let mut prev: Option<usize> = None;
    for &i in &order {
        g[i] = match prev {
            None => rng.random_range(-3.0..3.0),
            Some(j) => g[j] + rng.random_range(-1.0..=1.0) * (points[i] - points[j]),
        };
        prev = Some(i);
    }
    g
}

/// Shape of a random learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub max_w: usize,
    pub max_z: usize,
    pub max_n: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_w: 5, max_z: 5, max_n: 3 }
    }
}

fn alphabets<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> (usize, Vec<Point>, Vec<Point>) {
    let n = rng.random_range(1..=shape.max_n);
    let kz = rng.random_range(2..=shape.max_z.max(2));
    let kw = rng.random_range(2..=shape.max_w.max(2));
    (n, random_points(rng, "z", kz), random_points(rng, "w", kw))
}

/// Learner with a random (generally not i.i.d.) `P_S` and random kernel.
pub fn random_learner<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> Result<LearnerSpec> {
    let (n, zs, ws) = alphabets(rng, shape);
    let tuples = zs.len().pow(n as u32);
    let p_s = random_probs(rng, tuples, false);
    let rows = (0..tuples).map(|_| random_probs(rng, ws.len(), false)).collect();
    LearnerSpec::new(n, zs, ws, p_s, rows)
}

/// Learner on i.i.d. samples. With `positive`, the sample law and every
/// kernel row are strictly positive, so every Lautum information is finite.
pub fn random_iid_learner<R: Rng + ?Sized>(rng: &mut R, shape: Shape, positive: bool) -> Result<LearnerSpec> {
    let (n, zs, ws) = alphabets(rng, shape);
    let pz = random_dist(rng, zs, positive);
    let kw = ws.len();
    LearnerSpec::iid(n, &pz, ws, |_| random_probs(rng, kw, positive))
}

/// i.i.d. learner whose kernel depends only on the multiset of samples, so
/// every sample plays the same role.
pub fn random_exchangeable_learner<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> Result<LearnerSpec> {
    let (n, zs, ws) = alphabets(rng, shape);
    let pz = random_dist(rng, zs, true);
    let kw = ws.len();
    let mut table: std::collections::BTreeMap<Vec<usize>, Vec<f64>> = Default::default();
    LearnerSpec::iid(n, &pz, ws, |digits| {
        let mut key = digits.to_vec();
        key.sort_unstable();
        table.entry(key).or_insert_with(|| random_probs(rng, kw, true)).clone()
    })
}

/// Random loss table with values in `[a, b]`.
pub fn random_loss<R: Rng + ?Sized>(rng: &mut R, learner: &LearnerSpec, a: f64, b: f64) -> Result<LossTable> {
    let (rows, cols) = (learner.w_support().len(), learner.z_support().len());
    let values = (0..rows).map(|_| (0..cols).map(|_| rng.random_range(a..=b)).collect()).collect();
    LossTable::new(a, b, values)
}

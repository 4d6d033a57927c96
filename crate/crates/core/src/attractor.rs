//! Attractor approximation: deterministic word clouds and the chaos game.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance, Point};
use crate::ifs::{eval_map, IfSystem};
use crate::scalar::Real;
use crate::words::{check_cell_budget, word_at};

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Deterministic { depth: usize },
    ChaosGame { samples: usize, burn_in: usize, rng_seed: u64 },
}

/// A finite point set approximating the attractor K.
#[derive(Debug, Clone)]
pub struct PointCloud<R: Real> {
    pub points: Vec<Point<R>>,
    pub provenance: Provenance,
}

impl<R: Real> PointCloud<R> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The n^N points gamma_w(seed) over all words w of length N.
pub fn attractor_deterministic<R: Real>(
    sys: &IfSystem<R>,
    depth: usize,
    seed_point: &Point<R>,
) -> Result<PointCloud<R>> {
    let n = sys.n_branches();
    let count = check_cell_budget(n, depth)?;
    let points = (0..count)
        .into_par_iter()
        .map(|idx| sys.apply_word(&word_at(n, depth, idx), seed_point))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointCloud { points, provenance: Provenance::Deterministic { depth } })
}

/// Random orbit x_{k+1} = gamma_{I_k}(x_k) with I_k drawn from the branch
/// weights; the first `burn_in` points are discarded. Reproducible for a
/// fixed seed; the sample budget is sharded across threads with
/// independently seeded generators.
pub fn attractor_chaos_game<R: Real>(
    sys: &IfSystem<R>,
    samples: usize,
    burn_in: usize,
    rng_seed: u64,
) -> Result<PointCloud<R>> {
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    let shards = if samples >= 4096 { rayon::current_num_threads().max(1) } else { 1 };
    let per_shard = samples.div_ceil(shards);
    let cum: Vec<f64> = sys
        .weights
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += crate::scalar::as_f64(p);
            Some(*acc)
        })
        .collect();
    let mut points: Vec<Point<R>> = (0..shards)
        .into_par_iter()
        .map(|shard| -> Result<Vec<Point<R>>> {
            let take = per_shard.min(samples - (shard * per_shard).min(samples));
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed.wrapping_add(shard as u64));
            let mut x = sys.seed_point()?;
            let mut out = Vec::with_capacity(take);
            for k in 0..burn_in + take {
                let u: f64 = rng.gen();
                let i = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
                x = eval_map(&sys.maps[i], &x)?;
                // keep symbolic orbits bounded: only a prefix matters metrically
                if let Point::Word(w) = &mut x {
                    w.truncate(64);
                }
                if k >= burn_in {
                    out.push(x.clone());
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    points.truncate(samples);
    Ok(PointCloud { points, provenance: Provenance::ChaosGame { samples, burn_in, rng_seed } })
}

/// Symmetric Hausdorff distance between two non-empty clouds.
pub fn hausdorff_distance<R: Real>(a: &PointCloud<R>, b: &PointCloud<R>) -> Result<R> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("Hausdorff distance needs non-empty clouds".into()));
    }
    // 1-D Euclidean clouds admit a sorted sweep; everything else is brute force.
    if let (Some(xs), Some(ys)) = (coords_1d(a), coords_1d(b)) {
        return Ok(hausdorff_1d(&xs, &ys).max(hausdorff_1d(&ys, &xs)));
    }
    let directed = |from: &PointCloud<R>, to: &PointCloud<R>| -> Result<R> {
        from.points
            .par_iter()
            .map(|p| {
                let mut best = R::infinity();
                for q in &to.points {
                    best = best.min(distance(p, q)?);
                }
                Ok(best)
            })
            .try_reduce(|| R::zero(), |a, b| Ok(a.max(b)))
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

fn coords_1d<R: Real>(cloud: &PointCloud<R>) -> Option<Vec<R>> {
    let mut xs = Vec::with_capacity(cloud.len());
    for p in &cloud.points {
        match p {
            Point::Euclidean(v) if v.len() == 1 => xs.push(v[0]),
            _ => return None,
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(xs)
}

/// Directed sup-min distance for sorted 1-D point sets.
fn hausdorff_1d<R: Real>(from: &[R], to: &[R]) -> R {
    let mut worst = R::zero();
    for &x in from {
        let i = to.partition_point(|&y| y < x);
        let mut best = R::infinity();
        if i < to.len() {
            best = best.min(to[i] - x);
        }
        if i > 0 {
            best = best.min(x - to[i - 1]);
        }
        worst = worst.max(best);
    }
    worst
}

/// Hausdorff distance between the depth-N cloud and the union of its
/// branch images; small when the cloud is close to self-similar.
pub fn self_similarity_defect<R: Real>(sys: &IfSystem<R>, depth: usize) -> Result<R> {
    if depth < 1 {
        return Err(Error::Input("self-similarity defect needs depth >= 1".into()));
    }
    let seed = sys.seed_point()?;
    let cloud = attractor_deterministic(sys, depth, &seed)?;
    let mut image_points = Vec::with_capacity(cloud.len() * sys.n_branches());
    for map in &sys.maps {
        for p in &cloud.points {
            image_points.push(eval_map(map, p)?);
        }
    }
    let images = PointCloud { points: image_points, provenance: cloud.provenance.clone() };
    hausdorff_distance(&cloud, &images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::builtin;
    use crate::scalar::as_f64;

    fn cloud(points: &[f64]) -> PointCloud<f64> {
        PointCloud {
            points: points.iter().map(|&x| Point::euclid(&[x])).collect(),
            provenance: Provenance::Deterministic { depth: 0 },
        }
    }

    #[test]
    fn deterministic_cantor_depth2() {
        let sys = builtin::<f64>("cantor").unwrap();
        let c = attractor_deterministic(&sys, 2, &Point::euclid(&[0.0])).unwrap();
        let mut xs: Vec<f64> = c.points.iter().map(|p| p.as_coords().unwrap()[0]).collect();
        xs.sort_by(f64::total_cmp);
        let expected = [0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0];
        for (x, e) in xs.iter().zip(expected) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_depth0_is_seed() {
        let sys = builtin::<f64>("tent").unwrap();
        let c = attractor_deterministic(&sys, 0, &Point::euclid(&[0.25])).unwrap();
        assert_eq!(c.points, vec![Point::euclid(&[0.25])]);
    }

    #[test]
    fn deterministic_tent_depth1() {
        let sys = builtin::<f64>("tent").unwrap();
        let c = attractor_deterministic(&sys, 1, &Point::euclid(&[0.0])).unwrap();
        let xs: Vec<f64> = c.points.iter().map(|p| p.as_coords().unwrap()[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0]);
    }

    #[test]
    fn chaos_game_tent_mean_is_half() {
        let sys = builtin::<f64>("tent").unwrap();
        let c = attractor_chaos_game(&sys, 100_000, 100, 42).unwrap();
        let mean: f64 = c.points.iter().map(|p| p.as_coords().unwrap()[0]).sum::<f64>()
            / c.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn chaos_game_single_sample() {
        let sys = builtin::<f64>("tent").unwrap();
        let c = attractor_chaos_game(&sys, 1, 0, 5).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn chaos_game_reproducible() {
        let sys = builtin::<f64>("cantor").unwrap();
        let a = attractor_chaos_game(&sys, 10_000, 60, 9).unwrap();
        let b = attractor_chaos_game(&sys, 10_000, 60, 9).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn chaos_game_cantor_gap() {
        let sys = builtin::<f64>("cantor").unwrap();
        let c = attractor_chaos_game(&sys, 100_000, 60, 1).unwrap();
        let eps = 1e-9;
        for p in &c.points {
            let x = p.as_coords().unwrap()[0];
            assert!(
                !(x > 1.0 / 3.0 + eps && x < 2.0 / 3.0 - eps),
                "orbit point {x} landed in the gap"
            );
        }
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&cloud(&[0.0, 1.0]), &cloud(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&cloud(&[0.0]), &cloud(&[1.0])).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&cloud(&[0.0, 1.0]), &cloud(&[0.0])).unwrap(), 1.0);
        assert!(hausdorff_distance(&cloud(&[]), &cloud(&[0.0])).is_err());
    }

    #[test]
    fn hausdorff_brute_force_agrees_with_sweep() {
        // 2-D copies of 1-D clouds exercise the brute-force path
        let a = cloud(&[0.1, 0.4, 0.9]);
        let b = cloud(&[0.0, 0.5, 0.8]);
        let lift = |c: &PointCloud<f64>| PointCloud::<f64> {
            points: c
                .points
                .iter()
                .map(|p| Point::euclid(&[p.as_coords().unwrap()[0], 0.0]))
                .collect(),
            provenance: c.provenance.clone(),
        };
        let d1: f64 = hausdorff_distance(&a, &b).unwrap();
        let d2 = hausdorff_distance(&lift(&a), &lift(&b)).unwrap();
        assert!((d1 - d2).abs() < 1e-15);
    }

    #[test]
    fn self_similarity_defect_tent() {
        let sys = builtin::<f64>("tent").unwrap();
        let d = self_similarity_defect(&sys, 10).unwrap();
        assert!(as_f64(d) <= 2.0 * 2f64.powi(-10), "defect {d}");
    }

    #[test]
    fn self_similarity_defect_shift_resolution() {
        // image words extend one symbol past the cloud words, so the
        // defect sits exactly at the depth resolution 2^-(depth+1)
        let sys = builtin::<f64>("shift:2").unwrap();
        for depth in 1..=6 {
            let d = self_similarity_defect(&sys, depth).unwrap();
            assert!((d - 2f64.powi(-(depth as i32 + 1))).abs() < 1e-15, "depth {depth}: {d}");
        }
    }

    #[test]
    fn self_similarity_defect_decreases() {
        let sys = builtin::<f64>("cantor").unwrap();
        let d1 = self_similarity_defect(&sys, 1).unwrap();
        let d8 = self_similarity_defect(&sys, 8).unwrap();
        assert!(d8 < d1);
    }
}

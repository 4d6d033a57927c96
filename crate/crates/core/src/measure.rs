//! Atomic approximations of self-similar measures.
//!
//! The canonical approximant at depth N places weight p_w = p_{w_1}...p_{w_N}
//! at gamma_w(seed) for every length-N word w. Pushing it through the
//! branch mixture reproduces the depth-(N+1) approximant exactly, which is
//! what makes the invariance defect contract geometrically.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{distance, Point};
use crate::ifs::{eval_map, ContractionMap, IfSystem};
use crate::scalar::{r, Real, C};
use crate::words::{check_cell_budget, word_at};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Deterministic,
    Empirical,
}

/// A finite weighted point set, normalized to total mass 1.
#[derive(Debug, Clone)]
pub struct AtomicMeasure<R: Real> {
    pub atoms: Vec<(Point<R>, R)>,
    pub depth: usize,
    pub kind: MeasureKind,
}

impl<R: Real> AtomicMeasure<R> {
    pub fn total_mass(&self) -> R {
        self.atoms.iter().map(|&(_, w)| w).fold(R::zero(), |a, b| a + b)
    }

    /// Merge atoms closer than 1e-14 (coincident images of overlapping
    /// branches), keeping the measure canonical.
    pub fn dedup(mut self) -> Self {
        let eps = r::<R>(1e-14);
        self.atoms.sort_by(|a, b| cmp_points(&a.0, &b.0));
        let mut out: Vec<(Point<R>, R)> = Vec::with_capacity(self.atoms.len());
        for (p, w) in self.atoms {
            match out.last_mut() {
                Some((q, wq)) if distance(q, &p).map(|d| d <= eps).unwrap_or(false) => {
                    *wq = *wq + w;
                }
                _ => out.push((p, w)),
            }
        }
        self.atoms = out;
        self
    }
}

fn cmp_points<R: Real>(a: &Point<R>, b: &Point<R>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (Point::Euclidean(x), Point::Euclidean(y)) => x
            .iter()
            .zip(y)
            .map(|(a, b)| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal),
        (Point::Word(w), Point::Word(v)) => w.cmp(v),
        (Point::Euclidean(_), Point::Word(_)) => Ordering::Less,
        (Point::Word(_), Point::Euclidean(_)) => Ordering::Greater,
    }
}

/// Depth-N approximant of the self-similar measure with the system's
/// weights; with uniform weights this approximates the Hutchinson measure.
pub fn self_similar_measure<R: Real>(sys: &IfSystem<R>, depth: usize) -> Result<AtomicMeasure<R>> {
    let n = sys.n_branches();
    let count = check_cell_budget(n, depth)?;
    let seed = sys.seed_point()?;
    let mut atoms = Vec::with_capacity(count);
    for idx in 0..count {
        let word = word_at(n, depth, idx);
        let weight = word
            .iter()
            .map(|&s| sys.weights[s as usize - 1])
            .fold(R::one(), |a, b| a * b);
        atoms.push((sys.apply_word(&word, &seed)?, weight));
    }
    Ok(AtomicMeasure { atoms, depth, kind: MeasureKind::Deterministic }.dedup())
}

/// Empirical measure of a chaos-game orbit (uniform weights on samples).
pub fn empirical_measure<R: Real>(
    sys: &IfSystem<R>,
    samples: usize,
    burn_in: usize,
    rng_seed: u64,
) -> Result<AtomicMeasure<R>> {
    let cloud = crate::attractor::attractor_chaos_game(sys, samples, burn_in, rng_seed)?;
    let w = R::one() / r(cloud.len() as f64);
    Ok(AtomicMeasure {
        atoms: cloud.points.into_iter().map(|p| (p, w)).collect(),
        depth: samples,
        kind: MeasureKind::Empirical,
    }
    .dedup())
}

/// Image measure: atoms mapped through gamma, weights unchanged.
pub fn pushforward<R: Real>(
    mu: &AtomicMeasure<R>,
    map: &ContractionMap<R>,
) -> Result<AtomicMeasure<R>> {
    let atoms = mu
        .atoms
        .iter()
        .map(|(p, w)| Ok((eval_map(map, p)?, *w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomicMeasure { atoms, depth: mu.depth, kind: mu.kind })
}

/// Weak distance between mu and sum_i p_i (gamma_i)_* mu.
pub fn invariance_defect<R: Real>(sys: &IfSystem<R>, mu: &AtomicMeasure<R>) -> Result<R> {
    let mut mixed = Vec::with_capacity(mu.atoms.len() * sys.n_branches());
    for (map, &p) in sys.maps.iter().zip(&sys.weights) {
        for (q, w) in &pushforward(mu, map)?.atoms {
            mixed.push((q.clone(), p * *w));
        }
    }
    let nu = AtomicMeasure { atoms: mixed, depth: mu.depth + 1, kind: mu.kind }.dedup();
    weak_distance(mu, &nu)
}

/// Weak (transport) distance between two atomic measures.
///
/// In one dimension this is the exact Wasserstein-1 distance via the
/// sorted CDF coupling. Otherwise it is the maximum discrepancy of the
/// integrals over a fixed family of 1-Lipschitz test functions: the
/// coordinate maps plus distances to a deterministic net of centers
/// (a 3-per-axis grid of the bounding box, or, for sequence spaces, all
/// words of length two).
pub fn weak_distance<R: Real>(mu: &AtomicMeasure<R>, nu: &AtomicMeasure<R>) -> Result<R> {
    match (mu.atoms.first(), nu.atoms.first()) {
        (Some((Point::Euclidean(x), _)), Some((Point::Euclidean(y), _))) => {
            if x.len() != y.len() {
                return Err(Error::Dimension { expected: x.len(), got: y.len() });
            }
            if x.len() == 1 {
                return Ok(wasserstein_1d(mu, nu));
            }
            let dim = x.len();
            let bounds = bounding_box(mu, nu, dim);
            let mut worst = R::zero();
            for axis in 0..dim {
                let f = |p: &Point<R>| p.as_coords().unwrap()[axis];
                worst = worst.max(test_gap(mu, nu, f));
            }
            let centers = grid_centers(&bounds);
            for c in centers {
                let cp = Point::Euclidean(c);
                let f = |p: &Point<R>| distance(p, &cp).unwrap();
                worst = worst.max(test_gap(mu, nu, f));
            }
            Ok(worst)
        }
        (Some((Point::Word(_), _)), Some((Point::Word(_), _))) => {
            let symbols = max_symbol(mu).max(max_symbol(nu)) as usize;
            let mut worst = R::zero();
            for a in 1..=symbols as u8 {
                for b in 1..=symbols as u8 {
                    let cp = Point::Word(vec![a, b]);
                    let f = |p: &Point<R>| distance(p, &cp).unwrap();
                    worst = worst.max(test_gap(mu, nu, f));
                }
            }
            Ok(worst)
        }
        (None, _) | (_, None) => Err(Error::Input("weak distance needs non-empty measures".into())),
        _ => Err(Error::Input("measures live on different ambient spaces".into())),
    }
}

fn max_symbol<R: Real>(mu: &AtomicMeasure<R>) -> u8 {
    mu.atoms
        .iter()
        .filter_map(|(p, _)| p.as_word().ok())
        .flat_map(|w| w.iter().copied())
        .max()
        .unwrap_or(1)
}

fn bounding_box<R: Real>(mu: &AtomicMeasure<R>, nu: &AtomicMeasure<R>, dim: usize) -> Vec<(R, R)> {
    let mut bounds = vec![(R::infinity(), R::neg_infinity()); dim];
    for (p, _) in mu.atoms.iter().chain(&nu.atoms) {
        for (k, &x) in p.as_coords().unwrap().iter().enumerate() {
            bounds[k].0 = bounds[k].0.min(x);
            bounds[k].1 = bounds[k].1.max(x);
        }
    }
    bounds
}

fn grid_centers<R: Real>(bounds: &[(R, R)]) -> Vec<Vec<R>> {
    let mut centers = vec![vec![]];
    for &(lo, hi) in bounds {
        let ticks = [lo, (lo + hi) * r(0.5), hi];
        centers = centers
            .into_iter()
            .flat_map(|c: Vec<R>| {
                ticks.map(|t| {
                    let mut cc = c.clone();
                    cc.push(t);
                    cc
                })
            })
            .collect();
    }
    centers
}

fn test_gap<R: Real>(
    mu: &AtomicMeasure<R>,
    nu: &AtomicMeasure<R>,
    f: impl Fn(&Point<R>) -> R,
) -> R {
    let im: R = mu.atoms.iter().map(|(p, w)| f(p) * *w).fold(R::zero(), |a, b| a + b);
    let inu: R = nu.atoms.iter().map(|(p, w)| f(p) * *w).fold(R::zero(), |a, b| a + b);
    (im - inu).abs()
}

/// Exact 1-D Wasserstein-1 distance: integral of |F_mu - F_nu|.
fn wasserstein_1d<R: Real>(mu: &AtomicMeasure<R>, nu: &AtomicMeasure<R>) -> R {
    let mut events: Vec<(R, R)> = Vec::with_capacity(mu.atoms.len() + nu.atoms.len());
    for (p, w) in &mu.atoms {
        events.push((p.as_coords().unwrap()[0], *w));
    }
    for (p, w) in &nu.atoms {
        events.push((p.as_coords().unwrap()[0], -*w));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut dist = R::zero();
    let mut cdf_gap = R::zero();
    let mut prev_x = events[0].0;
    for (x, dw) in events {
        dist = dist + cdf_gap.abs() * (x - prev_x);
        cdf_gap = cdf_gap + dw;
        prev_x = x;
    }
    dist
}

/// mu-mass of atoms within tol of both branch images gamma_i(K) and
/// gamma_j(K), at the resolution of the given depth.
pub fn overlap_mass<R: Real>(
    sys: &IfSystem<R>,
    depth: usize,
    pair: (usize, usize),
    tol: R,
) -> Result<R> {
    let (i, j) = pair;
    if i == j {
        return Err(Error::Input("overlap mass needs two distinct branches".into()));
    }
    let n = sys.n_branches();
    if i < 1 || j < 1 || i > n || j > n {
        return Err(Error::Input(format!("branch pair ({i}, {j}) out of range 1..={n}")));
    }
    let mu = self_similar_measure(sys, depth)?;
    // the depth-N atoms with leading branch s form the resolution-N picture
    // of gamma_s(K)
    let seed = sys.seed_point()?;
    let count = crate::words::word_count(n, depth);
    let mut branch_sets: Vec<Vec<Point<R>>> = vec![Vec::new(); 2];
    for idx in 0..count {
        let word = word_at(n, depth, idx);
        let head = word[0] as usize;
        if head == i || head == j {
            let p = sys.apply_word(&word, &seed)?;
            branch_sets[if head == i { 0 } else { 1 }].push(p);
        }
    }
    let near = |p: &Point<R>, set: &[Point<R>]| -> Result<bool> {
        for q in set {
            if distance(p, q)? <= tol {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let mut mass = R::zero();
    for (p, w) in &mu.atoms {
        if near(p, &branch_sets[0])? && near(p, &branch_sets[1])? {
            mass = mass + *w;
        }
    }
    Ok(mass)
}

/// Integral of a scalar function against an atomic measure.
pub fn integrate<R: Real>(
    mu: &AtomicMeasure<R>,
    f: impl Fn(&Point<R>) -> C<R>,
) -> C<R> {
    mu.atoms
        .iter()
        .map(|(p, w)| f(p) * Complex::new(*w, R::zero()))
        .fold(Complex::new(R::zero(), R::zero()), |a, b| a + b)
}

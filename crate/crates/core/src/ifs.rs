//! Contraction maps and iterated function systems.
//!
//! A branch is either an affine map x -> A x + b on a Euclidean box or a
//! symbol prepend w -> i.w on a sequence space. The expanding map phi is
//! never given by a formula; it is realized through branch inverses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, solve_dense, Ambient, Point};
use crate::scalar::{r, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind<R: Real> {
    Affine { matrix: Vec<Vec<R>>, offset: Vec<R> },
    Prepend { symbol: u8 },
}

/// One branch of an IFS, with two-sided Lipschitz bounds 0 < c1 <= c2 < 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionMap<R: Real> {
    pub kind: MapKind<R>,
    pub c1: R,
    pub c2: R,
}

impl<R: Real> ContractionMap<R> {
    /// Affine branch; c1 and c2 are taken from the extreme singular values of A.
    pub fn affine(matrix: Vec<Vec<R>>, offset: Vec<R>) -> Result<Self> {
        let d = offset.len();
        if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Dimension { expected: d, got: matrix.len() });
        }
        let (c1, c2) = singular_bounds(&matrix)?;
        if c1 <= R::zero() {
            return Err(Error::Input("affine branch matrix is singular".into()));
        }
        if c2 >= R::one() {
            return Err(Error::Input(format!(
                "affine branch is not a contraction (largest singular value {c2})"
            )));
        }
        Ok(ContractionMap { kind: MapKind::Affine { matrix, offset }, c1, c2 })
    }

    pub fn affine_f64(matrix: &[&[f64]], offset: &[f64]) -> Result<Self> {
        let m = matrix
            .iter()
            .map(|row| row.iter().map(|&x| r(x)).collect())
            .collect();
        Self::affine(m, offset.iter().map(|&x| r(x)).collect())
    }

    /// Symbolic prepend branch; c1 = c2 = 1/2 under the sequence metric.
    pub fn prepend(symbol: u8) -> Self {
        ContractionMap { kind: MapKind::Prepend { symbol }, c1: r(0.5), c2: r(0.5) }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MapKind::Affine { offset, .. } => offset.len(),
            MapKind::Prepend { .. } => 1,
        }
    }
}

/// gamma(x): A x + b for affine branches, i.w for symbol prepends.
pub fn eval_map<R: Real>(map: &ContractionMap<R>, x: &Point<R>) -> Result<Point<R>> {
    match (&map.kind, x) {
        (MapKind::Affine { matrix, offset }, Point::Euclidean(v)) => {
            if v.len() != offset.len() {
                return Err(Error::Dimension { expected: offset.len(), got: v.len() });
            }
            let y = matrix
                .iter()
                .zip(offset)
                .map(|(row, &b)| {
                    row.iter().zip(v).fold(b, |acc, (&a, &xi)| acc + a * xi)
                })
                .collect();
            Ok(Point::Euclidean(y))
        }
        (MapKind::Prepend { symbol }, Point::Word(w)) => {
            let mut out = Vec::with_capacity(w.len() + 1);
            out.push(*symbol);
            out.extend_from_slice(w);
            Ok(Point::Word(out))
        }
        _ => Err(Error::Input("point kind does not match map kind".into())),
    }
}

/// Inverse branch: y with gamma(y) = x. Exact for affine maps; drops the
/// head symbol for prepends.
pub fn eval_map_inverse<R: Real>(map: &ContractionMap<R>, x: &Point<R>) -> Result<Point<R>> {
    match (&map.kind, x) {
        (MapKind::Affine { matrix, offset }, Point::Euclidean(v)) => {
            if v.len() != offset.len() {
                return Err(Error::Dimension { expected: offset.len(), got: v.len() });
            }
            let rhs: Vec<R> = v.iter().zip(offset).map(|(&x, &b)| x - b).collect();
            Ok(Point::Euclidean(solve_dense(matrix, &rhs)?))
        }
        (MapKind::Prepend { symbol }, Point::Word(w)) => {
            if w.first() != Some(symbol) {
                return Err(Error::Domain(format!(
                    "word does not start with symbol {symbol}"
                )));
            }
            Ok(Point::Word(w[1..].to_vec()))
        }
        _ => Err(Error::Input("point kind does not match map kind".into())),
    }
}

/// Extreme singular values of a small dense matrix.
///
/// Diagonal matrices are handled in closed form; otherwise the largest
/// eigenvalue of A^T A is found by power iteration and the smallest by a
/// spectral shift.
fn singular_bounds<R: Real>(a: &[Vec<R>]) -> Result<(R, R)> {
    let d = a.len();
    let is_diag = a
        .iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| i == j || x == R::zero()));
    if is_diag {
        let mut lo = R::infinity();
        let mut hi = R::zero();
        for i in 0..d {
            let s = a[i][i].abs();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        return Ok((lo, hi));
    }
    // B = A^T A
    let mut b = vec![vec![R::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                b[i][j] = b[i][j] + a[k][i] * a[k][j];
            }
        }
    }
    let top = sym_top_eig(&b);
    let shifted: Vec<Vec<R>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { top - b[i][j] } else { -b[i][j] })
                .collect()
        })
        .collect();
    let bottom = top - sym_top_eig(&shifted);
    Ok((bottom.max(R::zero()).sqrt(), top.max(R::zero()).sqrt()))
}

/// Largest eigenvalue of a small symmetric PSD matrix by power iteration.
fn sym_top_eig<R: Real>(b: &[Vec<R>]) -> R {
    let d = b.len();
    let mut v = vec![R::one() / r::<R>(d as f64).sqrt(); d];
    let mut lambda = R::zero();
    for _ in 0..500 {
        let w: Vec<R> = (0..d)
            .map(|i| (0..d).fold(R::zero(), |s, j| s + b[i][j] * v[j]))
            .collect();
        let norm = w.iter().map(|&x| x * x).fold(R::zero(), |s, t| s + t).sqrt();
        if norm == R::zero() {
            return R::zero();
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= r::<R>(1e-15) * next.max(R::one()) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// An ordered family of proper contractions with probability weights.
#[derive(Debug, Clone)]
pub struct IfSystem<R: Real> {
    pub name: String,
    pub maps: Vec<ContractionMap<R>>,
    pub weights: Vec<R>,
    pub ambient: Ambient<R>,
}

impl<R: Real> IfSystem<R> {
    pub fn new(
        name: impl Into<String>,
        maps: Vec<ContractionMap<R>>,
        weights: Vec<R>,
        ambient: Ambient<R>,
    ) -> Result<Self> {
        let n = maps.len();
        if n < 2 {
            return Err(Error::Input("an IFS needs at least two branches".into()));
        }
        if weights.len() != n {
            return Err(Error::Dimension { expected: n, got: weights.len() });
        }
        if weights.iter().any(|&p| p <= R::zero()) {
            return Err(Error::Input("branch weights must be positive".into()));
        }
        let total: R = weights.iter().copied().fold(R::zero(), |a, b| a + b);
        if (total - R::one()).abs() > r(1e-9) {
            return Err(Error::Input(format!("branch weights must sum to 1, got {total}")));
        }
        match &ambient {
            Ambient::Euclidean { bounds } => {
                for m in &maps {
                    if !matches!(m.kind, MapKind::Affine { .. }) || m.dim() != bounds.len() {
                        return Err(Error::Input(
                            "Euclidean systems need affine branches of matching dimension".into(),
                        ));
                    }
                }
            }
            Ambient::Sequence { symbols } => {
                for m in &maps {
                    match m.kind {
                        MapKind::Prepend { symbol }
                            if symbol >= 1 && symbol as usize <= *symbols => {}
                        _ => {
                            return Err(Error::Input(
                                "sequence systems need prepend branches within the alphabet".into(),
                            ))
                        }
                    }
                }
            }
        }
        Ok(IfSystem { name: name.into(), maps, weights, ambient })
    }

    pub fn n_branches(&self) -> usize {
        self.maps.len()
    }

    pub fn uniform_weights(n: usize) -> Vec<R> {
        vec![R::one() / r(n as f64); n]
    }

    pub fn has_uniform_weights(&self) -> bool {
        let p = R::one() / r(self.n_branches() as f64);
        self.weights.iter().all(|&w| (w - p).abs() <= r(1e-12))
    }

    /// Loose Lipschitz bounds for the whole family.
    pub fn c2_max(&self) -> R {
        self.maps.iter().map(|m| m.c2).fold(R::zero(), |a, b| a.max(b))
    }

    /// Default attractor seed: the fixed point of the first branch for
    /// affine systems (which lies on K exactly), the word (1) for sequence
    /// systems (standing for the constant-1 sequence).
    pub fn seed_point(&self) -> Result<Point<R>> {
        match &self.maps[0].kind {
            MapKind::Affine { matrix, offset } => {
                let d = offset.len();
                let id_minus_a: Vec<Vec<R>> = (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let e = if i == j { R::one() } else { R::zero() };
                                e - matrix[i][j]
                            })
                            .collect()
                    })
                    .collect();
                Ok(Point::Euclidean(solve_dense(&id_minus_a, offset)?))
            }
            MapKind::Prepend { .. } => Ok(Point::Word(vec![1])),
        }
    }

    /// gamma_w = gamma_{w1} o ... o gamma_{wN} (the last symbol acts first).
    ///
    /// With this order the coding map intertwines phi with the one-sided
    /// shift: phi(gamma_w(x)) = gamma_{sigma(w)}(x) for |w| >= 2.
    pub fn apply_word(&self, word: &[u8], x: &Point<R>) -> Result<Point<R>> {
        let mut p = x.clone();
        for &s in word.iter().rev() {
            let idx = s as usize - 1;
            let map = self
                .maps
                .get(idx)
                .ok_or_else(|| Error::Input(format!("branch symbol {s} out of range")))?;
            p = eval_map(map, &p)?;
        }
        Ok(p)
    }

    /// The expanding map phi, dispatched through branch inverses.
    ///
    /// The branch whose image region contains x is selected (lowest index
    /// wins at overlaps); x farther than `tol` from every image is a
    /// domain error.
    pub fn phi_apply(&self, x: &Point<R>, tol: R) -> Result<Point<R>> {
        match &self.ambient {
            Ambient::Sequence { .. } => {
                let w = x.as_word()?;
                if w.is_empty() {
                    return Err(Error::Domain("cannot shift the empty word".into()));
                }
                Ok(Point::Word(w[1..].to_vec()))
            }
            Ambient::Euclidean { .. } => {
                // Inflate the box proportionally to the branch expansion so a
                // point within tol of gamma_i(K^) has a preimage within tol/c1.
                for map in &self.maps {
                    let y = eval_map_inverse(map, x)?;
                    if self.ambient.contains(&y, tol / map.c1) {
                        return Ok(y);
                    }
                }
                Err(Error::Domain(
                    "point lies outside every branch image of the ambient box".into(),
                ))
            }
        }
    }
}

/// Sampled two-sided Lipschitz bounds min/max d(gamma x, gamma y)/d(x, y).
pub fn contraction_bounds_estimate<R: Real>(
    map: &ContractionMap<R>,
    ambient: &Ambient<R>,
    samples: usize,
    rng_seed: u64,
) -> Result<(R, R)> {
    if samples < 2 {
        return Err(Error::Input("need at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut lo = R::infinity();
    let mut hi = R::zero();
    let mut kept = 0usize;
    while kept < samples {
        let x = sample_point(ambient, &mut rng);
        let y = sample_point(ambient, &mut rng);
        let base = distance(&x, &y)?;
        if base == R::zero() {
            continue; // degenerate pair, resample
        }
        let ratio = distance(&eval_map(map, &x)?, &eval_map(map, &y)?)? / base;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        kept += 1;
    }
    Ok((lo, hi))
}

pub(crate) fn sample_point<R: Real>(ambient: &Ambient<R>, rng: &mut ChaCha8Rng) -> Point<R> {
    match ambient {
        Ambient::Euclidean { bounds } => Point::Euclidean(
            bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * r(rng.gen::<f64>()))
                .collect(),
        ),
        Ambient::Sequence { symbols } => Point::Word(
            (0..24).map(|_| rng.gen_range(1..=*symbols as u8)).collect(),
        ),
    }
}

// ---------------------------------------------------------------------------
// Built-in systems and JSON loading
// ---------------------------------------------------------------------------

/// Resolve a built-in system name: "tent", "cantor" / "cantor:r",
/// "shift:n", "sierpinski".
pub fn builtin<R: Real>(name: &str) -> Result<IfSystem<R>> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match head {
        "tent" => {
            let maps = vec![
                ContractionMap::affine_f64(&[&[0.5]], &[0.0])?,
                ContractionMap::affine_f64(&[&[-0.5]], &[1.0])?,
            ];
            IfSystem::new("tent", maps, IfSystem::uniform_weights(2), Ambient::interval(0.0, 1.0))
        }
        "cantor" => {
            let ratio: f64 = match arg {
                Some(a) => a
                    .parse()
                    .map_err(|_| Error::Input(format!("bad cantor ratio {a:?}")))?,
                None => 1.0 / 3.0,
            };
            if !(0.0..0.5).contains(&ratio) || ratio <= 0.0 {
                return Err(Error::Input("cantor ratio must lie in (0, 1/2)".into()));
            }
            let maps = vec![
                ContractionMap::affine_f64(&[&[ratio]], &[0.0])?,
                ContractionMap::affine_f64(&[&[ratio]], &[1.0 - ratio])?,
            ];
            IfSystem::new(name, maps, IfSystem::uniform_weights(2), Ambient::interval(0.0, 1.0))
        }
        "shift" => {
            let n: usize = arg
                .ok_or_else(|| Error::Input("shift needs an alphabet size, e.g. shift:2".into()))?
                .parse()
                .map_err(|_| Error::Input("bad shift alphabet size".into()))?;
            if !(2..=255).contains(&n) {
                return Err(Error::Input("shift alphabet size must be in 2..=255".into()));
            }
            let maps = (1..=n as u8).map(ContractionMap::prepend).collect();
            IfSystem::new(name, maps, IfSystem::uniform_weights(n), Ambient::Sequence { symbols: n })
        }
        "sierpinski" => {
            let h = 3f64.sqrt() / 2.0;
            let half = &[&[0.5, 0.0][..], &[0.0, 0.5][..]];
            let maps = vec![
                ContractionMap::affine_f64(half, &[0.0, 0.0])?,
                ContractionMap::affine_f64(half, &[0.5, 0.0])?,
                ContractionMap::affine_f64(half, &[0.25, h / 2.0])?,
            ];
            let ambient = Ambient::Euclidean { bounds: vec![(r(0.0), r(1.0)), (r(0.0), r(h))] };
            IfSystem::new("sierpinski", maps, IfSystem::uniform_weights(3), ambient)
        }
        _ => Err(Error::Input(format!("unknown built-in system {name:?}"))),
    }
}

#[derive(Deserialize)]
struct SystemDoc {
    metric: String,
    #[serde(default)]
    dimension: Option<usize>,
    #[serde(default)]
    symbols: Option<usize>,
    maps: Vec<MapDoc>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default, rename = "box")]
    bounding_box: Option<Vec<(f64, f64)>>,
}

#[derive(Deserialize)]
struct MapDoc {
    #[serde(default, rename = "A")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "b")]
    offset: Option<Vec<f64>>,
    #[serde(default)]
    symbol: Option<u8>,
}

/// Load a system from its JSON document form.
pub fn from_json<R: Real>(text: &str) -> Result<IfSystem<R>> {
    let doc: SystemDoc = serde_json::from_str(text)?;
    let n = doc.maps.len();
    let weights: Vec<R> = match doc.weights {
        Some(w) => w.into_iter().map(r).collect(),
        None => IfSystem::uniform_weights(n),
    };
    match doc.metric.as_str() {
        "euclidean" => {
            let dim = doc
                .dimension
                .ok_or_else(|| Error::Input("euclidean system needs \"dimension\"".into()))?;
            let maps = doc
                .maps
                .into_iter()
                .map(|m| {
                    let a = m
                        .matrix
                        .ok_or_else(|| Error::Input("affine map needs \"A\"".into()))?;
                    let b = m
                        .offset
                        .ok_or_else(|| Error::Input("affine map needs \"b\"".into()))?;
                    ContractionMap::affine(
                        a.into_iter().map(|row| row.into_iter().map(r).collect()).collect(),
                        b.into_iter().map(r).collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let bounds = match doc.bounding_box {
                Some(bb) => bb.into_iter().map(|(lo, hi)| (r(lo), r(hi))).collect(),
                None => vec![(r(0.0), r(1.0)); dim],
            };
            IfSystem::new("custom", maps, weights, Ambient::Euclidean { bounds })
        }
        "sequence" => {
            let symbols = doc
                .symbols
                .ok_or_else(|| Error::Input("sequence system needs \"symbols\"".into()))?;
            let maps = doc
                .maps
                .into_iter()
                .map(|m| {
                    m.symbol
                        .map(ContractionMap::prepend)
                        .ok_or_else(|| Error::Input("sequence map needs \"symbol\"".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            IfSystem::new("custom", maps, weights, Ambient::Sequence { symbols })
        }
        other => Err(Error::Input(format!("unknown metric {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> IfSystem<f64> {
        builtin("tent").unwrap()
    }

    #[test]
    fn eval_affine_halving() {
        let m = ContractionMap::<f64>::affine_f64(&[&[0.5]], &[0.0]).unwrap();
        let y = eval_map(&m, &Point::euclid(&[1.0])).unwrap();
        assert_eq!(y, Point::euclid(&[0.5]));
    }

    #[test]
    fn eval_affine_tent_second_branch() {
        let m = ContractionMap::<f64>::affine_f64(&[&[-0.5]], &[1.0]).unwrap();
        let y = eval_map(&m, &Point::euclid(&[1.0])).unwrap();
        assert_eq!(y, Point::euclid(&[0.5]));
    }

    #[test]
    fn eval_prepend() {
        let m = ContractionMap::<f64>::prepend(2);
        let y = eval_map(&m, &Point::word(&[1, 1, 1])).unwrap();
        assert_eq!(y, Point::word(&[2, 1, 1, 1]));
    }

    #[test]
    fn eval_dimension_mismatch() {
        let m = ContractionMap::<f64>::affine_f64(&[&[0.5]], &[0.0]).unwrap();
        assert!(eval_map(&m, &Point::euclid(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn bounds_estimate_halving() {
        let m = ContractionMap::<f64>::affine_f64(&[&[0.5]], &[0.0]).unwrap();
        let (lo, hi) =
            contraction_bounds_estimate(&m, &Ambient::interval(0.0, 1.0), 200, 7).unwrap();
        assert!((lo - 0.5).abs() < 1e-12);
        assert!((hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bounds_estimate_cantor_branch() {
        let m = ContractionMap::<f64>::affine_f64(&[&[1.0 / 3.0]], &[2.0 / 3.0]).unwrap();
        let (lo, hi) =
            contraction_bounds_estimate(&m, &Ambient::interval(0.0, 1.0), 500, 3).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-12);
        assert!((hi - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_estimate_prepend() {
        let m = ContractionMap::<f64>::prepend(1);
        let (lo, hi) =
            contraction_bounds_estimate(&m, &Ambient::Sequence { symbols: 2 }, 500, 11).unwrap();
        assert!((lo - 0.5).abs() < 1e-12);
        assert!((hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn declared_bounds_match_singular_values() {
        let sys = tent();
        for m in &sys.maps {
            assert!((m.c1 - 0.5).abs() < 1e-14);
            assert!((m.c2 - 0.5).abs() < 1e-14);
        }
        let rot =
            ContractionMap::<f64>::affine_f64(&[&[0.3, -0.4], &[0.4, 0.3]], &[0.1, 0.1]).unwrap();
        assert!((rot.c1 - 0.5).abs() < 1e-10);
        assert!((rot.c2 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn non_contraction_rejected() {
        assert!(ContractionMap::<f64>::affine_f64(&[&[1.5]], &[0.0]).is_err());
        assert!(ContractionMap::<f64>::affine_f64(&[&[0.0]], &[0.0]).is_err());
    }

    #[test]
    fn seed_is_first_branch_fixed_point() {
        assert_eq!(tent().seed_point().unwrap(), Point::euclid(&[0.0]));
        let c = builtin::<f64>("cantor").unwrap();
        assert_eq!(c.seed_point().unwrap(), Point::euclid(&[0.0]));
        let s = builtin::<f64>("shift:2").unwrap();
        assert_eq!(s.seed_point().unwrap(), Point::word(&[1]));
    }

    #[test]
    fn phi_tent_branch_selection() {
        let sys = tent();
        let y = sys.phi_apply(&Point::euclid(&[0.25]), 1e-9).unwrap();
        assert_eq!(y, Point::euclid(&[0.5]));
        let y = sys.phi_apply(&Point::euclid(&[0.75]), 1e-9).unwrap();
        assert_eq!(y, Point::euclid(&[0.5]));
        // overlap point: lowest branch index wins
        let y = sys.phi_apply(&Point::euclid(&[0.5]), 1e-9).unwrap();
        assert_eq!(y, Point::euclid(&[1.0]));
    }

    #[test]
    fn phi_shift_drops_head() {
        let sys = builtin::<f64>("shift:3").unwrap();
        let y = sys.phi_apply(&Point::word(&[3, 1, 2]), 1e-9).unwrap();
        assert_eq!(y, Point::word(&[1, 2]));
    }

    #[test]
    fn phi_outside_images_is_domain_error() {
        let sys = builtin::<f64>("cantor").unwrap();
        assert!(sys.phi_apply(&Point::euclid(&[0.5]), 1e-9).is_err());
    }

    #[test]
    fn word_composition_order() {
        let sys = tent();
        // gamma_{12}(0) = gamma_1(gamma_2(0)) = gamma_1(1) = 1/2
        let p = sys.apply_word(&[1, 2], &Point::euclid(&[0.0])).unwrap();
        assert_eq!(p, Point::euclid(&[0.5]));
        // intertwining: phi(gamma_w(x)) = gamma_{sigma(w)}(x)
        let x = Point::euclid(&[0.3]);
        let lhs = sys.phi_apply(&sys.apply_word(&[2, 1, 2], &x).unwrap(), 1e-9).unwrap();
        let rhs = sys.apply_word(&[1, 2], &x).unwrap();
        assert!(distance(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{
            "metric": "euclidean", "dimension": 1,
            "maps": [{"A": [[0.5]], "b": [0.0]}, {"A": [[-0.5]], "b": [1.0]}],
            "weights": [0.5, 0.5]
        }"#;
        let sys = from_json::<f64>(text).unwrap();
        assert_eq!(sys.n_branches(), 2);
        assert!((sys.c2_max() - 0.5).abs() < 1e-14);

        let text = r#"{"metric": "sequence", "symbols": 2,
                       "maps": [{"symbol": 1}, {"symbol": 2}]}"#;
        let sys = from_json::<f64>(text).unwrap();
        assert!(!sys.ambient.is_euclidean());
    }

    #[test]
    fn bad_weights_rejected() {
        let maps = vec![
            ContractionMap::affine_f64(&[&[0.5]], &[0.0]).unwrap(),
            ContractionMap::affine_f64(&[&[0.5]], &[0.5]).unwrap(),
        ];
        assert!(IfSystem::new("x", maps, vec![0.7, 0.7], Ambient::interval(0.0, 1.0)).is_err());
    }
}

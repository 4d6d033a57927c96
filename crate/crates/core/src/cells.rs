//! Depth-N word-cell discretization of L^2(K, mu^H).
//!
//! Cells are the n^N words of length N in lexicographic order; the cell for
//! w carries the representative gamma_w(seed) and mass 1/n^N. On this space
//! every operator identity of interest becomes a finite matrix identity.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::ifs::IfSystem;
use crate::scalar::{r, Real, C};
use crate::words::{check_cell_budget, word_at};

#[derive(Debug, Clone)]
pub struct CellSpace<R: Real> {
    pub system: Arc<IfSystem<R>>,
    pub depth: usize,
    /// gamma_w(seed) for each cell, in lexicographic word order.
    pub representatives: Vec<Point<R>>,
}

impl<R: Real> CellSpace<R> {
    pub fn cell_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn cell_mass(&self) -> R {
        R::one() / r(self.cell_count() as f64)
    }

    pub fn word(&self, idx: usize) -> Vec<u8> {
        word_at(self.system.n_branches(), self.depth, idx)
    }

    pub fn same_space(&self, other: &CellSpace<R>) -> bool {
        Arc::ptr_eq(&self.system, &other.system) && self.depth == other.depth
    }

    pub fn same_system(&self, other: &CellSpace<R>) -> bool {
        Arc::ptr_eq(&self.system, &other.system)
    }
}

/// Build the depth-N cell space. Requires uniform branch weights: the cell
/// masses realize the Hutchinson measure mu^H with p_i = 1/n.
pub fn cell_space<R: Real>(sys: &Arc<IfSystem<R>>, depth: usize) -> Result<Arc<CellSpace<R>>> {
    if !sys.has_uniform_weights() {
        return Err(Error::Input(
            "cell spaces use the Hutchinson measure; branch weights must be uniform".into(),
        ));
    }
    let n = sys.n_branches();
    let count = check_cell_budget(n, depth)?;
    let seed = sys.seed_point()?;
    let representatives = (0..count)
        .map(|idx| sys.apply_word(&word_at(n, depth, idx), &seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(CellSpace { system: Arc::clone(sys), depth, representatives }))
}

/// A complex-valued function on the cells of one space.
#[derive(Debug, Clone)]
pub struct GridFunction<R: Real> {
    pub space: Arc<CellSpace<R>>,
    pub values: Vec<C<R>>,
}

impl<R: Real> GridFunction<R> {
    pub fn new(space: &Arc<CellSpace<R>>, values: Vec<C<R>>) -> Result<Self> {
        if values.len() != space.cell_count() {
            return Err(Error::Dimension { expected: space.cell_count(), got: values.len() });
        }
        Ok(GridFunction { space: Arc::clone(space), values })
    }

    pub fn constant(space: &Arc<CellSpace<R>>, value: C<R>) -> Self {
        GridFunction { space: Arc::clone(space), values: vec![value; space.cell_count()] }
    }

    pub fn one(space: &Arc<CellSpace<R>>) -> Self {
        Self::constant(space, Complex::new(R::one(), R::zero()))
    }

    /// Weighted inner product <f, g> = sum_w (1/n^N) f(w) conj(g(w)),
    /// matching the integral against the depth-N Hutchinson approximant.
    pub fn inner(&self, other: &GridFunction<R>) -> Result<C<R>> {
        if !self.space.same_space(&other.space) {
            return Err(Error::Input("inner product needs functions on the same space".into()));
        }
        let mass = self.space.cell_mass();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .fold(Complex::new(R::zero(), R::zero()), |s, t| s + t)
            * Complex::new(mass, R::zero()))
    }

    /// Weighted p-norm (sum_w (1/n^N) |f(w)|^p)^{1/p}.
    pub fn norm_p(&self, p: R) -> R {
        let mass = self.space.cell_mass();
        let total = self
            .values
            .iter()
            .map(|v| v.norm().powf(p) * mass)
            .fold(R::zero(), |a, b| a + b);
        total.powf(R::one() / p)
    }

    pub fn norm_l2(&self) -> R {
        self.inner(self).map(|z| z.re.sqrt()).unwrap_or_else(|_| R::zero())
    }

    pub fn sup_norm(&self) -> R {
        self.values.iter().map(|v| v.norm()).fold(R::zero(), |a, b| a.max(b))
    }
}

/// Point-evaluate a scalar function at the cell representatives.
pub fn discretize<R: Real>(
    f: impl Fn(&Point<R>) -> C<R>,
    space: &Arc<CellSpace<R>>,
) -> GridFunction<R> {
    GridFunction {
        space: Arc::clone(space),
        values: space.representatives.iter().map(f).collect(),
    }
}

/// Real-valued helper for the common case.
pub fn discretize_real<R: Real>(
    f: impl Fn(&Point<R>) -> R,
    space: &Arc<CellSpace<R>>,
) -> GridFunction<R> {
    discretize(|p| Complex::new(f(p), R::zero()), space)
}

/// Indicator of the cylinder of words starting with the given prefix.
pub fn cylinder_indicator<R: Real>(space: &Arc<CellSpace<R>>, prefix: &[u8]) -> GridFunction<R> {
    let n = space.system.n_branches();
    let values = (0..space.cell_count())
        .map(|idx| {
            let w = word_at(n, space.depth, idx);
            if w.starts_with(prefix) {
                Complex::new(R::one(), R::zero())
            } else {
                Complex::new(R::zero(), R::zero())
            }
        })
        .collect();
    GridFunction { space: Arc::clone(space), values }
}

//! Multiplication, composition, and transfer operators on cell spaces,
//! together with defect computations for the identities relating them.
//!
//! All norms and adjoints are taken with respect to the weighted cell inner
//! products, so a matrix between spaces of different depth is measured as an
//! operator between the corresponding L^2 approximants.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cells::{cell_space, discretize, CellSpace, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::ifs::{eval_map, IfSystem};
use crate::scalar::{r, Real, C};
use crate::words::drop_head_index;

pub const POWER_ITERATION_CAP: usize = 10_000;
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Entries<R: Real> {
    /// Diagonal endomorphism.
    Diagonal(Vec<C<R>>),
    /// One unit entry per row: row r reads column `cols[r]`.
    Selector(Vec<usize>),
    /// Row v averages the n columns i.v with weight 1/n.
    Transfer { n: usize },
    /// Row-major dense block.
    Dense { rows: usize, cols: usize, data: Vec<C<R>> },
}

/// A linear operator between two cell spaces.
#[derive(Debug, Clone)]
pub struct OperatorMatrix<R: Real> {
    pub domain: Arc<CellSpace<R>>,
    pub codomain: Arc<CellSpace<R>>,
    pub entries: Entries<R>,
}

impl<R: Real> OperatorMatrix<R> {
    pub fn rows(&self) -> usize {
        self.codomain.cell_count()
    }

    pub fn cols(&self) -> usize {
        self.domain.cell_count()
    }

    pub fn apply_vec(&self, x: &[C<R>]) -> Vec<C<R>> {
        debug_assert_eq!(x.len(), self.cols());
        match &self.entries {
            Entries::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            Entries::Selector(cols) => cols.iter().map(|&c| x[c]).collect(),
            Entries::Transfer { n } => {
                let rows = self.rows();
                let inv = Complex::new(R::one() / r(*n as f64), R::zero());
                (0..rows)
                    .map(|v| {
                        (1..=*n)
                            .map(|i| x[(i - 1) * rows + v])
                            .fold(Complex::new(R::zero(), R::zero()), |a, b| a + b)
                            * inv
                    })
                    .collect()
            }
            Entries::Dense { rows, cols, data } => (0..*rows)
                .map(|i| {
                    data[i * cols..(i + 1) * cols]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| a * b)
                        .fold(Complex::new(R::zero(), R::zero()), |s, t| s + t)
                })
                .collect(),
        }
    }

    /// Plain conjugate-transpose action (unweighted).
    pub fn apply_conj_transpose(&self, y: &[C<R>]) -> Vec<C<R>> {
        debug_assert_eq!(y.len(), self.rows());
        match &self.entries {
            Entries::Diagonal(d) => d.iter().zip(y).map(|(a, b)| a.conj() * b).collect(),
            Entries::Selector(cols) => {
                let mut out = vec![Complex::new(R::zero(), R::zero()); self.cols()];
                for (row, &c) in cols.iter().enumerate() {
                    out[c] = out[c] + y[row];
                }
                out
            }
            Entries::Transfer { n } => {
                let rows = self.rows();
                let inv = Complex::new(R::one() / r(*n as f64), R::zero());
                let mut out = vec![Complex::new(R::zero(), R::zero()); self.cols()];
                for v in 0..rows {
                    for i in 1..=*n {
                        out[(i - 1) * rows + v] = y[v] * inv;
                    }
                }
                out
            }
            Entries::Dense { rows, cols, data } => {
                let mut out = vec![Complex::new(R::zero(), R::zero()); *cols];
                for i in 0..*rows {
                    for j in 0..*cols {
                        out[j] = out[j] + data[i * cols + j].conj() * y[i];
                    }
                }
                out
            }
        }
    }

    /// Action of the weighted adjoint (adjoint with respect to the cell
    /// inner products of domain and codomain).
    pub fn apply_weighted_adjoint(&self, y: &[C<R>]) -> Vec<C<R>> {
        let scale = self.codomain.cell_mass() / self.domain.cell_mass();
        let s = Complex::new(scale, R::zero());
        self.apply_conj_transpose(y).into_iter().map(|v| v * s).collect()
    }

    pub fn apply(&self, f: &GridFunction<R>) -> Result<GridFunction<R>> {
        if !f.space.same_space(&self.domain) {
            return Err(Error::Input("function is not on the operator's domain".into()));
        }
        GridFunction::new(&self.codomain, self.apply_vec(&f.values))
    }

    /// Weighted adjoint as a concrete (dense, or structured where cheap)
    /// operator.
    pub fn weighted_adjoint(&self) -> OperatorMatrix<R> {
        let scale = Complex::new(self.codomain.cell_mass() / self.domain.cell_mass(), R::zero());
        let entries = match &self.entries {
            Entries::Diagonal(d) => Entries::Diagonal(d.iter().map(|v| v.conj() * scale).collect()),
            _ => {
                let (rows, cols) = (self.cols(), self.rows());
                let mut data = vec![Complex::new(R::zero(), R::zero()); rows * cols];
                for (j, col) in dense_columns(self).enumerate() {
                    for (i, v) in col.into_iter().enumerate() {
                        data[j * cols + i] = v.conj() * scale;
                    }
                }
                Entries::Dense { rows, cols, data }
            }
        };
        OperatorMatrix {
            domain: Arc::clone(&self.codomain),
            codomain: Arc::clone(&self.domain),
            entries,
        }
    }

    pub fn to_dense(&self) -> OperatorMatrix<R> {
        let (rows, cols) = (self.rows(), self.cols());
        let mut data = vec![Complex::new(R::zero(), R::zero()); rows * cols];
        for (j, col) in dense_columns(self).enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        OperatorMatrix {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            entries: Entries::Dense { rows, cols, data },
        }
    }

    pub fn compose(&self, inner: &OperatorMatrix<R>) -> Result<OperatorMatrix<R>> {
        if !inner.codomain.same_space(&self.domain) {
            return Err(Error::Input("operator shapes do not compose".into()));
        }
        let (rows, cols) = (self.rows(), inner.cols());
        let mut data = vec![Complex::new(R::zero(), R::zero()); rows * cols];
        for (j, col) in dense_columns(inner).enumerate() {
            let out = self.apply_vec(&col);
            for (i, v) in out.into_iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Ok(OperatorMatrix {
            domain: Arc::clone(&inner.domain),
            codomain: Arc::clone(&self.codomain),
            entries: Entries::Dense { rows, cols, data },
        })
    }

    pub fn sub(&self, other: &OperatorMatrix<R>) -> Result<OperatorMatrix<R>> {
        if !self.domain.same_space(&other.domain) || !self.codomain.same_space(&other.codomain) {
            return Err(Error::Input("operator shapes do not match".into()));
        }
        let a = self.to_dense();
        let b = other.to_dense();
        let (Entries::Dense { rows, cols, data: da }, Entries::Dense { data: db, .. }) =
            (a.entries, b.entries)
        else {
            unreachable!()
        };
        let data = da.into_iter().zip(db).map(|(x, y)| x - y).collect();
        Ok(OperatorMatrix {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            entries: Entries::Dense { rows, cols, data },
        })
    }
}

fn dense_columns<'a, R: Real>(
    op: &'a OperatorMatrix<R>,
) -> impl Iterator<Item = Vec<C<R>>> + 'a {
    let cols = op.cols();
    (0..cols).map(move |j| {
        let mut e = vec![Complex::new(R::zero(), R::zero()); cols];
        e[j] = Complex::new(R::one(), R::zero());
        op.apply_vec(&e)
    })
}

/// Diagonal multiplication operator M_a.
pub fn mult_op<R: Real>(a: &GridFunction<R>) -> OperatorMatrix<R> {
    OperatorMatrix {
        domain: Arc::clone(&a.space),
        codomain: Arc::clone(&a.space),
        entries: Entries::Diagonal(a.values.clone()),
    }
}

pub fn identity_op<R: Real>(space: &Arc<CellSpace<R>>) -> OperatorMatrix<R> {
    mult_op(&GridFunction::one(space))
}

/// Composition operator C f = f o phi from depth N-1 to depth N:
/// (C f)(w1 w2 .. wN) = f(w2 .. wN). One unit entry per row.
pub fn comp_op<R: Real>(space_out: &Arc<CellSpace<R>>) -> Result<OperatorMatrix<R>> {
    if space_out.depth < 1 {
        return Err(Error::Input("composition operator needs depth >= 1".into()));
    }
    let n = space_out.system.n_branches();
    let domain = cell_space(&space_out.system, space_out.depth - 1)?;
    let cols = (0..space_out.cell_count())
        .map(|idx| drop_head_index(n, space_out.depth, idx))
        .collect();
    Ok(OperatorMatrix {
        domain,
        codomain: Arc::clone(space_out),
        entries: Entries::Selector(cols),
    })
}

/// Transfer operator (L g)(v) = (1/n) sum_i g(i.v) from depth N to N-1.
pub fn transfer_op<R: Real>(space_in: &Arc<CellSpace<R>>) -> Result<OperatorMatrix<R>> {
    if space_in.depth < 1 {
        return Err(Error::Input("transfer operator needs depth >= 1".into()));
    }
    let n = space_in.system.n_branches();
    let codomain = cell_space(&space_in.system, space_in.depth - 1)?;
    Ok(OperatorMatrix {
        domain: Arc::clone(space_in),
        codomain,
        entries: Entries::Transfer { n },
    })
}

/// Refinement embedding from depth N-1 to depth N: the parent value is
/// copied to each child cell (children append a symbol at the end). The
/// endomorphism view of C_phi is comp_op composed with this embedding.
pub fn refinement_embedding<R: Real>(space_out: &Arc<CellSpace<R>>) -> Result<OperatorMatrix<R>> {
    if space_out.depth < 1 {
        return Err(Error::Input("refinement embedding needs depth >= 1".into()));
    }
    let n = space_out.system.n_branches();
    let domain = cell_space(&space_out.system, space_out.depth - 1)?;
    let cols = (0..space_out.cell_count()).map(|idx| idx / n).collect();
    Ok(OperatorMatrix {
        domain,
        codomain: Arc::clone(space_out),
        entries: Entries::Selector(cols),
    })
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Largest singular value of a matrix-free operator with respect to the
/// plain Euclidean norms, by power iteration on T*T.
pub fn power_singular_value<R: Real>(
    dim_in: usize,
    apply: impl Fn(&[C<R>]) -> Vec<C<R>>,
    apply_conj_transpose: impl Fn(&[C<R>]) -> Vec<C<R>>,
    tol: R,
) -> Result<R> {
    if dim_in == 0 {
        return Ok(R::zero());
    }
    let mut v: Vec<C<R>> =
        vec![Complex::new(R::one() / r::<R>(dim_in as f64).sqrt(), R::zero()); dim_in];
    let mut sigma = R::zero();
    for _ in 0..POWER_ITERATION_CAP {
        let av = apply(&v);
        let norm_av = vec_norm(&av);
        if norm_av <= r(1e-150) {
            return Ok(R::zero());
        }
        let w = apply_conj_transpose(&av);
        let norm_w = vec_norm(&w);
        if norm_w <= r(1e-150) {
            return Ok(norm_av);
        }
        let next = norm_av;
        v = w.into_iter().map(|x| x / Complex::new(norm_w, R::zero())).collect();
        if (next - sigma).abs() <= tol * next.max(R::one()) {
            return Ok(next);
        }
        sigma = next;
    }
    Err(Error::Numerical {
        msg: "power iteration did not converge".into(),
        last: crate::scalar::as_f64(sigma),
    })
}

fn vec_norm<R: Real>(v: &[C<R>]) -> R {
    v.iter().map(|x| x.norm_sqr()).fold(R::zero(), |a, b| a + b).sqrt()
}

/// Operator norm (largest singular value) with respect to the weighted cell
/// norms. Diagonal, selector, and transfer structures use closed forms;
/// dense blocks fall back to power iteration.
pub fn operator_norm<R: Real>(op: &OperatorMatrix<R>, tol: R) -> Result<R> {
    let weight_scale = (op.codomain.cell_mass() / op.domain.cell_mass()).sqrt();
    match &op.entries {
        Entries::Diagonal(d) => {
            Ok(d.iter().map(|v| v.norm()).fold(R::zero(), |a, b| a.max(b)) * weight_scale)
        }
        Entries::Selector(cols) => {
            let mut multiplicity = vec![0usize; op.cols()];
            for &c in cols {
                multiplicity[c] += 1;
            }
            let max = multiplicity.into_iter().max().unwrap_or(0);
            Ok(r::<R>(max as f64).sqrt() * weight_scale)
        }
        Entries::Transfer { n } => Ok(weight_scale / r::<R>(*n as f64).sqrt()),
        Entries::Dense { .. } => {
            let sigma = power_singular_value(
                op.cols(),
                |x| op.apply_vec(x),
                |y| op.apply_conj_transpose(y),
                tol,
            )?;
            Ok(sigma * weight_scale)
        }
    }
}

/// Weighted operator norm of the difference of two matrix-free actions
/// sharing the same shape.
pub fn difference_norm<R: Real>(
    dim_in: usize,
    weight_scale: R,
    apply_a: impl Fn(&[C<R>]) -> Vec<C<R>>,
    adj_a: impl Fn(&[C<R>]) -> Vec<C<R>>,
    apply_b: impl Fn(&[C<R>]) -> Vec<C<R>>,
    adj_b: impl Fn(&[C<R>]) -> Vec<C<R>>,
    tol: R,
) -> Result<R> {
    let sigma = power_singular_value(
        dim_in,
        |x| {
            apply_a(x)
                .into_iter()
                .zip(apply_b(x))
                .map(|(p, q)| p - q)
                .collect()
        },
        |y| {
            adj_a(y)
                .into_iter()
                .zip(adj_b(y))
                .map(|(p, q)| p - q)
                .collect()
        },
        tol,
    )?;
    Ok(sigma * weight_scale)
}

// ---------------------------------------------------------------------------
// Identity defects
// ---------------------------------------------------------------------------

/// Weighted-norm distance between the adjoint of C_phi and the transfer
/// operator on the depth-N space; an algebraic identity, so the defect is
/// machine precision for every system.
pub fn adjoint_defect<R: Real>(space: &Arc<CellSpace<R>>) -> Result<R> {
    let comp = comp_op(space)?;
    let transfer = transfer_op(space)?;
    let weight_scale = (comp.domain.cell_mass() / space.cell_mass()).sqrt();
    difference_norm(
        space.cell_count(),
        weight_scale,
        |y| comp.apply_weighted_adjoint(y),
        |x| comp.apply_vec(x),
        |y| transfer.apply_vec(y),
        |x| transfer.apply_conj_transpose(x),
        r(DEFAULT_NORM_TOL),
    )
}

/// Weighted norm of C* M_a C - M_{L a} on the depth-(N-1) space, where a is
/// discretized at depth N and L a = (1/n) sum_i a(gamma_i x) is discretized
/// at depth N-1 with exact branch evaluation.
pub fn covariance_defect<R: Real>(
    a: impl Fn(&Point<R>) -> C<R>,
    sys: &Arc<IfSystem<R>>,
    depth: usize,
) -> Result<R> {
    if depth < 2 {
        return Err(Error::Input("covariance defect needs depth >= 2".into()));
    }
    let fine = cell_space(sys, depth)?;
    let coarse = cell_space(sys, depth - 1)?;
    let a_fine = discretize(&a, &fine);
    let n = sys.n_branches();
    let inv_n = Complex::new(R::one() / r(n as f64), R::zero());
    let transferred: Vec<C<R>> = coarse
        .representatives
        .iter()
        .map(|x| {
            let mut s = Complex::new(R::zero(), R::zero());
            for map in &sys.maps {
                s = s + a(&eval_map(map, x)?);
            }
            Ok(s * inv_n)
        })
        .collect::<Result<Vec<_>>>()?;

    let comp = comp_op(&fine)?;
    let lhs = |f: &[C<R>]| -> Vec<C<R>> {
        let cf = comp.apply_vec(f);
        let macf: Vec<C<R>> = a_fine.values.iter().zip(&cf).map(|(a, v)| a * v).collect();
        comp.apply_weighted_adjoint(&macf)
    };
    let lhs_adj = |f: &[C<R>]| -> Vec<C<R>> {
        let cf = comp.apply_vec(f);
        let macf: Vec<C<R>> = a_fine.values.iter().zip(&cf).map(|(a, v)| a.conj() * v).collect();
        comp.apply_weighted_adjoint(&macf)
    };
    difference_norm(
        coarse.cell_count(),
        R::one(),
        lhs,
        lhs_adj,
        |f| transferred.iter().zip(f).map(|(a, v)| a * v).collect(),
        |f| transferred.iter().zip(f).map(|(a, v)| a.conj() * v).collect(),
        r(DEFAULT_NORM_TOL),
    )
}

/// Max over random functions of | ||C f||_p - ||f||_p | with cell-mass
/// weighted norms.
pub fn isometry_defect<R: Real>(
    sys: &Arc<IfSystem<R>>,
    depth: usize,
    p: R,
    trials: usize,
    rng_seed: u64,
) -> Result<R> {
    if depth < 1 {
        return Err(Error::Input("isometry defect needs depth >= 1".into()));
    }
    if p < R::one() {
        return Err(Error::Input("p must be >= 1".into()));
    }
    let fine = cell_space(sys, depth)?;
    let coarse = cell_space(sys, depth - 1)?;
    let comp = comp_op(&fine)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = R::zero();
    for _ in 0..trials.max(1) {
        let f = random_function(&coarse, &mut rng);
        let cf = comp.apply(&f)?;
        worst = worst.max((cf.norm_p(p) - f.norm_p(p)).abs());
    }
    Ok(worst)
}

pub fn random_function<R: Real>(
    space: &Arc<CellSpace<R>>,
    rng: &mut ChaCha8Rng,
) -> GridFunction<R> {
    let values = (0..space.cell_count())
        .map(|_| Complex::new(r::<R>(rng.gen_range(-1.0..1.0)), r(rng.gen_range(-1.0..1.0))))
        .collect();
    GridFunction { space: Arc::clone(space), values }
}

//! The Hilbert bimodule X = C(K) over A = C(K) at finite depth.
//!
//! Elements of X are grid functions at depth N; the A-valued inner product
//! lands at depth N-1 through the transfer operator. Basis families realize
//! finite truncations of a countable basis: cylinder bases are exact at
//! cell level, and a multi-scale partition-of-unity family handles 1-D
//! geometric systems with nonempty branch sets.

use std::sync::Arc;

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde_json::json;

use crate::branch::BranchSetEstimate;
use crate::cells::{CellSpace, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::{distance, Ambient, Point};
use crate::ifs::IfSystem;
use crate::operators::{
    comp_op, difference_norm, mult_op, power_singular_value, random_function, transfer_op,
    Entries, OperatorMatrix, DEFAULT_NORM_TOL, POWER_ITERATION_CAP,
};
use crate::report::DefectReport;
use crate::scalar::{as_f64, r, Real, C};
use crate::words::{drop_head_index, head_symbol};

/// An element of X is a grid function at the module depth; the alias marks
/// intent at call sites.
pub type BimoduleElement<R> = GridFunction<R>;

/// <xi, eta>_A (v) = (1/n) sum_i conj(xi(i.v)) eta(i.v), a function at
/// depth N-1.
#[allow(non_snake_case)]
pub fn inner_product_A<R: Real>(
    xi: &BimoduleElement<R>,
    eta: &BimoduleElement<R>,
) -> Result<GridFunction<R>> {
    if !xi.space.same_space(&eta.space) {
        return Err(Error::Input("inner product needs elements on the same space".into()));
    }
    let transfer = transfer_op(&xi.space)?;
    let prod: Vec<C<R>> = xi.values.iter().zip(&eta.values).map(|(a, b)| a.conj() * b).collect();
    GridFunction::new(&transfer.codomain, transfer.apply_vec(&prod))
}

/// The bimodule norm ||xi||_2 = max_v <xi, xi>_A(v)^{1/2}.
pub fn bimodule_norm<R: Real>(xi: &BimoduleElement<R>) -> Result<R> {
    let ip = inner_product_A(xi, xi)?;
    Ok(ip.values.iter().map(|v| v.re.max(R::zero())).fold(R::zero(), R::max).sqrt())
}

/// (a . xi . b)(w) = a(w) xi(w) b(sigma w): left multiplication and right
/// action through phi.
pub fn module_action<R: Real>(
    a: &GridFunction<R>,
    xi: &BimoduleElement<R>,
    b: &GridFunction<R>,
) -> Result<BimoduleElement<R>> {
    if !a.space.same_space(&xi.space) {
        return Err(Error::Input("a and xi must share the module depth".into()));
    }
    if !b.space.same_system(&xi.space) || b.space.depth + 1 != xi.space.depth {
        return Err(Error::Input("b must live one depth below the module".into()));
    }
    let n = xi.space.system.n_branches();
    let depth = xi.space.depth;
    let values = (0..xi.space.cell_count())
        .map(|idx| a.values[idx] * xi.values[idx] * b.values[drop_head_index(n, depth, idx)])
        .collect();
    GridFunction::new(&xi.space, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Cylinder,
    PartitionOfUnity,
}

/// A finite generating family {u_i} for the module.
#[derive(Debug, Clone)]
pub struct BasisFamily<R: Real> {
    pub kind: BasisKind,
    pub space: Arc<CellSpace<R>>,
    pub elements: Vec<BimoduleElement<R>>,
    pub labels: Vec<String>,
    /// Dyadic knots of the bump profiles (empty for cylinder bases).
    pub breakpoints: Vec<f64>,
    /// Scale below which reconstruction may degrade near B (0 when the
    /// family is exact on all cell functions).
    pub reconstruction_bound: f64,
}

impl<R: Real> BasisFamily<R> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// The n elements u_i = sqrt(n) * 1_{[i]}: exact reconstruction of every
/// cell function.
pub fn cylinder_basis<R: Real>(space: &Arc<CellSpace<R>>) -> Result<BasisFamily<R>> {
    if space.depth < 1 {
        return Err(Error::Input("cylinder basis needs depth >= 1".into()));
    }
    let n = space.system.n_branches();
    let sqrt_n = Complex::new(r::<R>(n as f64).sqrt(), R::zero());
    let zero = Complex::new(R::zero(), R::zero());
    let mut elements = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for s in 1..=n {
        let values = (0..space.cell_count())
            .map(|idx| {
                if head_symbol(n, space.depth, idx) as usize == s { sqrt_n } else { zero }
            })
            .collect();
        elements.push(GridFunction { space: Arc::clone(space), values });
        labels.push(format!("cyl:{s}"));
    }
    Ok(BasisFamily {
        kind: BasisKind::Cylinder,
        space: Arc::clone(space),
        elements,
        labels,
        breakpoints: vec![],
        reconstruction_bound: 0.0,
    })
}

/// Piecewise-linear hat profile at dyadic scale k: h_1 saturates at 1 for
/// t >= 1/2, h_k peaks at 2^-k with support [2^-(k+1), 2^-(k-1)]. The
/// profiles sum to 1 exactly for t >= 2^-levels and ramp to 0 below.
fn hat_profile<R: Real>(k: usize, t: R) -> R {
    let tk = r::<R>(2f64.powi(-(k as i32)));
    let lo = tk * r(0.5);
    if k == 1 {
        if t >= tk {
            R::one()
        } else if t >= lo {
            (t - lo) / (tk - lo)
        } else {
            R::zero()
        }
    } else {
        let hi = tk * r(2.0);
        if t >= hi || t <= lo {
            R::zero()
        } else if t >= tk {
            (hi - t) / (hi - tk)
        } else {
            (t - lo) / (tk - lo)
        }
    }
}

fn dist_to_b<R: Real>(p: &Point<R>, b_points: &[Point<R>]) -> Result<R> {
    let mut best = R::infinity();
    for b in b_points {
        best = best.min(distance(p, b)?);
    }
    Ok(best)
}

/// Multi-scale partition-of-unity family subordinate to dyadic annuli
/// around the branch points: one element per (scale, leading symbol),
/// u_{k,s} = sqrt(n) * sqrt(h_k(d(x, B))) on the s-th cylinder. The squared
/// profiles sum to 1 on cells at distance >= 2^-levels from B, so the frame
/// operator is the identity there.
pub fn pou_basis<R: Real>(
    space: &Arc<CellSpace<R>>,
    b: &BranchSetEstimate<R>,
    levels: usize,
) -> Result<BasisFamily<R>> {
    match &space.system.ambient {
        Ambient::Euclidean { bounds } if bounds.len() == 1 => {}
        _ => {
            return Err(Error::Unsupported(
                "partition-of-unity bases are defined for 1-D Euclidean systems".into(),
            ))
        }
    }
    if space.depth < 1 || levels < 1 {
        return Err(Error::Input("pou basis needs depth >= 1 and levels >= 1".into()));
    }
    let n = space.system.n_branches();
    let sqrt_n = r::<R>(n as f64).sqrt();
    let dists = space
        .representatives
        .iter()
        .map(|p| dist_to_b(p, &b.b_points))
        .collect::<Result<Vec<R>>>()?;
    let mut elements = Vec::with_capacity(levels * n);
    let mut labels = Vec::with_capacity(levels * n);
    for k in 1..=levels {
        for s in 1..=n {
            let values = (0..space.cell_count())
                .map(|idx| {
                    if head_symbol(n, space.depth, idx) as usize == s {
                        Complex::new(sqrt_n * hat_profile(k, dists[idx]).sqrt(), R::zero())
                    } else {
                        Complex::new(R::zero(), R::zero())
                    }
                })
                .collect();
            elements.push(GridFunction { space: Arc::clone(space), values });
            labels.push(format!("pou:level={k},symbol={s}"));
        }
    }
    let breakpoints = (1..=levels + 1).map(|k| 2f64.powi(-(k as i32))).collect();
    Ok(BasisFamily {
        kind: BasisKind::PartitionOfUnity,
        space: Arc::clone(space),
        elements,
        labels,
        breakpoints,
        reconstruction_bound: 2f64.powi(-(levels as i32)),
    })
}

/// Reconstruction sum sum_i u_i . <u_i, xi>_A.
pub fn reconstruct<R: Real>(
    basis: &BasisFamily<R>,
    xi: &BimoduleElement<R>,
) -> Result<BimoduleElement<R>> {
    if !xi.space.same_space(&basis.space) {
        return Err(Error::Input("element is not on the basis space".into()));
    }
    let one = GridFunction::one(&basis.space);
    let mut acc = GridFunction::constant(&basis.space, Complex::new(R::zero(), R::zero()));
    for u in &basis.elements {
        let b = inner_product_A(u, xi)?;
        let term = module_action(&one, u, &b)?;
        for (a, t) in acc.values.iter_mut().zip(term.values) {
            *a = *a + t;
        }
    }
    Ok(acc)
}

/// Matrix-free action of the partial frame sum
/// T_m = sum_{i<=m} M_{u_i} C_phi C_phi* M_{u_i}*.
struct FrameAction<'a, R: Real> {
    basis: &'a BasisFamily<R>,
    upto: usize,
    comp: OperatorMatrix<R>,
    transfer: OperatorMatrix<R>,
}

impl<'a, R: Real> FrameAction<'a, R> {
    fn new(basis: &'a BasisFamily<R>, upto: usize) -> Result<Self> {
        if upto > basis.len() {
            return Err(Error::Input(format!(
                "partial sum bound {upto} exceeds family size {}",
                basis.len()
            )));
        }
        Ok(FrameAction {
            basis,
            upto,
            comp: comp_op(&basis.space)?,
            transfer: transfer_op(&basis.space)?,
        })
    }

    fn apply(&self, x: &[C<R>]) -> Vec<C<R>> {
        let mut out = vec![Complex::new(R::zero(), R::zero()); x.len()];
        for u in &self.basis.elements[..self.upto] {
            let ubar_x: Vec<C<R>> =
                u.values.iter().zip(x).map(|(a, b)| a.conj() * b).collect();
            let projected = self.comp.apply_vec(&self.transfer.apply_vec(&ubar_x));
            for ((o, uv), p) in out.iter_mut().zip(&u.values).zip(projected) {
                *o = *o + uv * p;
            }
        }
        out
    }
}

/// Dense partial frame sum on the basis's depth-N space; self-adjoint.
pub fn frame_operator<R: Real>(basis: &BasisFamily<R>, upto: usize) -> Result<OperatorMatrix<R>> {
    let action = FrameAction::new(basis, upto)?;
    let dim = basis.space.cell_count();
    let mut data = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    for j in 0..dim {
        let mut e = vec![Complex::new(R::zero(), R::zero()); dim];
        e[j] = Complex::new(R::one(), R::zero());
        for (i, v) in action.apply(&e).into_iter().enumerate() {
            data[i * dim + j] = v;
        }
    }
    Ok(OperatorMatrix {
        domain: Arc::clone(&basis.space),
        codomain: Arc::clone(&basis.space),
        entries: Entries::Dense { rows: dim, cols: dim, data },
    })
}

/// Extreme eigenvalues of a self-adjoint matrix-free operator by shifted
/// power iteration with Rayleigh quotients.
fn sym_extreme_eigs<R: Real>(
    dim: usize,
    apply: impl Fn(&[C<R>]) -> Vec<C<R>>,
    shift: R,
    tol: R,
) -> Result<(R, R)> {
    // largest eigenvalue of (shift I + T), minus the shift
    let top = |op: &dyn Fn(&[C<R>]) -> Vec<C<R>>| -> Result<R> {
        // all-ones start with a mild deterministic ripple so no fixed
        // eigenspace of a structured operator is missed
        let mut v: Vec<C<R>> = (0..dim)
            .map(|j| Complex::new(R::one() + r::<R>(0.01 * ((j % 7) as f64)), R::zero()))
            .collect();
        normalize(&mut v);
        let mut lambda = R::zero();
        for _ in 0..POWER_ITERATION_CAP {
            let mut w = op(&v);
            let rayleigh = v
                .iter()
                .zip(&w)
                .map(|(a, b)| (a.conj() * b).re)
                .fold(R::zero(), |s, t| s + t);
            if vec_norm(&w) <= r(1e-150) {
                return Ok(R::zero());
            }
            normalize(&mut w);
            let done = (rayleigh - lambda).abs() <= tol * rayleigh.abs().max(R::one());
            v = w;
            lambda = rayleigh;
            if done {
                return Ok(lambda);
            }
        }
        Err(Error::Numerical {
            msg: "eigenvalue iteration did not converge".into(),
            last: as_f64(lambda),
        })
    };

    let shifted_up = |x: &[C<R>]| -> Vec<C<R>> {
        apply(x)
            .iter()
            .zip(x)
            .map(|(t, xi)| t + xi * Complex::new(shift, R::zero()))
            .collect()
    };
    let lambda_max = top(&shifted_up)? - shift;

    let c = lambda_max + shift;
    let shifted_down = |x: &[C<R>]| -> Vec<C<R>> {
        apply(x)
            .iter()
            .zip(x)
            .map(|(t, xi)| xi * Complex::new(c, R::zero()) - t)
            .collect()
    };
    let lambda_min = c - top(&shifted_down)?;
    Ok((lambda_min, lambda_max))
}

fn vec_norm<R: Real>(v: &[C<R>]) -> R {
    v.iter().map(|x| x.norm_sqr()).fold(R::zero(), |a, b| a + b).sqrt()
}

fn normalize<R: Real>(v: &mut [C<R>]) {
    let n = vec_norm(v);
    if n > R::zero() {
        for x in v.iter_mut() {
            *x = *x / Complex::new(n, R::zero());
        }
    }
}

/// Checks 0 <= T_m <= I for every partial sum of the family; the report
/// carries the extreme eigenvalues per m.
pub fn frame_bounds_check<R: Real>(basis: &BasisFamily<R>) -> Result<DefectReport> {
    let dim = basis.space.cell_count();
    let tol = r::<R>(DEFAULT_NORM_TOL);
    let mut mins = Vec::with_capacity(basis.len());
    let mut maxs = Vec::with_capacity(basis.len());
    let mut defect = 0.0f64;
    for m in 1..=basis.len() {
        let action = FrameAction::new(basis, m)?;
        let (lo, hi) = sym_extreme_eigs(dim, |x| action.apply(x), R::one(), tol)?;
        defect = defect.max(as_f64(-lo)).max(as_f64(hi - R::one())).max(0.0);
        mins.push(as_f64(lo));
        maxs.push(as_f64(hi));
    }
    Ok(DefectReport::new(
        "frame-bounds",
        basis.space.system.name.clone(),
        json!({
            "depth": basis.space.depth,
            "kind": match basis.kind { BasisKind::Cylinder => "cylinder", BasisKind::PartitionOfUnity => "partition-of-unity" },
            "family_size": basis.len(),
            "min_eigenvalues": mins,
            "max_eigenvalues": maxs,
        }),
        defect,
        1e-10,
    ))
}

/// Sup-norm gap between sum_i M_{u_i} C C* M_{u_i}* a and the module-side
/// sum sum_i u_i . <u_i, a>_A; an algebraic identity at cell level, so the
/// value is machine precision for every family.
pub fn key_identity_defect<R: Real>(basis: &BasisFamily<R>, a: &GridFunction<R>) -> Result<R> {
    if !a.space.same_space(&basis.space) {
        return Err(Error::Input("a is not on the basis space".into()));
    }
    let action = FrameAction::new(basis, basis.len())?;
    let operator_side = action.apply(&a.values);
    let module_side = reconstruct(basis, a)?;
    Ok(operator_side
        .iter()
        .zip(&module_side.values)
        .map(|(x, y)| (x - y).norm())
        .fold(R::zero(), R::max))
}

/// An element of the ideal J(X): a function certified to vanish (within
/// `bound`) on every cell whose representative lies within `tolerance` of
/// the branch set.
#[derive(Debug, Clone)]
pub struct IdealElement<R: Real> {
    pub a: GridFunction<R>,
    pub max_proximal: R,
    pub tolerance: R,
    pub bound: R,
}

pub fn ideal_element<R: Real>(
    a: GridFunction<R>,
    b: &BranchSetEstimate<R>,
    tolerance: R,
    bound: R,
) -> Result<IdealElement<R>> {
    let mut max_proximal = R::zero();
    for (idx, rep) in a.space.representatives.iter().enumerate() {
        if dist_to_b(rep, &b.b_points)? <= tolerance {
            let m = a.values[idx].norm();
            if m > bound {
                return Err(Error::Precondition(format!(
                    "|a| = {m} at cell {idx} within {tolerance} of the branch set exceeds the ideal bound {bound}"
                )));
            }
            max_proximal = max_proximal.max(m);
        }
    }
    Ok(IdealElement { a, max_proximal, tolerance, bound })
}

/// Ideal membership with the default tolerances: |a| <= 1e-9 on cells
/// within twice the cell width of the branch set.
pub fn ideal_element_default<R: Real>(
    a: GridFunction<R>,
    b: &BranchSetEstimate<R>,
) -> Result<IdealElement<R>> {
    let sys = &a.space.system;
    let width = sys.c2_max().powi(a.space.depth as i32) * sys.ambient.diameter();
    ideal_element(a, b, width * r(2.0), r(1e-9))
}

/// Operator norm of sum_i M_a M_{u_i} C C* M_{u_i}* - M_a over the full
/// family; controlled by a's modulus of vanishing at the branch set.
pub fn ideal_covariance_defect<R: Real>(
    basis: &BasisFamily<R>,
    a: &IdealElement<R>,
) -> Result<R> {
    if !a.a.space.same_space(&basis.space) {
        return Err(Error::Input("ideal element is not on the basis space".into()));
    }
    let action = FrameAction::new(basis, basis.len())?;
    let av = &a.a.values;
    let apply = |x: &[C<R>]| -> Vec<C<R>> {
        action
            .apply(x)
            .iter()
            .zip(x)
            .zip(av)
            .map(|((tx, xi), ai)| ai * (tx - xi))
            .collect()
    };
    // T is self-adjoint, so the conjugate transpose is (T - I) M_{conj a}
    let adj = |y: &[C<R>]| -> Vec<C<R>> {
        let ay: Vec<C<R>> = av.iter().zip(y).map(|(ai, yi)| ai.conj() * yi).collect();
        action
            .apply(&ay)
            .iter()
            .zip(&ay)
            .map(|(t, v)| t - v)
            .collect()
    };
    power_singular_value(basis.space.cell_count(), apply, adj, r(DEFAULT_NORM_TOL))
}

/// Representation axioms of the covariant pair (rho, V): rho(a) V_xi =
/// V_{a.xi} and V_xi* V_eta = rho(<xi, eta>_A), on random inputs.
pub fn covariant_rep_check<R: Real>(
    sys: &Arc<IfSystem<R>>,
    space: &Arc<CellSpace<R>>,
    trials: usize,
    rng_seed: u64,
) -> Result<DefectReport> {
    if !Arc::ptr_eq(sys, &space.system) {
        return Err(Error::Input("cell space does not belong to the system".into()));
    }
    if space.depth < 2 {
        return Err(Error::Input("covariant representation check needs depth >= 2".into()));
    }
    let comp = comp_op(space)?;
    let coarse = Arc::clone(&comp.domain);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let tol = r::<R>(DEFAULT_NORM_TOL);
    let mut worst = R::zero();
    for _ in 0..trials.max(1) {
        let a = random_function(space, &mut rng);
        let xi = random_function(space, &mut rng);
        let eta = random_function(space, &mut rng);

        // rho(a) V_xi - V_{a.xi}
        let axi: Vec<C<R>> =
            a.values.iter().zip(&xi.values).map(|(p, q)| p * q).collect();
        let d1 = difference_norm(
            coarse.cell_count(),
            R::one(),
            |f| {
                let cf = comp.apply_vec(f);
                a.values
                    .iter()
                    .zip(&xi.values)
                    .zip(&cf)
                    .map(|((p, q), v)| p * q * v)
                    .collect()
            },
            |g| {
                let m: Vec<C<R>> = a
                    .values
                    .iter()
                    .zip(&xi.values)
                    .zip(g)
                    .map(|((p, q), v)| (p * q).conj() * v)
                    .collect();
                comp.apply_weighted_adjoint(&m)
            },
            |f| {
                let cf = comp.apply_vec(f);
                axi.iter().zip(&cf).map(|(p, v)| p * v).collect()
            },
            |g| {
                let m: Vec<C<R>> = axi.iter().zip(g).map(|(p, v)| p.conj() * v).collect();
                comp.apply_weighted_adjoint(&m)
            },
            tol,
        )?;

        // V_xi* V_eta - rho(<xi, eta>_A)
        let ip = inner_product_A(&xi, &eta)?;
        let d2 = difference_norm(
            coarse.cell_count(),
            R::one(),
            |f| {
                let cf = comp.apply_vec(f);
                let m: Vec<C<R>> = xi
                    .values
                    .iter()
                    .zip(&eta.values)
                    .zip(&cf)
                    .map(|((x, e), v)| x.conj() * e * v)
                    .collect();
                comp.apply_weighted_adjoint(&m)
            },
            |g| {
                let cg = comp.apply_vec(g);
                let m: Vec<C<R>> = xi
                    .values
                    .iter()
                    .zip(&eta.values)
                    .zip(&cg)
                    .map(|((x, e), v)| x * e.conj() * v)
                    .collect();
                comp.apply_weighted_adjoint(&m)
            },
            |f| ip.values.iter().zip(f).map(|(p, v)| p * v).collect(),
            |g| ip.values.iter().zip(g).map(|(p, v)| p.conj() * v).collect(),
            tol,
        )?;
        worst = worst.max(d1).max(d2);
    }
    Ok(DefectReport::new(
        "covariant-rep",
        sys.name.clone(),
        json!({"depth": space.depth, "trials": trials, "rng_seed": rng_seed}),
        as_f64(worst),
        1e-12,
    ))
}

/// Cuntz relations S_i* S_j = delta_ij I and sum_i S_i S_i* = I for
/// S_i = M_{u_i} C_phi with the cylinder basis; exact for full shifts.
pub fn cuntz_relations_check<R: Real>(space: &Arc<CellSpace<R>>) -> Result<DefectReport> {
    if space.system.ambient.is_euclidean() {
        return Err(Error::Unsupported(
            "Cuntz relations are checked on shift systems only; geometric systems are covered by covariant_rep_check and frame_operator".into(),
        ));
    }
    let basis = cylinder_basis(space)?;
    let comp = comp_op(space)?;
    let n = basis.len();
    let s_ops: Vec<OperatorMatrix<R>> = basis
        .elements
        .iter()
        .map(|u| mult_op(u).compose(&comp))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = R::zero();
    // S_i* S_j = delta_ij on the coarse space
    for (i, si) in s_ops.iter().enumerate() {
        let si_star = si.weighted_adjoint();
        for (j, sj) in s_ops.iter().enumerate() {
            let prod = si_star.compose(sj)?;
            let target = if i == j {
                crate::operators::identity_op(&comp.domain)
            } else {
                mult_op(&GridFunction::constant(
                    &comp.domain,
                    Complex::new(R::zero(), R::zero()),
                ))
            };
            let d = crate::operators::operator_norm(&prod.sub(&target)?, r(DEFAULT_NORM_TOL))?;
            worst = worst.max(d);
        }
    }
    // sum_i S_i S_i* = I on the fine space
    let mut sum = mult_op(&GridFunction::constant(space, Complex::new(R::zero(), R::zero())))
        .to_dense();
    for si in &s_ops {
        let term = si.compose(&si.weighted_adjoint())?;
        sum = sum.to_dense();
        let (Entries::Dense { data, .. }, Entries::Dense { data: td, .. }) =
            (&mut sum.entries, &term.entries)
        else {
            unreachable!()
        };
        for (x, y) in data.iter_mut().zip(td) {
            *x = *x + y;
        }
    }
    let d = crate::operators::operator_norm(
        &sum.sub(&crate::operators::identity_op(space))?,
        r(DEFAULT_NORM_TOL),
    )?;
    worst = worst.max(d);
    Ok(DefectReport::new(
        "cuntz",
        space.system.name.clone(),
        json!({"depth": space.depth, "branches": n}),
        as_f64(worst),
        1e-12,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::branch_sets;
    use crate::cells::cell_space;
    use crate::ifs::builtin;

    fn space_of(name: &str, depth: usize) -> Arc<CellSpace<f64>> {
        let sys = Arc::new(builtin::<f64>(name).unwrap());
        cell_space(&sys, depth).unwrap()
    }

    fn tent_branch_set() -> BranchSetEstimate<f64> {
        let sys = builtin::<f64>("tent").unwrap();
        branch_sets(&sys, 512, 1e-10).unwrap()
    }

    #[test]
    fn inner_product_of_constants() {
        for name in ["tent", "shift:2"] {
            let space = space_of(name, 4);
            let one = GridFunction::one(&space);
            let ip = inner_product_A(&one, &one).unwrap();
            assert!(ip.values.iter().all(|v| (v.re - 1.0).abs() < 1e-14), "{name}");
        }
    }

    #[test]
    fn cylinder_gram_is_identity() {
        let space = space_of("shift:2", 3);
        let basis = cylinder_basis(&space).unwrap();
        for (i, ui) in basis.elements.iter().enumerate() {
            for (j, uj) in basis.elements.iter().enumerate() {
                let ip = inner_product_A(ui, uj).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                for v in &ip.values {
                    assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn inner_product_unrolled_definition() {
        let space = space_of("shift:2", 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = random_function(&space, &mut rng);
        let ip = inner_product_A(&xi, &xi).unwrap();
        let n = 2;
        let half = ip.values.len();
        for v in 0..half {
            let mean: f64 = (0..n)
                .map(|i| xi.values[i * half + v].norm_sqr())
                .sum::<f64>()
                / n as f64;
            assert!((ip.values[v].re - mean).abs() < 1e-14);
            assert!(ip.values[v].im.abs() < 1e-15);
        }
    }

    #[test]
    fn inner_product_axioms_on_random_inputs() {
        let space = space_of("tent", 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let xi = random_function(&space, &mut rng);
            let eta = random_function(&space, &mut rng);
            let b = random_function(&cell_space(&space.system, 4).unwrap(), &mut rng);

            let ab = inner_product_A(&xi, &eta).unwrap();
            let ba = inner_product_A(&eta, &xi).unwrap();
            for (x, y) in ab.values.iter().zip(&ba.values) {
                assert!((x - y.conj()).norm() <= 1e-13);
            }

            let pos = inner_product_A(&xi, &xi).unwrap();
            for v in &pos.values {
                assert!(v.re >= 0.0 && v.im.abs() <= 1e-15);
            }

            // right linearity: <xi, eta.b>_A = <xi, eta>_A * b
            let one = GridFunction::one(&space);
            let eta_b = module_action(&one, &eta, &b).unwrap();
            let lhs = inner_product_A(&xi, &eta_b).unwrap();
            for ((x, y), bb) in lhs.values.iter().zip(&ab.values).zip(&b.values) {
                assert!((x - y * bb).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn module_action_examples() {
        let space = space_of("shift:2", 2);
        let coarse = cell_space(&space.system, 1).unwrap();
        let one = GridFunction::one(&space);
        let one_c = GridFunction::one(&coarse);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xi = random_function(&space, &mut rng);
        let same = module_action(&one, &xi, &one_c).unwrap();
        for (x, y) in same.values.iter().zip(&xi.values) {
            assert_eq!(x, y);
        }

        // (1.1.b)(w1 w2) = b(w2)
        let b = GridFunction::new(&coarse, vec![3.0.into(), 7.0.into()]).unwrap();
        let acted = module_action(&one, &one, &b).unwrap();
        let vals: Vec<f64> = acted.values.iter().map(|v| v.re).collect();
        assert_eq!(vals, vec![3.0, 7.0, 3.0, 7.0]);
    }

    #[test]
    fn norm_equivalence() {
        let space = space_of("shift:3", 3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let xi = random_function(&space, &mut rng);
            let sup = xi.sup_norm();
            let two = bimodule_norm(&xi).unwrap();
            let n = 3.0f64;
            assert!(sup / n.sqrt() <= two + 1e-13);
            assert!(two <= sup + 1e-13);
        }
    }

    #[test]
    fn cylinder_reconstruction_exact() {
        for (name, depth) in [("shift:2", 3), ("tent", 8)] {
            let space = space_of(name, depth);
            let basis = cylinder_basis(&space).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let xi = random_function(&space, &mut rng);
            let rec = reconstruct(&basis, &xi).unwrap();
            let defect = rec
                .values
                .iter()
                .zip(&xi.values)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(defect <= 1e-13, "{name}: {defect}");
        }
    }

    #[test]
    fn frame_operator_full_cylinder_is_identity() {
        let space = space_of("shift:2", 3);
        let basis = cylinder_basis(&space).unwrap();
        let t = frame_operator(&basis, basis.len()).unwrap();
        let Entries::Dense { rows, cols, data } = &t.entries else { unreachable!() };
        for i in 0..*rows {
            for j in 0..*cols {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((data[i * cols + j].re - expect).abs() <= 1e-13);
                assert!(data[i * cols + j].im.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn single_cylinder_term_is_projection() {
        let space = space_of("shift:2", 3);
        let basis = cylinder_basis(&space).unwrap();
        let t = frame_operator(&basis, 1).unwrap();
        // idempotent + self-adjoint => spectrum in {0, 1}
        let tt = t.compose(&t).unwrap();
        let d = crate::operators::operator_norm(&tt.sub(&t).unwrap(), 1e-10).unwrap();
        assert!(d <= 1e-13, "{d}");
        let adj = t.weighted_adjoint();
        let d = crate::operators::operator_norm(&adj.sub(&t).unwrap(), 1e-10).unwrap();
        assert!(d <= 1e-13, "{d}");
    }

    #[test]
    fn empty_frame_sum_is_zero() {
        let space = space_of("shift:2", 2);
        let basis = cylinder_basis(&space).unwrap();
        let t = frame_operator(&basis, 0).unwrap();
        let Entries::Dense { data, .. } = &t.entries else { unreachable!() };
        assert!(data.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn frame_bounds_cylinder() {
        let space = space_of("tent", 5);
        let basis = cylinder_basis(&space).unwrap();
        let report = frame_bounds_check(&basis).unwrap();
        assert!(report.pass, "defect {}", report.defect);

        let space = space_of("shift:3", 3);
        let basis = cylinder_basis(&space).unwrap();
        let report = frame_bounds_check(&basis).unwrap();
        assert!(report.pass);
        let maxs = report.params["max_eigenvalues"].as_array().unwrap();
        let mins = report.params["min_eigenvalues"].as_array().unwrap();
        // full family: T = I
        assert!((maxs[2].as_f64().unwrap() - 1.0).abs() <= 1e-9);
        assert!((mins[2].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn frame_partial_sums_monotone() {
        let space = space_of("tent", 8);
        let basis = pou_basis(&space, &tent_branch_set(), 4).unwrap();
        let report = frame_bounds_check(&basis).unwrap();
        assert!(report.pass, "defect {}", report.defect);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_function(&space, &mut rng);
        let mut prev = -1.0f64;
        for m in 1..=basis.len() {
            let action = FrameAction::new(&basis, m).unwrap();
            let tx = action.apply(&x.values);
            let q: f64 = x
                .values
                .iter()
                .zip(&tx)
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            assert!(q >= prev - 1e-13, "quadratic form decreased at m={m}");
            prev = q;
        }
    }

    #[test]
    fn pou_reconstruction_defects() {
        let space = space_of("tent", 10);
        let b = tent_branch_set();
        let basis = pou_basis(&space, &b, 6).unwrap();

        // xi vanishing near 1/2 reconstructs exactly on cells
        let xi = crate::cells::discretize_real(
            |p: &Point<f64>| {
                let d = (p.as_coords().unwrap()[0] - 0.5).abs();
                if d >= 2f64.powi(-6) { 1.0 } else { 0.0 }
            },
            &space,
        );
        let rec = reconstruct(&basis, &xi).unwrap();
        let defect = rec
            .values
            .iter()
            .zip(&xi.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(defect <= 1e-3, "{defect}");

        // xi = 1: defect concentrates near 1/2
        let one = GridFunction::one(&space);
        let rec = reconstruct(&basis, &one).unwrap();
        let mut far_defect = 0.0f64;
        let mut near_defect = 0.0f64;
        for (idx, (x, y)) in rec.values.iter().zip(&one.values).enumerate() {
            let d = (space.representatives[idx].as_coords().unwrap()[0] - 0.5).abs();
            let gap = (x - y).norm();
            if d >= 2f64.powi(-6) {
                far_defect = far_defect.max(gap);
            } else {
                near_defect = near_defect.max(gap);
            }
        }
        assert!(far_defect <= 1e-3, "{far_defect}");
        assert!(near_defect > 0.5, "expected loss near the branch point");
    }

    #[test]
    fn pou_disjoint_supports() {
        let space = space_of("tent", 10);
        let basis = pou_basis(&space, &tent_branch_set(), 6).unwrap();
        // b supported in a 2^-8 ball at 1/2 multiplies coarse members to zero
        let b = crate::cells::discretize_real(
            |p: &Point<f64>| {
                let d = (p.as_coords().unwrap()[0] - 0.5).abs();
                if d < 2f64.powi(-8) { 1.0 } else { 0.0 }
            },
            &space,
        );
        let n = 2;
        for k in 1..=4usize {
            for s in 0..n {
                let u = &basis.elements[(k - 1) * n + s];
                for (bv, uv) in b.values.iter().zip(&u.values) {
                    assert!((bv * uv).norm() == 0.0, "support overlap at level {k}");
                }
            }
        }
    }

    #[test]
    fn pou_rejects_non_1d() {
        let space = space_of("shift:2", 3);
        let b = BranchSetEstimate::empty(1e-9);
        assert!(matches!(pou_basis(&space, &b, 3), Err(Error::Unsupported(_))));
        let space = space_of("sierpinski", 3);
        assert!(pou_basis(&space, &b, 3).is_err());
    }

    #[test]
    fn key_identity_all_bases() {
        let space = space_of("shift:2", 5);
        let basis = cylinder_basis(&space).unwrap();
        let one = GridFunction::one(&space);
        assert!(key_identity_defect(&basis, &one).unwrap() <= 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_function(&space, &mut rng);
        assert!(key_identity_defect(&basis, &a).unwrap() <= 1e-13);

        let space = space_of("tent", 8);
        let basis = pou_basis(&space, &tent_branch_set(), 5).unwrap();
        let a = random_function(&space, &mut rng);
        assert!(key_identity_defect(&basis, &a).unwrap() <= 1e-12);
    }

    #[test]
    fn ideal_covariance_on_shift_is_exact() {
        let space = space_of("shift:2", 4);
        let basis = cylinder_basis(&space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // B is empty for shifts, so J(X) = A
        let a = ideal_element_default(
            random_function(&space, &mut rng),
            &BranchSetEstimate::empty(1e-9),
        )
        .unwrap();
        assert!(ideal_covariance_defect(&basis, &a).unwrap() <= 1e-13);
    }

    fn clamped_tent_symbol(p: &Point<f64>) -> f64 {
        let d = (p.as_coords().unwrap()[0] - 0.5).abs();
        (d - 2f64.powi(-8)).max(0.0).min(0.25)
    }

    #[test]
    fn ideal_covariance_tent_decreases() {
        let b = tent_branch_set();

        let space = space_of("tent", 10);
        let basis = pou_basis(&space, &b, 6).unwrap();
        let a = ideal_element_default(
            crate::cells::discretize_real(clamped_tent_symbol, &space),
            &b,
        )
        .unwrap();
        let d1 = ideal_covariance_defect(&basis, &a).unwrap();
        assert!(d1 <= 0.02, "{d1}");
        assert!(d1 > 1e-6, "expected a visible defect at levels 6");

        let space = space_of("tent", 12);
        let basis = pou_basis(&space, &b, 8).unwrap();
        let a = ideal_element_default(
            crate::cells::discretize_real(clamped_tent_symbol, &space),
            &b,
        )
        .unwrap();
        let d2 = ideal_covariance_defect(&basis, &a).unwrap();
        assert!(d2 < d1, "d2 = {d2} not below d1 = {d1}");
    }

    #[test]
    fn ideal_zero_element() {
        let space = space_of("tent", 8);
        let b = tent_branch_set();
        let basis = pou_basis(&space, &b, 4).unwrap();
        let zero = GridFunction::constant(&space, Complex::new(0.0, 0.0));
        let a = ideal_element_default(zero, &b).unwrap();
        assert_eq!(ideal_covariance_defect(&basis, &a).unwrap(), 0.0);
    }

    #[test]
    fn ideal_violation_names_cell() {
        let space = space_of("tent", 8);
        let b = tent_branch_set();
        let one = GridFunction::one(&space);
        match ideal_element_default(one, &b) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("cell")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn covariant_rep_shift_and_tent() {
        let sys = Arc::new(builtin::<f64>("shift:2").unwrap());
        let space = cell_space(&sys, 4).unwrap();
        let report = covariant_rep_check(&sys, &space, 50, 13).unwrap();
        assert!(report.pass && report.defect <= 1e-13, "{}", report.defect);

        let sys = Arc::new(builtin::<f64>("tent").unwrap());
        let space = cell_space(&sys, 8).unwrap();
        let report = covariant_rep_check(&sys, &space, 50, 14).unwrap();
        assert!(report.pass && report.defect <= 1e-13, "{}", report.defect);
    }

    #[test]
    fn cuntz_relations_on_shifts() {
        for (name, depth) in [("shift:2", 6), ("shift:3", 4)] {
            let space = space_of(name, depth);
            let report = cuntz_relations_check(&space).unwrap();
            assert!(report.pass, "{name}: defect {}", report.defect);
        }
    }

    #[test]
    fn cuntz_rejects_geometric_systems() {
        let space = space_of("tent", 4);
        assert!(matches!(cuntz_relations_check(&space), Err(Error::Unsupported(_))));
    }
}

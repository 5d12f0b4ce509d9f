use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::{ascent, ascent_starts};
use super::{from_matrix, to_matrix, CoupleOperator, OpNormConfig};
use crate::error::{check_dim, Error, Result};
use crate::functors::{complex_norm_lower, lattice_theta_space};
use crate::operators::op_norm;
use crate::spaces::{Exponent, NormModel};
use crate::{NormBracket, SolverTag, Witness, C64};

fn is_zero(rows: &[Vec<C64>]) -> bool {
    rows.iter().all(|r| r.iter().all(|c| c.re == 0.0 && c.im == 0.0))
}

fn vector(b: &NormBracket) -> Option<Vec<C64>> {
    match &b.witness {
        Witness::Vector { x } => Some(x.clone()),
        _ => None,
    }
}

/// Ascent over `{||x||_0 <= 1, ||x||_1 <= r}` given the two unconstrained norms.
#[allow(clippy::too_many_arguments)]
fn constrained_core(
    rows: &[Vec<C64>],
    s0: &NormModel,
    s1: &NormModel,
    tgt: &NormModel,
    r: f64,
    n0: &NormBracket,
    n1: &NormBracket,
    cfg: &OpNormConfig,
) -> NormBracket {
    let n = s0.dim();
    if is_zero(rows) {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[0] = C64::new(1.0, 0.0);
        return NormBracket::exact(0.0, SolverTag::Exact).with_witness(Witness::Vector { x: e });
    }
    let gauge = |x: &[C64]| s0.norm_of(x).max(s1.norm_of(x) / r);
    let mut starts = ascent_starts(rows, n, cfg.starts, cfg.seed);
    starts.extend([n0, n1].into_iter().filter_map(vector));
    let (v, x, iters) = ascent(rows, tgt, &gauge, None, &starts, cfg.iterations);
    let upper = n0.upper.min(r * n1.upper).max(v);
    NormBracket::new(v, upper, SolverTag::Ascent, Witness::Vector { x }).with_iterations(iters, true)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius {r} must be positive and finite")))
    }
}

/// `sup { ||A x||_tgt : ||x||_s0 <= 1, ||x||_s1 <= r }`.
pub fn constrained_sup(
    rows: &[Vec<C64>],
    s0: &NormModel,
    s1: &NormModel,
    tgt: &NormModel,
    r: f64,
    cfg: &OpNormConfig,
) -> Result<NormBracket> {
    check_radius(r)?;
    check_dim(s0.dim(), s1.dim())?;
    let n0 = op_norm(rows, s0, tgt, cfg)?;
    let n1 = op_norm(rows, s1, tgt, cfg)?;
    Ok(constrained_core(rows, s0, s1, tgt, r, &n0, &n1, cfg))
}

/// `sup { ||T x||_Y0 : ||x||_X0 <= 1, ||x||_X1 <= r }`.
pub fn constrained_image_norm(t: &CoupleOperator, r: f64, cfg: &OpNormConfig) -> Result<NormBracket> {
    check_radius(r)?;
    let n0 = t.endpoint_norm(0, 0, cfg)?;
    let n1 = t.endpoint_norm(1, 0, cfg)?;
    let (s, y) = (t.source(), t.target());
    Ok(constrained_core(t.rows(), s.space0(), s.space1(), y.space0(), r, &n0, &n1, cfg))
}

/// `e^(k theta) sup { ||T x||_theta : ||x||_X0 <= 1, ||x||_X1 <= e^-k }`.
///
/// The upper end is also capped by `A^(1-theta) B^theta` where `A` and `B` bound
/// `||T x||` in `Y0` and `Y1` over the constraint set. Without a lattice target the
/// lower end comes from the K-functional bound at the ascent witness and the
/// bracket is flagged.
pub fn fourier_coefficient_bound(t: &CoupleOperator, k: i64, theta: f64, cfg: &OpNormConfig) -> Result<NormBracket> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
    }
    let r = (-(k as f64)).exp();
    let scale = (k as f64 * theta).exp();
    let u = |i, j| t.endpoint_norm(i, j, cfg).map(|b| b.upper);
    let a = u(0, 0)?.min(r * u(1, 0)?);
    let b = u(0, 1)?.min(r * u(1, 1)?);
    let interp = a.powf(1.0 - theta) * b.powf(theta);
    let (src, tgt) = (t.source(), t.target());
    match lattice_theta_space(tgt, theta) {
        Ok(y) => {
            let n0 = op_norm(t.rows(), src.space0(), &y, cfg)?;
            let n1 = op_norm(t.rows(), src.space1(), &y, cfg)?;
            let cs = constrained_core(t.rows(), src.space0(), src.space1(), &y, r, &n0, &n1, cfg);
            let lower = scale * cs.lower;
            Ok(NormBracket { lower, upper: (scale * cs.upper.min(interp)).max(lower), ..cs })
        }
        Err(Error::UnsupportedKind(_)) => {
            let cs = constrained_image_norm(t, r, cfg)?;
            let x = vector(&cs).unwrap_or_default();
            let lower = scale * complex_norm_lower(tgt, theta, &t.apply(&x))?;
            Ok(NormBracket::new(lower, (scale * interp).max(lower), SolverTag::Envelope, Witness::Vector { x })
                .with_iterations(cs.iterations, cs.converged)
                .heuristic(true))
        }
        Err(e) => Err(e),
    }
}

/// Approximation numbers `a_1, ..., a_kmax` of `A: src -> tgt`.
pub fn approx_numbers(
    rows: &[Vec<C64>],
    src: &NormModel,
    tgt: &NormModel,
    kmax: usize,
    cfg: &OpNormConfig,
) -> Result<Vec<NormBracket>> {
    let (m, n) = (tgt.dim(), src.dim());
    check_dim(m, rows.len())?;
    if kmax == 0 || kmax > m.min(n) {
        return Err(Error::InvalidParameter(format!("kmax = {kmax} must lie in 1..={}", m.min(n))));
    }
    let first = op_norm(rows, src, tgt, cfg)?;
    let mut out = match (src, tgt) {
        (NormModel::WeightedLp { p, weights: w }, NormModel::WeightedLp { p: q, weights: wt })
            if p == q && super::norm::is_diagonal(rows) =>
        {
            let mut mult: Vec<f64> = (0..n).map(|i| rows[i][i].norm() * wt[i] / w[i]).collect();
            mult.sort_by(|a, b| b.total_cmp(a));
            mult[..kmax].iter().map(|v| NormBracket::exact(*v, SolverTag::ClosedForm)).collect()
        }
        (NormModel::WeightedLp { p: Exponent::Finite(p), weights: w }, NormModel::WeightedLp { p: Exponent::Finite(q), weights: wt })
            if *p == 2.0 && *q == 2.0 =>
        {
            let b = to_matrix(rows);
            let b = nalgebra::DMatrix::from_fn(m, n, |i, j| b[(i, j)] * (wt[i] / w[j]));
            let mut sv: Vec<f64> = b.singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            sv[..kmax].iter().map(|v| NormBracket::exact(*v, SolverTag::Svd)).collect()
        }
        _ => truncation_brackets(rows, src, tgt, kmax, cfg)?,
    };
    out[0] = NormBracket {
        lower: out[0].lower.max(first.lower),
        upper: out[0].upper.min(first.upper),
        ..first
    };
    for k in 1..kmax {
        out[k].upper = out[k].upper.min(out[k - 1].upper);
    }
    for k in (0..kmax - 1).rev() {
        out[k].lower = out[k].lower.max(out[k + 1].lower);
    }
    for b in &mut out {
        b.lower = b.lower.min(b.upper);
    }
    Ok(out)
}

/// Upper ends from measuring the Euclidean rank `k - 1` truncation residual in the
/// given norms; lower ends from `sigma_k` and the Euclidean equivalence constants.
fn truncation_brackets(
    rows: &[Vec<C64>],
    src: &NormModel,
    tgt: &NormModel,
    kmax: usize,
    cfg: &OpNormConfig,
) -> Result<Vec<NormBracket>> {
    let a = to_matrix(rows);
    let svd = a.clone().svd(true, true);
    let (uu, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|i, j| svd.singular_values[*j].total_cmp(&svd.singular_values[*i]));
    let (lo_tgt, _) = tgt.euclidean_bounds();
    let (_, hi_src) = src.euclidean_bounds();
    (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut resid = a.clone();
            for &i in &order[..k - 1] {
                let s = svd.singular_values[i];
                resid -= uu.column(i) * vt.row(i) * C64::new(s, 0.0);
            }
            let up = op_norm(&from_matrix(&resid), src, tgt, cfg)?;
            let lower = svd.singular_values[order[k - 1]] * lo_tgt / hi_src;
            Ok(NormBracket::new(lower, up.upper, SolverTag::Envelope, Witness::None).with_iterations(up.iterations, up.converged))
        })
        .collect()
}

/// `eta(delta)` over a grid, from upper ends of constrained image norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactnessModulus {
    pub deltas: Vec<f64>,
    pub raw: Vec<NormBracket>,
    /// Nondecreasing in `delta`.
    pub eta: Vec<f64>,
    /// Whether the running minimum from the right lowered any raw value.
    pub envelope_applied: bool,
}

pub fn compactness_modulus(t: &CoupleOperator, deltas: &[f64], cfg: &OpNormConfig) -> Result<CompactnessModulus> {
    if deltas.is_empty() || deltas[0] <= 0.0 || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("delta grid must be positive and strictly ascending".into()));
    }
    t.endpoint_norm(0, 0, cfg)?;
    t.endpoint_norm(1, 0, cfg)?;
    let raw: Vec<NormBracket> = deltas.par_iter().map(|d| constrained_image_norm(t, *d, cfg)).collect::<Result<_>>()?;
    let mut eta: Vec<f64> = raw.iter().map(|b| b.upper).collect();
    let mut applied = false;
    for i in (0..eta.len().saturating_sub(1)).rev() {
        if eta[i + 1] < eta[i] {
            eta[i] = eta[i + 1];
            applied = true;
        }
    }
    Ok(CompactnessModulus { deltas: deltas.to_vec(), raw, eta, envelope_applied: applied })
}

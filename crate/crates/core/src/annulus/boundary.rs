use rand::Rng;
use rayon::prelude::*;

use super::{radius, riesz_project, AnnulusSpec, CircleTransform, LaurentFamily};
use crate::error::{check_dim, Error, Result};
use crate::spaces::{sample_complex_vector, Couple, NormModel};
use crate::{seeds, C64};

/// A sampled boundary maximum with a bound on how far the grid can undershoot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryNorm {
    pub value: f64,
    pub slack: f64,
}

impl BoundaryNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.slack
    }
}

/// Norm values of `f` at the `M` grid points of circle `j`.
fn circle_norms(f: &LaurentFamily, space: &NormModel, j: usize, tr: &CircleTransform) -> Vec<f64> {
    let coord = tr.synthesize(f, radius(j));
    let mut x = vec![C64::new(0.0, 0.0); f.dim()];
    (0..tr.size())
        .map(|m| {
            for (xi, c) in x.iter_mut().zip(&coord) {
                *xi = c[m];
            }
            space.norm_of(&x)
        })
        .collect()
}

/// `(pi / M) sum_k |k| ||c_k|| r^k`: a Lipschitz bound in the angle times the half spacing.
fn slack(f: &LaurentFamily, j: usize, m: usize, coeff_norm: impl Fn(&[C64]) -> f64) -> f64 {
    let r = radius(j);
    let lip: f64 = f
        .terms()
        .map(|(k, c)| k.unsigned_abs() as f64 * coeff_norm(c) * r.powi(k as i32))
        .sum();
    lip * std::f64::consts::PI / m as f64
}

/// `max_j max_{|z| = e^j} ||f(z)||_{X_j}` on the grid, with slack.
pub fn boundary_norm_f(f: &LaurentFamily, couple: &Couple, spec: &AnnulusSpec) -> Result<BoundaryNorm> {
    check_dim(couple.dim(), f.dim())?;
    spec.check_degree(f.degree())?;
    let tr = CircleTransform::new(spec.points());
    let mut value = 0.0f64;
    let mut sl = 0.0f64;
    for j in 0..2 {
        let space = couple.space(j);
        value = value.max(circle_norms(f, space, j, &tr).into_iter().fold(0.0, f64::max));
        sl = sl.max(slack(f, j, spec.points(), |c| space.norm_of(c)));
    }
    Ok(BoundaryNorm { value, slack: sl })
}

/// `max over both circles of ||f(z)||_{X0 + X1}` on the grid, with slack.
///
/// Each grid value is the upper end of a sum-norm bracket.
pub fn boundary_norm_h(f: &LaurentFamily, couple: &Couple, spec: &AnnulusSpec) -> Result<BoundaryNorm> {
    check_dim(couple.dim(), f.dim())?;
    spec.check_degree(f.degree())?;
    let tr = CircleTransform::new(spec.points());
    let mut value = 0.0f64;
    let mut sl = 0.0f64;
    for j in 0..2 {
        let coord = tr.synthesize(f, radius(j));
        let vals: Vec<f64> = (0..tr.size())
            .into_par_iter()
            .map(|m| {
                let x: Vec<C64> = coord.iter().map(|c| c[m]).collect();
                couple.sum_norm(&x).map(|b| b.upper)
            })
            .collect::<Result<_>>()?;
        value = value.max(vals.into_iter().fold(0.0, f64::max));
        let cheap = |c: &[C64]| couple.space0().norm_of(c).min(couple.space1().norm_of(c));
        sl = sl.max(slack(f, j, spec.points(), cheap));
    }
    Ok(BoundaryNorm { value, slack: sl })
}

/// `((1/M) sum_m ||f(r e^{2 pi i m / M})||^2)^(1/2)` on circle `j` (radius `e^j`).
pub fn circle_l2_norm(f: &LaurentFamily, space: &NormModel, j: usize, spec: &AnnulusSpec) -> Result<f64> {
    check_dim(space.dim(), f.dim())?;
    spec.check_degree(f.degree())?;
    if j > 1 {
        return Err(Error::InvalidParameter(format!("circle index {j} must be 0 or 1")));
    }
    let tr = CircleTransform::new(spec.points());
    Ok(mean_square_root(&circle_norms(f, space, j, &tr)))
}

/// `(1/M) sum_m ||f(r e^{2 pi i m / M})||` on circle `j` (radius `e^j`).
pub fn circle_mean_norm(f: &LaurentFamily, space: &NormModel, j: usize, spec: &AnnulusSpec) -> Result<f64> {
    check_dim(space.dim(), f.dim())?;
    spec.check_degree(f.degree())?;
    if j > 1 {
        return Err(Error::InvalidParameter(format!("circle index {j} must be 0 or 1")));
    }
    let tr = CircleTransform::new(spec.points());
    Ok(circle_norms(f, space, j, &tr).iter().sum::<f64>() / tr.size() as f64)
}

fn mean_square_root(v: &[f64]) -> f64 {
    let vmax = v.iter().copied().fold(0.0, f64::max);
    if vmax == 0.0 {
        return 0.0;
    }
    vmax * (v.iter().map(|a| (a / vmax).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

const FINE_GRID: usize = 4096;
const REFINED_PEAKS: usize = 8;

/// Near-exact `max_{|z| = e^j} ||f(z)||`: a fine grid followed by golden-section
/// refinement around the largest local maxima. The fine grid depends only on
/// the degree through `max(4096, 32 K)`, so zero-padding a family does not
/// change the result.
pub fn circle_sup_refined(f: &LaurentFamily, space: &NormModel, j: usize) -> f64 {
    let size = FINE_GRID.max((32 * f.degree()).next_power_of_two());
    let tr = CircleTransform::new(size);
    let vals = circle_norms(f, space, j, &tr);
    let mut peaks: Vec<usize> = (0..size)
        .filter(|&m| {
            let prev = vals[(m + size - 1) % size];
            let next = vals[(m + 1) % size];
            vals[m] >= prev && vals[m] >= next
        })
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]).then(a.cmp(b)));
    peaks.truncate(REFINED_PEAKS);
    let h = super::angle(1, size);
    let r = radius(j);
    let at = |t: f64| space.norm_of(&f.eval_unchecked(C64::from_polar(r, t)));
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for m in peaks {
        let t0 = super::angle(m, size);
        best = best.max(golden_max(&at, t0 - h, t0 + h, 60));
    }
    best
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let mut best = gc.max(gd);
    for _ in 0..iters {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
            best = best.max(gc);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
            best = best.max(gd);
        }
    }
    best
}

/// F-norm with each circle maximum refined by [`circle_sup_refined`].
pub fn boundary_norm_f_refined(f: &LaurentFamily, couple: &Couple) -> Result<f64> {
    check_dim(couple.dim(), f.dim())?;
    Ok((0..2).map(|j| circle_sup_refined(f, couple.space(j), j)).fold(0.0, f64::max))
}

/// Sampled lower bound for the norm of the Riesz projection on `L_2(T, X)`.
///
/// Trial `t` draws coefficients `c_k` from generators seeded per `(t, k)`; the
/// modes `k < 0` are scaled by a trial weight (0 for trial 0, which is therefore
/// analytic). Every truncation of a trial family to degree `d <= K` is a
/// candidate, so the estimate is nondecreasing in both `trials` and `K`.
pub fn riesz_l2_constant(
    space: &NormModel,
    k_max: usize,
    spec: &AnnulusSpec,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 || k_max == 0 {
        return Err(Error::InvalidParameter("trials and degree must be positive".into()));
    }
    spec.check_degree(k_max)?;
    let n = space.dim();
    let tr = CircleTransform::new(spec.points());
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ts = seeds::derive(seed, t);
            let weight = if t == 0 { 0.0 } else { seeds::child_rng(ts, u64::MAX).random::<f64>() };
            let mut full = LaurentFamily::zeros(n, k_max);
            for k in -(k_max as i64)..=k_max as i64 {
                let mut rng = seeds::child_rng(ts, (k + (1 << 32)) as u64);
                let mut c = sample_complex_vector(&mut rng, n);
                if k < 0 {
                    c.iter_mut().for_each(|v| *v *= weight);
                }
                full.set_coeff(k, c);
            }
            let mut best = 0.0f64;
            for d in 1..=k_max {
                let mut f = LaurentFamily::zeros(n, d);
                for k in -(d as i64)..=d as i64 {
                    f.set_coeff(k, full.coeff(k).to_vec());
                }
                let denom = mean_square_root(&circle_norms(&f, space, 0, &tr));
                if denom > 0.0 {
                    let num = mean_square_root(&circle_norms(&riesz_project(&f), space, 0, &tr));
                    best = best.max(num / denom);
                }
            }
            best
        })
        .collect();
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

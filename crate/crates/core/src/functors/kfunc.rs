//! `K(t, x) = inf { ||x0||_0 + t ||x1||_1 : x0 + x1 = x }`.
//!
//! For lattice couples an optimal split is phase-aligned with `x`, so the
//! problem reduces to moduli `s` in the box `[0, |x|]`, solved by damped
//! projected Newton. A dual certificate `y` with `||y||_0* <= 1`, `||y||_1* <= t` gives
//! the lower bound `Re <x, y>`. For lattices the coordinatewise minimum of any
//! two such vectors (one per ball) is feasible for both.
//!
//! When one side is a weighted `l_inf`, the best split at level
//! `lambda = ||x0||_0` is `s_i = min(a_i, lambda / w_i)`, so `K` is a convex
//! function of `lambda` alone and is minimized by golden-section search.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::optim::{multistart, ContinuationOptions, SmoothObjective};
use crate::spaces::{pairing, soft_max, weighted_lp_norm, Couple, Exponent, NormModel};
use crate::{NormBracket, SolverTag, Witness, C64};

pub fn k_functional(couple: &Couple, x: &[C64], t: f64) -> Result<NormBracket> {
    check_dim(couple.dim(), x.len())?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive and finite")));
    }
    if x.iter().all(|c| c.norm() == 0.0) {
        return Ok(NormBracket::exact(0.0, SolverTag::Exact).with_witness(Witness::Split { x0: x.to_vec() }));
    }
    match (couple.space0(), couple.space1()) {
        (NormModel::WeightedLp { p: p0, weights: w0 }, NormModel::WeightedLp { p: p1, weights: w1 }) => {
            Ok(lattice_k(&Side { p: *p0, w: w0 }, &Side { p: *p1, w: w1 }, x, t))
        }
        _ => Ok(generic_k(couple, x, t)),
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Side<'a> {
    pub p: Exponent,
    pub w: &'a [f64],
}

impl Side<'_> {
    /// Norm of a nonnegative vector with a gradient; `p = inf` uses log-sum-exp at `mu`.
    pub(crate) fn value_grad(&self, s: &[f64], mu: f64, g: &mut [f64]) -> f64 {
        match self.p {
            Exponent::Infinity => {
                let v: Vec<f64> = s.iter().zip(self.w).map(|(a, w)| a * w).collect();
                let (val, pi) = soft_max(&v, mu);
                for ((gi, pi), w) in g.iter_mut().zip(pi).zip(self.w) {
                    *gi = pi * w;
                }
                val
            }
            Exponent::Finite(q) => {
                let nrm = weighted_lp_norm(self.p, self.w, s.iter().copied());
                for ((gi, si), w) in g.iter_mut().zip(s).zip(self.w) {
                    *gi = if q == 1.0 {
                        *w
                    } else if nrm == 0.0 {
                        0.0
                    } else {
                        w * (w * si / nrm).powf(q - 1.0)
                    };
                }
                nrm
            }
        }
    }

    pub(crate) fn norm(&self, s: &[f64]) -> f64 {
        weighted_lp_norm(self.p, self.w, s.iter().copied())
    }

    /// Dual norm of a nonnegative vector.
    pub(crate) fn dual_norm(&self, y: &[f64]) -> f64 {
        let inv: Vec<f64> = self.w.iter().map(|w| 1.0 / w).collect();
        weighted_lp_norm(self.p.conjugate(), &inv, y.iter().copied())
    }

    /// A unit dual vector norming `s` (any unit dual vector if `s = 0`).
    fn norming(&self, s: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; s.len()];
        self.value_grad(s, 0.0, &mut g);
        normalize_dual(self, g)
    }
}

fn normalize_dual(side: &Side, mut g: Vec<f64>) -> Vec<f64> {
    let d = side.dual_norm(&g);
    if d > 0.0 {
        g.iter_mut().for_each(|v| *v /= d);
    } else {
        let n = g.len();
        g = side.w.iter().map(|w| w / n as f64).collect();
        let d = side.dual_norm(&g);
        g.iter_mut().for_each(|v| *v /= d);
    }
    g
}

fn exact_phi(s0: &Side, s1: &Side, a: &[f64], t: f64, s: &[f64]) -> f64 {
    let rest: Vec<f64> = a.iter().zip(s).map(|(ai, si)| (ai - si).max(0.0)).collect();
    s0.norm(s) + t * s1.norm(&rest)
}

/// Norm, gradient and Hessian of a nonnegative vector under a finite exponent.
fn second_order(side: &Side, v: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
    let n = v.len();
    let mut h = DMatrix::zeros(n, n);
    let Exponent::Finite(q) = side.p else { unreachable!("finite exponents only") };
    let nrm = side.norm(v);
    if q == 1.0 {
        return (nrm, side.w.to_vec(), h);
    }
    if nrm == 0.0 {
        return (0.0, vec![0.0; n], h);
    }
    let r: Vec<f64> = v.iter().zip(side.w).map(|(vi, w)| w * vi / nrm).collect();
    let g: Vec<f64> = r.iter().zip(side.w).map(|(ri, w)| w * ri.powf(q - 1.0)).collect();
    let c = (q - 1.0) / nrm;
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = -c * g[i] * g[j];
        }
        // unbounded at zero when q < 2; the damping term stands in for it there
        let d = if r[i] > 0.0 { side.w[i] * side.w[i] * r[i].powf(q - 2.0) } else { 0.0 };
        h[(i, i)] += c * d;
    }
    (nrm, g, h)
}

/// Value, gradient and stationarity measure of the split objective at `s`.
fn kkt(s0: &Side, s1: &Side, a: &[f64], t: f64, s: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = a.len();
    let rest: Vec<f64> = a.iter().zip(s).map(|(ai, si)| (ai - si).max(0.0)).collect();
    let (mut g0, mut g1) = (vec![0.0; n], vec![0.0; n]);
    let fx = s0.value_grad(s, 0.0, &mut g0) + t * s1.value_grad(&rest, 0.0, &mut g1);
    let g: Vec<f64> = g0.iter().zip(&g1).map(|(u, w)| u - t * w).collect();
    let station = (0..n)
        .filter(|&i| !(s[i] <= 0.0 && g[i] > 0.0) && !(s[i] >= a[i] && g[i] < 0.0))
        .map(|i| g[i].abs() * a[i])
        .sum();
    (fx, g, station)
}

/// Damped projected Newton on the box `[0, a]` for finite exponents; returns
/// iterations used and whether a stationary point was reached.
fn projected_newton(s0: &Side, s1: &Side, a: &[f64], t: f64, s: &mut [f64], max_iter: usize) -> (usize, bool) {
    let n = a.len();
    let amax = a.iter().copied().fold(0.0, f64::max);
    let mut lambda = 1e-3;
    let singular = |side: &Side| matches!(side.p, Exponent::Finite(q) if q > 1.0 && q < 2.0);
    for it in 0..max_iter {
        // near zero an exponent below 2 has unbounded curvature, which the
        // quadratic model cannot follow; such coordinates are solved exactly
        // (a side that vanishes entirely is left to the cone escape)
        let rest: Vec<f64> = a.iter().zip(s.iter()).map(|(ai, si)| (ai - si).max(0.0)).collect();
        let live0 = singular(s0) && s0.norm(s) > 1e-9 * s0.norm(a);
        let live1 = singular(s1) && s1.norm(&rest) > 1e-9 * s1.norm(a);
        for i in 0..n {
            let low = |v: f64| v <= 1e-6 * a[i];
            if a[i] > 0.0 && (live1 && low(a[i] - s[i]) || live0 && low(s[i])) {
                coordinate_root(s0, s1, a, t, s, i);
            }
        }
        let rest: Vec<f64> = a.iter().zip(s.iter()).map(|(ai, si)| (ai - si).max(0.0)).collect();
        let (_, _, h0) = second_order(s0, s);
        let (_, _, h1) = second_order(s1, &rest);
        let (fx, g, station) = kkt(s0, s1, a, t, s);
        if station <= 1e-15 * fx {
            return (it, true);
        }
        let free: Vec<usize> = (0..n).filter(|&i| !(s[i] <= 0.0 && g[i] > 0.0) && !(s[i] >= a[i] && g[i] < 0.0)).collect();
        let gmax = free.iter().map(|&i| g[i].abs()).fold(0.0, f64::max);
        let m = free.len();
        let hf = DMatrix::from_fn(m, m, |i, j| h0[(free[i], free[j])] + t * h1[(free[i], free[j])]);
        let scale = (0..m).map(|i| hf[(i, i)]).fold(0.0, f64::max).min(1e100) + gmax / amax;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut sys = hf.clone();
            for i in 0..m {
                sys[(i, i)] += lambda * scale;
            }
            let rhs = DVector::from_fn(m, |i, _| -g[free[i]]);
            let Some(d) = sys.cholesky().map(|c| c.solve(&rhs)) else {
                lambda *= 4.0;
                continue;
            };
            let mut next = s.to_vec();
            for (k, &i) in free.iter().enumerate() {
                next[i] = (s[i] + d[k]).clamp(0.0, a[i]);
            }
            let lin: f64 = (0..n).map(|i| g[i] * (next[i] - s[i])).sum();
            let (fnew, _, snew) = kkt(s0, s1, a, t, &next);
            // once the predicted gain is below rounding, progress is judged by stationarity
            let flat = lin.abs() <= 1e-13 * fx && fnew <= fx * (1.0 + 4.0 * f64::EPSILON) && snew < station;
            if fnew <= fx + 1e-4 * lin && fnew < fx || flat {
                let moved = (0..n).map(|i| (next[i] - s[i]).abs()).fold(0.0, f64::max);
                s.copy_from_slice(&next);
                lambda = (lambda / 4.0).max(1e-12);
                accepted = true;
                if moved <= 1e-16 * amax {
                    return (it + 1, true);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no progress at any damping: stationary up to rounding, or on a cone
            return (it + 1, true);
        }
    }
    (max_iter, false)
}

fn lattice_k(s0: &Side, s1: &Side, x: &[C64], t: f64) -> NormBracket {
    let a: Vec<f64> = x.iter().map(|c| c.norm()).collect();
    if s0.p.is_infinite() || s1.p.is_infinite() {
        let (lower, upper, s, iters) = if s0.p.is_infinite() {
            level_k(s0, s1, &a, t)
        } else {
            // K(t, x; X0, X1) = t K(1/t, x; X1, X0)
            let (l, u, r, it) = level_k(s1, s0, &a, 1.0 / t);
            let s = a.iter().zip(&r).map(|(ai, ri)| (ai - ri).max(0.0)).collect();
            (t * l, t * u, s, it)
        };
        return NormBracket::new(lower.min(upper), upper, SolverTag::LevelSearch, split_witness(x, &s))
            .with_iterations(iters, true);
    }
    let n = a.len();
    let candidates = [a.clone(), vec![0.0; n], a.iter().map(|v| v / 2.0).collect::<Vec<_>>()];
    let mut s = candidates
        .iter()
        .min_by(|p, q| exact_phi(s0, s1, &a, t, p).total_cmp(&exact_phi(s0, s1, &a, t, q)))
        .unwrap()
        .clone();
    let (mut iters, mut converged) = projected_newton(s0, s1, &a, t, &mut s, 500);
    // the objective is smooth except where a whole side vanishes
    for _ in 0..4 {
        let Some(next) = cone_escape(s0, s1, &a, t, &s) else { break };
        s = next;
        let (it, conv) = projected_newton(s0, s1, &a, t, &mut s, 500);
        iters += it;
        converged = conv;
    }
    let upper = exact_phi(s0, s1, &a, t, &s);
    let rest: Vec<f64> = a.iter().zip(&s).map(|(ai, si)| (ai - si).max(0.0)).collect();

    // dual certificates
    let cands0 = [s0.norming(&s), s0.norming(&a)];
    let cands1 = [s1.norming(&rest), s1.norming(&a)];
    let scaled = |y: &[f64]| -> f64 {
        let scale = s0.dual_norm(y).max(s1.dual_norm(y) / t);
        if scale > 0.0 {
            a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>() / scale
        } else {
            0.0
        }
    };
    let mut lower = 0.0f64;
    for y0 in &cands0 {
        for y1 in &cands1 {
            let v: f64 = a.iter().zip(y0.iter().zip(y1)).map(|(ai, (u, w))| ai * u.min(t * w)).sum();
            lower = lower.max(v).max(scaled(y0)).max(scaled(y1));
        }
    }
    let tight = upper - lower <= 1e-9 * upper.max(1e-300);
    NormBracket::new(lower.min(upper), upper, SolverTag::ProjectedNewton, split_witness(x, &s))
        .with_iterations(iters, converged || tight)
}

/// Minimizes over coordinate `i` of `s` alone, by bisection on the sign of
/// the partial derivative.
fn coordinate_root(s0: &Side, s1: &Side, a: &[f64], t: f64, s: &mut [f64], i: usize) {
    let mut trial = s.to_vec();
    let mut slope = |v: f64| {
        trial[i] = v;
        kkt(s0, s1, a, t, &trial).1[i]
    };
    let (mut lo, mut hi) = (0.0, a[i]);
    if slope(lo) >= 0.0 {
        s[i] = lo;
        return;
    }
    if slope(hi) <= 0.0 {
        s[i] = hi;
        return;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    s[i] = if slope(hi).abs() < slope(lo).abs() { hi } else { lo };
}

/// A strictly better point off a vanishing side, if the split `s` sits on one
/// and is not optimal there.
fn cone_escape(s0: &Side, s1: &Side, a: &[f64], t: f64, s: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let rest: Vec<f64> = a.iter().zip(s).map(|(ai, si)| (ai - si).max(0.0)).collect();
    let mut g = vec![0.0; n];
    let near = |side: &Side, v: &[f64]| side.p != Exponent::Finite(1.0) && side.norm(v) <= 1e-9 * side.norm(a);
    // moving d from one side to the other changes K by about cost(d) - <gain, d>
    let (from_rest, base, d) = if near(s1, &rest) {
        s0.value_grad(a, 0.0, &mut g);
        (true, a.to_vec(), steepest(s1, &g.iter().map(|v| v / t).collect::<Vec<_>>(), a)?)
    } else if near(s0, s) {
        s1.value_grad(a, 0.0, &mut g);
        (false, vec![0.0; n], steepest(s0, &g.iter().map(|v| v * t).collect::<Vec<_>>(), a)?)
    } else {
        return None;
    };
    let fx = exact_phi(s0, s1, a, t, s);
    let emax = d.iter().zip(a).filter(|(di, _)| **di > 0.0).map(|(di, ai)| ai / di).fold(f64::INFINITY, f64::min);
    let mut eps = emax;
    for _ in 0..60 {
        let next: Vec<f64> = base
            .iter()
            .zip(&d)
            .zip(a)
            .map(|((si, di), ai)| if from_rest { si - eps * di } else { si + eps * di }.clamp(0.0, *ai))
            .collect();
        if exact_phi(s0, s1, a, t, &next) < fx * (1.0 - 1e-15) {
            return Some(next);
        }
        eps *= 0.5;
    }
    None
}

/// The nonnegative direction `d` supported where `a > 0` maximizing
/// `<g, d> / side(d)`, if that ratio exceeds one.
fn steepest(side: &Side, g: &[f64], a: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut d = vec![0.0; n];
    match side.p {
        Exponent::Finite(q) if q == 1.0 => {
            let k = (0..n).filter(|i| a[*i] > 0.0).max_by(|i, j| (g[*i] / side.w[*i]).total_cmp(&(g[*j] / side.w[*j])))?;
            d[k] = 1.0;
        }
        Exponent::Finite(q) => {
            for i in (0..n).filter(|i| a[*i] > 0.0 && g[*i] > 0.0) {
                d[i] = (g[i] / side.w[i]).powf(1.0 / (q - 1.0)) / side.w[i];
            }
        }
        Exponent::Infinity => {
            for i in (0..n).filter(|i| a[*i] > 0.0) {
                d[i] = 1.0 / side.w[i];
            }
        }
    }
    let gain: f64 = g.iter().zip(&d).map(|(gi, di)| gi * di).sum();
    let cost = side.norm(&d);
    (cost > 0.0 && gain > cost * (1.0 + 1e-12)).then_some(d)
}

fn split_witness(x: &[C64], s: &[f64]) -> Witness {
    let x0 = x
        .iter()
        .zip(s)
        .map(|(c, si)| if c.norm() == 0.0 { C64::new(0.0, 0.0) } else { c / c.norm() * si })
        .collect();
    Witness::Split { x0 }
}

/// `K` for moduli `a` when `s0` is a weighted `l_inf`: golden-section search over
/// the level, then a dual certificate. Returns `(lower, upper, split, iterations)`.
fn level_k(s0: &Side, s1: &Side, a: &[f64], t: f64) -> (f64, f64, Vec<f64>, usize) {
    let n = a.len();
    let at = |lam: f64| -> Vec<f64> { a.iter().zip(s0.w).map(|(ai, w)| ai.min(lam / w)).collect() };
    let phi = |lam: f64| exact_phi(s0, s1, a, t, &at(lam));
    let top = a.iter().zip(s0.w).map(|(ai, w)| ai * w).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, top);
    let mut iters = 0;
    let inner = if s1.p.is_infinite() {
        // piecewise linear: golden section pins the kink
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut m1, mut m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        let (mut f1, mut f2) = (phi(m1), phi(m2));
        while hi - lo > 1e-15 * top && iters < 200 {
            iters += 1;
            if f1 <= f2 {
                hi = m2;
                (m2, f2) = (m1, f1);
                m1 = hi - r * (hi - lo);
                f1 = phi(m1);
            } else {
                lo = m1;
                (m1, f1) = (m2, f2);
                m2 = lo + r * (hi - lo);
                f2 = phi(m2);
            }
        }
        vec![m1, m2]
    } else {
        // bisection on the sign of the slope, which is exact where values are flat
        let slope = |lam: f64| {
            let rest: Vec<f64> = a.iter().zip(&at(lam)).map(|(ai, si)| ai - si).collect();
            let mut g = vec![0.0; n];
            s1.value_grad(&rest, 0.0, &mut g);
            let pull: f64 = (0..n).filter(|&i| a[i] * s0.w[i] > lam).map(|i| g[i] / s0.w[i]).sum();
            1.0 - t * pull
        };
        while hi - lo > 1e-16 * top && iters < 200 {
            iters += 1;
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        vec![lo, hi]
    };
    let lam = [0.0, top].into_iter().chain(inner).min_by(|p, q| phi(*p).total_cmp(&phi(*q))).unwrap();
    let s = at(lam);
    let upper = phi(lam);
    let rest: Vec<f64> = a.iter().zip(&s).map(|(ai, si)| ai - si).collect();

    // y is feasible once scaled into both dual balls
    let value = |y: &[f64]| -> f64 {
        let scale = s0.dual_norm(y).max(s1.dual_norm(y) / t);
        if scale > 0.0 {
            a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>() / scale
        } else {
            0.0
        }
    };
    let mut lower: f64 = 0.0;
    for i in 0..n {
        let mut y = vec![0.0; n];
        y[i] = 1.0;
        lower = lower.max(value(&y));
    }
    // t * (norming functional of the remainder), then the first dual ball is
    // topped up on unclipped coordinates, highest level first, while the
    // second allows
    let g1 = s1.norming(&rest);
    let clipped = |i: usize| rest[i] > 1e-9 * a[i];
    let mut y: Vec<f64> = (0..n).map(|i| if clipped(i) { t * g1[i] } else { 0.0 }).collect();
    let mut order: Vec<usize> = (0..n).filter(|&i| !clipped(i)).collect();
    order.sort_by(|i, j| (a[*j] * s0.w[*j]).total_cmp(&(a[*i] * s0.w[*i])));
    for k in order {
        let slack = 1.0 - s0.dual_norm(&y);
        if slack <= 0.0 {
            break;
        }
        let fits = |d: f64| {
            let mut z = y.clone();
            z[k] += d;
            s1.dual_norm(&z) <= t * (1.0 + 1e-12)
        };
        let (mut lo, mut hi) = (0.0, slack * s0.w[k]);
        if fits(hi) {
            lo = hi;
        } else {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        y[k] += lo;
    }
    lower = lower.max(value(&y));
    if s1.p.is_infinite() {
        lower = lower.max(two_ball_lp(s0.w, s1.w, a, t));
    }
    (lower, upper, s, iters)
}

/// `max <a, y>` over `y >= 0` with `sum y_i / u_i <= 1` and `sum y_i / v_i <= t`,
/// by enumerating the vertices (at most two nonzero coordinates).
fn two_ball_lp(u: &[f64], v: &[f64], a: &[f64], t: f64) -> f64 {
    let n = a.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        best = best.max(a[i] * u[i].min(t * v[i]));
        for j in i + 1..n {
            let det = 1.0 / (u[i] * v[j]) - 1.0 / (u[j] * v[i]);
            if det == 0.0 {
                continue;
            }
            let yi = (1.0 / v[j] - t / u[j]) / det;
            let yj = (t / u[i] - 1.0 / v[i]) / det;
            if yi >= 0.0 && yj >= 0.0 {
                let y = [yi, yj];
                let scale = (yi / u[i] + yj / u[j]).max((yi / v[i] + yj / v[j]) / t).max(1.0);
                best = best.max((a[i] * y[0] + a[j] * y[1]) / scale);
            }
        }
    }
    best
}

struct SplitObjective<'a> {
    couple: &'a Couple,
    x: &'a [C64],
    t: f64,
}

impl SplitObjective<'_> {
    fn unpack(&self, v: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let x0: Vec<C64> = v.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
        let x1: Vec<C64> = self.x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        (x0, x1)
    }
}

impl SmoothObjective for SplitObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.x.len()
    }

    fn smooth(&self, v: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let (x0, x1) = self.unpack(v);
        let n = x0.len();
        let mut g0 = vec![C64::new(0.0, 0.0); n];
        let mut g1 = vec![C64::new(0.0, 0.0); n];
        let val = self.couple.space0().smooth_norm(&x0, mu, &mut g0)
            + self.t * self.couple.space1().smooth_norm(&x1, mu, &mut g1);
        for i in 0..n {
            let g = g0[i] - g1[i] * self.t;
            grad[2 * i] = g.re;
            grad[2 * i + 1] = g.im;
        }
        val
    }

    fn exact(&self, v: &[f64]) -> f64 {
        let (x0, x1) = self.unpack(v);
        self.couple.space0().norm_of(&x0) + self.t * self.couple.space1().norm_of(&x1)
    }
}

fn pack(x: &[C64]) -> Vec<f64> {
    x.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn generic_k(couple: &Couple, x: &[C64], t: f64) -> NormBracket {
    let obj = SplitObjective { couple, x, t };
    let half: Vec<C64> = x.iter().map(|c| c * 0.5).collect();
    let starts = vec![pack(x), vec![0.0; 2 * x.len()], pack(&half)];
    let opts = ContinuationOptions { keep: 3, ..ContinuationOptions::default() };
    let r = multistart(&obj, &starts, &opts);
    let (x0, x1) = obj.unpack(&r.best.x);
    let upper = r.best.value;

    // Subgradients of a norm have dual norm at most 1 in that norm.
    let (sp0, sp1) = (couple.space0(), couple.space1());
    let g0 = sp0.subgradient(&x0);
    let g1: Vec<C64> = sp1.subgradient(&x1).into_iter().map(|c| c * t).collect();
    let mid: Vec<C64> = g0.iter().zip(&g1).map(|(a, b)| (a + b) * 0.5).collect();
    let mut lower = 0.0f64;
    for (y, d0, d1) in [
        (&g0, 1.0f64, sp1.dual_norm_upper(&g0)),
        (&g1, sp0.dual_norm_upper(&g1), t),
        (&mid, sp0.dual_norm_upper(&mid), sp1.dual_norm_upper(&mid)),
    ] {
        let scale = d0.max(d1 / t);
        if scale > 0.0 {
            lower = lower.max(pairing(x, y).re / scale);
        }
    }
    NormBracket::new(lower.min(upper), upper, SolverTag::SmoothedMinimax, Witness::Split { x0 })
        .with_iterations(r.best.iterations, r.best.converged)
}

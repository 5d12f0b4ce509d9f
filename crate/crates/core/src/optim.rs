//! Small deterministic optimizers shared by the norm solvers.
//!
//! The interpolation norms are infima of convex, nonsmooth max-of-norms
//! objectives. They are minimized through log-sum-exp smoothing with a
//! decreasing temperature schedule, each stage solved by L-BFGS with Armijo
//! backtracking, and the exact (unsmoothed) objective tracked for the best
//! iterate. Every returned value is the exact objective at a returned point.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop when the relative decrease over `window` iterations is below this.
    pub rel_tol: f64,
    pub window: usize,
    pub grad_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { max_iter: 400, memory: 8, rel_tol: 1e-10, window: 20, grad_tol: 1e-14 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize a smooth function given as `f(x, grad) -> value`.
pub fn lbfgs<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if n == 0 || !fx.is_finite() {
        return Minimum { x, value: fx, iterations: 0, converged: true };
    }
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trail: VecDeque<f64> = VecDeque::new();
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut converged = false;
    let mut iters = 0;
    let mut first_step = true;
    while iters < opts.max_iter {
        iters += 1;
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= opts.grad_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(f64::MIN_POSITIVE) * fx.abs().max(1e-12) * 1e-2;
            d.iter_mut().for_each(|di| *di *= scale);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v * 1e-2 * fx.abs().max(1e-12) / gnorm).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            xn.iter_mut().zip(x.iter().zip(&d)).for_each(|(a, (b, c))| *a = b + step * c);
            let fnew = f(&xn, &mut gn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    hist.push_back((s, y, 1.0 / sy));
                    if hist.len() > opts.memory {
                        hist.pop_front();
                    }
                }
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                fx = fnew;
                accepted = true;
                break;
            }
            step *= if first_step { 0.1 } else { 0.5 };
        }
        first_step = false;
        if !accepted {
            if hist.is_empty() {
                converged = true;
                break;
            }
            hist.clear();
            continue;
        }
        trail.push_back(fx);
        if trail.len() > opts.window {
            let old = trail.pop_front().unwrap();
            if old - fx <= opts.rel_tol * fx.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
    }
    Minimum { x, value: fx, iterations: iters, converged }
}

/// A convex objective with a smoothed surrogate.
pub trait SmoothObjective: Sync {
    fn dim(&self) -> usize;
    /// Smoothed value at temperature `mu` (absolute scale), gradient written to `grad`.
    fn smooth(&self, v: &[f64], mu: f64, grad: &mut [f64]) -> f64;
    /// Exact objective.
    fn exact(&self, v: &[f64]) -> f64;
}

#[derive(Clone, Debug)]
pub struct ContinuationOptions {
    /// Temperatures relative to the current exact objective value.
    pub schedule: Vec<f64>,
    pub stage: LbfgsOptions,
    /// Number of starts kept after the first stage.
    pub keep: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            schedule: vec![3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5],
            stage: LbfgsOptions { max_iter: 150, window: 15, rel_tol: 1e-7, ..LbfgsOptions::default() },
            keep: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultistartResult {
    pub best: Minimum,
    pub best_start: usize,
    /// Exact objective of each start before optimization.
    pub start_values: Vec<f64>,
}

fn run_stage<O: SmoothObjective + ?Sized>(
    obj: &O,
    x: &[f64],
    rel_mu: f64,
    opts: &LbfgsOptions,
) -> Minimum {
    let scale = obj.exact(x).abs().max(1e-300);
    let mu = rel_mu * scale;
    let m = lbfgs(|v, g| obj.smooth(v, mu, g), x, opts);
    let exact = obj.exact(&m.x);
    Minimum { value: exact, ..m }
}

/// Minimize from several starts with a shared smoothing schedule; only the
/// `keep` best starts after the first stage proceed. The best exact value wins,
/// ties going to the lowest start index.
pub fn multistart<O: SmoothObjective + ?Sized>(
    obj: &O,
    starts: &[Vec<f64>],
    opts: &ContinuationOptions,
) -> MultistartResult {
    assert!(!starts.is_empty());
    let start_values: Vec<f64> = starts.iter().map(|s| obj.exact(s)).collect();
    let mut best: Vec<(usize, Minimum)> = starts
        .iter()
        .enumerate()
        .map(|(i, s)| (i, Minimum { x: s.clone(), value: start_values[i], iterations: 0, converged: false }))
        .collect();
    let mut candidates: Vec<(usize, Minimum)> = Vec::new();
    for (i, s) in starts.iter().enumerate() {
        let m = run_stage(obj, s, opts.schedule[0], &opts.stage);
        candidates.push((i, m));
    }
    candidates.sort_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)));
    candidates.truncate(opts.keep.max(1));
    let mut total_iters = 0;
    for (i, cand) in candidates.iter_mut() {
        let mut cur = cand.clone();
        let mut track = cand.clone();
        for &rel_mu in &opts.schedule[1..] {
            let m = run_stage(obj, &cur.x, rel_mu, &opts.stage);
            total_iters += m.iterations;
            if m.value < track.value {
                track = m.clone();
            }
            cur = m;
        }
        if track.value < best[*i].1.value {
            best[*i].1 = track;
        }
    }
    let (best_start, min) = best
        .into_iter()
        .fold(None::<(usize, Minimum)>, |acc, (i, m)| match acc {
            Some((j, a)) if a.value <= m.value => Some((j, a)),
            _ => Some((i, m)),
        })
        .unwrap();
    let converged = min.converged;
    MultistartResult {
        best: Minimum { iterations: total_iters, converged, ..min },
        best_start,
        start_values,
    }
}

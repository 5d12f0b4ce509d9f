//! The complex method on the annulus: `||x||_theta = inf ||f||_F` over Laurent
//! polynomials with `f(e^theta) = x`.
//!
//! The constraint is eliminated through `c_0 = x - sum_{k != 0} c_k e^(theta k)`;
//! the free variables are `d_k = c_k e^(max(k, 0))`, the size of term `k` on the
//! circle where it is largest. The grid maximum of the boundary norms is
//! smoothed (log-sum-exp over all grid points of both circles) and minimized by
//! continuation. Boundary values and gradients both go through the FFT.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kfunc::k_functional;
use super::lattice::{calderon_factorization, lattice_parts, lattice_theta_space};
use super::check_theta;
use crate::annulus::{boundary_norm_f_refined, radius, AnnulusSpec, CircleTransform, LaurentFamily};
use crate::error::{check_dim, Error, Result};
use crate::optim::{multistart, ContinuationOptions, LbfgsOptions, SmoothObjective};
use crate::spaces::{soft_max, weighted_lp_norm, Couple};
use crate::{seeds, NormBracket, SolverTag, Witness, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexSolverConfig {
    /// Total starts, structured ones first, then seeded perturbations.
    pub starts: usize,
    /// Starts carried past the first smoothing stage.
    pub keep: usize,
    /// Smoothing temperatures relative to the current objective.
    pub schedule: Vec<f64>,
    pub stage_iterations: usize,
    /// Relative size of the random perturbations.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for ComplexSolverConfig {
    fn default() -> Self {
        ComplexSolverConfig {
            starts: 6,
            keep: 1,
            schedule: vec![1e-2, 3e-3, 1e-3, 3e-4],
            stage_iterations: 80,
            perturbation: 0.3,
            seed: 0,
        }
    }
}

impl ComplexSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.keep == 0 || self.schedule.is_empty() || self.stage_iterations == 0 {
            return Err(Error::InvalidParameter("solver needs starts, keep, schedule and iterations > 0".into()));
        }
        if self.schedule.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("smoothing temperatures must be positive".into()));
        }
        Ok(())
    }
}

struct AnnulusObjective<'a> {
    couple: &'a Couple,
    x: &'a [C64],
    theta: f64,
    degree: usize,
    tr: CircleTransform,
}

impl AnnulusObjective<'_> {
    fn n(&self) -> usize {
        self.x.len()
    }

    fn ks(&self) -> impl Iterator<Item = i64> + '_ {
        let d = self.degree as i64;
        (-d..=d).filter(|k| *k != 0)
    }

    fn scale(k: i64) -> f64 {
        (k.max(0) as f64).exp()
    }

    fn family(&self, v: &[f64]) -> LaurentFamily {
        let n = self.n();
        let mut f = LaurentFamily::zeros(n, self.degree);
        let mut c0 = self.x.to_vec();
        for (idx, k) in self.ks().enumerate() {
            let s = Self::scale(k);
            let e = (self.theta * k as f64).exp();
            let c = f.coeff_mut(k);
            for i in 0..n {
                let b = 2 * (idx * n + i);
                c[i] = C64::new(v[b], v[b + 1]) / s;
                c0[i] -= c[i] * e;
            }
        }
        f.set_coeff(0, c0);
        f
    }

    fn pack(&self, f: &LaurentFamily) -> Vec<f64> {
        let n = self.n();
        let mut v = vec![0.0; 2 * n * 2 * self.degree];
        for (idx, k) in self.ks().enumerate() {
            if k.unsigned_abs() as usize > f.degree() {
                continue;
            }
            let s = Self::scale(k);
            for (i, c) in f.coeff(k).iter().enumerate() {
                let b = 2 * (idx * n + i);
                v[b] = c.re * s;
                v[b + 1] = c.im * s;
            }
        }
        v
    }

    /// Boundary values, circle-major then coordinate-major: `vals[j][i][m]`.
    fn boundary(&self, f: &LaurentFamily) -> [Vec<Vec<C64>>; 2] {
        [self.tr.synthesize(f, radius(0)), self.tr.synthesize(f, radius(1))]
    }
}

impl SmoothObjective for AnnulusObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.n() * 2 * self.degree
    }

    fn smooth(&self, v: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let n = self.n();
        let m = self.tr.size();
        let f = self.family(v);
        let vals = self.boundary(&f);
        let mut norms = vec![0.0; 2 * m];
        let mut g = vec![vec![C64::new(0.0, 0.0); n]; 2 * m];
        let mut z = vec![C64::new(0.0, 0.0); n];
        for j in 0..2 {
            let space = self.couple.space(j);
            for p in 0..m {
                for i in 0..n {
                    z[i] = vals[j][i][p];
                }
                norms[j * m + p] = space.smooth_norm(&z, mu, &mut g[j * m + p]);
            }
        }
        let (val, pi) = soft_max(&norms, mu);
        // direct[k][i]: gradient with respect to c_k ignoring the constraint
        let d = self.degree as i64;
        let mut direct = vec![vec![C64::new(0.0, 0.0); n]; 2 * self.degree + 1];
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for j in 0..2 {
            let r = radius(j);
            for i in 0..n {
                for p in 0..m {
                    buf[p] = g[j * m + p][i] * pi[j * m + p];
                }
                self.tr.forward_in_place(&mut buf);
                for k in -d..=d {
                    direct[(k + d) as usize][i] += buf[k.rem_euclid(m as i64) as usize] * r.powi(k as i32);
                }
            }
        }
        let g0 = direct[d as usize].clone();
        for (idx, k) in self.ks().enumerate() {
            let s = Self::scale(k);
            let e = (self.theta * k as f64).exp();
            for i in 0..n {
                let gc = (direct[(k + d) as usize][i] - g0[i] * e) / s;
                let b = 2 * (idx * n + i);
                grad[b] = gc.re;
                grad[b + 1] = gc.im;
            }
        }
        val
    }

    fn exact(&self, v: &[f64]) -> f64 {
        let n = self.n();
        let f = self.family(v);
        let vals = self.boundary(&f);
        let mut z = vec![C64::new(0.0, 0.0); n];
        let mut best = 0.0f64;
        for (j, circle) in vals.iter().enumerate() {
            let space = self.couple.space(j);
            for p in 0..self.tr.size() {
                for i in 0..n {
                    z[i] = circle[i][p];
                }
                best = best.max(space.norm_of(&z));
            }
        }
        best
    }
}

/// Structured starts for lattice couples, built from an optimal factorization
/// `|x_i| = u_i^(1-theta) v_i^theta` with `gamma_i = ln(v_i / u_i)`.
fn lattice_witnesses(couple: &Couple, theta: f64, x: &[C64], degree: usize) -> Result<Vec<LaurentFamily>> {
    let fac = calderon_factorization(couple, theta, x)?;
    let n = x.len();
    let kmax = degree as f64;
    let gamma: Vec<Option<f64>> = (0..n).map(|i| fac.log_ratio(i)).collect();
    let mut out = Vec::new();

    // Gaussian mixture of neighbouring powers around gamma_i.
    if degree > 6 {
        let sigma = 0.35;
        let mut f = LaurentFamily::zeros(n, degree);
        let d = degree as i64;
        for i in 0..n {
            let Some(g) = gamma[i] else { continue };
            let centre = g.clamp(-(kmax - 6.0), kmax - 6.0) - sigma / 2.0;
            let expo = |k: i64| -(k as f64 - centre).powi(2) / (2.0 * sigma);
            let lz = log_sum_exp((-d..=d).map(|k| expo(k) + theta * k as f64));
            for k in -d..=d {
                f.coeff_mut(k)[i] = x[i] * (expo(k) - lz).exp();
            }
        }
        out.push(f);
    }

    // One monomial per coordinate, exponents refined greedily on the closed-form F-norm.
    let ((p0, w0), (p1, w1)) = lattice_parts(couple)?;
    let a: Vec<f64> = x.iter().map(|c| c.norm()).collect();
    let fnorm = |m: &[i64]| {
        let inner = weighted_lp_norm(p0, w0, a.iter().zip(m).map(|(ai, mi)| ai * (-theta * *mi as f64).exp()));
        let outer = weighted_lp_norm(p1, w1, a.iter().zip(m).map(|(ai, mi)| ai * ((1.0 - theta) * *mi as f64).exp()));
        inner.max(outer)
    };
    let d = degree as i64;
    let mut m: Vec<i64> = gamma.iter().map(|g| g.map_or(0, |g| (g.round() as i64).clamp(-d, d))).collect();
    let mut cur = fnorm(&m);
    for _ in 0..20 {
        let mut improved = false;
        for i in 0..n {
            if gamma[i].is_none() {
                continue;
            }
            for step in [-1, 1] {
                let cand = m[i] + step;
                if cand.abs() > d {
                    continue;
                }
                let old = m[i];
                m[i] = cand;
                let v = fnorm(&m);
                if v < cur {
                    cur = v;
                    improved = true;
                } else {
                    m[i] = old;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let mut f = LaurentFamily::zeros(n, degree);
    for i in 0..n {
        f.coeff_mut(m[i])[i] = x[i] * (-theta * m[i] as f64).exp();
    }
    out.push(f);
    Ok(out)
}

fn log_sum_exp(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mx + v.iter().map(|a| (a - mx).exp()).sum::<f64>().ln()
}

/// `sup_t t^(-theta) K(t, x)` over `t = e^s`, `s` in `[-4, 4]`: every analytic
/// family through `x` has `K(t, x) <= t^theta ||f||_F` by the three circles
/// theorem applied to `<f(z), y>`.
pub fn complex_norm_lower(couple: &Couple, theta: f64, x: &[C64]) -> Result<f64> {
    check_dim(couple.dim(), x.len())?;
    check_theta(theta)?;
    let mut best = 0.0f64;
    for s in -16..=16 {
        let t = (s as f64 / 4.0).exp();
        let k = k_functional(couple, x, t)?;
        best = best.max(k.lower * t.powf(-theta));
    }
    Ok(best)
}

pub fn complex_norm_upper(
    couple: &Couple,
    theta: f64,
    x: &[C64],
    degree: usize,
    spec: &AnnulusSpec,
    cfg: &ComplexSolverConfig,
) -> Result<NormBracket> {
    complex_norm_upper_warm(couple, theta, x, degree, spec, cfg, None)
}

/// As [`complex_norm_upper`], also starting from a feasible family of lower
/// degree; the result is then never worse than `warm`.
pub fn complex_norm_upper_warm(
    couple: &Couple,
    theta: f64,
    x: &[C64],
    degree: usize,
    spec: &AnnulusSpec,
    cfg: &ComplexSolverConfig,
    warm: Option<&LaurentFamily>,
) -> Result<NormBracket> {
    check_dim(couple.dim(), x.len())?;
    check_theta(theta)?;
    spec.check_degree(degree)?;
    cfg.validate()?;
    if theta == 0.0 || theta == 1.0 {
        let j = theta as usize;
        let v = couple.space(j).norm_of(x);
        return Ok(NormBracket::exact(v, SolverTag::Exact)
            .with_witness(Witness::Family { family: LaurentFamily::constant(x) }));
    }
    let n = x.len();
    if x.iter().all(|c| c.norm() == 0.0) {
        return Ok(NormBracket::exact(0.0, SolverTag::Exact)
            .with_witness(Witness::Family { family: LaurentFamily::zeros(n, degree) }));
    }
    if let Some(w) = warm {
        check_dim(n, w.dim())?;
        if w.degree() > degree {
            return Err(Error::InvalidParameter(format!("warm start degree {} exceeds {degree}", w.degree())));
        }
    }
    let lower = if couple.is_lattice() {
        lattice_theta_space(couple, theta)?.norm_of(x)
    } else {
        complex_norm_lower(couple, theta, x)?
    };
    if degree == 0 {
        let f = LaurentFamily::constant(x);
        let upper = boundary_norm_f_refined(&f, couple)?;
        return Ok(NormBracket::new(lower, upper, SolverTag::SmoothedMinimax, Witness::Family { family: f }));
    }

    let obj = AnnulusObjective { couple, x, theta, degree, tr: CircleTransform::new(spec.points()) };
    let mut structured = vec![LaurentFamily::constant(x).padded(degree)];
    if couple.is_lattice() {
        structured.extend(lattice_witnesses(couple, theta, x, degree)?);
    }
    let warm_padded = warm.map(|w| w.padded(degree));
    if let Some(w) = &warm_padded {
        structured.push(w.clone());
    }
    let mut starts: Vec<Vec<f64>> = structured.iter().map(|f| obj.pack(f)).collect();
    let base = starts
        .iter()
        .min_by(|a, b| obj.exact(a).total_cmp(&obj.exact(b)))
        .cloned()
        .unwrap_or_else(|| vec![0.0; obj.dim()]);
    let amp = cfg.perturbation * x.iter().map(|c| c.norm()).fold(0.0, f64::max) / (2.0 * degree as f64).sqrt();
    let mut idx = 0;
    while starts.len() < cfg.starts {
        let mut rng = seeds::child_rng(cfg.seed, idx);
        let v = base.iter().map(|b| b + amp * rng.sample::<f64, _>(StandardNormal)).collect();
        starts.push(v);
        idx += 1;
    }
    starts.truncate(cfg.starts.max(structured.len()));

    let opts = ContinuationOptions {
        schedule: cfg.schedule.clone(),
        stage: LbfgsOptions { max_iter: cfg.stage_iterations, window: 15, rel_tol: 1e-7, ..LbfgsOptions::default() },
        keep: cfg.keep,
    };
    let res = multistart(&obj, &starts, &opts);

    // Report the best refined F-norm among the optimized family and the structured starts.
    let mut best_f = obj.family(&res.best.x);
    let mut upper = boundary_norm_f_refined(&best_f, couple)?;
    let grid_best = res.best.value;
    for f in structured {
        if obj.exact(&obj.pack(&f)) > 1.05 * grid_best {
            continue;
        }
        let v = boundary_norm_f_refined(&f, couple)?;
        if v < upper {
            upper = v;
            best_f = f;
        }
    }
    if let Some(w) = &warm_padded {
        let v = boundary_norm_f_refined(w, couple)?;
        if v < upper {
            upper = v;
            best_f = w.clone();
        }
    }
    Ok(NormBracket::new(lower.min(upper), upper, SolverTag::SmoothedMinimax, Witness::Family { family: best_f })
        .with_iterations(res.best.iterations, res.best.converged))
}

//! Peetre and Gustavsson–Peetre norms over representations `x = sum_{|k| <= K} x_k`.
//!
//! For a representation the endpoint quantity is
//! `S_j = sup_{|lambda_k| <= 1} ||sum_k lambda_k e^((j - theta) k) x_k||_{X_j}`, which
//! phase alignment evaluates exactly: the weighted `l_p` norm of
//! `sum_k e^((j - theta) k) |x_k|` for lattices, and
//! `max_l sum_k e^((j - theta) k) |<a_l, x_k>|` for polytope norms.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kfunc::Side;
use super::lattice::{calderon_factorization, lattice_theta_space};
use super::{check_theta, complex_norm_lower, Representation};
use crate::error::{check_dim, Error, Result};
use crate::optim::{multistart, ContinuationOptions, LbfgsOptions, SmoothObjective};
use crate::spaces::{apply, soft_max, Couple, NormModel};
use crate::{seeds, NormBracket, SolverTag, Witness, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeetreConfig {
    pub starts: usize,
    pub keep: usize,
    pub schedule: Vec<f64>,
    pub stage_iterations: usize,
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for PeetreConfig {
    fn default() -> Self {
        PeetreConfig {
            starts: 4,
            keep: 2,
            schedule: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5],
            stage_iterations: 200,
            perturbation: 0.2,
            seed: 0,
        }
    }
}

impl PeetreConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.keep == 0 || self.schedule.is_empty() || self.stage_iterations == 0 {
            return Err(Error::InvalidParameter("solver needs starts, keep, schedule and iterations > 0".into()));
        }
        Ok(())
    }
}

fn smooth_abs(v: C64, mu: f64) -> f64 {
    if mu > 0.0 {
        (v.norm_sqr() + mu * mu).sqrt()
    } else {
        v.norm()
    }
}

/// `S_j` restricted to the terms with `mask[k + K]`, summed in increasing `k`.
fn aligned_sum(space: &NormModel, j: usize, theta: f64, rep: &Representation, mask: &[bool]) -> f64 {
    let w = rep.window as i64;
    let factor = |k: i64| ((j as f64 - theta) * k as f64).exp();
    match space {
        NormModel::WeightedLp { p, weights } => {
            let n = weights.len();
            let mut a = vec![0.0; n];
            for k in -w..=w {
                if !mask[(k + w) as usize] {
                    continue;
                }
                let e = factor(k);
                for (ai, c) in a.iter_mut().zip(rep.term(k)) {
                    *ai += e * c.norm();
                }
            }
            Side { p: *p, w: weights }.norm(&a)
        }
        NormModel::Polytope { functionals, .. } => functionals
            .iter()
            .map(|row| {
                let mut s = 0.0;
                for k in -w..=w {
                    if mask[(k + w) as usize] {
                        s += factor(k) * apply(row, rep.term(k)).norm();
                    }
                }
                s
            })
            .fold(0.0, f64::max),
    }
}

/// `max_j S_j` for a representation.
pub fn peetre_objective(couple: &Couple, theta: f64, rep: &Representation) -> Result<f64> {
    check_dim(couple.dim(), rep.terms[0].len())?;
    let mask = vec![true; rep.terms.len()];
    Ok((0..2).map(|j| aligned_sum(couple.space(j), j, theta, rep, &mask)).fold(0.0, f64::max))
}

/// `max_j sup_F S_j(F)` over subsets `F` of the window: exhaustive when at most
/// 12 terms are nonzero, otherwise greedy removal from the full set.
fn subset_objective(couple: &Couple, theta: f64, rep: &Representation) -> f64 {
    let len = rep.terms.len();
    let live: Vec<usize> = (0..len).filter(|&i| rep.terms[i].iter().any(|c| c.norm() > 0.0)).collect();
    let mut best = 0.0f64;
    for j in 0..2 {
        let space = couple.space(j);
        let eval = |mask: &[bool]| aligned_sum(space, j, theta, rep, mask);
        if live.len() <= 12 {
            for bits in 0u32..(1 << live.len()) {
                let mut mask = vec![false; len];
                for (b, &i) in live.iter().enumerate() {
                    mask[i] = bits >> b & 1 == 1;
                }
                best = best.max(eval(&mask));
            }
        } else {
            let mut mask = vec![false; len];
            live.iter().for_each(|&i| mask[i] = true);
            let mut cur = eval(&mask);
            loop {
                let mut improved = false;
                for &i in &live {
                    mask[i] = !mask[i];
                    let v = eval(&mask);
                    if v > cur {
                        cur = v;
                        improved = true;
                    } else {
                        mask[i] = !mask[i];
                    }
                }
                if !improved {
                    break;
                }
            }
            best = best.max(cur);
        }
    }
    best
}

struct PeetreObjective<'a> {
    couple: &'a Couple,
    x: &'a [C64],
    theta: f64,
    window: usize,
}

impl PeetreObjective<'_> {
    fn ks(&self) -> impl Iterator<Item = i64> + '_ {
        let w = self.window as i64;
        (-w..=w).filter(|k| *k != 0)
    }

    fn scale(&self, k: i64) -> f64 {
        let kf = k as f64;
        (-self.theta * kf).exp().max(((1.0 - self.theta) * kf).exp())
    }

    fn representation(&self, v: &[f64]) -> Representation {
        let n = self.x.len();
        let w = self.window as i64;
        let mut terms = vec![vec![C64::new(0.0, 0.0); n]; 2 * self.window + 1];
        let mut x0 = self.x.to_vec();
        for (idx, k) in self.ks().enumerate() {
            let s = self.scale(k);
            for i in 0..n {
                let b = 2 * (idx * n + i);
                let c = C64::new(v[b], v[b + 1]) / s;
                terms[(k + w) as usize][i] = c;
                x0[i] -= c;
            }
        }
        terms[w as usize] = x0;
        Representation { theta: self.theta, window: self.window, terms }
    }

    fn pack(&self, rep: &Representation) -> Vec<f64> {
        let n = self.x.len();
        let mut v = vec![0.0; self.dim()];
        for (idx, k) in self.ks().enumerate() {
            let s = self.scale(k);
            for (i, c) in rep.term(k).iter().enumerate() {
                let b = 2 * (idx * n + i);
                v[b] = c.re * s;
                v[b + 1] = c.im * s;
            }
        }
        v
    }

    /// Smoothed `S_j` with its gradient with respect to every term.
    fn smooth_side(&self, j: usize, rep: &Representation, mu: f64, grad: &mut [Vec<C64>]) -> f64 {
        let w = self.window as i64;
        let factor = |k: i64| ((j as f64 - self.theta) * k as f64).exp();
        match self.couple.space(j) {
            NormModel::WeightedLp { p, weights } => {
                let n = weights.len();
                let mut a = vec![0.0; n];
                for k in -w..=w {
                    let e = factor(k);
                    for (ai, c) in a.iter_mut().zip(rep.term(k)) {
                        *ai += e * smooth_abs(*c, mu);
                    }
                }
                let mut ga = vec![0.0; n];
                let val = Side { p: *p, w: weights }.value_grad(&a, mu, &mut ga);
                for k in -w..=w {
                    let e = factor(k);
                    for (i, c) in rep.term(k).iter().enumerate() {
                        let m = smooth_abs(*c, mu);
                        grad[(k + w) as usize][i] = if m > 0.0 { c * (ga[i] * e / m) } else { C64::new(0.0, 0.0) };
                    }
                }
                val
            }
            NormModel::Polytope { functionals, .. } => {
                let b: Vec<Vec<C64>> = functionals
                    .iter()
                    .map(|row| (-w..=w).map(|k| apply(row, rep.term(k))).collect())
                    .collect();
                let q: Vec<f64> = b
                    .iter()
                    .map(|bl| (-w..=w).zip(bl).map(|(k, v)| factor(k) * smooth_abs(*v, mu)).sum())
                    .collect();
                let (val, pi) = soft_max(&q, mu);
                grad.iter_mut().for_each(|g| g.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0)));
                for ((row, bl), pl) in functionals.iter().zip(&b).zip(&pi) {
                    if *pl == 0.0 {
                        continue;
                    }
                    for (idx, k) in (-w..=w).enumerate() {
                        let m = smooth_abs(bl[idx], mu);
                        if m == 0.0 {
                            continue;
                        }
                        let coef = bl[idx] * (pl * factor(k) / m);
                        for (g, a) in grad[idx].iter_mut().zip(row) {
                            *g += a.conj() * coef;
                        }
                    }
                }
                val
            }
        }
    }
}

impl SmoothObjective for PeetreObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.x.len() * 2 * self.window
    }

    fn smooth(&self, v: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let n = self.x.len();
        let w = self.window as i64;
        let rep = self.representation(v);
        let len = 2 * self.window + 1;
        let mut g = [vec![vec![C64::new(0.0, 0.0); n]; len], vec![vec![C64::new(0.0, 0.0); n]; len]];
        let s = [self.smooth_side(0, &rep, mu, &mut g[0]), self.smooth_side(1, &rep, mu, &mut g[1])];
        let (val, pi) = soft_max(&s, mu);
        for (idx, k) in self.ks().enumerate() {
            let sc = self.scale(k);
            for i in 0..n {
                let mut gc = C64::new(0.0, 0.0);
                for j in 0..2 {
                    gc += (g[j][(k + w) as usize][i] - g[j][w as usize][i]) * pi[j];
                }
                gc /= sc;
                let b = 2 * (idx * n + i);
                grad[b] = gc.re;
                grad[b + 1] = gc.im;
            }
        }
        val
    }

    fn exact(&self, v: &[f64]) -> f64 {
        peetre_objective(self.couple, self.theta, &self.representation(v)).expect("dimension checked")
    }
}

/// Terms split between `floor(gamma_i)` and the next power, `gamma_i = ln(v_i / u_i)`
/// from an optimal lattice factorization.
fn chord_witness(couple: &Couple, theta: f64, x: &[C64], window: usize) -> Result<Representation> {
    let fac = calderon_factorization(couple, theta, x)?;
    let n = x.len();
    let w = window as i64;
    let mut terms = vec![vec![C64::new(0.0, 0.0); n]; 2 * window + 1];
    for i in 0..n {
        let Some(g) = fac.log_ratio(i) else { continue };
        if w == 0 {
            terms[0][i] = x[i];
            continue;
        }
        let g = g.clamp(-(w as f64), (w - 1) as f64);
        let k = g.floor() as i64;
        let lam = g - k as f64;
        terms[(k + w) as usize][i] += x[i] * (1.0 - lam);
        terms[(k + 1 + w) as usize][i] += x[i] * lam;
    }
    Ok(Representation { theta, window, terms })
}

fn theta_lower(couple: &Couple, theta: f64, x: &[C64]) -> Result<f64> {
    if couple.is_lattice() {
        Ok(lattice_theta_space(couple, theta)?.norm_of(x))
    } else {
        complex_norm_lower(couple, theta, x)
    }
}

/// Upper bound for `||x||_<X0, X1>_theta` over representations in the window `[-K, K]`;
/// the lower end is a lower bound for the complex norm, which the Peetre norm dominates.
pub fn peetre_norm_upper(couple: &Couple, theta: f64, x: &[C64], window: usize, cfg: &PeetreConfig) -> Result<NormBracket> {
    check_dim(couple.dim(), x.len())?;
    check_theta(theta)?;
    cfg.validate()?;
    if theta == 0.0 || theta == 1.0 {
        return Err(Error::InvalidParameter("Peetre norms need 0 < theta < 1".into()));
    }
    let trivial = Representation::trivial(theta, x);
    if x.iter().all(|c| c.norm() == 0.0) {
        let rep = Representation { theta, window, terms: vec![x.to_vec(); 2 * window + 1] };
        return Ok(NormBracket::exact(0.0, SolverTag::Exact).with_witness(Witness::Representation { representation: rep }));
    }
    let lower = theta_lower(couple, theta, x)?;
    if window == 0 {
        let v = peetre_objective(couple, theta, &trivial)?;
        return Ok(NormBracket::new(lower, v, SolverTag::Exact, Witness::Representation { representation: trivial }));
    }
    let obj = PeetreObjective { couple, x, theta, window };
    let mut structured = vec![vec![0.0; obj.dim()]];
    if couple.is_lattice() {
        structured.push(obj.pack(&chord_witness(couple, theta, x, window)?));
    }
    let base = structured
        .iter()
        .min_by(|a, b| obj.exact(a).total_cmp(&obj.exact(b)))
        .cloned()
        .unwrap();
    let amp = cfg.perturbation * x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut starts = structured.clone();
    let mut idx = 0;
    while starts.len() < cfg.starts {
        let mut rng = seeds::child_rng(cfg.seed, idx);
        starts.push(base.iter().map(|b| b + amp * rng.sample::<f64, _>(StandardNormal)).collect());
        idx += 1;
    }
    let opts = ContinuationOptions {
        schedule: cfg.schedule.clone(),
        stage: LbfgsOptions { max_iter: cfg.stage_iterations, window: 15, rel_tol: 1e-8, ..LbfgsOptions::default() },
        keep: cfg.keep,
    };
    let res = multistart(&obj, &starts, &opts);
    let rep = obj.representation(&res.best.x);
    let upper = peetre_objective(couple, theta, &rep)?;
    Ok(NormBracket::new(lower.min(upper), upper, SolverTag::SmoothedMinimax, Witness::Representation { representation: rep })
        .with_iterations(res.best.iterations, res.best.converged))
}

/// Gustavsson–Peetre norm over the same window. Restricting a finite sum to a
/// subset never increases the aligned moduli, so the subset supremum equals the
/// Peetre objective; it is evaluated separately and checked against it.
pub fn gp_norm_upper(couple: &Couple, theta: f64, x: &[C64], window: usize, cfg: &PeetreConfig) -> Result<NormBracket> {
    let mut b = peetre_norm_upper(couple, theta, x, window, cfg)?;
    let Witness::Representation { representation } = &b.witness else {
        return Ok(b);
    };
    let sub = subset_objective(couple, theta, representation);
    assert!(
        (sub - b.upper).abs() <= 1e-12 * b.upper.max(f64::MIN_POSITIVE),
        "subset supremum {sub} differs from the aligned sum {}",
        b.upper
    );
    b.upper = sub.max(b.upper);
    b.lower = b.lower.min(b.upper);
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Exponent, GenConfig};
    use proptest::prelude::*;
    use rand::Rng;

    fn lp(p: Exponent, w: Vec<f64>) -> NormModel {
        NormModel::weighted_lp(p, w).unwrap()
    }

    #[test]
    fn identical_endpoints() {
        let sp = lp(Exponent::Finite(3.0), vec![1.0, 0.5]);
        let cp = Couple::new(sp.clone(), sp.clone()).unwrap();
        let x = vec![C64::new(1.0, 1.0), C64::new(-2.0, 0.0)];
        let b = peetre_norm_upper(&cp, 0.4, &x, 4, &PeetreConfig::default()).unwrap();
        assert!((b.upper - sp.norm_of(&x)).abs() < 1e-7 * sp.norm_of(&x));
    }

    #[test]
    fn one_term_bound() {
        let cfg = GenConfig { seed: 31, polytope_prob: 0.5, ..GenConfig::default() };
        for i in 0..6 {
            let cp = cfg.couple_at(i);
            let x = cfg.random_vector(cp.dim());
            let cap = cp.intersection_norm(&x).unwrap();
            let rep = Representation::trivial(0.5, &x);
            assert!((peetre_objective(&cp, 0.5, &rep).unwrap() - cap).abs() <= 1e-12 * cap);
            let b = peetre_norm_upper(&cp, 0.5, &x, 3, &PeetreConfig::default()).unwrap();
            assert!(b.upper <= cap * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lattice_instance_is_close_to_the_oracle() {
        let cp = Couple::new(lp(Exponent::Finite(1.0), vec![1.0, 3.0]), lp(Exponent::Finite(4.0), vec![2.5, 0.4])).unwrap();
        let x = vec![C64::new(0.8, -0.6), C64::new(0.1, 1.3)];
        let oracle = lattice_theta_space(&cp, 0.5).unwrap().norm_of(&x);
        let b = peetre_norm_upper(&cp, 0.5, &x, 12, &PeetreConfig::default()).unwrap();
        let ratio = b.upper / oracle;
        assert!(ratio >= 1.0 - 1e-9 && ratio <= 1.1, "ratio {ratio}");
        let Witness::Representation { representation } = &b.witness else { panic!() };
        assert!(representation.defect(&x) < 1e-12);
    }

    #[test]
    fn gp_equals_peetre_on_lattices() {
        let cp = Couple::new(lp(Exponent::Infinity, vec![1.0, 2.0]), lp(Exponent::Finite(1.5), vec![0.3, 1.0])).unwrap();
        let x = vec![C64::new(0.5, 0.5), C64::new(-1.0, 0.2)];
        let cfg = PeetreConfig { stage_iterations: 80, ..PeetreConfig::default() };
        let p = peetre_norm_upper(&cp, 0.3, &x, 5, &cfg).unwrap();
        let g = gp_norm_upper(&cp, 0.3, &x, 5, &cfg).unwrap();
        assert!((p.upper - g.upper).abs() <= 1e-12 * p.upper);
        let z = gp_norm_upper(&cp, 0.3, &[C64::new(0.0, 0.0); 2], 5, &cfg).unwrap();
        assert_eq!(z.upper, 0.0);
    }

    /// Subset supremum by explicit enumeration of subsets and phases on a polytope couple.
    #[test]
    fn polytope_subset_supremum_dominates() {
        let cfg = GenConfig { seed: 4, dim_min: 2, dim_max: 2, polytope_prob: 1.0, ..GenConfig::default() };
        let cp = cfg.couple_at(0);
        let mut rng = seeds::rng(77);
        let window = 2;
        let terms: Vec<Vec<C64>> = (0..2 * window + 1)
            .map(|_| (0..2).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
            .collect();
        let rep = Representation::new(0.5, window, terms).unwrap();
        let peetre = peetre_objective(&cp, 0.5, &rep).unwrap();
        assert!(subset_objective(&cp, 0.5, &rep) >= peetre - 1e-12);
        // brute force over subsets and a 12-point phase grid per term
        let mut brute = 0.0f64;
        let phases: Vec<C64> = (0..12).map(|a| C64::from_polar(1.0, a as f64 * std::f64::consts::PI / 6.0)).collect();
        for j in 0..2 {
            for idx in 0..12usize.pow(5) {
                let mut code = idx;
                let mut s = vec![C64::new(0.0, 0.0); 2];
                for k in -2i64..=2 {
                    let lam = phases[code % 12];
                    code /= 12;
                    let e = ((j as f64 - 0.5) * k as f64).exp();
                    for (a, b) in s.iter_mut().zip(rep.term(k)) {
                        *a += lam * e * b;
                    }
                }
                brute = brute.max(cp.space(j).norm_of(&s));
            }
        }
        assert!(brute <= peetre * (1.0 + 1e-12));
        assert!(brute >= peetre * (1.0 - 0.05));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn peetre_dominates_the_oracle(seed in any::<u64>(), theta in 0.1f64..0.9) {
            let cfg = GenConfig { seed, dim_max: 3, ..GenConfig::default() };
            let cp = cfg.random_couple();
            let x = cfg.random_vector(cp.dim());
            let pc = PeetreConfig { stage_iterations: 60, schedule: vec![1e-2, 1e-3, 1e-4], ..PeetreConfig::default() };
            let b = peetre_norm_upper(&cp, theta, &x, 6, &pc).unwrap();
            let oracle = lattice_theta_space(&cp, theta).unwrap().norm_of(&x);
            prop_assert!(b.upper >= oracle - 1e-6 * oracle.max(1.0));
            prop_assert!(b.upper <= cp.intersection_norm(&x).unwrap() * (1.0 + 1e-12));
        }
    }
}

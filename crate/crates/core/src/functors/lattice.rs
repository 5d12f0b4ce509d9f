//! Closed forms for lattice couples and the log-coordinate Calderón product solver.

use nalgebra::{DMatrix, DVector};

use super::{check_theta, ThetaSpec};
use crate::error::{check_dim, Error, Result};
use crate::spaces::{weighted_lp_norm, Couple, Exponent, NormModel};
use crate::{NormBracket, SolverTag, Witness, C64};

pub(crate) fn lattice_parts(couple: &Couple) -> Result<((Exponent, &[f64]), (Exponent, &[f64]))> {
    match (couple.space0(), couple.space1()) {
        (NormModel::WeightedLp { p: p0, weights: w0 }, NormModel::WeightedLp { p: p1, weights: w1 }) => {
            Ok(((*p0, w0), (*p1, w1)))
        }
        _ => Err(Error::UnsupportedKind("a couple with a polytope endpoint")),
    }
}

/// The weighted `l_p` space `X0^(1-theta) X1^theta`.
pub fn lattice_theta_space(couple: &Couple, theta: f64) -> Result<NormModel> {
    check_theta(theta)?;
    let ((p0, w0), (p1, w1)) = lattice_parts(couple)?;
    if theta == 0.0 {
        return Ok(couple.space0().clone());
    }
    if theta == 1.0 {
        return Ok(couple.space1().clone());
    }
    let p = if p0 == p1 { p0 } else { Exponent::from_reciprocal((1.0 - theta) * p0.reciprocal() + theta * p1.reciprocal()) };
    let w = w0
        .iter()
        .zip(w1)
        .map(|(a, b)| if a == b { *a } else { ((1.0 - theta) * a.ln() + theta * b.ln()).exp() })
        .collect();
    NormModel::weighted_lp(p, w)
}

/// An optimal factorization `|x_i| = u_i^(1-theta) v_i^theta` with
/// `||u||_0 = ||v||_1 = ||x||_theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub norm: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Factorization {
    /// `ln(v_i / u_i)`, defined on the support of `x`.
    pub fn log_ratio(&self, i: usize) -> Option<f64> {
        (self.u[i] > 0.0 && self.v[i] > 0.0).then(|| (self.v[i] / self.u[i]).ln())
    }
}

pub fn calderon_factorization(couple: &Couple, theta: f64, x: &[C64]) -> Result<Factorization> {
    check_dim(couple.dim(), x.len())?;
    let space = lattice_theta_space(couple, theta)?;
    let ((p0, w0), (p1, w1)) = lattice_parts(couple)?;
    let NormModel::WeightedLp { p, weights: wt } = &space else { unreachable!() };
    let norm = space.norm_of(x);
    let n = x.len();
    if norm == 0.0 {
        return Ok(Factorization { norm, u: vec![0.0; n], v: vec![0.0; n] });
    }
    let rt = p.reciprocal();
    let (a, b) = if rt == 0.0 { (1.0, 1.0) } else { (p0.reciprocal() / rt, p1.reciprocal() / rt) };
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        let y = wt[i] * x[i].norm() / norm;
        if y > 0.0 {
            u[i] = norm * y.powf(a) / w0[i];
            v[i] = norm * y.powf(b) / w1[i];
        }
    }
    Ok(Factorization { norm, u, v })
}

/// `(1/p) ln sum exp(p (c_i + ln w_i))` with softmax weights; the max when `p` is infinite.
fn log_norm(p: f64, c: &[f64], lw: &[f64], pi: &mut [f64]) -> f64 {
    let z: Vec<f64> = c.iter().zip(lw).map(|(a, b)| p * (a + b)).collect();
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (q, zi) in pi.iter_mut().zip(&z) {
        *q = (zi - zmax).exp();
        s += *q;
    }
    pi.iter_mut().for_each(|q| *q /= s);
    (zmax + s.ln()) / p
}

struct LogProblem {
    theta: f64,
    ell: Vec<f64>,
    lw0: Vec<f64>,
    lw1: Vec<f64>,
}

impl LogProblem {
    fn b(&self, a: &[f64]) -> Vec<f64> {
        let t = self.theta;
        a.iter().zip(&self.ell).map(|(ai, l)| (l - (1.0 - t) * ai) / t).collect()
    }

    /// Value, gradient and Hessian at effective exponents `(q0, q1)`.
    fn eval(&self, q0: f64, q1: f64, a: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let m = a.len();
        let t = self.theta;
        let b = self.b(a);
        let mut pi0 = vec![0.0; m];
        let mut pi1 = vec![0.0; m];
        let l0 = log_norm(q0, a, &self.lw0, &mut pi0);
        let l1 = log_norm(q1, &b, &self.lw1, &mut pi1);
        let val = (1.0 - t) * l0 + t * l1;
        let g = DVector::from_fn(m, |i, _| (1.0 - t) * (pi0[i] - pi1[i]));
        let c = (1.0 - t) / t;
        let h = DMatrix::from_fn(m, m, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            let h0 = q0 * (d * pi0[i] - pi0[i] * pi0[j]);
            let h1 = q1 * (d * pi1[i] - pi1[i] * pi1[j]);
            (1.0 - t) * (h0 + c * h1)
        });
        (val, g, h)
    }

    fn value(&self, q0: f64, q1: f64, a: &[f64]) -> f64 {
        let m = a.len();
        let mut pi = vec![0.0; m];
        let t = self.theta;
        (1.0 - t) * log_norm(q0, a, &self.lw0, &mut pi) + t * log_norm(q1, &self.b(a), &self.lw1, &mut pi)
    }
}

/// Damped Newton with a ridge; returns the iteration count.
fn newton(prob: &LogProblem, q0: f64, q1: f64, a: &mut [f64]) -> (usize, bool) {
    let m = a.len();
    for it in 0..200 {
        let (val, g, h) = prob.eval(q0, q1, a);
        let gmax = g.amax();
        if gmax < 1e-14 {
            return (it, true);
        }
        let ridge = 1e-12 * h.diagonal().amax().max(1e-300) + 1e-14;
        let mut hr = h.clone();
        for i in 0..m {
            hr[(i, i)] += ridge;
        }
        let d = match hr.cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => -&g,
        };
        let slope = g.dot(&d);
        if slope >= 0.0 || slope.abs() < 1e-30 {
            return (it, true);
        }
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = a.iter().zip(d.iter()).map(|(ai, di)| ai + step * di).collect();
            let v = prob.value(q0, q1, &trial);
            if v <= val + 1e-4 * step * slope {
                a.copy_from_slice(&trial);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return (it, true);
        }
        if -slope < 1e-28 * (1.0 + val.abs()) {
            return (it + 1, true);
        }
    }
    (200, false)
}

/// `inf { ||u||_0^(1-theta) ||v||_1^theta : |x_i| = u_i^(1-theta) v_i^theta }`,
/// solved over `a = ln u` on the support of `x`.
pub fn calderon_product_norm(couple: &Couple, theta: f64, x: &[C64]) -> Result<NormBracket> {
    check_dim(couple.dim(), x.len())?;
    check_theta(theta)?;
    let ((p0, w0), (p1, w1)) = lattice_parts(couple)?;
    if theta == 0.0 || theta == 1.0 {
        let v = couple.space(theta as usize).norm_of(x);
        return Ok(NormBracket::exact(v, SolverTag::Exact));
    }
    let n = x.len();
    let support: Vec<usize> = (0..n).filter(|&i| x[i].norm() > 0.0).collect();
    if support.is_empty() {
        return Ok(NormBracket::exact(0.0, SolverTag::Exact));
    }
    let prob = LogProblem {
        theta,
        ell: support.iter().map(|&i| x[i].norm().ln()).collect(),
        lw0: support.iter().map(|&i| w0[i].ln()).collect(),
        lw1: support.iter().map(|&i| w1[i].ln()).collect(),
    };
    let mut a = prob.ell.clone();
    let eff = |p: Exponent, k: i32| match p {
        Exponent::Finite(q) => q,
        Exponent::Infinity => 10f64.powi(k),
    };
    let stages: Vec<i32> = if p0.is_infinite() || p1.is_infinite() { (0..=10).collect() } else { vec![0] };
    let mut iters = 0;
    let mut converged = true;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    for k in stages {
        let (q0, q1) = (eff(p0, k), eff(p1, k));
        let (it, conv) = newton(&prob, q0, q1, &mut a);
        iters += it;
        converged = conv;
        let b = prob.b(&a);
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        for (j, &i) in support.iter().enumerate() {
            u[i] = a[j].exp();
            v[i] = b[j].exp();
        }
        let upper = weighted_lp_norm(p0, w0, u.iter().copied()).powf(1.0 - theta)
            * weighted_lp_norm(p1, w1, v.iter().copied()).powf(theta);
        // Hoelder certificate from the softmax weights of the current stage.
        let m = support.len();
        let mut pi0 = vec![0.0; m];
        let mut pi1 = vec![0.0; m];
        log_norm(q0, &a, &prob.lw0, &mut pi0);
        log_norm(q1, &b, &prob.lw1, &mut pi1);
        let mut y0 = vec![0.0; n];
        let mut y1 = vec![0.0; n];
        for (j, &i) in support.iter().enumerate() {
            y0[i] = pi0[j] / u[i];
            y1[i] = pi1[j] / v[i];
        }
        if best.as_ref().is_none_or(|bst| upper < bst.0) {
            best = Some((upper, u, v, y0, y1));
        }
    }
    let (upper, u, v, y0, y1) = best.unwrap();
    let inv0: Vec<f64> = w0.iter().map(|w| 1.0 / w).collect();
    let inv1: Vec<f64> = w1.iter().map(|w| 1.0 / w).collect();
    let d0 = weighted_lp_norm(p0.conjugate(), &inv0, y0.iter().copied());
    let d1 = weighted_lp_norm(p1.conjugate(), &inv1, y1.iter().copied());
    let num: f64 = (0..n)
        .filter(|&i| y0[i] > 0.0 && y1[i] > 0.0)
        .map(|i| x[i].norm() * y0[i].powf(1.0 - theta) * y1[i].powf(theta))
        .sum();
    let lower = num / (d0.powf(1.0 - theta) * d1.powf(theta));
    Ok(NormBracket::new(lower.min(upper), upper, SolverTag::LogNewton, Witness::Factorization { u, v })
        .with_iterations(iters, converged))
}

/// The two sides of the reiteration identity: the `sigma` space of the couple of
/// `theta0` and `theta1` spaces, and the `s` space of the original couple.
pub fn reiterate(couple: &Couple, theta0: f64, theta1: f64, sigma: f64) -> Result<(NormModel, NormModel)> {
    let spec = ThetaSpec::new(theta0, theta1, sigma)?;
    let derived = Couple::new(lattice_theta_space(couple, theta0)?, lattice_theta_space(couple, theta1)?)?;
    let left = lattice_theta_space(&derived, sigma)?;
    let right = lattice_theta_space(couple, spec.s())?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use crate::spaces::{sample_complex_vector, GenConfig};
    use proptest::prelude::*;

    fn lp(p: Exponent, w: Vec<f64>) -> NormModel {
        NormModel::weighted_lp(p, w).unwrap()
    }

    fn fin(p: f64) -> Exponent {
        Exponent::Finite(p)
    }

    fn parts(m: &NormModel) -> (Exponent, Vec<f64>) {
        match m {
            NormModel::WeightedLp { p, weights } => (*p, weights.clone()),
            _ => panic!(),
        }
    }

    fn close(a: &NormModel, b: &NormModel, tol: f64) -> bool {
        let ((pa, wa), (pb, wb)) = (parts(a), parts(b));
        (pa.reciprocal() - pb.reciprocal()).abs() <= tol
            && wa.iter().zip(&wb).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
    }

    #[test]
    fn theta_space_examples() {
        let cp = Couple::new(lp(fin(1.0), vec![1.0, 2.0]), lp(Exponent::Infinity, vec![3.0, 0.5])).unwrap();
        assert_eq!(lattice_theta_space(&cp, 0.0).unwrap(), *cp.space0());
        assert_eq!(lattice_theta_space(&cp, 1.0).unwrap(), *cp.space1());
        let (p, w) = parts(&lattice_theta_space(&cp, 0.5).unwrap());
        assert_eq!(p, fin(2.0));
        assert!((w[0] - 3f64.sqrt()).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let same = Couple::new(lp(fin(3.0), vec![1.0, 4.0]), lp(fin(3.0), vec![4.0, 4.0])).unwrap();
        let (p, w) = parts(&lattice_theta_space(&same, 0.5).unwrap());
        assert_eq!(p, fin(3.0));
        assert!((w[0] - 2.0).abs() < 1e-15 && w[1] == 4.0);
        let poly = Couple::new(NormModel::polytope(vec![vec![C64::new(1.0, 0.0)]]).unwrap(), lp(fin(1.0), vec![1.0]))
            .unwrap();
        assert!(matches!(lattice_theta_space(&poly, 0.5), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn product_examples() {
        let cp = Couple::new(lp(fin(1.0), vec![1.0, 1.0]), lp(Exponent::Infinity, vec![1.0, 1.0])).unwrap();
        let x = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let b = calderon_product_norm(&cp, 0.5, &x).unwrap();
        assert!((b.upper - 2f64.sqrt()).abs() < 1e-9, "{}", b.upper);
        assert!(b.relative_gap() < 1e-9);
        assert_eq!(calderon_product_norm(&cp, 0.5, &[C64::new(0.0, 0.0); 2]).unwrap().upper, 0.0);
        let sp = lp(fin(1.5), vec![0.3, 2.0, 1.0]);
        let same = Couple::new(sp.clone(), sp.clone()).unwrap();
        let y = sample_complex_vector(&mut seeds::rng(1), 3);
        let b = calderon_product_norm(&same, 0.3, &y).unwrap();
        assert!((b.upper - sp.norm_of(&y)).abs() < 1e-10 * sp.norm_of(&y));
    }

    /// Brute force over `|x| = u^(1/2) v^(1/2)` on a grid of `ln u`.
    #[test]
    fn product_matches_factorization_grid() {
        let cp = Couple::new(lp(fin(1.0), vec![1.0, 2.0, 0.5]), lp(Exponent::Infinity, vec![0.7, 1.0, 3.0])).unwrap();
        let x = [0.8f64, 0.3, 1.1];
        let eval = |a1: f64, a2: f64| {
            let a = [0.0, a1, a2];
            // v = x^2 / u for theta = 1/2
            let u: Vec<f64> = a.iter().zip(&x).map(|(ai, xi)| xi * ai.exp()).collect();
            let v: Vec<f64> = u.iter().zip(&x).map(|(ui, xi)| xi * xi / ui).collect();
            cp.space0().lattice_norm(&u).sqrt() * cp.space1().lattice_norm(&v).sqrt()
        };
        let steps = 160;
        let h = 8.0 / steps as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=steps {
            for j in 0..=steps {
                let (a1, a2) = (-4.0 + h * i as f64, -4.0 + h * j as f64);
                let v = eval(a1, a2);
                if v < best.0 {
                    best = (v, a1, a2);
                }
            }
        }
        let (c1, c2) = (best.1, best.2);
        for i in -200..=200 {
            for j in -200..=200 {
                best.0 = best.0.min(eval(c1 + h * i as f64 / 200.0, c2 + h * j as f64 / 200.0));
            }
        }
        let best = best.0;
        let xc: Vec<C64> = x.iter().map(|v| C64::new(*v, 0.0)).collect();
        let b = calderon_product_norm(&cp, 0.5, &xc).unwrap();
        let closed = lattice_theta_space(&cp, 0.5).unwrap().norm_of(&xc);
        assert!(b.upper <= best + 1e-9);
        assert!((best - b.upper) / best < 1e-4, "{} vs grid {best}", b.upper);
        assert!((b.upper - closed).abs() < 1e-6 * closed);
    }

    #[test]
    fn factorization_is_exact() {
        let cfg = GenConfig { seed: 11, ..GenConfig::default() };
        for i in 0..50 {
            let cp = cfg.couple_at(i);
            let x = cfg.random_vector(cp.dim());
            let theta = 0.1 + 0.8 * (i as f64 / 50.0);
            let f = calderon_factorization(&cp, theta, &x).unwrap();
            for (k, xi) in x.iter().enumerate() {
                let prod = f.u[k].powf(1.0 - theta) * f.v[k].powf(theta);
                assert!((prod - xi.norm()).abs() <= 1e-12 * xi.norm().max(1.0));
            }
            assert!((cp.space0().lattice_norm(&f.u) - f.norm).abs() <= 1e-12 * f.norm);
            assert!((cp.space1().lattice_norm(&f.v) - f.norm).abs() <= 1e-12 * f.norm);
        }
    }

    #[test]
    fn reiteration_examples() {
        let cp = Couple::new(lp(fin(1.5), vec![1.0, 2.0, 0.4]), lp(Exponent::Infinity, vec![3.0, 0.2, 1.0])).unwrap();
        let (l, r) = reiterate(&cp, 0.3, 0.9, 0.0).unwrap();
        assert!(close(&l, &lattice_theta_space(&cp, 0.3).unwrap(), 1e-12) && close(&l, &r, 1e-12));
        let (l, r) = reiterate(&cp, 0.0, 1.0, 0.37).unwrap();
        assert!(close(&l, &r, 1e-12));
        assert!(close(&r, &lattice_theta_space(&cp, 0.37).unwrap(), 1e-12));
        let (l, r) = reiterate(&cp, 0.2, 0.8, 0.5).unwrap();
        assert!(close(&l, &r, 1e-12));
        // 1/p_s = (1 - s)/1.5 at s = 1/2, w_s = sqrt(w0 w1)
        let (p, w) = parts(&r);
        assert!((p.reciprocal() - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[0] - 3f64.sqrt()).abs() < 1e-15);
        assert!(reiterate(&cp, 0.2, 1.3, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn product_norm_agrees_with_closed_form(seed in any::<u64>(), theta in 0.05f64..0.95) {
            let cfg = GenConfig { seed, dim_max: 4, ..GenConfig::default() };
            let cp = cfg.random_couple();
            let x = cfg.random_vector(cp.dim());
            let b = calderon_product_norm(&cp, theta, &x).unwrap();
            let closed = lattice_theta_space(&cp, theta).unwrap().norm_of(&x);
            prop_assert!(b.lower <= closed * (1.0 + 1e-9));
            prop_assert!(b.upper >= closed * (1.0 - 1e-9));
            prop_assert!((b.upper - closed).abs() <= 1e-6 * closed, "{} vs {closed}", b.upper);
        }

        #[test]
        fn log_convexity(seed in any::<u64>(), theta in 0.0f64..=1.0) {
            let cfg = GenConfig { seed, ..GenConfig::default() };
            let cp = cfg.random_couple();
            let x = cfg.random_vector(cp.dim());
            let nt = lattice_theta_space(&cp, theta).unwrap().norm_of(&x);
            let bound = cp.space0().norm_of(&x).powf(1.0 - theta) * cp.space1().norm_of(&x).powf(theta);
            prop_assert!(nt <= bound * (1.0 + 1e-9));
        }

        #[test]
        fn reiteration_identity(seed in any::<u64>(), t0 in 0.0f64..=1.0, t1 in 0.0f64..=1.0, s in 0.0f64..=1.0) {
            let cp = GenConfig { seed, ..GenConfig::default() }.random_couple();
            let (l, r) = reiterate(&cp, t0, t1, s).unwrap();
            prop_assert!(close(&l, &r, 1e-12));
        }
    }
}

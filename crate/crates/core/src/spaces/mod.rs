//! Finite-dimensional normed spaces on `C^n` and couples of them.
//!
//! Weighted sequence norms use the convention `||x|| = (sum_i (w_i |x_i|)^p)^(1/p)`,
//! so the interpolated weight of a lattice couple is the plain geometric mean
//! `w0^(1-theta) * w1^theta`. The duality pairing is `<x, y> = sum_i x_i conj(y_i)`.
//!
//! Gradients of norms are returned as complex vectors `g` with
//! `d||x|| = Re sum_i conj(g_i) dx_i`, which is also the representation of the
//! norming functional: `Re <x, g> = ||x||` and `||g||_* <= 1`.

mod doc;
mod gen;

pub use doc::{cvec, Exponent};
pub use gen::{sample_complex_vector, GenConfig};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functors::kfunc;
use crate::{NormBracket, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "doc::NormModelDoc", into = "doc::NormModelDoc")]
pub enum NormModel {
    WeightedLp { p: Exponent, weights: Vec<f64> },
    /// `||x|| = max_j |sum_i a_{j,i} x_i|` over explicitly stored functionals.
    Polytope { dim: usize, functionals: Vec<Vec<C64>> },
}

impl NormModel {
    pub fn weighted_lp(p: Exponent, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if let Exponent::Finite(v) = p {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("exponent {v} must be >= 1")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("weight {w} must be positive and finite")));
        }
        Ok(NormModel::WeightedLp { p, weights })
    }

    pub fn lp(p: Exponent, n: usize) -> Result<Self> {
        Self::weighted_lp(p, vec![1.0; n])
    }

    pub fn euclidean(n: usize) -> Self {
        NormModel::WeightedLp { p: Exponent::Finite(2.0), weights: vec![1.0; n] }
    }

    pub fn polytope(functionals: Vec<Vec<C64>>) -> Result<Self> {
        let dim = functionals.first().map(|a| a.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidParameter("polytope needs at least one functional".into()));
        }
        for a in &functionals {
            check_dim(dim, a.len())?;
            if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::InvalidParameter("non-finite functional entry".into()));
            }
        }
        let mat = DMatrix::from_fn(functionals.len(), dim, |j, i| functionals[j][i]);
        let sv = mat.singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|s| **s > 1e-10 * smax.max(f64::MIN_POSITIVE)).count();
        if rank < dim {
            return Err(Error::InvalidParameter(format!(
                "polytope functionals span rank {rank} < dimension {dim}"
            )));
        }
        Ok(NormModel::Polytope { dim, functionals })
    }

    pub fn dim(&self) -> usize {
        match self {
            NormModel::WeightedLp { weights, .. } => weights.len(),
            NormModel::Polytope { dim, .. } => *dim,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, NormModel::WeightedLp { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NormModel::WeightedLp { .. } => "WeightedLp",
            NormModel::Polytope { .. } => "Polytope",
        }
    }

    pub fn norm(&self, x: &[C64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.norm_of(x))
    }

    /// Norm without the dimension check; callers guarantee `x.len() == dim`.
    pub fn norm_of(&self, x: &[C64]) -> f64 {
        match self {
            NormModel::WeightedLp { p, weights } => {
                weighted_lp_norm(*p, weights, x.iter().map(|c| c.norm()))
            }
            NormModel::Polytope { functionals, .. } => functionals
                .iter()
                .map(|a| apply(a, x).norm())
                .fold(0.0, f64::max),
        }
    }

    /// Norm of a nonnegative real vector of moduli (lattice kinds only).
    pub fn lattice_norm(&self, moduli: &[f64]) -> f64 {
        match self {
            NormModel::WeightedLp { p, weights } => {
                weighted_lp_norm(*p, weights, moduli.iter().copied())
            }
            NormModel::Polytope { .. } => {
                let x: Vec<C64> = moduli.iter().map(|m| C64::new(*m, 0.0)).collect();
                self.norm_of(&x)
            }
        }
    }

    /// Exact dual norm under `<x, y> = sum x_i conj(y_i)`.
    pub fn dual_norm(&self, y: &[C64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        match self {
            NormModel::WeightedLp { .. } => Ok(self.dual_space()?.norm_of(y)),
            NormModel::Polytope { .. } => Err(Error::UnsupportedKind("dual norm of a polytope")),
        }
    }

    /// An upper bound on the dual norm; exact for lattice kinds.
    pub fn dual_norm_upper(&self, y: &[C64]) -> f64 {
        match self {
            NormModel::WeightedLp { .. } => self.dual_space().expect("lattice").norm_of(y),
            NormModel::Polytope { .. } => {
                let (lo, _) = self.euclidean_bounds();
                l2(y) / lo
            }
        }
    }

    pub fn dual_space(&self) -> Result<NormModel> {
        match self {
            NormModel::WeightedLp { p, weights } => Ok(NormModel::WeightedLp {
                p: p.conjugate(),
                weights: weights.iter().map(|w| 1.0 / w).collect(),
            }),
            NormModel::Polytope { .. } => Err(Error::UnsupportedKind("dual of a polytope norm")),
        }
    }

    /// Constants `(lo, hi)` with `lo ||x||_2 <= ||x|| <= hi ||x||_2`.
    pub fn euclidean_bounds(&self) -> (f64, f64) {
        match self {
            NormModel::WeightedLp { p, weights } => {
                let n = weights.len() as f64;
                let wmin = weights.iter().copied().fold(f64::INFINITY, f64::min);
                let wmax = weights.iter().copied().fold(0.0, f64::max);
                let e = p.reciprocal() - 0.5;
                (wmin * n.powf(e.min(0.0)), wmax * n.powf(e.max(0.0)))
            }
            NormModel::Polytope { dim, functionals } => {
                let mat = DMatrix::from_fn(functionals.len(), *dim, |j, i| functionals[j][i]);
                let sv = mat.singular_values();
                let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = functionals.iter().map(|a| l2(a)).fold(0.0, f64::max);
                (smin / (functionals.len() as f64).sqrt(), hi)
            }
        }
    }

    /// `sup ||x||_1 / ||x||` (unweighted l1).
    pub fn l1_embedding_constant(&self) -> f64 {
        match self {
            NormModel::WeightedLp { p, weights } => {
                let inv: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
                weighted_lp_norm(p.conjugate(), &vec![1.0; inv.len()], inv.into_iter())
            }
            NormModel::Polytope { dim, .. } => {
                let (lo, _) = self.euclidean_bounds();
                (*dim as f64).sqrt() / lo
            }
        }
    }

    /// `sup ||x|| / ||x||_inf` (unweighted sup norm).
    pub fn linf_image_constant(&self) -> f64 {
        match self {
            NormModel::WeightedLp { p, weights } => {
                weighted_lp_norm(*p, weights, std::iter::repeat_n(1.0, weights.len()))
            }
            NormModel::Polytope { functionals, .. } => functionals
                .iter()
                .map(|a| a.iter().map(|c| c.norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// Norming functional of `x`: `Re <x, g> = ||x||`, `||g||_* <= 1`.
    pub fn subgradient(&self, x: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); x.len()];
        self.smooth_norm(x, 0.0, &mut g);
        g
    }

    /// Smoothed norm and its gradient.
    ///
    /// `mu` is an absolute smoothing scale: moduli become `sqrt(|x_i|^2 + mu^2)`
    /// where the exact norm is not differentiable, and maxima become log-sum-exp
    /// at temperature `mu`. With `mu = 0` this returns the exact norm and a
    /// subgradient.
    pub fn smooth_norm(&self, x: &[C64], mu: f64, grad: &mut [C64]) -> f64 {
        match self {
            NormModel::WeightedLp { p, weights } => smooth_lp(*p, weights, x, mu, grad),
            NormModel::Polytope { functionals, .. } => {
                let s: Vec<C64> = functionals.iter().map(|a| apply(a, x)).collect();
                let m: Vec<f64> = s.iter().map(|v| smooth_abs(*v, mu)).collect();
                let (val, pi) = soft_max(&m, mu);
                grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
                for ((a, sj), (mj, pj)) in functionals.iter().zip(&s).zip(m.iter().zip(&pi)) {
                    if *pj == 0.0 || *mj == 0.0 {
                        continue;
                    }
                    let phase = sj / *mj * *pj;
                    for (g, ai) in grad.iter_mut().zip(a) {
                        *g += ai.conj() * phase;
                    }
                }
                val
            }
        }
    }
}

fn smooth_abs(v: C64, mu: f64) -> f64 {
    if mu > 0.0 {
        (v.norm_sqr() + mu * mu).sqrt()
    } else {
        v.norm()
    }
}

/// Log-sum-exp at temperature `mu` with softmax weights; a hard max (first
/// maximizer wins) when `mu == 0`.
pub(crate) fn soft_max(v: &[f64], mu: f64) -> (f64, Vec<f64>) {
    let (imax, vmax) = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    let mut pi = vec![0.0; v.len()];
    if v.is_empty() {
        return (0.0, pi);
    }
    if mu <= 0.0 {
        pi[imax] = 1.0;
        return (vmax, pi);
    }
    let mut s = 0.0;
    for (p, x) in pi.iter_mut().zip(v) {
        *p = ((x - vmax) / mu).exp();
        s += *p;
    }
    pi.iter_mut().for_each(|p| *p /= s);
    (vmax + mu * s.ln(), pi)
}

fn smooth_lp(p: Exponent, w: &[f64], x: &[C64], mu: f64, grad: &mut [C64]) -> f64 {
    let smooth_needed = match p {
        Exponent::Finite(q) => q < 2.0,
        Exponent::Infinity => true,
    };
    let m: Vec<f64> = x
        .iter()
        .map(|c| if smooth_needed { smooth_abs(*c, mu) } else { c.norm() })
        .collect();
    let dir = |i: usize| if m[i] > 0.0 { x[i] / m[i] } else { C64::new(0.0, 0.0) };
    match p {
        Exponent::Infinity => {
            let v: Vec<f64> = m.iter().zip(w).map(|(a, b)| a * b).collect();
            let (val, pi) = soft_max(&v, mu);
            for (i, g) in grad.iter_mut().enumerate() {
                *g = dir(i) * (pi[i] * w[i]);
            }
            val
        }
        Exponent::Finite(q) => {
            let n = weighted_lp_norm(p, w, m.iter().copied());
            if n == 0.0 {
                grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
                return 0.0;
            }
            for (i, g) in grad.iter_mut().enumerate() {
                let r = w[i] * m[i] / n;
                let coef = if q == 1.0 { w[i] } else { w[i] * r.powf(q - 1.0) };
                *g = dir(i) * coef;
            }
            n
        }
    }
}

/// `(sum_i (w_i m_i)^p)^(1/p)` computed with max-scaling.
pub(crate) fn weighted_lp_norm(p: Exponent, w: &[f64], moduli: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = moduli.zip(w).map(|(m, wi)| m * wi).collect();
    let vmax = v.iter().copied().fold(0.0, f64::max);
    match p {
        Exponent::Infinity => vmax,
        Exponent::Finite(q) => {
            if vmax == 0.0 {
                return 0.0;
            }
            if q == 1.0 {
                return v.iter().sum();
            }
            if q == 2.0 {
                return vmax * v.iter().map(|a| (a / vmax) * (a / vmax)).sum::<f64>().sqrt();
            }
            vmax * v.iter().map(|a| (a / vmax).powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }
}

/// Bilinear application `sum_i a_i x_i`.
pub(crate) fn apply(a: &[C64], x: &[C64]) -> C64 {
    a.iter().zip(x).map(|(ai, xi)| ai * xi).sum()
}

/// Duality pairing `sum_i x_i conj(y_i)`.
pub fn pairing(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn l2(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Two norms on the same `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "doc::CoupleDoc", into = "doc::CoupleDoc")]
pub struct Couple {
    space0: NormModel,
    space1: NormModel,
}

impl Couple {
    pub fn new(space0: NormModel, space1: NormModel) -> Result<Self> {
        check_dim(space0.dim(), space1.dim())?;
        Ok(Couple { space0, space1 })
    }

    pub fn space0(&self) -> &NormModel {
        &self.space0
    }

    pub fn space1(&self) -> &NormModel {
        &self.space1
    }

    pub fn space(&self, j: usize) -> &NormModel {
        if j == 0 {
            &self.space0
        } else {
            &self.space1
        }
    }

    pub fn dim(&self) -> usize {
        self.space0.dim()
    }

    pub fn is_lattice(&self) -> bool {
        self.space0.is_lattice() && self.space1.is_lattice()
    }

    pub fn intersection_norm(&self, x: &[C64]) -> Result<f64> {
        Ok(self.space0.norm(x)?.max(self.space1.norm(x)?))
    }

    /// Norm of `X0 + X1`, i.e. the K-functional at `t = 1`.
    pub fn sum_norm(&self, x: &[C64]) -> Result<NormBracket> {
        kfunc::k_functional(self, x, 1.0)
    }

    /// The couple of dual spaces (lattice couples only).
    pub fn dual(&self) -> Result<Couple> {
        Couple::new(self.space0.dual_space()?, self.space1.dual_space()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norm_examples() {
        let e2 = NormModel::euclidean(2);
        assert_relative_eq!(e2.norm(&[c(3.0, 0.0), c(4.0, 0.0)]).unwrap(), 5.0);
        let inf = NormModel::weighted_lp(Exponent::Infinity, vec![2.0, 1.0]).unwrap();
        assert_eq!(inf.norm(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap(), 2.0);
        let one = NormModel::weighted_lp(Exponent::Finite(1.0), vec![1.0, 3.0]).unwrap();
        assert_eq!(one.norm(&[c(0.0, 1.0), c(1.0, 0.0)]).unwrap(), 4.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e2 = NormModel::euclidean(2);
        assert_eq!(
            e2.norm(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
        assert!(Couple::new(NormModel::euclidean(2), NormModel::euclidean(3)).is_err());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(NormModel::weighted_lp(Exponent::Finite(0.5), vec![1.0]).is_err());
        assert!(NormModel::weighted_lp(Exponent::Finite(2.0), vec![0.0]).is_err());
        assert!(NormModel::weighted_lp(Exponent::Finite(2.0), vec![]).is_err());
        let rank_deficient = vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(2.0, 0.0)]];
        assert!(NormModel::polytope(rank_deficient).is_err());
    }

    #[test]
    fn intersection_norm_examples() {
        let x = [c(1.0, 2.0), c(-0.5, 0.0)];
        let e = NormModel::euclidean(2);
        let cp = Couple::new(e.clone(), e.clone()).unwrap();
        assert_eq!(cp.intersection_norm(&x).unwrap(), e.norm(&x).unwrap());
        assert_eq!(cp.intersection_norm(&[c(0.0, 0.0); 2]).unwrap(), 0.0);
        let mut rng = seeds::rng(3);
        let cfg = GenConfig { dim_min: 2, dim_max: 2, ..GenConfig::default() };
        let cp = cfg.sample_couple(&mut rng);
        let x = sample_complex_vector(&mut rng, 2);
        let expect = cp.space0().norm(&x).unwrap().max(cp.space1().norm(&x).unwrap());
        assert_eq!(cp.intersection_norm(&x).unwrap(), expect);
    }

    #[test]
    fn dual_space_examples() {
        let e = NormModel::euclidean(3);
        assert_eq!(e.dual_space().unwrap(), e);
        let one = NormModel::weighted_lp(Exponent::Finite(1.0), vec![2.0, 3.0]).unwrap();
        assert_eq!(
            one.dual_space().unwrap(),
            NormModel::weighted_lp(Exponent::Infinity, vec![0.5, 1.0 / 3.0]).unwrap()
        );
        let inf = NormModel::lp(Exponent::Infinity, 2).unwrap();
        assert_eq!(inf.dual_space().unwrap(), NormModel::lp(Exponent::Finite(1.0), 2).unwrap());
        let poly = NormModel::polytope(vec![vec![c(1.0, 0.0)]]).unwrap();
        assert_eq!(poly.dual_space(), Err(Error::UnsupportedKind("dual of a polytope norm")));
    }

    /// Brute-force `sup |<x, y>|` over the unit sphere of a two-dimensional space.
    /// The extremal moduli are found by a fine grid over the sphere's moduli profile;
    /// phases are aligned with `y`, which is optimal for any lattice norm.
    /// Grid search over modulus directions, refined once around the best angle.
    fn dual_norm_by_search(space: &NormModel, y: &[C64]) -> f64 {
        let ratio = |a: f64| {
            let m = [a.cos(), a.sin()];
            let x: Vec<C64> = m.iter().zip(y).map(|(mi, yi)| yi / yi.norm() * *mi).collect();
            pairing(&x, y).norm() / space.norm_of(&x)
        };
        let steps = 20_000;
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        let (best_a, best) = (0..=steps)
            .map(|s| (h * s as f64, ratio(h * s as f64)))
            .fold((0.0, 0.0), |acc, (a, r)| if r > acc.1 { (a, r) } else { acc });
        (-1000..=1000)
            .map(|s| (best_a + h * s as f64 / 1000.0).clamp(0.0, std::f64::consts::FRAC_PI_2))
            .map(ratio)
            .fold(best, f64::max)
    }

    #[test]
    fn dual_norm_matches_search() {
        let y = [c(0.3, -1.1), c(2.0, 0.4)];
        for p in [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(3.0), Exponent::Infinity] {
            let s = NormModel::weighted_lp(p, vec![0.7, 1.9]).unwrap();
            let exact = s.dual_norm(&y).unwrap();
            let search = dual_norm_by_search(&s, &y);
            assert!(search <= exact * (1.0 + 1e-12), "{p:?}");
            assert_relative_eq!(search, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn subgradient_is_norming() {
        let mut rng = seeds::rng(11);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let s = NormModel::weighted_lp(Exponent::Finite(p), vec![0.5, 2.0, 1.0]).unwrap();
            let x = sample_complex_vector(&mut rng, 3);
            let g = s.subgradient(&x);
            assert_relative_eq!(pairing(&x, &g).re, s.norm_of(&x), max_relative = 1e-12);
            assert_relative_eq!(s.dual_norm(&g).unwrap(), 1.0, max_relative = 1e-12);
        }
        let poly = NormModel::polytope(vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(0.5, 0.5), c(-1.0, 0.0)],
        ])
        .unwrap();
        let x = sample_complex_vector(&mut rng, 2);
        let g = poly.subgradient(&x);
        assert_relative_eq!(pairing(&x, &g).re, poly.norm_of(&x), max_relative = 1e-12);
    }

    #[test]
    fn smooth_gradient_matches_finite_differences() {
        let mut rng = seeds::rng(5);
        let spaces = [
            NormModel::weighted_lp(Exponent::Finite(1.0), vec![0.5, 2.0, 1.0]).unwrap(),
            NormModel::weighted_lp(Exponent::Finite(3.0), vec![0.5, 2.0, 1.0]).unwrap(),
            NormModel::weighted_lp(Exponent::Infinity, vec![0.5, 2.0, 1.0]).unwrap(),
            NormModel::polytope(vec![
                vec![c(1.0, 0.0), c(0.0, 1.0), c(0.2, 0.0)],
                vec![c(0.5, 0.5), c(-1.0, 0.0), c(0.0, 0.3)],
                vec![c(0.0, 0.0), c(0.1, 0.0), c(1.0, 1.0)],
            ])
            .unwrap(),
        ];
        for s in &spaces {
            let x = sample_complex_vector(&mut rng, 3);
            let mu = 0.05;
            let mut g = vec![C64::new(0.0, 0.0); 3];
            s.smooth_norm(&x, mu, &mut g);
            let h = 1e-6;
            for i in 0..3 {
                for dir in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += dir * h;
                    xm[i] -= dir * h;
                    let mut scratch = vec![C64::new(0.0, 0.0); 3];
                    let fd = (s.smooth_norm(&xp, mu, &mut scratch) - s.smooth_norm(&xm, mu, &mut scratch))
                        / (2.0 * h);
                    let an = (g[i].conj() * dir).re;
                    assert!((fd - an).abs() < 1e-6, "{} {fd} {an}", s.kind_name());
                }
            }
        }
    }

    #[test]
    fn euclidean_bounds_hold() {
        let mut rng = seeds::rng(8);
        let cfg = GenConfig { polytope_prob: 0.5, ..GenConfig::default() };
        for _ in 0..50 {
            let cp = cfg.sample_couple(&mut rng);
            for j in 0..2 {
                let s = cp.space(j);
                let (lo, hi) = s.euclidean_bounds();
                let x = sample_complex_vector(&mut rng, s.dim());
                let r = s.norm_of(&x) / l2(&x);
                assert!(lo <= r * (1.0 + 1e-12) && r <= hi * (1.0 + 1e-12));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_axioms_hold(seed in any::<u64>(), scale in -5.0f64..5.0, phase in 0.0f64..6.3) {
            let mut rng = seeds::rng(seed);
            let cfg = GenConfig { polytope_prob: 0.3, ..GenConfig::default() };
            let cp = cfg.sample_couple(&mut rng);
            let n = cp.dim();
            for s in [cp.space0(), cp.space1()] {
                let x = sample_complex_vector(&mut rng, n);
                let y = sample_complex_vector(&mut rng, n);
                let sum: Vec<C64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let (nx, ny) = (s.norm_of(&x), s.norm_of(&y));
                prop_assert!(s.norm_of(&sum) <= (nx + ny) * (1.0 + 1e-12));
                let lam = C64::from_polar(scale.exp(), phase);
                let scaled: Vec<C64> = x.iter().map(|a| a * lam).collect();
                let lhs = s.norm_of(&scaled);
                prop_assert!((lhs - lam.norm() * nx).abs() <= 1e-12 * lhs.max(1e-300));
                prop_assert!(nx > 0.0);
            }
        }

        #[test]
        fn dual_space_is_an_involution(seed in any::<u64>()) {
            let cfg = GenConfig { seed, ..GenConfig::default() };
            let cp = cfg.random_couple();
            let s = cp.space0();
            let back = s.dual_space().unwrap().dual_space().unwrap();
            match (s, &back) {
                (NormModel::WeightedLp { p, weights }, NormModel::WeightedLp { p: q, weights: v }) => {
                    prop_assert!((p.reciprocal() - q.reciprocal()).abs() <= 1e-15);
                    for (a, b) in weights.iter().zip(v) {
                        prop_assert!((a - b).abs() <= 1e-15 * a);
                    }
                }
                _ => prop_assert!(false),
            }
        }
    }
}

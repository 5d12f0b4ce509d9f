//! Vector-valued Laurent polynomials on the annulus `1 < |z| < e`.
//!
//! A [`LaurentFamily`] stores finitely many coefficients, so evaluation is an
//! exact finite sum. Boundary circles are sampled at `M` equispaced angles
//! `2 pi m / M` through an FFT of size `M`; with `M >= 8K` there is no aliasing
//! and coefficient recovery is exact up to roundoff.
//!
//! `z -> ||f(z)||` is subharmonic for every norm, so maxima over the closed
//! annulus are attained on the two boundary circles. Interior radii are never
//! sampled for norm maxima.

mod boundary;

pub use boundary::{
    boundary_norm_f, boundary_norm_f_refined, boundary_norm_h, circle_l2_norm, circle_mean_norm, circle_sup_refined,
    riesz_l2_constant, BoundaryNorm,
};

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::C64;

/// Grid on the two boundary circles `|z| = 1` and `|z| = e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    m: usize,
}

impl AnnulusSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("grid size {m} must be a power of two >= 8")));
        }
        Ok(AnnulusSpec { m })
    }

    /// Smallest admissible grid for degree `k`.
    pub fn for_degree(k: usize) -> Self {
        AnnulusSpec { m: (8 * k.max(1)).next_power_of_two() }
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn check_degree(&self, k: usize) -> Result<()> {
        if self.m < 8 * k {
            Err(Error::GridTooSmall { m: self.m, k })
        } else {
            Ok(())
        }
    }

    pub fn doubled(&self) -> Self {
        AnnulusSpec { m: self.m * 2 }
    }
}

/// Radius of boundary circle `j` (0 or 1): `e^j`.
pub fn radius(j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        E
    }
}

/// `f(z) = sum_{k=-K}^{K} c_k z^k` with `c_k in C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyDoc", into = "FamilyDoc")]
pub struct LaurentFamily {
    n: usize,
    degree: usize,
    /// `coeffs[k + degree]` is `c_k`.
    coeffs: Vec<Vec<C64>>,
}

impl LaurentFamily {
    pub fn zeros(n: usize, degree: usize) -> Self {
        LaurentFamily { n, degree, coeffs: vec![vec![C64::new(0.0, 0.0); n]; 2 * degree + 1] }
    }

    pub fn constant(v: &[C64]) -> Self {
        LaurentFamily { n: v.len(), degree: 0, coeffs: vec![v.to_vec()] }
    }

    /// `v z^k`.
    pub fn monomial(v: &[C64], k: i64) -> Self {
        let mut f = Self::zeros(v.len(), k.unsigned_abs() as usize);
        f.set_coeff(k, v.to_vec());
        f
    }

    pub fn from_coefficients(degree: usize, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * degree + 1, got: coeffs.len() });
        }
        let n = coeffs[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter("family dimension must be at least 1".into()));
        }
        for c in &coeffs {
            check_dim(n, c.len())?;
            if c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(LaurentFamily { n, degree, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, k: i64) -> &[C64] {
        &self.coeffs[(k + self.degree as i64) as usize]
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut Vec<C64> {
        &mut self.coeffs[(k + self.degree as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, v: Vec<C64>) {
        *self.coeff_mut(k) = v;
    }

    /// Iterate `(k, c_k)` in increasing `k`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &[C64])> {
        let d = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - d, c.as_slice()))
    }

    /// The same family with a larger degree bound (zero padding).
    pub fn padded(&self, degree: usize) -> Self {
        assert!(degree >= self.degree);
        let mut f = Self::zeros(self.n, degree);
        for (k, c) in self.terms() {
            f.set_coeff(k, c.to_vec());
        }
        f
    }

    /// Multiply coefficient `k` by `mult(k)`.
    pub fn map_coefficients(&self, mult: impl Fn(i64) -> f64) -> Self {
        let mut f = self.clone();
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            let m = mult(i as i64 - self.degree as i64);
            c.iter_mut().for_each(|v| *v *= m);
        }
        f
    }

    pub fn add(&self, other: &LaurentFamily) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut f = self.padded(self.degree.max(other.degree));
        for (k, c) in other.terms() {
            for (a, b) in f.coeff_mut(k).iter_mut().zip(c) {
                *a += b;
            }
        }
        Ok(f)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map_coefficients(|_| s)
    }

    /// Apply a matrix (row-major `m x n`) to every coefficient.
    pub fn apply_matrix(&self, rows: &[Vec<C64>]) -> Result<Self> {
        for r in rows {
            check_dim(self.n, r.len())?;
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| rows.iter().map(|r| crate::spaces::apply(r, c)).collect())
            .collect();
        Self::from_coefficients(self.degree, coeffs)
    }

    /// Exact Laurent sum at `z`, `1 <= |z| <= e`.
    pub fn eval(&self, z: C64) -> Result<Vec<C64>> {
        let r = z.norm();
        let tol = 1e-12;
        if !(r >= 1.0 - tol && r <= E * (1.0 + tol)) {
            return Err(Error::OutsideAnnulus(r));
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: C64) -> Vec<C64> {
        let (r, t) = (z.norm(), z.arg());
        let (lr, d) = (r.ln(), self.degree as i64);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i as i64 - d;
            let zk = C64::from_polar((k as f64 * lr).exp(), k as f64 * t);
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * zk;
            }
        }
        out
    }

    /// Value at the real point `e^theta`.
    pub fn eval_at_theta(&self, theta: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (k, c) in self.terms() {
            let s = (k as f64 * theta).exp();
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * s;
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    /// Row `k + K` holds `[re_0, im_0, re_1, im_1, ...]` of `c_k`.
    coefficients: Vec<Vec<f64>>,
}

impl From<LaurentFamily> for FamilyDoc {
    fn from(f: LaurentFamily) -> Self {
        FamilyDoc {
            n: f.n,
            k: f.degree,
            coefficients: f
                .coeffs
                .iter()
                .map(|c| c.iter().flat_map(|v| [v.re, v.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<FamilyDoc> for LaurentFamily {
    type Error = Error;

    fn try_from(d: FamilyDoc) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(d.coefficients.len());
        for row in &d.coefficients {
            if row.len() != 2 * d.n {
                return Err(Error::DimensionMismatch { expected: 2 * d.n, got: row.len() });
            }
            coeffs.push(row.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
        }
        LaurentFamily::from_coefficients(d.k, coeffs)
    }
}

/// Samples `f(r e^{2 pi i m / M})` on one boundary circle.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleSamples {
    pub radius: f64,
    /// `values[m]` is the vector at angle `2 pi m / M`.
    pub values: Vec<Vec<C64>>,
}

/// Cached forward/inverse FFTs of one size.
#[derive(Clone)]
pub struct CircleTransform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CircleTransform {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        CircleTransform { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Values of `f` on circle `r`, coordinate-major: `out[i][m]`.
    pub fn synthesize(&self, f: &LaurentFamily, r: f64) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(f.n);
        for i in 0..f.n {
            let mut buf = vec![C64::new(0.0, 0.0); self.m];
            for (k, c) in f.terms() {
                buf[k.rem_euclid(self.m as i64) as usize] += c[i] * r.powi(k as i32);
            }
            self.inverse.process(&mut buf);
            out.push(buf);
        }
        out
    }

    /// In-place `buf[m] <- sum_k buf[k] e^{+2 pi i k m / M}`.
    pub fn inverse_in_place(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }

    /// In-place `buf[k] <- sum_m buf[m] e^{-2 pi i k m / M}`.
    pub fn forward_in_place(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }
}

/// Sample `f` on the circle of radius `r` at `M` points.
pub fn sample_circle(f: &LaurentFamily, r: f64, spec: &AnnulusSpec) -> Result<CircleSamples> {
    spec.check_degree(f.degree)?;
    let tr = CircleTransform::new(spec.m);
    let coord = tr.synthesize(f, r);
    let values = (0..spec.m).map(|m| coord.iter().map(|c| c[m]).collect()).collect();
    Ok(CircleSamples { radius: r, values })
}

/// Discrete Fourier coefficients `c_k`, `|k| <= K`, normalized by `r^k`.
pub fn fourier_coefficients(samples: &CircleSamples, k_max: usize) -> Result<LaurentFamily> {
    let m = samples.values.len();
    if m < 8 * k_max.max(1) || !m.is_power_of_two() {
        return Err(Error::GridTooSmall { m, k: k_max });
    }
    let n = samples.values[0].len();
    let tr = CircleTransform::new(m);
    let mut f = LaurentFamily::zeros(n, k_max);
    for i in 0..n {
        let mut buf: Vec<C64> = samples.values.iter().map(|v| v[i]).collect();
        tr.forward_in_place(&mut buf);
        for k in -(k_max as i64)..=k_max as i64 {
            let scale = 1.0 / (m as f64 * samples.radius.powi(k as i32));
            f.coeff_mut(k)[i] = buf[k.rem_euclid(m as i64) as usize] * scale;
        }
    }
    Ok(f)
}

/// Keep the modes `k >= 0`.
pub fn riesz_project(f: &LaurentFamily) -> LaurentFamily {
    f.map_coefficients(|k| if k >= 0 { 1.0 } else { 0.0 })
}

/// Keep the modes `k < 0`.
pub fn riesz_minus(f: &LaurentFamily) -> LaurentFamily {
    f.map_coefficients(|k| if k < 0 { 1.0 } else { 0.0 })
}

/// de la Vallee Poussin multiplier: 1 on `|k| <= N`, `2 - |k|/N` up to `2N`, then 0.
pub fn vp_multiplier(k: i64, n: usize) -> f64 {
    let a = k.unsigned_abs() as f64;
    let nf = n as f64;
    if a <= nf {
        1.0
    } else if a <= 2.0 * nf {
        2.0 - a / nf
    } else {
        0.0
    }
}

/// de la Vallee Poussin smoothing `S_N`.
pub fn smooth(f: &LaurentFamily, n: usize) -> Result<LaurentFamily> {
    if n == 0 {
        return Err(Error::InvalidParameter("smoothing order must be positive".into()));
    }
    Ok(f.map_coefficients(|k| vp_multiplier(k, n)))
}

/// Point on circle `j` at angle `t`.
#[cfg(test)]
pub(crate) fn circle_point(j: usize, t: f64) -> C64 {
    C64::from_polar(radius(j), t)
}

pub(crate) fn angle(m: usize, size: usize) -> f64 {
    2.0 * PI * m as f64 / size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use crate::spaces::sample_complex_vector;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn random_family(seed: u64, n: usize, k: usize) -> LaurentFamily {
        let mut rng = seeds::rng(seed);
        let coeffs = (0..2 * k + 1).map(|_| sample_complex_vector(&mut rng, n)).collect();
        LaurentFamily::from_coefficients(k, coeffs).unwrap()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
    }

    #[test]
    fn constant_and_monomial_evaluation() {
        let v = vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)];
        let f = LaurentFamily::constant(&v);
        assert_eq!(f.eval(C64::from_polar(2.0, 0.3)).unwrap(), v);
        let g = LaurentFamily::monomial(&v, 1);
        let z = C64::new(0.5f64.exp(), 0.0);
        let expect: Vec<C64> = v.iter().map(|c| c * 0.5f64.exp()).collect();
        assert!(close(&g.eval(z).unwrap(), &expect, 1e-15));
        assert_eq!(f.eval(C64::new(0.5, 0.0)), Err(Error::OutsideAnnulus(0.5)));
        assert!(f.eval(C64::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn grid_sampling_matches_direct_sum() {
        let f = random_family(1, 3, 12);
        let spec = AnnulusSpec::for_degree(12);
        for j in 0..2 {
            let s = sample_circle(&f, radius(j), &spec).unwrap();
            for (m, v) in s.values.iter().enumerate() {
                let direct = f.eval(circle_point(j, angle(m, spec.points()))).unwrap();
                assert!(close(v, &direct, 1e-12), "circle {j} point {m}");
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let v = vec![C64::new(2.0, 1.0)];
        let spec = AnnulusSpec::new(16).unwrap();
        let s = sample_circle(&LaurentFamily::constant(&v), 1.0, &spec).unwrap();
        let c = fourier_coefficients(&s, 2).unwrap();
        assert!(close(c.coeff(0), &v, 1e-15));
        assert!(c.coeff(1)[0].norm() < 1e-15 && c.coeff(-2)[0].norm() < 1e-15);
        let s = sample_circle(&LaurentFamily::monomial(&v, 1), 1.0, &spec).unwrap();
        let c = fourier_coefficients(&s, 2).unwrap();
        assert!(close(c.coeff(1), &v, 1e-15));
        assert_eq!(fourier_coefficients(&s, 3), Err(Error::GridTooSmall { m: 16, k: 3 }));
    }

    #[test]
    fn degree_16_round_trip_on_both_circles() {
        let f = random_family(7, 2, 16);
        let spec = AnnulusSpec::new(256).unwrap();
        for j in 0..2 {
            let back = fourier_coefficients(&sample_circle(&f, radius(j), &spec).unwrap(), 16).unwrap();
            // errors are relative to the largest boundary term c_k r^k
            let r = radius(j);
            let scale = f.terms().map(|(k, c)| crate::spaces::l2(c) * r.powi(k as i32)).fold(0.0, f64::max);
            for (k, c) in f.terms() {
                let rk = r.powi(k as i32);
                let err = back.coeff(k).iter().zip(c).map(|(a, b)| (a - b).norm() * rk).fold(0.0, f64::max);
                assert!(err <= 1e-13 * scale, "circle {j} k {k}: {err}");
            }
        }
    }

    #[test]
    fn riesz_examples() {
        let v = vec![C64::new(1.0, 0.0)];
        let mut f = LaurentFamily::zeros(1, 1);
        f.set_coeff(-1, v.clone());
        f.set_coeff(0, v.clone());
        f.set_coeff(1, v.clone());
        let r = riesz_project(&f);
        assert_eq!(r.coeff(-1), &[C64::new(0.0, 0.0)]);
        assert_eq!(r.coeff(0), v.as_slice());
        assert_eq!(r.coeff(1), v.as_slice());
        let analytic = riesz_project(&random_family(3, 2, 5));
        assert_eq!(riesz_project(&analytic), analytic);
    }

    #[test]
    fn smoothing_multipliers() {
        assert_eq!(vp_multiplier(6, 4), 0.5);
        assert_eq!(vp_multiplier(-6, 4), 0.5);
        assert_eq!(vp_multiplier(3, 4), 1.0);
        assert_eq!(vp_multiplier(9, 4), 0.0);
        assert_eq!(vp_multiplier(8, 4), 0.0);
        let f = random_family(4, 2, 5);
        assert_eq!(smooth(&f, 5).unwrap(), f);
        assert!(smooth(&f, 0).is_err());
    }

    #[test]
    fn parseval_on_the_unit_circle() {
        let f = random_family(12, 3, 10);
        let spec = AnnulusSpec::for_degree(10);
        let s = sample_circle(&f, 1.0, &spec).unwrap();
        let grid: f64 = s.values.iter().map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sum::<f64>()
            / spec.points() as f64;
        let coef: f64 = f.terms().map(|(_, c)| c.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum();
        assert_relative_eq!(grid, coef, max_relative = 1e-12);
    }

    #[test]
    fn family_document_round_trip() {
        let f = random_family(5, 2, 3);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.starts_with(r#"{"n":2,"K":3,"coefficients":[["#));
        let back: LaurentFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<LaurentFamily>(r#"{"n":2,"K":0,"coefficients":[[1,0,1]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn projections_split_the_identity(seed in any::<u64>(), k in 1usize..12, n in 1usize..12) {
            let f = random_family(seed, 2, k);
            let r = riesz_project(&f);
            let rm = riesz_minus(&f);
            prop_assert_eq!(r.add(&rm).unwrap(), f.clone());
            prop_assert_eq!(riesz_project(&r), r.clone());
            prop_assert!(riesz_minus(&r).terms().all(|(_, c)| c.iter().all(|v| v.norm() == 0.0)));
            // smoothing is diagonal and commutes with the projection
            let a = smooth(&riesz_project(&f), n).unwrap();
            let b = riesz_project(&smooth(&f, n).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}

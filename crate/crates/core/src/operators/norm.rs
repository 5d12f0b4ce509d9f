use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{adjoint_apply, apply_rows, to_matrix, CoupleOperator};
use crate::error::{check_dim, Error, Result};
use crate::spaces::{l2, Exponent, NormModel};
use crate::{seeds, NormBracket, SolverTag, Witness, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpNormConfig {
    /// Phases per coordinate for `p = inf` sources.
    pub phases: usize,
    pub refined_phases: usize,
    /// Largest number of phase patterns enumerated.
    pub enumeration_limit: u64,
    /// Random starts for the ascent, in addition to basis and singular vectors.
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for OpNormConfig {
    fn default() -> Self {
        OpNormConfig { phases: 16, refined_phases: 64, enumeration_limit: 1 << 20, starts: 4, iterations: 200, seed: 0 }
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn lattice(m: &NormModel) -> Option<(Exponent, &[f64])> {
    match m {
        NormModel::WeightedLp { p, weights } => Some((*p, weights)),
        NormModel::Polytope { .. } => None,
    }
}

pub(super) fn is_diagonal(rows: &[Vec<C64>]) -> bool {
    rows.iter().enumerate().all(|(i, r)| r.len() == rows.len() && r.iter().enumerate().all(|(j, c)| i == j || *c == zero()))
}

fn basis(n: usize, j: usize, scale: f64) -> Vec<C64> {
    let mut e = vec![zero(); n];
    e[j] = C64::new(scale, 0.0);
    e
}

/// Projected ascent of `||A x||_tgt` over `{gauge(x) <= 1}`; iterates are kept on
/// the sphere by radial retraction. `linear_max`, when given, returns a
/// maximizer of `Re <x, g>` over the feasible set and is tried at every step.
pub(crate) fn ascent(
    rows: &[Vec<C64>],
    tgt: &NormModel,
    gauge: &dyn Fn(&[C64]) -> f64,
    linear_max: Option<&dyn Fn(&[C64]) -> Vec<C64>>,
    starts: &[Vec<C64>],
    iterations: usize,
) -> (f64, Vec<C64>, usize) {
    let retract = |x: &[C64]| -> Option<Vec<C64>> {
        let g = gauge(x);
        (g > 0.0 && g.is_finite()).then(|| x.iter().map(|c| c / g).collect())
    };
    let value = |x: &[C64]| tgt.norm_of(&apply_rows(rows, x));
    let mut best = (0.0, starts.first().cloned().unwrap_or_default());
    let mut total = 0;
    for s in starts {
        let Some(mut x) = retract(s) else { continue };
        let mut v = value(&x);
        let mut eta = 1.0;
        for _ in 0..iterations {
            total += 1;
            let g = adjoint_apply(rows, &tgt.subgradient(&apply_rows(rows, &x)));
            let gn = l2(&g);
            if gn == 0.0 {
                break;
            }
            let mut improved = false;
            if let Some(lm) = linear_max {
                if let Some(y) = retract(&lm(&g)) {
                    let vy = value(&y);
                    if vy > v * (1.0 + 1e-15) {
                        x = y;
                        v = vy;
                        improved = true;
                    }
                }
            }
            if !improved {
                let scale = l2(&x) / gn;
                while eta > 1e-10 {
                    let cand: Vec<C64> = x.iter().zip(&g).map(|(a, b)| a + b * (eta * scale)).collect();
                    if let Some(y) = retract(&cand) {
                        let vy = value(&y);
                        if vy > v * (1.0 + 1e-15) {
                            x = y;
                            v = vy;
                            improved = true;
                            eta *= 2.0;
                            break;
                        }
                    }
                    eta *= 0.5;
                }
            }
            if !improved {
                break;
            }
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    (best.0, best.1, total)
}

/// Starting points: basis vectors, the top right singular vector, seeded Gaussians.
pub(crate) fn ascent_starts(rows: &[Vec<C64>], n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut starts: Vec<Vec<C64>> = (0..n).map(|j| basis(n, j, 1.0)).collect();
    let svd = to_matrix(rows).svd(false, true);
    if let Some(vt) = svd.v_t {
        let (imax, _) = svd.singular_values.iter().enumerate().fold((0, -1.0), |a, (i, s)| if *s > a.1 { (i, *s) } else { a });
        starts.push((0..n).map(|j| vt[(imax, j)].conj()).collect());
    }
    for s in 0..count {
        let mut rng = seeds::child_rng(seed, s as u64);
        starts.push((0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect());
    }
    starts
}

/// Upper bounds valid for any pair of norms.
fn envelope(rows: &[Vec<C64>], src: &NormModel, tgt: &NormModel) -> f64 {
    let n = src.dim();
    let sigma = to_matrix(rows).singular_values().max();
    let (lo_src, _) = src.euclidean_bounds();
    let (_, hi_tgt) = tgt.euclidean_bounds();
    let euclid = hi_tgt * sigma / lo_src;
    let cols = (0..n).map(|j| tgt.norm_of(&apply_rows(rows, &basis(n, j, 1.0)))).fold(0.0, f64::max);
    let mut best = euclid.min(cols * src.l1_embedding_constant());
    if src.is_lattice() {
        let rows_dual = rows
            .iter()
            .map(|r| src.dual_norm_upper(&r.iter().map(|c| c.conj()).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        best = best.min(tgt.linf_image_constant() * rows_dual);
    }
    best
}

/// `||A||_{src -> tgt}` as a bracket.
pub fn op_norm(rows: &[Vec<C64>], src: &NormModel, tgt: &NormModel, cfg: &OpNormConfig) -> Result<NormBracket> {
    check_dim(tgt.dim(), rows.len())?;
    let n = src.dim();
    for r in rows {
        check_dim(n, r.len())?;
    }
    if cfg.phases < 3 || cfg.refined_phases < cfg.phases {
        return Err(Error::InvalidParameter("phase grids need at least 3 phases".into()));
    }
    if rows.iter().all(|r| r.iter().all(|c| *c == zero())) {
        return Ok(NormBracket::exact(0.0, SolverTag::Exact).with_witness(Witness::Vector { x: basis(n, 0, 1.0) }));
    }
    let src_l = lattice(src);
    let tgt_l = lattice(tgt);

    // Source l_1: the extreme points are the scaled basis vectors.
    if let Some((Exponent::Finite(p), w)) = src_l {
        if p == 1.0 {
            let (j, v) = (0..n)
                .map(|j| (j, tgt.norm_of(&apply_rows(rows, &basis(n, j, 1.0))) / w[j]))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            return Ok(NormBracket::exact(v, SolverTag::ExtremePoints).with_witness(Witness::Vector { x: basis(n, j, 1.0 / w[j]) }));
        }
    }

    // Target l_inf over a lattice source: the largest weighted row functional.
    if let (Some((Exponent::Infinity, wt)), Some(_)) = (tgt_l, src_l) {
        let dual = src.dual_space()?;
        let (i, v) = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i, wt[i] * dual.norm_of(&r.iter().map(|c| c.conj()).collect::<Vec<_>>())))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let x = dual.subgradient(&rows[i].iter().map(|c| c.conj()).collect::<Vec<_>>());
        return Ok(NormBracket::exact(v, SolverTag::ClosedForm).with_witness(Witness::Vector { x }));
    }

    // Diagonal maps between lattices.
    if let (Some((p, w)), Some((q, wt))) = (src_l, tgt_l) {
        if is_diagonal(rows) {
            let mult: Vec<f64> = (0..n).map(|i| rows[i][i].norm() * wt[i] / w[i]).collect();
            let (rp, rq) = (p.reciprocal(), q.reciprocal());
            let (v, s) = if rp >= rq {
                let (i, v) = mult.iter().copied().enumerate().fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
                (v, basis(n, i, 1.0).iter().map(|c| c.re).collect::<Vec<f64>>())
            } else {
                let r = Exponent::from_reciprocal(rq - rp);
                let v = crate::spaces::weighted_lp_norm(r, &vec![1.0; n], mult.iter().copied());
                // Hoelder extremal: s_i = (m_i / ||m||_r)^(r / p)
                let rr = (rq - rp) / rp.max(f64::MIN_POSITIVE);
                let s = mult.iter().map(|m| if rp == 0.0 { 1.0 } else { (m / v).powf(1.0 / rr) }).collect();
                (v, s)
            };
            let x = s.iter().zip(w).map(|(si, wi)| C64::new(si / wi, 0.0)).collect();
            return Ok(NormBracket::exact(v, SolverTag::ClosedForm).with_witness(Witness::Vector { x }));
        }
    }

    // Weighted l_2 to weighted l_2: a spectral norm.
    if let (Some((Exponent::Finite(p), w)), Some((Exponent::Finite(q), wt))) = (src_l, tgt_l) {
        if p == 2.0 && q == 2.0 {
            let b = to_matrix(rows);
            let b = nalgebra::DMatrix::from_fn(b.nrows(), n, |i, j| b[(i, j)] * (wt[i] / w[j]));
            let svd = b.svd(false, true);
            let (imax, s) = svd.singular_values.iter().enumerate().fold((0, -1.0), |a, (i, s)| if *s > a.1 { (i, *s) } else { a });
            let vt = svd.v_t.expect("requested");
            let x = (0..n).map(|j| vt[(imax, j)].conj() / w[j]).collect();
            return Ok(NormBracket::exact(s, SolverTag::Svd).with_witness(Witness::Vector { x }));
        }
    }

    // Source l_inf: the extreme points form a torus, sampled on a phase grid.
    if let Some((Exponent::Infinity, w)) = src_l {
        let pick = [cfg.refined_phases, cfg.phases]
            .into_iter()
            .find(|g| (*g as f64).powi(n as i32 - 1) <= cfg.enumeration_limit as f64);
        if let Some(g) = pick {
            let (v, x, count) = phase_grid(rows, tgt, w, g);
            let upper = (v / (std::f64::consts::PI / g as f64).cos()).min(envelope(rows, src, tgt)).max(v);
            return Ok(NormBracket::new(v, upper, SolverTag::PhaseGrid, Witness::Vector { x }).with_iterations(count, true));
        }
    }

    let starts = ascent_starts(rows, n, cfg.starts, cfg.seed);
    let gauge = |x: &[C64]| src.norm_of(x);
    let dual = src.dual_space().ok();
    let lm = dual.as_ref().map(|d| move |g: &[C64]| d.subgradient(g));
    let lm_ref: Option<&dyn Fn(&[C64]) -> Vec<C64>> = lm.as_ref().map(|f| f as &dyn Fn(&[C64]) -> Vec<C64>);
    let (v, x, iters) = ascent(rows, tgt, &gauge, lm_ref, &starts, cfg.iterations);
    let upper = envelope(rows, src, tgt).max(v);
    Ok(NormBracket::new(v, upper, SolverTag::Envelope, Witness::Vector { x }).with_iterations(iters, true))
}

/// Every phase pattern with the first phase fixed. Each unit complex number
/// scaled by `cos(pi / G)` lies in the convex hull of the `G` grid phases, so the
/// true maximum is at most the grid maximum divided by `cos(pi / G)`.
fn phase_grid(rows: &[Vec<C64>], tgt: &NormModel, w: &[f64], g: usize) -> (f64, Vec<C64>, usize) {
    let n = w.len();
    let units: Vec<C64> = (0..g).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / g as f64)).collect();
    // columns scaled by 1/w_j
    let cols: Vec<Vec<C64>> = (0..n).map(|j| rows.iter().map(|r| r[j] / w[j]).collect()).collect();
    let m = rows.len();
    let mut idx = vec![0usize; n];
    let mut best = (-1.0, idx.clone());
    let mut y = vec![zero(); m];
    let mut count = 0;
    loop {
        y.iter_mut().for_each(|v| *v = zero());
        for j in 0..n {
            let u = units[idx[j]];
            for (yi, c) in y.iter_mut().zip(&cols[j]) {
                *yi += c * u;
            }
        }
        let v = tgt.norm_of(&y);
        count += 1;
        if v > best.0 {
            best = (v, idx.clone());
        }
        // odometer over coordinates 1..n
        let mut k = 1;
        while k < n {
            idx[k] += 1;
            if idx[k] < g {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k >= n {
            break;
        }
    }
    let x = best.1.iter().zip(w).map(|(k, wj)| units[*k] / *wj).collect();
    (best.0, x, count)
}

/// `(||T||_{X0 -> Y0}, ||T||_{X1 -> Y1})`.
pub fn couple_operator_norm(t: &CoupleOperator, cfg: &OpNormConfig) -> Result<(NormBracket, NormBracket)> {
    Ok((t.endpoint_norm(0, 0, cfg)?, t.endpoint_norm(1, 1, cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{sample_complex_vector, Couple, GenConfig};
    use proptest::prelude::*;
    use rand::Rng;

    fn lp(p: Exponent, w: Vec<f64>) -> NormModel {
        NormModel::weighted_lp(p, w).unwrap()
    }

    fn random_rows(seed: u64, m: usize, n: usize) -> Vec<Vec<C64>> {
        let mut rng = seeds::rng(seed);
        (0..m).map(|_| sample_complex_vector(&mut rng, n)).collect()
    }

    fn identity(n: usize) -> Vec<Vec<C64>> {
        (0..n).map(|i| basis(n, i, 1.0)).collect()
    }

    /// Ratio at a vector, the oracle for any lower bound.
    fn ratio(rows: &[Vec<C64>], src: &NormModel, tgt: &NormModel, x: &[C64]) -> f64 {
        tgt.norm_of(&apply_rows(rows, x)) / src.norm_of(x)
    }

    #[test]
    fn identity_and_diagonal_examples() {
        let cfg = OpNormConfig::default();
        for p in [Exponent::Finite(1.0), Exponent::Finite(1.7), Exponent::Finite(2.0), Exponent::Infinity] {
            let sp = lp(p, vec![1.0, 2.0, 0.5]);
            let b = op_norm(&identity(3), &sp, &sp, &cfg).unwrap();
            assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12, "{p:?}");
            let flat = lp(p, vec![1.0; 3]);
            let d = vec![vec![C64::new(0.5, 0.0), zero(), zero()], vec![zero(), C64::new(0.0, -3.0), zero()], vec![zero(), zero(), C64::new(1.0, 0.0)]];
            let b = op_norm(&d, &flat, &flat, &cfg).unwrap();
            assert!((b.upper - 3.0).abs() < 1e-12 && b.gap() == 0.0);
        }
    }

    #[test]
    fn l1_source_matches_column_enumeration() {
        let cfg = OpNormConfig::default();
        let rows = random_rows(3, 4, 3);
        let src = lp(Exponent::Finite(1.0), vec![0.5, 1.0, 3.0]);
        let tgt = NormModel::polytope(random_rows(4, 5, 4)).unwrap();
        let b = op_norm(&rows, &src, &tgt, &cfg).unwrap();
        let want = (0..3).map(|j| tgt.norm_of(&apply_rows(&rows, &basis(3, j, 1.0))) / [0.5, 1.0, 3.0][j]).fold(0.0, f64::max);
        assert_eq!(b.upper, want);
        let Witness::Vector { x } = &b.witness else { panic!() };
        assert!((ratio(&rows, &src, &tgt, x) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn diagonal_p_greater_than_q_uses_hoelder() {
        // l_inf -> l_1 diagonal: the sum of multipliers
        let d = vec![vec![C64::new(1.0, 0.0), zero()], vec![zero(), C64::new(0.0, 2.0)]];
        let b = op_norm(&d, &lp(Exponent::Infinity, vec![1.0, 1.0]), &lp(Exponent::Finite(1.0), vec![1.0, 1.0]), &OpNormConfig::default()).unwrap();
        assert!((b.upper - 3.0).abs() < 1e-12);
        // l_4 -> l_2 with weights: ||m||_4 since 1/r = 1/2 - 1/4
        let src = lp(Exponent::Finite(4.0), vec![1.0, 2.0]);
        let tgt = lp(Exponent::Finite(2.0), vec![3.0, 1.0]);
        let b = op_norm(&d, &src, &tgt, &OpNormConfig::default()).unwrap();
        let m: [f64; 2] = [3.0, 1.0];
        let want = (m[0].powi(4) + m[1].powi(4)).powf(0.25);
        assert!((b.upper - want).abs() < 1e-12);
        let Witness::Vector { x } = &b.witness else { panic!() };
        assert!((ratio(&d, &src, &tgt, x) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn linf_source_phase_grid_brackets_truth() {
        let cfg = OpNormConfig::default();
        let rows = random_rows(8, 3, 3);
        let src = lp(Exponent::Infinity, vec![1.0, 0.7, 1.3]);
        let tgt = lp(Exponent::Finite(1.5), vec![1.0, 2.0, 0.5]);
        let b = op_norm(&rows, &src, &tgt, &cfg).unwrap();
        assert_eq!(b.solver, SolverTag::PhaseGrid);
        assert!(b.upper <= b.lower / (std::f64::consts::PI / 64.0).cos() * (1.0 + 1e-12));
        // dense independent search over phases
        let mut brute = 0.0f64;
        let g = 200;
        for a in 0..g {
            for c in 0..g {
                let x = vec![
                    C64::new(1.0, 0.0),
                    C64::from_polar(1.0 / 0.7, 2.0 * std::f64::consts::PI * a as f64 / g as f64),
                    C64::from_polar(1.0 / 1.3, 2.0 * std::f64::consts::PI * c as f64 / g as f64),
                ];
                brute = brute.max(ratio(&rows, &src, &tgt, &x));
            }
        }
        assert!(brute <= b.upper * (1.0 + 1e-12));
        assert!(b.lower <= brute * (1.0 + 1e-3));
    }

    #[test]
    fn euclidean_is_spectral() {
        let rows = random_rows(12, 3, 4);
        let src = lp(Exponent::Finite(2.0), vec![1.0; 4]);
        let tgt = lp(Exponent::Finite(2.0), vec![1.0; 3]);
        let b = op_norm(&rows, &src, &tgt, &OpNormConfig::default()).unwrap();
        let s = to_matrix(&rows).singular_values().max();
        assert!((b.upper - s).abs() < 1e-12 * s);
        let Witness::Vector { x } = &b.witness else { panic!() };
        assert!((ratio(&rows, &src, &tgt, x) - s).abs() < 1e-10 * s);
    }

    #[test]
    fn couple_norms_of_identity_and_zero() {
        let cp = GenConfig { seed: 5, dim_min: 3, dim_max: 3, ..GenConfig::default() }.random_couple();
        let cfg = OpNormConfig::default();
        let t = CoupleOperator::new(identity(3), cp.clone(), cp.clone()).unwrap();
        let (a, b) = couple_operator_norm(&t, &cfg).unwrap();
        assert!((a.upper - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        let z = CoupleOperator::new(vec![vec![zero(); 3]; 3], cp.clone(), cp).unwrap();
        let (a, b) = couple_operator_norm(&z, &cfg).unwrap();
        assert_eq!((a.upper, b.upper), (0.0, 0.0));
        let r = CoupleOperator::new(random_rows(1, 3, 3), t.source().clone(), t.target().clone()).unwrap();
        let (a, _) = couple_operator_norm(&r, &cfg).unwrap();
        assert_eq!(a, op_norm(r.rows(), r.source().space0(), r.target().space0(), &cfg).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn brackets_are_valid(seed in any::<u64>()) {
            let gen = GenConfig { seed, dim_max: 4, polytope_prob: 0.3, ..GenConfig::default() };
            let mut rng = seeds::rng(seed);
            let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=4));
            let src = gen.sample_space(&mut rng, n);
            let tgt = gen.sample_space(&mut rng, m);
            let rows = random_rows(seed ^ 1, tgt.dim(), src.dim());
            let b = op_norm(&rows, &src, &tgt, &OpNormConfig::default()).unwrap();
            prop_assert!(b.lower <= b.upper);
            let Witness::Vector { x } = &b.witness else { panic!() };
            let r = ratio(&rows, &src, &tgt, x);
            prop_assert!((r - b.lower).abs() <= 1e-9 * r.max(1e-300));
            for k in 0..20u64 {
                let mut r2 = seeds::child_rng(seed, k);
                let y = sample_complex_vector(&mut r2, src.dim());
                prop_assert!(ratio(&rows, &src, &tgt, &y) <= b.upper * (1.0 + 1e-9));
            }
        }

        #[test]
        fn submultiplicative(seed in any::<u64>()) {
            let gen = GenConfig { seed, dim_min: 2, dim_max: 4, polytope_prob: 0.3, ..GenConfig::default() };
            let mut rng = seeds::rng(seed);
            let spaces: Vec<NormModel> = (0..3).map(|_| { let d = rng.random_range(2..=4); gen.sample_space(&mut rng, d) }).collect();
            let a = random_rows(seed ^ 2, spaces[2].dim(), spaces[1].dim());
            let b = random_rows(seed ^ 3, spaces[1].dim(), spaces[0].dim());
            let ab: Vec<Vec<C64>> = (0..a.len())
                .map(|i| (0..spaces[0].dim()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
                .collect();
            let cfg = OpNormConfig::default();
            let nab = op_norm(&ab, &spaces[0], &spaces[2], &cfg).unwrap();
            let na = op_norm(&a, &spaces[1], &spaces[2], &cfg).unwrap();
            let nb = op_norm(&b, &spaces[0], &spaces[1], &cfg).unwrap();
            prop_assert!(nab.lower <= na.upper * nb.upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn couple_operator_dims_checked() {
        let cp2 = Couple::new(lp(Exponent::Finite(1.0), vec![1.0; 2]), lp(Exponent::Finite(2.0), vec![1.0; 2])).unwrap();
        let cp3 = Couple::new(lp(Exponent::Finite(1.0), vec![1.0; 3]), lp(Exponent::Finite(2.0), vec![1.0; 3])).unwrap();
        assert!(CoupleOperator::new(random_rows(0, 3, 3), cp2.clone(), cp3.clone()).is_err());
        assert!(CoupleOperator::new(random_rows(0, 3, 2), cp2, cp3).is_ok());
    }
}

//! Experiments on operators between couples and their compactness quantities.

use rand::Rng;
use serde_json::json;

use super::sampler::{ball_family, image_at};
use super::{fmax, trials, EffectiveFamilySampler, ExperimentReport, TrialRecord, VerifyConfig};
use crate::annulus::{
    boundary_norm_f, circle_l2_norm, circle_sup_refined, riesz_l2_constant, riesz_minus, smooth, vp_multiplier,
    AnnulusSpec, LaurentFamily,
};
use crate::error::Result;
use crate::functors::lattice_theta_space;
use crate::operators::{approx_numbers, apply_rows, constrained_sup, fourier_coefficient_bound, op_norm, CoupleOperator};
use crate::spaces::{sample_complex_vector, NormModel};
use crate::{seeds, C64};

/// Largest value of `v` over the trials of `kind`.
fn kind_max(t: &[TrialRecord], kind: &str, v: &str) -> f64 {
    fmax(t.iter().filter(|r| r.kind == kind).map(|r| r.get(v)))
}

pub(crate) fn smoothing(cfg: &VerifyConfig, seed: u64) -> Result<ExperimentReport> {
    let c = &cfg.smoothing;
    let gen = crate::spaces::GenConfig { seed, ..cfg.generator.clone() };
    let thetas = &cfg.thetas;
    let mut rep = ExperimentReport::new(
        "smoothing",
        "Uniform F-norm bound for de la Vallee Poussin smoothing on random families, and decay of the smoothing defect of the canonical compact operator on tail families.",
        json!({"seed": seed, "thetas": thetas, "generator": gen, "canonical": cfg.canonical, "smoothing": c}),
    );
    let spec = AnnulusSpec::new(c.points)?;
    let sweep = trials(c.families, seeds::derive(seed, 1), |i, s| {
        let couple = gen.couple_at(i);
        let f = ball_family(&couple, c.degree, None, s)?;
        let base = boundary_norm_f(&f, &couple, &spec)?.value;
        let mut worst: f64 = 0.0;
        let mut arg = 0usize;
        for order in 1..=c.n_max {
            let r = boundary_norm_f(&smooth(&f, order)?, &couple, &spec)?.value / base;
            if r > worst {
                worst = r;
                arg = order;
            }
        }
        Ok(TrialRecord::new("family", i, s).value("ratio_max", worst).value("argmax_n", arg as f64).pass(worst <= c.bound))
    })?;
    let worst = kind_max(&sweep, "family", "ratio_max");
    rep.stat("ratio_max", worst);
    rep.check("uniform_bound", worst <= c.bound, worst, c.bound);

    let mut table_err: f64 = 0.0;
    for order in 1..=c.n_max {
        for k in -(3 * c.n_max as i64)..=3 * c.n_max as i64 {
            let want = (2.0 - k.abs() as f64 / order as f64).clamp(0.0, 1.0);
            table_err = table_err.max((vp_multiplier(k, order) - want).abs());
        }
    }
    rep.check("multiplier_table", table_err == 0.0, table_err, 0.0);
    let m64 = vp_multiplier(6, 4);
    rep.check("multiplier_k6_n4", m64 == 0.5, m64, 0.5);
    let couple = gen.couple_at(1_000_000);
    let v = sample_complex_vector(&mut seeds::rng(seeds::derive(seed, 2)), couple.dim());
    let mono = LaurentFamily::monomial(&v, 6);
    let half = boundary_norm_f(&smooth(&mono, 4)?, &couple, &spec)?.value / boundary_norm_f(&mono, &couple, &spec)?.value;
    rep.check("single_coefficient_halved", (half - 0.5).abs() <= 1e-15, half, 0.5);
    let low = LaurentFamily::monomial(&v, -3).add(&LaurentFamily::constant(&v))?;
    let one = boundary_norm_f(&smooth(&low, 4)?, &couple, &spec)?.value / boundary_norm_f(&low, &couple, &spec)?.value;
    rep.check("low_degree_unchanged", one == 1.0, one, 1.0);

    let t = cfg.canonical.operator()?;
    let ys: Vec<NormModel> = thetas.iter().map(|th| lattice_theta_space(t.target(), *th)).collect::<Result<_>>()?;
    let per = (c.tail_samples * thetas.len()) as u64;
    let tails = trials(c.offsets.len() * per as usize, seeds::derive(seed, 3), |i, s| {
        let offset = c.offsets[(i / per) as usize];
        let j = ((i % per) as usize) % thetas.len();
        let sampler = EffectiveFamilySampler::new(s, offset + c.tail_window, offset)?;
        let f = sampler.sample(t.source(), 0)?;
        let g = f.add(&smooth(&f, offset)?.scaled(-1.0))?;
        let q = ys[j].norm_of(&image_at(t.rows(), &g, thetas[j]));
        Ok(TrialRecord::new("tail", i, s).value("offset", offset as f64).value("theta", thetas[j]).value("defect", q))
    })?;
    let maxima: Vec<f64> = c
        .offsets
        .iter()
        .map(|o| fmax(tails.iter().filter(|r| r.get("offset") == *o as f64).map(|r| r.get("defect"))))
        .collect();
    for (o, m) in c.offsets.iter().zip(&maxima) {
        rep.stat(&format!("defect_max_n{o}"), *m);
    }
    let rises = maxima.windows(2).filter(|w| w[1] >= w[0]).count();
    rep.check("defect_decreasing", rises == 0, rises as f64, 0.0);
    let last = *maxima.last().expect("offsets validated nonempty");
    rep.check("defect_below_tolerance", last <= c.tolerance, last, c.tolerance);
    Ok(rep.finish([sweep, tails].concat()))
}

pub(crate) fn coefficient_decay(cfg: &VerifyConfig, seed: u64) -> Result<ExperimentReport> {
    let c = &cfg.coefficient_decay;
    let opc = &cfg.op_norm;
    let thetas = &cfg.thetas;
    let mut rep = ExperimentReport::new(
        "coefficient_decay",
        "Weighted coefficient bounds of the canonical compact operator across k, and the count of large image coefficients of unit-ball families against the functional-count bound.",
        json!({"seed": seed, "thetas": thetas, "canonical": cfg.canonical, "op_norm": opc, "coefficient_decay": c}),
    );
    let t = cfg.canonical.operator()?;
    let ks: Vec<i64> = (-c.k_max..=c.k_max).collect();
    let nk = ks.len() as u64;
    let bounds = trials(thetas.len() * ks.len(), seeds::derive(seed, 1), |i, s| {
        let theta = thetas[(i / nk) as usize];
        let k = ks[(i % nk) as usize];
        let b = fourier_coefficient_bound(&t, k, theta, opc)?;
        Ok(TrialRecord::new("bound", i, s)
            .value("theta", theta)
            .value("k", k as f64)
            .value("lower", b.lower)
            .value("upper", b.upper)
            .pass(b.lower <= b.upper))
    })?;
    let mut far_ratio: f64 = 0.0;
    let mut rises = 0usize;
    for (j, theta) in thetas.iter().enumerate() {
        let u: Vec<f64> = bounds[j * ks.len()..(j + 1) * ks.len()].iter().map(|r| r.get("upper")).collect();
        let peak = (0..u.len()).fold(0, |a, b| if u[b] > u[a] { b } else { a });
        rises += (peak..u.len() - 1).filter(|&i| u[i + 1] > u[i]).count();
        rises += (1..=peak).filter(|&i| u[i - 1] > u[i]).count();
        let zero = u[c.k_max as usize];
        let far = fmax(ks.iter().zip(&u).filter(|(k, _)| k.abs() >= c.k_far).map(|(_, v)| *v));
        rep.stat(&format!("k0_upper_theta{theta}"), zero);
        rep.stat(&format!("peak_k_theta{theta}"), ks[peak] as f64);
        rep.stat(&format!("far_ratio_theta{theta}"), far / zero);
        far_ratio = far_ratio.max(far / zero);
    }
    let sane = bounds.iter().all(|r| r.passed);
    rep.check("brackets_ordered", sane, sane as u8 as f64, 1.0);
    rep.check("decay_at_k_far", far_ratio < c.decay_ratio, far_ratio, c.decay_ratio);
    rep.check("monotone_beyond_peak", rises == 0, rises as f64, 0.0);

    let zero_rows = vec![vec![C64::new(0.0, 0.0); t.source().dim()]; t.target().dim()];
    let zero_t = CoupleOperator::new(zero_rows, t.source().clone(), t.target().clone())?;
    let mut zero_max: f64 = 0.0;
    let mut k0_ok = true;
    for theta in thetas {
        for k in [-c.k_max, -1, 0, 1, c.k_max] {
            zero_max = zero_max.max(fourier_coefficient_bound(&zero_t, k, *theta, opc)?.upper);
        }
        let y = lattice_theta_space(t.target(), *theta)?;
        let direct = constrained_sup(t.rows(), t.source().space0(), t.source().space1(), &y, 1.0, opc)?;
        let b = fourier_coefficient_bound(&t, 0, *theta, opc)?;
        k0_ok &= b.overlaps(&direct, 1e-9 * direct.upper);
    }
    rep.check("zero_operator", zero_max == 0.0, zero_max, 0.0);
    rep.check("k0_is_intersection_ball_image", k0_ok, k0_ok as u8 as f64, 1.0);

    // functional count: Euclidean numerical rank of X0 -> Y0 at delta / 2
    let (x0, y0) = (t.source().space0(), t.target().space0());
    let n = x0.dim().min(y0.dim());
    let a = approx_numbers(t.rows(), x0, y0, n, opc)?;
    let nd = c.deltas.len() as u64;
    let counts = trials(c.families * c.deltas.len(), seeds::derive(seed, 2), |i, s| {
        let delta = c.deltas[(i % nd) as usize];
        let f = ball_family(t.source(), c.degree, None, seeds::derive(s, 0))?;
        let count = f.terms().filter(|(_, v)| y0.norm_of(&apply_rows(t.rows(), v)) > delta).count();
        let rank = a.iter().filter(|b| b.upper > delta / 2.0).count().max(1);
        let bound = 4.0 * rank as f64 / (delta * delta);
        Ok(TrialRecord::new("count", i, s)
            .value("delta", delta)
            .value("count", count as f64)
            .value("functionals", rank as f64)
            .value("bound", bound)
            .pass(count as f64 <= bound))
    })?;
    let ok = counts.iter().all(|r| r.passed);
    let worst = fmax(counts.iter().map(|r| r.get("count") / r.get("bound")));
    rep.check("large_coefficient_count", ok, worst, 1.0);
    Ok(rep.finish([bounds, counts].concat()))
}

pub(crate) fn compactness_propagation(cfg: &VerifyConfig, seed: u64) -> Result<ExperimentReport> {
    let c = &cfg.compactness_propagation;
    let opc = &cfg.op_norm;
    let thetas = &cfg.thetas;
    let mut rep = ExperimentReport::new(
        "compactness_propagation",
        "Approximation numbers of the canonical diagonal operator on interpolated lattices against the endpoint decay, and the finite-order diameter bound for smoothed images of unit-ball families.",
        json!({"seed": seed, "thetas": thetas, "canonical": cfg.canonical, "op_norm": opc, "compactness_propagation": c}),
    );
    let t = cfg.canonical.operator()?;
    let (src, tgt) = (t.source(), t.target());
    let mut worst: f64 = 0.0;
    let mut records = Vec::new();
    for (j, theta) in thetas.iter().enumerate() {
        let a = approx_numbers(t.rows(), &lattice_theta_space(src, *theta)?, &lattice_theta_space(tgt, *theta)?, c.k_max, opc)?;
        for (k, b) in a.iter().enumerate() {
            let bound = 2f64.powf(-((k + 1) as f64) * (1.0 - theta));
            worst = worst.max(b.upper / bound);
            records.push(
                TrialRecord::new("approx", (j * c.k_max + k) as u64, seed)
                    .value("theta", *theta)
                    .value("k", (k + 1) as f64)
                    .value("a_k", b.upper)
                    .value("bound", bound)
                    .pass(b.upper <= (1.0 + c.tolerance) * bound),
            );
        }
    }
    rep.stat("approx_ratio_max", worst);
    rep.check("approx_interpolation", worst <= 1.0 + c.tolerance, worst, 1.0 + c.tolerance);
    let a0 = approx_numbers(t.rows(), src.space0(), tgt.space0(), c.k_max, opc)?;
    let err0 = fmax(a0.iter().enumerate().map(|(k, b)| (b.upper / 2f64.powf(-((k + 1) as f64)) - 1.0).abs()));
    rep.check("endpoint_decay", err0 <= 1e-12, err0, 1e-12);
    let n11 = t.endpoint_norm(1, 1, opc)?;
    rep.check("endpoint_norm_one", n11.contains(1.0, 1e-12), n11.upper, 1.0);
    let norm00 = op_norm(t.rows(), src.space0(), tgt.space0(), opc)?;
    rep.check("a1_is_norm", a0[0].overlaps(&norm00, 1e-12), a0[0].upper, norm00.upper);

    let seps = c.separations as u64;
    let per = seps * thetas.len() as u64;
    let diam = trials(c.orders.len() * c.sequences * per as usize, seeds::derive(seed, 1), |i, s| {
        let order = c.orders[(i / (c.sequences as u64 * per)) as usize];
        let sep = (i % seps) as usize + 1;
        let theta = thetas[((i / seps) % thetas.len() as u64) as usize];
        let fa = ball_family(src, c.degree, None, seeds::derive(s, 0))?;
        let fb = ball_family(src, c.degree, None, seeds::derive(s, 1))?;
        // keep the coordinates where the operator is at most 2^-sep
        let keep = |k| fa.coeff(k).iter().zip(fb.coeff(k)).enumerate().map(|(i, (a, b))| if i + 1 >= sep { a - b } else { C64::new(0.0, 0.0) }).collect::<Vec<_>>();
        let coeffs = (-(c.degree as i64)..=c.degree as i64).map(keep).collect();
        let g = LaurentFamily::from_coefficients(c.degree, coeffs)?;
        let d = smooth(&g.apply_matrix(t.rows())?, order)?;
        let tg = g.apply_matrix(t.rows())?;
        let band = (2 * order).min(c.degree) as i64;
        let eps = fmax((-band..=band).map(|k| tgt.space0().norm_of(tg.coeff(k))));
        let premise = 2.0 * 2f64.powi(-(sep as i32));
        let c1 = circle_sup_refined(&d, tgt.space1(), 1);
        let lhs = lattice_theta_space(tgt, theta)?.norm_of(&d.eval_at_theta(theta));
        let bound = ((4 * order + 1) as f64 * premise).powf(1.0 - theta) * c1.powf(theta);
        Ok(TrialRecord::new("diameter", i, s)
            .value("order", order as f64)
            .value("separation", sep as f64)
            .value("theta", theta)
            .value("eps", eps)
            .value("c1", c1)
            .value("lhs", lhs)
            .value("bound", bound)
            .pass(eps <= premise * (1.0 + 1e-12) && lhs <= c.diameter_factor * bound))
    })?;
    let ratio = fmax(diam.iter().map(|r| r.get("lhs") / r.get("bound")).filter(|v| v.is_finite()));
    rep.stat("diameter_ratio_max", ratio);
    let ok = diam.iter().all(|r| r.passed);
    rep.check("diameter_bound", ok, ratio, c.diameter_factor);
    records.extend(diam);
    Ok(rep.finish(records))
}

pub(crate) fn riesz_lemma8(cfg: &VerifyConfig, seed: u64) -> Result<ExperimentReport> {
    let c = &cfg.riesz_lemma8;
    let mut rep = ExperimentReport::new(
        "riesz_lemma8",
        "Riesz projection constant of Euclidean space and the sampled modulus of the negative-frequency part of a compact diagonal map. Finite dimensions make the surrounding theorems vacuous; only these ingredients are checked.",
        json!({"seed": seed, "canonical": cfg.canonical, "riesz_lemma8": c}),
    );
    let spec = AnnulusSpec::new(c.points)?;
    let cst = riesz_l2_constant(&NormModel::euclidean(c.dim), c.degree, &spec, c.trials, seeds::derive(seed, 1))?;
    rep.check("euclidean_riesz_constant_low", cst >= 1.0 - 1e-9, cst, 1.0 - 1e-9);
    rep.check("euclidean_riesz_constant_high", cst <= c.constant_max, cst, c.constant_max);

    let v = cfg.canonical.operator()?;
    let n = v.source().dim();
    let e = NormModel::euclidean(n);
    let decades = c.decades as f64;
    let d = c.degree as i64;
    let sample_phi = |s: u64, analytic: bool| -> Result<LaurentFamily> {
        let mut rng = seeds::rng(s);
        let rho: Vec<f64> = (0..n).map(|_| rng.random_range(-(n as f64)..=0.0)).collect();
        let coeffs = (-d..=d)
            .map(|k| {
                let x = sample_complex_vector(&mut rng, n);
                if analytic && k < 0 {
                    vec![C64::new(0.0, 0.0); n]
                } else {
                    x.iter().zip(&rho).map(|(z, r)| z * 2f64.powf(*r)).collect()
                }
            })
            .collect();
        let phi = LaurentFamily::from_coefficients(c.degree, coeffs)?;
        let size = 2.0 * 10f64.powf(-decades * rng.random_range(0.0..=1.0));
        Ok(phi.scaled(size / circle_l2_norm(&phi, &e, 0, &spec)?))
    };
    let samples = trials(c.samples, seeds::derive(seed, 2), |i, s| {
        let phi = sample_phi(s, false)?;
        let vphi = phi.apply_matrix(v.rows())?;
        let whole = circle_l2_norm(&vphi, &e, 0, &spec)?;
        let minus = circle_l2_norm(&riesz_minus(&vphi), &e, 0, &spec)?;
        let size = circle_l2_norm(&phi, &e, 0, &spec)?;
        Ok(TrialRecord::new("sample", i, s)
            .value("phi_norm", size)
            .value("v_phi", whole)
            .value("minus_v_phi", minus)
            .pass(size <= 2.0 * (1.0 + 1e-12)))
    })?;
    let steps = c.decades * c.per_decade;
    let grid: Vec<f64> = (0..=steps).rev().map(|j| 10f64.powf(-(j as f64) / c.per_decade as f64)).collect();
    let eta: Vec<f64> = grid
        .iter()
        .map(|delta| fmax(samples.iter().filter(|r| r.get("v_phi") <= *delta).map(|r| r.get("minus_v_phi"))))
        .collect();
    for (delta, h) in grid.iter().zip(&eta) {
        rep.stat(&format!("eta_hat_{delta:e}"), *h);
    }
    let bounded = samples.iter().all(|r| r.passed);
    rep.check("phi_in_ball", bounded, fmax(samples.iter().map(|r| r.get("phi_norm"))), 2.0);
    let drops = eta.windows(2).filter(|w| w[1] < w[0]).count();
    rep.check("eta_hat_nondecreasing", drops == 0, drops as f64, 0.0);
    let populated = samples.iter().filter(|r| r.get("v_phi") <= grid[0]).count();
    rep.check("smallest_delta_populated", populated > 0, populated as f64, 1.0);
    let (lo, hi) = (eta[0], eta[eta.len() - 1]);
    let ratio = if hi > 0.0 { lo / hi } else { f64::INFINITY };
    rep.check("eta_hat_decay", hi > 0.0 && lo <= c.ratio * hi, ratio, c.ratio);

    let mut analytic_max: f64 = 0.0;
    let mut zero_max: f64 = 0.0;
    let zero_rows = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..8 {
        let phi = sample_phi(seeds::derive(seed, 100 + i), true)?;
        let vphi = phi.apply_matrix(v.rows())?;
        analytic_max = analytic_max.max(circle_l2_norm(&riesz_minus(&vphi), &e, 0, &spec)?);
        let phi = sample_phi(seeds::derive(seed, 200 + i), false)?;
        zero_max = zero_max.max(circle_l2_norm(&riesz_minus(&phi.apply_matrix(&zero_rows)?), &e, 0, &spec)?);
    }
    rep.check("analytic_phi_vanishes", analytic_max == 0.0, analytic_max, 0.0);
    rep.check("zero_map_vanishes", zero_max == 0.0, zero_max, 0.0);
    Ok(rep.finish(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_runs_pass_and_repeat() {
        let mut cfg = VerifyConfig::default();
        cfg.smoothing.families = 10;
        cfg.smoothing.tail_samples = 2;
        cfg.coefficient_decay.families = 3;
        cfg.compactness_propagation.sequences = 1;
        cfg.riesz_lemma8.samples = 120;
        cfg.riesz_lemma8.trials = 8;
        for f in [smoothing, coefficient_decay, compactness_propagation, riesz_lemma8] {
            let a = f(&cfg, 5).unwrap();
            assert!(a.passed, "{}: {:?}", a.id, a.checks);
            assert_eq!(a, f(&cfg, 5).unwrap());
        }
    }
}

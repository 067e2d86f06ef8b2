//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use cfet::io::bundled_scheme;
use cfet::sampling::{positive_point, rng, signed_point, simplex_point};
use cfet::search::search_positive;
use cfet_core::certify::{
    certify_no_order5_y, check_key_inequality, ellipsoid_hyperplane_intersect, inductive_step_identity, Certificate,
    CertifyError, IdentityPoint, IntersectionQuery,
};
use cfet_core::engine::problem::dirichlet_laplacian_spectral_radius;
use cfet_core::engine::{amplification_probe, empirical_order, halving_steps, preset};
use cfet_core::linalg::{solve_exact_vec, Matrix};
use cfet_core::scalar::{int, rat};
use cfet_core::scheme::DerivedCoefficients;
use cfet_core::taylor::{
    exact_flow_coefficients, oracle_residuals, word_coefficients_closed, word_coefficients_recursive, Word,
};
use cfet_core::{derive_coefficients, residuals_order5, Rational, Scalar};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact(v: &[Rational]) -> Vec<Scalar> {
    v.iter().cloned().map(Scalar::Exact).collect()
}

fn order_condition_exactness() -> Check {
    let mid = residuals_order5(&derive_coefficients(&bundled_scheme("midpoint").unwrap()));
    ensure(mid.r_sum_b == Scalar::exact(0, 1) && mid.r_sum_y == Scalar::exact(0, 1), || "midpoint r_sum".into())?;
    ensure(mid.r_bhat_y == Scalar::exact(-1, 12), || format!("midpoint r_bhat_y = {}", mid.r_bhat_y))?;
    let cf4 = residuals_order5(&derive_coefficients(&bundled_scheme("cf4").unwrap()));
    let low = [&cf4.r_sum_b, &cf4.r_sum_y, &cf4.r_bhat_y, &cf4.r_bhat2];
    let worst = low.iter().map(|r| r.to_f64().abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("cf4 low residuals {worst:e}"))?;
    let dev = (cf4.r_bhat3.to_f64() + 1.0 / 480.0).abs();
    ensure(dev <= 1e-12, || format!("cf4 r_bhat3 off by {dev:e}"))?;
    Ok(format!("midpoint r_bhat_y = -1/12; cf4 max|r_1..4| = {worst:.1e}, r_bhat3 + 1/480 = {dev:.1e}"))
}

fn certificate_golden_value() -> Check {
    let Certificate::Gram(c) = certify_no_order5_y(&[rat(1, 2), rat(1, 2)]).map_err(|e| e.to_string())? else {
        return Err("expected a Gram certificate".into());
    };
    ensure(c.value == rat(739, 14700), || format!("value {}", c.value))?;
    ensure(c.margin == rat(1, 3675), || format!("margin {}", c.margin))?;
    ensure(c.infeasible, || "verdict feasible".into())?;
    Ok("value 739/14700, margin 1/3675, infeasible".into())
}

fn theorem_sweep() -> Check {
    let mut r = rng(2024);
    let mut min_margin: Option<Rational> = None;
    for i in 0..1000 {
        let stages = r.gen_range(2..=8);
        let b = simplex_point(&mut r, stages, 1000);
        let cert = certify_no_order5_y(&b).map_err(|e| format!("sample {i}: {e}"))?;
        let m = cert.margin().cloned().ok_or("missing margin")?;
        ensure(cert.infeasible() && m.is_positive(), || format!("COUNTEREXAMPLE at sample {i}: b = {b:?}"))?;
        if min_margin.as_ref().is_none_or(|cur| &m < cur) {
            min_margin = Some(m);
        }
    }
    Ok(format!("1000/1000 infeasible, min margin {:.3e}", min_margin.unwrap().to_f64().unwrap()))
}

fn key_inequality() -> Check {
    for b1 in [rat(1, 1), rat(2, 7), rat(13, 5)] {
        let r = check_key_inequality(std::slice::from_ref(&b1)).map_err(|e| e.to_string())?;
        let b5 = (0..5).fold(Rational::one(), |acc, _| acc * &b1);
        ensure(r.lhs == rat(27, 16) * b5, || format!("J=1 lhs {} for b1 = {b1}", r.lhs))?;
    }
    let mut r = rng(4);
    for i in 0..1000 {
        let stages = r.gen_range(1..=8);
        let b = positive_point(&mut r, stages, 40);
        let rep = check_key_inequality(&b).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("sample {i}: lhs {} >= bound {}", rep.lhs, rep.bound))?;
    }
    Ok("J=1 lhs = 27/16 b1^5; 1000/1000 strict".into())
}

fn inductive_identity() -> Check {
    let mut r = rng(1);
    let mut checked = 0;
    while checked < 100 {
        let v = signed_point(&mut r, 5, 50);
        let p = IdentityPoint {
            sigma_next: v[0].clone(),
            b_next: v[1].clone(),
            ese: v[2].clone(),
            esd: v[3].clone(),
            dsd: v[4].clone(),
        };
        match inductive_step_identity(&p) {
            Err(CertifyError::Pole) => continue,
            Err(e) => return Err(e.to_string()),
            Ok(d) => ensure(d.is_zero(), || format!("nonzero difference {d} at {p:?}"))?,
        }
        checked += 1;
    }
    Ok("100/100 points give exactly 0".into())
}

fn taylor_oracle() -> Check {
    let s = exact_flow_coefficients();
    let printed = [(1, 1), (1, 1), (1, 2), (1, 6), (1, 8), (1, 24), (1, 40), (1, 120)];
    for (w, (p, q)) in Word::SUBSET.iter().zip(printed) {
        ensure(s.get(w) == Some(&rat(p, q)), || format!("s_{w} = {:?}", s.get(w)))?;
    }
    let mut r = rng(6);
    for i in 0..500 {
        let stages = r.gen_range(1..=6);
        let b = exact(&signed_point(&mut r, stages, 20));
        let y = exact(&signed_point(&mut r, stages, 20));
        let rec = word_coefficients_recursive(&b, &y).map_err(|e| e.to_string())?;
        let closed = word_coefficients_closed(&b, &y).map_err(|e| e.to_string())?;
        for w in Word::subset() {
            ensure(rec.entries[&w] == closed.entries[&w], || format!("sample {i}: c_{w} differs"))?;
        }
        let dc = DerivedCoefficients::from_weights(b.clone(), y.clone()).map_err(|e| e.to_string())?;
        let direct = residuals_order5(&dc);
        ensure(oracle_residuals(&b, &y).map_err(|e| e.to_string())? == direct, || {
            format!("sample {i}: oracle residuals differ")
        })?;
    }
    Ok("s-table matches (s_011 = 1/40); 500/500 tables and residuals agree".into())
}

/// Bordered KKT system for `min xᵀSx` subject to `Aᵀx = γ`.
fn kkt_minimum(s: &Matrix<Rational>, normals: &[Vec<Rational>], offsets: &[Rational]) -> Option<Rational> {
    let n = s.rows();
    let m = normals.len();
    let kkt = Matrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => &s[(i, j)] * int(2),
        (true, false) => normals[j - n][i].clone(),
        (false, true) => normals[i - n][j].clone(),
        (false, false) => int(0),
    });
    let mut rhs = vec![int(0); n];
    rhs.extend_from_slice(offsets);
    let x = solve_exact_vec(&kkt, &rhs)?;
    Some(s.bilinear(&x[..n], &x[..n]))
}

fn gram_vs_kkt() -> Check {
    let mut r = rng(8);
    let to_f = |x: &Rational| x.to_f64().unwrap();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=n.min(3));
        let mm = Matrix::from_fn(n, n, |_, _| int(r.gen_range(-3..=3)));
        let s = mm.transpose().matmul(&mm).add(&Matrix::identity(n));
        let normals: Vec<Vec<Rational>> = (0..m)
            .map(|k| (0..n).map(|j| int(if k == j { 4 } else { 0 }) + rat(r.gen_range(-2..=2), 2)).collect())
            .collect();
        let offsets: Vec<Rational> = (0..m).map(|_| rat(r.gen_range(-9..=9), r.gen_range(1..=9))).collect();
        let level = rat(r.gen_range(0..=20), r.gen_range(1..=5));
        let oracle = kkt_minimum(&s, &normals, &offsets).ok_or_else(|| format!("query {i}: KKT singular"))?;
        let q = IntersectionQuery { normals: normals.clone(), offsets: offsets.clone(), quadric: s.clone(), level };
        let out = ellipsoid_hyperplane_intersect(&q).map_err(|e| format!("query {i}: {e}"))?;
        ensure(out.minimal_value == oracle, || format!("query {i}: exact {} vs {}", out.minimal_value, oracle))?;
        ensure(out.intersects == (oracle <= q.level), || format!("query {i}: verdict"))?;
        let fq = IntersectionQuery {
            normals: normals.iter().map(|a| a.iter().map(to_f).collect()).collect(),
            offsets: offsets.iter().map(to_f).collect(),
            quadric: s.map(to_f),
            level: to_f(&q.level),
        };
        let fv = ellipsoid_hyperplane_intersect(&fq).map_err(|e| e.to_string())?.minimal_value;
        let rel = (fv - to_f(&oracle)).abs() / to_f(&oracle).abs().max(1.0);
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("query {i}: float deviation {rel:e}"))?;
    }
    Ok(format!("200/200 exact matches; float path within {worst:.1e}"))
}

fn empirical_convergence() -> Check {
    let p = preset("noncommuting-2x2").unwrap();
    let taus = halving_steps(0.125, 5);
    let mut parts = Vec::new();
    for (name, lo, hi) in [("midpoint", 1.8, 2.2), ("cf4", 3.7, 4.3), ("left-endpoint", 0.8, 1.2)] {
        let rep = empirical_order(&bundled_scheme(name).unwrap(), &p, &taus).map_err(|e| e.to_string())?;
        let fit = rep.fitted_order.ok_or_else(|| format!("{name}: no fitted order"))?;
        ensure((lo..=hi).contains(&fit), || format!("{name}: fitted order {fit:.3} outside [{lo}, {hi}]"))?;
        parts.push(format!("{name} {fit:.3}"));
    }
    Ok(parts.join(", "))
}

fn stability_demo() -> Check {
    let p = preset("laplacian-64").unwrap();
    let rho = dirichlet_laplacian_spectral_radius(64);
    // |b_1| = 1/2 for the demo scheme.
    let tau = 5.0 / (0.5 * rho);
    let demo =
        amplification_probe(&bundled_scheme("negative-weight-demo").unwrap(), &p, tau).map_err(|e| e.to_string())?;
    let peak = demo.iter().copied().fold(0.0, f64::max);
    ensure(peak >= 5f64.exp() / 2.0, || format!("demo peak factor {peak:.3}"))?;
    let cf4 = amplification_probe(&bundled_scheme("cf4").unwrap(), &p, tau).map_err(|e| e.to_string())?;
    let cf4_peak = cf4.iter().copied().fold(0.0, f64::max);
    ensure(cf4_peak <= 1.0 + 1e-8, || format!("cf4 factor {cf4_peak:e}"))?;
    Ok(format!("demo peak {peak:.2} >= e^5/2 = {:.2}; cf4 peak {cf4_peak:.3e}", 5f64.exp() / 2.0))
}

fn search_floor() -> Check {
    let five = search_positive(2, 5, 200, 20240601, 1e-6).map_err(|e| e.to_string())?;
    ensure(five.best_residual_norm > 1e-3, || format!("order-5 floor {:e}", five.best_residual_norm))?;
    let four = search_positive(2, 4, 200, 20240601, 1e-6).map_err(|e| e.to_string())?;
    ensure(four.best_residual_norm <= 1e-10, || format!("order-4 residual {:e}", four.best_residual_norm))?;
    let want_b = [0.5, 0.5];
    let want_y = [1.0 / 12.0, 5.0 / 12.0];
    let dev = four
        .best_b
        .iter()
        .zip(&want_b)
        .chain(four.best_y.iter().zip(&want_y))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(dev <= 1e-8, || format!("order-4 point off by {dev:e}"))?;
    Ok(format!(
        "p=5 floor {:.4e}; p=4 residual {:.1e}, point within {dev:.1e}",
        five.best_residual_norm, four.best_residual_norm
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 10] = [
        ("order-condition exactness", 1, order_condition_exactness),
        ("certificate golden value", 1, certificate_golden_value),
        ("theorem property sweep", 60, theorem_sweep),
        ("key inequality", 60, key_inequality),
        ("inductive-step identity", 5, inductive_identity),
        ("Taylor oracle", 30, taylor_oracle),
        ("Gram formula vs constrained minimum", 30, gram_vs_kkt),
        ("empirical convergence", 60, empirical_convergence),
        ("positivity/stability demonstration", 30, stability_demo),
        ("search floor", 120, search_floor),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= Duration::from_secs(*budget) {
                Ok(msg)
            } else {
                Err(format!("{msg}; over the {budget} s budget"))
            }
        });
        match result {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{:.2} s]", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{:.2} s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

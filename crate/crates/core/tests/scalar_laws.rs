//! Law-level checks of the scalar processes: moments, two-sample law
//! equivalence with the matrix diffusion, integrator-form consistency,
//! and the intermittency statistics.

use proptest::prelude::*;
use sl2drift::rng::{seed_stream, standard_normal};
use sl2drift::scalar::*;
use sl2drift::sl2::{frobenius_r, CovarianceSpec, Sl2Walker};
use sl2drift::stats::*;

const E: f64 = std::f64::consts::E;

#[test]
fn r_scalar_moments() {
    let n = 100_000;
    let vals: Vec<f64> = indexed_map(n, |i| r_terminal(1.0, 1e-3, 71, i as u64).unwrap().0);
    let mean = mc_mean(vals.iter().copied()).unwrap();
    let z = (mean.mean() - E) / mean.std_error();
    assert!(z.abs() <= 3.0, "E R z = {z}");
    let second = mc_mean(vals.iter().map(|r| r * r)).unwrap();
    let closed = (2.0 * (3.0f64).exp() + 1.0) / 3.0;
    let z = (second.mean() - closed) / second.std_error();
    assert!(z.abs() <= 3.0, "E R² z = {z}");
}

#[test]
fn scalar_and_matrix_r_share_their_law() {
    let cov = CovarianceSpec::canonical();
    for tau in [0.5f64, 1.0] {
        let cells = (tau / 1e-3).round() as u64;
        let n = 10_000;
        let matrix: Vec<f64> = indexed_map(n, |i| {
            let mut w = Sl2Walker::new(1e-3, &cov, 1000, i as u64, 0).unwrap();
            w.advance_to_cell(cells).unwrap();
            frobenius_r(w.state())
        });
        let scalar: Vec<f64> = indexed_map(n, |i| r_terminal(tau, 1e-3, 2000, i as u64).unwrap().0);
        let (d, p) = ks_two_sample(&matrix, &scalar);
        assert!(p > 0.01, "tau = {tau}: KS D = {d}, p = {p}");
    }
}

/// Midpoint (Stratonovich) integration of dR = R/2 dτ + √(R²−1) ∘ dw —
/// the oracle route for the integrator-form consistency check.
fn r_terminal_stratonovich(tau_end: f64, dt: f64, master_seed: u64, stream: u64) -> f64 {
    let n = (tau_end / dt).round() as usize;
    let mut rng = seed_stream(master_seed, stream);
    let sqrt_dt = dt.sqrt();
    let sigma = |r: f64| (r * r - 1.0).max(0.0).sqrt();
    let mut r = 1.0f64;
    for _ in 0..n {
        let dw = sqrt_dt * standard_normal(&mut rng);
        let predictor = r + 0.5 * r * dt + sigma(r) * dw;
        let mid = 0.5 * (r + predictor.max(1.0));
        r = (r + 0.5 * mid * dt + sigma(mid) * dw).max(1.0);
    }
    r
}

#[test]
fn ito_and_stratonovich_forms_agree() {
    let n = 50_000;
    for dt in [1e-3f64, 5e-4] {
        let ito: Vec<f64> = indexed_map(n, |i| r_terminal(1.0, dt, 8_800, i as u64).unwrap().0);
        let strato: Vec<f64> =
            indexed_map(n, |i| r_terminal_stratonovich(1.0, dt, 9_900, i as u64));
        let a = mc_mean(ito).unwrap();
        let b = mc_mean(strato).unwrap();
        let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
        let z = (a.mean() - b.mean()) / se;
        assert!(
            z.abs() <= 3.0,
            "dt = {dt}: Ito {} vs Strat {} z = {z}",
            a.mean(),
            b.mean()
        );
    }
}

#[test]
fn bessel_moments_and_first_step_law() {
    let n = 10_000;
    let tau = 1.0;
    let dt = 1e-3;
    // E X² = 2τ, against both the closed form and a direct 2D Brownian
    // motion norm oracle.
    let em: Vec<f64> = indexed_map(n, |i| bessel2d_terminal(tau, dt, 51, i as u64).unwrap());
    let oracle: Vec<f64> = indexed_map(n, |i| {
        let mut rng = seed_stream(52, i as u64);
        let mut x = [0.0f64; 2];
        for _ in 0..(tau / dt) as usize {
            x[0] += dt.sqrt() * standard_normal(&mut rng);
            x[1] += dt.sqrt() * standard_normal(&mut rng);
        }
        (x[0] * x[0] + x[1] * x[1]).sqrt()
    });
    let em_sq = mc_mean(em.iter().map(|x| x * x)).unwrap();
    let z = (em_sq.mean() - 2.0 * tau) / em_sq.std_error();
    assert!(z.abs() <= 3.0, "E X² vs 2τ: z = {z}");
    let or_sq = mc_mean(oracle.iter().map(|x| x * x)).unwrap();
    let se = (em_sq.std_error().powi(2) + or_sq.std_error().powi(2)).sqrt();
    let z = (em_sq.mean() - or_sq.mean()) / se;
    assert!(z.abs() <= 3.0, "E X² vs oracle: z = {z}");
    // Positivity after the start.
    for i in 0..200 {
        let p = simulate_bessel2d(tau, dt, 53, i).unwrap();
        assert!(p.values[1..].iter().all(|&v| v > 0.0));
    }
    // First-step marginal is Rayleigh with scale √dt.
    let first: Vec<f64> = indexed_map(100_000, |i| {
        simulate_bessel2d(2.0 * dt, dt, 54, i as u64)
            .unwrap()
            .values[1]
    });
    let (d, p) = ks_one_sample(&first, |x| 1.0 - (-x * x / (2.0 * dt)).exp());
    assert!(p > 0.01, "Rayleigh KS D = {d}, p = {p}");
}

#[test]
fn gbm_monte_carlo_moment() {
    let n = 1_000_000;
    let tau = 1.0;
    let vals: Vec<f64> = indexed_map(n, |i| {
        let mut rng = seed_stream(60, i as u64);
        let s = gbm_exact(tau, tau.sqrt() * standard_normal(&mut rng));
        s * s
    });
    let s = mc_mean(vals).unwrap();
    let z = (s.mean() - gbm_moment(2.0, tau)) / s.std_error();
    assert!(z.abs() <= 3.0, "E S² z = {z}");
}

#[test]
fn lognormal_mass_concentration_mc() {
    let n = 1_000_000;
    let tau = 1.0;
    let quad = mass_concentration_quadrature(tau).unwrap();
    let threshold = f64::exp(1.5 * tau);
    let samples: Vec<f64> = indexed_map(n, |i| {
        let mut rng = seed_stream(61, i as u64);
        gbm_exact(tau, tau.sqrt() * standard_normal(&mut rng))
    });
    let numers: Vec<f64> = samples
        .iter()
        .map(|&s| if s >= threshold { s } else { 0.0 })
        .collect();
    let (ratio, se) = ratio_with_se(&numers, &samples);
    let z = (ratio - quad) / se;
    assert!(z.abs() <= 3.0, "mass concentration ratio {ratio} z = {z}");
}

#[test]
fn r_mass_concentration_sources_agree() {
    let tau = 1.0;
    let (scalar, se_s) = r_mass_concentration_mc(tau, 1e-3, 20_000, 62, RSource::Scalar).unwrap();
    let (matrix, se_m) = r_mass_concentration_mc(tau, 1e-3, 20_000, 63, RSource::Matrix).unwrap();
    let z = (scalar - matrix) / (se_s * se_s + se_m * se_m).sqrt();
    assert!(
        z.abs() <= 3.0,
        "scalar {scalar} vs matrix {matrix}: z = {z}"
    );
}

#[test]
fn growth_is_sublinear_along_paths() {
    // At τ = 50, S ≤ e^{0.75τ} on all but a large-deviation fraction; the
    // exact sampler makes this a one-draw test per path.
    let n = 100_000;
    let tau = 50.0f64;
    let bound = (0.75 * tau).exp();
    let below: usize = indexed_map(n, |i| {
        let mut rng = seed_stream(64, i as u64);
        let s = gbm_exact(tau, tau.sqrt() * standard_normal(&mut rng));
        usize::from(s <= bound)
    })
    .into_iter()
    .sum();
    let fraction = below as f64 / n as f64;
    println!("sublinear-growth fraction at tau = {tau}: {fraction}");
    assert!(fraction > 0.9, "fraction = {fraction}");
}

#[test]
fn boundary_contact_is_rare_and_vanishes_with_dt() {
    // The continuum process stays strictly above the boundary; the clamped
    // Euler scheme touches it with O(dt) probability. The transformed
    // process in the comparison triple is strictly positive by
    // construction, which is what the pathwise gates rely on.
    let n = 30_000;
    let hits = |dt: f64| -> usize {
        indexed_map(n, |i| {
            usize::from(r_terminal(0.5, dt, 4242, i as u64).unwrap().0 == 1.0)
        })
        .into_iter()
        .sum()
    };
    let coarse = hits(1e-3);
    let fine = hits(1e-4);
    println!("terminal boundary contacts at τ = 0.5: dt=1e-3 → {coarse}/{n}, dt=1e-4 → {fine}/{n}");
    assert!(
        (coarse as f64) / (n as f64) <= 2e-3,
        "contact rate too high: {coarse}/{n}"
    );
    assert!(
        fine < coarse.max(1),
        "contact rate did not shrink: {coarse} -> {fine}"
    );
    // Strict positivity of the transformed process, triple form.
    let contacts: usize = indexed_map(2_000, |i| {
        comparison_triple_violations(0.5, 1e-3, 10.0, 66, i as u64)
            .unwrap()
            .boundary_contacts
    })
    .into_iter()
    .sum();
    assert_eq!(contacts, 0);
}

proptest! {
    #[test]
    fn transform_round_trip(r in 1.0..1e8f64) {
        let s = s_of_r(r).unwrap();
        let back = r_of_s(s).unwrap();
        prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn transform_bounded_by_twice_r(r in 1.0..1e6f64) {
        let s = s_of_r(r).unwrap();
        prop_assert!(s <= 2.0 * r);
        prop_assert!(s >= 1.0);
    }

    #[test]
    fn transform_is_monotone(a in 1.0..1e6f64, b in 1.0..1e6f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(s_of_r(lo).unwrap() <= s_of_r(hi).unwrap());
    }
}

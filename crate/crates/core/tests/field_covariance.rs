//! Statistical verification of the field ensemble and the coupling
//! process against the discretized analytic covariance.

use sl2drift::field::*;
use sl2drift::stats::*;

const SIDE: f64 = 16.0 * std::f64::consts::PI;

fn lattice_field(seed: u64) -> SpectralField {
    sample_field(0.5, 0.0, SIDE, 64, seed).unwrap()
}

#[test]
fn per_mode_variance_matches_cell_weight() {
    let n_real = 10_000;
    let probe = lattice_field(0);
    let dk = mode_spacing(SIDE);
    // Ten spread-out modes (every k-th of the retained list).
    let stride = probe.modes.len() / 10;
    let picks: Vec<usize> = (0..10).map(|j| j * stride).collect();
    let eps = 0.5f64;
    let weight = eps * eps * dk * dk / std::f64::consts::TAU;
    let mut acc = vec![[RunningStats::new(), RunningStats::new()]; picks.len()];
    for i in 0..n_real {
        let f = lattice_field(100 + i as u64);
        for (slot, &idx) in picks.iter().enumerate() {
            let c = f.modes[idx].coeffs(dk);
            acc[slot][0].push(c[0].norm_sqr());
            acc[slot][1].push(c[1].norm_sqr());
        }
    }
    for (slot, &idx) in picks.iter().enumerate() {
        let m = &probe.modes[idx];
        let r2 = (m.n1 as f64 * m.n1 as f64 + m.n2 as f64 * m.n2 as f64) * dk * dk;
        let phat = [
            -(m.n2 as f64) * dk / r2.sqrt(),
            m.n1 as f64 * dk / r2.sqrt(),
        ];
        for comp in 0..2 {
            let expect = weight * phat[comp] * phat[comp];
            let s = &acc[slot][comp];
            let se = s.std_error().max(1e-30);
            let z = (s.mean() - expect) / se;
            assert!(
                z.abs() <= 4.0 || (s.mean() - expect).abs() < 1e-20,
                "mode {idx} comp {comp}: mean {} expect {expect} z {z}",
                s.mean()
            );
        }
    }
}

#[test]
fn ensemble_is_centered_at_probe_points() {
    let n_real = 1_000;
    let probes = [[1.7, 3.9], [20.0, 10.5]];
    let mut acc = vec![[RunningStats::new(), RunningStats::new()]; probes.len()];
    for i in 0..n_real {
        let f = lattice_field(7_000 + i as u64);
        for (slot, &p) in probes.iter().enumerate() {
            let v = f.point_value(p);
            acc[slot][0].push(v[0]);
            acc[slot][1].push(v[1]);
        }
    }
    for row in &acc {
        for s in row {
            let z = s.mean() / s.std_error();
            assert!(z.abs() <= 4.0, "nonzero mean z = {z}");
        }
    }
}

#[test]
fn lag_zero_covariance_is_rotation_invariant() {
    // Compare E b⊗b at the origin with its 90°-rotated image through the
    // per-realization difference g − R g Rᵀ.
    let n_real = 10_000;
    let mut diff = vec![RunningStats::new(); 4];
    for i in 0..n_real {
        let f = lattice_field(50_000 + i as u64);
        let v = f.point_value([0.0, 0.0]);
        let g = [v[0] * v[0], v[0] * v[1], v[1] * v[0], v[1] * v[1]];
        // R = rotation by π/2: (R g Rᵀ) = [[g22, -g21], [-g12, g11]].
        let rot = [g[3], -g[2], -g[1], g[0]];
        for k in 0..4 {
            diff[k].push(g[k] - rot[k]);
        }
    }
    for (k, s) in diff.iter().enumerate() {
        let z = s.mean() / s.std_error().max(1e-30);
        assert!(z.abs() <= 4.0, "entry {k}: z = {z}");
    }
}

#[test]
fn disjoint_bands_are_independent() {
    // b_{L'} − b_L lives on modes disjoint from b_L; their point values
    // must be uncorrelated.
    let n_real = 5_000;
    let kmid = 0.5;
    let probe = [2.2, 6.6];
    let mut low = Vec::with_capacity(n_real);
    let mut high = Vec::with_capacity(n_real);
    for i in 0..n_real {
        let f = lattice_field(90_000 + i as u64);
        low.push(f.point_value_band(probe, 0.0, kmid)[0]);
        high.push(f.point_value_band(probe, kmid, f64::INFINITY)[0]);
    }
    let z = correlation_z(&low, &high);
    assert!(z.abs() <= 4.0, "band correlation z = {z}");
}

#[test]
fn coupling_covariance_matches_lattice_and_continuum() {
    let side = 128.0 * std::f64::consts::PI;
    let l_top = std::f64::consts::E;
    let n_real = 3_000;
    let lnl = [0.0, 1.0];
    let samples: Vec<[f64; 6]> = indexed_map(n_real, |i| {
        let f = sample_field(0.4, l_top, side, 512, 1234 + i as u64).unwrap();
        let b = coupled_b_path(&f, &lnl).unwrap().values[1];
        [
            b.a1 * b.a1,
            b.a2 * b.a2,
            b.a3 * b.a3,
            b.a1 * b.a2,
            b.a1 * b.a3,
            b.a2 * b.a3,
        ]
    });
    let lattice = coupling_covariance_lattice(side, (-1.0f64).exp(), 1.0);
    let continuum = [0.25, 0.25, 0.5];
    // Lattice reference sits close to the continuum circle average.
    for d in 0..3 {
        let rel = (lattice[d][d] - continuum[d]) / continuum[d];
        assert!(rel.abs() < 0.01, "lattice vs continuum diag {d}: {rel}");
    }
    let idx = [
        (0, 0, 0),
        (1, 1, 1),
        (2, 2, 2),
        (3, 0, 1),
        (4, 0, 2),
        (5, 1, 2),
    ];
    for (slot, a, b) in idx {
        let s = mc_mean(samples.iter().map(|v| v[slot])).unwrap();
        let z = (s.mean() - lattice[a][b]) / s.std_error();
        assert!(z.abs() <= 4.0, "cov[{a}][{b}]: mean {} z = {z}", s.mean());
    }
}

#[test]
fn coupling_increments_are_uncorrelated_over_disjoint_scales() {
    let side = 128.0 * std::f64::consts::PI;
    let n_real = 3_000;
    let lnl = [0.0, 1.0, 2.0];
    let mut first = [Vec::new(), Vec::new(), Vec::new()];
    let mut second = [Vec::new(), Vec::new(), Vec::new()];
    for i in 0..n_real {
        let f = sample_field(0.4, (2.0f64).exp(), side, 1024, 777_000 + i as u64).unwrap();
        let path = coupled_b_path(&f, &lnl).unwrap();
        let inc = path.increments();
        for (store, v) in [(&mut first, inc[0]), (&mut second, inc[1])] {
            store[0].push(v.a1);
            store[1].push(v.a2);
            store[2].push(v.a3);
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            let z = correlation_z(&first[a], &second[b]);
            assert!(z.abs() <= 4.0, "increment correlation [{a}][{b}] z = {z}");
        }
    }
}

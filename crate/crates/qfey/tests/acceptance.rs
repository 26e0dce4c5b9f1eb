//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line when its assertions hold. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use qfey::cli::config::{PotentialPreset, RunConfig};
use qfey::families::{default_t_samples, measure_tangency, TangentFamily};
use qfey::grid::{Grid, Potential, WaveFunction};
use qfey::kernels::{
    kernel_row, polyharmonic_kernel, polyharmonic_kernel_quadrature, KernelKind,
    PolyharmonicParams,
};
use qfey::operators::ExpMethod;
use qfey::oracle::{
    discretize_hamiltonian, free_packet_evolution, EigenDecomposition, HamiltonianKind,
    HamiltonianSpec, PacketParams,
};
use qfey::propagator::{
    evaluate_formula, evolve_heat, evolve_schrodinger, resolve_k, run_convergence,
    schrodinger_step, FormulaId, PropagationSpec,
};

fn grid256() -> Grid {
    Grid::new(-20.0, 20.0, 256).unwrap()
}

fn packet(grid: Grid) -> WaveFunction {
    PacketParams {
        x0: 0.0,
        p0: 2.0,
        sigma: 1.0,
    }
    .sample(grid)
    .unwrap()
}

fn cosine(grid: Grid) -> Potential {
    Potential::sample(grid, f64::cos).unwrap()
}

fn spectral_h(kind: HamiltonianKind, v: &Potential, grid: Grid) -> qfey::operators::LinearOperator {
    discretize_hamiltonian(&HamiltonianSpec::new(kind, v.clone(), grid).unwrap()).unwrap()
}

/// Criterion 1: every quasi-Feynman step and every full F1 product preserves
/// the L2 norm within 1e-9 relative, across both families, all presets,
/// n in 1..=64, t in {0.25, 0.5, 1}, a in {+1, -1}.
#[test]
fn criterion_1_unitarity() {
    let started = std::time::Instant::now();
    let grid = grid256();
    let presets = [
        PotentialPreset::Zero,
        PotentialPreset::Cosine {
            amp: 1.0,
            freq: 1.0,
        },
        PotentialPreset::Sech2 {
            depth: 1.0,
            width: 1.0,
        },
        PotentialPreset::GaussianWell {
            depth: 1.0,
            width: 1.0,
        },
    ];
    let mut families = Vec::new();
    for preset in presets {
        let v = preset.sample(grid).unwrap();
        families.push((
            format!("heat-gauss {}", preset.print()),
            TangentFamily::heat_gauss(&v, grid).unwrap(),
        ));
    }
    let vcos = cosine(grid);
    for n_order in [2usize, 3] {
        families.push((
            format!("polyharmonic N={n_order} cosine"),
            TangentFamily::polyharmonic(&vcos, n_order, grid).unwrap(),
        ));
    }

    let method = ExpMethod::taylor(1e-13);
    let psi0 = packet(grid);
    let norm0 = psi0.l2_norm();
    let mut worst: f64 = 0.0;
    for (label, family) in &families {
        for &t in &[0.25, 0.5, 1.0] {
            for &a in &[1.0, -1.0] {
                for n in 1..=64usize {
                    let mut state = psi0.clone();
                    for step in 0..n {
                        state = schrodinger_step(family, a, t, n, &state, method).unwrap();
                        let drift = (state.l2_norm() - norm0).abs() / norm0;
                        worst = worst.max(drift);
                        assert!(
                            drift <= 1e-9,
                            "{label}: t={t} a={a} n={n} step {step}: norm drift {drift:e}"
                        );
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "runtime {elapsed:?} exceeds 1 min");
    println!(
        "criterion 1 (unitarity suite): PASS (worst norm drift {worst:.2e}, {:.1}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: Chernoff convergence against the dense spectral oracle for
/// the bounded-potential configuration; error(64) <= 0.1 error(4) and
/// log-log slope <= -0.7 over n in {4..64}.
#[test]
fn criterion_2_chernoff_convergence() {
    let started = std::time::Instant::now();
    let grid = grid256();
    let v = cosine(grid);
    let family = TangentFamily::heat_gauss(&v, grid).unwrap();
    let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
    let psi0 = packet(grid);
    let reference = EigenDecomposition::new(&h)
        .unwrap()
        .group(1.0, 0.5, &psi0)
        .unwrap();
    let report = run_convergence(
        &family,
        1.0,
        0.5,
        &[4, 8, 16, 32, 64],
        &psi0,
        &reference,
        "dense spectral oracle",
    )
    .unwrap();
    let first = report.rows.first().unwrap().l2_error;
    let last = report.rows.last().unwrap().l2_error;
    let slope = report.log_log_slope();
    assert!(
        last <= 0.1 * first,
        "error(64) = {last} vs 0.1 * error(4) = {}",
        0.1 * first
    );
    assert!(slope <= -0.7, "slope {slope}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "runtime {elapsed:?} exceeds 2 min");
    println!(
        "criterion 2 (Chernoff convergence): PASS (error {first:.3} -> {last:.4}, slope {slope:.2}, {:.1}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 3: free-particle check against the closed-form dispersing
/// packet at n = 64, plus the dense-vs-analytic oracle cross-check at 1e-8.
#[test]
fn criterion_3_free_particle_analytic() {
    let grid = grid256();
    let zero = Potential::zero(grid);
    let family = TangentFamily::heat_gauss(&zero, grid).unwrap();
    let psi0 = packet(grid);
    let analytic = free_packet_evolution(0.0, 2.0, 1.0, 1.0, 0.5, grid).unwrap();

    let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &zero, grid);
    let dense = EigenDecomposition::new(&h)
        .unwrap()
        .group(1.0, 0.5, &psi0)
        .unwrap();
    let cross = dense.sub(&analytic).unwrap().l2_norm();
    assert!(cross <= 1e-8, "oracle cross-check {cross:e}");

    let spec = PropagationSpec::new(1.0, 0.5, 64).unwrap();
    let psi = evolve_schrodinger(&family, &spec, &psi0).unwrap();
    let err = psi.sub(&analytic).unwrap().l2_norm();
    assert!(err <= 1e-2, "l2 error at n=64 is {err}");
    println!("criterion 3 (free-particle analytic): PASS (error {err:.4}, cross-check {cross:.1e})");
}

/// Criterion 4: formula equivalences on a 32-point grid at n = 2.
#[test]
fn criterion_4_formula_equivalence() {
    let started = std::time::Instant::now();
    let grid = Grid::new(-10.0, 10.0, 32).unwrap();
    let v = cosine(grid);
    let family = TangentFamily::heat_gauss(&v, grid).unwrap();
    let psi0 = PacketParams {
        x0: 0.0,
        p0: 1.0,
        sigma: 1.2,
    }
    .sample(grid)
    .unwrap();
    let base = PropagationSpec::new(1.0, 0.5, 2).unwrap();
    let merged = evolve_schrodinger(&family, &base.with_formula(FormulaId::F1Merged), &psi0)
        .unwrap();

    // F2 at converged k
    let f2 = resolve_k(&family, &base.with_formula(FormulaId::F2Taylor), &psi0).unwrap();
    assert!(f2.converged);
    let d2 = f2.state.sub(&merged).unwrap().l2_norm();
    assert!(d2 <= 1e-8, "F2 vs F1_merged: {d2:e}");

    // F3 vs F2 at k = 30
    let k = 30;
    let f2k = evaluate_formula(&family, &base.with_formula(FormulaId::F2Taylor), &psi0, k)
        .unwrap();
    let f3k = evaluate_formula(&family, &base.with_formula(FormulaId::F3Binomial), &psi0, k)
        .unwrap();
    let d32 = f3k.sub(&f2k).unwrap().l2_norm();
    assert!(d32 <= 1e-6, "F3 vs F2 at k=30: {d32:e}");

    // F4 decays like 1/k: quadrupling k divides the error by ~4
    let err4 = |k: usize| {
        evaluate_formula(&family, &base.with_formula(FormulaId::F4Euler), &psi0, k)
            .unwrap()
            .sub(&merged)
            .unwrap()
            .l2_norm()
    };
    let ratio = err4(512) / err4(2048);
    assert!((3.0..=5.0).contains(&ratio), "F4 ratio {ratio}");

    // F5 vs F4 and F6 vs F5 at the same k
    let f4k = evaluate_formula(&family, &base.with_formula(FormulaId::F4Euler), &psi0, k)
        .unwrap();
    let f5k = evaluate_formula(
        &family,
        &base.with_formula(FormulaId::F5EulerBinomial),
        &psi0,
        k,
    )
    .unwrap();
    let f6k = evaluate_formula(
        &family,
        &base.with_formula(FormulaId::F6FullBinomial),
        &psi0,
        k,
    )
    .unwrap();
    let d54 = f5k.sub(&f4k).unwrap().l2_norm();
    let d65 = f6k.sub(&f5k).unwrap().l2_norm();
    assert!(d54 <= 1e-6, "F5 vs F4: {d54:e}");
    assert!(d65 <= 1e-6, "F6 vs F5: {d65:e}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime {elapsed:?} exceeds 30 s");
    println!(
        "criterion 4 (formula equivalence): PASS (F2 {d2:.1e}, F3 {d32:.1e}, F4 ratio {ratio:.2}, F5 {d54:.1e}, F6 {d65:.1e})"
    );
}

/// Criterion 5: measured tangency slopes for both families against their
/// spectral oracles on band-limited states, and second order for the
/// three-point recombination.
#[test]
fn criterion_5_tangency() {
    let started = std::time::Instant::now();
    let grid = grid256();
    let v = cosine(grid);
    let state = PacketParams {
        x0: 0.0,
        p0: 0.0,
        sigma: 1.0,
    }
    .sample(grid)
    .unwrap()
    .band_limited(8);
    let samples = default_t_samples();

    let heat = TangentFamily::heat_gauss(&v, grid).unwrap();
    let h_heat = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
    let slope_heat = measure_tangency(&heat, &state, &h_heat, &samples)
        .unwrap()
        .fitted_slope;
    assert!(
        (0.85..=1.15).contains(&slope_heat),
        "heat-gauss slope {slope_heat}"
    );

    let poly = TangentFamily::polyharmonic(&v, 2, grid).unwrap();
    let h_poly = spectral_h(HamiltonianKind::NegPolyharmonicMinusV { n_order: 2 }, &v, grid);
    let slope_poly = measure_tangency(&poly, &state, &h_poly, &samples)
        .unwrap()
        .fitted_slope;
    assert!(
        (0.85..=1.15).contains(&slope_poly),
        "polyharmonic slope {slope_poly}"
    );

    // the wider band gives the quadratic term a coefficient large enough to
    // dominate the fit window (still well below the m/4 aliasing bound)
    let wide_state = PacketParams {
        x0: 0.0,
        p0: 0.0,
        sigma: 1.0,
    }
    .sample(grid)
    .unwrap()
    .band_limited(32);
    let three = heat.three_point().unwrap();
    let slope_three = measure_tangency(&three, &wide_state, &h_heat, &samples)
        .unwrap()
        .fitted_slope;
    assert!(slope_three >= 1.8, "three-point slope {slope_three}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime {elapsed:?} exceeds 30 s");
    println!(
        "criterion 5 (tangency suite): PASS (heat {slope_heat:.3}, polyharmonic {slope_poly:.3}, three-point {slope_three:.2})"
    );
}

/// Criterion 6: kernel closed form vs quadrature over the full sweep,
/// row normalization on the default boxes, and the scaling-law identity.
#[test]
fn criterion_6_kernels() {
    // residue closed form vs the quadrature oracle
    let mut worst: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let p = PolyharmonicParams::new(n).unwrap();
        for &t in &[0.1, 1.0, 10.0] {
            for &y in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let closed = polyharmonic_kernel(t, y, &p).unwrap();
                let oracle = polyharmonic_kernel_quadrature(t, y, n).unwrap();
                let diff = (closed - oracle).abs();
                worst = worst.max(diff);
                assert!(diff <= 1e-6, "N={n} t={t} y={y}: {diff:e}");
            }
        }
    }

    // row mass on the default boxes
    let gauss_grid = Grid::new(-20.0, 20.0, 256).unwrap();
    let poly_grid = Grid::new(-40.0, 40.0, 512).unwrap();
    for &t in &[0.1, 1.0, 10.0] {
        let row = kernel_row(&KernelKind::Gauss, t, gauss_grid).unwrap();
        let mass: f64 = row.iter().sum::<f64>() * gauss_grid.h();
        assert!((mass - 1.0).abs() <= 1e-6, "gauss t={t}: mass {mass}");
        for n in [2usize, 3, 4] {
            let kind = KernelKind::polyharmonic(n).unwrap();
            let row = kernel_row(&kind, t, poly_grid).unwrap();
            let mass: f64 = row.iter().sum::<f64>() * poly_grid.h();
            assert!(
                (mass - 1.0).abs() <= 1e-6,
                "polyharmonic N={n} t={t}: mass {mass}"
            );
        }
    }

    // scaling law l(t, y) = t^(-1/2N) l(1, t^(-1/2N) y)
    for n in [2usize, 3, 4] {
        let p = PolyharmonicParams::new(n).unwrap();
        for &t in &[0.1, 1.0, 10.0] {
            for &y in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let lhs = polyharmonic_kernel(t, y, &p).unwrap();
                let s = t.powf(-1.0 / (2.0 * n as f64));
                let rhs = s * polyharmonic_kernel(1.0, s * y, &p).unwrap();
                let rel = (lhs - rhs).abs() / lhs.abs().max(1e-300);
                assert!(rel <= 1e-10, "N={n} t={t} y={y}: rel {rel:e}");
            }
        }
    }
    println!("criterion 6 (kernel suite): PASS (worst residue-vs-quadrature {worst:.1e})");
}

/// Criterion 7: heat Chernoff products. With the cosine potential the error
/// at n = 64 is at most a quarter of the error at n = 4; with V = 0 the
/// product is exact for every n.
#[test]
fn criterion_7_heat_chernoff() {
    let grid = grid256();
    let v = cosine(grid);
    let family = TangentFamily::heat_gauss(&v, grid).unwrap();
    let h = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &v, grid);
    let psi0 = packet(grid);
    let reference = EigenDecomposition::new(&h)
        .unwrap()
        .semigroup(0.5, &psi0)
        .unwrap();
    let err = |n: usize| {
        evolve_heat(&family, 0.5, n, &psi0)
            .unwrap()
            .sub(&reference)
            .unwrap()
            .l2_norm()
    };
    let coarse = err(4);
    let fine = err(64);
    assert!(
        fine <= 0.25 * coarse,
        "error(64) = {fine} vs 0.25 * error(4) = {}",
        0.25 * coarse
    );

    let zero = Potential::zero(grid);
    let free = TangentFamily::heat_gauss(&zero, grid).unwrap();
    let h0 = spectral_h(HamiltonianKind::HalfLaplacianMinusV, &zero, grid);
    let free_ref = EigenDecomposition::new(&h0)
        .unwrap()
        .semigroup(0.5, &psi0)
        .unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=64usize {
        let out = evolve_heat(&free, 0.5, n, &psi0).unwrap();
        let e = out.sub(&free_ref).unwrap().l2_norm();
        worst = worst.max(e);
        assert!(e <= 1e-8, "V=0 heat at n={n}: {e:e}");
    }
    println!(
        "criterion 7 (heat Chernoff): PASS (cosine {coarse:.4} -> {fine:.5}, V=0 worst {worst:.1e})"
    );
}

/// Criterion 8, library half: the config text form round-trips losslessly
/// on randomized configs. (The byte-identical CLI runs live in tests/cli.rs.)
#[test]
fn criterion_8_config_round_trip() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let family = if rng.gen_bool(0.5) {
            "heat-gauss"
        } else {
            "polyharmonic"
        };
        let potential = match rng.gen_range(0..4) {
            0 => "zero".to_string(),
            1 => format!("cosine:{},{}", rng.gen_range(0.1..2.0), rng.gen_range(0.1..3.0)),
            2 => format!("sech2:{},{}", rng.gen_range(0.1..2.0), rng.gen_range(0.3..2.0)),
            _ => format!(
                "gaussian-well:{},{}",
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.3..2.0)
            ),
        };
        let mut cfg = RunConfig::default();
        cfg.set("family", family).unwrap();
        cfg.set("N", &rng.gen_range(2usize..=8).to_string()).unwrap();
        cfg.set("potential", &potential).unwrap();
        cfg.set(
            "grid",
            &format!(
                "{},{},{}",
                -rng.gen_range(10.0..50.0),
                rng.gen_range(10.0..50.0),
                64 * rng.gen_range(1usize..8)
            ),
        )
        .unwrap();
        cfg.set("a", &rng.gen_range(-2.0..2.0).to_string()).unwrap();
        cfg.set("t", &rng.gen_range(-1.0..1.0).to_string()).unwrap();
        cfg.set("n", &rng.gen_range(1usize..128).to_string()).unwrap();
        if rng.gen_bool(0.5) {
            cfg.set("k", &rng.gen_range(1usize..100).to_string()).unwrap();
        }
        if rng.gen_bool(0.5) {
            cfg.set("n_list", "1,2,4,8,16").unwrap();
        }
        if rng.gen_bool(0.3) {
            cfg.set("t_samples", "0.01,0.005,0.0025").unwrap();
        }
        if rng.gen_bool(0.3) {
            cfg.set("out", "result.csv").unwrap();
        }
        cfg.set(
            "packet",
            &format!(
                "{},{},{}",
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.5..2.0)
            ),
        )
        .unwrap();
        cfg.set("three_point", if rng.gen_bool(0.5) { "true" } else { "false" })
            .unwrap();
        let reparsed = RunConfig::parse(&cfg.print()).unwrap();
        assert_eq!(reparsed, cfg, "case {case}");
    }
    println!("criterion 8 (config round-trip): PASS (20 randomized configs)");
}

/// Sanity anchor used by several criteria: the packet really is normalized
/// and band limiting keeps it so.
#[test]
fn packet_normalization_anchor() {
    let grid = grid256();
    let psi0 = packet(grid);
    assert!((psi0.l2_norm() - 1.0).abs() < 1e-10);
    let bl = psi0.band_limited(64);
    assert!((bl.l2_norm() - 1.0).abs() < 1e-6);
    let ip = psi0.inner_product(&psi0).unwrap();
    assert!(ip.im.abs() < 1e-15 && (ip.re - 1.0).abs() < 1e-10);
}

//! Cross-module invariants: bounds against exact values, exact values
//! against simulation and finite differences, and reproducibility.

use std::f64::consts::PI;

use exitbounds::bounds::BoundReport;
use exitbounds::domains::{box_survival, moment_at, parse_spec, shape_functional, torsion_moment, DomainSpec};
use exitbounds::harness::{floor_check, rows_to_table, triangle_sweep, OutputFormat};
use exitbounds::simulate::{estimate_moments, estimate_survival, fd_torsion_hierarchy};

fn exact_specs() -> Vec<DomainSpec> {
    vec![
        DomainSpec::unit_disc(),
        DomainSpec::ball(3, 2.0).unwrap(),
        DomainSpec::cube(2),
        DomainSpec::boxed(vec![1.0, 3.0]).unwrap(),
        DomainSpec::cube(3),
        DomainSpec::equilateral(0.5).unwrap(),
        DomainSpec::slab(2, 1.0).unwrap(),
    ]
}

#[test]
fn exact_functionals_sit_between_the_universal_bounds() {
    for spec in exact_specs() {
        for p in [1.0, 2.0, 3.0] {
            let Ok(g) = shape_functional(&spec, p) else { continue };
            let r = BoundReport::compute(spec.dim() as u64, p).unwrap();
            let hi = r.upper_c1.min(r.sharp_upper);
            assert!(r.lower <= g.value * (1.0 + 1e-12), "{spec} p={p}: {} < {}", g.value, r.lower);
            assert!(g.value <= hi, "{spec} p={p}: {} > {hi}", g.value);
        }
    }
}

#[test]
fn functional_is_scale_invariant() {
    for spec in exact_specs() {
        let Ok(g) = shape_functional(&spec, 2.0) else { continue };
        let big = shape_functional(&spec.scaled(3.5).unwrap(), 2.0).unwrap();
        assert!((g.value / big.value - 1.0).abs() < 1e-9, "{spec}");
    }
}

#[test]
fn off_center_moments_match_simulation() {
    let spec = parse_spec("box 1 2").unwrap();
    let x = [0.4, -1.1];
    let est = estimate_moments(&spec, &x, &[1.0, 2.0], 40_000, 1e-4, 3).unwrap();
    for e in est {
        let exact = moment_at(&spec, &x, e.p).unwrap().value;
        // the step bias at h = 1e-4 is far below one SE here
        assert!((e.mean - exact).abs() < 4.0 * e.std_error, "p={}: {} vs {exact}", e.p, e.mean);
    }
}

#[test]
fn survival_matches_product_series() {
    let spec = DomainSpec::boxed(vec![1.0, 0.5]).unwrap();
    let x = [0.3, 0.1];
    let ts = [0.05, 0.2, 0.6];
    let est = estimate_survival(&spec, &x, &ts, 40_000, 1e-4, 11).unwrap();
    for e in est {
        let exact = box_survival(&[1.0, 0.5], &x, e.t);
        assert!((e.probability - exact).abs() < 4.0 * e.std_error + 1e-3, "t={}: {} vs {exact}", e.t, e.probability);
    }
}

#[test]
fn finite_difference_hierarchy_matches_ball_polynomials() {
    let disc = DomainSpec::unit_disc();
    let grids = fd_torsion_hierarchy(&disc, 3, 1.0 / 40.0).unwrap();
    for (k, g) in grids.iter().enumerate() {
        let p = (k + 1) as f64;
        for x in [[0.0, 0.0], [0.5, 0.0], [0.3, -0.6]] {
            let fd = g.interpolate(x);
            let exact = torsion_moment(&disc, &x, p).unwrap();
            assert!((fd / exact - 1.0).abs() < 1e-2, "u_{} at {x:?}: {fd} vs {exact}", k + 1);
        }
    }
    // u_2 at the center, from E[τ²] = 3/8 on the unit disc
    assert!((torsion_moment(&disc, &[0.0, 0.0], 2.0).unwrap() - 3.0 / 64.0).abs() < 1e-14);
}

#[test]
fn simulation_does_not_depend_on_thread_count() {
    let spec = DomainSpec::equilateral(1.0).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_moments(&spec, &[0.2, 0.1], &[1.0, 2.5], 5_000, 1e-3, 99).unwrap())
    };
    let one = run(1);
    let four = run(4);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}

#[test]
fn reports_are_reproducible() {
    let render = || {
        let rows = floor_check(&[0.5, 1.0], 2_000, 5).unwrap();
        rows_to_table("floor", &rows)
    };
    let (a, b) = (render(), render());
    for fmt in [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Table] {
        assert_eq!(exitbounds::harness::render(std::slice::from_ref(&a), fmt), exitbounds::harness::render(std::slice::from_ref(&b), fmt));
    }
}

#[test]
fn equilateral_leads_a_small_triangle_sweep() {
    let s3 = 3f64.sqrt();
    let tris = vec![
        ("equilateral".to_string(), [[0.0, 0.0], [2.0, 0.0], [1.0, s3]]),
        ("right-isosceles".to_string(), [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        ("obtuse".to_string(), [[0.0, 0.0], [3.0, 0.0], [2.0, 1.0]]),
    ];
    let rows = triangle_sweep(&tris, 1.0 / 16.0).unwrap();
    let eq = &rows[0];
    assert!((eq.value / (8.0 * PI * PI / 27.0) - 1.0).abs() < 1e-2);
    assert!(rows[1..3].iter().all(|r| r.value < eq.value));
    assert!(rows.iter().all(|r| r.value > PI * PI / 4.0));
}

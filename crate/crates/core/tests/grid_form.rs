mod common;

use common::*;
use fracshape_core::fourier::{fourier_seminorm_sq_with, FourierOptions};
use fracshape_core::stiffness::exterior_integral;
use fracshape_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn grid_arithmetic() {
    let g = build_grid(1, 1.0, 4).unwrap();
    assert_eq!(g.h(), 0.5);
    let xs: Vec<f64> = g.centers().iter().map(|p| p[0]).collect();
    assert_eq!(xs, [-0.75, -0.25, 0.25, 0.75]);
    let g = build_grid(2, 1.0, 2).unwrap();
    assert_eq!((g.cell_count(), g.h()), (4, 1.0));
    let g = build_grid(1, 2.0, 256).unwrap();
    assert_eq!((g.cell_count(), g.h()), (256, 0.015625));
}

#[test]
fn grid_errors_name_the_field() {
    let field = |e: Error| match e {
        Error::Parameter { field, .. } => field,
        other => panic!("expected a parameter error, got {other:?}"),
    };
    assert_eq!(field(build_grid(3, 1.0, 4).unwrap_err()), "dim");
    assert_eq!(field(build_grid(1, 1.0, 1).unwrap_err()), "resolution");
    assert_eq!(field(build_grid(2, 1.0, 129).unwrap_err()), "resolution");
    assert_eq!(field(build_grid(1, -1.0, 4).unwrap_err()), "half_width");
}

/// `C_{s,N} = s 4^s Γ(N/2 + s) / (π^{N/2} Γ(1 - s))`.
fn closed_form_constant(s: f64, dim: usize) -> f64 {
    let n = dim as f64;
    s * 4f64.powf(s) * gamma(n / 2.0 + s) / (std::f64::consts::PI.powf(n / 2.0) * gamma(1.0 - s))
}

#[test]
fn normalization_constant_matches_closed_form() {
    for s in [0.05, 0.1, 0.25, 0.3, 0.5, 0.7, 0.75, 0.9, 0.95] {
        for dim in [1, 2] {
            let c = normalization_constant(s, dim).unwrap();
            let exact = closed_form_constant(s, dim);
            assert!(rel(c, exact) < 1e-8, "s={s} N={dim}: {c} vs {exact}");
        }
    }
    // s = 1/2, N = 1 is 1/π.
    assert!(rel(normalization_constant(0.5, 1).unwrap(), std::f64::consts::FRAC_1_PI) < 1e-8);
    assert!(normalization_constant(1.0, 1).is_err());
    assert!(normalization_constant(0.0, 2).is_err());
}

#[test]
fn tabulated_constants_agree_with_closed_form() {
    // mpmath values, 24 digits.
    for (s, c1, c2) in [
        (0.3, 0.230_096_381_681_632_098_173_2, 0.100_072_892_064_877_832_672_3),
        (0.7, 0.319_881_098_667_347_854_038_8, 0.178_600_382_438_444_737_612_7),
    ] {
        assert!(rel(normalization_constant(s, 1).unwrap(), c1) < 1e-8);
        assert!(rel(normalization_constant(s, 2).unwrap(), c2) < 1e-8);
    }
}

#[test]
fn single_pair_coupling() {
    let g = build_grid(1, 1.0, 2).unwrap();
    let op = assemble_stiffness(&g, 0.5).unwrap();
    assert!((op.coupling(0, 1) - 1.0).abs() < 1e-15);
}

#[test]
fn tail_matches_lattice_oracle() {
    for (dim, res, hw) in [(1, 128, 4.0), (2, 16, 2.0)] {
        for s in [0.3, 0.5, 0.7] {
            let g = build_grid(dim, hw, res).unwrap();
            let op = assemble_stiffness(&g, s).unwrap();
            let oracle = tail_oracle(&g, s);
            for (a, b) in op.tail().iter().zip(&oracle) {
                assert!(rel(*a, *b) < 1e-11, "N={dim} s={s}: {a} vs {b}");
            }
            // Every cell sees the same whole-lattice sum.
            let d0 = op.diag()[0];
            assert!(op.diag().iter().all(|d| rel(*d, d0) < 1e-13));
        }
    }
}

#[test]
fn tail_against_padded_shell() {
    // Lattice cells out to four box widths on each side, then the continuum
    // radial remainder 2 R^{-2s} / (2s) (times h for the cell weight).
    let g = build_grid(1, 1.0, 8).unwrap();
    let s = 0.5;
    let op = assemble_stiffness(&g, s).unwrap();
    let h = g.h();
    let m = g.resolution() as i64;
    let pad = 4 * m;
    for i in 0..m {
        let mut shell = 0.0;
        for j in (-pad..0).chain(m..m + pad) {
            shell += h * h / ((i - j).abs() as f64 * h).powf(1.0 + 2.0 * s);
        }
        let r_left = (i + pad) as f64 * h + 0.5 * h;
        let r_right = (m + pad - 1 - i) as f64 * h + 0.5 * h;
        let remainder = h * (r_left.powf(-2.0 * s) + r_right.powf(-2.0 * s)) / (2.0 * s);
        let rho = op.tail()[i as usize];
        assert!(rel(rho, shell + remainder) < 1e-4, "cell {i}: {rho} vs {}", shell + remainder);
    }
}

#[test]
fn tail_decreases_toward_center_and_tracks_continuum() {
    let g = build_grid(1, 1.0, 8).unwrap();
    let op = assemble_stiffness(&g, 0.5).unwrap();
    let rho = op.tail();
    for i in 0..3 {
        assert!(rho[i] > rho[i + 1], "{rho:?}");
        assert!(rho[7 - i] > rho[6 - i], "{rho:?}");
    }
    // The lattice tail is a mid-point quadrature of h · ∫ outside |x - y|^{-1-2s}:
    // below it (convex integrand), and close once the cell is off the edge.
    for i in 0..8 {
        let cont = g.h() * exterior_integral(&g, &g.center(i), 0.5).unwrap();
        assert!(rho[i] < cont, "cell {i}: {} vs {cont}", rho[i]);
        if (2..6).contains(&i) {
            assert!(rel(rho[i], cont) < 0.05, "cell {i}: {} vs {cont}", rho[i]);
        }
    }
}

#[test]
fn gagliardo_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (dim, res, hw) in [(1, 128, 4.0), (2, 16, 2.0), (1, 16, 1.0)] {
        let g = build_grid(dim, hw, res).unwrap();
        for (t, s) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            let op = assemble_stiffness(&g, s).unwrap();
            for _ in 0..3 + t {
                let u = random_function(&mut rng, g);
                let q = gagliardo_sq(&op, &u).unwrap();
                let oracle = gagliardo_oracle(&g, s, &u);
                assert!(rel(q, oracle) < 1e-12, "N={dim} s={s}: {q} vs {oracle}");
                assert!(rel(op.quadratic_form(&u).unwrap(), q) < 1e-12);
            }
        }
    }
}

#[test]
fn gagliardo_basic_values() {
    let g = build_grid(1, 1.0, 4).unwrap();
    let op = assemble_stiffness(&g, 0.5).unwrap();
    assert_eq!(gagliardo_sq(&op, &GridFunction::zeros(g)).unwrap(), 0.0);
    for i in 0..4 {
        let mut u = GridFunction::zeros(g);
        u.values_mut()[i] = 1.0;
        assert!(rel(gagliardo_sq(&op, &u).unwrap(), op.diag()[i]) < 1e-14);
    }
    let other = build_grid(1, 1.0, 8).unwrap();
    assert!(matches!(
        gagliardo_sq(&op, &GridFunction::zeros(other)),
        Err(Error::Structure(_))
    ));
}

#[test]
fn operator_structure_and_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (dim, res) in [(1, 64), (2, 12)] {
        let g = build_grid(dim, 2.0, res).unwrap();
        let op = assemble_stiffness(&g, 0.4).unwrap();
        assert_eq!(op.symmetry_defect(), 0.0);
        for i in 0..op.size() {
            for j in 0..op.size() {
                if i != j {
                    assert!(op.entry(i, j) <= 0.0);
                }
            }
            assert!(op.tail()[i] > 0.0);
        }
        for _ in 0..100 {
            let u = random_function(&mut rng, g);
            assert!(gagliardo_sq(&op, &u).unwrap() > 0.0);
        }
    }
}

#[test]
fn translation_invariance_of_restricted_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (dim, res, shift) in [(1, 64, [9i64, 0]), (2, 16, [3, -2])] {
        let g = build_grid(dim, 2.0, res).unwrap();
        let op = assemble_stiffness(&g, 0.5).unwrap();
        // Keep the mask away from the edges so the shift stays inside.
        let inner = DomainMask::from_predicate(g, |p| p[0].abs() < 0.8 && p[1].abs() < 0.8);
        let mask = random_mask(&mut rng, g, 0.5, 1).intersection(&inner).unwrap();
        let u = random_supported(&mut rng, &mask);
        let moved_mask = mask.shifted(shift).unwrap();
        let moved_u = u.shifted(shift);
        let a = restrict(&op, &mask).unwrap();
        let b = restrict(&op, &moved_mask).unwrap();
        let qa = { let x = a.gather(&u).unwrap(); x.dot(&(a.matrix() * &x)) };
        let qb = { let x = b.gather(&moved_u).unwrap(); x.dot(&(b.matrix() * &x)) };
        assert!(rel(qa, qb) < 1e-6, "{qa} vs {qb}");
        assert!(rel(gagliardo_sq(&op, &u).unwrap(), gagliardo_sq(&op, &moved_u).unwrap()) < 1e-6);
    }
}

fn gaussian(g: Grid) -> GridFunction {
    GridFunction::from_fn(g, |p| (-p[0] * p[0] / (2.0 * 2.0 * 2.0)).exp())
}

#[test]
fn fourier_route_agrees_and_improves_with_resolution() {
    for s in [0.3, 0.5, 0.7] {
        let mut errs = Vec::new();
        for res in [256, 512] {
            let g = build_grid(1, 8.0, res).unwrap();
            let op = assemble_stiffness(&g, s).unwrap();
            let u = gaussian(g);
            let q = gagliardo_sq(&op, &u).unwrap();
            let f = fourier_seminorm_sq(&g, &FracParams::new(s, 1).unwrap(), &u).unwrap();
            errs.push(rel(f, q));
        }
        assert!(errs[0] <= 0.05, "s={s}: {errs:?}");
        assert!(errs[1] < errs[0], "s={s}: {errs:?}");
    }
}

#[test]
fn fourier_basic_properties() {
    let g = build_grid(1, 8.0, 128).unwrap();
    let p = FracParams::new(0.5, 1).unwrap();
    let u = gaussian(g);
    assert_eq!(fourier_seminorm_sq(&g, &p, &GridFunction::zeros(g)).unwrap(), 0.0);
    let one = fourier_seminorm_sq(&g, &p, &u).unwrap();
    let two = fourier_seminorm_sq(&g, &p, &u.scaled(2.0)).unwrap();
    assert!(rel(two, 4.0 * one) < 1e-14);
    // 2D: a radial Gaussian against the lattice form on a coarse grid.
    let g2 = build_grid(2, 6.0, 48).unwrap();
    let op2 = assemble_stiffness(&g2, 0.5).unwrap();
    let u2 = GridFunction::from_fn(g2, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let opts = FourierOptions::for_dim(2);
    let f2 = fourier_seminorm_sq_with(&g2, &FracParams::new(0.5, 2).unwrap(), &u2, opts).unwrap();
    assert!(rel(f2, gagliardo_sq(&op2, &u2).unwrap()) < 0.1);
}

#[test]
fn restriction_examples() {
    let g = build_grid(2, 1.0, 6).unwrap();
    let op = assemble_stiffness(&g, 0.6).unwrap();
    let full = restrict(&op, &DomainMask::full(g)).unwrap();
    for i in 0..op.size() {
        for j in 0..op.size() {
            assert_eq!(full.matrix()[(i, j)], op.entry(i, j));
        }
    }
    let single = restrict(&op, &DomainMask::from_indices(g, [7]).unwrap()).unwrap();
    assert_eq!(single.size(), 1);
    assert_eq!(single.matrix()[(0, 0)], op.diag()[7]);
    assert!(matches!(restrict(&op, &DomainMask::empty(g)), Err(Error::EmptyDomain)));

    // Nested masks give the same form on functions supported in the inner one.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (inner, outer) = nested_pair(&mut rng, g);
    let u = random_supported(&mut rng, &inner);
    let form = |m: &DomainMask| {
        let r = restrict(&op, m).unwrap();
        let x = r.gather(&u).unwrap();
        x.dot(&(r.matrix() * &x))
    };
    assert!(rel(form(&inner), form(&outer)) < 1e-13);
}

#[test]
fn assembly_refuses_large_grids() {
    let g = build_grid(2, 1.0, 65).unwrap();
    assert!(matches!(assemble_stiffness(&g, 0.5), Err(Error::Budget { .. })));
}

#[test]
fn grid_and_mask_wire_format() {
    let g = build_grid(2, 1.5, 4).unwrap();
    let json = serde_json::to_string(&g).unwrap();
    assert_eq!(json, r#"{"dim":2,"half_width":1.5,"resolution":4}"#);
    assert_eq!(serde_json::from_str::<Grid>(&json).unwrap(), g);
    assert!(serde_json::from_str::<Grid>(r#"{"dim":2,"half_width":1.5,"resolution":4,"x":1}"#).is_err());
    let mask = DomainMask::from_indices(g, [1, 2, 3, 9]).unwrap();
    let back: DomainMask = serde_json::from_str(&serde_json::to_string(&mask).unwrap()).unwrap();
    assert_eq!(back, mask);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_and_positive(s in 0.05f64..0.95, res in 2usize..24, two_d in any::<bool>(), seed in any::<u64>()) {
        let (dim, res) = if two_d { (2, res.min(10)) } else { (1, res) };
        let g = build_grid(dim, 1.0, res).unwrap();
        let op = assemble_stiffness(&g, s).unwrap();
        prop_assert_eq!(op.symmetry_defect(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_function(&mut rng, g);
        let q = gagliardo_sq(&op, &u).unwrap();
        prop_assert!(q > 0.0);
        prop_assert!(rel(op.quadratic_form(&u).unwrap(), q) < 1e-11);
        prop_assert!(op.tail().iter().all(|&r| r > 0.0));
    }

    #[test]
    fn form_is_quadratic(c in -3.0f64..3.0, seed in any::<u64>()) {
        let g = build_grid(1, 1.0, 16).unwrap();
        let op = assemble_stiffness(&g, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_function(&mut rng, g);
        let v = random_function(&mut rng, g);
        let q = gagliardo_sq(&op, &u).unwrap();
        prop_assert!((gagliardo_sq(&op, &u.scaled(c)).unwrap() - c * c * q).abs() <= 1e-12 * q.max(1.0) * (1.0 + c * c));
        // Polarization: Q(u+v) + Q(u-v) = 2Q(u) + 2Q(v).
        let lhs = gagliardo_sq(&op, &u.add(&v).unwrap()).unwrap() + gagliardo_sq(&op, &u.sub(&v).unwrap()).unwrap();
        let rhs = 2.0 * q + 2.0 * gagliardo_sq(&op, &v).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-12);
    }
}

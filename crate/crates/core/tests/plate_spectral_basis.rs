use fsi_core::plate::{EigenMethod, GalerkinBasis, PlateGrid};
use fsi_core::FsiError;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Dense 13-point biharmonic written out node by node: `δxxxx + 2δxxyy +
/// δyyyy` on the extended grid, where the ring is zero and the ghost just
/// outside it mirrors the first interior node (zero normal slope).
fn dense_biharmonic(g: &PlateGrid) -> DMatrix<f64> {
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (hx, hy) = (g.hx(), g.hy());
    let n = g.len();
    // maps an extended index (1..=nx interior, 0 ring, -1 / nx+2 ghost) to an
    // interior index, or None for a zero value
    let reflect = |e: isize, m: isize| -> Option<usize> {
        match e {
            -1 => Some(0),
            0 => None,
            e if e == m + 1 => None,
            e if e == m + 2 => Some((m - 1) as usize),
            e => Some((e - 1) as usize),
        }
    };
    let mut a = DMatrix::zeros(n, n);
    for j in 1..=ny {
        for i in 1..=nx {
            let row = (i - 1 + nx * (j - 1)) as usize;
            let mut add = |ei: isize, ej: isize, c: f64| {
                // the xxyy term only reaches diagonal neighbours on the ring,
                // never a ghost, so reflection is only needed along one axis
                if let (Some(p), Some(q)) = (reflect(ei, nx), reflect(ej, ny)) {
                    a[(row, p + nx as usize * q)] += c;
                }
            };
            let x4 = 1.0 / hx.powi(4);
            let y4 = 1.0 / hy.powi(4);
            let xy = 2.0 / (hx * hx * hy * hy);
            for (d, c) in [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)] {
                add(i + d, j, c * x4);
                add(i, j + d, c * y4);
            }
            for (di, ci) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
                for (dj, cj) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
                    add(i + di, j + dj, ci * cj * xy);
                }
            }
        }
    }
    a
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn coarse_eigenvalues_match_dense_stencil_oracle() {
    let g = PlateGrid::unit_square(8).unwrap();
    let a = dense_biharmonic(&g);
    assert!((&a - a.transpose()).amax() < 1e-6 * a.amax(), "oracle stencil must be symmetric");
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for method in [EigenMethod::Dense, EigenMethod::Iterative] {
        let b = GalerkinBasis::build_with(g, 8, method).unwrap();
        for (i, (x, e)) in b.xi().iter().zip(&ev).enumerate() {
            assert!(close(*x, *e, 1e-8), "{method:?} xi[{i}] = {x} vs oracle {e}");
        }
    }
}

#[test]
fn rectangular_grid_matches_oracle() {
    let g = PlateGrid::new(1.5, 0.8, 7, 5).unwrap();
    let mut ev: Vec<f64> = SymmetricEigen::new(dense_biharmonic(&g)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let b = GalerkinBasis::build(g, 6).unwrap();
    for (x, e) in b.xi().iter().zip(&ev) {
        assert!(close(*x, *e, 1e-8), "{x} vs {e}");
    }
}

#[test]
fn unit_square_basis_is_positive_and_ascending() {
    let b = GalerkinBasis::build(PlateGrid::unit_square(16).unwrap(), 4).unwrap();
    assert!(b.xi()[0] > 0.0);
    assert!(b.xi()[0] < b.xi()[1], "the first eigenvalue must be simple");
    assert!(b.xi().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn rayleigh_identity_and_orthonormality() {
    let b = GalerkinBasis::build(PlateGrid::unit_square(16).unwrap(), 8).unwrap();
    let g = b.grid();
    for i in 0..b.k() {
        assert!(close(b.rayleigh_quotient(i), b.xi()[i], 1e-8), "mode {i}");
        for j in 0..b.k() {
            let ip = g.inner(b.mode(i), b.mode(j));
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-10, "({i},{j}) -> {ip}");
        }
    }
}

#[test]
fn too_many_modes_is_a_parameter_error() {
    let g = PlateGrid::unit_square(4).unwrap();
    assert!(matches!(GalerkinBasis::build(g, 17), Err(FsiError::Parameter(_))));
    assert!(matches!(GalerkinBasis::build(g, 0), Err(FsiError::Parameter(_))));
    assert!(matches!(PlateGrid::unit_square(3), Err(FsiError::Parameter(_))));
}

#[test]
fn project_examples() {
    let b = GalerkinBasis::build(PlateGrid::unit_square(10).unwrap(), 6).unwrap();
    let e2 = b.project(b.mode(1));
    for (i, c) in e2.iter().enumerate() {
        assert!((c - if i == 1 { 1.0 } else { 0.0 }).abs() < 1e-10);
    }
    assert!(b.project(&vec![0.0; b.grid().len()]).iter().all(|c| *c == 0.0));
    let f: Vec<f64> = b.mode(0).iter().zip(b.mode(2)).map(|(a, c)| 3.0 * a - 2.0 * c).collect();
    let want = [3.0, 0.0, -2.0, 0.0, 0.0, 0.0];
    for (c, w) in b.project(&f).iter().zip(want) {
        assert!((c - w).abs() < 1e-10);
    }
}

#[test]
fn spectral_norm_examples() {
    let b = GalerkinBasis::build(PlateGrid::unit_square(10).unwrap(), 5).unwrap();
    let xi = b.xi();
    assert!(close(b.spectral_norm(&[1.0], 2.0).unwrap(), xi[0].sqrt(), 1e-14));
    assert!(close(b.spectral_norm(&[0.0, 1.0, 0.0], -2.0).unwrap(), xi[1].powf(-0.5), 1e-14));
    let c = [0.3, -1.2, 0.5, 2.0];
    let euclid = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert_eq!(b.spectral_norm(&c, 0.0).unwrap(), euclid);
    assert!(matches!(b.spectral_norm(&c, 2.5), Err(FsiError::Parameter(_))));
    assert!(matches!(b.spectral_norm(&c, -2.1), Err(FsiError::Parameter(_))));
    assert!(matches!(b.spectral_norm(&[1.0; 6], 0.0), Err(FsiError::Parameter(_))));
}

#[test]
fn h2_norm_equals_laplacian_norm_in_span() {
    let b = GalerkinBasis::build(PlateGrid::unit_square(12).unwrap(), 6).unwrap();
    let c = [0.7, -0.2, 0.0, 1.1, 0.4, -0.9];
    let f = b.synthesize(&c);
    let lap = fsi_core::plate::biharmonic::laplacian_norm_sq(b.grid(), &f);
    let spec = b.spectral_norm(&c, 2.0).unwrap().powi(2);
    assert!(close(lap, spec, 1e-9), "{lap} vs {spec}");
}

#[test]
fn first_eigenvalue_is_refinement_stable() {
    let coarse = GalerkinBasis::build(PlateGrid::unit_square(8).unwrap(), 1).unwrap();
    let fine = GalerkinBasis::build(PlateGrid::unit_square(16).unwrap(), 1).unwrap();
    let (a, b) = (coarse.xi()[0], fine.xi()[0]);
    assert!((a - b).abs() / b < 0.10, "{a} vs {b}");
}

#[test]
fn cache_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.json");
    let b = GalerkinBasis::build(PlateGrid::new(1.0, 0.9, 9, 8).unwrap(), 5).unwrap();
    b.save(&path).unwrap();
    let l = GalerkinBasis::load(&path).unwrap();
    assert_eq!(l.grid(), b.grid());
    let c = [0.1, -0.4, 2.0, 0.3, 1e-3];
    for s in [-2.0, -0.7, 0.0, 1.3, 2.0] {
        assert_eq!(b.spectral_norm(&c, s).unwrap().to_bits(), l.spectral_norm(&c, s).unwrap().to_bits());
    }
    for i in 0..5 {
        assert_eq!(b.mode(i), l.mode(i));
    }
    // a cache with fewer modes than requested is rebuilt, a larger one truncated
    let t = GalerkinBasis::load_or_build(&path, *b.grid(), 3).unwrap();
    assert_eq!(t.xi(), &b.xi()[..3]);
    let r = GalerkinBasis::load_or_build(&path, *b.grid(), 7).unwrap();
    assert_eq!(r.k(), 7);
}

#[test]
fn build_is_deterministic() {
    let g = PlateGrid::unit_square(9).unwrap();
    let a = GalerkinBasis::build_with(g, 4, EigenMethod::Iterative).unwrap();
    let b = GalerkinBasis::build_with(g, 4, EigenMethod::Iterative).unwrap();
    assert_eq!(a.xi(), b.xi());
    assert_eq!(a.mode(3), b.mode(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_inequality(i in 0usize..6, a in 0.01f64..1.99, scale in 0.01f64..100.0) {
        let b = GalerkinBasis::build(PlateGrid::unit_square(8).unwrap(), 6).unwrap();
        let mut c = vec![0.0; 6];
        c[i] = scale;
        let lhs = b.spectral_norm(&c, a).unwrap().powi(2);
        let rhs = b.spectral_norm(&c, 0.0).unwrap().powf(2.0 - a) * b.spectral_norm(&c, 2.0).unwrap().powf(a);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn spectral_norm_is_monotone_in_order(c in prop::collection::vec(-10.0f64..10.0, 1..6), s in -2.0f64..1.9) {
        // ξ_i > 1 on the unit square, so higher orders weigh every mode more
        let b = GalerkinBasis::build(PlateGrid::unit_square(8).unwrap(), 6).unwrap();
        prop_assert!(b.xi()[0] > 1.0);
        let lo = b.spectral_norm(&c, s).unwrap();
        let hi = b.spectral_norm(&c, s + 0.1).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn synthesize_project_roundtrip(c in prop::collection::vec(-5.0f64..5.0, 6)) {
        let b = GalerkinBasis::build(PlateGrid::unit_square(8).unwrap(), 6).unwrap();
        let back = b.project(&b.synthesize(&c));
        for (x, y) in back.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

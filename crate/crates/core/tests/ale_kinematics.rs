use fsi_core::ale::{
    geometric_identity_check, le_map, le_velocity, raw_gradient, sym_gradient, transformed_divergence,
    transformed_gradient, JacobianField, ReferenceGrid, StaggeredField, TransformCoeffs, WallValues,
};
use fsi_core::plate::{GalerkinBasis, PlateGrid};
use fsi_core::FsiError;
use proptest::prelude::*;

fn grid(n: usize, nz: usize) -> ReferenceGrid {
    ReferenceGrid::new(PlateGrid::unit_square(n).unwrap(), nz).unwrap()
}

/// Analytic wall values of a velocity field.
struct Walls<F>(ReferenceGrid, F);

impl<F: Fn([f64; 3]) -> [f64; 3] + Sync> WallValues for Walls<F> {
    fn value(&self, comp: usize, dir: usize, high: bool, (i, j, k): (usize, usize, usize)) -> f64 {
        let g = &self.0;
        let mut p = g.cell_center(i, j, k);
        let (lo, hi) = [(0.0, g.plate.lx), (0.0, g.plate.ly), (-1.0, 0.0)][dir];
        p[dir] = if high { hi } else { lo };
        (self.1)(p)[comp]
    }
}

#[test]
fn le_map_examples() {
    let p = PlateGrid::unit_square(6).unwrap();
    let zero = vec![0.0; p.len()];
    let eta = p.sample(|x, y| 0.3 * (x * y * 9.0).sin());
    for (x, y) in [(0.1, 0.7), (0.5, 0.5), (0.93, 0.2)] {
        for z in [-1.0, -0.6, -0.25, 0.0] {
            assert_eq!(le_map(&p, &zero, [x, y], z), [x, y, z]);
        }
        assert_eq!(le_map(&p, &eta, [x, y], -1.0), [x, y, -1.0]);
    }
    // at a node the interface height is the nodal value
    let (x, y) = p.node(2, 3);
    let top = le_map(&p, &eta, [x, y], 0.0);
    assert!((top[2] - eta[p.idx(2, 3)]).abs() < 1e-15);
}

#[test]
fn le_velocity_examples() {
    let p = PlateGrid::unit_square(6).unwrap();
    let v = p.sample(|x, y| x - y * y);
    assert_eq!(le_velocity(&p, &vec![0.0; p.len()], [0.4, 0.4], -0.5), [0.0; 3]);
    assert_eq!(le_velocity(&p, &v, [0.4, 0.4], -1.0), [0.0; 3]);
    let (x, y) = p.node(4, 1);
    let w = le_velocity(&p, &v, [x, y], 0.0);
    assert_eq!(&w[..2], &[0.0, 0.0]);
    assert!((w[2] - v[p.idx(4, 1)]).abs() < 1e-15);
}

#[test]
fn flat_plate_gives_raw_gradient_bit_for_bit() {
    let g = grid(6, 4);
    let co = TransformCoeffs::new(&g, &vec![0.0; g.plate.len()], 1e-3).unwrap();
    let f = StaggeredField::sample(&g, |[x, y, z]| [(x * 3.0).sin() * z, y * y - x, (x + z).cos()]);
    let raw = raw_gradient(&co.stencil, &f, None);
    assert_eq!(transformed_gradient(&co, &f, None), raw);
}

#[test]
fn constant_lift_scales_vertical_derivatives() {
    let g = grid(7, 5);
    let c = 0.35;
    let co = TransformCoeffs::new(&g, &vec![c; g.plate.len()], 1e-3).unwrap();
    let f = StaggeredField::sample(&g, |[x, y, z]| [x * z * z, (y + z).sin(), x * y * z]);
    let raw = raw_gradient(&co.stencil, &f, None);
    let tg = transformed_gradient(&co, &f, None);
    let (nxc, nyc, nzc) = g.cells();
    // cells whose four corner nodes are interior see a flat plate at height c
    for k in 0..nzc {
        for b in 1..nyc - 1 {
            for a in 1..nxc - 1 {
                let cell = g.cell(a, b, k);
                for i in 0..3 {
                    assert_eq!(tg[cell][i][0], raw[cell][i][0]);
                    assert_eq!(tg[cell][i][1], raw[cell][i][1]);
                    assert!((tg[cell][i][2] - raw[cell][i][2] / (1.0 + c)).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn linear_field_gives_its_jacobian() {
    let g = grid(6, 4);
    let m = [[0.3, -1.2, 0.5], [2.0, 0.1, -0.7], [0.0, 0.9, 1.4]];
    let f = move |p: [f64; 3]| {
        let mut v = [0.4, -0.2, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                v[i] += m[i][j] * p[j];
            }
        }
        v
    };
    let u = StaggeredField::sample(&g, f);
    let co = TransformCoeffs::new(&g, &vec![0.0; g.plate.len()], 1e-3).unwrap();
    let walls = Walls(g, f);
    for t in transformed_gradient(&co, &u, Some(&walls)) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((t[i][j] - m[i][j]).abs() < 1e-12, "{t:?}");
            }
        }
    }
}

#[test]
fn rigid_rotation_and_squeeze_are_divergence_free() {
    let g = grid(6, 4);
    let co = TransformCoeffs::new(&g, &vec![0.0; g.plate.len()], 1e-3).unwrap();
    let rot = |[x, y, _]: [f64; 3]| [y, -x, 0.0];
    let u = StaggeredField::sample(&g, rot);
    let w = Walls(g, rot);
    assert!(transformed_divergence(&co, &u, Some(&w)).iter().all(|d| d.abs() < 1e-12));
    for d in sym_gradient(&co, &u, Some(&w)) {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(d[i][j].abs() < 1e-12);
                }
            }
        }
    }
    let sq = |[x, y, z]: [f64; 3]| [x, y, -2.0 * z];
    let u = StaggeredField::sample(&g, sq);
    assert!(transformed_divergence(&co, &u, Some(&Walls(g, sq))).iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn geometric_identity_examples() {
    let g = grid(8, 4);
    let n = g.plate.len();
    let eta = g.plate.sample(|x, y| 0.2 * (3.0 * x).sin() * y);
    assert_eq!(geometric_identity_check(&g, &vec![0.0; n], &eta).unwrap(), 0.0);
    assert!(geometric_identity_check(&g, &vec![1.0; n], &vec![0.0; n]).unwrap() <= 1e-12);
}

#[test]
fn geometric_identity_holds_under_refinement() {
    for n in [8, 16] {
        let g = grid(n, 4);
        let b = GalerkinBasis::build(g.plate, 2).unwrap();
        let eta: Vec<f64> = b.mode(0).iter().map(|v| 0.1 * v).collect();
        let eta_t: Vec<f64> = b.mode(1).iter().map(|v| 0.1 * v).collect();
        let r = geometric_identity_check(&g, &eta_t, &eta).unwrap();
        assert!(r <= 1e-12, "n = {n}: residual {r}");
    }
}

#[test]
fn jacobian_guard_records_extremes_and_refuses_the_floor() {
    let g = grid(6, 4);
    let eta = g.plate.sample(|x, y| 0.5 * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin() - 0.1);
    let jf = JacobianField::new(&g, &eta, 1e-3).unwrap();
    let lo = eta.iter().fold(0.0f64, |a, b| a.min(*b));
    let hi = eta.iter().fold(0.0f64, |a, b| a.max(*b));
    assert_eq!(jf.j_min, 1.0 + lo);
    assert_eq!(jf.j_max, 1.0 + hi);
    assert!(jf.j.iter().all(|j| *j >= jf.j_min && *j <= jf.j_max));
    let deep = vec![-0.9995; g.plate.len()];
    assert!(matches!(JacobianField::new(&g, &deep, 1e-3), Err(FsiError::Geometry { .. })));
    assert!(matches!(TransformCoeffs::new(&g, &deep, 1e-3), Err(FsiError::Geometry { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trace_of_sym_gradient_is_divergence(
        ce in prop::collection::vec(-0.15f64..0.15, 4),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let g = grid(6, 4);
        let basis = GalerkinBasis::build(g.plate, 4).unwrap();
        let co = TransformCoeffs::new(&g, &basis.synthesize(&ce), 1e-3).unwrap();
        let u = StaggeredField::sample(&g, |[x, y, z]| [a * (x * z).sin(), b * y * z, (a * x + b * y).cos() * z]);
        let div = transformed_divergence(&co, &u, None);
        let sym = sym_gradient(&co, &u, None);
        for (d, s) in div.iter().zip(&sym) {
            prop_assert!((d - (s[0][0] + s[1][1] + s[2][2])).abs() <= 1e-14 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn bottom_is_invariant(x in 0.0f64..1.0, y in 0.0f64..1.0, amp in -0.5f64..0.5) {
        let p = PlateGrid::unit_square(6).unwrap();
        let eta = p.sample(|u, v| amp * (u * 7.0).cos() * v);
        prop_assert_eq!(le_map(&p, &eta, [x, y], -1.0), [x, y, -1.0]);
        prop_assert_eq!(le_velocity(&p, &eta, [x, y], -1.0), [0.0, 0.0, 0.0]);
    }
}

use fsi_core::harness::{gradient_consistency, gradient_probe};
use fsi_core::models::{
    airy_solve, vk_bracket, ConstantOverrides, FieldSpec, ModelSpec, NonlinearF, PlateModel, Sampler,
};
use fsi_core::plate::{GalerkinBasis, PlateGrid, Stencils};
use fsi_core::FsiError;
use proptest::prelude::*;

fn basis(n: usize, k: usize) -> GalerkinBasis {
    GalerkinBasis::build(PlateGrid::unit_square(n).unwrap(), k).unwrap()
}

fn kirchhoff(nu: f64, mu: f64, f: NonlinearF) -> ModelSpec {
    ModelSpec::Kirchhoff { nu, q: 2.0, r: 0.0, mu, f, h: FieldSpec::Zero, a: 0.5, gamma_prime: None }
}

fn with_c_star(spec: &ModelSpec, b: &GalerkinBasis, c_star: f64) -> PlateModel {
    PlateModel::new(spec, b, ConstantOverrides { c_star: Some(c_star), ..Default::default() }).unwrap()
}

/// Interior nodes whose centred stencils never touch the boundary ring.
fn deep_nodes(g: &PlateGrid) -> Vec<usize> {
    let mut out = Vec::new();
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            out.push(g.idx(i, j));
        }
    }
    out
}

#[test]
fn bracket_examples() {
    let g = PlateGrid::unit_square(10).unwrap();
    let w = g.sample(|x, _| 0.5 * x * x);
    let u = g.sample(|_, y| 0.5 * y * y);
    let b = vk_bracket(&g, &w, &u).unwrap();
    let xy = g.sample(|x, y| x * y);
    let c = vk_bracket(&g, &xy, &xy).unwrap();
    for k in deep_nodes(&g) {
        assert!((b[k] - 1.0).abs() < 1e-9, "{}", b[k]);
        assert!((c[k] + 2.0).abs() < 1e-9, "{}", c[k]);
    }
    let ba = vk_bracket(&g, &u, &w).unwrap();
    assert!(b.iter().zip(&ba).all(|(x, y)| x == y));
    assert!(matches!(vk_bracket(&g, &w[1..], &u), Err(FsiError::Parameter(_))));
}

#[test]
fn airy_examples() {
    let b = basis(10, 3);
    let zero = airy_solve(&b, &vec![0.0; b.grid().len()]).unwrap();
    assert!(zero.v.iter().all(|v| *v == 0.0));
    let eta = b.mode(0).to_vec();
    let a1 = airy_solve(&b, &eta).unwrap();
    assert!(a1.residual <= 1e-10);
    // direct substitution: S v = −[η, η]
    let sv = fsi_core::plate::biharmonic::apply(b.grid(), &a1.v);
    let br = vk_bracket(b.grid(), &eta, &eta).unwrap();
    let scale = br.iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(sv.iter().zip(&br).all(|(s, r)| (s + r).abs() <= 1e-9 * scale));
    let twice: Vec<f64> = eta.iter().map(|x| 2.0 * x).collect();
    let a2 = airy_solve(&b, &twice).unwrap();
    let vmax = a1.v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(a2.v.iter().zip(&a1.v).all(|(x, y)| (x - 4.0 * y).abs() <= 1e-9 * vmax.max(1.0)));
}

#[test]
fn zero_model_is_inert() {
    let b = basis(8, 4);
    let m = PlateModel::with_defaults(&ModelSpec::Zero, &b).unwrap();
    let c = [0.3, -2.0, 1.0, 0.5];
    assert_eq!(m.force(&b, &c).unwrap(), vec![0.0; 4]);
    assert_eq!(m.potential(&b, &c).unwrap(), 0.0);
    let s = Sampler::new(&m, &b, 3);
    assert_eq!(s.estimate_lipschitz(1.0, 0.5, 100).unwrap(), 0.0);
    assert!(s.check_coercivity(2.0, 200).unwrap().min_margin >= 0.0);
}

#[test]
fn kirchhoff_without_source_vanishes_at_rest() {
    let b = basis(8, 4);
    let m = PlateModel::with_defaults(&kirchhoff(0.3, 0.5, NonlinearF::Linear { slope: 0.0 }), &b).unwrap();
    assert!(m.force(&b, &[0.0; 4]).unwrap().iter().all(|v| *v == 0.0));
    assert_eq!(m.potential(&b, &[0.0; 4]).unwrap(), 0.0);
}

#[test]
fn berger_force_matches_quadrature_oracle() {
    let b = basis(12, 5);
    let (nu, g_coef) = (1.7, 0.6);
    let m = PlateModel::with_defaults(&ModelSpec::Berger { nu, g: g_coef, h: FieldSpec::Zero }, &b).unwrap();
    let g = b.grid();
    let w = b.mode(0);
    // ∫|∇w|² from one-sided differences over every edge, ring included
    let ext = |i: isize, j: isize| g.ext(w, i, j);
    let (hx, hy) = (g.hx(), g.hy());
    let mut i1 = 0.0;
    for j in 1..=g.ny as isize {
        for i in 0..=g.nx as isize {
            i1 += ((ext(i + 1, j) - ext(i, j)) / hx).powi(2) * hx * hy;
        }
    }
    for j in 0..=g.ny as isize {
        for i in 1..=g.nx as isize {
            i1 += ((ext(i, j + 1) - ext(i, j)) / hy).powi(2) * hx * hy;
        }
    }
    let lap = b.project(&Stencils::new(g).laplacian(w));
    let want: Vec<f64> = lap.iter().map(|l| -(nu * i1 - g_coef) * l).collect();
    let got = m.force(&b, &[1.0]).unwrap();
    let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for (x, y) in got.iter().zip(&want) {
        assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
    }
    let pot = m.potential(&b, &[1.0]).unwrap();
    assert!((pot - (0.25 * nu * i1 * i1 - 0.5 * g_coef * i1)).abs() <= 1e-10 * pot.abs().max(1.0));
}

#[test]
fn berger_without_compression_has_nonnegative_potential() {
    let b = basis(8, 5);
    let spec = ModelSpec::Berger { nu: 2.0, g: 0.0, h: FieldSpec::Zero };
    let m = with_c_star(&spec, &b, 0.0);
    let c = [1.0, -0.4, 3.0, 0.2, -2.0];
    assert!(m.potential(&b, &c).unwrap() >= 0.0);
    let rep = Sampler::new(&m, &b, 11).check_coercivity(5.0, 500).unwrap();
    assert!(rep.pass && rep.min_margin >= 0.0, "{rep:?}");
}

#[test]
fn kirchhoff_cubic_is_coercive_without_offset() {
    let b = basis(8, 5);
    let m = with_c_star(&kirchhoff(0.2, -0.5, NonlinearF::Cubic { coef: 1.0 }), &b, 0.0);
    let rep = Sampler::new(&m, &b, 5).check_coercivity(3.0, 500).unwrap();
    assert!(rep.pass && rep.min_margin >= 0.0, "{rep:?}");
}

#[test]
fn default_models_pass_coercivity() {
    let b = basis(8, 5);
    for spec in [ModelSpec::default_kirchhoff(), ModelSpec::default_berger(), ModelSpec::default_von_karman()] {
        let m = PlateModel::with_defaults(&spec, &b).unwrap();
        let c = m.constants();
        assert!(c.kappa > 0.0 && c.kappa < 0.5 && c.c_star >= 0.0 && c.a < 2.0);
        let rep = Sampler::new(&m, &b, 2).check_coercivity(2.0, 400).unwrap();
        assert!(rep.pass, "{}: {rep:?}", m.name());
    }
}

#[test]
fn berger_laplacian_lipschitz_is_at_most_safety_factor() {
    let b = basis(8, 6);
    let m = PlateModel::with_defaults(&ModelSpec::Berger { nu: 0.0, g: 1.0, h: FieldSpec::Zero }, &b).unwrap();
    let c_r = Sampler::new(&m, &b, 9).estimate_lipschitz(1.0, 0.0, 400).unwrap();
    assert!(c_r > 0.0 && c_r <= 2.0, "{c_r}");
}

#[test]
fn linear_kirchhoff_lipschitz_matches_lattice_oracle() {
    let b = basis(8, 3);
    let a = 0.5;
    let m = PlateModel::with_defaults(&kirchhoff(0.0, 0.0, NonlinearF::Linear { slope: 1.0 }), &b).unwrap();
    let r = 1.0;
    // 10 points per axis, zero included, paired with the origin and with
    // their mirror image; the force is linear so only differences matter
    let ticks: Vec<f64> = (0..10).map(|i| -r + 0.2 * r * i as f64).collect();
    let mut lattice: f64 = 0.0;
    for &x in &ticks {
        for &y in &ticks {
            for &z in &ticks {
                let c = [x, y, z];
                for other in [[0.0; 3], [-x, -y, -z]] {
                    let d: Vec<f64> = c.iter().zip(&other).map(|(p, q)| p - q).collect();
                    let den = b.spectral_norm(&d, 2.0).unwrap();
                    if den == 0.0 {
                        continue;
                    }
                    let f1 = m.force(&b, &c).unwrap();
                    let f2 = m.force(&b, &other).unwrap();
                    let df: Vec<f64> = f1.iter().zip(&f2).map(|(p, q)| p - q).collect();
                    lattice = lattice.max(b.spectral_norm(&df, -a).unwrap() / den);
                }
            }
        }
    }
    let est = Sampler::new(&m, &b, 1).estimate_lipschitz(r, a, 400).unwrap();
    assert!(est >= lattice && est <= 2.0 * lattice * (1.0 + 1e-9), "estimate {est}, lattice {lattice}");
}

#[test]
fn lipschitz_rejects_bad_inputs() {
    let b = basis(8, 3);
    let m = PlateModel::with_defaults(&ModelSpec::default_berger(), &b).unwrap();
    let s = Sampler::new(&m, &b, 1);
    assert!(matches!(s.estimate_lipschitz(1.0, 0.0, 99), Err(FsiError::Parameter(_))));
    assert!(matches!(s.estimate_lipschitz(1.0, 2.0, 100), Err(FsiError::Parameter(_))));
}

#[test]
fn basis_satisfies_dirichlet_lower_bound() {
    let b = basis(12, 10);
    let l1 = b.grid().dirichlet_lambda1();
    for i in 0..b.k() {
        assert!(b.rayleigh_quotient(i) >= l1 * l1, "mode {i}");
    }
}

#[test]
fn gradients_are_second_order_consistent() {
    let b = basis(10, 6);
    let (eta, psi) = gradient_probe(b.k());
    for spec in [ModelSpec::default_kirchhoff(), ModelSpec::default_berger(), ModelSpec::default_von_karman()] {
        let m = PlateModel::with_defaults(&spec, &b).unwrap();
        let chk = gradient_consistency(&m, &b, &eta, &psi, &[1e-3, 1e-4]).unwrap();
        let k: Vec<f64> = chk.eps.iter().zip(&chk.errors).map(|(e, r)| r / (e * e)).collect();
        assert!(k[0] > 0.0 && (k[1] / k[0] - 1.0).abs() < 0.2, "{}: K = {k:?}", m.name());
    }
}

#[test]
fn c_pi_bound_dominates_initial_potential() {
    let b = basis(8, 4);
    let m = PlateModel::with_defaults(&ModelSpec::default_kirchhoff(), &b).unwrap();
    let eta0 = [0.4, -0.2, 0.1, 0.05];
    let c = Sampler::new(&m, &b, 4).c_pi_eta0(&eta0, 1000).unwrap();
    assert!(c >= m.potential(&b, &eta0).unwrap());
}

#[test]
fn invalid_model_parameters_are_all_reported() {
    let b = basis(8, 2);
    let spec = ModelSpec::Kirchhoff {
        nu: -1.0,
        q: 0.5,
        r: 1.0,
        mu: 0.0,
        f: NonlinearF::Cubic { coef: -1.0 },
        h: FieldSpec::Zero,
        a: 1.5,
        gamma_prime: None,
    };
    match PlateModel::with_defaults(&spec, &b) {
        Err(FsiError::Config(errs)) => assert_eq!(errs.len(), 4, "{errs:?}"),
        other => panic!("expected a config error, got {:?}", other.err()),
    }
    let kappa = ConstantOverrides { kappa: Some(0.5), ..Default::default() };
    assert!(PlateModel::new(&ModelSpec::Zero, &b, kappa).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_bilinear_and_symmetric(
        cw in prop::collection::vec(-1.0f64..1.0, 4),
        cv in prop::collection::vec(-1.0f64..1.0, 4),
        cu in prop::collection::vec(-1.0f64..1.0, 4),
        al in -3.0f64..3.0,
        be in -3.0f64..3.0,
    ) {
        let b = basis(8, 4);
        let g = b.grid();
        let (w, v, u) = (b.synthesize(&cw), b.synthesize(&cv), b.synthesize(&cu));
        let comb: Vec<f64> = w.iter().zip(&v).map(|(x, y)| al * x + be * y).collect();
        let lhs = vk_bracket(g, &comb, &u).unwrap();
        let (bw, bv) = (vk_bracket(g, &w, &u).unwrap(), vk_bracket(g, &v, &u).unwrap());
        let scale = 1.0 + lhs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for k in 0..g.len() {
            prop_assert!((lhs[k] - al * bw[k] - be * bv[k]).abs() <= 1e-12 * scale);
        }
        let sym = vk_bracket(g, &u, &w).unwrap();
        prop_assert!(sym.iter().zip(&bw).all(|(a, b)| a == b));
    }

    #[test]
    fn force_and_potential_are_pure(c in prop::collection::vec(-0.5f64..0.5, 4), which in 0usize..3) {
        let b = basis(8, 4);
        let spec = [ModelSpec::default_kirchhoff(), ModelSpec::default_berger(), ModelSpec::default_von_karman()][which].clone();
        let m = PlateModel::with_defaults(&spec, &b).unwrap();
        prop_assert_eq!(m.force(&b, &c).unwrap(), m.force(&b, &c).unwrap());
        prop_assert_eq!(m.potential(&b, &c).unwrap().to_bits(), m.potential(&b, &c).unwrap().to_bits());
    }
}

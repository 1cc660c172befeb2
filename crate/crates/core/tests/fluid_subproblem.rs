use fsi_core::ale::{transformed_divergence, ReferenceGrid, StaggeredField, TransformCoeffs};
use fsi_core::fluid::{
    assemble_fsp, fsp_energy_audit, lift_boundary, solve_fsp, FluidState, FspContext, FspInputs, FspOptions,
};
use fsi_core::plate::{GalerkinBasis, PlateGrid};

fn setup(n: usize, nz: usize, k: usize) -> (GalerkinBasis, FspContext) {
    let p = PlateGrid::unit_square(n).unwrap();
    let b = GalerkinBasis::build(p, k).unwrap();
    let ctx = FspContext::new(ReferenceGrid::new(p, nz).unwrap(), &b).unwrap();
    (b, ctx)
}

fn generic_prev(ctx: &FspContext) -> StaggeredField {
    let mut u = StaggeredField::sample(&ctx.grid, |[x, y, z]| {
        [(3.0 * x).sin() * (z + 1.0) * z, (2.0 * y + x).cos() * z * (z + 1.0), 0.3 * (x * y).sin() * (z + 1.0)]
    });
    // respect the wall conditions
    for (f, kind) in ctx.kinds.iter().enumerate() {
        if *kind == fsi_core::fluid::FaceKind::Fixed {
            u.data[f] = 0.0;
        }
    }
    u
}

#[test]
fn zero_data_gives_exact_zero() {
    let (b, ctx) = setup(6, 4, 3);
    let z = vec![0.0; 3];
    let u0 = StaggeredField::zeros(&ctx.grid);
    let inp = FspInputs { u_prev: &u0, eta_prev: &z, eta_next: &z, dteta_avg: &z, dt: 0.01, mu: 1.0, j_floor: 1e-3 };
    let sys = assemble_fsp(&ctx, &b, &inp, FspOptions::default()).unwrap();
    assert!(sys.rhs.iter().all(|v| *v == 0.0));
    let sol = solve_fsp(&ctx, &sys, 1e-10).unwrap();
    assert_eq!(sol.state, FluidState::zeros(&ctx));
}

#[test]
fn convection_block_is_skew_and_mutation_is_caught() {
    let (b, ctx) = setup(6, 4, 3);
    let u0 = generic_prev(&ctx);
    let (ep, en, rt) = (vec![0.05, -0.02, 0.01], vec![0.06, -0.01, 0.0], vec![1.0, 1.0, -1.0]);
    let inp = FspInputs { u_prev: &u0, eta_prev: &ep, eta_next: &en, dteta_avg: &rt, dt: 0.01, mu: 0.5, j_floor: 1e-3 };
    let sys = assemble_fsp(&ctx, &b, &inp, FspOptions::default()).unwrap();
    assert!(sys.convection_skew_defect() <= 1e-12, "{}", sys.convection_skew_defect());
    let bad = assemble_fsp(&ctx, &b, &inp, FspOptions { corrupt_convection_sign: true }).unwrap();
    assert!(bad.convection_skew_defect() > 1e-6);
    assert!(sys.viscous.max_skew_part() <= 1e-14 * sys.viscous.max_sym_part());
}

#[test]
fn generic_step_solves_and_satisfies_energy_inequality() {
    let (b, ctx) = setup(8, 4, 4);
    let u0 = generic_prev(&ctx);
    let ep = vec![0.05, -0.02, 0.01, 0.02];
    let en = vec![0.06, -0.01, 0.0, 0.025];
    let rt = vec![1.0, 1.0, -1.0, 0.5];
    let dt = 0.01;
    let inp = FspInputs { u_prev: &u0, eta_prev: &ep, eta_next: &en, dteta_avg: &rt, dt, mu: 0.5, j_floor: 1e-3 };
    let sys = assemble_fsp(&ctx, &b, &inp, FspOptions::default()).unwrap();
    let sol = solve_fsp(&ctx, &sys, 1e-10).unwrap();
    assert!(sol.residual <= 1e-10);
    assert!(sol.div_residual <= 1e-8, "div {}", sol.div_residual);
    // interface values are the β expansion, bit for bit
    for (t, f) in ctx.top_faces.iter().enumerate() {
        assert_eq!(sol.state.u.data[*f], ctx.top_value(t, &sol.state.beta));
    }
    // with S_end taken as the left side of the exact identity the slack is
    // what the Jensen step and the dissipation surplus leave over
    let kin_prev = 0.5 * u0.data.iter().zip(&sys.mass_prev).map(|(a, m)| m * a * a).sum::<f64>();
    let s_end = kin_prev + 0.5 * rt.iter().map(|v| v * v).sum::<f64>();
    let a = fsp_energy_audit(&sys, &sol.state, s_end, 0.0);
    assert!(a.pass, "{a:?}");
    assert!((a.slack - a.dissipation).abs() <= 1e-9 * s_end, "{a:?}");
}

#[test]
fn time_term_identity_on_manufactured_data() {
    let (b, ctx) = setup(6, 4, 2);
    let u_old = generic_prev(&ctx);
    let u_new = StaggeredField::sample(&ctx.grid, |[x, y, z]| [x * z, y - z, (x + y) * z]);
    let (ep, en) = (vec![0.1, 0.0], vec![0.3, -0.1]);
    let rt = vec![0.0; 2];
    let inp =
        FspInputs { u_prev: &u_old, eta_prev: &ep, eta_next: &en, dteta_avg: &rt, dt: 0.1, mu: 1.0, j_floor: 1e-3 };
    let sys = assemble_fsp(&ctx, &b, &inp, FspOptions::default()).unwrap();
    let (l, r) = sys.time_term_identity(&u_new);
    assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "{l} vs {r}");
}

#[test]
fn lift_is_divergence_free_and_linear() {
    let (b, ctx) = setup(6, 4, 3);
    let l0 = lift_boundary(&ctx, &b, &[0.0; 3]).unwrap();
    assert!(l0.field.data.iter().all(|v| *v == 0.0));
    let l1 = lift_boundary(&ctx, &b, &[1.0, 0.0, 0.0]).unwrap();
    assert!(l1.removed_flux.abs() > 0.0);
    assert!(l1.div_residual <= 1e-10);
    let zero = vec![0.0; b.grid().len()];
    let co = TransformCoeffs::new(&ctx.grid, &zero, 1e-3).unwrap();
    let div = transformed_divergence(&co, &l1.field, None);
    assert!(div.iter().all(|d| d.abs() <= 1e-10));
    let l2 = lift_boundary(&ctx, &b, &[0.0, 1.0, -0.5]).unwrap();
    let l3 = lift_boundary(&ctx, &b, &[2.0, -3.0, 1.5]).unwrap();
    for i in 0..l3.field.data.len() {
        let lin = 2.0 * l1.field.data[i] - 3.0 * l2.field.data[i];
        assert!((l3.field.data[i] - lin).abs() <= 1e-12 * 10.0, "{i}");
    }
}

#[test]
fn desk_grid_step_solves_accurately() {
    let (b, ctx) = setup(16, 8, 4);
    let u0 = generic_prev(&ctx);
    let ep = vec![0.05, -0.02, 0.01, 0.02];
    let rt = vec![1.0, 1.0, -1.0, 0.5];
    let inp = FspInputs { u_prev: &u0, eta_prev: &ep, eta_next: &ep, dteta_avg: &rt, dt: 0.01, mu: 1.0, j_floor: 1e-3 };
    let sys = assemble_fsp(&ctx, &b, &inp, FspOptions::default()).unwrap();
    let sol = solve_fsp(&ctx, &sys, 1e-10).unwrap();
    assert!(sol.residual < 1e-10);
    // a second solve reuses the cached symbolic factorization
    let again = solve_fsp(&ctx, &sys, 1e-10).unwrap();
    assert_eq!(sol.residual.to_bits(), again.residual.to_bits());
}

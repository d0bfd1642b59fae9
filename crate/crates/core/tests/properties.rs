mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cghdg::driver::{assemble_only, mixed_degree_solve, solve_problem, SolveMode, SolveParams};
use cghdg::linsys::symmetry_defect;
use cghdg::mesh::Subdomain;
use cghdg::problems::elasticity_square_with;
use cghdg::study::{l2_error, solution_errors};
use cghdg::voigt::{Material, PlaneModel};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupled_matrix_is_symmetric(
        tau in 0.1f64..1e3,
        gamma_exp in 0.0f64..5.0,
        e_cg in 1.0f64..500.0,
        e_hdg in 1.0f64..500.0,
        nu_cg in 0.0f64..0.49,
        nu_hdg in 0.0f64..0.49999,
        stress in any::<bool>(),
        k_hdg in 1usize..=2,
        bump in 0usize..=1,
    ) {
        let plane = if stress { PlaneModel::Stress } else { PlaneModel::Strain };
        let mats = [Material::new(e_cg, nu_cg, plane).unwrap(), Material::new(e_hdg, nu_hdg, plane).unwrap()];
        let def = elasticity_square_with(mats);
        let mesh = def.mesh(0).unwrap();
        let params = SolveParams {
            mode: SolveMode::Coupled,
            k_cg: k_hdg + bump,
            k_hdg,
            tau,
            gamma: 10f64.powf(gamma_exp),
            postprocess: false,
            parallel: false,
        };
        let sys = assemble_only(&def, &mesh, &params).unwrap();
        prop_assert!(symmetry_defect(&sys.matrix) <= 1e-12);
        prop_assert_eq!(sys.matrix.dim(), sys.n_cg + sys.n_trace);
    }
}

// Quadratic displacement with k_cg = 2, k_hdg = 1: the CG side is exact and
// the postprocessed field beats the plain HDG displacement.
#[test]
fn mixed_degree_quadratic_patch() {
    assert!(source_oracles_pass());
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let m = Material::new(80.0, 0.3, PlaneModel::Strain).unwrap();
    let def = elastic_poly_problem(Poly::random(2, &mut rng), Poly::random(2, &mut rng), m);
    let mesh = def.mesh(1).unwrap();
    let params = SolveParams { mode: SolveMode::Coupled, k_cg: 2, k_hdg: 1, tau: 10.0, gamma: 1e4, postprocess: true, parallel: true };
    let b = mixed_degree_solve(&def, &mesh, &params).unwrap();
    let err = solution_errors(&b, &def).unwrap();
    assert!(err.u_cg > 0.0 && err.u_hdg > 0.0);
    let exact = def.exact.clone().unwrap();
    let star = err.ustar.unwrap();
    assert!(star <= err.u_hdg, "u* {star:e} vs u {:e}", err.u_hdg);
    // the CG error is dominated by the HDG side through the interface
    assert!(err.u_cg < err.u_hdg);
    let direct = l2_error(&b.mesh, Some(Subdomain::Hdg), 8, |e, xi| b.value_enhanced(e, xi), |e, x| exact(x, b.regions[e])).unwrap();
    assert!((direct - star).abs() <= 1e-12 * star.max(1e-300) + 1e-15);
}

#[test]
fn uniform_quadratic_reproduced_by_uniform_degree_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let m = Material::new(80.0, 0.3, PlaneModel::Strain).unwrap();
    let def = elastic_poly_problem(Poly::random(2, &mut rng), Poly::random(2, &mut rng), m);
    let mesh = def.mesh(1).unwrap();
    let params = SolveParams { mode: SolveMode::Coupled, k_cg: 2, k_hdg: 2, tau: 10.0, gamma: 1e4, postprocess: true, parallel: true };
    let b = solve_problem(&def, &mesh, &params).unwrap();
    let err = solution_errors(&b, &def).unwrap();
    assert!(err.u < 1e-10 && err.s < 1e-8 && err.ustar.unwrap() < 1e-10, "{err:?}");
}

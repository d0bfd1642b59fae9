//! Degree k+1 in the CG region, k in the HDG region with the local
//! postprocess: the combined displacement superconverges.

use cghdg::driver::{mixed_degree_solve, SolveConfig};
use cghdg::problems::{problem_elasticity_square, ProblemKind};
use cghdg::study::{rate, solution_errors};
use cghdg::voigt::PlaneModel;

fn main() -> cghdg::Result<()> {
    let def = problem_elasticity_square(PlaneModel::Strain)?;
    for k in 1..=2 {
        let mut cfg = SolveConfig::new(ProblemKind::ElasticitySquare);
        cfg.k_cg = k + 1;
        cfg.k_hdg = k;
        cfg.postprocess = true;
        println!("k_cg = {}, k_hdg = {k}, gamma = {:e}", k + 1, cfg.params().gamma);
        println!(
            "{:>5} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6} {:>9} {:>9}",
            "level", "err_u_post", "rate", "err_ustar", "rate", "err_s", "rate", "transl", "rot"
        );
        let mut prev: Option<(f64, f64, f64, f64)> = None;
        for level in 2..=5 {
            let mesh = def.mesh(level)?;
            let b = mixed_degree_solve(&def, &mesh, &cfg.params())?;
            let e = solution_errors(&b, &def)?;
            let (up, us) = (e.u_post.unwrap_or(f64::NAN), e.ustar.unwrap_or(f64::NAN));
            let h = mesh.characteristic_size();
            let r = |a0: f64, a1: f64| prev.map_or(f64::NAN, |p| rate(a0, a1, p.0, h));
            let (r1, r2, r3) = prev.map_or((f64::NAN, f64::NAN, f64::NAN), |p| (r(p.1, up), r(p.2, us), r(p.3, e.s)));
            let (t, rot) = b.max_postprocess_residuals().unwrap_or((f64::NAN, f64::NAN));
            println!("{level:>5} {up:>12.4e} {r1:>6.2} {us:>12.4e} {r2:>6.2} {:>12.4e} {r3:>6.2} {t:>9.1e} {rot:>9.1e}", e.s);
            prev = Some((h, up, us, e.s));
        }
    }
    Ok(())
}

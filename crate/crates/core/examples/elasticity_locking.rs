//! Bimaterial square with a nearly incompressible HDG region: CG alone locks
//! at k = 1, HDG alone and the coupled scheme converge.

use cghdg::driver::{solve_problem, SolveConfig, SolveMode};
use cghdg::problems::{problem_elasticity_square, ProblemKind};
use cghdg::study::{rate, solution_errors};
use cghdg::voigt::PlaneModel;

fn main() -> cghdg::Result<()> {
    let def = problem_elasticity_square(PlaneModel::Strain)?;
    let k: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    for mode in [SolveMode::CgOnly, SolveMode::HdgOnly, SolveMode::Coupled] {
        let mut cfg = SolveConfig::new(ProblemKind::ElasticitySquare);
        cfg.mode = mode;
        cfg.k_cg = k;
        cfg.k_hdg = k;
        println!("{mode}, k = {k}");
        println!("{:>5} {:>10} {:>12} {:>6} {:>12} {:>6}", "level", "h", "err_u", "rate", "err_s", "rate");
        let mut prev: Option<(f64, f64, f64)> = None;
        for level in 2..=5 {
            let mesh = def.mesh(level)?;
            let b = solve_problem(&def, &mesh, &cfg.params())?;
            let e = solution_errors(&b, &def)?;
            let h = mesh.characteristic_size();
            let (ru, rs) = prev.map_or((f64::NAN, f64::NAN), |(h0, u0, s0)| (rate(u0, e.u, h0, h), rate(s0, e.s, h0, h)));
            println!("{level:>5} {h:>10.4e} {:>12.4e} {ru:>6.2} {:>12.4e} {rs:>6.2}", e.u, e.s);
            prev = Some((h, e.u, e.s));
        }
    }
    Ok(())
}

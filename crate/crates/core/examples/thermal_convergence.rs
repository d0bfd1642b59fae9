//! Coupled CG-HDG convergence on the thermal square for k = 1..3.

use cghdg::driver::{solve_problem, SolveConfig, SolveMode};
use cghdg::problems::{problem_thermal_square, ProblemKind};
use cghdg::study::{rate, solution_errors};

fn main() -> cghdg::Result<()> {
    let def = problem_thermal_square();
    for k in 1..=3 {
        let mut cfg = SolveConfig::new(ProblemKind::ThermalSquare);
        cfg.mode = SolveMode::Coupled;
        cfg.k_cg = k;
        cfg.k_hdg = k;
        println!("k = {k}");
        println!("{:>5} {:>10} {:>12} {:>6} {:>12} {:>6} {:>9}", "level", "h", "err_u_cg", "rate", "err_u_hdg", "rate", "sym");
        let mut prev: Option<(f64, f64, f64)> = None;
        for level in 2..=5 {
            let mesh = def.mesh(level)?;
            let b = solve_problem(&def, &mesh, &cfg.params())?;
            let e = solution_errors(&b, &def)?;
            let h = mesh.characteristic_size();
            let (rc, rh) = prev.map_or((f64::NAN, f64::NAN), |(h0, c0, d0)| (rate(c0, e.u_cg, h0, h), rate(d0, e.u_hdg, h0, h)));
            println!("{level:>5} {h:>10.4e} {:>12.4e} {rc:>6.2} {:>12.4e} {rh:>6.2} {:>9.1e}", e.u_cg, e.u_hdg, b.symmetry_defect);
            prev = Some((h, e.u_cg, e.u_hdg));
        }
    }
    Ok(())
}

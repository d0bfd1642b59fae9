//! Cook's membrane with a nearly incompressible HDG frame around a
//! compressible CG core: vertical tip displacement per refinement level.

use cghdg::driver::{solve_problem, SolveConfig, SolveMode};
use cghdg::problems::{ProblemKind, COOKS_TIP};
use cghdg::study::tip_displacement;

fn main() -> cghdg::Result<()> {
    let nu: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.4999);
    let mut cfg = SolveConfig::new(ProblemKind::CooksMembrane);
    cfg.nu_hdg = nu;
    let def = cfg.definition()?;
    println!("nu_hdg = {nu}");
    println!("{:>5} {:>8} {:>12} {:>12} {:>12}", "level", "n_elem", "CG_ONLY", "HDG_ONLY", "COUPLED");
    for level in 1..=4 {
        let mesh = def.mesh(level)?;
        print!("{level:>5} {:>8}", mesh.n_elements());
        for mode in [SolveMode::CgOnly, SolveMode::HdgOnly, SolveMode::Coupled] {
            cfg.mode = mode;
            let b = solve_problem(&def, &mesh, &cfg.params())?;
            print!(" {:>12.6}", tip_displacement(&b, COOKS_TIP)?);
        }
        println!();
    }
    Ok(())
}

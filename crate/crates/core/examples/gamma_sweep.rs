//! Sensitivity of the thermal error to the Nitsche parameter at level 3.

use cghdg::driver::{solve_problem, SolveConfig};
use cghdg::problems::{problem_thermal_square, ProblemKind};
use cghdg::study::solution_errors;

fn main() -> cghdg::Result<()> {
    let def = problem_thermal_square();
    let mesh = def.mesh(3)?;
    let gammas: Vec<f64> = (-1..=5).map(|p| 10f64.powi(p)).collect();
    print!("{:>8}", "gamma");
    for k in 1..=3 {
        print!(" {:>12}", format!("err_u k={k}"));
    }
    println!();
    let mut table = vec![Vec::new(); 3];
    for &g in &gammas {
        for k in 1..=3 {
            let mut cfg = SolveConfig::new(ProblemKind::ThermalSquare);
            cfg.k_cg = k;
            cfg.k_hdg = k;
            cfg.gamma = Some(g);
            let b = solve_problem(&def, &mesh, &cfg.params())?;
            table[k - 1].push(solution_errors(&b, &def)?.u);
        }
    }
    for (i, g) in gammas.iter().enumerate() {
        print!("{g:>8.0e}");
        for col in &table {
            print!(" {:>12.4e}", col[i]);
        }
        println!();
    }
    Ok(())
}

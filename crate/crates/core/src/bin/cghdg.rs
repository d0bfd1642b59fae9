use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cghdg::driver::solve_problem;
use cghdg::mesh::write_mesh;
use cghdg::problems::{ProblemKind, COOKS_TIP};
use cghdg::study::{run_gamma_sweep_file, run_study, solution_errors, tip_displacement, StudyConfig};

#[derive(Parser)]
#[command(name = "cghdg", version, about = "Coupled CG-HDG solver and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (degree, level) pair of a study config and write CSV reports.
    Study { config: PathBuf },
    /// Solve once at the first degree pair and level of a config.
    Solve { config: PathBuf },
    /// Write the mesh of the first level of a config.
    MeshDump {
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Sweep the Nitsche parameter as configured in `[gamma_sweep]`.
    GammaSweep { config: PathBuf },
}

fn run(cli: Cli) -> cghdg::Result<()> {
    match cli.command {
        Command::Study { config } => {
            let report = run_study(&config)?;
            println!("{:>5} {:>5} {:>5} {:>12} {:>8} {:>12} {:>8}", "k_cg", "k_hdg", "level", "err_u", "rate_u", "err_s", "rate_s");
            for r in &report.rows {
                println!(
                    "{:>5} {:>5} {:>5} {:>12.4e} {:>8.3} {:>12.4e} {:>8.3}",
                    r.k_cg, r.k_hdg, r.level, r.err_u, r.rate_u, r.err_s, r.rate_s
                );
            }
            for s in report.summary().iter().filter(|s| s.locking) {
                println!("locking: k_cg = {}, k_hdg = {}, final u rate {:.3}", s.k_cg, s.k_hdg, s.rate_u);
            }
            println!("reports written to {}", report.config.out_dir.display());
        }
        Command::Solve { config } => {
            let cfg = StudyConfig::parse(&std::fs::read_to_string(&config)?)?;
            let (k_cg, k_hdg) = cfg.degrees[0];
            let run = cfg.run_config(k_cg, k_hdg, cfg.levels[0]);
            let def = run.definition()?;
            let mesh = def.mesh(run.level)?;
            let b = solve_problem(&def, &mesh, &run.params())?;
            println!("problem {} mode {} k_cg {k_cg} k_hdg {k_hdg} level {}", run.problem, run.mode, run.level);
            println!("elements {} dofs cg {} trace {}", mesh.n_elements(), b.n_cg(), b.n_trace());
            println!("residual {:.3e} symmetry defect {:.3e}", b.residual, b.symmetry_defect);
            if def.exact.is_some() {
                let e = solution_errors(&b, &def)?;
                println!("err_u {:.6e} (cg {:.6e}, hdg {:.6e}) err_s {:.6e}", e.u, e.u_cg, e.u_hdg, e.s);
                if let Some(u) = e.u_post {
                    println!("err_u with u* {u:.6e}");
                }
            }
            if run.problem == ProblemKind::CooksMembrane {
                println!("tip u_y {:.8}", tip_displacement(&b, COOKS_TIP)?);
            }
            let t = b.timings;
            println!("seconds assembly {:.3} solve {:.3} recovery {:.3}", t.assembly, t.solve, t.recovery);
        }
        Command::MeshDump { config, out } => {
            let cfg = StudyConfig::parse(&std::fs::read_to_string(&config)?)?;
            let mesh = cfg.base.definition()?.mesh(cfg.levels[0])?;
            match out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(&p)?);
                    write_mesh(&mesh, &mut w)?;
                    w.flush()?;
                }
                None => write_mesh(&mesh, io::stdout().lock())?,
            }
        }
        Command::GammaSweep { config } => {
            let (rows, path) = run_gamma_sweep_file(&config)?;
            println!("{:>3} {:>10} {:>12}", "k", "gamma", "err_u");
            for r in rows {
                println!("{:>3} {:>10.1e} {:>12.4e}", r.k, r.gamma, r.err_u);
            }
            println!("written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

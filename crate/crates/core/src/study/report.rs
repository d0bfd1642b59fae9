use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::StudyConfig;
use super::norms::{rate, solution_errors, tip_displacement};
use crate::driver::solve_problem;
use crate::error::{Error, Result};
use crate::problems::{ProblemKind, COOKS_TIP};

/// One `(degrees, level)` run. Unavailable quantities are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub k_cg: usize,
    pub k_hdg: usize,
    pub level: usize,
    pub n_elem: usize,
    pub h: f64,
    pub dof_cg: usize,
    pub dof_trace: usize,
    pub err_u: f64,
    pub err_u_cg: f64,
    pub err_u_hdg: f64,
    pub err_s: f64,
    pub err_ustar: f64,
    pub rate_u: f64,
    pub rate_s: f64,
    pub rate_ustar: f64,
    pub seconds: f64,
    /// CG `u` together with HDG `u*`.
    pub err_u_post: f64,
    pub rate_u_post: f64,
    /// Vertical displacement at the membrane tip.
    pub tip_uy: f64,
}

pub const CSV_HEADER: [&str; 19] = [
    "k_cg",
    "k_hdg",
    "level",
    "n_elem",
    "h",
    "dof_cg",
    "dof_trace",
    "err_u",
    "err_u_cg",
    "err_u_hdg",
    "err_s",
    "err_ustar",
    "rate_u",
    "rate_s",
    "rate_ustar",
    "seconds",
    "err_u_post",
    "rate_u_post",
    "tip_uy",
];

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl StudyRow {
    fn fields(&self) -> Vec<String> {
        let mut out = vec![
            self.k_cg.to_string(),
            self.k_hdg.to_string(),
            self.level.to_string(),
            self.n_elem.to_string(),
            float(self.h),
            self.dof_cg.to_string(),
            self.dof_trace.to_string(),
        ];
        out.extend(
            [
                self.err_u,
                self.err_u_cg,
                self.err_u_hdg,
                self.err_s,
                self.err_ustar,
                self.rate_u,
                self.rate_s,
                self.rate_ustar,
                self.seconds,
                self.err_u_post,
                self.rate_u_post,
                self.tip_uy,
            ]
            .map(float),
        );
        out
    }

    fn from_fields(f: &[&str], line: usize) -> Result<Self> {
        if f.len() != CSV_HEADER.len() {
            return Err(Error::Config { line, msg: format!("expected {} columns, got {}", CSV_HEADER.len(), f.len()) });
        }
        let int = |i: usize| -> Result<usize> {
            f[i].parse().map_err(|_| Error::Config { line, msg: format!("bad integer `{}` in `{}`", f[i], CSV_HEADER[i]) })
        };
        let num = |i: usize| -> Result<f64> {
            f[i].parse().map_err(|_| Error::Config { line, msg: format!("bad number `{}` in `{}`", f[i], CSV_HEADER[i]) })
        };
        Ok(Self {
            k_cg: int(0)?,
            k_hdg: int(1)?,
            level: int(2)?,
            n_elem: int(3)?,
            h: num(4)?,
            dof_cg: int(5)?,
            dof_trace: int(6)?,
            err_u: num(7)?,
            err_u_cg: num(8)?,
            err_u_hdg: num(9)?,
            err_s: num(10)?,
            err_ustar: num(11)?,
            rate_u: num(12)?,
            rate_s: num(13)?,
            rate_ustar: num(14)?,
            seconds: num(15)?,
            err_u_post: num(16)?,
            rate_u_post: num(17)?,
            tip_uy: num(18)?,
        })
    }
}

/// Rate between two runs, NaN unless both errors are positive.
pub fn rate_or_nan(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    if e0 > 0.0 && e1 > 0.0 {
        rate(e0, e1, h0, h1)
    } else {
        f64::NAN
    }
}

/// Fills the rate columns from the stored errors; rows of the same degree
/// pair are compared with the previous level.
pub fn fill_rates(rows: &mut [StudyRow]) {
    for i in 0..rows.len() {
        let prev = (0..i).rev().find(|&j| rows[j].k_cg == rows[i].k_cg && rows[j].k_hdg == rows[i].k_hdg);
        let (p, r) = match prev {
            Some(j) => (rows[j], rows[i]),
            None => {
                let r = &mut rows[i];
                (r.rate_u, r.rate_s, r.rate_ustar, r.rate_u_post) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
                continue;
            }
        };
        let rr = |a: f64, b: f64| rate_or_nan(a, b, p.h, r.h);
        let row = &mut rows[i];
        row.rate_u = rr(p.err_u, r.err_u);
        row.rate_s = rr(p.err_s, r.err_s);
        row.rate_ustar = rr(p.err_ustar, r.err_ustar);
        row.rate_u_post = rr(p.err_u_post, r.err_u_post);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
}

/// Final-level rates of one degree pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSummary {
    pub k_cg: usize,
    pub k_hdg: usize,
    pub rate_u: f64,
    pub rate_s: f64,
    pub rate_ustar: f64,
    pub rate_u_post: f64,
    /// Final displacement rate below [`LOCKING_RATE`].
    pub locking: bool,
}

pub const LOCKING_RATE: f64 = 0.5;

impl StudyReport {
    pub fn rows_for(&self, k_cg: usize, k_hdg: usize) -> Vec<StudyRow> {
        self.rows.iter().filter(|r| r.k_cg == k_cg && r.k_hdg == k_hdg).copied().collect()
    }

    pub fn summary(&self) -> Vec<RateSummary> {
        self.config
            .degrees
            .iter()
            .filter_map(|&(a, b)| {
                let last = *self.rows_for(a, b).last()?;
                Some(RateSummary {
                    k_cg: a,
                    k_hdg: b,
                    rate_u: last.rate_u,
                    rate_s: last.rate_s,
                    rate_ustar: last.rate_ustar,
                    rate_u_post: last.rate_u_post,
                    locking: last.rate_u < LOCKING_RATE,
                })
            })
            .collect()
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_rows(&self.rows, w)
    }

    /// Writes `<name>.csv`, `<name>_rates.csv` and `<name>_config.txt`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let name = &self.config.name;
        let mut table = Vec::new();
        self.write_csv(&mut table)?;
        let mut rates = Vec::new();
        writeln!(rates, "k_cg,k_hdg,rate_u,rate_s,rate_ustar,rate_u_post,locking")?;
        for s in self.summary() {
            writeln!(
                rates,
                "{},{},{},{},{},{},{}",
                s.k_cg,
                s.k_hdg,
                float(s.rate_u),
                float(s.rate_s),
                float(s.rate_ustar),
                float(s.rate_u_post),
                s.locking
            )?;
        }
        let files = [
            (dir.join(format!("{name}.csv")), table),
            (dir.join(format!("{name}_rates.csv")), rates),
            (dir.join(format!("{name}_config.txt")), self.config.echo().into_bytes()),
        ];
        for (path, bytes) in &files {
            write_atomic(path, bytes)?;
        }
        Ok(files.into_iter().map(|f| f.0).collect())
    }
}

pub fn write_rows(rows: &[StudyRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.fields().join(","))?;
    }
    Ok(())
}

/// Parses a table written by [`write_rows`].
pub fn read_rows(text: &str) -> Result<Vec<StudyRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER.join(",") => {}
        _ => return Err(Error::Config { line: 1, msg: "unexpected CSV header".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| StudyRow::from_fields(&l.trim().split(',').collect::<Vec<_>>(), i + 1))
        .collect()
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every `(degrees, level)` pair of the study; any solve failure
/// aborts the study.
pub fn run_study_config(cfg: &StudyConfig) -> Result<StudyReport> {
    let def = cfg.base.definition()?;
    let mut rows = Vec::new();
    for &(k_cg, k_hdg) in &cfg.degrees {
        for &level in &cfg.levels {
            let run = cfg.run_config(k_cg, k_hdg, level);
            let start = Instant::now();
            let mesh = def.mesh(level)?;
            let b = solve_problem(&def, &mesh, &run.params())?;
            let errs = if def.exact.is_some() { Some(solution_errors(&b, &def)?) } else { None };
            let tip = if cfg.base.problem == ProblemKind::CooksMembrane {
                tip_displacement(&b, COOKS_TIP)?
            } else {
                f64::NAN
            };
            let nan = f64::NAN;
            rows.push(StudyRow {
                k_cg,
                k_hdg,
                level,
                n_elem: mesh.n_elements(),
                h: mesh.characteristic_size(),
                dof_cg: b.n_cg(),
                dof_trace: b.n_trace(),
                err_u: errs.map_or(nan, |e| e.u),
                err_u_cg: errs.map_or(nan, |e| e.u_cg),
                err_u_hdg: errs.map_or(nan, |e| e.u_hdg),
                err_s: errs.map_or(nan, |e| e.s),
                err_ustar: errs.and_then(|e| e.ustar).unwrap_or(nan),
                rate_u: nan,
                rate_s: nan,
                rate_ustar: nan,
                seconds: start.elapsed().as_secs_f64(),
                err_u_post: errs.and_then(|e| e.u_post).unwrap_or(nan),
                rate_u_post: nan,
                tip_uy: tip,
            });
        }
    }
    fill_rates(&mut rows);
    Ok(StudyReport { config: cfg.clone(), rows })
}

/// Reads the config at `path`, runs the study and writes its files into
/// the configured output directory.
pub fn run_study(path: &Path) -> Result<StudyReport> {
    let cfg = StudyConfig::parse(&fs::read_to_string(path)?)?;
    let report = run_study_config(&cfg)?;
    report.write_files(&cfg.out_dir)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub gamma: f64,
    pub level: usize,
    pub err_u: f64,
    pub err_u_cg: f64,
    pub err_u_hdg: f64,
}

/// Error against the Nitsche parameter at a fixed level, equal degrees.
pub fn run_gamma_sweep(cfg: &StudyConfig) -> Result<Vec<SweepRow>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::InvalidArgument("config has no [gamma_sweep] section".into()))?;
    let def = cfg.base.definition()?;
    if def.exact.is_none() {
        return Err(Error::InvalidArgument(format!("problem `{}` has no exact solution to sweep", def.name)));
    }
    let mesh = def.mesh(sweep.level)?;
    let mut rows = Vec::new();
    for &k in &sweep.degrees {
        for &gamma in &sweep.gammas {
            let mut run = cfg.run_config(k, k, sweep.level);
            run.gamma = Some(gamma);
            let b = solve_problem(&def, &mesh, &run.params())?;
            let e = solution_errors(&b, &def)?;
            rows.push(SweepRow { k, gamma, level: sweep.level, err_u: e.u, err_u_cg: e.u_cg, err_u_hdg: e.u_hdg });
        }
    }
    Ok(rows)
}

pub fn write_sweep(rows: &[SweepRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "k,gamma,level,err_u,err_u_cg,err_u_hdg")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.k, float(r.gamma), r.level, float(r.err_u), float(r.err_u_cg), float(r.err_u_hdg))?;
    }
    Ok(())
}

/// Runs the sweep of the config at `path` and writes
/// `<name>_gamma_sweep.csv`.
pub fn run_gamma_sweep_file(path: &Path) -> Result<(Vec<SweepRow>, PathBuf)> {
    let cfg = StudyConfig::parse(&fs::read_to_string(path)?)?;
    let rows = run_gamma_sweep(&cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let out = cfg.out_dir.join(format!("{}_gamma_sweep.csv", cfg.name));
    let mut bytes = Vec::new();
    write_sweep(&rows, &mut bytes)?;
    write_atomic(&out, &bytes)?;
    Ok((rows, out))
}

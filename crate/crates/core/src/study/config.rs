use std::collections::HashMap;
use std::path::PathBuf;

use crate::driver::SolveConfig;
use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::voigt::PlaneModel;

/// `key = value` lines grouped under `[section]` headers; `#` starts a
/// comment. Keys before any header belong to the `study` section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: HashMap<(String, String), (String, usize)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section = "study".to_string();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line: line_no, msg: "unterminated section header".into() })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config { line: line_no, msg: format!("unknown section `{name}`") });
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config { line: line_no, msg: format!("expected `key = value`, got `{line}`") })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(Error::Config { line: line_no, msg: "empty key".into() });
            }
            if entries.insert((section.clone(), k.clone()), (v, line_no)).is_some() {
                return Err(Error::Config { line: line_no, msg: format!("duplicate key `{k}`") });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries.get(&(section.to_string(), key.to_string())).map(|(v, l)| (v.as_str(), *l))
    }

    fn keys(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.entries.iter().map(|((s, k), (_, l))| (s.as_str(), k.as_str(), *l))
    }
}

const SECTIONS: [&str; 2] = ["study", "gamma_sweep"];
const STUDY_KEYS: [&str; 14] = [
    "problem",
    "mode",
    "k_cg",
    "k_hdg",
    "levels",
    "tau",
    "gamma",
    "theta",
    "nu_hdg",
    "postprocess",
    "out_dir",
    "parallel",
    "name",
    "level",
];
const SWEEP_KEYS: [&str; 3] = ["gammas", "level", "k"];

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad(line, format!("invalid value `{v}` for `{key}`")))
}

fn parse_list<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v.split(',').map(|s| parse_num(s, line, key)).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(line, format!("empty list for `{key}`")));
    }
    Ok(items)
}

/// `a..b` (inclusive) or a comma list.
fn parse_levels(v: &str, line: usize) -> Result<Vec<usize>> {
    let levels = match v.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (parse_num(a, line, "levels")?, parse_num(b, line, "levels")?);
            if a > b {
                return Err(bad(line, "empty level range"));
            }
            (a..=b).collect()
        }
        None => parse_list(v, line, "levels")?,
    };
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(line, "levels must be strictly increasing"));
    }
    Ok(levels)
}

fn parse_bool(v: &str, line: usize, key: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(line, format!("invalid boolean `{v}` for `{key}`"))),
    }
}

/// Parameters of a convergence study and of an optional parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub name: String,
    /// Shared solve settings; `k_cg`, `k_hdg` and `level` are overridden
    /// per run.
    pub base: SolveConfig,
    /// `(k_cg, k_hdg)` pairs.
    pub degrees: Vec<(usize, usize)>,
    pub levels: Vec<usize>,
    pub out_dir: PathBuf,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub level: usize,
    pub degrees: Vec<usize>,
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_file(&ConfigFile::parse(text)?)
    }

    pub fn from_file(cfg: &ConfigFile) -> Result<Self> {
        for (section, key, line) in cfg.keys() {
            let known = match section {
                "study" => STUDY_KEYS.contains(&key),
                _ => SWEEP_KEYS.contains(&key),
            };
            if !known {
                return Err(bad(line, format!("unknown key `{key}` in [{section}]")));
            }
        }
        let get = |k: &str| cfg.get("study", k);
        let (problem, line) = get("problem").ok_or_else(|| bad(0, "missing key `problem`"))?;
        let problem: ProblemKind = problem.parse().map_err(|e: Error| bad(line, e.to_string()))?;
        let mut base = SolveConfig::new(problem);
        if let Some((v, l)) = get("mode") {
            base.mode = v.parse().map_err(|e: Error| bad(l, e.to_string()))?;
        }
        if let Some((v, l)) = get("tau") {
            base.tau = Some(parse_num(v, l, "tau")?);
        }
        if let Some((v, l)) = get("gamma") {
            base.gamma = Some(parse_num(v, l, "gamma")?);
        }
        if let Some((v, l)) = get("theta") {
            base.plane = PlaneModel::from_theta(parse_num(v, l, "theta")?).map_err(|e| bad(l, e.to_string()))?;
        }
        if let Some((v, l)) = get("nu_hdg") {
            base.nu_hdg = parse_num(v, l, "nu_hdg")?;
        }
        if let Some((v, l)) = get("postprocess") {
            base.postprocess = parse_bool(v, l, "postprocess")?;
        }
        if let Some((v, l)) = get("parallel") {
            base.parallel = parse_bool(v, l, "parallel")?;
        }
        let k_cg = match get("k_cg") {
            Some((v, l)) => (parse_list::<usize>(v, l, "k_cg")?, l),
            None => (vec![1], 0),
        };
        let k_hdg = match get("k_hdg") {
            Some((v, l)) => (parse_list::<usize>(v, l, "k_hdg")?, l),
            None => (k_cg.0.clone(), k_cg.1),
        };
        let degrees = pair_degrees(&k_cg.0, &k_hdg.0).ok_or_else(|| {
            bad(k_hdg.1.max(k_cg.1), "k_cg and k_hdg lists must have equal length or length one")
        })?;
        let levels = match (get("levels"), get("level")) {
            (Some((v, l)), _) => parse_levels(v, l)?,
            (None, Some((v, l))) => vec![parse_num(v, l, "level")?],
            (None, None) => vec![base.level],
        };
        base.level = levels[0];
        let sweep = match cfg.get("gamma_sweep", "gammas") {
            Some((v, l)) => {
                let gammas: Vec<f64> = parse_list(v, l, "gammas")?;
                let level = match cfg.get("gamma_sweep", "level") {
                    Some((v, l)) => parse_num(v, l, "level")?,
                    None => levels[0],
                };
                let degrees = match cfg.get("gamma_sweep", "k") {
                    Some((v, l)) => parse_list(v, l, "k")?,
                    None => degrees.iter().map(|d| d.1).collect(),
                };
                Some(SweepConfig { gammas, level, degrees })
            }
            None => None,
        };
        Ok(Self {
            name: get("name").map_or_else(|| problem.name().to_string(), |v| v.0.to_string()),
            base,
            degrees,
            levels,
            out_dir: PathBuf::from(get("out_dir").map_or("out", |v| v.0)),
            sweep,
        })
    }

    /// Solve configuration of one `(degrees, level)` run.
    pub fn run_config(&self, k_cg: usize, k_hdg: usize, level: usize) -> SolveConfig {
        SolveConfig { k_cg, k_hdg, level, ..self.base }
    }

    /// Echo of the effective settings as `key = value` lines.
    pub fn echo(&self) -> String {
        let b = &self.base;
        let list = |v: Vec<String>| v.join(",");
        let mut s = format!(
            "name = {}\nproblem = {}\nmode = {}\nk_cg = {}\nk_hdg = {}\nlevels = {}\ntheta = {}\nnu_hdg = {}\npostprocess = {}\nout_dir = {}\n",
            self.name,
            b.problem,
            b.mode,
            list(self.degrees.iter().map(|d| d.0.to_string()).collect()),
            list(self.degrees.iter().map(|d| d.1.to_string()).collect()),
            list(self.levels.iter().map(|l| l.to_string()).collect()),
            b.plane.theta(),
            b.nu_hdg,
            b.postprocess,
            self.out_dir.display(),
        );
        if let Some(t) = b.tau {
            s += &format!("tau = {t}\n");
        }
        if let Some(g) = b.gamma {
            s += &format!("gamma = {g}\n");
        }
        s
    }
}

fn pair_degrees(a: &[usize], b: &[usize]) -> Option<Vec<(usize, usize)>> {
    match (a.len(), b.len()) {
        (n, m) if n == m => Some(a.iter().copied().zip(b.iter().copied()).collect()),
        (1, _) => Some(b.iter().map(|&k| (a[0], k)).collect()),
        (_, 1) => Some(a.iter().map(|&k| (k, b[0])).collect()),
        _ => None,
    }
}

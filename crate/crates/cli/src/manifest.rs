//! Flat `key = value` manifests with dotted keys.
//!
//! Lines starting with `#` are comments. Lists are comma separated. Numbers
//! may carry a `pi` suffix (`16pi`). Unknown keys are rejected so that typos
//! cannot silently fall back to defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bozk_core::diagnostics::NormSpec;
use bozk_core::fields::GaussianParams;
use bozk_core::solver::SolverConfig;
use bozk_core::weights::WeightSpec;
use bozk_core::Grid2D;

/// The manifest shipped with the binary; used when `--config` is absent.
pub const DEFAULT_MANIFEST: &str = include_str!("../manifests/default.conf");

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestError(pub String);

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ManifestError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ManifestError> {
    Err(ManifestError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Linear,
    Picard,
    Uc,
    Verify,
    Diagnose,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Linear => "linear",
            Command::Picard => "picard",
            Command::Uc => "uc",
            Command::Verify => "verify",
            Command::Diagnose => "diagnose",
        }
    }
}

impl FromStr for Command {
    type Err = ManifestError;

    fn from_str(s: &str) -> Result<Self, ManifestError> {
        Ok(match s {
            "simulate" => Command::Simulate,
            "linear" => Command::Linear,
            "picard" => Command::Picard,
            "uc" => Command::Uc,
            "verify" => Command::Verify,
            "diagnose" => Command::Diagnose,
            _ => return err(format!("unknown subcommand '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Gaussian(GaussianParams),
    DxGaussian(GaussianParams),
    TwoSolitaryBumps {
        amplitude: f64,
        width: f64,
        separation: f64,
    },
    /// Seeded random field (uses `--seed`).
    RandomSmooth {
        k0: f64,
        sigma: f64,
    },
    /// A stored snapshot; its header fixes the grid.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSettings {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcSettings {
    pub t: f64,
    pub epsilon: f64,
    pub levels: usize,
    pub r_list: Vec<f64>,
    pub s: f64,
    pub growth_factor: f64,
    pub boundary_band: f64,
    pub boundary_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub family_size: usize,
    pub beta_n: Vec<u32>,
    pub interpolation_ceiling: f64,
    pub commutator_ceiling: f64,
    pub half_derivative_ceiling: f64,
    pub algebra_ceiling: f64,
    pub trilinear_ceiling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Option<Command>,
    pub grid: Grid2D,
    pub data: DataSpec,
    pub solver: SolverConfig,
    pub hs: Vec<f64>,
    pub weights: Vec<WeightSpec>,
    pub norms: Vec<NormSpec>,
    pub picard: PicardSettings,
    pub uc: UcSettings,
    pub verify: VerifySettings,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

/// Parses the raw `key = value` lines.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ManifestError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected 'key = value'", no + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return err(format!("line {}: empty key", no + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: duplicate key '{k}'", no + 1));
        }
    }
    Ok(map)
}

fn parse_number(key: &str, raw: &str) -> Result<f64, ManifestError> {
    let raw = raw.trim();
    let v = if let Some(head) = raw.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        if head.is_empty() {
            Ok(PI)
        } else {
            head.parse::<f64>().map(|h| h * PI)
        }
    } else {
        raw.parse::<f64>()
    };
    match v {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(format!("{key}: '{raw}' is not a finite number")),
    }
}

fn split_list(raw: &str) -> Vec<&str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// `trunc:8`, `poly:1`, `gamma:0.5`, `damped:0.5:0.1`.
pub fn parse_weight(raw: &str) -> Result<WeightSpec, ManifestError> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    let num = |i: usize| parse_number(raw, parts[i]);
    let spec = match (parts[0], parts.len()) {
        ("trunc", 2) => match parts[1].parse::<u32>() {
            Ok(n) => WeightSpec::Truncated { n },
            Err(_) => return err(format!("weight '{raw}': N must be a positive integer")),
        },
        ("poly", 2) => WeightSpec::Polynomial { r: num(1)? },
        ("gamma", 2) => WeightSpec::GammaPower { gamma: num(1)? },
        ("damped", 3) => WeightSpec::Damped {
            gamma: num(1)?,
            lambda: num(2)?,
        },
        _ => return err(format!("unknown weight spec '{raw}'")),
    };
    spec.validate()
        .map_err(|e| ManifestError(format!("weight '{raw}': {e}")))?;
    Ok(spec)
}

/// `hs:1`, `aniso:2:2`, `l2r:1`, `zsr:4:2`, `l2w:<weight>`.
pub fn parse_norm(raw: &str) -> Result<NormSpec, ManifestError> {
    let (head, rest) = raw.split_once(':').unwrap_or((raw, ""));
    let nums = || -> Result<Vec<f64>, ManifestError> { rest.split(':').map(|p| parse_number(raw, p)).collect() };
    let spec = match head.trim() {
        "hs" => match nums()?[..] {
            [s] => NormSpec::Hs { s },
            _ => return err(format!("norm '{raw}': expected hs:<s>")),
        },
        "aniso" => match nums()?[..] {
            [s1, s2] => NormSpec::Aniso { s1, s2 },
            _ => return err(format!("norm '{raw}': expected aniso:<s1>:<s2>")),
        },
        "l2r" => match nums()?[..] {
            [r] => NormSpec::L2r { r },
            _ => return err(format!("norm '{raw}': expected l2r:<r>")),
        },
        "zsr" => match nums()?[..] {
            [s, r] => NormSpec::Zsr { s, r },
            _ => return err(format!("norm '{raw}': expected zsr:<s>:<r>")),
        },
        "l2w" => NormSpec::L2w { w: parse_weight(rest)? },
        _ => return err(format!("unknown norm spec '{raw}'")),
    };
    spec.validate()
        .map_err(|e| ManifestError(format!("norm '{raw}': {e}")))?;
    Ok(spec)
}

/// Typed access to the raw pairs that remembers which keys were read.
struct Reader {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Reader {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ManifestError> {
        self.raw(key).map_or(Ok(default), |v| parse_number(key, &v))
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, ManifestError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .or_else(|_| err(format!("{key}: '{v}' is not a non-negative integer"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, ManifestError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().or_else(|_| err(format!("{key}: '{v}' is not a u64"))),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ManifestError> {
        match self.raw(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => err(format!("{key}: '{v}' is not true/false")),
        }
    }

    fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ManifestError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => split_list(&v).into_iter().map(|p| parse_number(key, p)).collect(),
        }
    }

    fn list<T>(
        &mut self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, ManifestError>,
    ) -> Result<Vec<T>, ManifestError> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) => split_list(&v).into_iter().map(parse).collect(),
        }
    }

    fn finish(self) -> Result<(), ManifestError> {
        let unknown: Vec<&String> = self.map.keys().filter(|k| !self.used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            err(format!(
                "unknown keys: {}",
                unknown.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
            ))
        }
    }
}

fn core_err(e: bozk_core::Error) -> ManifestError {
    ManifestError(e.to_string())
}

impl RunManifest {
    /// Builds and validates a manifest. Relative paths are resolved against
    /// `base` (the manifest's directory).
    pub fn from_text(text: &str, base: &Path) -> Result<Self, ManifestError> {
        let mut r = Reader {
            map: parse_pairs(text)?,
            used: BTreeSet::new(),
        };
        let command = r.raw("command").map(|c| c.parse()).transpose()?;

        let grid_keys = ["grid.nx", "grid.ny", "grid.lx", "grid.ly"];
        let explicit_grid = grid_keys.iter().any(|k| r.has(k));
        let nx = r.usize("grid.nx", 128)?;
        let ny = r.usize("grid.ny", 128)?;
        let lx = r.f64("grid.lx", 16.0 * PI)?;
        let ly = r.f64("grid.ly", 16.0 * PI)?;
        let mut grid = Grid2D::new(nx, ny, lx, ly).map_err(core_err)?;

        let kind = r.raw("data.kind").unwrap_or_else(|| "gaussian".into());
        let gaussian = |r: &mut Reader| -> Result<GaussianParams, ManifestError> {
            Ok(GaussianParams {
                amplitude: r.f64("data.amplitude", 1.0)?,
                sigma_x: r.f64("data.sigma_x", 1.0)?,
                sigma_y: r.f64("data.sigma_y", 1.0)?,
                center_x: r.f64("data.center_x", 0.0)?,
                center_y: r.f64("data.center_y", 0.0)?,
            })
        };
        let data = match kind.as_str() {
            "gaussian" => DataSpec::Gaussian(gaussian(&mut r)?),
            "dx_gaussian" => DataSpec::DxGaussian(gaussian(&mut r)?),
            "two_solitary_bumps" => DataSpec::TwoSolitaryBumps {
                amplitude: r.f64("data.amplitude", 1.0)?,
                width: r.f64("data.width", 1.0)?,
                separation: r.f64("data.separation", 8.0)?,
            },
            "random_smooth" => DataSpec::RandomSmooth {
                k0: r.f64("data.k0", 1.0)?,
                sigma: r.f64("data.sigma", 3.0)?,
            },
            "file" => {
                let Some(p) = r.raw("data.path") else {
                    return err("data.kind = file needs data.path");
                };
                let path = base.join(p);
                let field = std::fs::File::open(&path)
                    .map_err(|e| ManifestError(format!("data.path {}: {e}", path.display())))
                    .and_then(|mut f| bozk_core::snapshot::read(&mut f).map_err(core_err))?;
                if explicit_grid && *field.grid() != grid {
                    return err("grid.* keys disagree with the snapshot header");
                }
                grid = *field.grid();
                DataSpec::File(path)
            }
            other => return err(format!("unknown data.kind '{other}'")),
        };
        if let DataSpec::Gaussian(p) | DataSpec::DxGaussian(p) = &data {
            if !(p.sigma_x > 0.0 && p.sigma_y > 0.0) {
                return err("gaussian widths must be positive");
            }
        }
        if let DataSpec::TwoSolitaryBumps { width, .. } = data {
            if !(width > 0.0) {
                return err("data.width must be positive");
            }
        }
        if let DataSpec::RandomSmooth { k0, sigma } = data {
            if !(k0 > 0.0 && sigma > 0.0) {
                return err("data.k0 and data.sigma must be positive");
            }
        }

        let solver = SolverConfig {
            dt: r.f64("solver.dt", 5e-4)?,
            t_final: r.f64("solver.t_final", 0.5)?,
            mu: r.f64("solver.mu", 0.0)?,
            dealias: r.bool("solver.dealias", true)?,
            stride: r.usize("solver.stride", 10)?,
            nonlinear: true,
            cfl_limit: r.f64("solver.cfl_limit", 0.5)?,
            blowup_threshold: r.f64("solver.blowup_threshold", 1e8)?,
        };
        solver.validate().map_err(core_err)?;

        let hs = r.f64_list("diagnostics.hs", &[1.0])?;
        let weights = r.list("diagnostics.weights", parse_weight)?;
        let norms = r.list("diagnostics.norms", parse_norm)?;

        let picard = PicardSettings {
            max_iter: r.usize("picard.max_iter", 50)?,
            tol: r.f64("picard.tol", 1e-12)?,
        };
        if picard.max_iter == 0 || !(picard.tol > 0.0) {
            return err("picard.max_iter and picard.tol must be positive");
        }

        let uc = UcSettings {
            t: r.f64("uc.t", 0.1)?,
            epsilon: r.f64("uc.epsilon", 0.5)?,
            levels: r.usize("uc.levels", 4)?,
            r_list: r.f64_list("uc.r_list", &[1.0, 2.0])?,
            s: r.f64("uc.s", 4.0)?,
            growth_factor: r.f64("uc.growth_factor", 1.5)?,
            boundary_band: r.f64("uc.boundary_band", 0.1)?,
            boundary_tolerance: r.f64("uc.boundary_tolerance", 1e-10)?,
        };
        if !(uc.t > 0.0 && uc.epsilon > 0.0) || uc.levels < 3 {
            return err("uc.t and uc.epsilon must be positive and uc.levels >= 3");
        }

        let verify = VerifySettings {
            family_size: r.usize("verify.family_size", 50)?,
            beta_n: r
                .list("verify.beta_n", |p| {
                    p.parse::<u32>()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| ManifestError(format!("verify.beta_n: '{p}' is not a positive integer")))
                })
                .map(|v| if v.is_empty() { vec![1, 2, 4, 8, 16, 32] } else { v })?,
            interpolation_ceiling: r.f64("verify.ceiling.interpolation", 1.0)?,
            commutator_ceiling: r.f64("verify.ceiling.commutator", 0.6)?,
            half_derivative_ceiling: r.f64("verify.ceiling.half_derivative", 0.1)?,
            algebra_ceiling: r.f64("verify.ceiling.algebra", 0.2)?,
            trilinear_ceiling: r.f64("verify.ceiling.trilinear", 0.1)?,
        };
        if verify.family_size == 0 {
            return err("verify.family_size must be positive");
        }

        let out = r.raw("output.dir").map(|p| base.join(p));
        let seed = r.u64("seed", 0)?;
        r.finish()?;

        Ok(RunManifest {
            command,
            grid,
            data,
            solver,
            hs,
            weights,
            norms,
            picard,
            uc,
            verify,
            out,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunManifest, ManifestError> {
        RunManifest::from_text(text, Path::new("."))
    }

    #[test]
    fn default_manifest_parses() {
        let m = parse(DEFAULT_MANIFEST).unwrap();
        assert_eq!(m.grid.nx(), 128);
        assert!((m.grid.lx() - 16.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("k", "pi").unwrap(), PI);
        assert_eq!(parse_number("k", "16pi").unwrap(), 16.0 * PI);
        assert_eq!(parse_number("k", "0.5*pi").unwrap(), 0.5 * PI);
        assert!(parse_number("k", "nan").is_err());
        assert!(parse_number("k", "x").is_err());
    }

    #[test]
    fn specs_round_trip_through_ids() {
        assert_eq!(parse_weight("trunc:8").unwrap(), WeightSpec::Truncated { n: 8 });
        assert_eq!(parse_weight("damped:0.5:0.1").unwrap().id(), "damped0.5_0.1");
        assert!(parse_weight("gamma:2").is_err());
        assert_eq!(parse_norm("zsr:4:2").unwrap(), NormSpec::Zsr { s: 4.0, r: 2.0 });
        assert_eq!(parse_norm("l2w:poly:1").unwrap().id(), "w_poly1");
        assert!(parse_norm("hs").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("grid.nx = 127").is_err());
        assert!(parse("grid.nz = 128").is_err());
        assert!(parse("solver.dt = -1").is_err());
        assert!(parse("data.kind = soliton").is_err());
        assert!(parse("seed = 1\nseed = 2").is_err());
        assert!(parse("no equals sign").is_err());
        assert!(parse("command = plot").is_err());
    }
}

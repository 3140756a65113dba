//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! key = value            top-level keys
//! [material.1]           one section per region tag
//! type = brauer
//! [source]
//! [newton]
//! [map]
//! ```
//!
//! Every key is checked; unknown keys and sections are errors. The full key
//! list is in the repository README.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::assembly::{Problem, Source};
use crate::femspace::FESpace;
use crate::geometry::{
    pullback_density, pullback_material, pullback_source, AffineMap, IdentityMap, QuarterAnnulus, SharedMap,
};
use crate::materials::{vacuum_reluctivity, AnisotropicLinear, BrauerParams, LinearIsotropic, PermanentMagnet, SharedLaw};
use crate::mesh::{generate_disc, generate_rectangle, generate_unit_square, Mesh};
use crate::quadrature::rule_for_degree;
use crate::solver::{CgConfig, NewtonConfig};
use crate::{Error, Result};

use super::benchmarks::ErrorMode;

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Parsed `key = value` pairs grouped by section (`""` is the top level).
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        sections.insert(String::new(), BTreeMap::new());
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(parse_err(line, "empty section name"));
                }
                if sections.contains_key(name) {
                    return Err(parse_err(line, format!("section [{name}] appears twice")));
                }
                current = name.to_string();
                sections.insert(current.clone(), BTreeMap::new());
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected 'key = value', got '{content}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            let sec = sections.get_mut(&current).expect("current section exists");
            if sec.contains_key(k) {
                return Err(parse_err(line, format!("duplicate key '{k}'")));
            }
            sec.insert(k.to_string(), Entry { value: v.to_string(), line, used: false });
        }
        Ok(Self { sections })
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.sections.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    pub fn get_str(&mut self, section: &str, key: &str) -> Option<String> {
        self.take(section, key).map(|(v, _)| v)
    }

    pub fn get<V: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<V>> {
        match self.take(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| parse_err(line, format!("invalid value '{v}' for '{key}'"))),
        }
    }

    pub fn get_or<V: std::str::FromStr>(&mut self, section: &str, key: &str, default: V) -> Result<V> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    /// Keys of `section` that start with `prefix`, without the prefix.
    fn keys_with_prefix(&self, section: &str, prefix: &str) -> Vec<String> {
        self.sections
            .get(section)
            .map(|s| s.keys().filter_map(|k| k.strip_prefix(prefix).map(str::to_string)).collect())
            .unwrap_or_default()
    }

    /// Fails on the first key that was never read.
    pub fn ensure_all_used(&self) -> Result<()> {
        for (name, sec) in &self.sections {
            if let Some((k, e)) = sec.iter().find(|(_, e)| !e.used) {
                let place = if name.is_empty() { String::from("top level") } else { format!("[{name}]") };
                return Err(parse_err(e.line, format!("unknown key '{k}' in {place}")));
            }
        }
        Ok(())
    }
}

/// Reads the `[newton]` section over the defaults.
pub fn newton_from_config(cfg: &mut ConfigFile) -> Result<(NewtonConfig<f64>, SolverChoice)> {
    let d = NewtonConfig::<f64>::default();
    let s = "newton";
    let cg_default = CgConfig::<f64>::default();
    let newton = NewtonConfig {
        rho: cfg.get_or(s, "rho", d.rho)?,
        sigma: cfg.get_or(s, "sigma", d.sigma)?,
        tol_increment: cfg.get_or(s, "tol_increment", d.tol_increment)?,
        tol_residual: cfg.get_or(s, "tol_residual", d.tol_residual)?,
        max_iter: cfg.get_or(s, "max_iter", d.max_iter)?,
        max_backtracks: cfg.get_or(s, "max_backtracks", d.max_backtracks)?,
        cg: CgConfig {
            rel_tol: cfg.get_or(s, "cg_rel_tol", cg_default.rel_tol)?,
            max_iter: cfg.get_or(s, "cg_max_iter", cg_default.max_iter)?,
            jacobi: cfg.get_or(s, "cg_jacobi", cg_default.jacobi)?,
            strict: cfg.get_or(s, "cg_strict", cg_default.strict)?,
        },
        keep_iterates: false,
    };
    newton.validate()?;
    let solver = match cfg.get_str(s, "solver").as_deref() {
        None | Some("newton") => SolverChoice::Newton,
        Some("zarantonello") => SolverChoice::Zarantonello { tau: cfg.get(s, "tau")? },
        Some(other) => return Err(Error::Config(format!("unknown solver '{other}'"))),
    };
    Ok((newton, solver))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverChoice {
    Newton,
    /// `tau = None` picks `gamma / L^2` from certified bounds.
    Zarantonello { tau: Option<f64> },
}

/// Settings a `study` run may override.
#[derive(Clone, Debug)]
pub struct StudyOverrides {
    pub newton: NewtonConfig<f64>,
    pub error_mode: Option<ErrorMode>,
}

pub fn study_overrides(text: &str) -> Result<StudyOverrides> {
    let mut cfg = ConfigFile::parse(text)?;
    if let Some(name) = cfg.section_names().find(|s| *s != "newton") {
        return Err(Error::Config(format!("section [{name}] is not used by study runs")));
    }
    let (newton, solver) = newton_from_config(&mut cfg)?;
    if solver != SolverChoice::Newton {
        return Err(Error::Config("study runs use the Newton solver".into()));
    }
    let error_mode = cfg.get_str("", "error_mode").map(|s| ErrorMode::parse(&s)).transpose()?;
    cfg.ensure_all_used()?;
    Ok(StudyOverrides { newton, error_mode })
}

fn parse_tags(s: &str) -> Result<Vec<i32>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Config(format!("invalid tag '{t}'"))))
        .collect()
}

/// Brauer coefficients from `section`, standard iron values as defaults.
pub fn brauer_from_section(cfg: &mut ConfigFile, section: &str) -> Result<BrauerParams<f64>> {
    let d = BrauerParams::<f64>::standard_iron();
    BrauerParams::build(
        cfg.get_or(section, "k1", d.k1)?,
        cfg.get_or(section, "k2", d.k2)?,
        cfg.get_or(section, "k3", d.k3)?,
        cfg.get_or(section, "nu0", d.nu0)?,
    )
}

/// The law described by a material section (`type` plus parameters).
pub fn material_from_section(cfg: &mut ConfigFile, section: &str) -> Result<SharedLaw<f64>> {
    let nu0 = vacuum_reluctivity::<f64>();
    let kind = cfg
        .get_str(section, "type")
        .ok_or_else(|| Error::Config(format!("[{section}] needs a 'type'")))?;
    Ok(match kind.as_str() {
        "brauer" => Arc::new(brauer_from_section(cfg, section)?),
        "linear" => Arc::new(LinearIsotropic::new(cfg.get_or(section, "nu", nu0)?)?),
        "magnet" => Arc::new(PermanentMagnet::new(
            cfg.get_or(section, "nu", nu0)?,
            [cfg.get_or(section, "mx", 0.0)?, cfg.get_or(section, "my", 0.0)?],
        )?),
        "anisotropic" => {
            let n12 = cfg.get_or(section, "n12", 0.0)?;
            Arc::new(AnisotropicLinear::new([
                [cfg.get_or(section, "n11", nu0)?, n12],
                [n12, cfg.get_or(section, "n22", nu0)?],
            ])?)
        }
        other => return Err(Error::Config(format!("[{section}]: unknown material type '{other}'"))),
    })
}

fn map_from_config(cfg: &mut ConfigFile) -> Result<Option<SharedMap<f64>>> {
    if !cfg.has_section("map") {
        return Ok(None);
    }
    let kind = cfg.get_str("map", "type").unwrap_or_else(|| "identity".into());
    let map: SharedMap<f64> = match kind.as_str() {
        "identity" => Arc::new(IdentityMap),
        "affine" => Arc::new(AffineMap {
            matrix: [
                [cfg.get_or("map", "a11", 1.0)?, cfg.get_or("map", "a12", 0.0)?],
                [cfg.get_or("map", "a21", 0.0)?, cfg.get_or("map", "a22", 1.0)?],
            ],
            shift: [cfg.get_or("map", "b1", 0.0)?, cfg.get_or("map", "b2", 0.0)?],
        }),
        "quarter_annulus" => Arc::new(QuarterAnnulus::new(
            cfg.get_or("map", "r_inner", 0.5)?,
            cfg.get_or("map", "r_outer", 1.0)?,
        )?),
        other => return Err(Error::Config(format!("unknown map type '{other}'"))),
    };
    Ok(Some(map))
}

fn mesh_from_config(cfg: &mut ConfigFile) -> Result<Mesh<f64>> {
    let kind = cfg.get_str("", "mesh").unwrap_or_else(|| "unit_square".into());
    let mesh = match kind.as_str() {
        "unit_square" => generate_unit_square(cfg.get_or("", "n", 8)?)?,
        "rectangle" => generate_rectangle(
            cfg.get_or("", "nx", 8)?,
            cfg.get_or("", "ny", 8)?,
            [cfg.get_or("", "x_min", 0.0)?, cfg.get_or("", "x_max", 1.0)?],
            [cfg.get_or("", "y_min", 0.0)?, cfg.get_or("", "y_max", 1.0)?],
        )?,
        "disc" => generate_disc(cfg.get_or("", "radius", 1.0)?, cfg.get_or("", "rings", 8)?)?,
        other => return Err(Error::Config(format!("unknown mesh generator '{other}'"))),
    };
    Ok(mesh)
}

/// A fully specified single solve.
#[derive(Debug)]
pub struct RunSetup {
    pub problem: Problem<f64>,
    pub newton: NewtonConfig<f64>,
    pub solver: SolverChoice,
    pub map: Option<SharedMap<f64>>,
}

/// Builds the problem described by `text`. `mesh_override` replaces the
/// generator keys (they are then rejected as unused).
pub fn setup_from_config(text: &str, mesh_override: Option<Mesh<f64>>) -> Result<RunSetup> {
    let mut cfg = ConfigFile::parse(text)?;
    for name in cfg.section_names() {
        let known = matches!(name, "source" | "newton" | "map") || name.starts_with("material.");
        if !known {
            return Err(Error::Config(format!("unknown section [{name}]")));
        }
    }
    let mut mesh = match mesh_override {
        Some(m) => m,
        None => mesh_from_config(&mut cfg)?,
    };
    for _ in 0..cfg.get_or("", "refinements", 0usize)? {
        mesh = mesh.refine_uniform();
    }
    let mesh = Arc::new(mesh);
    let k: usize = cfg.get_or("", "degree", 1)?;
    let dirichlet = match cfg.get_str("", "dirichlet") {
        Some(s) => parse_tags(&s)?,
        None => mesh.boundary_tags().into_iter().collect(),
    };
    let quad: Option<usize> = cfg.get("", "quadrature_degree")?;
    let map = map_from_config(&mut cfg)?;
    let probe = mesh.vertices().to_vec();

    let region_sections: Vec<String> = cfg.section_names().filter(|s| s.starts_with("material.")).map(String::from).collect();
    let mut laws = BTreeMap::new();
    for sec in region_sections {
        let tag: i32 = sec["material.".len()..]
            .parse()
            .map_err(|_| Error::Config(format!("invalid region tag in [{sec}]")))?;
        let mut law = material_from_section(&mut cfg, &sec)?;
        if let Some(m) = &map {
            law = Arc::new(pullback_material(Arc::clone(m), law, &probe)?);
        }
        laws.insert(tag, law);
    }

    let source = match cfg.get_str("source", "type").as_deref() {
        None | Some("none") => Source::None,
        Some("field") => {
            let h = [cfg.get_or("source", "hx", 0.0)?, cfg.get_or("source", "hy", 0.0)?];
            let f: crate::geometry::VectorFn<f64> = Arc::new(move |_| h);
            Source::Field(match &map {
                Some(m) => pullback_source(Arc::clone(m), f),
                None => f,
            })
        }
        Some("density") => {
            let js: f64 = cfg.get_or("source", "js", 0.0)?;
            let f: crate::geometry::ScalarFn<f64> = Arc::new(move |_| js);
            Source::Density(match &map {
                Some(m) => pullback_density(Arc::clone(m), f),
                None => f,
            })
        }
        Some("region_density") => {
            if map.is_some() {
                return Err(Error::Config("region_density sources cannot be combined with a map".into()));
            }
            let mut values = BTreeMap::new();
            for t in cfg.keys_with_prefix("source", "js.") {
                let tag: i32 = t.parse().map_err(|_| Error::Config(format!("invalid region tag 'js.{t}'")))?;
                let v: f64 = cfg.get_or("source", &format!("js.{t}"), 0.0)?;
                values.insert(tag, v);
            }
            Source::RegionDensity(values)
        }
        Some(other) => return Err(Error::Config(format!("unknown source type '{other}'"))),
    };
    let (newton, solver) = newton_from_config(&mut cfg)?;
    cfg.ensure_all_used()?;

    let space = Arc::new(FESpace::new(mesh, k + 1, &dirichlet)?);
    let problem = match quad {
        Some(d) => Problem::new(space, laws, source, rule_for_degree(d)?)?,
        None => Problem::with_default_rule(space, laws, source)?,
    };
    Ok(RunSetup { problem, newton, solver, map })
}

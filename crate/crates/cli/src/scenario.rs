//! Scenario specification: which Gauss map, curvature, group and grid a run
//! uses, resolved from the config file and command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use gaussframe::fields::{ComplexField, GridDomain, GridKind, RealField};
use gaussframe::lie::GroupPreset;
use gaussframe::mesh::MeshFormat;
use gaussframe::scenarios::{gzbar, pseudosphere, Builtin};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_STEP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `K > 0`, conformal coordinates.
    Positive,
    /// `K < 0`, proper null coordinates.
    Negative,
}

impl Branch {
    pub fn grid_kind(self) -> GridKind {
        match self {
            Self::Positive => GridKind::Conformal,
            Self::Negative => GridKind::Null,
        }
    }

    fn of_kind(kind: GridKind) -> Option<Self> {
        match kind {
            GridKind::Conformal => Some(Self::Positive),
            GridKind::Null => Some(Self::Negative),
            GridKind::Parametric => None,
        }
    }

    fn admits(self, k: f64) -> bool {
        match self {
            Self::Positive => k > 0.0,
            Self::Negative => k < 0.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
        })
    }
}

/// Explicit grid from a config file; the kind follows from the branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub step: [f64; 2],
    pub size: [usize; 2],
}

/// Every field optional: the `[scenario]` table of a config file, later
/// overlaid with command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSpec {
    pub scenario: Option<String>,
    /// Gauss map as `x,y,re,im` CSV with the grid in a `.toml` sidecar.
    pub gauss_map_file: Option<PathBuf>,
    pub group: Option<String>,
    pub tau: Option<f64>,
    pub branch: Option<Branch>,
    pub k: Option<f64>,
    /// Curvature as `x,y,val` CSV on the scenario grid.
    pub k_file: Option<PathBuf>,
    pub step: Option<f64>,
    pub grid: Option<GridSpec>,
    pub export: Option<String>,
    pub pole: Option<usize>,
}

impl RawSpec {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: RawSpec) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(scenario, gauss_map_file, group, tau, branch, k, k_file, step, grid, export, pole);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaussMapSource {
    Builtin(Builtin),
    File(PathBuf),
}

impl fmt::Display for GaussMapSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin(b) => write!(f, "builtin:{b}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureSource {
    Const(f64),
    File(PathBuf),
}

impl fmt::Display for CurvatureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(k) => write!(f, "const:{k}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub mesh: Option<MeshFormat>,
    /// Ambient coordinate used as the stereographic pole.
    pub pole: usize,
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub group: GroupPreset,
    /// `None` for sample-only scenarios on parametric grids.
    pub branch: Option<Branch>,
    pub grid: GridDomain,
    pub gauss_map: Option<GaussMapSource>,
    pub curvature: Option<CurvatureSource>,
    pub outputs: Outputs,
}

/// Serializable echo of the spec for the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct SpecSummary {
    pub name: String,
    pub group: String,
    pub branch: Option<Branch>,
    pub grid: GridDomain,
    pub gauss_map: Option<String>,
    pub curvature: Option<String>,
}

/// Default rectangle of each builtin at step `h`.
pub fn builtin_grid(builtin: Builtin, h: f64) -> CliResult<GridDomain> {
    let nodes = |extent: f64| (extent / h).round() as usize + 1;
    let d = match builtin {
        Builtin::Gzbar => GridDomain::centered((0.3, 0.2), 0.4, h, GridKind::Conformal)?,
        Builtin::Pseudosphere => GridDomain::new((-2.0, 0.2), (h, h), (nodes(1.8), nodes(1.8)), GridKind::Null)?,
        Builtin::DistanceSphere { .. } | Builtin::GreatSphere => GridDomain::new((0.3, 0.0), (h, h), (nodes(2.5), nodes(3.0)), GridKind::Parametric)?,
    };
    Ok(d)
}

/// Curvature used when none is given: the sphere-side constant of each
/// builtin, or the flat-side one when `flat` is set.
pub fn builtin_curvature(builtin: Builtin, flat: bool) -> Option<f64> {
    match builtin {
        Builtin::Gzbar => Some(1.0),
        Builtin::Pseudosphere => Some(if flat { -1.0 } else { -2.0 }),
        Builtin::DistanceSphere { .. } | Builtin::GreatSphere => None,
    }
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("toml")
}

impl ScenarioSpec {
    /// Validates `raw`. `flat_input` selects the flat-side default curvature
    /// for builtins.
    pub fn resolve(raw: &RawSpec, flat_input: Option<bool>) -> CliResult<Self> {
        let group = GroupPreset::from_name(raw.group.as_deref().unwrap_or("s3"), raw.tau)?;
        let flat = flat_input.unwrap_or(group == GroupPreset::R3);

        let builtin = raw.scenario.as_deref().map(str::parse::<Builtin>).transpose()?;
        let (name, gauss_map, file_grid) = match (&builtin, &raw.gauss_map_file) {
            (Some(_), Some(_)) => return Err(CliError::Spec("give either a builtin scenario or a Gauss map file, not both".into())),
            (Some(b), None) => {
                let source = match b {
                    Builtin::Gzbar | Builtin::Pseudosphere => Some(GaussMapSource::Builtin(*b)),
                    _ => None,
                };
                (b.name(), source, None)
            }
            (None, Some(path)) => {
                let grid = GridDomain::load_toml(&sidecar(path))?;
                (path.display().to_string(), Some(GaussMapSource::File(path.clone())), Some(grid))
            }
            (None, None) => ("custom".to_string(), None, None),
        };

        let grid = match (raw.grid, file_grid, builtin) {
            (Some(_), Some(_), _) => return Err(CliError::Spec("a Gauss map file carries its own grid".into())),
            (None, Some(g), _) => {
                if raw.step.is_some() {
                    return Err(CliError::Spec("the step of a file grid cannot be changed".into()));
                }
                g
            }
            (Some(gs), None, _) => {
                let kind = match (raw.branch, builtin) {
                    (_, Some(b)) => b.grid_kind(),
                    (Some(br), None) => br.grid_kind(),
                    (None, None) => return Err(CliError::Spec("an explicit grid needs a scenario or a branch".into())),
                };
                GridDomain::new((gs.origin[0], gs.origin[1]), (gs.step[0], gs.step[1]), (gs.size[0], gs.size[1]), kind)?
            }
            (None, None, Some(b)) => builtin_grid(b, raw.step.unwrap_or(DEFAULT_STEP))?,
            (None, None, None) => return Err(CliError::Spec("no scenario, Gauss map file or grid given".into())),
        };
        if builtin == Some(Builtin::Pseudosphere) {
            pseudosphere::check_domain(&grid)?;
        }

        let branch = Branch::of_kind(grid.kind);
        if let (Some(asked), Some(actual)) = (raw.branch, branch) {
            if asked != actual {
                return Err(CliError::Spec(format!("branch {asked} does not match a {} grid", grid.kind.label())));
            }
        }
        if raw.branch.is_some() && branch.is_none() {
            return Err(CliError::Spec(format!("scenario {name} is a surface sample and has no branch")));
        }

        let curvature = match (raw.k, &raw.k_file) {
            (Some(_), Some(_)) => return Err(CliError::Spec("give either k or a curvature file, not both".into())),
            (Some(k), None) => Some(CurvatureSource::Const(k)),
            (None, Some(p)) => Some(CurvatureSource::File(p.clone())),
            (None, None) => builtin.and_then(|b| builtin_curvature(b, flat)).map(CurvatureSource::Const),
        };
        if let (Some(CurvatureSource::Const(k)), Some(br)) = (&curvature, branch) {
            if !br.admits(*k) {
                return Err(CliError::Spec(format!("curvature {k} has the wrong sign for the {br} branch")));
            }
        }

        let mesh = raw.export.as_deref().map(str::parse::<MeshFormat>).transpose()?;
        let pole = raw.pole.unwrap_or(3);
        if pole > 3 {
            return Err(CliError::Spec(format!("pole index {pole} outside 0..=3")));
        }
        Ok(Self {
            name,
            group,
            branch,
            grid,
            gauss_map,
            curvature,
            outputs: Outputs { mesh, pole },
        })
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match &self.gauss_map {
            Some(GaussMapSource::Builtin(b)) => Some(*b),
            _ => self.name.parse().ok(),
        }
    }

    /// Whether every input can be re-evaluated on a refined grid.
    pub fn refinable(&self) -> bool {
        !matches!(self.gauss_map, Some(GaussMapSource::File(_))) && !matches!(self.curvature, Some(CurvatureSource::File(_)))
    }

    pub fn summary(&self) -> SpecSummary {
        SpecSummary {
            name: self.name.clone(),
            group: self.group.to_string(),
            branch: self.branch,
            grid: self.grid,
            gauss_map: self.gauss_map.as_ref().map(ToString::to_string),
            curvature: self.curvature.as_ref().map(ToString::to_string),
        }
    }

    pub fn gauss_map_on(&self, domain: &GridDomain) -> CliResult<ComplexField> {
        match &self.gauss_map {
            Some(GaussMapSource::Builtin(Builtin::Gzbar)) => Ok(gzbar(*domain)?),
            Some(GaussMapSource::Builtin(Builtin::Pseudosphere)) => Ok(pseudosphere::gauss_map_field(*domain)?),
            Some(GaussMapSource::Builtin(other)) => Err(CliError::Spec(format!("{other} has no Gauss map"))),
            Some(GaussMapSource::File(path)) => {
                self.require_own_grid(domain)?;
                Ok(ComplexField::read_csv(path, *domain)?)
            }
            None => Err(CliError::Spec(format!("scenario {} has no Gauss map", self.name))),
        }
    }

    pub fn curvature_on(&self, domain: &GridDomain) -> CliResult<RealField> {
        match &self.curvature {
            Some(CurvatureSource::Const(k)) => Ok(RealField::constant(*domain, *k)),
            Some(CurvatureSource::File(path)) => {
                self.require_own_grid(domain)?;
                Ok(RealField::read_csv(path, *domain)?)
            }
            None => Err(CliError::Spec(format!("scenario {} needs a curvature (--k or --k-file)", self.name))),
        }
    }

    pub fn constant_curvature(&self) -> Option<f64> {
        match self.curvature {
            Some(CurvatureSource::Const(k)) => Some(k),
            _ => None,
        }
    }

    fn require_own_grid(&self, domain: &GridDomain) -> CliResult<()> {
        if *domain != self.grid {
            return Err(CliError::Spec("file data exist only on their own grid".into()));
        }
        Ok(())
    }
}

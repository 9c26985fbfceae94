//! Command implementations. Each run collects named checks into a manifest;
//! artifacts are computed on the requested grid, and finite-difference
//! checks are repeated on its halving to measure the convergence order.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use gaussframe::correspondence::{self, CorrespondenceResult};
use gaussframe::fields::{Field, GridDomain, RealField};
use gaussframe::lie::GroupPreset;
use gaussframe::mesh::{MeshFormat, QuadMesh};
use gaussframe::report::ResidualReport;
use gaussframe::scenarios::{distance_sphere, great_sphere, pseudosphere, Builtin};
use gaussframe::su2::{self, Ambient, Quat, RevolutionConfig, SurfaceSample};
use gaussframe::{negative, positive, Vec3};
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CliError, CliResult};
use crate::scenario::{Branch, ScenarioSpec, SpecSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Curvature `K` in S3 to `K*` in R3.
    S3ToR3,
    /// `K*` in R3 back to `K` in S3.
    R3ToS3,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Value on the requested grid.
    pub value: f64,
    pub tolerance: f64,
    /// Value on the halved grid, for finite-difference checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub scenario: SpecSummary,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    /// Scalar diagnostics without a pass/fail meaning.
    pub notes: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Collects checks and artifacts for one command.
pub struct Run<'a> {
    spec: &'a ScenarioSpec,
    tol: Tolerances,
    out: PathBuf,
    command: &'static str,
    checks: Vec<Check>,
    notes: BTreeMap<String, f64>,
    artifacts: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    pub fn new(command: &'static str, spec: &'a ScenarioSpec, tol: Tolerances, out: &Path) -> CliResult<Self> {
        fs::create_dir_all(out)?;
        Ok(Self {
            spec,
            tol,
            out: out.to_path_buf(),
            command,
            checks: Vec::new(),
            notes: BTreeMap::new(),
            artifacts: Vec::new(),
        })
    }

    fn artifact(&mut self, file: &str) -> PathBuf {
        let path = self.out.join(file);
        self.artifacts.push(path.clone());
        path
    }

    fn note(&mut self, key: &str, value: f64) {
        self.notes.insert(key.to_string(), value);
    }

    fn bound(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            refined: None,
            order: None,
            passed: value <= tolerance,
        });
    }

    /// A discretization error measured on the requested grid and its halving.
    /// Passes when both values sit below the rounding floor, or when the
    /// order reaches `min_order` and the coarse value is below
    /// `fd_scale * h^2`. Inputs read from files cannot be refined; they are
    /// held to the bound alone.
    fn discretization(&mut self, name: &str, measure: impl Fn(&GridDomain) -> CliResult<f64>) -> CliResult<()> {
        let d = self.spec.grid;
        let h = d.step.0.max(d.step.1);
        let tolerance = self.tol.fd_scale * h * h;
        let value = measure(&d)?;
        let check = if self.spec.refinable() {
            let refined = measure(&d.refined())?;
            let order = (value / refined).log2();
            let floor = value.max(refined) <= self.tol.rounding_floor;
            Check {
                name: name.to_string(),
                value,
                tolerance,
                refined: Some(refined),
                order: Some(order),
                passed: floor || (order >= self.tol.min_order && value <= tolerance),
            }
        } else {
            Check {
                name: name.to_string(),
                value,
                tolerance,
                refined: None,
                order: None,
                passed: value <= tolerance,
            }
        };
        self.checks.push(check);
        Ok(())
    }

    fn report(&mut self, file: &str, report: &ResidualReport) -> CliResult<()> {
        let path = self.artifact(file);
        report.write_csv(&path)?;
        Ok(())
    }

    pub fn finish(self) -> CliResult<Manifest> {
        let failures: Vec<String> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        let path = self.out.join("manifest.json");
        let mut artifacts = self.artifacts;
        artifacts.push(path.clone());
        let manifest = Manifest {
            command: self.command.to_string(),
            scenario: self.spec.summary(),
            tolerances: self.tol,
            passed: failures.is_empty(),
            checks: self.checks,
            notes: self.notes,
            artifacts,
            failures,
        };
        let mut w = BufWriter::new(fs::File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        Ok(manifest)
    }
}

fn require_branch(spec: &ScenarioSpec, command: &'static str) -> CliResult<Branch> {
    spec.branch.ok_or_else(|| CliError::Unsupported {
        command,
        what: format!("the surface sample {}", spec.name),
    })
}

/// Real tangent fields `phi^{-1} d phi` of the frame on `domain`.
fn tangents(spec: &ScenarioSpec, domain: &GridDomain) -> CliResult<(Field<Vec3>, Field<Vec3>)> {
    let conn = spec.group.mu().christoffel();
    let g = spec.gauss_map_on(domain)?;
    let k = spec.curvature_on(domain)?;
    let frame = match require_branch(spec, "integration")? {
        Branch::Positive => positive::solve_linear_positive(&conn, &g, &k)?.real_tangents(),
        Branch::Negative => negative::solve_linear_null(&conn, &g, &k)?.real_tangents(),
    };
    Ok(frame)
}

fn integrate(spec: &ScenarioSpec, domain: &GridDomain) -> CliResult<SurfaceSample> {
    let frame = tangents(spec, domain)?;
    match spec.group {
        GroupPreset::S3 => Ok(su2::integrate_frame(&frame, Quat::IDENTITY)?),
        GroupPreset::R3 => Ok(su2::r3_integrate(&frame, Vec3::zeros())?),
        other => Err(CliError::Unsupported {
            command: "integration",
            what: format!("the group {other}; only s3 and r3 have an integrator"),
        }),
    }
}

/// Largest `|K_ext - K|` over measured oracle nodes.
fn oracle_error(sample: &SurfaceSample, expected: &RealField) -> CliResult<f64> {
    let forms = su2::embed_oracle_forms(sample)?;
    Ok(forms.measured().map(|(idx, n)| (n.k_ext - expected.at(idx)).abs()).fold(0.0, f64::max))
}

fn relative_gap(a: &gaussframe::CVec3, b: &gaussframe::CVec3) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn max_norm_interior(name: &str, field: Field<f64>) -> f64 {
    ResidualReport::all_valid(name, field).interior_max()
}

fn write_tangents(path: &Path, frame: &(Field<Vec3>, Field<Vec3>)) -> CliResult<()> {
    let d = *frame.0.domain();
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,y,tx1,tx2,tx3,ty1,ty2,ty3")?;
    for idx in 0..d.len() {
        let (i, j) = d.node(idx);
        let (x, y) = d.coords(i, j);
        let (a, b) = (frame.0.at(idx), frame.1.at(idx));
        writeln!(
            w,
            "{x:.17e},{y:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            a[0], a[1], a[2], b[0], b[1], b[2]
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_sample(path: &Path, sample: &SurfaceSample) -> CliResult<()> {
    let d = sample.domain;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,y,x1,x2,x3,x4")?;
    for (idx, p) in sample.points.iter().enumerate() {
        let (i, j) = d.node(idx);
        let (x, y) = d.coords(i, j);
        writeln!(w, "{x:.17e},{y:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2], p[3])?;
    }
    w.flush()?;
    Ok(())
}

fn write_mesh(run: &mut Run, sample: &SurfaceSample, format: MeshFormat) -> CliResult<()> {
    let mesh = match sample.ambient {
        Ambient::Sphere => {
            let stereo = su2::stereo_s3_to_r3(sample, run.spec.outputs.pole)?;
            run.note("pole_flagged_nodes", stereo.near_pole.iter().filter(|&&f| f).count() as f64);
            QuadMesh::from_stereo(&stereo)
        }
        Ambient::Euclidean => QuadMesh::from_euclidean(sample)?,
    };
    let path = run.artifact(&format!("surface.{}", format.extension()));
    mesh.write(&path, format)?;
    run.bound("mesh faces missing", if mesh.quads.is_empty() { 1.0 } else { 0.0 }, 0.0);
    Ok(())
}

pub fn verify(spec: &ScenarioSpec, tol: Tolerances, out: &Path) -> CliResult<Manifest> {
    let mut run = Run::new("verify", spec, tol, out)?;
    let branch = require_branch(spec, "verify")?;
    let mu = spec.group.mu();
    let conn = mu.christoffel();
    let sphere = spec.group == GroupPreset::S3;
    let axial = mu.require_axial().is_ok();
    let d = spec.grid;
    let g = spec.gauss_map_on(&d)?;
    let k = spec.curvature_on(&d)?;
    let c = mu.structure_constants();

    match branch {
        Branch::Positive => {
            let frame = positive::solve_linear_positive(&conn, &g, &k)?;
            write_tangents(&run.artifact("frame.csv"), &frame.real_tangents())?;
            if axial {
                let closed = positive::coeffs_unimodular_closed(mu, &g, &k)?;
                let gap = closed
                    .0
                    .values()
                    .iter()
                    .zip(frame.0.values())
                    .map(|(a, b)| relative_gap(a, b))
                    .fold(0.0, f64::max);
                run.bound("closed form vs linear solve (relative)", gap, tol.algebraic);
            }
            run.report("commutator.csv", &positive::commutator_residual(&conn, &g, &k, &frame)?.report())?;
            run.discretization("normal parallelism defect", |d| {
                let (g, k) = (spec.gauss_map_on(d)?, spec.curvature_on(d)?);
                let frame = positive::solve_linear_positive(&conn, &g, &k)?;
                Ok(positive::commutator_residual(&conn, &g, &k, &frame)?.report().interior_max())
            })?;
            run.discretization("structure equation of the frame", |d| {
                let frame = positive::solve_linear_positive(&conn, &spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?;
                Ok(max_norm_interior(
                    "structure equation",
                    positive::maurer_cartan_residual(&c, &frame)?.map(|v| v.norm()),
                ))
            })?;
            if sphere {
                let s = positive::integrability_residual_s3(&g, &k)?;
                run.report("curvature-equation.csv", &s.equation)?;
                run.discretization("curvature equation", |d| {
                    Ok(positive::integrability_residual_s3(&spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?
                        .equation
                        .interior_max())
                })?;
                run.discretization("logarithmic identity", |d| {
                    Ok(positive::integrability_residual_s3(&spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?
                        .log_identity
                        .interior_max())
                })?;
            }
            if axial {
                run.report("second-order-equation.csv", &positive::second_order_residual(mu, &g, &k)?)?;
                run.discretization("second-order equation", |d| {
                    Ok(positive::second_order_residual(mu, &spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?.interior_max())
                })?;
            }
        }
        Branch::Negative => {
            let frame = negative::solve_linear_null(&conn, &g, &k)?;
            write_tangents(&run.artifact("frame.csv"), &frame.real_tangents())?;
            run.bound("imaginary residue of tangents", frame.imaginary_residue(), tol.algebraic);
            if axial {
                let closed = negative::coeffs_negative_closed(mu, &g, &k)?;
                let gap = closed
                    .0
                    .values()
                    .iter()
                    .zip(frame.0.values())
                    .map(|(a, b)| relative_gap(&a.along_u, &b.along_u).max(relative_gap(&a.along_v, &b.along_v)))
                    .fold(0.0, f64::max);
                run.bound("closed form vs linear solve (relative)", gap, tol.algebraic);
            }
            run.report("commutator.csv", &negative::commutator_residual(&conn, &g, &k, &frame)?.report())?;
            run.discretization("normal parallelism defect", |d| {
                let (g, k) = (spec.gauss_map_on(d)?, spec.curvature_on(d)?);
                let frame = negative::solve_linear_null(&conn, &g, &k)?;
                Ok(negative::commutator_residual(&conn, &g, &k, &frame)?.report().interior_max())
            })?;
            run.discretization("structure equation of the frame", |d| {
                let frame = negative::solve_linear_null(&conn, &spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?;
                Ok(max_norm_interior(
                    "structure equation",
                    negative::maurer_cartan_residual(&c, &frame).map(|v| v.norm()),
                ))
            })?;
            if sphere {
                let s = negative::integrability_residual_neg(&g, &k)?;
                run.report("curvature-equation-u.csv", &s.along_u)?;
                run.report("curvature-equation-v.csv", &s.along_v)?;
                run.discretization("curvature equation", |d| {
                    Ok(negative::integrability_residual_neg(&spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?.interior_max())
                })?;
            }
            if axial {
                run.report("second-order-equation.csv", &negative::second_order_residual(mu, &g, &k)?)?;
                run.discretization("second-order equation", |d| {
                    Ok(negative::second_order_residual(mu, &spec.gauss_map_on(d)?, &spec.curvature_on(d)?)?.interior_max())
                })?;
            }
        }
    }
    run.finish()
}

pub fn reconstruct(spec: &ScenarioSpec, tol: Tolerances, out: &Path, revolution: bool) -> CliResult<Manifest> {
    if revolution {
        return reconstruct_revolution(spec, tol, out);
    }
    let mut run = Run::new("reconstruct", spec, tol, out)?;
    let d = spec.grid;
    let sample = integrate(spec, &d)?;
    write_sample(&run.artifact("surface.csv"), &sample)?;
    if sample.ambient == Ambient::Sphere {
        run.bound("unit-norm drift", sample.raw_drift, tol.drift);
        run.discretization("loop closure defect", |d| {
            Ok(su2::max_loop_closure_defect(&tangents(spec, d)?, su2::ORACLE_MARGIN)?)
        })?;
    }
    run.discretization("extrinsic curvature error", |d| oracle_error(&integrate(spec, d)?, &spec.curvature_on(d)?))?;
    if let Some(format) = spec.outputs.mesh {
        write_mesh(&mut run, &sample, format)?;
    }
    run.finish()
}

/// The surface swept by the isometry group from the profile ODE.
fn reconstruct_revolution(spec: &ScenarioSpec, tol: Tolerances, out: &Path) -> CliResult<Manifest> {
    if spec.group != GroupPreset::S3 {
        return Err(CliError::Unsupported {
            command: "reconstruct --revolution",
            what: format!("the group {}", spec.group),
        });
    }
    let k = spec
        .constant_curvature()
        .ok_or_else(|| CliError::Spec("the revolution surface needs a constant --k".into()))?;
    let mut run = Run::new("reconstruct", spec, tol, out)?;
    let surface = su2::revolution_ode(&RevolutionConfig {
        k,
        ..RevolutionConfig::default()
    })?;
    surface.profile.write_csv(&run.artifact("profile.csv"))?;
    write_sample(&run.artifact("surface.csv"), &surface.sample)?;
    run.note("planar_profile_defect", surface.profile.ansatz_defect);
    run.bound("unit-norm drift", surface.sample.raw_drift, tol.drift);
    let err = su2::embed_oracle_forms(&surface.sample)?.max_curvature_error(k);
    run.bound("extrinsic curvature error", err, tol.curvature);
    if let Some(format) = spec.outputs.mesh {
        write_mesh(&mut run, &surface.sample, format)?;
    }
    run.finish()
}

/// The surface measured by `oracle` and written by `export`, with its
/// expected extrinsic curvature.
fn sample_for(spec: &ScenarioSpec, domain: &GridDomain) -> CliResult<(SurfaceSample, RealField)> {
    match spec.builtin() {
        Some(Builtin::DistanceSphere { r }) => Ok((distance_sphere(*domain, r)?, RealField::constant(*domain, (1.0 / r.tan()).powi(2)))),
        Some(Builtin::GreatSphere) => Ok((great_sphere(*domain)?, RealField::constant(*domain, 0.0))),
        Some(Builtin::Pseudosphere) if spec.group == GroupPreset::R3 => Ok((pseudosphere::position_sample(*domain)?, spec.curvature_on(domain)?)),
        _ => Ok((integrate(spec, domain)?, spec.curvature_on(domain)?)),
    }
}

pub fn oracle(spec: &ScenarioSpec, tol: Tolerances, out: &Path) -> CliResult<Manifest> {
    let mut run = Run::new("oracle", spec, tol, out)?;
    let d = spec.grid;
    let (sample, _) = sample_for(spec, &d)?;
    let forms = su2::embed_oracle_forms(&sample)?;
    let path = run.artifact("oracle.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "x,y,e,f,g,l,m,n,k_ext")?;
    for (idx, node) in forms.measured() {
        let (i, j) = d.node(idx);
        let (x, y) = d.coords(i, j);
        let [e, f, g] = node.first;
        let [l, m, n] = node.second;
        writeln!(w, "{x:.17e},{y:.17e},{e:.17e},{f:.17e},{g:.17e},{l:.17e},{m:.17e},{n:.17e},{:.17e}", node.k_ext)?;
    }
    w.flush()?;
    run.discretization("extrinsic curvature error", |d| {
        let (sample, expected) = sample_for(spec, d)?;
        oracle_error(&sample, &expected)
    })?;
    run.finish()
}

pub fn export(spec: &ScenarioSpec, tol: Tolerances, out: &Path) -> CliResult<Manifest> {
    let mut run = Run::new("export", spec, tol, out)?;
    let (sample, _) = sample_for(spec, &spec.grid)?;
    write_mesh(&mut run, &sample, spec.outputs.mesh.unwrap_or(MeshFormat::Obj))?;
    run.finish()
}

pub fn correspond(spec: &ScenarioSpec, tol: Tolerances, out: &Path, direction: Direction, base: Option<f64>) -> CliResult<Manifest> {
    let mut run = Run::new("correspond", spec, tol, out)?;
    let branch = require_branch(spec, "correspond")?;
    let d = spec.grid;
    let input = spec.curvature_on(&d)?;
    let transfer = |k: &RealField, base: Option<f64>| -> CliResult<CorrespondenceResult> {
        Ok(match branch {
            Branch::Positive => correspondence::transfer_positive(k, base)?,
            Branch::Negative => correspondence::transfer_negative(k, base, tol.algebraic)?,
        })
    };
    let sign_errors = |k: &RealField| {
        let wrong = k
            .values()
            .iter()
            .filter(|&&v| !(if branch == Branch::Positive { v > 0.0 } else { v < 0.0 }))
            .count();
        wrong as f64
    };
    let condition = |k: &RealField| -> CliResult<ResidualReport> {
        Ok(match branch {
            Branch::Positive => correspondence::condition_positive(k)?,
            Branch::Negative => correspondence::condition_negative(k)?,
        })
    };

    let output = match direction {
        Direction::S3ToR3 => {
            let result = transfer(&input, base)?;
            run.report("condition.csv", &result.condition_residual)?;
            run.discretization("correspondence condition", |d| Ok(condition(&spec.curvature_on(d)?)?.interior_max()))?;
            match branch {
                Branch::Positive => run.discretization("path dependence", |d| Ok(transfer(&spec.curvature_on(d)?, base)?.path_dependence))?,
                Branch::Negative => run.bound("path dependence", result.path_dependence, tol.algebraic),
            }
            result.k_target
        }
        Direction::R3ToS3 => {
            let base =
                base.ok_or_else(|| gaussframe::Error::GaugeUnderdetermined("the recovered curvature needs its value at the grid origin; pass --base".into()))?;
            let recovered = match branch {
                Branch::Positive => correspondence::inverse_positive(&input, base)?,
                Branch::Negative => correspondence::inverse_negative(&input, base)?,
            };
            run.report("condition.csv", &condition(&recovered)?)?;
            if branch == Branch::Negative {
                // Exact increments both ways: the forward map must return the input.
                let back = transfer(&recovered, Some(input.at(0)))?.k_target;
                let gap = back.values().iter().zip(input.values()).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
                run.bound("round trip (relative)", gap, tol.algebraic);
            }
            recovered
        }
    };
    run.bound("curvature of the wrong sign (nodes)", sign_errors(&output), 0.0);
    run.note("output_min", output.min());
    run.note("output_max", output.max());
    output.write_csv(&run.artifact("curvature.csv"))?;
    run.finish()
}

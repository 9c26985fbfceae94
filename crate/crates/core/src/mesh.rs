//! Quad meshes from grid samples, written as OBJ or ASCII PLY.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{create_writer, flush, GridDomain};
use crate::su2::{Ambient, StereoMesh, SurfaceSample};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            other => Err(Error::Config(format!("unknown mesh format {other:?}"))),
        }
    }
}

impl MeshFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Obj => "obj",
            Self::Ply => "ply",
        }
    }
}

/// Vertices of the kept nodes and quads over cells whose four corners are
/// all kept.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMesh {
    pub vertices: Vec<Vec3>,
    pub quads: Vec<[usize; 4]>,
}

impl QuadMesh {
    pub fn from_grid(domain: &GridDomain, points: &[Vec3], keep: &[bool]) -> Self {
        let mut remap = vec![usize::MAX; points.len()];
        let mut vertices = Vec::new();
        for (idx, p) in points.iter().enumerate() {
            if keep[idx] && p.iter().all(|c| c.is_finite()) {
                remap[idx] = vertices.len();
                vertices.push(*p);
            }
        }
        let (n1, n2) = domain.size;
        let mut quads = Vec::new();
        for j in 0..n2 - 1 {
            for i in 0..n1 - 1 {
                let corners = [domain.index(i, j), domain.index(i + 1, j), domain.index(i + 1, j + 1), domain.index(i, j + 1)].map(|c| remap[c]);
                if corners.iter().all(|&c| c != usize::MAX) {
                    quads.push(corners);
                }
            }
        }
        Self { vertices, quads }
    }

    /// Stereographic image with pole-flagged nodes dropped.
    pub fn from_stereo(mesh: &StereoMesh) -> Self {
        let keep: Vec<bool> = mesh.near_pole.iter().map(|&f| !f).collect();
        Self::from_grid(&mesh.domain, &mesh.points, &keep)
    }

    pub fn from_euclidean(sample: &SurfaceSample) -> Result<Self> {
        if sample.ambient != Ambient::Euclidean {
            return Err(Error::DomainError("mesh from a sphere sample needs a stereographic projection first".into()));
        }
        let pts: Vec<Vec3> = sample.points.iter().map(|p| p.xyz()).collect();
        Ok(Self::from_grid(&sample.domain, &pts, &vec![true; pts.len()]))
    }

    pub fn write(&self, path: &Path, format: MeshFormat) -> Result<()> {
        match format {
            MeshFormat::Obj => self.write_obj(path),
            MeshFormat::Ply => self.write_ply(path),
        }
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let mut w = create_writer(path)?;
        for v in &self.vertices {
            writeln!(w, "v {:.12e} {:.12e} {:.12e}", v.x, v.y, v.z)?;
        }
        for q in &self.quads {
            writeln!(w, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)?;
        }
        flush(w)
    }

    pub fn write_ply(&self, path: &Path) -> Result<()> {
        let mut w = create_writer(path)?;
        writeln!(w, "ply\nformat ascii 1.0")?;
        writeln!(w, "element vertex {}", self.vertices.len())?;
        writeln!(w, "property double x\nproperty double y\nproperty double z")?;
        writeln!(w, "element face {}", self.quads.len())?;
        writeln!(w, "property list uchar int vertex_indices\nend_header")?;
        for v in &self.vertices {
            writeln!(w, "{:.12e} {:.12e} {:.12e}", v.x, v.y, v.z)?;
        }
        for q in &self.quads {
            writeln!(w, "4 {} {} {} {}", q[0], q[1], q[2], q[3])?;
        }
        flush(w)
    }
}

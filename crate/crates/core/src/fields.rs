//! Scalar and vector fields sampled on a rectangular parameter grid, with
//! Wirtinger and null-coordinate finite differences and stereographic
//! conversion between unit normals and the complex Gauss map.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Vec3, C64};

/// Nodes where `|g|` exceeds this are treated as sitting on the pole.
pub const POLE_MODULUS: f64 = 1e8;

/// Unit-norm tolerance for [`UnitVectorField`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// Axes are `(x, y)` with `z = x + i y`.
    #[serde(rename = "conformal-z")]
    Conformal,
    /// Axes are proper null coordinates `(u, v)`.
    #[serde(rename = "null-uv")]
    Null,
    /// Any other surface parameters, such as the `(s, t)` of a profile sweep.
    #[serde(rename = "parametric")]
    Parametric,
}

impl GridKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Conformal => "conformal-z",
            Self::Null => "null-uv",
            Self::Parametric => "parametric",
        }
    }
}

/// Uniform rectangular grid. Node `(i, j)` sits at
/// `origin + (i * step.0, j * step.1)`; storage is row-major with `i` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub origin: (f64, f64),
    pub step: (f64, f64),
    pub size: (usize, usize),
    pub kind: GridKind,
}

impl GridDomain {
    pub const MIN_NODES: usize = 5;

    pub fn new(origin: (f64, f64), step: (f64, f64), size: (usize, usize), kind: GridKind) -> Result<Self> {
        if !(step.0 > 0.0 && step.1 > 0.0 && step.0.is_finite() && step.1.is_finite()) {
            return Err(Error::InvalidGrid(format!("steps must be positive, got {step:?}")));
        }
        if size.0 < Self::MIN_NODES || size.1 < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!("need at least {} nodes per axis, got {size:?}", Self::MIN_NODES)));
        }
        Ok(Self { origin, step, size, kind })
    }

    /// Grid covering `[lo.0, hi.0] x [lo.1, hi.1]` with the given node counts.
    pub fn spanning(lo: (f64, f64), hi: (f64, f64), size: (usize, usize), kind: GridKind) -> Result<Self> {
        if size.0 < 2 || size.1 < 2 {
            return Err(Error::InvalidGrid(format!("too few nodes: {size:?}")));
        }
        let step = ((hi.0 - lo.0) / (size.0 - 1) as f64, (hi.1 - lo.1) / (size.1 - 1) as f64);
        Self::new(lo, step, size, kind)
    }

    /// Square grid centred at `center` with half-width `half` and step `h`
    /// (rounded so the half-width is a whole number of steps).
    pub fn centered(center: (f64, f64), half: f64, h: f64, kind: GridKind) -> Result<Self> {
        let m = (half / h).round().max(2.0) as usize;
        let n = 2 * m + 1;
        let width = m as f64 * h;
        Self::new((center.0 - width, center.1 - width), (h, h), (n, n), kind)
    }

    /// Same extent with both steps halved.
    pub fn refined(&self) -> Self {
        Self {
            origin: self.origin,
            step: (self.step.0 / 2.0, self.step.1 / 2.0),
            size: (2 * self.size.0 - 1, 2 * self.size.1 - 1),
            kind: self.kind,
        }
    }

    pub fn len(&self) -> usize {
        self.size.0 * self.size.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.size.0 + i
    }

    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.size.0, idx / self.size.0)
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.step.0, self.origin.1 + j as f64 * self.step.1)
    }

    pub fn upper(&self) -> (f64, f64) {
        self.coords(self.size.0 - 1, self.size.1 - 1)
    }

    /// Node indices in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(move |idx| self.node(idx))
    }

    /// True when the node is at least `margin` nodes away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.size.0 && j + margin < self.size.1
    }

    /// Index of the node nearest to a parameter point, if inside the grid.
    pub fn nearest(&self, p: (f64, f64)) -> Option<(usize, usize)> {
        let fi = ((p.0 - self.origin.0) / self.step.0).round();
        let fj = ((p.1 - self.origin.1) / self.step.1).round();
        if fi < 0.0 || fj < 0.0 || fi as usize >= self.size.0 || fj as usize >= self.size.1 {
            None
        } else {
            Some((fi as usize, fj as usize))
        }
    }

    pub fn save_toml(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_toml(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let d: Self = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        Self::new(d.origin, d.step, d.size, d.kind)
    }
}

/// Values that can be finite-differenced.
pub trait FieldValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> FieldValue for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Values attached to every node of a [`GridDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    domain: GridDomain,
    values: Vec<T>,
}

pub type ComplexField = Field<C64>;
pub type RealField = Field<f64>;

impl<T: Copy> Field<T> {
    pub fn from_values(domain: GridDomain, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", domain.len(), values.len())));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: GridDomain, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let values = domain
            .nodes()
            .map(|(i, j)| {
                let (x, y) = domain.coords(i, j);
                f(x, y)
            })
            .collect();
        Self { domain, values }
    }

    pub fn constant(domain: GridDomain, value: T) -> Self {
        Self {
            domain,
            values: vec![value; domain.len()],
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.domain.index(i, j)]
    }

    pub fn at(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Result<Field<V>> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(Field {
            domain: self.domain,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

impl<T: FieldValue> Field<T> {
    /// Partial derivative along axis 0 or 1: second-order central differences
    /// in the interior and second-order one-sided stencils on the edges.
    pub fn partial(&self, axis: usize) -> Self {
        let d = &self.domain;
        let (n, h) = if axis == 0 { (d.size.0, d.step.0) } else { (d.size.1, d.step.1) };
        let at = |i: usize, j: usize, k: usize| -> T {
            if axis == 0 {
                self.values[d.index(k, j)]
            } else {
                self.values[d.index(i, k)]
            }
        };
        let values = d
            .nodes()
            .map(|(i, j)| {
                let k = if axis == 0 { i } else { j };
                let f = |m: usize| at(i, j, m);
                if k == 0 {
                    (f(0) * -3.0 + f(1) * 4.0 - f(2)) * (0.5 / h)
                } else if k == n - 1 {
                    (f(n - 1) * 3.0 - f(n - 2) * 4.0 + f(n - 3)) * (0.5 / h)
                } else {
                    (f(k + 1) - f(k - 1)) * (0.5 / h)
                }
            })
            .collect();
        Self { domain: *d, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Dz,
    Dzbar,
    Du,
    Dv,
}

impl DiffOp {
    fn label(&self) -> &'static str {
        match self {
            Self::Dz => "d_z",
            Self::Dzbar => "d_zbar",
            Self::Du => "d_u",
            Self::Dv => "d_v",
        }
    }
}

impl ComplexField {
    /// Wirtinger derivatives `(d_x -+ i d_y)/2` on conformal grids, axis
    /// derivatives on null grids.
    pub fn differentiate(&self, op: DiffOp) -> Result<Self> {
        let kind = self.domain.kind;
        let mismatch = || Error::KindMismatch {
            op: op.label(),
            kind: kind.label(),
        };
        match (op, kind) {
            (DiffOp::Dz | DiffOp::Dzbar, GridKind::Conformal) => {
                let sign = if op == DiffOp::Dz { -1.0 } else { 1.0 };
                let fx = self.partial(0);
                let fy = self.partial(1);
                fx.zip_map(&fy, |a, b| (a + C64::new(0.0, sign) * b) * 0.5)
            }
            (DiffOp::Du, GridKind::Null) => Ok(self.partial(0)),
            (DiffOp::Dv, GridKind::Null) => Ok(self.partial(1)),
            _ => Err(mismatch()),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Nodes usable in residual statistics: finite and away from the pole.
    pub fn chart_mask(&self) -> Vec<bool> {
        self.values
            .iter()
            .map(|g| g.re.is_finite() && g.im.is_finite() && g.norm() <= POLE_MODULUS)
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "re", "im"])?;
        for (idx, v) in self.values.iter().enumerate() {
            let (i, j) = self.domain.node(idx);
            let (x, y) = self.domain.coords(i, j);
            w.write_record(&[fmt_num(x), fmt_num(y), fmt_num(v.re), fmt_num(v.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path, domain: GridDomain) -> Result<Self> {
        let rows = read_rows(path, &["x", "y", "re", "im"])?;
        let values = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
        check_coords(&rows, &domain)?;
        Self::from_values(domain, values)
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| C64::new(v, 0.0))
    }

    pub fn differentiate(&self, op: DiffOp) -> Result<ComplexField> {
        self.to_complex().differentiate(op)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "val"])?;
        for (idx, v) in self.values.iter().enumerate() {
            let (i, j) = self.domain.node(idx);
            let (x, y) = self.domain.coords(i, j);
            w.write_record(&[fmt_num(x), fmt_num(y), fmt_num(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path, domain: GridDomain) -> Result<Self> {
        let rows = read_rows(path, &["x", "y", "val"])?;
        check_coords(&rows, &domain)?;
        Self::from_values(domain, rows.iter().map(|r| r[2]).collect())
    }
}

/// Unit normals `(N1, N2, N3)` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVectorField(Field<Vec3>);

impl UnitVectorField {
    pub fn new(field: Field<Vec3>) -> Result<Self> {
        if let Some(idx) = field.values.iter().position(|n| (n.norm_squared() - 1.0).abs() > UNIT_TOLERANCE) {
            return Err(Error::InvalidGrid(format!("vector at node {:?} is not unit", field.domain.node(idx))));
        }
        Ok(Self(field))
    }

    pub fn from_gauss_map(g: &ComplexField) -> Self {
        Self(g.map(stereo_unproject))
    }

    pub fn field(&self) -> &Field<Vec3> {
        &self.0
    }

    pub fn to_gauss_map(&self) -> Result<ComplexField> {
        let values = self.0.values.iter().map(stereo_project).collect::<Result<Vec<_>>>()?;
        ComplexField::from_values(self.0.domain, values)
    }
}

/// `g = (N1 + i N2) / (1 - N3)`.
pub fn stereo_project(n: &Vec3) -> Result<C64> {
    if (1.0 - n[2]).abs() < 1e-12 {
        return Err(Error::Pole { n3: n[2] });
    }
    Ok(C64::new(n[0], n[1]) / (1.0 - n[2]))
}

/// `N = (g + conj g, -i (g - conj g), |g|^2 - 1) / (1 + |g|^2)`.
pub fn stereo_unproject(g: C64) -> Vec3 {
    let r = g.norm_sqr();
    let b = 1.0 + r;
    Vec3::new(2.0 * g.re / b, 2.0 * g.im / b, (r - 1.0) / b)
}

/// Derivative of the unit normal along a direction in which `g` changes by
/// `dg` and `conj(g)` by `dgbar` (the two are independent for complex
/// directions such as `d_z`).
pub fn normal_derivative(g: C64, dg: C64, dgbar: C64) -> crate::CVec3 {
    let gb = g.conj();
    let b = 1.0 + g.norm_sqr();
    let b2 = b * b;
    let i = Complex64::i();
    let one = C64::new(1.0, 0.0);
    crate::CVec3::new(
        ((one - gb * gb) * dg + (one - g * g) * dgbar) / b2,
        (-i * (one + gb * gb) * dg + i * (one + g * g) * dgbar) / b2,
        (gb * 2.0 * dg + g * 2.0 * dgbar) / b2,
    )
}

fn fmt_num(v: f64) -> String {
    format!("{v:.17e}")
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if found != header {
        return Err(Error::Config(format!("expected header {header:?}, found {found:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            rec.iter().map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(e.to_string()))).collect()
        })
        .collect()
}

fn check_coords(rows: &[Vec<f64>], domain: &GridDomain) -> Result<()> {
    if rows.len() != domain.len() {
        return Err(Error::InvalidGrid(format!("file has {} rows, grid has {} nodes", rows.len(), domain.len())));
    }
    let tol = 1e-9 * (domain.step.0.min(domain.step.1));
    for (idx, row) in rows.iter().enumerate() {
        let (i, j) = domain.node(idx);
        let (x, y) = domain.coords(i, j);
        if (row[0] - x).abs() > tol || (row[1] - y).abs() > tol {
            return Err(Error::InvalidGrid(format!("row {idx} is at ({}, {}), expected ({x}, {y})", row[0], row[1])));
        }
    }
    Ok(())
}

/// Writes `path` plus a `<path>.grid.toml` sidecar describing the grid.
pub fn write_complex_with_sidecar(field: &ComplexField, path: &Path) -> Result<()> {
    field.write_csv(path)?;
    field.domain().save_toml(&sidecar_path(path))
}

pub fn read_complex_with_sidecar(path: &Path) -> Result<ComplexField> {
    let domain = GridDomain::load_toml(&sidecar_path(path))?;
    ComplexField::read_csv(path, domain)
}

pub fn write_real_with_sidecar(field: &RealField, path: &Path) -> Result<()> {
    field.write_csv(path)?;
    field.domain().save_toml(&sidecar_path(path))
}

pub fn read_real_with_sidecar(path: &Path) -> Result<RealField> {
    let domain = GridDomain::load_toml(&sidecar_path(path))?;
    RealField::read_csv(path, domain)
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".grid.toml");
    s.into()
}

/// Plain text writer helper used by report and mesh exporters.
pub(crate) fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub(crate) fn flush(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

//! Per-node residual maps with max-norm summaries and refinement studies.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::fields::{create_writer, flush, GridDomain, RealField};

/// Edge band excluded from interior statistics; composite second derivatives
/// use one-sided stencils within two nodes of the boundary.
pub const INTERIOR_MARGIN: usize = 2;

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub name: String,
    pub residual: RealField,
    /// Nodes entering the statistics (chart-valid and admissible).
    pub valid: Vec<bool>,
    pub margin: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub interior_max: f64,
    pub interior_mean: f64,
    pub valid_nodes: usize,
    pub interior_nodes: usize,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, residual: RealField, valid: Vec<bool>) -> Self {
        Self {
            name: name.into(),
            residual,
            valid,
            margin: INTERIOR_MARGIN,
        }
    }

    pub fn all_valid(name: impl Into<String>, residual: RealField) -> Self {
        let valid = vec![true; residual.domain().len()];
        Self::new(name, residual, valid)
    }

    pub fn domain(&self) -> &GridDomain {
        self.residual.domain()
    }

    pub fn summary(&self) -> Summary {
        let d = *self.domain();
        let mut s = Summary {
            max: 0.0,
            mean: 0.0,
            interior_max: 0.0,
            interior_mean: 0.0,
            valid_nodes: 0,
            interior_nodes: 0,
        };
        for (idx, (&r, &ok)) in self.residual.values().iter().zip(&self.valid).enumerate() {
            if !ok {
                continue;
            }
            let r = if r.is_nan() { f64::INFINITY } else { r };
            s.valid_nodes += 1;
            s.max = s.max.max(r);
            s.mean += r;
            let (i, j) = d.node(idx);
            if d.is_interior(i, j, self.margin) {
                s.interior_nodes += 1;
                s.interior_max = s.interior_max.max(r);
                s.interior_mean += r;
            }
        }
        if s.valid_nodes > 0 {
            s.mean /= s.valid_nodes as f64;
        }
        if s.interior_nodes > 0 {
            s.interior_mean /= s.interior_nodes as f64;
        }
        s
    }

    /// Interior max-norm, the statistic used for pass/fail decisions.
    pub fn interior_max(&self) -> f64 {
        self.summary().interior_max
    }

    /// `x,y,residual` rows; excluded nodes are written as `nan`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let d = *self.domain();
        let mut w = create_writer(path)?;
        writeln!(w, "x,y,residual")?;
        for (idx, (&r, &ok)) in self.residual.values().iter().zip(&self.valid).enumerate() {
            let (i, j) = d.node(idx);
            let (x, y) = d.coords(i, j);
            let r = if ok { r } else { f64::NAN };
            writeln!(w, "{x:.17e},{y:.17e},{r:.17e}")?;
        }
        flush(w)
    }
}

/// Values of a scalar diagnostic on successively halved grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
}

impl Refinement {
    /// Runs `measure` on `base` and `levels - 1` successive refinements.
    pub fn run(base: GridDomain, levels: usize, mut measure: impl FnMut(&GridDomain) -> Result<f64>) -> Result<Self> {
        let mut steps = Vec::with_capacity(levels);
        let mut values = Vec::with_capacity(levels);
        let mut d = base;
        for _ in 0..levels {
            steps.push(d.step.0);
            values.push(measure(&d)?);
            d = d.refined();
        }
        Ok(Self { steps, values })
    }

    /// Observed order between consecutive levels.
    pub fn orders(&self) -> Vec<f64> {
        self.values
            .windows(2)
            .zip(self.steps.windows(2))
            .map(|(v, h)| (v[0] / v[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    /// Ratio of consecutive values (coarse over fine).
    pub fn ratios(&self) -> Vec<f64> {
        self.values.windows(2).map(|v| v[0] / v[1]).collect()
    }

    pub fn min_order(&self) -> f64 {
        self.orders().into_iter().fold(f64::INFINITY, f64::min)
    }
}

//! Rectangular scan results shared by the uncertainty and steering scans.

use serde::Serialize;

use crate::error::{Error, Result};

pub const SCAN_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "cvsteer";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Evenly stepped grid `start, start + step, …` up to and including `stop`
/// (within a relative slack of 1e−9 steps). Points are rounded to 12 decimals.
pub fn stepped_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParameter("grid bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::InvalidParameter(format!(
            "grid stop {stop} lies below start {start}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| {
            let x = start + i as f64 * step;
            let r = (x * 1e12).round() / 1e12;
            if r == 0.0 {
                0.0
            } else {
                r
            }
        })
        .collect())
}

pub(crate) fn check_grid(grid: &[f64], what: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid(what));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{what} contains non-finite value {x}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub value: f64,
    /// Axis coordinates of the cell, in axis order.
    pub location: Vec<f64>,
    /// Row-major cell index.
    pub index: usize,
}

/// Auxiliary per-cell series carried alongside the primary values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanMeta {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    /// Truncation dimension per mode.
    pub dims: Vec<usize>,
    pub tail_tolerance: f64,
    pub bound_tolerance: f64,
    pub seed: Option<u64>,
    /// Full effective configuration of the run that produced the scan.
    pub config: serde_json::Value,
}

impl ScanMeta {
    pub fn new(dims: Vec<usize>, tail_tolerance: f64, bound_tolerance: f64) -> Self {
        Self {
            schema_version: SCAN_SCHEMA_VERSION,
            tool: TOOL_NAME.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            dims,
            tail_tolerance,
            bound_tolerance,
            seed: None,
            config: serde_json::Value::Null,
        }
    }
}

/// Row-major grid of values (`None` marks cells that could not be
/// evaluated) with named axes and located extrema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub name: String,
    pub axes: Vec<Axis>,
    pub values: Vec<Option<f64>>,
    /// Headline extremum of the scan.
    pub extremum: Extremum,
    /// Global maximum and minimum, in that order.
    pub extrema: Vec<Extremum>,
    pub columns: Vec<Column>,
    pub meta: ScanMeta,
}

impl ScanResult {
    /// Locates extrema (first occurrence in row-major order wins ties).
    /// Fails with `EmptyGrid` when no cell holds a value.
    pub fn new(
        name: &str,
        axes: Vec<Axis>,
        values: Vec<Option<f64>>,
        headline: ExtremumKind,
        meta: ScanMeta,
    ) -> Result<Self> {
        let cells: usize = axes.iter().map(|a| a.values.len()).product();
        if cells != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {cells}-cell grid",
                values.len()
            )));
        }
        let max = Self::locate(&axes, &values, ExtremumKind::Max)
            .ok_or(Error::EmptyGrid("no evaluable cells in scan"))?;
        let min = Self::locate(&axes, &values, ExtremumKind::Min)
            .ok_or(Error::EmptyGrid("no evaluable cells in scan"))?;
        let extremum = match headline {
            ExtremumKind::Max => max.clone(),
            ExtremumKind::Min => min.clone(),
        };
        Ok(Self {
            name: name.to_string(),
            axes,
            values,
            extremum,
            extrema: vec![max, min],
            columns: Vec::new(),
            meta,
        })
    }

    pub fn with_column(mut self, name: &str, values: Vec<Option<f64>>) -> Self {
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
        self
    }

    fn locate(axes: &[Axis], values: &[Option<f64>], kind: ExtremumKind) -> Option<Extremum> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in values.iter().enumerate() {
            let Some(v) = *v else { continue };
            let better = match (best, kind) {
                (None, _) => true,
                (Some((_, b)), ExtremumKind::Max) => v > b,
                (Some((_, b)), ExtremumKind::Min) => v < b,
            };
            if better {
                best = Some((i, v));
            }
        }
        best.map(|(index, value)| Extremum {
            kind,
            value,
            location: Self::coordinates(axes, index),
            index,
        })
    }

    /// Axis coordinates of a row-major cell index.
    pub fn coordinates(axes: &[Axis], index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; axes.len()];
        for (k, axis) in axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[k] = axis.values[rem % n];
            rem /= n;
        }
        out
    }

    pub fn max(&self) -> &Extremum {
        &self.extrema[0]
    }

    pub fn min(&self) -> &Extremum {
        &self.extrema[1]
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn evaluated_cells(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Value at per-axis indices.
    pub fn at(&self, idx: &[usize]) -> Option<f64> {
        let mut flat = 0;
        for (axis, &i) in self.axes.iter().zip(idx) {
            flat = flat * axis.values.len() + i;
        }
        self.values[flat]
    }
}

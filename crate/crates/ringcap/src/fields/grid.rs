//! Sampled-grid fields and the grid file format.
//!
//! Layout (shared by ingestion and potential export):
//!
//! Text form:
//! ```text
//! ringcap-grid v1
//! dim 2
//! axis -1 1 65
//! axis -1 1 65
//! values
//! <65*65 whitespace-separated numbers, row-major, last axis fastest>
//! ```
//! Node i on an axis sits at `min + i * (max - min) / (count - 1)`; values
//! are nonnegative (`inf` allowed).
//!
//! Binary form: magic `RCGRIDB1`, little-endian u32 dim, then per axis
//! f64 min, f64 max, u64 count, then the values as little-endian f64 in the
//! same row-major order. Files are sniffed by magic, so either form loads
//! through the same entry point.

use crate::error::{Error, Result};
use crate::extended::ExtendedNonneg;
use crate::geom::Domain;
use std::io::{Read, Write};
use std::path::Path;

const TEXT_MAGIC: &str = "ringcap-grid v1";
const BINARY_MAGIC: &[u8; 8] = b"RCGRIDB1";

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Row-major sampled values over a rectilinear node grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    axes: Vec<AxisSpec>,
    values: Vec<f64>,
}

impl SampledGrid {
    pub fn new(axes: Vec<AxisSpec>, values: Vec<f64>) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::invalid("grid needs dimension >= 2"));
        }
        let mut expect = 1usize;
        for (i, a) in axes.iter().enumerate() {
            if !(a.min.is_finite() && a.max.is_finite() && a.max > a.min) {
                return Err(Error::invalid(format!("grid axis {i} bounds invalid")));
            }
            if a.count < 2 {
                return Err(Error::invalid(format!("grid axis {i} needs >= 2 nodes")));
            }
            expect = expect
                .checked_mul(a.count)
                .ok_or_else(|| Error::invalid("grid size overflows"))?;
        }
        if values.len() != expect {
            return Err(Error::invalid(format!(
                "grid expects {expect} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::invalid("grid values must be nonnegative (inf allowed)"));
        }
        Ok(SampledGrid { axes, values })
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// The node hull as a box domain.
    pub fn bounds(&self) -> Domain {
        Domain::Box {
            min: self.axes.iter().map(|a| a.min).collect(),
            max: self.axes.iter().map(|a| a.max).collect(),
        }
    }

    /// Multilinear interpolation at `x`; `None` outside the node hull
    /// (beyond a relative fuzz of 1e-9, inside which coordinates clamp to
    /// the nearest boundary node line).
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        debug_assert_eq!(x.len(), self.dim());
        let n = self.dim();
        let mut cell = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for d in 0..n {
            let a = &self.axes[d];
            let span = a.max - a.min;
            let fuzz = span * 1e-9;
            if x[d] < a.min - fuzz || x[d] > a.max + fuzz {
                return None;
            }
            let t = ((x[d] - a.min) / span * (a.count - 1) as f64)
                .clamp(0.0, (a.count - 1) as f64);
            let i = (t.floor() as usize).min(a.count - 2);
            cell[d] = i;
            frac[d] = t - i as f64;
        }
        // strides, last axis fastest
        let mut strides = vec![1usize; n];
        for d in (0..n - 1).rev() {
            strides[d] = strides[d + 1] * self.axes[d + 1].count;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut idx = 0usize;
            let mut w = 1.0;
            for d in 0..n {
                let hi = (corner >> d) & 1 == 1;
                idx += (cell[d] + hi as usize) * strides[d];
                w *= if hi { frac[d] } else { 1.0 - frac[d] };
            }
            if w > 0.0 {
                acc += w * self.values[idx];
            }
        }
        Some(acc)
    }

    // --- file io -------------------------------------------------------------

    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() >= 8 && &bytes[..8] == BINARY_MAGIC {
            Self::from_binary(&bytes).map_err(|e| match e {
                Error::Invalid(m) => Error::invalid(format!("{}: {m}", path.display())),
                other => other,
            })
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::invalid(format!("{}: not utf-8 text", path.display())))?;
            Self::from_text(&text).map_err(|e| match e {
                Error::Invalid(m) => Error::invalid(format!("{}: {m}", path.display())),
                other => other,
            })
        }
    }

    pub fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{TEXT_MAGIC}")?;
        writeln!(out, "dim {}", self.dim())?;
        for a in &self.axes {
            writeln!(out, "axis {} {} {}", fmt(a.min), fmt(a.max), a.count)?;
        }
        writeln!(out, "values")?;
        for chunk in self.values.chunks(8) {
            let line: Vec<String> = chunk.iter().map(|v| fmt(*v)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn write_binary(&self, out: &mut dyn Write) -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.dim() as u32).to_le_bytes())?;
        for a in &self.axes {
            out.write_all(&a.min.to_le_bytes())?;
            out.write_all(&a.max.to_le_bytes())?;
            out.write_all(&(a.count as u64).to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let magic = lines.next().unwrap_or("");
        if magic != TEXT_MAGIC {
            return Err(Error::invalid(format!(
                "bad grid header `{magic}` (expected `{TEXT_MAGIC}`)"
            )));
        }
        let dim_line = lines
            .next()
            .ok_or_else(|| Error::invalid("missing dim line"))?;
        let dim: usize = dim_line
            .strip_prefix("dim ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::invalid(format!("bad dim line `{dim_line}`")))?;
        let mut axes = Vec::with_capacity(dim);
        for _ in 0..dim {
            let l = lines
                .next()
                .ok_or_else(|| Error::invalid("missing axis line"))?;
            let rest = l
                .strip_prefix("axis ")
                .ok_or_else(|| Error::invalid(format!("bad axis line `{l}`")))?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::invalid(format!("bad axis line `{l}`")));
            }
            axes.push(AxisSpec {
                min: parse_num(parts[0])?,
                max: parse_num(parts[1])?,
                count: parts[2]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad axis count `{}`", parts[2])))?,
            });
        }
        match lines.next() {
            Some("values") => {}
            other => {
                return Err(Error::invalid(format!(
                    "expected `values` line, got {other:?}"
                )))
            }
        }
        let mut values = Vec::new();
        for l in lines {
            for tok in l.split_whitespace() {
                values.push(parse_num(tok)?);
            }
        }
        SampledGrid::new(axes, values)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        let mut cur = &bytes[8..];
        let dim = read_u32(&mut cur)? as usize;
        if dim < 2 || dim > 16 {
            return Err(Error::invalid(format!("binary grid dim {dim} out of range")));
        }
        let mut axes = Vec::with_capacity(dim);
        for _ in 0..dim {
            let min = read_f64(&mut cur)?;
            let max = read_f64(&mut cur)?;
            let count = read_u64(&mut cur)? as usize;
            axes.push(AxisSpec { min, max, count });
        }
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            values.push(read_f64(&mut cur)?);
        }
        SampledGrid::new(axes, values)
    }
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_num(tok: &str) -> Result<f64> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => tok
            .parse()
            .map_err(|_| Error::invalid(format!("bad number `{tok}`"))),
    }
}

fn read_u32(cur: &mut &[u8]) -> Result<u32> {
    let mut buf = [0u8; 4];
    cur.read_exact(&mut buf)
        .map_err(|_| Error::invalid("binary grid truncated"))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(cur: &mut &[u8]) -> Result<u64> {
    let mut buf = [0u8; 8];
    cur.read_exact(&mut buf)
        .map_err(|_| Error::invalid("binary grid truncated"))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(cur: &mut &[u8]) -> Result<f64> {
    let mut buf = [0u8; 8];
    cur.read_exact(&mut buf)
        .map_err(|_| Error::invalid("binary grid truncated"))?;
    Ok(f64::from_le_bytes(buf))
}

/// Field backed by a sampled grid. Points inside the support but outside the
/// node hull take `outside` when given, otherwise evaluation errors.
pub struct GridField {
    grid: SampledGrid,
    support: Domain,
    outside: Option<f64>,
}

impl GridField {
    pub fn new(grid: SampledGrid, support: Option<Domain>, outside: Option<f64>) -> Result<Self> {
        let support = support.unwrap_or_else(|| grid.bounds());
        support.validate()?;
        if support.dim() != grid.dim() {
            return Err(Error::invalid("grid support dimension mismatch"));
        }
        if let Some(v) = outside {
            if v.is_nan() || v < 0.0 {
                return Err(Error::invalid("grid outside value must be >= 0"));
            }
        }
        Ok(GridField {
            grid,
            support,
            outside,
        })
    }

    pub fn grid(&self) -> &SampledGrid {
        &self.grid
    }
}

impl super::Field for GridField {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn support(&self) -> &Domain {
        &self.support
    }

    fn eval(&self, x: &[f64]) -> Result<ExtendedNonneg> {
        if !self.support.contains(x) {
            return Ok(ExtendedNonneg::ZERO);
        }
        match self.grid.interpolate(x) {
            Some(v) => Ok(ExtendedNonneg::new_unchecked(v)),
            None => match self.outside {
                Some(v) => Ok(ExtendedNonneg::new_unchecked(v)),
                None => Err(Error::invalid(format!(
                    "grid lookup outside grid bounds at {x:?} with no default"
                ))),
            },
        }
    }

    fn describe(&self) -> String {
        let shape: Vec<String> = self.grid.axes().iter().map(|a| a.count.to_string()).collect();
        format!(
            "grid(shape={}, support={}, outside={:?})",
            shape.join("x"),
            self.support.describe(),
            self.outside
        )
    }
}

/// Samples a function onto a grid; test and scenario helper.
pub fn sample_grid<F>(axes: Vec<AxisSpec>, mut f: F) -> Result<SampledGrid>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let total: usize = axes.iter().map(|a| a.count).product();
    let mut values = Vec::with_capacity(total);
    let mut x = vec![0.0; n];
    for _ in 0..total {
        for d in 0..n {
            let a = &axes[d];
            x[d] = a.min + (a.max - a.min) * idx[d] as f64 / (a.count - 1) as f64;
        }
        values.push(f(&x));
        // odometer, last axis fastest
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].count {
                break;
            }
            idx[d] = 0;
        }
    }
    SampledGrid::new(axes, values)
}

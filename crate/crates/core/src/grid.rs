//! Rectangular `(y, z)` grids and the sampled joint CDF/PDF.

use std::hash::Hasher;
use std::io::{Read, Write};
use std::sync::Arc;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::WedgeLattice;
use crate::models::{ContinuousModel, Variable};
use crate::quadrature::cubic_stencil;

/// Minimum number of nodes per axis.
pub const MIN_POINTS: usize = 16;

/// Uniform grid on `[0, y_max] x [0, z_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub y_max: f64,
    pub z_max: f64,
    pub n_y: usize,
    pub n_z: usize,
}

impl GridSpec {
    pub fn new(y_max: f64, z_max: f64, n_y: usize, n_z: usize) -> Result<Self> {
        let spec = Self {
            y_max,
            z_max,
            n_y,
            n_z,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y < MIN_POINTS || self.n_z < MIN_POINTS {
            return Err(Error::GridTooCoarse {
                n_y: self.n_y,
                n_z: self.n_z,
            });
        }
        if !(self.y_max.is_finite() && self.y_max > 0.0 && self.z_max.is_finite() && self.z_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extents must be positive and finite, got y_max = {}, z_max = {}",
                self.y_max, self.z_max
            )));
        }
        if self.y_max < self.z_max {
            return Err(Error::InvalidGrid(format!(
                "y_max ({}) must be at least z_max ({})",
                self.y_max, self.z_max
            )));
        }
        Ok(())
    }

    /// Grid covering all but `eps` of the mass of `models`: `y_max` is the sum
    /// and `z_max` the largest of the per-model `eps / n` quantiles.
    pub fn covering(models: &[ContinuousModel], eps: f64, n_y: usize, n_z: usize) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyModels);
        }
        let per = eps / models.len() as f64;
        let mut y_max = 0.0;
        let mut z_max: f64 = 0.0;
        for m in models {
            let q = m.support_quantile(per)?;
            y_max += q.max(0.0);
            z_max = z_max.max(q);
        }
        Self::new(y_max, z_max, n_y, n_z)
    }

    /// As [`GridSpec::covering`] for a mixed list. Discrete variables use the
    /// smallest value whose upper tail is at most `eps / n`.
    pub fn covering_variables(vars: &[Variable], eps: f64, n_y: usize, n_z: usize) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::EmptyModels);
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
        let per = eps / vars.len() as f64;
        let mut y_max = 0.0;
        let mut z_max: f64 = 0.0;
        for v in vars {
            let q = match v {
                Variable::Continuous(m) => m.support_quantile(per)?,
                Variable::Discrete(m) => m.quantile_from_uniform(1.0 - per).max(1) as f64,
            };
            y_max += q.max(0.0);
            z_max = z_max.max(q);
        }
        Self::new(y_max, z_max, n_y, n_z)
    }

    pub fn h_y(&self) -> f64 {
        self.y_max / (self.n_y - 1) as f64
    }

    pub fn h_z(&self) -> f64 {
        self.z_max / (self.n_z - 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 * self.h_y()
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h_z()
    }

    pub(crate) fn covers(&self, y: f64, z: f64) -> bool {
        let slack = 1e-12;
        y >= 0.0 && z >= 0.0 && y <= self.y_max * (1.0 + slack) && z <= self.z_max * (1.0 + slack)
    }
}

/// Axes along which a CDF grid jumps at integer coordinates, as it does
/// when discrete variables take part.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegerJumps {
    #[default]
    None,
    Max,
    SumAndMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Cdf,
    Pdf,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::Cdf => "CDF",
            GridKind::Pdf => "PDF",
        }
    }
}

/// Values of `G_n` or `g_n` at the nodes of a [`GridSpec`].
///
/// PDF grids produced by the engines keep the wedge lattice they were
/// resampled from; pointwise queries and derived integrals use it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "Envelope", try_from = "Envelope")]
pub struct GridFunction2D {
    spec: GridSpec,
    kind: GridKind,
    n: usize,
    values: Vec<f64>,
    model_fingerprint: String,
    jumps: IntegerJumps,
    lattice: Option<Arc<WedgeLattice>>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    spec: GridSpec,
    kind: GridKind,
    n: usize,
    model_fingerprint: String,
    #[serde(default, skip_serializing_if = "is_smooth")]
    jumps: IntegerJumps,
    values: Vec<Vec<f64>>,
}

fn is_smooth(j: &IntegerJumps) -> bool {
    *j == IntegerJumps::None
}

impl From<GridFunction2D> for Envelope {
    fn from(g: GridFunction2D) -> Self {
        let values = g.values.chunks(g.spec.n_z).map(|r| r.to_vec()).collect();
        Envelope {
            spec: g.spec,
            kind: g.kind,
            n: g.n,
            model_fingerprint: g.model_fingerprint,
            jumps: g.jumps,
            values,
        }
    }
}

impl TryFrom<Envelope> for GridFunction2D {
    type Error = Error;

    fn try_from(e: Envelope) -> Result<Self> {
        e.spec.validate()?;
        if e.values.len() != e.spec.n_y || e.values.iter().any(|r| r.len() != e.spec.n_z) {
            return Err(Error::InvalidGrid(format!(
                "values must be {} rows of {} entries",
                e.spec.n_y, e.spec.n_z
            )));
        }
        if e.n == 0 {
            return Err(Error::InvalidGrid("n must be at least 1".into()));
        }
        Ok(GridFunction2D {
            spec: e.spec,
            kind: e.kind,
            n: e.n,
            values: e.values.into_iter().flatten().collect(),
            model_fingerprint: e.model_fingerprint,
            jumps: e.jumps,
            lattice: None,
        })
    }
}

impl GridFunction2D {
    pub(crate) fn from_parts(
        spec: GridSpec,
        kind: GridKind,
        n: usize,
        values: Vec<f64>,
        model_fingerprint: String,
        lattice: Option<Arc<WedgeLattice>>,
    ) -> Self {
        debug_assert_eq!(values.len(), spec.n_y * spec.n_z);
        Self {
            spec,
            kind,
            n,
            values,
            model_fingerprint,
            jumps: IntegerJumps::None,
            lattice,
        }
    }

    pub(crate) fn with_jumps(mut self, jumps: IntegerJumps) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn jumps(&self) -> IntegerJumps {
        self.jumps
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model_fingerprint(&self) -> &str {
        &self.model_fingerprint
    }

    /// Row-major values, index `i_y * n_z + i_z`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i_y: usize, i_z: usize) -> f64 {
        self.values[i_y * self.spec.n_z + i_z]
    }

    /// Whether the node lies inside the closed domain `z <= y <= n z`.
    pub fn in_domain(&self, i_y: usize, i_z: usize) -> bool {
        let (y, z) = (self.spec.y(i_y), self.spec.z(i_z));
        in_wedge(y, z, self.n)
    }

    pub(crate) fn require(&self, kind: GridKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.name(),
                got: self.kind.name(),
            });
        }
        Ok(())
    }

    /// Wedge lattice of a PDF grid, rebuilt from the node values when the
    /// grid did not come straight from an engine.
    pub fn wedge(&self) -> Result<Arc<WedgeLattice>> {
        self.require(GridKind::Pdf)?;
        if self.n < 2 {
            return Err(Error::InvalidArgument(
                "a single variable has no joint density on the plane".into(),
            ));
        }
        Ok(match &self.lattice {
            Some(l) => Arc::clone(l),
            None => Arc::new(WedgeLattice::from_grid(self)),
        })
    }

    /// Interpolated value at `(y, z)`.
    ///
    /// CDF grids use bicubic interpolation on the nodes after replacing `z`
    /// by `min(y, z)`. PDF grids evaluate the wedge lattice and are zero
    /// outside the domain.
    pub fn eval(&self, y: f64, z: f64) -> Result<f64> {
        match self.kind {
            GridKind::Cdf => {
                let z = z.min(y);
                if y < 0.0 || z < 0.0 {
                    return Ok(0.0);
                }
                if !self.spec.covers(y, z) {
                    return Err(Error::OutOfCoverage { y, z });
                }
                let (n_y, n_z) = (self.spec.n_y, self.spec.n_z);
                let (sy, wy) = axis_stencil(y, self.spec.h_y(), n_y, self.jumps == IntegerJumps::SumAndMax);
                let (sz, wz) = axis_stencil(z, self.spec.h_z(), n_z, self.jumps != IntegerJumps::None);
                let mut acc = 0.0;
                for (a, wa) in wy.iter().enumerate().filter(|p| *p.1 != 0.0) {
                    for (b, wb) in wz.iter().enumerate().filter(|p| *p.1 != 0.0) {
                        acc += wa * wb * self.values[(sy + a) * n_z + sz + b];
                    }
                }
                Ok(acc.clamp(0.0, 1.0))
            }
            GridKind::Pdf => {
                if !self.spec.covers(y, z) {
                    return Err(Error::OutOfCoverage { y, z });
                }
                if !in_wedge(y, z, self.n) {
                    return Ok(0.0);
                }
                Ok(self.wedge()?.eval(y, z).max(0.0))
            }
        }
    }

    /// Long-format CSV with header `y,z,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["y", "z", "value"])?;
        for i in 0..self.spec.n_y {
            for j in 0..self.spec.n_z {
                out.serialize((self.spec.y(i), self.spec.z(j), self.get(i, j)))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

// Interpolation stencil along one axis. With `steps` the stencil stays inside
// the unit cell [k, k + 1) holding x, so jumps at integers are not smeared.
fn axis_stencil(x: f64, h: f64, n: usize, steps: bool) -> (usize, [f64; 4]) {
    let u = (x / h).min((n - 1) as f64);
    if !steps {
        return cubic_stencil(u, 0, n - 1);
    }
    const SNAP: f64 = 1e-9;
    let k = (x + SNAP).floor();
    let lo = ((k / h) - SNAP).ceil().max(0.0) as usize;
    let hi = ((((k + 1.0) / h) - SNAP).ceil() as usize).saturating_sub(1).min(n - 1);
    if hi < lo {
        // no node in this cell: the last node below carries the value
        let i = ((u + SNAP).floor() as usize).min(n - 1);
        return (i, [1.0, 0.0, 0.0, 0.0]);
    }
    match hi - lo {
        0 => (lo, [1.0, 0.0, 0.0, 0.0]),
        1 | 2 => {
            let i = (u.floor() as usize).clamp(lo, hi - 1);
            let t = u - i as f64;
            (i, [1.0 - t, t, 0.0, 0.0])
        }
        _ => cubic_stencil(u, lo, hi),
    }
}

pub(crate) fn in_wedge(y: f64, z: f64, n: usize) -> bool {
    let tol = 1e-12 * y.abs().max(1.0);
    z >= 0.0 && y >= z - tol && y <= n as f64 * z + tol
}

/// 64-bit FNV-1a hash of the canonical model texts, as 16 hex digits.
pub fn fingerprint<I, S>(parts: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut h = FnvHasher::default();
    for p in parts {
        h.write(p.as_ref().as_bytes());
        h.write(b"\n");
    }
    format!("{:016x}", h.finish())
}

pub(crate) fn fingerprint_continuous(models: &[ContinuousModel]) -> String {
    fingerprint(models.iter().map(|m| m.canonical()))
}

pub(crate) fn fingerprint_variables(vars: &[Variable]) -> String {
    fingerprint(vars.iter().map(|v| v.canonical()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(matches!(
            GridSpec::new(1.0, 1.0, 15, 16),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(GridSpec::new(1.0, 2.0, 16, 16).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0, 16, 16).is_err());
        let s = GridSpec::new(3.0, 1.0, 31, 11 + 5).unwrap();
        assert!((s.h_y() - 0.1).abs() < 1e-15);
        assert_eq!(s.z(15), 1.0);
    }

    #[test]
    fn fingerprint_is_fnv1a() {
        // FNV-1a of "a\n"
        let mut h: u64 = 0xcbf29ce484222325;
        for b in b"a\n" {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        assert_eq!(fingerprint(["a"]), format!("{h:016x}"));
        assert_ne!(fingerprint(["a", "b"]), fingerprint(["b", "a"]));
    }

    #[test]
    fn json_round_trip_keeps_values() {
        let spec = GridSpec::new(2.0, 1.0, 16, 16).unwrap();
        let values: Vec<f64> = (0..256).map(|k| k as f64 / 256.0).collect();
        let g = GridFunction2D::from_parts(spec, GridKind::Cdf, 2, values, "x".into(), None);
        let back = GridFunction2D::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(back.spec(), g.spec());
        assert_eq!(back.model_fingerprint(), "x");
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("y,z,value\n0.0,0.0,0.0\n"));
        assert_eq!(text.lines().count(), 257);
    }
}

//! Domains, piecewise-constant grid functions and cell-weighted Lp norms.
//!
//! A [`GridFn`] stores one value per cell. All norms weight each cell by its
//! measure, so refining the grid of a fixed function leaves norms unchanged.
//! Two-dimensional values are stored row-major: cell `(ix, iy)` lives at
//! `iy * nx + ix`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math::{abs_pow, powf};
use crate::{Error, Result};

/// Geometry of a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Uniform cells on `(a, b)`.
    Interval { a: f64, b: f64, n_cells: usize },
    /// 1D cells delimited by explicit strictly increasing edges. Used to build
    /// grids whose cell boundaries sit exactly on prescribed breakpoints.
    Breakpoints { edges: Vec<f64> },
    /// Uniform `nx * ny` cells on a rectangle.
    Rect { x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize },
}

/// Bounded interval or rectangle with a cell structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
}

fn finite_range(lo: f64, hi: f64) -> bool {
    lo.is_finite() && hi.is_finite() && lo < hi && hi - lo > 0.0
}

impl Domain {
    pub fn interval(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !finite_range(a, b) {
            return Err(Error::InvalidDomain("interval needs finite a < b"));
        }
        if n_cells == 0 {
            return Err(Error::InvalidDomain("cell count must be positive"));
        }
        if !((b - a) / n_cells as f64 > 0.0) {
            return Err(Error::InvalidDomain("cell measure underflows"));
        }
        Ok(Domain { shape: Shape::Interval { a, b, n_cells } })
    }

    pub fn breakpoints(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidDomain("need at least two edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidDomain("edges must be finite"));
        }
        if edges.windows(2).any(|w| !(w[1] - w[0] > 0.0)) {
            return Err(Error::InvalidDomain("edges must be strictly increasing"));
        }
        Ok(Domain { shape: Shape::Breakpoints { edges } })
    }

    pub fn rect(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if !finite_range(x_range.0, x_range.1) || !finite_range(y_range.0, y_range.1) {
            return Err(Error::InvalidDomain("rectangle ranges must be finite and nonempty"));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidDomain("cell counts must be positive"));
        }
        let d = Domain { shape: Shape::Rect { x_range, y_range, nx, ny } };
        if !(d.cell_measure(0) > 0.0) {
            return Err(Error::InvalidDomain("cell measure underflows"));
        }
        Ok(d)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Rect { .. } => 2,
            _ => 1,
        }
    }

    pub fn n_cells(&self) -> usize {
        match &self.shape {
            Shape::Interval { n_cells, .. } => *n_cells,
            Shape::Breakpoints { edges } => edges.len() - 1,
            Shape::Rect { nx, ny, .. } => nx * ny,
        }
    }

    /// `(nx, ny)` for rectangles, `(n, 1)` in 1D.
    pub fn extents(&self) -> (usize, usize) {
        match self.shape {
            Shape::Rect { nx, ny, .. } => (nx, ny),
            _ => (self.n_cells(), 1),
        }
    }

    /// Total measure `|Omega|`.
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b, .. } => b - a,
            Shape::Breakpoints { edges } => edges[edges.len() - 1] - edges[0],
            Shape::Rect { x_range, y_range, .. } => (x_range.1 - x_range.0) * (y_range.1 - y_range.0),
        }
    }

    pub fn cell_measure(&self, i: usize) -> f64 {
        match &self.shape {
            Shape::Interval { a, b, n_cells } => (b - a) / *n_cells as f64,
            Shape::Breakpoints { edges } => edges[i + 1] - edges[i],
            Shape::Rect { .. } => {
                let (dx, dy) = self.spacing();
                dx * dy
            }
        }
    }

    pub fn cell_measures(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|i| self.cell_measure(i)).collect()
    }

    /// Cell widths `(dx, dy)` of a uniform grid; `dy = 1` in 1D. Breakpoint
    /// grids report their mean width.
    pub fn spacing(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Interval { a, b, n_cells } => ((b - a) / *n_cells as f64, 1.0),
            Shape::Breakpoints { edges } => {
                ((edges[edges.len() - 1] - edges[0]) / (edges.len() - 1) as f64, 1.0)
            }
            Shape::Rect { x_range, y_range, nx, ny } => {
                ((x_range.1 - x_range.0) / *nx as f64, (y_range.1 - y_range.0) / *ny as f64)
            }
        }
    }

    /// Position of edge `k` (`0..=n_cells`) of a 1D grid.
    pub fn edge(&self, k: usize) -> f64 {
        match &self.shape {
            Shape::Interval { a, b, n_cells } => {
                if k == *n_cells {
                    *b
                } else {
                    a + (b - a) * (k as f64 / *n_cells as f64)
                }
            }
            Shape::Breakpoints { edges } => edges[k],
            Shape::Rect { .. } => panic!("edge() is only defined for 1D domains"),
        }
    }

    /// Cell centers; `(x, y)` pairs in row-major order (y is `0.0` in 1D).
    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Rect { x_range, y_range, nx, ny } => {
                let (dx, dy) = self.spacing();
                let mut out = Vec::with_capacity(nx * ny);
                for iy in 0..*ny {
                    for ix in 0..*nx {
                        out.push((x_range.0 + (ix as f64 + 0.5) * dx, y_range.0 + (iy as f64 + 0.5) * dy));
                    }
                }
                out
            }
            _ => (0..self.n_cells()).map(|i| (0.5 * (self.edge(i) + self.edge(i + 1)), 0.0)).collect(),
        }
    }

    /// Interior faces as `(left_or_lower_cell, right_or_upper_cell, face_measure)`.
    /// 1D interfaces have unit measure; 2D faces carry their length.
    pub fn faces(&self) -> Vec<(usize, usize, f64)> {
        match self.shape {
            Shape::Rect { nx, ny, .. } => {
                let (dx, dy) = self.spacing();
                let mut out = Vec::with_capacity(2 * nx * ny);
                for iy in 0..ny {
                    for ix in 0..nx {
                        let i = iy * nx + ix;
                        if ix + 1 < nx {
                            out.push((i, i + 1, dy));
                        }
                        if iy + 1 < ny {
                            out.push((i, i + nx, dx));
                        }
                    }
                }
                out
            }
            _ => (1..self.n_cells()).map(|i| (i - 1, i, 1.0)).collect(),
        }
    }

    /// Same domain with every cell split into `factor` (per axis) equal cells.
    pub fn refine(&self, factor: usize) -> Result<Domain> {
        if factor == 0 {
            return Err(Error::InvalidDomain("refinement factor must be positive"));
        }
        match &self.shape {
            Shape::Interval { a, b, n_cells } => Domain::interval(*a, *b, n_cells * factor),
            Shape::Breakpoints { edges } => {
                let mut out = Vec::with_capacity((edges.len() - 1) * factor + 1);
                for w in edges.windows(2) {
                    for j in 0..factor {
                        out.push(w[0] + (w[1] - w[0]) * (j as f64 / factor as f64));
                    }
                }
                out.push(edges[edges.len() - 1]);
                Domain::breakpoints(out)
            }
            Shape::Rect { x_range, y_range, nx, ny } => {
                Domain::rect(*x_range, *y_range, nx * factor, ny * factor)
            }
        }
    }
}

/// Exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LpExponent(f64);

impl LpExponent {
    pub const ONE: LpExponent = LpExponent(1.0);
    pub const TWO: LpExponent = LpExponent(2.0);
    pub const INFINITY: LpExponent = LpExponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(LpExponent(p))
        } else {
            Err(Error::InvalidExponent)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> LpExponent {
        if self.0 == 1.0 {
            LpExponent::INFINITY
        } else if self.is_infinite() {
            LpExponent::ONE
        } else {
            LpExponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn recip(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl TryFrom<f64> for LpExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        LpExponent::new(p)
    }
}

impl From<LpExponent> for f64 {
    fn from(p: LpExponent) -> f64 {
        p.0
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "INF" => Ok(LpExponent::INFINITY),
            t => t.parse::<f64>().map_err(|_| Error::InvalidExponent).and_then(LpExponent::new),
        }
    }
}

/// Piecewise-constant function: one finite value per cell of a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(domain: impl Into<Arc<Domain>>, values: Vec<f64>) -> Result<Self> {
        let domain = domain.into();
        let expected = domain.n_cells();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(GridFn { domain, values })
    }

    pub fn constant(domain: impl Into<Arc<Domain>>, c: f64) -> Result<Self> {
        let domain = domain.into();
        let n = domain.n_cells();
        GridFn::new(domain, alloc::vec![c; n])
    }

    /// Samples `f(x, y)` at cell centers (`y = 0` in 1D).
    pub fn from_fn(domain: impl Into<Arc<Domain>>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let domain = domain.into();
        let values = domain.cell_centers().into_iter().map(|(x, y)| f(x, y)).collect();
        GridFn::new(domain, values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shared_domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_compatible(&self, other: &GridFn) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain
    }

    pub(crate) fn ensure_compatible(&self, other: &GridFn) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleDomains)
        }
    }

    pub(crate) fn ensure_1d(&self) -> Result<()> {
        match self.dim() {
            1 => Ok(()),
            found => Err(Error::WrongDimension { expected: 1, found }),
        }
    }

    /// Same domain, new values. Values are not checked for finiteness.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> GridFn {
        debug_assert_eq!(values.len(), self.values.len());
        GridFn { domain: self.domain.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFn> {
        GridFn::new(self.domain.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.zip(other, |a, b| a - b)
    }

    pub fn zip(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> Result<GridFn> {
        self.ensure_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridFn::new(self.domain.clone(), values)
    }

    /// The same function on a grid refined by `factor` per axis.
    pub fn refine(&self, factor: usize) -> Result<GridFn> {
        let fine = self.domain.refine(factor)?;
        let values = match *self.domain.shape() {
            Shape::Rect { nx, ny, .. } => {
                let mut out = Vec::with_capacity(self.values.len() * factor * factor);
                for iy in 0..ny * factor {
                    for ix in 0..nx * factor {
                        out.push(self.values[(iy / factor) * nx + ix / factor]);
                    }
                }
                out
            }
            _ => self.values.iter().flat_map(|&v| core::iter::repeat_n(v, factor)).collect(),
        };
        GridFn::new(fine, values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lp_norm(&self, p: LpExponent) -> f64 {
        lp_norm(self, p)
    }
}

/// Cell-measure weighted `(sum_i |values_i|^p |cell_i|)^(1/p)` of a raw vector.
pub(crate) fn weighted_norm(domain: &Domain, values: impl Iterator<Item = f64>, p: LpExponent) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, |m, v| m.max(v.abs()));
    }
    let pv = p.get();
    let mut s = 0.0;
    for (i, v) in values.enumerate() {
        s += abs_pow(v, pv) * domain.cell_measure(i);
    }
    if pv == 1.0 {
        s
    } else if pv == 2.0 {
        crate::math::sqrt(s)
    } else {
        powf(s, 1.0 / pv)
    }
}

/// Discrete Lp norm; `p = inf` is the largest absolute cell value.
pub fn lp_norm(u: &GridFn, p: LpExponent) -> f64 {
    weighted_norm(&u.domain, u.values.iter().copied(), p)
}

/// `lp_norm(u - v, p)`.
pub fn lp_distance(u: &GridFn, v: &GridFn, p: LpExponent) -> Result<f64> {
    u.ensure_compatible(v)?;
    Ok(weighted_norm(&u.domain, u.values.iter().zip(&v.values).map(|(a, b)| a - b), p))
}

/// `C = |Omega|^(1 - 1/p)`, the Hölder constant with `||f||_1 <= C ||f||_p`.
pub fn embedding_constant(domain: &Domain, p: LpExponent) -> f64 {
    let e = 1.0 - p.recip();
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        domain.measure()
    } else {
        powf(domain.measure(), e)
    }
}

//! Radial step examples and control families.
//!
//! The radial example uses radii and heights
//!
//! ```text
//! r_k = r0 (k + 1)^(-1/(2N)),   beta_k = (k + 1)^(-1/2)
//! u   = sum_k beta_k 1{ r_{2k+1} <= |x| <= r_{2k} }
//! ```
//!
//! and its truncations `u_n` (terms `k <= n`). In 1D (`N = 1`) on an aligned
//! grid whose edges are exactly the radii, `var u_n = 2 sum_{k<=n} beta_k`
//! holds to rounding. `u` itself is stored as `u_T` with `T = n_terms`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::compactness::FnFamily;
use crate::grid::{lp_distance, Domain, GridFn, LpExponent};
use crate::math::{powf, sin, sqrt};
use crate::{Error, Result};

/// How the grid for a radial example is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RadialGrid {
    /// 1D grid on `(0, 2 r0)` whose edges are `0, r_{2T+1}, ..., r_0, 2 r0`.
    Aligned,
    /// 1D uniform grid on `(0, 2 r0)`; each radius snaps to its nearest edge.
    Snapped { n_cells: usize },
    /// 2D uniform `resolution^2` grid on `[-2 r0, 2 r0]^2`, sampled at cell centers.
    Sampled { resolution: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialExampleSpec {
    /// Space dimension `N`, 1 or 2.
    pub dim: usize,
    pub r0: f64,
    /// Number of terms `T`; `u` is stored as `u_T`.
    pub n_terms: usize,
    pub grid: RadialGrid,
}

impl RadialExampleSpec {
    /// 1D example on `(0, 1)` with an aligned grid.
    pub fn aligned(n_terms: usize) -> Self {
        RadialExampleSpec { dim: 1, r0: 0.5, n_terms, grid: RadialGrid::Aligned }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(Error::InvalidConfig("r0 must be positive"));
        }
        if self.n_terms == 0 {
            return Err(Error::InvalidConfig("n_terms must be positive"));
        }
        match (self.dim, self.grid) {
            (1, RadialGrid::Aligned) | (1, RadialGrid::Snapped { .. }) => Ok(()),
            (2, RadialGrid::Sampled { resolution }) if resolution > 0 => Ok(()),
            (1 | 2, _) => Err(Error::InvalidConfig("grid kind does not fit the dimension")),
            _ => Err(Error::InvalidConfig("dimension must be 1 or 2")),
        }
    }
}

/// `r_k = r0 (k + 1)^(-1/(2N))`.
pub fn radius(k: usize, dim: usize, r0: f64) -> f64 {
    let base = (k + 1) as f64;
    match dim {
        1 => r0 / sqrt(base),
        2 => r0 / sqrt(sqrt(base)),
        _ => r0 * powf(base, -1.0 / (2 * dim) as f64),
    }
}

/// `beta_k = (k + 1)^(-1/2)`.
pub fn beta(k: usize) -> f64 {
    1.0 / sqrt((k + 1) as f64)
}

/// `2 sum_{k=0}^{n} beta_k`, the 1D variation of `u_n`.
pub fn closed_form_variation(n: usize) -> f64 {
    2.0 * (0..=n).map(beta).sum::<f64>()
}

/// A radial example realized on a grid: each cell knows which plateau
/// `I_k` (if any) it belongs to.
#[derive(Debug, Clone)]
pub struct RadialExample {
    spec: RadialExampleSpec,
    domain: Arc<Domain>,
    plateau: Vec<Option<usize>>,
    snap_error: f64,
}

impl RadialExample {
    pub fn new(spec: RadialExampleSpec) -> Result<Self> {
        spec.validate()?;
        let t = spec.n_terms;
        let radii: Vec<f64> = (0..=2 * t + 1).map(|k| radius(k, spec.dim, spec.r0)).collect();
        let outer = 2.0 * spec.r0;
        match spec.grid {
            RadialGrid::Aligned => {
                let mut edges = Vec::with_capacity(2 * t + 4);
                edges.push(0.0);
                edges.extend(radii.iter().rev());
                edges.push(outer);
                let domain = Domain::breakpoints(edges).map_err(|_| Error::ResolutionTooCoarse)?;
                // cell 0 is (0, r_{2T+1}); cell j >= 1 is (r_{2T+2-j}, r_{2T+1-j})
                let plateau = (0..domain.n_cells())
                    .map(|j| {
                        let upper = (2 * t + 2).checked_sub(j)?.checked_sub(1)?;
                        (j >= 1 && upper % 2 == 0).then_some(upper / 2)
                    })
                    .collect();
                Ok(RadialExample { spec, domain: Arc::new(domain), plateau, snap_error: 0.0 })
            }
            RadialGrid::Snapped { n_cells } => {
                let domain = Domain::interval(0.0, outer, n_cells)?;
                let h = outer / n_cells as f64;
                let mut snapped = Vec::with_capacity(radii.len());
                let mut snap_error: f64 = 0.0;
                for &r in &radii {
                    let j = libm::round(r / h) as usize;
                    snap_error = snap_error.max((domain.edge(j) - r).abs());
                    snapped.push(j);
                }
                // radii decrease with k; snapped edges must stay distinct and positive
                if snapped.windows(2).any(|w| w[1] >= w[0]) || snapped[2 * t + 1] == 0 {
                    return Err(Error::ResolutionTooCoarse);
                }
                let mut plateau = alloc::vec![None; n_cells];
                for k in 0..=t {
                    for cell in plateau.iter_mut().take(snapped[2 * k]).skip(snapped[2 * k + 1]) {
                        *cell = Some(k);
                    }
                }
                Ok(RadialExample { spec, domain: Arc::new(domain), plateau, snap_error })
            }
            RadialGrid::Sampled { resolution } => {
                let domain = Domain::rect((-outer, outer), (-outer, outer), resolution, resolution)?;
                let plateau = domain
                    .cell_centers()
                    .into_iter()
                    .map(|(x, y)| {
                        let r = sqrt(x * x + y * y);
                        (0..=t).find(|&k| radii[2 * k + 1] <= r && r <= radii[2 * k])
                    })
                    .collect();
                Ok(RadialExample { spec, domain: Arc::new(domain), plateau, snap_error: 0.0 })
            }
        }
    }

    pub fn spec(&self) -> &RadialExampleSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// Largest distance between a radius and its grid edge; zero for
    /// aligned and sampled grids.
    pub fn snap_error(&self) -> f64 {
        self.snap_error
    }

    /// Truncation `u_n` (plateaus `k <= n`).
    pub fn un(&self, n: usize) -> Result<GridFn> {
        if n > self.spec.n_terms {
            return Err(Error::ResolutionTooCoarse);
        }
        Ok(self.truncation(n))
    }

    fn truncation(&self, n: usize) -> GridFn {
        let values = self
            .plateau
            .iter()
            .map(|k| match k {
                Some(k) if *k <= n => beta(*k),
                _ => 0.0,
            })
            .collect();
        GridFn::new(self.domain.clone(), values).expect("plateau heights are finite")
    }

    /// `u`, stored as `u_T`.
    pub fn u(&self) -> GridFn {
        self.truncation(self.spec.n_terms)
    }

    /// Smallest `m` with `||u - u_m||_p <= eps` on this grid.
    pub fn m_eps(&self, eps: f64, p: LpExponent) -> Result<usize> {
        if !(eps > 0.0) {
            return Err(Error::NonpositiveEps);
        }
        let u = self.u();
        for m in 0..self.spec.n_terms {
            if lp_distance(&u, &self.truncation(m), p)? <= eps {
                return Ok(m);
            }
        }
        Ok(self.spec.n_terms)
    }

    /// `n -> u_n` for `n = 1..=n_terms`, with known limit `u`.
    pub fn family(&self) -> FnFamily {
        let this = self.clone();
        let t = self.spec.n_terms;
        let fam = FnFamily::from_members(
            (1..=t).map(|n| this.truncation(n)).collect(),
            format!("radial truncations u_n, N = {}, n <= {t}", self.spec.dim),
        )
        .expect("truncations share one domain");
        fam.with_known_limit(self.u()).expect("limit lives on the family domain")
    }
}

pub fn build_radial_u(spec: &RadialExampleSpec) -> Result<GridFn> {
    Ok(RadialExample::new(*spec)?.u())
}

pub fn build_radial_un(spec: &RadialExampleSpec, n: usize) -> Result<GridFn> {
    RadialExample::new(*spec)?.un(n)
}

pub fn build_example2_family(spec: &RadialExampleSpec) -> Result<FnFamily> {
    Ok(RadialExample::new(*spec)?.family())
}

/// A named control family with the outcome the extraction harnesses should show.
#[derive(Debug, Clone)]
pub struct StressFamily {
    pub name: &'static str,
    pub family: FnFamily,
    pub expected: &'static str,
}

/// `u_n = c` for all `n`.
pub fn constant_family(domain: Arc<Domain>, c: f64) -> Result<FnFamily> {
    let u = GridFn::constant(domain.clone(), c)?;
    let limit = u.clone();
    FnFamily::new(domain, format!("constant {c}"), move |_| u.clone()).with_known_limit(limit)
}

/// `u_n = f + g / n`, converging to `f`.
pub fn tail_family(f: GridFn, g: GridFn) -> Result<FnFamily> {
    f.ensure_compatible(&g)?;
    let domain = f.shared_domain().clone();
    let limit = f.clone();
    FnFamily::new(domain, String::from("f + g / n"), move |n| {
        f.zip(&g, |a, b| a + b / n as f64).expect("f and g share a domain")
    })
    .with_known_limit(limit)
}

/// `u_n = f` for odd `n`, `g` for even `n`.
pub fn alternating_family(f: GridFn, g: GridFn) -> Result<FnFamily> {
    f.ensure_compatible(&g)?;
    let domain = f.shared_domain().clone();
    Ok(FnFamily::new(domain, String::from("alternating f, g"), move |n| {
        if n % 2 == 1 {
            f.clone()
        } else {
            g.clone()
        }
    }))
}

/// `u_n = f + h / n` for odd `n` and `g + h / n` for even `n`: two cluster
/// points visited in turn, `f` first.
pub fn two_cluster_family(f: GridFn, g: GridFn, h: GridFn) -> Result<FnFamily> {
    f.ensure_compatible(&g)?;
    f.ensure_compatible(&h)?;
    let domain = f.shared_domain().clone();
    Ok(FnFamily::new(domain, String::from("two clusters f, g"), move |n| {
        let base = if n % 2 == 1 { &f } else { &g };
        base.zip(&h, |a, b| a + b / n as f64).expect("members share a domain")
    }))
}

/// `u_n(x) = sin(2 pi n x)` on `(0, 1)` sampled at cell centers.
pub fn sine_family(n_cells: usize) -> Result<FnFamily> {
    let domain = Arc::new(Domain::interval(0.0, 1.0, n_cells)?);
    let d = domain.clone();
    Ok(FnFamily::new(domain, format!("sin(2 pi n x) on {n_cells} cells"), move |n| {
        GridFn::from_fn(d.clone(), |x, _| sin(2.0 * core::f64::consts::PI * n as f64 * x))
            .expect("sine samples are finite")
    }))
}

/// Number of cells used by [`build_stress_families`] for the small families.
pub const STRESS_CELLS: usize = 64;
/// Number of cells of the sine family.
pub const SINE_CELLS: usize = 1024;

/// Step `1{x > 1/2}` on `(0, 1)`.
pub fn unit_step(n_cells: usize) -> Result<GridFn> {
    GridFn::from_fn(Domain::interval(0.0, 1.0, n_cells)?, |x, _| if x > 0.5 { 1.0 } else { 0.0 })
}

/// Bump `1{1/4 < x < 1/2}` on `(0, 1)`.
pub fn unit_bump(n_cells: usize) -> Result<GridFn> {
    GridFn::from_fn(Domain::interval(0.0, 1.0, n_cells)?, |x, _| if x > 0.25 && x < 0.5 { 1.0 } else { 0.0 })
}

/// The control families on `(0, 1)`:
///
/// | name | members | expected |
/// |---|---|---|
/// | `const` | `0` | every extraction converges at once, all sups 0 |
/// | `tail` | `step + bump / n` | converges to `step` along a tail |
/// | `two-cluster` | `step + bump / n` (odd), `-step + bump / n` (even) | first-visited cluster, limit near `step` |
/// | `sine` | `sin(2 pi n x)` | uniform check flags growth, extraction fails |
pub fn build_stress_families() -> Result<Vec<StressFamily>> {
    let step = unit_step(STRESS_CELLS)?;
    let bump = unit_bump(STRESS_CELLS)?;
    let neg = step.map(|v| -v)?;
    Ok(alloc::vec![
        StressFamily {
            name: "const",
            family: constant_family(step.shared_domain().clone(), 0.0)?,
            expected: "converges immediately; every sup is 0",
        },
        StressFamily {
            name: "tail",
            family: tail_family(step.clone(), bump.clone())?,
            expected: "tail subsequence converging to the step",
        },
        StressFamily {
            name: "two-cluster",
            family: two_cluster_family(step, neg, bump)?,
            expected: "odd indices, limit near the step (first-visited cluster)",
        },
        StressFamily {
            name: "sine",
            family: sine_family(SINE_CELLS)?,
            expected: "growing sup of (eps, inf)-Var; extraction does not converge",
        },
    ])
}

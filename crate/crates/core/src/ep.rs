//! Locating exceptional points: condition-number maps, local refinement by
//! cluster-diameter minimization, monodromy-based order classification and
//! multi-start search.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::linalg::{norm, CMatrix, Scalar};
use crate::math::{cos, sin};
use crate::model::{dynamical_matrix, Method, ParamName, SystemParams};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::spectral::{
    cluster_diameter, eigendecompose, eigendecompose_complex, track_along, EigenSystem, Permutation, SpectralError,
    TrackOptions,
};
use crate::C64;

/// Plotting clamp for infinite condition numbers.
pub const COND_CLAMP: f64 = 1e16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpError {
    #[error("invalid scan grid: {0}")]
    InvalidGrid(&'static str),
    #[error("order {order} needs at least {needed} free parameters, got {given}")]
    InsufficientFreeParams { order: usize, needed: usize, given: usize },
    #[error("EP order {0} outside the supported range")]
    InvalidOrder(usize),
    #[error("refinement stalled at cluster diameter {:e} kHz (max condition number {:e})", .candidate.cluster_diameter, .candidate.max_cond)]
    NoConvergence { candidate: Box<EpCandidate> },
    #[error("monodromy gives order {monodromy} but eigenvector alignment gives {alignment}")]
    Inconclusive { monodromy: usize, alignment: usize },
    #[error("all {} starts failed", .diagnostics.len())]
    AllStartsFailed { diagnostics: Vec<EpCandidate> },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScanAxis {
    pub name: ParamName,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl ScanAxis {
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }
}

/// Two-parameter grid; `axis1` is the outer (slow) index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub axis1: ScanAxis,
    pub axis2: ScanAxis,
    pub fixed: SystemParams,
}

/// One grid cell; `max_cond` is `None` where the eigensolver failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub x: f64,
    pub y: f64,
    pub max_cond: Option<f64>,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<(), EpError> {
        for ax in [&self.axis1, &self.axis2] {
            if ax.n < 2 {
                return Err(EpError::InvalidGrid("each axis needs at least 2 points"));
            }
            if !(ax.min.is_finite() && ax.max.is_finite()) || ax.min >= ax.max {
                return Err(EpError::InvalidGrid("axis bounds must be finite with min < max"));
            }
        }
        if self.axis1.name == self.axis2.name {
            return Err(EpError::InvalidGrid("axes must be distinct parameters"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axis1.n * self.axis2.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell `k` in row-major order (axis1 outer).
    pub fn point(&self, k: usize) -> (f64, f64, SystemParams) {
        let (i, j) = (k / self.axis2.n, k % self.axis2.n);
        let (x, y) = (self.axis1.value(i), self.axis2.value(j));
        (x, y, self.fixed.with(self.axis1.name, x).with(self.axis2.name, y))
    }

    pub fn cell(&self, k: usize, method: Method) -> ScanCell {
        let (x, y, p) = self.point(k);
        ScanCell { x, y, max_cond: max_condition_number(&p, method) }
    }
}

/// Largest eigenvalue condition number of `M(p)`, clamped to
/// [`COND_CLAMP`]; `None` if the eigensolver fails.
pub fn max_condition_number(p: &SystemParams, method: Method) -> Option<f64> {
    eigendecompose(&dynamical_matrix(p, method)).ok().map(|es| es.max_cond().min(COND_CLAMP))
}

/// Serial condition-number map in row-major order.
pub fn scan_condition_map(grid: &ScanGrid, method: Method) -> Result<Vec<ScanCell>, EpError> {
    grid.validate()?;
    Ok((0..grid.len()).map(|k| grid.cell(k, method)).collect())
}

/// A (candidate) exceptional point with the metrics that qualify it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpCandidate {
    pub location: SystemParams,
    pub order: usize,
    pub free_params: Vec<ParamName>,
    /// Max pairwise distance within the tightest `order`-subset (kHz).
    pub cluster_diameter: f64,
    /// Largest condition number within the cluster.
    pub max_cond: f64,
    /// Canonical labels (0-based) of the clustered eigenvalues.
    pub cluster: Vec<usize>,
    pub cluster_values: Vec<[f64; 2]>,
    pub evaluations: usize,
    pub converged: bool,
}

impl EpCandidate {
    /// Evaluates the cluster metrics of `M(p)` without moving.
    pub fn at(p: &SystemParams, order: usize, free_params: &[ParamName], method: Method) -> Result<Self, EpError> {
        let es = eigendecompose(&dynamical_matrix(p, method))?;
        Ok(Self::from_system(&es, *p, order, free_params))
    }

    fn from_system(es: &EigenSystem, location: SystemParams, order: usize, free_params: &[ParamName]) -> Self {
        let (d, cluster) = cluster_diameter(&es.values, order);
        let max_cond = cluster.iter().map(|&k| es.cond[k]).fold(1.0, f64::max);
        EpCandidate {
            location,
            order,
            free_params: free_params.to_vec(),
            cluster_diameter: d,
            max_cond,
            cluster_values: cluster.iter().map(|&k| [es.values[k].re, es.values[k].im]).collect(),
            cluster,
            evaluations: 1,
            converged: false,
        }
    }

    /// Angle (degrees) between the left and right eigenvectors of the
    /// worst-conditioned cluster member, from `N = sec θ`.
    pub fn left_right_angle_deg(&self) -> f64 {
        if self.max_cond.is_infinite() {
            90.0
        } else {
            libm::acos(1.0 / self.max_cond) * 180.0 / PI
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    pub method: Method,
    pub diameter_tol: f64,
    pub cond_tol: f64,
    /// Initial simplex side (kHz) is the larger of this and
    /// `relative_step · |x|` per coordinate.
    pub initial_step: f64,
    pub relative_step: f64,
    /// Candidates further than this from the seed (max-norm, kHz) are
    /// rejected, keeping the search local.
    pub max_excursion: f64,
    /// Outer rounds, each restarting the simplex around the current best
    /// point with freshly sized steps.
    pub rounds: usize,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            method: Method::Explicit,
            diameter_tol: 1e-3,
            cond_tol: 1e4,
            initial_step: 5.0,
            relative_step: 0.0,
            max_excursion: 50.0,
            rounds: 1,
            nelder_mead: NelderMeadOptions {
                max_evals: 6000,
                x_tol: 1e-11,
                restarts: 4,
                ..NelderMeadOptions::default()
            },
        }
    }
}

impl RefineOptions {
    /// Thresholds for third- to fifth-order searches.
    pub fn high_order() -> Self {
        RefineOptions {
            diameter_tol: 1e-2,
            initial_step: 1.0,
            relative_step: 0.05,
            max_excursion: 400.0,
            rounds: 30,
            nelder_mead: NelderMeadOptions {
                max_evals: 4000,
                x_tol: 1e-11,
                restarts: 0,
                ..NelderMeadOptions::default()
            },
            ..RefineOptions::default()
        }
    }
}

fn check_order(order: usize, free: usize) -> Result<(), EpError> {
    if !(2..=8).contains(&order) {
        return Err(EpError::InvalidOrder(order));
    }
    let needed = order - 1;
    if free < needed {
        return Err(EpError::InsufficientFreeParams { order, needed, given: free });
    }
    Ok(())
}

/// Result of [`minimize_cluster`] on an arbitrary matrix family.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMinimum {
    pub x: Vec<f64>,
    pub diameter: f64,
    pub max_cond: f64,
    pub cluster: Vec<usize>,
    pub evaluations: usize,
}

/// Minimizes the `order`-cluster diameter of `family(x)` from `x0`,
/// rejecting points further than `max_excursion` from `anchor`.
pub fn minimize_cluster<F>(
    mut family: F,
    x0: &[f64],
    order: usize,
    steps: &[f64],
    anchor: &[f64],
    max_excursion: f64,
    nm: &NelderMeadOptions,
) -> Result<ClusterMinimum, EpError>
where
    F: FnMut(&[f64]) -> CMatrix,
{
    let objective = |x: &[f64], family: &mut F| -> f64 {
        if x.iter().zip(anchor).any(|(a, b)| (a - b).abs() > max_excursion) {
            return f64::INFINITY;
        }
        match eigendecompose_complex(&family(x)) {
            Ok(es) => cluster_diameter(&es.values, order).0,
            Err(_) => f64::INFINITY,
        }
    };
    let m = nelder_mead(|x| objective(x, &mut family), x0, steps, nm);
    let es = eigendecompose_complex(&family(&m.x))?;
    let (diameter, cluster) = cluster_diameter(&es.values, order);
    let max_cond = cluster.iter().map(|&k| es.cond[k]).fold(1.0, f64::max);
    Ok(ClusterMinimum { x: m.x, diameter, max_cond, cluster, evaluations: m.evals + 1 })
}

/// Refines an EP of the given order by varying `free` from `seed`.
///
/// Returns the candidate on success (diameter below `diameter_tol` and
/// condition number above `cond_tol`), otherwise `NoConvergence` carrying
/// the best point found. The diameter never exceeds that of the seed.
pub fn refine_ep(
    seed: &SystemParams,
    free: &[ParamName],
    order: usize,
    opts: &RefineOptions,
) -> Result<EpCandidate, EpError> {
    check_order(order, free.len())?;
    let x0: Vec<f64> = free.iter().map(|&n| seed.get(n)).collect();
    let place = |x: &[f64]| {
        let mut p = *seed;
        for (&n, &v) in free.iter().zip(x) {
            p.set(n, v);
        }
        p
    };
    let method = opts.method;
    let mut x = x0.clone();
    let mut evaluations = 0;
    for _ in 0..opts.rounds.max(1) {
        let steps: Vec<f64> = x.iter().map(|v| opts.initial_step.max(opts.relative_step * v.abs())).collect();
        let m = minimize_cluster(
            |y| dynamical_matrix(&place(y), method).to_complex(),
            &x,
            order,
            &steps,
            &x0,
            opts.max_excursion,
            &opts.nelder_mead,
        )?;
        evaluations += m.evaluations;
        x = m.x;
        if m.diameter < opts.diameter_tol {
            break;
        }
    }
    let location = place(&x);
    let mut cand = EpCandidate::at(&location, order, free, method)?;
    cand.evaluations = evaluations;
    cand.converged = cand.cluster_diameter < opts.diameter_tol && cand.max_cond > opts.cond_tol;
    if cand.converged {
        Ok(cand)
    } else {
        Err(EpError::NoConvergence { candidate: Box::new(cand) })
    }
}

/// Monodromy of the spectrum around a circle of complex radius `radius`
/// in parameter `axis` centred on `p`. The dynamical matrix is affine in
/// every single parameter, so `M(p + z e) = M(p) + z (M(p + e) − M(p))`.
pub fn complex_monodromy(
    p: &SystemParams,
    axis: ParamName,
    radius: f64,
    n_samples: usize,
    method: Method,
) -> Result<Permutation, EpError> {
    let m0 = dynamical_matrix(p, method).to_complex();
    let m1 = dynamical_matrix(&p.with(axis, p.get(axis) + 1.0), method).to_complex();
    let dm = &m1 - &m0;
    let tracked = track_along(
        0.0,
        1.0,
        n_samples,
        true,
        |t| {
            let z = C64::new(radius * cos(2.0 * PI * t), radius * sin(2.0 * PI * t));
            eigendecompose_complex(&(&m0 + &dm.scale(z)))
        },
        TrackOptions::default(),
    )?;
    Ok(tracked.permutation.expect("closed loop yields a permutation"))
}

/// Size of the largest set of cluster members whose right eigenvectors
/// are pairwise parallel to within `1 − |cos θ| < tol`.
pub fn aligned_count(es: &EigenSystem, cluster: &[usize], tol: f64) -> usize {
    let overlap = |a: usize, b: usize| {
        let ra = &es.right[a];
        let rb = &es.right[b];
        let inner = ra.iter().zip(rb).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y);
        inner.modulus() / (norm(ra) * norm(rb))
    };
    let mut best = 1;
    for &a in cluster {
        let group = cluster.iter().filter(|&&b| b == a || 1.0 - overlap(a, b) < tol).count();
        best = best.max(group);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub method: Method,
    pub axis: ParamName,
    pub n_samples: usize,
    pub alignment_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { method: Method::Explicit, axis: ParamName::Delta1, n_samples: 720, alignment_tol: 1e-3 }
    }
}

/// Order of the degeneracy at `c.location`: the longest cycle of the
/// complex-loop monodromy, cross-checked against eigenvector alignment.
/// Returns 1 at a regular point.
pub fn classify_ep_order(c: &EpCandidate, radius: f64, opts: &ClassifyOptions) -> Result<usize, EpError> {
    let perm = complex_monodromy(&c.location, opts.axis, radius, opts.n_samples, opts.method)?;
    let monodromy = perm.longest_cycle();
    let es = eigendecompose(&dynamical_matrix(&c.location, opts.method))?;
    let all: Vec<usize> = (0..es.n()).collect();
    let alignment = aligned_count(&es, &all, opts.alignment_tol);
    if monodromy == alignment {
        Ok(monodromy)
    } else {
        Err(EpError::Inconclusive { monodromy, alignment })
    }
}

/// Multi-start refinement; the converged candidate with the smallest
/// diameter wins. Order 2 with a single seed is exactly [`refine_ep`].
pub fn search_high_order_ep(
    order: usize,
    seeds: &[SystemParams],
    free: &[ParamName],
    opts: &RefineOptions,
) -> Result<EpCandidate, EpError> {
    check_order(order, free.len())?;
    best_candidate(seeds.iter().map(|s| refine_ep(s, free, order, opts)))
}

/// Ordered reduction over per-seed results; ties keep the earliest seed.
pub fn best_candidate<I>(results: I) -> Result<EpCandidate, EpError>
where
    I: IntoIterator<Item = Result<EpCandidate, EpError>>,
{
    let mut best: Option<EpCandidate> = None;
    let mut diagnostics = Vec::new();
    for r in results {
        match r {
            Ok(c) => {
                if best.as_ref().is_none_or(|b| c.cluster_diameter < b.cluster_diameter) {
                    best = Some(c.clone());
                }
                diagnostics.push(c);
            }
            Err(EpError::NoConvergence { candidate }) => diagnostics.push(*candidate),
            Err(e) => return Err(e),
        }
    }
    best.ok_or(EpError::AllStartsFailed { diagnostics })
}

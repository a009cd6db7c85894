use alloc::vec::Vec;

use super::{eigendecompose, EigenSystem, Permutation, SpectralError};
use crate::model::{dynamical_matrix, Method, ParamName, SystemParams};
use crate::C64;

/// Second-nearest candidate closer than this factor times the nearest makes
/// a match ambiguous.
pub const DEFAULT_AMBIGUITY_RATIO: f64 = 2.0;

/// A continuous curve `t ↦ SystemParams` on `[0, period]`.
pub trait ParamPath {
    fn params_at(&self, t: f64) -> SystemParams;
    fn period(&self) -> f64;
    fn is_closed(&self) -> bool {
        true
    }
}

/// Straight segment between two parameter points, `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePath {
    pub from: SystemParams,
    pub to: SystemParams,
}

impl ParamPath for LinePath {
    fn params_at(&self, t: f64) -> SystemParams {
        let mut p = self.from;
        for name in ParamName::ALL {
            let a = self.from.get(name);
            p.set(name, a + t * (self.to.get(name) - a));
        }
        p
    }
    fn period(&self) -> f64 {
        1.0
    }
    fn is_closed(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub ambiguity_ratio: f64,
    /// Bisection floor as a fraction of the path length in `t`.
    pub min_step_fraction: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { ambiguity_ratio: DEFAULT_AMBIGUITY_RATIO, min_step_fraction: 1e-10 }
    }
}

/// Eigensystems along a path with consistent branch labels: index `k` of
/// every sample is branch `k`, which starts as canonical label `k`.
#[derive(Debug, Clone)]
pub struct TrackedSpectrum {
    pub times: Vec<f64>,
    pub samples: Vec<EigenSystem>,
    /// Positions in `samples` of the requested grid times (refinement
    /// points are stored in between).
    pub grid: Vec<usize>,
    /// End-to-start relabelling for closed paths: branch `k` arrives at
    /// the start-point label `permutation.apply(k)`.
    pub permutation: Option<Permutation>,
    pub refinements: usize,
}

impl TrackedSpectrum {
    pub fn branch(&self, k: usize) -> Vec<C64> {
        self.samples.iter().map(|s| s.values[k]).collect()
    }

    pub fn grid_samples(&self) -> impl Iterator<Item = (f64, &EigenSystem)> {
        self.grid.iter().map(move |&i| (self.times[i], &self.samples[i]))
    }
}

/// Greedy nearest-neighbour assignment `prev[k] → next[order[k]]`, or
/// `None` if any branch has two candidates within `ratio` of each other or
/// the assignment is not injective.
pub(crate) fn match_step(prev: &[C64], next: &[C64], ratio: f64) -> Option<Vec<usize>> {
    let n = prev.len();
    let mut order = Vec::with_capacity(n);
    let mut taken = alloc::vec![false; n];
    for p in prev {
        let mut d1 = (f64::INFINITY, usize::MAX);
        let mut d2 = f64::INFINITY;
        for (j, q) in next.iter().enumerate() {
            let d = (p - q).norm();
            if d < d1.0 {
                d2 = d1.0;
                d1 = (d, j);
            } else if d < d2 {
                d2 = d;
            }
        }
        if n > 1 && d2 <= ratio * d1.0 {
            return None;
        }
        if taken[d1.1] {
            return None;
        }
        taken[d1.1] = true;
        order.push(d1.1);
    }
    Some(order)
}

/// Tracks eigenvalue branches over `n_samples` equally spaced points of
/// `[t0, t1]`, bisecting any step whose assignment is ambiguous.
pub fn track_along<F>(
    t0: f64,
    t1: f64,
    n_samples: usize,
    closed: bool,
    eval: F,
    opts: TrackOptions,
) -> Result<TrackedSpectrum, SpectralError>
where
    F: FnMut(f64) -> Result<EigenSystem, SpectralError>,
{
    let n = n_samples.max(2);
    let times: Vec<f64> =
        (0..n).map(|k| if k == n - 1 { t1 } else { t0 + (t1 - t0) * k as f64 / (n - 1) as f64 }).collect();
    track_grid(&times, closed, eval, opts)
}

/// Tracks eigenvalue branches over a monotone time grid. For closed paths
/// the first and last grid points must describe the same matrix.
pub fn track_grid<F>(
    grid_times: &[f64],
    closed: bool,
    mut eval: F,
    opts: TrackOptions,
) -> Result<TrackedSpectrum, SpectralError>
where
    F: FnMut(f64) -> Result<EigenSystem, SpectralError>,
{
    assert!(!grid_times.is_empty(), "empty tracking grid");
    let t0 = grid_times[0];
    let t1 = *grid_times.last().unwrap();
    let floor = opts.min_step_fraction * (t1 - t0).abs();
    let first = eval(t0)?;
    let mut times = alloc::vec![t0];
    let mut samples = alloc::vec![first];
    let mut grid = alloc::vec![0usize];
    let mut refinements = 0;

    for &target in &grid_times[1..] {
        let mut pending: Vec<(f64, EigenSystem)> = alloc::vec![(target, eval(target)?)];
        while let Some((t_try, es_try)) = pending.last() {
            let t_cur = *times.last().unwrap();
            let cur = samples.last().unwrap();
            match match_step(&cur.values, &es_try.values, opts.ambiguity_ratio) {
                Some(order) => {
                    let labelled = es_try.permuted(&order);
                    times.push(*t_try);
                    samples.push(labelled);
                    pending.pop();
                }
                None => {
                    let step = (t_try - t_cur).abs();
                    if step <= floor {
                        return Err(SpectralError::TrackingAmbiguous { t: t_cur, step });
                    }
                    let mid = 0.5 * (t_cur + t_try);
                    let es_mid = eval(mid)?;
                    pending.push((mid, es_mid));
                    refinements += 1;
                }
            }
        }
        grid.push(samples.len() - 1);
    }

    let permutation = if closed {
        let last = samples.last().unwrap();
        let order = match_step(&last.values, &samples[0].values, opts.ambiguity_ratio)
            .ok_or(SpectralError::TrackingAmbiguous { t: t1, step: 0.0 })?;
        Some(Permutation::from_vec(order).expect("injective assignment is a bijection"))
    } else {
        None
    };

    Ok(TrackedSpectrum { times, samples, grid, permutation, refinements })
}

/// Tracks the spectrum of the dynamical matrix along a parameter path.
pub fn track_spectrum<P: ParamPath + ?Sized>(
    path: &P,
    n_samples: usize,
    method: Method,
    opts: TrackOptions,
) -> Result<TrackedSpectrum, SpectralError> {
    track_along(
        0.0,
        path.period(),
        n_samples,
        path.is_closed(),
        |t| eigendecompose(&dynamical_matrix(&path.params_at(t), method)),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::math::{cos, sin};
    use crate::spectral::eigendecompose_complex;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matching_rejects_near_ties() {
        let prev = [c(0.0, 0.0), c(10.0, 0.0)];
        assert_eq!(match_step(&prev, &[c(10.1, 0.0), c(0.1, 0.0)], 2.0), Some(alloc::vec![1, 0]));
        assert_eq!(match_step(&prev, &[c(4.0, 0.0), c(6.0, 0.0)], 2.0), None);
    }

    // [[0, 1], [z, 0]] has eigenvalues ±√z; a loop of z around 0 swaps them.
    fn sqrt_family(z: C64) -> CMatrix {
        let mut m = CMatrix::zeros(3);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = z;
        m[(2, 2)] = c(5.0, 0.0);
        m
    }

    #[test]
    fn square_root_branch_point_swaps() {
        let around = |r: f64, x0: f64| {
            track_along(
                0.0,
                1.0,
                200,
                true,
                |t| eigendecompose_complex(&sqrt_family(c(x0 + r * cos(2.0 * PI * t), r * sin(2.0 * PI * t)))),
                TrackOptions::default(),
            )
            .unwrap()
        };
        let enclosing = around(0.5, 0.0).permutation.unwrap();
        assert_eq!(enclosing.cycles().len(), 1);
        assert_eq!(enclosing.longest_cycle(), 2);
        assert!(!enclosing.support().contains(&2));
        assert!(around(0.5, 2.0).permutation.unwrap().is_identity());
    }

    #[test]
    fn passing_through_branch_point_is_ambiguous() {
        let r = track_along(
            -1.0,
            1.0,
            11,
            false,
            |t| eigendecompose_complex(&sqrt_family(c(t, 0.0))),
            TrackOptions::default(),
        );
        assert!(matches!(r, Err(SpectralError::TrackingAmbiguous { .. })));
    }

    #[test]
    fn open_line_labels_are_continuous() {
        let from = SystemParams::nv_reference();
        let to = from.with(ParamName::Omega1, 1200.0);
        let tr = track_spectrum(&LinePath { from, to }, 50, Method::Explicit, TrackOptions::default()).unwrap();
        assert!(tr.permutation.is_none());
        assert_eq!(tr.grid.len(), 50);
        for w in tr.samples.windows(2) {
            for k in 0..8 {
                let step = (w[0].values[k] - w[1].values[k]).norm();
                let gap = (0..8)
                    .filter(|&j| j != k)
                    .map(|j| (w[0].values[k] - w[1].values[j]).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(step < gap);
            }
        }
    }
}

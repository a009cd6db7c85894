//! Bloch-vector evolution along elliptic parameter loops and the
//! non-reciprocal mode-switch experiment.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use thiserror::Error;

use crate::linalg::{eigh, real_norm, CMatrix};
use crate::math::{cos, sin};
use crate::model::{
    bloch_to_rho, dynamical_matrix, dynamical_matrix_and_drive, positivity_margin, BlochVector, DensityMatrix, Method,
    SystemParams, PURE_STATE_RADIUS,
};
use crate::spectral::{
    eigendecompose, track_grid, EigenSystem, ParamPath, SpectralError, TrackOptions, TrackedSpectrum,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("invalid loop: {0}")]
    InvalidPath(&'static str),
    #[error("{steps} steps per period is below the minimum of {min}")]
    InvalidStep { steps: usize, min: usize },
    #[error("halving dt = {dt:e} still changes the final state by {change:e}")]
    StepTooLarge { change: f64, dt: f64 },
    #[error("labels {0:?} are not complex-conjugate partners at the loop start")]
    NotConjugatePaired([usize; 2]),
    #[error("top eigenvalues of ρ are degenerate ({top} vs {second})")]
    DegenerateTop { top: f64, second: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Sense of traversal in the control plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    #[cfg_attr(feature = "serde", serde(alias = "cw"))]
    Clockwise,
    #[cfg_attr(feature = "serde", serde(alias = "ccw"))]
    Counterclockwise,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Clockwise => "cw",
            Direction::Counterclockwise => "ccw",
        })
    }
}

/// Which control parameter is drawn on the horizontal axis; this fixes
/// what "clockwise" means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PlaneAxes {
    /// Ω₁ horizontal, Δ₁ vertical: increasing `t` in
    /// `(Δ₁, Ω₁) = center + (R_Δ cos, R_Ω sin)` runs clockwise.
    #[default]
    OmegaHorizontal,
    /// Δ₁ horizontal, Ω₁ vertical: the same formula runs counterclockwise.
    DeltaHorizontal,
}

/// Elliptic loop
/// `Δ₁ = Δ_c + R_Δ cos(θ)`, `Ω₁ = Ω_c + R_Ω sin(θ)`, `θ = 2πt/T + φ`,
/// run with `t ↦ T − t` when the requested direction is opposite to the
/// formula's orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoopPath {
    /// `(Δ₁, Ω₁)` centre (kHz).
    pub center: [f64; 2],
    /// `(R_Δ, R_Ω)` (kHz).
    pub radii: [f64; 2],
    pub phase: f64,
    /// Period in ms.
    pub period: f64,
    pub direction: Direction,
    pub axes: PlaneAxes,
    pub base: SystemParams,
}

impl LoopPath {
    pub fn new(
        center: [f64; 2],
        radii: [f64; 2],
        phase: f64,
        period: f64,
        direction: Direction,
        base: SystemParams,
    ) -> Result<Self, EvolutionError> {
        let path = LoopPath { center, radii, phase, period, direction, axes: PlaneAxes::default(), base };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(EvolutionError::InvalidPath("period must be positive"));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(EvolutionError::InvalidPath("radii must be finite and non-negative"));
        }
        if !(self.phase.is_finite() && self.center.iter().all(|c| c.is_finite())) {
            return Err(EvolutionError::InvalidPath("centre and phase must be finite"));
        }
        self.base.validate().map_err(|_| EvolutionError::InvalidPath("base parameters are invalid"))
    }

    /// Loop used to display the Riemann sheets: centre (−80, 295), radii
    /// (100, 30), φ = 0.39π, T = 15/γ⁽¹⁾.
    pub fn sheet_loop(base: SystemParams) -> Self {
        LoopPath {
            center: [-80.0, 295.0],
            radii: [100.0, 30.0],
            phase: 0.39 * PI,
            period: 15.0 / base.gamma1,
            direction: Direction::Clockwise,
            axes: PlaneAxes::default(),
            base,
        }
    }

    /// Loop used for the switch experiment: as [`LoopPath::sheet_loop`]
    /// with radii (260, 125).
    pub fn switch_loop(base: SystemParams) -> Self {
        LoopPath { radii: [260.0, 125.0], ..Self::sheet_loop(base) }
    }

    pub fn with_direction(self, direction: Direction) -> Self {
        LoopPath { direction, ..self }
    }

    pub fn reversed(self) -> Self {
        self.with_direction(self.direction.reversed())
    }

    /// True when increasing `t` follows the formula's own orientation.
    pub fn follows_formula(&self) -> bool {
        matches!(
            (self.direction, self.axes),
            (Direction::Clockwise, PlaneAxes::OmegaHorizontal)
                | (Direction::Counterclockwise, PlaneAxes::DeltaHorizontal)
        )
    }

    pub fn angle(&self, t: f64) -> f64 {
        let s = if self.follows_formula() { t } else { self.period - t };
        2.0 * PI * s / self.period + self.phase
    }

    /// `(Δ₁, Ω₁)` at time `t`.
    pub fn point(&self, t: f64) -> [f64; 2] {
        let th = self.angle(t);
        [self.center[0] + self.radii[0] * cos(th), self.center[1] + self.radii[1] * sin(th)]
    }
}

impl ParamPath for LoopPath {
    fn params_at(&self, t: f64) -> SystemParams {
        let [d, o] = self.point(t);
        SystemParams { delta1: d, omega1: o, ..self.base }
    }
    fn period(&self) -> f64 {
        self.period
    }
}

/// Sampled solution of `Ṡ = M(t)·S + c(t)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    pub dt: f64,
    /// Max-norm change of the final state when dt was halved.
    pub guard_change: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &BlochVector {
        self.states.last().expect("trajectory has at least one state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    /// RK4 steps per period before any halving.
    pub steps: usize,
    pub guard_tol: f64,
    pub max_halvings: usize,
}

pub const MIN_STEPS: usize = 1000;

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { method: Method::Explicit, steps: 4096, guard_tol: 1e-6, max_halvings: 4 }
    }
}

fn rk4_run<P: ParamPath + ?Sized>(
    s0: &[f64; 8],
    path: &P,
    steps: usize,
    method: Method,
) -> (Vec<f64>, Vec<BlochVector>) {
    let period = path.period();
    let h = period / steps as f64;
    let field = |t: f64| dynamical_matrix_and_drive(&path.params_at(t), method);
    let apply = |(m, c): &(crate::linalg::RMatrix, [f64; 8]), s: &[f64; 8]| -> [f64; 8] {
        let ms = m.mul_vec(s);
        core::array::from_fn(|i| ms[i] + c[i])
    };
    let axpy = |s: &[f64; 8], k: &[f64; 8], a: f64| -> [f64; 8] { core::array::from_fn(|i| s[i] + a * k[i]) };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = *s0;
    times.push(0.0);
    states.push(BlochVector(s));
    let mut start = field(0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let t_end = if k + 1 == steps { period } else { (k + 1) as f64 * h };
        let mid = field(t + 0.5 * h);
        let end = field(t_end);
        let k1 = apply(&start, &s);
        let k2 = apply(&mid, &axpy(&s, &k1, 0.5 * h));
        let k3 = apply(&mid, &axpy(&s, &k2, 0.5 * h));
        let k4 = apply(&end, &axpy(&s, &k3, h));
        s = core::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        times.push(t_end);
        states.push(BlochVector(s));
        start = end;
    }
    (times, states)
}

/// Classical RK4 over one period with `M` and `c` rebuilt at every stage.
/// The step count is doubled until doubling it again moves the final
/// state by less than `guard_tol`; the accepted (coarser) run is returned.
pub fn integrate<P: ParamPath + ?Sized>(
    s0: &BlochVector,
    path: &P,
    opts: &IntegrateOptions,
) -> Result<Trajectory, EvolutionError> {
    if opts.steps < MIN_STEPS {
        return Err(EvolutionError::InvalidStep { steps: opts.steps, min: MIN_STEPS });
    }
    let mut steps = opts.steps;
    let mut coarse = rk4_run(&s0.0, path, steps, opts.method);
    let mut change = f64::INFINITY;
    for _ in 0..=opts.max_halvings {
        let fine = rk4_run(&s0.0, path, 2 * steps, opts.method);
        let a = coarse.1.last().unwrap().0;
        let b = fine.1.last().unwrap().0;
        change = (0..8).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
        if change <= opts.guard_tol {
            let (times, states) = coarse;
            return Ok(Trajectory { times, states, dt: path.period() / steps as f64, guard_change: change });
        }
        coarse = fine;
        steps *= 2;
    }
    Err(EvolutionError::StepTooLarge { change, dt: path.period() / (steps / 2) as f64 })
}

/// Instantaneous-eigenbasis coefficients `a_i(t) = left_i(t)·S(t)` with
/// continuously tracked branch labels.
#[derive(Debug, Clone)]
pub struct AdiabaticSeries {
    pub times: Vec<f64>,
    pub coefficients: Vec<[C64; 8]>,
    /// Largest `|S − Σ a_i right_i| / |S|` over the grid.
    pub reconstruction_error: f64,
    pub tracked: TrackedSpectrum,
}

impl AdiabaticSeries {
    /// Fraction of grid points where `|a_p|² + |a_q|²` exceeds
    /// `threshold · Σ|a_i|²`.
    pub fn dominance_fraction(&self, pair: [usize; 2], threshold: f64) -> f64 {
        let hits = self
            .coefficients
            .iter()
            .filter(|a| {
                let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                a[pair[0]].norm_sqr() + a[pair[1]].norm_sqr() > threshold * total
            })
            .count();
        hits as f64 / self.coefficients.len() as f64
    }
}

pub fn adiabatic_coefficients<P: ParamPath + ?Sized>(
    traj: &Trajectory,
    path: &P,
    method: Method,
) -> Result<AdiabaticSeries, EvolutionError> {
    let tracked = track_grid(
        &traj.times,
        path.is_closed(),
        |t| eigendecompose(&dynamical_matrix(&path.params_at(t), method)),
        TrackOptions::default(),
    )?;
    let mut coefficients = Vec::with_capacity(traj.states.len());
    let mut worst: f64 = 0.0;
    for (s, (_, es)) in traj.states.iter().zip(tracked.grid_samples()) {
        let a = es.project(&s.0);
        let mut resid = [C64::new(0.0, 0.0); 8];
        for (ak, r) in a.iter().zip(&es.right) {
            for i in 0..8 {
                resid[i] += ak * r[i];
            }
        }
        let err = (0..8).map(|i| (resid[i] - s.0[i]).norm_sqr()).sum::<f64>();
        let scale = s.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(libm::sqrt(err) / scale);
        coefficients.push(core::array::from_fn(|i| a[i]));
    }
    Ok(AdiabaticSeries { times: traj.times.clone(), coefficients, reconstruction_error: worst, tracked })
}

/// `Γ_ℓj(t) = ∫₀ᵗ Re[λ_j(u) − λ_ℓ(u)] du` along tracked branches.
#[derive(Debug, Clone)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub gamma: Vec<[[f64; 8]; 8]>,
    pub tracked: TrackedSpectrum,
}

impl DecaySeries {
    pub fn final_gamma(&self) -> &[[f64; 8]; 8] {
        self.gamma.last().expect("non-empty series")
    }
}

pub fn accumulated_decay<P: ParamPath + ?Sized>(
    path: &P,
    n_samples: usize,
    method: Method,
) -> Result<DecaySeries, EvolutionError> {
    let n = n_samples.max(2);
    let period = path.period();
    let grid: Vec<f64> = (0..n).map(|k| if k + 1 == n { period } else { period * k as f64 / (n - 1) as f64 }).collect();
    let tracked = track_grid(
        &grid,
        path.is_closed(),
        |t| eigendecompose(&dynamical_matrix(&path.params_at(t), method)),
        TrackOptions::default(),
    )?;
    // cumulative trapezoid of Re λ per branch over every tracked sample
    let mut integral = alloc::vec![[0.0f64; 8]; tracked.samples.len()];
    for k in 1..tracked.samples.len() {
        let h = tracked.times[k] - tracked.times[k - 1];
        for b in 0..8 {
            integral[k][b] =
                integral[k - 1][b] + 0.5 * h * (tracked.samples[k].values[b].re + tracked.samples[k - 1].values[b].re);
        }
    }
    let gamma = tracked
        .grid
        .iter()
        .map(|&k| core::array::from_fn(|l| core::array::from_fn(|j| integral[k][j] - integral[k][l])))
        .collect();
    Ok(DecaySeries { times: grid, gamma, tracked })
}

/// The two symmetric input states and their common scale `|S|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputStates {
    pub first: BlochVector,
    pub second: BlochVector,
    pub scale: f64,
    /// Largest imaginary part discarded when forming the superpositions.
    pub imag_residual: f64,
}

impl InputStates {
    pub fn get(&self, label: InputLabel) -> &BlochVector {
        match label {
            InputLabel::First => &self.first,
            InputLabel::Second => &self.second,
        }
    }
}

fn unit_superposition(es: &EigenSystem, a: usize, b: usize) -> Result<([f64; 8], f64), EvolutionError> {
    if !es.conj_pairs.iter().any(|&(i, j)| (i, j) == (a, b) || (i, j) == (b, a)) {
        return Err(EvolutionError::NotConjugatePaired([a, b]));
    }
    let sum: Vec<C64> = es.right[a].iter().zip(&es.right[b]).map(|(x, y)| x + y).collect();
    let re: [f64; 8] = core::array::from_fn(|i| sum[i].re);
    let imag = sum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let n = real_norm(&re);
    Ok((re.map(|x| x / n), imag / n))
}

/// `S⁽¹⁾ ∝ right₁ + right₈` and `S⁽²⁾ ∝ right₂ + right₇` (labels 0/7 and
/// 1/6 here), unit directions sharing the largest scale for which both
/// density matrices stay positive semidefinite.
pub fn build_input_states(es: &EigenSystem) -> Result<InputStates, EvolutionError> {
    let (u1, im1) = unit_superposition(es, 0, 7)?;
    let (u2, im2) = unit_superposition(es, 1, 6)?;
    let ok = |s: f64| {
        positivity_margin(&bloch_to_rho(&BlochVector(u1.map(|x| x * s)))) >= 0.0
            && positivity_margin(&bloch_to_rho(&BlochVector(u2.map(|x| x * s)))) >= 0.0
    };
    let (mut lo, mut hi) = (0.0, PURE_STATE_RADIUS * 1.01);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(InputStates {
        first: BlochVector(u1.map(|x| x * lo)),
        second: BlochVector(u2.map(|x| x * lo)),
        scale: lo,
        imag_residual: im1.max(im2),
    })
}

/// Closest rank-one unit-trace projector: `|ψ⟩⟨ψ|` for the top eigenvector.
pub fn nearest_pure_state(rho: &DensityMatrix) -> Result<DensityMatrix, EvolutionError> {
    let e = eigh(rho.matrix());
    let (top, second) = (e.values[2], e.values[1]);
    if top - second <= 1e-10 {
        return Err(EvolutionError::DegenerateTop { top, second });
    }
    let psi: [C64; 3] = core::array::from_fn(|i| e.vectors[(i, 2)]);
    Ok(DensityMatrix::pure(psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InputLabel {
    /// `S⁽¹⁾`, built from the most strongly oscillating pair.
    First,
    /// `S⁽²⁾`, its coalescing partner.
    Second,
}

impl InputLabel {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(InputLabel::First),
            2 => Some(InputLabel::Second),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            InputLabel::First => 1,
            InputLabel::Second => 2,
        }
    }

    /// Branch labels (0-based) superposed in this input.
    pub fn branches(self) -> [usize; 2] {
        match self {
            InputLabel::First => [0, 7],
            InputLabel::Second => [1, 6],
        }
    }

    pub fn partner(self) -> Self {
        match self {
            InputLabel::First => InputLabel::Second,
            InputLabel::Second => InputLabel::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchOptions {
    pub integrate: IntegrateOptions,
    /// Also compute the adiabatic coefficients along the trajectory.
    pub track: bool,
    pub dominance_threshold: f64,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        SwitchOptions { integrate: IntegrateOptions::default(), track: true, dominance_threshold: 0.9 }
    }
}

#[derive(Debug, Clone)]
pub struct SwitchReport {
    pub input: InputLabel,
    pub direction: Direction,
    pub axes: PlaneAxes,
    pub start_values: Vec<C64>,
    pub input_bloch: BlochVector,
    pub output_bloch: BlochVector,
    pub input_state: DensityMatrix,
    pub output_state: DensityMatrix,
    /// Output with its diagonal zeroed, for displaying coherences.
    pub output_off_diagonal: CMatrix,
    pub output_nearest_pure: Option<DensityMatrix>,
    pub max_coherence: f64,
    /// `|left_i(0)·S|` normalized to unit sum.
    pub input_projections: [f64; 8],
    pub output_projections: [f64; 8],
    pub dominant_output: [usize; 2],
    pub swapped: bool,
    /// Fraction of the time grid where the input pair's tracked branches
    /// carry more than the threshold share of Σ|a_i|².
    pub adiabatic_fraction: Option<f64>,
    pub reconstruction_error: Option<f64>,
    pub dt: f64,
    pub guard_change: f64,
    pub trajectory: Trajectory,
    /// Tracked adiabatic coefficients on the trajectory grid, if requested.
    pub coefficients: Option<Vec<[C64; 8]>>,
}

impl SwitchReport {
    pub fn dominant_branch(&self) -> usize {
        argmax(&self.output_projections)
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b }).0
}

fn projections(es: &EigenSystem, s: &BlochVector) -> [f64; 8] {
    let mags: Vec<f64> = es.project(&s.0).iter().map(|z| z.norm()).collect();
    let total: f64 = mags.iter().sum();
    core::array::from_fn(|i| if total > 0.0 { mags[i] / total } else { 0.0 })
}

/// Prepares the chosen input at the loop start, transports it around the
/// loop in the given direction and projects the result back onto the
/// start-point eigenbasis. The verdict is `swapped` iff the two largest
/// output projections are exactly the partner input's branches.
pub fn run_switch_experiment(
    input: InputLabel,
    direction: Direction,
    path: &LoopPath,
    opts: &SwitchOptions,
) -> Result<SwitchReport, EvolutionError> {
    path.validate()?;
    let path = path.with_direction(direction);
    let method = opts.integrate.method;
    let es0 = eigendecompose(&dynamical_matrix(&path.params_at(0.0), method))?;
    let inputs = build_input_states(&es0)?;
    let s_in = *inputs.get(input);
    let traj = integrate(&s_in, &path, &opts.integrate)?;
    let s_out = *traj.final_state();

    let input_projections = projections(&es0, &s_in);
    let output_projections = projections(&es0, &s_out);
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by(|&a, &b| output_projections[b].total_cmp(&output_projections[a]));
    let mut dominant_output = [order[0], order[1]];
    dominant_output.sort_unstable();
    let mut target = input.partner().branches();
    target.sort_unstable();
    let swapped = dominant_output == target;

    let (adiabatic_fraction, reconstruction_error, coefficients) = if opts.track {
        let series = adiabatic_coefficients(&traj, &path, method)?;
        (
            Some(series.dominance_fraction(input.branches(), opts.dominance_threshold)),
            Some(series.reconstruction_error),
            Some(series.coefficients),
        )
    } else {
        (None, None, None)
    };

    let output_state = bloch_to_rho(&s_out);
    Ok(SwitchReport {
        input,
        direction,
        axes: path.axes,
        start_values: es0.values.clone(),
        input_bloch: s_in,
        output_bloch: s_out,
        input_state: bloch_to_rho(&s_in),
        output_off_diagonal: output_state.off_diagonal(),
        output_nearest_pure: nearest_pure_state(&output_state).ok(),
        max_coherence: output_state.max_coherence(),
        output_state,
        input_projections,
        output_projections,
        dominant_output,
        swapped,
        adiabatic_fraction,
        reconstruction_error,
        dt: traj.dt,
        guard_change: traj.guard_change,
        trajectory: traj,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Scalar;
    use crate::model::rho_to_bloch;

    #[test]
    fn loop_start_point_and_closure() {
        let base = SystemParams::nv_reference();
        let p = LoopPath::new([-80.0, 295.0], [100.0, 30.0], 0.0, 1.0, Direction::Clockwise, base).unwrap();
        assert_eq!(p.point(0.0), [20.0, 295.0]);
        for d in [Direction::Clockwise, Direction::Counterclockwise] {
            let q = p.with_direction(d);
            let (a, b) = (q.point(0.0), q.point(q.period));
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        // a quarter period later the formula orientation has reached the top
        let cw = p.point(0.25);
        assert!((cw[1] - 325.0).abs() < 1e-12);
        let ccw = p.reversed().point(0.25);
        assert!((ccw[1] - 265.0).abs() < 1e-12);
    }

    #[test]
    fn plane_axes_flip_orientation() {
        let p = LoopPath::switch_loop(SystemParams::nv_reference());
        let flipped = LoopPath { axes: PlaneAxes::DeltaHorizontal, ..p };
        assert_eq!(p.point(0.1), flipped.reversed().point(0.1));
    }

    #[test]
    fn invalid_loops_rejected() {
        let base = SystemParams::nv_reference();
        assert!(LoopPath::new([0.0, 0.0], [1.0, 1.0], 0.0, 0.0, Direction::Clockwise, base).is_err());
        assert!(LoopPath::new([0.0, 0.0], [-1.0, 1.0], 0.0, 1.0, Direction::Clockwise, base).is_err());
    }

    #[test]
    fn too_few_steps_rejected() {
        let p = LoopPath::switch_loop(SystemParams::nv_reference());
        let opts = IntegrateOptions { steps: 100, ..Default::default() };
        assert!(matches!(integrate(&BlochVector::ZERO, &p, &opts), Err(EvolutionError::InvalidStep { .. })));
    }

    #[test]
    fn coherent_evolution_conserves_norm() {
        let base = SystemParams { omega2: 400.0, delta2: 1400.0, ..SystemParams::ZERO };
        let p = LoopPath::new([-80.0, 295.0], [260.0, 125.0], 0.3, 15.0 / 900.0, Direction::Clockwise, base).unwrap();
        let s0 = BlochVector([0.1, -0.2, 0.3, 0.05, 0.0, -0.1, 0.2, 0.15]);
        let traj = integrate(&s0, &p, &IntegrateOptions::default()).unwrap();
        for s in &traj.states {
            assert!((s.norm() - s0.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn input_states_are_real_and_physical() {
        let p = LoopPath::switch_loop(SystemParams::nv_reference());
        let es = eigendecompose(&dynamical_matrix(&p.params_at(0.0), Method::Explicit)).unwrap();
        let inp = build_input_states(&es).unwrap();
        assert!(inp.imag_residual < 1e-10);
        for s in [inp.first, inp.second] {
            assert!(positivity_margin(&bloch_to_rho(&s)) >= -1e-9);
            assert!((s.norm() - inp.scale).abs() < 1e-12);
        }
        // the bound is tight: a slightly longer vector is unphysical for one of them
        let worst = [inp.first, inp.second].map(|s| positivity_margin(&bloch_to_rho(&s.scaled(1.0 + 1e-6))));
        assert!(worst.iter().any(|&m| m < 0.0));
    }

    #[test]
    fn all_real_spectrum_is_not_paired() {
        let m = crate::linalg::RMatrix::from_fn(8, |i, j| if i == j { -(i as f64) - 1.0 } else { 0.0 });
        let es = eigendecompose(&m).unwrap();
        assert!(matches!(build_input_states(&es), Err(EvolutionError::NotConjugatePaired(_))));
    }

    #[test]
    fn nearest_pure_examples() {
        let i = C64::new(0.0, 1.0);
        let pure = DensityMatrix::pure([C64::new(0.6, 0.0), i * 0.48, C64::new(0.0, 0.64)]);
        let back = nearest_pure_state(&pure).unwrap();
        assert!((back.matrix() - pure.matrix()).max_abs() < 1e-12);
        assert!(matches!(
            nearest_pure_state(&DensityMatrix::maximally_mixed()),
            Err(EvolutionError::DegenerateTop { .. })
        ));
        let d = DensityMatrix::from_real_diagonal([0.5, 0.3, 0.2]).unwrap();
        let top = nearest_pure_state(&d).unwrap();
        assert!((top.get(0, 0).modulus() - 1.0).abs() < 1e-12);
        assert!(top.max_coherence() < 1e-12);
        assert!(rho_to_bloch(&top).norm() > 1.0);
    }

    #[test]
    fn decay_is_antisymmetric_in_indices() {
        let p = LoopPath::sheet_loop(SystemParams::nv_reference());
        let d = accumulated_decay(&p, 200, Method::Explicit).unwrap();
        for g in &d.gamma {
            for l in 0..8 {
                assert_eq!(g[l][l], 0.0);
                for j in 0..8 {
                    assert!((g[l][j] + g[j][l]).abs() < 1e-12);
                }
            }
        }
    }
}

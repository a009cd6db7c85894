//! Derivative-free local minimization (Nelder–Mead simplex with
//! dimension-adaptive coefficients).

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when every vertex is within this distance of the best one.
    pub x_tol: f64,
    /// Stop as soon as the best value drops below this.
    pub f_target: f64,
    /// Number of restarts from the current best point after the simplex
    /// collapses, each with the initial step scaled by `restart_shrink`.
    pub restarts: usize,
    pub restart_shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 4000,
            x_tol: 1e-10,
            f_target: f64::NEG_INFINITY,
            restarts: 3,
            restart_shrink: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// True if the simplex collapsed or the target was reached before the
    /// evaluation budget ran out.
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with an axis-aligned initial simplex of
/// side `step[i]`. Non-finite objective values are treated as `+∞`. The
/// returned value never exceeds `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), step.len(), "step and start dimensions differ");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    let mut converged = false;
    let mut scale = 1.0;
    for _ in 0..=opts.restarts {
        let run_step: Vec<f64> = step.iter().map(|s| s * scale).collect();
        let (x, fx, collapsed) = simplex_run(&mut eval, &best_x, best_f, &run_step, opts, &mut evals);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        converged = collapsed || best_f <= opts.f_target;
        if best_f <= opts.f_target || evals >= opts.max_evals {
            break;
        }
        scale *= opts.restart_shrink;
    }
    Minimum { x: best_x, f: best_f, evals, converged }
}

fn simplex_run<E>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    step: &[f64],
    opts: &NelderMeadOptions,
    evals: &mut usize,
) -> (Vec<f64>, f64, bool)
where
    E: FnMut(&[f64], &mut usize) -> f64,
{
    let n = x0.len();
    // dimension-adaptive coefficients; the classic (1, 2, ½, ½) for n ≤ 2
    let nf = n.max(2) as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = alloc::vec![x0.to_vec()];
    let mut vals = alloc::vec![f0];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        vals.push(eval(&p, evals));
        pts.push(p);
    }

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&k| pts[k].clone()).collect();
        vals = order.iter().map(|&k| vals[k]).collect();

        let spread = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.x_tol {
            return (pts[0].clone(), vals[0], true);
        }
        if vals[0] <= opts.f_target || *evals >= opts.max_evals {
            return (pts[0].clone(), vals[0], vals[0] <= opts.f_target);
        }

        let centroid: Vec<f64> = (0..n).map(|d| pts[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (pts[n][d] - centroid[d])).collect() };

        let xr = along(-alpha);
        let fr = eval(&xr, evals);
        if fr < vals[0] {
            let xe = along(-alpha * gamma);
            let fe = eval(&xe, evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let x = along(-alpha * rho);
            let v = eval(&x, evals);
            (x, v)
        } else {
            let x = along(rho);
            let v = eval(&x, evals);
            (x, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for k in 1..=n {
            let shrunk: Vec<f64> = (0..n).map(|d| pts[0][d] + sigma * (pts[k][d] - pts[0][d])).collect();
            vals[k] = eval(&shrunk, evals);
            pts[k] = shrunk;
        }
    }
}

//! Derivative-free simplex minimization, a quasi-Newton polish with numeric
//! gradients, and central-difference derivative helpers.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Initial step along each coordinate.
    pub initial_step: f64,
    /// Stop when the spread of objective values in the simplex falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { initial_step: 0.25, f_tol: 1e-10, x_tol: 1e-8, max_evals: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead minimization with adaptive coefficients (Gao & Han) for `n > 2`.
///
/// Non-finite objective values are treated as `+inf`, so infeasible regions act
/// as walls.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Minimum {
    let n = x0.len();
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
    if n == 0 {
        let v = eval(x0, &mut evals);
        return Minimum { x: Vec::new(), f: v, evals, iterations: 0, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) =
        if n > 2 { (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf) } else { (1.0, 2.0, 0.5, 0.5) };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step * (1.0 + x0[i].abs()).min(4.0);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evals < opts.max_evals {
        // Order vertices by objective.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if values[0].is_finite() && spread.abs() <= opts.f_tol * (1.0 + values[0].abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let worst = simplex[n].clone();
        for j in 0..n {
            trial[j] = centroid[j] + alpha * (centroid[j] - worst[j]);
        }
        let fr = eval(&trial, &mut evals);
        if fr < values[0] {
            for j in 0..n {
                trial2[j] = centroid[j] + gamma * (trial[j] - centroid[j]);
            }
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                simplex[n].copy_from_slice(&trial2);
                values[n] = fe;
            } else {
                simplex[n].copy_from_slice(&trial);
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n].copy_from_slice(&trial);
            values[n] = fr;
            continue;
        }
        // Contraction (outside if the reflection improved on the worst vertex).
        let outside = fr < values[n];
        for j in 0..n {
            trial2[j] = if outside {
                centroid[j] + rho * (trial[j] - centroid[j])
            } else {
                centroid[j] + rho * (worst[j] - centroid[j])
            };
        }
        let fc = eval(&trial2, &mut evals);
        if fc < fr.min(values[n]) {
            simplex[n].copy_from_slice(&trial2);
            values[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = best[j] + sigma * (simplex[i][j] - best[j]);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), f: values[best], evals, iterations, converged }
}

/// Central-difference step used for gradients.
#[inline]
pub fn gradient_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

/// Central-difference step used for Hessians.
#[inline]
pub fn hessian_step(x: f64) -> f64 {
    1e-4 * (1.0 + x.abs())
}

/// Central-difference gradient with steps `1e-5 (1 + |x_j|)`.
pub fn numeric_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = gradient_step(x[j]);
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian with steps `1e-4 (1 + |x_j|)`, returned row-major
/// and exactly symmetric.
pub fn numeric_hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut hess = vec![0.0; d * d];
    let mut probe = x.to_vec();
    let f0 = f(x);
    let steps: Vec<f64> = x.iter().map(|&v| hessian_step(v)).collect();
    for i in 0..d {
        let hi = steps[i];
        probe[i] = x[i] + hi;
        let up = f(&probe);
        probe[i] = x[i] - hi;
        let down = f(&probe);
        probe[i] = x[i];
        hess[i * d + i] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64, probe: &mut Vec<f64>| {
                probe[i] = x[i] + si * hi;
                probe[j] = x[j] + sj * hj;
                let v = f(probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0, &mut probe) - corner(1.0, -1.0, &mut probe) - corner(-1.0, 1.0, &mut probe)
                + corner(-1.0, -1.0, &mut probe))
                / (4.0 * hi * hj);
            hess[i * d + j] = v;
            hess[j * d + i] = v;
        }
    }
    hess
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiNewtonOptions {
    /// Converged when `max_j |grad_j| <= grad_tol`.
    pub grad_tol: f64,
    pub max_iter: usize,
}

/// BFGS minimization from `x0` with numeric gradients and backtracking line search.
///
/// Returns the best point seen; never worse than the start.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &QuasiNewtonOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    evals += 1;
    let mut grad = numeric_gradient(&mut f, &x);
    evals += 2 * n;
    let mut inv_h = identity(n);
    let mut iterations = 0;
    let mut converged = grad_norm(&grad) <= opts.grad_tol;
    while !converged && iterations < opts.max_iter && fx.is_finite() {
        iterations += 1;
        let mut dir: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| inv_h[i * n + j] * grad[j]).sum::<f64>()).collect();
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if !(slope < 0.0) {
            // Not a descent direction: reset to steepest descent.
            inv_h = identity(n);
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = f(&trial);
            evals += 1;
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        // Stop when no step gives a strict decrease: f is flat to rounding here.
        let Some((x_new, f_new)) = accepted.filter(|(_, ft)| *ft < fx) else {
            break;
        };
        let g_new = numeric_gradient(&mut f, &x_new);
        evals += 2 * n;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * norm2(&s) * norm2(&y) {
            if iterations == 1 {
                // Scale the initial inverse Hessian.
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                inv_h.iter_mut().for_each(|v| *v *= scale);
            }
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv_h[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    inv_h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = x_new;
        fx = f_new;
        grad = g_new;
        converged = grad_norm(&grad) <= opts.grad_tol;
    }
    Minimum { x, f: fx, evals, iterations, converged }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn grad_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

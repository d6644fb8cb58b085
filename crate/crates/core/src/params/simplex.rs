//! Derivative-free simplex minimization with box constraints.
//!
//! Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5 and
//! shrink 0.5. Every candidate point is projected onto the feasible box
//! before evaluation, so the objective is never probed outside its domain.

/// Axis-aligned feasible box.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Bounds {
        assert_eq!(lower.len(), upper.len());
        for (lo, hi) in lower.iter().zip(&upper) {
            assert!(lo <= hi, "lower bound above upper bound");
        }
        Bounds { lower, upper }
    }

    pub fn project(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `start` with initial per-axis offsets `steps`.
///
/// Stops when the simplex value spread falls below
/// `rel_tol * (1 + |best value|)` or after `max_iter` iterations.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    bounds: &Bounds,
    max_iter: usize,
    rel_tol: f64,
) -> SimplexResult {
    let n = start.len();
    assert_eq!(steps.len(), n);
    assert_eq!(bounds.lower.len(), n);
    assert!(n > 0);

    let mut evaluations = 0usize;
    let eval = |x: &mut Vec<f64>, f: &mut F, evals: &mut usize| {
        bounds.project(x);
        *evals += 1;
        f(x)
    };

    // Initial simplex: the start plus one vertex offset along each axis.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    let v0 = eval(&mut x0, &mut f, &mut evaluations);
    simplex.push((x0, v0));
    for i in 0..n {
        let mut xi = start.to_vec();
        xi[i] += steps[i];
        let vi = eval(&mut xi, &mut f, &mut evaluations);
        simplex.push((xi, vi));
    }

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() < rel_tol * (1.0 + best.abs()) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let reflect = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + coef * (centroid[d] - simplex[n].0[d]))
                .collect()
        };

        let mut xr = reflect(1.0);
        let vr = eval(&mut xr, &mut f, &mut evaluations);
        if vr < simplex[0].1 {
            let mut xe = reflect(2.0);
            let ve = eval(&mut xe, &mut f, &mut evaluations);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let (mut xc, inside) = if vr < simplex[n].1 {
                (reflect(0.5), false)
            } else {
                (reflect(-0.5), true)
            };
            let vc = eval(&mut xc, &mut f, &mut evaluations);
            let accept = if inside { vc < simplex[n].1 } else { vc <= vr };
            if accept {
                simplex[n] = (xc, vc);
            } else {
                // Shrink towards the best vertex.
                let best_x = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = (0..n)
                        .map(|d| best_x[d] + 0.5 * (vertex.0[d] - best_x[d]))
                        .collect();
                    let v = eval(&mut x, &mut f, &mut evaluations);
                    *vertex = (x, v);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    SimplexResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let bounds = Bounds::new(vec![-10.0, -10.0], vec![10.0, 10.0]);
        let result = minimize(
            |x| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            &bounds,
            500,
            1e-10,
        );
        assert!(result.converged);
        assert!((result.x[0] - 1.0).abs() < 1e-4);
        assert!((result.x[1] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn respects_box_constraints() {
        let bounds = Bounds::new(vec![0.0], vec![5.0]);
        let result = minimize(
            |x| (x[0] + 2.0).powi(2),
            &[3.0],
            &[0.5],
            &bounds,
            500,
            1e-10,
        );
        // Unconstrained minimum at -2 projects onto the lower bound.
        assert!(result.x[0].abs() < 1e-6);
        assert!(result.x[0] >= 0.0);
    }

    #[test]
    fn is_deterministic() {
        let bounds = Bounds::new(vec![-5.0, -5.0, -5.0], vec![5.0, 5.0, 5.0]);
        let objective = |x: &[f64]| {
            (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2) + (x[2] * x[0] - 0.1).powi(2)
        };
        let a = minimize(objective, &[1.0, 1.0, 1.0], &[0.2, 0.2, 0.2], &bounds, 300, 1e-9);
        let b = minimize(objective, &[1.0, 1.0, 1.0], &[0.2, 0.2, 0.2], &bounds, 300, 1e-9);
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
        assert_eq!(a.evaluations, b.evaluations);
    }
}

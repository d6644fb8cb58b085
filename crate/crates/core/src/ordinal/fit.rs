//! Parameter estimation for the ordinal outcome model.
//!
//! The default criterion is the summed squared distance between forecast
//! probability vectors and one-hot outcomes, minimized by Levenberg-
//! Marquardt with an analytic Jacobian; the parameter vector is small
//! (two cut points plus at most five slopes), so each step solves a tiny
//! normal system. A maximum-likelihood mode using the simplex optimizer is
//! available for sensitivity checks. Both modes reject step candidates
//! that would put the cut points out of order.

use crate::error::{Error, Result};
use crate::params::simplex::{self, Bounds};
use crate::types::Outcome;

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Forecast probabilities for one feature vector under parameters
/// `theta = [cut_home, cut_home_draw, slopes...]`.
pub(crate) fn probabilities(theta: &[f64], x: &[f64]) -> [f64; 3] {
    let eta: f64 = theta[2..].iter().zip(x).map(|(b, v)| b * v).sum();
    let u = sigmoid(theta[0] + eta);
    let v = sigmoid(theta[1] + eta);
    [u, v - u, 1.0 - v]
}

/// Squared distance between forecasts and one-hot outcomes, summed over
/// rows.
pub(crate) fn squared_error(theta: &[f64], rows: &[(Vec<f64>, Outcome)]) -> f64 {
    let mut total = 0.0;
    for (x, y) in rows {
        let p = probabilities(theta, x);
        for (i, pi) in p.iter().enumerate() {
            let target = if i == y.rank() { 1.0 } else { 0.0 };
            let r = pi - target;
            total += r * r;
        }
    }
    total
}

/// Multinomial log-likelihood, with probabilities floored away from zero.
pub(crate) fn log_likelihood(theta: &[f64], rows: &[(Vec<f64>, Outcome)]) -> f64 {
    let mut total = 0.0;
    for (x, y) in rows {
        let p = probabilities(theta, x);
        total += p[y.rank()].max(1e-12).ln();
    }
    total
}

/// Cut points from the empirical outcome frequencies, slopes at zero: the
/// no-predictor optimum and the standard starting point.
pub(crate) fn null_start(rows: &[(Vec<f64>, Outcome)], dim: usize) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut counts = [0usize; 3];
    for (_, y) in rows {
        counts[y.rank()] += 1;
    }
    // Clamp so degenerate inputs still give finite logits.
    let f_home = (counts[0] as f64 / n).clamp(1e-6, 1.0 - 1e-6);
    let f_home_draw = ((counts[0] + counts[1]) as f64 / n).clamp(f_home, 1.0 - 1e-6);
    let mut theta = vec![0.0; dim];
    theta[0] = logit(f_home);
    theta[1] = logit(f_home_draw.max(f_home + 1e-9));
    theta
}

fn check_training(rows: &[(Vec<f64>, Outcome)], k: usize) -> Result<()> {
    if rows.len() < 50 {
        return Err(Error::not_enough(format!(
            "outcome model needs at least 50 training matches, have {}",
            rows.len()
        )));
    }
    let mut counts = [0usize; 3];
    for (x, y) in rows {
        if x.len() != k {
            return Err(Error::invalid(format!(
                "feature vector has {} entries, expected {k}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        counts[y.rank()] += 1;
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        let name = [Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin][missing];
        return Err(Error::fit(format!(
            "outcome {name} never occurs in the training data"
        )));
    }
    Ok(())
}

/// Solve `A x = b` for symmetric positive definite `A` via Cholesky.
/// Returns `None` when the factorization breaks down.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

/// Accumulate the normal system `J^T J` and gradient `J^T r` of the
/// squared-error objective at `theta`.
fn normal_system(
    theta: &[f64],
    rows: &[(Vec<f64>, Outcome)],
) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let dim = theta.len();
    let mut jtj = vec![vec![0.0; dim]; dim];
    let mut jtr = vec![0.0; dim];
    let mut sse = 0.0;
    let mut grad_row = vec![0.0; dim];
    for (x, y) in rows {
        let eta: f64 = theta[2..].iter().zip(x).map(|(b, v)| b * v).sum();
        let u = sigmoid(theta[0] + eta);
        let v = sigmoid(theta[1] + eta);
        let du = u * (1.0 - u);
        let dv = v * (1.0 - v);
        let p = [u, v - u, 1.0 - v];
        // Jacobian rows for (home, draw, away) wrt [c1, c2, slopes...]:
        // d p_home = [du, 0, du * x], d p_draw = [-du, dv, (dv - du) * x],
        // d p_away = [0, -dv, -dv * x].
        for (comp, (c1_term, c2_term)) in
            [(du, 0.0), (-du, dv), (0.0, -dv)].into_iter().enumerate()
        {
            let target = if comp == y.rank() { 1.0 } else { 0.0 };
            let r = p[comp] - target;
            sse += r * r;
            grad_row[0] = c1_term;
            grad_row[1] = c2_term;
            let slope_factor = c1_term + c2_term;
            for (j, xv) in x.iter().enumerate() {
                grad_row[2 + j] = slope_factor * xv;
            }
            for i in 0..dim {
                jtr[i] += grad_row[i] * r;
                for j in 0..=i {
                    jtj[i][j] += grad_row[i] * grad_row[j];
                }
            }
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            jtj[i][j] = jtj[j][i];
        }
    }
    (jtj, jtr, sse)
}

pub(crate) struct LsFit {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt minimization of the squared-error objective.
/// `start` warm-starts the search; otherwise fitting begins from the
/// no-predictor optimum.
pub(crate) fn least_squares_fit(
    rows: &[(Vec<f64>, Outcome)],
    k: usize,
    start: Option<&[f64]>,
) -> Result<LsFit> {
    check_training(rows, k)?;
    let dim = k + 2;
    let mut theta = match start {
        Some(t) if t.len() == dim && t.iter().all(|v| v.is_finite()) && t[0] <= t[1] => {
            t.to_vec()
        }
        _ => null_start(rows, dim),
    };
    let mut sse = squared_error(&theta, rows);
    let mut mu = 1e-3;
    let mut iterations = 0;

    for _ in 0..200 {
        iterations += 1;
        let (jtj, jtr, _) = normal_system(&theta, rows);
        let grad_max = jtr.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_max < 1e-10 {
            break;
        }
        let mut improved = false;
        for _ in 0..25 {
            // Marquardt scaling: damp each diagonal entry proportionally.
            let mut a = jtj.clone();
            for i in 0..dim {
                a[i][i] += mu * jtj[i][i].max(1e-12);
            }
            let neg_g: Vec<f64> = jtr.iter().map(|g| -g).collect();
            if let Some(step) = cholesky_solve(&a, &neg_g) {
                let candidate: Vec<f64> =
                    theta.iter().zip(&step).map(|(t, s)| t + s).collect();
                // Keep the cut points ordered; a disordered candidate is
                // treated like a failed step.
                if candidate[0] <= candidate[1] {
                    let candidate_sse = squared_error(&candidate, rows);
                    if candidate_sse < sse {
                        let gain = sse - candidate_sse;
                        theta = candidate;
                        sse = candidate_sse;
                        mu = (mu / 3.0).max(1e-12);
                        improved = true;
                        if gain < 1e-10 * (1.0 + sse) {
                            return Ok(LsFit {
                                theta,
                                objective: sse,
                                iterations,
                            });
                        }
                        break;
                    }
                }
            }
            mu *= 4.0;
            if mu > 1e12 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(LsFit {
        theta,
        objective: sse,
        iterations,
    })
}

/// Maximum-likelihood fit via the simplex optimizer.
pub(crate) fn maximum_likelihood_fit(
    rows: &[(Vec<f64>, Outcome)],
    k: usize,
    start: Option<&[f64]>,
) -> Result<LsFit> {
    check_training(rows, k)?;
    let dim = k + 2;
    let start_theta = match start {
        Some(t) if t.len() == dim && t.iter().all(|v| v.is_finite()) && t[0] <= t[1] => {
            t.to_vec()
        }
        _ => null_start(rows, dim),
    };
    let mut lower = vec![-30.0; dim];
    let mut upper = vec![30.0; dim];
    for b in lower.iter_mut().skip(2) {
        *b = -50.0;
    }
    for b in upper.iter_mut().skip(2) {
        *b = 50.0;
    }
    let bounds = Bounds::new(lower, upper);
    let steps = vec![0.25; dim];
    let result = simplex::minimize(
        |theta| {
            if theta[0] > theta[1] {
                return f64::INFINITY;
            }
            -log_likelihood(theta, rows)
        },
        &start_theta,
        &steps,
        &bounds,
        2000,
        1e-10,
    );
    if !result.value.is_finite() {
        return Err(Error::fit("likelihood optimization diverged"));
    }
    Ok(LsFit {
        theta: result.x,
        objective: result.value,
        iterations: result.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic_rows(n: usize, theta: &[f64], seed: u64) -> Vec<(Vec<f64>, Outcome)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = theta.len() - 2;
        (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..k).map(|_| 3.0 * (rng.random::<f64>() - 0.5)).collect();
                let p = probabilities(theta, &x);
                let draw: f64 = rng.random();
                let y = if draw < p[0] {
                    Outcome::HomeWin
                } else if draw < p[0] + p[1] {
                    Outcome::Draw
                } else {
                    Outcome::AwayWin
                };
                (x, y)
            })
            .collect()
    }

    #[test]
    fn probabilities_sum_to_one_and_order_with_eta() {
        let theta = [-0.2, 0.9, 0.5];
        let p = probabilities(&theta, &[1.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| *v >= 0.0));
        let p_hi = probabilities(&theta, &[3.0]);
        assert!(p_hi[0] > p[0]);
        assert!(p_hi[2] < p[2]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let rows = synthetic_rows(80, &[-0.3, 0.8, 0.4, -0.2], 11);
        let theta = vec![-0.1, 0.5, 0.2, 0.1];
        let (_, jtr, _) = normal_system(&theta, &rows);
        // The gradient of the squared error is 2 * J^T r.
        let h = 1e-6;
        for i in 0..theta.len() {
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            let numeric = (squared_error(&plus, &rows) - squared_error(&minus, &rows)) / (2.0 * h);
            assert!(
                (numeric - 2.0 * jtr[i]).abs() < 1e-4 * (1.0 + numeric.abs()),
                "component {i}: numeric {numeric} vs analytic {}",
                2.0 * jtr[i]
            );
        }
    }

    #[test]
    fn null_fit_recovers_empirical_frequencies() {
        let mut rows: Vec<(Vec<f64>, Outcome)> = Vec::new();
        for _ in 0..30 {
            rows.push((vec![], Outcome::HomeWin));
        }
        for _ in 0..18 {
            rows.push((vec![], Outcome::Draw));
        }
        for _ in 0..12 {
            rows.push((vec![], Outcome::AwayWin));
        }
        for fit in [
            least_squares_fit(&rows, 0, None).unwrap(),
            maximum_likelihood_fit(&rows, 0, None).unwrap(),
        ] {
            let p = probabilities(&fit.theta, &[]);
            assert!((p[0] - 0.5).abs() < 1e-3, "home {}", p[0]);
            assert!((p[1] - 0.3).abs() < 1e-3, "draw {}", p[1]);
            assert!((p[2] - 0.2).abs() < 1e-3, "away {}", p[2]);
        }
    }

    #[test]
    fn least_squares_recovers_a_known_model() {
        let truth = [-0.2, 0.9445, 0.4, -0.25];
        let rows = synthetic_rows(20000, &truth, 42);
        let fit = least_squares_fit(&rows, 2, None).unwrap();
        for (est, tru) in fit.theta.iter().zip(truth.iter()) {
            assert!(
                (est - tru).abs() < 0.05,
                "estimate {est} vs truth {tru} of {:?}",
                fit.theta
            );
        }
    }

    #[test]
    fn warm_start_with_extra_zero_slopes_never_hurts() {
        let rows = synthetic_rows(500, &[-0.2, 0.9, 0.5, 0.0], 7);
        let small: Vec<(Vec<f64>, Outcome)> =
            rows.iter().map(|(x, y)| (vec![x[0]], *y)).collect();
        let base = least_squares_fit(&small, 1, None).unwrap();
        let mut warm = base.theta.clone();
        warm.insert(warm.len(), 0.0);
        let bigger = least_squares_fit(&rows, 2, Some(&warm)).unwrap();
        assert!(bigger.objective <= base.objective + 1e-9);
    }

    #[test]
    fn degenerate_training_is_rejected() {
        let rows: Vec<(Vec<f64>, Outcome)> =
            (0..60).map(|_| (vec![0.0], Outcome::HomeWin)).collect();
        assert!(matches!(
            least_squares_fit(&rows, 1, None),
            Err(Error::Fit(_))
        ));
        let few: Vec<(Vec<f64>, Outcome)> = (0..10)
            .map(|i| {
                let y = match i % 3 {
                    0 => Outcome::HomeWin,
                    1 => Outcome::Draw,
                    _ => Outcome::AwayWin,
                };
                (vec![0.0], y)
            })
            .collect();
        assert!(matches!(
            least_squares_fit(&few, 1, None),
            Err(Error::NotEnoughData(_))
        ));
    }

    #[test]
    fn cut_points_stay_ordered() {
        let rows = synthetic_rows(300, &[-0.1, 0.4, 1.5], 3);
        let fit = least_squares_fit(&rows, 1, None).unwrap();
        assert!(fit.theta[0] <= fit.theta[1]);
    }
}

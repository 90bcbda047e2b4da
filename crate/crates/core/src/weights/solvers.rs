//! Numerical solvers behind the covariance-aware weighting schemes.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight on the previous iterate in the damped fixed-point update.
    pub rp_damping: f64,
    /// Stop the fixed-point iteration once no weight moves more than this.
    pub rp_step_tolerance: f64,
    pub rp_max_iterations: usize,
    /// Largest accepted relative spread of risk contributions.
    pub rp_tolerance: f64,
    /// Largest accepted relative KKT residual of the bounded QP.
    pub kkt_tolerance: f64,
    /// Ridge added as `factor * trace / k` when a factorization fails.
    pub regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rp_damping: 0.5,
            rp_step_tolerance: 1e-10,
            rp_max_iterations: 10_000,
            rp_tolerance: 1e-8,
            kkt_tolerance: 1e-8,
            regularization: 1e-8,
        }
    }
}

/// Cholesky factor of `x`, retried once with a ridge of
/// `regularization * trace(x) / k` on the diagonal.
pub(crate) fn factor(
    x: &DMatrix<f64>,
    regularization: f64,
) -> Result<(DMatrix<f64>, Cholesky<f64, Dyn>)> {
    if let Some(ch) = Cholesky::new(x.clone()) {
        return Ok((x.clone(), ch));
    }
    let k = x.nrows();
    let ridge = regularization * x.trace() / k as f64;
    if !(ridge > 0.0) {
        return Err(Error::SingularMatrix);
    }
    let reg = x + DMatrix::identity(k, k) * ridge;
    log::warn!("covariance not positive definite; adding ridge {ridge:e}");
    match Cholesky::new(reg.clone()) {
        Some(ch) => Ok((reg, ch)),
        None => Err(Error::SingularMatrix),
    }
}

/// Largest relative deviation of the risk contributions `w_i (Xw)_i` from
/// their mean.
pub fn risk_contribution_spread(x: &DMatrix<f64>, w: &[f64]) -> f64 {
    let wv = DVector::from_column_slice(w);
    let xw = x * &wv;
    let rc: Vec<f64> = w.iter().zip(xw.iter()).map(|(a, b)| a * b).collect();
    let mean = rc.iter().sum::<f64>() / rc.len() as f64;
    rc.iter()
        .map(|r| (r - mean).abs() / mean.abs())
        .fold(0.0, f64::max)
}

/// Equal-risk-contribution weights: damped fixed point on
/// `w_i = w'Xw / (k (Xw)_i)`, with cyclical coordinate descent when the
/// fixed point stalls or leaves the residual above tolerance.
pub fn risk_parity(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let k = x.nrows();
    if k == 0 {
        return Err(Error::EmptyPortfolio);
    }
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let (x, _) = factor(x, cfg.regularization)?;
    let x = &x;

    let mut w: Vec<f64> = (0..k).map(|i| 1.0 / x[(i, i)].sqrt()).collect();
    normalize(&mut w);
    let mut stalled = false;
    for _ in 0..cfg.rp_max_iterations {
        let wv = DVector::from_column_slice(&w);
        let xw = x * &wv;
        let port_var = wv.dot(&xw);
        if xw.iter().any(|v| !(*v > 0.0)) {
            stalled = true;
            break;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|i| {
                let target = port_var / (k as f64 * xw[i]);
                cfg.rp_damping * w[i] + (1.0 - cfg.rp_damping) * target
            })
            .collect();
        normalize(&mut next);
        let step = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        if step < cfg.rp_step_tolerance {
            break;
        }
    }
    if !stalled && risk_contribution_spread(x, &w) <= cfg.rp_tolerance {
        return Ok(w);
    }

    let mut y = w.clone();
    let budget = 1.0 / k as f64;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.rp_max_iterations {
        for i in 0..k {
            let xii = x[(i, i)];
            let c: f64 = (0..k).filter(|&j| j != i).map(|j| x[(i, j)] * y[j]).sum();
            y[i] = (-c + (c * c + 4.0 * xii * budget).sqrt()) / (2.0 * xii);
        }
        let mut candidate = y.clone();
        normalize(&mut candidate);
        residual = risk_contribution_spread(x, &candidate);
        if residual <= cfg.rp_tolerance * 1e-2 {
            return Ok(candidate);
        }
    }
    let mut candidate = y;
    normalize(&mut candidate);
    if residual <= cfg.rp_tolerance {
        return Ok(candidate);
    }
    Err(Error::SolverFailure {
        solver: "risk parity",
        iterations: cfg.rp_max_iterations,
        residual,
    })
}

/// Closed-form minimum-variance weights `X^-1 1 / (1' X^-1 1)`.
pub fn min_variance(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let k = x.nrows();
    if k == 0 {
        return Err(Error::EmptyPortfolio);
    }
    let (_, ch) = factor(x, cfg.regularization)?;
    let z = ch.solve(&DVector::from_element(k, 1.0));
    let total = z.sum();
    if !(total.abs() > 0.0) || !total.is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(z.iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Minimizes `w'Xw` subject to `sum(w) = 1` and `lower <= w <= upper`
/// (use `f64::INFINITY` for an open upper side) with a primal active-set
/// method. Returns the weights and the final relative KKT residual.
pub fn bounded_min_variance(
    x: &DMatrix<f64>,
    lower: &[f64],
    upper: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let k = x.nrows();
    if k == 0 {
        return Err(Error::EmptyPortfolio);
    }
    assert_eq!(lower.len(), k);
    assert_eq!(upper.len(), k);
    check_feasible(lower, upper)?;
    let (q, _) = factor(x, cfg.regularization)?;

    let mut w = feasible_start(lower, upper);
    let mut state: Vec<Bound> = (0..k)
        .map(|i| {
            if w[i] == lower[i] {
                Bound::Lower
            } else if w[i] == upper[i] {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect();

    let max_iterations = 50 * k + 100;
    for _ in 0..max_iterations {
        let g = (&q * DVector::from_column_slice(&w)) * 2.0;
        let free: Vec<usize> = (0..k).filter(|&i| state[i] == Bound::Free).collect();
        let (step, nu) = if free.is_empty() {
            (vec![0.0; k], None)
        } else {
            let (p, nu) = kkt_step(&q, &g, &free)?;
            let mut full = vec![0.0; k];
            for (slot, &i) in free.iter().enumerate() {
                full[i] = p[slot];
            }
            (full, Some(nu))
        };

        let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step_norm <= 1e-14 {
            let nu = nu.unwrap_or_else(|| multiplier_interval_midpoint(&g, &state));
            // most violated bound multiplier
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let mut worst: Option<(usize, f64)> = None;
            for i in 0..k {
                let violation = match state[i] {
                    Bound::Lower => nu - g[i],
                    Bound::Upper => g[i] - nu,
                    Bound::Free => continue,
                };
                if violation > 1e-12 * scale && worst.is_none_or(|(_, v)| violation > v) {
                    worst = Some((i, violation));
                }
            }
            match worst {
                Some((i, _)) => state[i] = Bound::Free,
                None => {
                    let residual = kkt_residual(&q, &w, lower, upper);
                    if residual <= cfg.kkt_tolerance {
                        return Ok((w, residual));
                    }
                    return Err(Error::SolverFailure {
                        solver: "bounded min-variance",
                        iterations: max_iterations,
                        residual,
                    });
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking: Option<(usize, Bound)> = None;
        for &i in free.iter() {
            let p = step[i];
            let (limit, side) = if p < 0.0 && lower[i].is_finite() {
                ((lower[i] - w[i]) / p, Bound::Lower)
            } else if p > 0.0 && upper[i].is_finite() {
                ((upper[i] - w[i]) / p, Bound::Upper)
            } else {
                continue;
            };
            if limit < alpha {
                alpha = limit.max(0.0);
                blocking = Some((i, side));
            }
        }
        for &i in free.iter() {
            w[i] += alpha * step[i];
        }
        if let Some((i, side)) = blocking {
            w[i] = if side == Bound::Lower { lower[i] } else { upper[i] };
            state[i] = side;
        }
    }
    Err(Error::SolverFailure {
        solver: "bounded min-variance",
        iterations: max_iterations,
        residual: kkt_residual(&q, &w, lower, upper),
    })
}

fn check_feasible(lower: &[f64], upper: &[f64]) -> Result<()> {
    for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
        if !l.is_finite() || l > u {
            return Err(Error::Infeasible(format!(
                "asset {i}: lower bound {l} above upper bound {u}"
            )));
        }
    }
    let lo: f64 = lower.iter().sum();
    let hi: f64 = upper.iter().sum();
    if lo > 1.0 + 1e-12 || hi < 1.0 - 1e-12 {
        return Err(Error::Infeasible(format!(
            "weights must sum to 1 but bounds allow [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `clamp(c, l_i, u_i)` with `c` chosen by bisection so the weights sum to 1.
fn feasible_start(lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let at = |c: f64| -> Vec<f64> {
        lower
            .iter()
            .zip(upper)
            .map(|(l, u)| c.max(*l).min(*u))
            .collect()
    };
    let mut lo = lower.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = lower.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    if upper.iter().all(|u| u.is_finite()) {
        hi = hi.max(upper.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).iter().sum::<f64>() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = at(hi);
    let gap = 1.0 - w.iter().sum::<f64>();
    if gap != 0.0 {
        // park the rounding gap on the coordinate with the most room
        let room = |i: usize| -> f64 {
            if gap > 0.0 {
                upper[i] - w[i]
            } else {
                w[i] - lower[i]
            }
        };
        if let Some(i) = (0..w.len()).max_by(|&a, &b| room(a).total_cmp(&room(b))) {
            if room(i) >= gap.abs() {
                w[i] += gap;
            }
        }
    }
    w
}

/// Newton step restricted to the free coordinates, keeping `sum(p) = 0`.
fn kkt_step(q: &DMatrix<f64>, g: &DVector<f64>, free: &[usize]) -> Result<(Vec<f64>, f64)> {
    let m = free.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    let mut rhs = DVector::zeros(m + 1);
    for (r, &i) in free.iter().enumerate() {
        for (c, &j) in free.iter().enumerate() {
            a[(r, c)] = 2.0 * q[(i, j)];
        }
        a[(r, m)] = -1.0;
        a[(m, r)] = 1.0;
        rhs[r] = -g[i];
    }
    let sol = a.full_piv_lu().solve(&rhs).ok_or(Error::SingularMatrix)?;
    Ok((sol.rows(0, m).iter().copied().collect(), sol[m]))
}

fn multiplier_interval_midpoint(g: &DVector<f64>, state: &[Bound]) -> f64 {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (i, s) in state.iter().enumerate() {
        match s {
            Bound::Upper => lo = lo.max(g[i]),
            Bound::Lower => hi = hi.min(g[i]),
            Bound::Free => {}
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// Relative KKT residual of `min w'Xw, sum w = 1, lower <= w <= upper`:
/// stationarity on free coordinates, sign of bound multipliers, and primal
/// feasibility, scaled by the largest gradient entry.
pub fn kkt_residual(x: &DMatrix<f64>, w: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let k = w.len();
    let g = (x * DVector::from_column_slice(w)) * 2.0;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let on_lower = |i: usize| (w[i] - lower[i]).abs() <= 1e-12;
    let on_upper = |i: usize| upper[i].is_finite() && (upper[i] - w[i]).abs() <= 1e-12;
    let free: Vec<usize> = (0..k).filter(|&i| !on_lower(i) && !on_upper(i)).collect();
    let nu = if free.is_empty() {
        let state: Vec<Bound> = (0..k)
            .map(|i| if on_lower(i) { Bound::Lower } else { Bound::Upper })
            .collect();
        multiplier_interval_midpoint(&g, &state)
    } else {
        free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64
    };
    let mut r: f64 = 0.0;
    for i in 0..k {
        let v = if free.contains(&i) {
            (g[i] - nu).abs()
        } else if on_lower(i) {
            (nu - g[i]).max(0.0)
        } else {
            (g[i] - nu).max(0.0)
        };
        r = r.max(v / scale);
        r = r.max((lower[i] - w[i]).max(0.0));
        r = r.max((w[i] - upper[i]).max(0.0));
    }
    r.max((w.iter().sum::<f64>() - 1.0).abs())
}

fn normalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd(k: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() * 1e-3 + DMatrix::identity(k, k) * 1e-5
    }

    #[test]
    fn risk_parity_equalizes_contributions() {
        let cfg = SolverConfig::default();
        for seed in 0..20 {
            let x = pd(3 + (seed as usize % 8), seed);
            let w = risk_parity(&x, &cfg).unwrap();
            assert!(risk_contribution_spread(&x, &w) <= 1e-8);
            assert!(w.iter().all(|v| *v > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn risk_parity_survives_strong_correlation() {
        let mut x = DMatrix::from_element(4, 4, 0.99);
        for i in 0..4 {
            x[(i, i)] = 1.0 + i as f64;
        }
        let w = risk_parity(&x, &SolverConfig::default()).unwrap();
        assert!(risk_contribution_spread(&x, &w) <= 1e-8);
    }

    #[test]
    fn min_variance_first_order_condition() {
        let x = pd(6, 42);
        let w = min_variance(&x, &SolverConfig::default()).unwrap();
        let xw = &x * DVector::from_column_slice(&w);
        let mean = xw.mean();
        assert!(xw.iter().all(|v| ((v - mean) / mean).abs() < 1e-8));
    }

    #[test]
    fn singular_rescued_or_rejected() {
        let x = DMatrix::from_element(2, 2, 1.0);
        let w = min_variance(&x, &SolverConfig::default()).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-6);
        let zero = DMatrix::zeros(2, 2);
        assert!(matches!(
            min_variance(&zero, &SolverConfig::default()),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn bounded_interior_and_binding() {
        let cfg = SolverConfig::default();
        let id = DMatrix::identity(4, 4);
        let (w, r) = bounded_min_variance(&id, &[0.0; 4], &[1.0; 4], &cfg).unwrap();
        assert!(w.iter().all(|v| (v - 0.25).abs() < 1e-12));
        assert!(r <= 1e-8);

        // asset 0 has the lower variance and wants more than 0.15
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let (w, _) = bounded_min_variance(&x, &[0.0, 0.0], &[0.15, 1.0], &cfg).unwrap();
        assert!((w[0] - 0.15).abs() < 1e-12 && (w[1] - 0.85).abs() < 1e-12);

        assert!(matches!(
            bounded_min_variance(&id, &[0.0; 4], &[0.15; 4], &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn bounded_matches_closed_form_when_unbounded() {
        let cfg = SolverConfig::default();
        let x = pd(5, 9);
        let closed = min_variance(&x, &cfg).unwrap();
        let (w, _) =
            bounded_min_variance(&x, &[-10.0; 5], &[f64::INFINITY; 5], &cfg).unwrap();
        for (a, b) in closed.iter().zip(&w) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn no_short_is_nonnegative_and_optimal() {
        let cfg = SolverConfig::default();
        for seed in 0..30 {
            let k = 3 + seed as usize % 7;
            let x = pd(k, 100 + seed);
            let lower = vec![0.0; k];
            let upper = vec![f64::INFINITY; k];
            let (w, r) = bounded_min_variance(&x, &lower, &upper, &cfg).unwrap();
            assert!(w.iter().all(|v| *v >= 0.0));
            assert!(r <= 1e-8, "residual {r}");
        }
    }
}

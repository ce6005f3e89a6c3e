//! Non-negative least squares by the Lawson–Hanson active-set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// ‖Ax − b‖₂.
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Least-squares solution of `a[:, cols] y = b`, scattered back to full length.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> Result<DVector<f64>> {
    let sub = a.select_columns(cols);
    let qr = sub.qr();
    let qtb = qr.q().transpose() * b;
    let y = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Solver("singular passive set in NNLS".into()))?;
    let mut full = DVector::zeros(a.ncols());
    for (k, &j) in cols.iter().enumerate() {
        full[j] = y[k];
    }
    Ok(full)
}

/// Solves min ‖Ax − b‖₂ subject to x ≥ 0.
///
/// `tol` bounds the largest positive entry of the dual vector Aᵀ(b − Ax) at
/// termination.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Result<NnlsSolution> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("{} rows against {} right-hand sides", a.nrows(), b.len())));
    }
    let max_outer = 3 * n + 10;
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose entry was immediately rejected by round-off; skipped
    // until the passive set changes for another reason.
    let mut blocked = vec![false; n];
    let mut iterations = 0;
    loop {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n)
            .filter(|&j| !passive[j] && !blocked[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]))
            .filter(|&j| w[j] > tol);
        let Some(j) = next else { break };
        iterations += 1;
        if iterations > max_outer {
            return Err(Error::Solver(format!("NNLS did not converge in {max_outer} iterations")));
        }
        passive[j] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            if inner > n + 5 {
                return Err(Error::Solver("NNLS inner loop did not terminate".into()));
            }
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s = passive_solve(a, b, &cols)?;
            if inner == 1 && s[j] <= 0.0 {
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            blocked.iter_mut().for_each(|f| *f = false);
            if cols.iter().all(|&i| s[i] > 0.0) {
                x = s;
                break;
            }
            let mut step = f64::INFINITY;
            for &i in &cols {
                if s[i] <= 0.0 {
                    step = step.min(x[i] / (x[i] - s[i]));
                }
            }
            x += (s - &x) * step;
            for &i in &cols {
                if x[i] <= 1e-300 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual_norm = (b - a * &x).norm();
    Ok(NnlsSolution { x, residual_norm, iterations })
}

/// Largest violation of the optimality conditions of min ½‖Ax − b‖²,
/// x ≥ 0: with g = Aᵀ(Ax − b), g = 0 where x > 0 and g ≥ 0 where x = 0.
pub fn kkt_violation(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let g = a.transpose() * (a * x - b);
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        if x[j] < 0.0 {
            worst = worst.max(-x[j]);
        }
        let v = if x[j] > 0.0 { g[j].abs() } else { (-g[j]).max(0.0) };
        worst = worst.max(v);
    }
    worst
}

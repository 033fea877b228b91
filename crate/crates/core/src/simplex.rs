//! Dense two-phase primal simplex with Bland's anti-cycling rule, for the
//! small strict-feasibility programs of the decision procedures. Problems
//! have at most a few dozen variables, so no sparsity or factorization
//! machinery is needed.

#![allow(clippy::needless_range_loop)] // tableau code reads naturally with index loops

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit hit (cycling guard)")]
    IterationLimit,
}

/// `maximize c.x subject to rows: a.x <= b, x >= 0`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, f64)>,
}

const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERS: usize = 20_000;

/// Solve the LP; returns the optimizer and the optimal value.
pub fn solve_max(p: &LpProblem) -> Result<(Vec<f64>, f64), SimplexError> {
    let n = p.objective.len();
    let m = p.rows.len();
    for (row, _) in &p.rows {
        assert_eq!(row.len(), n, "row length mismatch");
    }
    // Structural variables, slacks, artificials.
    // Tableau layout: columns [x (n) | slack (m) | artificial (k)], rows m,
    // plus the stored rhs. Rows with negative b are flipped so b >= 0; a
    // flipped row's slack enters with coefficient -1 and needs an artificial.
    let mut need_art: Vec<bool> = Vec::with_capacity(m);
    let mut a = vec![vec![0.0; n + m]; m];
    let mut b = vec![0.0; m];
    for (r, (row, rhs)) in p.rows.iter().enumerate() {
        let flip = *rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for c in 0..n {
            a[r][c] = sign * row[c];
        }
        a[r][n + r] = sign; // slack
        b[r] = sign * rhs;
        need_art.push(flip);
    }
    let num_art = need_art.iter().filter(|&&x| x).count();
    let total = n + m + num_art;
    let mut tab = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    {
        let mut art_at = n + m;
        for r in 0..m {
            for c in 0..(n + m) {
                tab[r][c] = a[r][c];
            }
            tab[r][total] = b[r];
            if need_art[r] {
                tab[r][art_at] = 1.0;
                basis[r] = art_at;
                art_at += 1;
            } else {
                basis[r] = n + r;
            }
        }
    }

    if num_art > 0 {
        // Phase 1: minimize the sum of artificials = maximize -sum.
        let mut cost = vec![0.0; total];
        for c in (n + m)..total {
            cost[c] = -1.0;
        }
        let val = run_simplex(&mut tab, &mut basis, &cost, total)?;
        if val < -1e-8 {
            return Err(SimplexError::Infeasible);
        }
        // Drive any remaining artificial variables out of the basis.
        for r in 0..m {
            if basis[r] >= n + m {
                let mut pivot_col = None;
                for c in 0..(n + m) {
                    if tab[r][c].abs() > PIVOT_TOL {
                        pivot_col = Some(c);
                        break;
                    }
                }
                match pivot_col {
                    Some(c) => pivot(&mut tab, &mut basis, r, c, total),
                    None => {
                        // Redundant row; zero it out.
                        for c in 0..=total {
                            tab[r][c] = 0.0;
                        }
                    }
                }
            }
        }
        // Forbid artificials from re-entering.
        for row in tab.iter_mut() {
            for c in (n + m)..total {
                row[c] = 0.0;
            }
        }
    }

    // Phase 2.
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(&p.objective);
    let value = run_simplex(&mut tab, &mut basis, &cost, total)?;
    let mut x = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[r][total];
        }
    }
    Ok((x, value))
}

/// Maximize `cost . x` on the current tableau with Bland's rule; returns the
/// attained objective value.
fn run_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    total: usize,
) -> Result<f64, SimplexError> {
    let m = tab.len();
    for _ in 0..MAX_ITERS {
        // Reduced costs: c_j - c_B B^{-1} A_j, computed from the tableau.
        let mut z = vec![0.0; total + 1];
        for (r, &bv) in basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for c in 0..=total {
                    z[c] += cb * tab[r][c];
                }
            }
        }
        // Bland: smallest index with positive reduced cost.
        let mut entering = None;
        for c in 0..total {
            let reduced = cost[c] - z[c];
            if reduced > PIVOT_TOL {
                entering = Some(c);
                break;
            }
        }
        let Some(e) = entering else {
            return Ok(z[total]);
        };
        // Ratio test; ties by smallest basis variable index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if tab[r][e] > PIVOT_TOL {
                let ratio = tab[r][total] / tab[r][e];
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - PIVOT_TOL
                            || ((ratio - bratio).abs() <= PIVOT_TOL && basis[r] < basis[br])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((lr, _)) = leave else {
            return Err(SimplexError::Unbounded);
        };
        pivot(tab, basis, lr, e, total);
    }
    Err(SimplexError::IterationLimit)
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let d = tab[row][col];
    for c in 0..=total {
        tab[row][c] /= d;
    }
    for r in 0..tab.len() {
        if r != row {
            let f = tab[r][col];
            if f != 0.0 {
                for c in 0..=total {
                    tab[r][c] -= f * tab[row][c];
                }
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_maximization() {
        // max x + y s.t. x <= 2, y <= 3, x + y <= 4
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![
                (vec![1.0, 0.0], 2.0),
                (vec![0.0, 1.0], 3.0),
                (vec![1.0, 1.0], 4.0),
            ],
        };
        let (x, v) = solve_max(&p).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max -x s.t. -x <= -1  (i.e. x >= 1): optimum -1 at x = 1
        let p = LpProblem { objective: vec![-1.0], rows: vec![(vec![-1.0], -1.0)] };
        let (x, v) = solve_max(&p).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x <= 1 and -x <= -2 (x >= 2)
        let p = LpProblem {
            objective: vec![0.0],
            rows: vec![(vec![1.0], 1.0), (vec![-1.0], -2.0)],
        };
        assert_eq!(solve_max(&p), Err(SimplexError::Infeasible));
    }

    #[test]
    fn detects_unbounded() {
        let p = LpProblem { objective: vec![1.0], rows: vec![(vec![-1.0], 0.0)] };
        assert_eq!(solve_max(&p), Err(SimplexError::Unbounded));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling-prone example (Beale); Bland's rule must terminate.
        let p = LpProblem {
            objective: vec![0.75, -150.0, 0.02, -6.0],
            rows: vec![
                (vec![0.25, -60.0, -0.04, 9.0], 0.0),
                (vec![0.5, -90.0, -0.02, 3.0], 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], 1.0),
            ],
        };
        let (_, v) = solve_max(&p).unwrap();
        assert!((v - 0.05).abs() < 1e-9);
    }
}

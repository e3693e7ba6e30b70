//! Dense phase-one simplex for feasibility of `A x = b, x ≥ 0`.
//!
//! Bland's rule throughout, so degenerate problems terminate. Sized for the
//! handful-of-dozens variable programs in this crate.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<T>),
    /// Farkas certificate `y` with `yᵀA ≤ 0` and `yᵀb = infeasibility > 0`.
    Infeasible { certificate: Vec<T>, infeasibility: T },
}

/// Decides `A x = b, x ≥ 0`. `a` is row-major with `b.len()` rows.
///
/// The phase-one optimum (sum of artificials) is compared against
/// `feasibility_tol`.
pub fn feasibility<T: Real>(a: &[Vec<T>], b: &[T], feasibility_tol: T) -> Feasibility<T> {
    let m = b.len();
    assert_eq!(a.len(), m, "row count mismatch");
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs = n + m;
    let pivot_tol = T::tol(1e-12);

    let mut signs = vec![T::one(); m];
    let mut tab = vec![vec![T::zero(); width]; m];
    for i in 0..m {
        assert_eq!(a[i].len(), n, "ragged constraint matrix");
        if b[i] < T::zero() {
            signs[i] = -T::one();
        }
        for j in 0..n {
            tab[i][j] = signs[i] * a[i][j];
        }
        tab[i][n + i] = T::one();
        tab[i][rhs] = signs[i] * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of the phase-one objective Σ artificials.
    let mut cost = vec![T::zero(); width];
    for row in &tab {
        for j in 0..n {
            cost[j] = cost[j] - row[j];
        }
        cost[rhs] = cost[rhs] - row[rhs];
    }

    loop {
        let entering = (0..n + m).find(|&j| cost[j] < -pivot_tol);
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[col] > pivot_tol {
                let ratio = row[rhs] / row[col];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - pivot_tol || (ratio <= lr + pivot_tol && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (r, _) = leave.expect("phase-one objective is bounded");

        let p = tab[r][col];
        for v in tab[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
            }
        }
        let f = cost[col];
        for (v, &pv) in cost.iter_mut().zip(&pivot_row) {
            *v = *v - f * pv;
        }
        basis[r] = col;
    }

    let infeasibility = -cost[rhs];
    if infeasibility <= feasibility_tol {
        let mut x = vec![T::zero(); n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                x[bj] = tab[i][rhs].max(T::zero());
            }
        }
        Feasibility::Feasible(x)
    } else {
        let certificate = (0..m).map(|i| signs[i] * (T::one() - cost[n + i])).collect();
        Feasibility::Infeasible {
            certificate,
            infeasibility,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible_system() {
        // x + y = 1, x − y = 0.5
        let a: Vec<Vec<f64>> = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        match feasibility(&a, &[1.0, 0.5], 1e-12) {
            Feasibility::Feasible(x) => {
                assert!((x[0] - 0.75).abs() < 1e-12 && (x[1] - 0.25).abs() < 1e-12, "{x:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // −x = −2
        let a = vec![vec![-1.0]];
        assert_eq!(feasibility(&a, &[-2.0], 1e-12), Feasibility::Feasible(vec![2.0]));
    }

    #[test]
    fn infeasible_system_has_farkas_certificate() {
        // x + y = 1, x + y = 2
        let a: Vec<Vec<f64>> = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = [1.0, 2.0];
        match feasibility(&a, &b, 1e-12) {
            Feasibility::Infeasible { certificate, infeasibility } => {
                assert!((infeasibility - 1.0).abs() < 1e-12);
                for j in 0..2 {
                    let col: f64 = (0..2).map(|i| certificate[i] * a[i][j]).sum();
                    assert!(col <= 1e-12);
                }
                let yb: f64 = certificate.iter().zip(&b).map(|(y, b)| y * b).sum();
                assert!(yb > 0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_do_not_break_phase_one() {
        let a = vec![vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        assert!(matches!(feasibility(&a, &[0.4, 0.4, 0.6], 1e-12), Feasibility::Feasible(_)));
    }
}

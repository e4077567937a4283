//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use crate::error::{Error, Result};

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    fn off_diagonal_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                s += 2.0 * self.get(i, j).powi(2);
            }
        }
        s
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of `a`, sorted ascending.
///
/// Sweeps the upper triangle in row order until the off-diagonal Frobenius
/// norm falls below `1e-14` of the matrix norm.
pub fn eigenvalues(mut a: SymmetricMatrix) -> Result<Vec<f64>> {
    let n = a.n;
    let norm_sq = a.frobenius_sq();
    let tol_sq = (1e-14_f64).powi(2) * norm_sq;
    let mut converged = norm_sq == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged || a.off_diagonal_sq() <= tol_sq {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged && a.off_diagonal_sq() > tol_sq {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Annihilates `a[p][q]` with a plane rotation.
fn rotate(a: &mut SymmetricMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let (app, aqq) = (a.get(p, p), a.get(q, q));
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    for r in 0..a.n {
        if r == p || r == q {
            continue;
        }
        let (arp, arq) = (a.get(r, p), a.get(r, q));
        a.set(r, p, arp - s * (arq + tau * arp));
        a.set(r, q, arq + s * (arp - tau * arq));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let mut m = SymmetricMatrix::zeros(2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        let ev = eigenvalues(m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_is_untouched() {
        let mut m = SymmetricMatrix::zeros(3);
        for (i, v) in [3.0, -1.0, 2.0].into_iter().enumerate() {
            m.set(i, i, v);
        }
        assert_eq!(eigenvalues(m).unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn laplacian_chain() {
        // path-graph Laplacian-like tridiagonal: eigenvalues 2 − 2cos(kπ/(n+1))
        let n = 12;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let ev = eigenvalues(m).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn trace_is_preserved() {
        let n = 7;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, ((i * 7 + j * 3) % 5) as f64 - 1.5);
            }
        }
        let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
        let ev = eigenvalues(m).unwrap();
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-12);
    }
}

//! Symmetric tridiagonal eigensolver (implicit QL) and Lanczos
//! tridiagonalization of a discrete measure.

use crate::error::{Error, Result};

/// Which eigenvector rows to accumulate during QL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectors {
    None,
    FirstRow,
    Full,
}

/// Eigenvalues in ascending order, with the requested eigenvector rows.
///
/// `vectors[r][k]` is component `r` of the eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Implicit QL with Wilkinson shifts on the matrix with diagonal `diag`
/// and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want: Vectors) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal has length {}, expected {}",
            off.len(),
            n - 1
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let rows = match want {
        Vectors::None => 0,
        Vectors::FirstRow => 1,
        Vectors::Full => n,
    };
    let mut z: Vec<Vec<f64>> = (0..rows)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { residual: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = z
        .iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok(TridiagEigen { values, vectors })
}

/// Recurrence coefficients of a probability measure.
///
/// `diag[k]` and `off[k]` are the Jacobi matrix entries of the orthonormal
/// polynomials: `diag` has `steps` entries, `off` has `steps - 1`.
#[derive(Debug, Clone)]
pub struct Recurrence {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Lanczos tridiagonalization of `diag(nodes)` started from
/// `sqrt(weights)`, with full reorthogonalization.
///
/// Weights must sum to one. Stops after `steps` diagonal entries.
pub fn lanczos(nodes: &[f64], weights: &[f64], steps: usize) -> Result<Recurrence> {
    let m = nodes.len();
    if weights.len() != m {
        return Err(Error::InvalidInput("nodes and weights differ in length".into()));
    }
    if steps > m {
        return Err(Error::SupportTooSmall {
            available: m,
            needed: steps,
        });
    }
    let scale = nodes.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let q0: Vec<f64> = weights.iter().map(|w| w.max(0.0).sqrt()).collect();
    let norm0 = dot(&q0, &q0).sqrt();
    basis.push(q0.iter().map(|x| x / norm0).collect());

    let mut diag = Vec::with_capacity(steps);
    let mut off = Vec::with_capacity(steps.saturating_sub(1));
    for k in 0..steps {
        let q = &basis[k];
        let mut v: Vec<f64> = q.iter().zip(nodes).map(|(qi, x)| qi * x).collect();
        let alpha = dot(q, &v);
        diag.push(alpha);
        if k + 1 == steps {
            break;
        }
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= alpha * qi;
        }
        if k > 0 {
            let beta_prev = off[k - 1];
            for (vi, qi) in v.iter_mut().zip(&basis[k - 1]) {
                *vi -= beta_prev * qi;
            }
        }
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let beta = dot(&v, &v).sqrt();
        if !(beta > 1e-13 * scale) {
            return Err(Error::PositivityLoss {
                step: k + 1,
                value: beta,
            });
        }
        off.push(beta);
        basis.push(v.iter().map(|x| x / beta).collect());
    }
    Ok(Recurrence { diag, off })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

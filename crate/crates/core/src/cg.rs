//! Jacobi-preconditioned conjugate gradients for sparse symmetric positive definite systems.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOptions {
    /// Stop once `max_i |r_i| * weight_i <= atol`.
    pub atol: f64,
    pub max_iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted_max(r: &[f64], weights: &[f64]) -> f64 {
    r.iter()
        .zip(weights)
        .map(|(ri, wi)| (ri * wi).abs())
        .fold(0.0, f64::max)
}

/// Solves `a x = b` in place starting from the current contents of `x`.
/// `weights` rescales the residual for the stopping test. Returns the number
/// of iterations taken.
pub(crate) fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    weights: &[f64],
    opts: CgOptions,
) -> Result<usize> {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = weighted_max(&r, weights);
    if res <= opts.atol {
        return Ok(0);
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=opts.max_iterations {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // Exact solution reached or the matrix is not positive definite.
            if rz == 0.0 {
                return Ok(it);
            }
            return Err(Error::Numeric {
                residual: res,
                bound: opts.atol,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        res = weighted_max(&r, weights);
        if res <= opts.atol {
            return Ok(it);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numeric {
        residual: res,
        bound: opts.atol,
    })
}

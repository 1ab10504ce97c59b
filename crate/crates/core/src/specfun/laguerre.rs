//! Gauss–Laguerre rules for ∫₀^∞ f(x) e^{-x} dx via the Golub–Welsch
//! eigenvalue method: nodes are the eigenvalues of the Jacobi matrix of the
//! Laguerre recurrence, weights the squared first components of the
//! normalized eigenvectors (total mass Γ(1) = 1).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// ∫₀^∞ f(x) e^{-x} dx ≈ Σ wᵢ f(xᵢ).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Rule for `n` nodes, cached per node count (rules are immutable and the
/// refinement loop revisits the same counts constantly).
pub fn gauss_laguerre(n: usize) -> Result<Arc<GaussLaguerre>> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 quadrature nodes, got {n}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(compute_rule(n)?);
    cache
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

fn compute_rule(n: usize) -> Result<GaussLaguerre> {
    // Jacobi matrix for the weight e^{-x} on [0, ∞): diagonal 2i+1,
    // subdiagonal sqrt((i+1)²) = i+1 joining rows i and i+1.
    let mut diag: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64).collect();
    let mut sub: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    let mut z = vec![0.0; n];
    z[0] = 1.0; // total weight Γ(1) = 1
    imtqlx(&mut diag, &mut sub, &mut z)?;
    for w in z.iter_mut() {
        *w *= *w;
    }
    Ok(GaussLaguerre { nodes: diag, weights: z })
}

/// Implicit-shift QL diagonalization of a symmetric tridiagonal matrix,
/// tracking the first row of the eigenvector matrix in `z`. On return `d`
/// holds the ascending eigenvalues. Classic imtqlx routine.
fn imtqlx(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    const MAX_ITER: usize = 30;
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            // First off-diagonal element small enough to split the matrix.
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= f64::EPSILON * (d[m].abs() + d[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter >= MAX_ITER {
                return Err(Error::Numerical(format!(
                    "quadrature eigenvalue iteration failed to converge for {n} nodes"
                )));
            }
            iter += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                if g.abs() <= f.abs() {
                    c = g / f;
                    r = c.hypot(1.0);
                    e[i + 1] = f * r;
                    s = 1.0 / r;
                    c *= s;
                } else {
                    s = f / g;
                    r = s.hypot(1.0);
                    e[i + 1] = g * r;
                    c = 1.0 / r;
                    s *= c;
                }
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Selection-sort eigenvalues ascending, carrying the weights along.
    for i in 0..n - 1 {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            z.swap(i, k);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_one() {
        for n in [2, 5, 64, 257] {
            let rule = gauss_laguerre(n).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(rule.nodes.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn exact_on_low_degree_polynomials() {
        // ∫ x^q e^{-x} dx = q!; an n-node rule is exact through degree 2n-1.
        let rule = gauss_laguerre(8).unwrap();
        let factorials = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];
        for (q, &fact) in factorials.iter().enumerate() {
            let got = rule.integrate(|x| x.powi(q as i32));
            assert_relative_eq!(got, fact, max_relative = 1e-12);
        }
    }

    #[test]
    fn two_node_rule_is_analytic() {
        // Nodes are roots of L_2(x) = (x² - 4x + 2)/2, i.e. 2 ± √2.
        let rule = gauss_laguerre(2).unwrap();
        assert_relative_eq!(rule.nodes[0], 2.0 - std::f64::consts::SQRT_2, max_relative = 1e-13);
        assert_relative_eq!(rule.nodes[1], 2.0 + std::f64::consts::SQRT_2, max_relative = 1e-13);
    }

    #[test]
    fn rejects_degenerate_rule() {
        assert!(gauss_laguerre(1).is_err());
        assert!(gauss_laguerre(0).is_err());
    }
}

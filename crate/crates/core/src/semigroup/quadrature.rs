use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes `s_i ∈ (0, t)` and weights `w_i` with
/// `Σ w_i g(s_i) ≈ ∫₀ᵗ s^a (t−s)^b g(s) ds` for `g` smooth up to
/// logarithmic endpoint growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub t: f64,
    /// Exponent of `s` (left endpoint).
    pub left_exponent: f64,
    /// Exponent of `t − s` (right endpoint).
    pub right_exponent: f64,
    pub nodes: Vec<f64>,
    /// `t − s` at each node, computed without cancellation.
    pub complements: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Per-panel Gauss–Legendre order used by the default rules.
pub const DEFAULT_PANEL_NODES: usize = 64;

/// Panels on `[0, h]` graded geometrically toward 0, each as `(lo, hi)`;
/// the first is the innermost.
fn graded_panels(h: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut p = Vec::with_capacity(levels + 1);
    let inner = h * 0.5f64.powi(levels as i32);
    p.push((0.0, inner));
    for m in (0..levels).rev() {
        p.push((h * 0.5f64.powi(m as i32 + 1), h * 0.5f64.powi(m as i32)));
    }
    p
}

impl QuadratureRule {
    /// Graded composite rule split at `t/2`; the innermost panel at each
    /// singular end uses `s = ε u²`, which absorbs `s^{-1/2}` exactly.
    pub fn singular(t: f64, a: f64, b: f64, tol: f64, panel_nodes: usize) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(OscError::InvalidParameter(format!("quadrature needs t > 0, got {t}")));
        }
        if a <= -1.0 || b <= -1.0 {
            return Err(OscError::InvalidParameter("endpoint exponents must exceed -1".into()));
        }
        if !(tol > 0.0 && tol < 1.0) || panel_nodes < 2 {
            return Err(OscError::InvalidParameter("bad tolerance or node count".into()));
        }
        let levels_for = |e: f64| ((1.0 / tol).log2() / (1.0 + e.min(0.0))).ceil() as usize;
        let (gx, gw) = gauss_legendre(panel_nodes);
        let half = 0.5 * t;
        let mut nodes = Vec::new();
        let mut complements = Vec::new();
        let mut weights = Vec::new();
        // Left half: distance from 0 is r = s; right half: r = t − s.
        for (side, own, other) in [(0, a, b), (1, b, a)] {
            for (k, (lo, hi)) in graded_panels(half, levels_for(own)).into_iter().enumerate() {
                for (x, w) in gx.iter().zip(&gw) {
                    let (r, jac) = if k == 0 {
                        // r = hi·u², u ∈ (0,1)
                        let u = 0.5 * (x + 1.0);
                        (hi * u * u, hi * u * w)
                    } else {
                        (0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w)
                    };
                    let s = if side == 0 { r } else { t - r };
                    let weight = jac * r.powf(own) * (t - r).powf(other);
                    nodes.push(s);
                    complements.push(if side == 0 { t - r } else { r });
                    weights.push(weight);
                }
            }
        }
        Ok(QuadratureRule {
            t,
            left_exponent: a,
            right_exponent: b,
            nodes,
            complements,
            weights,
        })
    }

    /// Plain rule (`a = b = 0`).
    pub fn regular(t: f64, tol: f64) -> Result<Self> {
        Self::singular(t, 0.0, 0.0, tol, 16)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * g(s)).sum()
    }

    /// Like [`integrate`](Self::integrate) but hands `g` both `s` and `t − s`.
    pub fn integrate2(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.complements)
            .zip(&self.weights)
            .map(|((&s, &r), &w)| w * g(s, r))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rule: QuadratureRule = serde_json::from_str(text)?;
        if rule.nodes.len() != rule.weights.len() || rule.nodes.len() != rule.complements.len() {
            return Err(OscError::Format("node and weight counts differ".into()));
        }
        Ok(rule)
    }
}

/// `∫₀ᵗ s^a (t−s)^b g(s, t−s) ds` with the default panel order.
pub fn singular_integral(t: f64, a: f64, b: f64, tol: f64, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    Ok(QuadratureRule::singular(t, a, b, tol, DEFAULT_PANEL_NODES)?.integrate2(g))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Double-exponential (tanh-sinh) quadrature on `(0, t)`. The integrand
    /// receives both `s` and `t − s`, each computed without cancellation, so
    /// endpoint singularities are resolved by the node clustering alone.
    pub fn tanh_sinh(t: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let h = 1.0 / 64.0;
        let mut sum = 0.0;
        for i in -400i32..=400 {
            let x = i as f64 * h;
            let u = 0.5 * std::f64::consts::PI * x.sinh();
            let c = u.cosh();
            let s = t / (1.0 + (-2.0 * u).exp());
            let r = t / (1.0 + (2.0 * u).exp());
            let w = 0.5 * t * 0.5 * std::f64::consts::PI * x.cosh() / (c * c);
            if s <= 0.0 || r <= 0.0 || !w.is_finite() || w == 0.0 {
                continue;
            }
            let v = f(s, r);
            // far tails only; the weight there is below double precision
            if v.is_finite() {
                sum += w * v * h;
            }
        }
        sum
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((i - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn abel_kernel_to_1e8() {
        for t in [1e-4, 0.3, 1.0, 7.0] {
            let rule = QuadratureRule::singular(t, 0.0, -0.5, 1e-10, DEFAULT_PANEL_NODES).unwrap();
            let v = rule.integrate(|_| 1.0);
            assert!(((v - 2.0 * t.sqrt()) / (2.0 * t.sqrt())).abs() < 1e-8);
        }
    }

    #[test]
    fn beta_function_both_ends() {
        // ∫₀ᵗ s^{-1/2}(t−s)^{-1/2} ds = π
        let v = singular_integral(2.5, -0.5, -0.5, 1e-10, |_, _| 1.0).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn matches_tanh_sinh_on_log_weight() {
        let t = 0.7;
        let g = |s: f64| (std::f64::consts::E + 1.0 / s).ln();
        let ours = singular_integral(t, 0.0, -0.5, 1e-10, |s, _| g(s)).unwrap();
        let oracle = tanh_sinh(t, |s, r| r.powf(-0.5) * g(s));
        assert!(((ours - oracle) / oracle).abs() < 1e-8, "{ours} {oracle}");
    }

    #[test]
    fn json_round_trip() {
        let r = QuadratureRule::singular(1.0, -0.5, 0.0, 1e-6, 8).unwrap();
        assert_eq!(QuadratureRule::from_json(&r.to_json().unwrap()).unwrap(), r);
    }
}

//! Gauss rules for `(1 − x²)^a dx` and double-exponential integration for
//! integrands with endpoint or diagonal singularities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::{monic_beta, orthonormal_values, symmetric_mass, BasisParams};

/// Gauss rule for the symmetric Jacobi weight `(1 − x²)^exponent` on (−1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    exponent: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Weight exponent a in `(1 − x²)^a`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Ultraspherical order λ = a + 1/2 of the weight.
    pub fn lambda(&self) -> f64 {
        self.exponent + 0.5
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i f(x_i).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        integrate(self, f)
    }
}

/// N-point Gauss rule for dμ_λ.
pub fn gauss_gegenbauer(n: usize, lambda: BasisParams) -> Result<QuadratureRule> {
    gauss_jacobi_symmetric(n, lambda.weight_exponent())
}

/// N-point Gauss rule for `(1 − x²)^a dx`, a > −1.
///
/// Nodes are eigenvalues of the Jacobi matrix located by Sturm bisection and
/// polished by Newton steps; weights are Christoffel numbers.
pub fn gauss_jacobi_symmetric(n: usize, exponent: f64) -> Result<QuadratureRule> {
    let order = exponent + 0.5;
    if n == 0 {
        return Err(Error::RuleConstruction { n, lambda: order, reason: "need at least one node" });
    }
    if !exponent.is_finite() || exponent <= -1.0 {
        return Err(Error::Divergent { exponent });
    }
    let off2: Vec<f64> = (1..n).map(|k| monic_beta(k, order)).collect();
    let half = n / 2;
    let mut positive = Vec::with_capacity(half);
    // Eigenvalue indices n-half..n are the non-negative half (excluding 0 for odd n).
    for idx in (n - half)..n {
        let mut x = bisect_eigenvalue(&off2, idx);
        x = newton_polish(n, order, x);
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::RuleConstruction { n, lambda: order, reason: "node escaped (0, 1)" });
        }
        positive.push(x);
    }
    let mut nodes = Vec::with_capacity(n);
    nodes.extend(positive.iter().rev().map(|x| -x));
    if n % 2 == 1 {
        nodes.push(0.0);
    }
    nodes.extend(positive.iter().copied());
    let mut weights = Vec::with_capacity(n);
    for &x in &nodes {
        let p = orthonormal_values(n - 1, order, x);
        let s: f64 = p.iter().map(|v| v * v).sum();
        weights.push(1.0 / s);
    }
    for i in 0..half {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::RuleConstruction { n, lambda: order, reason: "non-positive weight" });
    }
    for w in 1..n {
        if nodes[w] <= nodes[w - 1] {
            return Err(Error::RuleConstruction { n, lambda: order, reason: "nodes not increasing" });
        }
    }
    Ok(QuadratureRule { exponent, nodes, weights })
}

/// Number of eigenvalues below x of the zero-diagonal Jacobi matrix.
fn sturm_count(off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for &b2 in off2 {
        let prev = if q == 0.0 { f64::EPSILON * 1e-3 } else { q };
        q = -x - b2 / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(off2: &[f64], idx: usize) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(off2, mid) > idx {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn newton_polish(n: usize, order: f64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let (p, dp) = orthonormal_with_derivative(n, order, x);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.abs() > 1e-8 {
            break;
        }
        x -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    x
}

fn orthonormal_with_derivative(n: usize, order: f64, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut b_prev = 0.0;
    for k in 0..n {
        let b = monic_beta(k + 1, order).sqrt();
        let p_next = (x * p - b_prev * p_prev) / b;
        let d_next = (p + x * d - b_prev * d_prev) / b;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        b_prev = b;
    }
    (p, d)
}

/// Σ w_i f(x_i); a non-finite sample is reported with its node.
pub fn integrate<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// ∫ f_smooth(x) (1 − x²)^extra dμ_λ(x) by Gauss rules for the combined
/// weight, doubling the node count until successive estimates agree to tol.
pub fn integrate_endpoint_singular<F: Fn(f64) -> f64>(
    f_smooth: F,
    extra_exponent: f64,
    lambda: BasisParams,
    tol: f64,
) -> Result<f64> {
    let exponent = lambda.weight_exponent() + extra_exponent;
    if !exponent.is_finite() || exponent <= -1.0 {
        return Err(Error::Divergent { exponent });
    }
    let mut n = 16;
    let mut prev = integrate(&gauss_jacobi_symmetric(n, exponent)?, &f_smooth)?;
    let mut levels = 0;
    while n < 2048 {
        n *= 2;
        levels += 1;
        let rule = gauss_jacobi_symmetric(n, exponent)?;
        let cur = integrate(&rule, &f_smooth)?;
        let mass = integrate(&rule, |x| f_smooth(x).abs())?;
        if (cur - prev).abs() <= tol * mass {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::ToleranceNotMet { best: prev, tol, levels })
}

/// ∫ (1 − x²)^a dx, the zeroth moment of a Jacobi weight.
pub fn jacobi_mass(exponent: f64) -> f64 {
    symmetric_mass(exponent)
}

/// A point of [−1, 1] carried with its distances to both endpoints, so that
/// weights such as (1 − x)^a keep full relative accuracy near ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    /// 1 + x
    pub lo: f64,
    /// 1 − x
    pub hi: f64,
}

impl Abscissa {
    pub fn new(x: f64) -> Self {
        Self { x, lo: 1.0 + x, hi: 1.0 - x }
    }

    pub const LEFT: Abscissa = Abscissa { x: -1.0, lo: 0.0, hi: 2.0 };
    pub const RIGHT: Abscissa = Abscissa { x: 1.0, lo: 2.0, hi: 0.0 };

    /// 1 − x², from the complements.
    pub fn one_minus_sq(self) -> f64 {
        self.lo * self.hi
    }

    /// Point at distances `from_a` after a and `from_b` before b.
    fn between(a: Abscissa, b: Abscissa, from_a: f64, from_b: f64) -> Abscissa {
        let x = if from_a <= from_b { a.x + from_a } else { b.x - from_b };
        Abscissa { x, lo: a.lo + from_a, hi: b.hi + from_b }
    }

    /// b − a, computed from whichever complements are small.
    fn distance(a: Abscissa, b: Abscissa) -> f64 {
        if a.x >= 0.0 {
            a.hi - b.hi
        } else if b.x <= 0.0 {
            b.lo - a.lo
        } else {
            b.x - a.x
        }
    }
}

const DE_T_MAX: f64 = 5.0;
const DE_MIN_LEVEL: u32 = 3;
/// Default refinement depth for the double-exponential rules.
pub const DE_MAX_LEVEL: u32 = 12;

/// One tanh-sinh sample on an interval of length L: distances to both ends
/// and the weight for unit step.
#[derive(Debug, Clone, Copy)]
struct DeNode {
    from_a: f64,
    from_b: f64,
    weight: f64,
}

fn de_node(half: f64, t: f64) -> DeNode {
    let u = std::f64::consts::FRAC_PI_2 * t.sinh();
    let e = (-2.0 * u.abs()).exp();
    let (near, far) = (half * 2.0 * e / (1.0 + e), half * 2.0 / (1.0 + e));
    let (from_a, from_b) = if u >= 0.0 { (far, near) } else { (near, far) };
    let weight = half * std::f64::consts::FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    DeNode { from_a, from_b, weight }
}

/// Tanh-sinh integration over an interval of length `len`; the integrand
/// receives the distances (from left end, from right end). Level ℓ uses step
/// 2^{−ℓ}; refinement stops once two levels agree to `tol` relative to the
/// L¹ mass.
fn de_integrate<F>(len: f64, f: &F, tol: f64, max_level: u32, parallel: bool) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if len <= 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * len;
    let eval = |ts: Vec<f64>| -> Result<(f64, f64)> {
        let term = |t: &f64| -> Result<(f64, f64)> {
            let node = de_node(half, *t);
            if node.weight == 0.0 || node.from_a == 0.0 || node.from_b == 0.0 {
                return Ok((0.0, 0.0));
            }
            let v = f(node.from_a, node.from_b)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { x: node.from_a - half });
            }
            Ok((node.weight * v, node.weight * v.abs()))
        };
        let parts: Vec<Result<(f64, f64)>> =
            if parallel { ts.par_iter().map(term).collect() } else { ts.iter().map(term).collect() };
        let mut s = 0.0;
        let mut l1 = 0.0;
        for p in parts {
            let (a, b) = p?;
            s += a;
            l1 += b;
        }
        Ok((s, l1))
    };
    let k_max = DE_T_MAX as i64;
    let (mut sum, mut l1) = eval((-k_max..=k_max).map(|k| k as f64).collect())?;
    let mut h = 1.0;
    let mut prev = sum * h;
    for level in 1..=max_level {
        h *= 0.5;
        let count = (DE_T_MAX / h) as i64;
        let ts: Vec<f64> = (-count..count).filter(|k| k.rem_euclid(2) == 1).map(|k| k as f64 * h).collect();
        let (s, a) = eval(ts)?;
        sum += s;
        l1 += a;
        let cur = sum * h;
        if level >= DE_MIN_LEVEL && (cur - prev).abs() <= tol * (l1 * h) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::ToleranceNotMet { best: prev, tol, levels: max_level })
}

/// ∫_a^b f over a sub-interval of [−1, 1] by tanh-sinh quadrature; f sees
/// each point with its exact endpoint complements.
pub fn integrate_de<F>(f: F, a: Abscissa, b: Abscissa, tol: f64) -> Result<f64>
where
    F: Fn(Abscissa) -> f64 + Sync,
{
    let len = Abscissa::distance(a, b);
    de_integrate(len, &|da: f64, db: f64| Ok(f(Abscissa::between(a, b, da, db))), tol, DE_MAX_LEVEL, false)
}

/// Fallible variant of [`integrate_de`].
pub fn try_integrate_de<F>(f: F, a: Abscissa, b: Abscissa, tol: f64) -> Result<f64>
where
    F: Fn(Abscissa) -> Result<f64> + Sync,
{
    let len = Abscissa::distance(a, b);
    de_integrate(len, &|da: f64, db: f64| f(Abscissa::between(a, b, da, db)), tol, DE_MAX_LEVEL, false)
}

/// ∫_0^1 f by tanh-sinh; f receives (v, 1 − v) with both computed exactly.
pub fn integrate_unit<F>(f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    de_integrate(1.0, &|v: f64, w: f64| Ok(f(v, w)), tol, DE_MAX_LEVEL, false)
}

/// ∫_0^∞ f(t) dt via t = −ln(1 − v) and tanh-sinh in v ∈ (0, 1).
pub fn integrate_half_line<F>(f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    de_integrate(
        1.0,
        &|v: f64, w: f64| {
            let t = if v < 0.5 { -(-v).ln_1p() } else { -w.ln() };
            Ok(f(t) / w)
        },
        tol,
        DE_MAX_LEVEL,
        false,
    )
}

/// ∫_{−1}^{1} f(y) dy split at y = x, so a singularity on the diagonal sits
/// at an endpoint of both pieces; f also receives the exact difference x − y.
pub fn integrate_split_at<F>(x: Abscissa, f: F, tol: f64) -> Result<f64>
where
    F: Fn(Abscissa, f64) -> Result<f64> + Sync,
{
    // y in [−1, x]: x − y is the distance from the right end.
    let left = de_integrate(
        Abscissa::distance(Abscissa::LEFT, x),
        &|ya: f64, yb: f64| f(Abscissa::between(Abscissa::LEFT, x, ya, yb), yb),
        tol,
        DE_MAX_LEVEL,
        false,
    )?;
    let right = de_integrate(
        Abscissa::distance(x, Abscissa::RIGHT),
        &|ya: f64, yb: f64| f(Abscissa::between(x, Abscissa::RIGHT, ya, yb), -ya),
        tol,
        DE_MAX_LEVEL,
        false,
    )?;
    Ok(left + right)
}

/// ∫∫ F(x, y) dμ_λ(x) dμ_λ(y) for integrands with an integrable singularity
/// on the diagonal. The inner integral is split at y = x; F also receives
/// the exact difference x − y. Outer nodes are evaluated in parallel and
/// summed in a fixed order.
pub fn integrate_2d_offdiagonal<F>(f: F, lambda: BasisParams, tol: f64) -> Result<f64>
where
    F: Fn(Abscissa, Abscissa, f64) -> Result<f64> + Sync,
{
    integrate_2d_offdiagonal_raw(
        |x, y, d| {
            let w = mu_weight(lambda, x) * mu_weight(lambda, y);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(f(x, y, d)? * w)
        },
        tol,
    )
}

/// ∫∫ F(x, y) dx dy over the square with the same diagonal treatment as
/// [`integrate_2d_offdiagonal`]; F carries any weights itself.
pub fn integrate_2d_offdiagonal_raw<F>(f: F, tol: f64) -> Result<f64>
where
    F: Fn(Abscissa, Abscissa, f64) -> Result<f64> + Sync,
{
    let inner_tol = tol / 10.0;
    let outer = |da: f64, db: f64| -> Result<f64> {
        let x = Abscissa::between(Abscissa::LEFT, Abscissa::RIGHT, da, db);
        integrate_split_at(x, |y, d| f(x, y, d), inner_tol)
    };
    de_integrate(2.0, &outer, tol, DE_MAX_LEVEL, true)
}

/// ln (1 − x²)^{λ−1/2}.
pub fn ln_mu_weight(lambda: BasisParams, p: Abscissa) -> f64 {
    let a = lambda.weight_exponent();
    if a == 0.0 {
        0.0
    } else {
        a * p.one_minus_sq().ln()
    }
}

/// Weight (1 − x²)^{λ−1/2} of dμ_λ evaluated from the complements.
pub fn mu_weight(lambda: BasisParams, p: Abscissa) -> f64 {
    let a = lambda.weight_exponent();
    if a == 0.0 {
        1.0
    } else {
        p.one_minus_sq().powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, gamma, normalized_family};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn lam(l: f64) -> BasisParams {
        BasisParams::new(l).unwrap()
    }

    #[test]
    fn one_point_rule() {
        for &l in &[0.25, 1.0, 3.0] {
            let r = gauss_gegenbauer(1, lam(l)).unwrap();
            assert_eq!(r.nodes(), &[0.0]);
            assert!(rel(r.weights()[0], lam(l).total_mass()) < 1e-14);
        }
    }

    #[test]
    fn two_point_legendre() {
        let r = gauss_gegenbauer(2, lam(0.5)).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15 && (r.nodes()[1] - s).abs() < 1e-15);
        assert!(rel(r.weights()[0], 1.0) < 1e-14 && rel(r.weights()[1], 1.0) < 1e-14);
    }

    #[test]
    fn degree_exactness_against_beta_moments() {
        for &n in &[4usize, 8, 16, 32] {
            for &l in &[0.25, 0.5, 1.0, 2.5] {
                let r = gauss_gegenbauer(n, lam(l)).unwrap();
                for k in 0..2 * n {
                    let got = r.integrate(|x| x.powi(k as i32)).unwrap();
                    if k % 2 == 1 {
                        assert!(got.abs() < 1e-14, "n={n} l={l} k={k}: {got}");
                    } else {
                        let want = beta(k as f64 / 2.0 + 0.5, l + 0.5);
                        assert!(rel(got, want) <= 1e-12, "n={n} l={l} k={k}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn second_moment_closed_form() {
        for &l in &[0.3, 1.0, 4.0] {
            let want = PI.sqrt() * gamma(l + 0.5).unwrap() / (2.0 * gamma(l + 2.0).unwrap());
            let r = gauss_gegenbauer(3, lam(l)).unwrap();
            assert!(rel(r.integrate(|x| x * x).unwrap(), want) < 1e-13);
        }
    }

    #[test]
    fn symmetry_and_interlacing() {
        for &l in &[0.25, 2.5] {
            for n in 2..24 {
                let a = gauss_gegenbauer(n, lam(l)).unwrap();
                let b = gauss_gegenbauer(n + 1, lam(l)).unwrap();
                for i in 0..n {
                    assert_eq!(a.nodes()[i], -a.nodes()[n - 1 - i]);
                    assert_eq!(a.weights()[i], a.weights()[n - 1 - i]);
                    assert!(b.nodes()[i] < a.nodes()[i] && a.nodes()[i] < b.nodes()[i + 1]);
                }
            }
        }
    }

    #[test]
    fn large_rule_mass_and_orthonormality() {
        let l = lam(1.3);
        let r = gauss_gegenbauer(200, l).unwrap();
        let mass: f64 = r.weights().iter().sum();
        assert!(rel(mass, l.total_mass()) < 1e-12);
        let fams: Vec<Vec<f64>> = r.nodes().iter().map(|&x| normalized_family(40, l, x).unwrap()).collect();
        for (n, m) in [(0, 0), (7, 7), (40, 40), (3, 5), (12, 39)] {
            let s: f64 = fams.iter().zip(r.weights()).map(|(p, w)| w * p[n] * p[m]).sum();
            let want = if n == m { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-12, "({n},{m}): {s}");
        }
    }

    #[test]
    fn rule_errors() {
        assert!(matches!(gauss_jacobi_symmetric(0, 0.0), Err(Error::RuleConstruction { .. })));
        assert!(matches!(gauss_jacobi_symmetric(4, -1.0), Err(Error::Divergent { .. })));
        let r = gauss_gegenbauer(3, lam(1.0)).unwrap();
        assert!(matches!(r.integrate(|x| 1.0 / x), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn endpoint_singular_beta_values() {
        let l = lam(1.0);
        let got = integrate_endpoint_singular(|_| 1.0, -0.25, l, 1e-12).unwrap();
        let want = PI.sqrt() * gamma(1.25).unwrap() / gamma(1.75).unwrap();
        assert!(rel(got, want) < 1e-13);
        let odd = integrate_endpoint_singular(|x| x, -0.25, l, 1e-12).unwrap();
        assert!(odd.abs() < 1e-15);
        assert!(matches!(integrate_endpoint_singular(|_| 1.0, -0.8, lam(0.25), 1e-10), Err(Error::Divergent { .. })));
    }

    #[test]
    fn de_endpoint_singularities() {
        // ∫ (1 − x²)^{−0.7} dx = B(1/2, 0.3)
        let got = integrate_de(|p| p.one_minus_sq().powf(-0.7), Abscissa::LEFT, Abscissa::RIGHT, 1e-12).unwrap();
        assert!(rel(got, beta(0.5, 0.3)) < 1e-11, "{got}");
        // log singularity: ∫_{-1}^{1} ln(1 − x) dx = 2 ln 2 − 2
        let got = integrate_de(|p| p.hi.ln(), Abscissa::LEFT, Abscissa::RIGHT, 1e-12).unwrap();
        assert!(rel(got, 2.0 * 2f64.ln() - 2.0) < 1e-12);
    }

    #[test]
    fn de_subinterval_and_half_line() {
        let a = Abscissa::new(0.2);
        let b = Abscissa::new(0.7);
        let got = integrate_de(|p| p.x * p.x, a, b, 1e-13).unwrap();
        assert!(rel(got, (0.343 - 0.008) / 3.0) < 1e-13);
        let got = integrate_half_line(|t| (-t).exp() * t.powf(-0.5), 1e-12).unwrap();
        assert!(rel(got, PI.sqrt()) < 1e-11, "{got}");
    }

    #[test]
    fn offdiagonal_moment_identity() {
        let l = lam(1.0);
        let got = integrate_2d_offdiagonal(|_, _, d| Ok(d * d), l, 1e-10).unwrap();
        let m0 = l.total_mass();
        let m2 = beta(1.5, 1.5);
        assert!(rel(got, 2.0 * m0 * m2) < 1e-9, "{got}");
        let zero = integrate_2d_offdiagonal(|_, _, _| Ok(0.0), l, 1e-10).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn offdiagonal_diagonal_singularity() {
        // ∫∫ |x − y|^{−1/2} dx dy over the square = 16√2/3
        let got = integrate_2d_offdiagonal(|_, _, d| Ok(d.abs().powf(-0.5)), lam(0.5), 1e-10).unwrap();
        let want = 16.0 * 2f64.sqrt() / 3.0;
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }
}

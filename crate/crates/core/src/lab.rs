//! Verifiers for the Hardy (Pitt) inequality, the ground-state
//! representation, the weight eigen-identity, the uncertainty principles and
//! the sharpness of the constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fracop::{multiplier, quadratic_form, FracParams, Kernel};
use crate::quadrature::{
    integrate_2d_offdiagonal_raw, integrate_de, integrate_endpoint_singular, integrate_unit, ln_mu_weight, mu_weight,
    Abscissa,
};
use crate::specfun::{
    c_lambda, digamma_pos, lgamma_pos, ln_gamma_ratio, ln_gamma_ratio_remainder, ln_gamma_ratio_shift, norm_sq,
    normalized_divided_differences, normalized_family, BasisParams,
};
use crate::transform::{synthesize, CoefficientVector};

/// Relative threshold on the Hardy deficit.
pub const DEFICIT_TOL: f64 = 1e-9;
/// Relative agreement required between the spectral deficit and the
/// ground-state double integral.
pub const GSR_TOL: f64 = 1e-4;
/// Relative threshold on the logarithmic gap, scaled by ‖u‖².
pub const LOG_GAP_TOL: f64 = 1e-8;

/// Q_{σ,λ} = 2^σ (Γ(λ/2+(1+σ)/4) / Γ(λ/2+(1−σ)/4))².
pub fn hardy_constant(p: &FracParams) -> f64 {
    hardy_constant_raw(p.sigma(), p.lambda().lambda())
}

/// Q_{σ,λ} for any σ with λ/2 + (1−σ)/4 > 0, including σ = 0.
pub fn hardy_constant_raw(sigma: f64, lambda: f64) -> f64 {
    let base = 0.5 * lambda;
    (sigma * std::f64::consts::LN_2 + 2.0 * ln_gamma_ratio(base + 0.25 * (1.0 + sigma), base + 0.25 * (1.0 - sigma)))
        .exp()
}

/// α = λ/2 + (1−σ)/4; the ground state is g = (1 − x²)^{−α}.
pub fn ground_state_exponent(p: &FracParams) -> f64 {
    0.5 * p.lambda().lambda() + 0.25 * (1.0 - p.sigma())
}

/// ∫ f² (1 − x²)^{−σ/2} dμ_λ with the endpoint factor absorbed in the rule.
pub fn singular_mass<F: Fn(f64) -> f64>(f: F, sigma: f64, lambda: BasisParams, tol: f64) -> Result<f64> {
    integrate_endpoint_singular(
        |x| {
            let v = f(x);
            v * v
        },
        -0.5 * sigma,
        lambda,
        tol,
    )
}

/// Q ∫ u² (1 − x²)^{−σ/2} dμ_λ for u = Σ a_n c_n^λ.
pub fn hardy_lhs(u: &CoefficientVector, p: &FracParams, tol: f64) -> Result<f64> {
    check_lambda(u, p)?;
    hardy_lhs_fn(|x| synthesize(u, x).unwrap_or(f64::NAN), p, tol)
}

/// Q ∫ u² (1 − x²)^{−σ/2} dμ_λ for a callable u.
pub fn hardy_lhs_fn<F: Fn(f64) -> f64>(u: F, p: &FracParams, tol: f64) -> Result<f64> {
    Ok(hardy_constant(p) * singular_mass(u, p.sigma(), p.lambda(), tol)?)
}

fn check_lambda(u: &CoefficientVector, p: &FracParams) -> Result<()> {
    if u.lambda() != p.lambda() {
        return Err(Error::LambdaMismatch { left: u.lambda().lambda(), right: p.lambda().lambda() });
    }
    Ok(())
}

/// Thresholds a report was judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub deficit_relative: f64,
    pub gsr_relative: f64,
    pub quadrature: f64,
}

/// Both sides of the Hardy inequality for one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub lambda: f64,
    pub sigma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gsr_value: Option<f64>,
    pub pass: bool,
    pub tolerances: Tolerances,
}

impl HardyReport {
    fn judge(&mut self) {
        let mut pass = self.deficit >= -DEFICIT_TOL * self.rhs.abs();
        if let Some(g) = self.gsr_value {
            pass &= (self.deficit - g).abs() <= GSR_TOL * self.rhs.abs();
        }
        self.pass = pass;
    }
}

/// rhs = Σ m_n a_n², lhs = Q ∫u²(1−x²)^{−σ/2}dμ_λ, deficit = rhs − lhs.
pub fn hardy_check(u: &CoefficientVector, p: &FracParams, tol: f64) -> Result<HardyReport> {
    let rhs = quadratic_form(u, p)?;
    let lhs = hardy_lhs(u, p, tol)?;
    let mut report = HardyReport {
        lambda: p.lambda().lambda(),
        sigma: p.sigma(),
        n: u.degree(),
        lhs,
        rhs,
        deficit: rhs - lhs,
        gsr_value: None,
        pass: false,
        tolerances: Tolerances { deficit_relative: DEFICIT_TOL, gsr_relative: GSR_TOL, quadrature: tol },
    };
    report.judge();
    Ok(report)
}

/// [`hardy_check`] plus the ground-state double integral.
pub fn hardy_check_with_gsr(u: &CoefficientVector, kernel: &Kernel, tol: f64) -> Result<HardyReport> {
    let mut report = hardy_check(u, kernel.params(), tol)?;
    report.gsr_value = Some(ground_state_deficit(u, kernel, tol.max(1e-9))?);
    report.judge();
    Ok(report)
}

/// ½ ∫∫ g(x) g(y) (u/g(x) − u/g(y))² K dμ_λ dμ_λ with g = (1 − x²)^{−α}.
pub fn ground_state_deficit(u: &CoefficientVector, kernel: &Kernel, tol: f64) -> Result<f64> {
    let p = kernel.params();
    check_lambda(u, p)?;
    let lambda = p.lambda();
    let alpha = ground_state_exponent(p);
    let n = u.degree();
    let coeffs = u.coeffs();
    if coeffs.iter().all(|a| *a == 0.0) {
        return Ok(0.0);
    }
    let value = integrate_2d_offdiagonal_raw(
        |x, y, diff| {
            let dd = normalized_divided_differences(n, lambda, x.x, y.x);
            let slope: f64 = coeffs.iter().zip(&dd).map(|(a, q)| a * q).sum();
            let uy: f64 = coeffs.iter().zip(normalized_family(n, lambda, y.x)?).map(|(a, c)| a * c).sum();
            let (sx, sy) = (x.one_minus_sq(), y.one_minus_sq());
            let (hx, hy) = (sx.powf(alpha), sy.powf(alpha));
            // h(x) − h(y) = h(y) expm1(α ln((1−x²)/(1−y²))), (1−x²)−(1−y²) = −(x−y)(x+y)
            let ratio_gap = -diff * (x.x + y.x) / sy;
            let ln_ratio = if ratio_gap.abs() < 0.5 { ratio_gap.ln_1p() } else { sx.ln() - sy.ln() };
            let dh = hy * (alpha * ln_ratio).exp_m1();
            let dv = diff * slope * hx + uy * dh;
            if dv == 0.0 {
                return Ok(0.0);
            }
            let ln = 2.0 * dv.abs().ln() - alpha * (sx.ln() + sy.ln())
                + kernel.ln_eval_parts(x, y, diff)?
                + ln_mu_weight(lambda, x)
                + ln_mu_weight(lambda, y);
            Ok(ln.exp())
        },
        tol,
    )?;
    Ok(0.5 * value)
}

/// ∫ (1 − x²)^{β−1} C_{2m}^λ(x) dx for β > 0, in closed form:
/// C_{2m}(1) Γ(m+½)Γ(λ+½)/Γ(λ+m+½) · Γ(β)/Γ(β+m+½) · Π_{i=1}^{m} (i − β + λ − ½).
pub fn beta_moment(m: usize, beta: f64, lambda: BasisParams) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain("beta", beta));
    }
    let l = lambda.lambda();
    let c = beta - l + 0.5;
    let mut sign = 1.0;
    let mut ln_prod = 0.0;
    for i in 1..=m {
        let f = i as f64 - c;
        if f == 0.0 {
            return Ok(0.0);
        }
        sign *= f.signum();
        ln_prod += f.abs().ln();
    }
    let mf = m as f64;
    let ln_c1 = ln_gamma_ratio_shift(2.0 * mf, 2.0 * l, 1.0) - lgamma_pos(2.0 * l);
    let ln = ln_c1
        + ln_gamma_ratio_shift(mf, 0.5, l + 0.5)
        + lgamma_pos(l + 0.5)
        + ln_gamma_ratio(beta, beta + mf + 0.5)
        + ln_prod;
    Ok(sign * ln.exp())
}

/// Coefficients of (1 − x²)^{β−λ−1/2} on c_0^λ … c_N^λ from [`beta_moment`].
pub fn weight_coefficients(beta: f64, lambda: BasisParams, degree: usize) -> Result<CoefficientVector> {
    let mut coeffs = vec![0.0; degree + 1];
    for m in 0..=degree / 2 {
        coeffs[2 * m] = beta_moment(m, beta, lambda)? / norm_sq(2 * m, lambda).sqrt();
    }
    CoefficientVector::new(lambda, coeffs)
}

/// Both sides of the coefficient identity behind A(1−x²)^{−α} = Q(1−x²)^{−α−σ/2}:
/// the ratio of the target to the source moment of C_{2m}, and
/// Q^{−1} Γ(2m+2α+σ)/Γ(2m+2α).
pub fn lemma2_ratio_check(m: usize, p: &FracParams) -> Result<(f64, f64)> {
    let alpha = ground_state_exponent(p);
    let s = p.sigma();
    let lambda = p.lambda();
    let source = beta_moment(m, alpha + 0.5 * s, lambda)?;
    let target = beta_moment(m, alpha, lambda)?;
    let closed = (ln_gamma_ratio_shift(2.0 * m as f64, 2.0 * alpha + s, 2.0 * alpha)).exp() / hardy_constant(p);
    Ok((target / source, closed))
}

/// Max relative error of the filtered synthesis of A(1−x²)^{−α} against
/// Q (1−x²)^{−α−σ/2} on a grid; the spectral filter exp(−36 (n/N)⁴)
/// tames the slowly decaying coefficients.
pub fn lemma2_operator_check(p: &FracParams, degree: usize, grid: &[f64]) -> Result<f64> {
    let alpha = ground_state_exponent(p);
    let lambda = p.lambda();
    let source = weight_coefficients(alpha + 0.5 * p.sigma(), lambda, degree)?;
    let q = hardy_constant(p);
    let nf = degree.max(1) as f64;
    let filtered: Vec<f64> = source
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let r = n as f64 / nf;
            multiplier(n, p) * a * (-36.0 * r.powi(4)).exp()
        })
        .collect();
    let out = CoefficientVector::new(lambda, filtered)?;
    let mut worst = 0.0f64;
    for &x in grid {
        let got = synthesize(&out, x)?;
        let want = q * (1.0 - x * x).powf(-alpha - 0.5 * p.sigma());
        worst = worst.max(((got - want) / want).abs());
    }
    Ok(worst)
}

/// Outcome of the Heisenberg-type check
/// Q (∫u² dμ)² ≤ ∫u²(1−x²)^{σ/2} dμ · ⟨u, A u⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReport {
    pub product: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn heisenberg_check(u: &CoefficientVector, p: &FracParams, tol: f64) -> Result<HeisenbergReport> {
    check_lambda(u, p)?;
    let form = quadratic_form(u, p)?;
    let moment = integrate_endpoint_singular(
        |x| {
            let v = synthesize(u, x).unwrap_or(f64::NAN);
            v * v
        },
        0.5 * p.sigma(),
        p.lambda(),
        tol,
    )?;
    let mass = u.norm_sq();
    let product = moment * form;
    let bound = hardy_constant(p) * mass * mass;
    let slack = product - bound;
    Ok(HeisenbergReport { product, bound, slack, pass: slack >= -DEFICIT_TOL * product.abs() })
}

/// φ(σ) = Σ m_n(σ) a_n² − Q_{σ,λ} ∫ u² (1−x²)^{−σ/2} dμ_λ for 0 ≤ σ < 1;
/// φ(0) = 0 by Parseval.
pub fn phi(sigma: f64, u: &CoefficientVector, tol: f64) -> Result<f64> {
    if !(sigma.is_finite() && (0.0..1.0).contains(&sigma)) {
        return Err(domain("sigma", sigma));
    }
    let l = u.lambda().lambda();
    let form: f64 = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| ln_gamma_ratio_shift(n as f64, l + 0.5 * (1.0 + sigma), l + 0.5 * (1.0 - sigma)).exp() * a * a)
        .sum();
    let mass = singular_mass(|x| synthesize(u, x).unwrap_or(f64::NAN), sigma, u.lambda(), tol)?;
    Ok(form - hardy_constant_raw(sigma, l) * mass)
}

/// Σψ(n+λ+½)a_n² + ∫ ln√(1−x²) u² dμ_λ − (ln 2 + ψ(λ/2+¼)) ∫u² dμ_λ,
/// which is φ'(0⁺).
pub fn log_uncertainty_gap(u: &CoefficientVector, tol: f64) -> Result<f64> {
    let lambda = u.lambda();
    let l = lambda.lambda();
    let spectral: f64 = u.coeffs().iter().enumerate().map(|(n, a)| digamma_pos(n as f64 + l + 0.5) * a * a).sum();
    let log_part = integrate_de(
        |p: Abscissa| {
            let v = synthesize(u, p.x).unwrap_or(f64::NAN);
            0.5 * p.one_minus_sq().ln() * v * v * mu_weight(lambda, p)
        },
        Abscissa::LEFT,
        Abscissa::RIGHT,
        tol,
    )?;
    Ok(spectral + log_part - (std::f64::consts::LN_2 + digamma_pos(0.5 * l + 0.25)) * u.norm_sq())
}

/// φ'(0⁺) by the one-sided difference (4φ(h) − φ(2h)) / (2h).
pub fn log_uncertainty_fd(u: &CoefficientVector, h: f64, tol: f64) -> Result<f64> {
    Ok((4.0 * phi(h, u, tol)? - phi(2.0 * h, u, tol)?) / (2.0 * h))
}

/// Ratios ⟨u_ε, A u_ε⟩ / ∫u_ε²(1−x²)^{−σ/2}dμ_λ for u_ε = (1−x²)^ε g.
///
/// Coefficients come from [`beta_moment`]; the quadratic form is summed
/// exactly over the first `degree/2 + 1` even modes and the remaining tail,
/// whose terms decay like k^{−1−4ε}, is added by Euler–Maclaurin with an
/// exact integral of the term function.
pub fn sharpness_probe(p: &FracParams, eps: &[f64], degree: usize) -> Result<Vec<f64>> {
    eps.iter().map(|&e| sharpness_ratio(p, e, degree)).collect()
}

struct TermFunction {
    /// (multiplicity, scale, a, b) of each ln Γ(s k + a)/Γ(s k + b).
    parts: [(f64, f64, f64, f64); 4],
    lambda: f64,
    constant: f64,
    q: f64,
}

impl TermFunction {
    fn new(p: &FracParams, eps: f64) -> Result<Self> {
        let l = p.lambda().lambda();
        let s = p.sigma();
        let beta = eps + ground_state_exponent(p) + 0.5 * s;
        let c = beta - l + 0.5;
        if 1.0 - c <= 0.0 {
            return Err(domain("epsilon", eps));
        }
        let parts = [
            (1.0, 2.0, l + 0.5 * (1.0 + s), l + 0.5 * (1.0 - s)),
            (1.0, 2.0, 2.0 * l, 1.0),
            (2.0, 1.0, 0.5, l + 0.5),
            (2.0, 1.0, 1.0 - c, beta + 0.5),
        ];
        let constant =
            -lgamma_pos(2.0 * l) + c_lambda(l).ln() - l.ln() + 2.0 * lgamma_pos(l + 0.5) + 2.0 * lgamma_pos(beta)
                - 2.0 * lgamma_pos(1.0 - c);
        Ok(Self { parts, lambda: l, constant, q: 1.0 + 4.0 * eps })
    }

    /// ln t(k), t(k) = m_{2k} a_{2k}².
    fn ln_term(&self, k: f64) -> f64 {
        let mut acc = self.constant + (2.0 * k + self.lambda).ln();
        for &(e, s, a, b) in &self.parts {
            acc += e * ln_gamma_ratio_shift(s * k, a, b);
        }
        acc
    }

    /// d/dk ln t(k).
    fn ln_term_slope(&self, k: f64) -> f64 {
        let mut acc = 2.0 / (2.0 * k + self.lambda);
        for &(e, s, a, b) in &self.parts {
            acc += e * s * (digamma_pos(s * k + a) - digamma_pos(s * k + b));
        }
        acc
    }

    /// G(∞) where ln t(k) = −q ln k + G(k).
    fn ln_asymptote(&self) -> f64 {
        let mut acc = self.constant + std::f64::consts::LN_2;
        for &(e, s, a, b) in &self.parts {
            acc += e * (a - b) * s.ln();
        }
        acc
    }

    /// G(k) − G(∞).
    fn excess(&self, k: f64) -> f64 {
        let mut acc = (0.5 * self.lambda / k).ln_1p();
        for &(e, s, a, b) in &self.parts {
            acc += e * ln_gamma_ratio_remainder(s * k, a, b);
        }
        acc
    }

    /// Σ_{k ≥ K} t(k) by Euler–Maclaurin.
    fn tail(&self, k0: f64, tol: f64) -> Result<f64> {
        let q = self.q;
        let g_inf = self.ln_asymptote();
        // ∫_K^∞ k^{−q} e^{G(k)} dk with k = K/v
        let correction = integrate_unit(
            |v, _| {
                if v == 0.0 {
                    return 0.0;
                }
                v.powf(q - 2.0) * self.excess(k0 / v).exp_m1()
            },
            tol,
        )?;
        let scale = (g_inf + (1.0 - q) * k0.ln()).exp();
        let integral = scale * (1.0 / (q - 1.0) + correction);
        let t0 = self.ln_term(k0).exp();
        let slope = t0 * self.ln_term_slope(k0);
        Ok(integral + 0.5 * t0 - slope / 12.0)
    }
}

fn sharpness_ratio(p: &FracParams, eps: f64, degree: usize) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(domain("epsilon", eps));
    }
    let terms = TermFunction::new(p, eps)?;
    let k_max = degree / 2;
    let head: f64 = (0..=k_max).map(|k| terms.ln_term(k as f64).exp()).sum();
    let tail = terms.tail((k_max + 1) as f64, 1e-13)?;
    let lambda = p.lambda();
    let denominator = beta_moment(0, 2.0 * eps, lambda)?;
    Ok((head + tail) / denominator)
}

/// Value at ε = 0 of the interpolating polynomial through (ε_i, r_i)
/// (Neville's scheme; Richardson extrapolation for power series in ε).
pub fn richardson_extrapolate(eps: &[f64], values: &[f64]) -> Result<f64> {
    if eps.len() != values.len() || eps.is_empty() {
        return Err(Error::Resolution { reason: "need matching, non-empty ε and value lists".into() });
    }
    let mut t = values.to_vec();
    let n = t.len();
    for j in 1..n {
        for i in (j..n).rev() {
            let (ei, ej) = (eps[i], eps[i - j]);
            t[i] = (ej * t[i] - ei * t[i - 1]) / (ej - ei);
        }
    }
    Ok(t[n - 1])
}

/// Degree-N polynomial with coefficients uniform in [−1, 1] (ChaCha8, seeded).
pub fn random_polynomial(lambda: BasisParams, degree: usize, seed: u64) -> CoefficientVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    CoefficientVector::new(lambda, coeffs).expect("finite")
}

/// Hardy reports for seeded random polynomials, computed in parallel and
/// returned in seed order.
pub fn hardy_random_suite(p: &FracParams, degree: usize, seeds: &[u64], tol: f64) -> Result<Vec<HardyReport>> {
    seeds.par_iter().map(|&s| hardy_check(&random_polynomial(p.lambda(), degree, s), p, tol)).collect()
}

/// Heisenberg reports for the same seeded family.
pub fn heisenberg_random_suite(
    p: &FracParams,
    degree: usize,
    seeds: &[u64],
    tol: f64,
) -> Result<Vec<HeisenbergReport>> {
    seeds.par_iter().map(|&s| heisenberg_check(&random_polynomial(p.lambda(), degree, s), p, tol)).collect()
}

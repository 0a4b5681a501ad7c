//! The Gamma-ratio operator A_σ^λ: spectral multipliers, the nonlocal kernel
//! K_σ^λ, the Poisson kernel of e^{−t√(−ℒ_λ)} and the associated quadratic
//! forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_2d_offdiagonal_raw, integrate_de, integrate_half_line, integrate_split_at, ln_mu_weight, mu_weight,
    try_integrate_de, Abscissa, QuadratureRule,
};
use crate::specfun::{
    beta, c_lambda, digamma_pos, gamma, gamma_ratio, ln_gamma_ratio_shift, normalized_divided_differences, recip_gamma,
    BasisParams,
};
use crate::transform::CoefficientVector;

/// Range of σ a parameter pair is declared for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// 0 < σ < 1
    Theorem1,
    /// 0 < σ < 2λ + 1
    Lemma2,
}

impl Regime {
    fn upper(self, lambda: f64) -> f64 {
        match self {
            Regime::Theorem1 => 1.0,
            Regime::Lemma2 => 2.0 * lambda + 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Regime::Theorem1 => "theorem1",
            Regime::Lemma2 => "lemma2",
        }
    }
}

/// Operator parameters (σ, λ) validated against a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    sigma: f64,
    lambda: BasisParams,
    regime: Regime,
}

impl FracParams {
    pub fn new(sigma: f64, lambda: BasisParams, regime: Regime) -> Result<Self> {
        let upper = regime.upper(lambda.lambda());
        if !(sigma.is_finite() && sigma > 0.0 && sigma < upper) {
            return Err(Error::Regime { sigma, regime: regime.name(), upper });
        }
        Ok(Self { sigma, lambda, regime })
    }

    pub fn theorem1(sigma: f64, lambda: f64) -> Result<Self> {
        Self::new(sigma, BasisParams::new(lambda)?, Regime::Theorem1)
    }

    pub fn lemma2(sigma: f64, lambda: f64) -> Result<Self> {
        Self::new(sigma, BasisParams::new(lambda)?, Regime::Lemma2)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> BasisParams {
        self.lambda
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    fn require_theorem1(&self) -> Result<()> {
        if self.sigma < 1.0 {
            Ok(())
        } else {
            Err(Error::Regime { sigma: self.sigma, regime: "theorem1", upper: 1.0 })
        }
    }
}

/// m_n = Γ(n+λ+(1+σ)/2) / Γ(n+λ+(1−σ)/2).
pub fn multiplier(n: usize, p: &FracParams) -> f64 {
    let l = p.lambda.lambda();
    let s = p.sigma;
    ln_gamma_ratio_shift(n as f64, l + 0.5 * (1.0 + s), l + 0.5 * (1.0 - s)).exp()
}

/// ∂m_n/∂σ = m_n (ψ(n+λ+(1+σ)/2) + ψ(n+λ+(1−σ)/2)) / 2.
pub fn multiplier_sigma_derivative(n: usize, p: &FracParams) -> f64 {
    let base = n as f64 + p.lambda.lambda();
    let s = p.sigma;
    0.5 * multiplier(n, p) * (digamma_pos(base + 0.5 * (1.0 + s)) + digamma_pos(base + 0.5 * (1.0 - s)))
}

fn check_lambda(c: &CoefficientVector, lambda: BasisParams) -> Result<()> {
    if c.lambda() != lambda {
        return Err(Error::LambdaMismatch { left: c.lambda().lambda(), right: lambda.lambda() });
    }
    Ok(())
}

/// a_n ↦ m_n a_n.
pub fn apply_spectral(c: &CoefficientVector, p: &FracParams) -> Result<CoefficientVector> {
    check_lambda(c, p.lambda)?;
    let out = c.coeffs().iter().enumerate().map(|(n, a)| multiplier(n, p) * a).collect();
    Ok(CoefficientVector::from_parts(p.lambda, out))
}

/// a_n ↦ (n+λ)^σ a_n.
pub fn fractional_laplacian_spectral(c: &CoefficientVector, sigma: f64) -> CoefficientVector {
    let l = c.lambda().lambda();
    let out = c.coeffs().iter().enumerate().map(|(n, a)| (n as f64 + l).powf(sigma) * a).collect();
    CoefficientVector::from_parts(c.lambda(), out)
}

/// Σ m_n a_n² = ⟨u, A_σ^λ u⟩_λ.
pub fn quadratic_form(c: &CoefficientVector, p: &FracParams) -> Result<f64> {
    check_lambda(c, p.lambda)?;
    Ok(c.coeffs().iter().enumerate().map(|(n, a)| multiplier(n, p) * a * a).sum())
}

/// Constants of the nonlocal representation A f = ∫(f(x)−f(y))K dμ_λ + E f.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    /// Kernel normalisation D_{σ,λ}.
    pub d: f64,
    /// E_{σ,λ} = m_0.
    pub e: f64,
    /// c_λ = Γ(2λ+1)/(2^{2λ}Γ(λ+1/2)²).
    pub c_lambda: f64,
    /// c_{λ−1/2} = Γ(λ+1/2)/(√π Γ(λ)), normaliser of the product formula.
    pub c_inner: f64,
}

/// |Γ(−σ)| = Γ(1−σ)/σ for 0 < σ < 1.
fn abs_gamma_neg_sigma(sigma: f64) -> f64 {
    gamma_ratio(1.0 - sigma, 1.0).unwrap_or(f64::NAN) / sigma
}

/// D_{σ,λ}, E_{σ,λ}, c_λ and the product-formula normaliser.
pub fn kernel_constants(p: &FracParams) -> Result<KernelConstants> {
    p.require_theorem1()?;
    let l = p.lambda.lambda();
    let s = p.sigma;
    let c_l = c_lambda(l);
    let c_inner = gamma_ratio(l + 0.5, l)? / PI.sqrt();
    let d = c_l * c_inner / 2f64.powf(l + 0.5 * (1.0 + s))
        * gamma(0.5 * (1.0 - s))?
        * gamma_ratio(l + 0.5 * (1.0 + s), l + 1.0)?
        / abs_gamma_neg_sigma(s);
    Ok(KernelConstants { d, e: multiplier(0, p), c_lambda: c_l, c_inner })
}

/// 1 − xy from the endpoint complements, free of cancellation.
fn one_minus_product(x: Abscissa, y: Abscissa) -> f64 {
    if x.x >= 0.0 && y.x >= 0.0 {
        x.hi + x.x * y.hi
    } else if x.x <= 0.0 && y.x <= 0.0 {
        x.lo - x.x * y.lo
    } else {
        1.0 - x.x * y.x
    }
}

/// √(1 − x²)√(1 − y²).
fn root_product(x: Abscissa, y: Abscissa) -> f64 {
    x.one_minus_sq().sqrt() * y.one_minus_sq().sqrt()
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..4000 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Closed-form evaluator of K_σ^λ(x, y).
///
/// K = D B(1/2, λ) (1−xy)^{−p} ₂F₁(p/2, (p+1)/2; λ+1/2; 1−w) with
/// p = λ + (1+σ)/2 and w = ((x−y)/(1−xy))²; for small w the 1−z connection
/// formula isolates the w^{−(1+σ)/2} diagonal singularity.
#[derive(Debug, Clone)]
pub struct Kernel {
    params: FracParams,
    constants: KernelConstants,
    p: f64,
    a: f64,
    b: f64,
    c: f64,
    eta: f64,
    prefactor: f64,
    regular: f64,
    singular: f64,
}

impl Kernel {
    pub fn new(params: &FracParams) -> Result<Self> {
        let constants = kernel_constants(params)?;
        let l = params.lambda.lambda();
        let p = l + 0.5 * (1.0 + params.sigma);
        let (a, b, c) = (0.5 * p, 0.5 * (p + 1.0), l + 0.5);
        let eta = a + b - c;
        let gc = gamma(c)?;
        let regular = gc * gamma(-eta)? * recip_gamma(c - a) * recip_gamma(c - b);
        let singular = gc * gamma(eta)? * recip_gamma(a) * recip_gamma(b);
        Ok(Self {
            params: *params,
            constants,
            p,
            a,
            b,
            c,
            eta,
            prefactor: constants.d * beta(0.5, l),
            regular,
            singular,
        })
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn constants(&self) -> &KernelConstants {
        &self.constants
    }

    /// K(x, y) for x ≠ y in (−1, 1).
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_open(x)?;
        check_open(y)?;
        self.eval_parts(Abscissa::new(x), Abscissa::new(y), x - y)
    }

    /// K from points carrying endpoint complements and the exact x − y.
    pub fn eval_parts(&self, x: Abscissa, y: Abscissa, diff: f64) -> Result<f64> {
        Ok(self.ln_eval_parts(x, y, diff)?.exp())
    }

    /// ln K, finite even where K itself overflows next to the diagonal.
    pub fn ln_eval_parts(&self, x: Abscissa, y: Abscissa, diff: f64) -> Result<f64> {
        if diff == 0.0 {
            return Err(Error::Singular { x: x.x });
        }
        let big_a = one_minus_product(x, y);
        let r = diff / big_a;
        let w = r * r;
        let ln_f = if w >= 0.5 {
            hyp2f1_series(self.a, self.b, self.c, 1.0 - w).ln()
        } else {
            let (a, b, c, eta) = (self.a, self.b, self.c, self.eta);
            let scaled = self.regular * hyp2f1_series(a, b, 1.0 + eta, w) * w.powf(eta)
                + self.singular * hyp2f1_series(c - a, c - b, 1.0 - eta, w);
            scaled.ln() - eta * w.ln()
        };
        Ok(self.prefactor.ln() - self.p * big_a.ln() + ln_f)
    }
}

fn check_open(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() < 1.0 {
        Ok(())
    } else {
        Err(crate::error::domain("kernel argument", x))
    }
}

/// K_σ^λ(x, y) by the closed form; see [`Kernel`].
pub fn kernel_k(x: f64, y: f64, p: &FracParams) -> Result<f64> {
    Kernel::new(p)?.eval(x, y)
}

/// K_σ^λ(x, y) = D Σ w_i (1 − w(t_i))^{−λ−(1+σ)/2} with a Gauss rule for
/// the weight (1 − t²)^{λ−1}; accurate away from the diagonal only.
pub fn kernel_k_quadrature(x: f64, y: f64, p: &FracParams, rule_inner: &QuadratureRule) -> Result<f64> {
    check_open(x)?;
    check_open(y)?;
    if x == y {
        return Err(Error::Singular { x });
    }
    let l = p.lambda.lambda();
    if (rule_inner.exponent() - (l - 1.0)).abs() > 1e-14 * l.max(1.0) {
        return Err(Error::LambdaMismatch { left: rule_inner.lambda(), right: l - 0.5 });
    }
    let k = kernel_constants(p)?;
    let (xa, ya) = (Abscissa::new(x), Abscissa::new(y));
    let big_a = one_minus_product(xa, ya);
    let big_b = root_product(xa, ya);
    let gap = (x - y) * (x - y) / (big_a + big_b);
    let expo = -(l + 0.5 * (1.0 + p.sigma));
    let s = rule_inner.integrate(|t| (gap + big_b * (1.0 - t)).powf(expo))?;
    Ok(k.d * s)
}

/// P_t^λ(x, y) = (λ/π) 2^{−λ} ∫ sinh t (cosh t − w(s))^{−λ−1} (1 − s²)^{λ−1} ds,
/// w(s) = xy + √(1−x²)√(1−y²) s, by tanh-sinh quadrature in s.
pub fn poisson_kernel(t: f64, x: f64, y: f64, lambda: BasisParams, tol: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(crate::error::domain("Poisson time", t));
    }
    check_open(x)?;
    check_open(y)?;
    poisson_parts(t, Abscissa::new(x), Abscissa::new(y), x - y, lambda, tol)
}

fn poisson_parts(t: f64, x: Abscissa, y: Abscissa, diff: f64, lambda: BasisParams, tol: f64) -> Result<f64> {
    let l = lambda.lambda();
    let big_a = one_minus_product(x, y);
    let big_b = root_product(x, y);
    let gap = diff * diff / (big_a + big_b);
    let half_sinh = (0.5 * t).sinh();
    let shift = 2.0 * half_sinh * half_sinh;
    let sinh_t = t.sinh();
    let inner = integrate_de(
        |s| {
            // cosh t − w(s) = (cosh t − 1) + (A − B) + B(1 − s)
            let denom = shift + gap + big_b * s.hi;
            let wt = if l == 1.0 { 1.0 } else { s.one_minus_sq().powf(l - 1.0) };
            sinh_t * denom.powf(-l - 1.0) * wt
        },
        Abscissa::LEFT,
        Abscissa::RIGHT,
        tol,
    )?;
    Ok(l / PI / 2f64.powf(l) * inner)
}

/// K by subordination: (2^{1+σ}|Γ(−σ)|)^{−1} ∫_0^∞ P_t(x,y) (sinh t/2)^{−σ−1} dt.
pub fn kernel_k_time_integral(x: f64, y: f64, p: &FracParams, tol: f64) -> Result<f64> {
    p.require_theorem1()?;
    check_open(x)?;
    check_open(y)?;
    if x == y {
        return Err(Error::Singular { x });
    }
    let s = p.sigma;
    let (xa, ya) = (Abscissa::new(x), Abscissa::new(y));
    let inner_tol = tol / 10.0;
    let failure = std::sync::Mutex::new(None);
    let value = integrate_half_line(
        |t| match poisson_parts(t, xa, ya, x - y, p.lambda, inner_tol) {
            Ok(v) => v * (0.5 * t).sinh().powf(-s - 1.0),
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            }
        },
        tol,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(value / (2f64.powf(1.0 + s) * abs_gamma_neg_sigma(s)))
}

/// ∫_0^∞ (e^{−(n+λ)t} − e^{(1−σ)t/2}) (sinh t/2)^{−σ−1} dt, which equals
/// 2^{1+σ} Γ(−σ) m_n.
pub fn multiplier_time_integral(n: usize, p: &FracParams, tol: f64) -> Result<f64> {
    p.require_theorem1()?;
    let s = p.sigma;
    let grow = 0.5 * (1.0 - s);
    let rate = n as f64 + p.lambda.lambda() + grow;
    integrate_half_line(
        |t| {
            let half = 0.5 * t;
            // Rewrite in terms of e^{−t} to keep large t finite.
            let diff = (grow * t).exp() * (-rate * t).exp_m1();
            if t > 40.0 {
                let e = (-t).exp();
                let sinh_pow = (half.exp() * 0.5 * (1.0 - e)).powf(-s - 1.0);
                diff * sinh_pow
            } else {
                diff * half.sinh().powf(-s - 1.0)
            }
        },
        tol,
    )
}

/// 2^{1+σ} Γ(−σ) m_n, the closed form of [`multiplier_time_integral`].
pub fn multiplier_time_integral_closed(n: usize, p: &FracParams) -> f64 {
    -(2f64.powf(1.0 + p.sigma)) * abs_gamma_neg_sigma(p.sigma) * multiplier(n, p)
}

/// ∫ (f(x) − f(y)) K(x, y) dμ_λ(y) + E f(x) for f = Σ a_n c_n^λ.
pub fn apply_nonlocal(c: &CoefficientVector, x: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    let p = kernel.params();
    check_lambda(c, p.lambda)?;
    check_open(x)?;
    let lambda = p.lambda;
    let n = c.degree();
    let xa = Abscissa::new(x);
    let integral = integrate_split_at(
        xa,
        |y, diff| {
            let dd = normalized_divided_differences(n, lambda, x, y.x);
            let slope: f64 = c.coeffs().iter().zip(&dd).map(|(a, q)| a * q).sum();
            Ok(diff * slope * kernel.eval_parts(xa, y, diff)? * mu_weight(lambda, y))
        },
        tol,
    )?;
    let fx = crate::transform::synthesize(c, x)?;
    Ok(integral + kernel.constants().e * fx)
}

/// ½ ∫∫ (f(x) − f(y))² K dμ_λ dμ_λ + E ‖f‖², the nonlocal side of the
/// quadratic form.
pub fn quadratic_form_nonlocal(c: &CoefficientVector, kernel: &Kernel, tol: f64) -> Result<f64> {
    let p = kernel.params();
    check_lambda(c, p.lambda)?;
    let lambda = p.lambda;
    let n = c.degree();
    let double = integrate_2d_offdiagonal_raw(
        |x, y, diff| {
            let dd = normalized_divided_differences(n, lambda, x.x, y.x);
            let slope: f64 = c.coeffs().iter().zip(&dd).map(|(a, q)| a * q).sum();
            if slope == 0.0 {
                return Ok(0.0);
            }
            let ln = 2.0 * (diff * slope).abs().ln()
                + kernel.ln_eval_parts(x, y, diff)?
                + ln_mu_weight(lambda, x)
                + ln_mu_weight(lambda, y);
            Ok(ln.exp())
        },
        tol,
    )?;
    Ok(0.5 * double + kernel.constants().e * c.norm_sq())
}

/// ∫ P_t^λ(x, ·) dμ_λ, which equals e^{−λt}.
pub fn poisson_mass(t: f64, x: f64, lambda: BasisParams, tol: f64) -> Result<f64> {
    check_open(x)?;
    let xa = Abscissa::new(x);
    try_integrate_de(
        |y| {
            let diff = if y.x <= x { xa.lo - y.lo } else { y.hi - xa.hi };
            let d = if y.x <= x { diff } else { -diff };
            Ok(poisson_parts(t, xa, y, d, lambda, tol / 10.0)? * mu_weight(lambda, y))
        },
        Abscissa::LEFT,
        Abscissa::RIGHT,
        tol,
    )
}

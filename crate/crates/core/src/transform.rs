//! Forward and inverse ultraspherical transforms against the orthonormal
//! family c_n^λ, and the Sobolev norms built on them.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::specfun::{normalized_family, BasisParams};

/// Coefficients (a_0, …, a_N) of an expansion Σ a_n c_n^λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients")]
pub struct CoefficientVector {
    lambda: BasisParams,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCoefficients {
    lambda: BasisParams,
    coeffs: Vec<f64>,
}

impl TryFrom<RawCoefficients> for CoefficientVector {
    type Error = Error;
    fn try_from(raw: RawCoefficients) -> Result<Self> {
        Self::new(raw.lambda, raw.coeffs)
    }
}

impl CoefficientVector {
    pub fn new(lambda: BasisParams, coeffs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(domain("coefficient", *bad));
        }
        Ok(Self { lambda, coeffs })
    }

    pub fn zeros(lambda: BasisParams, degree: usize) -> Self {
        Self { lambda, coeffs: vec![0.0; degree + 1] }
    }

    /// The vector e_n of length n + 1.
    pub fn unit(lambda: BasisParams, n: usize) -> Self {
        let mut c = Self::zeros(lambda, n);
        c.coeffs[n] = 1.0;
        c
    }

    pub fn lambda(&self) -> BasisParams {
        self.lambda
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Truncation degree N (length − 1).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Σ a_n², the L²(dμ_λ) norm squared.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { lambda: self.lambda, coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub(crate) fn from_parts(lambda: BasisParams, coeffs: Vec<f64>) -> Self {
        Self { lambda, coeffs }
    }
}

/// Sobolev exponent together with the norm (Σ (n+λ)^σ a_n²)^{1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevDatum {
    pub sigma: f64,
    pub norm: f64,
}

fn check_rule(rule: &QuadratureRule, lambda: BasisParams) -> Result<()> {
    if (rule.lambda() - lambda.lambda()).abs() > 1e-14 * lambda.lambda().max(1.0) {
        return Err(Error::LambdaMismatch { left: rule.lambda(), right: lambda.lambda() });
    }
    Ok(())
}

/// a_n = Σ w_i f(x_i) c_n^λ(x_i), n = 0..=N, for a Gauss rule of dμ_λ.
pub fn analyze<F: Fn(f64) -> f64>(
    f: F,
    lambda: BasisParams,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<CoefficientVector> {
    check_rule(rule, lambda)?;
    let mut coeffs = vec![0.0; degree + 1];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        let fam = normalized_family(degree, lambda, x)?;
        for (a, p) in coeffs.iter_mut().zip(&fam) {
            *a += w * v * p;
        }
    }
    Ok(CoefficientVector { lambda, coeffs })
}

/// Σ a_n c_n^λ(x).
pub fn synthesize(c: &CoefficientVector, x: f64) -> Result<f64> {
    if c.coeffs.is_empty() {
        return Ok(0.0);
    }
    let fam = normalized_family(c.degree(), c.lambda, x)?;
    Ok(c.coeffs.iter().zip(&fam).map(|(a, p)| a * p).sum())
}

/// |∫ f² dμ_λ − Σ a_n²|.
pub fn parseval_gap<F: Fn(f64) -> f64>(f: F, c: &CoefficientVector, rule: &QuadratureRule) -> Result<f64> {
    check_rule(rule, c.lambda)?;
    let mass = rule.integrate(|x| {
        let v = f(x);
        v * v
    })?;
    Ok((mass - c.norm_sq()).abs())
}

/// (Σ (n+λ)^σ a_n²)^{1/2} for σ ≥ 0.
pub fn sobolev_norm(c: &CoefficientVector, sigma: f64) -> Result<SobolevDatum> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(domain("Sobolev exponent", sigma));
    }
    let l = c.lambda.lambda();
    let s: f64 = c.coeffs.iter().enumerate().map(|(n, a)| (n as f64 + l).powf(sigma) * a * a).sum();
    Ok(SobolevDatum { sigma, norm: s.sqrt() })
}

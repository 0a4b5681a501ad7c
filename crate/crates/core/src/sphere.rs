//! Fields on S² in the coordinates x = (√(1−t²) cos θ, √(1−t²) sin θ, t),
//! expanded in φ_{n,j,k} = (1−t²)^{j/2} c_{n−j}^{j+1/2}(t) Y_{j,k}(θ).

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fracop::{apply_spectral, quadratic_form, FracParams};
use crate::lab::{hardy_constant_raw, singular_mass, HardyReport, Tolerances, DEFICIT_TOL, GSR_TOL};
use crate::quadrature::{gauss_gegenbauer, QuadratureRule};
use crate::specfun::BasisParams;
use crate::transform::{synthesize, CoefficientVector};

/// Ambient dimension supported by the numerical path.
pub const SPHERE_D: usize = 2;

/// Dimension of the degree-j harmonics on S^{d−1}:
/// (2j+d−2)(j+d−3)! / (j!(d−2)!), with d(0) = 1.
pub fn sphere_dim(j: usize, d: usize) -> usize {
    assert!(d >= 2, "d must be at least 2");
    if j == 0 {
        return 1;
    }
    binomial(j + d - 1, d - 1) - binomial(j + d - 3, d - 1)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
}

/// (|x − e||x + e|)^σ = 2^σ (1 − t²)^{σ/2} for t = ⟨x, e⟩.
pub fn pole_weight(t: f64, sigma: f64) -> Result<f64> {
    if t.is_nan() || t.abs() >= 1.0 {
        return Err(domain("t", t));
    }
    Ok((sigma * LN_2 + 0.5 * sigma * (1.0 - t * t).ln()).exp())
}

/// Orthonormal circle harmonic Y_{j,k}: k = 1 is cos, k = 2 is sin.
pub fn circle_harmonic(j: usize, k: usize, theta: f64) -> f64 {
    match (j, k) {
        (0, _) => 1.0 / (2.0 * PI).sqrt(),
        (_, 1) => (j as f64 * theta).cos() / PI.sqrt(),
        _ => (j as f64 * theta).sin() / PI.sqrt(),
    }
}

/// λ_j = j + 1/2.
pub fn channel_lambda(j: usize) -> BasisParams {
    BasisParams::new(j as f64 + 0.5).expect("positive")
}

/// One (j, k) channel: the coefficients of G_{j,k} in the c^{λ_j} basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub j: usize,
    pub k: usize,
    pub lambda_j: f64,
    pub coeffs: Vec<f64>,
}

impl Channel {
    pub fn profile(&self) -> CoefficientVector {
        CoefficientVector::new(channel_lambda(self.j), self.coeffs.clone()).expect("validated")
    }

    fn from_profile(j: usize, k: usize, c: CoefficientVector) -> Self {
        Self { j, k, lambda_j: c.lambda().lambda(), coeffs: c.into_coeffs() }
    }
}

/// A field on S² stored as its radial profiles per circle harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct SphereField {
    d: usize,
    max_j: usize,
    channels: Vec<Channel>,
}

#[derive(Deserialize)]
struct RawField {
    d: usize,
    max_j: usize,
    channels: Vec<Channel>,
}

impl TryFrom<RawField> for SphereField {
    type Error = Error;
    fn try_from(raw: RawField) -> Result<Self> {
        Self::new(raw.max_j, raw.channels).and_then(|f| {
            if raw.d == SPHERE_D {
                Ok(f)
            } else {
                Err(domain("d", raw.d as f64))
            }
        })
    }
}

impl SphereField {
    /// Validates channel labels, λ_j and coefficients.
    pub fn new(max_j: usize, mut channels: Vec<Channel>) -> Result<Self> {
        for c in &channels {
            if c.j > max_j || c.k == 0 || c.k > sphere_dim(c.j, SPHERE_D) {
                return Err(Error::Resolution { reason: format!("invalid channel (j, k) = ({}, {})", c.j, c.k) });
            }
            if c.lambda_j != c.j as f64 + 0.5 {
                return Err(Error::LambdaMismatch { left: c.lambda_j, right: c.j as f64 + 0.5 });
            }
            if let Some(bad) = c.coeffs.iter().find(|a| !a.is_finite()) {
                return Err(domain("coefficient", *bad));
            }
        }
        channels.sort_by_key(|c| (c.j, c.k));
        if channels.windows(2).any(|w| (w[0].j, w[0].k) == (w[1].j, w[1].k)) {
            return Err(Error::Resolution { reason: "duplicate channel".into() });
        }
        Ok(Self { d: SPHERE_D, max_j, channels })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_j(&self) -> usize {
        self.max_j
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Σ over channels of Σ_n f_{n,j,k}².
    pub fn norm_sq(&self) -> f64 {
        self.channels.iter().flat_map(|c| &c.coeffs).map(|a| a * a).sum()
    }
}

/// Quadrature used by [`decompose`]: a uniform θ grid and Gauss nodes per λ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereRules {
    pub theta_points: usize,
    pub radial_nodes: usize,
}

impl SphereRules {
    /// 4·max_j θ points (at least 4) and max_n + 8 radial nodes.
    pub fn for_degrees(max_j: usize, max_n: usize) -> Self {
        Self { theta_points: (4 * max_j).max(4), radial_nodes: max_n + 8 }
    }
}

/// Circular analysis on the θ grid, then radial analysis of
/// G_{j,k} = (1−t²)^{−j/2} F_{j,k} in the λ_j basis up to total degree max_n.
pub fn decompose<F>(f: F, max_j: usize, max_n: usize, rules: SphereRules) -> Result<SphereField>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if rules.theta_points < 2 * max_j + 1 {
        return Err(Error::Resolution {
            reason: format!("{} θ points cannot resolve circle degree {max_j}", rules.theta_points),
        });
    }
    let top = max_j.min(max_n);
    let m = rules.theta_points;
    let thetas: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
    let dtheta = 2.0 * PI / m as f64;
    let labels: Vec<(usize, usize)> =
        (0..=top).flat_map(|j| (1..=sphere_dim(j, SPHERE_D)).map(move |k| (j, k))).collect();
    let rules_by_j: Vec<QuadratureRule> = (0..=top)
        .into_par_iter()
        .map(|j| gauss_gegenbauer(rules.radial_nodes, channel_lambda(j)))
        .collect::<Result<_>>()?;
    let channels = labels
        .par_iter()
        .map(|&(j, k)| {
            let lambda = channel_lambda(j);
            let rule = &rules_by_j[j];
            let ys: Vec<f64> = thetas.iter().map(|&th| circle_harmonic(j, k, th)).collect();
            let profile = |t: f64| {
                let fjk: f64 = thetas.iter().zip(&ys).map(|(&th, y)| f(t, th) * y).sum::<f64>() * dtheta;
                fjk * (1.0 - t * t).powf(-0.5 * j as f64)
            };
            let c = crate::transform::analyze(profile, lambda, max_n - j, rule)?;
            Ok(Channel::from_profile(j, k, c))
        })
        .collect::<Result<Vec<_>>>()?;
    SphereField::new(max_j, channels)
}

/// Σ (1−t²)^{j/2} G_{j,k}(t) Y_{j,k}(θ).
pub fn reconstruct(field: &SphereField, t: f64, theta: f64) -> Result<f64> {
    let mut acc = 0.0;
    for c in &field.channels {
        let g = synthesize(&c.profile(), t)?;
        acc += (1.0 - t * t).powf(0.5 * c.j as f64) * g * circle_harmonic(c.j, c.k, theta);
    }
    Ok(acc)
}

/// 𝐀_σ: each profile mapped by A_σ^{λ_j}, for 0 < σ < 2.
pub fn apply_a_sigma_sphere(field: &SphereField, sigma: f64) -> Result<SphereField> {
    let channels = field
        .channels
        .par_iter()
        .map(|c| {
            let p = FracParams::lemma2(sigma, c.lambda_j)?;
            Ok(Channel::from_profile(c.j, c.k, apply_spectral(&c.profile(), &p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SphereField { d: field.d, max_j: field.max_j, channels })
}

/// Q_{σ,j+1/2} for j = 0..=max_j.
pub fn channel_constants(sigma: f64, max_j: usize) -> Vec<f64> {
    (0..=max_j).map(|j| hardy_constant_raw(sigma, j as f64 + 0.5)).collect()
}

/// lhs = Q_{σ,1/2} Σ ∫ F_{j,k}² (1−t²)^{−σ/2} dt, rhs = Σ ⟨G_{j,k}, A_σ^{λ_j} G_{j,k}⟩.
pub fn sphere_hardy_check(field: &SphereField, sigma: f64, tol: f64) -> Result<HardyReport> {
    let base = FracParams::theorem1(sigma, 0.5)?;
    let parts = field
        .channels
        .par_iter()
        .map(|c| {
            let u = c.profile();
            let p = FracParams::theorem1(sigma, c.lambda_j)?;
            let form = quadratic_form(&u, &p)?;
            let mass = singular_mass(|t| synthesize(&u, t).unwrap_or(f64::NAN), sigma, u.lambda(), tol)?;
            Ok((form, mass))
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs: f64 = parts.iter().map(|p| p.0).sum();
    let lhs = hardy_constant_raw(base.sigma(), 0.5) * parts.iter().map(|p| p.1).sum::<f64>();
    let n = field.channels.iter().map(|c| c.j + c.coeffs.len().saturating_sub(1)).max().unwrap_or(0);
    let deficit = rhs - lhs;
    Ok(HardyReport {
        lambda: 0.5,
        sigma,
        n,
        lhs,
        rhs,
        deficit,
        gsr_value: None,
        pass: deficit >= -DEFICIT_TOL * rhs.abs(),
        tolerances: Tolerances { deficit_relative: DEFICIT_TOL, gsr_relative: GSR_TOL, quadrature: tol },
    })
}

/// Field with coefficients uniform in [−1, 1] on every channel j ≤ max_j,
/// total degree ≤ max_n.
pub fn random_sphere_field(max_j: usize, max_n: usize, seed: u64) -> SphereField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut channels = Vec::new();
    for j in 0..=max_j.min(max_n) {
        for k in 1..=sphere_dim(j, SPHERE_D) {
            let coeffs = (0..=max_n - j).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            channels.push(Channel { j, k, lambda_j: j as f64 + 0.5, coeffs });
        }
    }
    SphereField::new(max_j, channels).expect("valid")
}

/// Surface integral ∫_{S²} f² dσ = ∫∫ f² dt dθ with a trapezoid θ grid and
/// Gauss–Legendre in t.
pub fn surface_mass<F: Fn(f64, f64) -> f64>(f: F, theta_points: usize, t_nodes: usize) -> Result<f64> {
    surface_integral(|t, th| f(t, th).powi(2), theta_points, t_nodes)
}

/// ∫∫ h dt dθ with the same product rule as [`surface_mass`].
pub fn surface_integral<F: Fn(f64, f64) -> f64>(h: F, theta_points: usize, t_nodes: usize) -> Result<f64> {
    let rule = gauss_gegenbauer(t_nodes, channel_lambda(0))?;
    let dtheta = 2.0 * PI / theta_points as f64;
    rule.integrate(|t| (0..theta_points).map(|i| h(t, dtheta * i as f64)).sum::<f64>() * dtheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracop::multiplier;
    use crate::lab::{hardy_check, random_polynomial};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn dimensions() {
        assert_eq!(sphere_dim(0, 3), 1);
        assert_eq!(sphere_dim(1, 3), 3);
        assert_eq!(sphere_dim(2, 3), 5);
        assert_eq!(sphere_dim(0, 2), 1);
        assert_eq!((1..10).map(|j| sphere_dim(j, 2)).collect::<Vec<_>>(), vec![2; 9]);
        assert_eq!(sphere_dim(3, 4), 16);
    }

    #[test]
    fn pole_weight_examples() {
        assert!(rel(pole_weight(0.0, 0.5).unwrap(), 2f64.sqrt()) < 1e-15);
        assert_eq!(pole_weight(0.3, 0.0).unwrap(), 1.0);
        assert!(pole_weight(1.0, 0.5).is_err());
        assert!(pole_weight(1.0 - 1e-12, 0.5).unwrap() < pole_weight(1.0 - 1e-6, 0.5).unwrap());
        assert!(pole_weight(-1.0 + 1e-12, 0.5).unwrap() < 2e-3);
        // |x−e||x+e| with x at height t
        let (t, th, s) = (0.4f64, 1.1f64, 0.7);
        let r = (1.0 - t * t).sqrt();
        let x = [r * th.cos(), r * th.sin(), t];
        let dist = |sgn: f64| (x[0] * x[0] + x[1] * x[1] + (x[2] - sgn).powi(2)).sqrt();
        assert!(rel(pole_weight(t, s).unwrap(), (dist(1.0) * dist(-1.0)).powf(s)) < 1e-14);
    }

    #[test]
    fn decompose_constant_and_harmonic() {
        let rules = SphereRules::for_degrees(3, 4);
        let f = decompose(|_, _| 1.0, 3, 4, rules).unwrap();
        for c in f.channels() {
            for (n, a) in c.coeffs.iter().enumerate() {
                let want = if (c.j, n) == (0, 0) { (4.0 * PI).sqrt() } else { 0.0 };
                assert!((a - want).abs() < 1e-13, "{c:?}");
            }
        }
        let f = decompose(|t, th| (1.0 - t * t).sqrt() * th.cos(), 3, 4, rules).unwrap();
        for c in f.channels() {
            for (n, a) in c.coeffs.iter().enumerate() {
                if (c.j, c.k, n) == (1, 1, 0) {
                    assert!(a.abs() > 0.1);
                } else {
                    assert!(a.abs() < 1e-13, "{c:?}");
                }
            }
        }
        assert!(decompose(|_, _| 1.0, 3, 4, SphereRules { theta_points: 6, radial_nodes: 12 }).is_err());
    }

    fn poly(t: f64, th: f64) -> f64 {
        let r = (1.0 - t * t).sqrt();
        let (x, y, z) = (r * th.cos(), r * th.sin(), t);
        1.0 + x - 2.0 * y * z + x * x * y + 0.5 * z * z * z - x * y + 0.3 * z * z
    }

    #[test]
    fn round_trip_polynomial_field() {
        let field = decompose(poly, 3, 3, SphereRules::for_degrees(3, 3)).unwrap();
        let mut worst = 0.0f64;
        for i in 0..41 {
            let t = -1.0 + 2.0 * i as f64 / 40.0;
            for l in 0..64 {
                let th = 2.0 * PI * l as f64 / 64.0;
                worst = worst.max((reconstruct(&field, t, th).unwrap() - poly(t, th)).abs());
            }
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn plancherel_and_orthogonality() {
        let field = decompose(poly, 3, 3, SphereRules::for_degrees(3, 3)).unwrap();
        let mass = surface_mass(poly, 16, 12).unwrap();
        assert!(rel(field.norm_sq(), mass) < 1e-8);
        let basis = |n: usize, j: usize, k: usize| {
            move |t: f64, th: f64| {
                let c = CoefficientVector::unit(channel_lambda(j), n - j);
                (1.0 - t * t).powf(0.5 * j as f64) * synthesize(&c, t).unwrap() * circle_harmonic(j, k, th)
            }
        };
        let pairs = [((2, 1, 1), (2, 1, 1)), ((2, 1, 1), (3, 1, 1)), ((2, 2, 2), (2, 2, 1)), ((3, 0, 1), (3, 2, 1))];
        for (a, b) in pairs {
            let (fa, fb) = (basis(a.0, a.1, a.2), basis(b.0, b.1, b.2));
            let ip = surface_integral(|t, th| fa(t, th) * fb(t, th), 16, 12).unwrap();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-10, "{a:?} {b:?}: {ip}");
        }
    }

    #[test]
    fn apply_examples() {
        let s = 0.5;
        let field = decompose(|_, _| 1.0, 2, 2, SphereRules::for_degrees(2, 2)).unwrap();
        let out = apply_a_sigma_sphere(&field, s).unwrap();
        let m0 = multiplier(0, &FracParams::theorem1(s, 0.5).unwrap());
        assert!(rel(out.channels()[0].coeffs[0], m0 * field.channels()[0].coeffs[0]) < 1e-14);
        // φ_{2,0,1} and φ_{2,1,1} share the degree-2 eigenvalue.
        let one = |j: usize, k: usize| {
            let mut c = vec![0.0; 3 - j];
            c[2 - j] = 1.0;
            SphereField::new(2, vec![Channel { j, k, lambda_j: j as f64 + 0.5, coeffs: c }]).unwrap()
        };
        let a = apply_a_sigma_sphere(&one(0, 1), s).unwrap().channels()[0].coeffs[2];
        let b = apply_a_sigma_sphere(&one(1, 1), s).unwrap().channels()[0].coeffs[1];
        let want = multiplier(2, &FracParams::theorem1(s, 0.5).unwrap());
        assert!(rel(a, want) < 1e-14 && rel(b, want) < 1e-14);
        let (u, v) = (random_sphere_field(2, 4, 1), random_sphere_field(2, 4, 2));
        let sum = SphereField::new(
            2,
            u.channels()
                .iter()
                .zip(v.channels())
                .map(|(p, q)| Channel {
                    coeffs: p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x + y).collect(),
                    ..p.clone()
                })
                .collect(),
        )
        .unwrap();
        let (au, av, asum) = (
            apply_a_sigma_sphere(&u, s).unwrap(),
            apply_a_sigma_sphere(&v, s).unwrap(),
            apply_a_sigma_sphere(&sum, s).unwrap(),
        );
        for ((p, q), r) in au.channels().iter().zip(av.channels()).zip(asum.channels()) {
            for ((x, y), z) in p.coeffs.iter().zip(&q.coeffs).zip(&r.coeffs) {
                assert!((x + y - z).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn invariant_field_reduces_to_interval() {
        let l = channel_lambda(0);
        for &s in &[0.25, 0.5, 0.9] {
            let u = random_polynomial(l, 8, 3);
            let field =
                decompose(|t, _| synthesize(&u, t).unwrap() / (2.0 * PI).sqrt(), 2, 8, SphereRules::for_degrees(2, 8))
                    .unwrap();
            let a = sphere_hardy_check(&field, s, 1e-13).unwrap();
            let b = hardy_check(&u, &FracParams::theorem1(s, 0.5).unwrap(), 1e-13).unwrap();
            assert!(
                rel(a.lhs, b.lhs) < 1e-10 && rel(a.rhs, b.rhs) < 1e-10 && (a.deficit - b.deficit).abs() < 1e-10 * b.rhs
            );
        }
    }

    #[test]
    fn channel_constants_increase() {
        for &s in &[0.1, 0.5, 0.9] {
            let q = channel_constants(s, 20);
            assert!(q.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn harmonic_deficit_exceeds_invariant_analog() {
        let s = 0.5;
        let g = |j: usize| {
            SphereField::new(1, vec![Channel { j, k: 1, lambda_j: j as f64 + 0.5, coeffs: vec![1.0] }]).unwrap()
        };
        let r0 = sphere_hardy_check(&g(0), s, 1e-13).unwrap();
        let r1 = sphere_hardy_check(&g(1), s, 1e-13).unwrap();
        assert!(r0.deficit > 0.0 && r1.deficit > r0.deficit);
        for seed in 0..20 {
            assert!(sphere_hardy_check(&random_sphere_field(3, 5, seed), s, 1e-12).unwrap().pass);
        }
    }

    #[test]
    fn form_matches_surface_quadrature() {
        let s = 0.5;
        let field = random_sphere_field(3, 5, 9);
        let af = apply_a_sigma_sphere(&field, s).unwrap();
        let form: f64 = field
            .channels()
            .iter()
            .zip(af.channels())
            .map(|(a, b)| a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        let direct =
            surface_integral(|t, th| reconstruct(&field, t, th).unwrap() * reconstruct(&af, t, th).unwrap(), 24, 16)
                .unwrap();
        assert!(rel(direct, form) < 1e-6);
    }

    #[test]
    fn json_shape() {
        let f = SphereField::new(1, vec![Channel { j: 1, k: 2, lambda_j: 1.5, coeffs: vec![0.5] }]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"d":2,"max_j":1,"channels":[{"j":1,"k":2,"lambda_j":1.5,"coeffs":[0.5]}]}"#);
        assert_eq!(serde_json::from_str::<SphereField>(&s).unwrap(), f);
        assert!(serde_json::from_str::<SphereField>(&s.replace("1.5", "1.0")).is_err());
        assert!(serde_json::from_str::<SphereField>(&s.replace("\"k\":2", "\"k\":3")).is_err());
        assert!(serde_json::from_str::<SphereField>(&s.replace("\"d\":2", "\"d\":3")).is_err());
    }
}

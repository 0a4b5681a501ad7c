//! Verification suites run by `verify`, plus `constants` and `table`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use ultra_hardy::fracop::{
    apply_nonlocal, kernel_constants, multiplier, multiplier_time_integral, multiplier_time_integral_closed,
    FracParams, Kernel,
};
use ultra_hardy::lab::{
    hardy_check, hardy_check_with_gsr, hardy_constant, heisenberg_check, lemma2_ratio_check, log_uncertainty_fd,
    log_uncertainty_gap, random_polynomial, richardson_extrapolate, sharpness_probe, HardyReport, LOG_GAP_TOL,
};
use ultra_hardy::specfun::normalized_gegenbauer;
use ultra_hardy::sphere::{channel_constants, decompose, random_sphere_field, sphere_hardy_check, SphereRules};
use ultra_hardy::transform::synthesize;
use ultra_hardy::{BasisParams, CoefficientVector, Error};

/// Random functions drawn per parameter cell.
pub const SAMPLES: u64 = 20;
/// Largest degree used by the ground-state double integral.
pub const GSR_MAX_DEGREE: usize = 4;
/// Largest basis index in the eigen-identity check.
pub const KERNEL_MAX_INDEX: usize = 6;
pub const LEMMA2_MAX_M: usize = 10;
pub const LEMMA2_TOL: f64 = 1e-10;
pub const KERNEL_TOL: f64 = 1e-5;
pub const TIME_INTEGRAL_TOL: f64 = 1e-8;
pub const LOG_FD_TOL: f64 = 1e-5;
pub const LOG_FD_STEP: f64 = 1e-4;
pub const SHARPNESS_TOL: f64 = 1e-2;
pub const SPHERE_TOL: f64 = 1e-10;
pub const SPHERE_MAX_J: usize = 3;

pub const SHARPNESS_EPS: [f64; 5] = [0.25, 0.125, 0.0625, 0.03125, 0.015625];

/// Settings shared by every suite.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Settings {
    pub degree: usize,
    pub nodes: usize,
    pub tol: f64,
    pub seed: u64,
}

/// Outcome of one suite over its grid.
#[derive(Debug, Serialize)]
pub struct SuiteOutcome {
    pub pass: bool,
    pub cells: Vec<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hardy,
    Gsr,
    Lemma2,
    Kernel,
    Heisenberg,
    LogUncert,
    Sharpness,
    Sphere,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Hardy => "hardy",
            Suite::Gsr => "gsr",
            Suite::Lemma2 => "lemma2",
            Suite::Kernel => "kernel",
            Suite::Heisenberg => "heisenberg",
            Suite::LogUncert => "loguncert",
            Suite::Sharpness => "sharpness",
            Suite::Sphere => "sphere",
        }
    }

    /// Validated parameters for one (σ, λ) cell of this suite.
    pub fn params(self, sigma: f64, lambda: f64) -> Result<FracParams, Error> {
        match self {
            Suite::Lemma2 => FracParams::lemma2(sigma, lambda),
            _ => FracParams::theorem1(sigma, lambda),
        }
    }
}

fn seeds(s: &Settings) -> Vec<u64> {
    (s.seed..s.seed + SAMPLES).collect()
}

fn cell_header(p: &FracParams) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("lambda".into(), json!(p.lambda().lambda()));
    m.insert("sigma".into(), json!(p.sigma()));
    m
}

fn finish(p: &FracParams, pass: bool, extra: Value) -> (bool, Value) {
    let mut m = cell_header(p);
    m.insert("pass".into(), json!(pass));
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    (pass, Value::Object(m))
}

pub fn run(suite: Suite, cells: &[FracParams], s: &Settings) -> Result<SuiteOutcome, Error> {
    let results = cells
        .iter()
        .map(|p| match suite {
            Suite::Hardy => hardy(p, s),
            Suite::Gsr => gsr(p, s),
            Suite::Lemma2 => lemma2(p),
            Suite::Kernel => kernel(p, s),
            Suite::Heisenberg => heisenberg(p, s),
            Suite::LogUncert => loguncert(p, s),
            Suite::Sharpness => sharpness(p, s),
            Suite::Sphere => sphere(p, s),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(SuiteOutcome { pass: results.iter().all(|r| r.0), cells: results.into_iter().map(|r| r.1).collect() })
}

fn hardy_reports(p: &FracParams, s: &Settings) -> Result<Vec<HardyReport>, Error> {
    seeds(s).par_iter().map(|&seed| hardy_check(&random_polynomial(p.lambda(), s.degree, seed), p, s.tol)).collect()
}

fn hardy(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let reports = hardy_reports(p, s)?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(finish(p, pass, json!({ "seeds": seeds(s), "reports": reports })))
}

fn gsr(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let degree = s.degree.min(GSR_MAX_DEGREE);
    let kernel = Kernel::new(p)?;
    let reports = seeds(s)
        .iter()
        .map(|&seed| hardy_check_with_gsr(&random_polynomial(p.lambda(), degree, seed), &kernel, s.tol))
        .collect::<Result<Vec<_>, Error>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(finish(p, pass, json!({ "degree_used": degree, "seeds": seeds(s), "reports": reports })))
}

fn lemma2(p: &FracParams) -> Result<(bool, Value), Error> {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for m in 0..=LEMMA2_MAX_M {
        let (ratio, closed) = lemma2_ratio_check(m, p)?;
        let err = ((ratio - closed) / closed).abs();
        worst = worst.max(err);
        rows.push(json!({ "m": m, "ratio": ratio, "closed_form": closed, "rel_err": err }));
    }
    let pass = worst <= LEMMA2_TOL;
    Ok(finish(p, pass, json!({ "max_rel_err": worst, "tol": LEMMA2_TOL, "moments": rows })))
}

fn kernel(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let k = Kernel::new(p)?;
    let l = p.lambda();
    let grid: Vec<f64> = (0..s.nodes).map(|i| -1.0 + 2.0 * (i + 1) as f64 / (s.nodes + 1) as f64).collect();
    let eigen = (0..=KERNEL_MAX_INDEX)
        .map(|n| {
            let u = CoefficientVector::unit(l, n);
            let values = grid
                .par_iter()
                .map(|&x| {
                    let got = apply_nonlocal(&u, x, &k, s.tol.min(1e-10))?;
                    Ok((got, multiplier(n, p) * normalized_gegenbauer(n, l, x)?))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let err = values.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = values.iter().map(|(_, b)| b.abs()).fold(0.0, f64::max);
            Ok(err / scale)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let time = (0..=10)
        .map(|n| {
            let got = multiplier_time_integral(n, p, 1e-12)?;
            let want = multiplier_time_integral_closed(n, p);
            Ok(((got - want) / want).abs())
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let eigen_worst = eigen.iter().cloned().fold(0.0, f64::max);
    let time_worst = time.iter().cloned().fold(0.0, f64::max);
    let pass = eigen_worst <= KERNEL_TOL && time_worst <= TIME_INTEGRAL_TOL;
    Ok(finish(
        p,
        pass,
        json!({
            "constants": kernel_constants(p)?,
            "grid_points": s.nodes,
            "eigen_rel_err": eigen,
            "eigen_tol": KERNEL_TOL,
            "time_integral_rel_err": time,
            "time_integral_tol": TIME_INTEGRAL_TOL,
        }),
    ))
}

fn heisenberg(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let reports = seeds(s)
        .par_iter()
        .map(|&seed| heisenberg_check(&random_polynomial(p.lambda(), s.degree, seed), p, s.tol))
        .collect::<Result<Vec<_>, Error>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(finish(p, pass, json!({ "seeds": seeds(s), "reports": reports })))
}

fn loguncert(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let l = p.lambda();
    let rows = seeds(s)
        .par_iter()
        .map(|&seed| {
            let u = random_polynomial(l, s.degree, seed);
            let gap = log_uncertainty_gap(&u, s.tol.min(1e-12))?;
            let fd = log_uncertainty_fd(&u, LOG_FD_STEP, s.tol.min(1e-12))?;
            let norm = u.norm_sq();
            let fd_err = ((fd - gap) / gap).abs();
            let pass = gap >= -LOG_GAP_TOL * norm && fd_err <= LOG_FD_TOL;
            Ok((
                pass,
                json!({ "seed": seed, "gap": gap, "fd": fd, "norm_sq": norm, "fd_rel_err": fd_err, "pass": pass }),
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let pass = rows.iter().all(|r| r.0);
    let rows: Vec<Value> = rows.into_iter().map(|r| r.1).collect();
    Ok(finish(
        p,
        pass,
        json!({ "gap_tol": LOG_GAP_TOL, "fd_tol": LOG_FD_TOL, "fd_step": LOG_FD_STEP, "samples": rows }),
    ))
}

fn sharpness(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let ratios = sharpness_probe(p, &SHARPNESS_EPS, s.degree)?;
    let limit = richardson_extrapolate(&SHARPNESS_EPS, &ratios)?;
    let q = hardy_constant(p);
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let rel = ((limit - q) / q).abs();
    let pass = decreasing && rel <= SHARPNESS_TOL;
    Ok(finish(
        p,
        pass,
        json!({
            "Q": q,
            "epsilon": SHARPNESS_EPS,
            "ratios": ratios,
            "extrapolated": limit,
            "rel_err": rel,
            "decreasing": decreasing,
            "tol": SHARPNESS_TOL,
        }),
    ))
}

fn sphere(p: &FracParams, s: &Settings) -> Result<(bool, Value), Error> {
    let sigma = p.sigma();
    let max_n = s.degree.max(SPHERE_MAX_J);
    let fields = seeds(s)
        .par_iter()
        .map(|&seed| sphere_hardy_check(&random_sphere_field(SPHERE_MAX_J, max_n, seed), sigma, s.tol))
        .collect::<Result<Vec<_>, Error>>()?;
    let half = BasisParams::new(0.5)?;
    let u = random_polynomial(half, s.degree, s.seed);
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let field = decompose(
        |t, _| synthesize(&u, t).unwrap_or(f64::NAN) / norm,
        SPHERE_MAX_J,
        s.degree,
        SphereRules::for_degrees(SPHERE_MAX_J, s.degree),
    )?;
    let a = sphere_hardy_check(&field, sigma, s.tol)?;
    let b = hardy_check(&u, &FracParams::theorem1(sigma, 0.5)?, s.tol)?;
    let reduction = ((a.lhs - b.lhs) / b.lhs).abs().max(((a.rhs - b.rhs) / b.rhs).abs());
    let q = channel_constants(sigma, 20);
    let monotone = q.iter().all(|v| *v >= q[0]);
    let pass = fields.iter().all(|r| r.pass) && reduction <= SPHERE_TOL && monotone;
    let mut m = serde_json::Map::new();
    m.insert("sigma".into(), json!(sigma));
    m.insert("pass".into(), json!(pass));
    m.insert("max_j".into(), json!(SPHERE_MAX_J));
    m.insert("seeds".into(), json!(seeds(s)));
    m.insert("reports".into(), json!(fields));
    m.insert("reduction_rel_err".into(), json!(reduction));
    m.insert("reduction_tol".into(), json!(SPHERE_TOL));
    m.insert("channel_constants".into(), json!(q));
    m.insert("channel_constants_monotone".into(), json!(monotone));
    Ok((pass, Value::Object(m)))
}

/// Q, D, E, c_λ and m_0 … m_N for one cell.
pub fn constants(p: &FracParams, degree: usize) -> Result<Value, Error> {
    let k = kernel_constants(p)?;
    let m: Vec<f64> = (0..=degree).map(|n| multiplier(n, p)).collect();
    let mut out = cell_header(p);
    out.insert("Q".into(), json!(hardy_constant(p)));
    out.insert("D".into(), json!(k.d));
    out.insert("E".into(), json!(k.e));
    out.insert("c_lambda".into(), json!(k.c_lambda));
    out.insert("multipliers".into(), json!(m));
    Ok(Value::Object(out))
}

/// Q, the smallest relative Hardy deficit over the random family, and the
/// sharpness ratio at the smallest ε divided by Q.
pub fn table_row(p: &FracParams, s: &Settings) -> Result<crate::report::TableRow, Error> {
    let q = hardy_constant(p);
    let deficit_min = hardy_reports(p, s)?.iter().map(|r| r.deficit / r.rhs).fold(f64::INFINITY, f64::min);
    let eps = SHARPNESS_EPS[SHARPNESS_EPS.len() - 1];
    let ratio = match sharpness_probe(p, &[eps], s.degree) {
        Ok(r) => r[0] / q,
        Err(Error::Domain { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(crate::report::TableRow { lambda: p.lambda().lambda(), sigma: p.sigma(), q, deficit_min, ratio })
}

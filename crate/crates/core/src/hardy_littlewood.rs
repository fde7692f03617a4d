//! Logarithmic integrals and Hardy–Littlewood main-term predictions.
//!
//! `li_k(x) = ∫_2^x dt / log^k t` is integrated by adaptive Simpson after the
//! substitution `t = e^u`, which turns the integrand into `e^u / u^k` on
//! `[log 2, log x]`.

use serde::Serialize;

use crate::counting::{count_tuple, DifferenceSet};
use crate::error::{Error, Result};
use crate::sieve::PrimeTable;
use crate::singular::{singular_series_of, SingularValue};

const INITIAL_PANELS: usize = 32;
const MAX_DEPTH: u32 = 48;

/// A quadrature value with its accumulated error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, panel: Panel, tol: f64, depth: u32) -> (f64, f64) {
    let Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
    } = panel;
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Never ask for less than a few ulps of the panel value.
    let tol = tol.max(8.0 * f64::EPSILON * (left + right).abs());
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = simpson_step(
        f,
        Panel {
            a,
            b: m,
            fa,
            fm: flm,
            fb: fm,
            whole: left,
        },
        tol / 2.0,
        depth - 1,
    );
    let (rv, re) = simpson_step(
        f,
        Panel {
            a: m,
            b,
            fa: fm,
            fm: frm,
            fb,
            whole: right,
        },
        tol / 2.0,
        depth - 1,
    );
    (lv + rv, le + re)
}

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if b <= a {
        return Quadrature {
            value: 0.0,
            error: 0.0,
        };
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        let panel = Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole,
        };
        let (v, e) = simpson_step(&f, panel, tol / INITIAL_PANELS as f64, MAX_DEPTH);
        value += v;
        error += e;
    }
    Quadrature { value, error }
}

/// `∫_2^x dt / log^k t` with its error estimate.
pub fn li_k_quadrature(x: f64, k: u32, tolerance: f64) -> Result<Quadrature> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Range(format!("li_k needs finite x >= 2, got {x}")));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::Range(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    if x == 2.0 {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let k = k as i32;
    Ok(adaptive_simpson(
        |u: f64| u.exp() / u.powi(k),
        2f64.ln(),
        x.ln(),
        tolerance,
    ))
}

/// `li_k(x) = ∫_2^x dt / log^k t` to absolute `tolerance`.
pub fn li_k(x: f64, k: u32, tolerance: f64) -> Result<f64> {
    li_k_quadrature(x, k, tolerance).map(|q| q.value)
}

/// `Li_{k+1}(x, D) = ∫_2^{x - d_k} dt / log^{k+1} t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpperIntegral {
    pub value: f64,
    pub error: f64,
    /// Set when `x <= d_k + 2` and the integral is empty.
    pub degenerate: bool,
}

pub fn li_upper(x: u64, d: &DifferenceSet, tolerance: f64) -> Result<UpperIntegral> {
    if x <= d.largest() + 2 {
        return Ok(UpperIntegral {
            value: 0.0,
            error: 0.0,
            degenerate: true,
        });
    }
    let q = li_k_quadrature((x - d.largest()) as f64, d.k() as u32 + 1, tolerance)?;
    Ok(UpperIntegral {
        value: q.value,
        error: q.error,
        degenerate: false,
    })
}

/// The displayed terms of the expansion factor `H(x, D)` and the sizes of
/// its two error terms, each taken with implied constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionFactor {
    pub value: f64,
    /// `d_k / (x log x)`.
    pub shift_error: f64,
    /// `1 / log³ x`.
    pub truncation_error: f64,
}

/// `H(x, D) = 1 + (k+1)/log x + (k+1)(k+2)/log² x`.
pub fn h_factor(x: f64, d: &DifferenceSet) -> Result<ExpansionFactor> {
    if x.is_nan() || x < 10.0 {
        return Err(Error::Range(format!("h_factor needs x >= 10, got {x}")));
    }
    let l = x.ln();
    let n = d.k() as f64 + 1.0;
    Ok(ExpansionFactor {
        value: 1.0 + n / l + n * (n + 1.0) / (l * l),
        shift_error: d.largest() as f64 / (x * l),
        truncation_error: 1.0 / (l * l * l),
    })
}

/// Main-term prediction `𝔖({0} ∪ D)·Li_{k+1}(x, D)` next to the exact count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub x: u64,
    pub k: usize,
    #[serde(rename = "D")]
    pub set: DifferenceSet,
    pub singular: f64,
    pub singular_detail: SingularValue,
    pub predicted: f64,
    pub exact: Option<u64>,
    /// `exact / predicted`; absent when there is no exact count or the
    /// prediction vanishes.
    pub ratio: Option<f64>,
    /// `|exact - predicted| · log^{k+3} x / x`.
    pub normalized_error: Option<f64>,
    pub quadrature_error: f64,
    pub is_zero: bool,
}

/// Builds a prediction; `tolerance` is relative for both the singular series
/// and the integral.
pub fn predict(
    table: &PrimeTable,
    x: u64,
    d: &DifferenceSet,
    tolerance: f64,
) -> Result<Prediction> {
    table.check_within(x)?;
    let singular = singular_series_of(d, tolerance)?;
    let exact = count_tuple(table, x, d)?.count;
    let k = d.k();
    let (predicted, quadrature_error) = if singular.is_zero {
        (0.0, 0.0)
    } else {
        // Scale the absolute quadrature tolerance to the integral's size.
        let scale = if x > 2 {
            x as f64 / (x as f64).ln().powi(k as i32 + 1)
        } else {
            1.0
        };
        let li = li_upper(x, d, tolerance * scale.max(1.0))?;
        (singular.value * li.value, singular.value * li.error)
    };
    let ratio = (predicted > 0.0).then(|| exact as f64 / predicted);
    let normalized_error = (x > 2).then(|| {
        let l = (x as f64).ln();
        (exact as f64 - predicted).abs() * l.powi(k as i32 + 3) / x as f64
    });
    Ok(Prediction {
        x,
        k,
        set: d.clone(),
        singular: singular.value,
        singular_detail: singular,
        predicted,
        exact: Some(exact),
        ratio,
        normalized_error,
        quadrature_error,
        is_zero: singular.is_zero,
    })
}

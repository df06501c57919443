//! The one-parameter unlocking trajectory inside the D3 family.
//!
//! On the trajectory the three distances `AB`, `AD`, `BD` coincide. It is cut
//! out by the polynomials `K1`, `K2` in `(S, T, U)` and, after eliminating
//! `U`, by `psi(s, t) = 0` with `s = S^2`, `t = T^2`. The parameter
//! `x = (1 - s)/(1 + t) = cos^2(phi) cos^2(delta)` runs from 1 (the start
//! `C6(0,0,0)`) down towards 0; the common squared distance along the way is
//! `F(x) = 12x / (1 + 7x + 4x^2)`, maximal at `x = 1/2`.
//!
//! Branches: `T > 0`, `S >= 0`, `kappa` in `(-pi/2, 0]`.

use std::f64::consts::FRAC_PI_6;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::d3::{self, D3Params};
use crate::error::{Error, Result};
use crate::geometry::radius_from_distance;

const SQRT3: f64 = 1.732_050_807_568_877_2;

pub fn k1(s: f64, t: f64, u: f64) -> f64 {
    -SQRT3 * u * u + 2.0 * u * (1.0 - SQRT3 * s * t) + 2.0 * s * t + SQRT3
}

pub fn k2(s: f64, t: f64, u: f64) -> f64 {
    let s2 = s * s;
    (-4.0 * s2 + 3.0 * s2 * s2 - t * t) * (u + s * t).powi(2) - 3.0 * t * t * (s2 - 1.0).powi(3)
}

/// The `U` that completes `(S, T)` to a point with `K1 = K2 = 0` whenever
/// `psi(S^2, T^2) = 0`. Only meaningful on the trajectory away from the
/// origin.
pub fn u_from_st(s: f64, t: f64) -> Result<f64> {
    let s2 = s * s;
    let t2 = t * t;
    let den = 4.0 * s2 - 3.0 * s2 * s2 + t2;
    if den.abs() <= 1e-300 {
        return Err(Error::Degenerate("4S^2 - 3S^4 + T^2 vanishes"));
    }
    // K2 = 0 fixes (U + ST)^2; substituting it into K1 = 0 leaves a linear
    // equation in U.
    let twice = 3.0 * SQRT3 * t2 * (1.0 - s2).powi(3) / den - SQRT3 - 2.0 * s * t - SQRT3 * s2 * t2;
    Ok(0.5 * twice)
}

/// The constraint polynomial in `s = S^2`, `t = T^2`.
pub fn psi(s: f64, t: f64) -> f64 {
    4.0 * s - 8.0 * t - 3.0 * s * s + 29.0 * s * t - 4.0 * t * t - 22.0 * s * s * t
        + 14.0 * s * t * t
        + 4.0 * s * s * s * t
        - 7.0 * s * s * t * t
        + s * t * t * t
}

/// `psi` rewritten in `(t, x)`: `-(1+t)^3 (-1 - 2x + tx + 3x^2 + 7tx^2 + 4tx^3)`
/// with `x = (1 - s)/(1 + t)`.
pub fn psi_factored(s: f64, t: f64) -> f64 {
    let x = (1.0 - s) / (1.0 + t);
    -(1.0 + t).powi(3)
        * (-1.0 - 2.0 * x + t * x + 3.0 * x * x + 7.0 * t * x * x + 4.0 * t * x * x * x)
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(x))
    }
}

fn quad(x: f64) -> f64 {
    1.0 + 7.0 * x + 4.0 * x * x
}

/// `t = T^2` along the trajectory.
pub fn t_of_x(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok((1.0 + 3.0 * x) * (1.0 - x) / (x * quad(x)))
}

/// `s = S^2` along the trajectory.
pub fn s_of_x(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(4.0 * (1.0 - x) * x * (1.0 + x) / quad(x))
}

/// The common squared distance `12x / (1 + 7x + 4x^2)`.
pub fn f_of_x(x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(12.0 * x / quad(x))
}

/// A point on the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub x: f64,
    /// `s = S^2`
    pub s_sq: f64,
    /// `t = T^2`
    pub t_sq: f64,
    pub s_var: f64,
    pub t_var: f64,
    pub u_var: f64,
    pub params: D3Params,
    pub f_value: f64,
}

impl CurveSample {
    /// `d_AE^2`, the triplet that is not forced equal on the trajectory.
    pub fn dae_sq(&self) -> Result<f64> {
        Ok(d3::triplets_trig(&self.params)?.dae_sq)
    }
}

pub fn gamma_point(x: f64) -> Result<CurveSample> {
    check_x(x)?;
    if x == 1.0 {
        return Ok(CurveSample {
            x,
            s_sq: 0.0,
            t_sq: 0.0,
            s_var: 0.0,
            t_var: 0.0,
            u_var: -1.0 / SQRT3,
            params: D3Params::origin(),
            f_value: 1.0,
        });
    }
    let q = quad(x);
    let s_var = 2.0 * ((1.0 - x) * x * (1.0 + x) / q).sqrt();
    let t_var = ((1.0 - x) * (1.0 + 3.0 * x) / (x * q)).sqrt();
    let root = ((1.0 + x) * (1.0 + 3.0 * x)).sqrt();
    let u_var = 0.5 * (-SQRT3 - 4.0 * (1.0 - x) * root / q + SQRT3 * (5.0 * x - 1.0) / q);
    let kappa = ((x - 1.0) / root).atan();
    let params = D3Params::new(s_var.asin(), t_var.atan(), kappa)?;
    Ok(CurveSample {
        x,
        s_sq: s_of_x(x)?,
        t_sq: t_of_x(x)?,
        s_var,
        t_var,
        u_var,
        params,
        f_value: f_of_x(x)?,
    })
}

/// Location of the largest latitude along the trajectory, where `s(x)` peaks.
/// Root of `4x^4 + 14x^3 + 7x^2 - 1` in `(0, 1)`.
pub fn x_at_max_latitude() -> f64 {
    let g = |x: f64| 4.0 * x.powi(4) + 14.0 * x.powi(3) + 7.0 * x * x - 1.0;
    bisect(g, 0.0, 1.0)
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Curve parameter for latitude `phi` on the stretch of the trajectory that
/// leaves `C6(0,0,0)` and contains the record, `x` in `[x*, 1]`.
pub fn x_from_phi(phi: f64) -> Result<f64> {
    let target = phi.sin().powi(2);
    let x_peak = x_at_max_latitude();
    let s_max = s_of_x(x_peak)?;
    if !(phi >= 0.0) || target > s_max {
        return Err(Error::InvalidArgument(format!(
            "latitude {phi} is not reached on the trajectory (max {})",
            s_max.sqrt().asin()
        )));
    }
    if target == 0.0 {
        return Ok(1.0);
    }
    let g = |x: f64| 4.0 * (1.0 - x) * x * (1.0 + x) / quad(x) - target;
    Ok(bisect(g, x_peak, 1.0))
}

/// A computed quantity next to its closed form.
#[derive(Debug, Clone, Serialize)]
pub struct RecordValue {
    pub computed: f64,
    pub closed_form: f64,
    pub expression: &'static str,
}

impl RecordValue {
    fn new(computed: f64, closed_form: f64, expression: &'static str) -> Self {
        Self {
            computed,
            closed_form,
            expression,
        }
    }

    pub fn deviation(&self) -> f64 {
        (self.computed - self.closed_form).abs()
    }
}

/// The record configuration at `x = 1/2`.
#[derive(Debug, Clone, Serialize)]
pub struct RecordReport {
    pub x_m: RecordValue,
    pub s_m: RecordValue,
    pub t_m: RecordValue,
    pub u_m: RecordValue,
    pub tan_kappa_m: RecordValue,
    pub phi_m: RecordValue,
    pub delta_m: RecordValue,
    pub kappa_m: RecordValue,
    pub f_m: RecordValue,
    pub d_m: RecordValue,
    pub dae_sq_m: RecordValue,
    pub r_m: RecordValue,
    pub params: D3Params,
}

impl RecordReport {
    pub fn values(&self) -> [(&'static str, &RecordValue); 12] {
        [
            ("x_m", &self.x_m),
            ("s_m", &self.s_m),
            ("t_m", &self.t_m),
            ("u_m", &self.u_m),
            ("tan_kappa_m", &self.tan_kappa_m),
            ("phi_m", &self.phi_m),
            ("delta_m", &self.delta_m),
            ("kappa_m", &self.kappa_m),
            ("f_m", &self.f_m),
            ("d_m", &self.d_m),
            ("dae_sq_m", &self.dae_sq_m),
            ("r_m", &self.r_m),
        ]
    }

    pub fn max_deviation(&self) -> f64 {
        self.values()
            .iter()
            .map(|(_, v)| v.deviation())
            .fold(0.0, f64::max)
    }
}

pub const X_RECORD: f64 = 0.5;

pub fn record() -> RecordReport {
    record_at(X_RECORD).expect("x = 1/2 is inside the curve domain")
}

/// The record report evaluated at some other `x`; only `x = 1/2` matches the
/// closed forms. Used to self-test the verification harness.
pub fn record_at(x: f64) -> Result<RecordReport> {
    let g = gamma_point(x)?;
    let p = g.params;
    let config = d3::build_c6(&p)?;
    let d_m = config.min_distance()?;
    let dae = d3::triplets_generic(&config)?.dae_sq;
    let sqrt5 = 5f64.sqrt();
    let sqrt15 = 15f64.sqrt();
    let d_closed = (12.0f64 / 11.0).sqrt();
    Ok(RecordReport {
        x_m: RecordValue::new(x, 0.5, "1/2"),
        s_m: RecordValue::new(g.s_var * g.s_var, 3.0 / 11.0, "3/11"),
        t_m: RecordValue::new(g.t_var * g.t_var, 5.0 / 11.0, "5/11"),
        u_m: RecordValue::new(
            (p.kappa - FRAC_PI_6).tan(),
            -SQRT3 * (4.0 + sqrt5) / 11.0,
            "-sqrt(3)(4+sqrt(5))/11",
        ),
        tan_kappa_m: RecordValue::new(p.kappa.tan(), -1.0 / sqrt15, "-1/sqrt(15)"),
        phi_m: RecordValue::new(p.phi, (3.0f64 / 11.0).sqrt().asin(), "arcsin(sqrt(3/11))"),
        delta_m: RecordValue::new(p.delta, (5.0f64 / 11.0).sqrt().atan(), "arctan(sqrt(5/11))"),
        kappa_m: RecordValue::new(p.kappa, -(1.0 / sqrt15).atan(), "-arctan(1/sqrt(15))"),
        f_m: RecordValue::new(f_of_x(x)?, 12.0 / 11.0, "12/11"),
        d_m: RecordValue::new(d_m, d_closed, "sqrt(12/11)"),
        dae_sq_m: RecordValue::new(dae, 540.0 / 143.0, "540/143"),
        r_m: RecordValue::new(
            radius_from_distance(d_m)?,
            (3.0 + 33f64.sqrt()) / 8.0,
            "(3+sqrt(33))/8",
        ),
        params: p,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnimodalityReport {
    pub grid_size: usize,
    pub grid_step: f64,
    /// F strictly increasing over grid nodes in `(0, 1/2]`.
    pub increasing: bool,
    /// F strictly decreasing over grid nodes in `[1/2, 1]`.
    pub decreasing: bool,
    pub argmax_x: f64,
    pub max_f: f64,
}

/// Samples F on `x_i = i/n`, `i = 1..=n`.
pub fn scan_unimodality(grid_size: usize) -> Result<UnimodalityReport> {
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid size {grid_size} too small (need >= 3)"
        )));
    }
    let n = grid_size as f64;
    let samples: Vec<(f64, f64)> = (1..=grid_size)
        .map(|i| {
            let x = i as f64 / n;
            (x, 12.0 * x / quad(x))
        })
        .collect();
    let mut increasing = true;
    let mut decreasing = true;
    for w in samples.windows(2) {
        let ((x0, f0), (x1, f1)) = (w[0], w[1]);
        if x1 <= X_RECORD && f1 <= f0 {
            increasing = false;
        }
        if x0 >= X_RECORD && f1 >= f0 {
            decreasing = false;
        }
    }
    let (argmax_x, max_f) =
        samples
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, s| {
                if s.1 > best.1 {
                    s
                } else {
                    best
                }
            });
    Ok(UnimodalityReport {
        grid_size,
        grid_step: 1.0 / n,
        increasing,
        decreasing,
        argmax_x,
        max_f,
    })
}

/// Exact squared sines of the three angles at a rational curve parameter.
#[derive(Debug, Clone, Serialize)]
pub struct GeodeticReport {
    pub x: String,
    pub sin2_phi: String,
    pub sin2_delta: String,
    pub sin2_kappa: String,
    /// Every rational agrees with the floating-point angles of
    /// [`gamma_point`] to 1e-12.
    pub matches_float: bool,
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Ok(r) = text.parse::<BigRational>() {
        return Ok(r);
    }
    text.parse::<BigInt>()
        .map(BigRational::from_integer)
        .map_err(|_| Error::InvalidArgument(format!("not a rational number: {text}")))
}

pub struct GeodeticSquares {
    pub sin2_phi: BigRational,
    pub sin2_delta: BigRational,
    pub sin2_kappa: BigRational,
}

/// `sin^2` of `phi`, `delta`, `kappa` on the trajectory as exact fractions.
pub fn geodetic_squares(x: &BigRational) -> Result<GeodeticSquares> {
    let one = BigRational::one();
    if *x <= BigRational::zero() || *x > one {
        return Err(Error::OutOfRange(x.to_f64().unwrap_or(f64::NAN)));
    }
    let int = |n: i64| BigRational::from_integer(BigInt::from(n));
    let q = &one + int(7) * x + int(4) * x * x;
    let sin2_phi = int(4) * (&one - x) * x * (&one + x) / &q;
    let t = (&one + int(3) * x) * (&one - x) / (x * &q);
    let sin2_delta = &t / (&one + &t);
    let tan2_kappa = (x - &one) * (x - &one) / ((&one + x) * (&one + int(3) * x));
    let sin2_kappa = &tan2_kappa / (&one + &tan2_kappa);
    Ok(GeodeticSquares {
        sin2_phi,
        sin2_delta,
        sin2_kappa,
    })
}

pub fn pure_geodetic_check(x: &BigRational) -> Result<GeodeticReport> {
    let sq = geodetic_squares(x)?;
    let xf = x
        .to_f64()
        .ok_or_else(|| Error::InvalidArgument("x not representable".into()))?;
    let g = gamma_point(xf)?;
    let close = |exact: &BigRational, angle: f64| {
        exact
            .to_f64()
            .is_some_and(|v| (v - angle.sin().powi(2)).abs() <= 1e-12)
    };
    let matches_float = close(&sq.sin2_phi, g.params.phi)
        && close(&sq.sin2_delta, g.params.delta)
        && close(&sq.sin2_kappa, g.params.kappa);
    Ok(GeodeticReport {
        x: x.to_string(),
        sin2_phi: sq.sin2_phi.to_string(),
        sin2_delta: sq.sin2_delta.to_string(),
        sin2_kappa: sq.sin2_kappa.to_string(),
        matches_float,
    })
}

//! Rings of `2n` vertical tangent lines and their deformations.
//!
//! Neighbouring verticals are `alpha` apart in longitude (`alpha = pi/3` for
//! six lines, `pi/2` for four). The deformation moves three representative
//! lines: `A` at `(phi, alpha/2 + kappa)`, `B` at `(phi, 5alpha/2 + kappa)` and
//! `D` at `(-phi, 3alpha/2 - kappa)`, all tilted by `delta`. With
//! `U = tan(kappa - alpha/2)` and `Ubar = tan(kappa + alpha/2)` the squared
//! distances are rational in `(S, T, U, Ubar)`.
//!
//! At `alpha = pi/3` this reproduces the six-line family with
//! `Ubar_six = -Ubar`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    distance_sq, make_tangent_line, radius_from_distance, Configuration, SphericalPoint,
    TangentLine, Vec3,
};

const POLE_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralParams {
    pub alpha: f64,
    pub phi: f64,
    pub delta: f64,
    pub kappa: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < PI {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

impl GeneralParams {
    pub fn new(alpha: f64, phi: f64, delta: f64, kappa: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(phi.is_finite() && delta.is_finite() && kappa.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameters".into()));
        }
        if phi.abs() >= FRAC_PI_2 {
            return Err(Error::PoleNotAllowed(phi));
        }
        Ok(Self {
            alpha,
            phi,
            delta,
            kappa,
        })
    }

    /// `(S, T, U, Ubar)`.
    pub fn alg(&self) -> Result<(f64, f64, f64, f64)> {
        let gamma = self.kappa - self.alpha / 2.0;
        let gamma_bar = self.kappa + self.alpha / 2.0;
        if self.delta.cos().abs() <= POLE_TOL {
            return Err(Error::TanPole("delta at +-pi/2"));
        }
        if gamma.cos().abs() <= POLE_TOL || gamma_bar.cos().abs() <= POLE_TOL {
            return Err(Error::TanPole("kappa -+ alpha/2 at a pole of tan"));
        }
        Ok((
            self.phi.sin(),
            self.delta.tan(),
            gamma.tan(),
            gamma_bar.tan(),
        ))
    }
}

/// The three moving lines `[A, B, D]`.
pub fn build_abd(g: &GeneralParams) -> Result<[TangentLine; 3]> {
    let a = g.alpha;
    Ok([
        make_tangent_line(SphericalPoint::new(g.phi, a / 2.0 + g.kappa)?, g.delta)?,
        make_tangent_line(SphericalPoint::new(g.phi, 2.5 * a + g.kappa)?, g.delta)?,
        make_tangent_line(SphericalPoint::new(-g.phi, 1.5 * a - g.kappa)?, g.delta)?,
    ])
}

fn cross_sq(s: f64, t: f64, u: f64) -> f64 {
    4.0 * (s * t + u).powi(2) / (1.0 - s * s + t * t + u * u + 2.0 * s * t * u)
}

/// `(d_AB^2, d_AD^2, d_BD^2)`.
///
/// At `S = T = 0` the `AB` expression reads 0/0; the parallel value
/// `4 sin^2(alpha)` is returned there.
pub fn dists_general(g: &GeneralParams) -> Result<(f64, f64, f64)> {
    check_alpha(g.alpha)?;
    let (s, t, u, ubar) = g.alg()?;
    let (s2, t2) = (s * s, t * t);
    let (sa, ca) = g.alpha.sin_cos();
    let dab = if s2 + t2 == 0.0 {
        4.0 * sa * sa
    } else {
        let den = (s2 + t2) * (1.0 - sa * sa * s2 + ca * ca * t2);
        if den.abs() <= 1e-300 {
            return Err(Error::Degenerate("d_AB denominator vanishes"));
        }
        4.0 * sa * sa * (1.0 - s2).powi(2) * t2 / den
    };
    Ok((dab, cross_sq(s, t, u), cross_sq(s, t, ubar)))
}

/// The same three distances for the alternative motion in which `D` turns by
/// `-delta`. `d_AB^2` is unchanged.
pub fn dists_alternate(g: &GeneralParams) -> Result<(f64, f64, f64)> {
    let (dab, _, _) = dists_general(g)?;
    let (s, t, u, ubar) = g.alg()?;
    let (s2, t2) = (s * s, t * t);
    if s2 + t2 == 0.0 {
        let base = 4.0 * (g.alpha / 2.0).sin().powi(2);
        return Ok((dab, base, base));
    }
    let alt = |u: f64| {
        4.0 * u * u * s2 * (1.0 + t2).powi(2) / ((s2 + t2) * (1.0 - s2 + u * u + t2 * u * u))
    };
    Ok((dab, alt(u), alt(ubar)))
}

/// Three lines of the alternative motion, `D` tilted by `-delta`.
pub fn build_abd_alternate(g: &GeneralParams) -> Result<[TangentLine; 3]> {
    let [a, b, _] = build_abd(g)?;
    let d = make_tangent_line(
        SphericalPoint::new(-g.phi, 1.5 * g.alpha - g.kappa)?,
        -g.delta,
    )?;
    Ok([a, b, d])
}

/// Closed-form Taylor coefficients of the squared distances along
/// `phi = phi1 t`, `delta = delta1 t`, `kappa = kappa1 t + kappa2 t^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesCoeffs {
    pub dab_0: f64,
    pub dad_0: f64,
    pub dbd_0: f64,
    pub dad_1: f64,
    pub dbd_1: f64,
    /// Second-order terms, available only when `kappa1 = 0`.
    pub dad_2: Option<f64>,
    pub dbd_2: Option<f64>,
}

pub fn series_coeffs(
    alpha: f64,
    phi1: f64,
    delta1: f64,
    kappa1: f64,
    kappa2: f64,
) -> Result<SeriesCoeffs> {
    check_alpha(alpha)?;
    let norm = delta1 * delta1 + phi1 * phi1;
    if norm == 0.0 {
        return Err(Error::Degenerate("direction (phi1, delta1) is zero"));
    }
    let (sa, ca) = alpha.sin_cos();
    let base = 4.0 * (alpha / 2.0).sin().powi(2);
    let (dad_2, dbd_2) = if kappa1 == 0.0 {
        let common = 2.0 * delta1 * phi1 * (1.0 + ca) + 4.0 * kappa2;
        let split = sa * (delta1 * delta1 - phi1 * phi1);
        (Some(-sa * (common + split)), Some(sa * (common - split)))
    } else {
        (None, None)
    };
    Ok(SeriesCoeffs {
        dab_0: 4.0 * delta1 * delta1 * sa * sa / norm,
        dad_0: base,
        dbd_0: base,
        dad_1: -4.0 * kappa1 * sa,
        dbd_1: 4.0 * kappa1 * sa,
        dad_2,
        dbd_2,
    })
}

/// Taylor coefficients of the squared distances recovered from samples of
/// the actual distance functions along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractedSeries {
    pub dab: [f64; 3],
    pub dad: [f64; 3],
    pub dbd: [f64; 3],
}

const FIT_NODES: usize = 8;

/// Interpolates each distance at `t = +-h, +-2h, +-3h, +-4h` with a degree-7
/// polynomial and reads off its low-order coefficients. The origin is skipped
/// because `d_AB^2` is `0/0` there.
pub fn extract_series(
    alpha: f64,
    phi1: f64,
    delta1: f64,
    kappa1: f64,
    kappa2: f64,
    h: f64,
) -> Result<ExtractedSeries> {
    check_alpha(alpha)?;
    if !(h > 0.0) || 4.0 * h * phi1.abs() >= FRAC_PI_2 {
        return Err(Error::InvalidArgument(format!("sample step {h} unusable")));
    }
    let half = FIT_NODES as i32 / 2;
    let nodes: Vec<f64> = (-half..=half)
        .filter(|&j| j != 0)
        .map(|j| j as f64)
        .collect();
    // Fit in the scaled variable u = t/h to keep the system well conditioned.
    let vander = SMatrix::<f64, FIT_NODES, FIT_NODES>::from_fn(|r, c| nodes[r].powi(c as i32));
    let lu = vander.lu();
    let mut samples = [SVector::<f64, FIT_NODES>::zeros(); 3];
    for (r, &u) in nodes.iter().enumerate() {
        let t = u * h;
        let g = GeneralParams::new(alpha, phi1 * t, delta1 * t, kappa1 * t + kappa2 * t * t)?;
        let (ab, ad, bd) = dists_general(&g)?;
        samples[0][r] = ab;
        samples[1][r] = ad;
        samples[2][r] = bd;
    }
    let mut out = [[0.0; 3]; 3];
    for (k, rhs) in samples.iter().enumerate() {
        let coef = lu
            .solve(rhs)
            .ok_or(Error::Degenerate("interpolation system singular"))?;
        for order in 0..3 {
            out[k][order] = coef[order] / h.powi(order as i32);
        }
    }
    Ok(ExtractedSeries {
        dab: out[0],
        dad: out[1],
        dbd: out[2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Unlockable,
    Marginal,
    Blocked,
}

/// First-order unlocking direction and its finite-step confirmation.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub phi1: f64,
    pub delta1: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Interval of admissible `delta1` for `phi1 = 1`.
    pub delta1_window: (f64, f64),
    pub kappa2_window: (f64, f64),
    pub t_check: f64,
    pub distances_sq: [f64; 3],
    pub threshold_sq: f64,
    /// All three distances exceed the starting value at `t_check`.
    pub confirmed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnlockReport {
    pub alpha: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Step used to confirm a witness numerically.
pub const WITNESS_STEP: f64 = 1e-2;

/// Classifies `alpha` by the first-order unlocking criterion `alpha <= pi/2`.
pub fn unlock_verdict(alpha: f64) -> Result<UnlockReport> {
    check_alpha(alpha)?;
    if (alpha - FRAC_PI_2).abs() <= MARGINAL_TOL {
        return Ok(UnlockReport {
            alpha,
            verdict: Verdict::Marginal,
            witness: None,
        });
    }
    // With phi1 = 1: zero-order AB growth needs delta1^2 >= lo, second-order
    // AD/BD growth needs delta1^2 <= 1.
    let half = (alpha / 2.0).sin().powi(2);
    let gain = alpha.sin().powi(2) - half;
    if gain <= 0.0 || half / gain >= 1.0 {
        return Ok(UnlockReport {
            alpha,
            verdict: Verdict::Blocked,
            witness: None,
        });
    }
    let witness = build_witness(alpha, (half / gain).sqrt())?;
    Ok(UnlockReport {
        alpha,
        verdict: Verdict::Unlockable,
        witness: Some(witness),
    })
}

fn build_witness(alpha: f64, delta1_lo: f64) -> Result<Witness> {
    let phi1 = 1.0;
    let delta1 = 0.5 * (delta1_lo + 1.0);
    let (sa, ca) = alpha.sin_cos();
    let shift = -2.0 * delta1 * phi1 * (1.0 + ca);
    let split = (delta1 * delta1 - phi1 * phi1) * sa;
    let kappa2_window = ((shift + split) / 4.0, (shift - split) / 4.0);
    let kappa2 = 0.5 * (kappa2_window.0 + kappa2_window.1);
    let t = WITNESS_STEP;
    let g = GeneralParams::new(alpha, phi1 * t, delta1 * t, kappa2 * t * t)?;
    let (ab, ad, bd) = dists_general(&g)?;
    let threshold_sq = 4.0 * (alpha / 2.0).sin().powi(2);
    Ok(Witness {
        phi1,
        delta1,
        kappa1: 0.0,
        kappa2,
        delta1_window: (delta1_lo, 1.0),
        kappa2_window,
        t_check: t,
        distances_sq: [ab, ad, bd],
        threshold_sq,
        confirmed: ab > threshold_sq && ad > threshold_sq && bd > threshold_sq,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AltStrategyReport {
    pub alpha: f64,
    pub verdict: Verdict,
    /// Each step of the argument that forces the first-order direction to zero.
    pub forcing_chain: Vec<String>,
}

/// The alternative motion (`D` tilted by `-delta`) never unlocks: zero-order
/// growth of `AD` forces `delta1 = 0`, after which zero-order growth of `AB`
/// forces `phi1 = 0`.
pub fn alt_strategy_verdict(alpha: f64) -> Result<AltStrategyReport> {
    check_alpha(alpha)?;
    let half = (alpha / 2.0).sin().powi(2);
    let sa2 = alpha.sin().powi(2);
    let mut chain = Vec::new();
    // [d_AD^2]_0 = 4 phi1^2 half / (delta1^2 + phi1^2) >= 4 half  <=>  delta1 = 0.
    chain.push(format!(
        "[d_AD^2]_0 = 4 phi1^2 sin^2(alpha/2)/(delta1^2+phi1^2) >= {:.6} forces delta1 = 0",
        4.0 * half
    ));
    // With delta1 = 0: delta1^2 sin^2(alpha) >= (delta1^2 + phi1^2) sin^2(alpha/2)
    // reduces to 0 >= phi1^2 sin^2(alpha/2).
    let phi1_forced = half > 0.0;
    if phi1_forced {
        chain.push("with delta1 = 0, [d_AB^2]_0 >= 4 sin^2(alpha/2) reads 0 >= phi1^2 sin^2(alpha/2), forcing phi1 = 0".into());
    }
    chain.push(format!(
        "only the zero direction remains (sin^2(alpha) = {sa2:.6}); blocked"
    ));
    Ok(AltStrategyReport {
        alpha,
        verdict: Verdict::Blocked,
        forcing_chain: chain,
    })
}

/// Which root of `U^2 + 2STU = 1` to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourCylBranch {
    /// `U = -ST - sqrt(S^2T^2 + 1)`, continuous from `U(0) = -1`.
    #[default]
    Principal,
    /// `U = -ST + sqrt(S^2T^2 + 1)`.
    Mirror,
}

/// A point of the four-line motion (`alpha = pi/2`).
#[derive(Debug, Clone, Serialize)]
pub struct FourCylPoint {
    pub t_var: f64,
    pub s_var: f64,
    pub u_var: f64,
    pub params: GeneralParams,
    pub distances_sq: [f64; 3],
    pub radius: f64,
    /// `T^2 - S^2 - 2 S^2 T^2`, zero on the motion.
    pub q_value: f64,
    /// Lines in longitude order `A, D, B, E`.
    pub lines: [TangentLine; 4],
    /// `1 - |dir_A . dir_E|` and `1 - |dir_B . dir_D|`.
    pub parallel_residuals: [f64; 2],
}

pub fn four_cyl_q(s: f64, t: f64) -> f64 {
    t * t - s * s - 2.0 * s * s * t * t
}

pub fn four_cyl_point(t: f64) -> Result<FourCylPoint> {
    four_cyl_point_on(t, FourCylBranch::Principal)
}

pub fn four_cyl_point_on(t: f64, branch: FourCylBranch) -> Result<FourCylPoint> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "T = {t} must be finite and >= 0"
        )));
    }
    let s = t / (1.0 + 2.0 * t * t).sqrt();
    let root = (s * s * t * t + 1.0).sqrt();
    let u = match branch {
        FourCylBranch::Principal => -s * t - root,
        FourCylBranch::Mirror => -s * t + root,
    };
    let params = GeneralParams::new(FRAC_PI_2, s.asin(), t.atan(), u.atan() + FRAC_PI_4)?;
    let (mut ab, ad, bd) = dists_general(&params)?;
    if t == 0.0 {
        // Limit along the motion; the parallel value 4 only holds at T = 0.
        ab = 2.0;
    }
    let [a, b, d] = build_abd(&params)?;
    let half_turn = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), PI);
    let e = d.rotated(&half_turn);
    let residual = |p: &TangentLine, q: &TangentLine| 1.0 - p.dir().dot(&q.dir()).abs();
    Ok(FourCylPoint {
        t_var: t,
        s_var: s,
        u_var: u,
        params,
        distances_sq: [ab, ad, bd],
        radius: radius_from_distance(2f64.sqrt())?,
        q_value: four_cyl_q(s, t),
        lines: [a, d, b, e],
        parallel_residuals: [residual(&a, &e), residual(&b, &d)],
    })
}

impl FourCylPoint {
    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.lines.to_vec())
    }

    /// Smallest of the three squared distances after moving `kappa` by `eps`
    /// off the motion.
    pub fn perturbed_min_sq(&self, eps: f64) -> Result<f64> {
        let mut g = self.params;
        g.kappa += eps;
        let (ab, ad, bd) = dists_general(&g)?;
        Ok(ab.min(ad).min(bd))
    }
}

/// Generic squared distances between the three moving lines.
pub fn dists_from_lines(lines: &[TangentLine; 3]) -> (f64, f64, f64) {
    (
        distance_sq(&lines[0], &lines[1]),
        distance_sq(&lines[0], &lines[2]),
        distance_sq(&lines[1], &lines[2]),
    )
}

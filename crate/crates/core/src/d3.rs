//! The D3-symmetric six-line family `C6(phi, delta, kappa)`.
//!
//! Line order is always `(A, B, C, D, E, F)`. The upper triple `A, B, C` sits
//! at latitude `phi` and longitudes `pi/6 + kappa`, `5pi/6 + kappa`,
//! `3pi/2 + kappa`; the lower triple `D, E, F` at latitude `-phi` and
//! longitudes `pi/2 - kappa`, `7pi/6 - kappa`, `11pi/6 - kappa`. Every line
//! carries the north tangent rotated by `delta`.
//!
//! The longitude offset is measured so that `U = tan(kappa - pi/6)` is the
//! coordinate that makes `d_AD^2` rational, and the record point has
//! `tan(kappa) = -1/sqrt(15)`.
//!
//! Only four distances are distinct on the family:
//! `AB = BC = CA = DE = EF = FD`, `AD = BE = CF`, `BD = CE = AF` and
//! `AE = BF = CD`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    distance_sq, make_tangent_line, parallel_distance_sq, radius_from_distance, Configuration,
    SphericalPoint, Vec3, PARALLEL_TOL,
};

pub const LABELS: [char; 6] = ['A', 'B', 'C', 'D', 'E', 'F'];

/// `d_AB^2` at `phi = delta = 0`, where the closed forms read 0/0: the lines
/// are parallel verticals `2pi/3` apart.
pub const DAB_SQ_PARALLEL: f64 = 3.0;

const ORBIT_TOL: f64 = 1e-10;
const POLE_TOL: f64 = 1e-12;
const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D3Params {
    pub phi: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl D3Params {
    pub fn new(phi: f64, delta: f64, kappa: f64) -> Result<Self> {
        let p = Self { phi, delta, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn origin() -> Self {
        Self {
            phi: 0.0,
            delta: 0.0,
            kappa: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.delta.is_finite() && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument("non-finite D3 parameters".into()));
        }
        if self.phi.abs() >= FRAC_PI_2 || self.phi.cos() <= POLE_TOL {
            return Err(Error::PoleNotAllowed(self.phi));
        }
        Ok(())
    }
}

/// Algebraic coordinates `S = sin phi`, `T = tan delta`,
/// `U = tan(kappa - pi/6)`, `Ubar = -tan(kappa + pi/6)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgCoords {
    pub s_var: f64,
    pub t_var: f64,
    pub u_var: f64,
    pub ubar_var: f64,
}

impl AlgCoords {
    /// `-sqrt3 U Ubar + U + Ubar + sqrt3`, identically zero.
    pub fn relation_residual(&self) -> f64 {
        -SQRT3 * self.u_var * self.ubar_var + self.u_var + self.ubar_var + SQRT3
    }

    /// `Ubar` recovered from `U` through the addition formula for tangents.
    pub fn ubar_from_u(u: f64) -> f64 {
        -(u + SQRT3) / (1.0 - SQRT3 * u)
    }
}

/// Squares of the four distinct distances on the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriplets {
    pub dab_sq: f64,
    pub dad_sq: f64,
    pub dbd_sq: f64,
    pub dae_sq: f64,
}

impl DistanceTriplets {
    pub fn min_sq(&self) -> f64 {
        self.dab_sq
            .min(self.dad_sq)
            .min(self.dbd_sq)
            .min(self.dae_sq)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.dab_sq, self.dad_sq, self.dbd_sq, self.dae_sq]
    }
}

fn upper_longitudes(kappa: f64) -> [f64; 3] {
    [FRAC_PI_6 + kappa, 5.0 * FRAC_PI_6 + kappa, 1.5 * PI + kappa]
}

fn lower_longitudes(kappa: f64) -> [f64; 3] {
    [
        FRAC_PI_2 - kappa,
        7.0 * FRAC_PI_6 - kappa,
        11.0 * FRAC_PI_6 - kappa,
    ]
}

/// The six lines `(A, B, C, D, E, F)` of `C6(phi, delta, kappa)`.
pub fn build_c6(p: &D3Params) -> Result<Configuration> {
    p.validate()?;
    let mut lines = Vec::with_capacity(6);
    for lon in upper_longitudes(p.kappa) {
        lines.push(make_tangent_line(
            SphericalPoint::new(p.phi, lon)?,
            p.delta,
        )?);
    }
    for lon in lower_longitudes(p.kappa) {
        lines.push(make_tangent_line(
            SphericalPoint::new(-p.phi, lon)?,
            p.delta,
        )?);
    }
    Ok(Configuration::new(lines))
}

/// True when the 120-degree turn about z permutes the lines as
/// `(A,B,C,D,E,F) -> (B,C,A,E,F,D)` and the half turn about x maps the set
/// onto itself.
pub fn d3_orbit_check(c: &Configuration) -> Result<bool> {
    if c.len() != 6 {
        return Err(Error::WrongLineCount {
            expected: 6,
            got: c.len(),
        });
    }
    const CYCLE: [usize; 6] = [1, 2, 0, 4, 5, 3];
    let rz = Rotation3::from_axis_angle(&Vec3::z_axis(), 2.0 * FRAC_PI_3);
    let rx = Rotation3::from_axis_angle(&Vec3::x_axis(), PI);
    let cyclic = c
        .lines
        .iter()
        .zip(CYCLE)
        .all(|(l, j)| l.rotated(&rz).same_line(&c.lines[j], ORBIT_TOL));
    let flip = c.lines.iter().all(|l| {
        let img = l.rotated(&rx);
        c.lines.iter().any(|m| img.same_line(m, ORBIT_TOL))
    });
    Ok(cyclic && flip)
}

/// Squared distances `AB, AD, BD, AE` read off a built six-line configuration
/// with the generic line distance.
pub fn triplets_generic(c: &Configuration) -> Result<DistanceTriplets> {
    if c.len() != 6 {
        return Err(Error::WrongLineCount {
            expected: 6,
            got: c.len(),
        });
    }
    let l = &c.lines;
    Ok(DistanceTriplets {
        dab_sq: distance_sq(&l[0], &l[1]),
        dad_sq: distance_sq(&l[0], &l[3]),
        dbd_sq: distance_sq(&l[1], &l[3]),
        dae_sq: distance_sq(&l[0], &l[4]),
    })
}

/// The four squared distances from their trigonometric closed forms.
pub fn triplets_trig(p: &D3Params) -> Result<DistanceTriplets> {
    p.validate()?;
    let (sp, cp) = p.phi.sin_cos();
    let (sd, cd) = p.delta.sin_cos();
    let (sk, ck) = p.kappa.sin_cos();
    let (cp2, sp2, cd2, sd2) = (cp * cp, sp * sp, cd * cd, sd * sd);
    let (s2d, c2d) = (2.0 * p.delta).sin_cos();
    let c2p = (2.0 * p.phi).cos();

    let ab_den_tilt = cd2 * sp2 + sd2;
    let dab_sq = if ab_den_tilt <= 1e-300 {
        DAB_SQ_PARALLEL
    } else {
        let ab_den = (6.0 * cd2 * c2p + 3.0 * c2d + 7.0) * ab_den_tilt;
        if ab_den.abs() <= 1e-300 {
            return Err(Error::Degenerate("d_AB denominator vanishes"));
        }
        48.0 * sd2 * cd2 * cp2 * cp2 / ab_den
    };

    // AD and BD share one expression with the phase 2kappa + pi/6 (AD) or
    // 2kappa + 5pi/6 (BD). `nu` is the cosine between the two directions;
    // parallel pairs (0/0) fall back to the point-to-line distance.
    let cross = |phase: f64, pair: (usize, usize)| -> Result<f64> {
        let (sa, ca) = phase.sin_cos();
        let mu = s2d * (2.0 * cp2 + (c2p - 3.0) * sa) + 4.0 * c2d * sp * ca;
        let nu = -sa * (sd2 - cd2 * sp2) + s2d * sp * ca - cd2 * cp2;
        let den = 4.0 * (1.0 - nu * nu);
        if den <= 4.0 * PARALLEL_TOL {
            let c = build_c6(p)?;
            return Ok(parallel_distance_sq(&c.lines[pair.0], &c.lines[pair.1]));
        }
        Ok(mu * mu / den)
    };
    let dad_sq = cross(2.0 * p.kappa + FRAC_PI_6, (0, 3))?;
    let dbd_sq = cross(2.0 * p.kappa + 5.0 * FRAC_PI_6, (1, 3))?;

    let mu_ae = 2.0 * (cd * ck - sd * sp * sk);
    let tilt = sd * sk - cd * sp * ck;
    let nu_ae = cd2 * cp2 + tilt * tilt;
    if nu_ae <= 1e-300 {
        return Err(Error::Degenerate("lines AE parallel"));
    }
    let dae_sq = mu_ae * mu_ae / nu_ae;

    Ok(DistanceTriplets {
        dab_sq,
        dad_sq,
        dbd_sq,
        dae_sq,
    })
}

pub fn alg_coords(p: &D3Params) -> Result<AlgCoords> {
    p.validate()?;
    if p.delta.cos().abs() <= POLE_TOL {
        return Err(Error::TanPole("delta at +-pi/2"));
    }
    let a = p.kappa - FRAC_PI_6;
    let b = p.kappa + FRAC_PI_6;
    if a.cos().abs() <= POLE_TOL || b.cos().abs() <= POLE_TOL {
        return Err(Error::TanPole("kappa -+ pi/6 at a pole of tan"));
    }
    Ok(AlgCoords {
        s_var: p.phi.sin(),
        t_var: p.delta.tan(),
        u_var: a.tan(),
        ubar_var: -b.tan(),
    })
}

/// `d_AB^2`, `d_AD^2`, `d_BD^2` as rational functions of `(S, T, U, Ubar)`.
pub fn triplets_alg(a: &AlgCoords) -> (f64, f64, f64) {
    let (s, t, u, ub) = (a.s_var, a.t_var, a.u_var, a.ubar_var);
    let (s2, t2) = (s * s, t * t);
    let dab_sq = if s2 + t2 == 0.0 {
        DAB_SQ_PARALLEL
    } else {
        12.0 * t2 * (1.0 - s2).powi(2) / ((4.0 - 3.0 * s2 + t2) * (s2 + t2))
    };
    let dad_sq = 4.0 * (t * s + u).powi(2) / ad_denominator(s, t, u);
    let dbd_sq = 4.0 * (ub - t * s).powi(2) / ad_denominator(s, -t, ub);
    (dab_sq, dad_sq, dbd_sq)
}

/// `1 + U^2 + T^2 - S^2 + 2STU`, written as `(U + ST)^2 + (1 + T^2)(1 - S^2)`.
pub fn ad_denominator(s: f64, t: f64, u: f64) -> f64 {
    (u + s * t).powi(2) + (1.0 + t * t) * (1.0 - s * s)
}

/// Everything reported for a parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct D3Report {
    pub params: D3Params,
    pub dab_sq: f64,
    pub dad_sq: f64,
    pub dbd_sq: f64,
    pub dae_sq: f64,
    pub min_distance: f64,
    /// `None` when the minimum distance is 2 or more.
    pub radius: Option<f64>,
    pub d3_symmetric: bool,
}

/// Distances from the built configuration (all 15 pairs for the minimum).
pub fn evaluate(p: &D3Params) -> Result<D3Report> {
    let c = build_c6(p)?;
    let t = triplets_generic(&c)?;
    let min_distance = c.min_distance()?;
    Ok(D3Report {
        params: *p,
        dab_sq: t.dab_sq,
        dad_sq: t.dad_sq,
        dbd_sq: t.dbd_sq,
        dae_sq: t.dae_sq,
        min_distance,
        radius: radius_from_distance(min_distance).ok(),
        d3_symmetric: d3_orbit_check(&c)?,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::geometry::{embed_point, TangentLine};

    #[test]
    fn origin_is_six_verticals() {
        let c = build_c6(&D3Params::origin()).unwrap();
        let longs = [1.0, 5.0, 9.0, 3.0, 7.0, 11.0].map(|k: f64| k * FRAC_PI_6);
        for (l, lon) in c.lines.iter().zip(longs) {
            assert_abs_diff_eq!(l.base(), embed_point(0.0, lon), epsilon = 1e-15);
            assert_abs_diff_eq!(l.dir(), Vec3::z(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(c.min_distance().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn meridian_tangents_meet_on_axis() {
        let c = build_c6(&D3Params::new(0.3, 0.0, 0.0).unwrap()).unwrap();
        // Each upper line passes through (0, 0, 1/sin phi).
        let apex = Vec3::new(0.0, 0.0, 1.0 / 0.3f64.sin());
        for l in &c.lines[..3] {
            let w = apex - l.base();
            assert!((w - l.dir() * w.dot(&l.dir())).norm() < 1e-14);
        }
        assert!(distance_sq(&c.lines[0], &c.lines[1]) < 1e-28);
        assert!(distance_sq(&c.lines[1], &c.lines[2]) < 1e-28);
    }

    #[test]
    fn pole_params_rejected() {
        assert!(build_c6(&D3Params {
            phi: FRAC_PI_2,
            delta: 0.0,
            kappa: 0.0
        })
        .is_err());
        assert!(D3Params::new(-1.6, 0.0, 0.0).is_err());
    }

    #[test]
    fn orbit_check_accepts_family_and_rejects_broken_copy() {
        for p in [D3Params::origin(), D3Params::new(0.4, -0.7, 2.1).unwrap()] {
            let c = build_c6(&p).unwrap();
            assert!(d3_orbit_check(&c).unwrap());
        }
        let mut c = build_c6(&D3Params::origin()).unwrap();
        c.lines[2] =
            make_tangent_line(SphericalPoint::new(0.0, 1.5 * PI + 0.1).unwrap(), 0.0).unwrap();
        assert!(!d3_orbit_check(&c).unwrap());
        let short = Configuration::new(c.lines[..5].to_vec());
        assert_eq!(
            d3_orbit_check(&short),
            Err(Error::WrongLineCount {
                expected: 6,
                got: 5
            })
        );
    }

    #[test]
    fn trig_at_origin() {
        let t = triplets_trig(&D3Params::origin()).unwrap();
        assert_abs_diff_eq!(t.dad_sq, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.dbd_sq, 1.0, epsilon = 1e-14);
        assert_eq!(t.dab_sq, 3.0);
        let c = build_c6(&D3Params::origin()).unwrap();
        assert_abs_diff_eq!(triplets_generic(&c).unwrap().dab_sq, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn alg_at_origin() {
        let a = alg_coords(&D3Params::origin()).unwrap();
        let third = -1.0 / 3f64.sqrt();
        assert_eq!(a.s_var, 0.0);
        assert_eq!(a.t_var, 0.0);
        assert_abs_diff_eq!(a.u_var, third, epsilon = 1e-15);
        assert_abs_diff_eq!(a.ubar_var, third, epsilon = 1e-15);
        let (ab, ad, bd) = triplets_alg(&a);
        assert_eq!(ab, 3.0);
        assert_abs_diff_eq!(ad, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bd, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn alg_record_dab() {
        let a = AlgCoords {
            s_var: (3.0f64 / 11.0).sqrt(),
            t_var: (5.0f64 / 11.0).sqrt(),
            u_var: -SQRT3 * (4.0 + 5f64.sqrt()) / 11.0,
            ubar_var: 0.0,
        };
        assert_abs_diff_eq!(triplets_alg(&a).0, 12.0 / 11.0, epsilon = 1e-14);
    }

    #[test]
    fn alg_tan_poles() {
        assert!(matches!(
            alg_coords(&D3Params {
                phi: 0.1,
                delta: FRAC_PI_2,
                kappa: 0.0
            }),
            Err(Error::TanPole(_))
        ));
        assert!(matches!(
            alg_coords(&D3Params {
                phi: 0.1,
                delta: 0.2,
                kappa: FRAC_PI_2 + FRAC_PI_6
            }),
            Err(Error::TanPole(_))
        ));
        assert!(matches!(
            alg_coords(&D3Params {
                phi: 0.1,
                delta: 0.2,
                kappa: FRAC_PI_3
            }),
            Err(Error::TanPole(_))
        ));
    }

    #[test]
    fn ad_denominator_identity() {
        for &(s, t, u) in &[(0.3, 0.8, -1.2), (-0.9, 2.0, 0.4), (0.0, 0.0, 0.0)] {
            let expanded = 1.0 + u * u + t * t - s * s + 2.0 * s * t * u;
            assert_abs_diff_eq!(ad_denominator(s, t, u), expanded, epsilon = 1e-14);
        }
    }

    #[test]
    fn relation_holds_for_ubar_from_u() {
        for u in [-3.0, -0.2, 0.0, 0.5, 7.0] {
            let a = AlgCoords {
                s_var: 0.0,
                t_var: 0.0,
                u_var: u,
                ubar_var: AlgCoords::ubar_from_u(u),
            };
            assert!(a.relation_residual().abs() < 1e-12);
        }
    }

    #[test]
    fn triplet_equalities_on_built_family() {
        let p = D3Params::new(0.37, 0.61, -0.23).unwrap();
        let c = build_c6(&p).unwrap();
        let d = |i: usize, j: usize| distance_sq(&c.lines[i], &c.lines[j]);
        let groups: [&[(usize, usize)]; 4] = [
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
            &[(0, 3), (1, 4), (2, 5)],
            &[(1, 3), (2, 4), (0, 5)],
            &[(0, 4), (1, 5), (2, 3)],
        ];
        for g in groups {
            let first = d(g[0].0, g[0].1);
            for &(i, j) in g {
                assert_abs_diff_eq!(d(i, j), first, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn evaluate_origin() {
        let r = evaluate(&D3Params::origin()).unwrap();
        assert_abs_diff_eq!(r.min_distance, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.radius.unwrap(), 1.0, epsilon = 1e-13);
        assert!(r.d3_symmetric);
    }

    #[test]
    fn unoriented_lines_keep_orbit() {
        let mut c = build_c6(&D3Params::new(0.2, 0.3, 0.4).unwrap()).unwrap();
        c.lines[4] = TangentLine::flipped(&c.lines[4]);
        assert!(d3_orbit_check(&c).unwrap());
    }
}

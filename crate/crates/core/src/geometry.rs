//! Tangent lines to the unit sphere and the distances between them.
//!
//! Points on the sphere use latitude `phi` and longitude `kappa`, with the
//! North pole at `(0, 0, 1)` and longitude zero on the positive-x half of the
//! xz-plane. A tangent line is stored in embedded form: its tangency point and
//! a unit direction. Lines are unoriented, so every operation here is
//! invariant under negating the direction.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Below this value of `1 - dot(dir, dir')^2` two lines are treated as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Tolerance accepted when validating externally supplied lines.
const INPUT_TOL: f64 = 1e-9;

/// A point on the unit sphere in latitude/longitude form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    phi: f64,
    kappa: f64,
}

impl SphericalPoint {
    /// `phi` must lie in `[-pi/2, pi/2]`; `kappa` is reduced to `[0, 2pi)`.
    pub fn new(phi: f64, kappa: f64) -> Result<Self> {
        if !phi.is_finite() || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite spherical point ({phi}, {kappa})"
            )));
        }
        if phi.abs() > FRAC_PI_2 {
            return Err(Error::InvalidArgument(format!(
                "latitude {phi} outside [-pi/2, pi/2]"
            )));
        }
        let mut kappa = kappa.rem_euclid(TAU);
        if kappa >= TAU {
            kappa = 0.0;
        }
        Ok(Self { phi, kappa })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Position in 3-space: `(cos phi cos kappa, cos phi sin kappa, sin phi)`.
    pub fn embed(&self) -> Vec3 {
        embed_point(self.phi, self.kappa)
    }

    /// Unit tangent pointing north. Degenerate at the poles.
    pub fn north_tangent(&self) -> Vec3 {
        north_tangent(self.phi, self.kappa)
    }
}

pub fn embed_point(phi: f64, kappa: f64) -> Vec3 {
    let (sp, cp) = phi.sin_cos();
    let (sk, ck) = kappa.sin_cos();
    Vec3::new(cp * ck, cp * sk, sp)
}

fn north_tangent(phi: f64, kappa: f64) -> Vec3 {
    let (sp, cp) = phi.sin_cos();
    let (sk, ck) = kappa.sin_cos();
    Vec3::new(-sp * ck, -sp * sk, cp)
}

/// An unoriented line tangent to the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentLine {
    base: Vec3,
    dir: Vec3,
}

#[derive(Deserialize)]
struct RawLine {
    base: [f64; 3],
    dir: [f64; 3],
}

impl<'de> Deserialize<'de> for TangentLine {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawLine::deserialize(d)?;
        TangentLine::new(Vec3::from(raw.base), Vec3::from(raw.dir))
            .map_err(serde::de::Error::custom)
    }
}

impl TangentLine {
    /// Validates unit length and tangency (to 1e-9), then re-projects so the
    /// stored pair is orthonormal to machine precision.
    pub fn new(base: Vec3, dir: Vec3) -> Result<Self> {
        let finite = base.iter().chain(dir.iter()).all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("non-finite line coordinates".into()));
        }
        if (base.norm() - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidArgument(format!(
                "base point not on the unit sphere (|base| = {})",
                base.norm()
            )));
        }
        if (dir.norm() - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidArgument(format!(
                "direction not a unit vector (|dir| = {})",
                dir.norm()
            )));
        }
        if base.dot(&dir).abs() > INPUT_TOL {
            return Err(Error::InvalidArgument(format!(
                "line is not tangent (base . dir = {})",
                base.dot(&dir)
            )));
        }
        let base = base.normalize();
        let dir = (dir - base * base.dot(&dir)).normalize();
        Ok(Self { base, dir })
    }

    /// Line through `p` whose direction is the north tangent rotated by
    /// `delta` about the outward normal, counterclockwise seen from outside.
    pub fn from_angles(p: SphericalPoint, delta: f64) -> Result<Self> {
        make_tangent_line(p, delta)
    }

    pub fn base(&self) -> Vec3 {
        self.base
    }

    pub fn dir(&self) -> Vec3 {
        self.dir
    }

    /// Same line with the direction negated.
    pub fn flipped(&self) -> Self {
        Self {
            base: self.base,
            dir: -self.dir,
        }
    }

    /// Orientation with the first clearly nonzero direction coordinate positive.
    pub fn canonical(&self) -> Self {
        let lead = self
            .dir
            .iter()
            .copied()
            .find(|c| c.abs() > 1e-12)
            .unwrap_or(1.0);
        if lead < 0.0 {
            self.flipped()
        } else {
            *self
        }
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        Self {
            base: rot * self.base,
            dir: rot * self.dir,
        }
    }

    /// Same line as `other` (either orientation) to within `tol`.
    pub fn same_line(&self, other: &TangentLine, tol: f64) -> bool {
        let dir_match =
            (self.dir - other.dir).norm() <= tol || (self.dir + other.dir).norm() <= tol;
        dir_match && (self.base - other.base).norm() <= tol
    }

    /// Chart coordinates `(phi, kappa, delta)` of this line, the inverse of
    /// [`make_tangent_line`]. Fails at the poles.
    pub fn angles(&self) -> Result<(f64, f64, f64)> {
        let z = self.base.z.clamp(-1.0, 1.0);
        let phi = z.asin();
        if phi.cos() <= 1e-12 {
            return Err(Error::PoleNotAllowed(phi));
        }
        let kappa = self.base.y.atan2(self.base.x).rem_euclid(TAU);
        let north = north_tangent(phi, kappa);
        let east = self.base.cross(&north);
        let delta = self.dir.dot(&east).atan2(self.dir.dot(&north));
        Ok((phi, kappa, delta))
    }
}

pub fn make_tangent_line(p: SphericalPoint, delta: f64) -> Result<TangentLine> {
    if p.phi.cos() <= 1e-12 {
        return Err(Error::PoleNotAllowed(p.phi));
    }
    let normal = p.embed();
    let north = p.north_tangent();
    let (sd, cd) = delta.sin_cos();
    let dir = north * cd + normal.cross(&north) * sd;
    Ok(TangentLine { base: normal, dir })
}

/// Squared distance between two lines.
///
/// Uses `det^2[dir', dir'', base'' - base'] / (1 - (dir', dir'')^2)` for skew
/// lines and the point-to-line distance once the lines are parallel to within
/// [`PARALLEL_TOL`].
pub fn distance_sq(u: &TangentLine, v: &TangentLine) -> f64 {
    let n = u.dir.cross(&v.dir);
    let denom = n.norm_squared();
    if denom <= PARALLEL_TOL {
        parallel_distance_sq(u, v)
    } else {
        let det = n.dot(&(v.base - u.base));
        det * det / denom
    }
}

/// The determinant formula without the parallel switch. The denominator
/// `1 - (dir_u . dir_v)^2` is evaluated as `|dir_u x dir_v|^2`, which keeps
/// full relative accuracy for nearly parallel lines.
pub fn skew_distance_sq(u: &TangentLine, v: &TangentLine) -> f64 {
    let n = u.dir.cross(&v.dir);
    let det = n.dot(&(v.base - u.base));
    det * det / n.norm_squared()
}

/// Distance from `v.base` to the line `u`, exact for parallel lines.
pub fn parallel_distance_sq(u: &TangentLine, v: &TangentLine) -> f64 {
    let w = v.base - u.base;
    let perp = w - u.dir * w.dot(&u.dir);
    perp.norm_squared()
}

/// Radius of equal cylinders on lines at distance `d` that touch each other
/// while touching the unit ball: `d / (2 - d)`.
pub fn radius_from_distance(d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidDistance(d));
    }
    if d >= 2.0 {
        return Err(Error::RadiusUnbounded(d));
    }
    Ok(d / (2.0 - d))
}

/// Inverse of [`radius_from_distance`]: `2r / (1 + r)`.
pub fn distance_from_radius(r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidRadius(r));
    }
    Ok(2.0 * r / (1.0 + r))
}

/// Minimum line distance over all unordered pairs.
pub fn min_pairwise_distance(lines: &[TangentLine]) -> Result<f64> {
    if lines.len() < 2 {
        return Err(Error::TooFewLines {
            need: 2,
            got: lines.len(),
        });
    }
    let mut best = f64::INFINITY;
    for (i, u) in lines.iter().enumerate() {
        for v in &lines[i + 1..] {
            best = best.min(distance_sq(u, v));
        }
    }
    Ok(best.sqrt())
}

/// Ordered list of tangent lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub lines: Vec<TangentLine>,
}

impl Configuration {
    pub fn new(lines: Vec<TangentLine>) -> Self {
        Self { lines }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn min_distance(&self) -> Result<f64> {
        min_pairwise_distance(&self.lines)
    }

    /// Squared distances for all pairs `i < j`, in lexicographic pair order.
    pub fn pairwise_sq(&self) -> Vec<((usize, usize), f64)> {
        let n = self.lines.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(((i, j), distance_sq(&self.lines[i], &self.lines[j])));
            }
        }
        out
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        Self {
            lines: self.lines.iter().map(|l| l.rotated(rot)).collect(),
        }
    }

    /// Copy with every line in canonical orientation, for printing.
    pub fn canonical(&self) -> Self {
        Self {
            lines: self.lines.iter().map(TangentLine::canonical).collect(),
        }
    }
}

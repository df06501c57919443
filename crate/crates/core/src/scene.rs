//! Triangle/quad mesh export: the unit ball plus one truncated cylinder per
//! line, written as Wavefront OBJ text.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Vec3};
use crate::numfmt::sig;

const OBJ_DIGITS: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct SceneSpec {
    pub configuration: Configuration,
    pub radius: f64,
    /// Half-length of each truncated cylinder.
    pub cyl_length: f64,
    /// Vertices per circle.
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairGap {
    pub i: usize,
    pub j: usize,
    pub axis_distance: f64,
    /// Surface-to-surface clearance; zero means touching.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub radius: f64,
    pub min_gap: f64,
    pub pairs: Vec<PairGap>,
}

impl GapReport {
    pub fn touching(&self, tol: f64) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .filter(|p| p.gap.abs() <= tol)
            .map(|p| (p.i, p.j))
            .collect()
    }
}

impl SceneSpec {
    pub const DEFAULT_CYL_LENGTH: f64 = 6.0;
    pub const DEFAULT_SEGMENTS: usize = 64;

    pub fn new(configuration: Configuration, radius: f64) -> Result<Self> {
        Self::with_mesh(
            configuration,
            radius,
            Self::DEFAULT_CYL_LENGTH,
            Self::DEFAULT_SEGMENTS,
        )
    }

    pub fn with_mesh(
        configuration: Configuration,
        radius: f64,
        cyl_length: f64,
        segments: usize,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        if !(cyl_length > 0.0 && cyl_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cylinder half-length {cyl_length} must be > 0"
            )));
        }
        if segments < 8 {
            return Err(Error::InvalidArgument(format!(
                "segments = {segments}, need at least 8"
            )));
        }
        if configuration.is_empty() {
            return Err(Error::TooFewLines { need: 1, got: 0 });
        }
        Ok(Self {
            configuration,
            radius,
            cyl_length,
            segments,
        })
    }

    /// Cylinder axes are the lines pushed out along their base normal by
    /// `radius`, i.e. scaled by `1 + radius` about the centre, so the axis
    /// distance of a pair is `(1 + radius) * d`.
    pub fn gap_report(&self) -> GapReport {
        let scale = 1.0 + self.radius;
        let pairs: Vec<PairGap> = self
            .configuration
            .pairwise_sq()
            .into_iter()
            .map(|((i, j), d_sq)| {
                let axis_distance = scale * d_sq.sqrt();
                PairGap {
                    i,
                    j,
                    axis_distance,
                    gap: axis_distance - 2.0 * self.radius,
                }
            })
            .collect();
        let min_gap = pairs.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
        GapReport {
            radius: self.radius,
            min_gap,
            pairs,
        }
    }

    pub fn to_obj(&self) -> String {
        let mut mesh = Mesh::default();
        let n = self.segments;
        mesh.text.push_str("# unit sphere and tangent cylinders\n");
        let _ = writeln!(
            mesh.text,
            "# radius {} half-length {} segments {}",
            sig(self.radius, OBJ_DIGITS),
            sig(self.cyl_length, OBJ_DIGITS),
            n
        );

        mesh.text.push_str("o sphere\n");
        let rings = n / 2;
        let north = mesh.vertex(Vec3::z());
        let mut ring_start = Vec::with_capacity(rings - 1);
        for i in 1..rings {
            let theta = std::f64::consts::PI * i as f64 / rings as f64;
            let (st, ct) = theta.sin_cos();
            ring_start.push(mesh.next);
            for j in 0..n {
                let (sp, cp) = (TAU * j as f64 / n as f64).sin_cos();
                mesh.vertex(Vec3::new(st * cp, st * sp, ct));
            }
        }
        let south = mesh.vertex(-Vec3::z());
        let first = ring_start[0];
        let last = ring_start[rings - 2];
        for j in 0..n {
            let k = (j + 1) % n;
            mesh.face(&[north, first + j, first + k]);
        }
        for r in 0..rings - 2 {
            let (a, b) = (ring_start[r], ring_start[r + 1]);
            for j in 0..n {
                let k = (j + 1) % n;
                mesh.face(&[a + j, b + j, b + k, a + k]);
            }
        }
        for j in 0..n {
            let k = (j + 1) % n;
            mesh.face(&[south, last + k, last + j]);
        }

        for (idx, line) in self.configuration.lines.iter().enumerate() {
            let _ = writeln!(
                mesh.text,
                "o cylinder_{}",
                label(idx, self.configuration.len())
            );
            let centre = line.base() * (1.0 + self.radius);
            let u = line.base();
            let w = line.dir().cross(&u);
            let mut ends = [0usize; 2];
            for (e, t) in [-self.cyl_length, self.cyl_length].into_iter().enumerate() {
                ends[e] = mesh.next;
                for j in 0..n {
                    let (sp, cp) = (TAU * j as f64 / n as f64).sin_cos();
                    let p = centre + line.dir() * t + (u * cp + w * sp) * self.radius;
                    mesh.vertex(p);
                }
            }
            for j in 0..n {
                let k = (j + 1) % n;
                mesh.face(&[ends[0] + j, ends[0] + k, ends[1] + k, ends[1] + j]);
            }
            let cap0: Vec<usize> = (0..n).rev().map(|j| ends[0] + j).collect();
            let cap1: Vec<usize> = (0..n).map(|j| ends[1] + j).collect();
            mesh.face(&cap0);
            mesh.face(&cap1);
        }
        mesh.text
    }
}

fn label(idx: usize, count: usize) -> String {
    const SIX: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    if count == 6 {
        SIX[idx].to_string()
    } else {
        idx.to_string()
    }
}

#[derive(Default)]
struct Mesh {
    text: String,
    /// 1-based index the next vertex will get.
    next: usize,
}

impl Mesh {
    fn vertex(&mut self, p: Vec3) -> usize {
        if self.next == 0 {
            self.next = 1;
        }
        let _ = writeln!(
            self.text,
            "v {} {} {}",
            sig(p.x, OBJ_DIGITS),
            sig(p.y, OBJ_DIGITS),
            sig(p.z, OBJ_DIGITS)
        );
        self.next += 1;
        self.next - 1
    }

    fn face(&mut self, idx: &[usize]) {
        self.text.push('f');
        for i in idx {
            let _ = write!(self.text, " {i}");
        }
        self.text.push('\n');
    }
}

use serde::{Deserialize, Serialize};

use super::classify::{classify_trajectory, AttractorSign, ClassifierTolerances, TrajectoryClass, TrajectoryKind};
use super::parallel::{map_indexed, Jobs};
use crate::abm::abm_integrate;
use crate::error::{Error, Result};
use crate::hnn::{HnnParams, State};
use crate::ivp::SolverConfig;

/// A plane through `origin` spanned by orthonormal `u`, `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub origin: State,
    pub u: State,
    pub v: State,
}

fn dot(a: &State, b: &State) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Plane {
    /// The plane `3.267 x1 + 0.493 x3 = 0` through the three equilibria:
    /// `u` along `x2`, `v` along `(0.493, 0, -3.267)` normalized.
    pub fn through_equilibria() -> Self {
        let n = (0.493_f64.powi(2) + 3.267_f64.powi(2)).sqrt();
        Self {
            origin: [0.0; 3],
            u: [0.0, 1.0, 0.0],
            v: [0.493 / n, 0.0, -3.267 / n],
        }
    }

    pub fn normal(&self) -> State {
        [
            self.u[1] * self.v[2] - self.u[2] * self.v[1],
            self.u[2] * self.v[0] - self.u[0] * self.v[2],
            self.u[0] * self.v[1] - self.u[1] * self.v[0],
        ]
    }

    pub fn point(&self, u: f64, v: f64) -> State {
        std::array::from_fn(|k| self.origin[k] + u * self.u[k] + v * self.v[k])
    }

    /// In-plane coordinates of the orthogonal projection of `x`.
    pub fn coordinates(&self, x: &State) -> (f64, f64) {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1], x[2] - self.origin[2]];
        (dot(&d, &self.u), dot(&d, &self.v))
    }

    pub fn check_orthonormal(&self, tol: f64) -> Result<()> {
        let ok = (dot(&self.u, &self.u) - 1.0).abs() <= tol
            && (dot(&self.v, &self.v) - 1.0).abs() <= tol
            && dot(&self.u, &self.v).abs() <= tol;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("plane basis is not orthonormal"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinSpec {
    pub plane: Plane,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    /// `(n_u, n_v)` lattice points.
    pub resolution: (usize, usize),
}

impl Default for BasinSpec {
    fn default() -> Self {
        Self {
            plane: Plane::through_equilibria(),
            u_range: (-5.0, 5.0),
            v_range: (-5.0, 5.0),
            resolution: (40, 40),
        }
    }
}

/// Lattice coordinate `k` of `n` on `[lo, hi]`, computed from the midpoint
/// so that symmetric ranges give exactly negated coordinates.
fn lattice_coordinate(range: (f64, f64), k: usize, n: usize) -> f64 {
    let mid = 0.5 * (range.0 + range.1);
    let half = 0.5 * (range.1 - range.0);
    mid + half * ((2 * k) as f64 - (n - 1) as f64) / (n - 1) as f64
}

impl BasinSpec {
    pub fn validate(&self) -> Result<()> {
        let (nu, nv) = self.resolution;
        if nu < 2 || nv < 2 {
            return Err(Error::domain(format!("basin resolution must be at least 2x2, got {nu}x{nv}")));
        }
        let finite = [self.u_range.0, self.u_range.1, self.v_range.0, self.v_range.1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.u_range.0 > self.u_range.1 || self.v_range.0 > self.v_range.1 {
            return Err(Error::domain("basin extent must be finite with lo <= hi"));
        }
        self.plane.check_orthonormal(1e-12)
    }

    /// `(u, v)` of lattice cell `(iu, iv)`.
    pub fn uv(&self, iu: usize, iv: usize) -> (f64, f64) {
        (
            lattice_coordinate(self.u_range, iu, self.resolution.0),
            lattice_coordinate(self.v_range, iv, self.resolution.1),
        )
    }
}

/// Per-cell outcome, with the byte used in the greyscale map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasinLabel {
    Minus,
    Undecided,
    Plus,
    Unbounded,
}

impl BasinLabel {
    pub fn from_class(class: &TrajectoryClass) -> Self {
        if class.kind == TrajectoryKind::Unbounded {
            return BasinLabel::Unbounded;
        }
        match class.attractor_sign {
            AttractorSign::Plus => BasinLabel::Plus,
            AttractorSign::Minus => BasinLabel::Minus,
            AttractorSign::Undecided => BasinLabel::Undecided,
        }
    }

    pub fn byte(self) -> u8 {
        match self {
            BasinLabel::Minus => 0,
            BasinLabel::Undecided => 127,
            BasinLabel::Plus => 255,
            BasinLabel::Unbounded => 64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasinLabel::Minus => "minus",
            BasinLabel::Undecided => "undecided",
            BasinLabel::Plus => "plus",
            BasinLabel::Unbounded => "unbounded",
        }
    }

    /// Image of the label under `x -> -x`.
    pub fn mirrored(self) -> Self {
        match self {
            BasinLabel::Minus => BasinLabel::Plus,
            BasinLabel::Plus => BasinLabel::Minus,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinGrid {
    pub spec: BasinSpec,
    pub order: f64,
    /// Row-major over `v` then `u`: cell `(iu, iv)` at `iv * n_u + iu`.
    pub labels: Vec<BasinLabel>,
    pub classes: Vec<TrajectoryClass>,
}

impl BasinGrid {
    pub fn label(&self, iu: usize, iv: usize) -> BasinLabel {
        self.labels[iv * self.spec.resolution.0 + iu]
    }

    pub fn initial_condition(&self, iu: usize, iv: usize) -> State {
        let (u, v) = self.spec.uv(iu, iv);
        self.spec.plane.point(u, v)
    }
}

/// Integrates from every lattice point of the plane and records which
/// attractor each run settles on.
pub fn basin_scan(
    spec: &BasinSpec,
    params: &HnnParams,
    q: f64,
    config: &SolverConfig,
    tolerances: &ClassifierTolerances,
    jobs: Jobs,
) -> Result<BasinGrid> {
    spec.validate()?;
    config.validate()?;
    let (nu, nv) = spec.resolution;
    let classes = map_indexed(jobs, nu * nv, |idx| {
        let (iu, iv) = (idx % nu, idx / nu);
        let (u, v) = spec.uv(iu, iv);
        let traj = abm_integrate(&params.ivp(q, spec.plane.point(u, v))?, config)?;
        classify_trajectory(&traj, tolerances)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(BasinGrid {
        spec: *spec,
        order: q,
        labels: classes.iter().map(BasinLabel::from_class).collect(),
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_basis() {
        let p = Plane::through_equilibria();
        p.check_orthonormal(1e-12).unwrap();
        let n = p.normal();
        // Parallel to (3.267, 0, 0.493).
        let reference = [3.267, 0.0, 0.493];
        let cross = [
            n[1] * reference[2] - n[2] * reference[1],
            n[2] * reference[0] - n[0] * reference[2],
            n[0] * reference[1] - n[1] * reference[0],
        ];
        assert!(cross.iter().all(|c| c.abs() < 1e-12));
        assert!(dot(&p.u, &reference).abs() < 1e-12);
        assert!(dot(&p.v, &reference).abs() < 1e-12);
        // The printed equilibrium lies in the plane.
        let x1 = [0.493, 0.366, -3.267];
        let (u, v) = p.coordinates(&x1);
        let back = p.point(u, v);
        assert!((0..3).all(|k| (back[k] - x1[k]).abs() < 1e-12));
    }

    #[test]
    fn lattice_is_antisymmetric() {
        let spec = BasinSpec {
            resolution: (7, 6),
            ..BasinSpec::default()
        };
        for iu in 0..7 {
            for iv in 0..6 {
                let (u, v) = spec.uv(iu, iv);
                let (mu, mv) = spec.uv(6 - iu, 5 - iv);
                assert_eq!(u, -mu);
                assert_eq!(v, -mv);
            }
        }
        assert_eq!(spec.uv(0, 0), (-5.0, -5.0));
        assert_eq!(spec.uv(6, 5), (5.0, 5.0));
    }

    #[test]
    fn validation() {
        let mut spec = BasinSpec { resolution: (1, 5), ..BasinSpec::default() };
        assert!(spec.validate().is_err());
        spec.resolution = (2, 2);
        spec.u_range = (1.0, -1.0);
        assert!(spec.validate().is_err());
        spec.u_range = (-1.0, 1.0);
        spec.plane.u = [0.0, 2.0, 0.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn labels_bytes() {
        assert_eq!(BasinLabel::Minus.byte(), 0);
        assert_eq!(BasinLabel::Undecided.byte(), 127);
        assert_eq!(BasinLabel::Plus.byte(), 255);
        assert_eq!(BasinLabel::Unbounded.byte(), 64);
        assert_eq!(BasinLabel::Plus.mirrored(), BasinLabel::Minus);
        assert_eq!(BasinLabel::Unbounded.mirrored(), BasinLabel::Unbounded);
    }

    #[test]
    fn small_scan_is_mirror_symmetric() {
        let spec = BasinSpec {
            resolution: (4, 4),
            ..BasinSpec::default()
        };
        let grid = basin_scan(
            &spec,
            &HnnParams::default(),
            0.99975,
            &SolverConfig::new(0.05, 60.0),
            &ClassifierTolerances::default(),
            Jobs::Serial,
        )
        .unwrap();
        assert_eq!(grid.labels.len(), 16);
        for iu in 0..4 {
            for iv in 0..4 {
                assert_eq!(grid.label(iu, iv), grid.label(3 - iu, 3 - iv).mirrored());
            }
        }
    }
}

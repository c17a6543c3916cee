//! Vector-field families on explicit chart domains, plus the constructive
//! surgeries (split, stabilize, trivial extension) and built-in models.
//!
//! A family is the map `(eps, x) -> velocity` together with its base box,
//! declared smoothness, chart domains, and analysis hints (sections for
//! cycle detection, probe data for connection splitting). All evaluation is
//! pure; families are immutable after construction.

mod bump;
mod models;
mod polynomial;
mod surgery;

pub use bump::{make_bump, CutFunction, SmoothOrder};
pub use models::{model_basic, model_hyperbolic_cycle, model_synchronized_cycles,
    model_two_parabolic_cycles, BasicKind};
pub use polynomial::{PolyFamily, PolyTerm};
pub use surgery::{extend_trivially, split_family, stabilize, SplittingData};

use crate::error::{CoreError, Result};
use crate::flow::Section;
use crate::geom::{Mat2, Rect, Vec2};
use serde::{Deserialize, Serialize};

/// A parameter value in the family's base box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn zero(dim: usize) -> Self {
        ParamPoint(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(v: Vec<f64>) -> Self {
        ParamPoint(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `r_min <= |x - center| <= r_max`; a disk when `r_min = 0`.
    Annulus {
        r_min: f64,
        r_max: f64,
        center: Vec2,
    },
    Rect(Rect),
}

impl Region {
    pub fn disk(r: f64) -> Self {
        Region::Annulus {
            r_min: 0.0,
            r_max: r,
            center: [0.0, 0.0],
        }
    }

    pub fn annulus(r_min: f64, r_max: f64) -> Self {
        Region::Annulus {
            r_min,
            r_max,
            center: [0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::Annulus { r_min, r_max, .. } => {
                if r_min < 0.0 || r_min >= r_max {
                    return Err(CoreError::Region(format!(
                        "annulus requires 0 <= r_min < r_max, got [{r_min}, {r_max}]"
                    )));
                }
            }
            Region::Rect(r) => {
                if r.x_min >= r.x_max || r.y_min >= r.y_max {
                    return Err(CoreError::Region(format!("degenerate rectangle {r:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Region::Annulus {
                r_min,
                r_max,
                center,
            } => {
                let r = crate::geom::dist(p, center);
                r >= r_min && r <= r_max
            }
            Region::Rect(r) => r.contains(p),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> Rect {
        match *self {
            Region::Annulus { r_max, center, .. } => Rect {
                x_min: center[0] - r_max,
                x_max: center[0] + r_max,
                y_min: center[1] - r_max,
                y_max: center[1] + r_max,
            },
            Region::Rect(r) => r,
        }
    }

    /// True when the closed `inner` region lies strictly inside `self`.
    pub fn strictly_contains(&self, inner: &Region) -> bool {
        match (*self, *inner) {
            (
                Region::Annulus {
                    r_min: a0,
                    r_max: b0,
                    center: c0,
                },
                Region::Annulus {
                    r_min: a1,
                    r_max: b1,
                    center: c1,
                },
            ) => {
                if c0 != c1 {
                    return false;
                }
                let inner_ok = a0 == 0.0 && a1 == 0.0 || a0 < a1;
                inner_ok && b1 < b0
            }
            (Region::Rect(o), Region::Rect(i)) => {
                o.x_min < i.x_min && i.x_max < o.x_max && o.y_min < i.y_min && i.y_max < o.y_max
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Inner,
    Outer,
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryBehavior {
    OutflowOnly,
    InflowOnly,
    Invariant,
    Unspecified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartDomain {
    pub id: String,
    pub region: Region,
    pub boundaries: Vec<(Boundary, BoundaryBehavior)>,
}

impl ChartDomain {
    pub fn new(
        id: &str,
        region: Region,
        boundaries: Vec<(Boundary, BoundaryBehavior)>,
    ) -> Result<Self> {
        region.validate()?;
        Ok(ChartDomain {
            id: id.to_string(),
            region,
            boundaries,
        })
    }

    pub fn behavior(&self, b: Boundary) -> BoundaryBehavior {
        self.boundaries
            .iter()
            .find(|(k, _)| *k == b)
            .map(|(_, v)| *v)
            .unwrap_or(BoundaryBehavior::Unspecified)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.region.contains(p)
    }
}

/// Designation of a stable/unstable separatrix pair and a crossing segment,
/// used by the diagram scan to measure connection splitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionProbe {
    /// Approximate saddle owning the unstable branch (refined per parameter).
    pub unstable_saddle: Vec2,
    /// Eigenvector side for the unstable branch seed (+1 or -1).
    pub unstable_side: f64,
    /// Approximate saddle owning the stable branch.
    pub stable_saddle: Vec2,
    pub stable_side: f64,
    /// Segment both branches cross; splitting = difference of crossing coords.
    pub segment: Section,
}

/// Sections and probes a model ships for its own analysis.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalysisHints {
    pub sections: Vec<Section>,
    pub connection_probes: Vec<ConnectionProbe>,
}

#[derive(Debug, Clone)]
pub(crate) enum FamilyKind {
    /// Rotation plus radial factor: `v = (-y + x*k, x + y*k)` with
    /// `k = k(s; eps)`, `s = x^2 + y^2`.
    Radial(models::RadialModel),
    /// Closed-form Cartesian canonical models (SN, SL, SC).
    Cartesian(models::CartesianModel),
    Polynomial(PolyFamily),
    Split(Box<SplittingData>),
    Stabilized {
        inner: Box<Family>,
        phi: CutFunction,
    },
    Extended {
        inner: Box<Family>,
        extra: usize,
    },
}

/// A smooth family of planar vector fields over a box base.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: String,
    pub base_dim: usize,
    /// Representative of the germ base: the box `|eps|_inf <= base_radius`.
    pub base_radius: f64,
    /// Declared smoothness degree `k >= 2`.
    pub smoothness: u32,
    pub domains: Vec<ChartDomain>,
    pub hints: AnalysisHints,
    pub(crate) kind: FamilyKind,
}

pub const DEFAULT_BASE_RADIUS: f64 = 0.1;
pub const DEFAULT_SMOOTHNESS: u32 = 4;

impl Family {
    pub fn check_param(&self, eps: &ParamPoint) -> Result<()> {
        if eps.dim() != self.base_dim {
            return Err(CoreError::ParamDim {
                expected: self.base_dim,
                got: eps.dim(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.domains.iter().any(|d| d.contains(p))
    }

    pub fn require_inside(&self, p: Vec2) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(CoreError::OutsideDomain(p))
        }
    }

    /// Velocity at phase point `x` for parameter `eps`.
    pub fn eval(&self, eps: &ParamPoint, x: Vec2) -> Vec2 {
        self.eval_raw(&eps.0, x)
    }

    /// Spatial Jacobian at `x`, analytic for every constructible family.
    pub fn jacobian(&self, eps: &ParamPoint, x: Vec2) -> Mat2 {
        self.jacobian_raw(&eps.0, x)
    }

    pub(crate) fn eval_raw(&self, eps: &[f64], x: Vec2) -> Vec2 {
        match &self.kind {
            FamilyKind::Radial(m) => m.eval(eps, x),
            FamilyKind::Cartesian(m) => m.eval(eps, x),
            FamilyKind::Polynomial(p) => p.eval(eps, x),
            FamilyKind::Split(data) => surgery::split_eval(data, eps, x),
            FamilyKind::Stabilized { inner, phi } => surgery::stab_eval(inner, phi, eps, x),
            FamilyKind::Extended { inner, .. } => inner.eval_raw(&eps[..inner.base_dim], x),
        }
    }

    pub(crate) fn jacobian_raw(&self, eps: &[f64], x: Vec2) -> Mat2 {
        match &self.kind {
            FamilyKind::Radial(m) => m.jacobian(eps, x),
            FamilyKind::Cartesian(m) => m.jacobian(eps, x),
            FamilyKind::Polynomial(p) => p.jacobian(eps, x),
            FamilyKind::Split(data) => surgery::split_jacobian(data, eps, x),
            FamilyKind::Stabilized { inner, phi } => surgery::stab_jacobian(inner, phi, eps, x),
            FamilyKind::Extended { inner, .. } => inner.jacobian_raw(&eps[..inner.base_dim], x),
        }
    }

    /// Central-difference Jacobian, kept as a cross-check of the analytic one.
    pub fn fd_jacobian(&self, eps: &ParamPoint, x: Vec2, h: f64) -> Mat2 {
        let mut j = [[0.0; 2]; 2];
        for col in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let vp = self.eval(eps, xp);
            let vm = self.eval(eps, xm);
            for row in 0..2 {
                j[row][col] = (vp[row] - vm[row]) / (2.0 * h);
            }
        }
        j
    }

    pub fn zero_param(&self) -> ParamPoint {
        ParamPoint::zero(self.base_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_validation() {
        assert!(Region::annulus(0.5, 0.4).validate().is_err());
        assert!(Region::annulus(-0.1, 0.4).validate().is_err());
        assert!(Region::disk(3.0).validate().is_ok());
    }

    #[test]
    fn strict_containment() {
        let outer = Region::annulus(0.6, 1.4);
        let core = Region::annulus(0.8, 1.2);
        assert!(outer.strictly_contains(&core));
        assert!(!core.strictly_contains(&outer));
        assert!(!outer.strictly_contains(&outer));
    }

    #[test]
    fn param_dim_enforced() {
        let fam = model_two_parabolic_cycles();
        assert!(fam.check_param(&ParamPoint(vec![0.0])).is_err());
        assert!(fam.check_param(&ParamPoint(vec![0.0, 0.0])).is_ok());
    }
}

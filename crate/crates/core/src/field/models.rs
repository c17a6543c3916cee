//! Built-in model families.
//!
//! The cycle models share one shape: a unit rotation plus a radial factor,
//! `v = (-y + x*k, x + y*k)` with `k = k(s; eps)` and `s = x^2 + y^2`, so the
//! angular speed is exactly 1 and limit cycles are the positive roots of the
//! radial profile `r_dot = r * k(r^2)`.

use super::{
    AnalysisHints, Boundary, BoundaryBehavior, ChartDomain, ConnectionProbe, Family, FamilyKind,
    Region, DEFAULT_BASE_RADIUS, DEFAULT_SMOOTHNESS,
};
use crate::error::{CoreError, Result};
use crate::flow::Section;
use crate::geom::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum RadialModel {
    /// k = (e1 + (s-1)^2)(e2 + (s-4)^2): two independently driven
    /// parabolic cycles at r = 1 and r = 2 when e = 0.
    TwoParabolic,
    /// k = (e + (s-1)^2)(e + (s-4)^2): both cycles driven by the first
    /// parameter, the second one inert.
    Synchronized,
    /// k = e - s: supercritical focus unfolding.
    Ah,
    /// k = e + (s-1)^2: parabolic cycle unfolding.
    Pc,
    /// k = 1 - r: single hyperbolic cycle, parameter inert.
    HyperbolicCycle,
}

impl RadialModel {
    /// Radial factor and its derivative in `s = r^2`.
    fn factor(&self, eps: &[f64], s: f64) -> (f64, f64) {
        match self {
            RadialModel::TwoParabolic => {
                let (a, b) = (s - 1.0, s - 4.0);
                let (p, q) = (eps[0] + a * a, eps[1] + b * b);
                (p * q, 2.0 * a * q + 2.0 * b * p)
            }
            RadialModel::Synchronized => {
                let (a, b) = (s - 1.0, s - 4.0);
                let (p, q) = (eps[0] + a * a, eps[0] + b * b);
                (p * q, 2.0 * a * q + 2.0 * b * p)
            }
            RadialModel::Ah => (eps[0] - s, -1.0),
            RadialModel::Pc => {
                let a = s - 1.0;
                (eps[0] + a * a, 2.0 * a)
            }
            RadialModel::HyperbolicCycle => {
                let r = s.sqrt();
                (1.0 - r, -0.5 / r)
            }
        }
    }

    pub(crate) fn eval(&self, eps: &[f64], x: Vec2) -> Vec2 {
        let s = x[0] * x[0] + x[1] * x[1];
        let (k, _) = self.factor(eps, s);
        [-x[1] + x[0] * k, x[0] + x[1] * k]
    }

    pub(crate) fn jacobian(&self, eps: &[f64], x: Vec2) -> Mat2 {
        let s = x[0] * x[0] + x[1] * x[1];
        let (k, dk) = self.factor(eps, s);
        [
            [k + 2.0 * x[0] * x[0] * dk, -1.0 + 2.0 * x[0] * x[1] * dk],
            [1.0 + 2.0 * x[0] * x[1] * dk, k + 2.0 * x[1] * x[1] * dk],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum CartesianModel {
    /// x' = e + x^2, y' = -y: saddle-node unfolding.
    Sn,
    /// x' = y, y' = x - x^2 + e*y: separatrix-loop unfolding.
    Sl,
    /// x' = y, y' = x^3 - x + e*y: heteroclinic pair between the saddles
    /// at (-1, 0) and (1, 0).
    Sc,
}

impl CartesianModel {
    pub(crate) fn eval(&self, eps: &[f64], x: Vec2) -> Vec2 {
        let e = eps[0];
        match self {
            CartesianModel::Sn => [e + x[0] * x[0], -x[1]],
            CartesianModel::Sl => [x[1], x[0] - x[0] * x[0] + e * x[1]],
            CartesianModel::Sc => [x[1], x[0] * x[0] * x[0] - x[0] + e * x[1]],
        }
    }

    pub(crate) fn jacobian(&self, eps: &[f64], x: Vec2) -> Mat2 {
        let e = eps[0];
        match self {
            CartesianModel::Sn => [[2.0 * x[0], 0.0], [0.0, -1.0]],
            CartesianModel::Sl => [[0.0, 1.0], [1.0 - 2.0 * x[0], e]],
            CartesianModel::Sc => [[0.0, 1.0], [3.0 * x[0] * x[0] - 1.0, e]],
        }
    }
}

fn radial_section(r_lo: f64, r_hi: f64) -> Section {
    // On the positive x-axis the angular component gives v.n = x > 0.
    Section {
        base: [(r_lo + r_hi) / 2.0, 0.0],
        direction: [1.0, 0.0],
        half_length: (r_hi - r_lo) / 2.0,
        orientation: 1.0,
    }
}

fn disk_domain(id: &str, r: f64, outer: BoundaryBehavior) -> ChartDomain {
    ChartDomain::new(id, Region::disk(r), vec![(Boundary::Outer, outer)]).expect("valid disk")
}

/// Two-parameter family with parabolic cycles at r = 1 and r = 2 at e = 0,
/// each driven by its own parameter, on the disk r <= 3 with an outflow
/// boundary standing in for the discarded hyperbolic attractor.
pub fn model_two_parabolic_cycles() -> Family {
    Family {
        name: "two_parabolic_cycles".to_string(),
        base_dim: 2,
        base_radius: DEFAULT_BASE_RADIUS,
        smoothness: DEFAULT_SMOOTHNESS,
        domains: vec![disk_domain("disk3", 3.0, BoundaryBehavior::OutflowOnly)],
        hints: AnalysisHints {
            // Overlapping ranges so that cross-section deduplication is real.
            sections: vec![radial_section(0.4, 1.2), radial_section(0.8, 2.85)],
            connection_probes: vec![],
        },
        kind: FamilyKind::Radial(RadialModel::TwoParabolic),
    }
}

/// Same phase portrait as `model_two_parabolic_cycles` at e = 0, but both
/// cycles respond to the first parameter while the second does nothing.
pub fn model_synchronized_cycles() -> Family {
    Family {
        name: "synchronized_cycles".to_string(),
        base_dim: 2,
        base_radius: DEFAULT_BASE_RADIUS,
        smoothness: DEFAULT_SMOOTHNESS,
        domains: vec![disk_domain("disk3", 3.0, BoundaryBehavior::OutflowOnly)],
        hints: AnalysisHints {
            sections: vec![radial_section(0.4, 1.2), radial_section(0.8, 2.85)],
            connection_probes: vec![],
        },
        kind: FamilyKind::Radial(RadialModel::Synchronized),
    }
}

/// Hyperbolic cycle at r = 1 (`r_dot = r(1 - r)`), parameter inert; the
/// standard structurally stable fixture. The annular domain keeps the
/// origin (where the radial factor is not smooth) outside the chart.
pub fn model_hyperbolic_cycle() -> Family {
    Family {
        name: "hyperbolic_cycle".to_string(),
        base_dim: 1,
        base_radius: DEFAULT_BASE_RADIUS,
        smoothness: DEFAULT_SMOOTHNESS,
        domains: vec![ChartDomain::new(
            "annulus",
            Region::annulus(0.05, 1.8),
            vec![
                (Boundary::Inner, BoundaryBehavior::InflowOnly),
                (Boundary::Outer, BoundaryBehavior::InflowOnly),
            ],
        )
        .expect("valid annulus")],
        hints: AnalysisHints {
            sections: vec![radial_section(0.5, 1.5)],
            connection_probes: vec![],
        },
        kind: FamilyKind::Radial(RadialModel::HyperbolicCycle),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BasicKind {
    Ah,
    Sn,
    Sl,
    Sc,
    Pc,
    Hc,
}

impl std::fmt::Display for BasicKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BasicKind::Ah => "AH",
            BasicKind::Sn => "SN",
            BasicKind::Sl => "SL",
            BasicKind::Sc => "SC",
            BasicKind::Pc => "PC",
            BasicKind::Hc => "HC",
        };
        f.write_str(s)
    }
}

/// Canonical one-parameter unfolding for each implemented basic-list class.
/// HC (homoclinic of a saddle-node) is not implemented.
pub fn model_basic(kind: BasicKind) -> Result<Family> {
    let fam = match kind {
        BasicKind::Ah => Family {
            name: "basic_ah".to_string(),
            base_dim: 1,
            base_radius: DEFAULT_BASE_RADIUS,
            smoothness: DEFAULT_SMOOTHNESS,
            domains: vec![disk_domain("disk", 1.2, BoundaryBehavior::InflowOnly)],
            hints: AnalysisHints {
                sections: vec![radial_section(0.02, 0.9)],
                connection_probes: vec![],
            },
            kind: FamilyKind::Radial(RadialModel::Ah),
        },
        BasicKind::Pc => Family {
            name: "basic_pc".to_string(),
            base_dim: 1,
            base_radius: DEFAULT_BASE_RADIUS,
            smoothness: DEFAULT_SMOOTHNESS,
            domains: vec![disk_domain("disk", 1.8, BoundaryBehavior::OutflowOnly)],
            hints: AnalysisHints {
                sections: vec![radial_section(0.4, 1.6)],
                connection_probes: vec![],
            },
            kind: FamilyKind::Radial(RadialModel::Pc),
        },
        BasicKind::Sn => Family {
            name: "basic_sn".to_string(),
            base_dim: 1,
            base_radius: DEFAULT_BASE_RADIUS,
            smoothness: DEFAULT_SMOOTHNESS,
            domains: vec![ChartDomain::new(
                "square",
                Region::Rect(crate::geom::Rect {
                    x_min: -1.0,
                    x_max: 1.0,
                    y_min: -1.0,
                    y_max: 1.0,
                }),
                vec![
                    (Boundary::Left, BoundaryBehavior::InflowOnly),
                    (Boundary::Right, BoundaryBehavior::OutflowOnly),
                    (Boundary::Bottom, BoundaryBehavior::InflowOnly),
                    (Boundary::Top, BoundaryBehavior::InflowOnly),
                ],
            )
            .expect("valid rect")],
            hints: AnalysisHints::default(),
            kind: FamilyKind::Cartesian(CartesianModel::Sn),
        },
        BasicKind::Sl => Family {
            name: "basic_sl".to_string(),
            base_dim: 1,
            base_radius: DEFAULT_BASE_RADIUS,
            smoothness: DEFAULT_SMOOTHNESS,
            domains: vec![ChartDomain::new(
                "box",
                Region::Rect(crate::geom::Rect {
                    x_min: -1.5,
                    x_max: 2.5,
                    y_min: -1.5,
                    y_max: 1.5,
                }),
                vec![],
            )
            .expect("valid rect")],
            hints: AnalysisHints {
                sections: vec![],
                // The loop's apex crosses y = 0 vertically at x = 3/2; both
                // designated branches first cross this segment there at e = 0.
                connection_probes: vec![ConnectionProbe {
                    unstable_saddle: [0.0, 0.0],
                    unstable_side: 1.0,
                    stable_saddle: [0.0, 0.0],
                    stable_side: 1.0,
                    segment: Section {
                        base: [1.5, 0.0],
                        direction: [1.0, 0.0],
                        half_length: 0.45,
                        orientation: 0.0,
                    },
                }],
            },
            kind: FamilyKind::Cartesian(CartesianModel::Sl),
        },
        BasicKind::Sc => Family {
            name: "basic_sc".to_string(),
            base_dim: 1,
            base_radius: DEFAULT_BASE_RADIUS,
            smoothness: DEFAULT_SMOOTHNESS,
            domains: vec![ChartDomain::new(
                "box",
                Region::Rect(crate::geom::Rect {
                    x_min: -2.0,
                    x_max: 2.0,
                    y_min: -1.6,
                    y_max: 1.6,
                }),
                vec![],
            )
            .expect("valid rect")],
            hints: AnalysisHints {
                sections: vec![],
                // Upper heteroclinic crosses x = 0 at y = 1/sqrt(2).
                connection_probes: vec![ConnectionProbe {
                    unstable_saddle: [-1.0, 0.0],
                    unstable_side: 1.0,
                    stable_saddle: [1.0, 0.0],
                    stable_side: -1.0,
                    segment: Section {
                        base: [0.0, std::f64::consts::FRAC_1_SQRT_2],
                        direction: [0.0, 1.0],
                        half_length: 0.5,
                        orientation: 0.0,
                    },
                }],
            },
            kind: FamilyKind::Cartesian(CartesianModel::Sc),
        },
        BasicKind::Hc => {
            return Err(CoreError::UnsupportedModel(
                "HC (homoclinic of a saddle-node) is not implemented".to_string(),
            ))
        }
    };
    Ok(fam)
}

/// Look up a builtin by its registry name.
pub fn builtin(name: &str) -> Result<Family> {
    match name {
        "two_parabolic_cycles" => Ok(model_two_parabolic_cycles()),
        "synchronized_cycles" => Ok(model_synchronized_cycles()),
        "hyperbolic_cycle" => Ok(model_hyperbolic_cycle()),
        "basic_ah" => model_basic(BasicKind::Ah),
        "basic_sn" => model_basic(BasicKind::Sn),
        "basic_sl" => model_basic(BasicKind::Sl),
        "basic_sc" => model_basic(BasicKind::Sc),
        "basic_pc" => model_basic(BasicKind::Pc),
        "basic_hc" => model_basic(BasicKind::Hc),
        other => Err(CoreError::UnsupportedModel(other.to_string())),
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "two_parabolic_cycles",
    "synchronized_cycles",
    "hyperbolic_cycle",
    "basic_ah",
    "basic_sn",
    "basic_sl",
    "basic_sc",
    "basic_pc",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ParamPoint;

    #[test]
    fn two_parabolic_radial_sign_pattern() {
        // r_dot > 0 on (0,1), (1,2), (2,3) at e = 0: both cycles semi-stable.
        let fam = model_two_parabolic_cycles();
        let eps = fam.zero_param();
        for r in [0.3, 0.7, 1.3, 1.7, 2.3, 2.9] {
            let v = fam.eval(&eps, [r, 0.0]);
            // radial component on the x-axis is v_x
            assert!(v[0] > 0.0, "r_dot should be positive at r = {r}");
        }
        for r in [1.0, 2.0] {
            let v = fam.eval(&eps, [r, 0.0]);
            assert!(v[0].abs() < 1e-14, "cycle radius r = {r}");
        }
    }

    #[test]
    fn two_parabolic_no_cycles_for_positive_eps() {
        let fam = model_two_parabolic_cycles();
        let eps = ParamPoint(vec![0.01, 0.01]);
        // radial profile strictly positive on (0, 3]
        for i in 1..=300 {
            let r = 3.0 * i as f64 / 300.0;
            let v = fam.eval(&eps, [r, 0.0]);
            assert!(v[0] > 0.0, "no root expected at r = {r}");
        }
    }

    #[test]
    fn two_parabolic_split_roots_match_closed_form() {
        // e1 = -0.01 splits the inner cycle into roots s = 1 +- 0.1.
        let fam = model_two_parabolic_cycles();
        let eps = ParamPoint(vec![-0.01, 0.0]);
        for r in [0.9f64.sqrt(), 1.1f64.sqrt(), 2.0] {
            let v = fam.eval(&eps, [r, 0.0]);
            assert!(v[0].abs() < 1e-12, "root at r = {r}, got {}", v[0]);
        }
    }

    #[test]
    fn synchronized_equals_diagonal_restriction() {
        let two = model_two_parabolic_cycles();
        let sync = model_synchronized_cycles();
        for (e, d, x) in [
            (0.02, 0.5, [0.7, -0.3]),
            (-0.04, -1.0, [1.9, 0.4]),
            (0.0, 0.3, [2.5, 0.1]),
        ] {
            let a = sync.eval(&ParamPoint(vec![e, d]), x);
            let b = two.eval(&ParamPoint(vec![e, e]), x);
            assert_eq!(a, b);
            // and the second parameter is inert
            let c = sync.eval(&ParamPoint(vec![e, 0.0]), x);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn eval_is_bitwise_deterministic() {
        let fam = model_two_parabolic_cycles();
        let eps = ParamPoint(vec![0.013, -0.041]);
        let a = fam.eval(&eps, [1.234, -0.567]);
        let b = fam.eval(&eps, [1.234, -0.567]);
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let fams = vec![
            model_two_parabolic_cycles(),
            model_synchronized_cycles(),
            model_hyperbolic_cycle(),
            model_basic(BasicKind::Ah).unwrap(),
            model_basic(BasicKind::Sn).unwrap(),
            model_basic(BasicKind::Sl).unwrap(),
            model_basic(BasicKind::Sc).unwrap(),
            model_basic(BasicKind::Pc).unwrap(),
        ];
        for fam in fams {
            let eps = ParamPoint(vec![0.02; fam.base_dim]);
            for x in [[0.6, 0.2], [0.9, -0.4], [0.3, 0.3]] {
                if !fam.contains(x) {
                    continue;
                }
                let ja = fam.jacobian(&eps, x);
                let jf = fam.fd_jacobian(&eps, x, 1e-5);
                for r in 0..2 {
                    for c in 0..2 {
                        let scale = ja[r][c].abs().max(1.0);
                        assert!(
                            (ja[r][c] - jf[r][c]).abs() / scale < 1e-5,
                            "{}: J[{r}][{c}] analytic {} vs fd {}",
                            fam.name,
                            ja[r][c],
                            jf[r][c]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sn_jacobian_closed_form() {
        let fam = model_basic(BasicKind::Sn).unwrap();
        let j = fam.jacobian(&ParamPoint(vec![-0.04]), [0.2, 0.0]);
        assert_eq!(j, [[0.4, 0.0], [0.0, -1.0]]);
    }

    #[test]
    fn hc_is_rejected() {
        assert!(matches!(
            model_basic(BasicKind::Hc),
            Err(CoreError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn builtin_registry_round_trip() {
        for name in BUILTIN_NAMES {
            let fam = builtin(name).unwrap();
            assert_eq!(&fam.name, name);
        }
        assert!(builtin("no_such_model").is_err());
    }
}

//! User-defined polynomial families: each velocity component is a sum of
//! monomials in the phase coordinates and the parameters.

use super::{AnalysisHints, ChartDomain, Family, FamilyKind, DEFAULT_BASE_RADIUS, DEFAULT_SMOOTHNESS};
use crate::error::{CoreError, Result};
use crate::geom::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

/// One monomial `coeff * x^i * y^j * eps_1^{p_1} * ... * eps_n^{p_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    pub x_pow: u32,
    pub y_pow: u32,
    #[serde(default)]
    pub eps_pows: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFamily {
    pub base_dim: usize,
    pub vx: Vec<PolyTerm>,
    pub vy: Vec<PolyTerm>,
}

impl PolyFamily {
    fn eps_factor(term: &PolyTerm, eps: &[f64]) -> f64 {
        let mut f = term.coeff;
        for (k, &p) in term.eps_pows.iter().enumerate() {
            if p > 0 {
                f *= eps[k].powi(p as i32);
            }
        }
        f
    }

    fn component(terms: &[PolyTerm], eps: &[f64], x: Vec2) -> f64 {
        terms
            .iter()
            .map(|t| {
                Self::eps_factor(t, eps) * x[0].powi(t.x_pow as i32) * x[1].powi(t.y_pow as i32)
            })
            .sum()
    }

    fn component_dx(terms: &[PolyTerm], eps: &[f64], x: Vec2) -> f64 {
        terms
            .iter()
            .filter(|t| t.x_pow > 0)
            .map(|t| {
                Self::eps_factor(t, eps)
                    * t.x_pow as f64
                    * x[0].powi(t.x_pow as i32 - 1)
                    * x[1].powi(t.y_pow as i32)
            })
            .sum()
    }

    fn component_dy(terms: &[PolyTerm], eps: &[f64], x: Vec2) -> f64 {
        terms
            .iter()
            .filter(|t| t.y_pow > 0)
            .map(|t| {
                Self::eps_factor(t, eps)
                    * t.y_pow as f64
                    * x[0].powi(t.x_pow as i32)
                    * x[1].powi(t.y_pow as i32 - 1)
            })
            .sum()
    }

    pub(crate) fn eval(&self, eps: &[f64], x: Vec2) -> Vec2 {
        [
            Self::component(&self.vx, eps, x),
            Self::component(&self.vy, eps, x),
        ]
    }

    pub(crate) fn jacobian(&self, eps: &[f64], x: Vec2) -> Mat2 {
        [
            [
                Self::component_dx(&self.vx, eps, x),
                Self::component_dy(&self.vx, eps, x),
            ],
            [
                Self::component_dx(&self.vy, eps, x),
                Self::component_dy(&self.vy, eps, x),
            ],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.vx.iter().chain(self.vy.iter()) {
            if t.eps_pows.len() > self.base_dim {
                return Err(CoreError::Config(format!(
                    "term uses {} parameter exponents but base_dim is {}",
                    t.eps_pows.len(),
                    self.base_dim
                )));
            }
        }
        Ok(())
    }
}

/// Wraps a polynomial definition into a family on the given domains.
pub fn polynomial_family(
    name: &str,
    poly: PolyFamily,
    domains: Vec<ChartDomain>,
    hints: AnalysisHints,
) -> Result<Family> {
    poly.validate()?;
    // eps_pows shorter than base_dim means trailing exponents are zero;
    // normalize so evaluation never indexes out of range.
    let mut poly = poly;
    let dim = poly.base_dim;
    for t in poly.vx.iter_mut().chain(poly.vy.iter_mut()) {
        t.eps_pows.resize(dim, 0);
    }
    Ok(Family {
        name: name.to_string(),
        base_dim: dim,
        base_radius: DEFAULT_BASE_RADIUS,
        smoothness: DEFAULT_SMOOTHNESS,
        domains,
        hints,
        kind: FamilyKind::Polynomial(poly),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! Small closed-form systems used across the test suite.

    use super::*;
    use crate::field::{Boundary, BoundaryBehavior, Region};
    use crate::flow::Section;

    fn square(half: f64) -> ChartDomain {
        ChartDomain::new(
            "square",
            Region::Rect(crate::geom::Rect {
                x_min: -half,
                x_max: half,
                y_min: -half,
                y_max: half,
            }),
            vec![
                (Boundary::Left, BoundaryBehavior::Unspecified),
                (Boundary::Right, BoundaryBehavior::Unspecified),
                (Boundary::Bottom, BoundaryBehavior::Unspecified),
                (Boundary::Top, BoundaryBehavior::Unspecified),
            ],
        )
        .unwrap()
    }

    fn term(coeff: f64, x_pow: u32, y_pow: u32) -> PolyTerm {
        PolyTerm {
            coeff,
            x_pow,
            y_pow,
            eps_pows: vec![],
        }
    }

    /// x' = -x, y' = -y: every orbit converges to the origin.
    pub fn linear_sink() -> Family {
        polynomial_family(
            "linear_sink",
            PolyFamily {
                base_dim: 1,
                vx: vec![term(-1.0, 1, 0)],
                vy: vec![term(-1.0, 0, 1)],
            },
            vec![square(2.0)],
            AnalysisHints::default(),
        )
        .unwrap()
    }

    /// x' = x, y' = -y: a linear saddle.
    pub fn linear_saddle() -> Family {
        polynomial_family(
            "linear_saddle",
            PolyFamily {
                base_dim: 1,
                vx: vec![term(1.0, 1, 0)],
                vy: vec![term(-1.0, 0, 1)],
            },
            vec![square(2.0)],
            AnalysisHints::default(),
        )
        .unwrap()
    }

    /// x' = -y, y' = x: a linear center, every orbit periodic.
    pub fn linear_center() -> Family {
        polynomial_family(
            "linear_center",
            PolyFamily {
                base_dim: 1,
                vx: vec![term(-1.0, 0, 1)],
                vy: vec![term(1.0, 1, 0)],
            },
            vec![square(2.0)],
            AnalysisHints {
                sections: vec![Section {
                    base: [1.0, 0.0],
                    direction: [1.0, 0.0],
                    half_length: 0.8,
                    orientation: 1.0,
                }],
                connection_probes: vec![],
            },
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures;
    use super::*;
    use crate::field::ParamPoint;

    #[test]
    fn polynomial_eval_and_jacobian() {
        let fam = fixtures::linear_saddle();
        let eps = ParamPoint(vec![0.0]);
        assert_eq!(fam.eval(&eps, [0.5, -0.25]), [0.5, 0.25]);
        assert_eq!(fam.jacobian(&eps, [0.3, 0.7]), [[1.0, 0.0], [0.0, -1.0]]);
    }

    #[test]
    fn parameter_dependent_terms() {
        // x' = eps * x^2
        let fam = polynomial_family(
            "p",
            PolyFamily {
                base_dim: 1,
                vx: vec![PolyTerm {
                    coeff: 1.0,
                    x_pow: 2,
                    y_pow: 0,
                    eps_pows: vec![1],
                }],
                vy: vec![],
            },
            vec![],
            AnalysisHints::default(),
        )
        .unwrap();
        assert_eq!(fam.eval(&ParamPoint(vec![2.0]), [3.0, 0.0]), [18.0, 0.0]);
        assert_eq!(fam.eval(&ParamPoint(vec![0.0]), [3.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn excess_eps_exponents_rejected() {
        let poly = PolyFamily {
            base_dim: 1,
            vx: vec![PolyTerm {
                coeff: 1.0,
                x_pow: 0,
                y_pow: 0,
                eps_pows: vec![1, 2],
            }],
            vy: vec![],
        };
        assert!(polynomial_family("bad", poly, vec![], AnalysisHints::default()).is_err());
    }
}

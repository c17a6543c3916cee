//! Smooth cut functions built from polynomial smoothsteps (or the classical
//! exponential bump for infinite order).

use super::Region;
use crate::error::{CoreError, Result};
use crate::geom::{dist, scale, sub, Rect, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothOrder {
    Finite(u32),
    Infinite,
}

/// Smooth transition `[0,1] -> [0,1]` with the requested number of vanishing
/// derivatives at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Edge {
    order: SmoothOrder,
}

impl Edge {
    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self.order {
            SmoothOrder::Finite(n) => smoothstep(n, t),
            SmoothOrder::Infinite => {
                let a = (-1.0 / t).exp();
                let b = (-1.0 / (1.0 - t)).exp();
                a / (a + b)
            }
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        match self.order {
            SmoothOrder::Finite(n) => {
                // S_N'(t) = (2N+1) C(2N, N) t^N (1-t)^N
                let n = n as i64;
                let c = binom(2 * n, n) * (2 * n + 1) as f64;
                c * t.powi(n as i32) * (1.0 - t).powi(n as i32)
            }
            SmoothOrder::Infinite => {
                let a = (-1.0 / t).exp();
                let b = (-1.0 / (1.0 - t)).exp();
                let s = a + b;
                (a * b / (t * t) + a * b / ((1.0 - t) * (1.0 - t))) / (s * s)
            }
        }
    }
}

/// Polynomial smoothstep of order `n`: `n` continuous derivatives across the
/// seams, symmetric around `t = 1/2`.
fn smoothstep(n: u32, t: f64) -> f64 {
    let n = n as i64;
    let mut acc = 0.0;
    for k in 0..=n {
        let c = binom(n + k, k) * binom(2 * n + 1, n - k);
        acc += c * (-t).powi(k as i32);
    }
    acc * t.powi((n + 1) as i32)
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Profile {
    Radial {
        center: Vec2,
        core: (f64, f64),
        supp: (f64, f64),
    },
    Box {
        core: Rect,
        supp: Rect,
    },
}

/// Smooth function equal to 1 on `core`, 0 outside `support`, in `[0,1]`
/// everywhere in between.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutFunction {
    pub core: Region,
    pub support: Region,
    pub smooth_order: SmoothOrder,
    profile: Profile,
    edge: Edge,
}

impl CutFunction {
    pub fn eval(&self, p: Vec2) -> f64 {
        match &self.profile {
            Profile::Radial { center, core, supp } => {
                let r = dist(p, *center);
                self.radial_value(r, *core, *supp)
            }
            Profile::Box { core, supp } => {
                self.edge_1d(p[0], (core.x_min, core.x_max), (supp.x_min, supp.x_max))
                    * self.edge_1d(p[1], (core.y_min, core.y_max), (supp.y_min, supp.y_max))
            }
        }
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        match &self.profile {
            Profile::Radial { center, core, supp } => {
                let rel = sub(p, *center);
                let r = crate::geom::norm(rel);
                if r < 1e-300 {
                    return [0.0, 0.0];
                }
                let d = self.radial_slope(r, *core, *supp);
                scale(rel, d / r)
            }
            Profile::Box { core, supp } => {
                let fx = self.edge_1d(p[0], (core.x_min, core.x_max), (supp.x_min, supp.x_max));
                let fy = self.edge_1d(p[1], (core.y_min, core.y_max), (supp.y_min, supp.y_max));
                let dx = self.edge_1d_slope(p[0], (core.x_min, core.x_max), (supp.x_min, supp.x_max));
                let dy = self.edge_1d_slope(p[1], (core.y_min, core.y_max), (supp.y_min, supp.y_max));
                [dx * fy, fx * dy]
            }
        }
    }

    fn radial_value(&self, r: f64, core: (f64, f64), supp: (f64, f64)) -> f64 {
        if r >= core.0 && r <= core.1 {
            1.0
        } else if r < core.0 {
            // inner rising edge (absent for disks, where supp.0 = core.0 = 0)
            if core.0 == supp.0 {
                1.0
            } else {
                self.edge.value((r - supp.0) / (core.0 - supp.0))
            }
        } else {
            self.edge.value((supp.1 - r) / (supp.1 - core.1))
        }
    }

    fn radial_slope(&self, r: f64, core: (f64, f64), supp: (f64, f64)) -> f64 {
        if r >= core.0 && r <= core.1 {
            0.0
        } else if r < core.0 {
            if core.0 == supp.0 {
                0.0
            } else {
                self.edge.derivative((r - supp.0) / (core.0 - supp.0)) / (core.0 - supp.0)
            }
        } else {
            -self.edge.derivative((supp.1 - r) / (supp.1 - core.1)) / (supp.1 - core.1)
        }
    }

    fn edge_1d(&self, x: f64, core: (f64, f64), supp: (f64, f64)) -> f64 {
        if x >= core.0 && x <= core.1 {
            1.0
        } else if x < core.0 {
            self.edge.value((x - supp.0) / (core.0 - supp.0))
        } else {
            self.edge.value((supp.1 - x) / (supp.1 - core.1))
        }
    }

    fn edge_1d_slope(&self, x: f64, core: (f64, f64), supp: (f64, f64)) -> f64 {
        if x >= core.0 && x <= core.1 {
            0.0
        } else if x < core.0 {
            self.edge.derivative((x - supp.0) / (core.0 - supp.0)) / (core.0 - supp.0)
        } else {
            -self.edge.derivative((supp.1 - x) / (supp.1 - core.1)) / (supp.1 - core.1)
        }
    }
}

/// Builds a cut function with value 1 on `core` and 0 outside `support`.
///
/// `core` must lie strictly inside `support` (shared inner radius 0 is
/// allowed so disks can have a single outer edge), and the requested order
/// must be at least 2.
pub fn make_bump(core: Region, support: Region, order: SmoothOrder) -> Result<CutFunction> {
    core.validate()?;
    support.validate()?;
    if let SmoothOrder::Finite(n) = order {
        if n < 2 {
            return Err(CoreError::Precondition(format!(
                "smooth order must be >= 2, got {n}"
            )));
        }
    }
    if !support.strictly_contains(&core) {
        return Err(CoreError::Region(
            "core must lie strictly inside support".to_string(),
        ));
    }
    let profile = match (core, support) {
        (
            Region::Annulus {
                r_min: a1,
                r_max: b1,
                center,
            },
            Region::Annulus {
                r_min: a0,
                r_max: b0,
                ..
            },
        ) => Profile::Radial {
            center,
            core: (a1, b1),
            supp: (a0, b0),
        },
        (Region::Rect(c), Region::Rect(s)) => Profile::Box { core: c, supp: s },
        _ => {
            return Err(CoreError::Region(
                "core and support must have the same shape".to_string(),
            ))
        }
    };
    Ok(CutFunction {
        core,
        support,
        smooth_order: order,
        profile,
        edge: Edge { order },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus_bump(order: SmoothOrder) -> CutFunction {
        make_bump(
            Region::annulus(0.8, 1.2),
            Region::annulus(0.6, 1.4),
            order,
        )
        .unwrap()
    }

    #[test]
    fn core_and_support_values() {
        let phi = annulus_bump(SmoothOrder::Finite(3));
        assert_eq!(phi.eval([1.0, 0.0]), 1.0);
        assert_eq!(phi.eval([0.5, 0.0]), 0.0);
        assert_eq!(phi.eval([1.5, 0.0]), 0.0);
        assert_eq!(phi.eval([0.0, 1.1]), 1.0);
    }

    #[test]
    fn degenerate_core_rejected() {
        let r = make_bump(
            Region::annulus(0.6, 1.4),
            Region::annulus(0.6, 1.4),
            SmoothOrder::Finite(3),
        );
        assert!(matches!(r, Err(CoreError::Region(_))));
    }

    #[test]
    fn rising_edge_midpoint_is_half() {
        // Symmetric smoothstep: value 1/2 at the middle of the [0.6, 0.8] edge.
        let phi = annulus_bump(SmoothOrder::Finite(3));
        assert!((phi.eval([0.7, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn range_and_monotone_edges() {
        let phi = annulus_bump(SmoothOrder::Finite(5));
        let mut prev = -1.0;
        for i in 0..=200 {
            let r = 0.55 + 0.3 * i as f64 / 200.0;
            let v = phi.eval([r, 0.0]);
            assert!((0.0..=1.0).contains(&v));
            if r <= 0.8 {
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for order in [SmoothOrder::Finite(3), SmoothOrder::Finite(6), SmoothOrder::Infinite] {
            let phi = annulus_bump(order);
            let h = 1e-6;
            for p in [[0.7, 0.1], [1.25, -0.3], [0.9, 0.2], [0.65, 0.0]] {
                let g = phi.grad(p);
                let fdx = (phi.eval([p[0] + h, p[1]]) - phi.eval([p[0] - h, p[1]])) / (2.0 * h);
                let fdy = (phi.eval([p[0], p[1] + h]) - phi.eval([p[0], p[1] - h])) / (2.0 * h);
                assert!((g[0] - fdx).abs() < 1e-5, "{order:?} {p:?}");
                assert!((g[1] - fdy).abs() < 1e-5, "{order:?} {p:?}");
            }
        }
    }

    #[test]
    fn smoothness_order_of_boundary_jumps() {
        // The (n+1)-th derivative jumps at the seam, so the n-th divided
        // difference of the n-th derivative grows like 1/h while lower ones
        // stay bounded. Check the first derivative's difference quotient
        // decays across the seam for n = 3 under refinement.
        let phi = annulus_bump(SmoothOrder::Finite(3));
        let seam = 0.8; // core edge
        let slope_jump = |h: f64| {
            let left = (phi.eval([seam - h / 2.0 + h, 0.0]) - phi.eval([seam - h / 2.0 - h, 0.0]))
                / (2.0 * h);
            let right = (phi.eval([seam + h / 2.0 + h, 0.0]) - phi.eval([seam + h / 2.0 - h, 0.0]))
                / (2.0 * h);
            (left - right).abs()
        };
        let coarse = slope_jump(1e-2);
        let fine = slope_jump(1e-3);
        // First derivative continuous: jump estimate shrinks ~linearly.
        assert!(fine < coarse / 5.0, "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn box_bump_product_structure() {
        let core = Region::Rect(Rect {
            x_min: -0.5,
            x_max: 0.5,
            y_min: -0.5,
            y_max: 0.5,
        });
        let supp = Region::Rect(Rect {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        });
        let phi = make_bump(core, supp, SmoothOrder::Finite(3)).unwrap();
        assert_eq!(phi.eval([0.0, 0.0]), 1.0);
        assert_eq!(phi.eval([1.1, 0.0]), 0.0);
        let v = phi.eval([0.75, 0.75]);
        assert!((v - 0.5 * 0.5).abs() < 1e-12);
    }
}

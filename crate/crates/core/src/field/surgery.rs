//! Family surgeries: split along a parameter decomposition, stabilize
//! outside a cut function, extend trivially with inert parameters.

use super::{CutFunction, Family, FamilyKind, ParamPoint, SmoothOrder};
use crate::error::{CoreError, Result};
use crate::geom::{Mat2, Vec2};

/// Data for a split family: a family over `B1 x B2` and two cut functions
/// with disjoint supports.
#[derive(Debug, Clone)]
pub struct SplittingData {
    pub family: Family,
    /// Number of leading parameter coordinates forming the first block.
    pub split_index: usize,
    pub phi1: CutFunction,
    pub phi2: CutFunction,
}

impl SplittingData {
    pub fn new(
        family: Family,
        split_index: usize,
        phi1: CutFunction,
        phi2: CutFunction,
    ) -> Result<Self> {
        if split_index == 0 || split_index >= family.base_dim {
            return Err(CoreError::Precondition(format!(
                "split index {split_index} must leave both blocks nonempty (base_dim {})",
                family.base_dim
            )));
        }
        if family.base_dim > MAX_BASE_DIM {
            return Err(CoreError::Precondition(format!(
                "base dimension {} exceeds the supported maximum {MAX_BASE_DIM}",
                family.base_dim
            )));
        }
        check_disjoint_supports(&phi1, &phi2)?;
        Ok(SplittingData {
            family,
            split_index,
            phi1,
            phi2,
        })
    }

    /// Projection onto the first block: the second block zeroed.
    pub fn p1(&self, eps: &[f64]) -> ParamPoint {
        let mut v = vec![0.0; eps.len()];
        v[..self.split_index].copy_from_slice(&eps[..self.split_index]);
        ParamPoint(v)
    }

    /// Projection onto the second block.
    pub fn p2(&self, eps: &[f64]) -> ParamPoint {
        let mut v = vec![0.0; eps.len()];
        v[self.split_index..].copy_from_slice(&eps[self.split_index..]);
        ParamPoint(v)
    }
}

/// Evaluation avoids heap allocation: parameter projections live on the
/// stack, bounded by `MAX_BASE_DIM`.
pub(crate) const MAX_BASE_DIM: usize = 16;

#[inline]
fn proj1(eps: &[f64], n1: usize, buf: &mut [f64; MAX_BASE_DIM]) {
    buf[..eps.len()].fill(0.0);
    buf[..n1].copy_from_slice(&eps[..n1]);
}

#[inline]
fn proj2(eps: &[f64], n1: usize, buf: &mut [f64; MAX_BASE_DIM]) {
    buf[..eps.len()].fill(0.0);
    buf[n1..eps.len()].copy_from_slice(&eps[n1..]);
}

/// Disjointness is verified on a dense sample grid over the union of the
/// support bounding boxes.
pub(crate) fn check_disjoint_supports(phi1: &CutFunction, phi2: &CutFunction) -> Result<()> {
    let b1 = phi1.support.bounds();
    let b2 = phi2.support.bounds();
    let x_min = b1.x_min.min(b2.x_min);
    let x_max = b1.x_max.max(b2.x_max);
    let y_min = b1.y_min.min(b2.y_min);
    let y_max = b1.y_max.max(b2.y_max);
    let n = 320;
    for i in 0..=n {
        for j in 0..=n {
            let p = [
                x_min + (x_max - x_min) * i as f64 / n as f64,
                y_min + (y_max - y_min) * j as f64 / n as f64,
            ];
            if phi1.eval(p) > 0.0 && phi2.eval(p) > 0.0 {
                return Err(CoreError::Precondition(format!(
                    "cut-function supports overlap near ({:.4}, {:.4})",
                    p[0], p[1]
                )));
            }
        }
    }
    Ok(())
}

fn surgery_smoothness(k: u32, order: SmoothOrder) -> u32 {
    match order {
        SmoothOrder::Finite(n) => k.min(n),
        SmoothOrder::Infinite => k,
    }
}

/// `w_eps = v_0 + (v_{p1(eps)} - v_0) phi1 + (v_{p2(eps)} - v_0) phi2`.
pub fn split_family(data: SplittingData) -> Family {
    let base = &data.family;
    Family {
        name: format!("split({})", base.name),
        base_dim: base.base_dim,
        base_radius: base.base_radius,
        smoothness: surgery_smoothness(
            base.smoothness,
            match (data.phi1.smooth_order, data.phi2.smooth_order) {
                (SmoothOrder::Finite(a), SmoothOrder::Finite(b)) => SmoothOrder::Finite(a.min(b)),
                (SmoothOrder::Finite(a), _) | (_, SmoothOrder::Finite(a)) => {
                    SmoothOrder::Finite(a)
                }
                _ => SmoothOrder::Infinite,
            },
        ),
        domains: base.domains.clone(),
        hints: base.hints.clone(),
        kind: FamilyKind::Split(Box::new(data)),
    }
}

pub(crate) fn split_eval(data: &SplittingData, eps: &[f64], x: Vec2) -> Vec2 {
    let n = eps.len();
    let zeros = [0.0; MAX_BASE_DIM];
    let f1 = data.phi1.eval(x);
    let f2 = data.phi2.eval(x);
    let v0 = data.family.eval_raw(&zeros[..n], x);
    let mut w = v0;
    let mut buf = [0.0; MAX_BASE_DIM];
    if f1 > 0.0 {
        proj1(eps, data.split_index, &mut buf);
        let v1 = data.family.eval_raw(&buf[..n], x);
        w[0] += (v1[0] - v0[0]) * f1;
        w[1] += (v1[1] - v0[1]) * f1;
    }
    if f2 > 0.0 {
        proj2(eps, data.split_index, &mut buf);
        let v2 = data.family.eval_raw(&buf[..n], x);
        w[0] += (v2[0] - v0[0]) * f2;
        w[1] += (v2[1] - v0[1]) * f2;
    }
    w
}

pub(crate) fn split_jacobian(data: &SplittingData, eps: &[f64], x: Vec2) -> Mat2 {
    let n = eps.len();
    let zeros = [0.0; MAX_BASE_DIM];
    let mut j = data.family.jacobian_raw(&zeros[..n], x);
    let mut buf = [0.0; MAX_BASE_DIM];
    for which in 0..2 {
        let phi = if which == 0 { &data.phi1 } else { &data.phi2 };
        let f = phi.eval(x);
        let g = phi.grad(x);
        if f == 0.0 && g == [0.0, 0.0] {
            continue;
        }
        if which == 0 {
            proj1(eps, data.split_index, &mut buf);
        } else {
            proj2(eps, data.split_index, &mut buf);
        }
        let jp = data.family.jacobian_raw(&buf[..n], x);
        let j0 = data.family.jacobian_raw(&zeros[..n], x);
        let vp = data.family.eval_raw(&buf[..n], x);
        let v0 = data.family.eval_raw(&zeros[..n], x);
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] += f * (jp[r][c] - j0[r][c]) + (vp[r] - v0[r]) * g[c];
            }
        }
    }
    j
}

/// `w_eps = v_0 + phi (v_eps - v_0)`: freezes the family outside the
/// support of `phi`.
pub fn stabilize(family: Family, phi: CutFunction) -> Family {
    let smoothness = surgery_smoothness(family.smoothness, phi.smooth_order);
    Family {
        name: format!("stab({})", family.name),
        base_dim: family.base_dim,
        base_radius: family.base_radius,
        smoothness,
        domains: family.domains.clone(),
        hints: family.hints.clone(),
        kind: FamilyKind::Stabilized {
            inner: Box::new(family),
            phi,
        },
    }
}

pub(crate) fn stab_eval(inner: &Family, phi: &CutFunction, eps: &[f64], x: Vec2) -> Vec2 {
    let n = eps.len();
    let zeros = [0.0; MAX_BASE_DIM];
    let f = phi.eval(x);
    let v0 = inner.eval_raw(&zeros[..n], x);
    if f == 0.0 {
        return v0;
    }
    let ve = inner.eval_raw(eps, x);
    [v0[0] + f * (ve[0] - v0[0]), v0[1] + f * (ve[1] - v0[1])]
}

pub(crate) fn stab_jacobian(inner: &Family, phi: &CutFunction, eps: &[f64], x: Vec2) -> Mat2 {
    let n = eps.len();
    let zeros = [0.0; MAX_BASE_DIM];
    let f = phi.eval(x);
    let g = phi.grad(x);
    let j0 = inner.jacobian_raw(&zeros[..n], x);
    if f == 0.0 && g == [0.0, 0.0] {
        return j0;
    }
    let je = inner.jacobian_raw(eps, x);
    let ve = inner.eval_raw(eps, x);
    let v0 = inner.eval_raw(&zeros[..n], x);
    let mut j = j0;
    for r in 0..2 {
        for c in 0..2 {
            j[r][c] += f * (je[r][c] - j0[r][c]) + (ve[r] - v0[r]) * g[c];
        }
    }
    j
}

/// Appends `extra` inert parameters: evaluation ignores the new coordinates.
pub fn extend_trivially(family: Family, extra: usize) -> Result<Family> {
    if extra == 0 {
        return Err(CoreError::Precondition(
            "trivial extension needs at least one extra parameter".to_string(),
        ));
    }
    if family.base_dim + extra > MAX_BASE_DIM {
        return Err(CoreError::Precondition(format!(
            "extended dimension {} exceeds the supported maximum {MAX_BASE_DIM}",
            family.base_dim + extra
        )));
    }
    Ok(Family {
        name: format!("extend({})", family.name),
        base_dim: family.base_dim + extra,
        base_radius: family.base_radius,
        smoothness: family.smoothness,
        domains: family.domains.clone(),
        hints: family.hints.clone(),
        kind: FamilyKind::Extended {
            inner: Box::new(family),
            extra,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_bump, model_two_parabolic_cycles, Region};

    fn bumps() -> (CutFunction, CutFunction) {
        let phi1 = make_bump(
            Region::annulus(0.7, 1.3),
            Region::annulus(0.6, 1.4),
            SmoothOrder::Finite(3),
        )
        .unwrap();
        let phi2 = make_bump(
            Region::annulus(1.7, 2.3),
            Region::annulus(1.6, 2.4),
            SmoothOrder::Finite(3),
        )
        .unwrap();
        (phi1, phi2)
    }

    fn split_two_parabolic() -> Family {
        let (phi1, phi2) = bumps();
        let data = SplittingData::new(model_two_parabolic_cycles(), 1, phi1, phi2).unwrap();
        split_family(data)
    }

    #[test]
    fn overlapping_supports_rejected() {
        let phi1 = make_bump(
            Region::annulus(0.7, 1.3),
            Region::annulus(0.6, 1.4),
            SmoothOrder::Finite(3),
        )
        .unwrap();
        let phi2 = make_bump(
            Region::annulus(1.2, 2.3),
            Region::annulus(1.1, 2.4),
            SmoothOrder::Finite(3),
        )
        .unwrap();
        let r = SplittingData::new(model_two_parabolic_cycles(), 1, phi1, phi2);
        assert!(matches!(r, Err(CoreError::Precondition(_))));
    }

    #[test]
    fn split_equals_base_field_outside_supports() {
        let w = split_two_parabolic();
        let v = model_two_parabolic_cycles();
        let eps = ParamPoint(vec![0.03, -0.05]);
        for x in [[0.2, 0.1], [1.5, 0.0], [2.6, -0.4], [0.0, 2.9]] {
            assert_eq!(w.eval(&eps, x), v.eval(&v.zero_param(), x));
        }
    }

    #[test]
    fn split_equals_projected_family_on_cores() {
        let w = split_two_parabolic();
        let v = model_two_parabolic_cycles();
        let eps = ParamPoint(vec![0.03, -0.05]);
        // phi1 = 1 near r = 1: w = v_{(e1, 0)}
        for x in [[1.0, 0.0], [0.0, 0.9], [-1.2, 0.0]] {
            assert_eq!(w.eval(&eps, x), v.eval(&ParamPoint(vec![0.03, 0.0]), x));
        }
        // phi2 = 1 near r = 2: w = v_{(0, e2)}
        for x in [[2.0, 0.0], [0.0, -1.8], [1.5, 1.5]] {
            assert_eq!(w.eval(&eps, x), v.eval(&ParamPoint(vec![0.0, -0.05]), x));
        }
    }

    #[test]
    fn split_at_zero_is_base_field() {
        let w = split_two_parabolic();
        let v = model_two_parabolic_cycles();
        let zero = ParamPoint(vec![0.0, 0.0]);
        for x in [[0.65, 0.1], [1.35, -0.2], [2.05, 0.0], [0.5, 0.5]] {
            assert_eq!(w.eval(&zero, x), v.eval(&zero, x));
        }
    }

    #[test]
    fn split_formula_pointwise_exact() {
        let (phi1, phi2) = bumps();
        let data =
            SplittingData::new(model_two_parabolic_cycles(), 1, phi1.clone(), phi2.clone())
                .unwrap();
        let w = split_family(data);
        let v = model_two_parabolic_cycles();
        let eps = vec![0.017, -0.023];
        for x in [[0.66, 0.2], [1.33, 0.1], [1.62, -0.5], [2.35, 0.0]] {
            let v0 = v.eval(&v.zero_param(), x);
            let v1 = v.eval(&ParamPoint(vec![eps[0], 0.0]), x);
            let v2 = v.eval(&ParamPoint(vec![0.0, eps[1]]), x);
            let (f1, f2) = (phi1.eval(x), phi2.eval(x));
            let expect = [
                v0[0] + (v1[0] - v0[0]) * f1 + (v2[0] - v0[0]) * f2,
                v0[1] + (v1[1] - v0[1]) * f1 + (v2[1] - v0[1]) * f2,
            ];
            let got = w.eval(&ParamPoint(eps.clone()), x);
            assert!((got[0] - expect[0]).abs() < 1e-15);
            assert!((got[1] - expect[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn stabilization_formula() {
        let (phi1, _) = bumps();
        let v = model_two_parabolic_cycles();
        let w = stabilize(v.clone(), phi1.clone());
        let eps = ParamPoint(vec![-0.04, 0.02]);
        // inside the core: the family itself
        assert_eq!(w.eval(&eps, [1.0, 0.0]), v.eval(&eps, [1.0, 0.0]));
        // outside the support: frozen at zero
        assert_eq!(
            w.eval(&eps, [2.0, 0.0]),
            v.eval(&v.zero_param(), [2.0, 0.0])
        );
        // at eps = 0 the surgery is invisible
        let zero = ParamPoint(vec![0.0, 0.0]);
        for x in [[0.65, 0.0], [1.0, 0.4], [2.2, 0.0]] {
            assert_eq!(w.eval(&zero, x), v.eval(&zero, x));
        }
        // blended zone follows the formula exactly
        let x = [0.66, 0.1];
        let f = phi1.eval(x);
        let ve = v.eval(&eps, x);
        let v0 = v.eval(&v.zero_param(), x);
        let got = w.eval(&eps, x);
        assert!((got[0] - (v0[0] + f * (ve[0] - v0[0]))).abs() < 1e-16);
    }

    #[test]
    fn surgery_jacobians_match_finite_differences() {
        let w = split_two_parabolic();
        let (phi1, _) = bumps();
        let s = stabilize(model_two_parabolic_cycles(), phi1);
        let eps2 = ParamPoint(vec![0.03, -0.02]);
        for fam in [&w, &s] {
            for x in [[0.66, 0.2], [1.0, 0.0], [1.62, -0.5], [2.35, 0.0]] {
                let ja = fam.jacobian(&eps2, x);
                let jf = fam.fd_jacobian(&eps2, x, 1e-5);
                for r in 0..2 {
                    for c in 0..2 {
                        let scale = ja[r][c].abs().max(1.0);
                        assert!(
                            (ja[r][c] - jf[r][c]).abs() / scale < 1e-4,
                            "{} J[{r}][{c}]: {} vs {}",
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
    fn trivial_extension_ignores_new_parameters() {
        let v = model_two_parabolic_cycles();
        let w = extend_trivially(v.clone(), 1).unwrap();
        assert_eq!(w.base_dim, 3);
        let x = [0.8, -0.3];
        let a = w.eval(&ParamPoint(vec![0.02, -0.01, 0.3]), x);
        let b = w.eval(&ParamPoint(vec![0.02, -0.01, 0.0]), x);
        let c = v.eval(&ParamPoint(vec![0.02, -0.01]), x);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn zero_extension_rejected() {
        let v = model_two_parabolic_cycles();
        assert!(extend_trivially(v, 0).is_err());
    }
}

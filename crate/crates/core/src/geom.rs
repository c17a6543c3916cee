//! Plane geometry: vectors, 2x2 matrices, polylines, point clouds.

use serde::{Deserialize, Serialize};

pub type Vec2 = [f64; 2];

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Vec2, k: f64) -> Vec2 {
    [a[0] * k, a[1] * k]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Counterclockwise rotation by 90 degrees; used as the section normal.
#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    [-a[1], a[0]]
}

/// Row-major 2x2 matrix.
pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[inline]
pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

#[inline]
pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues of a 2x2 matrix as complex numbers, ordered by real part
/// (then imaginary part) for determinism.
pub fn eigenvalues(m: &Mat2) -> [num_complex::Complex64; 2] {
    use num_complex::Complex64;
    let t = trace(m);
    let d = det(m);
    let disc = t * t / 4.0 - d;
    let (l1, l2) = if disc >= 0.0 {
        let r = disc.sqrt();
        (
            Complex64::new(t / 2.0 - r, 0.0),
            Complex64::new(t / 2.0 + r, 0.0),
        )
    } else {
        let r = (-disc).sqrt();
        (
            Complex64::new(t / 2.0, -r),
            Complex64::new(t / 2.0, r),
        )
    };
    [l1, l2]
}

/// Unit eigenvector of a 2x2 matrix for a real eigenvalue.
pub fn real_eigenvector(m: &Mat2, lambda: f64) -> Vec2 {
    // (A - lambda I) v = 0; pick the larger row for stability.
    let a = [m[0][0] - lambda, m[0][1]];
    let b = [m[1][0], m[1][1] - lambda];
    let v = if norm(a) >= norm(b) {
        [-a[1], a[0]]
    } else {
        [-b[1], b[0]]
    };
    let n = norm(v);
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        scale(v, 1.0 / n)
    }
}

/// Distance from point `p` to segment `[a, b]`.
pub fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// Distance from a point to a polyline (vertex-to-segment).
pub fn point_polyline_dist(p: Vec2, poly: &[Vec2]) -> f64 {
    if poly.is_empty() {
        return f64::INFINITY;
    }
    if poly.len() == 1 {
        return dist(p, poly[0]);
    }
    let mut best = f64::INFINITY;
    for w in poly.windows(2) {
        let d = point_segment_dist(p, w[0], w[1]);
        if d < best {
            best = d;
        }
    }
    best
}

/// Symmetric Hausdorff distance between two polylines, measuring each
/// vertex against the other curve's segments.
pub fn polyline_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let one = |from: &[Vec2], to: &[Vec2]| {
        from.iter()
            .map(|&p| point_polyline_dist(p, to))
            .fold(0.0_f64, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Directed Hausdorff distance from point set `a` to point set `b`.
pub fn points_hausdorff_directed(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let grid = PointGrid::build(b, suggested_cell(b));
    a.iter()
        .map(|&p| grid.nearest_dist(p))
        .fold(0.0_f64, f64::max)
}

/// Symmetric Hausdorff distance between point sets.
pub fn points_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    points_hausdorff_directed(a, b).max(points_hausdorff_directed(b, a))
}

fn suggested_cell(pts: &[Vec2]) -> f64 {
    // Bound the bin count; exact value only affects speed.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    (span / 256.0).max(1e-6)
}

/// Winding-number point-in-polygon test for a closed polyline.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut winding = 0i32;
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a[1] <= p[1] {
            if b[1] > p[1] && cross_side(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b[1] <= p[1] && cross_side(a, b, p) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

#[inline]
fn cross_side(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])
}

/// Uniform-bin spatial hash for radius and nearest queries on point sets.
pub struct PointGrid {
    cell: f64,
    bins: std::collections::HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Vec2>,
}

impl PointGrid {
    pub fn build(points: &[Vec2], cell: f64) -> Self {
        let cell = cell.max(1e-12);
        let mut bins: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            bins.entry(Self::key(*p, cell)).or_default().push(i);
        }
        PointGrid {
            cell,
            bins,
            points: points.to_vec(),
        }
    }

    #[inline]
    fn key(p: Vec2, cell: f64) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when some stored point lies within `r` of `p`.
    pub fn has_within(&self, p: Vec2, r: f64) -> bool {
        let reach = (r / self.cell).ceil() as i64;
        let (kx, ky) = Self::key(p, self.cell);
        for ix in (kx - reach)..=(kx + reach) {
            for iy in (ky - reach)..=(ky + reach) {
                if let Some(ids) = self.bins.get(&(ix, iy)) {
                    if ids.iter().any(|&i| dist(self.points[i], p) <= r) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Indices of stored points within `r` of `p`.
    pub fn within(&self, p: Vec2, r: f64) -> Vec<usize> {
        let reach = (r / self.cell).ceil() as i64;
        let (kx, ky) = Self::key(p, self.cell);
        let mut out = Vec::new();
        for ix in (kx - reach)..=(kx + reach) {
            for iy in (ky - reach)..=(ky + reach) {
                if let Some(ids) = self.bins.get(&(ix, iy)) {
                    out.extend(ids.iter().copied().filter(|&i| dist(self.points[i], p) <= r));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Distance to the nearest stored point (infinity when empty).
    pub fn nearest_dist(&self, p: Vec2) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let mut reach = 1i64;
        loop {
            let r = self.cell * reach as f64;
            let mut best = f64::INFINITY;
            let (kx, ky) = Self::key(p, self.cell);
            for ix in (kx - reach)..=(kx + reach) {
                for iy in (ky - reach)..=(ky + reach) {
                    if let Some(ids) = self.bins.get(&(ix, iy)) {
                        for &i in ids {
                            best = best.min(dist(self.points[i], p));
                        }
                    }
                }
            }
            // A hit is only conclusive if it is inside the searched radius.
            if best <= r {
                return best;
            }
            if reach as f64 * self.cell > 1e12 {
                return best;
            }
            reach *= 2;
        }
    }
}

/// Single-linkage clustering of a point set at the given linking radius.
/// Returns per-point component ids, numbered in first-appearance order.
pub fn single_linkage(points: &[Vec2], radius: f64) -> Vec<usize> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let grid = PointGrid::build(points, radius.max(1e-12));
    for i in 0..n {
        for j in grid.within(points[i], radius) {
            if j > i {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0usize;
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        label[i] = label[r];
    }
    label
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_saddle() {
        let m = [[1.0, 0.0], [0.0, -1.0]];
        let ev = eigenvalues(&m);
        assert_eq!(ev[0].re, -1.0);
        assert_eq!(ev[1].re, 1.0);
        assert_eq!(ev[0].im, 0.0);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let m = [[0.0, -1.0], [1.0, 0.0]];
        let ev = eigenvalues(&m);
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im + 1.0).abs() < 1e-15);
        assert!((ev[1].im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvector_matches_eigenvalue() {
        let m = [[2.0, 1.0], [1.0, 2.0]];
        for lambda in [1.0, 3.0] {
            let v = real_eigenvector(&m, lambda);
            let mv = mat_vec(&m, v);
            assert!(dist(mv, scale(v, lambda)) < 1e-12);
        }
    }

    #[test]
    fn polygon_containment() {
        let circle: Vec<Vec2> = (0..64)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                [t.cos(), t.sin()]
            })
            .collect();
        assert!(point_in_polygon([0.0, 0.0], &circle));
        assert!(point_in_polygon([0.5, 0.5], &circle));
        assert!(!point_in_polygon([1.2, 0.0], &circle));
    }

    #[test]
    fn clustering_separates_two_circles() {
        let mut pts = Vec::new();
        for i in 0..100 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 100.0;
            pts.push([t.cos(), t.sin()]);
            pts.push([2.0 * t.cos(), 2.0 * t.sin()]);
        }
        let labels = single_linkage(&pts, 0.15);
        let k = labels.iter().copied().max().unwrap() + 1;
        assert_eq!(k, 2);
    }

    #[test]
    fn hausdorff_of_shifted_circle() {
        let circ = |r: f64, c: f64| -> Vec<Vec2> {
            (0..200)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / 200.0;
                    [r * t.cos() + c, r * t.sin()]
                })
                .collect()
        };
        let d = polyline_hausdorff(&circ(1.0, 0.0), &circ(1.0, 0.1));
        assert!((d - 0.1).abs() < 5e-3, "d = {d}");
    }
}

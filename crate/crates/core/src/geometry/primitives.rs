//! Planar predicates and measures shared by the meshers.

use crate::Point;

/// Twice the signed area of the triangle `abc` (positive when counter-clockwise).
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * orient(a, b, c)
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed shoelace area of a closed polygon.
pub fn polygon_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

pub fn polygon_perimeter(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| dist(pts[i], pts[(i + 1) % n])).sum()
}

/// Even-odd point-in-polygon test. Points on the boundary may go either way.
pub fn point_in_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Closed-segment intersection test, touching and collinear overlap included.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Distance between an axis-aligned box and a closed polygonal region
/// (zero when they overlap).
pub fn box_polygon_dist(lo: Point, hi: Point, poly: &[Point]) -> f64 {
    let corners = [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
    if poly
        .iter()
        .any(|p| p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1])
    {
        return 0.0;
    }
    if corners.iter().any(|&c| point_in_polygon(c, poly)) {
        return 0.0;
    }
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        for k in 0..4 {
            best = best.min(segment_segment_dist(p, q, corners[k], corners[(k + 1) % 4]));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Orientation-normalized in-circle determinant: positive when `d` lies
/// strictly inside the circumcircle of the counter-clockwise triangle `abc`.
/// The second component is a scale for relative degeneracy tests.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> (f64, f64) {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det =
        ad * (bdx * cdy - cdx * bdy) - bd * (adx * cdy - cdx * ady) + cd * (adx * bdy - bdx * ady);
    let scale = ad.max(bd).max(cd);
    (det, scale * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_measures() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(polygon_area(&sq), 1.0);
        assert_eq!(polygon_perimeter(&sq), 4.0);
        assert!(point_in_polygon([0.5, 0.5], &sq));
        assert!(!point_in_polygon([1.5, 0.5], &sq));
    }

    #[test]
    fn box_distance() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(box_polygon_dist([0.2, 0.2], [0.3, 0.3], &tri), 0.0);
        let d = box_polygon_dist([2.0, 0.0], [3.0, 1.0], &tri);
        assert!((d - 1.0).abs() < 1e-15);
        // box containing the whole polygon
        assert_eq!(box_polygon_dist([-1.0, -1.0], [2.0, 2.0], &tri), 0.0);
    }

    #[test]
    fn incircle_sign() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert!(incircle(a, b, c, [0.4, 0.4]).0 > 0.0);
        assert!(incircle(a, b, c, [2.0, 2.0]).0 < 0.0);
        let (det, s) = incircle(a, b, c, [1.0, 1.0]);
        assert!(det.abs() <= 1e-14 * s);
    }
}

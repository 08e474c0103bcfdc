//! Small planar-geometry helpers: convex hulls of sample clouds, membership
//! and disjointness tests, segment intersections.

pub type Pt = [f64; 2];

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull (counterclockwise, no repeated endpoint) by monotone chain.
pub fn convex_hull(pts: &[Pt]) -> Vec<Pt> {
    let mut p: Vec<Pt> = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// p inside (or within tol of) a counterclockwise convex polygon.
pub fn point_in_convex(hull: &[Pt], p: Pt, tol: f64) -> bool {
    if hull.len() < 3 {
        return false;
    }
    // scale-aware slack: cross products carry one factor of edge length
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if cross(a, b, p) < -tol * len {
            return false;
        }
    }
    true
}

/// Proper or touching intersection of segments ab and cd.
pub fn segments_intersect(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Pt, q: Pt, r: Pt| {
        cross(p, q, r) == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

/// Convex polygons disjoint: no vertex containment either way and no edge
/// crossings.
pub fn convex_disjoint(h1: &[Pt], h2: &[Pt]) -> bool {
    if h1.iter().any(|&p| point_in_convex(h2, p, 0.0))
        || h2.iter().any(|&p| point_in_convex(h1, p, 0.0))
    {
        return false;
    }
    for i in 0..h1.len() {
        for j in 0..h2.len() {
            if segments_intersect(
                h1[i],
                h1[(i + 1) % h1.len()],
                h2[j],
                h2[(j + 1) % h2.len()],
            ) {
                return false;
            }
        }
    }
    true
}

/// p strictly inside a simple (not necessarily convex) polygon, by ray
/// casting; boundary points may land on either side.
pub fn point_in_polygon(poly: &[Pt], p: Pt) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from p to a closed polygonal boundary.
pub fn dist_to_polygon(poly: &[Pt], p: Pt) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let (wx, wy) = (p[0] - a[0], p[1] - a[1]);
        let len2 = ex * ex + ey * ey;
        let t = if len2 > 0.0 { ((wx * ex + wy * ey) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let (dx, dy) = (wx - t * ex, wy - t * ey);
        best = best.min((dx * dx + dy * dy).sqrt());
    }
    best
}

/// Max pairwise distance of a point cloud.
pub fn diameter(pts: &[Pt]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[i][0] - pts[j][0];
            let dy = pts[i][1] - pts[j][1];
            d = d.max((dx * dx + dy * dy).sqrt());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = vec![
            [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0],
            [0.5, 0.5], [0.2, 0.8], [0.5, 0.0],
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(point_in_convex(&h, [0.5, 0.5], 0.0));
        assert!(!point_in_convex(&h, [1.5, 0.5], 0.0));
        assert!(point_in_convex(&h, [1.0 + 1e-12, 0.5], 1e-9));
    }

    #[test]
    fn disjointness_and_intersections() {
        let a = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let b = convex_hull(&[[2.0, 0.0], [3.0, 0.0], [3.0, 1.0], [2.0, 1.0]]);
        let c = convex_hull(&[[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]]);
        assert!(convex_disjoint(&a, &b));
        assert!(!convex_disjoint(&a, &c));
        assert!(segments_intersect([0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]));
    }

    #[test]
    fn ray_casting_on_nonconvex_polygon() {
        // L-shape
        let poly = [
            [0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0],
        ];
        assert!(point_in_polygon(&poly, [0.5, 0.5]));
        assert!(point_in_polygon(&poly, [1.5, 0.5]));
        assert!(point_in_polygon(&poly, [0.5, 1.5]));
        assert!(!point_in_polygon(&poly, [1.5, 1.5]));
        assert!(!point_in_polygon(&poly, [-0.5, 0.5]));
        assert!(!point_in_polygon(&poly, [0.5, 2.5]));
    }

    #[test]
    fn diameter_of_triangle() {
        let d = diameter(&[[0.0, 0.0], [3.0, 4.0], [1.0, 0.0]]);
        assert!((d - 5.0).abs() < 1e-15);
    }
}

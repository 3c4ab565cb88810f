//! Planar footprints and extruded-prism ray queries.

pub type Point2 = [f64; 2];

/// Corners of a rectangle centered at `center`, long axis along `heading`.
pub fn oriented_rect(center: Point2, heading: f64, length: f64, width: f64) -> [Point2; 4] {
    let (s, c) = heading.sin_cos();
    let (hl, hw) = (length / 2.0, width / 2.0);
    let corner = |a: f64, b: f64| [center[0] + a * c - b * s, center[1] + a * s + b * c];
    [
        corner(hl, hw),
        corner(-hl, hw),
        corner(-hl, -hw),
        corner(hl, -hw),
    ]
}

/// Euclidean distance from `p` to the closed rectangle; zero inside.
pub fn point_rect_distance(p: Point2, center: Point2, heading: f64, length: f64, width: f64) -> f64 {
    let (s, c) = heading.sin_cos();
    let dx = p[0] - center[0];
    let dy = p[1] - center[1];
    let along = dx * c + dy * s;
    let across = -dx * s + dy * c;
    let ex = (along.abs() - length / 2.0).max(0.0);
    let ey = (across.abs() - width / 2.0).max(0.0);
    (ex * ex + ey * ey).sqrt()
}

/// Even-odd test; boundary points may go either way.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > p[1]) != (yj > p[1]) {
            let x_cross = xj + (p[1] - yj) * (xi - xj) / (yi - yj);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Parameter intervals `[t0, t1] ⊆ [0, 1]` over which `a + t (b - a)` lies inside `poly`.
pub fn segment_inside_intervals(a: Point2, b: Point2, poly: &[Point2]) -> Vec<(f64, f64)> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut cuts = vec![0.0, 1.0];
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let e = [q[0] - p[0], q[1] - p[1]];
        let denom = d[0] * e[1] - d[1] * e[0];
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = [p[0] - a[0], p[1] - a[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let s = (w[0] * d[1] - w[1] * d[0]) / denom;
        if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&s) {
            cuts.push(t);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 1e-12 {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        if point_in_polygon([a[0] + tm * d[0], a[1] + tm * d[1]], poly) {
            match out.last_mut() {
                Some(last) if (last.1 - t0).abs() <= 1e-12 => last.1 = t1,
                _ => out.push((t0, t1)),
            }
        }
    }
    out
}

/// Smallest `t` in `[t_min, t_max]` at which the 3-D segment `a -> b` is inside
/// the prism `poly × [0, height]`.
pub fn segment_prism_entry(
    a: [f64; 3],
    b: [f64; 3],
    poly: &[Point2],
    height: f64,
    t_min: f64,
    t_max: f64,
) -> Option<f64> {
    let dz = b[2] - a[2];
    for (t0, t1) in segment_inside_intervals([a[0], a[1]], [b[0], b[1]], poly) {
        let mut lo = t0.max(t_min);
        let mut hi = t1.min(t_max);
        if lo > hi {
            continue;
        }
        // Clip to 0 <= z(t) <= height.
        if dz.abs() < 1e-15 {
            if a[2] < 0.0 || a[2] > height {
                continue;
            }
        } else {
            let ta = (0.0 - a[2]) / dz;
            let tb = (height - a[2]) / dz;
            lo = lo.max(ta.min(tb));
            hi = hi.min(ta.max(tb));
        }
        if lo <= hi {
            return Some(lo);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: [Point2; 4] = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];

    #[test]
    fn rect_distance() {
        assert_eq!(point_rect_distance([0.0, 0.0], [0.0, 0.0], 0.3, 4.0, 2.0), 0.0);
        assert!((point_rect_distance([3.0, 0.0], [0.0, 0.0], 0.0, 4.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((point_rect_distance([0.0, 3.0], [0.0, 0.0], 0.0, 4.0, 2.0) - 2.0).abs() < 1e-15);
        let d = point_rect_distance([3.0, 2.0], [0.0, 0.0], 0.0, 4.0, 2.0);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        // Rotated by 90 degrees the long axis points along y.
        let d = point_rect_distance([0.0, 3.0], [0.0, 0.0], std::f64::consts::FRAC_PI_2, 4.0, 2.0);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rect_corners() {
        let r = oriented_rect([1.0, 1.0], 0.0, 4.0, 2.0);
        assert_eq!(r[0], [3.0, 2.0]);
        assert_eq!(r[2], [-1.0, 0.0]);
    }

    #[test]
    fn segment_through_square() {
        let iv = segment_inside_intervals([-1.0, 1.0], [3.0, 1.0], &SQUARE);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 0.25).abs() < 1e-12 && (iv[0].1 - 0.75).abs() < 1e-12);
        assert!(segment_inside_intervals([-1.0, 3.0], [3.0, 3.0], &SQUARE).is_empty());
        let iv = segment_inside_intervals([1.0, 1.0], [1.0, 5.0], &SQUARE);
        assert!((iv[0].0).abs() < 1e-12 && (iv[0].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn prism_height_clipping() {
        // Passes over a 1 m tall box at 1.5 m.
        assert!(segment_prism_entry([-1.0, 1.0, 1.5], [3.0, 1.0, 1.5], &SQUARE, 1.0, 0.0, 1.0).is_none());
        // Descends into it.
        let t = segment_prism_entry([-1.0, 1.0, 2.0], [3.0, 1.0, 0.0], &SQUARE, 1.0, 0.0, 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        // Hit exists but outside the allowed parameter window.
        assert!(segment_prism_entry([-1.0, 1.0, 0.5], [3.0, 1.0, 0.5], &SQUARE, 1.0, 0.8, 1.0).is_none());
    }
}

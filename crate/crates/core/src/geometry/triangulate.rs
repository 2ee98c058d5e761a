use super::{orient, ConvexPolygon, Point2, Polygon};

/// Ear-clipping triangulation; each triangle is counterclockwise.
pub fn triangulate(p: &Polygon) -> Vec<[Point2; 3]> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    let v = p.vertices();
    let mut out = Vec::with_capacity(p.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let o = orient(&v[a], &v[b], &v[c]);
            if o == 0 {
                // straight angle: drop the vertex, no area is lost
                idx.remove(k);
                clipped = true;
                break;
            }
            if o < 0 {
                continue;
            }
            let blocked =
                idx.iter().any(|&m| m != a && m != b && m != c && in_closed_triangle(&v[a], &v[b], &v[c], &v[m]));
            if !blocked {
                out.push([v[a].clone(), v[b].clone(), v[c].clone()]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        assert!(clipped, "simple polygon always has an ear");
    }
    if orient(&v[idx[0]], &v[idx[1]], &v[idx[2]]) > 0 {
        out.push([v[idx[0]].clone(), v[idx[1]].clone(), v[idx[2]].clone()]);
    }
    out
}

fn in_closed_triangle(a: &Point2, b: &Point2, c: &Point2, p: &Point2) -> bool {
    orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0
}

/// Split into convex parts: the polygon itself when convex, otherwise a
/// triangulation with greedy merging of neighbours whose union stays convex.
pub fn convex_parts(p: &Polygon) -> Vec<ConvexPolygon> {
    if p.is_convex() {
        return ConvexPolygon::from_ccw(p.vertices().to_vec()).into_iter().collect();
    }
    let mut parts: Vec<ConvexPolygon> =
        triangulate(p).into_iter().filter_map(|t| ConvexPolygon::from_ccw(t.to_vec())).collect();
    loop {
        let mut merged = None;
        'search: for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                if shares_edge(&parts[i], &parts[j]) {
                    let mut pts = parts[i].vertices().to_vec();
                    pts.extend_from_slice(parts[j].vertices());
                    if let Some(h) = ConvexPolygon::hull(&pts) {
                        if h.area() == parts[i].area() + parts[j].area() {
                            merged = Some((i, j, h));
                            break 'search;
                        }
                    }
                }
            }
        }
        match merged {
            Some((i, j, h)) => {
                parts.swap_remove(j);
                parts[i] = h;
            }
            None => return parts,
        }
    }
}

fn shares_edge(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    a.edges().any(|(p, q)| b.edges().any(|(r, s)| p == s && q == r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, Rational};

    fn area(ts: &[[Point2; 3]]) -> Rational {
        ts.iter().map(|t| (&t[1] - &t[0]).cross(&(&t[2] - &t[0])) * frac(1, 2)).sum()
    }

    #[test]
    fn l_shape() {
        let l = Polygon::from_ints(&[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]).unwrap();
        let ts = triangulate(&l);
        assert_eq!(ts.len(), 4);
        assert_eq!(area(&ts), l.area());
        let parts = convex_parts(&l);
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn triangle_is_itself() {
        let t = Polygon::from_ints(&[(0, 0), (3, 1), (1, 2)]).unwrap();
        let ts = triangulate(&t);
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].to_vec(), t.vertices().to_vec());
    }
}

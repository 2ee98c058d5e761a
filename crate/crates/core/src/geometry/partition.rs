use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::polygon::on_segment;
use super::{ConvexPolygon, Line, Point2, Polygon};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Elementary boundary segment between two partition vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Incident cells (one on the domain boundary, two inside).
    pub cells: Vec<usize>,
}

/// Polygonal partition of a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub cells: Vec<Polygon>,
    pub edges: Vec<Edge>,
    pub vertices: Vec<Point2>,
    pub domain: Polygon,
}

impl Partition {
    /// Builds the vertex/edge structure and checks the tiling invariants.
    pub fn new(cells: Vec<Polygon>, domain: Polygon) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid("partition without cells"));
        }
        let total: Rational = cells.iter().map(|c| c.area()).sum();
        if total != domain.area() {
            return Err(Error::invalid("cell areas do not sum to the domain area"));
        }
        let (vertices, edges) = build_edges(&cells);
        if let Some(e) = edges.iter().find(|e| e.cells.len() > 2) {
            return Err(Error::invalid(format!(
                "edge {} - {} borders {} cells",
                vertices[e.a],
                vertices[e.b],
                e.cells.len()
            )));
        }
        for e in edges.iter().filter(|e| e.cells.len() == 1) {
            if !domain.on_boundary(&vertices[e.a].midpoint(&vertices[e.b])) {
                return Err(Error::invalid(format!("cells overlap or leave a gap near {}", vertices[e.a])));
            }
        }
        Ok(Partition { cells, edges, vertices, domain })
    }

    /// Partition whose domain is the union of the cells (traced from the
    /// boundary edges, which must form a single loop).
    pub fn from_cells(cells: Vec<Polygon>) -> Result<Self> {
        let (vertices, edges) = build_edges(&cells);
        let mut next: HashMap<usize, usize> = HashMap::new();
        for e in edges.iter().filter(|e| e.cells.len() == 1) {
            // orient the boundary edge as in its cell (counterclockwise)
            let cell = &cells[e.cells[0]];
            let (p, q) = (&vertices[e.a], &vertices[e.b]);
            let forward = cell
                .edges()
                .any(|(s, t)| on_segment(s, t, p) && on_segment(s, t, q) && (q - p).dot(&(t - s)) > Rational::zero());
            let (from, to) = if forward { (e.a, e.b) } else { (e.b, e.a) };
            if next.insert(from, to).is_some() {
                return Err(Error::invalid("union of cells is not a simple polygon"));
            }
        }
        let start = *next.keys().min().ok_or_else(|| Error::invalid("no boundary edges"))?;
        let mut ring = vec![start];
        let mut cur = next[&start];
        while cur != start {
            ring.push(cur);
            cur = *next.get(&cur).ok_or_else(|| Error::invalid("open boundary"))?;
            if ring.len() > next.len() {
                return Err(Error::invalid("boundary does not close"));
            }
        }
        if ring.len() != next.len() {
            return Err(Error::invalid("union of cells has more than one boundary loop"));
        }
        let pts: Vec<Point2> = ring.iter().map(|&i| vertices[i].clone()).collect();
        let domain = Polygon::new(drop_collinear(pts))?;
        Partition::new(cells, domain)
    }

    pub fn cell_area_sum(&self) -> Rational {
        self.cells.iter().map(|c| c.area()).sum()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.cells.len() == 2)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PartitionJson::from(self)).expect("partition serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&PartitionJson::from(self)).expect("partition serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PartitionJson = serde_json::from_str(s).map_err(|e| Error::invalid(format!("partition JSON: {e}")))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    domain: Vec<usize>,
}

impl From<&Partition> for PartitionJson {
    fn from(p: &Partition) -> Self {
        let mut vertices = p.vertices.clone();
        let mut index: HashMap<Point2, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut lookup = |v: &Point2| -> usize {
            *index.entry(v.clone()).or_insert_with(|| {
                vertices.push(v.clone());
                vertices.len() - 1
            })
        };
        let cells = p.cells.iter().map(|c| c.vertices().iter().map(&mut lookup).collect()).collect();
        let domain = p.domain.vertices().iter().map(&mut lookup).collect();
        PartitionJson { vertices, cells, domain }
    }
}

impl TryFrom<PartitionJson> for Partition {
    type Error = Error;
    fn try_from(raw: PartitionJson) -> Result<Self> {
        let get = |i: usize| {
            raw.vertices.get(i).cloned().ok_or_else(|| Error::invalid(format!("vertex index {i} out of range")))
        };
        let poly =
            |idx: &[usize]| -> Result<Polygon> { Polygon::new(idx.iter().map(|&i| get(i)).collect::<Result<_>>()?) };
        let cells = raw.cells.iter().map(|c| poly(c)).collect::<Result<Vec<_>>>()?;
        let domain = poly(&raw.domain)?;
        Partition::new(cells, domain)
    }
}

fn drop_collinear(mut v: Vec<Point2>) -> Vec<Point2> {
    let mut i = 0;
    while v.len() > 3 && i < v.len() {
        let n = v.len();
        if super::orient(&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]) == 0 {
            v.remove(i);
            i = 0;
        } else {
            i += 1;
        }
    }
    v
}

fn build_edges(cells: &[Polygon]) -> (Vec<Point2>, Vec<Edge>) {
    let mut vertices: Vec<Point2> = Vec::new();
    let mut index: HashMap<Point2, usize> = HashMap::new();
    for c in cells {
        for v in c.vertices() {
            index.entry(v.clone()).or_insert_with(|| {
                vertices.push(v.clone());
                vertices.len() - 1
            });
        }
    }
    let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ci, c) in cells.iter().enumerate() {
        let (lo, hi) = c.bbox();
        for (p, q) in c.edges() {
            let d = q - p;
            let len2 = d.norm2();
            let mut on: Vec<(Rational, usize)> = vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| v.x >= lo.x && v.x <= hi.x && v.y >= lo.y && v.y <= hi.y && on_segment(p, q, v))
                .map(|(i, v)| ((v - p).dot(&d) / &len2, i))
                .collect();
            on.sort();
            for w in on.windows(2) {
                let (a, b) = (w[0].1, w[1].1);
                let key = if a < b { (a, b) } else { (b, a) };
                edge_map.entry(key).or_default().push(ci);
            }
        }
    }
    let edges = edge_map.into_iter().map(|((a, b), cells)| Edge { a, b, cells }).collect();
    (vertices, edges)
}

/// Cells of a convex domain cut by a family of lines.
pub fn arrangement_partition(domain: &Polygon, lines: &[Line]) -> Result<Partition> {
    if !domain.is_convex() {
        return Err(Error::invalid("arrangement_partition needs a convex domain"));
    }
    let mut seen = Vec::new();
    for l in lines {
        let n = l.normalized();
        if seen.contains(&n) {
            return Err(Error::invalid("duplicate line in arrangement"));
        }
        seen.push(n);
    }
    let mut cells = vec![ConvexPolygon::from_polygon(domain)?];
    for l in lines {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                let (a, b) = c.split(l);
                a.into_iter().chain(b)
            })
            .collect();
    }
    let polys = cells.iter().map(|c| c.to_polygon()).collect();
    Partition::new(polys, domain.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn square(n: i64) -> Polygon {
        Polygon::from_ints(&[(0, 0), (n, 0), (n, n), (0, n)]).unwrap()
    }

    #[test]
    fn tensor_grid() {
        let p = arrangement_partition(&square(2), &[Line::int(1, 0, 1).unwrap(), Line::int(0, 1, 1).unwrap()]).unwrap();
        assert_eq!(p.cells.len(), 4);
        assert_eq!(p.vertices.len(), 9);
        assert_eq!(p.edges.len(), 12);
        assert_eq!(p.interior_edges().count(), 4);
    }

    #[test]
    fn no_lines_single_cell() {
        let p = arrangement_partition(&square(1), &[]).unwrap();
        assert_eq!(p.cells.len(), 1);
        assert_eq!(p.cell_area_sum(), int(1));
    }

    #[test]
    fn json_round_trip() {
        let p =
            arrangement_partition(&square(3), &[Line::int(1, 1, 1).unwrap(), Line::int(1, -1, 1).unwrap()]).unwrap();
        let s = p.to_json_string();
        let q = Partition::from_json_str(&s).unwrap();
        assert_eq!(q.cells, p.cells);
        assert_eq!(q.cell_area_sum(), int(9));
    }

    #[test]
    fn from_cells_traces_union() {
        let a = Polygon::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap();
        let b = Polygon::from_ints(&[(1, 0), (2, 0), (2, 1), (1, 1)]).unwrap();
        let p = Partition::from_cells(vec![a, b]).unwrap();
        assert_eq!(p.domain.len(), 4);
        assert_eq!(p.domain.area(), int(2));
    }

    #[test]
    fn overlapping_cells_rejected() {
        let a = square(2);
        let b = Polygon::from_ints(&[(1, 0), (3, 0), (3, 2), (1, 2)]).unwrap();
        let dom = Polygon::from_ints(&[(0, 0), (4, 0), (4, 2), (0, 2)]).unwrap();
        assert!(Partition::new(vec![a, b], dom).is_err());
    }
}

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::primitives::{dist, triangle_area};
use crate::{Error, Point, Result};

/// Tag carried by a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTag {
    ExteriorDirichlet,
    Obstacle,
    PeriodicMaster,
    PeriodicSlave,
}

impl EdgeTag {
    pub const ALL: [EdgeTag; 4] = [
        EdgeTag::ExteriorDirichlet,
        EdgeTag::Obstacle,
        EdgeTag::PeriodicMaster,
        EdgeTag::PeriodicSlave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::ExteriorDirichlet => "EXTERIOR_DIRICHLET",
            EdgeTag::Obstacle => "OBSTACLE",
            EdgeTag::PeriodicMaster => "PERIODIC_MASTER",
            EdgeTag::PeriodicSlave => "PERIODIC_SLAVE",
        }
    }
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EdgeTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown edge tag '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: EdgeTag,
}

/// Provenance of a mesh built by one of the meshers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MeshOrigin {
    /// Background subdivisions per cell side.
    pub subdivisions: usize,
    /// Obstacle label, `none` for an empty cell.
    pub obstacle: String,
}

/// Conforming P1 triangulation with tagged boundary edges.
///
/// Immutable after construction; [`Mesh::from_parts`] validates every
/// structural invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    /// `(slave, master)` vertex pairs.
    periodic_pairs: Vec<(usize, usize)>,
    h: f64,
    origin: Option<MeshOrigin>,
}

const PERIODIC_TOL: f64 = 1e-12;

impl Mesh {
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        periodic_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let h = triangles
            .iter()
            .filter(|t| t.iter().all(|&v| v < vertices.len()))
            .map(|t| {
                let [a, b, c] = t.map(|i| vertices[i]);
                dist(a, b).max(dist(b, c)).max(dist(c, a))
            })
            .fold(0.0, f64::max);
        let mesh = Self {
            vertices,
            triangles,
            boundary_edges,
            periodic_pairs,
            h,
            origin: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub(crate) fn with_origin(mut self, origin: MeshOrigin) -> Self {
        self.origin = Some(origin);
        self
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Geometry(format!(
                    "triangle {k} references a missing vertex"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Geometry(format!("triangle {k} repeats a vertex")));
            }
            let [a, b, c] = t.map(|i| self.vertices[i]);
            if !(triangle_area(a, b, c) > 0.0) {
                return Err(Error::Geometry(format!(
                    "triangle {k} has non-positive area"
                )));
            }
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                *count.entry(edge_key(t[e], t[(e + 1) % 3])).or_default() += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), EdgeTag> = HashMap::new();
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            if a >= nv || b >= nv || a == b {
                return Err(Error::Geometry(format!("invalid boundary edge ({a}, {b})")));
            }
            if tagged.insert(edge_key(a, b), be.tag).is_some() {
                return Err(Error::Geometry(format!(
                    "boundary edge ({a}, {b}) tagged twice"
                )));
            }
            if count.get(&edge_key(a, b)) != Some(&1) {
                return Err(Error::Geometry(format!(
                    "tagged edge ({a}, {b}) is not a boundary edge of the triangulation"
                )));
            }
        }
        for (&(a, b), &c) in &count {
            if c > 2 {
                return Err(Error::Geometry(format!(
                    "edge ({a}, {b}) shared by {c} triangles"
                )));
            }
            if c == 1 && !tagged.contains_key(&(a, b)) {
                return Err(Error::Geometry(format!(
                    "untagged boundary edge ({a}, {b})"
                )));
            }
        }
        for &(s, m) in &self.periodic_pairs {
            if s >= nv || m >= nv || s == m {
                return Err(Error::Geometry(format!("invalid periodic pair ({s}, {m})")));
            }
            let d = [
                self.vertices[s][0] - self.vertices[m][0],
                self.vertices[s][1] - self.vertices[m][1],
            ];
            let ok = |x: f64| x.abs() <= PERIODIC_TOL || (x.abs() - 1.0).abs() <= PERIODIC_TOL;
            if !(ok(d[0]) && ok(d[1])) || (d[0].abs() <= PERIODIC_TOL && d[1].abs() <= PERIODIC_TOL)
            {
                return Err(Error::Geometry(format!(
                    "periodic pair ({s}, {m}) is not a unit lattice translate"
                )));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn periodic_pairs(&self) -> &[(usize, usize)] {
        &self.periodic_pairs
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Maximum triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Option<&MeshOrigin> {
        self.origin.as_ref()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                triangle_area(a, b, c)
            })
            .sum()
    }

    pub fn edges_with_tag(&self, tag: EdgeTag) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.boundary_edges
            .iter()
            .filter(move |e| e.tag == tag)
            .map(|e| e.vertices)
    }

    pub fn tagged_length(&self, tag: EdgeTag) -> f64 {
        self.edges_with_tag(tag)
            .map(|[a, b]| dist(self.vertices[a], self.vertices[b]))
            .sum()
    }

    /// Sorted, deduplicated vertices touching an edge with `tag`.
    pub fn tagged_vertices(&self, tag: EdgeTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges_with_tag(tag).flatten().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of connected components formed by the edges carrying `tag`.
    pub fn tagged_loop_count(&self, tag: EdgeTag) -> usize {
        let verts = self.tagged_vertices(tag);
        let index: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..verts.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for [a, b] in self.edges_with_tag(tag) {
            let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..verts.len())
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }

    /// Text dump: header `mesh <nv> <nt> <nbe>` followed by `v`, `t`, `e`
    /// and `p` records. Coordinates carry 17 significant digits.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "mesh {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.16e} {:.16e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(s, "e {} {} {}", e.vertices[0], e.vertices[1], e.tag);
        }
        for (sl, ma) in &self.periodic_pairs {
            let _ = writeln!(s, "p {sl} {ma}");
        }
        s
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mesh dump".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "mesh" {
            return Err(Error::Parse(format!("bad mesh header '{header}'")));
        }
        let counts: Vec<usize> = h[1..]
            .iter()
            .map(|x| {
                x.parse()
                    .map_err(|_| Error::Parse(format!("bad count '{x}'")))
            })
            .collect::<Result<_>>()?;
        let mut vertices = Vec::with_capacity(counts[0]);
        let mut triangles = Vec::with_capacity(counts[1]);
        let mut edges = Vec::with_capacity(counts[2]);
        let mut pairs = Vec::new();
        for (lineno, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: malformed record '{line}'", lineno + 1));
            let num = |i: usize| f.get(i).and_then(|x| x.parse::<f64>().ok()).ok_or_else(bad);
            let idx = |i: usize| {
                f.get(i)
                    .and_then(|x| x.parse::<usize>().ok())
                    .ok_or_else(bad)
            };
            match f[0] {
                "v" if f.len() == 3 => vertices.push([num(1)?, num(2)?]),
                "t" if f.len() == 4 => triangles.push([idx(1)?, idx(2)?, idx(3)?]),
                "e" if f.len() == 4 => edges.push(BoundaryEdge {
                    vertices: [idx(1)?, idx(2)?],
                    tag: f[3].parse()?,
                }),
                "p" if f.len() == 3 => pairs.push((idx(1)?, idx(2)?)),
                _ => return Err(bad()),
            }
        }
        if vertices.len() != counts[0] || triangles.len() != counts[1] || edges.len() != counts[2] {
            return Err(Error::Parse("record counts do not match the header".into()));
        }
        Mesh::from_parts(vertices, triangles, edges, pairs)
    }
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

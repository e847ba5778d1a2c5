//! Triangulation of the annular gap between the staircase boundary of the
//! removed background cells and the obstacle polygon.
//!
//! Ear clipping produces a first triangulation, Lawson flips turn it into
//! the constrained Delaunay triangulation, and every group of cocircular
//! triangles is re-triangulated as a fan around its centroid. The last step
//! makes the output independent of flip order, so symmetric input yields a
//! symmetric mesh.

use std::collections::{HashMap, HashSet};

use super::mesh::edge_key;
use super::primitives::{dist, incircle, orient, point_in_polygon, segments_intersect};
use crate::{Error, Point, Result};

const DEGENERATE_TOL: f64 = 1e-10;

/// Triangulates the region inside the counter-clockwise loop `outer` and
/// outside the counter-clockwise loop `hole`. Steiner points may be appended
/// to `points`; returned triangles are counter-clockwise.
pub(crate) fn triangulate_annulus(
    points: &mut Vec<Point>,
    outer: &[usize],
    hole: &[usize],
) -> Result<Vec<[usize; 3]>> {
    let seq = bridge(points, outer, hole)?;
    let mut tris = ear_clip(points, &seq)?;
    let mut constrained: HashMap<(usize, usize), ()> = HashMap::new();
    for lp in [outer, hole] {
        for i in 0..lp.len() {
            constrained.insert(edge_key(lp[i], lp[(i + 1) % lp.len()]), ());
        }
    }
    lawson_flips(points, &mut tris, &constrained)?;
    fan_cocircular(points, &mut tris, &constrained);
    Ok(tris)
}

/// Joins the hole to the outer loop with a two-way bridge and returns the
/// resulting weakly simple counter-clockwise vertex sequence.
fn bridge(points: &[Point], outer: &[usize], hole: &[usize]) -> Result<Vec<usize>> {
    let hole_cw: Vec<usize> = hole.iter().rev().copied().collect();
    let outer_pts: Vec<Point> = outer.iter().map(|&i| points[i]).collect();
    let hole_pts: Vec<Point> = hole.iter().map(|&i| points[i]).collect();
    let edges: Vec<(usize, usize)> = [outer, hole]
        .iter()
        .flat_map(|lp| (0..lp.len()).map(move |i| (lp[i], lp[(i + 1) % lp.len()])))
        .collect();

    let mut hole_order: Vec<usize> = (0..hole_cw.len()).collect();
    hole_order.sort_by(|&a, &b| points[hole_cw[b]][0].total_cmp(&points[hole_cw[a]][0]));

    for &hk in &hole_order {
        let h = hole_cw[hk];
        let mut cand: Vec<usize> = (0..outer.len()).collect();
        cand.sort_by(|&a, &b| {
            dist(points[h], points[outer[a]]).total_cmp(&dist(points[h], points[outer[b]]))
        });
        for &ok in &cand {
            let o = outer[ok];
            let (ph, po) = (points[h], points[o]);
            let blocked = edges.iter().any(|&(a, b)| {
                if a == h || b == h || a == o || b == o {
                    return false;
                }
                segments_intersect(ph, po, points[a], points[b])
            });
            if blocked {
                continue;
            }
            let mid = [0.5 * (ph[0] + po[0]), 0.5 * (ph[1] + po[1])];
            if !point_in_polygon(mid, &outer_pts) || point_in_polygon(mid, &hole_pts) {
                continue;
            }
            let mut seq = Vec::with_capacity(outer.len() + hole.len() + 2);
            seq.extend_from_slice(&outer[..=ok]);
            for j in 0..=hole_cw.len() {
                seq.push(hole_cw[(hk + j) % hole_cw.len()]);
            }
            seq.extend_from_slice(&outer[ok..]);
            return Ok(seq);
        }
    }
    Err(Error::Geometry(
        "could not bridge the obstacle to the background grid".into(),
    ))
}

fn ear_clip(points: &[Point], seq: &[usize]) -> Result<Vec<[usize; 3]>> {
    let n = seq.len();
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    let mut remaining = n;
    let mut tris = Vec::with_capacity(n);
    let mut cur = 0;
    let mut misses = 0;

    while remaining > 3 {
        let (p, q) = (prev[cur], next[cur]);
        if is_ear(points, seq, &alive, p, cur, q) {
            tris.push([seq[p], seq[cur], seq[q]]);
            alive[cur] = false;
            next[p] = q;
            prev[q] = p;
            remaining -= 1;
            misses = 0;
            cur = p;
        } else {
            misses += 1;
            if misses > remaining {
                return Err(Error::Geometry(
                    "ear clipping of the cell gap failed".into(),
                ));
            }
            cur = q;
        }
    }
    let (p, q) = (prev[cur], next[cur]);
    let last = [seq[p], seq[cur], seq[q]];
    let [a, b, c] = last.map(|i| points[i]);
    if orient(a, b, c) <= 0.0 {
        return Err(Error::Geometry(
            "ear clipping of the cell gap failed".into(),
        ));
    }
    tris.push(last);
    Ok(tris)
}

fn is_ear(points: &[Point], seq: &[usize], alive: &[bool], p: usize, i: usize, q: usize) -> bool {
    let (ip, ii, iq) = (seq[p], seq[i], seq[q]);
    let (a, b, c) = (points[ip], points[ii], points[iq]);
    let scale = dist(a, b) * dist(b, c);
    if orient(a, b, c) <= 1e-12 * scale {
        return false;
    }
    let tol = 1e-14 * scale;
    let lo = [a[0].min(b[0]).min(c[0]), a[1].min(b[1]).min(c[1])];
    let hi = [a[0].max(b[0]).max(c[0]), a[1].max(b[1]).max(c[1])];
    for (k, &pk) in seq.iter().enumerate() {
        if !alive[k] || pk == ip || pk == ii || pk == iq {
            continue;
        }
        let x = points[pk];
        if x[0] < lo[0] || x[0] > hi[0] || x[1] < lo[1] || x[1] > hi[1] {
            continue;
        }
        if orient(a, b, x) >= -tol && orient(b, c, x) >= -tol && orient(c, a, x) >= -tol {
            return false;
        }
    }
    true
}

/// Vertex of `t` opposite the directed edge `a -> b`, if `t` contains it.
fn opposite(t: &[usize; 3], a: usize, b: usize) -> Option<usize> {
    (0..3).find_map(|k| (t[k] == a && t[(k + 1) % 3] == b).then(|| t[(k + 2) % 3]))
}

type EdgeMap = HashMap<(usize, usize), Vec<usize>>;

fn edge_map(tris: &[[usize; 3]]) -> EdgeMap {
    let mut map: EdgeMap = HashMap::new();
    for (k, t) in tris.iter().enumerate() {
        for e in 0..3 {
            map.entry(edge_key(t[e], t[(e + 1) % 3]))
                .or_default()
                .push(k);
        }
    }
    map
}

/// The two triangles on an interior edge as `(t1, t2, a, b, c, d)` with
/// `t1 = (a, b, c)` and `t2 = (b, a, d)`.
fn edge_quad(
    tris: &[[usize; 3]],
    map: &EdgeMap,
    key: (usize, usize),
) -> Option<(usize, usize, usize, usize, usize, usize)> {
    let ts = map.get(&key)?;
    if ts.len() != 2 {
        return None;
    }
    let (u, v) = key;
    let (t1, t2) = if opposite(&tris[ts[0]], u, v).is_some() {
        (ts[0], ts[1])
    } else {
        (ts[1], ts[0])
    };
    let c = opposite(&tris[t1], u, v)?;
    let d = opposite(&tris[t2], v, u)?;
    Some((t1, t2, u, v, c, d))
}

fn lawson_flips(
    points: &[Point],
    tris: &mut [[usize; 3]],
    constrained: &HashMap<(usize, usize), ()>,
) -> Result<()> {
    let mut map = edge_map(tris);
    let mut stack: Vec<(usize, usize)> = map
        .keys()
        .filter(|k| !constrained.contains_key(k))
        .copied()
        .collect();
    stack.sort_unstable();
    let limit = 100 * (tris.len() + 10) * (tris.len() + 10);
    let mut flips = 0usize;
    while let Some(key) = stack.pop() {
        if constrained.contains_key(&key) {
            continue;
        }
        let Some((t1, t2, a, b, c, d)) = edge_quad(tris, &map, key) else {
            continue;
        };
        let (det, scale) = incircle(points[a], points[b], points[c], points[d]);
        if det <= DEGENERATE_TOL * scale {
            continue;
        }
        let (pa, pb, pc, pd) = (points[a], points[b], points[c], points[d]);
        let s = dist(pc, pd).powi(2);
        if orient(pa, pd, pc) <= 1e-12 * s || orient(pd, pb, pc) <= 1e-12 * s {
            continue;
        }
        tris[t1] = [a, d, c];
        tris[t2] = [d, b, c];
        map.remove(&key);
        map.insert(edge_key(c, d), vec![t1, t2]);
        for (e, from, to) in [((a, d), t2, t1), ((b, c), t1, t2)] {
            if let Some(ts) = map.get_mut(&edge_key(e.0, e.1)) {
                for t in ts.iter_mut() {
                    if *t == from {
                        *t = to;
                    }
                }
            }
        }
        for (u, v) in [(a, d), (d, b), (b, c), (c, a)] {
            stack.push(edge_key(u, v));
        }
        flips += 1;
        if flips > limit {
            return Err(Error::Geometry("edge flipping did not terminate".into()));
        }
    }
    Ok(())
}

fn fan_cocircular(
    points: &mut Vec<Point>,
    tris: &mut Vec<[usize; 3]>,
    constrained: &HashMap<(usize, usize), ()>,
) {
    let map = edge_map(tris);
    let mut parent: Vec<usize> = (0..tris.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut keys: Vec<(usize, usize)> = map.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        if constrained.contains_key(&key) {
            continue;
        }
        let Some((t1, t2, a, b, c, d)) = edge_quad(tris, &map, key) else {
            continue;
        };
        let (det, scale) = incircle(points[a], points[b], points[c], points[d]);
        if det.abs() <= DEGENERATE_TOL * scale {
            let (r1, r2) = (find(&mut parent, t1), find(&mut parent, t2));
            if r1 != r2 {
                parent[r1.max(r2)] = r1.min(r2);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for t in 0..tris.len() {
        let r = find(&mut parent, t);
        groups.entry(r).or_default().push(t);
    }
    let mut roots: Vec<usize> = groups
        .iter()
        .filter(|(_, g)| g.len() > 1)
        .map(|(&r, _)| r)
        .collect();
    if roots.is_empty() {
        return;
    }
    roots.sort_unstable();
    let mut drop = vec![false; tris.len()];
    let mut added = Vec::new();
    for r in roots {
        let group = &groups[&r];
        let mut directed = HashSet::new();
        for &t in group {
            let tr = tris[t];
            for e in 0..3 {
                directed.insert((tr[e], tr[(e + 1) % 3]));
            }
        }
        let mut boundary: HashMap<usize, usize> = HashMap::new();
        for &t in group {
            let tr = tris[t];
            for e in 0..3 {
                let (u, v) = (tr[e], tr[(e + 1) % 3]);
                if !directed.contains(&(v, u)) {
                    boundary.insert(u, v);
                }
            }
        }
        let start = *boundary.keys().min().unwrap();
        let mut ring = vec![start];
        let mut cur = boundary[&start];
        while cur != start && ring.len() <= boundary.len() {
            ring.push(cur);
            cur = boundary[&cur];
        }
        if ring.len() != boundary.len() {
            // Not a single loop; leave the group as it is.
            continue;
        }
        let k = ring.len() as f64;
        let c = ring.iter().fold([0.0, 0.0], |acc, &i| {
            [acc[0] + points[i][0] / k, acc[1] + points[i][1] / k]
        });
        let ci = points.len();
        points.push(c);
        for &t in group {
            drop[t] = true;
        }
        for i in 0..ring.len() {
            added.push([ring[i], ring[(i + 1) % ring.len()], ci]);
        }
    }
    let mut kept: Vec<[usize; 3]> = tris
        .iter()
        .enumerate()
        .filter(|(k, _)| !drop[*k])
        .map(|(_, t)| *t)
        .collect();
    kept.extend(added);
    *tris = kept;
}

//! Periodic Voronoi tessellations and Delaunay adjacency on flat tori.
//!
//! Construction replicates the generators by the eight surrounding lattice
//! translations, triangulates the 9N planar sites, and extracts the cells of
//! the central copy as the circumcenter fans around each site. Cell polygons
//! are kept in the lift (unwrapped coordinates around their generator), so
//! every moment integral downstream is a single-polygon exact computation.

use delaunator::{triangulate, Point, EMPTY};

use crate::error::{PcvtError, Result};
use crate::torus::{GeneratorSet, TorusDomain};
use crate::vec2::Vec2;

/// Image offsets used for replication; the identity copy comes first so the
/// central sites keep indices `0..n`.
pub(crate) const OFFSETS: [(i32, i32); 9] = [
    (0, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// One Voronoi edge of a cell, in the lift around the cell's generator.
#[derive(Debug, Clone, Copy)]
pub struct CellEdge {
    /// Generator index of the adjacent cell (images identified).
    pub neighbor: usize,
    /// Lattice offset of the adjacent image copy.
    pub offset: (i32, i32),
    /// Segment endpoints, counter-clockwise along the cell boundary.
    pub a: Vec2,
    pub b: Vec2,
    /// Lift position of the adjacent generator image.
    pub neighbor_pos: Vec2,
    /// Segment length.
    pub length: f64,
}

/// Closest neighbor of a generator, resolved with the deterministic tie rule
/// (lowest index, then lexicographically smallest image offset, among
/// candidates within relative 1e-12 of the minimum distance).
#[derive(Debug, Clone, Copy)]
pub struct ClosestNeighbor {
    pub index: usize,
    pub offset: (i32, i32),
    /// Lift position of the closest image.
    pub image: Vec2,
    pub distance: f64,
}

/// The exact periodic Voronoi diagram of a generator set.
#[derive(Debug, Clone)]
pub struct PeriodicTessellation {
    n: usize,
    generators: Vec<Vec2>,
    vertex_data: Vec<Vec2>,
    vertex_ranges: Vec<(u32, u32)>,
    edge_data: Vec<CellEdge>,
    edge_ranges: Vec<(u32, u32)>,
    centroids: Vec<Vec2>,
    areas: Vec<f64>,
    perimeters: Vec<f64>,
    second_moments: Vec<f64>,
    closest: Vec<ClosestNeighbor>,
}

impl PeriodicTessellation {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Generator position (reduced into the fundamental domain).
    pub fn generator(&self, i: usize) -> Vec2 {
        self.generators[i]
    }

    pub fn generators(&self) -> &[Vec2] {
        &self.generators
    }

    /// Cell polygon in the lift, counter-clockwise.
    pub fn cell_vertices(&self, i: usize) -> &[Vec2] {
        let (s, e) = self.vertex_ranges[i];
        &self.vertex_data[s as usize..e as usize]
    }

    /// Voronoi edges of the cell, counter-clockwise.
    pub fn edges(&self, i: usize) -> &[CellEdge] {
        let (s, e) = self.edge_ranges[i];
        &self.edge_data[s as usize..e as usize]
    }

    /// Number of Voronoi edges of the cell (adjacent image copies counted
    /// individually).
    pub fn edge_count(&self, i: usize) -> usize {
        let (s, e) = self.edge_ranges[i];
        (e - s) as usize
    }

    pub fn centroid(&self, i: usize) -> Vec2 {
        self.centroids[i]
    }

    pub fn centroids(&self) -> &[Vec2] {
        &self.centroids
    }

    pub fn area(&self, i: usize) -> f64 {
        self.areas[i]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn perimeter(&self, i: usize) -> f64 {
        self.perimeters[i]
    }

    /// Exact second moment of the cell about its generator.
    pub fn second_moment(&self, i: usize) -> f64 {
        self.second_moments[i]
    }

    pub fn closest_neighbor(&self, i: usize) -> ClosestNeighbor {
        self.closest[i]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Isoperimetric ratio (perimeter squared over area) of the cell.
    pub fn isoperimetric_ratio(&self, i: usize) -> f64 {
        self.perimeters[i] * self.perimeters[i] / self.areas[i]
    }

    /// Neighbor index sets with images identified, symmetrized so that
    /// `j in set[i]` if and only if `i in set[j]`.
    pub fn neighbor_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for e in self.edges(i) {
                sets[i].push(e.neighbor);
                sets[e.neighbor].push(i);
            }
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        sets
    }

    /// Distinct generator indices adjacent to cell `i` (from its own edges).
    pub fn neighbors_of(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges(i).iter().map(|e| e.neighbor).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Delaunay edge set as unordered index pairs (images identified).
    pub fn delaunay_edges(&self) -> Vec<(usize, usize)> {
        let mut set = std::collections::BTreeSet::new();
        for i in 0..self.n {
            for e in self.edges(i) {
                set.insert((i.min(e.neighbor), i.max(e.neighbor)));
            }
        }
        set.into_iter().collect()
    }

    /// Compact signature of the Delaunay adjacency, used to detect
    /// combinatorial changes between iterates.
    pub fn adjacency_signature(&self) -> u64 {
        // FNV-1a over the per-cell edge descriptors.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        for i in 0..self.n {
            feed(i as u64 ^ 0x9e3779b97f4a7c15);
            for e in self.edges(i) {
                let off = ((e.offset.0 + 1) * 3 + (e.offset.1 + 1)) as u64;
                feed((e.neighbor as u64) << 4 | off);
            }
        }
        h
    }
}

#[inline]
fn next_halfedge(e: usize) -> usize {
    if e % 3 == 2 {
        e - 2
    } else {
        e + 1
    }
}

#[inline]
fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    let d = b - a;
    let e = c - a;
    let bl = d.norm_sq();
    let cl = e.norm_sq();
    let det = d.cross(e);
    Vec2::new(
        a.x + (e.y * bl - d.y * cl) * 0.5 / det,
        a.y + (d.x * cl - e.x * bl) * 0.5 / det,
    )
}

/// Construct the exact periodic Voronoi diagram of `gens` on `domain`.
///
/// Errors with `DegenerateInput` if two generators coincide under the torus
/// metric and with `NumericalFailure` if the planar triangulation of the
/// replicated images fails or a cell's circumscribed reach exceeds the
/// replication width.
///
/// Replication uses the eight surrounding lattice translations; image sites
/// whose circumdisks cannot influence the central copy are pruned from the
/// triangulation input. Every fan circumdisk is checked against the pruning
/// window afterwards, and the build retries with a wider window (up to the
/// full 3x3 block) whenever the check fails, so the result is always the
/// exact periodic diagram.
pub fn build_tessellation(
    domain: &TorusDomain,
    gens: &GeneratorSet,
) -> Result<PeriodicTessellation> {
    let n = gens.len();
    let mut window = (7.0 / (n as f64).sqrt()).clamp(0.05, 1.0);
    loop {
        let full = window >= 1.0;
        match build_with_window(domain, gens, window, full) {
            Ok(t) => return Ok(t),
            Err(BuildError::Fatal(e)) => return Err(e),
            Err(BuildError::Widen) => {
                debug_assert!(!full);
                window = (window * 2.0).min(1.0);
            }
        }
    }
}

enum BuildError {
    /// Report to the caller.
    Fatal(PcvtError),
    /// Retry with a wider replication window.
    Widen,
}

fn build_with_window(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    window: f64,
    full: bool,
) -> std::result::Result<PeriodicTessellation, BuildError> {
    let n = gens.len();
    let pos = gens.positions();

    // Central copy first (site index == generator index), then the image
    // copies whose lattice coordinates fall inside the extended window.
    let mut sites = Vec::with_capacity(2 * n);
    let mut site_info: Vec<(u32, u8)> = Vec::with_capacity(2 * n);
    let lat: Vec<Vec2> = pos.iter().map(|&p| domain.to_lattice(p)).collect();
    for &p in pos.iter() {
        sites.push(Point { x: p.x, y: p.y });
    }
    site_info.extend((0..n).map(|i| (i as u32, 0u8)));
    for (oi, &(du, dv)) in OFFSETS.iter().enumerate().skip(1) {
        let t = domain.translation(du, dv);
        for (i, &p) in pos.iter().enumerate() {
            let lx = lat[i].x + f64::from(du);
            let ly = lat[i].y + f64::from(dv);
            if lx >= -window && lx <= 1.0 + window && ly >= -window && ly <= 1.0 + window {
                sites.push(Point {
                    x: p.x + t.x,
                    y: p.y + t.y,
                });
                site_info.push((i as u32, oi as u8));
            }
        }
    }

    let tri = triangulate(&sites);
    if tri.triangles.is_empty() {
        return Err(if full {
            BuildError::Fatal(PcvtError::NumericalFailure(
                "planar triangulation of replicated images is empty".into(),
            ))
        } else {
            BuildError::Widen
        });
    }

    let ntri = tri.triangles.len() / 3;
    let mut ccs = Vec::with_capacity(ntri);
    for t in 0..ntri {
        let a = &sites[tri.triangles[3 * t]];
        let b = &sites[tri.triangles[3 * t + 1]];
        let c = &sites[tri.triangles[3 * t + 2]];
        ccs.push(circumcenter(
            Vec2::new(a.x, a.y),
            Vec2::new(b.x, b.y),
            Vec2::new(c.x, c.y),
        ));
    }

    // First incoming halfedge per site.
    let mut inedge = vec![EMPTY; sites.len()];
    for e in 0..tri.triangles.len() {
        let endpoint = tri.triangles[next_halfedge(e)];
        if inedge[endpoint] == EMPTY {
            inedge[endpoint] = e;
        }
    }

    let weld_tol = 1e-9 * (domain.area() / n as f64).sqrt();
    // Conservative Cartesian-to-lattice stretch factor for the reach check.
    let lat_stretch = {
        let lu = domain.to_lattice(Vec2::new(1.0, 0.0));
        let lv = domain.to_lattice(Vec2::new(0.0, 1.0));
        (lu.norm_sq() + lv.norm_sq()).sqrt()
    };

    let mut out = PeriodicTessellation {
        n,
        generators: pos.to_vec(),
        vertex_data: Vec::with_capacity(7 * n),
        vertex_ranges: Vec::with_capacity(n),
        edge_data: Vec::with_capacity(7 * n),
        edge_ranges: Vec::with_capacity(n),
        centroids: Vec::with_capacity(n),
        areas: Vec::with_capacity(n),
        perimeters: Vec::with_capacity(n),
        second_moments: Vec::with_capacity(n),
        closest: Vec::with_capacity(n),
    };

    // Scratch buffers reused across cells.
    let mut fan_cc: Vec<Vec2> = Vec::with_capacity(16);
    let mut fan_nbr: Vec<usize> = Vec::with_capacity(16);
    let mut verts: Vec<Vec2> = Vec::with_capacity(16);
    let mut nbrs: Vec<usize> = Vec::with_capacity(16);

    for i in 0..n {
        let xi = pos[i];
        let start = inedge[i];
        if start == EMPTY {
            // delaunator collapses exactly coincident points; the dropped
            // site has no incident halfedge. Identify the partner.
            if let Some(j) = (0..n)
                .find(|&j| j != i && domain.distance(pos[j], xi) < 1e-12 * domain.area().sqrt())
            {
                return Err(BuildError::Fatal(PcvtError::CoincidentGenerators {
                    i: i.min(j),
                    j: i.max(j),
                }));
            }
            if !full {
                return Err(BuildError::Widen);
            }
            return Err(BuildError::Fatal(PcvtError::NumericalFailure(format!(
                "site {i} has no incident triangles"
            ))));
        }

        // Walk the triangle fan around site i; hitting the hull means the
        // replication window was too narrow.
        fan_cc.clear();
        fan_nbr.clear();
        let mut e = start;
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > sites.len() {
                return Err(BuildError::Fatal(PcvtError::NumericalFailure(
                    "fan walk did not close".into(),
                )));
            }
            fan_cc.push(ccs[e / 3]);
            let out_he = next_halfedge(e);
            debug_assert_eq!(tri.triangles[out_he], i);
            fan_nbr.push(tri.triangles[next_halfedge(out_he)]);
            let nxt = tri.halfedges[out_he];
            if nxt == EMPTY {
                if !full {
                    return Err(BuildError::Widen);
                }
                return Err(BuildError::Fatal(PcvtError::NumericalFailure(format!(
                    "cell {i} reaches the hull of the replicated cloud"
                ))));
            }
            e = nxt;
            if e == start {
                break;
            }
        }
        let m = fan_cc.len();
        if m < 3 {
            if !full {
                return Err(BuildError::Widen);
            }
            return Err(BuildError::Fatal(PcvtError::NumericalFailure(format!(
                "cell {i} has {m} Voronoi vertices"
            ))));
        }

        // Replication-width assertion: every fan circumdisk must be empty of
        // periodic images beyond the replicated window. Fast containment
        // test first; for the full block the rare large disks get an exact
        // check against the ring of unreplicated images.
        for &cc in fan_cc.iter() {
            let r = (cc - xi).norm();
            let l = domain.to_lattice(cc);
            let rl = r * lat_stretch;
            let inside = l.x - rl > -window
                && l.x + rl < 1.0 + window
                && l.y - rl > -window
                && l.y + rl < 1.0 + window;
            if !inside {
                if !full {
                    return Err(BuildError::Widen);
                }
                let r_strict = r * (1.0 - 1e-12);
                for du in -2i32..=2 {
                    for dv in -2i32..=2 {
                        if du.abs() < 2 && dv.abs() < 2 {
                            continue;
                        }
                        let t = domain.translation(du, dv);
                        for &p in pos {
                            if (p + t - cc).norm() < r_strict {
                                return Err(BuildError::Fatal(PcvtError::NumericalFailure(
                                    format!(
                                    "cell {i}: circumscribed reach exceeds the 3x3 replication"
                                ),
                                )));
                            }
                        }
                    }
                }
            }
        }

        // Normalize the fan to counter-clockwise. Independently of the walk
        // direction, the segment [cc_k, cc_{k+1}] is dual to the Delaunay
        // edge towards nbr_k; reversing maps edge k to (m-2-k) with swapped
        // endpoints.
        verts.clear();
        nbrs.clear();
        if crate::polygon::signed_area(&fan_cc) >= 0.0 {
            verts.extend_from_slice(&fan_cc);
            nbrs.extend_from_slice(&fan_nbr);
        } else {
            for k in 0..m {
                verts.push(fan_cc[m - 1 - k]);
                nbrs.push(fan_nbr[(2 * m - 2 - k) % m]);
            }
        }

        // Fused pass: area, centroid, perimeter and second moment about the
        // generator, all in coordinates relative to the generator.
        let mut two_area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut perim = 0.0;
        let mut m12 = 0.0;
        for k in 0..m {
            let p = verts[k] - xi;
            let q = verts[(k + 1) % m] - xi;
            let w = p.cross(q);
            two_area += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
            perim += (q - p).norm();
            m12 += w * (p.norm_sq() + p.dot(q) + q.norm_sq());
        }
        if !two_area.is_finite() || two_area <= 0.0 {
            if !full {
                return Err(BuildError::Widen);
            }
            return Err(BuildError::Fatal(PcvtError::NumericalFailure(format!(
                "cell {i} has non-positive area {}",
                0.5 * two_area
            ))));
        }
        let area = 0.5 * two_area;
        let centroid = xi + Vec2::new(cx, cy) / (3.0 * two_area);
        let moment = m12 / 12.0;

        // Weld: drop zero-length Voronoi edges (cocircular degeneracies);
        // adjacency and the stored polygon use only surviving edges.
        let vstart = out.vertex_data.len() as u32;
        let estart = out.edge_data.len() as u32;
        let mut best: Option<(f64, usize, (i32, i32), Vec2)> = None;
        for k in 0..m {
            let a = verts[k];
            let b = verts[(k + 1) % m];
            let len = (b - a).norm();
            if len < weld_tol {
                continue;
            }
            let site = nbrs[k];
            let (gen_idx, off_idx) = site_info[site];
            let neighbor = gen_idx as usize;
            let offset = OFFSETS[off_idx as usize];
            debug_assert!(
                n == 1 || neighbor != i || offset != (0, 0),
                "self adjacency without an image offset"
            );
            let neighbor_pos = Vec2::new(sites[site].x, sites[site].y);
            let d = (xi - neighbor_pos).norm();
            let better = match &best {
                None => true,
                Some((bd, bi, boff, _)) => {
                    if d < bd * (1.0 - 1e-12) {
                        true
                    } else if d <= bd * (1.0 + 1e-12) {
                        (neighbor, offset) < (*bi, *boff)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((d, neighbor, offset, neighbor_pos));
            }
            out.vertex_data.push(a);
            out.edge_data.push(CellEdge {
                neighbor,
                offset,
                a,
                b,
                neighbor_pos,
                length: len,
            });
        }
        let (bd, bi, boff, bpos) = match best {
            Some(b) => b,
            None if !full => return Err(BuildError::Widen),
            None => {
                let j = (0..n)
                    .filter(|&j| j != i)
                    .min_by(|&a, &b| {
                        domain
                            .distance(pos[a], xi)
                            .partial_cmp(&domain.distance(pos[b], xi))
                            .unwrap()
                    })
                    .unwrap_or(i);
                return Err(BuildError::Fatal(PcvtError::CoincidentGenerators {
                    i: i.min(j),
                    j: i.max(j),
                }));
            }
        };

        out.vertex_ranges.push((vstart, out.vertex_data.len() as u32));
        out.edge_ranges.push((estart, out.edge_data.len() as u32));
        out.centroids.push(centroid);
        out.areas.push(area);
        out.perimeters.push(perim);
        out.second_moments.push(moment);
        out.closest.push(ClosestNeighbor {
            index: bi,
            offset: boff,
            image: bpos,
            distance: bd,
        });
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_site_cell_is_fundamental_domain() {
        let dom = TorusDomain::unit_square();
        let gens = GeneratorSet::new(&dom, vec![Vec2::new(0.3, 0.7)]).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        assert_eq!(tess.len(), 1);
        assert_relative_eq!(tess.area(0), 1.0, epsilon = 1e-12);
        let c = tess.centroid(0);
        assert_relative_eq!(c.x, 0.3, epsilon = 1e-12);
        assert_relative_eq!(c.y, 0.7, epsilon = 1e-12);
        // Unit square cell: 4 edges (diagonal contacts welded away), all
        // neighbors are images of the site itself.
        assert_eq!(tess.edge_count(0), 4);
        for e in tess.edges(0) {
            assert_eq!(e.neighbor, 0);
            assert_ne!(e.offset, (0, 0));
        }
        assert_relative_eq!(tess.perimeter(0), 4.0, epsilon = 1e-9);
        assert_eq!(tess.closest_neighbor(0).index, 0);
    }

    #[test]
    fn honeycomb_cells_are_regular_hexagons() {
        let dom = TorusDomain::hexagonal_unit_area();
        let n = 49;
        let gens = crate::torus::honeycomb_generators(&dom, 5, 3).unwrap();
        assert_eq!(gens.len(), n);
        let tess = build_tessellation(&dom, &gens).unwrap();
        for i in 0..n {
            assert_eq!(tess.edge_count(i), 6, "cell {i}");
            assert_relative_eq!(tess.area(i), 1.0 / n as f64, max_relative = 1e-10);
            assert_relative_eq!(
                tess.isoperimetric_ratio(i),
                polygon::R_HEX,
                max_relative = 1e-9
            );
            // Centroidal already.
            assert!((tess.centroid(i) - tess.generator(i)).norm() < 1e-12);
        }
        // Every neighbor set has six distinct generators.
        for s in tess.neighbor_sets() {
            assert_eq!(s.len(), 6);
        }
    }

    #[test]
    fn offset_lattice_two_cells() {
        let dom = TorusDomain::unit_square();
        let gens =
            GeneratorSet::new(&dom, vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.5)]).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        for i in 0..2 {
            assert_eq!(tess.edge_count(i), 4, "cell {i}");
            assert_relative_eq!(tess.area(i), 0.5, epsilon = 1e-12);
        }
        // Each cell's 4 edges face images of the other generator.
        for e in tess.edges(0) {
            assert_eq!(e.neighbor, 1);
        }
    }

    #[test]
    fn partition_and_membership_oracle() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gens = GeneratorSet::random(&dom, 10, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        assert_relative_eq!(tess.total_area(), 1.0, max_relative = 1e-12);

        // Brute-force nearest-site assignment agrees with point-in-cell
        // membership for a million uniform samples.
        let pos = gens.positions();
        let mut checked = 0usize;
        for _ in 0..1_000_000 {
            let y = dom.sample(&mut rng);
            let (mut best, mut best_d) = (0usize, f64::INFINITY);
            let mut second = f64::INFINITY;
            for (j, &p) in pos.iter().enumerate() {
                let d = dom.distance(y, p);
                if d < best_d {
                    second = best_d;
                    best_d = d;
                    best = j;
                } else if d < second {
                    second = d;
                }
            }
            // Skip samples too close to a bisector to classify robustly.
            if second - best_d < 1e-9 {
                continue;
            }
            checked += 1;
            // Membership: the image of y nearest the winning generator must
            // lie inside that cell's polygon.
            let xi = tess.generator(best);
            let y_img = xi + dom.min_image(y - xi);
            let poly = tess.cell_vertices(best);
            let m = poly.len();
            let inside = (0..m).all(|k| {
                let a = poly[k];
                let b = poly[(k + 1) % m];
                (b - a).cross(y_img - a) >= -1e-9
            });
            assert!(inside, "sample {y_img:?} not in cell {best}");
        }
        assert!(checked > 990_000);
    }

    #[test]
    fn adjacency_is_symmetric_with_matching_offsets() {
        let dom = TorusDomain::hexagonal_unit_area();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gens = GeneratorSet::random(&dom, 60, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        for i in 0..tess.len() {
            for e in tess.edges(i) {
                let twin = tess.edges(e.neighbor).iter().any(|f| {
                    f.neighbor == i && f.offset == (-e.offset.0, -e.offset.1)
                });
                assert!(twin, "edge {i} -> {} lacks a twin", e.neighbor);
            }
        }
        let sets = tess.neighbor_sets();
        for (i, s) in sets.iter().enumerate() {
            assert!(!s.is_empty());
            for &j in s {
                assert!(sets[j].contains(&i));
            }
        }
    }

    #[test]
    fn coincident_generators_rejected() {
        let dom = TorusDomain::unit_square();
        let p = Vec2::new(0.25, 0.75);
        let gens = GeneratorSet::new(&dom, vec![p, Vec2::new(0.6, 0.1), p]).unwrap();
        match build_tessellation(&dom, &gens) {
            Err(PcvtError::CoincidentGenerators { i: 0, j: 2 }) => {}
            other => panic!("expected CoincidentGenerators, got {other:?}"),
        }
    }

    #[test]
    fn cells_are_convex_and_contain_generators() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gens = GeneratorSet::random(&dom, 200, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        for i in 0..tess.len() {
            let poly = tess.cell_vertices(i);
            assert!(polygon::is_convex(poly, 1e-9), "cell {i} not convex");
            let xi = tess.generator(i);
            let m = poly.len();
            for k in 0..m {
                let a = poly[k];
                let b = poly[(k + 1) % m];
                assert!(
                    (b - a).cross(xi - a) > -1e-12,
                    "generator outside its own cell"
                );
            }
        }
    }

    #[test]
    fn translation_equivariance() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let gens = GeneratorSet::random(&dom, 40, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let t = Vec2::new(0.313, -0.122);
        let shifted = GeneratorSet::new(
            &dom,
            gens.positions().iter().map(|&p| p + t).collect(),
        )
        .unwrap();
        let tess2 = build_tessellation(&dom, &shifted).unwrap();
        for i in 0..tess.len() {
            assert_relative_eq!(tess.area(i), tess2.area(i), max_relative = 1e-9);
            assert_relative_eq!(tess.perimeter(i), tess2.perimeter(i), max_relative = 1e-9);
            assert_eq!(tess.edge_count(i), tess2.edge_count(i));
            assert_eq!(
                tess.closest_neighbor(i).index,
                tess2.closest_neighbor(i).index
            );
            // Centroids translate with the generators (mod torus).
            let c1 = tess.centroid(i) + t;
            let c2 = tess2.centroid(i);
            assert!(dom.distance(c1, c2) < 1e-9);
        }
        let mut n1 = tess.neighbor_sets();
        let mut n2 = tess2.neighbor_sets();
        for (a, b) in n1.iter_mut().zip(n2.iter_mut()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn duality_of_edges() {
        // Every stored Voronoi edge must lie on the bisector of its
        // generator pair.
        let dom = TorusDomain::hexagonal(1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gens = GeneratorSet::random(&dom, 30, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        for i in 0..tess.len() {
            let xi = tess.generator(i);
            for e in tess.edges(i) {
                let mid = (e.a + e.b) * 0.5;
                assert_relative_eq!(
                    (mid - xi).norm(),
                    (mid - e.neighbor_pos).norm(),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn partition_holds_up_to_n_5000() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [1usize, 2, 7, 100, 777, 5000] {
            let gens = GeneratorSet::random(&dom, n, &mut rng).unwrap();
            let tess = build_tessellation(&dom, &gens).unwrap();
            assert_relative_eq!(tess.total_area(), 1.0, max_relative = 1e-12);
        }
    }
}

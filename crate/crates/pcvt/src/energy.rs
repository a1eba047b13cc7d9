//! The quantization energy, its hexagon-normalized form, the analytic
//! gradient and sparse Hessian, and the periodic graph-Laplacian
//! preconditioner.
//!
//! The energy of a tessellation is the sum of second moments of the cells
//! about their generators. Its critical points are exactly the centroidal
//! tessellations: the gradient component at generator i is
//! `2 |V_i| (x_i - c_i)`.

use std::collections::BTreeMap;

use crate::error::{PcvtError, Result};
use crate::tessellation::PeriodicTessellation;
use crate::torus::{GeneratorSet, TorusDomain};
use crate::vec2::Vec2;

/// Density of the mass distribution over the domain.
///
/// Extension point only: every routine in this module (energies, gradients,
/// Laplacian weights) is written for the uniform density, and no other
/// variant exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Density {
    #[default]
    Uniform,
}

/// Second-moment constant of the regular hexagon: the moment of a regular
/// hexagon of area `a` about its centroid is `HEX_MOMENT_COEFF * a^2`.
pub const HEX_MOMENT_COEFF: f64 = 0.16037507477489605; // 5 / (18 sqrt(3))

/// Normalizer `F_hex`: second moment of the regular hexagon with area
/// `|domain| / n`.
pub fn f_hex(domain: &TorusDomain, n: usize) -> f64 {
    let a = domain.area() / n as f64;
    HEX_MOMENT_COEFF * a * a
}

/// Energy, per-cell energies and analytic gradient of a tessellation.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// Quantization energy (length^4 units).
    pub f: f64,
    /// Per-cell energies, summing to `f`.
    pub per_cell_f: Vec<f64>,
    /// Hexagon-normalized energy `f / (n * f_hex)`; 1 at the honeycomb.
    pub e: f64,
    /// Per-cell normalized energies `f_i / f_hex`.
    pub per_cell_e: Vec<f64>,
    /// Gradient components `2 |V_i| (x_i - c_i)` of the unscaled energy.
    pub gradient: Vec<Vec2>,
    /// The normalizer used for `e`.
    pub f_hex: f64,
}

impl EnergyReport {
    pub fn n(&self) -> usize {
        self.per_cell_f.len()
    }

    /// Gradient of the scaled energy, flattened to a 2N vector.
    pub fn grad_e_flat(&self) -> Vec<f64> {
        let s = 1.0 / (self.n() as f64 * self.f_hex);
        let mut out = Vec::with_capacity(2 * self.gradient.len());
        for g in &self.gradient {
            out.push(g.x * s);
            out.push(g.y * s);
        }
        out
    }

    /// Convergence measure `||DE|| / n` (2-norm of the scaled gradient over
    /// the number of generators).
    pub fn diff(&self) -> f64 {
        let n = self.n() as f64;
        let s = 1.0 / (n * self.f_hex);
        let sq: f64 = self.gradient.iter().map(|g| g.norm_sq()).sum();
        sq.sqrt() * s / n
    }
}

/// Evaluate energy, per-cell energies and the analytic gradient.
pub fn energy(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
) -> EnergyReport {
    debug_assert_eq!(gens.len(), tess.len());
    let n = tess.len();
    let fh = f_hex(domain, n);
    let mut per_cell_f = Vec::with_capacity(n);
    let mut per_cell_e = Vec::with_capacity(n);
    let mut gradient = Vec::with_capacity(n);
    let mut f = 0.0;
    for i in 0..n {
        let fi = tess.second_moment(i);
        f += fi;
        per_cell_f.push(fi);
        per_cell_e.push(fi / fh);
        gradient.push((tess.generator(i) - tess.centroid(i)) * (2.0 * tess.area(i)));
    }
    EnergyReport {
        f,
        per_cell_f,
        e: f / (n as f64 * fh),
        per_cell_e,
        gradient,
        f_hex: fh,
    }
}

/// Analytic gradient of the unscaled energy: `2 |V_i| (x_i - c_i)` with the
/// displacement taken in the lift.
pub fn gradient(
    _domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
) -> Vec<Vec2> {
    debug_assert_eq!(gens.len(), tess.len());
    (0..tess.len())
        .map(|i| (tess.generator(i) - tess.centroid(i)) * (2.0 * tess.area(i)))
        .collect()
}

/// Sparse Hessian of the unscaled energy, stored as 2x2 blocks on the
/// Delaunay sparsity pattern.
#[derive(Debug, Clone)]
pub struct SparseHessian {
    n: usize,
    /// Row-major 2x2 blocks [xx, xy, yx, yy] on the diagonal.
    diag: Vec<[f64; 4]>,
    /// Off-diagonal blocks for ordered pairs (i, j); symmetric by
    /// construction after assembly.
    blocks: BTreeMap<(u32, u32), [f64; 4]>,
}

impl SparseHessian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// The 2x2 block coupling generators i and j (None when structurally
    /// zero).
    pub fn block(&self, i: usize, j: usize) -> Option<[f64; 4]> {
        if i == j {
            Some(self.diag[i])
        } else {
            self.blocks.get(&(i as u32, j as u32)).copied()
        }
    }

    /// Scalar entry in the flattened (x0, y0, x1, y1, ...) ordering.
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let (i, m) = (r / 2, r % 2);
        let (j, l) = (c / 2, c % 2);
        self.block(i, j).map_or(0.0, |b| b[2 * m + l])
    }

    /// Matrix-vector product on flattened 2N vectors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut out = vec![0.0; self.dim()];
        for i in 0..self.n {
            let b = &self.diag[i];
            out[2 * i] += b[0] * x[2 * i] + b[1] * x[2 * i + 1];
            out[2 * i + 1] += b[2] * x[2 * i] + b[3] * x[2 * i + 1];
        }
        for (&(i, j), b) in &self.blocks {
            let (i, j) = (i as usize, j as usize);
            out[2 * i] += b[0] * x[2 * j] + b[1] * x[2 * j + 1];
            out[2 * i + 1] += b[2] * x[2 * j] + b[3] * x[2 * j + 1];
        }
        out
    }

    /// Dense row-major copy (for small-n spectral checks).
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = self.entry(r, c);
            }
        }
        out
    }

    pub fn off_diagonal_blocks(&self) -> impl Iterator<Item = (usize, usize, &[f64; 4])> {
        self.blocks
            .iter()
            .map(|(&(i, j), b)| (i as usize, j as usize, b))
    }
}

/// Closed-form line integrals over a boundary segment.
///
/// With `y(t) = a + t (b - a)` and affine integrands `u(t) = u0 + t w`,
/// `v(t) = v0 + t w` (where `w = a - b`), returns
/// `int_0^1 u_m(t) v_l(t) |b - a| dt` for the four component pairs as a
/// row-major 2x2 array.
#[inline]
fn segment_integral(u0: Vec2, v0: Vec2, w: Vec2, len: f64) -> [f64; 4] {
    let term = |um: f64, wm: f64, vl: f64, wl: f64| -> f64 {
        len * (um * vl + 0.5 * (um * wl + vl * wm) + wm * wl / 3.0)
    };
    [
        term(u0.x, w.x, v0.x, w.x),
        term(u0.x, w.x, v0.y, w.y),
        term(u0.y, w.y, v0.x, w.x),
        term(u0.y, w.y, v0.y, w.y),
    ]
}

/// Assemble the sparse Hessian of the unscaled energy.
///
/// The boundary integrals along each shared Voronoi edge are quadratic in
/// the arclength parameter and evaluated by exact antiderivatives; no
/// quadrature is involved. Unsupported for a single generator, whose
/// self-image adjacency degenerates the edge decomposition.
pub fn hessian(
    _domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
) -> Result<SparseHessian> {
    debug_assert_eq!(gens.len(), tess.len());
    let n = tess.len();
    if n < 2 {
        return Err(PcvtError::Unsupported(
            "hessian requires at least two generators".into(),
        ));
    }

    let mut h = SparseHessian {
        n,
        diag: vec![[0.0; 4]; n],
        blocks: BTreeMap::new(),
    };

    for i in 0..n {
        let xi = tess.generator(i);
        let area = tess.area(i);
        h.diag[i][0] += 2.0 * area;
        h.diag[i][3] += 2.0 * area;
        for e in tess.edges(i) {
            let dist = (xi - e.neighbor_pos).norm();
            let scale = 2.0 / dist;
            let w = e.a - e.b;
            let u0 = xi - e.a;
            let uu = segment_integral(u0, u0, w, e.length);
            for (d, u) in h.diag[i].iter_mut().zip(uu) {
                *d -= scale * u;
            }
            let v0 = e.neighbor_pos - e.a;
            let uv = segment_integral(u0, v0, w, e.length);
            if e.neighbor == i {
                // Self-image adjacency: the cross coupling folds into the
                // diagonal block because moving x_i moves the image too.
                for (d, u) in h.diag[i].iter_mut().zip(uv) {
                    *d += scale * u;
                }
            } else {
                let b = h
                    .blocks
                    .entry((i as u32, e.neighbor as u32))
                    .or_insert([0.0; 4]);
                for (d, u) in b.iter_mut().zip(uv) {
                    *d += scale * u;
                }
            }
        }
    }

    // Each torus edge was visited once from each side; enforce exact
    // symmetry of the assembled blocks.
    let keys: Vec<(u32, u32)> = h.blocks.keys().copied().filter(|&(i, j)| i < j).collect();
    for (i, j) in keys {
        let bij = h.blocks.get(&(i, j)).copied().unwrap_or([0.0; 4]);
        let bji = h.blocks.get(&(j, i)).copied().unwrap_or([0.0; 4]);
        let avg = [
            0.5 * (bij[0] + bji[0]),
            0.5 * (bij[1] + bji[2]),
            0.5 * (bij[2] + bji[1]),
            0.5 * (bij[3] + bji[3]),
        ];
        h.blocks.insert((i, j), avg);
        h.blocks.insert((j, i), [avg[0], avg[2], avg[1], avg[3]]);
    }
    for d in &mut h.diag {
        let xy = 0.5 * (d[1] + d[2]);
        d[1] = xy;
        d[2] = xy;
    }

    Ok(h)
}

/// Periodic graph Laplacian on the generators: off-diagonal weights are the
/// negated areas of the pyramid pairs over each shared Voronoi edge, and the
/// diagonal makes every row sum to zero. Symmetric positive semi-definite
/// with null vector 1.
#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    n: usize,
    diag: Vec<f64>,
    /// Off-diagonal entries keyed by (i, j) with i < j; value g_ij <= 0.
    off: BTreeMap<(u32, u32), f64>,
}

impl GraphLaplacian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            let key = (i.min(j) as u32, i.max(j) as u32);
            self.off.get(&key).copied().unwrap_or(0.0)
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.off
            .iter()
            .map(|(&(i, j), &g)| (i as usize, j as usize, g))
    }

    /// Matrix-vector product on N vectors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut out: Vec<f64> = (0..self.n).map(|i| self.diag[i] * x[i]).collect();
        for (&(i, j), &g) in &self.off {
            let (i, j) = (i as usize, j as usize);
            out[i] += g * x[j];
            out[j] += g * x[i];
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            out[i * self.n + i] = self.diag[i];
        }
        for (&(i, j), &g) in &self.off {
            let (i, j) = (i as usize, j as usize);
            out[i * self.n + j] = g;
            out[j * self.n + i] = g;
        }
        out
    }
}

/// Assemble the periodic graph Laplacian from the tessellation (uniform
/// density). Unsupported for a single generator.
pub fn graph_laplacian(
    _domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
) -> Result<GraphLaplacian> {
    debug_assert_eq!(gens.len(), tess.len());
    let n = tess.len();
    if n < 2 {
        return Err(PcvtError::Unsupported(
            "graph laplacian requires at least two generators".into(),
        ));
    }
    let mut off: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for i in 0..n {
        let xi = tess.generator(i);
        for e in tess.edges(i) {
            if e.neighbor == i {
                // Self-image adjacency carries no preconditioning weight.
                continue;
            }
            // Pyramid with base [a, b] and apex x_i.
            let area = 0.5 * (e.a - xi).cross(e.b - xi).abs();
            let key = (i.min(e.neighbor) as u32, i.max(e.neighbor) as u32);
            *off.entry(key).or_insert(0.0) -= area;
        }
    }
    let mut diag = vec![0.0; n];
    for (&(i, j), &g) in &off {
        diag[i as usize] += g.abs();
        diag[j as usize] += g.abs();
    }
    Ok(GraphLaplacian { n, diag, off })
}

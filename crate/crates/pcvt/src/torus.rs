//! Flat 2D torus domains and generator sets.
//!
//! A torus is the quotient of the plane by the lattice spanned by two
//! independent translation vectors. Positions are kept reduced into the
//! fundamental parallelogram; all metric queries go through the minimal
//! image among the surrounding lattice translations.

use rand::Rng;

use crate::error::{PcvtError, Result};
use crate::vec2::Vec2;

/// Shape of the fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusKind {
    /// Perpendicular translation vectors of equal length.
    SquareTorus,
    /// Equal-length translation vectors at 60 degrees; the quotient is the
    /// regular-hexagon torus.
    HexagonalTorus,
}

/// A flat torus: fundamental domain plus its two lattice translations.
#[derive(Debug, Clone, Copy)]
pub struct TorusDomain {
    lattice_u: Vec2,
    lattice_v: Vec2,
    kind: TorusKind,
    area: f64,
    // Row-major inverse of the lattice matrix [u v]; maps Cartesian
    // coordinates to lattice coordinates.
    inv: [f64; 4],
}

impl TorusDomain {
    fn from_basis(lattice_u: Vec2, lattice_v: Vec2, kind: TorusKind) -> Result<Self> {
        let det = lattice_u.cross(lattice_v);
        if !det.is_finite() || det.abs() <= 0.0 {
            return Err(PcvtError::DegenerateInput(
                "lattice vectors must be linearly independent".into(),
            ));
        }
        let inv = [
            lattice_v.y / det,
            -lattice_v.x / det,
            -lattice_u.y / det,
            lattice_u.x / det,
        ];
        Ok(TorusDomain {
            lattice_u,
            lattice_v,
            kind,
            area: det.abs(),
            inv,
        })
    }

    /// Square torus with the given side length.
    pub fn square(side: f64) -> Result<Self> {
        if !side.is_finite() || side <= 0.0 {
            return Err(PcvtError::DegenerateInput("side must be positive".into()));
        }
        Self::from_basis(
            Vec2::new(side, 0.0),
            Vec2::new(0.0, side),
            TorusKind::SquareTorus,
        )
    }

    /// Unit-area square torus.
    pub fn unit_square() -> Self {
        Self::square(1.0).expect("unit square is non-degenerate")
    }

    /// Hexagonal torus: equal-length lattice vectors at 60 degrees.
    pub fn hexagonal(side: f64) -> Result<Self> {
        if !side.is_finite() || side <= 0.0 {
            return Err(PcvtError::DegenerateInput("side must be positive".into()));
        }
        Self::from_basis(
            Vec2::new(side, 0.0),
            Vec2::new(0.5 * side, 0.5 * f64::sqrt(3.0) * side),
            TorusKind::HexagonalTorus,
        )
    }

    /// Hexagonal torus scaled to unit area.
    pub fn hexagonal_unit_area() -> Self {
        // Area of the rhombic fundamental domain is sqrt(3)/2 * side^2.
        let side = (2.0 / f64::sqrt(3.0)).sqrt();
        Self::hexagonal(side).expect("unit-area hexagonal torus is non-degenerate")
    }

    pub fn kind(&self) -> TorusKind {
        self.kind
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn lattice_u(&self) -> Vec2 {
        self.lattice_u
    }

    pub fn lattice_v(&self) -> Vec2 {
        self.lattice_v
    }

    /// Cartesian translation for integer lattice offsets.
    #[inline]
    pub fn translation(&self, du: i32, dv: i32) -> Vec2 {
        self.lattice_u * f64::from(du) + self.lattice_v * f64::from(dv)
    }

    /// Lattice coordinates of a Cartesian point.
    #[inline]
    pub fn to_lattice(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.inv[0] * p.x + self.inv[1] * p.y,
            self.inv[2] * p.x + self.inv[3] * p.y,
        )
    }

    /// Cartesian coordinates of a point in lattice coordinates.
    #[inline]
    pub fn from_lattice(&self, l: Vec2) -> Vec2 {
        self.lattice_u * l.x + self.lattice_v * l.y
    }

    /// Reduce a point into the fundamental parallelogram (lattice
    /// coordinates in `[0, 1)`).
    pub fn reduce(&self, p: Vec2) -> Vec2 {
        let l = self.to_lattice(p);
        let fx = l.x.rem_euclid(1.0);
        let fy = l.y.rem_euclid(1.0);
        // rem_euclid can return exactly 1.0 for tiny negative inputs.
        let fx = if fx >= 1.0 { fx - 1.0 } else { fx };
        let fy = if fy >= 1.0 { fy - 1.0 } else { fy };
        self.from_lattice(Vec2::new(fx, fy))
    }

    /// Minimal-image representative of a difference vector: the shortest
    /// vector among the nine translates of `d`.
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        let l = self.to_lattice(d);
        let base = Vec2::new(l.x - l.x.round(), l.y - l.y.round());
        let mut best = self.from_lattice(base);
        let mut best_sq = best.norm_sq();
        for du in -1..=1 {
            for dv in -1..=1 {
                if du == 0 && dv == 0 {
                    continue;
                }
                let cand =
                    self.from_lattice(Vec2::new(base.x + f64::from(du), base.y + f64::from(dv)));
                let sq = cand.norm_sq();
                if sq < best_sq {
                    best_sq = sq;
                    best = cand;
                }
            }
        }
        best
    }

    /// Torus metric: minimum over the nine nearest image translations of
    /// the Euclidean distance.
    pub fn distance(&self, a: Vec2, b: Vec2) -> f64 {
        self.min_image(a - b).norm()
    }

    /// Uniform sample over the fundamental domain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let s: f64 = rng.random();
        let t: f64 = rng.random();
        self.from_lattice(Vec2::new(s, t))
    }
}

/// N distinct generator positions, reduced into the fundamental domain.
///
/// Pairwise distinctness under the torus metric is not checked here (that
/// would be quadratic in N and this type is rebuilt every iteration of the
/// dynamics); it is detected and reported by `build_tessellation`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    positions: Vec<Vec2>,
}

impl GeneratorSet {
    pub fn new(domain: &TorusDomain, positions: Vec<Vec2>) -> Result<Self> {
        if positions.is_empty() {
            return Err(PcvtError::DegenerateInput(
                "generator set must contain at least one point".into(),
            ));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(PcvtError::DegenerateInput(
                "generator positions must be finite".into(),
            ));
        }
        Ok(GeneratorSet {
            positions: positions.iter().map(|&p| domain.reduce(p)).collect(),
        })
    }

    /// Uniform uncorrelated sampling of `n` generators.
    pub fn random<R: Rng + ?Sized>(domain: &TorusDomain, n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(PcvtError::DegenerateInput(
                "generator set must contain at least one point".into(),
            ));
        }
        let positions = (0..n).map(|_| domain.sample(rng)).collect();
        GeneratorSet::new(domain, positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }
}

/// Generators of the perfect triangular lattice on a hexagonal torus.
///
/// The lattice of `n = a^2 + a*b + b^2` points per fundamental domain is the
/// index-`n` triangular sublattice compatible with the torus translations;
/// its Voronoi cells tile the torus by regular hexagons.
pub fn honeycomb_generators(domain: &TorusDomain, a: u32, b: u32) -> Result<GeneratorSet> {
    if domain.kind() != TorusKind::HexagonalTorus {
        return Err(PcvtError::Unsupported(
            "honeycomb lattice requires a hexagonal torus".into(),
        ));
    }
    if a == 0 && b == 0 {
        return Err(PcvtError::DegenerateInput("a and b cannot both be zero".into()));
    }
    let (a, b) = (u64::from(a), u64::from(b));
    let n = (a * a + a * b + b * b) as usize;
    let (af, bf) = (a as f64, b as f64);
    let u = domain.lattice_u();
    let v = domain.lattice_v();
    // Sublattice basis: the torus translations expressed in it have integer
    // coefficients, and it is again triangular with spacing |u|/sqrt(n).
    let s1 = (u * (af + bf) - v * bf) / n as f64;
    let s2 = (u * bf + v * af) / n as f64;

    let mut seen = std::collections::HashSet::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    'outer: for i in 0..2 * n {
        for j in 0..2 * n {
            let p = domain.reduce(s1 * i as f64 + s2 * j as f64);
            let l = domain.to_lattice(p);
            // Key on the lattice coordinates snapped to a fine grid so that
            // coincident images deduplicate despite rounding.
            let key = (
                (l.x.rem_euclid(1.0) * 4.0 * n as f64).round() as i64 % (4 * n as i64),
                (l.y.rem_euclid(1.0) * 4.0 * n as f64).round() as i64 % (4 * n as i64),
            );
            if seen.insert(key) {
                positions.push(p);
                if positions.len() == n {
                    break 'outer;
                }
            }
        }
    }
    if positions.len() != n {
        return Err(PcvtError::NumericalFailure(format!(
            "honeycomb enumeration produced {} of {} points",
            positions.len(),
            n
        )));
    }
    GeneratorSet::new(domain, positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn areas() {
        assert_relative_eq!(TorusDomain::unit_square().area(), 1.0);
        assert_relative_eq!(TorusDomain::hexagonal_unit_area().area(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            TorusDomain::hexagonal(2.0).unwrap().area(),
            2.0 * f64::sqrt(3.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn square_wraparound_distance() {
        let dom = TorusDomain::unit_square();
        let d = dom.distance(Vec2::new(0.1, 0.5), Vec2::new(0.9, 0.5));
        assert_relative_eq!(d, 0.2, epsilon = 1e-15);
        let p = Vec2::new(0.37, 0.81);
        assert_eq!(dom.distance(p, p), 0.0);
    }

    #[test]
    fn distance_matches_wide_image_grid() {
        // Oracle: brute-force minimum over a 5x5 grid of image translations.
        for kind in [TorusDomain::unit_square(), TorusDomain::hexagonal_unit_area()] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..500 {
                let a = kind.sample(&mut rng);
                let b = kind.sample(&mut rng);
                let fast = kind.distance(a, b);
                let mut brute = f64::INFINITY;
                for du in -2..=2 {
                    for dv in -2..=2 {
                        let t = kind.translation(du, dv);
                        brute = brute.min((a - b + t).norm());
                    }
                }
                assert_relative_eq!(fast, brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reduce_is_idempotent_and_in_domain() {
        let dom = TorusDomain::hexagonal(1.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = Vec2::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let r = dom.reduce(p);
            let l = dom.to_lattice(r);
            assert!((0.0..1.0).contains(&l.x), "lattice x {}", l.x);
            assert!((0.0..1.0).contains(&l.y), "lattice y {}", l.y);
            // Same torus point.
            assert!(dom.distance(p, r) < 1e-9);
        }
    }

    #[test]
    fn degenerate_lattice_rejected() {
        assert!(TorusDomain::square(0.0).is_err());
        assert!(TorusDomain::square(f64::NAN).is_err());
    }

    #[test]
    fn honeycomb_counts_and_spacing() {
        let dom = TorusDomain::hexagonal_unit_area();
        for (a, b) in [(1u32, 0u32), (5, 3), (2, 1)] {
            let n = (a * a + a * b + b * b) as usize;
            let gens = honeycomb_generators(&dom, a, b).unwrap();
            assert_eq!(gens.len(), n);
            // Nearest-neighbor spacing of the triangular lattice with n
            // cells of area 1/n each.
            let spacing = (2.0 / (f64::sqrt(3.0) * n as f64)).sqrt();
            let pos = gens.positions();
            let mut min_d = f64::INFINITY;
            for i in 0..n {
                for j in 0..i {
                    min_d = min_d.min(dom.distance(pos[i], pos[j]));
                }
            }
            if n > 1 {
                assert_relative_eq!(min_d, spacing, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn honeycomb_requires_hex_torus() {
        assert!(honeycomb_generators(&TorusDomain::unit_square(), 2, 1).is_err());
    }
}

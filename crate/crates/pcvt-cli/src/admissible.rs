//! Honeycomb admissibility of a generator count on the hexagonal torus.

/// Result of the admissibility check `n = a^2 + a b + b^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissibleCheck {
    pub admissible: bool,
    /// A witness decomposition when admissible.
    pub decomposition: Option<(u32, u32)>,
    /// Largest admissible value strictly below `n` (none below 1).
    pub nearest_below: Option<usize>,
    /// Smallest admissible value at or above `n` (equals `n` when
    /// admissible).
    pub nearest_above: usize,
}

/// Witness `(a, b)` with `a^2 + a b + b^2 = n`, if one exists.
pub fn hex_decomposition(n: usize) -> Option<(u32, u32)> {
    let n64 = n as u64;
    let mut a = 0u64;
    while a * a <= n64 {
        // Solve b^2 + a b + (a^2 - n) = 0 for integer b >= a.
        let disc = 4 * n64 - 3 * a * a;
        let s = disc.isqrt();
        if s * s == disc && s >= a && (s - a).is_multiple_of(2) {
            let b = (s - a) / 2;
            if a * a + a * b + b * b == n64 && (a > 0 || b > 0) {
                return Some((a as u32, b as u32));
            }
        }
        a += 1;
    }
    None
}

/// Whether a perfect honeycomb with `n` cells tiles the hexagonal torus,
/// with the nearest admissible counts either side.
pub fn admissible_hex_n(n: usize) -> AdmissibleCheck {
    let decomposition = hex_decomposition(n);
    let nearest_below = (1..n).rev().find(|&m| hex_decomposition(m).is_some());
    let nearest_above = if decomposition.is_some() {
        n
    } else {
        (n + 1..).find(|&m| hex_decomposition(m).is_some()).unwrap()
    };
    AdmissibleCheck {
        admissible: decomposition.is_some(),
        decomposition,
        nearest_below,
        nearest_above,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_values() {
        let c = admissible_hex_n(973);
        assert!(c.admissible);
        let (a, b) = c.decomposition.unwrap();
        assert_eq!(
            (a as u64).pow(2) + (a as u64) * (b as u64) + (b as u64).pow(2),
            973
        );
        assert!(admissible_hex_n(2029).admissible);
        assert!(admissible_hex_n(49).admissible);
        assert!(admissible_hex_n(1).admissible);
    }

    #[test]
    fn two_is_not_admissible() {
        let c = admissible_hex_n(2);
        assert!(!c.admissible);
        assert_eq!(c.nearest_below, Some(1));
        assert_eq!(c.nearest_above, 3);
    }

    #[test]
    fn matches_exhaustive_search() {
        for n in 1..500usize {
            let brute = (0..=22u64)
                .flat_map(|a| (0..=22u64).map(move |b| (a, b)))
                .any(|(a, b)| (a, b) != (0, 0) && a * a + a * b + b * b == n as u64);
            assert_eq!(admissible_hex_n(n).admissible, brute, "n = {n}");
        }
    }
}

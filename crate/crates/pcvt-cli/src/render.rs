//! Standalone SVG rendering of periodic tessellations.
//!
//! Cells are filled on a color scale linear in their normalized energy.
//! Generators are drawn as hollow circles (red when the cell counts toward
//! R_eps), centroids as crosses. On the hexagonal torus the picture is
//! clipped to the regular-hexagon fundamental region; cells are drawn with
//! enough lattice translates to cover it.

use std::fmt::Write as _;
use std::path::Path;

use pcvt::{
    EnergyReport, PeriodicTessellation, RegularityReport, TorusDomain, TorusKind, Vec2,
};

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Color-scale range for the per-cell normalized energies; `None`
    /// spans the tessellation's own range.
    pub color_range: Option<(f64, f64)>,
    /// Output width in pixels.
    pub width: f64,
    pub draw_centroids: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            color_range: None,
            width: 720.0,
            draw_centroids: true,
        }
    }
}

// Five-stop viridis-like gradient.
const STOPS: [(f64, [f64; 3]); 5] = [
    (0.00, [0.267, 0.005, 0.329]),
    (0.25, [0.232, 0.322, 0.545]),
    (0.50, [0.128, 0.567, 0.551]),
    (0.75, [0.369, 0.788, 0.382]),
    (1.00, [0.993, 0.906, 0.144]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mut rgb = STOPS[0].1;
    for w in STOPS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t >= t0 && t <= t1 {
            let u = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + u * (c1[0] - c0[0]),
                c0[1] + u * (c1[1] - c0[1]),
                c0[2] + u * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    format!(
        "#{:02x}{:02x}{:02x}",
        (rgb[0] * 255.0).round() as u8,
        (rgb[1] * 255.0).round() as u8,
        (rgb[2] * 255.0).round() as u8
    )
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

struct Frame {
    /// viewBox in domain units: (x, y, w, h).
    view: (f64, f64, f64, f64),
    /// Optional clip polygon (the hexagonal fundamental region).
    clip: Option<Vec<Vec2>>,
    /// Translation applied to each cell before replication.
    recenter: bool,
}

fn frame(domain: &TorusDomain) -> Frame {
    match domain.kind() {
        TorusKind::SquareTorus => {
            let s = domain.lattice_u().norm();
            Frame {
                view: (0.0, 0.0, s, s),
                clip: None,
                recenter: false,
            }
        }
        TorusKind::HexagonalTorus => {
            // Wigner-Seitz cell of the lattice: a regular hexagon centered
            // at the origin with circumradius |u| / sqrt(3).
            let l = domain.lattice_u().norm();
            let r = l / f64::sqrt(3.0);
            let verts: Vec<Vec2> = (0..6)
                .map(|k| {
                    let th = std::f64::consts::FRAC_PI_6 + k as f64 * std::f64::consts::FRAC_PI_3;
                    Vec2::new(r * th.cos(), r * th.sin())
                })
                .collect();
            Frame {
                view: (-0.5 * l, -r, l, 2.0 * r),
                clip: Some(verts),
                recenter: true,
            }
        }
    }
}

/// Render a tessellation to an SVG string.
pub fn render_svg_string(
    domain: &TorusDomain,
    tess: &PeriodicTessellation,
    energy: &EnergyReport,
    regularity: &RegularityReport,
    opts: &RenderOptions,
) -> String {
    let n = tess.len();
    let fr = frame(domain);
    let (vx, vy, vw, vh) = fr.view;
    let height = opts.width * vh / vw;
    let (lo, hi) = opts.color_range.unwrap_or_else(|| {
        let lo = energy.per_cell_e.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = energy
            .per_cell_e
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    // A degenerate range (all cells at the same energy) maps to the scale
    // midpoint.
    let uniform = hi - lo <= 1e-9 * (lo.abs() + hi.abs()).max(1e-12);
    let span = if uniform { 1.0 } else { hi - lo };
    let marker = 0.0075 * vw.min(vh);
    let stroke = 0.0015 * vw.min(vh);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{} {} {} {}">"#,
        opts.width,
        height,
        fmt(vx),
        fmt(vy),
        fmt(vw),
        fmt(vh)
    );
    // Flip y so the mathematical orientation points up.
    let _ = writeln!(
        s,
        r#"<g transform="translate(0,{}) scale(1,-1)">"#,
        fmt(2.0 * vy + vh)
    );
    if let Some(clip) = &fr.clip {
        let pts: Vec<String> = clip.iter().map(|p| format!("{},{}", fmt(p.x), fmt(p.y))).collect();
        let _ = writeln!(
            s,
            r#"<defs><clipPath id="dom"><polygon points="{}"/></clipPath></defs>"#,
            pts.join(" ")
        );
        let _ = writeln!(s, r#"<g clip-path="url(#dom)">"#);
    } else {
        let _ = writeln!(s, "<g>");
    }

    // Cells, replicated by the lattice translations that intersect the view.
    for i in 0..n {
        let verts = tess.cell_vertices(i);
        let gen = tess.generator(i);
        let base_shift = if fr.recenter {
            domain.min_image(gen) - gen
        } else {
            Vec2::ZERO
        };
        let fill = if uniform {
            color(0.5)
        } else {
            color((energy.per_cell_e[i] - lo) / span)
        };
        let cx = tess.centroid(i);
        for du in -1..=1 {
            for dv in -1..=1 {
                let t = base_shift + domain.translation(du, dv);
                // Bounding-box cull against the view.
                let (mut x0, mut y0, mut x1, mut y1) =
                    (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &p in verts {
                    let q = p + t;
                    x0 = x0.min(q.x);
                    y0 = y0.min(q.y);
                    x1 = x1.max(q.x);
                    y1 = y1.max(q.y);
                }
                if x1 < vx || x0 > vx + vw || y1 < vy || y0 > vy + vh {
                    continue;
                }
                let pts: Vec<String> = verts
                    .iter()
                    .map(|&p| format!("{},{}", fmt(p.x + t.x), fmt(p.y + t.y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{}" stroke="black" stroke-width="{}"/>"#,
                    pts.join(" "),
                    fill,
                    fmt(stroke)
                );
                // Markers belong to the same translate.
                let g = gen + t;
                let gcolor = if regularity.eps_regular[i] { "red" } else { "black" };
                let _ = writeln!(
                    s,
                    r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                    fmt(g.x),
                    fmt(g.y),
                    fmt(marker),
                    gcolor,
                    fmt(stroke * 1.5)
                );
                if opts.draw_centroids {
                    let c = cx + t;
                    let m = marker;
                    let _ = writeln!(
                        s,
                        r#"<path d="M {} {} L {} {} M {} {} L {} {}" stroke="black" stroke-width="{}"/>"#,
                        fmt(c.x - m),
                        fmt(c.y - m),
                        fmt(c.x + m),
                        fmt(c.y + m),
                        fmt(c.x - m),
                        fmt(c.y + m),
                        fmt(c.x + m),
                        fmt(c.y - m),
                        fmt(stroke * 1.5)
                    );
                }
            }
        }
    }

    let _ = writeln!(s, "</g>");
    // Domain outline.
    if let Some(clip) = &fr.clip {
        let pts: Vec<String> = clip.iter().map(|p| format!("{},{}", fmt(p.x), fmt(p.y))).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
            pts.join(" "),
            fmt(stroke * 2.0)
        );
    } else {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
            fmt(vx),
            fmt(vy),
            fmt(vw),
            fmt(vh),
            fmt(stroke * 2.0)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

/// Render to a file.
pub fn render_svg(
    domain: &TorusDomain,
    tess: &PeriodicTessellation,
    energy: &EnergyReport,
    regularity: &RegularityReport,
    opts: &RenderOptions,
    path: &Path,
) -> anyhow::Result<()> {
    std::fs::write(path, render_svg_string(domain, tess, energy, regularity, opts))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcvt::{build_tessellation, energy, honeycomb_generators, regularity, GeneratorSet};

    #[test]
    fn honeycomb_renders_uniform_colors_and_red_markers() {
        let dom = TorusDomain::hexagonal_unit_area();
        let gens = honeycomb_generators(&dom, 2, 1).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = energy(&dom, &gens, &tess);
        let reg = regularity(&tess, 0.005);
        let svg = render_svg_string(&dom, &tess, &rep, &reg, &RenderOptions::default());
        // All cells share one fill color and every generator is red.
        let fills: std::collections::BTreeSet<&str> = svg
            .match_indices("fill=\"#")
            .map(|(i, _)| &svg[i + 6..i + 13])
            .collect();
        assert_eq!(fills.len(), 1, "expected a single fill color");
        assert!(svg.contains("stroke=\"red\""));
        assert!(!svg.contains("stroke=\"black\" stroke-width=\"\""));
    }

    #[test]
    fn single_cell_renders_markers_coincident() {
        let dom = TorusDomain::unit_square();
        let gens = GeneratorSet::new(&dom, vec![Vec2::new(0.5, 0.5)]).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = energy(&dom, &gens, &tess);
        let reg = regularity(&tess, 0.005);
        let svg = render_svg_string(&dom, &tess, &rep, &reg, &RenderOptions::default());
        assert!(svg.contains("<circle"));
        assert!(svg.contains("<path"));
        assert!(svg.contains("<rect"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let dom = TorusDomain::unit_square();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
        let gens = GeneratorSet::random(&dom, 12, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = energy(&dom, &gens, &tess);
        let reg = regularity(&tess, 0.005);
        let a = render_svg_string(&dom, &tess, &rep, &reg, &RenderOptions::default());
        let b = render_svg_string(&dom, &tess, &rep, &reg, &RenderOptions::default());
        assert_eq!(a, b);
    }
}

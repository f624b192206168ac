//! Deterministic SVG rendering of patches.
//!
//! All points are kept as integer multiples of 1/36 of a lattice step in axial
//! coordinates (centers, edge midpoints and corners are all on that grid), and
//! only converted to planar `x = size * (q + r/2)`, `y = size * r * sqrt(3)/2`
//! at output time with three decimals. A point shared by two cells therefore
//! prints identically from either side.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::hexgrid::{AxialCell, CornerIndex, EdgeIndex};
use crate::solver::Patch;
use crate::tilemodel::{Anchor, RuleSet, TileState};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StyleKind {
    Outline,
    Stripes,
    /// `dendrite` strokes plus a link from each center to every midpoint
    /// where a neighbor's male joint lands.
    Dendrite,
    Joints,
    Rhombi,
}

impl StyleKind {
    pub const ALL: [StyleKind; 5] = [
        StyleKind::Outline,
        StyleKind::Stripes,
        StyleKind::Dendrite,
        StyleKind::Joints,
        StyleKind::Rhombi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StyleKind::Outline => "outline",
            StyleKind::Stripes => "stripes",
            StyleKind::Dendrite => "dendrite",
            StyleKind::Joints => "joints",
            StyleKind::Rhombi => "rhombi",
        }
    }

    /// Stroke layer drawn by the motif styles.
    pub fn layer(self) -> Option<&'static str> {
        match self {
            StyleKind::Stripes => Some("stripe"),
            StyleKind::Dendrite => Some("dendrite"),
            _ => None,
        }
    }
}

impl FromStr for StyleKind {
    type Err = RenderError;
    fn from_str(s: &str) -> Result<Self, RenderError> {
        StyleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RenderError::UnknownStyle(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    pub background: String,
    pub fill: String,
    pub outline: String,
    pub stripe: String,
    pub dendrite: String,
    pub male: String,
    pub female: String,
    pub rhombi: [String; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            background: "#ffffff".into(),
            fill: "#f4f1ea".into(),
            outline: "#333333".into(),
            stripe: "#111111".into(),
            dendrite: "#c0392b".into(),
            male: "#1f5fa8".into(),
            female: "#b8b8b8".into(),
            rhombi: ["#e8c872".into(), "#7aa6c2".into(), "#c27a7a".into()],
        }
    }
}

impl Palette {
    pub const KEYS: [&'static str; 10] = [
        "background",
        "fill",
        "outline",
        "stripe",
        "dendrite",
        "male",
        "female",
        "rhombus0",
        "rhombus1",
        "rhombus2",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RenderError> {
        if value.is_empty() || !value.chars().all(|c| c.is_ascii_alphanumeric() || c == '#') {
            return Err(RenderError::BadColor(value.to_string()));
        }
        let slot = match key {
            "background" => &mut self.background,
            "fill" => &mut self.fill,
            "outline" => &mut self.outline,
            "stripe" => &mut self.stripe,
            "dendrite" => &mut self.dendrite,
            "male" => &mut self.male,
            "female" => &mut self.female,
            "rhombus0" => &mut self.rhombi[0],
            "rhombus1" => &mut self.rhombi[1],
            "rhombus2" => &mut self.rhombi[2],
            _ => return Err(RenderError::UnknownPaletteKey(key.to_string())),
        };
        *slot = value.to_string();
        Ok(())
    }

    /// Applies `key=value` pairs separated by commas.
    pub fn parse_overrides(&mut self, spec: &str) -> Result<(), RenderError> {
        for pair in spec.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| RenderError::UnknownPaletteKey(pair.to_string()))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderStyle {
    pub kind: StyleKind,
    pub size: f64,
    pub palette: Palette,
}

impl RenderStyle {
    pub fn new(kind: StyleKind) -> RenderStyle {
        RenderStyle {
            kind,
            size: 40.0,
            palette: Palette::default(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("unknown style `{0}` (expected outline, stripes, dendrite, joints or rhombi)")]
    UnknownStyle(String),
    #[error("rule set `{ruleset}` has no `{layer}` strokes")]
    MissingLayer { ruleset: String, layer: String },
    #[error("rule set `{0}` declares no male joints")]
    NoMaleJoints(String),
    #[error("cell size must be a positive finite number")]
    BadSize,
    #[error("unknown palette key `{0}`")]
    UnknownPaletteKey(String),
    #[error("bad color `{0}`")]
    BadColor(String),
    #[error("state {0} is not declared by the rule set")]
    UnknownState(String),
}

/// A point in 36ths of a lattice step, axial frame.
type Pt = (i64, i64);

const UNIT: i64 = 36;

fn center(c: AxialCell) -> Pt {
    (UNIT * c.q as i64, UNIT * c.r as i64)
}

fn midpoint(c: AxialCell, e: EdgeIndex) -> Pt {
    let d = e.direction();
    let (x, y) = center(c);
    (x + UNIT / 2 * d.q as i64, y + UNIT / 2 * d.r as i64)
}

fn corner(c: AxialCell, k: CornerIndex) -> Pt {
    let a = EdgeIndex::wrap(k.index() as i64).direction();
    let b = EdgeIndex::wrap(k.index() as i64 + 1).direction();
    let (x, y) = center(c);
    (
        x + UNIT / 3 * (a.q + b.q) as i64,
        y + UNIT / 3 * (a.r + b.r) as i64,
    )
}

fn anchor(c: AxialCell, a: Anchor) -> Pt {
    match a {
        Anchor::Center => center(c),
        Anchor::Midpoint(e) => midpoint(c, e),
    }
}

struct Canvas {
    size: f64,
    out: String,
}

impl Canvas {
    fn xy(&self, p: Pt) -> (String, String) {
        let (a, b) = (p.0 as f64 / UNIT as f64, p.1 as f64 / UNIT as f64);
        let x = self.size * (a + b / 2.0);
        let y = self.size * (b * 3f64.sqrt() / 2.0);
        (fmt3(x), fmt3(y))
    }

    fn polygon(&mut self, pts: &[Pt], attrs: &str) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.xy(*p);
            let _ = write!(d, "{}{x} {y} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(self.out, "<path {attrs} d=\"{d}\"/>");
    }

    fn line(&mut self, a: Pt, b: Pt, attrs: &str) {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let _ = writeln!(
            self.out,
            "<line {attrs} x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\"/>"
        );
    }
}

/// Fixed three-decimal formatting without a negative zero.
fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn hexagon(c: AxialCell) -> Vec<Pt> {
    CornerIndex::ALL.iter().map(|&k| corner(c, k)).collect()
}

fn check(rs: &RuleSet, style: &RenderStyle) -> Result<(), RenderError> {
    if !(style.size.is_finite() && style.size > 0.0) {
        return Err(RenderError::BadSize);
    }
    if let Some(layer) = style.kind.layer() {
        if !rs.has_layer(layer) {
            return Err(RenderError::MissingLayer {
                ruleset: rs.name().to_string(),
                layer: layer.to_string(),
            });
        }
    }
    if style.kind == StyleKind::Joints && !rs.has_male_edges() {
        return Err(RenderError::NoMaleJoints(rs.name().to_string()));
    }
    Ok(())
}

fn view_box(cells: &[AxialCell], size: f64) -> (f64, f64, f64, f64) {
    if cells.is_empty() {
        return (0.0, 0.0, size, size);
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &c in cells {
        for p in hexagon(c) {
            let (a, b) = (p.0 as f64 / UNIT as f64, p.1 as f64 / UNIT as f64);
            let (x, y) = (size * (a + b / 2.0), size * b * 3f64.sqrt() / 2.0);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    let pad = size * 0.25;
    (x0 - pad, y0 - pad, x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad)
}

fn draw(
    tiles: &[(AxialCell, usize)],
    frame: &[AxialCell],
    rs: &RuleSet,
    style: &RenderStyle,
) -> String {
    let pal = &style.palette;
    let by_cell: BTreeMap<AxialCell, usize> = tiles.iter().copied().collect();
    let (vx, vy, vw, vh) = view_box(frame, style.size);
    let mut cv = Canvas {
        size: style.size,
        out: String::new(),
    };
    let _ = writeln!(cv.out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        cv.out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" data-style=\"{}\" \
         viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">",
        style.kind.name(),
        fmt3(vx),
        fmt3(vy),
        fmt3(vw),
        fmt3(vh),
        fmt3(vw),
        fmt3(vh)
    );
    let _ = writeln!(
        cv.out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
        fmt3(vx),
        fmt3(vy),
        fmt3(vw),
        fmt3(vh),
        pal.background
    );
    let width = fmt3(style.size * 0.03);
    let _ = writeln!(
        cv.out,
        "<g class=\"cells\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{width}\">",
        pal.fill, pal.outline
    );
    for &(c, id) in tiles {
        match style.kind {
            StyleKind::Rhombi => {
                let o = rs.state(id).orientation as i64;
                let _ = writeln!(cv.out, "<g class=\"tile\" data-cell=\"{},{}\">", c.q, c.r);
                for i in 0..3i64 {
                    let ks = [o + 2 * i, o + 2 * i + 1, o + 2 * i + 2];
                    let mut pts = vec![center(c)];
                    pts.extend(ks.iter().map(|&k| corner(c, CornerIndex::wrap(k))));
                    let attrs = format!("class=\"rhombus\" fill=\"{}\"", pal.rhombi[i as usize]);
                    cv.polygon(&pts, &attrs);
                }
                cv.out.push_str("</g>\n");
            }
            _ => {
                let attrs = format!("class=\"cell\" data-cell=\"{},{}\"", c.q, c.r);
                cv.polygon(&hexagon(c), &attrs);
            }
        }
    }
    cv.out.push_str("</g>\n");
    if let Some(layer) = style.kind.layer() {
        let color = if layer == "stripe" {
            &pal.stripe
        } else {
            &pal.dendrite
        };
        let w = fmt3(style.size * 0.12);
        let _ = writeln!(
            cv.out,
            "<g class=\"motif\" data-layer=\"{layer}\" stroke=\"{color}\" stroke-width=\"{w}\" stroke-linecap=\"round\">"
        );
        for &(c, id) in tiles {
            let _ = writeln!(
                cv.out,
                "<g class=\"strokes\" data-cell=\"{},{}\">",
                c.q, c.r
            );
            for s in rs.strokes(id).filter(|s| s.layer == layer) {
                cv.line(anchor(c, s.from), anchor(c, s.to), "class=\"stroke\"");
            }
            if style.kind == StyleKind::Dendrite {
                // joints received from neighbors, so the tree reads as one
                // continuous line through the shared midpoints
                for e in EdgeIndex::ALL {
                    let n = c.neighbor(e);
                    let into_c = by_cell
                        .get(&n)
                        .is_some_and(|&m| rs.state_info(m).male == Some(e.opposite()));
                    if into_c {
                        cv.line(center(c), midpoint(c, e), "class=\"link\"");
                    }
                }
            }
            cv.out.push_str("</g>\n");
        }
        cv.out.push_str("</g>\n");
    }
    if style.kind == StyleKind::Joints {
        let w = fmt3(style.size * 0.1);
        let _ = writeln!(
            cv.out,
            "<g class=\"joints\" stroke-width=\"{w}\" stroke-linecap=\"butt\">"
        );
        for &(c, id) in tiles {
            let male = rs.state_info(id).male;
            let _ = writeln!(cv.out, "<g class=\"tile\" data-cell=\"{},{}\">", c.q, c.r);
            for e in EdgeIndex::ALL {
                let a = corner(c, CornerIndex::wrap(e.index() as i64 - 1));
                let b = corner(c, CornerIndex::wrap(e.index() as i64));
                // pull the joint marks slightly inside the cell
                let inset = |p: Pt| {
                    let z = center(c);
                    (z.0 + (p.0 - z.0) / 6 * 5, z.1 + (p.1 - z.1) / 6 * 5)
                };
                let attrs = if male == Some(e) {
                    format!("class=\"male\" data-edge=\"{e}\" stroke=\"{}\"", pal.male)
                } else {
                    format!(
                        "class=\"female\" data-edge=\"{e}\" stroke=\"{}\"",
                        pal.female
                    )
                };
                cv.line(inset(a), inset(b), &attrs);
            }
            cv.out.push_str("</g>\n");
        }
        cv.out.push_str("</g>\n");
    }
    cv.out.push_str("</svg>\n");
    cv.out
}

/// Renders every assigned cell of `p` in `(q, r)` order.
pub fn render_svg(p: &Patch, style: &RenderStyle) -> Result<String, RenderError> {
    let rs = p.ruleset();
    check(rs, style)?;
    let tiles: Vec<(AxialCell, usize)> = p.tile_ids().collect();
    let frame: Vec<AxialCell> = if tiles.is_empty() {
        p.region().cells().iter().copied().collect()
    } else {
        tiles.iter().map(|t| t.0).collect()
    };
    Ok(draw(&tiles, &frame, rs, style))
}

/// Renders one tile centered at the origin.
pub fn render_tile(
    s: &TileState,
    rs: &Arc<RuleSet>,
    style: &RenderStyle,
) -> Result<String, RenderError> {
    check(rs, style)?;
    let id = rs
        .state_id(s)
        .ok_or_else(|| RenderError::UnknownState(s.to_string()))?;
    let frame = [AxialCell::ORIGIN];
    Ok(draw(&[(AxialCell::ORIGIN, id)], &frame, rs, style))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexgrid::Region;
    use crate::tilemodel::shipped;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn corners_sit_between_edge_midpoints() {
        let c = AxialCell::new(1, -2);
        for k in CornerIndex::ALL {
            let p = corner(c, k);
            let z = center(c);
            // |corner - center| in the planar frame is 1/sqrt(3) lattice steps
            let (a, b) = (
                (p.0 - z.0) as f64 / UNIT as f64,
                (p.1 - z.1) as f64 / UNIT as f64,
            );
            let r2 = (a + b / 2.0).powi(2) + (b * 3f64.sqrt() / 2.0).powi(2);
            assert!((r2 - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighbors_share_corners() {
        let a = AxialCell::ORIGIN;
        let b = a.neighbor(EdgeIndex::wrap(0));
        assert_eq!(
            corner(a, CornerIndex::wrap(0)),
            corner(b, CornerIndex::wrap(2))
        );
        assert_eq!(
            corner(a, CornerIndex::wrap(5)),
            corner(b, CornerIndex::wrap(3))
        );
    }

    #[test]
    fn style_names_round_trip() {
        for k in StyleKind::ALL {
            assert_eq!(k.name().parse::<StyleKind>().unwrap(), k);
        }
        assert_eq!(
            "sepia".parse::<StyleKind>(),
            Err(RenderError::UnknownStyle("sepia".into()))
        );
    }

    #[test]
    fn empty_and_single_outline() {
        let rs = Arc::new(shipped("unmarked").unwrap());
        let p = Patch::new(Region::hex(1), rs.clone());
        let svg = render_svg(&p, &RenderStyle::new(StyleKind::Outline)).unwrap();
        assert_eq!(count(&svg, "<path "), 0);
        let svg = render_tile(rs.state(0), &rs, &RenderStyle::new(StyleKind::Outline)).unwrap();
        assert_eq!(count(&svg, "<path "), 1);
    }

    #[test]
    fn motif_style_needs_layer() {
        let rs = Arc::new(shipped("unmarked").unwrap());
        let err = render_tile(rs.state(0), &rs, &RenderStyle::new(StyleKind::Stripes)).unwrap_err();
        assert!(matches!(err, RenderError::MissingLayer { .. }));
        let st = Arc::new(shipped("st12").unwrap());
        let err = render_tile(st.state(0), &st, &RenderStyle::new(StyleKind::Joints)).unwrap_err();
        assert!(matches!(err, RenderError::NoMaleJoints(_)));
    }

    #[test]
    fn hextoo6_tile_has_one_male_edge() {
        let rs = Arc::new(shipped("hextoo6").unwrap());
        for s in rs.states() {
            let svg = render_tile(s, &rs, &RenderStyle::new(StyleKind::Joints)).unwrap();
            assert_eq!(count(&svg, "class=\"male\""), 1);
            assert_eq!(count(&svg, "class=\"female\""), 5);
        }
    }

    #[test]
    fn rhombi_three_per_tile() {
        let rs = Arc::new(shipped("st12").unwrap());
        let svg = render_tile(rs.state(3), &rs, &RenderStyle::new(StyleKind::Rhombi)).unwrap();
        assert_eq!(count(&svg, "class=\"rhombus\""), 3);
    }

    #[test]
    fn palette_overrides() {
        let mut p = Palette::default();
        p.parse_overrides("male=#ff0000,rhombus2=teal").unwrap();
        assert_eq!(p.male, "#ff0000");
        assert_eq!(p.rhombi[2], "teal");
        assert!(p.parse_overrides("nope=#000").is_err());
        assert!(p.parse_overrides("male=\"x").is_err());
    }

    #[test]
    fn fmt3_has_no_negative_zero() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(1.23456), "1.235");
    }
}

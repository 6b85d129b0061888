//! SVG and text output for layout trees.
//!
//! Sequences place chevrons left to right, parallel blocks are stacked inside
//! an enclosing chevron, leaves are filled with the color of their label.
//! Leaf width is fixed; chevrons encode order, never duration.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::layout::{escape_label, LayoutTree};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    /// Height of one leaf row.
    pub unit_height: f64,
    /// Depth of the chevron point and notch.
    pub chevron_indent: f64,
    /// Gap between neighbouring and nested chevrons.
    pub padding: f64,
    pub leaf_width: f64,
    pub palette_seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            unit_height: 30.0,
            chevron_indent: 9.0,
            padding: 5.0,
            leaf_width: 60.0,
            palette_seed: 0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("unit_height", self.unit_height),
            ("chevron_indent", self.chevron_indent),
            ("padding", self.padding),
            ("leaf_width", self.leaf_width),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if self.leaf_width <= 2.0 * self.chevron_indent {
            return Err(Error::InvalidConfig("leaf_width must exceed twice the indent".into()));
        }
        Ok(())
    }
}

const PALETTE: [&str; 16] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#3f8f8b", "#86bcb6", "#d37295", "#8cd17d", "#b6992d", "#499894", "#a0cbe8",
];
const FALLBACK_FILL: &str = "#e6e6e6";
const SHADES: [&str; 3] = ["#f4f4f4", "#e2e2e2", "#d0d0d0"];
const CHAR_WIDTH: f64 = 7.0;
const FONT_SIZE: f64 = 12.0;

/// FNV-1a over the seed and the label.
fn label_hash(label: &str, seed: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(label.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Fill color of a label for the given palette seed.
pub fn label_color(label: &str, seed: u64) -> &'static str {
    PALETTE[(label_hash(label, seed) % PALETTE.len() as u64) as usize]
}

fn text_color(fill: &str) -> &'static str {
    let channel = |i: usize| u8::from_str_radix(&fill[i..i + 2], 16).unwrap_or(0) as f64;
    let luma = 0.299 * channel(1) + 0.587 * channel(3) + 0.114 * channel(5);
    if luma < 140.0 {
        "#ffffff"
    } else {
        "#1a1a1a"
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Painter<'a> {
    cfg: &'a RenderConfig,
    out: String,
}

impl Painter<'_> {
    fn fallback_text(labels: &[std::sync::Arc<str>]) -> String {
        labels.iter().map(|l| &**l).collect::<Vec<_>>().join(", ")
    }

    /// Natural (width, height) of a subtree.
    fn size(&self, t: &LayoutTree) -> (f64, f64) {
        let c = self.cfg;
        match t {
            LayoutTree::Leaf(_) => (c.leaf_width, c.unit_height),
            LayoutTree::Fallback(ls) => {
                let text = Self::fallback_text(ls).chars().count() as f64 * CHAR_WIDTH;
                (c.leaf_width.max(text + 2.0 * (c.chevron_indent + c.padding)), c.unit_height)
            }
            LayoutTree::Sequence(children) => {
                let sizes: Vec<_> = children.iter().map(|ch| self.size(ch)).collect();
                let w = sizes.iter().map(|s| s.0).sum::<f64>() + c.padding * (sizes.len() - 1) as f64;
                let h = sizes.iter().map(|s| s.1).fold(0.0, f64::max);
                (w, h)
            }
            LayoutTree::Parallel(children) => {
                let sizes: Vec<_> = children.iter().map(|ch| self.size(ch)).collect();
                let w = sizes.iter().map(|s| s.0).fold(0.0, f64::max);
                let h = sizes.iter().map(|s| s.1).sum::<f64>() + c.padding * (sizes.len() - 1) as f64;
                (w + 2.0 * (c.chevron_indent + c.padding), h + 2.0 * c.padding)
            }
        }
    }

    fn chevron(&mut self, class: &str, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let d = self.cfg.chevron_indent;
        let mid = y + h / 2.0;
        let _ = writeln!(
            self.out,
            r##"<polygon class="{class}" points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="{fill}" stroke="#b3b3b3" stroke-width="1"/>"##,
            x, y, x + w - d, y, x + w, mid, x + w - d, y + h, x, y + h, x + d, mid
        );
    }

    fn text(&mut self, x: f64, y: f64, h: f64, content: &str, fill: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{:.1}" y="{:.1}" fill="{fill}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            x,
            y + h / 2.0,
            xml_escape(content)
        );
    }

    fn draw(&mut self, t: &LayoutTree, x: f64, y: f64, w: f64, h: f64, depth: usize) {
        let c = self.cfg.clone();
        match t {
            LayoutTree::Leaf(label) => {
                let fill = label_color(label, c.palette_seed);
                let _ = writeln!(self.out, r#"<g class="leaf">"#);
                self.chevron("chevron", x, y, w, h, fill);
                self.text(x + w / 2.0 + c.chevron_indent / 2.0, y, h, label, text_color(fill));
                self.out.push_str("</g>\n");
            }
            LayoutTree::Fallback(labels) => {
                let _ = writeln!(self.out, r#"<g class="fallback">"#);
                self.chevron("chevron", x, y, w, h, FALLBACK_FILL);
                self.text(
                    x + w / 2.0 + c.chevron_indent / 2.0,
                    y,
                    h,
                    &Self::fallback_text(labels),
                    "#1a1a1a",
                );
                self.out.push_str("</g>\n");
            }
            LayoutTree::Sequence(children) => {
                let sizes: Vec<_> = children.iter().map(|ch| self.size(ch)).collect();
                let natural = sizes.iter().map(|s| s.0).sum::<f64>() + c.padding * (sizes.len() - 1) as f64;
                let extra = (w - natural).max(0.0) / children.len() as f64;
                let _ = writeln!(self.out, r#"<g class="seq">"#);
                let mut cx = x;
                for (child, (cw, _)) in children.iter().zip(&sizes) {
                    self.draw(child, cx, y, cw + extra, h, depth);
                    cx += cw + extra + c.padding;
                }
                self.out.push_str("</g>\n");
            }
            LayoutTree::Parallel(children) => {
                let sizes: Vec<_> = children.iter().map(|ch| self.size(ch)).collect();
                let inner_x = x + c.chevron_indent + c.padding;
                let inner_w = w - 2.0 * (c.chevron_indent + c.padding);
                let natural = sizes.iter().map(|s| s.1).sum::<f64>() + c.padding * (sizes.len() - 1) as f64;
                let extra = (h - 2.0 * c.padding - natural).max(0.0) / children.len() as f64;
                let _ = writeln!(self.out, r#"<g class="par">"#);
                self.chevron("enclosure", x, y, w, h, SHADES[depth % SHADES.len()]);
                let mut cy = y + c.padding;
                for (child, (_, ch)) in children.iter().zip(&sizes) {
                    self.draw(child, inner_x, cy, inner_w, ch + extra, depth + 1);
                    cy += ch + extra + c.padding;
                }
                self.out.push_str("</g>\n");
            }
        }
    }
}

/// Renders a layout tree as a standalone SVG 1.1 document.
pub fn render_svg(tree: &LayoutTree, config: &RenderConfig) -> Result<String> {
    config.validate()?;
    let mut painter = Painter {
        cfg: config,
        out: String::new(),
    };
    let (w, h) = painter.size(tree);
    let margin = config.padding;
    let (doc_w, doc_h) = (w + 2.0 * margin, h + 2.0 * margin);
    let _ = writeln!(painter.out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        painter.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{doc_w:.1}" height="{doc_h:.1}" viewBox="0 0 {doc_w:.1} {doc_h:.1}" font-family="sans-serif" font-size="{FONT_SIZE}">"#
    );
    let _ = writeln!(painter.out, r#"<g class="variant">"#);
    painter.draw(tree, margin, margin, w, h, 0);
    painter.out.push_str("</g>\n</svg>\n");
    Ok(painter.out)
}

/// Compact notation: `seq(..)`, `par(..)`, `unordered{..}`, labels escaped
/// as in canonical keys. Children appear in render order.
pub fn render_text(tree: &LayoutTree) -> String {
    let mut out = String::new();
    write_text(tree, &mut out);
    out
}

fn write_text(tree: &LayoutTree, out: &mut String) {
    let (open, close, children) = match tree {
        LayoutTree::Leaf(l) => {
            out.push_str(&escape_label(l));
            return;
        }
        LayoutTree::Fallback(ls) => {
            out.push_str("unordered{");
            for (i, l) in ls.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&escape_label(l));
            }
            out.push('}');
            return;
        }
        LayoutTree::Sequence(c) => ("seq(", ')', c),
        LayoutTree::Parallel(c) => ("par(", ')', c),
    };
    out.push_str(open);
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_text(child, out);
    }
    out.push(close);
}

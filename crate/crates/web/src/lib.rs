//! Browser bindings for the variant pipeline.
//!
//! Each exported function takes plain text or numbers and returns a JSON
//! string; the pure `*_json` functions behind them are usable natively.

use serde::Serialize;
use serde_json::{json, Value};
use vw_core::ingest::{group_by_case, parse_csv, ColumnMapping};
use vw_core::layout::VariantTable;
use vw_core::order::Vertex;
use vw_core::render::{render_svg, render_text, RenderConfig};
use vw_core::synth::{generate_log, GeneratorSpec};
use vw_core::{build_layout, canonical_form, find_cut, variant_table, EventLog, IntervalOrder, LayoutTree, Timestamp};
use wasm_bindgen::prelude::*;

/// Variants drawn as SVG in the gallery; the rest are listed without a drawing.
pub const MAX_DRAWN: usize = 50;
const MINUTE_MICROS: f64 = 60_000_000.0;

#[derive(Serialize)]
struct DrawnVariant {
    key: String,
    count: usize,
    has_fallback: bool,
    text: String,
    svg: Option<String>,
}

fn config(seed: u64) -> RenderConfig {
    RenderConfig {
        palette_seed: seed,
        ..RenderConfig::default()
    }
}

fn svg(tree: &LayoutTree, seed: u64) -> Result<String, String> {
    render_svg(tree, &config(seed)).map_err(|e| e.to_string())
}

fn gallery(log: &EventLog, seed: u64) -> Result<Value, String> {
    let table: VariantTable = variant_table(log);
    let mut variants = Vec::with_capacity(table.len());
    for (rank, e) in table.ranked().into_iter().enumerate() {
        variants.push(DrawnVariant {
            key: e.key.clone(),
            count: e.count,
            has_fallback: e.has_fallback,
            text: render_text(&e.layout),
            svg: if rank < MAX_DRAWN { Some(svg(&e.layout, seed)?) } else { None },
        });
    }
    let warnings: Vec<String> = log
        .warnings()
        .iter()
        .map(|w| format!("{}: {}", w.location, w.message))
        .collect();
    Ok(json!({
        "cases": group_by_case(log).len(),
        "instances": log.len(),
        "variant_count": table.len(),
        "fallback_variants": table.fallback_variants(),
        "warnings": warnings,
        "variants": variants,
    }))
}

/// Variant gallery of a CSV log in the default column layout.
pub fn variants_from_csv_json(csv: &str, seed: u64) -> Result<String, String> {
    let log = parse_csv(csv.as_bytes(), &ColumnMapping::default()).map_err(|e| e.to_string())?;
    Ok(gallery(&log, seed)?.to_string())
}

/// Parses lines of `label start end`, times in minutes. Blank lines and
/// lines starting with `#` are ignored; labels may contain spaces.
pub fn parse_intervals(spec: &str) -> Result<Vec<Vertex>, String> {
    let mut vertices = Vec::new();
    for (n, line) in spec.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split([' ', '\t', ',']).filter(|f| !f.is_empty()).collect();
        if fields.len() < 3 {
            return Err(format!("line {}: expected `label start end`", n + 1));
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("line {}: {s:?} is not a number", n + 1))
        };
        let start = number(fields[fields.len() - 2])?;
        let end = number(fields[fields.len() - 1])?;
        if start > end {
            return Err(format!("line {}: start {start} is after end {end}", n + 1));
        }
        let label = fields[..fields.len() - 2].join(" ");
        let at = |m: f64| Timestamp::from_micros((m * MINUTE_MICROS).round() as i64);
        vertices.push(Vertex::new(vertices.len() as u64, label, at(start), at(end)));
    }
    if vertices.is_empty() {
        return Err("no intervals given".into());
    }
    Ok(vertices)
}

/// Layout, top-level cut and drawing of a single hand-written trace.
pub fn layout_from_intervals_json(spec: &str, seed: u64) -> Result<String, String> {
    let order = IntervalOrder::from_vertices(parse_intervals(spec)?).map_err(|e| e.to_string())?;
    let tree = build_layout(&order).map_err(|e| e.to_string())?;
    let cut = find_cut(&order).map_err(|e| e.to_string())?;
    let label = |id: vw_core::InstanceId| {
        let v = &order.vertices()[order.position(id).expect("cut ids belong to the order")];
        format!("{}#{}", v.label, id.0)
    };
    let groups: Vec<Vec<String>> = cut.groups.iter().map(|g| g.iter().map(|&id| label(id)).collect()).collect();
    let edges: Vec<[String; 2]> = order.edges().map(|(a, b)| [label(a), label(b)]).collect();
    Ok(json!({
        "text": render_text(&tree),
        "key": canonical_form(&tree),
        "has_fallback": tree.has_fallback(),
        "cut": { "kind": cut.kind, "groups": groups },
        "edges": edges,
        "svg": svg(&tree, seed)?,
    })
    .to_string())
}

/// Variant gallery of a seeded synthetic log.
pub fn synthetic_variants_json(
    templates: usize,
    traces_per_template: usize,
    instances: usize,
    density: f64,
    seed: u64,
) -> Result<String, String> {
    let log = generate_log(&GeneratorSpec {
        num_templates: templates,
        traces_per_template,
        instances_per_trace: instances,
        overlap_density: density,
        seed,
    })
    .map_err(|e| e.to_string())?;
    Ok(gallery(&log, seed)?.to_string())
}

#[wasm_bindgen]
pub fn variants_from_csv(csv: &str, seed: u32) -> Result<String, JsError> {
    variants_from_csv_json(csv, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn layout_from_intervals(spec: &str, seed: u32) -> Result<String, JsError> {
    layout_from_intervals_json(spec, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthetic_variants(
    templates: u32,
    traces_per_template: u32,
    instances: u32,
    density: f64,
    seed: u32,
) -> Result<String, JsError> {
    synthetic_variants_json(
        templates as usize,
        traces_per_template as usize,
        instances as usize,
        density,
        seed.into(),
    )
    .map_err(|e| JsError::new(&e))
}

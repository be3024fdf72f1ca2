//! Static, self-contained HTML rendition of the canvas.
//!
//! Every block is one element with class `block`, every link one element with
//! class `connector`. Blocks keep their canvas coordinates (shifted so the
//! top-left block sits at the margin). Links are SVG lines whose `href` jumps
//! to the target block, and a chain index at the bottom lists every maximal
//! chain as a row of intra-document anchors. No scripts, fonts or images are
//! referenced.

use std::collections::BTreeSet;
use std::fmt::Write;

use mmw_core::canvas::{chain_paths, Block, BlockPayload, Canvas, Link, Rect};
use mmw_core::ids::BlockId;
use mmw_core::model::Project;
use mmw_core::notebook::{ChartKind, ChartSpec, Encoding};

const MARGIN: f64 = 40.0;
const MAX_ROWS: usize = 40;

const STYLE: &str = "
body{font:14px/1.4 system-ui,sans-serif;margin:0;background:#f6f6f4;color:#222}
header{padding:12px 24px;border-bottom:1px solid #ddd;background:#fff}
.canvas{position:relative;margin:16px}
.region{position:absolute;border:2px dashed #9aa;border-radius:6px}
.region>h3{margin:0;padding:2px 8px;font-size:12px;color:#577}
.block{position:absolute;box-sizing:border-box;background:#fff;border:1px solid #bbb;border-radius:6px;overflow:auto;box-shadow:0 1px 2px #0002}
.block:target{outline:3px solid #e90}
.block>header{display:flex;gap:6px;align-items:center;padding:4px 8px;background:#eef;font-size:12px}
.icon{font-weight:600;text-transform:uppercase;font-size:10px;padding:1px 4px;border-radius:3px;background:#446;color:#fff}
.caption{margin:0;padding:2px 8px;font-size:11px;color:#555}
.badge{font-size:10px;padding:1px 4px;border-radius:3px}
.badge.stale{background:#fd6}
.badge.dangling{background:#e55;color:#fff}
.body{padding:6px 8px}
blockquote{margin:0;font-style:italic}
table{border-collapse:collapse;font-size:12px}
td,th{border:1px solid #ccc;padding:1px 4px}
svg.links{position:absolute;left:0;top:0;pointer-events:none}
svg.links a{pointer-events:auto}
.connector line{stroke:#446;stroke-width:2}
.connector.dangling line{stroke:#e55;stroke-dasharray:6 4}
.connector text{font-size:11px;fill:#446}
.mark{fill:#68a}
.nav{font-size:11px;padding:2px 8px}
.chains{margin:16px 24px}
";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn anchor_id(id: &BlockId) -> String {
    format!("block-{}", esc(id.as_str()))
}

fn num(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

struct Frame {
    min_x: f64,
    min_y: f64,
    width: f64,
    height: f64,
}

fn frame(canvas: &Canvas) -> Frame {
    let rects = canvas
        .blocks
        .iter()
        .map(|b| Rect { x: b.position.x, y: b.position.y, w: b.size.w, h: b.size.h })
        .chain(canvas.regions.iter().map(|r| r.bounds));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for r in rects {
        x0 = x0.min(r.x);
        y0 = y0.min(r.y);
        x1 = x1.max(r.x + r.w);
        y1 = y1.max(r.y + r.h);
    }
    if !x0.is_finite() {
        return Frame { min_x: 0.0, min_y: 0.0, width: 0.0, height: 0.0 };
    }
    Frame { min_x: x0 - MARGIN, min_y: y0 - MARGIN, width: x1 - x0 + 2.0 * MARGIN, height: y1 - y0 + 2.0 * MARGIN }
}

fn chart_svg(out: &mut String, block: &Block, chart: &ChartSpec) {
    let (w, h) = ((block.size.w - 20.0).max(40.0), (block.size.h - 70.0).max(40.0));
    let _ = write!(out, r#"<svg width="{}" height="{}" viewBox="0 0 {} {}" role="img"><title>{}</title>"#, num(w), num(h), num(w), num(h), esc(&chart.title));
    let n = chart.marks.len().max(1) as f64;
    let mark_id = |m: &mmw_core::notebook::Mark| format!("mark-{}-{}", esc(block.id.as_str()), esc(m.element_id.as_str()));
    match chart.chart_kind {
        ChartKind::Bar | ChartKind::Histogram => {
            let top = chart.marks.iter().map(|m| m.encoding.primary_value()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let bw = w / n;
            for (i, m) in chart.marks.iter().enumerate() {
                let v = m.encoding.primary_value().max(0.0);
                let bh = v / top * (h - 14.0);
                let _ = write!(
                    out,
                    r#"<rect class="mark" id="{}" x="{}" y="{}" width="{}" height="{}"><title>{}: {}</title></rect>"#,
                    mark_id(m), num(i as f64 * bw + 1.0), num(h - 14.0 - bh), num((bw - 2.0).max(1.0)), num(bh), esc(&m.key), num(v)
                );
            }
        }
        ChartKind::Scatter => {
            let pts: Vec<(f64, f64)> = chart
                .marks
                .iter()
                .map(|m| match m.encoding {
                    Encoding::Point { x, y } => (x, y),
                    _ => (0.0, 0.0),
                })
                .collect();
            let (lx, hx) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
            let (ly, hy) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
            let sx = |x: f64| if hx > lx { 6.0 + (x - lx) / (hx - lx) * (w - 12.0) } else { w / 2.0 };
            let sy = |y: f64| if hy > ly { h - 6.0 - (y - ly) / (hy - ly) * (h - 12.0) } else { h / 2.0 };
            for (m, (x, y)) in chart.marks.iter().zip(pts) {
                let _ = write!(
                    out,
                    r#"<circle class="mark" id="{}" cx="{}" cy="{}" r="3"><title>{}</title></circle>"#,
                    mark_id(m), num(sx(x)), num(sy(y)), esc(&m.key)
                );
            }
        }
        ChartKind::Wordcloud => {
            let top = chart.marks.iter().map(|m| m.encoding.primary_value()).fold(1.0, f64::max);
            let (mut x, mut y) = (4.0, 16.0);
            for m in &chart.marks {
                let size = 10.0 + 14.0 * m.encoding.primary_value() / top;
                let width = size * 0.6 * m.key.chars().count() as f64;
                if x + width > w && x > 4.0 {
                    x = 4.0;
                    y += 26.0;
                }
                let _ = write!(out, r#"<text class="mark" id="{}" x="{}" y="{}" font-size="{}">{}</text>"#, mark_id(m), num(x), num(y), num(size), esc(&m.key));
                x += width + 6.0;
            }
        }
    }
    out.push_str("</svg>");
}

fn block_body(out: &mut String, block: &Block) {
    match &block.payload {
        BlockPayload::Quote { text, .. } => {
            let _ = write!(out, "<blockquote>{}</blockquote>", esc(text));
        }
        BlockPayload::Note { text } => {
            let _ = write!(out, "<p>{}</p>", esc(text));
        }
        BlockPayload::Datapoint { value, row_id, column } => {
            let _ = write!(out, r#"<p class="datum"><strong>{}</strong>"#, esc(&value.to_string()));
            if let (Some(r), Some(c)) = (row_id, column) {
                let _ = write!(out, " <small>{} · {}</small>", esc(r.as_str()), esc(c));
            }
            out.push_str("</p>");
        }
        BlockPayload::TableSlice { frame } => {
            out.push_str("<table><tr>");
            for c in &frame.columns {
                let _ = write!(out, "<th>{}</th>", esc(&c.name));
            }
            out.push_str("</tr>");
            for row in frame.rows.iter().take(MAX_ROWS) {
                out.push_str("<tr>");
                for v in row {
                    let _ = write!(out, "<td>{}</td>", esc(&v.to_string()));
                }
                out.push_str("</tr>");
            }
            out.push_str("</table>");
            if frame.rows.len() > MAX_ROWS {
                let _ = write!(out, "<p><small>{} more rows</small></p>", frame.rows.len() - MAX_ROWS);
            }
        }
        BlockPayload::Chart { chart } => chart_svg(out, block, chart),
    }
}

/// Blocks with a dangling link end on them.
fn dangling_blocks(links: &[Link]) -> BTreeSet<&BlockId> {
    links
        .iter()
        .flat_map(|l| [&l.from, &l.to])
        .filter(|a| a.dangling)
        .map(|a| &a.block_id)
        .collect()
}

fn render_block(out: &mut String, project: &Project, block: &Block, f: &Frame, dangling: &BTreeSet<&BlockId>) {
    let canvas = &project.canvas;
    let _ = write!(
        out,
        r#"<section class="block kind-{}" id="{}" data-level="{}" style="left:{}px;top:{}px;width:{}px;height:{}px">"#,
        block.kind.as_str(),
        anchor_id(&block.id),
        block.abstraction_level,
        num(block.position.x - f.min_x),
        num(block.position.y - f.min_y),
        num(block.size.w),
        num(block.size.h),
    );
    let _ = write!(out, r#"<header><span class="icon icon-{0}">{0}</span><span>{1}</span>"#, esc(&block.provenance.icon_key), esc(block.id.as_str()));
    if block.stale {
        out.push_str(r#"<span class="badge stale">stale</span>"#);
    }
    if dangling.contains(&block.id) {
        out.push_str(r#"<span class="badge dangling">dangling</span>"#);
    }
    out.push_str("</header>");
    let _ = write!(out, r#"<p class="caption">{}</p><div class="body">"#, esc(&block.provenance.caption()));
    block_body(out, block);
    out.push_str("</div>");
    let outgoing: Vec<&Link> = canvas.links.iter().filter(|l| l.from.block_id == block.id).collect();
    let incoming: Vec<&Link> = canvas.links.iter().filter(|l| l.to.block_id == block.id).collect();
    if !outgoing.is_empty() || !incoming.is_empty() {
        out.push_str(r#"<nav class="nav">"#);
        for l in incoming {
            let _ = write!(out, r##"<a href="#{}">← {}</a> "##, anchor_id(&l.from.block_id), esc(l.from.block_id.as_str()));
        }
        for l in outgoing {
            let _ = write!(out, r##"<a href="#{}">{} →</a> "##, anchor_id(&l.to.block_id), esc(l.to.block_id.as_str()));
        }
        out.push_str("</nav>");
    }
    out.push_str("</section>");
}

fn center(b: &Block, f: &Frame) -> (f64, f64) {
    (b.position.x - f.min_x + b.size.w / 2.0, b.position.y - f.min_y + b.size.h / 2.0)
}

fn render_links(out: &mut String, canvas: &Canvas, f: &Frame) {
    let _ = write!(
        out,
        r##"<svg class="links" width="{0}" height="{1}" viewBox="0 0 {0} {1}"><defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#446"/></marker></defs>"##,
        num(f.width),
        num(f.height)
    );
    for link in &canvas.links {
        let (Ok(a), Ok(b)) = (canvas.block(&link.from.block_id), canvas.block(&link.to.block_id)) else { continue };
        let ((x1, y1), (x2, y2)) = (center(a, f), center(b, f));
        let dangling = link.from.dangling || link.to.dangling;
        let _ = write!(
            out,
            r##"<a class="connector{}" id="link-{}" href="#{}" data-from="{}" data-to="{}"><line x1="{}" y1="{}" x2="{}" y2="{}" marker-end="url(#arrow)"/>"##,
            if dangling { " dangling" } else { "" },
            esc(link.id.as_str()),
            anchor_id(&link.to.block_id),
            esc(link.from.block_id.as_str()),
            esc(link.to.block_id.as_str()),
            num(x1),
            num(y1),
            num(x2),
            num(y2),
        );
        if let Some(label) = &link.label {
            let _ = write!(out, r#"<text x="{}" y="{}">{}</text>"#, num((x1 + x2) / 2.0), num((y1 + y2) / 2.0 - 4.0), esc(label));
        }
        out.push_str("</a>");
    }
    out.push_str("</svg>");
}

fn render_chains(out: &mut String, canvas: &Canvas) {
    let has_incoming: BTreeSet<&BlockId> = canvas.links.iter().map(|l| &l.to.block_id).collect();
    let mut rows = Vec::new();
    for b in &canvas.blocks {
        if has_incoming.contains(&b.id) {
            continue;
        }
        for path in chain_paths(canvas, &b.id).unwrap_or_default() {
            let hops: Vec<String> = path
                .blocks
                .iter()
                .map(|id| format!(r##"<a href="#{}">{}</a>"##, anchor_id(id), esc(id.as_str())))
                .collect();
            rows.push(format!("<li>{}</li>", hops.join(" → ")));
        }
    }
    if rows.is_empty() {
        return;
    }
    let _ = write!(out, r#"<section class="chains"><h2>Chains</h2><ol>{}</ol></section>"#, rows.concat());
}

/// Renders the whole report.
pub fn render(project: &Project) -> String {
    let canvas = &project.canvas;
    let f = frame(canvas);
    let mut out = String::new();
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>{0}</title><style>{1}</style></head><body><header><h1>{0}</h1><p>{2} blocks · {3} links · last modified {4}</p></header>",
        esc(&project.name),
        STYLE.trim(),
        canvas.blocks.len(),
        canvas.links.len(),
        project.modified_at.format("%Y-%m-%d %H:%M UTC"),
    );
    if canvas.blocks.is_empty() && canvas.regions.is_empty() {
        out.push_str(r#"<main class="canvas empty"><p>The canvas is empty.</p></main>"#);
    } else {
        let _ = write!(out, r#"<main class="canvas" style="width:{}px;height:{}px">"#, num(f.width), num(f.height));
        for r in &canvas.regions {
            let _ = write!(
                out,
                r#"<div class="region" id="region-{}" style="left:{}px;top:{}px;width:{}px;height:{}px"><h3>{}</h3></div>"#,
                esc(r.id.as_str()),
                num(r.bounds.x - f.min_x),
                num(r.bounds.y - f.min_y),
                num(r.bounds.w),
                num(r.bounds.h),
                esc(&r.name)
            );
        }
        render_links(&mut out, canvas, &f);
        let dangling = dangling_blocks(&canvas.links);
        for b in &canvas.blocks {
            render_block(&mut out, project, b, &f, &dangling);
        }
        out.push_str("</main>");
        render_chains(&mut out, canvas);
    }
    out.push_str("</body></html>\n");
    out
}

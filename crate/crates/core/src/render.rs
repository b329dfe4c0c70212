//! SVG drawings: two-row map diagrams, suspension polygons and Maharam level
//! schematics.
//!
//! Coordinates are computed exactly and printed with six decimals, so output
//! is byte-identical for identical input. Breakpoint ticks carry their exact
//! value in `data-value` and its decimal form in `data-decimal`.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalSet};
use crate::maharam::MaharamSystem;
use crate::pamap::PAMap;
use crate::scalar::Scalar;
use crate::systems::{IETSpec, ReciprocalSystem};

/// 25%, 75%, 50% black, then black.
pub const GRAYS: [&str; 4] = ["#bfbfbf", "#404040", "#808080", "#000000"];
const MAX_LABELS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("{0} branches exceed the 26 available labels")]
    TooManyBranches(usize),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("invalid suspension data: {0}")]
    InvalidSuspension(String),
    #[error("suspension polygon has zero area")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { width: 700, height: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex {
    pub re: Scalar,
    pub im: Scalar,
}

impl Complex {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        Complex { re, im }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspensionData {
    pub iet: IETSpec,
    pub zeta: Vec<Complex>,
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + (i % MAX_LABELS) as u8) as char).to_string()).collect()
}

fn gray(i: usize) -> &'static str {
    GRAYS[i % GRAYS.len()]
}

fn dec(x: &Scalar) -> String {
    x.to_decimal(6)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Svg {
    width: Scalar,
    height: Scalar,
    body: String,
}

impl Svg {
    fn new(width: Scalar, height: Scalar) -> Self {
        Svg { width, height, body: String::new() }
    }

    fn line(&mut self, x1: &Scalar, y1: &Scalar, x2: &Scalar, y2: &Scalar, attrs: &str) {
        let _ = writeln!(
            self.body,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {attrs}/>",
            dec(x1),
            dec(y1),
            dec(x2),
            dec(y2)
        );
    }

    fn text(&mut self, x: &Scalar, y: &Scalar, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"serif\" font-size=\"14\">{}</text>",
            dec(x),
            dec(y),
            escape(content)
        );
    }

    fn raw(&mut self, element: String) {
        self.body.push_str("  ");
        self.body.push_str(&element);
        self.body.push('\n');
    }

    fn finish(self) -> String {
        let (w, h) = (dec(&self.width), dec(&self.height));
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n  <defs>\n    <marker id=\"arrow\" \
             markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\">\n      \
             <path d=\"M0,0 L8,4 L0,8 z\" fill=\"#000000\"/>\n    </marker>\n  </defs>\n{}</svg>\n",
            self.body
        )
    }
}

/// Affine placement of `[lo, hi)` onto pixels `[left, left + span]`.
struct Axis {
    lo: Scalar,
    scale: Scalar,
    left: Scalar,
}

impl Axis {
    fn new(hull: &Interval, left: Scalar, span: Scalar) -> Self {
        Axis { lo: hull.lo().clone(), scale: span / hull.length(), left }
    }

    fn px(&self, x: &Scalar) -> Scalar {
        &self.left + &(&(x - &self.lo) * &self.scale)
    }
}

struct Segment {
    interval: Interval,
    shade: usize,
    label: String,
}

struct Row {
    name: &'static str,
    segments: Vec<Segment>,
    ticks: Vec<Scalar>,
    dashed: IntervalSet,
    label_above: bool,
}

impl Row {
    fn new(name: &'static str, segments: Vec<Segment>, hull: &Interval, label_above: bool) -> Self {
        let covered: IntervalSet = segments.iter().map(|s| s.interval.clone()).collect();
        let mut ticks: Vec<Scalar> = segments
            .iter()
            .flat_map(|s| [s.interval.lo().clone(), s.interval.hi().clone()])
            .chain([hull.lo().clone(), hull.hi().clone()])
            .collect();
        ticks.sort();
        ticks.dedup();
        let dashed = IntervalSet::from_interval(hull.clone()).difference(&covered);
        Row { name, segments, ticks, dashed, label_above }
    }
}

fn draw_rows(rows: &[Row], hull: &Interval, opts: &RenderOptions) -> String {
    let width = Scalar::from(opts.width as i64);
    let height = Scalar::from(opts.height as i64);
    let margin = Scalar::from(30);
    let axis = Axis::new(hull, margin.clone(), &width - &(&margin * &Scalar::from(2)));
    let mut svg = Svg::new(width, height.clone());
    let gap = &height / &Scalar::from(rows.len() as i64 + 1);
    let tick_half = Scalar::from(12);
    let label_off = Scalar::from(20);
    for (k, row) in rows.iter().enumerate() {
        let y = &gap * &Scalar::from(k as i64 + 1);
        for t in &row.ticks {
            let x = axis.px(t);
            let attrs = format!(
                "class=\"tick\" data-row=\"{}\" data-value=\"{t}\" data-decimal=\"{}\" stroke=\"#000000\" stroke-width=\"1\"",
                row.name,
                dec(t)
            );
            svg.line(&x, &(&y - &tick_half), &x, &(&y + &tick_half), &attrs);
        }
        for seg in &row.segments {
            let (x1, x2) = (axis.px(seg.interval.lo()), axis.px(seg.interval.hi()));
            let attrs = format!(
                "class=\"segment\" data-row=\"{}\" data-label=\"{}\" stroke=\"{}\" stroke-width=\"6\"",
                row.name,
                escape(&seg.label),
                gray(seg.shade)
            );
            svg.line(&x1, &y, &x2, &y, &attrs);
            let mid = (&x1 + &x2) * Scalar::ratio(1, 2);
            let ly = if row.label_above { &y - &label_off } else { &y + &label_off + Scalar::from(6) };
            svg.text(&mid, &ly, "middle", &seg.label);
        }
        for hole in &row.dashed {
            let attrs = format!(
                "class=\"unreached\" data-row=\"{}\" stroke=\"#000000\" stroke-width=\"2\" stroke-dasharray=\"6,4\"",
                row.name
            );
            svg.line(&axis.px(hole.lo()), &y, &axis.px(hole.hi()), &y, &attrs);
        }
    }
    svg.finish()
}

fn check_labels(n: usize, labels: &[String]) -> Result<(), RenderError> {
    if n > MAX_LABELS {
        return Err(RenderError::TooManyBranches(n));
    }
    if labels.len() != n {
        return Err(RenderError::LabelCount { expected: n, got: labels.len() });
    }
    Ok(())
}

fn hull_of(m: &PAMap) -> Interval {
    let both = m.domain_support().union(&m.image_support());
    both.hull().unwrap_or_else(Interval::unit)
}

/// Domains on the top row, images on the bottom row. Parts of the hull not
/// reached by any image are dashed.
pub fn render_two_row(m: &PAMap, labels: &[String], opts: &RenderOptions) -> Result<String, RenderError> {
    check_labels(m.len(), labels)?;
    let hull = hull_of(m);
    let segments = |image: bool| -> Vec<Segment> {
        m.branches()
            .iter()
            .enumerate()
            .map(|(i, b)| Segment {
                interval: if image { b.image() } else { b.domain().clone() },
                shade: i,
                label: labels[i].clone(),
            })
            .collect()
    };
    let rows = [Row::new("domain", segments(false), &hull, true), Row::new("image", segments(true), &hull, false)];
    Ok(draw_rows(&rows, &hull, opts))
}

/// Index of the exchanged interval containing each branch of `F`.
fn parent_indices(sys: &ReciprocalSystem) -> Vec<usize> {
    let t = sys.t();
    sys.f().branches().iter().map(|b| t.branch_index(b.domain().lo()).expect("F and T share a domain")).collect()
}

/// Two-row picture of `F = Φ ∘ T`, each branch labelled and shaded by the
/// exchanged interval it lies in.
pub fn render_composition(
    sys: &ReciprocalSystem,
    labels: &[String],
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    check_labels(sys.t().len(), labels)?;
    let parents = parent_indices(sys);
    let hull = Interval::unit();
    let segments = |image: bool| -> Vec<Segment> {
        sys.f()
            .branches()
            .iter()
            .zip(&parents)
            .map(|(b, &p)| Segment {
                interval: if image { b.image() } else { b.domain().clone() },
                shade: p,
                label: labels[p].clone(),
            })
            .collect()
    };
    let rows = [Row::new("domain", segments(false), &hull, true), Row::new("image", segments(true), &hull, false)];
    Ok(draw_rows(&rows, &hull, opts))
}

/// Vertices of the top and bottom broken lines of a suspension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspensionPolygon {
    pub top: Vec<(Scalar, Scalar)>,
    pub bottom: Vec<(Scalar, Scalar)>,
    /// Interval drawn by each bottom segment.
    pub bottom_order: Vec<usize>,
}

impl SuspensionPolygon {
    pub fn is_closed(&self) -> bool {
        self.top.first() == self.bottom.first() && self.top.last() == self.bottom.last()
    }

    /// Twice the signed area, by the shoelace formula over top then reversed bottom.
    pub fn doubled_area(&self) -> Scalar {
        let ring: Vec<&(Scalar, Scalar)> = self.top.iter().chain(self.bottom.iter().rev().skip(1)).collect();
        let n = ring.len();
        (0..n)
            .map(|k| {
                let (x1, y1) = ring[k];
                let (x2, y2) = ring[(k + 1) % n];
                x1 * y2 - x2 * y1
            })
            .sum()
    }
}

fn partial_sums<'a>(vs: impl Iterator<Item = &'a Complex>) -> Vec<(Scalar, Scalar)> {
    let mut out = vec![(Scalar::zero(), Scalar::zero())];
    for z in vs {
        let (x, y) = out.last().expect("non-empty").clone();
        out.push((x + &z.re, y + &z.im));
    }
    out
}

pub fn suspension_polygon(data: &SuspensionData) -> Result<SuspensionPolygon, RenderError> {
    let invalid = |msg: String| Err(RenderError::InvalidSuspension(msg));
    data.iet.validate().map_err(|e| RenderError::InvalidSuspension(e.to_string()))?;
    let k = data.iet.lengths.len();
    if data.zeta.len() != k {
        return invalid(format!("{} vectors for {k} intervals", data.zeta.len()));
    }
    for (i, (z, len)) in data.zeta.iter().zip(&data.iet.lengths).enumerate() {
        if &z.re != len {
            return invalid(format!("real part {} of vector {i} differs from length {len}", z.re));
        }
    }
    let mut bottom_order = vec![0; k];
    for (i, &rank) in data.iet.permutation.iter().enumerate() {
        bottom_order[rank] = i;
    }
    let top = partial_sums(data.zeta.iter());
    let bottom = partial_sums(bottom_order.iter().map(|&i| &data.zeta[i]));
    for (j, (_, y)) in top.iter().enumerate().take(k).skip(1) {
        if !y.is_positive() {
            return invalid(format!("top broken line has height {y} after {j} segments"));
        }
    }
    for (j, (_, y)) in bottom.iter().enumerate().take(k).skip(1) {
        if !y.is_negative() {
            return invalid(format!("bottom broken line has height {y} after {j} segments"));
        }
    }
    let poly = SuspensionPolygon { top, bottom, bottom_order };
    if poly.doubled_area().is_zero() {
        return Err(RenderError::Degenerate);
    }
    Ok(poly)
}

pub fn render_suspension(
    data: &SuspensionData,
    labels: &[String],
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    check_labels(data.iet.lengths.len(), labels)?;
    let poly = suspension_polygon(data)?;
    let ys: Vec<&Scalar> = poly.top.iter().chain(&poly.bottom).map(|(_, y)| y).collect();
    let ymax = ys.iter().copied().max().expect("non-empty").clone();
    let ymin = ys.iter().copied().min().expect("non-empty").clone();
    let margin = Scalar::from(30);
    let scale = Scalar::from(opts.width as i64) - &margin * &Scalar::from(2);
    let height = &(&(&ymax - &ymin) * &scale) + &(&margin * &Scalar::from(2));
    let mut svg = Svg::new(Scalar::from(opts.width as i64), height);
    let px = |x: &Scalar| &margin + &(x * &scale);
    let py = |y: &Scalar| &margin + &(&(&ymax - y) * &scale);

    let ring: Vec<String> = poly
        .top
        .iter()
        .chain(poly.bottom.iter().rev().skip(1))
        .map(|(x, y)| format!("{},{}", dec(&px(x)), dec(&py(y))))
        .collect();
    svg.raw(format!(
        "<polygon class=\"surface\" data-closed=\"{}\" points=\"{}\" fill=\"#f2f2f2\" stroke=\"none\"/>",
        poly.is_closed(),
        ring.join(" ")
    ));
    let zero = Scalar::zero();
    let one = Scalar::one();
    svg.line(&px(&zero), &py(&zero), &px(&one), &py(&zero), "class=\"base\" stroke=\"#000000\" stroke-width=\"1\"");
    let k = data.zeta.len();
    for (side, pts, order) in
        [("top", &poly.top, (0..k).collect::<Vec<_>>()), ("bottom", &poly.bottom, poly.bottom_order.clone())]
    {
        for (j, &i) in order.iter().enumerate() {
            let (x1, y1) = &pts[j];
            let (x2, y2) = &pts[j + 1];
            let attrs = format!(
                "class=\"side\" data-side=\"{side}\" data-interval=\"{i}\" stroke=\"{}\" stroke-width=\"5\"",
                gray(i)
            );
            svg.line(&px(x1), &py(y1), &px(x2), &py(y2), &attrs);
            let mx = (px(x1) + px(x2)) * Scalar::ratio(1, 2);
            let my = (py(y1) + py(y2)) * Scalar::ratio(1, 2);
            let nudge = if side == "top" { Scalar::from(-10) } else { Scalar::from(20) };
            svg.text(&mx, &(my + nudge), "middle", &labels[i]);
        }
    }
    Ok(svg.finish())
}

fn subscript(n: i64) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    let mut s = String::new();
    if n < 0 {
        s.push('₋');
    }
    for c in n.unsigned_abs().to_string().chars() {
        s.push(DIGITS[c.to_digit(10).expect("digit") as usize]);
    }
    s
}

/// One row per level, highest on top, each row drawn with width `ρ^{-n}`
/// relative to level 0. Arrows join each branch to its image one level up or
/// down.
pub fn render_maharam(
    m: &MaharamSystem,
    levels: RangeInclusive<i64>,
    labels: &[String],
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    let sys = m.base();
    check_labels(sys.t().len(), labels)?;
    let (lo, hi) = (*levels.start(), *levels.end());
    let count = (hi - lo + 1).max(0);
    let margin = Scalar::from(30);
    let gutter = Scalar::from(70);
    let row_gap = Scalar::from(110);
    let rho = m.rho().clone();
    let usable = Scalar::from(opts.width as i64) - &margin * &Scalar::from(2) - &gutter;
    let unit = &usable / &rho.powi(-lo);
    let height = &(&row_gap * &Scalar::from(count)) + &(&margin * &Scalar::from(2));
    let mut svg = Svg::new(Scalar::from(opts.width as i64), height);
    let left = &margin + &gutter;
    let row_y = |n: i64| &margin + &(&row_gap * &(Scalar::from(hi - n) + Scalar::ratio(1, 2)));
    let px = |n: i64, x: &Scalar| &left + &(&(x * &unit) * &rho.powi(-n));

    let parents = parent_indices(sys);
    let f = sys.f();
    let zero = Scalar::zero();
    let one = Scalar::one();
    let tick_half = Scalar::from(8);
    let mut breaks: Vec<Scalar> = f.breakpoints();
    breaks.push(zero.clone());
    breaks.push(one.clone());
    breaks.sort();
    breaks.dedup();
    for n in levels.clone() {
        let y = row_y(n);
        svg.text(&margin, &(&y + &Scalar::from(5)), "start", &format!("X×{{{n}}}"));
        svg.line(&px(n, &zero), &y, &px(n, &one), &y, "class=\"level\" stroke=\"#999999\" stroke-width=\"1\"");
        for t in &breaks {
            let x = px(n, t);
            let attrs = format!(
                "class=\"tick\" data-level=\"{n}\" data-value=\"{t}\" data-decimal=\"{}\" stroke=\"#000000\" stroke-width=\"1\"",
                dec(t)
            );
            svg.line(&x, &(&y - &tick_half), &x, &(&y + &tick_half), &attrs);
        }
        for (b, &p) in f.branches().iter().zip(&parents) {
            let d = b.domain();
            let attrs = format!(
                "class=\"segment\" data-level=\"{n}\" data-label=\"{}\" stroke=\"{}\" stroke-width=\"5\"",
                escape(&labels[p]),
                gray(p)
            );
            svg.line(&px(n, d.lo()), &y, &px(n, d.hi()), &y, &attrs);
            let mid = d.midpoint();
            svg.text(&px(n, &mid), &(&y - &Scalar::from(12)), "middle", &format!("{}{}", labels[p], subscript(n)));
            let up = m.up_set().contains(d.lo());
            let target = if up { n + 1 } else { n - 1 };
            if !levels.contains(&target) {
                continue;
            }
            let to = b.image().midpoint();
            let (x1, x2) = (px(n, &mid), px(target, &to));
            let y1 = if up { &y - &Scalar::from(16) } else { &y + &Scalar::from(16) };
            let ty = row_y(target);
            let y2 = if up { &ty + &Scalar::from(12) } else { &ty - &Scalar::from(20) };
            let c1 = (&y1 + &y2) * Scalar::ratio(1, 2);
            svg.raw(format!(
                "<path class=\"arrow\" data-from=\"{n}\" data-to=\"{target}\" d=\"M{},{} C{},{} {},{} {},{}\" \
                 fill=\"none\" stroke=\"#000000\" stroke-width=\"1\" marker-end=\"url(#arrow)\"/>",
                dec(&x1),
                dec(&y1),
                dec(&x1),
                dec(&c1),
                dec(&x2),
                dec(&c1),
                dec(&x2),
                dec(&y2)
            ));
        }
    }
    Ok(svg.finish())
}

//! Run output files and the reports derived from them.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back and rewritten is byte-identical. Undefined values are empty
//! cells.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::compatibility::{CurveEntry, EvalSet};
use crate::error::{Error, Result};
use crate::experiment::analysis::{
    correlation_rows, AggregateCurve, AggregatePoint, CorrelationRow, ImprovementRow, ImprovementTable, MeanStd,
    BEST_COLUMN,
};
use crate::experiment::runner::CurveRecord;

pub const CURVES_HEADER: [&str; 10] = [
    "run_id",
    "fold",
    "inner_fold",
    "user_id",
    "model",
    "eval_set",
    "lambda",
    "compatibility",
    "performance",
    "skipped_flag",
];

/// One row of `curves.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub run_id: String,
    pub fold: usize,
    pub inner_fold: usize,
    pub user_id: String,
    pub model: String,
    pub eval_set: EvalSet,
    pub lambda: f64,
    pub compatibility: Option<f64>,
    pub performance: Option<f64>,
    pub skipped: bool,
}

fn malformed(what: &'static str, message: impl Into<String>) -> Error {
    Error::Malformed {
        what,
        message: message.into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn curve_rows(run_id: &str, records: &[CurveRecord]) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    for r in records {
        for entry in r.curve.entries() {
            let (compatibility, performance, skipped) = match entry {
                CurveEntry::Point(p) => (Some(p.compatibility), Some(p.performance), false),
                CurveEntry::Skipped(_) => (None, None, true),
            };
            rows.push(CurveRow {
                run_id: run_id.to_owned(),
                fold: r.fold,
                inner_fold: r.inner_fold,
                user_id: r.curve.user_id.clone(),
                model: r.curve.model.clone(),
                eval_set: r.curve.eval_set,
                lambda: entry.lambda(),
                compatibility,
                performance,
                skipped,
            });
        }
    }
    rows
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CURVES_HEADER)?;
    for r in rows {
        w.write_record([
            r.run_id.clone(),
            r.fold.to_string(),
            r.inner_fold.to_string(),
            r.user_id.clone(),
            r.model.clone(),
            r.eval_set.as_str().to_owned(),
            r.lambda.to_string(),
            opt(r.compatibility),
            opt(r.performance),
            u8::from(r.skipped).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<curves writer>", e))
}

fn parse_f64(what: &'static str, line: u64, column: &str, cell: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(malformed(what, format!("line {line}: bad {column} value {cell:?}"))),
    }
}

fn parse_usize(what: &'static str, line: u64, column: &str, cell: &str) -> Result<usize> {
    cell.parse()
        .map_err(|_| malformed(what, format!("line {line}: bad {column} value {cell:?}")))
}

fn check_header(what: &'static str, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(malformed(
            what,
            format!(
                "expected header {}, found {}",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(())
}

/// Reads `curves.csv`, checking every row's shape and ranges.
pub fn read_curves_csv<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    const WHAT: &str = "curves csv";
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(WHAT, rdr.headers()?, &CURVES_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CURVES_HEADER.len() {
            return Err(malformed(
                WHAT,
                format!("line {line}: expected {} fields", CURVES_HEADER.len()),
            ));
        }
        let eval_set = EvalSet::parse(&rec[5])
            .ok_or_else(|| malformed(WHAT, format!("line {line}: bad eval_set {:?}", &rec[5])))?;
        let lambda = parse_f64(WHAT, line, "lambda", &rec[6])?
            .filter(|l| (0.0..=1.0).contains(l))
            .ok_or_else(|| malformed(WHAT, format!("line {line}: lambda must lie in [0, 1]")))?;
        let compatibility = parse_f64(WHAT, line, "compatibility", &rec[7])?;
        let performance = parse_f64(WHAT, line, "performance", &rec[8])?;
        let skipped = match &rec[9] {
            "0" => false,
            "1" => true,
            other => return Err(malformed(WHAT, format!("line {line}: bad skipped_flag {other:?}"))),
        };
        match (skipped, compatibility, performance) {
            (true, None, None) => {}
            (false, Some(c), Some(_)) if (0.0..=1.0).contains(&c) => {}
            _ => {
                return Err(malformed(
                    WHAT,
                    format!("line {line}: values must be present iff the point is not skipped"),
                ))
            }
        }
        rows.push(CurveRow {
            run_id: rec[0].to_owned(),
            fold: parse_usize(WHAT, line, "fold", &rec[1])?,
            inner_fold: parse_usize(WHAT, line, "inner_fold", &rec[2])?,
            user_id: rec[3].to_owned(),
            model: rec[4].to_owned(),
            eval_set,
            lambda,
            compatibility,
            performance,
            skipped,
        });
    }
    Ok(rows)
}

fn improvements_header(table: &ImprovementTable) -> Vec<String> {
    let mut h = vec!["user".to_owned(), "len".to_owned(), "distance".to_owned()];
    for c in &table.columns {
        h.push(c.clone());
        h.push(format!("{c}_std"));
    }
    h
}

/// One row per user: `user,len,distance` then a mean and `_std` cell per
/// column.
pub fn write_improvements_csv<W: Write>(table: &ImprovementTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(improvements_header(table))?;
    for row in &table.rows {
        let mut rec = vec![row.user_id.clone(), row.len.to_string(), opt(row.distance)];
        for cell in &row.cells {
            rec.push(opt(cell.mean));
            rec.push(opt(cell.std));
        }
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io("<improvements writer>", e))
}

/// Reads `improvements.csv` and recomputes the correlation rows from it.
/// Fold counts and flagged folds are not stored in the file.
pub fn read_improvements_csv<R: Read>(reader: R) -> Result<ImprovementTable> {
    const WHAT: &str = "improvements csv";
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 5
        || (header.len() - 3) % 2 != 0
        || &header[0] != "user"
        || &header[1] != "len"
        || &header[2] != "distance"
    {
        return Err(malformed(
            WHAT,
            "header must be user,len,distance followed by column/_std pairs",
        ));
    }
    let mut columns = Vec::new();
    for pair in header.iter().skip(3).collect::<Vec<_>>().chunks(2) {
        if pair[0].is_empty() || pair[1] != format!("{}_std", pair[0]) {
            return Err(malformed(
                WHAT,
                format!("column {:?} lacks its _std companion", pair[0]),
            ));
        }
        columns.push(pair[0].to_owned());
    }
    if columns.last().map(String::as_str) != Some(BEST_COLUMN) {
        return Err(malformed(WHAT, format!("last column must be {BEST_COLUMN}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(malformed(
                WHAT,
                format!("line {line}: expected {} fields", header.len()),
            ));
        }
        let distance = parse_f64(WHAT, line, "distance", &rec[2])?;
        let mut cells = Vec::with_capacity(columns.len());
        for (k, name) in columns.iter().enumerate() {
            let mean = parse_f64(WHAT, line, name, &rec[3 + 2 * k])?;
            let std = parse_f64(WHAT, line, name, &rec[4 + 2 * k])?;
            if std.is_some_and(|s| s < 0.0) || (std.is_some() && mean.is_none()) {
                return Err(malformed(WHAT, format!("line {line}: bad spread for {name}")));
            }
            cells.push(MeanStd { mean, std, count: 0 });
        }
        rows.push(ImprovementRow {
            user_id: rec[0].to_owned(),
            len: parse_usize(WHAT, line, "len", &rec[1])?,
            distance,
            cells,
        });
    }
    let correlations = correlation_rows(&rows, columns.len());
    Ok(ImprovementTable {
        columns,
        rows,
        correlations,
        flagged: Vec::new(),
    })
}

pub fn write_correlations_csv<W: Write>(table: &ImprovementTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["row".to_owned()];
    header.extend(table.columns.iter().cloned());
    w.write_record(header)?;
    for row in &table.correlations {
        let mut rec = vec![row.label.clone()];
        rec.extend(row.values.iter().map(|v| opt(*v)));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io("<correlations writer>", e))
}

fn md_cell(cell: &MeanStd) -> String {
    match (cell.mean, cell.std) {
        (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
        (Some(m), None) => format!("{m:.2}"),
        _ => "n/a".to_owned(),
    }
}

/// The improvement table as markdown: one row per user and the two
/// correlation rows at the bottom. Cells are percent AUTC improvements
/// over the baseline, "mean ± std" over folds.
pub fn render_improvements_markdown(table: &ImprovementTable) -> String {
    let mut out = String::new();
    let mut header = vec!["user", "len", "distance"];
    header.extend(table.columns.iter().map(String::as_str));
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in &table.rows {
        let mut cells = vec![
            row.user_id.clone(),
            row.len.to_string(),
            row.distance.map_or("n/a".to_owned(), |d| format!("{d:.4}")),
        ];
        cells.extend(row.cells.iter().map(md_cell));
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    for CorrelationRow { label, values } in &table.correlations {
        let mut cells = vec![label.clone(), String::new(), String::new()];
        cells.extend(values.iter().map(|v| v.map_or("n/a".to_owned(), |x| format!("{x:.3}"))));
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    let _ = writeln!(out, "\n{DISTANCE_NOTE}");
    out
}

/// How the `distance` column is computed; shown under every rendered table.
pub const DISTANCE_NOTE: &str = "distance: mean over features of the 1-D Wasserstein distance between the \
     user's history and all included users' instances, each feature min-max scaled by the pooled range";

/// Per-model mean test curve over every user, fold and inner fold,
/// computed from `curves.csv` rows. `models` filters the series; an empty
/// filter keeps them all. Series follow first appearance in the file.
pub fn mean_tradeoff_curves(rows: &[CurveRow], models: &[String]) -> Vec<AggregateCurve> {
    let mut order: Vec<&str> = Vec::new();
    // model -> lambda bits -> (sum compat, sum perf, count, skipped)
    let mut acc: BTreeMap<&str, BTreeMap<u64, (f64, f64, usize, usize)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.eval_set == EvalSet::Test) {
        if !models.is_empty() && !models.iter().any(|m| m == &r.model) {
            continue;
        }
        if !acc.contains_key(r.model.as_str()) {
            order.push(&r.model);
        }
        let slot = acc
            .entry(&r.model)
            .or_default()
            .entry(r.lambda.to_bits())
            .or_insert((0.0, 0.0, 0, 0));
        match (r.compatibility, r.performance) {
            (Some(c), Some(p)) if !r.skipped => {
                slot.0 += c;
                slot.1 += p;
                slot.2 += 1;
            }
            _ => slot.3 += 1,
        }
    }
    order
        .into_iter()
        .map(|model| {
            let mut points: Vec<AggregatePoint> = acc[model]
                .iter()
                .filter(|(_, v)| v.2 > 0)
                .map(|(bits, &(c, p, n, skipped))| AggregatePoint {
                    lambda: f64::from_bits(*bits),
                    compatibility: c / n as f64,
                    performance: p / n as f64,
                    count: n,
                    partial: skipped > 0,
                })
                .collect();
            points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            AggregateCurve {
                model: model.to_owned(),
                user_id: None,
                eval_set: EvalSet::Test,
                points,
            }
        })
        .filter(|c| !c.points.is_empty())
        .collect()
}

pub fn write_tradeoff_csv<W: Write>(series: &[AggregateCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "lambda", "compatibility", "performance", "count", "partial"])?;
    for s in series {
        for p in &s.points {
            w.write_record([
                s.model.clone(),
                p.lambda.to_string(),
                p.compatibility.to_string(),
                p.performance.to_string(),
                p.count.to_string(),
                u8::from(p.partial).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<tradeoff writer>", e))
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(0.01);
    (lo - pad, hi + pad)
}

/// Line chart with compatibility on x and `y_label` on y, one polyline
/// and legend entry per series.
pub fn render_tradeoff_svg(series: &[AggregateCurve], y_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 150.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    let (x0, x1) = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.compatibility)));
    let (y0, y1) = axis_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.performance)));
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (ax0, ax1, ay0, ay1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{ax0} {ay1} V{ay0} H{ax1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = f64::from(k) / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            px(xv),
            ay0 + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            ax0 - 6.0,
            py(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">compatibility</text>"#,
        (ax0 + ax1) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        escape_xml(y_label)
    );
    for (k, c) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.compatibility), py(p.performance)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-model="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape_xml(&c.model),
            pts.join(" ")
        );
        for p in &c.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(p.compatibility),
                py(p.performance)
            );
        }
    }
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, c) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let y = TOP + 10.0 + 18.0 * k as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            y - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y:.2}">{}</text>"#,
            lx + 18.0,
            escape_xml(&c.model)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compatibility::{SkipReason, SkippedPoint, TradeoffCurve, TradeoffPoint};

    fn record(model: &str, user: &str, eval_set: EvalSet) -> CurveRecord {
        CurveRecord {
            fold: 1,
            inner_fold: 2,
            curve: TradeoffCurve {
                model: model.into(),
                user_id: user.into(),
                eval_set,
                points: vec![
                    TradeoffPoint {
                        lambda: 0.0,
                        compatibility: 0.5,
                        performance: 0.75,
                    },
                    TradeoffPoint {
                        lambda: 1.0,
                        compatibility: 1.0,
                        performance: 0.6,
                    },
                ],
                skipped: vec![SkippedPoint {
                    lambda: 0.5,
                    reason: SkipReason::DegenerateLabels,
                }],
            },
        }
    }

    #[test]
    fn curves_round_trip_in_lambda_order() {
        let rows = curve_rows("abc", &[record("baseline", "u, 1", EvalSet::Val)]);
        assert_eq!(rows.iter().map(|r| r.lambda).collect::<Vec<_>>(), [0.0, 0.5, 1.0]);
        let mut buf = Vec::new();
        write_curves_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "run_id,fold,inner_fold,user_id,model,eval_set,lambda,compatibility,performance,skipped_flag\n"
        ));
        assert!(text.contains("abc,1,2,\"u, 1\",baseline,val,0.5,,,1\n"));
        let back = read_curves_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let mut again = Vec::new();
        write_curves_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn malformed_curve_rows_are_rejected() {
        let header = CURVES_HEADER.join(",");
        for body in [
            "r,0,0,u,m,val,0.5,,0.7,0",
            "r,0,0,u,m,val,0.5,0.3,0.7,1",
            "r,0,0,u,m,train,0.5,0.3,0.7,0",
            "r,0,0,u,m,val,1.5,0.3,0.7,0",
            "r,0,0,u,m,val,0.5,1.3,0.7,0",
            "r,x,0,u,m,val,0.5,0.3,0.7,0",
            "r,0,0,u,m,val,0.5,0.3,0.7,2",
        ] {
            let text = format!("{header}\n{body}\n");
            assert!(read_curves_csv(text.as_bytes()).is_err(), "{body}");
        }
        assert!(read_curves_csv("a,b\n".as_bytes()).is_err());
    }

    fn table() -> ImprovementTable {
        let cell = |m: f64, s: Option<f64>| MeanStd {
            mean: Some(m),
            std: s,
            count: 2,
        };
        let rows: Vec<ImprovementRow> = (0..3)
            .map(|k| ImprovementRow {
                user_id: format!("u{k}"),
                len: 10 + 10 * k,
                distance: Some(0.1 * (3 - k) as f64),
                cells: vec![cell(5.0 * k as f64, Some(1.0)), cell(20.0, None)],
            })
            .collect();
        let correlations = correlation_rows(&rows, 2);
        ImprovementTable {
            columns: vec!["L1".into(), BEST_COLUMN.into()],
            rows,
            correlations,
            flagged: Vec::new(),
        }
    }

    #[test]
    fn improvements_round_trip_and_recompute_correlations() {
        let t = table();
        let mut buf = Vec::new();
        write_improvements_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user,len,distance,L1,L1_std,best_u,best_u_std\n"));
        let back = read_improvements_csv(buf.as_slice()).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.correlations, t.correlations);
        let mut again = Vec::new();
        write_improvements_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
        assert!(read_improvements_csv("user,len,distance,L1,X\n".as_bytes()).is_err());
        assert!(read_improvements_csv("user,len,distance,L1,L1_std\n".as_bytes()).is_err());
    }

    #[test]
    fn markdown_has_user_rows_then_correlations() {
        let md = render_improvements_markdown(&table());
        let lines: Vec<&str> = md.lines().filter(|l| l.starts_with('|')).collect();
        assert_eq!(lines.len(), 2 + 3 + 2);
        assert!(md.ends_with(&format!("\n\n{DISTANCE_NOTE}\n")));
        assert_eq!(lines[0], "| user | len | distance | L1 | best_u |");
        assert!(lines[3].contains("5.00 ± 1.00"));
        assert!(lines[5].starts_with("| len correlation |"));
        assert!(lines[6].starts_with("| dist correlation |"));
        assert!(lines[6].ends_with("n/a |"));
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let rows = curve_rows(
            "r",
            &[
                record("baseline", "a", EvalSet::Test),
                record("L1", "a", EvalSet::Test),
                record("L1", "a", EvalSet::Val),
            ],
        );
        let all = mean_tradeoff_curves(&rows, &[]);
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].points.len(), 2);
        assert!(all[0].points.iter().all(|p| !p.partial));
        let svg = render_tradeoff_svg(&all, "auc");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"class="legend""#));
        let only = mean_tradeoff_curves(&rows, &["L1".to_owned()]);
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].model, "L1");
    }
}

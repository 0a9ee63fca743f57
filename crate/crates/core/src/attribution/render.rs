use std::fmt::Write;

use super::{AttributionReport, NodeContribution};

/// Spans highlighted per note.
pub const DEFAULT_HIGHLIGHTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    /// ANSI colours: red for risk-raising spans, blue for risk-lowering.
    Terminal,
    /// A standalone HTML page with inline styles.
    Html,
}

/// Per-position mark: index into the highlighted list. Where spans overlap
/// the larger |contribution| wins; the list is already sorted that way, so
/// the first span to claim a position keeps it.
fn position_marks(report: &AttributionReport, spans: &[&NodeContribution]) -> Vec<Option<usize>> {
    let mut marks = vec![None; report.tokens.len()];
    for (rank, c) in spans.iter().enumerate() {
        for pos in c.start..c.start + c.token_ids.len() {
            if let Some(m) = marks.get_mut(pos) {
                if m.is_none() {
                    *m = Some(rank);
                }
            }
        }
    }
    marks
}

fn highlighted(report: &AttributionReport, top_n: usize) -> Vec<&NodeContribution> {
    report.contributions.iter().filter(|c| c.contribution != 0.0).take(top_n).collect()
}

/// Runs of consecutive positions sharing a mark, covering the note and any
/// highlighted span that reaches into padding.
fn runs(report: &AttributionReport, marks: &[Option<usize>]) -> Vec<(usize, usize, Option<usize>)> {
    let shown = marks
        .iter()
        .rposition(Option::is_some)
        .map_or(0, |p| p + 1)
        .max(report.original_length)
        .min(report.tokens.len());
    let mut out = Vec::new();
    let mut start = 0;
    for pos in 1..=shown {
        if pos == shown || marks[pos] != marks[start] {
            out.push((start, pos, marks[start]));
            start = pos;
        }
    }
    out
}

/// Renders the note with its top `top_n` contributing spans marked, the
/// predicted probability, and a table of node contributions.
pub fn render_report(report: &AttributionReport, style: ReportStyle, top_n: usize) -> String {
    let spans = highlighted(report, top_n);
    let marks = position_marks(report, &spans);
    let runs = runs(report, &marks);
    let scale = spans.first().map_or(1.0, |c| c.contribution.abs());
    match style {
        ReportStyle::Terminal => terminal(report, &spans, &runs, scale),
        ReportStyle::Html => html(report, &spans, &runs, scale),
    }
}

fn terminal(
    report: &AttributionReport,
    spans: &[&NodeContribution],
    runs: &[(usize, usize, Option<usize>)],
    scale: f64,
) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "visit {}  probability {:.4}  logit {:+.4}  bias {:+.4}",
        report.visit_id, report.probability, report.logit, report.dense_bias
    )
    .unwrap();
    let mut words = Vec::new();
    for &(a, b, mark) in runs {
        let text = report.tokens[a..b].join(" ");
        words.push(match mark {
            None => text,
            Some(rank) => {
                let c = spans[rank].contribution;
                let level = (c.abs() / scale * 3.0).ceil().clamp(1.0, 3.0) as u8;
                let code = match (c > 0.0, level) {
                    (true, 3) => "1;97;41",
                    (true, 2) => "97;41",
                    (true, _) => "31",
                    (false, 3) => "1;97;44",
                    (false, 2) => "97;44",
                    (false, _) => "34",
                };
                format!("\x1b[{code}m{text}\x1b[0m")
            }
        });
    }
    writeln!(out, "{}", words.join(" ")).unwrap();
    writeln!(out, "{:>4}  {:>5}  {:>12}  trigram", "rank", "node", "contribution").unwrap();
    for (rank, c) in spans.iter().enumerate() {
        writeln!(out, "{:>4}  {:>5}  {:>+12.6}  {}", rank + 1, c.node_index, c.contribution, c.tokens.join(" "))
            .unwrap();
    }
    out
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

const STYLE: &str = "body{font-family:sans-serif;max-width:60em;margin:2em auto;line-height:1.8}\
.note{font-family:monospace}\
.risk{border-bottom:2px solid #b2182b}\
.protective{border-bottom:2px solid #2166ac}\
table{border-collapse:collapse}td,th{padding:0.2em 0.8em;text-align:left}";

fn html(
    report: &AttributionReport,
    spans: &[&NodeContribution],
    runs: &[(usize, usize, Option<usize>)],
    scale: f64,
) -> String {
    let mut out = String::new();
    let id = escape(&report.visit_id);
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    writeln!(out, "<title>Visit {id}</title>\n<style>{STYLE}</style>\n</head>\n<body>").unwrap();
    writeln!(out, "<h1>Visit {id}</h1>").unwrap();
    writeln!(
        out,
        "<p>Predicted probability of readmission: <strong>{:.4}</strong> (logit {:+.4}, bias {:+.4})</p>",
        report.probability, report.logit, report.dense_bias
    )
    .unwrap();
    out.push_str("<p class=\"note\">");
    for (i, &(a, b, mark)) in runs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let text = escape(&report.tokens[a..b].join(" "));
        match mark {
            None => out.push_str(&text),
            Some(rank) => {
                let c = spans[rank];
                let alpha = (c.contribution.abs() / scale).clamp(0.1, 1.0) * 0.6;
                let (class, rgb) =
                    if c.contribution > 0.0 { ("risk", "178,24,43") } else { ("protective", "33,102,172") };
                write!(
                    out,
                    "<span class=\"{class}\" style=\"background-color:rgba({rgb},{alpha:.3})\" title=\"node {} contribution {:+.6}\">{text}</span>",
                    c.node_index, c.contribution
                )
                .unwrap();
            }
        }
    }
    out.push_str("</p>\n<table>\n<tr><th>rank</th><th>node</th><th>contribution</th><th>trigram</th></tr>\n");
    for (rank, c) in spans.iter().enumerate() {
        writeln!(
            out,
            "<tr><td>{}</td><td>{}</td><td>{:+.6}</td><td>{}</td></tr>",
            rank + 1,
            c.node_index,
            c.contribution,
            escape(&c.tokens.join(" "))
        )
        .unwrap();
    }
    out.push_str("</table>\n</body>\n</html>\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub visit_id: String,
    pub probability: f64,
    pub label: Option<bool>,
    pub href: String,
}

/// Index page linking the per-visit reports.
pub fn render_index(title: &str, entries: &[IndexEntry]) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    writeln!(out, "<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>", escape(title)).unwrap();
    writeln!(out, "<h1>{}</h1>", escape(title)).unwrap();
    out.push_str("<table>\n<tr><th>visit</th><th>probability</th><th>label</th></tr>\n");
    for e in entries {
        let label = match e.label {
            Some(true) => "readmitted",
            Some(false) => "not readmitted",
            None => "",
        };
        writeln!(
            out,
            "<tr><td><a href=\"{}\">{}</a></td><td>{:.4}</td><td>{label}</td></tr>",
            escape(&e.href),
            escape(&e.visit_id),
            e.probability
        )
        .unwrap();
    }
    out.push_str("</table>\n</body>\n</html>\n");
    out
}

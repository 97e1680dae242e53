//! HTML report of a checked assurance case.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use assurkit::checker::{CheckReport, ObligationOutcome};
use assurkit::sacm::{AssetVariant, Fragment, Gid, MultiLangString};

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn link(g: &Gid) -> String {
    format!("<a href=\"#{0}\">{0}</a>", esc(g.as_str()))
}

fn links(gs: &[Gid]) -> String {
    gs.iter().map(link).collect::<Vec<_>>().join(", ")
}

fn content(c: &MultiLangString) -> String {
    c.fragments()
        .iter()
        .map(|f| match f {
            Fragment::Text { body, .. } => esc(body),
            Fragment::Ref { kind, target } => format!("{} {}", esc(&kind.to_string()), link(target)),
            Fragment::Formal { lang, body } => format!("<code title=\"{}\">{}</code>", esc(lang), esc(body)),
        })
        .collect()
}

/// Render `dot` to SVG with Graphviz, if it is installed.
pub fn render_svg(dot: &str) -> Option<String> {
    let mut child = Command::new("dot")
        .arg("-Tsvg")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    child.stdin.take()?.write_all(dot.as_bytes()).ok()?;
    let out = child.wait_with_output().ok()?;
    if !out.status.success() {
        return None;
    }
    let text = String::from_utf8(out.stdout).ok()?;
    text.find("<svg").map(|i| text[i..].to_string())
}

/// The report page. `svg` is embedded when given, otherwise `dot_link` is linked.
pub fn render_html(report: &CheckReport, svg: Option<&str>, dot_link: &str) -> String {
    let model = &report.elaboration.model;
    let mut h = String::new();
    h.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Assurance case report</title>\n");
    h.push_str(
        "<style>body{font-family:sans-serif;max-width:70em;margin:auto}table{border-collapse:collapse}\
td,th{border:1px solid #ccc;padding:.3em .6em;text-align:left;vertical-align:top}\
.Supported,.pass{color:#060}.Defeated,.fail,.error{color:#a00}.NeedsSupport{color:#a60}</style>\n</head>\n<body>\n",
    );
    let _ = writeln!(
        h,
        "<h1>Assurance case report</h1>\n<p>{} error(s), {} warning(s)</p>",
        report.errors(),
        report.warnings()
    );

    h.push_str("<h2>Claims</h2>\n<table>\n<tr><th>Claim</th><th>Declared</th><th>Status</th><th>Content</th></tr>\n");
    for a in model.assets.values() {
        if let AssetVariant::Claim { declaration } = &a.variant {
            let status = report.statuses.get(&a.gid).map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                h,
                "<tr id=\"{0}\"><td>{0}</td><td>{1:?}</td><td class=\"{2}\">{2}</td><td>{3}</td></tr>",
                esc(a.gid.as_str()),
                declaration,
                status,
                content(&a.content)
            );
        }
    }
    h.push_str("</table>\n");

    h.push_str("<h2>Relationships</h2>\n<table>\n<tr><th>Relationship</th><th>Kind</th><th>Sources</th><th>Targets</th><th>Content</th></tr>\n");
    for a in model.assets.values() {
        if let AssetVariant::Relationship(r) = &a.variant {
            let kind = if r.is_counter { format!("{:?} (counter)", r.kind) } else { format!("{:?}", r.kind) };
            let _ = writeln!(
                h,
                "<tr id=\"{0}\"><td>{0}</td><td>{1}</td><td>{2}</td><td>{3}</td><td>{4}</td></tr>",
                esc(a.gid.as_str()),
                kind,
                links(&r.source),
                links(&r.target),
                content(&a.content)
            );
        }
    }
    h.push_str("</table>\n");

    h.push_str("<h2>Other argument assets</h2>\n<table>\n<tr><th>Asset</th><th>Kind</th><th>Content</th></tr>\n");
    for a in model.assets.values() {
        let extra = match &a.variant {
            AssetVariant::ArtifactReference { referenced } => format!("references {}", links(referenced)),
            AssetVariant::ArgumentReasoning => String::new(),
            _ => continue,
        };
        let _ = writeln!(
            h,
            "<tr id=\"{0}\"><td>{0}</td><td>{1}</td><td>{2} {3}</td></tr>",
            esc(a.gid.as_str()),
            a.kind(),
            content(&a.content),
            extra
        );
    }
    h.push_str("</table>\n");

    h.push_str("<h2>Artifacts</h2>\n<table>\n<tr><th>Artifact</th><th>Kind</th><th>Version</th><th>Date</th><th>Content</th></tr>\n");
    for a in model.artifacts.values() {
        let ends = if a.source.is_empty() {
            String::new()
        } else {
            format!("<br>{} &rarr; {}", links(&a.source), links(&a.target))
        };
        let _ = writeln!(
            h,
            "<tr id=\"{0}\"><td>{0}</td><td>{1}</td><td>{2}</td><td>{3}</td><td>{4}{5}</td></tr>",
            esc(a.gid.as_str()),
            a.kind.entity_kind(),
            esc(&a.version),
            esc(&a.date),
            content(&a.content),
            ends
        );
    }
    for e in model.expressions.values() {
        let _ = writeln!(
            h,
            "<tr id=\"{0}\"><td>{0}</td><td>Expression ({1})</td><td></td><td></td><td>{2}</td></tr>",
            esc(e.gid.as_str()),
            esc(&e.lang),
            esc(&e.body)
        );
    }
    for c in model.constants.values() {
        let _ = writeln!(
            h,
            "<tr id=\"{0}\"><td>{0}</td><td>Constant</td><td></td><td></td><td>{1}</td></tr>",
            esc(c.gid.as_str()),
            esc(&c.description)
        );
    }
    h.push_str("</table>\n");

    h.push_str("<h2>Obligations</h2>\n<table>\n<tr><th>Obligation</th><th>Specification</th><th>Verdict</th></tr>\n");
    for o in model.obligations.values() {
        let verdict = match report.verdicts.get(&o.gid) {
            Some(ObligationOutcome::Pass { model }) => format!("<span class=\"pass\">Pass</span> over {}", esc(model)),
            Some(ObligationOutcome::Fail { model, counterexample }) => format!(
                "<span class=\"fail\">Fail</span> over {}<pre>{}</pre>",
                esc(model),
                esc(counterexample)
            ),
            Some(ObligationOutcome::Error { code, message }) => {
                format!("<span class=\"error\">{}</span> {}", esc(code), esc(message))
            }
            None => String::new(),
        };
        let _ = writeln!(
            h,
            "<tr id=\"{0}\"><td>{0}</td><td><code>{1}</code></td><td>{2}</td></tr>",
            esc(o.gid.as_str()),
            esc(&o.spec),
            verdict
        );
    }
    h.push_str("</table>\n");

    if !report.diagnostics.is_empty() {
        h.push_str("<h2>Diagnostics</h2>\n<ul>\n");
        for d in &report.diagnostics {
            let _ = writeln!(h, "<li>{}</li>", esc(&d.to_string()));
        }
        h.push_str("</ul>\n");
    }

    h.push_str("<h2>Graph</h2>\n");
    match svg {
        Some(svg) => {
            h.push_str(svg);
            h.push('\n');
        }
        None => {
            let _ = writeln!(h, "<p>Graphviz is not installed. The graph is in <a href=\"{0}\">{0}</a>.</p>", esc(dot_link));
        }
    }
    h.push_str("</body>\n</html>\n");
    h
}

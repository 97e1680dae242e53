//! Watch mode: poll the inputs, recheck incrementally and print what changed.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use assurkit::checker::{render_text, CheckConfig, Diagnostic, Source};
use assurkit::depgraph::{CheckState, Edit};

pub const POLL: Duration = Duration::from_millis(100);

/// Polls a fixed set of files by content.
#[derive(Debug)]
pub struct Watcher {
    files: Vec<PathBuf>,
    seen: BTreeMap<String, Option<String>>,
}

impl Watcher {
    pub fn new(files: Vec<PathBuf>) -> Watcher {
        let mut w = Watcher { files, seen: BTreeMap::new() };
        w.seen = w.snapshot();
        w
    }

    fn snapshot(&self) -> BTreeMap<String, Option<String>> {
        self.files
            .iter()
            .map(|p| (p.display().to_string(), fs::read_to_string(p).ok()))
            .collect()
    }

    /// The files as last seen; unreadable ones are left out.
    pub fn sources(&self) -> Vec<Source> {
        self.seen
            .iter()
            .filter_map(|(f, t)| t.as_ref().map(|t| Source::new(f.clone(), t.clone())))
            .collect()
    }

    /// Differences between the last snapshot and the current files.
    pub fn poll(&mut self) -> Vec<Edit> {
        let now = self.snapshot();
        let edits = now
            .iter()
            .filter(|(f, t)| self.seen.get(*f) != Some(*t))
            .map(|(f, t)| Edit { file: f.clone(), text: t.clone() })
            .collect();
        self.seen = now;
        edits
    }

    /// Block until something changes and then stays unchanged for one poll
    /// interval. Bursts are coalesced into one edit per file.
    pub fn next_batch(&mut self) -> Vec<Edit> {
        let mut pending: BTreeMap<String, Option<String>> = BTreeMap::new();
        loop {
            thread::sleep(POLL);
            let edits = self.poll();
            if edits.is_empty() && !pending.is_empty() {
                return pending.into_iter().map(|(file, text)| Edit { file, text }).collect();
            }
            pending.extend(edits.into_iter().map(|e| (e.file, e.text)));
        }
    }
}

/// Diagnostics that disappeared and appeared, as rendered lines.
pub fn diff_lines(old: &[Diagnostic], new: &[Diagnostic]) -> (Vec<String>, Vec<String>) {
    let render = |ds: &[Diagnostic]| -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for d in ds {
            *m.entry(d.to_string()).or_insert(0) += 1;
        }
        m
    };
    let (a, b) = (render(old), render(new));
    let surplus = |x: &BTreeMap<String, usize>, y: &BTreeMap<String, usize>| -> Vec<String> {
        x.iter()
            .flat_map(|(k, n)| std::iter::repeat_n(k.clone(), n.saturating_sub(*y.get(k).unwrap_or(&0))))
            .collect()
    };
    (surplus(&a, &b), surplus(&b, &a))
}

/// Check `sources`, then recheck after every batch `next_batch` yields until
/// it yields `None`. Returns the final state.
pub fn watch_loop(
    sources: &[Source],
    config: CheckConfig,
    mut next_batch: impl FnMut() -> Option<Vec<Edit>>,
    out: &mut dyn Write,
) -> io::Result<CheckState> {
    let mut state = CheckState::new(sources, config);
    write!(out, "{}", render_text(state.diagnostics()))?;
    summary(&state, out)?;
    while let Some(edits) = next_batch() {
        if edits.is_empty() {
            continue;
        }
        let (next, recheck) = state.apply(&edits);
        let (gone, came) = diff_lines(state.diagnostics(), next.diagnostics());
        writeln!(
            out,
            "recheck: {} file(s) edited, {} node(s) changed, {} affected",
            edits.len(),
            recheck.changed.len(),
            recheck.affected.len()
        )?;
        for l in gone {
            writeln!(out, "- {l}")?;
        }
        for l in came {
            writeln!(out, "+ {l}")?;
        }
        summary(&next, out)?;
        out.flush()?;
        state = next;
    }
    Ok(state)
}

fn summary(state: &CheckState, out: &mut dyn Write) -> io::Result<()> {
    let errors = state.diagnostics().iter().filter(|d| d.is_error()).count();
    writeln!(out, "{} error(s), {} warning(s)", errors, state.diagnostics().len() - errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use assurkit::argdsl::Span;

    fn d(code: &str, line: usize) -> Diagnostic {
        Diagnostic::error(code, Span::new("f.asr", (line, 1), (line, 2)), "m")
    }

    #[test]
    fn diff_counts_duplicates() {
        let (gone, came) = diff_lines(&[d("E010", 1), d("E010", 1), d("E011", 2)], &[d("E010", 1), d("E020", 3)]);
        assert_eq!(gone.len(), 2);
        assert_eq!(came, vec![d("E020", 3).to_string()]);
    }
}

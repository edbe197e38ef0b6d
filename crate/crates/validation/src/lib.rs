//! Reporting harness for the acceptance suite in `tests/acceptance.rs`.
//!
//! Each criterion is a closure returning an [`Outcome`]; [`run`] evaluates
//! the selected ones in order, prints one PASS/FAIL line per criterion and a
//! summary, and returns the numbers of the failing criteria.

use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion<'a, S> {
    pub number: usize,
    pub name: &'static str,
    pub check: Box<dyn FnMut(&mut S) -> Outcome + 'a>,
}

impl<'a, S> Criterion<'a, S> {
    pub fn new(number: usize, name: &'static str, check: impl FnMut(&mut S) -> Outcome + 'a) -> Self {
        Self {
            number,
            name,
            check: Box::new(check),
        }
    }
}

/// Criterion numbers given as plain integer arguments; empty means all.
pub fn selection(args: impl IntoIterator<Item = String>) -> Vec<usize> {
    args.into_iter().filter_map(|a| a.parse().ok()).collect()
}

pub fn format_line(number: usize, name: &str, outcome: &Outcome, seconds: f64) -> String {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    format!("criterion {number:>2} {verdict} {name} [{seconds:.1}s]: {}", outcome.detail)
}

/// Runs the selected criteria with shared state `state`; returns the failures.
pub fn run<S>(criteria: Vec<Criterion<'_, S>>, selected: &[usize], state: &mut S) -> Vec<usize> {
    let mut failed = Vec::new();
    let mut ran = 0;
    for mut c in criteria {
        if !selected.is_empty() && !selected.contains(&c.number) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)(state);
        ran += 1;
        println!("{}", format_line(c.number, c.name, &outcome, start.elapsed().as_secs_f64()));
        if !outcome.pass {
            failed.push(c.number);
        }
    }
    let tail = if failed.is_empty() {
        String::new()
    } else {
        format!("; failing: {failed:?}")
    };
    println!("acceptance: {} of {ran} criteria passed{tail}", ran - failed.len());
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let line = format_line(7, "safety", &Outcome::new(true, "ok"), 0.04);
        assert_eq!(line, "criterion  7 PASS safety [0.0s]: ok");
        let line = format_line(12, "golden", &Outcome::new(false, "1 mismatch"), 1.25);
        assert_eq!(line, "criterion 12 FAIL golden [1.2s]: 1 mismatch");
    }

    #[test]
    fn selection_ignores_flags() {
        let args = ["--nocapture", "3", "x", "11"].map(String::from);
        assert_eq!(selection(args), vec![3, 11]);
    }

    #[test]
    fn run_reports_failures_and_respects_selection() {
        let mut calls = Vec::new();
        let criteria = vec![
            Criterion::new(1, "a", |s: &mut Vec<usize>| {
                s.push(1);
                Outcome::new(true, "")
            }),
            Criterion::new(2, "b", |s: &mut Vec<usize>| {
                s.push(2);
                Outcome::new(false, "")
            }),
            Criterion::new(3, "c", |s: &mut Vec<usize>| {
                s.push(3);
                Outcome::new(false, "")
            }),
        ];
        let failed = run(criteria, &[1, 2], &mut calls);
        assert_eq!(failed, vec![2]);
        assert_eq!(calls, vec![1, 2]);
    }
}

//! Evaluation and timing reports: JSON plus a plain-text table.

use std::fmt::Write as _;

use dvdet_core::model::{History, Metrics};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore {
    pub class: String,
    pub support: u64,
    /// One-vs-rest accuracy.
    pub accuracy: f64,
    /// `None` when the class has no support.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub task: String,
    pub mode: String,
    pub samples: u64,
    pub accuracy: f64,
    pub existence_accuracy: f64,
    pub mean_loss: f64,
    pub classes: Vec<ClassScore>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
}

impl Report {
    pub fn new(task: &str, mode: &str, classes: &[String], m: &Metrics) -> Report {
        Report {
            task: task.into(),
            mode: mode.into(),
            samples: m.total,
            accuracy: m.accuracy,
            existence_accuracy: m.existence_accuracy,
            mean_loss: m.mean_loss,
            classes: classes
                .iter()
                .enumerate()
                .map(|(c, name)| ClassScore {
                    class: name.clone(),
                    support: m.support[c],
                    accuracy: m.one_vs_rest_accuracy[c],
                    recall: m.recall[c],
                })
                .collect(),
            confusion: m.confusion.clone(),
        }
    }

    /// One row per model variant: per vulnerable class Acc and Recall
    /// (percent), then existence Acc. The safe class only enters through the
    /// existence column.
    pub fn table(rows: &[Report]) -> String {
        let Some(first) = rows.first() else {
            return String::new();
        };
        let vulnerable: Vec<&str> = first.classes.iter().skip(1).map(|c| c.class.as_str()).collect();
        let mut head = format!("{:<16}", "Mode");
        let mut sub = format!("{:<16}", "");
        for name in &vulnerable {
            write!(head, " | {:^17}", name).unwrap();
            write!(sub, " | {:>8} {:>8}", "Acc", "Recall").unwrap();
        }
        write!(head, " | {:^9}", "Existence").unwrap();
        write!(sub, " | {:>9}", "Acc").unwrap();
        let mut out = format!("{head}\n{sub}\n{}\n", "-".repeat(sub.len()));
        let pct = |v: f64| format!("{:.2}", 100.0 * v);
        for r in rows {
            let mut line = format!("{:<16}", r.mode);
            for c in r.classes.iter().skip(1) {
                let recall = c.recall.map_or_else(|| "n/a".to_string(), pct);
                write!(line, " | {:>8} {:>8}", pct(c.accuracy), recall).unwrap();
            }
            write!(line, " | {:>9}", pct(r.existence_accuracy)).unwrap();
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Training history with the run's final report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport<'a> {
    pub history: &'a History,
    pub evaluated_on: &'a str,
    pub report: &'a Report,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitTiming {
    pub id: String,
    pub seconds: f64,
    /// Stage error for contracts that failed; their time still counts.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub units: Vec<UnitTiming>,
    pub total_seconds: f64,
    pub unit_seconds: Option<f64>,
}

impl BenchReport {
    pub fn new(units: Vec<UnitTiming>) -> BenchReport {
        let total_seconds: f64 = units.iter().map(|u| u.seconds).sum();
        let unit_seconds = (!units.is_empty()).then(|| total_seconds / units.len() as f64);
        BenchReport {
            units,
            total_seconds,
            unit_seconds,
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for u in &self.units {
            let status = u.error.as_deref().unwrap_or("ok");
            writeln!(out, "{:<24} {:>10.4}  {status}", u.id, u.seconds).unwrap();
        }
        let unit = self.unit_seconds.map_or_else(|| "n/a".to_string(), |s| format!("{s:.4}"));
        writeln!(out, "Unit Detection Time(s)   {unit:>10}").unwrap();
        writeln!(out, "Total Detection Time(s)  {:>10.4}", self.total_seconds).unwrap();
        out
    }
}

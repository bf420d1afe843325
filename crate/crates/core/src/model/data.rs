use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::WeightedCodeGraph;
use crate::cfg::ControlFlowPath;
use crate::error::domain;
use crate::nn::Rng;
use crate::Result;

/// Which views feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "kebab-case"))]
pub enum ViewMode {
    #[default]
    Dual,
    SourceOnly,
    BytecodeOnly,
}

impl ViewMode {
    pub fn uses_graph(self) -> bool {
        !matches!(self, ViewMode::BytecodeOnly)
    }

    pub fn uses_sequence(self) -> bool {
        !matches!(self, ViewMode::SourceOnly)
    }

    pub fn name(self) -> &'static str {
        match self {
            ViewMode::Dual => "dual",
            ViewMode::SourceOnly => "source-only",
            ViewMode::BytecodeOnly => "bytecode-only",
        }
    }
}

/// Vulnerability existence (2 classes) or vulnerability type (K classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "kebab-case"))]
pub enum Task {
    Existence,
    #[default]
    Type,
}

impl Task {
    /// Default class names; class 0 is always the safe class.
    pub fn default_classes(self) -> Vec<String> {
        let names: &[&str] = match self {
            Task::Existence => &["safe", "vulnerable"],
            Task::Type => &["safe", "ReEn", "LoWc", "AcCl"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Existence => "existence",
            Task::Type => "type",
        }
    }
}

/// One labelled contract with whichever views are available.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub graph: Option<WeightedCodeGraph>,
    pub paths: Vec<ControlFlowPath>,
    pub label: usize,
    pub label_source: String,
}

/// Stratified `k`-fold partition of sample indices as `(train, validation)`
/// pairs.
///
/// Indices are grouped by label (ascending), each group is shuffled, and all
/// groups are dealt to folds round-robin with one running counter, so earlier
/// folds receive the remainder.
pub fn kfold_split(labels: &[usize], k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(domain(format!("cross-validation needs k ≥ 2, got {k}")));
    }
    if labels.len() < k {
        return Err(domain(format!("{} samples cannot fill {k} folds", labels.len())));
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        groups.entry(y).or_default().push(i);
    }
    let mut rng = Rng::new(seed, FOLD_STREAM);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut next = 0;
    for members in groups.values_mut() {
        rng.shuffle(members);
        for &i in members.iter() {
            folds[next % k].push(i);
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let mut val = folds[f].clone();
            val.sort_unstable();
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            train.sort_unstable();
            (train, val)
        })
        .collect())
}

const FOLD_STREAM: u64 = 2;

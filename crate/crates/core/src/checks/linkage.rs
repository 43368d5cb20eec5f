use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::DeclaredLabels;
use crate::script::ScriptFacts;
use crate::supplement::{ArtifactLabel, SupplementInventory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProducerKind {
    OutputFile,
    OutputWrite,
    Comment,
}

/// One piece of evidence that some file produces a label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Producer {
    pub kind: ProducerKind,
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageReport {
    pub produced: BTreeMap<ArtifactLabel, BTreeSet<Producer>>,
    pub unlinked_labels: BTreeSet<ArtifactLabel>,
    pub orphan_outputs: BTreeSet<String>,
}

/// Links declared labels to labeled output files, output writes and
/// artifact comments.
///
/// `produced` records every label with evidence, declared or not. With no
/// declared labels nothing can be unlinked or orphaned.
pub fn build_linkage(
    inventory: &SupplementInventory,
    facts: &[ScriptFacts],
    declared: &DeclaredLabels,
) -> LinkageReport {
    let mut produced: BTreeMap<ArtifactLabel, BTreeSet<Producer>> = BTreeMap::new();
    let mut output_files = Vec::new();
    for entry in &inventory.entries {
        if let Some(label) = entry.artifact_label {
            output_files.push((label, entry.rel_path.clone()));
            produced.entry(label).or_default().insert(Producer {
                kind: ProducerKind::OutputFile,
                path: entry.rel_path.clone(),
                line: None,
            });
        }
    }
    for f in facts {
        for w in &f.output_writes {
            if let Some(label) = w.inferred_label {
                produced.entry(label).or_default().insert(Producer {
                    kind: ProducerKind::OutputWrite,
                    path: f.rel_path.clone(),
                    line: Some(w.line),
                });
            }
        }
        for c in &f.artifact_comments {
            produced.entry(c.label).or_default().insert(Producer {
                kind: ProducerKind::Comment,
                path: f.rel_path.clone(),
                line: Some(c.line),
            });
        }
    }
    if declared.is_empty() {
        return LinkageReport {
            produced,
            ..LinkageReport::default()
        };
    }
    let unlinked_labels = declared
        .labels
        .iter()
        .filter(|l| !produced.contains_key(l))
        .copied()
        .collect();
    let orphan_outputs = output_files
        .into_iter()
        .filter(|(label, _)| !declared.labels.contains(label))
        .map(|(_, path)| path)
        .collect();
    LinkageReport {
        produced,
        unlinked_labels,
        orphan_outputs,
    }
}

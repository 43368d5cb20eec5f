//! Recognizes "Figure 2" / "Tables 1 and 3" style mentions in free text.

use std::sync::LazyLock;

use regex::Regex;

use crate::supplement::{ArtifactKind, ArtifactLabel};

static MENTION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(figures?|fig\.|tables?|tab\.)\s*([0-9]+(?:\s*(?:,|&|\band\b)\s*[0-9]+)*)").unwrap()
});

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]+").unwrap());

/// All labels mentioned in `text`, in order of appearance, without duplicates.
pub fn find_label_mentions(text: &str) -> Vec<ArtifactLabel> {
    let mut out: Vec<ArtifactLabel> = Vec::new();
    for caps in MENTION.captures_iter(text) {
        let kind = if caps[1].to_ascii_lowercase().starts_with("fig") {
            ArtifactKind::Figure
        } else {
            ArtifactKind::Table
        };
        for num in NUMBER.find_iter(&caps[2]) {
            if let Some(label) = num.as_str().parse().ok().and_then(|n| ArtifactLabel::new(kind, n)) {
                if !out.contains(&label) {
                    out.push(label);
                }
            }
        }
    }
    out
}

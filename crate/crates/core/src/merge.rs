//! Union of subgraphs into a universal FOON.

use crate::model::UniversalFoon;
use crate::parser::SubgraphDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MergeStats {
    pub total_input_units: usize,
    pub duplicates_removed: usize,
}

/// Inserts every unit of every document, in document order and then file
/// order. Exact duplicates are dropped; the first occurrence wins.
pub fn merge<'a>(subgraphs: impl IntoIterator<Item = &'a SubgraphDocument>) -> UniversalFoon {
    let mut foon = UniversalFoon::new();
    for doc in subgraphs {
        for unit in &doc.units {
            foon.insert_unit(unit.clone());
        }
    }
    foon
}

pub fn merge_stats(subgraphs: &[SubgraphDocument], result: &UniversalFoon) -> MergeStats {
    let total_input_units: usize = subgraphs.iter().map(|d| d.units.len()).sum();
    MergeStats {
        total_input_units,
        duplicates_removed: total_input_units - result.len(),
    }
}

/// Re-wraps a merged FOON as a single document, e.g. for serialization.
pub fn to_document(foon: &UniversalFoon) -> SubgraphDocument {
    SubgraphDocument {
        units: foon.units().to_vec(),
        source_path: String::new(),
    }
}

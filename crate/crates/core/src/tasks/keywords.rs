//! Keyword extraction and entity matching for questions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::normalize_entity;
use crate::ids::GraphId;
use crate::store::State;

/// Common English function words dropped from questions.
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
    "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
    "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
    "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor",
    "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
    "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves", "also", "may", "might", "must", "shall", "tell", "show", "list", "give", "describe",
    "explain", "please", "many", "much", "s", "t", "don", "get", "let", "like", "make",
];

/// Lowercased alphanumeric tokens minus stop words, followed by bigrams of
/// adjacent kept tokens. Order-preserving, no repeats.
pub fn extract_keywords(question: &str) -> Vec<String> {
    let stop: HashSet<&str> = STOP_WORDS.iter().copied().collect();
    let lowered = question.to_lowercase();
    let tokens: Vec<&str> = lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stop.contains(t))
        .collect();
    let bigrams = tokens.windows(2).map(|w| format!("{} {}", w[0], w[1]));
    let mut seen = HashSet::new();
    tokens
        .iter()
        .map(|t| t.to_string())
        .chain(bigrams)
        .filter(|k| seen.insert(k.clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMatch {
    pub entity: String,
    pub score: u32,
}

/// Each keyword adds 2 when it equals the entity's normalized name and 1
/// when it is only a case-insensitive substring of it. Highest score first,
/// ties by name; zero scores are dropped.
pub fn match_entities(state: &State, graph_id: &GraphId, keywords: &[String]) -> Result<Vec<EntityMatch>> {
    let graph = state.graph(graph_id)?;
    let keywords: Vec<String> = keywords.iter().map(|k| k.to_lowercase()).collect();
    let mut out: Vec<EntityMatch> = graph
        .entities()
        .filter_map(|e| {
            let lower = e.name.to_lowercase();
            let normalized = normalize_entity(&e.name);
            let score = keywords
                .iter()
                .map(|k| {
                    if normalize_entity(k) == normalized {
                        2
                    } else if lower.contains(k.as_str()) {
                        1
                    } else {
                        0
                    }
                })
                .sum();
            (score > 0).then(|| EntityMatch {
                entity: e.name.clone(),
                score,
            })
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.entity.cmp(&b.entity)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keywords_from_a_question() {
        let k = extract_keywords("What metrics does TCFD recommend?");
        assert_eq!(k, vec!["metrics", "tcfd", "recommend", "metrics tcfd", "tcfd recommend"]);
        assert!(extract_keywords("").is_empty());
        assert!(extract_keywords("the of and").is_empty());
        assert_eq!(extract_keywords("GHG ghg emissions"), vec!["ghg", "emissions", "ghg ghg", "ghg emissions"]);
    }

    #[test]
    fn stop_list_size() {
        let unique: HashSet<_> = STOP_WORDS.iter().collect();
        assert_eq!(unique.len(), STOP_WORDS.len());
        assert!((140..=170).contains(&STOP_WORDS.len()), "{}", STOP_WORDS.len());
    }
}

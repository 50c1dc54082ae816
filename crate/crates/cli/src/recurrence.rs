//! Detection of influence digraphs that reappear after a different one.
//! Purely observational.

use std::collections::HashMap;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Recurrence {
    pub hash: String,
    /// Last step before `t` with the same digraph.
    pub s: usize,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceReport {
    pub steps: usize,
    pub distinct_digraphs: usize,
    pub changes: usize,
    pub recurrences: Vec<Recurrence>,
}

pub fn find_recurrences<'a, I>(hashes: I) -> RecurrenceReport
where
    I: IntoIterator<Item = &'a str>,
{
    let mut last_seen: HashMap<&str, usize> = HashMap::new();
    let mut recurrences = Vec::new();
    let mut changes = 0;
    let mut previous: Option<&str> = None;
    let mut steps = 0;
    for (t, hash) in hashes.into_iter().enumerate() {
        steps += 1;
        if previous.is_some_and(|p| p != hash) {
            changes += 1;
            if let Some(&s) = last_seen.get(hash) {
                recurrences.push(Recurrence {
                    hash: hash.to_string(),
                    s,
                    t,
                });
            }
        }
        last_seen.insert(hash, t);
        previous = Some(hash);
    }
    RecurrenceReport {
        steps,
        distinct_digraphs: last_seen.len(),
        changes,
        recurrences,
    }
}

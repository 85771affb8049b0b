use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use kasus_core::genset::Dataset;
use kasus_core::metrics::FillerKind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentConfig {
    pub test_items: usize,
    pub acceptable_items: usize,
    pub max_per_template: usize,
    /// One filler after every `filler_every` test items; 0 disables fillers.
    pub filler_every: usize,
    pub warmup_items: usize,
    /// Global number of annotators each test sentence may be assigned to.
    pub target_annotations: u32,
}

impl Default for AssignmentConfig {
    fn default() -> Self {
        AssignmentConfig {
            test_items: 216,
            acceptable_items: 54,
            max_per_template: 5,
            filler_every: 12,
            warmup_items: 6,
            target_annotations: 3,
        }
    }
}

impl AssignmentConfig {
    pub fn filler_count(&self) -> usize {
        self.test_items.checked_div(self.filler_every).unwrap_or(0)
    }

    pub fn total_items(&self) -> usize {
        self.warmup_items + self.test_items + self.filler_count()
    }

    pub fn validate(&self) -> ServiceResult<()> {
        if self.acceptable_items > self.test_items {
            return Err(ServiceError::Config(
                "acceptable_items exceeds test_items".into(),
            ));
        }
        if self.max_per_template == 0 || self.target_annotations == 0 {
            return Err(ServiceError::Config(
                "max_per_template and target_annotations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filler {
    pub id: String,
    pub text: String,
    pub kind: FillerKind,
}

/// Reads fillers from JSONL with fields `id`, `text` and `kind`
/// (`acceptable` or `violation`).
pub fn load_fillers(reader: impl BufRead) -> ServiceResult<Vec<Filler>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let filler: Filler = serde_json::from_str(trimmed)
            .map_err(|e| ServiceError::Config(format!("filler line {}: {e}", idx + 1)))?;
        if filler.kind == FillerKind::None {
            return Err(ServiceError::Config(format!(
                "filler line {}: kind must be acceptable or violation",
                idx + 1
            )));
        }
        if !seen.insert(filler.id.clone()) {
            return Err(ServiceError::Config(format!(
                "duplicate filler id {:?}",
                filler.id
            )));
        }
        out.push(filler);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestItem {
    pub id: String,
    pub template_id: String,
    pub acceptable: bool,
    pub text: String,
}

/// Everything that can be put in front of an annotator.
#[derive(Debug, Clone)]
pub struct ItemPool {
    tests: Vec<TestItem>,
    fillers: Vec<Filler>,
    texts: HashMap<String, String>,
    dataset_hash: String,
}

impl ItemPool {
    pub fn new(dataset: &Dataset, fillers: Vec<Filler>) -> ServiceResult<Self> {
        let tests: Vec<TestItem> = dataset
            .records()
            .iter()
            .map(|r| TestItem {
                id: r.id.clone(),
                template_id: r.template_id.clone(),
                acceptable: r.acceptable,
                text: r.text.clone(),
            })
            .collect();
        let mut texts = HashMap::new();
        for (id, text) in tests
            .iter()
            .map(|t| (&t.id, &t.text))
            .chain(fillers.iter().map(|f| (&f.id, &f.text)))
        {
            if texts.insert(id.clone(), text.clone()).is_some() {
                return Err(ServiceError::Config(format!(
                    "filler id {id:?} collides with another item"
                )));
            }
        }
        Ok(ItemPool {
            tests,
            fillers,
            texts,
            dataset_hash: dataset.content_hash(),
        })
    }

    pub fn text(&self, id: &str) -> Option<&str> {
        self.texts.get(id).map(String::as_str)
    }

    pub fn tests(&self) -> &[TestItem] {
        &self.tests
    }

    pub fn fillers(&self) -> &[Filler] {
        &self.fillers
    }

    pub fn dataset_hash(&self) -> &str {
        &self.dataset_hash
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Test,
    Filler,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentItem {
    pub sentence_id: String,
    pub kind: ItemKind,
    pub filler_kind: FillerKind,
    pub warmup: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub annotator_id: String,
    pub seed: u64,
    pub items: Vec<AssignmentItem>,
}

impl Assignment {
    pub fn test_ids(&self) -> impl Iterator<Item = &str> {
        self.items
            .iter()
            .filter(|i| i.kind == ItemKind::Test)
            .map(|i| i.sentence_id.as_str())
    }
}

/// Global bookkeeping consulted when assigning: how many annotators each
/// test sentence is already assigned to, and what each annotator has seen.
#[derive(Debug, Clone, Default)]
pub struct Usage {
    pub assigned: HashMap<String, u32>,
    pub seen: HashMap<String, HashSet<String>>,
}

impl Usage {
    pub fn record(&mut self, assignment: &Assignment) {
        for id in assignment.test_ids() {
            *self.assigned.entry(id.to_string()).or_default() += 1;
        }
        self.seen
            .entry(assignment.annotator_id.clone())
            .or_default()
            .extend(assignment.items.iter().map(|i| i.sentence_id.clone()));
    }
}

fn pick_fillers(
    pool: &[&Filler],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> ServiceResult<Vec<AssignmentItem>> {
    let mut by_kind: [Vec<&Filler>; 2] = [
        pool.iter()
            .copied()
            .filter(|f| f.kind == FillerKind::Acceptable)
            .collect(),
        pool.iter()
            .copied()
            .filter(|f| f.kind == FillerKind::Violation)
            .collect(),
    ];
    for kind in &mut by_kind {
        kind.shuffle(rng);
    }
    // Alternate kinds so both appear whenever two or more fillers are used.
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let f = by_kind[i % 2]
            .pop()
            .or_else(|| by_kind[(i + 1) % 2].pop())
            .ok_or(ServiceError::InsufficientFillers)?;
        out.push(AssignmentItem {
            sentence_id: f.id.clone(),
            kind: ItemKind::Filler,
            filler_kind: f.kind,
            warmup: false,
        });
    }
    Ok(out)
}

/// Draws a random assignment for `annotator_id` that respects the per-item
/// composition rules and the global annotation target.
///
/// Candidates are shuffled with a ChaCha generator seeded by `seed` and taken
/// greedily, acceptable sentences first, subject to the per-template limit.
/// Identical inputs therefore give identical assignments.
pub fn create_assignment(
    annotator_id: &str,
    pool: &ItemPool,
    usage: &Usage,
    config: &AssignmentConfig,
    seed: u64,
) -> ServiceResult<Assignment> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let empty = HashSet::new();
    let seen = usage.seen.get(annotator_id).unwrap_or(&empty);
    let available = |t: &&TestItem| {
        usage.assigned.get(&t.id).copied().unwrap_or(0) < config.target_annotations
            && !seen.contains(&t.id)
    };
    let mut acceptable: Vec<&TestItem> = pool
        .tests
        .iter()
        .filter(|t| t.acceptable)
        .filter(available)
        .collect();
    let mut violations: Vec<&TestItem> = pool
        .tests
        .iter()
        .filter(|t| !t.acceptable)
        .filter(available)
        .collect();
    acceptable.shuffle(&mut rng);
    violations.shuffle(&mut rng);

    let mut per_template: HashMap<&str, usize> = HashMap::new();
    let mut chosen: Vec<&TestItem> = Vec::with_capacity(config.test_items);
    for (candidates, quota) in [
        (&acceptable, config.acceptable_items),
        (&violations, config.test_items - config.acceptable_items),
    ] {
        let mut taken = 0;
        for item in candidates.iter() {
            if taken == quota {
                break;
            }
            let used = per_template.entry(&item.template_id).or_default();
            if *used < config.max_per_template {
                *used += 1;
                taken += 1;
                chosen.push(item);
            }
        }
        if taken < quota {
            return Err(ServiceError::InsufficientCapacity(format!(
                "only {taken} of {quota} {} sentences can still be assigned to {annotator_id}; close collection or raise the annotation target",
                if quota == config.acceptable_items { "acceptable" } else { "unacceptable" }
            )));
        }
    }
    chosen.shuffle(&mut rng);

    let fresh_fillers: Vec<&Filler> = pool
        .fillers
        .iter()
        .filter(|f| !seen.contains(&f.id))
        .collect();
    let needed = config.warmup_items + config.filler_count();
    if fresh_fillers.len() < needed {
        return Err(ServiceError::InsufficientFillers);
    }
    // Drawn alternately by kind, so each block of two or more has both kinds.
    let mut fillers = pick_fillers(&fresh_fillers, needed, &mut rng)?;
    let mut interleaved = fillers.split_off(config.warmup_items);
    for block in [&mut fillers, &mut interleaved] {
        if block.len() >= 2 && block.iter().all(|i| i.filler_kind == block[0].filler_kind) {
            return Err(ServiceError::InsufficientFillers);
        }
        block.shuffle(&mut rng);
    }

    let mut items = Vec::with_capacity(config.total_items());
    items.extend(
        fillers
            .into_iter()
            .map(|f| AssignmentItem { warmup: true, ..f }),
    );
    let mut interleaved = interleaved.into_iter();
    for (i, t) in chosen.into_iter().enumerate() {
        items.push(AssignmentItem {
            sentence_id: t.id.clone(),
            kind: ItemKind::Test,
            filler_kind: FillerKind::None,
            warmup: false,
        });
        if config.filler_every > 0 && (i + 1) % config.filler_every == 0 {
            items.extend(interleaved.next());
        }
    }
    Ok(Assignment {
        annotator_id: annotator_id.to_string(),
        seed,
        items,
    })
}

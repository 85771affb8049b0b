use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use kasus_core::metrics::{write_annotations, AnnotationRecord};
use serde::{Deserialize, Serialize};

use crate::assignment::{
    create_assignment, Assignment, AssignmentConfig, ItemKind, ItemPool, Usage,
};
use crate::error::{ServiceError, ServiceResult};
use crate::store::{Event, EventLog, LOG_VERSION};

pub const INSTRUCTION: &str = "Please judge how natural-sounding the sentence is. Move the slider from \
\"not natural\" to \"very natural\". Rate the sentence itself, irrespective of whether the situation \
described is likely.";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub assignment: AssignmentConfig,
    /// Refuse sessions for annotators an operator has not marked eligible.
    pub require_eligibility: bool,
    /// Seeds of sessions created without an explicit seed are derived from
    /// this and the session number.
    pub base_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Warmup,
    Active,
    Complete,
}

#[derive(Debug, Clone)]
struct Session {
    id: String,
    assignment: Assignment,
    submitted: HashMap<String, u8>,
    cursor: usize,
    warmup_len: usize,
}

impl Session {
    fn state(&self) -> SessionState {
        if self.cursor >= self.assignment.items.len() {
            SessionState::Complete
        } else if self.cursor < self.warmup_len {
            SessionState::Warmup
        } else {
            SessionState::Active
        }
    }

    fn progress(&self) -> Progress {
        Progress {
            rated: self.submitted.len(),
            total: self.assignment.items.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub rated: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub annotator_id: String,
    pub seed: u64,
    pub state: SessionState,
    pub warmup_items: usize,
    pub progress: Progress,
}

/// What the annotator sees next. Test items carry no label or case metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServedItem {
    pub sentence_id: String,
    pub text: String,
    pub warmup: bool,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextItem {
    pub session_id: String,
    pub state: SessionState,
    pub item: Option<ServedItem>,
    pub instruction: String,
    pub scale: Scale,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub min: u8,
    pub max: u8,
    pub min_label: String,
    pub max_label: String,
}

impl Default for Scale {
    fn default() -> Self {
        Scale {
            min: 0,
            max: 99,
            min_label: "not natural".into(),
            max_label: "very natural".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingAck {
    pub session_id: String,
    pub sentence_id: String,
    pub state: SessionState,
    pub progress: Progress,
}

#[derive(Debug)]
struct State {
    log: EventLog,
    sessions: HashMap<String, Session>,
    order: Vec<String>,
    usage: Usage,
    eligible: HashMap<String, bool>,
    ratings: Vec<AnnotationRecord>,
}

/// Session and rating bookkeeping behind one lock. Every mutation is applied
/// and durably logged while the lock is held, so concurrent callers observe
/// a single serial history.
#[derive(Debug)]
pub struct AnnotationService {
    pool: Arc<ItemPool>,
    config: ServiceConfig,
    state: Mutex<State>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl AnnotationService {
    /// A service with no persistence.
    pub fn in_memory(pool: ItemPool, config: ServiceConfig) -> ServiceResult<Self> {
        config.assignment.validate()?;
        Ok(Self::from_parts(
            Arc::new(pool),
            config,
            EventLog::in_memory(),
        ))
    }

    /// Opens the record log at `path`, replaying prior sessions and ratings.
    pub fn open(
        pool: ItemPool,
        config: ServiceConfig,
        path: impl AsRef<Path>,
    ) -> ServiceResult<Self> {
        config.assignment.validate()?;
        let (log, events) = EventLog::open(&path)?;
        let service = Self::from_parts(Arc::new(pool), config, log);
        let corrupt = |message: String| ServiceError::CorruptLog {
            path: path.as_ref().display().to_string(),
            message,
        };
        {
            let mut state = service.lock();
            match events.first() {
                None => {
                    let header = Event::Header {
                        version: LOG_VERSION,
                        dataset_hash: service.pool.dataset_hash().to_string(),
                    };
                    state.log.append(&header)?;
                }
                Some(Event::Header {
                    version,
                    dataset_hash,
                }) => {
                    if *version != LOG_VERSION {
                        return Err(corrupt(format!("unsupported log version {version}")));
                    }
                    if dataset_hash != service.pool.dataset_hash() {
                        return Err(corrupt(format!(
                            "log was written for dataset {dataset_hash}, not {}",
                            service.pool.dataset_hash()
                        )));
                    }
                }
                Some(_) => return Err(corrupt("missing header".into())),
            }
            for event in events.into_iter().skip(1) {
                service
                    .apply(&mut state, event)
                    .map_err(|e| corrupt(format!("replay failed: {e}")))?;
            }
        }
        Ok(service)
    }

    fn from_parts(pool: Arc<ItemPool>, config: ServiceConfig, log: EventLog) -> Self {
        AnnotationService {
            pool,
            config,
            state: Mutex::new(State {
                log,
                sessions: HashMap::new(),
                order: Vec::new(),
                usage: Usage::default(),
                eligible: HashMap::new(),
                ratings: Vec::new(),
            }),
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn pool(&self) -> &ItemPool {
        &self.pool
    }

    fn apply(&self, state: &mut State, event: Event) -> ServiceResult<()> {
        match event {
            Event::Header { .. } => return Err(ServiceError::Config("unexpected header".into())),
            Event::Eligibility {
                annotator_id,
                eligible,
            } => {
                state.eligible.insert(annotator_id, eligible);
            }
            Event::SessionCreated {
                session_id,
                assignment,
            } => {
                state.usage.record(&assignment);
                let warmup_len = assignment.items.iter().take_while(|i| i.warmup).count();
                state.order.push(session_id.clone());
                state.sessions.insert(
                    session_id.clone(),
                    Session {
                        id: session_id,
                        assignment,
                        submitted: HashMap::new(),
                        cursor: 0,
                        warmup_len,
                    },
                );
            }
            Event::Rating {
                session_id,
                sentence_id,
                raw,
                timestamp,
            } => {
                let session = state
                    .sessions
                    .get_mut(&session_id)
                    .ok_or_else(|| ServiceError::UnknownSession(session_id.clone()))?;
                let item = session
                    .assignment
                    .items
                    .get(session.cursor)
                    .filter(|i| i.sentence_id == sentence_id)
                    .ok_or_else(|| ServiceError::NotServed(sentence_id.clone()))?;
                state.ratings.push(AnnotationRecord {
                    annotator_id: session.assignment.annotator_id.clone(),
                    sentence_id: sentence_id.clone(),
                    raw,
                    timestamp,
                    is_filler: item.kind == ItemKind::Filler,
                    filler_kind: item.filler_kind,
                    warmup: item.warmup,
                });
                session.submitted.insert(sentence_id, raw);
                session.cursor += 1;
            }
        }
        Ok(())
    }

    fn commit(&self, state: &mut State, event: Event) -> ServiceResult<()> {
        state.log.append(&event)?;
        self.apply(state, event)
    }

    pub fn set_eligible(&self, annotator_id: &str, eligible: bool) -> ServiceResult<()> {
        let mut state = self.lock();
        self.commit(
            &mut state,
            Event::Eligibility {
                annotator_id: annotator_id.into(),
                eligible,
            },
        )
    }

    /// Creates a session with a fresh assignment. The assignment reserves its
    /// test sentences against the global annotation target at once.
    pub fn create_session(
        &self,
        annotator_id: &str,
        seed: Option<u64>,
    ) -> ServiceResult<SessionInfo> {
        if annotator_id.trim().is_empty() {
            return Err(ServiceError::Config(
                "annotator_id must not be empty".into(),
            ));
        }
        let mut state = self.lock();
        if self.config.require_eligibility
            && !state.eligible.get(annotator_id).copied().unwrap_or(false)
        {
            return Err(ServiceError::NotEligible(annotator_id.into()));
        }
        let number = state.order.len() + 1;
        let seed = seed.unwrap_or_else(|| self.config.base_seed.wrapping_add(number as u64));
        let assignment = create_assignment(
            annotator_id,
            &self.pool,
            &state.usage,
            &self.config.assignment,
            seed,
        )?;
        let session_id = format!("s{number:06}");
        self.commit(
            &mut state,
            Event::SessionCreated {
                session_id: session_id.clone(),
                assignment,
            },
        )?;
        Ok(Self::info(&state.sessions[&session_id]))
    }

    fn info(session: &Session) -> SessionInfo {
        SessionInfo {
            session_id: session.id.clone(),
            annotator_id: session.assignment.annotator_id.clone(),
            seed: session.assignment.seed,
            state: session.state(),
            warmup_items: session.warmup_len,
            progress: session.progress(),
        }
    }

    pub fn session(&self, session_id: &str) -> ServiceResult<SessionInfo> {
        let state = self.lock();
        let session = state
            .sessions
            .get(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.into()))?;
        Ok(Self::info(session))
    }

    pub fn sessions(&self) -> Vec<SessionInfo> {
        let state = self.lock();
        state
            .order
            .iter()
            .map(|id| Self::info(&state.sessions[id]))
            .collect()
    }

    /// Full assignment of a session, for operators and tests.
    pub fn assignment(&self, session_id: &str) -> ServiceResult<Assignment> {
        let state = self.lock();
        let session = state
            .sessions
            .get(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.into()))?;
        Ok(session.assignment.clone())
    }

    pub fn next_item(&self, session_id: &str) -> ServiceResult<NextItem> {
        let state = self.lock();
        let session = state
            .sessions
            .get(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.into()))?;
        let item = session
            .assignment
            .items
            .get(session.cursor)
            .map(|item| ServedItem {
                sentence_id: item.sentence_id.clone(),
                text: self
                    .pool
                    .text(&item.sentence_id)
                    .unwrap_or_default()
                    .to_string(),
                warmup: item.warmup,
                position: session.cursor,
            });
        Ok(NextItem {
            session_id: session.id.clone(),
            state: session.state(),
            item,
            instruction: INSTRUCTION.to_string(),
            scale: Scale::default(),
            progress: session.progress(),
        })
    }

    /// Records a rating of the current item. Items must be rated in the
    /// order served; a second rating of an item is rejected.
    pub fn submit_rating(
        &self,
        session_id: &str,
        sentence_id: &str,
        value: i64,
    ) -> ServiceResult<RatingAck> {
        let mut state = self.lock();
        let session = state
            .sessions
            .get(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.into()))?;
        let raw = u8::try_from(value)
            .ok()
            .filter(|v| *v <= 99)
            .ok_or(ServiceError::OutOfRange(value))?;
        let position = session
            .assignment
            .items
            .iter()
            .position(|i| i.sentence_id == sentence_id)
            .ok_or_else(|| ServiceError::UnknownItem {
                session_id: session_id.into(),
                sentence_id: sentence_id.into(),
            })?;
        if session.submitted.contains_key(sentence_id) {
            return Err(ServiceError::Duplicate(sentence_id.into()));
        }
        if position != session.cursor {
            return Err(ServiceError::NotServed(sentence_id.into()));
        }
        let event = Event::Rating {
            session_id: session_id.into(),
            sentence_id: sentence_id.into(),
            raw,
            timestamp: now_ms(),
        };
        self.commit(&mut state, event)?;
        let session = &state.sessions[session_id];
        Ok(RatingAck {
            session_id: session_id.into(),
            sentence_id: sentence_id.into(),
            state: session.state(),
            progress: session.progress(),
        })
    }

    /// Every persisted rating, in the order it was received.
    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.lock().ratings.clone()
    }

    /// Writes all ratings in the annotation file format.
    pub fn export(&self, writer: impl Write) -> ServiceResult<()> {
        write_annotations(&self.records(), writer)?;
        Ok(())
    }

    /// Number of sessions each test sentence is assigned to.
    pub fn assignment_counts(&self) -> HashMap<String, u32> {
        self.lock().usage.assigned.clone()
    }

    /// Test sentences that have been rated by more than one session of the
    /// same annotator; always empty unless the log was edited by hand.
    pub fn repeated_ratings(&self) -> Vec<(String, String)> {
        let state = self.lock();
        let mut seen = HashSet::new();
        state
            .ratings
            .iter()
            .filter(|r| !seen.insert((r.annotator_id.clone(), r.sentence_id.clone())))
            .map(|r| (r.annotator_id.clone(), r.sentence_id.clone()))
            .collect()
    }
}

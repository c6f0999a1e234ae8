use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ErrorBody;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }

    /// queued -> running -> done | failed, never backwards.
    pub fn can_become(self, next: JobStatus) -> bool {
        match self {
            JobStatus::Queued => next == JobStatus::Running,
            JobStatus::Running => next.is_terminal(),
            JobStatus::Done | JobStatus::Failed => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Preview,
    Render,
    Stitch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: u64,
    pub kind: JobKind,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Default)]
pub struct JobTable {
    next_id: u64,
    jobs: HashMap<u64, JobRecord>,
}

impl JobTable {
    pub fn create(&mut self, kind: JobKind) -> u64 {
        self.next_id += 1;
        let id = self.next_id;
        self.jobs.insert(
            id,
            JobRecord {
                id,
                kind,
                status: JobStatus::Queued,
                result: None,
                error: None,
            },
        );
        id
    }

    pub fn get(&self, id: u64) -> Option<&JobRecord> {
        self.jobs.get(&id)
    }

    fn advance(&mut self, id: u64, next: JobStatus) -> Option<&mut JobRecord> {
        let job = self.jobs.get_mut(&id)?;
        if !job.status.can_become(next) {
            return None;
        }
        job.status = next;
        Some(job)
    }

    pub fn start(&mut self, id: u64) {
        self.advance(id, JobStatus::Running);
    }

    pub fn finish(&mut self, id: u64, outcome: Result<Value, ErrorBody>) {
        let next = if outcome.is_ok() { JobStatus::Done } else { JobStatus::Failed };
        if let Some(job) = self.advance(id, next) {
            match outcome {
                Ok(v) => job.result = Some(v),
                Err(e) => job.error = Some(e),
            }
        }
    }
}

//! Job execution, certificate envelopes and their verification for the
//! `amenlab` command line.

pub mod envelope;
pub mod exec;
pub mod job;
pub mod table;
pub mod verify;

use amenlab_core::balance::BalanceError;
use amenlab_core::f2::F2Error;
use amenlab_core::folner::FolnerError;
use amenlab_core::group::GroupError;
use amenlab_core::lp::LpError;
use amenlab_core::measure::MeasureError;
use amenlab_core::pictures::PictureError;
use amenlab_core::ramsey::RamseyError;
use amenlab_core::sets::SetError;

pub use envelope::Envelope;
pub use exec::{run, Executed};
pub use job::JobSpec;
pub use verify::{verify_envelope, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cap exhausted: {0}")]
    Cap(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Picture(#[from] PictureError),
    #[error(transparent)]
    Ramsey(#[from] RamseyError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn group_capped(e: &GroupError) -> bool {
    matches!(e, GroupError::ResourceLimit { .. })
}

impl JobError {
    /// Whether the failure is a resource cap rather than bad input or a bug.
    pub fn is_cap(&self) -> bool {
        match self {
            JobError::Cap(_) => true,
            JobError::Group(e) => group_capped(e),
            JobError::Picture(PictureError::Group(e)) => group_capped(e),
            JobError::Ramsey(RamseyError::CapExceeded { .. }) => true,
            JobError::Ramsey(RamseyError::Group(e)) => group_capped(e),
            JobError::Folner(FolnerError::CapExceeded { .. }) => true,
            JobError::Folner(FolnerError::Group(e)) => group_capped(e),
            JobError::Folner(FolnerError::Ramsey(RamseyError::CapExceeded { .. })) => true,
            JobError::F2(F2Error::Cap { .. }) => true,
            JobError::F2(F2Error::Group(e)) => group_capped(e),
            _ => false,
        }
    }
}

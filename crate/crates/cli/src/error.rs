use std::fmt;
use std::process::ExitCode;

use roomforge::index::IndexError;
use roomforge::policy::{BackendError, PolicyError};
use roomforge::room::RoomError;
use roomforge::scene::SceneError;
use roomforge::view::ViewError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Input,
    Backend,
    Internal,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Input => 3,
            Kind::Backend => 4,
            Kind::Internal => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Input => "input",
            Kind::Backend => "backend",
            Kind::Internal => "internal",
        }
    }
}

/// Printed as `error[<kind>]: <message>` on a single line.
#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(Kind::Usage, message)
    }

    pub fn input(message: impl fmt::Display) -> Self {
        Self::new(Kind::Input, message)
    }

    pub fn internal(message: impl fmt::Display) -> Self {
        Self::new(Kind::Internal, message)
    }

    pub fn report(&self) -> ExitCode {
        let one_line = self.message.replace(['\n', '\r'], " ");
        eprintln!("error[{}]: {}", self.kind.as_str(), one_line.trim());
        ExitCode::from(self.kind.code())
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        Failure::input(e)
    }
}

impl From<RoomError> for Failure {
    fn from(e: RoomError) -> Self {
        Failure::input(e)
    }
}

impl From<IndexError> for Failure {
    fn from(e: IndexError) -> Self {
        Failure::input(e)
    }
}

impl From<ViewError> for Failure {
    fn from(e: ViewError) -> Self {
        match e {
            ViewError::Scene(s) => s.into(),
            ViewError::Camera(_) => Failure::input(e),
            ViewError::Format(_) => Failure::internal(e),
        }
    }
}

impl From<BackendError> for Failure {
    fn from(e: BackendError) -> Self {
        Failure::new(Kind::Backend, e)
    }
}

impl From<PolicyError> for Failure {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Scene(s) => s.into(),
            PolicyError::View(v) => v.into(),
            PolicyError::Backend(b) => b.into(),
            PolicyError::Io(_) => Failure::internal(e),
            PolicyError::UnknownElement(_) | PolicyError::NotReceptacle(_) | PolicyError::Invalid(_) => Failure::input(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Failure>;

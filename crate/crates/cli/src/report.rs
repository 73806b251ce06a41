use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Refused,
}

impl CheckVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Fail => "fail",
            CheckVerdict::Refused => "refused",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: CheckVerdict,
    pub witness: Value,
    /// Whether a non-passing verdict makes the run exit with 1.
    #[serde(skip)]
    pub required: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, witness: Value) -> Self {
        Check {
            name: name.into(),
            verdict: if passed { CheckVerdict::Pass } else { CheckVerdict::Fail },
            witness,
            required: true,
        }
    }

    pub fn refused(name: impl Into<String>, witness: Value) -> Self {
        Check {
            name: name.into(),
            verdict: CheckVerdict::Refused,
            witness,
            required: true,
        }
    }

    pub fn informational(mut self) -> Self {
        self.required = false;
        self
    }
}

/// What a subcommand computed: human-readable text plus checks.
#[derive(Debug, Default)]
pub struct Outcome {
    pub text: String,
    pub checks: Vec<Check>,
    /// Seed actually used by a randomized suite.
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn text(text: impl Into<String>) -> Self {
        Outcome {
            text: text.into(),
            ..Outcome::default()
        }
    }

    pub fn with(mut self, check: Check) -> Self {
        self.checks.push(check);
        self
    }

    pub fn failed(&self) -> bool {
        self.checks
            .iter()
            .any(|c| c.required && c.verdict != CheckVerdict::Pass)
    }
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub command: &'a [String],
    pub checks: &'a [Check],
    pub seed: Option<u64>,
    pub output: &'a str,
    pub timing: Timing,
}

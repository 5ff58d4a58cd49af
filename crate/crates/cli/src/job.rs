//! Job specifications: everything needed to rerun a computation, echoed
//! verbatim into the output envelope.

use std::path::Path;

use amenlab_core::balance::SetFamily;
use amenlab_core::group::GroupDescriptor;
use amenlab_core::ramsey::Method;
use amenlab_core::rational::{serde_q, serde_q_opt, serde_q_vec_opt, Q};
use amenlab_core::sets::SetExpr;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::JobError;

/// Largest ball any job may build.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

/// A `[0,1]`-valued function for boosting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `x ↦ (x mod p) / (p − 1)` on the first coordinate (`ℤ^d`) or the index (`ℤ_n`).
    ModRamp { modulus: i64 },
    /// Indicator of a set.
    Indicator { set: SetExpr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisjointScan {
    pub count: usize,
    pub max_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "job", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JobSpec {
    RamseyCheck {
        group: GroupDescriptor,
        m: usize,
        n: usize,
        #[serde(with = "serde_q")]
        eps: Q,
        method: Method,
        cap: usize,
        witnesses: bool,
    },
    RamseyFunction {
        group: GroupDescriptor,
        m: usize,
        #[serde(with = "serde_q")]
        eps: Q,
        n_max: usize,
        method: Method,
        cap: usize,
    },
    FolnerCheck {
        group: GroupDescriptor,
        set: Vec<String>,
        /// Defaults to the generators.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Vec<String>>,
        #[serde(with = "serde_q")]
        eps: Q,
    },
    FolnerFunction {
        group: GroupDescriptor,
        k: u64,
        radius: usize,
    },
    WeightedFolner {
        group: GroupDescriptor,
        m: usize,
        n: usize,
    },
    Balance {
        family: SetFamily,
        #[serde(default, with = "serde_q_opt", skip_serializing_if = "Option::is_none")]
        eps: Option<Q>,
    },
    UnbalanceWitness {
        family: SetFamily,
    },
    Pictures {
        group: GroupDescriptor,
        m: usize,
        target: SetExpr,
        radius: usize,
    },
    RealizeSearch {
        group: GroupDescriptor,
        m: usize,
        radius: usize,
        #[serde(default, with = "serde_q_vec_opt", skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<Q>>,
    },
    Boost {
        group: GroupDescriptor,
        m: usize,
        #[serde(with = "serde_q")]
        eps: Q,
        function: TestFunction,
        max_steps: usize,
        growth: usize,
    },
    F2Verify {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        identities: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disjoint: Option<DisjointScan>,
    },
    F2Infeasible {
        translates: usize,
        radius: usize,
        /// Fixed `δ`; bisect when absent.
        #[serde(default, with = "serde_q_opt", skip_serializing_if = "Option::is_none")]
        delta: Option<Q>,
        bisect_steps: u32,
        emit_certificate: bool,
    },
    FunctionTable {
        group: GroupDescriptor,
        m_max: usize,
        k_max: u64,
        n_max: usize,
        folner_radius: usize,
        cap: usize,
    },
}

impl JobSpec {
    pub fn name(&self) -> &'static str {
        match self {
            JobSpec::RamseyCheck { .. } => "ramsey-check",
            JobSpec::RamseyFunction { .. } => "ramsey-function",
            JobSpec::FolnerCheck { .. } => "folner-check",
            JobSpec::FolnerFunction { .. } => "folner-function",
            JobSpec::WeightedFolner { .. } => "weighted-folner",
            JobSpec::Balance { .. } => "balance",
            JobSpec::UnbalanceWitness { .. } => "unbalance-witness",
            JobSpec::Pictures { .. } => "pictures",
            JobSpec::RealizeSearch { .. } => "realize-search",
            JobSpec::Boost { .. } => "boost",
            JobSpec::F2Verify { .. } => "f2-verify",
            JobSpec::F2Infeasible { .. } => "f2-infeasible",
            JobSpec::FunctionTable { .. } => "function-table",
        }
    }
}

/// Reads JSON given inline (first non-space character `{` or `[`) or from a file.
pub fn load_json<T: DeserializeOwned>(arg: &str) -> Result<T, JobError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| JobError::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| JobError::Input(format!("{arg}: {e}")))
}

/// Parses `--group`: a shorthand (`Z`, `Z^d`, `F2`, `F3`, `Z/n`), inline
/// JSON, or a JSON file.
pub fn parse_group(arg: &str) -> Result<GroupDescriptor, JobError> {
    let short = arg.trim();
    if short == "Z" {
        return Ok(GroupDescriptor::integers());
    }
    if let Some(rank) = short.strip_prefix("Z^") {
        let rank = rank.parse().map_err(|_| JobError::Input(format!("bad rank in {short}")))?;
        return Ok(GroupDescriptor::free_abelian(rank));
    }
    if let Some(order) = short.strip_prefix("Z/") {
        let order = order.parse().map_err(|_| JobError::Input(format!("bad order in {short}")))?;
        return Ok(GroupDescriptor::cyclic(order));
    }
    match short {
        "F2" => return Ok(GroupDescriptor::free(&["a", "b"])),
        "F3" => return Ok(GroupDescriptor::free(&["a", "b", "c"])),
        _ => {}
    }
    load_json(arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use amenlab_core::rational::frac;

    fn samples() -> Vec<JobSpec> {
        vec![
            JobSpec::RamseyCheck {
                group: GroupDescriptor::integers(),
                m: 1,
                n: 2,
                eps: frac(1, 2),
                method: Method::Direct,
                cap: 20,
                witnesses: true,
            },
            JobSpec::Balance {
                family: SetFamily::from_labels(vec!["x".into(), "y".into()], &[vec!["x".into()]]).unwrap(),
                eps: None,
            },
            JobSpec::RealizeSearch {
                group: GroupDescriptor::free(&["a", "b"]),
                m: 1,
                radius: 2,
                weights: Some(vec![frac(1, 2), frac(-1, 2)]),
            },
            JobSpec::Boost {
                group: GroupDescriptor::integers(),
                m: 1,
                eps: frac(9, 16),
                function: TestFunction::ModRamp { modulus: 7 },
                max_steps: 4,
                growth: 3,
            },
            JobSpec::F2Verify {
                identities: Some(6),
                disjoint: Some(DisjointScan { count: 4, max_length: 6 }),
            },
        ]
    }

    #[test]
    fn specs_round_trip() {
        for spec in samples() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: JobSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec, "{text}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"job":"weighted-folner","group":{"kind":"free_abelian","rank":1},"m":1,"n":2,"extra":0}"#;
        assert!(serde_json::from_str::<JobSpec>(text).is_err());
        let good = r#"{"job":"weighted-folner","group":{"kind":"free_abelian","rank":1},"m":1,"n":2}"#;
        assert!(serde_json::from_str::<JobSpec>(good).is_ok());
    }

    #[test]
    fn group_shorthands() {
        assert_eq!(parse_group("Z").unwrap(), GroupDescriptor::integers());
        assert_eq!(parse_group("Z^2").unwrap(), GroupDescriptor::free_abelian(2));
        assert_eq!(parse_group("Z/5").unwrap(), GroupDescriptor::cyclic(5));
        assert_eq!(parse_group("F2").unwrap(), GroupDescriptor::free(&["a", "b"]));
        assert_eq!(parse_group(r#"{"kind":"cyclic","order":7}"#).unwrap(), GroupDescriptor::cyclic(7));
        assert!(parse_group("/nonexistent/file.json").is_err());
    }
}

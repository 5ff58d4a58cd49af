use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amenlab::envelope::Envelope;
use amenlab::job::{self, DisjointScan, JobSpec, TestFunction};
use amenlab::{run, verify_envelope, JobError};
use amenlab_core::group::GroupDescriptor;
use amenlab_core::ramsey::{Method, DEFAULT_ENUMERATION_CAP};
use amenlab_core::rational::{parse_q, Q};
use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

/// Exact certificates for amenability criteria on finitely generated groups.
#[derive(Debug, Parser)]
#[command(name = "amenlab", version)]
struct Cli {
    /// Group: Z, Z^d, Z/n, F2, F3, inline JSON, or a JSON file.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Tolerance as an exact rational, e.g. 1/2.
    #[arg(long, global = true)]
    eps: Option<String>,
    /// Largest subset-enumeration exponent (2^cap subsets).
    #[arg(long, global = true, env = "AMENLAB_CAP")]
    cap: Option<usize>,
    /// Write the envelope here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit per-subset witness measures from Ramsey verdicts.
    #[arg(long, global = true)]
    no_witnesses: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Pictures,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Pictures => Method::Pictures,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether B_n is ε-Ramsey for the window B_m.
    RamseyCheck {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "pictures")]
        method: MethodArg,
    },
    /// Least n such that B_n is ε-Ramsey for B_m.
    RamseyFunction {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, value_enum, default_value = "pictures")]
        method: MethodArg,
    },
    /// Check the Følner condition for an explicit set.
    FolnerCheck {
        /// Elements, space-separated.
        #[arg(long, num_args = 1.., required = true)]
        set: Vec<String>,
        /// Window elements; defaults to the generators.
        #[arg(long, num_args = 1..)]
        window: Option<Vec<String>>,
    },
    /// Smallest 1/k-Følner set found inside a ball.
    FolnerFunction {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Weighted Følner value for windows B_m and supports inside B_n.
    WeightedFolner {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Balance deficiency of a set family (JSON inline or file).
    Balance { family: String },
    /// Unbalance witness of a set family, or a balanced combination.
    UnbalanceWitness { family: String },
    /// Family of pictures of a target set over B_radius.
    Pictures {
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Target set expression (JSON inline or file).
        target: String,
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
    /// Search the candidate pool for a realized unbalanced family.
    RealizeSearch {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        /// Comma-separated rational weights on B_m, in ball order.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<String>>,
    },
    /// Boost a [0,1]-valued function to gap at most ε.
    Boost {
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Test function JSON; defaults to {"kind":"mod_ramp","modulus":7}.
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 16)]
        max_steps: usize,
        #[arg(long, default_value_t = 3)]
        growth: usize,
    },
    /// Pointwise checks of the free-group identities and disjoint translates.
    F2Verify {
        /// Check the identities on words up to this length.
        #[arg(long, value_name = "L")]
        identities: Option<usize>,
        /// Check K disjoint-translate families on words up to length L.
        #[arg(long, num_args = 2, value_names = ["K", "L"])]
        disjoint: Option<Vec<usize>>,
    },
    /// Simultaneous-invariance LP for K translates with support radius R.
    F2Infeasible {
        translates: usize,
        /// A rational δ, or `auto` to bisect for the threshold.
        delta: String,
        radius: usize,
        /// Embed certificates; with a path, also write the envelope there.
        #[arg(long, num_args = 0..=1, value_name = "FILE")]
        emit_certificate: Option<Option<PathBuf>>,
        #[arg(long, default_value_t = 16)]
        bisect_steps: u32,
    },
    /// Table of Følner, weighted Følner and Ramsey values with inequality checks.
    FunctionTable {
        #[arg(long, default_value_t = 1)]
        m_max: usize,
        #[arg(long, default_value_t = 2)]
        k_max: u64,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 6)]
        folner_radius: usize,
        /// Also write the CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recheck every certificate in an envelope.
    Verify { file: PathBuf },
    /// Run a job spec (JSON inline or file).
    Run { job: String },
}

const TABLE_CAP: usize = 16;

impl Cli {
    fn group(&self) -> anyhow::Result<GroupDescriptor> {
        let arg = self.group.as_deref().ok_or_else(|| anyhow!("--group is required"))?;
        Ok(job::parse_group(arg)?)
    }

    fn eps(&self) -> anyhow::Result<Q> {
        let arg = self.eps.as_deref().ok_or_else(|| anyhow!("--eps is required"))?;
        rational(arg)
    }

    fn eps_opt(&self) -> anyhow::Result<Option<Q>> {
        self.eps.as_deref().map(rational).transpose()
    }

    fn cap(&self, default: usize) -> usize {
        self.cap.unwrap_or(default)
    }

    fn job(&self) -> anyhow::Result<JobSpec> {
        let spec = match &self.command {
            Command::RamseyCheck { m, n, method } => JobSpec::RamseyCheck {
                group: self.group()?,
                m: *m,
                n: *n,
                eps: self.eps()?,
                method: (*method).into(),
                cap: self.cap(DEFAULT_ENUMERATION_CAP),
                witnesses: !self.no_witnesses,
            },
            Command::RamseyFunction { m, n_max, method } => JobSpec::RamseyFunction {
                group: self.group()?,
                m: *m,
                eps: self.eps()?,
                n_max: *n_max,
                method: (*method).into(),
                cap: self.cap(DEFAULT_ENUMERATION_CAP),
            },
            Command::FolnerCheck { set, window } => JobSpec::FolnerCheck {
                group: self.group()?,
                set: set.clone(),
                window: window.clone(),
                eps: self.eps()?,
            },
            Command::FolnerFunction { k, radius } => JobSpec::FolnerFunction {
                group: self.group()?,
                k: *k,
                radius: *radius,
            },
            Command::WeightedFolner { m, n } => JobSpec::WeightedFolner {
                group: self.group()?,
                m: *m,
                n: *n,
            },
            Command::Balance { family } => JobSpec::Balance {
                family: job::load_json(family)?,
                eps: self.eps_opt()?,
            },
            Command::UnbalanceWitness { family } => JobSpec::UnbalanceWitness {
                family: job::load_json(family)?,
            },
            Command::Pictures { m, target, radius } => JobSpec::Pictures {
                group: self.group()?,
                m: *m,
                target: job::load_json(target)?,
                radius: *radius,
            },
            Command::RealizeSearch { m, radius, weights } => JobSpec::RealizeSearch {
                group: self.group()?,
                m: *m,
                radius: *radius,
                weights: weights
                    .as_ref()
                    .map(|ws| ws.iter().map(|w| rational(w)).collect::<anyhow::Result<_>>())
                    .transpose()?,
            },
            Command::Boost {
                m,
                function,
                max_steps,
                growth,
            } => JobSpec::Boost {
                group: self.group()?,
                m: *m,
                eps: self.eps()?,
                function: match function {
                    Some(text) => job::load_json(text)?,
                    None => TestFunction::ModRamp { modulus: 7 },
                },
                max_steps: *max_steps,
                growth: *growth,
            },
            Command::F2Verify { identities, disjoint } => JobSpec::F2Verify {
                identities: *identities,
                disjoint: disjoint.as_ref().map(|kl| DisjointScan {
                    count: kl[0],
                    max_length: kl[1],
                }),
            },
            Command::F2Infeasible {
                translates,
                delta,
                radius,
                emit_certificate,
                bisect_steps,
            } => JobSpec::F2Infeasible {
                translates: *translates,
                radius: *radius,
                delta: match delta.as_str() {
                    "auto" => None,
                    text => Some(rational(text)?),
                },
                bisect_steps: *bisect_steps,
                emit_certificate: emit_certificate.is_some(),
            },
            Command::FunctionTable {
                m_max,
                k_max,
                n_max,
                folner_radius,
                ..
            } => JobSpec::FunctionTable {
                group: self.group()?,
                m_max: *m_max,
                k_max: *k_max,
                n_max: *n_max,
                folner_radius: *folner_radius,
                cap: self.cap(TABLE_CAP),
            },
            Command::Verify { .. } => bail!("verify is not a job"),
            Command::Run { job } => job::load_json(job)?,
        };
        Ok(spec)
    }

    /// Destination for the envelope, if not stdout.
    fn destination(&self) -> Option<&Path> {
        if let Command::F2Infeasible {
            emit_certificate: Some(Some(path)),
            ..
        } = &self.command
        {
            return Some(path);
        }
        self.out.as_deref()
    }
}

fn rational(text: &str) -> anyhow::Result<Q> {
    parse_q(text).with_context(|| format!("not an exact rational: {text:?}"))
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn emit(destination: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match destination {
        Some(path) => write_atomic(path, text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn verify_file(path: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let envelope: Envelope = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = verify_envelope(&envelope)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn execute(cli: &Cli) -> anyhow::Result<ExitCode> {
    if let Command::Verify { file } = &cli.command {
        return verify_file(file);
    }
    let spec = cli.job()?;
    let executed = match run(&spec) {
        Ok(executed) => executed,
        Err(e) if e.is_cap() => {
            eprintln!("amenlab: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    if let Command::FunctionTable { csv: Some(path), .. } = &cli.command {
        let csv = executed.result["csv"]
            .as_str()
            .ok_or_else(|| JobError::Input("table result has no csv".into()))?;
        write_atomic(path, csv)?;
    }
    let envelope = Envelope::new(spec, executed.result)?;
    emit(cli.destination(), &envelope.to_pretty()?)?;
    Ok(if executed.capped { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("amenlab: {e:#}");
            ExitCode::from(1)
        }
    }
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{compare_outputs, ReplicationEntry, SpotCheckManifest};
use crate::error::CompareError;
use crate::scoring::SpotCheckEvidence;

pub const DEFAULT_TIMEOUT_SECS: u64 = 600;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Exited(i32),
    Signaled,
    TimedOut,
    SpawnFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub status: RunStatus,
    /// Last few lines written to the error stream.
    pub stderr_tail: String,
}

/// Executes one substituted replication command.
///
/// Implementations may only write below the scratch directory that
/// contains the `{out}` path.
pub trait CommandRunner: Sync {
    fn run(&self, command: &str, working_dir: &Path, timeout: Duration) -> RunOutput;
}

/// Runs commands through `sh -c` in their own process group, killing the
/// whole group on timeout.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShellRunner;

const STDERR_TAIL_BYTES: u64 = 2000;

fn tail(file: &mut File) -> String {
    let len = file.seek(SeekFrom::End(0)).unwrap_or(0);
    let _ = file.seek(SeekFrom::Start(len.saturating_sub(STDERR_TAIL_BYTES)));
    let mut buf = Vec::new();
    let _ = file.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).trim().to_string()
}

#[cfg(unix)]
fn kill_group(child: &mut std::process::Child) {
    // SAFETY: kill(2) with a negated pid signals the process group created
    // for this child; it has no memory-safety preconditions.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_group(child: &mut std::process::Child) {
    let _ = child.kill();
}

impl CommandRunner for ShellRunner {
    fn run(&self, command: &str, working_dir: &Path, timeout: Duration) -> RunOutput {
        let failed = |msg: String| RunOutput {
            status: RunStatus::SpawnFailed(msg),
            stderr_tail: String::new(),
        };
        let mut log = match tempfile::tempfile() {
            Ok(f) => f,
            Err(e) => return failed(format!("cannot create log file: {e}")),
        };
        let stderr = match log.try_clone() {
            Ok(f) => f,
            Err(e) => return failed(format!("cannot create log file: {e}")),
        };
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(command)
            .current_dir(working_dir)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(stderr);
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        let mut child = match cmd.spawn() {
            Ok(c) => c,
            Err(e) => return failed(format!("cannot start sh: {e}")),
        };
        let status = match child.wait_timeout(timeout) {
            Ok(Some(st)) => match st.code() {
                Some(code) => RunStatus::Exited(code),
                None => RunStatus::Signaled,
            },
            Ok(None) => {
                kill_group(&mut child);
                let _ = child.wait();
                RunStatus::TimedOut
            }
            Err(e) => {
                kill_group(&mut child);
                let _ = child.wait();
                RunStatus::SpawnFailed(format!("wait failed: {e}"))
            }
        };
        RunOutput {
            status,
            stderr_tail: tail(&mut log),
        }
    }
}

/// Planned behaviour of the scripted runner for one replication id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Planned {
    /// Copy this file to `{out}` and exit 0.
    Copy(PathBuf),
    /// Write these bytes to `{out}` and exit 0.
    Write(Vec<u8>),
    /// Exit with this code without writing anything.
    Exit(i32),
    /// Behave as if the timeout elapsed.
    Hang,
}

/// Test double that interprets commands of the form `mock <id> <out>`.
#[derive(Debug, Clone, Default)]
pub struct ScriptedRunner {
    pub plan: BTreeMap<String, Planned>,
}

impl ScriptedRunner {
    pub fn new(plan: impl IntoIterator<Item = (String, Planned)>) -> Self {
        Self {
            plan: plan.into_iter().collect(),
        }
    }
}

impl CommandRunner for ScriptedRunner {
    fn run(&self, command: &str, _working_dir: &Path, _timeout: Duration) -> RunOutput {
        let out = |status, stderr_tail: &str| RunOutput {
            status,
            stderr_tail: stderr_tail.to_string(),
        };
        let tokens: Vec<&str> = command.split_whitespace().collect();
        let ["mock", id, target] = tokens.as_slice() else {
            return out(RunStatus::Exited(127), "scripted runner expects `mock <id> <out>`");
        };
        let Some(planned) = self.plan.get(*id) else {
            return out(RunStatus::Exited(127), "no plan for this id");
        };
        let written = match planned {
            Planned::Copy(src) => std::fs::copy(src, target).map(|_| ()),
            Planned::Write(bytes) => std::fs::write(target, bytes),
            Planned::Exit(code) => return out(RunStatus::Exited(*code), "planned failure"),
            Planned::Hang => return out(RunStatus::TimedOut, ""),
        };
        match written {
            Ok(()) => out(RunStatus::Exited(0), ""),
            Err(e) => out(RunStatus::Exited(1), &e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeStatus {
    Match,
    Mismatch,
    ExecutionError,
    MissingExpected,
}

impl OutcomeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeStatus::Match => "Match",
            OutcomeStatus::Mismatch => "Mismatch",
            OutcomeStatus::ExecutionError => "ExecutionError",
            OutcomeStatus::MissingExpected => "MissingExpected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotCheckOutcome {
    pub id: String,
    pub status: OutcomeStatus,
    pub expected_output: String,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub timeout: Duration,
    pub jobs: usize,
    /// Parent for per-replication scratch directories; the system temp dir
    /// when absent.
    pub scratch_base: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
            jobs: 1,
            scratch_base: None,
        }
    }
}

fn shell_quote(s: &str) -> String {
    if s.bytes()
        .all(|b| b.is_ascii_alphanumeric() || b"/._-+=:,@".contains(&b))
    {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn run_one(
    root: &Path,
    working_dir: &Path,
    entry: &ReplicationEntry,
    runner: &dyn CommandRunner,
    options: &RunOptions,
) -> SpotCheckOutcome {
    let outcome = |status, detail: String| SpotCheckOutcome {
        id: entry.id.clone(),
        status,
        expected_output: entry.expected_output.clone(),
        detail,
    };
    let expected = root.join(&entry.expected_output);
    if !expected.is_file() {
        return outcome(
            OutcomeStatus::MissingExpected,
            format!("stored result {} not found", entry.expected_output),
        );
    }
    let builder = {
        let mut b = tempfile::Builder::new();
        b.prefix("repro-audit-spot-");
        b
    };
    let scratch = match &options.scratch_base {
        Some(base) => builder.tempdir_in(base),
        None => builder.tempdir(),
    };
    let scratch = match scratch {
        Ok(d) => d,
        Err(e) => {
            return outcome(
                OutcomeStatus::ExecutionError,
                format!("cannot create scratch directory: {e}"),
            )
        }
    };
    let file_name = crate::supplement::file_name_of(&entry.expected_output);
    let out_path = scratch.path().join(file_name);
    let command = entry.command(&shell_quote(&out_path.to_string_lossy()));
    let result = runner.run(&command, working_dir, options.timeout);
    let with_tail = |msg: String| {
        if result.stderr_tail.is_empty() {
            msg
        } else {
            format!("{msg}; stderr: {}", result.stderr_tail.lines().last().unwrap_or(""))
        }
    };
    match &result.status {
        RunStatus::Exited(0) => {}
        RunStatus::Exited(code) => {
            return outcome(OutcomeStatus::ExecutionError, with_tail(format!("exit status {code}")))
        }
        RunStatus::Signaled => return outcome(OutcomeStatus::ExecutionError, with_tail("killed by a signal".into())),
        RunStatus::TimedOut => {
            return outcome(
                OutcomeStatus::ExecutionError,
                format!("timed out after {} s", options.timeout.as_secs_f64()),
            )
        }
        RunStatus::SpawnFailed(msg) => return outcome(OutcomeStatus::ExecutionError, msg.clone()),
    }
    if !out_path.is_file() {
        return outcome(
            OutcomeStatus::ExecutionError,
            "command succeeded but wrote no {out} file".into(),
        );
    }
    match compare_outputs(&expected, &out_path, entry.comparator, entry.abs_tol, entry.rel_tol) {
        Ok(c) if c.equal => outcome(OutcomeStatus::Match, String::new()),
        Ok(c) => outcome(OutcomeStatus::Mismatch, c.detail),
        Err(e @ CompareError::Io { .. }) => outcome(OutcomeStatus::ExecutionError, e.to_string()),
        Err(e) => outcome(OutcomeStatus::Mismatch, e.to_string()),
    }
}

/// Re-runs `selected` and classifies each result. Outcomes follow manifest
/// order whatever the degree of concurrency.
pub fn run_spotcheck(
    root: &Path,
    manifest: &SpotCheckManifest,
    selected: &[ReplicationEntry],
    runner: &dyn CommandRunner,
    options: &RunOptions,
) -> Vec<SpotCheckOutcome> {
    let working_dir = root.join(&manifest.working_dir);
    let jobs = options.jobs.clamp(1, selected.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SpotCheckOutcome>>> = Mutex::new(vec![None; selected.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = selected.get(i) else { break };
                let o = run_one(root, &working_dir, entry, runner, options);
                results.lock().expect("no panics while holding the lock")[i] = Some(o);
            });
        }
    });
    let results = results.into_inner().expect("workers finished");
    let mut keyed: Vec<(usize, usize, SpotCheckOutcome)> = results
        .into_iter()
        .enumerate()
        .map(|(i, o)| (manifest.position(&selected[i]), i, o.expect("every entry ran")))
        .collect();
    keyed.sort_by_key(|(pos, i, _)| (*pos, *i));
    keyed.into_iter().map(|(_, _, o)| o).collect()
}

/// Condenses outcomes into scoring evidence.
pub fn summarize(outcomes: &[SpotCheckOutcome], reduced: bool) -> SpotCheckEvidence {
    SpotCheckEvidence {
        selected: outcomes.len(),
        matched: outcomes.iter().filter(|o| o.status == OutcomeStatus::Match).count(),
        reduced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spotcheck::parse_manifest;

    fn setup() -> (tempfile::TempDir, SpotCheckManifest) {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("results")).unwrap();
        std::fs::write(dir.path().join("results/r1.csv"), "a,b\n1,2\n").unwrap();
        std::fs::write(dir.path().join("results/r2.csv"), "a,b\n3,4\n").unwrap();
        let m = parse_manifest(
            "spotcheck v1\n\
             r1\t1\tnumeric_table\t1e-8\t0\tresults/r1.csv\tcp ../results/r1.csv {out}\n\
             r2\t2\tnumeric_table\t1e-8\t0\tresults/r2.csv\tprintf 'a,b\\n3,4.1\\n' > {out}\n\
             r3\t3\tbitwise\t0\t0\tresults/r3.csv\tcp x {out}\n\
             r4\t4\tbitwise\t0\t0\tresults/r1.csv\texit 3 # {out}\n\
             r5\t5\tbitwise\t0\t0\tresults/r1.csv\tsleep 5; echo {out}\n\
             working_dir=results\n",
        )
        .unwrap();
        (dir, m)
    }

    #[test]
    fn shell_runner_statuses() {
        let (dir, m) = setup();
        let opts = RunOptions {
            timeout: Duration::from_millis(300),
            jobs: 3,
            scratch_base: None,
        };
        let out = run_spotcheck(dir.path(), &m, &m.entries, &ShellRunner, &opts);
        let st: Vec<_> = out.iter().map(|o| (o.id.as_str(), o.status)).collect();
        assert_eq!(
            st,
            [
                ("r1", OutcomeStatus::Match),
                ("r2", OutcomeStatus::Mismatch),
                ("r3", OutcomeStatus::MissingExpected),
                ("r4", OutcomeStatus::ExecutionError),
                ("r5", OutcomeStatus::ExecutionError),
            ]
        );
        assert!(out[1].detail.contains("column 2"), "{}", out[1].detail);
        assert!(out[4].detail.contains("timed out"));
    }

    #[test]
    fn quoting() {
        assert_eq!(shell_quote("/tmp/a.csv"), "/tmp/a.csv");
        assert_eq!(shell_quote("/tmp/a b.csv"), "'/tmp/a b.csv'");
    }
}

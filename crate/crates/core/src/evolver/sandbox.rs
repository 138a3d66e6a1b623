//! Executor that shells out inside a throwaway directory.
//!
//! Each run gets a fresh temporary directory holding only the working-state
//! files, an empty environment, and a `PATH` containing nothing but `sh` and
//! the Node toolchain found on the host. Runs exceeding the timeout are
//! killed and reported as failures.

use std::io::Read;
use std::path::{Component, Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::{CommandResult, Executor, ExecutorError, WorkingState};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
const RUNTIME_TOOLS: [&str; 3] = ["node", "npm", "npx"];
/// Status reported for a killed run.
pub const TIMEOUT_STATUS: i32 = 124;

#[derive(Debug)]
pub struct SandboxExecutor {
    bin: tempfile::TempDir,
    timeout: Duration,
    tools: Vec<String>,
}

fn find_on_path(tool: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|dir| dir.join(tool)).find(|p| p.is_file())
}

impl SandboxExecutor {
    pub fn new() -> Result<Self, ExecutorError> {
        let bin = tempfile::tempdir().map_err(|e| ExecutorError(format!("creating sandbox bin dir: {e}")))?;
        let sh = find_on_path("sh").ok_or_else(|| ExecutorError("no `sh` on host PATH".into()))?;
        link(&sh, &bin.path().join("sh"))?;
        let mut tools = Vec::new();
        for tool in RUNTIME_TOOLS {
            if let Some(p) = find_on_path(tool) {
                link(&p, &bin.path().join(tool))?;
                tools.push(tool.to_string());
            }
        }
        Ok(Self { bin, timeout: DEFAULT_TIMEOUT, tools })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Runtime tools available inside the sandbox besides `sh`.
    pub fn tools(&self) -> &[String] {
        &self.tools
    }
}

#[cfg(unix)]
fn link(from: &Path, to: &Path) -> Result<(), ExecutorError> {
    std::os::unix::fs::symlink(from, to).map_err(|e| ExecutorError(format!("linking {}: {e}", from.display())))
}

#[cfg(not(unix))]
fn link(from: &Path, to: &Path) -> Result<(), ExecutorError> {
    std::fs::copy(from, to).map(|_| ()).map_err(|e| ExecutorError(format!("copying {}: {e}", from.display())))
}

fn safe_relative(path: &str) -> Option<PathBuf> {
    let p = Path::new(path);
    p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir)).then(|| p.to_path_buf())
}

fn drain(mut pipe: impl Read + Send + 'static) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

impl Executor for SandboxExecutor {
    fn run(&self, command: &str, state: &WorkingState) -> Result<CommandResult, ExecutorError> {
        let work = tempfile::tempdir().map_err(|e| ExecutorError(format!("creating workdir: {e}")))?;
        for (path, bytes) in state.files() {
            let rel = safe_relative(path).ok_or_else(|| ExecutorError(format!("refusing path outside sandbox: {path}")))?;
            let dest = work.path().join(rel);
            if let Some(parent) = dest.parent() {
                std::fs::create_dir_all(parent).map_err(|e| ExecutorError(e.to_string()))?;
            }
            std::fs::write(&dest, bytes).map_err(|e| ExecutorError(e.to_string()))?;
        }
        let mut child = Command::new(self.bin.path().join("sh"))
            .arg("-c")
            .arg(command)
            .env_clear()
            .env("PATH", self.bin.path())
            .env("HOME", work.path())
            .current_dir(work.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ExecutorError(format!("spawning sh: {e}")))?;
        let out = drain(child.stdout.take().expect("piped"));
        let err = drain(child.stderr.take().expect("piped"));
        let waited = child.wait_timeout(self.timeout).map_err(|e| ExecutorError(e.to_string()))?;
        let (exit_status, timed_out) = match waited {
            Some(status) => (status.code().unwrap_or(TIMEOUT_STATUS), false),
            None => {
                let _ = child.kill();
                let _ = child.wait();
                (TIMEOUT_STATUS, true)
            }
        };
        Ok(CommandResult {
            command: command.to_string(),
            exit_status,
            stdout: out.join().unwrap_or_default(),
            stderr: err.join().unwrap_or_default(),
            timed_out,
        })
    }
}

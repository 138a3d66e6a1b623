//! Command execution against a working state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::WorkingState;
use crate::audit::shell::{self, Connector};

/// Infrastructure failure, as opposed to a command exiting nonzero.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("executor failure: {0}")]
pub struct ExecutorError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandResult {
    pub command: String,
    pub exit_status: i32,
    pub stdout: String,
    pub stderr: String,
    #[serde(default)]
    pub timed_out: bool,
}

impl CommandResult {
    pub fn passed(&self) -> bool {
        self.exit_status == 0 && !self.timed_out
    }
}

pub trait Executor: Sync {
    fn run(&self, command: &str, state: &WorkingState) -> Result<CommandResult, ExecutorError>;
}

/// Exit status used when a program is not available.
pub const NOT_FOUND: i32 = 127;
const NPM_ENOENT: i32 = 254;
const MAX_SCRIPT_DEPTH: usize = 4;

/// Deterministic stand-in for a Node toolchain.
///
/// Scripted commands return their configured status. Otherwise a small model
/// applies: `npm` scripts need a `package.json` that defines them, `node`
/// needs the file it runs, test runners need at least one test file, and any
/// program outside the model exits 127.
#[derive(Debug, Clone, Default)]
pub struct MockExecutor {
    scripted: BTreeMap<String, i32>,
    unavailable: bool,
}

impl MockExecutor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Force the exit status of an exact command segment.
    pub fn script(mut self, command: impl Into<String>, status: i32) -> Self {
        self.scripted.insert(command.into(), status);
        self
    }

    /// An executor whose every run is an infrastructure failure.
    pub fn unavailable() -> Self {
        Self { unavailable: true, ..Self::default() }
    }

    fn run_line(&self, command: &str, state: &WorkingState, depth: usize) -> (i32, String) {
        let mut status = 0;
        let mut out = String::new();
        let mut previous = Connector::Then;
        for (segment, connector) in shell::split_segments(command) {
            if !(previous == Connector::And && status != 0) {
                let (s, o) = self.run_simple(&segment, state, depth);
                status = s;
                out.push_str(&o);
            }
            previous = connector;
        }
        (status, out)
    }

    fn run_simple(&self, segment: &str, state: &WorkingState, depth: usize) -> (i32, String) {
        if let Some(&status) = self.scripted.get(segment) {
            return (status, String::new());
        }
        let words = shell::words(segment);
        let skip = words.iter().take_while(|w| w.contains('=') && !w.starts_with('-')).count();
        let words = &words[skip..];
        let Some(program) = words.first() else {
            return (0, String::new());
        };
        let args = &words[1..];
        match program.as_str() {
            "true" | ":" => (0, String::new()),
            "false" => (1, String::new()),
            "exit" => (args.first().and_then(|a| a.parse().ok()).unwrap_or(0), String::new()),
            "echo" | "printf" => (0, format!("{}\n", args.join(" "))),
            "test" | "[" => (file_test(args, state), String::new()),
            "cat" => match args.iter().map(|p| state.read(normalize(p).as_str())).collect::<Option<Vec<_>>>() {
                Some(chunks) => (0, chunks.iter().map(|c| String::from_utf8_lossy(c)).collect()),
                None => (1, String::new()),
            },
            "node" => self.node(args, state),
            "npm" => self.npm(args, state, depth),
            "npx" => match args.first().map(String::as_str) {
                None => (1, String::new()),
                Some("--version" | "-v") => (0, "10.0.0\n".into()),
                Some(tool) if is_test_runner(tool) => (test_runner(state), String::new()),
                Some(_) if state.contains("package.json") => (0, String::new()),
                Some(_) => (1, String::new()),
            },
            tool if is_test_runner(tool) => (test_runner(state), String::new()),
            _ => (NOT_FOUND, String::new()),
        }
    }

    fn node(&self, args: &[String], state: &WorkingState) -> (i32, String) {
        match args.first().map(String::as_str) {
            None => (0, String::new()),
            Some("--version" | "-v") => (0, "v20.0.0\n".into()),
            Some("-e" | "--eval" | "-p" | "--print") => eval_script(args.get(1).map_or("", String::as_str), "", state),
            Some(file) => match state.read(&normalize(file)) {
                Some(source) => {
                    let file = normalize(file);
                    let dir = file.rsplit_once('/').map_or("", |(d, _)| d);
                    eval_script(&String::from_utf8_lossy(source), dir, state)
                }
                None => (1, String::new()),
            },
        }
    }

    fn npm(&self, args: &[String], state: &WorkingState, depth: usize) -> (i32, String) {
        let sub = args.first().map(String::as_str);
        if matches!(sub, Some("--version" | "-v")) {
            return (0, "10.0.0\n".into());
        }
        let Some(manifest) = state.read("package.json") else {
            return (NPM_ENOENT, String::new());
        };
        let script_name = match sub {
            Some("test" | "t" | "tst") => "test",
            Some("run" | "run-script") => match args.get(1) {
                Some(name) => name.as_str(),
                None => return (0, String::new()),
            },
            Some("ci" | "install" | "i") => return (0, String::new()),
            _ => return (1, String::new()),
        };
        let scripts: Option<String> = serde_json::from_slice::<serde_json::Value>(manifest)
            .ok()
            .and_then(|v| v.get("scripts")?.get(script_name)?.as_str().map(str::to_string));
        match scripts {
            Some(body) if depth < MAX_SCRIPT_DEPTH => self.run_line(&body, state, depth + 1),
            _ => (1, String::new()),
        }
    }
}

impl Executor for MockExecutor {
    fn run(&self, command: &str, state: &WorkingState) -> Result<CommandResult, ExecutorError> {
        if self.unavailable {
            return Err(ExecutorError("mock executor marked unavailable".into()));
        }
        let (exit_status, stdout) = self.run_line(command, state, 0);
        Ok(CommandResult { command: command.to_string(), exit_status, stdout, stderr: String::new(), timed_out: false })
    }
}

fn normalize(path: &str) -> String {
    path.trim_start_matches("./").to_string()
}

fn is_test_runner(tool: &str) -> bool {
    matches!(tool, "jest" | "mocha" | "vitest")
}

fn test_runner(state: &WorkingState) -> i32 {
    let has_tests = state.paths().any(|p| {
        let p = p.to_ascii_lowercase();
        (p.contains("test") || p.contains("spec")) && (p.ends_with(".js") || p.ends_with(".ts") || p.ends_with(".mjs"))
    });
    if has_tests {
        0
    } else {
        1
    }
}

fn file_test(args: &[String], state: &WorkingState) -> i32 {
    let args: Vec<&str> = args.iter().map(String::as_str).filter(|a| *a != "]").collect();
    let ok = match args.as_slice() {
        ["-f" | "-e" | "-s", path] => state.contains(&normalize(path)),
        ["-d", path] => state.contains_dir(&normalize(path)),
        [value] => !value.is_empty(),
        _ => false,
    };
    i32::from(!ok)
}

/// Join a relative module path onto `dir`, resolving `.` and `..`.
/// `None` when the path climbs above the root.
fn resolve(dir: &str, target: &str) -> Option<String> {
    let mut parts: Vec<&str> = dir.split('/').filter(|p| !p.is_empty()).collect();
    for part in target.split('/') {
        match part {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            p => parts.push(p),
        }
    }
    Some(parts.join("/"))
}

/// Evaluate a script located in `dir`: relative `require`s must resolve, an
/// explicit `process.exit(n)` sets the status, `throw` fails.
fn eval_script(script: &str, dir: &str, state: &WorkingState) -> (i32, String) {
    let mut rest = script;
    while let Some(at) = rest.find("require(") {
        rest = &rest[at + "require(".len()..];
        let target: String = rest
            .trim_start()
            .trim_start_matches(['\'', '"'])
            .chars()
            .take_while(|c| !matches!(c, '\'' | '"' | ')'))
            .collect();
        if target.starts_with('.') {
            let Some(base) = resolve(dir, &target) else {
                return (1, String::new());
            };
            let found = [base.clone(), format!("{base}.js"), format!("{base}/index.js")]
                .iter()
                .any(|p| state.contains(p));
            if !found {
                return (1, String::new());
            }
        }
    }
    if let Some(at) = script.find("process.exit(") {
        let code: String = script[at + "process.exit(".len()..].chars().take_while(|c| c.is_ascii_digit()).collect();
        return (code.parse().unwrap_or(0), String::new());
    }
    if script.contains("throw ") {
        return (1, String::new());
    }
    (0, String::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(cmd: &str, state: &WorkingState) -> i32 {
        MockExecutor::new().run(cmd, state).unwrap().exit_status
    }

    fn project() -> WorkingState {
        WorkingState::new()
            .with_file("package.json", r#"{"scripts":{"test":"node test/run.js","lint":"eslint ."}}"#)
            .with_file("test/run.js", "require('../src/lib'); process.exit(0)")
            .with_file("src/lib.js", "module.exports = 1")
    }

    #[test]
    fn empty_environment_fails_real_tests() {
        let empty = WorkingState::new();
        assert_ne!(status("npm test", &empty), 0);
        assert_ne!(status("node test/run.js", &empty), 0);
        assert_ne!(status("npx jest", &empty), 0);
        assert_eq!(status("python run_tests.py", &empty), NOT_FOUND);
    }

    #[test]
    fn empty_environment_passes_vacuous_commands() {
        let empty = WorkingState::new();
        for cmd in ["true", "exit 0", "echo ok", "node --version", "node -e \"process.exit(0)\"", "node -e \"console.log('done')\""] {
            assert_eq!(status(cmd, &empty), 0, "{cmd}");
        }
    }

    #[test]
    fn project_tests_run_through_scripts() {
        let p = project();
        assert_eq!(status("npm test", &p), 0);
        assert_eq!(status("npm ci && npm test", &p), 0);
        let mut broken = p.clone();
        broken.remove("src/lib.js");
        assert_eq!(status("npm test", &broken), 1);
        assert_eq!(status("npm run missing", &p), 1);
    }

    #[test]
    fn connectors_follow_shell_semantics() {
        let empty = WorkingState::new();
        assert_eq!(status("false && true", &empty), 1);
        assert_eq!(status("false; true", &empty), 0);
        assert_eq!(status("true && exit 3", &empty), 3);
    }

    #[test]
    fn scripted_overrides_and_unavailability() {
        let exec = MockExecutor::new().script("npm test", 0);
        assert_eq!(exec.run("npm test", &WorkingState::new()).unwrap().exit_status, 0);
        assert!(MockExecutor::unavailable().run("true", &WorkingState::new()).is_err());
    }

    #[test]
    fn file_tests() {
        let p = project();
        assert_eq!(status("test -f src/lib.js", &p), 0);
        assert_eq!(status("[ -f nope.js ]", &p), 1);
        assert_eq!(status("test -d test", &p), 0);
    }
}

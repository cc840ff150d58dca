//! One solver subprocess per query.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use super::SmtError;

pub struct RawOutput {
    pub stdout: String,
    pub timed_out: bool,
}

/// Runs `exe args` with `script` on standard input. The process is killed
/// if it has not finished after `hard_limit`.
pub fn run_solver(exe: &Path, args: &[String], script: &str, hard_limit: Duration) -> Result<RawOutput, SmtError> {
    let mut child = Command::new(exe)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                SmtError::SolverUnavailable(format!("{}: {e}", exe.display()))
            }
            _ => SmtError::Io(e.to_string()),
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = script.to_owned();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });

    let mut stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = String::new();
        let res = stdout.read_to_string(&mut buf).map(|_| buf);
        let _ = tx.send(res);
    });

    let result = match rx.recv_timeout(hard_limit) {
        Ok(Ok(stdout)) => {
            let _ = child.wait();
            RawOutput {
                stdout,
                timed_out: false,
            }
        }
        Ok(Err(e)) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SmtError::Io(e.to_string()));
        }
        Err(_) => {
            let _ = child.kill();
            let _ = child.wait();
            RawOutput {
                stdout: String::new(),
                timed_out: true,
            }
        }
    };
    let _ = writer.join();
    Ok(result)
}

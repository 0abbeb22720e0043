//! A target evaluated by an external process.
//!
//! Protocol, one exchange per evaluation: the engine writes the point as one
//! line of whitespace-separated decimal numbers, the process answers with one
//! line holding `ℓ(x)` (`inf` for points outside the support). Exchanges are
//! serialized through a mutex, so the external program sees one request at a
//! time. Any I/O or parse failure makes the evaluation return NaN, which the
//! discretizer reports as a target-evaluation error; the message is kept in
//! [`SubprocessTarget::last_error`].

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::target::{Support, Target};

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct SubprocessTarget {
    name: String,
    support: Vec<Support>,
    pipe: Mutex<Pipe>,
    last_error: Mutex<Option<String>>,
}

impl SubprocessTarget {
    /// Starts `program args…`.
    pub fn spawn(program: &str, args: &[String], support: Vec<Support>, name: impl Into<String>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidParameter("subprocess target needs a nonempty support".into()));
        }
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Subprocess(format!("failed to start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            name: name.into(),
            support,
            pipe: Mutex::new(Pipe { child, stdin, stdout }),
            last_error: Mutex::new(None),
        })
    }

    pub fn last_error(&self) -> Option<String> {
        self.last_error.lock().map(|e| e.clone()).unwrap_or(None)
    }

    /// One request/response exchange.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let mut pipe = self
            .pipe
            .lock()
            .map_err(|_| Error::Subprocess("pipe lock poisoned".into()))?;
        let line = x.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ");
        writeln!(pipe.stdin, "{line}").map_err(|e| Error::Subprocess(format!("write failed: {e}")))?;
        pipe.stdin
            .flush()
            .map_err(|e| Error::Subprocess(format!("flush failed: {e}")))?;
        let mut reply = String::new();
        let read = pipe
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Subprocess(format!("read failed: {e}")))?;
        if read == 0 {
            return Err(Error::Subprocess("process closed its output".into()));
        }
        let t = reply.trim();
        match t {
            "inf" | "+inf" | "Infinity" | "+Infinity" => Ok(f64::INFINITY),
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::Subprocess(format!("unparseable reply {t:?}"))),
        }
    }
}

impl Target for SubprocessTarget {
    fn dim(&self) -> usize {
        self.support.len()
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        match self.evaluate(x) {
            Ok(v) => v,
            Err(e) => {
                if let Ok(mut slot) = self.last_error.lock() {
                    *slot = Some(e.to_string());
                }
                f64::NAN
            }
        }
    }

    fn support(&self) -> Vec<Support> {
        self.support.clone()
    }

    fn name(&self) -> &str {
        &self.name
    }
}

impl Drop for SubprocessTarget {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh_target(script: &str) -> SubprocessTarget {
        SubprocessTarget::spawn(
            "sh",
            &["-c".to_string(), script.to_string()],
            vec![Support::Real; 2],
            "sh",
        )
        .unwrap()
    }

    const ECHO: &str = r#"while read a b; do case "$a" in -*) echo inf ;; 0*) echo oops ;; *) echo "$b" ;; esac; done"#;

    #[test]
    fn round_trip() {
        let t = sh_target(ECHO);
        assert_eq!(t.neg_log_density(&[1.0, 2.5]), 2.5);
        assert_eq!(t.neg_log_density(&[3.0, -0.125]), -0.125);
        assert!(t.last_error().is_none());
    }

    #[test]
    fn infinite_and_garbage_replies() {
        let t = sh_target(ECHO);
        assert_eq!(t.neg_log_density(&[-1.0, 0.0]), f64::INFINITY);
        assert!(t.neg_log_density(&[0.0, 0.0]).is_nan());
        assert!(t.last_error().unwrap().contains("oops"));
    }

    #[test]
    fn closed_output_is_an_error() {
        let t = sh_target("read a; exit 0");
        assert!(t.neg_log_density(&[1.0, 1.0]).is_nan());
    }

    #[test]
    fn missing_program() {
        assert!(matches!(
            SubprocessTarget::spawn("/nonexistent/qda-target", &[], vec![Support::Real], "x"),
            Err(Error::Subprocess(_))
        ));
    }
}

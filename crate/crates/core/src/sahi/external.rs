//! Out-of-process detector.
//!
//! Protocol, per patch: the patch is written to the child's standard input
//! as a binary PGM (P5, maxval 255); the child writes one detection per line
//! to standard output,
//!
//! ```text
//! class_id score x1 y1 x2 y2
//! ```
//!
//! decimal, space separated, in patch-local pixels, and exits. A non-zero
//! exit status is a backend failure.

use std::io::Write;
use std::process::{Command, Stdio};

use super::DetectorBackend;
use crate::error::{Error, Result};
use crate::geometry::{BBox2D, Detection};
use crate::image::GrayImage;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalDetector {
    pub program: String,
    pub args: Vec<String>,
    /// Each patch gets its own process, so calls are independent unless the
    /// program itself holds a shared resource. Clear this to force serial runs.
    pub concurrent: bool,
}

impl ExternalDetector {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
            concurrent: true,
        }
    }

    /// Splits a command line on whitespace: program followed by arguments.
    pub fn from_command_line(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace().map(str::to_owned);
        let program = parts
            .next()
            .ok_or_else(|| Error::arg("empty detector command"))?;
        Ok(Self::new(program, parts.collect()))
    }
}

/// Parses `class_id score x1 y1 x2 y2` records. Blank lines are skipped.
pub fn parse_detection_lines(text: &str) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let class_id: u32 = fields[0]
            .parse()
            .map_err(|_| bad(format!("invalid class id {:?}", fields[0])))?;
        let mut nums = [0.0f64; 5];
        for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| bad(format!("invalid number {f:?}")))?;
        }
        let [score, x1, y1, x2, y2] = nums;
        let bbox = BBox2D::new(x1, y1, x2, y2).map_err(|e| bad(e.to_string()))?;
        out.push(Detection::new(bbox, score, class_id).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

impl DetectorBackend for ExternalDetector {
    fn detect(&self, patch: &GrayImage) -> Result<Vec<Detection>> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::arg(format!("cannot start {:?}: {e}", self.program)))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let pgm = patch.to_pgm();
        let writer = std::thread::spawn(move || match stdin.write_all(&pgm) {
            // a child may legitimately stop reading early
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        });
        let output = child.wait_with_output()?;
        writer
            .join()
            .map_err(|_| Error::arg("detector stdin writer panicked"))??;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(Error::arg(format!(
                "{:?} exited with {}: {}",
                self.program,
                output.status,
                stderr.trim()
            )));
        }
        let text = String::from_utf8(output.stdout)
            .map_err(|_| Error::Format("detector output is not UTF-8".into()))?;
        parse_detection_lines(&text)
    }

    fn concurrency_safe(&self) -> bool {
        self.concurrent
    }
}

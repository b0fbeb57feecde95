//! `key=value` run reports.

use std::fmt::Display;
use std::time::Instant;

#[derive(Debug, Default)]
pub struct RunReport {
    entries: Vec<(String, String)>,
}

impl RunReport {
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn add(&mut self, key: &str, delta: usize) {
        let current = self
            .get(key)
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        self.set(key, current + delta);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Adds the elapsed milliseconds since `start` to `time_<stage>_ms`.
    pub fn time(&mut self, stage: &str, start: Instant) {
        let key = format!("time_{stage}_ms");
        let prev: f64 = self.get(&key).and_then(|v| v.parse().ok()).unwrap_or(0.0);
        self.set(
            key,
            format!("{:.3}", prev + start.elapsed().as_secs_f64() * 1e3),
        );
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

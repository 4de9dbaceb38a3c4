use std::io::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Wall-clock fields appended to JSON reports unless suppressed.
pub struct Stamp {
    enabled: bool,
    started: Instant,
}

impl Stamp {
    pub fn new(enabled: bool) -> Stamp {
        Stamp {
            enabled,
            started: Instant::now(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn apply(&self, v: &mut Value) {
        if !self.enabled {
            return;
        }
        if let Value::Object(m) = v {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            m.insert("timestamp".into(), Value::from(ts));
            m.insert("seconds".into(), Value::from(self.started.elapsed().as_secs_f64()));
        }
    }
}

pub fn json<T: Serialize>(body: &T, stamp: &Stamp) -> String {
    let mut v = serde_json::to_value(body).expect("reports serialize");
    stamp.apply(&mut v);
    serde_json::to_string_pretty(&v).expect("json")
}

/// Drops the `seconds` field some library reports carry.
pub fn without_seconds(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(k, _)| k != "seconds").collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
}

pub fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

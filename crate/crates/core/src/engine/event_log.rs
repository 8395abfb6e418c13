//! Append-only event log: one `time,kind,task,bs,u,detail` record per event.
//!
//! Missing fields are written as `-`; `detail` is a `key=value;key=value` list.
//! Floats use Rust's shortest round-trip formatting, so a parsed log carries
//! exactly the values the engine used.

use std::fmt;
use std::str::FromStr;

use crate::model::{BsId, TaskId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Tor,
    Toa,
    Nack,
    Tsr,
    Tea,
    Alloc,
    Start,
    Complete,
    Evict,
    Cloud,
    Drop,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::Tor,
        EventKind::Toa,
        EventKind::Nack,
        EventKind::Tsr,
        EventKind::Tea,
        EventKind::Alloc,
        EventKind::Start,
        EventKind::Complete,
        EventKind::Evict,
        EventKind::Cloud,
        EventKind::Drop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Tor => "TOR",
            EventKind::Toa => "TOA",
            EventKind::Nack => "NACK",
            EventKind::Tsr => "TSR",
            EventKind::Tea => "TEA",
            EventKind::Alloc => "ALLOC",
            EventKind::Start => "START",
            EventKind::Complete => "COMPLETE",
            EventKind::Evict => "EVICT",
            EventKind::Cloud => "CLOUD",
            EventKind::Drop => "DROP",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: Time,
    pub kind: EventKind,
    pub task: TaskId,
    pub bs: Option<BsId>,
    pub u: Option<f64>,
    pub detail: Vec<(String, String)>,
}

impl Event {
    pub fn new(time: Time, kind: EventKind, task: TaskId) -> Self {
        Event {
            time,
            kind,
            task,
            bs: None,
            u: None,
            detail: Vec::new(),
        }
    }

    pub fn bs(mut self, bs: BsId) -> Self {
        self.bs = Some(bs);
        self
    }

    pub fn u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.detail.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.detail
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parses detail `key` as `T`.
    pub fn get_as<T: FromStr>(&self, key: &str) -> Option<T> {
        self.get(key).and_then(|v| v.parse().ok())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},", self.time, self.kind.name(), self.task)?;
        match self.bs {
            Some(b) => write!(f, "{},", b.0)?,
            None => f.write_str("-,")?,
        }
        match self.u {
            Some(u) => write!(f, "{u},")?,
            None => f.write_str("-,")?,
        }
        if self.detail.is_empty() {
            return f.write_str("-");
        }
        for (i, (k, v)) in self.detail.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Event {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.splitn(6, ',').collect();
        if fields.len() != 6 {
            return Err(format!("expected 6 fields: `{line}`"));
        }
        let num = |s: &str, what: &str| -> Result<u64, String> {
            s.parse().map_err(|_| format!("bad {what} `{s}`"))
        };
        let time = num(fields[0], "time")?;
        let kind = fields[1].parse()?;
        let task = TaskId(num(fields[2], "task")?);
        let bs = match fields[3] {
            "-" => None,
            s => Some(BsId(s.parse().map_err(|_| format!("bad bs `{s}`"))?)),
        };
        let u = match fields[4] {
            "-" => None,
            s => Some(s.parse().map_err(|_| format!("bad u `{s}`"))?),
        };
        let detail = match fields[5] {
            "-" => Vec::new(),
            s => s
                .split(';')
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| format!("bad detail entry `{kv}`"))
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(Event {
            time,
            kind,
            task,
            bs,
            u,
            detail,
        })
    }
}

/// Header line prefix identifying the format.
pub const LOG_HEADER: &str = "# vecsched event log v1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    /// `key=value` pairs written into the header line.
    pub meta: Vec<(String, String)>,
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 48);
        out.push_str(LOG_HEADER);
        for (k, v) in &self.meta {
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out.push_str("\ntime,kind,task,bs,u,detail\n");
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty log")?;
        let rest = header
            .strip_prefix(LOG_HEADER)
            .ok_or_else(|| format!("not an event log header: `{header}`"))?;
        let meta = rest
            .split_whitespace()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| format!("bad header entry `{kv}`"))
            })
            .collect::<Result<_, _>>()?;
        match lines.next() {
            Some("time,kind,task,bs,u,detail") => {}
            other => return Err(format!("missing column header, got {other:?}")),
        }
        let events = lines
            .enumerate()
            .map(|(i, l)| l.parse().map_err(|e| format!("line {}: {e}", i + 3)))
            .collect::<Result<_, _>>()?;
        Ok(EventLog { meta, events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_round_trip() {
        let e = Event::new(12, EventKind::Alloc, TaskId(7))
            .bs(BsId(3))
            .u(0.1 + 0.2)
            .with("start", 12)
            .with("dist", 5.0f64.sqrt());
        let line = e.to_string();
        assert_eq!(line.parse::<Event>().unwrap(), e);
        let bare = Event::new(0, EventKind::Drop, TaskId(1));
        assert_eq!(bare.to_string(), "0,DROP,1,-,-,-");
        assert_eq!(bare.to_string().parse::<Event>().unwrap(), bare);
    }

    #[test]
    fn log_round_trip() {
        let mut log = EventLog {
            meta: vec![("policy".into(), "nearest".into())],
            ..Default::default()
        };
        log.push(
            Event::new(3, EventKind::Tsr, TaskId(2))
                .bs(BsId(0))
                .with("x", 4),
        );
        log.push(Event::new(3, EventKind::Cloud, TaskId(2)).with("dist", 40));
        let text = log.to_text();
        let back = EventLog::parse(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.meta("policy"), Some("nearest"));
        assert!(EventLog::parse("garbage").is_err());
    }
}

//! Line-oriented scenario text:
//!
//! ```text
//! [CONFIG]
//! seed=42
//! t_beta=3
//! ...
//! [BS]
//! 0,12,40            # id,x,y
//! [AV]
//! 0,5,3,9            # batch,id,x,y
//! [TASK]
//! 0,1,12,5,H,5       # id,a,d,p,flag,av
//! ```
//!
//! Writing and re-reading a scenario reproduces it exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Scenario, WorkloadError};
use crate::model::{AvId, Criticality, Point, Task, VecsConfig};

pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str("[CONFIG]\n");
    let _ = writeln!(out, "seed={}", s.seed);
    out.push_str(&s.cfg.to_kv_text());
    out.push_str("[BS]\n");
    for (i, p) in s.bs_locations.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", p.x, p.y);
    }
    out.push_str("[AV]\n");
    for ((batch, av), p) in &s.av_locations {
        let _ = writeln!(out, "{batch},{av},{},{}", p.x, p.y);
    }
    out.push_str("[TASK]\n");
    for t in &s.tasks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t.id,
            t.arrival,
            t.deadline,
            t.min_processing,
            t.flag.code(),
            t.origin_av
        );
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Config,
    Bs,
    Av,
    Task,
}

fn ints<const N: usize>(fields: &[&str], line: usize) -> Result<[i64; N], WorkloadError> {
    if fields.len() != N {
        return Err(WorkloadError::Parse {
            line,
            msg: format!("expected {N} fields, found {}", fields.len()),
        });
    }
    let mut out = [0i64; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.trim().parse().map_err(|_| WorkloadError::Parse {
            line,
            msg: format!("not an integer: `{f}`"),
        })?;
    }
    Ok(out)
}

fn non_negative(v: i64, line: usize, what: &str) -> Result<u64, WorkloadError> {
    u64::try_from(v).map_err(|_| WorkloadError::Parse {
        line,
        msg: format!("{what} must be non-negative"),
    })
}

pub fn read_scenario(text: &str) -> Result<Scenario, WorkloadError> {
    let mut section = Section::None;
    let mut cfg = VecsConfig::default();
    let mut seed = None;
    let mut bs_locations = Vec::new();
    let mut av_locations = BTreeMap::new();
    let mut tasks = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[CONFIG]" => {
                section = Section::Config;
                continue;
            }
            "[BS]" => {
                section = Section::Bs;
                continue;
            }
            "[AV]" => {
                section = Section::Av;
                continue;
            }
            "[TASK]" => {
                section = Section::Task;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split(',').collect();
        match section {
            Section::None => {
                return Err(WorkloadError::Parse {
                    line: line_no,
                    msg: "content before first section header".into(),
                })
            }
            Section::Config => {
                let (k, v) = line.split_once('=').ok_or_else(|| WorkloadError::Parse {
                    line: line_no,
                    msg: "expected key=value".into(),
                })?;
                if k.trim() == "seed" {
                    seed = Some(v.trim().parse().map_err(|_| WorkloadError::Parse {
                        line: line_no,
                        msg: format!("bad seed `{}`", v.trim()),
                    })?);
                } else {
                    cfg.set(k, v).map_err(|e| WorkloadError::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                }
            }
            Section::Bs => {
                let [id, x, y] = ints::<3>(&fields, line_no)?;
                if id != bs_locations.len() as i64 {
                    return Err(WorkloadError::Parse {
                        line: line_no,
                        msg: format!("base station ids must be 0..M in order, got {id}"),
                    });
                }
                bs_locations.push(Point::new(x, y));
            }
            Section::Av => {
                let [batch, id, x, y] = ints::<4>(&fields, line_no)?;
                let key = (
                    non_negative(batch, line_no, "batch")?,
                    AvId(non_negative(id, line_no, "vehicle id")?),
                );
                if av_locations.insert(key, Point::new(x, y)).is_some() {
                    return Err(WorkloadError::Parse {
                        line: line_no,
                        msg: format!(
                            "duplicate location for vehicle {} at batch {}",
                            key.1, key.0
                        ),
                    });
                }
            }
            Section::Task => {
                if fields.len() != 6 {
                    return Err(WorkloadError::Parse {
                        line: line_no,
                        msg: format!("expected 6 fields, found {}", fields.len()),
                    });
                }
                let flag = Criticality::from_code(fields[4].trim()).ok_or_else(|| {
                    WorkloadError::Parse {
                        line: line_no,
                        msg: format!("flag must be H or S, got `{}`", fields[4].trim()),
                    }
                })?;
                let nums: Vec<&str> = [0, 1, 2, 3, 5].iter().map(|&i| fields[i]).collect();
                let [id, a, d, p, av] = ints::<5>(&nums, line_no)?;
                let task = Task::new(
                    non_negative(id, line_no, "task id")?,
                    non_negative(a, line_no, "arrival")?,
                    non_negative(d, line_no, "deadline")?,
                    non_negative(p, line_no, "processing")?,
                    flag,
                    non_negative(av, line_no, "vehicle id")?,
                )
                .map_err(|e| WorkloadError::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                tasks.push(task);
            }
        }
    }

    let seed = seed.ok_or(WorkloadError::Parse {
        line: 0,
        msg: "missing seed in [CONFIG]".into(),
    })?;
    let scenario = Scenario {
        tasks,
        bs_locations,
        av_locations,
        cfg,
        seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

//! Turns a cluster task trace plus a longitude/latitude trace into a scenario.
//!
//! Locations are projected equirectangularly about their centroid and scaled
//! with one factor for both axes onto the integer grid, so the ordering of
//! pairwise distances survives up to rounding. Times share a single affine
//! map onto `[0, t_max]`.

use std::collections::BTreeMap;
use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generator::{assign_flags, draw_deadline};
use super::{Scenario, WorkloadError};
use crate::model::{AvId, Criticality, Point, SlackClass, Task, Time, VecsConfig};

const EARTH_RADIUS_M: f64 = 6_371_000.0;
const DEADLINE_ATTEMPTS: usize = 1_000;

/// Names of the source columns that carry each field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMapping {
    pub arrival: String,
    pub processing: String,
    /// Absolute deadline column; required unless a slack band is imposed.
    pub deadline: Option<String>,
    /// Criticality column (`H`/`S`, `hard`/`soft`, `1`/`0`); otherwise flags follow `hard_ratio`.
    pub flag: Option<String>,
    pub longitude: String,
    pub latitude: String,
}

impl Default for TraceMapping {
    fn default() -> Self {
        TraceMapping {
            arrival: "arrival_ns".into(),
            processing: "duration_ns".into(),
            deadline: Some("deadline_ns".into()),
            flag: None,
            longitude: "longitude".into(),
            latitude: "latitude".into(),
        }
    }
}

impl TraceMapping {
    /// Parses `field = column` lines; `deadline` and `flag` may be set to `none`.
    pub fn from_kv_text(text: &str) -> Result<Self, WorkloadError> {
        let mut m = TraceMapping::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| WorkloadError::Parse {
                line: i + 1,
                msg: "expected field = column".into(),
            })?;
            let v = v.trim().to_string();
            let opt = |v: String| (v != "none").then_some(v);
            match k.trim() {
                "arrival" => m.arrival = v,
                "processing" => m.processing = v,
                "deadline" => m.deadline = opt(v),
                "flag" => m.flag = opt(v),
                "longitude" => m.longitude = v,
                "latitude" => m.latitude = v,
                other => {
                    return Err(WorkloadError::Parse {
                        line: i + 1,
                        msg: format!("unknown mapping field `{other}`"),
                    })
                }
            }
        }
        Ok(m)
    }
}

/// How a trace is cut down and rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub n_tasks: usize,
    pub n_bs: usize,
    pub grid_size: i64,
    /// Scaled times land in `[0, t_max]`.
    pub t_max: Time,
    pub mapping: TraceMapping,
    /// When set, deadlines are redrawn inside this band from the scaled arrival and processing.
    pub slack: Option<SlackClass>,
    /// Used when the mapping has no flag column.
    pub hard_ratio: (u32, u32),
    pub seed: u64,
    pub cfg: VecsConfig,
}

impl Default for ScalingParams {
    fn default() -> Self {
        ScalingParams {
            n_tasks: 500,
            n_bs: 100,
            grid_size: 100,
            t_max: 300,
            mapping: TraceMapping::default(),
            slack: None,
            hard_ratio: (1, 1),
            seed: 0,
            cfg: VecsConfig::default(),
        }
    }
}

/// Counters for records that were skipped or adjusted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub malformed_task_records: usize,
    pub malformed_location_records: usize,
    pub clamped_processing: usize,
    pub dropped_invalid: usize,
    pub tasks_kept: usize,
}

struct RawTask {
    arrival: f64,
    processing: f64,
    deadline: Option<f64>,
    flag: Option<Criticality>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, WorkloadError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| WorkloadError::Ingest(format!("missing column `{name}`")))
}

fn parse_flag(v: &str) -> Option<Criticality> {
    match v.trim().to_ascii_lowercase().as_str() {
        "h" | "hard" | "1" | "true" => Some(Criticality::Hard),
        "s" | "soft" | "0" | "false" => Some(Criticality::Soft),
        _ => None,
    }
}

fn field(rec: &csv::StringRecord, idx: usize) -> Option<f64> {
    rec.get(idx)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|v| v.is_finite())
}

fn read_tasks<R: Read>(
    src: R,
    mapping: &TraceMapping,
    limit: usize,
    report: &mut IngestReport,
) -> Result<Vec<RawTask>, WorkloadError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(src);
    let headers = rdr
        .headers()
        .map_err(|e| WorkloadError::Ingest(format!("task trace header: {e}")))?
        .clone();
    let a_col = column(&headers, &mapping.arrival)?;
    let p_col = column(&headers, &mapping.processing)?;
    let d_col = mapping
        .deadline
        .as_deref()
        .map(|c| column(&headers, c))
        .transpose()?;
    let f_col = mapping
        .flag
        .as_deref()
        .map(|c| column(&headers, c))
        .transpose()?;

    let mut out = Vec::new();
    for rec in rdr.records() {
        if out.len() == limit {
            break;
        }
        let Ok(rec) = rec else {
            report.malformed_task_records += 1;
            continue;
        };
        let arrival = field(&rec, a_col).filter(|v| *v >= 0.0);
        let processing = field(&rec, p_col).filter(|v| *v > 0.0);
        let deadline = d_col.map(|c| field(&rec, c));
        let flag = f_col.map(|c| rec.get(c).and_then(parse_flag));
        match (arrival, processing, deadline, flag) {
            (Some(arrival), Some(processing), None | Some(Some(_)), None | Some(Some(_))) => out
                .push(RawTask {
                    arrival,
                    processing,
                    deadline: deadline.flatten(),
                    flag: flag.flatten(),
                }),
            _ => report.malformed_task_records += 1,
        }
    }
    Ok(out)
}

fn read_locations<R: Read>(
    src: R,
    mapping: &TraceMapping,
    report: &mut IngestReport,
) -> Result<Vec<(f64, f64)>, WorkloadError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(src);
    let headers = rdr
        .headers()
        .map_err(|e| WorkloadError::Ingest(format!("location trace header: {e}")))?
        .clone();
    let lon_col = column(&headers, &mapping.longitude)?;
    let lat_col = column(&headers, &mapping.latitude)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let Ok(rec) = rec else {
            report.malformed_location_records += 1;
            continue;
        };
        let lon = field(&rec, lon_col).filter(|v| (-180.0..=180.0).contains(v));
        let lat = field(&rec, lat_col).filter(|v| (-90.0..=90.0).contains(v));
        match (lon, lat) {
            (Some(lon), Some(lat)) => out.push((lon, lat)),
            _ => report.malformed_location_records += 1,
        }
    }
    Ok(out)
}

/// Equirectangular projection about the centroid, in metres.
fn project(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = points.len() as f64;
    let lon0 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let lat0 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cos0 = lat0.to_radians().cos();
    points
        .iter()
        .map(|&(lon, lat)| {
            (
                EARTH_RADIUS_M * (lon - lon0).to_radians() * cos0,
                EARTH_RADIUS_M * (lat - lat0).to_radians(),
            )
        })
        .collect()
}

/// Uniform affine map of planar points onto `[0, m]^2`.
fn to_grid(planar: &[(f64, f64)], m: i64) -> Vec<Point> {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in planar {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let span = (xmax - xmin).max(ymax - ymin);
    let scale = if span > 0.0 { m as f64 / span } else { 0.0 };
    planar
        .iter()
        .map(|&(x, y)| {
            let gx = ((x - xmin) * scale).round() as i64;
            let gy = ((y - ymin) * scale).round() as i64;
            Point::new(gx.clamp(0, m), gy.clamp(0, m))
        })
        .collect()
}

/// Time span (source units) that [`ingest_trace`] maps onto `[0, t_max]` for
/// the first `n_tasks` usable records: earliest arrival to the latest deadline
/// or finish. Lets callers pick `t_max` for a fixed source-units-per-slot resolution.
pub fn trace_span<T: Read>(
    task_trace: T,
    mapping: &TraceMapping,
    n_tasks: usize,
) -> Result<f64, WorkloadError> {
    let mut report = IngestReport::default();
    let raw = read_tasks(task_trace, mapping, n_tasks, &mut report)?;
    if raw.is_empty() {
        return Err(WorkloadError::Ingest("no usable task records".into()));
    }
    let (origin, end) = time_bounds(&raw);
    Ok(end - origin)
}

fn time_bounds(raw: &[RawTask]) -> (f64, f64) {
    let origin = raw.iter().map(|r| r.arrival).fold(f64::MAX, f64::min);
    let end = raw
        .iter()
        .map(|r| {
            r.deadline
                .unwrap_or(r.arrival + r.processing)
                .max(r.arrival + r.processing)
        })
        .fold(f64::MIN, f64::max);
    (origin, end)
}

/// Builds a scenario from a task trace and a location trace.
///
/// The first `n_bs` usable location records become base stations; task `i`
/// is issued by vehicle `i`, placed at the next location record in turn.
pub fn ingest_trace<T: Read, L: Read>(
    task_trace: T,
    location_trace: L,
    scaling: &ScalingParams,
) -> Result<(Scenario, IngestReport), WorkloadError> {
    scaling.cfg.validate()?;
    if scaling.n_tasks == 0 || scaling.n_bs == 0 {
        return Err(WorkloadError::InvalidParams(
            "n_tasks and n_bs must be positive".into(),
        ));
    }
    if scaling.grid_size <= 0 || scaling.t_max == 0 {
        return Err(WorkloadError::InvalidParams(
            "grid_size and t_max must be positive".into(),
        ));
    }
    if scaling.mapping.deadline.is_none() && scaling.slack.is_none() {
        return Err(WorkloadError::InvalidParams(
            "trace has no deadline column and no slack band to derive one".into(),
        ));
    }
    if scaling.mapping.flag.is_none() && (scaling.hard_ratio.0 == 0 || scaling.hard_ratio.1 == 0) {
        return Err(WorkloadError::InvalidParams(
            "hard:soft ratio components must be positive".into(),
        ));
    }

    let mut report = IngestReport::default();
    let raw = read_tasks(task_trace, &scaling.mapping, scaling.n_tasks, &mut report)?;
    if raw.is_empty() {
        return Err(WorkloadError::Ingest("no usable task records".into()));
    }
    let locs = read_locations(location_trace, &scaling.mapping, &mut report)?;
    if locs.len() <= scaling.n_bs {
        return Err(WorkloadError::Ingest(format!(
            "need more than {} usable location records, found {}",
            scaling.n_bs,
            locs.len()
        )));
    }

    let grid = to_grid(&project(&locs), scaling.grid_size);
    let (bs_locations, av_pool) = grid.split_at(scaling.n_bs);

    let (origin, end) = time_bounds(&raw);
    let span = end - origin;
    let k = if span > 0.0 {
        scaling.t_max as f64 / span
    } else {
        0.0
    };
    let scale_time = |v: f64| ((v - origin) * k).floor().clamp(0.0, scaling.t_max as f64) as Time;

    let mut rng = ChaCha8Rng::seed_from_u64(scaling.seed);
    let ratio_flags = assign_flags(raw.len(), scaling.hard_ratio, &mut rng);

    let mut cfg = scaling.cfg.clone();
    cfg.grid_size = scaling.grid_size;
    let mut tasks = Vec::with_capacity(raw.len());
    let mut av_locations = BTreeMap::new();
    for (i, r) in raw.iter().enumerate() {
        let arrival = scale_time(r.arrival);
        let mut processing = (r.processing * k).floor() as Time;
        if processing == 0 {
            processing = 1;
            report.clamped_processing += 1;
        }
        let deadline = match scaling.slack {
            Some(band) => (0..DEADLINE_ATTEMPTS)
                .find_map(|_| draw_deadline(&mut rng, arrival, processing, band)),
            None => r.deadline.map(scale_time),
        };
        let flag = r.flag.unwrap_or(ratio_flags[i]);
        let task =
            deadline.and_then(|d| Task::new(i as u64, arrival, d, processing, flag, i as u64).ok());
        let Some(task) = task else {
            report.dropped_invalid += 1;
            continue;
        };
        av_locations.insert(
            (arrival / cfg.t_beta, AvId(i as u64)),
            av_pool[i % av_pool.len()],
        );
        tasks.push(task);
    }
    if tasks.is_empty() {
        return Err(WorkloadError::Ingest(
            "every task record became invalid after scaling".into(),
        ));
    }
    report.tasks_kept = tasks.len();

    let last = tasks.iter().map(|t| t.deadline).max().unwrap_or(0);
    cfg.horizon = cfg.next_boundary(last);
    let scenario = Scenario {
        tasks,
        bs_locations: bs_locations.to_vec(),
        av_locations,
        cfg,
        seed: scaling.seed,
    };
    scenario.validate()?;
    Ok((scenario, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOCS: &str =
        "longitude,latitude\n144.96,-37.81\n144.97,-37.80\n144.95,-37.82\n144.96,-37.815\n";

    fn params(n: usize) -> ScalingParams {
        ScalingParams {
            n_tasks: n,
            n_bs: 2,
            grid_size: 10,
            t_max: 100,
            ..Default::default()
        }
    }

    #[test]
    fn zero_processing_is_clamped_and_counted() {
        let tasks = "arrival_ns,duration_ns,deadline_ns\n0,1,1000\n500,100,1000\n";
        let (s, rep) = ingest_trace(tasks.as_bytes(), LOCS.as_bytes(), &params(10)).unwrap();
        assert_eq!(s.tasks[0].min_processing, 1);
        assert_eq!(s.tasks[1].min_processing, 10);
        assert_eq!(rep.clamped_processing, 1);
    }

    #[test]
    fn equal_arrivals_keep_input_order() {
        let tasks = "arrival_ns,duration_ns,deadline_ns\n100,50,1000\n100,20,900\n0,10,500\n";
        let (s, _) = ingest_trace(tasks.as_bytes(), LOCS.as_bytes(), &params(10)).unwrap();
        assert_eq!(s.tasks.len(), 3);
        assert_eq!(s.tasks[0].arrival, s.tasks[1].arrival);
        assert_eq!(s.tasks[0].min_processing, 5);
        assert_eq!(s.tasks[1].min_processing, 2);
    }

    #[test]
    fn malformed_records_are_skipped() {
        let tasks = "arrival_ns,duration_ns,deadline_ns\nx,1,2\n0,,10\n0,5,100\n";
        let locs = format!("{LOCS}bogus,1\n");
        let (s, rep) = ingest_trace(tasks.as_bytes(), locs.as_bytes(), &params(10)).unwrap();
        assert_eq!(s.tasks.len(), 1);
        assert_eq!(rep.malformed_task_records, 2);
        assert_eq!(rep.malformed_location_records, 1);
    }

    #[test]
    fn no_usable_records_is_an_error() {
        let tasks = "arrival_ns,duration_ns,deadline_ns\nx,y,z\n";
        assert!(matches!(
            ingest_trace(tasks.as_bytes(), LOCS.as_bytes(), &params(10)),
            Err(WorkloadError::Ingest(_))
        ));
        let missing_col = "arrival,duration_ns,deadline_ns\n1,2,3\n";
        assert!(ingest_trace(missing_col.as_bytes(), LOCS.as_bytes(), &params(10)).is_err());
    }

    #[test]
    fn first_n_rule() {
        let tasks =
            "arrival_ns,duration_ns,deadline_ns\n0,5,100\n10,5,100\nbad,1,1\n20,5,100\n30,5,100\n";
        let (s, _) = ingest_trace(tasks.as_bytes(), LOCS.as_bytes(), &params(3)).unwrap();
        assert_eq!(s.tasks.len(), 3);
        assert_eq!(s.n_bs(), 2);
    }

    #[test]
    fn slack_band_redraws_deadlines() {
        let tasks = "arrival_ns,duration_ns\n0,50\n100,80\n200,60\n900,100\n";
        let mapping = TraceMapping {
            deadline: None,
            ..Default::default()
        };
        let p = ScalingParams {
            mapping,
            slack: Some(SlackClass::Loose),
            ..params(10)
        };
        let (s, _) = ingest_trace(tasks.as_bytes(), LOCS.as_bytes(), &p).unwrap();
        assert!(s.tasks.iter().all(|t| t.slack() > 3.0));
    }

    #[test]
    fn planar_scaling_preserves_distance_order() {
        let pts = [
            (144.90, -37.80),
            (144.95, -37.80),
            (145.00, -37.85),
            (144.97, -37.79),
        ];
        let planar = project(&pts);
        let grid = to_grid(&planar, 1000);
        let d = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        let gd = |a: Point, b: Point| ((a.x - b.x) as f64).hypot((a.y - b.y) as f64);
        // on a fine grid the distance ranking is unchanged
        let pairs: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .collect();
        for &(a, b) in &pairs {
            for &(c, e) in &pairs {
                if d(planar[a], planar[b]) < d(planar[c], planar[e]) - 1.0 {
                    assert!(gd(grid[a], grid[b]) <= gd(grid[c], grid[e]));
                }
            }
        }
    }
}

//! Trace files: `n,t,cluster` with `|`-separated cell indices, plus a
//! companion `<stem>.cells.csv` with one `cell,h,t` row per spike.

use std::path::{Path, PathBuf};

use pulsenet_core::{ClusterEvent, Trace};

use crate::error::{CliError, Result};

pub fn cells_path(trace_path: &Path) -> PathBuf {
    let stem = trace_path.file_stem().unwrap_or_default().to_string_lossy();
    trace_path.with_file_name(format!("{stem}.cells.csv"))
}

pub fn write_events<W: std::io::Write>(trace: &Trace, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "t", "cluster"])?;
    for e in &trace.events {
        let cluster: Vec<String> = e.cluster.iter().map(usize::to_string).collect();
        out.write_record([e.n.to_string(), e.t.to_string(), cluster.join("|")])?;
    }
    out.flush()?;
    Ok(())
}

/// Spike `h` of a cell is its `h`-th, counted from 1.
pub fn write_cells<W: std::io::Write>(trace: &Trace, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["cell", "h", "t"])?;
    for (i, spikes) in trace.per_cell_spikes.iter().enumerate() {
        for (h, t) in spikes.iter().enumerate() {
            out.write_record([i.to_string(), (h + 1).to_string(), t.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save(trace: &Trace, path: &Path) -> Result<()> {
    let write = |p: &Path, f: &dyn Fn(std::fs::File) -> csv::Result<()>| -> Result<()> {
        let file = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
        f(file).map_err(|e| CliError::io(p, std::io::Error::other(e)))
    };
    write(path, &|f| write_events(trace, f))?;
    write(&cells_path(path), &|f| write_cells(trace, f))
}

pub fn read_events<R: std::io::Read>(r: R) -> Result<Vec<ClusterEvent>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|e| CliError::Invalid(format!("trace: {e}")))?;
    if headers != vec!["n", "t", "cluster"] {
        return Err(CliError::Invalid(format!("trace header {headers:?}, expected n,t,cluster")));
    }
    let mut events = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Invalid(format!("trace row {row}: {e}")))?;
        let bad = |what: &str| CliError::Invalid(format!("trace row {row}: bad {what}"));
        let n: usize = rec[0].parse().map_err(|_| bad("n"))?;
        let t: f64 = rec[1].parse().map_err(|_| bad("t"))?;
        let cluster = rec[2]
            .split('|')
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("cluster"))?;
        if n != events.len() || cluster.is_empty() || !cluster.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad("event"));
        }
        events.push(ClusterEvent { n, t, cluster });
    }
    Ok(events)
}

/// Reads the event file; `m` and `horizon` are not stored in it.
pub fn load(path: &Path, m: usize, horizon: Option<f64>) -> Result<Trace> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let events = read_events(file)?;
    if let Some(e) = events.iter().find(|e| e.cluster.iter().any(|&i| i >= m)) {
        return Err(CliError::Invalid(format!("trace event {}: cell index beyond {m} cells", e.n)));
    }
    if events.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(CliError::Invalid("trace event times must increase".into()));
    }
    let last = events.last().map_or(0.0, |e| e.t);
    let horizon = horizon.unwrap_or(last);
    Ok(Trace::from_events(m, events, horizon, vec![0.0; m]))
}

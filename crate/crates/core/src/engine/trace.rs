use std::io;
use std::path::Path;

use crate::engine::PathRecord;

/// Writes `path_<index>.csv` with columns `t,B,Y,X,S,theta` and, when the
/// path jumped, `path_<index>_jumps.csv`.
pub fn write_trace(rec: &PathRecord, dir: &Path, path_index: u64) -> io::Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("path_{path_index:06}.csv")))?;
    w.write_record(["t", "B", "Y", "X", "S", "theta"])?;
    for k in 0..rec.n_nodes() {
        let row = [rec.t[k], rec.b[k], rec.y[k], rec.x[k], rec.s[k], rec.theta[k]];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    if rec.jumps.is_empty() {
        return Ok(());
    }
    let mut j = csv::Writer::from_path(dir.join(format!("path_{path_index:06}_jumps.csv")))?;
    j.write_record(["t", "dtheta", "dY", "X_pre", "X_post", "S_pre", "S_post"])?;
    for ev in &rec.jumps {
        let row = [ev.t, ev.dtheta, ev.dy(), ev.x_pre, ev.x_post, ev.s_pre, ev.s_post];
        j.write_record(row.iter().map(|v| v.to_string()))?;
    }
    j.flush()
}

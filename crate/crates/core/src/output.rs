//! CSV and JSON emission. Files are written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, TheoremReport};
use crate::dynamics::SimState;
use crate::error::Result;
use crate::tracers::{good_set_membership, occupancy_fractions, Tracer, DISK_WINDING_RATE};

/// Writes `contents` to `path` via a temporary file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Accumulates snapshot rows `t,kind,id,x,y`: boundary nodes first, then tracers.
#[derive(Clone, Debug)]
pub struct SnapshotWriter {
    buf: String,
}

impl Default for SnapshotWriter {
    fn default() -> Self {
        SnapshotWriter { buf: String::from("t,kind,id,x,y\n") }
    }
}

impl SnapshotWriter {
    pub fn push(&mut self, s: &SimState) {
        for (i, p) in s.boundary.nodes().iter().enumerate() {
            let _ = writeln!(self.buf, "{},node,{i},{},{}", s.t, p.x, p.y);
        }
        for tr in &s.tracers {
            let _ = writeln!(self.buf, "{},tracer,{},{},{}", s.t, tr.id, tr.x.x, tr.x.y);
        }
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

/// Per-tracer rows `id,x0x,x0y,N_over_T,dev,d_total,good_set,flagged,G_minus1,G_0..G_imax`.
pub fn tracer_csv(tracers: &[Tracer], t: f64) -> Result<String> {
    let depth = tracers.first().map_or(0, |tr| tr.ledger.buckets().len());
    let mut buf = String::from("id,x0x,x0y,N_over_T,dev,d_total,good_set,flagged,G_minus1");
    for i in 0..depth {
        let _ = write!(buf, ",G_{i}");
    }
    buf.push('\n');
    for tr in tracers {
        let fr = occupancy_fractions(&tr.ledger, t)?;
        let good = good_set_membership(&fr, tr.ledger.epsilon(), !tr.flagged());
        let rate = tr.winding / t;
        let _ = write!(
            buf,
            "{},{},{},{},{},{},{},{},{}",
            tr.id,
            tr.x0.x,
            tr.x0.y,
            rate,
            (rate - DISK_WINDING_RATE).abs(),
            tr.travel,
            good as u8,
            tr.flagged() as u8,
            fr.outside
        );
        for g in &fr.balls {
            let _ = write!(buf, ",{g}");
        }
        buf.push('\n');
    }
    Ok(buf)
}

/// Per-snapshot diagnostics series, including the good-set fraction `|H_{T_n}|/|Ω_0|`.
pub fn series_csv(series: &[DiagnosticsRecord]) -> String {
    let mut buf = String::from(
        "t,area,centroid_x,centroid_y,angular_impulse,sym_diff_vs_d,vel_dev_max,sv_rhs,good_set_fraction,nodes\n",
    );
    for r in series {
        let good = r.good_set_fraction.map_or_else(String::new, |g| g.to_string());
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t, r.area, r.centroid.x, r.centroid.y, r.angular_impulse, r.sym_diff_vs_d, r.vel_dev_max, r.sv_rhs, good, r.nodes
        );
    }
    buf
}

pub fn report_json(report: &TheoremReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

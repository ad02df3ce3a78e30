use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grid3, GridError, GridFunction};

/// Sidecar metadata written next to each CSV snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub n_theta: usize,
    pub n_eta: usize,
    pub n_v: usize,
    pub origins: [f64; 3],
    pub spacings: [f64; 3],
    pub field_name: String,
}

impl SnapshotMeta {
    pub fn grid(&self) -> Result<Grid3, GridError> {
        Grid3::from_spacing([self.n_theta, self.n_eta, self.n_v], self.origins, self.spacings)
    }
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`.
pub fn write_snapshot(f: &GridFunction, dir: &Path, name: &str) -> Result<(), GridError> {
    fs::create_dir_all(dir)?;
    let g = f.grid();
    let mut csv = String::with_capacity(g.len() * 64);
    csv.push_str("theta,eta,v,value\n");
    for k in 0..g.n_v {
        for j in 0..g.n_eta {
            for i in 0..g.n_theta {
                let [t, e, v] = g.coordinate(i, j, k);
                // `{:?}` on f64 is the shortest round-trip representation.
                let _ = writeln!(csv, "{t:?},{e:?},{v:?},{:?}", f.get(i, j, k));
            }
        }
    }
    fs::write(dir.join(format!("{name}.csv")), csv)?;
    let meta = SnapshotMeta {
        n_theta: g.n_theta,
        n_eta: g.n_eta,
        n_v: g.n_v,
        origins: g.origins(),
        spacings: g.spacings(),
        field_name: name.to_string(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| GridError::Format(e.to_string()))?;
    fs::write(dir.join(format!("{name}.json")), json + "\n")?;
    Ok(())
}

/// Reads a snapshot pair written by [`write_snapshot`].
pub fn read_snapshot(dir: &Path, name: &str) -> Result<(SnapshotMeta, GridFunction), GridError> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json")))?)
        .map_err(|e| GridError::Format(e.to_string()))?;
    let grid = meta.grid()?;
    let text = fs::read_to_string(dir.join(format!("{name}.csv")))?;
    let mut lines = text.lines();
    if lines.next() != Some("theta,eta,v,value") {
        return Err(GridError::Format("missing header theta,eta,v,value".into()));
    }
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.rsplit(',')
                .next()
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| GridError::Format(format!("bad row: {l}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((meta, GridFunction::new(grid, values)?))
}

//! Versioned CSV/JSON artifact formats and the run manifest.
//!
//! Every CSV starts with the version line `# starstab-v1 <kind>` followed by
//! a column header. Floats are written in Rust's shortest round-trip form,
//! so a save/load/save cycle is bit-exact.

use crate::error::{Error, Result};
use crate::family::{CurveEvent, FamilyCurve, FamilySample};
use crate::functionals::DistanceBreakdown;
use crate::hydro::Trajectory;
use crate::star::StarProfile;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: &str = "starstab-v1";

fn version_line(kind: &str) -> String {
    format!("# {FORMAT_VERSION} {kind}\n")
}

fn check_version<'a>(line: Option<&'a str>, kind: &str, path: &Path) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format {
        kind: "csv",
        path: path.display().to_string(),
        detail: "empty file".into(),
    })?;
    let expect = format!("# {FORMAT_VERSION} {kind}");
    if line.trim() != expect {
        return Err(Error::Format {
            kind: "csv",
            path: path.display().to_string(),
            detail: format!("expected version line `{expect}`, found `{line}`"),
        });
    }
    Ok(line)
}

fn parse_row(line: &str, cols: usize, path: &Path, lineno: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> =
        line.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == cols => Ok(v),
        Ok(v) => Err(Error::Format {
            kind: "csv",
            path: path.display().to_string(),
            detail: format!("line {lineno}: expected {cols} columns, found {}", v.len()),
        }),
        Err(e) => Err(Error::Format {
            kind: "csv",
            path: path.display().to_string(),
            detail: format!("line {lineno}: {e}"),
        }),
    }
}

/// Read a bare two-column (rho, P) table; `#` comment lines and an optional
/// non-numeric header row are skipped.
pub fn read_table_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut rho = Vec::new();
    let mut p = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Format {
                kind: "table",
                path: path.display().to_string(),
                detail: format!("line {}: expected 2 columns", i + 1),
            });
        }
        match (parts[0].parse::<f64>(), parts[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                rho.push(a);
                p.push(b);
            }
            _ if rho.is_empty() => continue, // header row
            _ => {
                return Err(Error::Format {
                    kind: "table",
                    path: path.display().to_string(),
                    detail: format!("line {}: not numeric", i + 1),
                })
            }
        }
    }
    Ok((rho, p))
}

/// Profile metadata serialized next to the CSV columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub mu: f64,
    pub radius: f64,
    pub mass: f64,
    pub residual: f64,
    pub law_label: String,
    pub nodes: usize,
}

/// Write `<stem>.csv` + `<stem>.json` for a star profile.
pub fn write_profile(stem: &Path, p: &StarProfile) -> Result<Vec<PathBuf>> {
    let mut csv = version_line("profile");
    csv.push_str("r,rho,m,V\n");
    for i in 0..p.r.len() {
        let _ = writeln!(csv, "{},{},{},{}", p.r[i], p.rho[i], p.m[i], p.v[i]);
    }
    let meta = ProfileMeta {
        mu: p.mu,
        radius: p.radius,
        mass: p.mass,
        residual: p.residual,
        law_label: p.law_label.clone(),
        nodes: p.r.len(),
    };
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    fs::write(&csv_path, csv)?;
    fs::write(&json_path, serde_json::to_string_pretty(&meta).unwrap())?;
    Ok(vec![csv_path, json_path])
}

/// Load a profile from `<stem>.csv` + `<stem>.json`.
pub fn read_profile(stem: &Path) -> Result<StarProfile> {
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    let meta: ProfileMeta = serde_json::from_str(&fs::read_to_string(&json_path)?)
        .map_err(|e| Error::Format {
            kind: "profile-json",
            path: json_path.display().to_string(),
            detail: e.to_string(),
        })?;
    let text = fs::read_to_string(&csv_path)?;
    let mut lines = text.lines();
    check_version(lines.next(), "profile", &csv_path)?;
    let _header = lines.next();
    let (mut r, mut rho, mut m, mut v) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line, 4, &csv_path, i + 3)?;
        r.push(row[0]);
        rho.push(row[1]);
        m.push(row[2]);
        v.push(row[3]);
    }
    Ok(StarProfile::from_arrays(
        meta.mu, r, rho, m, v, meta.radius, meta.mass, meta.residual, meta.law_label,
    ))
}

/// Perturbed-state columns; the reference profile travels separately.
pub fn write_state(path: &Path, r: &[f64], rho: &[f64], v: &[f64]) -> Result<()> {
    let mut csv = version_line("state");
    csv.push_str("r,rho,v\n");
    for i in 0..r.len() {
        let _ = writeln!(csv, "{},{},{}", r[i], rho[i], v[i]);
    }
    fs::write(path, csv)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    check_version(lines.next(), "state", path)?;
    let _header = lines.next();
    let (mut r, mut rho, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line, 3, path, i + 3)?;
        r.push(row[0]);
        rho.push(row[1]);
        v.push(row[2]);
    }
    Ok((r, rho, v))
}

/// Family curve CSV: one row per sample.
pub fn write_curve(path: &Path, curve: &FamilyCurve) -> Result<()> {
    let mut csv = version_line("family");
    csv.push_str("mu,M,R,dM_dmu,dR_dmu,dMR_dmu,n_u\n");
    for s in &curve.samples {
        let nu = s.n_unstable.map(|n| n.to_string()).unwrap_or_else(|| "-1".into());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            s.mu, s.mass, s.radius, s.dm_dmu, s.dr_dmu, s.dmr_dmu, nu
        );
    }
    fs::write(path, csv)?;
    Ok(())
}

pub fn read_curve(path: &Path) -> Result<FamilyCurve> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    check_version(lines.next(), "family", path)?;
    let _header = lines.next();
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line, 7, path, i + 3)?;
        samples.push(FamilySample {
            mu: row[0],
            mass: row[1],
            radius: row[2],
            dm_dmu: row[3],
            dr_dmu: row[4],
            dmr_dmu: row[5],
            n_unstable: if row[6] < 0.0 { None } else { Some(row[6] as u32) },
        });
    }
    Ok(FamilyCurve { samples, events: Vec::new(), flags: Vec::new() })
}

/// Event log and flags attached to a curve, as JSON.
pub fn write_curve_events(path: &Path, events: &[CurveEvent], flags: &[String]) -> Result<()> {
    #[derive(Serialize)]
    struct Log<'a> {
        events: &'a [CurveEvent],
        flags: &'a [String],
    }
    fs::write(path, serde_json::to_string_pretty(&Log { events, flags }).unwrap())?;
    Ok(())
}

/// Trajectory diagnostics CSV.
pub fn write_trajectory(path: &Path, t: &Trajectory) -> Result<()> {
    let mut csv = version_line("trajectory");
    csv.push_str("t,M,E,H,d,d1,d2,d3,d4,d5\n");
    for i in 0..t.times.len() {
        let d = &t.dist[i];
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            t.times[i], t.mass[i], t.energy[i], t.casimir[i], d.total, d.d1, d.d2, d.d3, d.d4, d.d5
        );
    }
    fs::write(path, csv)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value).unwrap())?;
    Ok(())
}

/// Distance breakdown JSON is just the serde form.
pub fn write_distance(path: &Path, d: &DistanceBreakdown) -> Result<()> {
    write_json(path, d)
}

/// Run manifest: inputs, outputs with content hashes, wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub subcommand: String,
    pub config_digest: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub outputs: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        let _ = write!(s, "{b:02x}");
    }
    s
}

impl Manifest {
    pub fn new(subcommand: &str, config_text: &str, seed: u64) -> Self {
        Manifest {
            version: FORMAT_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            config_digest: sha256_hex(config_text.as_bytes()),
            seed,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Hash a finished artifact and record it.
    pub fn record(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        self.outputs.push(ManifestEntry {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self).unwrap())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{build_enthalpy, PressureLaw, TabulationSpec};
    use crate::star::{solve_star, SolveOptions};

    #[test]
    fn profile_round_trip_is_bit_exact() {
        let ent = build_enthalpy(&PressureLaw::polytrope(1.0, 1.5).unwrap(), &TabulationSpec::default()).unwrap();
        let p = solve_star(&ent, 1.0, &SolveOptions { profile_nodes: 128, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("prof");
        write_profile(&stem, &p).unwrap();
        let bytes1 = fs::read(stem.with_extension("csv")).unwrap();
        let q = read_profile(&stem).unwrap();
        assert_eq!(p.r, q.r);
        assert_eq!(p.rho, q.rho);
        assert_eq!(p.m, q.m);
        assert_eq!(p.v, q.v);
        assert_eq!(p.radius, q.radius);
        write_profile(&stem, &q).unwrap();
        let bytes2 = fs::read(stem.with_extension("csv")).unwrap();
        assert_eq!(bytes1, bytes2, "save/load/save must be bit-exact");
    }

    #[test]
    fn version_line_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "r,rho,v\n0,1,0\n").unwrap();
        assert!(read_state(&path).is_err());
    }

    #[test]
    fn table_reader_skips_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        fs::write(&path, "# a comment\nrho,P\n0.5,0.25\n1.0,1.0\n2.0,4.0\n4.0,16.0\n").unwrap();
        let (rho, p) = read_table_csv(&path).unwrap();
        assert_eq!(rho.len(), 4);
        assert_eq!(p[2], 4.0);
    }
}

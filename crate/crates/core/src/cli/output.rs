//! CSV, JSON and SVG emission.
//!
//! Every table starts with `#` comment lines holding the tool version, the
//! resolved parameters as one JSON object, and the seed. Numbers are written
//! as shortest round-trip decimals, so reading a file back is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envelope::EnvelopeMethod;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scenarios::{basic_observables, BeatSignal, Observables};
use crate::trajectory::Trajectory;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Signal and estimator used for the observables of `simulate`.
pub const BEAT_SIGNAL: BeatSignal = BeatSignal::Cavity;
pub const BEAT_METHOD: EnvelopeMethod = EnvelopeMethod::ANALYTIC;

/// Provenance block embedded in each output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: String,
    pub params: SystemParams,
    /// Everything else that shaped the run (scenario, span, engine ...).
    pub run: serde_json::Value,
    pub seed: u64,
}

impl Header {
    pub fn new(params: SystemParams, run: serde_json::Value, seed: u64) -> Self {
        Self {
            version: VERSION.to_string(),
            params,
            run,
            seed,
        }
    }

    fn comment_lines(&self) -> String {
        let params = serde_json::json!({ "params": self.params, "run": self.run });
        format!("# vsc {}\n# params {}\n# seed {}\n", self.version, params, self.seed)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Comma-separated table with a comment header.
pub fn csv_table(header: &Header, columns: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.comment_lines();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `t, X, q, x_1..x_k` with 1-based molecule labels.
pub fn trajectory_csv(header: &Header, traj: &Trajectory) -> String {
    let mut cols = vec!["t".to_string(), "X".into(), "q".into()];
    cols.extend(traj.locals.keys().map(|i| format!("x_{}", i + 1)));
    let rows = (0..traj.len()).map(|k| {
        let mut r = vec![traj.times[k], traj.collective_x[k], traj.cavity_q[k]];
        r.extend(traj.locals.values().map(|xs| xs[k]));
        r
    });
    csv_table(header, &cols, rows)
}

/// A parsed table: header, column names and rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut version = None;
    let mut params_json = None;
    let mut seed = None;
    let mut lines = text.lines().enumerate();
    let mut columns = None;
    for (_, line) in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("# vsc ") {
            version = Some(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("# params ") {
            params_json = Some(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("# seed ") {
            seed = rest.trim().parse::<u64>().ok();
        } else if !line.starts_with('#') {
            columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
            break;
        }
    }
    let missing = |what: &str| Error::InvalidInput(format!("table header lacks {what}"));
    let columns = columns.ok_or_else(|| missing("a column row"))?;
    let block: serde_json::Value = serde_json::from_str(&params_json.ok_or_else(|| missing("# params"))?)
        .map_err(|e| Error::InvalidInput(format!("bad params header: {e}")))?;
    let params: SystemParams = serde_json::from_value(block["params"].clone())
        .map_err(|e| Error::InvalidInput(format!("bad params header: {e}")))?;
    let header = Header {
        version: version.ok_or_else(|| missing("# vsc"))?,
        params,
        run: block["run"].clone(),
        seed: seed.ok_or_else(|| missing("# seed"))?,
    };
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("line {}: {e}", k + 1)))?;
        if row.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "line {}: {} cells for {} columns",
                k + 1,
                row.len(),
                columns.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, columns, rows })
}

/// Rebuilds a trajectory (positions only) from a `trajectory.csv` table.
pub fn trajectory_from_table(table: &Table) -> Result<Trajectory> {
    let need = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::InvalidInput(format!("trajectory table lacks column `{name}`")))
    };
    let mut locals = BTreeMap::new();
    for name in &table.columns {
        if let Some(i) = name.strip_prefix("x_").and_then(|s| s.parse::<usize>().ok()) {
            if i == 0 {
                return Err(Error::InvalidInput("molecule labels start at x_1".into()));
            }
            locals.insert(i - 1, need(name)?);
        }
    }
    let traj = Trajectory {
        times: need("t")?,
        collective_x: need("X")?,
        cavity_q: need("q")?,
        cavity_p: None,
        locals,
        local_velocities: BTreeMap::new(),
        relatives: None,
    };
    traj.check()?;
    Ok(traj)
}

/// Scalar observables as stored in `observables.json`.
pub fn scalar_observables(traj: &Trajectory, params: &SystemParams) -> Result<Observables> {
    basic_observables(traj, params, BEAT_SIGNAL, BEAT_METHOD)
}

/// Reads a trajectory CSV and recomputes its scalar observables.
pub fn observables_from_csv(path: &Path) -> Result<Observables> {
    let table = parse_table(&read(path)?)?;
    let traj = trajectory_from_table(&table)?;
    scalar_observables(&traj, &table.header.params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservablesFile {
    pub version: String,
    pub params: SystemParams,
    pub run: serde_json::Value,
    pub seed: u64,
    pub observables: Observables,
}

pub fn observables_json(header: &Header, obs: &Observables) -> String {
    let file = ObservablesFile {
        version: header.version.clone(),
        params: header.params,
        run: header.run.clone(),
        seed: header.seed,
        observables: obs.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("observables serialize");
    s.push('\n');
    s
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to `dir/name`, creating `dir` when needed.
pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

/// Line plot of one or more series against a shared abscissa.
pub fn svg_plot(title: &str, x_label: &str, xs: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let curves: Vec<(String, Vec<f64>, Vec<f64>)> =
        series.iter().map(|(name, ys)| (name.clone(), xs.to_vec(), ys.clone())).collect();
    svg_curves(title, x_label, &curves)
}

/// Line plot of `(name, xs, ys)` curves sharing one set of axes.
pub fn svg_curves(title: &str, x_label: &str, curves: &[(String, Vec<f64>, Vec<f64>)]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

    let finite = |v: &&f64| v.is_finite();
    let (x_lo, x_hi) = bounds(curves.iter().flat_map(|(_, xs, _)| xs.iter()).filter(finite));
    let (y_lo, y_hi) = bounds(curves.iter().flat_map(|(_, _, ys)| ys.iter()).filter(finite));
    let sx = |x: f64| PAD + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y_lo) / (y_hi - y_lo) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="middle">{}</text>"#, H - PAD + 16.0, short(x_lo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W - PAD, H - PAD + 16.0, short(x_hi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, short(y_lo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 10.0, short(y_hi));
    for (k, (name, xs, ys)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            PAD + 8.0,
            PAD + 16.0 * (k + 1) as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn table_round_trip() {
        let p = SystemParams::natural(1.0, 0.1, 4).unwrap();
        let h = Header::new(p, serde_json::json!({"span": 2.0}), 7);
        let cols = vec!["a".to_string(), "b".into()];
        let text = csv_table(&h, &cols, vec![vec![0.1, 0.2], vec![1e-30, -3.0]].into_iter());
        let t = parse_table(&text).unwrap();
        assert_eq!(t.header, h);
        assert_eq!(t.columns, cols);
        assert_eq!(t.rows[1], vec![1e-30, -3.0]);
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_plot("a < b", "t", &[0.0, 1.0, 2.0], &[("y".into(), vec![1.0, f64::NAN, 3.0])]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }
}

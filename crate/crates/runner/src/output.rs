//! On-disk formats: key/value text, series CSV, binary snapshots, SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use emhd_core::diagnostics::{EnergyRecord, GronwallFit, TheoremParams};
use emhd_core::emhd::EmhdState;
use emhd_core::spectral::{GridSpec, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunnerError};

pub const SERIES_HEADER: &str = "t,E_s,D_s,energy,helicity,mean_a,mean_b";

/// Eight-byte tag opening every snapshot file.
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"EMHD25F1";

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| RunnerError::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| RunnerError::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct SeriesRow {
    #[serde(rename = "t")]
    time: f64,
    #[serde(rename = "E_s")]
    e_s: f64,
    #[serde(rename = "D_s")]
    d_s: f64,
    energy: f64,
    helicity: f64,
    mean_a: f64,
    mean_b: f64,
}

fn csv_error(e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Config(format!("CSV: {e}"))
}

/// Writes serde rows with a header; floats use the shortest exact form.
pub fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

pub fn series_csv(records: &[EnergyRecord]) -> Result<String> {
    to_csv(records.iter().map(|r| SeriesRow {
        time: r.time,
        e_s: r.e_s,
        d_s: r.d_s,
        energy: r.energy,
        helicity: r.helicity,
        mean_a: r.mean_a,
        mean_b: r.mean_b,
    }))
}

pub fn parse_series_csv(text: &str) -> Result<Vec<EnergyRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<&str> = SERIES_HEADER.split(',').collect();
    if r.headers().map_err(csv_error)?.iter().ne(header) {
        return Err(RunnerError::Config("series CSV header mismatch".into()));
    }
    r.deserialize::<SeriesRow>()
        .map(|row| {
            let row = row.map_err(csv_error)?;
            Ok(EnergyRecord {
                time: row.time,
                e_s: row.e_s,
                d_s: row.d_s,
                energy: row.energy,
                helicity: row.helicity,
                mean_a: row.mean_a,
                mean_b: row.mean_b,
            })
        })
        .collect()
}

pub fn read_series_csv(path: &Path) -> Result<Vec<EnergyRecord>> {
    let bytes = read_file(path)?;
    parse_series_csv(&String::from_utf8_lossy(&bytes))
}

/// One `key=value` per line, keys sorted.
pub fn key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Lines starting with `#` and blank lines are skipped.
pub fn parse_key_values(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    Ok(parse_key_values(&String::from_utf8_lossy(&read_file(
        path,
    )?)))
}

/// Magic, `n` as u32 LE, then `a` and `b` as full coefficient arrays in
/// ky-major FFT order, each entry two f64 LE (re, im).
pub fn encode_snapshot(state: &EmhdState) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(12 + 32 * g.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    for field in [&state.a, &state.b] {
        for c in field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`encode_snapshot`]; the time is not stored and comes back as 0.
pub fn decode_snapshot(bytes: &[u8]) -> Result<EmhdState> {
    let bad = |msg: &str| RunnerError::Config(format!("snapshot: {msg}"));
    if bytes.len() < 12 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("missing magic"));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let grid = GridSpec::new(n)?;
    let len = grid.len();
    if bytes.len() != 12 + 32 * len {
        return Err(bad("length does not match grid"));
    }
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    let field = |start: usize| {
        let coeffs = (0..len)
            .map(|i| {
                let off = start + 16 * i;
                Complex64::new(f64_at(off), f64_at(off + 8))
            })
            .collect();
        SpectralField::from_raw(grid, coeffs)
    };
    let a = field(12)?;
    let b = field(12 + 16 * len)?;
    Ok(EmhdState::new(a, b, 0.0)?)
}

pub fn write_snapshot(path: &Path, state: &EmhdState) -> Result<()> {
    write_file(path, encode_snapshot(state))
}

pub fn read_snapshot(path: &Path) -> Result<EmhdState> {
    decode_snapshot(&read_file(path)?)
}

pub fn snapshot_file_name(time: f64) -> String {
    format!("snapshot_t{time:.6}.bin")
}

/// Key/value report with the convention stated in its header.
pub fn gronwall_report(tp: &TheoremParams, fit: &GronwallFit) -> String {
    let mut map = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        map.insert(k.to_string(), v);
    };
    put("alpha", tp.alpha.to_string());
    put("beta", tp.beta.to_string());
    put("s", tp.s.to_string());
    put("theta", tp.theta.to_string());
    put("epsilon", tp.epsilon.to_string());
    put("gamma", tp.gamma.to_string());
    put("growth_bound", tp.growth_bound().to_string());
    put("c_hat", fit.c_hat.to_string());
    put("t0", fit.t0.to_string());
    put("bound_satisfied", fit.bound_satisfied.to_string());
    put("margin", fit.margin.to_string());
    put("max_growth", fit.max_growth.to_string());
    put("checked_until", fit.checked_until.to_string());
    put("regularized", fit.regularized.to_string());
    let mut out = String::from(
        "# C_hat = sup max(0, dE_s/dt + 2 D_s) / E_s^(1+gamma) over interior samples\n\
         # T0 = 1 / (2 gamma C_hat (1 + E_s(0))^gamma)\n\
         # bound: E_s(t) <= 1.05 * growth_bound * E_s(0) for t <= min(T0, t_last)\n",
    );
    out.push_str(&key_values(&map));
    out
}

/// Line chart of `E_s(t)` with the growth bound drawn as a dashed line.
pub fn energy_svg(records: &[EnergyRecord], bound: Option<f64>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        svg.push_str("</svg>\n");
        return svg;
    };
    let t_span = (last.time - first.time).max(f64::MIN_POSITIVE);
    let mut y_max = records.iter().map(|r| r.e_s).fold(0.0, f64::max);
    if let Some(b) = bound {
        y_max = y_max.max(b);
    }
    let y_max = if y_max > 0.0 { 1.05 * y_max } else { 1.0 };
    let x = |t: f64| PAD + (W - 2.0 * PAD) * (t - first.time) / t_span;
    let y = |e: f64| H - PAD - (H - 2.0 * PAD) * e / y_max;
    let _ = writeln!(
        svg,
        "<path d=\"M{PAD} {PAD}V{} H{}\" stroke=\"black\" fill=\"none\"/>",
        H - PAD,
        W - PAD
    );
    let points: Vec<String> = records
        .iter()
        .map(|r| format!("{:.2},{:.2}", x(r.time), y(r.e_s)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" stroke=\"steelblue\" stroke-width=\"1.5\" fill=\"none\"/>",
        points.join(" ")
    );
    if let Some(b) = bound {
        let _ = writeln!(
            svg,
            "<line x1=\"{PAD}\" y1=\"{0:.2}\" x2=\"{1}\" y2=\"{0:.2}\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>",
            y(b),
            W - PAD
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{PAD}\" y=\"{}\" font-size=\"12\">t from {} to {}</text>\n\
         <text x=\"4\" y=\"{}\" font-size=\"12\">E_s max {:.4e}</text>",
        H - 16.0,
        first.time,
        last.time,
        PAD - 12.0,
        y_max / 1.05
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use emhd_core::spectral::WaveVector;

    fn record(t: f64) -> EnergyRecord {
        EnergyRecord {
            time: t,
            e_s: 0.1 + t / 3.0,
            d_s: 1.0 / 7.0,
            energy: 2.0,
            helicity: -1e-300,
            mean_a: 0.0,
            mean_b: 3.0,
        }
    }

    #[test]
    fn series_round_trip_is_exact() {
        let recs: Vec<_> = [0.0, 0.1, 0.30000000000000004]
            .into_iter()
            .map(record)
            .collect();
        let text = series_csv(&recs).unwrap();
        assert!(text.starts_with("t,E_s,D_s,energy,helicity,mean_a,mean_b\n"));
        assert_eq!(parse_series_csv(&text).unwrap(), recs);
        assert!(parse_series_csv("t,x\n").is_err());
    }

    #[test]
    fn key_values_round_trip() {
        let mut m = BTreeMap::new();
        m.insert("seed".to_string(), "42".to_string());
        m.insert("termination".to_string(), "completed".to_string());
        assert_eq!(parse_key_values(&format!("# note\n{}", key_values(&m))), m);
    }

    #[test]
    fn snapshot_layout() {
        let g = GridSpec::new(8).unwrap();
        let a = SpectralField::cosine(g, WaveVector::new(1, 0), 2.0).unwrap();
        let b = SpectralField::sine(g, WaveVector::new(0, 1), 1.0).unwrap();
        let st = EmhdState::new(a, b, 0.0).unwrap();
        let bytes = encode_snapshot(&st);
        assert_eq!(&bytes[..8], b"EMHD25F1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        assert_eq!(bytes.len(), 12 + 2 * 64 * 16);
        // a(k=(1,0)) = 1 sits at index 1.
        assert_eq!(
            f64::from_le_bytes(bytes[12 + 16..12 + 24].try_into().unwrap()),
            1.0
        );
        assert_eq!(decode_snapshot(&bytes).unwrap(), st);
        assert!(decode_snapshot(&bytes[..100]).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let recs: Vec<_> = (0..5).map(|i| record(i as f64 * 0.1)).collect();
        let svg = energy_svg(&recs, Some(0.5));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline") && svg.contains("stroke-dasharray"));
        assert!(energy_svg(&[], None).contains("</svg>"));
    }
}

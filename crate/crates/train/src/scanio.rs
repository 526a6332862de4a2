//! Single-scan CSV files: an optional `#` header carrying the schema and
//! sensor geometry, then one comma-separated row of ranges.

use std::path::Path;

use lognav_core::{LidarConfig, Scan};

use crate::error::{io_err, Error, Result};

pub const SCAN_SCHEMA: u32 = 1;

pub fn scan_to_csv(scan: &Scan) -> String {
    let row: Vec<String> = scan.ranges.iter().map(|r| format!("{r}")).collect();
    format!(
        "# schema={SCAN_SCHEMA} max_range={} fov={}\n{}\n",
        scan.max_range,
        scan.fov,
        row.join(",")
    )
}

/// Parses a scan; geometry missing from the header falls back to `default`.
pub fn scan_from_csv(text: &str, default: &LidarConfig) -> Result<Scan> {
    let (mut max_range, mut fov) = (default.max_range, default.fov);
    let mut row = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(header) = line.strip_prefix('#') {
            for kv in header.split_whitespace() {
                let Some((k, v)) = kv.split_once('=') else { continue };
                let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("bad header value '{kv}'")));
                match k {
                    "schema" if v != SCAN_SCHEMA.to_string() => {
                        return Err(Error::Config(format!("unsupported scan schema {v}")));
                    }
                    "max_range" => max_range = num(v)?,
                    "fov" => fov = num(v)?,
                    _ => {}
                }
            }
        } else if row.is_none() {
            row = Some(line);
        } else {
            return Err(Error::Config("scan file holds more than one row".into()));
        }
    }
    let row = row.ok_or_else(|| Error::Config("scan file has no data row".into()))?;
    let ranges = row
        .split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>().map_err(|_| Error::Config(format!("bad range value '{c}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if ranges.len() != default.n_beams {
        return Err(Error::Config(format!("expected {} ranges, found {}", default.n_beams, ranges.len())));
    }
    if let Some(r) = ranges.iter().find(|r| r.is_nan()) {
        return Err(Error::Config(format!("bad range value '{r}'")));
    }
    Ok(Scan::from_ranges(ranges, max_range, fov))
}

pub fn read_scan(path: &Path, default: &LidarConfig) -> Result<Scan> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    scan_from_csv(&text, default)
}

pub fn write_scan(scan: &Scan, path: &Path) -> Result<()> {
    std::fs::write(path, scan_to_csv(scan)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = LidarConfig::default();
        let ranges: Vec<f64> = (0..cfg.n_beams).map(|i| 0.5 + (i % 11) as f64 * 0.37).collect();
        let scan = Scan::from_ranges(ranges, cfg.max_range, cfg.fov);
        let back = scan_from_csv(&scan_to_csv(&scan), &cfg).unwrap();
        assert_eq!(back, scan);
    }

    #[test]
    fn rejects_wrong_length_and_garbage() {
        let cfg = LidarConfig::default();
        assert!(scan_from_csv("1,2,3", &cfg).is_err());
        let mut row = vec!["1.0"; cfg.n_beams];
        row[3] = "x";
        assert!(scan_from_csv(&row.join(","), &cfg).is_err());
        assert!(scan_from_csv("# schema=9\n", &cfg).is_err());
    }
}

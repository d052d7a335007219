use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::imaging::{ppm, RgbImage};

pub const TELEMETRY_HEADER: &str = "t,leader_x,leader_y,leader_psi,follower_x,follower_y,follower_psi,range_true,range_est,bearing_est,cmd_speed,cmd_heading,track_cx,track_cy,track_area,status";

/// One control step. Missing estimates are NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub leader_x: f64,
    pub leader_y: f64,
    pub leader_psi: f64,
    pub follower_x: f64,
    pub follower_y: f64,
    pub follower_psi: f64,
    pub range_true: f64,
    pub range_est: f64,
    pub bearing_est: f64,
    pub cmd_speed: f64,
    pub cmd_heading: f64,
    pub track_cx: f64,
    pub track_cy: f64,
    pub track_area: f64,
    pub status: u8,
}

impl TelemetryRow {
    fn floats(&self) -> [f64; 15] {
        [
            self.t,
            self.leader_x,
            self.leader_y,
            self.leader_psi,
            self.follower_x,
            self.follower_y,
            self.follower_psi,
            self.range_true,
            self.range_est,
            self.bearing_est,
            self.cmd_speed,
            self.cmd_heading,
            self.track_cx,
            self.track_cy,
            self.track_area,
        ]
    }

    pub fn to_csv_line(&self) -> String {
        let mut s = String::with_capacity(200);
        for v in self.floats() {
            // `Display` prints the shortest representation that reads back
            // to the same bits.
            write!(s, "{v},").unwrap();
        }
        write!(s, "{}", self.status).unwrap();
        s
    }

    pub fn from_csv_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 {
            return Err(format!("expected 16 fields, found {}", fields.len()));
        }
        let mut f = [0.0; 15];
        for (o, s) in f.iter_mut().zip(&fields) {
            *o = s.parse().map_err(|_| format!("bad number `{s}`"))?;
        }
        let status = fields[15].parse().map_err(|_| format!("bad status `{}`", fields[15]))?;
        Ok(Self {
            t: f[0],
            leader_x: f[1],
            leader_y: f[2],
            leader_psi: f[3],
            follower_x: f[4],
            follower_y: f[5],
            follower_psi: f[6],
            range_true: f[7],
            range_est: f[8],
            bearing_est: f[9],
            cmd_speed: f[10],
            cmd_heading: f[11],
            track_cx: f[12],
            track_cy: f[13],
            track_area: f[14],
            status,
        })
    }
}

pub fn telemetry_csv(rows: &[TelemetryRow]) -> String {
    let mut out = String::with_capacity(TELEMETRY_HEADER.len() + 1 + rows.len() * 200);
    out.push_str(TELEMETRY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn write_telemetry(rows: &[TelemetryRow], path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{TELEMETRY_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_line())?;
    }
    w.flush()
}

pub fn parse_telemetry(text: &str) -> Result<Vec<TelemetryRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TELEMETRY_HEADER => {}
        _ => return Err("missing telemetry header".into()),
    }
    lines
        .enumerate()
        .map(|(i, l)| TelemetryRow::from_csv_line(l).map_err(|e| format!("row {}: {e}", i + 1)))
        .collect()
}

pub fn read_telemetry(path: &Path) -> io::Result<Vec<TelemetryRow>> {
    let text = fs::read_to_string(path)?;
    parse_telemetry(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:06}.ppm"))
}

/// Writes `(index, frame)` pairs as `frame_000001.ppm` and so on.
pub fn dump_frames<'a>(frames: impl IntoIterator<Item = (usize, &'a RgbImage)>, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (i, img) in frames {
        ppm::write_ppm(frame_path(dir, i), img).map_err(|e| match e {
            crate::imaging::ImagingError::Io(io) => io,
            other => io::Error::other(other.to_string()),
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TelemetryRow {
        TelemetryRow {
            t,
            leader_x: 1.0 / 3.0,
            leader_y: -0.0,
            leader_psi: std::f64::consts::PI,
            follower_x: 1e-300,
            follower_y: 123456.789,
            follower_psi: -2.5,
            range_true: 4.0,
            range_est: f64::NAN,
            bearing_est: 0.1 + 0.2,
            cmd_speed: 0.5,
            cmd_heading: -1.0,
            track_cx: 160.25,
            track_cy: 120.0,
            track_area: 65535.0,
            status: 2,
        }
    }

    #[test]
    fn header_only_and_one_row() {
        assert_eq!(telemetry_csv(&[]), format!("{TELEMETRY_HEADER}\n"));
        let text = telemetry_csv(&[row(0.0)]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 16);
        assert_eq!(TELEMETRY_HEADER.split(',').count(), 16);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rows: Vec<_> = (0..5).map(|i| row(i as f64 * 0.01)).collect();
        let back = parse_telemetry(&telemetry_csv(&rows)).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in a.floats().iter().zip(b.floats()) {
                if x.is_finite() {
                    assert_eq!(x.to_bits(), y.to_bits());
                } else {
                    assert!(y.is_nan());
                }
            }
            assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn file_round_trip_and_frames() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_telemetry(&[row(1.0)], &p).unwrap();
        assert_eq!(read_telemetry(&p).unwrap()[0].track_cx, 160.25);
        let img = crate::imaging::Raster::filled(4, 3, [1u8, 2, 3]);
        dump_frames([(1, &img), (12, &img)], &dir.path().join("frames")).unwrap();
        assert!(dir.path().join("frames/frame_000001.ppm").exists());
        assert!(dir.path().join("frames/frame_000012.ppm").exists());
        assert!(write_telemetry(&[], &dir.path().join("missing/t.csv")).is_err());
    }
}

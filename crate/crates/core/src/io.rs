//! CSV and 16-bit PCM WAV ingestion.
//!
//! CSV files hold one sample per row and one channel per column. A first row
//! that does not parse as numbers is treated as a header and skipped. Lines
//! starting with `#` are comments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::TimeSeriesSet;

const PCM_SCALE: f64 = 32768.0;

pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeriesSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<TimeSeriesSet> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first_content = true;
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, usize> = fields
            .iter()
            .enumerate()
            .map(|(col, f)| f.parse::<f64>().map_err(|_| col))
            .collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::Shape(format!(
                            "row {} has {} fields, expected {}",
                            line_no + 1,
                            row.len(),
                            first.len()
                        )));
                    }
                }
                if let Some(col) = row.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        row: line_no + 1,
                        column: col + 1,
                        message: "non-finite value".into(),
                    });
                }
                rows.push(row);
            }
            Err(_) if first_content => {}
            Err(col) => {
                return Err(Error::Parse {
                    row: line_no + 1,
                    column: col + 1,
                    message: format!("cannot parse {:?} as a number", fields[col]),
                })
            }
        }
        first_content = false;
    }
    if rows.is_empty() {
        return Err(Error::TooShort { needed: 3, got: 0 });
    }
    TimeSeriesSet::from_rows(&rows)
}

/// Formats a set as CSV with a `ch0,ch1,...` header. Values use Rust's
/// shortest round-trip float formatting, so reloading is exact.
pub fn format_csv(x: &TimeSeriesSet, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let header: Vec<String> = (0..x.n_channels()).map(|i| format!("ch{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for t in 0..x.n_samples() {
        for i in 0..x.n_channels() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", x.channel(i)[t]);
        }
        out.push('\n');
    }
    out
}

pub fn save_csv(path: impl AsRef<Path>, x: &TimeSeriesSet) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_csv(x, &[])).map_err(|e| Error::io(path, e))
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<TimeSeriesSet> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit samples; only 16-bit PCM is supported",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let n = spec.channels as usize;
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedFormat(format!(
            "{n} channels; only mono and stereo are supported"
        )));
    }
    let mut channels = vec![Vec::new(); n];
    for (i, s) in reader.into_samples::<i16>().enumerate() {
        let s = s.map_err(|e| wav_error(path, e))?;
        channels[i % n].push(s as f64 / PCM_SCALE);
    }
    TimeSeriesSet::new(channels)
}

/// Writes 16-bit PCM at the given sample rate. Values are scaled by 32768
/// and clipped to the i16 range.
pub fn save_wav(path: impl AsRef<Path>, x: &TimeSeriesSet, sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    if x.n_channels() > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels; WAV output supports mono and stereo",
            x.n_channels()
        )));
    }
    let spec = hound::WavSpec {
        channels: x.n_channels() as u16,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for t in 0..x.n_samples() {
        for c in x.channels() {
            let q = (c[t] * PCM_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            writer.write_sample(q).map_err(|e| wav_error(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedFormat("compressed or unknown WAV encoding".into()),
        other => Error::UnsupportedFormat(other.to_string()),
    }
}

/// Loads `.wav` files as WAV and everything else as CSV.
pub fn load_signal(path: impl AsRef<Path>) -> Result<TimeSeriesSet> {
    let path = path.as_ref();
    if is_wav(path) {
        load_wav(path)
    } else {
        load_csv(path)
    }
}

pub fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_table() {
        let x = parse_csv("0,0\n0,0\n0,0\n0,0\n").unwrap();
        assert_eq!(x.n_channels(), 2);
        assert_eq!(x.n_samples(), 4);
        assert!(x.channels().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn ragged_rows() {
        assert!(matches!(parse_csv("1,2\n3"), Err(Error::Shape(_))));
    }

    #[test]
    fn header_skipped_and_bad_field_located() {
        let x = parse_csv("left,right\n1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(x.channel(1), &[2.0, 4.0, 6.0]);
        match parse_csv("1,2\n3,x\n5,6\n") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_short_table() {
        assert!(matches!(parse_csv("1\n2\n"), Err(Error::TooShort { .. })));
    }

    #[test]
    fn wav_endpoints() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ends.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..4 {
            w.write_sample(i16::MAX).unwrap();
            w.write_sample(i16::MIN).unwrap();
        }
        w.finalize().unwrap();
        let x = load_wav(&path).unwrap();
        assert!(x.channel(0).iter().all(|v| (v - 32767.0 / 32768.0).abs() < 1e-15));
        assert!(x.channel(1).iter().all(|v| *v == -1.0));
    }

    #[test]
    fn mono_zero_wav() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.wav");
        let x = TimeSeriesSet::new(vec![vec![0.0; 5]]).unwrap();
        save_wav(&path, &x, 8000).unwrap();
        assert_eq!(load_wav(&path).unwrap(), x);
    }

    #[test]
    fn rejects_24_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 24,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..4 {
            w.write_sample(0i32).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(load_wav(&path), Err(Error::UnsupportedFormat(_))));
    }
}

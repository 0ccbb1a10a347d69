//! File formats: `csv_v1` event files, JSON metadata sidecars and PGM images.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::event::{Event, EventStream, Polarity, SweepConfig};

pub const EVENTS_HEADER: &str = "# evaf-events v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventFormat {
    #[default]
    CsvV1,
}

/// JSON sidecar describing an event file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub width: u16,
    pub height: u16,
    pub t_start: u64,
    pub t_end: u64,
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_position: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_time: Option<u64>,
}

impl Metadata {
    pub fn sweep(&self) -> Result<SweepConfig> {
        SweepConfig::new(self.t_start, self.t_end, self.p_min, self.p_max)
    }

    pub fn for_stream(stream: &EventStream) -> Self {
        let sweep = stream.sweep();
        Metadata {
            width: stream.width(),
            height: stream.height(),
            t_start: sweep.t_start,
            t_end: sweep.t_end,
            p_min: sweep.p_min,
            p_max: sweep.p_max,
            ground_truth_position: None,
            ground_truth_time: None,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| EvafError::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| EvafError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| EvafError::io(path, e))
    }
}

/// Sidecar path for an event file: same stem, `.json` extension.
pub fn sidecar_path(events_path: &Path) -> PathBuf {
    events_path.with_extension("json")
}

/// Parses an event file against the geometry and sweep in `meta`.
pub fn parse_events<R: BufRead>(source: R, format: EventFormat, meta: &Metadata) -> Result<EventStream> {
    match format {
        EventFormat::CsvV1 => parse_csv_v1(source, meta),
    }
}

fn parse_csv_v1<R: BufRead>(source: R, meta: &Metadata) -> Result<EventStream> {
    let sweep = meta.sweep()?;
    let mut events = Vec::new();
    let mut previous: Option<u64> = None;
    let mut saw_header = false;
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EvafError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line_no == 1 {
            if line.trim() != EVENTS_HEADER {
                return Err(EvafError::Parse {
                    line: 1,
                    message: format!("expected header `{EVENTS_HEADER}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let event = parse_line(trimmed, line_no, meta)?;
        if let Some(prev) = previous {
            if event.t < prev {
                return Err(EvafError::TimestampRegression {
                    line: line_no,
                    t: event.t,
                    previous: prev,
                });
            }
        }
        if event.t < sweep.t_start || event.t > sweep.t_end {
            return Err(EvafError::Parse {
                line: line_no,
                message: format!(
                    "timestamp {} outside sweep range [{}, {}]",
                    event.t, sweep.t_start, sweep.t_end
                ),
            });
        }
        previous = Some(event.t);
        events.push(event);
    }
    if !saw_header {
        return Err(EvafError::Parse {
            line: 1,
            message: format!("missing header `{EVENTS_HEADER}`"),
        });
    }
    EventStream::new(events, meta.width, meta.height, sweep)
}

fn parse_line(line: &str, line_no: usize, meta: &Metadata) -> Result<Event> {
    let err = |message: String| EvafError::Parse { line: line_no, message };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(err(format!("expected 4 fields `t,x,y,p`, found {}", fields.len())));
    }
    let t: u64 = fields[0]
        .parse()
        .map_err(|_| err(format!("invalid timestamp `{}`", fields[0])))?;
    let x: u32 = fields[1]
        .parse()
        .map_err(|_| err(format!("invalid x `{}`", fields[1])))?;
    let y: u32 = fields[2]
        .parse()
        .map_err(|_| err(format!("invalid y `{}`", fields[2])))?;
    let p: i64 = fields[3]
        .parse()
        .map_err(|_| err(format!("invalid polarity `{}`", fields[3])))?;
    let p = Polarity::from_i64(p).ok_or_else(|| err("polarity must be ±1".to_string()))?;
    if x >= meta.width as u32 || y >= meta.height as u32 {
        return Err(err(format!(
            "pixel ({x}, {y}) outside {}x{} sensor",
            meta.width, meta.height
        )));
    }
    Ok(Event::new(t, x as u16, y as u16, p))
}

pub fn write_events<W: Write>(mut out: W, stream: &EventStream) -> std::io::Result<()> {
    writeln!(out, "{EVENTS_HEADER}")?;
    for e in stream.events() {
        writeln!(out, "{},{},{},{}", e.t, e.x, e.y, e.p.as_i8())?;
    }
    out.flush()
}

/// Reads an event file; the sidecar defaults to [`sidecar_path`].
pub fn read_event_file(path: &Path, sidecar: Option<&Path>) -> Result<(EventStream, Metadata)> {
    let meta_path = sidecar.map(Path::to_path_buf).unwrap_or_else(|| sidecar_path(path));
    let meta = Metadata::read(&meta_path)?;
    let file = File::open(path).map_err(|e| EvafError::io(path, e))?;
    let stream = parse_events(BufReader::new(file), EventFormat::CsvV1, &meta)?;
    Ok((stream, meta))
}

/// Writes `events` next to a sidecar built from `meta`.
pub fn write_event_file(path: &Path, stream: &EventStream, meta: &Metadata) -> Result<()> {
    let file = File::create(path).map_err(|e| EvafError::io(path, e))?;
    write_events(BufWriter::new(file), stream).map_err(|e| EvafError::io(path, e))?;
    meta.write(&sidecar_path(path))
}

/// Writes a 16-bit binary PGM, linearly rescaling `[min, max]` to `[0, 65535]`.
pub fn write_pgm16<W: Write>(mut out: W, width: usize, height: usize, values: &[f64]) -> std::io::Result<()> {
    assert_eq!(values.len(), width * height);
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let mut bytes = Vec::with_capacity(values.len() * 2);
    for &v in values {
        let q = if span > 0.0 {
            ((v - lo) / span * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    out.write_all(&bytes)?;
    out.flush()
}

/// Grayscale image loaded from a PGM file, values normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Reads a binary (`P5`, 8- or 16-bit) or ASCII (`P2`) PGM.
pub fn read_pgm(path: &Path) -> Result<PgmImage> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| EvafError::io(path, e))?;
    decode_pgm(&bytes).map_err(|message| EvafError::Parse { line: 0, message })
}

fn decode_pgm(bytes: &[u8]) -> std::result::Result<PgmImage, String> {
    let mut pos = 0;
    let mut header = Vec::new();
    while header.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let magic = header[0].as_str();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| format!("bad PGM header field `{s}`"));
    let width = parse(&header[1])?;
    let height = parse(&header[2])?;
    let maxval = parse(&header[3])?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported PGM maxval {maxval}"));
    }
    let n = width * height;
    let scale = 1.0 / maxval as f64;
    let data = match magic {
        "P5" => {
            pos += 1;
            let body = &bytes[pos.min(bytes.len())..];
            if maxval < 256 {
                if body.len() < n {
                    return Err("truncated PGM data".into());
                }
                body[..n].iter().map(|&b| b as f64 * scale).collect()
            } else {
                if body.len() < 2 * n {
                    return Err("truncated PGM data".into());
                }
                body.chunks_exact(2)
                    .take(n)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
                    .collect()
            }
        }
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let values: std::result::Result<Vec<f64>, String> = text
                .split_ascii_whitespace()
                .take(n)
                .map(|s| parse(s).map(|v| v as f64 * scale))
                .collect();
            let values = values?;
            if values.len() < n {
                return Err("truncated PGM data".into());
            }
            values
        }
        other => return Err(format!("unsupported image type `{other}`")),
    };
    Ok(PgmImage { width, height, data })
}

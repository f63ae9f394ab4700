//! Event records, the EVT64/CSV containers and stream mixing.
//!
//! Polarity doubles as the ground-truth label: `0`/`1` are genuine sensor
//! events, `2`/`3` are injected noise. Filters never look at the label.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Magic prefix of an EVT64 file.
pub const EVT64_MAGIC: &[u8; 4] = b"DIF1";
/// Header size in bytes: magic, width, height, count.
pub const EVT64_HEADER_LEN: usize = 4 + 2 + 2 + 8;

const X_BITS: u32 = 14;
const Y_BITS: u32 = 14;
const COORD_LIMIT: u32 = 1 << X_BITS;

/// A single sensor record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    /// Timestamp in microseconds.
    pub t: u64,
    pub x: u16,
    pub y: u16,
    /// Polarity; values above 1 mark labeled noise.
    pub p: u8,
}

impl Event {
    pub const fn new(t: u64, x: u16, y: u16, p: u8) -> Self {
        Event { t, x, y, p }
    }

    /// True for genuine (signal-class) events.
    #[inline]
    pub fn is_signal(&self) -> bool {
        self.p < 2
    }

    #[inline]
    pub fn is_noise(&self) -> bool {
        self.p >= 2
    }
}

/// Sensor geometry in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub width: u16,
    pub height: u16,
}

impl Geometry {
    pub const fn new(width: u16, height: u16) -> Self {
        Geometry { width, height }
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Error)]
pub enum EventError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes, expected \"DIF1\"")]
    BadMagic,
    #[error("truncated header")]
    TruncatedHeader,
    #[error("file declares {declared} events but record {index} is truncated")]
    TruncatedRecord { index: usize, declared: u64 },
    #[error("{extra} trailing bytes after the declared {declared} events")]
    TrailingData { declared: u64, extra: usize },
    #[error("record {index}: reserved bits are set")]
    ReservedBits { index: usize },
    #[error("record {index}: malformed ({reason})")]
    Malformed { index: usize, reason: String },
    #[error("malformed CSV header {0:?}, expected \"t,x,y,p\"")]
    BadCsvHeader(String),
    #[error("record {index}: coordinate ({x}, {y}) outside {geometry} sensor")]
    OutOfRange {
        index: usize,
        x: u32,
        y: u32,
        geometry: Geometry,
    },
    #[error("record {index}: polarity {p} not in 0..=3")]
    BadPolarity { index: usize, p: u32 },
    #[error("record {index}: timestamp {t} precedes previous timestamp {prev}")]
    Unsorted { index: usize, t: u64, prev: u64 },
    #[error("record {index}: timestamp {t} does not fit the 32-bit EVT64 field")]
    TimestampOverflow { index: usize, t: u64 },
    #[error("sensor geometry must be non-zero, got {0}")]
    EmptyGeometry(Geometry),
    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch { left: Geometry, right: Geometry },
    #[error("record {index}: already labeled as noise (p={p})")]
    AlreadyLabeled { index: usize, p: u8 },
    #[error("CSV input needs an explicit sensor geometry")]
    MissingGeometry,
}

/// An ordered event sequence tied to its sensor geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    geometry: Geometry,
    events: Vec<Event>,
}

impl EventStream {
    /// Validates and wraps `events`.
    pub fn new(geometry: Geometry, events: Vec<Event>) -> Result<Self, EventError> {
        validate(geometry, &events)?;
        Ok(EventStream { geometry, events })
    }

    pub fn empty(geometry: Geometry) -> Result<Self, EventError> {
        Self::new(geometry, Vec::new())
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn width(&self) -> u16 {
        self.geometry.width
    }

    pub fn height(&self) -> u16 {
        self.geometry.height
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    /// Timestamp of the last event, if any.
    pub fn end_time(&self) -> Option<u64> {
        self.events.last().map(|e| e.t)
    }

    pub fn signal_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_signal()).count()
    }

    pub fn noise_count(&self) -> usize {
        self.events.len() - self.signal_count()
    }

    /// Keeps the events for which `keep` returns true. Order is preserved,
    /// so the result is still a valid stream.
    pub fn retain(&mut self, keep: impl FnMut(&Event) -> bool) {
        self.events.retain(keep);
    }
}

fn validate(geometry: Geometry, events: &[Event]) -> Result<(), EventError> {
    if geometry.width == 0 || geometry.height == 0 {
        return Err(EventError::EmptyGeometry(geometry));
    }
    let mut prev = 0u64;
    for (index, e) in events.iter().enumerate() {
        if !geometry.contains(e.x, e.y) {
            return Err(EventError::OutOfRange {
                index,
                x: e.x as u32,
                y: e.y as u32,
                geometry,
            });
        }
        if e.p > 3 {
            return Err(EventError::BadPolarity {
                index,
                p: e.p as u32,
            });
        }
        if e.t < prev {
            return Err(EventError::Unsorted {
                index,
                t: e.t,
                prev,
            });
        }
        prev = e.t;
    }
    Ok(())
}

/// On-disk container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Evt64,
    Csv,
}

impl Format {
    /// Guesses the container from a file extension, defaulting to EVT64.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Evt64,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "evt64" => Ok(Format::Evt64),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown event format {other:?} (expected evt64 or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Evt64 => "evt64",
            Format::Csv => "csv",
        })
    }
}

/// Packs an event into its 64-bit EVT64 record.
pub fn pack_record(e: &Event) -> u64 {
    (e.t & 0xFFFF_FFFF)
        | ((e.x as u64) << 32)
        | ((e.y as u64) << (32 + X_BITS))
        | (((e.p & 0b11) as u64) << (32 + X_BITS + Y_BITS))
}

/// Unpacks an EVT64 record; `None` if the reserved top bits are set.
pub fn unpack_record(word: u64) -> Option<Event> {
    if word >> 62 != 0 {
        return None;
    }
    let mask14 = (1u64 << 14) - 1;
    Some(Event {
        t: word & 0xFFFF_FFFF,
        x: ((word >> 32) & mask14) as u16,
        y: ((word >> (32 + X_BITS)) & mask14) as u16,
        p: ((word >> (32 + X_BITS + Y_BITS)) & 0b11) as u8,
    })
}

/// Decodes an EVT64 byte stream.
pub fn decode_evt64(mut reader: impl Read) -> Result<EventStream, EventError> {
    let mut header = [0u8; EVT64_HEADER_LEN];
    read_full(&mut reader, &mut header).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => EventError::TruncatedHeader,
        _ => EventError::Io(e),
    })?;
    if &header[0..4] != EVT64_MAGIC {
        return Err(EventError::BadMagic);
    }
    let width = u16::from_le_bytes([header[4], header[5]]);
    let height = u16::from_le_bytes([header[6], header[7]]);
    let declared = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let geometry = Geometry::new(width, height);
    if width == 0 || height == 0 {
        return Err(EventError::EmptyGeometry(geometry));
    }

    // Cap the up-front reservation so a corrupt count cannot exhaust memory.
    let mut events = Vec::with_capacity(declared.min(1 << 24) as usize);
    let mut buf = [0u8; 8];
    let mut prev = 0u64;
    for i in 0..declared {
        let index = i as usize;
        read_full(&mut reader, &mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => EventError::TruncatedRecord { index, declared },
            _ => EventError::Io(e),
        })?;
        let e = unpack_record(u64::from_le_bytes(buf)).ok_or(EventError::ReservedBits { index })?;
        if !geometry.contains(e.x, e.y) {
            return Err(EventError::OutOfRange {
                index,
                x: e.x as u32,
                y: e.y as u32,
                geometry,
            });
        }
        if e.t < prev {
            return Err(EventError::Unsorted {
                index,
                t: e.t,
                prev,
            });
        }
        prev = e.t;
        events.push(e);
    }
    let mut rest = Vec::new();
    reader.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(EventError::TrailingData {
            declared,
            extra: rest.len(),
        });
    }
    Ok(EventStream { geometry, events })
}

fn read_full(reader: &mut impl Read, buf: &mut [u8]) -> io::Result<()> {
    reader.read_exact(buf)
}

/// Encodes a stream as EVT64. Fails if a timestamp exceeds 32 bits or a
/// coordinate exceeds 14 bits.
pub fn encode_evt64(stream: &EventStream, mut writer: impl Write) -> Result<(), EventError> {
    let g = stream.geometry;
    if g.width as u32 > COORD_LIMIT || g.height as u32 > COORD_LIMIT {
        return Err(EventError::OutOfRange {
            index: 0,
            x: g.width as u32,
            y: g.height as u32,
            geometry: g,
        });
    }
    writer.write_all(EVT64_MAGIC)?;
    writer.write_all(&g.width.to_le_bytes())?;
    writer.write_all(&g.height.to_le_bytes())?;
    writer.write_all(&(stream.events.len() as u64).to_le_bytes())?;
    for (index, e) in stream.events.iter().enumerate() {
        if e.t > u32::MAX as u64 {
            return Err(EventError::TimestampOverflow { index, t: e.t });
        }
        writer.write_all(&pack_record(e).to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Decodes a CSV stream (`t,x,y,p` header) for the given geometry.
pub fn decode_csv(reader: impl BufRead, geometry: Geometry) -> Result<EventStream, EventError> {
    if geometry.width == 0 || geometry.height == 0 {
        return Err(EventError::EmptyGeometry(geometry));
    }
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(EventError::BadCsvHeader(String::new())),
    };
    if header.trim() != "t,x,y,p" {
        return Err(EventError::BadCsvHeader(header));
    }
    let mut events = Vec::new();
    let mut prev = 0u64;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let index = events.len();
        let malformed = |reason: &str| EventError::Malformed {
            index,
            reason: reason.to_string(),
        };
        let mut fields = line.split(',');
        let mut next_field = |name: &str| -> Result<u64, EventError> {
            fields
                .next()
                .ok_or_else(|| malformed(&format!("missing field {name}")))?
                .trim()
                .parse::<u64>()
                .map_err(|_| malformed(&format!("field {name} is not an unsigned integer")))
        };
        let t = next_field("t")?;
        let x = next_field("x")?;
        let y = next_field("y")?;
        let p = next_field("p")?;
        if fields.next().is_some() {
            return Err(malformed("more than four fields"));
        }
        if x >= geometry.width as u64 || y >= geometry.height as u64 {
            return Err(EventError::OutOfRange {
                index,
                x: x.min(u32::MAX as u64) as u32,
                y: y.min(u32::MAX as u64) as u32,
                geometry,
            });
        }
        if p > 3 {
            return Err(EventError::BadPolarity {
                index,
                p: p.min(u32::MAX as u64) as u32,
            });
        }
        if t < prev {
            return Err(EventError::Unsorted { index, t, prev });
        }
        prev = t;
        events.push(Event::new(t, x as u16, y as u16, p as u8));
    }
    Ok(EventStream { geometry, events })
}

pub fn encode_csv(stream: &EventStream, mut writer: impl Write) -> Result<(), EventError> {
    writeln!(writer, "t,x,y,p")?;
    for e in &stream.events {
        writeln!(writer, "{},{},{},{}", e.t, e.x, e.y, e.p)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a stream from disk. EVT64 carries its own geometry (a supplied one
/// must agree with it); CSV requires `geometry`.
pub fn read_events(
    path: impl AsRef<Path>,
    format: Format,
    geometry: Option<Geometry>,
) -> Result<EventStream, EventError> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        Format::Evt64 => {
            let stream = decode_evt64(reader)?;
            match geometry {
                Some(g) if g != stream.geometry => Err(EventError::GeometryMismatch {
                    left: stream.geometry,
                    right: g,
                }),
                _ => Ok(stream),
            }
        }
        Format::Csv => decode_csv(reader, geometry.ok_or(EventError::MissingGeometry)?),
    }
}

pub fn write_events(
    stream: &EventStream,
    path: impl AsRef<Path>,
    format: Format,
) -> Result<(), EventError> {
    let writer = BufWriter::new(File::create(path)?);
    match format {
        Format::Evt64 => encode_evt64(stream, writer),
        Format::Csv => encode_csv(stream, writer),
    }
}

/// Merges a clean recording with a noise stream, ordered by timestamp.
/// On equal timestamps clean events come first.
pub fn merge_streams(clean: &EventStream, noise: &EventStream) -> Result<EventStream, EventError> {
    if clean.geometry != noise.geometry {
        return Err(EventError::GeometryMismatch {
            left: clean.geometry,
            right: noise.geometry,
        });
    }
    let (a, b) = (&clean.events, &noise.events);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if b[j].t < a[i].t {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Ok(EventStream {
        geometry: clean.geometry,
        events: out,
    })
}

/// Turns an unlabeled recording of sensor noise into labeled noise (0 -> 2, 1 -> 3).
pub fn relabel_noise(stream: &EventStream) -> Result<EventStream, EventError> {
    if let Some((index, e)) = stream.events.iter().enumerate().find(|(_, e)| e.p > 1) {
        return Err(EventError::AlreadyLabeled { index, p: e.p });
    }
    let events = stream
        .events
        .iter()
        .map(|e| Event { p: e.p + 2, ..*e })
        .collect();
    Ok(EventStream {
        geometry: stream.geometry,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const VGA: Geometry = Geometry::new(640, 480);

    fn stream(events: &[(u64, u16, u16, u8)]) -> EventStream {
        EventStream::new(
            VGA,
            events
                .iter()
                .map(|&(t, x, y, p)| Event::new(t, x, y, p))
                .collect(),
        )
        .unwrap()
    }

    fn evt64_bytes(s: &EventStream) -> Vec<u8> {
        let mut buf = Vec::new();
        encode_evt64(s, &mut buf).unwrap();
        buf
    }

    #[test]
    fn empty_payload() {
        let s = EventStream::empty(VGA).unwrap();
        let bytes = evt64_bytes(&s);
        assert_eq!(bytes.len(), EVT64_HEADER_LEN);
        let back = decode_evt64(&bytes[..]).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.geometry(), VGA);
    }

    #[test]
    fn csv_line_maps_fields() {
        let s = decode_csv("t,x,y,p\n1000,5,7,1\n".as_bytes(), VGA).unwrap();
        assert_eq!(s.events(), &[Event::new(1000, 5, 7, 1)]);
    }

    #[test]
    fn csv_x_out_of_range() {
        let err = decode_csv("t,x,y,p\n1000,640,7,1\n".as_bytes(), VGA).unwrap_err();
        assert!(matches!(err, EventError::OutOfRange { index: 0, x: 640, .. }), "{err}");
    }

    #[test]
    fn evt64_x_out_of_range() {
        let mut bytes = evt64_bytes(&stream(&[(1, 0, 0, 0)]));
        let bad = pack_record(&Event::new(1, 640, 0, 0));
        bytes[EVT64_HEADER_LEN..].copy_from_slice(&bad.to_le_bytes());
        let err = decode_evt64(&bytes[..]).unwrap_err();
        assert!(matches!(err, EventError::OutOfRange { index: 0, .. }), "{err}");
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let err = decode_csv("t,x,y,p\n10,0,0,0\n20,0,0,0\n15,1,1,1\n".as_bytes(), VGA).unwrap_err();
        assert!(matches!(err, EventError::Unsorted { index: 2, t: 15, prev: 20 }));
        let err = EventStream::new(VGA, vec![Event::new(5, 0, 0, 0), Event::new(4, 0, 0, 0)])
            .unwrap_err();
        assert!(matches!(err, EventError::Unsorted { index: 1, .. }));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(decode_evt64(&b"DIF"[..]), Err(EventError::TruncatedHeader)));
        let mut bytes = evt64_bytes(&stream(&[(1, 0, 0, 0)]));
        bytes[0] = b'X';
        assert!(matches!(decode_evt64(&bytes[..]), Err(EventError::BadMagic)));

        let mut bytes = evt64_bytes(&stream(&[(1, 0, 0, 0), (2, 0, 0, 0)]));
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(
            decode_evt64(&bytes[..]),
            Err(EventError::TruncatedRecord { index: 1, declared: 2 })
        ));

        let mut bytes = evt64_bytes(&stream(&[(1, 0, 0, 0)]));
        bytes[EVT64_HEADER_LEN + 7] |= 0x80;
        assert!(matches!(decode_evt64(&bytes[..]), Err(EventError::ReservedBits { index: 0 })));

        let mut bytes = evt64_bytes(&stream(&[(1, 0, 0, 0)]));
        bytes.push(0);
        assert!(matches!(decode_evt64(&bytes[..]), Err(EventError::TrailingData { .. })));

        assert!(matches!(
            decode_csv("x,y,t,p\n".as_bytes(), VGA),
            Err(EventError::BadCsvHeader(_))
        ));
        assert!(matches!(
            decode_csv("t,x,y,p\n1,2,3\n".as_bytes(), VGA),
            Err(EventError::Malformed { index: 0, .. })
        ));
        assert!(matches!(
            decode_csv("t,x,y,p\n1,2,3,7\n".as_bytes(), VGA),
            Err(EventError::BadPolarity { index: 0, p: 7 })
        ));
    }

    #[test]
    fn three_event_round_trip_keeps_labels() {
        let s = stream(&[(10, 1, 2, 0), (10, 639, 479, 3), (4_000_000_000, 7, 7, 2)]);
        assert_eq!(decode_evt64(&evt64_bytes(&s)[..]).unwrap(), s);
        let mut csv = Vec::new();
        encode_csv(&s, &mut csv).unwrap();
        assert_eq!(decode_csv(&csv[..], VGA).unwrap(), s);
    }

    #[test]
    fn file_round_trip_and_io_error() {
        let dir = std::env::temp_dir().join(format!("evfilt-events-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let s = stream(&[(1, 1, 1, 1), (2, 2, 2, 3)]);
        for format in [Format::Evt64, Format::Csv] {
            let path = dir.join(format!("s.{format}"));
            write_events(&s, &path, format).unwrap();
            assert_eq!(read_events(&path, format, Some(VGA)).unwrap(), s);
        }
        let err = write_events(&s, dir.join("missing/dir/s.evt64"), Format::Evt64).unwrap_err();
        assert!(matches!(err, EventError::Io(_)));
        assert!(matches!(
            read_events(dir.join("s.csv"), Format::Csv, None),
            Err(EventError::MissingGeometry)
        ));
        assert!(matches!(
            read_events(dir.join("s.evt64"), Format::Evt64, Some(Geometry::new(10, 10))),
            Err(EventError::GeometryMismatch { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn timestamp_wider_than_32_bits_is_not_silently_truncated() {
        let s = stream(&[(1 << 32, 0, 0, 0)]);
        assert!(matches!(
            encode_evt64(&s, Vec::new()),
            Err(EventError::TimestampOverflow { index: 0, .. })
        ));
    }

    #[test]
    fn merge_order_and_tie_break() {
        let clean = stream(&[(10, 1, 1, 1)]);
        let noise = stream(&[(5, 2, 2, 2)]);
        let m = merge_streams(&clean, &noise).unwrap();
        assert_eq!(m.events(), &[Event::new(5, 2, 2, 2), Event::new(10, 1, 1, 1)]);

        let noise = stream(&[(10, 2, 2, 3)]);
        let m = merge_streams(&clean, &noise).unwrap();
        assert_eq!(m.events(), &[Event::new(10, 1, 1, 1), Event::new(10, 2, 2, 3)]);

        let empty = EventStream::empty(VGA).unwrap();
        assert_eq!(merge_streams(&clean, &empty).unwrap(), clean);

        let other = EventStream::empty(Geometry::new(320, 240)).unwrap();
        assert!(matches!(
            merge_streams(&clean, &other),
            Err(EventError::GeometryMismatch { .. })
        ));
    }

    #[test]
    fn relabel() {
        let s = stream(&[(1, 0, 0, 0), (2, 0, 0, 1)]);
        let r = relabel_noise(&s).unwrap();
        assert_eq!(r.events()[0].p, 2);
        assert_eq!(r.events()[1].p, 3);
        assert_eq!(r.events()[1].t, 2);
        assert!(matches!(
            relabel_noise(&r),
            Err(EventError::AlreadyLabeled { index: 0, p: 2 })
        ));
    }

    fn arb_stream() -> impl Strategy<Value = EventStream> {
        (1u16..2000, 1u16..2000).prop_flat_map(|(w, h)| {
            proptest::collection::vec((0u64..5000, 0..w, 0..h, 0u8..4), 0..200).prop_map(
                move |raw| {
                    let mut t = 0u64;
                    let events = raw
                        .into_iter()
                        .map(|(dt, x, y, p)| {
                            t += dt;
                            Event::new(t, x, y, p)
                        })
                        .collect();
                    EventStream::new(Geometry::new(w, h), events).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn serialization_round_trip(s in arb_stream()) {
            prop_assert_eq!(&decode_evt64(&evt64_bytes(&s)[..]).unwrap(), &s);
            let mut csv = Vec::new();
            encode_csv(&s, &mut csv).unwrap();
            prop_assert_eq!(&decode_csv(&csv[..], s.geometry()).unwrap(), &s);
        }

        #[test]
        fn merge_is_sorted_union(a in arb_stream(), seed in 0u64..1000) {
            let g = a.geometry();
            let noise: Vec<Event> = a.events().iter().enumerate()
                .map(|(i, e)| Event::new(e.t + (seed + i as u64) % 7, e.x, e.y, 2))
                .collect();
            let mut noise_sorted = noise.clone();
            noise_sorted.sort_by_key(|e| e.t);
            let b = EventStream::new(g, noise_sorted).unwrap();
            let m = merge_streams(&a, &b).unwrap();
            prop_assert_eq!(m.len(), a.len() + b.len());
            prop_assert!(m.events().windows(2).all(|w| w[0].t <= w[1].t));
            let mut lhs: Vec<_> = m.events().to_vec();
            let mut rhs: Vec<_> = a.events().iter().chain(b.events()).copied().collect();
            lhs.sort_by_key(|e| (e.t, e.x, e.y, e.p));
            rhs.sort_by_key(|e| (e.t, e.x, e.y, e.p));
            prop_assert_eq!(lhs, rhs);
        }
    }
}

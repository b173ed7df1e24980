//! `TTG1` v1 little-endian time-tag files.
//!
//! Header (24 bytes): magic `"TTG1"`, `u32` version = 1, `u64` record count,
//! `f64` repetition period in ns. Each record is 16 bytes: `u64` timestamp in
//! ps, `u8` channel (0, 1 or 2), `u8` flags (must be 0) and 6 reserved zero
//! bytes. The reader tolerates records displaced by fewer than
//! [`REORDER_CAPACITY`] positions and rejects anything worse.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{Read, Write};

use crate::{Error, Result};

pub const TTG1_MAGIC: &[u8; 4] = b"TTG1";
pub const TTG1_VERSION: u32 = 1;
pub const TTG1_HEADER_LEN: usize = 24;
pub const TTG1_RECORD_LEN: usize = 16;
pub const REORDER_CAPACITY: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeTagRecord {
    pub timestamp_ps: u64,
    pub channel: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagHeader {
    pub record_count: u64,
    pub rep_period_ns: f64,
}

/// A whole, sorted tag stream held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct TagStream {
    pub rep_period_ns: f64,
    pub records: Vec<TimeTagRecord>,
}

impl TagStream {
    pub fn new(rep_period_ns: f64, records: Vec<TimeTagRecord>) -> Result<Self> {
        if !(rep_period_ns > 0.0 && rep_period_ns.is_finite()) {
            return Err(Error::param("repetition period must be positive"));
        }
        if let Some(w) = records.windows(2).position(|w| w[1].timestamp_ps < w[0].timestamp_ps) {
            return Err(Error::param(format!("records out of order at index {}", w + 1)));
        }
        if let Some(r) = records.iter().find(|r| r.channel > 2) {
            return Err(Error::param(format!("channel {} outside 0..=2", r.channel)));
        }
        Ok(Self { rep_period_ns, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn encode_header(out: &mut Vec<u8>, count: u64, rep_ns: f64) {
    out.extend_from_slice(TTG1_MAGIC);
    out.extend_from_slice(&TTG1_VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&rep_ns.to_le_bytes());
}

fn encode_record(out: &mut Vec<u8>, r: &TimeTagRecord) {
    out.extend_from_slice(&r.timestamp_ps.to_le_bytes());
    out.push(r.channel);
    out.extend_from_slice(&[0u8; 7]);
}

pub fn serialize(stream: &TagStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(TTG1_HEADER_LEN + TTG1_RECORD_LEN * stream.records.len());
    encode_header(&mut out, stream.records.len() as u64, stream.rep_period_ns);
    for r in &stream.records {
        encode_record(&mut out, r);
    }
    out
}

/// Streams a tag file to `w` in bounded memory chunks.
pub fn write_stream(mut w: impl Write, stream: &TagStream) -> Result<()> {
    let mut buf = Vec::with_capacity(TTG1_RECORD_LEN * 4096);
    encode_header(&mut buf, stream.records.len() as u64, stream.rep_period_ns);
    for chunk in stream.records.chunks(4096) {
        for r in chunk {
            encode_record(&mut buf, r);
        }
        w.write_all(&buf)?;
        buf.clear();
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Streaming `TTG1` reader yielding records in non-decreasing time order.
pub struct TagReader<R: Read> {
    inner: R,
    header: TagHeader,
    read: u64,
    heap: BinaryHeap<Reverse<(u64, u64, u8)>>,
    last: Option<(u64, u64)>,
    tail_checked: bool,
    failed: bool,
}

fn read_exact_at<R: Read>(r: &mut R, buf: &mut [u8], offset: u64, what: &str) -> Result<()> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => {
                return Err(Error::format(
                    offset + got as u64,
                    format!("truncated {what}: {got} of {} bytes", buf.len()),
                ))
            }
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

impl<R: Read> TagReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut h = [0u8; TTG1_HEADER_LEN];
        let mut got = 0;
        while got < 4 {
            match inner.read(&mut h[got..4]) {
                Ok(0) => break,
                Ok(k) => got += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        if got < 4 || &h[..4] != TTG1_MAGIC {
            return Err(Error::format(0, "bad magic, expected \"TTG1\""));
        }
        read_exact_at(&mut inner, &mut h[4..], 4, "header")?;
        let version = u32::from_le_bytes(h[4..8].try_into().unwrap());
        if version != TTG1_VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let record_count = u64::from_le_bytes(h[8..16].try_into().unwrap());
        let rep_period_ns = f64::from_le_bytes(h[16..24].try_into().unwrap());
        if !(rep_period_ns > 0.0 && rep_period_ns.is_finite()) {
            return Err(Error::format(16, format!("invalid repetition period {rep_period_ns} ns")));
        }
        Ok(Self {
            inner,
            header: TagHeader {
                record_count,
                rep_period_ns,
            },
            read: 0,
            heap: BinaryHeap::with_capacity(REORDER_CAPACITY + 1),
            last: None,
            tail_checked: false,
            failed: false,
        })
    }

    pub fn header(&self) -> &TagHeader {
        &self.header
    }

    fn record_offset(index: u64) -> u64 {
        TTG1_HEADER_LEN as u64 + index * TTG1_RECORD_LEN as u64
    }

    fn read_record(&mut self) -> Result<TimeTagRecord> {
        let offset = Self::record_offset(self.read);
        let mut b = [0u8; TTG1_RECORD_LEN];
        read_exact_at(&mut self.inner, &mut b, offset, "record")?;
        let channel = b[8];
        if channel > 2 {
            return Err(Error::format(offset + 8, format!("channel {channel} outside 0..=2")));
        }
        if b[9] != 0 {
            return Err(Error::format(offset + 9, format!("non-zero flags {:#04x}", b[9])));
        }
        if let Some(k) = b[10..].iter().position(|&x| x != 0) {
            return Err(Error::format(offset + 10 + k as u64, "non-zero reserved byte"));
        }
        self.read += 1;
        Ok(TimeTagRecord {
            timestamp_ps: u64::from_le_bytes(b[..8].try_into().unwrap()),
            channel,
        })
    }

    fn check_trailing(&mut self) -> Result<()> {
        let mut b = [0u8; 1];
        loop {
            match self.inner.read(&mut b) {
                Ok(0) => return Ok(()),
                Ok(_) => {
                    return Err(Error::format(
                        Self::record_offset(self.read),
                        "trailing bytes after the declared records",
                    ))
                }
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn next_record(&mut self) -> Result<Option<TimeTagRecord>> {
        while self.heap.len() <= REORDER_CAPACITY && self.read < self.header.record_count {
            let index = self.read;
            let r = self.read_record()?;
            self.heap.push(Reverse((r.timestamp_ps, index, r.channel)));
        }
        if self.read == self.header.record_count && !self.tail_checked {
            self.tail_checked = true;
            self.check_trailing()?;
        }
        let Some(Reverse((t, index, channel))) = self.heap.pop() else {
            return Ok(None);
        };
        if let Some((prev, _)) = self.last {
            if t < prev {
                return Err(Error::DecreasingTimestamp {
                    offset: Self::record_offset(index),
                    previous: prev,
                    current: t,
                });
            }
        }
        self.last = Some((t, index));
        Ok(Some(TimeTagRecord {
            timestamp_ps: t,
            channel,
        }))
    }
}

impl<R: Read> Iterator for TagReader<R> {
    type Item = Result<TimeTagRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_record() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Parses a complete in-memory `TTG1` file.
pub fn parse_stream(bytes: &[u8]) -> Result<TagStream> {
    let reader = TagReader::new(bytes)?;
    let rep = reader.header().rep_period_ns;
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok(TagStream {
        rep_period_ns: rep,
        records,
    })
}

//! Binary feature archive (`.ark`) with a plain-text offset index (`.scp`).
//!
//! Entry layout, all integers little-endian:
//!
//! ```text
//! 0xFF 0x01 | key_len: u32 | key bytes (UTF-8) | rows: u32 | cols: u32 | rows*cols f32, row-major
//! ```
//!
//! Each scp line is `key<TAB>ark_path:byte_offset`, LF-terminated, where the
//! offset points at the entry's magic bytes.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::matrix::FeatureMatrix;

pub const ENTRY_MAGIC: [u8; 2] = [0xFF, 0x01];

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("duplicate key '{0}' in archive")]
    DuplicateKey(String),
    #[error("invalid key {0:?}: keys must be non-empty and contain no whitespace or NUL")]
    InvalidKey(String),
    #[error("entry '{key}': data length {len} does not match {rows}x{cols}")]
    Shape {
        key: String,
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("entry '{0}': column count must be positive")]
    ZeroColumns(String),
    #[error("malformed scp line {line:?}: {reason}")]
    BadScpLine { line: String, reason: &'static str },
    #[error("corrupt archive {path} at offset {offset}: {reason}")]
    Corrupt {
        path: String,
        offset: u64,
        reason: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// One stored matrix. Values are kept at archive precision (f32).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureArchiveEntry {
    pub key: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl FeatureArchiveEntry {
    pub fn new(
        key: impl Into<String>,
        rows: usize,
        cols: usize,
        data: Vec<f32>,
    ) -> Result<Self, ArchiveError> {
        let entry = Self {
            key: key.into(),
            rows,
            cols,
            data,
        };
        entry.validate()?;
        Ok(entry)
    }

    /// Narrows a feature matrix to f32.
    pub fn from_matrix(key: impl Into<String>, m: &FeatureMatrix) -> Result<Self, ArchiveError> {
        Self::new(
            key,
            m.rows(),
            m.cols(),
            m.data().iter().map(|&v| v as f32).collect(),
        )
    }

    pub fn to_matrix(&self) -> FeatureMatrix {
        FeatureMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("entry shape validated on construction")
    }

    fn validate(&self) -> Result<(), ArchiveError> {
        validate_key(&self.key)?;
        if self.cols == 0 {
            return Err(ArchiveError::ZeroColumns(self.key.clone()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(ArchiveError::Shape {
                key: self.key.clone(),
                rows: self.rows,
                cols: self.cols,
                len: self.data.len(),
            });
        }
        Ok(())
    }

    /// Serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        2 + 4 + self.key.len() + 8 + 4 * self.data.len()
    }

    pub fn encode(&self, out: &mut impl Write) -> io::Result<()> {
        out.write_all(&ENTRY_MAGIC)?;
        out.write_all(&(self.key.len() as u32).to_le_bytes())?;
        out.write_all(self.key.as_bytes())?;
        out.write_all(&(self.rows as u32).to_le_bytes())?;
        out.write_all(&(self.cols as u32).to_le_bytes())?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

pub fn validate_key(key: &str) -> Result<(), ArchiveError> {
    if key.is_empty() || key.chars().any(|c| c.is_whitespace() || c == '\0') {
        return Err(ArchiveError::InvalidKey(key.to_string()));
    }
    Ok(())
}

/// Written entries summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSummary {
    pub entries: usize,
    pub bytes: u64,
}

/// Single-writer archive. Entries are indexed in write order.
pub struct ArchiveWriter {
    ark: BufWriter<File>,
    scp: BufWriter<File>,
    ark_name: String,
    offset: u64,
    keys: HashSet<String>,
}

impl ArchiveWriter {
    pub fn create(ark_path: impl AsRef<Path>, scp_path: impl AsRef<Path>) -> Result<Self, ArchiveError> {
        let ark_path = ark_path.as_ref();
        Ok(Self {
            ark: BufWriter::new(File::create(ark_path)?),
            scp: BufWriter::new(File::create(scp_path)?),
            ark_name: ark_path.display().to_string(),
            offset: 0,
            keys: HashSet::new(),
        })
    }

    /// Appends one entry and returns its byte offset.
    pub fn write(&mut self, entry: &FeatureArchiveEntry) -> Result<u64, ArchiveError> {
        entry.validate()?;
        if !self.keys.insert(entry.key.clone()) {
            return Err(ArchiveError::DuplicateKey(entry.key.clone()));
        }
        let offset = self.offset;
        entry.encode(&mut self.ark)?;
        self.offset += entry.encoded_len() as u64;
        writeln!(self.scp, "{}\t{}:{}", entry.key, self.ark_name, offset)?;
        Ok(offset)
    }

    pub fn finish(mut self) -> Result<IndexSummary, ArchiveError> {
        self.ark.flush()?;
        self.scp.flush()?;
        Ok(IndexSummary {
            entries: self.keys.len(),
            bytes: self.offset,
        })
    }
}

/// Writes every entry, failing on the first duplicate key.
pub fn write_archive<'a>(
    entries: impl IntoIterator<Item = &'a FeatureArchiveEntry>,
    ark_path: impl AsRef<Path>,
    scp_path: impl AsRef<Path>,
) -> Result<IndexSummary, ArchiveError> {
    let mut writer = ArchiveWriter::create(ark_path, scp_path)?;
    for entry in entries {
        writer.write(entry)?;
    }
    writer.finish()
}

/// A parsed scp line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScpEntry {
    pub key: String,
    pub ark_path: PathBuf,
    pub offset: u64,
}

impl ScpEntry {
    pub fn parse(line: &str) -> Result<Self, ArchiveError> {
        let bad = |reason| ArchiveError::BadScpLine {
            line: line.to_string(),
            reason,
        };
        let (key, location) = line.split_once('\t').ok_or_else(|| bad("missing TAB"))?;
        validate_key(key)?;
        let (path, offset) = location
            .rsplit_once(':')
            .ok_or_else(|| bad("missing ':offset'"))?;
        if path.is_empty() {
            return Err(bad("empty archive path"));
        }
        let offset = offset.parse().map_err(|_| bad("offset is not an integer"))?;
        Ok(Self {
            key: key.to_string(),
            ark_path: PathBuf::from(path),
            offset,
        })
    }

    pub fn read(&self) -> Result<FeatureArchiveEntry, ArchiveError> {
        let mut file = File::open(&self.ark_path)?;
        let len = file.metadata()?.len();
        let corrupt = |reason: String| ArchiveError::Corrupt {
            path: self.ark_path.display().to_string(),
            offset: self.offset,
            reason,
        };
        if self.offset >= len {
            return Err(corrupt(format!("offset past end of file ({len} bytes)")));
        }
        file.seek(SeekFrom::Start(self.offset))?;
        let entry = decode_entry(&mut BufReader::new(file), len - self.offset).map_err(corrupt)?;
        if entry.key != self.key {
            return Err(corrupt(format!(
                "key mismatch: index says '{}', archive has '{}'",
                self.key, entry.key
            )));
        }
        Ok(entry)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, String> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| e.to_string())?;
    Ok(u32::from_le_bytes(b))
}

/// Decodes one entry with at most `available` bytes remaining in the source.
fn decode_entry(r: &mut impl Read, available: u64) -> Result<FeatureArchiveEntry, String> {
    let mut magic = [0u8; 2];
    r.read_exact(&mut magic).map_err(|e| e.to_string())?;
    if magic != ENTRY_MAGIC {
        return Err(format!("bad magic {magic:02X?}"));
    }
    let key_len = read_u32(r)? as u64;
    if 2 + 4 + key_len + 8 > available {
        return Err(format!("key length {key_len} exceeds file size"));
    }
    let mut key = vec![0u8; key_len as usize];
    r.read_exact(&mut key).map_err(|e| e.to_string())?;
    let key = String::from_utf8(key).map_err(|_| "key is not UTF-8".to_string())?;
    let rows = read_u32(r)? as u64;
    let cols = read_u32(r)? as u64;
    let payload = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| "dimension overflow".to_string())?;
    if 2 + 4 + key_len + 8 + payload > available {
        return Err(format!("dims {rows}x{cols} exceed file size"));
    }
    if cols == 0 {
        return Err("zero columns".into());
    }
    let mut raw = vec![0u8; payload as usize];
    r.read_exact(&mut raw).map_err(|e| e.to_string())?;
    let data = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(FeatureArchiveEntry {
        key,
        rows: rows as usize,
        cols: cols as usize,
        data,
    })
}

/// Reads the entry referenced by one scp line.
pub fn read_archive_entry(scp_line: &str) -> Result<FeatureArchiveEntry, ArchiveError> {
    ScpEntry::parse(scp_line)?.read()
}

/// Parses every non-empty line of an scp file.
pub fn read_scp(path: impl AsRef<Path>) -> Result<Vec<ScpEntry>, ArchiveError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.is_empty() {
            out.push(ScpEntry::parse(&line)?);
        }
    }
    Ok(out)
}

//! Audio input, binary feature archives and CMVN statistics files.

pub mod archive;
pub mod cmvn;
pub mod wav;

pub use archive::{
    read_archive_entry, read_scp, write_archive, ArchiveError, ArchiveWriter, FeatureArchiveEntry,
    IndexSummary, ScpEntry,
};
pub use cmvn::{read_cmvn, write_cmvn, CmvnFileError};
pub use wav::{read_wav, write_wav, WavError, Waveform};

//! On-disk index format: Tdm + Vocabulary behind a format-version header.
//!
//! JSON keeps the format inspectable; f64 values round-trip exactly through
//! serde_json's shortest-representation encoding.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::msm::Tdm;
use crate::textprep::Vocabulary;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
pub struct IndexFile {
    pub format_version: u32,
    pub vocabulary: Vocabulary,
    pub tdm: Tdm,
}

pub fn write_index(w: &mut impl Write, vocabulary: &Vocabulary, tdm: &Tdm) -> Result<()> {
    let file = IndexFile {
        format_version: FORMAT_VERSION,
        vocabulary: vocabulary.clone(),
        tdm: tdm.clone(),
    };
    serde_json::to_writer(w, &file)?;
    Ok(())
}

pub fn read_index(r: &mut impl Read) -> Result<IndexFile> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut file: IndexFile = serde_json::from_slice(&buf)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::IndexFormat(format!(
            "unsupported format version {} (expected {})",
            file.format_version, FORMAT_VERSION
        )));
    }
    file.vocabulary.rebuild_index();
    Ok(file)
}

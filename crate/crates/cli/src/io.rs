use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use protoscribe_core::backbone::{load_backbone_outputs, BackboneOutput};
use protoscribe_core::json::{read_jsonl, to_canonical_line, to_canonical_pretty};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(path.display(), e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::data(dir.display(), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::data(path.display(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::data(path.display(), e))
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    read_jsonl(open(path)?).map_err(|e| CliError::data(path.display(), e))
}

pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&to_canonical_line(r).map_err(|e| CliError::data(path.display(), e))?);
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_document<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    let text = to_canonical_pretty(doc).map_err(|e| CliError::data(path.display(), e))?;
    write_text(path, &(text + "\n"))
}

pub fn read_backbone(path: &Path) -> Result<Vec<BackboneOutput>, CliError> {
    load_backbone_outputs(path)
        .map_err(|e| CliError::data(path.display(), e))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::data(path.display(), e))
}

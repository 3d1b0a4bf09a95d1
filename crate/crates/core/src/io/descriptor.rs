//! JSON bank descriptor: the design parameters plus the fingerprint of the
//! bank they produce.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bank::FilterBank;
use crate::design::BankSpec;
use crate::error::{Error, Result};

/// On-disk form of a bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BankFile {
    pub spec: BankSpec,
    /// Hex SHA-256 fingerprint of the bank.
    pub fingerprint: String,
}

/// Writes the descriptor of a designed bank.
pub fn write_bank(path: impl AsRef<Path>, fb: &FilterBank) -> Result<()> {
    let spec = fb
        .spec
        .clone()
        .ok_or_else(|| Error::Domain("bank has no design parameters to describe".into()))?;
    let file = BankFile { spec, fingerprint: hex::encode(fb.fingerprint()) };
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Reads a descriptor and rebuilds the bank, checking its fingerprint.
pub fn read_bank(path: impl AsRef<Path>) -> Result<FilterBank> {
    let text = std::fs::read_to_string(path)?;
    let file: BankFile = serde_json::from_str(&text).map_err(|e| Error::Format(format!("bank descriptor: {e}")))?;
    let fb = file.spec.build()?;
    if hex::encode(fb.fingerprint()) != file.fingerprint {
        return Err(Error::Format("bank descriptor fingerprint does not match its parameters".into()));
    }
    Ok(fb)
}

//! Output files: CSV with one `#`-prefixed JSON metadata line, and
//! standalone JSON with an embedded `meta` object.

use anyhow::Result;
use serde::Serialize;
use std::path::Path;

/// Metadata embedded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: String,
    pub config: String,
    pub config_hash: String,
    pub sign_convention: String,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl Meta {
    pub fn new(argv: &[String]) -> Self {
        let config = argv.join(" ");
        Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: format!("{:016x}", fnv1a(config.as_bytes())),
            config,
            sign_convention: "negative-hopping (-1/4 square, -1/3 hex)".to_string(),
        }
    }
}

pub fn write_csv(path: &Path, meta: &Meta, body: &str) -> Result<()> {
    let header = format!("# {}\n", serde_json::to_string(meta)?);
    std::fs::write(path, header + body)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, value: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapper<'a, T: Serialize> {
        meta: &'a Meta,
        #[serde(flatten)]
        value: &'a T,
    }
    let text = serde_json::to_string_pretty(&Wrapper { meta, value })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

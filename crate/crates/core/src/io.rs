//! Number formatting and small file helpers shared by the exporters.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Shortest representation that parses back to the same `f64`.
///
/// Locale-independent; switches to exponent notation outside
/// `[1e-5, 1e16)` so tiny values do not expand into long zero runs.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let a = x.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)
}

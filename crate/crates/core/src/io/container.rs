//! Shared binary layout:
//!
//! ```text
//! offset  size  field
//! 0       8     magic
//! 8       4     format version, u32 little-endian
//! 12      8     header length H, u64 little-endian
//! 20      H     UTF-8 JSON header
//! 20+H    8·k   payload, k f64 little-endian values
//! ```

use crate::error::{Error, Result};

pub const CONTAINER_VERSION: u32 = 1;
const PREFIX: usize = 20;

pub(crate) fn encode(magic: &[u8; 8], header: &str, payload: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(PREFIX + header.len() + 8 * payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Splits a container into its JSON header and payload values.
pub(crate) fn decode<'a>(magic: &[u8; 8], bytes: &'a [u8]) -> Result<(&'a str, Vec<f64>)> {
    if bytes.len() < PREFIX {
        return Err(Error::Parse(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != magic {
        return Err(Error::Parse(format!(
            "bad magic; expected {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CONTAINER_VERSION {
        return Err(Error::Version {
            found: version,
            expected: CONTAINER_VERSION,
        });
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let rest = &bytes[PREFIX..];
    let hlen = usize::try_from(hlen)
        .ok()
        .filter(|&h| h <= rest.len())
        .ok_or_else(|| Error::Parse("header length exceeds file size".into()))?;
    let header = std::str::from_utf8(&rest[..hlen]).map_err(|e| Error::Parse(format!("header is not UTF-8: {e}")))?;
    let payload = &rest[hlen..];
    if !payload.len().is_multiple_of(8) {
        return Err(Error::Parse("payload is not a whole number of f64 values".into()));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejections() {
        let m = b"TESTMAGC";
        let bytes = encode(m, "{\"a\":1}", &[1.5, -0.0, f64::MIN_POSITIVE]);
        let (h, v) = decode(m, &bytes).unwrap();
        assert_eq!(h, "{\"a\":1}");
        assert_eq!(v[0], 1.5);
        assert!(v[1] == 0.0 && v[1].is_sign_negative());
        assert!(decode(b"OTHERMAG", &bytes).is_err());
        assert!(decode(m, &bytes[..bytes.len() - 1]).is_err());
        assert!(decode(m, &bytes[..10]).is_err());
        let mut v2 = bytes.clone();
        v2[8] = 9;
        assert_eq!(
            decode(m, &v2).unwrap_err(),
            Error::Version {
                found: 9,
                expected: CONTAINER_VERSION
            }
        );
        let mut huge = bytes.clone();
        huge[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(m, &huge).is_err());
    }
}

//! Monte-Carlo reference statistics file: container with magic `AMRPCREF`,
//! payload `mean[0..P]` followed by `sd[0..P]`.

use serde::{Deserialize, Serialize};

use super::container;
use crate::error::{Error, Result};
use crate::metrics::ReferenceStats;

pub const REFERENCE_MAGIC: &[u8; 8] = b"AMRPCREF";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    count: u64,
    seed: Option<u64>,
    cells: u64,
}

pub fn encode_reference(stats: &ReferenceStats) -> Result<Vec<u8>> {
    stats.validate()?;
    let header = Header {
        count: stats.count,
        seed: stats.seed,
        cells: stats.cells() as u64,
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?;
    let payload: Vec<f64> = stats.mean.iter().chain(&stats.sd).copied().collect();
    Ok(container::encode(REFERENCE_MAGIC, &json, &payload))
}

pub fn decode_reference(bytes: &[u8]) -> Result<ReferenceStats> {
    let (json, mut values) = container::decode(REFERENCE_MAGIC, bytes)?;
    let h: Header = serde_json::from_str(json).map_err(|e| Error::Parse(format!("reference header: {e}")))?;
    if h.cells.checked_mul(2) != Some(values.len() as u64) {
        return Err(Error::Parse(format!(
            "header announces {} cells, payload holds {} values",
            h.cells,
            values.len()
        )));
    }
    let sd = values.split_off(h.cells as usize);
    let stats = ReferenceStats {
        count: h.count,
        seed: h.seed,
        mean: values,
        sd,
    };
    stats.validate()?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let s = ReferenceStats {
            count: 50_000,
            seed: Some(7),
            mean: vec![1.0, -2.5, 1e-300],
            sd: vec![0.0, 0.25, 3.0],
        };
        let bytes = encode_reference(&s).unwrap();
        assert_eq!(decode_reference(&bytes).unwrap(), s);
        assert!(decode_reference(&bytes[..bytes.len() - 8]).is_err());
        let bad = ReferenceStats { sd: vec![0.0, -1.0, 0.0], ..s };
        assert!(encode_reference(&bad).is_err());
    }
}

use std::path::Path;

use super::{MlpParams, HIDDEN_UNITS};
use crate::error::{Error, Result};

pub const MLP1_MAGIC: [u8; 4] = *b"MLP1";

/// Standard 1024/512 trunk; hidden sizes are implied.
const VERSION_STANDARD: u32 = 1;
/// Custom hidden sizes follow `input_dim` as two extra u32 fields.
const VERSION_CUSTOM_HIDDEN: u32 = 2;

/// Serializes parameters as `MLP1`: magic, version, input_dim, then
/// `w1, b1, w2, b2, w_out, b_out` as little-endian binary32.
pub fn checkpoint_bytes(params: &MlpParams) -> Result<Vec<u8>> {
    if !params.is_finite() {
        return Err(Error::NonFinite("model parameters".into()));
    }
    let input_dim = u32::try_from(params.input_dim()).map_err(|_| Error::InvalidParameter("input_dim exceeds u32".into()))?;
    let hidden = params.hidden();
    let mut out = Vec::with_capacity(20 + 4 * params.n_params());
    out.extend_from_slice(&MLP1_MAGIC);
    if hidden == HIDDEN_UNITS {
        out.extend_from_slice(&VERSION_STANDARD.to_le_bytes());
        out.extend_from_slice(&input_dim.to_le_bytes());
    } else {
        out.extend_from_slice(&VERSION_CUSTOM_HIDDEN.to_le_bytes());
        out.extend_from_slice(&input_dim.to_le_bytes());
        for h in hidden {
            out.extend_from_slice(&(h as u32).to_le_bytes());
        }
    }
    for t in params.tensors() {
        for &v in t {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<MlpParams> {
    let word = |i: usize| -> Result<u32> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .ok_or_else(|| Error::Structure("truncated checkpoint header".into()))
    };
    let magic: [u8; 4] = bytes
        .get(..4)
        .ok_or_else(|| Error::Structure("truncated checkpoint header".into()))?
        .try_into()
        .expect("4 bytes");
    if magic != MLP1_MAGIC {
        return Err(Error::BadMagic {
            expected: MLP1_MAGIC,
            found: magic,
        });
    }
    let input_dim = word(2)? as usize;
    let (hidden, header) = match word(1)? {
        VERSION_STANDARD => (HIDDEN_UNITS, 12),
        VERSION_CUSTOM_HIDDEN => ([word(3)? as usize, word(4)? as usize], 20),
        v => return Err(Error::UnsupportedVersion(v)),
    };
    if input_dim == 0 || hidden.contains(&0) {
        return Err(Error::Structure("zero-sized layer".into()));
    }

    let mut params = MlpParams::zeros(input_dim, hidden);
    let expected = header + 4 * params.n_params();
    if bytes.len() != expected {
        return Err(Error::Structure(format!(
            "checkpoint is {} bytes, expected {expected} for input_dim {input_dim}",
            bytes.len()
        )));
    }
    let mut values = bytes[header..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64);
    for t in params.tensors_mut() {
        for (dst, src) in t.iter_mut().zip(&mut values) {
            *dst = src;
        }
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("checkpoint contains non-finite parameters".into()));
    }
    Ok(params)
}

pub fn save_checkpoint(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_bytes(params)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn narrowed(p: &MlpParams) -> MlpParams {
        let mut q = p.clone();
        for t in q.tensors_mut() {
            for v in t.iter_mut() {
                *v = *v as f32 as f64;
            }
        }
        q
    }

    #[test]
    fn standard_round_trip() {
        let p = MlpParams::init(7, 3).unwrap();
        let bytes = checkpoint_bytes(&p).unwrap();
        assert_eq!(&bytes[..4], b"MLP1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 7);
        assert_eq!(bytes.len(), 12 + 4 * p.n_params());
        assert_eq!(checkpoint_from_bytes(&bytes).unwrap(), narrowed(&p));
    }

    #[test]
    fn custom_hidden_round_trip() {
        let p = MlpParams::init_with_hidden(3, [5, 4], 1).unwrap();
        let back = checkpoint_from_bytes(&checkpoint_bytes(&p).unwrap()).unwrap();
        assert_eq!(back.hidden(), [5, 4]);
        assert_eq!(back, narrowed(&p));
    }

    #[test]
    fn malformed() {
        let bytes = checkpoint_bytes(&MlpParams::init_with_hidden(2, [3, 3], 0).unwrap()).unwrap();
        assert!(matches!(checkpoint_from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Structure(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(checkpoint_from_bytes(&bad), Err(Error::BadMagic { .. })));
        assert!(matches!(checkpoint_from_bytes(b"ML"), Err(Error::Structure(_))));
    }
}

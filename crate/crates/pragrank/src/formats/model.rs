//! Little-endian binary: magic, format version, net count, then per net the
//! layer count, layer sizes, normalization mean and std, and the row-major
//! parameters as f64.

use pragrank_core::neural::{Ensemble, Mlp, ScoreNet};

use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"PRAGNNET";
pub const MODEL_VERSION: u32 = 1;

pub fn encode_model(ensemble: &Ensemble) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(ensemble.nets.len() as u32).to_le_bytes());
    for net in &ensemble.nets {
        let sizes = net.mlp.sizes();
        out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
        for &s in sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        out.extend_from_slice(&net.mean.to_le_bytes());
        out.extend_from_slice(&net.std.to_le_bytes());
        for p in net.mlp.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let chunk = self
            .bytes
            .get(self.at..self.at + N)
            .ok_or_else(|| Error::Format(format!("model file truncated at byte {}", self.at)))?;
        self.at += N;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Ensemble> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<8>()? != MODEL_MAGIC {
        return Err(Error::Format("not a model file".into()));
    }
    let version = r.u32()? as u32;
    if version != MODEL_VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let count = r.u32()?;
    let mut nets = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let layers = r.u32()?;
        if layers > 64 {
            return Err(Error::Format(format!("implausible layer count {layers}")));
        }
        let sizes = (0..layers).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let mean = r.f64()?;
        let std = r.f64()?;
        let expected = Mlp::param_count(&sizes);
        if expected * 8 > bytes.len() {
            return Err(Error::Format("model file truncated".into()));
        }
        let params = (0..expected).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        nets.push(ScoreNet::new(Mlp::from_parts(sizes, params)?, mean, std)?);
    }
    if r.at != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes in model file", bytes.len() - r.at)));
    }
    Ok(Ensemble { nets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_and_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nets = (0..3)
            .map(|i| ScoreNet::new(Mlp::new(&[6, 5, 4, 1], &mut rng).unwrap(), i as f64 * 0.3, 1.5).unwrap())
            .collect();
        let e = Ensemble { nets };
        let bytes = encode_model(&e);
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back, e);
        assert!(decode_model(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_model(&extra).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(decode_model(&bad).is_err());
    }
}

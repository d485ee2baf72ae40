//! Binary checkpoints: magic, version, JSON config, step counter, then
//! parameters, momentum buffers and batch-norm running statistics as
//! little-endian `f64`, closed by a CRC-32 of everything before it.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::{Network, NetworkConfig, Scalar, Trainer};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"HPNETCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint network {found} does not match the configured network {expected}")]
    ConfigMismatch { expected: String, found: String },
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_values<T: Scalar>(out: &mut Vec<u8>, values: &[T]) {
    put_u64(out, values.len() as u64);
    for v in values {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
}

/// Serializes a trainer to bytes.
pub fn encode_checkpoint<T: Scalar>(trainer: &Trainer<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    let config = serde_json::to_vec(trainer.net.config()).expect("config serializes");
    put_u32(&mut out, config.len() as u32);
    out.extend_from_slice(&config);
    put_u64(&mut out, trainer.step());
    let params = trainer.net.params();
    put_u32(&mut out, params.len() as u32);
    for p in params {
        put_values(&mut out, &p.data);
    }
    for v in trainer.velocity() {
        put_values(&mut out, v);
    }
    let running = trainer.net.running();
    put_u32(&mut out, running.len() as u32);
    for r in running {
        put_values(&mut out, &r.mean);
        put_values(&mut out, &r.var);
    }
    let crc = crc32fast::hash(&out);
    put_u32(&mut out, crc);
    out
}

/// Writes a checkpoint through a temporary file so a crash never leaves a
/// half-written file under `path`.
pub fn save_checkpoint<T: Scalar>(path: &Path, trainer: &Trainer<T>) -> Result<(), CheckpointError> {
    let bytes = encode_checkpoint(trainer);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < n {
            return Err(CheckpointError::Corrupt("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn values_into<T: Scalar>(&mut self, dst: &mut [T]) -> Result<(), CheckpointError> {
        let len = self.u64()? as usize;
        if len != dst.len() {
            return Err(CheckpointError::Corrupt(format!(
                "tensor of {len} values where {} expected",
                dst.len()
            )));
        }
        let raw = self.take(len.checked_mul(8).ok_or_else(|| CheckpointError::Corrupt("size".into()))?)?;
        for (d, chunk) in dst.iter_mut().zip(raw.chunks_exact(8)) {
            *d = T::from_f64(f64::from_le_bytes(chunk.try_into().expect("8 bytes")));
        }
        Ok(())
    }
}

/// Parses checkpoint bytes. With `expected`, the stored architecture must
/// match it and the loaded network adopts its optimizer settings.
pub fn decode_checkpoint<T: Scalar>(
    bytes: &[u8],
    expected: Option<&NetworkConfig>,
) -> Result<Trainer<T>, CheckpointError> {
    if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < CHECKPOINT_MAGIC.len() + 8 {
        return Err(CheckpointError::Corrupt("truncated".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().expect("4 bytes")) {
        return Err(CheckpointError::Corrupt("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 12 };
    let config_len = r.u32()? as usize;
    let config: NetworkConfig = serde_json::from_slice(r.take(config_len)?)
        .map_err(|e| CheckpointError::Corrupt(format!("config: {e}")))?;
    let mut net = Network::<T>::new(config, 0).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    if let Some(expected) = expected {
        if !net.same_architecture(expected) {
            let describe = |c: &NetworkConfig| {
                format!(
                    "(grid {}, {} blocks, {} channels, value hidden {})",
                    c.grid_size, c.residual_blocks, c.channels, c.value_hidden
                )
            };
            return Err(CheckpointError::ConfigMismatch {
                expected: describe(expected),
                found: describe(&config),
            });
        }
        net.set_config(*expected)
            .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    }
    let step = r.u64()?;
    let count = r.u32()? as usize;
    if count != net.params().len() {
        return Err(CheckpointError::Corrupt(format!("{count} parameter tensors")));
    }
    for p in net.params_mut() {
        r.values_into(&mut p.data)?;
    }
    let mut velocity: Vec<Vec<T>> = net.params().iter().map(|p| vec![T::zero(); p.data.len()]).collect();
    for v in &mut velocity {
        r.values_into(v)?;
    }
    let count = r.u32()? as usize;
    if count != net.running().len() {
        return Err(CheckpointError::Corrupt(format!("{count} batch-norm layers")));
    }
    for stats in net.running_mut() {
        r.values_into(&mut stats.mean)?;
        r.values_into(&mut stats.var)?;
    }
    if r.pos != body.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    Ok(Trainer::from_parts(net, velocity, step))
}

pub fn load_checkpoint<T: Scalar>(
    path: &Path,
    expected: Option<&NetworkConfig>,
) -> Result<Trainer<T>, CheckpointError> {
    let bytes = fs::read(path)?;
    decode_checkpoint(&bytes, expected)
}

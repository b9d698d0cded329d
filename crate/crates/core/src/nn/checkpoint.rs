//! `NNW1` named-tensor container, little-endian:
//!
//! ```text
//! magic "NNW1" | tensor count u32
//! per tensor: name length u32 | name bytes | rank u32 | dims u32 * rank | f64 values
//! ```

use super::{NnError, Tensor};

pub const NNW_MAGIC: &[u8; 4] = b"NNW1";

pub fn checkpoint_len(tensors: &[(String, Tensor)]) -> usize {
    8 + tensors
        .iter()
        .map(|(name, t)| 4 + name.len() + 4 + 4 * t.shape().len() + 8 * t.len())
        .sum::<usize>()
}

pub fn save_tensors(tensors: &[(String, Tensor)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(checkpoint_len(tensors));
    out.extend_from_slice(NNW_MAGIC);
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in tensors {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn load_tensors(bytes: &[u8]) -> Result<Vec<(String, Tensor)>, NnError> {
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], NnError> {
        let end = pos
            .checked_add(n)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| NnError::Checkpoint(format!("truncated at byte {pos}")))?;
        let s = &bytes[pos..end];
        pos = end;
        Ok(s)
    };
    if take(4)? != NNW_MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap()) as usize;
    let count = u32_at(take(4)?);
    let mut tensors = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = u32_at(take(4)?);
        let name = String::from_utf8(take(len)?.to_vec())
            .map_err(|_| NnError::Checkpoint("tensor name is not UTF-8".into()))?;
        let rank = u32_at(take(4)?);
        let shape = (0..rank).map(|_| take(4).map(u32_at)).collect::<Result<Vec<_>, _>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| NnError::Checkpoint(format!("tensor {name:?} too large")))?;
        let raw = take(n.checked_mul(8).ok_or_else(|| NnError::Checkpoint("overflow".into()))?)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push((name, Tensor::from_vec(&shape, values)));
    }
    if pos != bytes.len() {
        return Err(NnError::Checkpoint(format!("{} trailing bytes", bytes.len() - pos)));
    }
    Ok(tensors)
}

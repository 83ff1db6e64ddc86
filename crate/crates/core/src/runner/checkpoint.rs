//! Binary checkpoint layout (all integers and floats little-endian):
//!
//! ```text
//! magic        8 bytes  "DIM3CKPT"
//! version      u32
//! endianness   u8       b'L'
//! digest       32 bytes SHA-256 of the run configuration
//! chain        u32
//! iteration    u64      sweeps completed
//! rng          32-byte seed, u64 stream, u128 word position (ChaCha8)
//! dynamics     u8       0 time-varying, 1 time-invariant
//! truncated    u8
//! n, T, K      u64 x 3
//! sender       u32 x n*n*T
//! receiver     u32 x n*n*T
//! beta         f64 x K, then remainder f64
//! hyper        f64 x 5  (gamma, alpha, kappa, lambda1, lambda2)
//! trace        u64 rows, then per row: u64 iteration, u32 chain, u64 K,
//!              f64 x 5 (D, loglik, gamma, alpha, kappa)
//! recovery     u64 samples, then three matrices (u64 rows, u64 cols, f64s)
//! ```
//!
//! Table counts are not stored: they are redrawn from the labels at every
//! sweep before use.

use std::path::Path;

use rand_chacha::ChaCha8Rng;

use crate::analysis::{ChainTrace, RecoveryAccumulator, TraceRow};
use crate::error::{Error, Result};
use crate::model::{Dynamics, GlobalWeights, Hyperparameters, LabelState, RelationTensor};
use crate::state::ChainState;

pub const MAGIC: &[u8; 8] = b"DIM3CKPT";
pub const VERSION: u32 = 1;

/// Everything needed to continue a chain bit-exactly.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub digest: [u8; 32],
    pub chain: u32,
    pub iteration: u64,
    pub rng: ChaCha8Rng,
    pub state: ChainState,
    pub trace: ChainTrace,
    pub recovery: RecoveryAccumulator,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn len(&mut self, x: usize) {
        self.u64(x as u64);
    }
    fn matrix(&mut self, m: &[Vec<f64>]) {
        self.len(m.len());
        self.len(m.first().map_or(0, Vec::len));
        for row in m {
            for &x in row {
                self.f64(x);
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated file at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    /// A length bounded by the bytes left, so corrupt files cannot trigger
    /// huge allocations.
    fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.u64()?;
        let left = (self.bytes.len() - self.pos) as u64;
        if n.saturating_mul(elem.max(1) as u64) > left {
            return Err(Error::Checkpoint(format!("length {n} exceeds remaining {left} bytes")));
        }
        Ok(n as usize)
    }
    fn matrix(&mut self) -> Result<Vec<Vec<f64>>> {
        let rows = self.len(0)?;
        let cols = self.len(0)?;
        if (rows as u64).saturating_mul(cols as u64).saturating_mul(8) > (self.bytes.len() - self.pos) as u64 {
            return Err(Error::Checkpoint("matrix exceeds file size".into()));
        }
        (0..rows).map(|_| (0..cols).map(|_| self.f64()).collect()).collect()
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        w.u8(b'L');
        w.0.extend_from_slice(&self.digest);
        w.u32(self.chain);
        w.u64(self.iteration);
        w.0.extend_from_slice(&self.rng.get_seed());
        w.u64(self.rng.get_stream());
        w.0.extend_from_slice(&self.rng.get_word_pos().to_le_bytes());
        let s = &self.state;
        w.u8(match s.dynamics {
            Dynamics::Mtv => 0,
            Dynamics::Mti => 1,
        });
        w.u8(s.truncated as u8);
        w.len(s.n());
        w.len(s.times());
        w.len(s.k());
        for &x in s.labels.sender() {
            w.u32(x);
        }
        for &x in s.labels.receiver() {
            w.u32(x);
        }
        for &b in &s.weights.beta {
            w.f64(b);
        }
        w.f64(s.weights.remainder);
        let h = s.weights.hyper;
        for x in [h.gamma, h.alpha, h.kappa, h.lambda1, h.lambda2] {
            w.f64(x);
        }
        w.len(self.trace.rows.len());
        for r in &self.trace.rows {
            w.u64(r.iteration);
            w.u32(r.chain);
            w.len(r.k);
            for x in [r.d, r.loglik, r.gamma, r.alpha, r.kappa] {
                w.f64(x);
            }
        }
        let acc = &self.recovery;
        w.len(acc.samples);
        w.matrix(&acc.membership);
        w.matrix(&acc.compat);
        w.matrix(&acc.compat_samples);
        w.0
    }

    /// Parses a checkpoint and rebuilds the chain state against `data`.
    pub fn from_bytes(bytes: &[u8], data: &RelationTensor) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        if r.u8()? != b'L' {
            return Err(Error::Checkpoint("unsupported byte order".into()));
        }
        let digest = r.array::<32>()?;
        let chain = r.u32()?;
        let iteration = r.u64()?;
        let seed = r.array::<32>()?;
        let stream = r.u64()?;
        let word_pos = r.u128()?;
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        let dynamics = match r.u8()? {
            0 => Dynamics::Mtv,
            1 => Dynamics::Mti,
            other => return Err(Error::Checkpoint(format!("unknown dynamics code {other}"))),
        };
        let truncated = r.u8()? != 0;
        let n = r.u64()? as usize;
        let t = r.u64()? as usize;
        let k = r.u64()? as usize;
        if n != data.n() || t != data.times() {
            return Err(Error::Checkpoint(format!(
                "checkpoint is for n={n}, T={t} but the dataset has n={}, T={}",
                data.n(),
                data.times()
            )));
        }
        let len = n * n * t;
        if (len as u64) * 8 > (bytes.len() - r.pos) as u64 {
            return Err(Error::Checkpoint("label arrays exceed file size".into()));
        }
        let sender = (0..len).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let receiver = (0..len).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        if (k as u64) * 8 > (bytes.len() - r.pos) as u64 {
            return Err(Error::Checkpoint("weights exceed file size".into()));
        }
        let beta = (0..k).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let remainder = r.f64()?;
        let hyper = Hyperparameters {
            gamma: r.f64()?,
            alpha: r.f64()?,
            kappa: r.f64()?,
            lambda1: r.f64()?,
            lambda2: r.f64()?,
        };
        let rows = r.len(52)?;
        let mut trace = ChainTrace::new(chain);
        for _ in 0..rows {
            let row = TraceRow {
                iteration: r.u64()?,
                chain: r.u32()?,
                k: r.u64()? as usize,
                d: r.f64()?,
                loglik: r.f64()?,
                gamma: r.f64()?,
                alpha: r.f64()?,
                kappa: r.f64()?,
            };
            trace.push(row).map_err(|e| Error::Checkpoint(e.to_string()))?;
        }
        let recovery = RecoveryAccumulator {
            samples: r.u64()? as usize,
            membership: r.matrix()?,
            compat: r.matrix()?,
            compat_samples: r.matrix()?,
        };
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let labels = LabelState::from_parts(n, t, k, sender, receiver).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let weights = GlobalWeights { beta, remainder, hyper };
        let state = if truncated {
            ChainState::truncated(data, labels, weights, dynamics)
        } else {
            ChainState::new(data, labels, weights, dynamics)
        }
        .map_err(|e| Error::Checkpoint(format!("inconsistent state: {e}")))?;
        Ok(Self {
            digest,
            chain,
            iteration,
            rng,
            state,
            trace,
            recovery,
        })
    }

    /// Writes atomically via a temporary file in the same directory.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("ckpt.tmp");
        std::fs::write(&tmp, self.to_bytes()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, data: &RelationTensor) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, data).map_err(|e| match e {
            Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

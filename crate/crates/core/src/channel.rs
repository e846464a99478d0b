//! L-tap frequency-selective Rayleigh MIMO channels.
//!
//! Every matrix is stored receive-major, `n_rx × n_tx`, so a column belongs to
//! one transmit antenna and subset selection is column selection. Tap entries
//! are circularly-symmetric complex Gaussian with variance `1/L`, which gives
//! each transmit/receive pair unit total power regardless of `L`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{streams, SimRng};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_subcarriers: usize,
    pub n_taps: usize,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.n_subcarriers == 0 || self.n_taps == 0 {
            return Err(Error::config(format!(
                "channel dimensions must be positive (n_tx={}, n_rx={}, n_subcarriers={}, n_taps={})",
                self.n_tx, self.n_rx, self.n_subcarriers, self.n_taps
            )));
        }
        if self.n_taps > self.n_subcarriers {
            return Err(Error::config(format!(
                "n_taps ({}) exceeds n_subcarriers ({})",
                self.n_taps, self.n_subcarriers
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ChannelConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

/// The `L` time-domain tap matrices of one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    taps: Vec<CMatrix>,
}

impl TapSet {
    /// Wraps caller-provided taps. All matrices must share one non-empty shape.
    pub fn new(taps: Vec<CMatrix>) -> Result<Self> {
        let first = taps
            .first()
            .ok_or_else(|| Error::config("a tap set needs at least one tap"))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::dimension("tap matrices must be non-empty"));
        }
        if let Some(bad) = taps.iter().position(|t| t.shape() != shape) {
            return Err(Error::dimension(format!(
                "tap {bad} has shape {:?}, expected {shape:?}",
                taps[bad].shape()
            )));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[CMatrix] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn n_rx(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].ncols()
    }
}

/// One channel draw: its taps, the per-subcarrier responses `C_i`, and the
/// per-subcarrier Gram matrices `C_iᴴ C_i` that capacity evaluation reads.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    freq_response: Vec<CMatrix>,
    grams: Vec<CMatrix>,
    source_taps: TapSet,
}

impl PartialEq for ChannelRealization {
    fn eq(&self, other: &Self) -> bool {
        self.source_taps == other.source_taps && self.freq_response == other.freq_response
    }
}

impl ChannelRealization {
    pub fn freq_response(&self) -> &[CMatrix] {
        &self.freq_response
    }

    pub fn source_taps(&self) -> &TapSet {
        &self.source_taps
    }

    pub fn n_subcarriers(&self) -> usize {
        self.freq_response.len()
    }

    pub fn n_tx(&self) -> usize {
        self.source_taps.n_tx()
    }

    pub fn n_rx(&self) -> usize {
        self.source_taps.n_rx()
    }

    /// `C_iᴴ C_i` for subcarrier `i` (`n_tx × n_tx`).
    pub fn gram(&self, subcarrier: usize) -> &CMatrix {
        &self.grams[subcarrier]
    }
}

/// Entry `(a, b)` of `Hᴴ H`, summed over rows in ascending order.
///
/// Both the realization-level Gram cache and the standalone per-subcarrier
/// capacity go through this, so they agree bit for bit.
pub(crate) fn gram_entry(h: &CMatrix, a: usize, b: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..h.nrows() {
        acc += h[(r, a)].conj() * h[(r, b)];
    }
    acc
}

fn gram_of(h: &CMatrix) -> CMatrix {
    let n = h.ncols();
    CMatrix::from_fn(n, n, |a, b| gram_entry(h, a, b))
}

/// Draws `L` IID tap matrices with `CN(0, 1/L)` entries.
pub fn generate_taps(config: &ChannelConfig, rng: &mut SimRng) -> Result<TapSet> {
    config.validate()?;
    // Real and imaginary parts each carry half the entry variance.
    let sigma = (0.5 / config.n_taps as f64).sqrt();
    let taps = (0..config.n_taps)
        .map(|_| {
            CMatrix::from_fn(config.n_rx, config.n_tx, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(sigma * re, sigma * im)
            })
        })
        .collect();
    Ok(TapSet { taps })
}

/// `C_i = Σ_j c_j · exp(−ι·2π·i·j / N_s)` for `i` in `0..N_s`.
pub fn frequency_response(taps: TapSet, n_subcarriers: usize) -> Result<ChannelRealization> {
    if n_subcarriers < taps.len() {
        return Err(Error::config(format!(
            "n_subcarriers ({n_subcarriers}) is smaller than the tap count ({})",
            taps.len()
        )));
    }
    let (n_rx, n_tx) = (taps.n_rx(), taps.n_tx());
    let twiddles: Vec<Complex64> = (0..n_subcarriers)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n_subcarriers as f64))
        .collect();
    let freq_response: Vec<CMatrix> = (0..n_subcarriers)
        .map(|i| {
            let mut acc = CMatrix::zeros(n_rx, n_tx);
            for (j, tap) in taps.taps().iter().enumerate() {
                let w = twiddles[(i * j) % n_subcarriers];
                acc.zip_apply(tap, |dst, src| *dst += src * w);
            }
            acc
        })
        .collect();
    let grams = freq_response.iter().map(gram_of).collect();
    Ok(ChannelRealization {
        freq_response,
        grams,
        source_taps: taps,
    })
}

/// A fixed Monte-Carlo sample of channel realizations sharing one config.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationBatch {
    realizations: Vec<ChannelRealization>,
    config: ChannelConfig,
    seed: u64,
}

/// Realization `index` of a batch seeded with `seed` draws from its own stream.
fn realization_rng(seed: u64, index: usize) -> SimRng {
    SimRng::new(seed).split(streams::CHANNEL).split(index as u64)
}

pub fn generate_batch(config: &ChannelConfig, batch_size: usize, seed: u64) -> Result<RealizationBatch> {
    config.validate()?;
    if batch_size == 0 {
        return Err(Error::config("batch_size must be at least 1"));
    }
    let realizations = (0..batch_size)
        .map(|index| {
            let mut rng = realization_rng(seed, index);
            let taps = generate_taps(config, &mut rng)?;
            frequency_response(taps, config.n_subcarriers)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealizationBatch {
        realizations,
        config: *config,
        seed,
    })
}

const BATCH_MAGIC: &[u8; 8] = b"ANTSELRB";
const BATCH_VERSION: u32 = 1;

impl RealizationBatch {
    /// Builds a batch from explicit realizations, e.g. hand-constructed channels.
    pub fn from_realizations(
        config: ChannelConfig,
        seed: u64,
        realizations: Vec<ChannelRealization>,
    ) -> Result<Self> {
        config.validate()?;
        if realizations.is_empty() {
            return Err(Error::config("a batch needs at least one realization"));
        }
        for (k, r) in realizations.iter().enumerate() {
            if r.n_tx() != config.n_tx
                || r.n_rx() != config.n_rx
                || r.n_subcarriers() != config.n_subcarriers
                || r.source_taps().len() != config.n_taps
            {
                return Err(Error::dimension(format!(
                    "realization {k} does not match the batch configuration"
                )));
            }
        }
        Ok(Self {
            realizations,
            config,
            seed,
        })
    }

    pub fn realizations(&self) -> &[ChannelRealization] {
        &self.realizations
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    /// Binary layout, all little-endian:
    ///
    /// ```text
    /// magic "ANTSELRB" | version u32 | n_tx n_rx n_subcarriers n_taps u32
    /// | config.seed u64 | batch seed u64 | count u32
    /// | per realization, per tap, column-major: re f64, im f64
    /// ```
    ///
    /// Frequency responses are not stored; they are recomputed on load with
    /// the same arithmetic and therefore reproduce bit for bit.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let c = &self.config;
        w.write_all(BATCH_MAGIC)?;
        w.write_u32::<LittleEndian>(BATCH_VERSION)?;
        for dim in [c.n_tx, c.n_rx, c.n_subcarriers, c.n_taps] {
            w.write_u32::<LittleEndian>(dim as u32)?;
        }
        w.write_u64::<LittleEndian>(c.seed)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u32::<LittleEndian>(self.realizations.len() as u32)?;
        for r in &self.realizations {
            for tap in r.source_taps().taps() {
                for z in tap.iter() {
                    w.write_f64::<LittleEndian>(z.re)?;
                    w.write_f64::<LittleEndian>(z.im)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BATCH_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != BATCH_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = r.read_u32::<LittleEndian>()? as usize;
        }
        let config = ChannelConfig {
            n_tx: dims[0],
            n_rx: dims[1],
            n_subcarriers: dims[2],
            n_taps: dims[3],
            seed: r.read_u64::<LittleEndian>()?,
        };
        config.validate()?;
        let seed = r.read_u64::<LittleEndian>()?;
        let count = r.read_u32::<LittleEndian>()? as usize;
        let mut realizations = Vec::with_capacity(count);
        for _ in 0..count {
            let mut taps = Vec::with_capacity(config.n_taps);
            for _ in 0..config.n_taps {
                let mut values = Vec::with_capacity(config.n_rx * config.n_tx);
                for _ in 0..config.n_rx * config.n_tx {
                    let re = r.read_f64::<LittleEndian>()?;
                    let im = r.read_f64::<LittleEndian>()?;
                    values.push(Complex64::new(re, im));
                }
                taps.push(CMatrix::from_vec(config.n_rx, config.n_tx, values));
            }
            realizations.push(frequency_response(TapSet::new(taps)?, config.n_subcarriers)?);
        }
        Self::from_realizations(config, seed, realizations)
    }
}

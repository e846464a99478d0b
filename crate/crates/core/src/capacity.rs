//! Ergodic capacity of a transmit-antenna subset.
//!
//! For a subset of `n_t` antennas the per-subcarrier capacity is
//! `log2 det(I + (ρ/n_t)·H Hᴴ)` with `H` the selected columns of `C_i`. The
//! determinant is evaluated on the `n_t × n_t` form `I + (ρ/n_t)·Hᴴ H`, which
//! has the same determinant, via a Cholesky factorization whose log-diagonal
//! is summed. Realization capacity averages over subcarriers; ergodic capacity
//! averages realization capacity over a batch.

use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::channel::{gram_entry, CMatrix, ChannelRealization, RealizationBatch};
use crate::error::{Error, Result};

/// A set of selected transmit antennas: a length-`n_tx` mask and the sorted
/// positions of its ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AntennaSubset {
    mask: Vec<bool>,
    positions: Vec<usize>,
}

impl AntennaSubset {
    /// Positions may come in any order; they are sorted. Duplicates and
    /// out-of-range indices are rejected.
    pub fn from_positions(n_tx: usize, positions: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n_tx];
        for &p in positions {
            if p >= n_tx {
                return Err(Error::dimension(format!("antenna {p} out of range for n_tx={n_tx}")));
            }
            if mask[p] {
                return Err(Error::config(format!("antenna {p} listed twice")));
            }
            mask[p] = true;
        }
        Self::from_mask(mask)
    }

    pub fn from_mask(mask: Vec<bool>) -> Result<Self> {
        let positions: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then_some(i))
            .collect();
        if positions.is_empty() {
            return Err(Error::config("an antenna subset must select at least one antenna"));
        }
        Ok(Self { mask, positions })
    }

    pub fn full(n_tx: usize) -> Result<Self> {
        Self::from_mask(vec![true; n_tx])
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn n_tx(&self) -> usize {
        self.mask.len()
    }

    /// Number of selected antennas, `n_t`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, antenna: usize) -> bool {
        self.mask.get(antenna).copied().unwrap_or(false)
    }

    /// Indices of unselected antennas, ascending.
    pub fn unselected(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| (!on).then_some(i))
            .collect()
    }

    /// Copy with antenna `off` deselected and `on` selected.
    pub fn swapped(&self, off: usize, on: usize) -> Result<Self> {
        if !self.contains(off) || on >= self.n_tx() || self.contains(on) {
            return Err(Error::dimension(format!(
                "cannot swap {off} out and {on} in for subset {self}"
            )));
        }
        let mut mask = self.mask.clone();
        mask[off] = false;
        mask[on] = true;
        Self::from_mask(mask)
    }
}

/// Semicolon-joined positions, e.g. `1;4;7`.
impl fmt::Display for AntennaSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.positions.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for AntennaSubset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.positions.serialize(s)
    }
}

/// Per-subcarrier SNR `ρ`, kept in both decibel and linear form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    db: f64,
    linear: f64,
}

impl Snr {
    pub fn from_db(db: f64) -> Result<Self> {
        let linear = 10f64.powf(db / 10.0);
        if !db.is_finite() || !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::config(format!("SNR of {db} dB is not representable")));
        }
        Ok(Self { db, linear })
    }

    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::config(format!("linear SNR must be positive and finite, got {linear}")));
        }
        Ok(Self {
            db: 10.0 * linear.log10(),
            linear,
        })
    }

    pub fn db(&self) -> f64 {
        self.db
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub bits_per_s_per_hz: f64,
    pub n_realizations: usize,
    pub subset: AntennaSubset,
    pub snr: Snr,
}

impl Serialize for CapacityEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CapacityEstimate", 4)?;
        st.serialize_field("bits_per_s_per_hz", &self.bits_per_s_per_hz)?;
        st.serialize_field("n_realizations", &self.n_realizations)?;
        st.serialize_field("subset", &self.subset)?;
        st.serialize_field("snr_db", &self.snr.db)?;
        st.end()
    }
}

/// `log2 det(I_n + scale·G)` for a Hermitian positive semi-definite `G`,
/// given by its lower-triangle entries `gram(a, b)` with `a ≥ b`.
///
/// In-place Cholesky on `scratch`; returns the sum of `log2` of the squared
/// diagonal. A non-positive or non-finite pivot is a numeric error.
fn log2_det_identity_plus(
    n: usize,
    scale: f64,
    gram: impl Fn(usize, usize) -> Complex64,
    scratch: &mut Vec<Complex64>,
) -> Result<f64> {
    scratch.clear();
    scratch.resize(n * n, Complex64::new(0.0, 0.0));
    let l = scratch;
    let mut log_det = 0.0;
    for j in 0..n {
        let mut pivot = 1.0 + scale * gram(j, j).re;
        for k in 0..j {
            pivot -= l[j * n + k].norm_sqr();
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::Numeric(format!("non-positive pivot {pivot} at column {j}")));
        }
        let diag = pivot.sqrt();
        l[j * n + j] = Complex64::new(diag, 0.0);
        log_det += pivot.ln();
        for i in (j + 1)..n {
            let mut v = gram(i, j) * scale;
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / diag;
        }
    }
    Ok((log_det / std::f64::consts::LN_2).max(0.0))
}

/// Columns of `matrix` at `subset.positions()`, ascending.
pub fn select_columns(matrix: &CMatrix, subset: &AntennaSubset) -> Result<CMatrix> {
    if subset.n_tx() != matrix.ncols() {
        return Err(Error::dimension(format!(
            "subset over {} antennas applied to a matrix with {} columns",
            subset.n_tx(),
            matrix.ncols()
        )));
    }
    Ok(matrix.select_columns(subset.positions()))
}

/// `log2 det(I + (ρ/n_t)·H Hᴴ)` for the already-restricted `n_rx × n_t` channel.
pub fn subcarrier_capacity(h_sub: &CMatrix, snr: Snr, n_t: usize) -> Result<f64> {
    if n_t == 0 || h_sub.ncols() != n_t {
        return Err(Error::dimension(format!(
            "n_t={n_t} does not match the {} selected columns",
            h_sub.ncols()
        )));
    }
    if h_sub.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("channel matrix has non-finite entries".into()));
    }
    let scale = snr.linear() / n_t as f64;
    let mut scratch = Vec::new();
    log2_det_identity_plus(n_t, scale, |a, b| gram_entry(h_sub, a, b), &mut scratch)
}

fn check_subset(realization: &ChannelRealization, subset: &AntennaSubset) -> Result<()> {
    if subset.n_tx() != realization.n_tx() {
        return Err(Error::dimension(format!(
            "subset over {} antennas, channel has {}",
            subset.n_tx(),
            realization.n_tx()
        )));
    }
    Ok(())
}

fn realization_capacity_unchecked(
    realization: &ChannelRealization,
    subset: &AntennaSubset,
    scale: f64,
    scratch: &mut Vec<Complex64>,
) -> Result<f64> {
    let pos = subset.positions();
    let mut total = 0.0;
    for i in 0..realization.n_subcarriers() {
        let g = realization.gram(i);
        total += log2_det_identity_plus(pos.len(), scale, |a, b| g[(pos[a], pos[b])], scratch)?;
    }
    Ok(total / realization.n_subcarriers() as f64)
}

/// Mean over subcarriers of [`subcarrier_capacity`] for one realization.
pub fn realization_capacity(
    realization: &ChannelRealization,
    subset: &AntennaSubset,
    snr: Snr,
) -> Result<f64> {
    check_subset(realization, subset)?;
    let scale = snr.linear() / subset.len() as f64;
    realization_capacity_unchecked(realization, subset, scale, &mut Vec::new())
}

/// Batch mean of [`realization_capacity`].
pub fn ergodic_capacity(
    batch: &RealizationBatch,
    subset: &AntennaSubset,
    snr: Snr,
) -> Result<CapacityEstimate> {
    if batch.is_empty() {
        return Err(Error::config("cannot average over an empty batch"));
    }
    if subset.n_tx() != batch.config().n_tx {
        return Err(Error::dimension(format!(
            "subset over {} antennas, batch has {}",
            subset.n_tx(),
            batch.config().n_tx
        )));
    }
    let scale = snr.linear() / subset.len() as f64;
    let mut scratch = Vec::with_capacity(subset.len() * subset.len());
    let mut total = 0.0;
    for r in batch.realizations() {
        total += realization_capacity_unchecked(r, subset, scale, &mut scratch)?;
    }
    Ok(CapacityEstimate {
        bits_per_s_per_hz: total / batch.len() as f64,
        n_realizations: batch.len(),
        subset: subset.clone(),
        snr,
    })
}

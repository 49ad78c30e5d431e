//! Seeded synthetic populations with group-shifted score distributions.
//!
//! Each item draws one value per attribute from the share distribution,
//! then a score from a normal whose location is the base plus the drawn
//! values' offsets, truncated at zero. Optional pairwise multipliers skew
//! value co-occurrence across attributes.

use anyhow::{bail, Context, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use fairsel_core::{AttributeSchema, RawRow};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupProfile {
    /// Score location before group offsets.
    pub base_location: f64,
    /// Score spread before group contributions.
    pub base_spread: f64,
    pub attributes: Vec<AttributeProfile>,
    /// Optional co-occurrence multipliers between values of different
    /// attributes: drawing `first` scales the share of `second`.
    #[serde(default)]
    pub pair_multipliers: Vec<PairMultiplier>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub name: String,
    pub values: Vec<ValueProfile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueProfile {
    pub name: String,
    /// Population share within the attribute; shares sum to 1.
    pub share: f64,
    /// Additive shift of the score location.
    #[serde(default)]
    pub location: f64,
    /// Additive widening of the score spread.
    #[serde(default)]
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairMultiplier {
    pub first: String,
    pub second: String,
    pub multiplier: f64,
}

impl GroupProfile {
    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            bail!("profile needs at least one attribute");
        }
        if !(self.base_spread > 0.0) {
            bail!("base spread must be positive");
        }
        for attr in &self.attributes {
            let total: f64 = attr.values.iter().map(|v| v.share).sum();
            if (total - 1.0).abs() > 1e-9 {
                bail!("shares of `{}` sum to {total}, expected 1", attr.name);
            }
            for v in &attr.values {
                if v.share < 0.0 {
                    bail!("negative share for `{}`", v.name);
                }
                if v.spread < 0.0 {
                    bail!("negative spread for `{}`", v.name);
                }
            }
        }
        for pm in &self.pair_multipliers {
            if !(pm.multiplier > 0.0) {
                bail!("multiplier for ({}, {}) must be positive", pm.first, pm.second);
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<AttributeSchema> {
        let parts: Vec<(String, Vec<String>)> = self
            .attributes
            .iter()
            .map(|a| {
                (
                    a.name.clone(),
                    a.values.iter().map(|v| v.name.clone()).collect(),
                )
            })
            .collect();
        AttributeSchema::from_parts(parts).map_err(|e| anyhow::anyhow!("invalid profile: {e}"))
    }
}

/// Generate `n` rows, deterministic under (profile, n, seed).
pub fn generate(profile: &GroupProfile, n: usize, seed: u64) -> Result<Vec<RawRow>> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    profile.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let width = (n.max(2) - 1).to_string().len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut labels: Vec<String> = Vec::with_capacity(profile.attributes.len());
        let mut location = profile.base_location;
        let mut spread = profile.base_spread;
        for attr in &profile.attributes {
            // Shares, skewed by multipliers against already-drawn labels.
            let weights: Vec<f64> = attr
                .values
                .iter()
                .map(|v| {
                    let mut w = v.share;
                    for pm in &profile.pair_multipliers {
                        if pm.second == v.name && labels.iter().any(|l| l == &pm.first) {
                            w *= pm.multiplier;
                        }
                    }
                    w
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let mut draw = rng.gen_range(0.0..total);
            let mut chosen = attr.values.len() - 1;
            for (j, w) in weights.iter().enumerate() {
                if draw < *w {
                    chosen = j;
                    break;
                }
                draw -= w;
            }
            let value = &attr.values[chosen];
            location += value.location;
            spread += value.spread;
            labels.push(value.name.clone());
        }
        let normal = Normal::new(location, spread).context("bad score distribution")?;
        let mut score = normal.sample(&mut rng);
        let mut tries = 0;
        while score <= 0.0 && tries < 1000 {
            score = normal.sample(&mut rng);
            tries += 1;
        }
        if score <= 0.0 {
            score = 0.01;
        }
        rows.push(RawRow {
            id: format!("p{i:0width$}"),
            score: format!("{score:.2}"),
            labels,
        });
    }
    Ok(rows)
}

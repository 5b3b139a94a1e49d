//! Deterministic synthetic data. The generator is specified exactly (see the
//! README) so other implementations can reproduce the same files.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Event, Item, UncertainDatabase, UncertainSequence, WeightTable};

use super::spmf::PreciseSequence;

/// xorshift64* seeded through splitmix64, with Box-Muller normals.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
    spare: Option<f64>,
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => 0x9E37_79B9_7F4A_7C15,
            s => s,
        };
        Rng { state, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }

    /// Standard normal; draws come in pairs and the second is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenConfig {
    pub prob_mean: f64,
    pub prob_sd: f64,
    pub wgt_mean: f64,
    pub wgt_sd: f64,
    pub seed: u64,
    pub prob_range: (f64, f64),
    pub wgt_range: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            prob_mean: 0.5,
            prob_sd: 0.25,
            wgt_mean: 0.5,
            wgt_sd: 0.125,
            seed: 0,
            prob_range: (0.01, 1.0),
            wgt_range: (0.05, 1.0),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [("prob_sd", self.prob_sd), ("wgt_sd", self.wgt_sd)] {
            if !(sd >= 0.0 && sd.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} {sd} must be >= 0")));
            }
        }
        for (name, mean) in [("prob_mean", self.prob_mean), ("wgt_mean", self.wgt_mean)] {
            if !mean.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} {mean} must be finite"
                )));
            }
        }
        for (name, (lo, hi)) in [("probability", self.prob_range), ("weight", self.wgt_range)] {
            if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} range [{lo}, {hi}] must lie within (0,1]"
                )));
            }
        }
        Ok(())
    }
}

fn draw(rng: &mut Rng, mean: f64, sd: f64, (lo, hi): (f64, f64)) -> f64 {
    let v = (mean + sd * rng.normal()).clamp(lo, hi);
    ((v * 1e4).round() / 1e4).clamp(lo, hi)
}

/// Attaches probabilities and weights to certain sequences.
///
/// Probabilities are drawn first, one per item occurrence in file order (items
/// ascending within an itemset), then one weight per distinct item in item
/// order. Values are clamped to their range and rounded to 4 decimals.
pub fn generate(
    precise: &[PreciseSequence],
    cfg: &GenConfig,
) -> Result<(UncertainDatabase, WeightTable)> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let mut alphabet = BTreeSet::new();
    let mut sequences = Vec::with_capacity(precise.len());
    for (idx, seq) in precise.iter().enumerate() {
        let mut events = Vec::with_capacity(seq.len());
        for itemset in seq {
            let mut items = itemset.clone();
            items.sort();
            items.dedup();
            let entries: Vec<(Item, f64)> = items
                .into_iter()
                .map(|item| {
                    (
                        item,
                        draw(&mut rng, cfg.prob_mean, cfg.prob_sd, cfg.prob_range),
                    )
                })
                .collect();
            alphabet.extend(entries.iter().map(|(i, _)| *i));
            events.push(Event::new(entries)?);
        }
        sequences.push(UncertainSequence::new(idx as u64 + 1, events)?);
    }
    let mut weights = WeightTable::new();
    for item in alphabet {
        weights.insert(
            item,
            draw(&mut rng, cfg.wgt_mean, cfg.wgt_sd, cfg.wgt_range),
        )?;
    }
    Ok((UncertainDatabase::new(sequences), weights))
}

/// Item names for an alphabet of `size`: letters when they suffice, else
/// zero-padded `i` numbers so name order equals numeric order.
fn alphabet_names(size: usize) -> Result<Vec<Item>> {
    if size <= 26 {
        (0..size)
            .map(|k| Item::new(&((b'a' + k as u8) as char).to_string()))
            .collect()
    } else {
        let width = size.to_string().len();
        (0..size)
            .map(|k| Item::new(&format!("i{k:0width$}")))
            .collect()
    }
}

/// Random certain sequences: `count` sequences of 1..=`max_events` events,
/// each event holding 1..=min(3, `alphabet`) distinct items.
pub fn synthetic(
    count: usize,
    max_events: usize,
    alphabet: usize,
    seed: u64,
) -> Result<Vec<PreciseSequence>> {
    if max_events == 0 || alphabet == 0 {
        return Err(Error::InvalidParams(
            "synthetic data needs at least one event and one item".into(),
        ));
    }
    let names = alphabet_names(alphabet)?;
    let mut rng = Rng::new(seed ^ 0xA5A5_A5A5_A5A5_A5A5);
    let per_event = alphabet.min(3);
    Ok((0..count)
        .map(|_| {
            let len = 1 + rng.below(max_events);
            (0..len)
                .map(|_| {
                    let size = 1 + rng.below(per_event);
                    let mut chosen = BTreeSet::new();
                    while chosen.len() < size {
                        chosen.insert(names[rng.below(alphabet)]);
                    }
                    chosen.into_iter().collect()
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_usf_string;

    #[test]
    fn same_seed_same_output() {
        let precise = synthetic(20, 5, 6, 7).unwrap();
        assert_eq!(precise, synthetic(20, 5, 6, 7).unwrap());
        let cfg = GenConfig {
            seed: 11,
            ..GenConfig::default()
        };
        let (a, wa) = generate(&precise, &cfg).unwrap();
        let (b, wb) = generate(&precise, &cfg).unwrap();
        assert_eq!(write_usf_string(&a), write_usf_string(&b));
        assert_eq!(wa, wb);
        let (c, _) = generate(&precise, &GenConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_sd_gives_the_mean() {
        let precise = synthetic(5, 4, 6, 1).unwrap();
        let cfg = GenConfig {
            prob_sd: 0.0,
            wgt_sd: 0.0,
            ..GenConfig::default()
        };
        let (db, w) = generate(&precise, &cfg).unwrap();
        assert!(db
            .iter()
            .flat_map(|s| s.events())
            .flat_map(|e| e.iter())
            .all(|(_, p)| p == 0.5));
        assert!(w.iter().all(|(_, x)| x == 0.5));
    }

    #[test]
    fn out_of_range_draws_clamp() {
        let precise = synthetic(5, 4, 6, 1).unwrap();
        let cfg = GenConfig {
            prob_mean: 5.0,
            prob_sd: 0.0,
            wgt_mean: -5.0,
            wgt_sd: 0.0,
            ..GenConfig::default()
        };
        let (db, w) = generate(&precise, &cfg).unwrap();
        assert!(db
            .iter()
            .flat_map(|s| s.events())
            .flat_map(|e| e.iter())
            .all(|(_, p)| p == 1.0));
        assert!(w.iter().all(|(_, x)| x == 0.05));
    }

    #[test]
    fn synthetic_shape() {
        let precise = synthetic(10, 5, 6, 3).unwrap();
        assert_eq!(precise.len(), 10);
        let mut items = BTreeSet::new();
        for seq in &precise {
            assert!((1..=5).contains(&seq.len()));
            for set in seq {
                items.extend(set.iter().copied());
            }
        }
        assert!(items.len() <= 6);
        assert!(synthetic(1, 0, 3, 0).is_err());
    }

    #[test]
    fn invalid_config() {
        assert!(GenConfig {
            prob_sd: -1.0,
            ..GenConfig::default()
        }
        .validate()
        .is_err());
        assert!(GenConfig {
            wgt_range: (0.0, 1.0),
            ..GenConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn normals_have_plausible_moments() {
        let mut rng = Rng::new(42);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05);
        assert!((var - 1.0).abs() < 0.05);
    }
}

//! A simulated analyst that answers from a gold-standard ranking and
//! reverses each answer independently with a fixed probability.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elicitation::{AnalystResponse, ComparisonQuery, Verdict};
use crate::error::{Error, Result};
use crate::model::{Ranking, RequirementId};

#[derive(Debug, Clone)]
pub struct SimulatedAnalyst {
    gold: Ranking,
    positions: HashMap<RequirementId, usize>,
    error_rate: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl SimulatedAnalyst {
    pub fn new(gold: Ranking, error_rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&error_rate) {
            return Err(Error::Validation(vec![crate::Issue::new(
                "error_rate",
                format!("{error_rate} is not a probability"),
            )]));
        }
        let positions = gold.order().iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            gold,
            positions,
            error_rate,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn gold(&self) -> &Ranking {
        &self.gold
    }

    pub fn error_rate(&self) -> f64 {
        self.error_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Never undecided. Consumes one draw from the stream per call.
    pub fn answer(&mut self, query: &ComparisonQuery) -> Result<AnalystResponse> {
        let pair = &query.pair;
        let lookup = |id: &RequirementId| {
            self.positions
                .get(id)
                .copied()
                .ok_or_else(|| Error::UnknownRequirement(id.clone()))
        };
        let truth = if lookup(pair.first())? < lookup(pair.second())? {
            Verdict::FirstPrecedes
        } else {
            Verdict::SecondPrecedes
        };
        let draw: f64 = self.rng.random();
        let verdict = if draw < self.error_rate { truth.flipped() } else { truth };
        Ok(AnalystResponse {
            pair: pair.clone(),
            verdict,
        })
    }
}

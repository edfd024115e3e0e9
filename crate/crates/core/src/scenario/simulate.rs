//! Runs the eight lifecycle modules for every claim.

use std::sync::Arc;

use rayon::prelude::*;

use crate::aggregation::{cap_out_of_bounds, ClaimRecord, PaymentRecord};
use crate::error::{Error, Result};
use crate::event_times::DelayModel;
use crate::frequency_severity::{simulate_claim_counts, simulate_occurrence_times, FrequencyModel, SeverityModel};
use crate::inflation::InflationModel;
use crate::payment_plan::{
    build_payment_plan, payment_epochs, PaymentCountModel, PaymentSizeModel, PaymentTimingModel, PlanModels,
};
use crate::samplers::{ModuleId, RngStream, SampleContext, StreamKey};
use crate::time_model::{development_period_of, payment_period_of, TimeUnit};

use super::config::{MonetaryUnit, OutputConfig, ScenarioConfig};
use super::registry::ModelRegistry;

/// A scenario with every module instantiated. Fields are public so that
/// individual modules can be swapped for custom implementations.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub periods: u32,
    pub unit: TimeUnit,
    pub reference_claim_size: f64,
    pub master_seed: u64,
    pub frequency: Arc<dyn FrequencyModel>,
    pub severity: Arc<dyn SeverityModel>,
    pub notification: Arc<dyn DelayModel>,
    pub closure: Arc<dyn DelayModel>,
    pub payment_count: Arc<dyn PaymentCountModel>,
    pub payment_size: Arc<dyn PaymentSizeModel>,
    pub payment_timing: Arc<dyn PaymentTimingModel>,
    pub inflation: InflationModel,
    pub output: OutputConfig,
}

/// Simulated claims and payments, in claim-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub claims: Vec<ClaimRecord>,
    pub payments: Vec<PaymentRecord>,
}

impl Dataset {
    /// Payments grouped per claim, aligned with `claims`.
    pub fn payments_by_claim(&self) -> Vec<&[PaymentRecord]> {
        let mut out = Vec::with_capacity(self.claims.len());
        let mut rest = self.payments.as_slice();
        for c in &self.claims {
            let n = rest.iter().take_while(|p| p.claim_id == c.claim_id).count();
            let (head, tail) = rest.split_at(n);
            out.push(head);
            rest = tail;
        }
        out
    }
}

struct ClaimSlot {
    id: u64,
    period: u32,
    index: u32,
    occurrence_time: f64,
}

impl Scenario {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        ModelRegistry::builtin().build(config)
    }

    /// Simulate with the configured seed or `seed`; `threads = None` uses
    /// the global pool. Output does not depend on the thread count.
    pub fn simulate(&self, seed: Option<u64>, threads: Option<usize>) -> Result<Dataset> {
        let seed = seed.unwrap_or(self.master_seed);
        let counts = simulate_claim_counts(self.frequency.as_ref(), self.unit, seed)?;
        let mut slots = Vec::with_capacity(counts.iter().map(|&n| n as usize).sum());
        for (i, &n) in (1u32..).zip(&counts) {
            let mut rng = RngStream::new(seed, StreamKey::period(i, ModuleId::OccurrenceTime));
            for (r, u) in (1u32..).zip(simulate_occurrence_times(i, n, &mut rng)) {
                slots.push(ClaimSlot {
                    id: slots.len() as u64 + 1,
                    period: i,
                    index: r,
                    occurrence_time: u,
                });
            }
        }
        let run = || -> Result<Vec<(ClaimRecord, Vec<PaymentRecord>)>> {
            slots
                .par_iter()
                .map(|slot| self.simulate_claim(seed, slot).map_err(|e| e.for_claim(slot.id.to_string())))
                .collect()
        };
        let per_claim = match threads {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?
                .install(run)?,
            None => run()?,
        };
        let mut claims = Vec::with_capacity(per_claim.len());
        let mut payments = Vec::new();
        for (c, ps) in per_claim {
            claims.push(c);
            payments.extend(ps);
        }
        Ok(Dataset { claims, payments })
    }

    fn simulate_claim(&self, seed: u64, slot: &ClaimSlot) -> Result<(ClaimRecord, Vec<PaymentRecord>)> {
        let stream = |m| RngStream::new(seed, StreamKey::claim(slot.period, slot.index, m));
        let i = slot.period;
        let ctx = SampleContext {
            occurrence_period: i,
            claim_size: None,
        };
        let s = self.severity.claim_size(&ctx, &mut stream(ModuleId::ClaimSize))?;
        let v = self.notification.sample(i, s, &mut stream(ModuleId::Notification))?;
        let w = self.closure.sample(i, s, &mut stream(ModuleId::Settlement))?;
        let m = self.payment_count.sample(s, &mut stream(ModuleId::PaymentCount))?;
        let plan = build_payment_plan(
            &PlanModels {
                sizes: self.payment_size.as_ref(),
                timing: self.payment_timing.as_ref(),
            },
            s,
            m,
            w,
            self.unit,
            &mut stream(ModuleId::PaymentSize),
            &mut stream(ModuleId::PaymentTiming),
        )?;
        let scale = match self.output.monetary_unit {
            MonetaryUnit::Currency => self.reference_claim_size,
            MonetaryUnit::ReferenceMultiples => 1.0,
        };
        let epochs = payment_epochs(slot.occurrence_time, v, &plan.delays);
        let payments = (1u32..)
            .zip(epochs.iter().zip(plan.delays.iter().zip(&plan.amounts)))
            .map(|(k, (&t, (&d, &x)))| {
                let capped = cap_out_of_bounds(t, i, self.periods);
                let inflated = self.inflation.inflate_payment(x, capped, i, s)?;
                Ok(PaymentRecord {
                    claim_id: slot.id,
                    payment_no: k,
                    inter_partial_delay: d,
                    epoch: t,
                    capped_epoch: capped,
                    payment_period: payment_period_of(capped)?,
                    development_period: development_period_of(capped, i)?,
                    amount_constant: x * scale,
                    amount_inflated: inflated * scale,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let claim = ClaimRecord {
            claim_id: slot.id,
            occurrence_period: i,
            occurrence_time: slot.occurrence_time,
            claim_size: s * scale,
            notification_delay: v,
            settlement_delay: w,
            payment_count: m,
        };
        Ok((claim, payments))
    }
}

/// Build the scenario from `config` and simulate it.
pub fn run_simulation(config: &ScenarioConfig, seed: Option<u64>, threads: Option<usize>) -> Result<Dataset> {
    Scenario::from_config(config)?.simulate(seed, threads)
}

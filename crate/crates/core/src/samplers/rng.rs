//! Counter-keyed random streams.
//!
//! Every random quantity in a simulation is drawn from a stream identified by
//! `(master_seed, occurrence_period, claim_index, module)`. The four words
//! are laid out little-endian as the 256-bit ChaCha key:
//!
//! | bytes  | field               |
//! |--------|---------------------|
//! | 0..8   | master seed         |
//! | 8..16  | occurrence period   |
//! | 16..24 | claim index (0 for period-level draws) |
//! | 24..32 | module id           |
//!
//! The draw counter is the position within that stream. A stream's output
//! depends only on its key, so claims can be simulated on any number of
//! threads in any order, and re-plugging one module leaves every other
//! module's draws untouched.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lifecycle stage that owns a stream. Discriminants are part of the key
/// layout and must not be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum ModuleId {
    ClaimCount = 1,
    OccurrenceTime = 2,
    ClaimSize = 3,
    Notification = 4,
    Settlement = 5,
    PaymentCount = 6,
    PaymentSize = 7,
    PaymentTiming = 8,
    /// Free for user-supplied hooks that need a private stream.
    Custom = 99,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub occurrence_period: u32,
    pub claim_index: u32,
    pub module: ModuleId,
}

impl StreamKey {
    pub fn period(occurrence_period: u32, module: ModuleId) -> Self {
        Self {
            occurrence_period,
            claim_index: 0,
            module,
        }
    }

    pub fn claim(occurrence_period: u32, claim_index: u32, module: ModuleId) -> Self {
        Self {
            occurrence_period,
            claim_index,
            module,
        }
    }
}

const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    key: StreamKey,
    inner: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, key: StreamKey) -> Self {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&u64::from(key.occurrence_period).to_le_bytes());
        seed[16..24].copy_from_slice(&u64::from(key.claim_index).to_le_bytes());
        seed[24..32].copy_from_slice(&(key.module as u64).to_le_bytes());
        Self {
            key,
            inner: ChaCha8Rng::from_seed(seed),
            draws: 0,
        }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Number of 64-bit words consumed so far.
    pub fn draw_counter(&self) -> u64 {
        self.draws
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        1.0 - (self.next_u64() >> 11) as f64 * UNIT_53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn open_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * UNIT_53
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

//! Portable 64-bit linear congruential generator.
//!
//! Used where goldens must be reproducible from any language (the abusive-word
//! mask digits). Shuffles and sampling elsewhere use `rand_chacha`.

const MULTIPLIER: u64 = 3_935_559_000_370_003_845;
const INCREMENT: u64 = 2_691_343_689_449_507_681;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Next decimal digit, taken from the high half of the state (the low
    /// bits of a power-of-two LCG have short periods).
    pub fn next_digit(&mut self) -> u8 {
        ((self.next_u64() >> 32) % 10) as u8
    }
}

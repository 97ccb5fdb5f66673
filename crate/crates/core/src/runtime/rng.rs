/// 64-bit linear congruential generator (Knuth's MMIX constants) emitting
/// the high 32 bits of each state. Chosen so that traces can be reproduced
/// by other implementations from the seed alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 32) as u32
    }

    /// Index in `0..len`, by plain modulo.
    pub fn index(&mut self, len: usize) -> usize {
        assert!(len > 0);
        self.next_u32() as usize % len
    }
}

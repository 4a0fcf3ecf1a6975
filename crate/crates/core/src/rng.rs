//! Counter-based random substreams.
//!
//! Every realization draws from its own generator, keyed by the master seed, a
//! purpose tag and two indices. Results therefore do not depend on how work is
//! split between threads.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// Purpose tags keep substreams of different consumers apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Realization = 1,
    Probe = 2,
    TailSample = 3,
    Exceedance = 4,
    Distances = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, stream, outer, inner)`.
pub fn substream(seed: u64, stream: Stream, outer: u64, inner: u64) -> Pcg64Mcg {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ stream as u64);
    h = splitmix64(h ^ outer);
    let lo = splitmix64(h ^ inner);
    let hi = splitmix64(lo ^ 0xD1B5_4A32_D192_ED03);
    Pcg64Mcg::new((u128::from(hi) << 64) | u128::from(lo) | 1)
}

/// Plain seeded generator, for one-off draws.
pub fn seeded(seed: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(seed)
}

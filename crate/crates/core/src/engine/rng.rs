//! Per-path random streams. Each path owns ChaCha streams keyed by the
//! master seed and a purpose tag, with the path index as stream number, so a
//! path's draws do not depend on how paths are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Noise = 1,
    Refinement = 2,
    Signal = 3,
    InitialSignal = 4,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, purpose: Purpose) -> [u8; 32] {
    let mut state = seed ^ (purpose as u64).wrapping_mul(0xd6e8_feb8_6659_fd93);
    let mut out = [0u8; 32];
    for chunk in out.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    out
}

pub fn path_rng(seed: u64, purpose: Purpose, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, purpose));
    rng.set_stream(path_index);
    rng
}

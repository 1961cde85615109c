use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Portable seeded generator. Sub-streams are derived from a base seed and a
/// purpose tag so that unrelated consumers never share a stream.
pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

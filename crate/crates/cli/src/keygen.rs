//! Random LFSR session keys for a message length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oor_core::gf2_lfsr::{random_primitive, DegreeRange, LfsrSpec};
use oor_core::onion_crypto::{perfect_secrecy_check, SecrecyParams};
use oor_core::BitString;

use crate::error::CliError;
use crate::table::Table;

/// `count` keys with pairwise distinct nonzero keystreams of
/// `message_bits` bits.
pub fn keygen(
    message_bits: u64,
    count: usize,
    degree_span: u32,
    seed: u64,
) -> Result<Table, CliError> {
    if message_bits == 0 || count == 0 {
        return Err(CliError::Input(
            "message bits and key count must be positive".into(),
        ));
    }
    let range = DegreeRange::for_message(message_bits, degree_span)?;
    if message_bits < 64 && (1u64 << message_bits) - 1 < count as u64 {
        return Err(CliError::Input(format!(
            "{message_bits}-bit keys cannot hold {count} distinct nonzero keys"
        )));
    }
    let verdict = perfect_secrecy_check(&SecrecyParams {
        message_length: message_bits,
        degree_range: range,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut issued: Vec<BitString> = Vec::with_capacity(count);
    let mut t = Table::new(&[
        "key",
        "degree",
        "polynomial",
        "seed",
        "secrecy",
        "keystream",
    ]);
    while issued.len() < count {
        let g = rng.gen_range(range.g_min()..=range.g_max());
        let spec = LfsrSpec::random_seed(random_primitive(g, &mut rng)?, &mut rng);
        let stream = spec.keystream(message_bits as usize);
        if stream.is_zero() || issued.contains(&stream) {
            continue;
        }
        t.push(vec![
            (issued.len() + 1).to_string(),
            g.to_string(),
            spec.polynomial().to_hex(),
            format!("{:#x}", spec.seed()),
            format!("{verdict:?}"),
            stream.to_hex(),
        ]);
        issued.push(stream);
    }
    Ok(t)
}

//! Hashed character-trigram embedder. Stable across platforms: the hash is
//! fixed (64-bit FNV-1a over UTF-8 bytes) and bucketing is `hash % dim`.

use unicode_normalization::UnicodeNormalization;

use super::EmbeddingVector;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Raw trigram bucket counts of the NFC form of `text`.
pub fn trigram_counts(text: &str, dim: usize) -> EmbeddingVector {
    let chars: Vec<char> = text.nfc().collect();
    let mut counts = vec![0.0f64; dim];
    let mut buf = [0u8; 12];
    for tri in chars.windows(3) {
        let mut len = 0;
        for c in tri {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        let bucket = (fnv1a64(&buf[..len]) % dim as u64) as usize;
        counts[bucket] += 1.0;
    }
    EmbeddingVector::new(counts).expect("counts are finite")
}

/// L2-normalized trigram counts. Texts under three scalars map to the zero
/// vector.
///
/// # Panics
///
/// If `dim` is zero.
pub fn embed_deterministic(text: &str, dim: usize) -> EmbeddingVector {
    assert!(dim > 0, "embedding dimension must be positive");
    trigram_counts(text, dim).normalized()
}

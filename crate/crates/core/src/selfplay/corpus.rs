use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hp::{HpSequence, Residue};

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("length range {0}..={1} is empty or below 2")]
    Length(usize, usize),
    #[error("H-fraction range {0}..={1} must satisfy 0 <= low <= high <= 1")]
    Fraction(f64, f64),
}

/// Seeded random HP sequences. Each sequence draws its length uniformly from
/// `lengths` and its H-fraction uniformly from `h_fraction`, then marks each
/// residue H with that probability.
pub fn generate_corpus(
    count: usize,
    lengths: (usize, usize),
    h_fraction: (f64, f64),
    seed: u64,
) -> Result<Vec<HpSequence>, CorpusError> {
    let (lo, hi) = lengths;
    if lo < 2 || lo > hi {
        return Err(CorpusError::Length(lo, hi));
    }
    let (flo, fhi) = h_fraction;
    if !(0.0..=1.0).contains(&flo) || !(0.0..=1.0).contains(&fhi) || flo > fhi {
        return Err(CorpusError::Fraction(flo, fhi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.random_range(lo..=hi);
        let frac = if flo == fhi { flo } else { rng.random_range(flo..=fhi) };
        let residues = (0..len)
            .map(|_| if rng.random_bool(frac) { Residue::H } else { Residue::P })
            .collect();
        out.push(HpSequence::new(residues).expect("length >= 2"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_determinism() {
        let a = generate_corpus(10, (20, 20), (0.5, 0.5), 7).unwrap();
        let b = generate_corpus(10, (20, 20), (0.5, 0.5), 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_corpus(10, (20, 20), (0.5, 0.5), 8).unwrap());
    }

    #[test]
    fn all_h_and_lengths() {
        let all_h = generate_corpus(5, (4, 9), (1.0, 1.0), 1).unwrap();
        assert!(all_h.iter().all(|s| s.h_count() == s.len()));
        let spread = generate_corpus(200, (12, 16), (0.3, 0.7), 2).unwrap();
        assert!(spread.iter().all(|s| (12..=16).contains(&s.len())));
        assert!(spread.iter().any(|s| s.len() == 12));
        assert!(spread.iter().any(|s| s.len() == 16));
    }

    #[test]
    fn degenerate_ranges() {
        assert_eq!(generate_corpus(1, (1, 5), (0.5, 0.5), 0).unwrap_err(), CorpusError::Length(1, 5));
        assert_eq!(generate_corpus(1, (9, 5), (0.5, 0.5), 0).unwrap_err(), CorpusError::Length(9, 5));
        assert!(generate_corpus(1, (5, 9), (0.6, 0.5), 0).is_err());
        assert!(generate_corpus(1, (5, 9), (0.0, 1.5), 0).is_err());
    }
}

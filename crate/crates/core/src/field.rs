//! Exact arithmetic in prime fields GF(p).
//!
//! Elements are `u16` values in `[0, p)`. All arithmetic routes through
//! `u32`/`u64` intermediates, so no operation can overflow for p <= 65521
//! (the largest 16-bit prime).

use std::fmt;

/// Largest prime that fits the element representation.
pub const MAX_PRIME: u32 = 65521;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// The requested modulus is not a prime in `[2, 65521]`.
    NotPrime(u32),
    /// Zero has no multiplicative inverse.
    ZeroInverse,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{p} is not a prime in [2, {MAX_PRIME}]"),
            FieldError::ZeroInverse => write!(f, "zero element has no inverse"),
        }
    }
}

impl std::error::Error for FieldError {}

/// A prime field GF(p), 2 <= p <= 65521.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u16,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<FieldSpec, FieldError> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec { p: p as u16 })
    }

    /// GF(2), the field every graph application uses.
    pub fn gf2() -> FieldSpec {
        FieldSpec { p: 2 }
    }

    #[inline]
    pub fn modulus(&self) -> u16 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        let s = a as u32 + b as u32;
        let p = self.p as u32;
        (if s >= p { s - p } else { s }) as u16
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        let p = self.p as u32;
        ((a as u32 + p - b as u32) % p) as u16
    }

    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        ((a as u32 * b as u32) % self.p as u32) as u16
    }

    /// Multiplicative inverse, by Fermat: a^(p-2) mod p.
    pub fn inv(&self, a: u16) -> Result<u16, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.p as u32 - 2))
    }

    pub fn pow(&self, a: u16, mut e: u32) -> u16 {
        let p = self.p as u64;
        let mut base = a as u64 % p;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u16
    }

    /// Reduce an arbitrary integer into `[0, p)`.
    #[inline]
    pub fn reduce(&self, a: i64) -> u16 {
        let p = self.p as i64;
        (((a % p) + p) % p) as u16
    }
}

/// Standalone inverse, mirroring [`FieldSpec::inv`].
pub fn elem_inverse(a: u16, spec: FieldSpec) -> Result<u16, FieldError> {
    spec.inv(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_moduli() {
        for bad in [0u32, 1, 4, 6, 9, 15, 65522, 70000] {
            assert!(FieldSpec::new(bad).is_err(), "{bad} accepted");
        }
        for good in [2u32, 3, 5, 7, 11, 13, 65521] {
            assert!(FieldSpec::new(good).is_ok(), "{good} rejected");
        }
    }

    #[test]
    fn inverse_examples() {
        let f2 = FieldSpec::new(2).unwrap();
        assert_eq!(elem_inverse(1, f2).unwrap(), 1);
        let f3 = FieldSpec::new(3).unwrap();
        assert_eq!(elem_inverse(2, f3).unwrap(), 2);
        // exhaustive search over GF(7): 5*3 = 15 = 2*7+1
        let f7 = FieldSpec::new(7).unwrap();
        let mut found = None;
        for b in 1..7u16 {
            if f7.mul(5, b) == 1 {
                found = Some(b);
            }
        }
        assert_eq!(found, Some(3));
        assert_eq!(elem_inverse(5, f7).unwrap(), 3);
        assert!(elem_inverse(0, f7).is_err());
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for p in [2u32, 3, 5, 7, 11, 13, 17] {
            let f = FieldSpec::new(p).unwrap();
            for a in 1..p as u16 {
                let b = f.inv(a).unwrap();
                assert_eq!(f.mul(a, b), 1, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for p in [2u32, 3, 5] {
            let f = FieldSpec::new(p).unwrap();
            let n = p as u16;
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.add(a, f.neg(a)), 0);
                    assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
                    for c in 0..n {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }
}

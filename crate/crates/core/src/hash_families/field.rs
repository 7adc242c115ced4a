//! Arithmetic in binary extension fields GF(2^m), 1 <= m <= 63.
//!
//! Elements are stored as the low `m` bits of a `u64`, bit `i` holding the
//! coefficient of `x^i`. Each degree uses a fixed low-weight irreducible
//! modulus from [`MODULI`]; for `m <= 16` that modulus is also primitive, so
//! multiplication goes through log/antilog tables built at construction.

use std::sync::Arc;

use super::HashError;

/// Lowest-weight irreducible polynomial per degree (index = degree), full
/// polynomial including the leading term. Trinomials where one exists,
/// pentanomials otherwise; primitive for every degree up to 16.
pub const MODULI: [u64; 64] = [
    0,
    0x3,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11d,
    0x211,
    0x409,
    0x805,
    0x1053,
    0x201b,
    0x402b,
    0x8003,
    0x1002d,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x400001b,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008d,
    0x200000401,
    0x400000081,
    0x800000005,
    0x1000000201,
    0x2000000053,
    0x4000000063,
    0x8000000011,
    0x10000000039,
    0x20000000009,
    0x40000000081,
    0x80000000059,
    0x100000000021,
    0x20000000001b,
    0x400000000003,
    0x800000000021,
    0x100000000002d,
    0x2000000000201,
    0x400000000001d,
    0x800000000004b,
    0x10000000000009,
    0x20000000000047,
    0x40000000000201,
    0x80000000000081,
    0x100000000000095,
    0x200000000000011,
    0x400000000080001,
    0x800000000000095,
    0x1000000000000003,
    0x2000000000000027,
    0x4000000020000001,
    0x8000000000000003,
];

pub const MAX_DEGREE: u32 = 63;
const TABLE_MAX_DEGREE: u32 = 16;

#[derive(Debug)]
struct LogTables {
    // exp has length 2 * (order) so that log a + log b never needs a reduction
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// GF(2^m) with one of the fixed moduli.
#[derive(Debug, Clone)]
pub struct BinaryField {
    degree: u32,
    modulus: u64,
    tables: Option<Arc<LogTables>>,
}

impl PartialEq for BinaryField {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.modulus == other.modulus
    }
}
impl Eq for BinaryField {}

impl BinaryField {
    pub fn new(degree: u32) -> Result<Self, HashError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(HashError::Parameter(format!(
                "field degree {degree} outside supported range 1..={MAX_DEGREE}"
            )));
        }
        let modulus = MODULI[degree as usize];
        let mut field = BinaryField {
            degree,
            modulus,
            tables: None,
        };
        if degree <= TABLE_MAX_DEGREE {
            field.tables = field.build_tables().map(Arc::new);
        }
        Ok(field)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Full modulus polynomial, leading term included.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1u64 << self.degree
    }

    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn contains(&self, a: u64) -> bool {
        a & !self.mask() == 0
    }

    fn build_tables(&self) -> Option<LogTables> {
        let group = (self.order() - 1) as usize;
        let mut exp = vec![0u32; 2 * group.max(1)];
        let mut log = vec![0u32; self.order() as usize];
        let mut a = 1u64;
        for (i, slot) in exp.iter_mut().take(group).enumerate() {
            if i > 0 && a == 1 {
                // x does not generate the multiplicative group
                return None;
            }
            *slot = a as u32;
            log[a as usize] = i as u32;
            a = self.mul_slow(a, 2);
        }
        if a != 1 {
            return None;
        }
        for i in group..2 * group {
            exp[i] = exp[i - group];
        }
        Some(LogTables { exp, log })
    }

    /// Shift-and-add multiplication with reduction; independent of the tables.
    pub fn mul_slow(&self, a: u64, b: u64) -> u64 {
        reduce(clmul(a, b), self.modulus, self.degree)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match &self.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[(t.log[a as usize] + t.log[b as usize]) as usize] as u64
                }
            }
            None => self.mul_slow(a, b),
        }
    }

    pub fn square(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    pub fn cube(&self, a: u64) -> u64 {
        self.mul(self.mul(a, a), a)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }
}

/// Carry-less product of two 64-bit polynomials.
pub fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let a = a as u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Reduce a carry-less product modulo an irreducible polynomial of `degree`.
pub fn reduce(mut v: u128, modulus: u64, degree: u32) -> u64 {
    let m = modulus as u128;
    let mut top = 127 - v.leading_zeros().min(127) as i32;
    while v != 0 && top >= degree as i32 {
        if (v >> top) & 1 == 1 {
            v ^= m << (top - degree as i32);
        }
        top -= 1;
    }
    v as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    // Ben-Or irreducibility over GF(2): gcd(x^(2^i) - x, f) = 1 for i <= deg/2.
    fn poly_mod(mut a: u128, b: u128) -> u128 {
        let db = 128 - b.leading_zeros();
        while a != 0 && 128 - a.leading_zeros() >= db {
            let shift = (128 - a.leading_zeros()) - db;
            a ^= b << shift;
        }
        a
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_mod(a, b);
            a = b;
            b = r;
        }
        a
    }

    fn is_irreducible(modulus: u64, degree: u32) -> bool {
        let mut t = 2u64;
        for _ in 1..=degree / 2 {
            t = reduce(clmul(t, t), modulus, degree);
            if poly_gcd(modulus as u128, (t ^ 2) as u128) != 1 {
                return false;
            }
        }
        true
    }

    #[test]
    fn moduli_are_irreducible() {
        for d in 1..=MAX_DEGREE {
            let f = MODULI[d as usize];
            assert_eq!(63 - f.leading_zeros(), d, "degree of modulus {d}");
            assert!(is_irreducible(f, d), "modulus for degree {d} is reducible");
        }
    }

    #[test]
    fn small_moduli_are_primitive() {
        for d in 1..=TABLE_MAX_DEGREE {
            let field = BinaryField::new(d).unwrap();
            assert!(field.has_tables(), "degree {d} modulus not primitive");
        }
    }

    #[test]
    fn table_and_slow_multiplication_agree() {
        for d in [2u32, 5, 8, 12, 16] {
            let f = BinaryField::new(d).unwrap();
            let mask = f.mask();
            let mut s = 0x9e37_79b9_7f4a_7c15u64;
            for _ in 0..2000 {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let a = (s >> 7) & mask;
                let b = (s >> 29) & mask;
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
    }

    #[test]
    fn field_axioms_gf256() {
        let f = BinaryField::new(8).unwrap();
        for a in 0..256u64 {
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
            if a != 0 {
                // a^(2^8 - 1) = 1
                assert_eq!(f.pow(a, 255), 1);
            }
        }
        // 0x02 * 0x87 under x^8+x^4+x^3+x^2+1
        assert_eq!(f.mul(0x02, 0x87), 0x13);
    }

    #[test]
    fn large_degree_fermat() {
        let f = BinaryField::new(61).unwrap();
        let a = 0x0123_4567_89ab_cdef & f.mask();
        // a^(2^61) = a
        let mut t = a;
        for _ in 0..61 {
            t = f.square(t);
        }
        assert_eq!(t, a);
    }

    #[test]
    fn rejects_bad_degree() {
        assert!(BinaryField::new(0).is_err());
        assert!(BinaryField::new(64).is_err());
    }
}

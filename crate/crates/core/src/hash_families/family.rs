use std::collections::HashMap;
use std::sync::Arc;

use super::small_bias::{ComposedSpace, KwiseLinearMap, SeedPoint, SmallBiasSpace};
use super::HashError;

/// Largest `n` for which a full lookup table is materialized.
const MAX_TABLE_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstructionKind {
    Derandomized,
    Matrix,
    ExplicitTable,
}

impl ConstructionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionKind::Derandomized => "derandomized",
            ConstructionKind::Matrix => "matrix",
            ConstructionKind::ExplicitTable => "explicit-table",
        }
    }
}

/// Parameters shared by every member of a derandomized family: the 4-wise
/// linear map over GF(2^n) and the small-bias seed space over GF(2^m).
#[derive(Debug, Clone, PartialEq)]
pub struct DerandomizedSpace {
    delta: f64,
    space: ComposedSpace,
}

/// Seeds for the two independent bit sequences; the member evaluates to
/// `2 * X_hi + X_lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedPair {
    pub hi: SeedPoint,
    pub lo: SeedPoint,
}

impl DerandomizedSpace {
    /// Seed bias `delta / 16` keeps every 4-variable marginal within L1
    /// distance `delta` of uniform, since `L1 <= (2^4 - 1) * bias`.
    pub fn new(n: u32, delta: f64) -> Result<Self, HashError> {
        if n < 2 {
            return Err(HashError::Parameter(format!("n = {n}; need n >= 2")));
        }
        if !(delta > 0.0 && delta < 0.125) {
            return Err(HashError::Parameter(format!(
                "delta = {delta}; covering needs 0 < delta < 1/8"
            )));
        }
        let map = KwiseLinearMap::new(n)?;
        let degree = SmallBiasSpace::degree_for_bias(map.row_len(), delta / 16.0)?;
        Self::with_degree(n, delta, degree)
    }

    /// Explicit seed-field degree; `delta` is recorded but not enforced.
    pub fn with_degree(n: u32, delta: f64, degree: u32) -> Result<Self, HashError> {
        if degree > 31 {
            return Err(HashError::Parameter(format!(
                "seed field degree {degree} gives more than 2^124 members"
            )));
        }
        let map = KwiseLinearMap::new(n)?;
        Ok(DerandomizedSpace {
            delta,
            space: ComposedSpace::new(map, degree)?,
        })
    }

    pub fn n(&self) -> u32 {
        self.space.n()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn composed(&self) -> &ComposedSpace {
        &self.space
    }

    pub fn seed_space(&self) -> &SmallBiasSpace {
        self.space.bits()
    }

    pub fn field_degree(&self) -> u32 {
        self.space.bits().degree()
    }

    /// Seeds per bit sequence, `2^(2m)`.
    pub fn seeds_per_sequence(&self) -> u128 {
        self.space.bits().point_count()
    }

    pub fn member_count(&self) -> u128 {
        self.seeds_per_sequence() * self.seeds_per_sequence()
    }

    pub fn member_index(&self, pair: SeedPair) -> u128 {
        let bits = self.seed_space();
        bits.point_index(pair.hi) * self.seeds_per_sequence() + bits.point_index(pair.lo)
    }

    pub fn seed_pair(&self, index: u128) -> SeedPair {
        let per = self.seeds_per_sequence();
        let bits = self.seed_space();
        SeedPair {
            hi: bits.point(index / per),
            lo: bits.point(index % per),
        }
    }

    /// The `t`-th seed in search order, an odd-multiplier affine bijection on
    /// the seed indices so that scans do not start on the degenerate `x = 0`
    /// seeds.
    pub(crate) fn seed_in_search_order(&self, t: u128) -> SeedPoint {
        let per = self.seeds_per_sequence();
        let mask = per - 1;
        let step = 0x9e37_79b9_7f4a_7c15_f39c_c060_5ced_c835u128 | 1;
        let idx = (t.wrapping_mul(step).wrapping_add(0x5851_f42d_4c95_7f2d)) & mask;
        self.seed_space().point(idx)
    }

    /// 4-bit pattern of one sequence on `rows` (bit k = variable k).
    #[inline]
    pub(crate) fn pattern(&self, seed: SeedPoint, rows: &[u128]) -> u8 {
        let mut p = 0u8;
        for (k, &row) in rows.iter().enumerate() {
            if self.space.variable_with_row(seed, row) {
                p |= 1 << k;
            }
        }
        p
    }

    /// For each of the 16 bit patterns on the four indices, a seed realizing it
    /// (or `None` if no seed does).
    pub fn realizing_seeds(&self, indices: &[u64; 4]) -> [Option<SeedPoint>; 16] {
        let rows: Vec<u128> = indices.iter().map(|&i| self.space.map().row(i)).collect();
        let mut found = [None; 16];
        let mut missing = 16;
        let total = self.seeds_per_sequence();
        let mut t = 0u128;
        while missing > 0 && t < total {
            let seed = self.seed_in_search_order(t);
            let p = self.pattern(seed, &rows) as usize;
            if found[p].is_none() {
                found[p] = Some(seed);
                missing -= 1;
            }
            t += 1;
        }
        found
    }

    /// A member realizing `targets[k]` at `indices[k]` for all four k.
    pub fn find_realization(&self, indices: &[u64; 4], targets: [u8; 4]) -> Option<SeedPair> {
        let seeds = self.realizing_seeds(indices);
        let mut hi = 0usize;
        let mut lo = 0usize;
        for (k, &t) in targets.iter().enumerate() {
            hi |= ((t >> 1 & 1) as usize) << k;
            lo |= ((t & 1) as usize) << k;
        }
        Some(SeedPair {
            hi: seeds[hi]?,
            lo: seeds[lo]?,
        })
    }

    /// A member mapping the four indices onto `{0,1,2,3}`. The high sequence
    /// must split them 2/2, and the low sequence must split each half.
    pub fn find_cover(&self, indices: &[u64; 4]) -> Option<SeedPair> {
        let rows: Vec<u128> = indices.iter().map(|&i| self.space.map().row(i)).collect();
        let total = self.seeds_per_sequence();
        let mut tried = [false; 16];
        let mut t = 0u128;
        while t < total {
            let hi = self.seed_in_search_order(t);
            t += 1;
            let p = self.pattern(hi, &rows);
            if p.count_ones() != 2 || tried[p as usize] || tried[(!p & 0xf) as usize] {
                continue;
            }
            tried[p as usize] = true;
            let ones = p;
            let zeros = !p & 0xf;
            let mut s = 0u128;
            while s < total {
                let lo = self.seed_in_search_order(s);
                s += 1;
                let q = self.pattern(lo, &rows);
                if (q & ones).count_ones() == 1 && (q & zeros).count_ones() == 1 {
                    return Some(SeedPair { hi, lo });
                }
            }
        }
        None
    }

    #[inline]
    pub fn eval(&self, pair: SeedPair, x: u64) -> u8 {
        let row = self.space.map().row(x);
        let hi = self.space.variable_with_row(pair.hi, row) as u8;
        let lo = self.space.variable_with_row(pair.lo, row) as u8;
        2 * hi + lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandomizedHash {
    pub space: Arc<DerandomizedSpace>,
    pub seeds: SeedPair,
}

/// Row `row` of the base-4 digit matrix over a labeled flat support.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHash {
    pub support: Arc<FlatLabeling>,
    pub row: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableHash {
    pub n: u32,
    pub table: Arc<[u8]>,
}

/// Support strings `s_0 .. s_{K-1}` and the inverse map outcome -> label.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatLabeling {
    pub(crate) n: u32,
    pub(crate) strings: Vec<u64>,
    pub(crate) labels: HashMap<u64, u64>,
    pub(crate) digits: u32,
}

impl FlatLabeling {
    pub fn strings(&self) -> &[u64] {
        &self.strings
    }
    pub fn digits(&self) -> u32 {
        self.digits
    }
}

/// Succinct description of one `h: {0..2^n - 1} -> {0,1,2,3}`.
#[derive(Debug, Clone, PartialEq)]
pub enum HashFunctionDescriptor {
    Derandomized(DerandomizedHash),
    Matrix(MatrixHash),
    Table(TableHash),
}

impl HashFunctionDescriptor {
    pub fn kind(&self) -> ConstructionKind {
        match self {
            HashFunctionDescriptor::Derandomized(_) => ConstructionKind::Derandomized,
            HashFunctionDescriptor::Matrix(_) => ConstructionKind::Matrix,
            HashFunctionDescriptor::Table(_) => ConstructionKind::ExplicitTable,
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            HashFunctionDescriptor::Derandomized(d) => d.space.n(),
            HashFunctionDescriptor::Matrix(m) => m.support.n(),
            HashFunctionDescriptor::Table(t) => t.n,
        }
    }

    pub fn table(n: u32, table: Vec<u8>) -> Result<Self, HashError> {
        if n == 0 || n > MAX_TABLE_BITS {
            return Err(HashError::InvalidInput(format!(
                "table bit-length {n} outside 1..={MAX_TABLE_BITS}"
            )));
        }
        if table.len() != 1usize << n {
            return Err(HashError::InvalidInput(format!(
                "table has {} entries, expected 2^{n}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&s| s > 3) {
            return Err(HashError::InvalidInput(format!(
                "table symbol {bad} outside 0..=3"
            )));
        }
        Ok(HashFunctionDescriptor::Table(TableHash {
            n,
            table: table.into(),
        }))
    }

    /// `x mod 4`, each symbol hit exactly `N / 4` times.
    pub fn balanced(n: u32) -> Result<Self, HashError> {
        if n < 2 {
            return Err(HashError::InvalidInput("balanced hash needs n >= 2".into()));
        }
        Self::table(n, (0..1u64 << n).map(|x| (x % 4) as u8).collect())
    }

    pub fn constant(n: u32, symbol: u8) -> Result<Self, HashError> {
        if n > MAX_TABLE_BITS {
            return Err(HashError::InvalidInput(format!(
                "table bit-length {n} too large"
            )));
        }
        Self::table(n, vec![symbol; 1usize << n])
    }

    pub fn eval(&self, x: u64) -> Result<u8, HashError> {
        let n = self.n();
        if n < 64 && x >> n != 0 {
            return Err(HashError::InvalidInput(format!(
                "input {x} is not a {n}-bit string"
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation for inputs already known to be in range.
    #[inline]
    pub fn eval_unchecked(&self, x: u64) -> u8 {
        match self {
            HashFunctionDescriptor::Derandomized(d) => d.space.eval(d.seeds, x),
            HashFunctionDescriptor::Matrix(m) => m.support.digit(x, m.row),
            HashFunctionDescriptor::Table(t) => t.table[x as usize],
        }
    }
}

impl FlatLabeling {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Digit `row` (most significant first) of the label of `x`; strings off
    /// the support map to 0.
    #[inline]
    pub fn digit(&self, x: u64, row: u32) -> u8 {
        match self.labels.get(&x) {
            Some(&label) => ((label >> (2 * (self.digits - 1 - row))) & 3) as u8,
            None => 0,
        }
    }
}

/// Members of a family: either the complete derandomized seed space,
/// enumerated lazily, or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyMembers {
    SeedSpace(Arc<DerandomizedSpace>),
    Listed(Vec<HashFunctionDescriptor>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashFamily {
    n: u32,
    members: FamilyMembers,
}

impl HashFamily {
    pub fn from_members(n: u32, members: Vec<HashFunctionDescriptor>) -> Result<Self, HashError> {
        if members.is_empty() {
            return Err(HashError::InvalidInput(
                "family needs at least one member".into(),
            ));
        }
        if let Some(bad) = members.iter().find(|h| h.n() != n) {
            return Err(HashError::InvalidInput(format!(
                "member over {} bits in a family over {n} bits",
                bad.n()
            )));
        }
        Ok(HashFamily {
            n,
            members: FamilyMembers::Listed(members),
        })
    }

    pub fn seed_space(space: Arc<DerandomizedSpace>) -> Self {
        HashFamily {
            n: space.n(),
            members: FamilyMembers::SeedSpace(space),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn members(&self) -> &FamilyMembers {
        &self.members
    }

    pub fn m_count(&self) -> u128 {
        match &self.members {
            FamilyMembers::SeedSpace(s) => s.member_count(),
            FamilyMembers::Listed(v) => v.len() as u128,
        }
    }

    /// Construction kind of the members, `None` for a mixed list.
    pub fn kind(&self) -> Option<ConstructionKind> {
        match &self.members {
            FamilyMembers::SeedSpace(_) => Some(ConstructionKind::Derandomized),
            FamilyMembers::Listed(v) => {
                let k = v[0].kind();
                v.iter().all(|h| h.kind() == k).then_some(k)
            }
        }
    }

    pub fn member(&self, index: u128) -> Option<HashFunctionDescriptor> {
        match &self.members {
            FamilyMembers::SeedSpace(s) => (index < s.member_count()).then(|| {
                HashFunctionDescriptor::Derandomized(DerandomizedHash {
                    space: s.clone(),
                    seeds: s.seed_pair(index),
                })
            }),
            FamilyMembers::Listed(v) => usize::try_from(index).ok().and_then(|i| v.get(i).cloned()),
        }
    }

    /// Explicit member list, if the family is small enough to have one.
    pub fn listed(&self) -> Option<&[HashFunctionDescriptor]> {
        match &self.members {
            FamilyMembers::Listed(v) => Some(v),
            FamilyMembers::SeedSpace(_) => None,
        }
    }

    /// Index of a member covering the four distinct inputs, if any.
    pub fn find_cover(&self, subset: &[u64; 4]) -> Option<u128> {
        match &self.members {
            FamilyMembers::SeedSpace(s) => s.find_cover(subset).map(|pair| s.member_index(pair)),
            FamilyMembers::Listed(v) => v
                .iter()
                .position(|h| super::covering::covers(h, subset))
                .map(|i| i as u128),
        }
    }

    /// The sub-family made of the given members of this family.
    pub fn restrict(&self, indices: impl IntoIterator<Item = u128>) -> Result<Self, HashError> {
        let members = indices
            .into_iter()
            .map(|i| {
                self.member(i)
                    .ok_or_else(|| HashError::InvalidInput(format!("member {i} out of range")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_members(self.n, members)
    }
}

/// The complete derandomized family: one member per pair of seeds of two
/// independent 4-wise `delta`-dependent bit sequences.
pub fn build_derandomized_family(n: u32, delta: f64) -> Result<HashFamily, HashError> {
    Ok(HashFamily::seed_space(Arc::new(DerandomizedSpace::new(
        n, delta,
    )?)))
}

/// `rn / 2` functions over a flat support of `4^(rn/2)` strings, with
/// `h_j(s_i)` the `j`-th base-4 digit of `i`, most significant first.
pub fn build_matrix_family(n: u32, rn: u32, flat_support: &[u64]) -> Result<HashFamily, HashError> {
    if rn == 0 || !rn.is_multiple_of(2) {
        return Err(HashError::InvalidInput(format!(
            "Rn = {rn} must be a positive even integer"
        )));
    }
    if rn > 40 {
        return Err(HashError::InvalidInput(format!(
            "Rn = {rn} too large to label"
        )));
    }
    if n == 0 || n > 64 {
        return Err(HashError::InvalidInput(format!(
            "bit-length {n} outside 1..=64"
        )));
    }
    let digits = rn / 2;
    let expected = 1usize << rn;
    if flat_support.len() != expected {
        return Err(HashError::InvalidInput(format!(
            "flat support has {} strings, expected 4^{digits} = {expected}",
            flat_support.len()
        )));
    }
    let mut labels = HashMap::with_capacity(expected);
    for (i, &s) in flat_support.iter().enumerate() {
        if n < 64 && s >> n != 0 {
            return Err(HashError::InvalidInput(format!(
                "support string {s} exceeds {n} bits"
            )));
        }
        if labels.insert(s, i as u64).is_some() {
            return Err(HashError::InvalidInput(format!(
                "support string {s} repeated"
            )));
        }
    }
    let support = Arc::new(FlatLabeling {
        n,
        strings: flat_support.to_vec(),
        labels,
        digits,
    });
    let members = (0..digits)
        .map(|row| {
            HashFunctionDescriptor::Matrix(MatrixHash {
                support: support.clone(),
                row,
            })
        })
        .collect();
    Ok(HashFamily {
        n,
        members: FamilyMembers::Listed(members),
    })
}

/// Matrix family for a flat support of `2^r` strings, `r >= 2`: uses
/// `floor(r / 2)` digits of the label, which stay uniform and independent
/// because `4^floor(r/2)` divides `2^r`.
pub fn build_matrix_family_floor(n: u32, flat_support: &[u64]) -> Result<HashFamily, HashError> {
    let len = flat_support.len();
    if len < 4 || !len.is_power_of_two() {
        return Err(HashError::InvalidInput(format!(
            "flat support of {len} strings is not a power of two >= 4"
        )));
    }
    let r = len.trailing_zeros();
    if r.is_multiple_of(2) {
        return build_matrix_family(n, r, flat_support);
    }
    let mut labels = HashMap::with_capacity(len);
    for (i, &s) in flat_support.iter().enumerate() {
        if n < 64 && s >> n != 0 {
            return Err(HashError::InvalidInput(format!(
                "support string {s} exceeds {n} bits"
            )));
        }
        if labels.insert(s, i as u64).is_some() {
            return Err(HashError::InvalidInput(format!(
                "support string {s} repeated"
            )));
        }
    }
    let digits = r / 2;
    let support = Arc::new(FlatLabeling {
        n,
        strings: flat_support.to_vec(),
        labels,
        digits,
    });
    let members = (0..digits)
        .map(|row| {
            HashFunctionDescriptor::Matrix(MatrixHash {
                support: support.clone(),
                row,
            })
        })
        .collect();
    Ok(HashFamily {
        n,
        members: FamilyMembers::Listed(members),
    })
}

/// Every function `{0..2^n - 1} -> {0,1,2,3}`, `4^(2^n)` members; n <= 3.
pub fn full_family(n: u32) -> Result<HashFamily, HashError> {
    if n == 0 || n > 3 {
        return Err(HashError::InvalidInput(format!(
            "full family limited to n <= 3, got {n}"
        )));
    }
    let size = 1usize << n;
    let members = (0..1u64 << (2 * size))
        .map(|code| {
            let table = (0..size).map(|x| ((code >> (2 * x)) & 3) as u8).collect();
            HashFunctionDescriptor::table(n, table)
        })
        .collect::<Result<Vec<_>, _>>()?;
    HashFamily::from_members(n, members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lookup() {
        let h = HashFunctionDescriptor::table(2, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(h.eval(2).unwrap(), 2);
        assert!(matches!(h.eval(4), Err(HashError::InvalidInput(_))));
    }

    #[test]
    fn zero_seeds_give_constant_function() {
        let space = Arc::new(DerandomizedSpace::new(6, 1.0 / 16.0).unwrap());
        let zero = SeedPoint { x: 0, y: 0 };
        let h = HashFunctionDescriptor::Derandomized(DerandomizedHash {
            space,
            seeds: SeedPair { hi: zero, lo: zero },
        });
        for x in 0..64 {
            assert_eq!(h.eval(x).unwrap(), 0);
        }
    }

    // Materialize both bit sequences r_j = <x^j, y>, then X_i = <v_i, r>.
    fn materialized_eval(space: &DerandomizedSpace, pair: SeedPair, x: u64) -> u8 {
        let bits = space.seed_space();
        let map = space.composed().map();
        let seq =
            |seed: SeedPoint| -> Vec<bool> { (0..bits.ell()).map(|j| bits.bit(seed, j)).collect() };
        let r_hi = seq(pair.hi);
        let r_lo = seq(pair.lo);
        let row = map.row(x);
        let dot = |r: &[bool]| -> u8 {
            r.iter()
                .enumerate()
                .filter(|(j, _)| row >> j & 1 == 1)
                .fold(0u8, |acc, (_, &b)| acc ^ b as u8)
        };
        2 * dot(&r_hi) + dot(&r_lo)
    }

    #[test]
    fn derandomized_eval_matches_materialized_sequences() {
        let space = DerandomizedSpace::new(8, 1.0 / 16.0).unwrap();
        let pair = SeedPair {
            hi: SeedPoint { x: 0x5a3, y: 0x9c1 },
            lo: SeedPoint { x: 0x0f7, y: 0x3e2 },
        };
        assert_eq!(space.eval(pair, 5), materialized_eval(&space, pair, 5));
        for x in 0..256 {
            assert_eq!(
                space.eval(pair, x),
                materialized_eval(&space, pair, x),
                "x = {x}"
            );
        }
    }

    #[test]
    fn derandomized_parameters() {
        assert!(matches!(
            DerandomizedSpace::new(8, 0.125),
            Err(HashError::Parameter(_))
        ));
        assert!(matches!(
            DerandomizedSpace::new(1, 0.05),
            Err(HashError::Parameter(_))
        ));
        let s = DerandomizedSpace::new(8, 1.0 / 16.0).unwrap();
        // ell - 1 = 16 bits, bias 1/256 => 2^m >= 4096
        assert_eq!(s.field_degree(), 12);
        assert_eq!(s.member_count(), 1u128 << 48);
        let pair = s.seed_pair(123_456_789_012);
        assert_eq!(s.member_index(pair), 123_456_789_012);
    }

    #[test]
    fn matrix_rows_for_rn4() {
        let support: Vec<u64> = (0..16).map(|i| i * 3 + 1).collect();
        let fam = build_matrix_family(6, 4, &support).unwrap();
        let rows: Vec<String> = fam
            .listed()
            .unwrap()
            .iter()
            .map(|h| {
                support
                    .iter()
                    .map(|&s| char::from(b'0' + h.eval(s).unwrap()))
                    .collect()
            })
            .collect();
        assert_eq!(rows, vec!["0000111122223333", "0123012301230123"]);
        // off-support strings map to 0
        assert_eq!(fam.listed().unwrap()[1].eval(0).unwrap(), 0);
    }

    #[test]
    fn matrix_rn2_is_identity_on_labels() {
        let fam = build_matrix_family(3, 2, &[5, 1, 7, 2]).unwrap();
        let h = &fam.listed().unwrap()[0];
        assert_eq!(fam.m_count(), 1);
        for (i, s) in [5u64, 1, 7, 2].into_iter().enumerate() {
            assert_eq!(h.eval(s).unwrap() as usize, i);
        }
    }

    #[test]
    fn matrix_rejects_bad_support() {
        assert!(matches!(
            build_matrix_family(4, 4, &[0, 1, 2]),
            Err(HashError::InvalidInput(_))
        ));
        assert!(matches!(
            build_matrix_family(4, 3, &[0; 8]),
            Err(HashError::InvalidInput(_))
        ));
        assert!(matches!(
            build_matrix_family(2, 2, &[0, 1, 1, 2]),
            Err(HashError::InvalidInput(_))
        ));
    }

    #[test]
    fn full_family_sizes() {
        assert_eq!(full_family(2).unwrap().m_count(), 256);
        assert!(full_family(4).is_err());
    }
}

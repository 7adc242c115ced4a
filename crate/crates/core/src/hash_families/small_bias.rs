//! Small-bias sample spaces and the 4-wise δ-dependent bit sequences built
//! from them.
//!
//! A sample point is a pair `(x, y)` of GF(2^m) elements. The generated bit
//! string is `r_j = <x^j, y>` (AGHP powering), which has every nonzero parity
//! biased by at most `(ell - 1) / 2^m`, measured as `|P(0) - P(1)|`.
//!
//! Composing with [`KwiseLinearMap`] gives one variable per index `i` of the
//! domain: `X_i = <v_i, r> = <p_i(x), y>` where `p_i` is the polynomial whose
//! coefficients are the row `v_i`. Any four rows are linearly independent, so
//! every parity over at most four variables is a nonzero parity of `r`.

use super::field::BinaryField;
use super::HashError;

/// Index `i` -> GF(2) row `(1, alpha_i, alpha_i^3)` with `alpha_i = i` read as
/// an element of GF(2^n). These are the columns of the parity-check matrix of
/// the extended double-error-correcting BCH code, which has distance 6, so any
/// 5 rows (in particular any 4) are linearly independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KwiseLinearMap {
    index_field: BinaryField,
}

impl KwiseLinearMap {
    pub fn new(n: u32) -> Result<Self, HashError> {
        if n == 0 || n > 63 {
            return Err(HashError::Parameter(format!(
                "index bit-length {n} outside 1..=63"
            )));
        }
        Ok(KwiseLinearMap {
            index_field: BinaryField::new(n)?,
        })
    }

    pub fn n(&self) -> u32 {
        self.index_field.degree()
    }

    pub fn index_field(&self) -> &BinaryField {
        &self.index_field
    }

    /// Length of each row, i.e. the number of small-bias bits consumed.
    pub fn row_len(&self) -> u32 {
        2 * self.n() + 1
    }

    /// Row for `index`, packed with bit `j` = coordinate `j`.
    pub fn row(&self, index: u64) -> u128 {
        let f = &self.index_field;
        let alpha = index & f.mask();
        let cube = f.cube(alpha);
        1u128 | ((alpha as u128) << 1) | ((cube as u128) << (self.n() + 1))
    }
}

/// AGHP powering construction over GF(2^m) producing `ell` bits per sample point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallBiasSpace {
    ell: u32,
    field: BinaryField,
}

/// One sample point `(x, y)` of a [`SmallBiasSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedPoint {
    pub x: u64,
    pub y: u64,
}

impl SmallBiasSpace {
    pub fn new(ell: u32, degree: u32) -> Result<Self, HashError> {
        if ell == 0 || ell > 128 {
            return Err(HashError::Parameter(format!(
                "bit count {ell} outside 1..=128"
            )));
        }
        Ok(SmallBiasSpace {
            ell,
            field: BinaryField::new(degree)?,
        })
    }

    /// Smallest field degree whose bias bound `(ell - 1) / 2^m` is at most `bias`.
    pub fn degree_for_bias(ell: u32, bias: f64) -> Result<u32, HashError> {
        if !(bias > 0.0 && bias < 1.0) {
            return Err(HashError::Parameter(format!(
                "bias {bias} must lie in (0, 1)"
            )));
        }
        let need = (ell.saturating_sub(1)).max(1) as f64 / bias;
        let mut m = 1u32;
        while ((1u128 << m) as f64) < need {
            m += 1;
            if m > super::field::MAX_DEGREE {
                return Err(HashError::Parameter(format!(
                    "bias {bias} needs a field larger than GF(2^{})",
                    super::field::MAX_DEGREE
                )));
            }
        }
        Ok(m)
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn field(&self) -> &BinaryField {
        &self.field
    }

    pub fn degree(&self) -> u32 {
        self.field.degree()
    }

    /// Number of sample points, `2^(2m)`.
    pub fn point_count(&self) -> u128 {
        1u128 << (2 * self.degree())
    }

    pub fn point(&self, index: u128) -> SeedPoint {
        let m = self.degree();
        let mask = self.field.mask() as u128;
        SeedPoint {
            x: ((index >> m) & mask) as u64,
            y: (index & mask) as u64,
        }
    }

    pub fn point_index(&self, p: SeedPoint) -> u128 {
        ((p.x as u128) << self.degree()) | p.y as u128
    }

    /// Upper bound on `|P(parity = 0) - P(parity = 1)|` for any nonzero parity.
    pub fn bias_bound(&self) -> f64 {
        (self.ell - 1) as f64 / self.field.order() as f64
    }

    /// Generated bit `r_j = <x^j, y>`.
    pub fn bit(&self, p: SeedPoint, j: u32) -> bool {
        inner(self.field.pow(p.x, j as u64), p.y)
    }

    /// Parity `<coeffs, r>` for a packed coefficient vector, computed as
    /// `<poly(x), y>` by Horner evaluation.
    #[inline]
    pub fn parity(&self, p: SeedPoint, coeffs: u128) -> bool {
        inner(self.eval_poly(p.x, coeffs), p.y)
    }

    /// Evaluate `sum_j coeffs_j x^j` in GF(2^m).
    #[inline]
    pub fn eval_poly(&self, x: u64, coeffs: u128) -> u64 {
        if coeffs == 0 {
            return 0;
        }
        let top = 127 - coeffs.leading_zeros();
        let mut acc = 0u64;
        for j in (0..=top).rev() {
            acc = self.field.mul(acc, x) ^ ((coeffs >> j) & 1) as u64;
        }
        acc
    }
}

#[inline]
fn inner(a: u64, b: u64) -> bool {
    (a & b).count_ones() & 1 == 1
}

/// An enumerable probability space of binary variables indexed `0..variable_count`.
pub trait SampleSpace {
    fn variable_count(&self) -> u128;
    fn point_count(&self) -> u128;
    fn value(&self, point: u128, variable: u64) -> bool;
}

/// `N = 2^n` variables `X_i = <v_i, r>`, the linear map composed with the
/// small-bias bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedSpace {
    map: KwiseLinearMap,
    bits: SmallBiasSpace,
}

impl ComposedSpace {
    pub fn new(map: KwiseLinearMap, degree: u32) -> Result<Self, HashError> {
        let bits = SmallBiasSpace::new(map.row_len(), degree)?;
        Ok(ComposedSpace { map, bits })
    }

    pub fn map(&self) -> &KwiseLinearMap {
        &self.map
    }

    pub fn bits(&self) -> &SmallBiasSpace {
        &self.bits
    }

    pub fn n(&self) -> u32 {
        self.map.n()
    }

    #[inline]
    pub fn variable(&self, seed: SeedPoint, index: u64) -> bool {
        self.bits.parity(seed, self.map.row(index))
    }

    /// Variable value given a precomputed row; lets hot loops skip the row
    /// computation for a fixed index set.
    #[inline]
    pub fn variable_with_row(&self, seed: SeedPoint, row: u128) -> bool {
        self.bits.parity(seed, row)
    }

    /// Exact L1 distance between the marginal on `subset` and uniform.
    ///
    /// Enumerates every `x`; for fixed `x` the bits are linear functionals of
    /// `y`, so the pattern is uniform on the image of `y -> (<u_k, y>)_k`,
    /// which is the annihilator of the dependency space of the `u_k`. This
    /// accounts for all `2^m` values of `y` without visiting them.
    pub fn marginal_distance_exact(&self, subset: &[u64]) -> Result<DependenceReport, HashError> {
        check_subset(subset, self.variable_count())?;
        let s = subset.len();
        if s == 0 {
            return Ok(DependenceReport {
                subset: Vec::new(),
                l1_distance: 0.0,
            });
        }
        let rows: Vec<u128> = subset.iter().map(|&i| self.map.row(i)).collect();
        let patterns = 1usize << s;
        let m = self.bits.degree();
        // counts[b] = number of (x, y) points producing pattern b
        let mut counts = vec![0u128; patterns];
        let mut u = [0u64; 4];
        for x in 0..self.bits.field().order() {
            for (k, &row) in rows.iter().enumerate() {
                u[k] = self.bits.eval_poly(x, row);
            }
            let mut in_kernel = [false; 16];
            for (c, slot) in in_kernel.iter_mut().enumerate().take(patterns) {
                let mut acc = 0u64;
                for (k, uk) in u.iter().enumerate().take(s) {
                    if c >> k & 1 == 1 {
                        acc ^= uk;
                    }
                }
                *slot = acc == 0;
            }
            let kernel_size = in_kernel.iter().take(patterns).filter(|&&k| k).count();
            let image_size = patterns / kernel_size;
            let per_pattern = (1u128 << m) / image_size as u128;
            for (b, count) in counts.iter_mut().enumerate() {
                let orthogonal = (0..patterns)
                    .filter(|&c| in_kernel[c])
                    .all(|c| (b & c).count_ones() % 2 == 0);
                if orthogonal {
                    *count += per_pattern;
                }
            }
        }
        let total = self.point_count() as f64;
        let uniform = 1.0 / patterns as f64;
        let l1 = counts
            .iter()
            .map(|&c| (c as f64 / total - uniform).abs())
            .sum();
        Ok(DependenceReport {
            subset: subset.to_vec(),
            l1_distance: l1,
        })
    }
}

impl SampleSpace for ComposedSpace {
    fn variable_count(&self) -> u128 {
        1u128 << self.n()
    }
    fn point_count(&self) -> u128 {
        self.bits.point_count()
    }
    fn value(&self, point: u128, variable: u64) -> bool {
        self.variable(self.bits.point(point), variable)
    }
}

/// A space given by listing its equiprobable sample points, each a packed
/// assignment of up to 64 variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSpace {
    variables: u32,
    points: Vec<u64>,
}

impl ExplicitSpace {
    pub fn new(variables: u32, points: Vec<u64>) -> Result<Self, HashError> {
        if variables == 0 || variables > 64 || points.is_empty() {
            return Err(HashError::InvalidInput(
                "explicit space needs 1..=64 variables and at least one point".into(),
            ));
        }
        Ok(ExplicitSpace { variables, points })
    }

    /// All `2^variables` assignments: the uniform space.
    pub fn full(variables: u32) -> Result<Self, HashError> {
        if variables > 20 {
            return Err(HashError::InvalidInput(
                "full space limited to 20 variables".into(),
            ));
        }
        Self::new(variables, (0..1u64 << variables).collect())
    }
}

impl SampleSpace for ExplicitSpace {
    fn variable_count(&self) -> u128 {
        self.variables as u128
    }
    fn point_count(&self) -> u128 {
        self.points.len() as u128
    }
    fn value(&self, point: u128, variable: u64) -> bool {
        self.points[point as usize] >> variable & 1 == 1
    }
}

/// L1 distance of a marginal from uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub subset: Vec<u64>,
    pub l1_distance: f64,
}

fn check_subset(subset: &[u64], variables: u128) -> Result<(), HashError> {
    if subset.len() > 4 {
        return Err(HashError::Unsupported(format!(
            "marginals over {} variables; at most 4 supported",
            subset.len()
        )));
    }
    for (i, &a) in subset.iter().enumerate() {
        if a as u128 >= variables {
            return Err(HashError::InvalidInput(format!(
                "variable {a} out of range"
            )));
        }
        if subset[..i].contains(&a) {
            return Err(HashError::InvalidInput(format!("variable {a} repeated")));
        }
    }
    Ok(())
}

/// Exact L1 distance between the marginal of `space` on `subset` and the
/// uniform distribution, by visiting every sample point.
pub fn marginal_distance<S: SampleSpace + ?Sized>(
    space: &S,
    subset: &[u64],
) -> Result<DependenceReport, HashError> {
    check_subset(subset, space.variable_count())?;
    let patterns = 1usize << subset.len();
    let mut counts = vec![0u128; patterns];
    let total = space.point_count();
    for p in 0..total {
        let mut b = 0usize;
        for (k, &v) in subset.iter().enumerate() {
            if space.value(p, v) {
                b |= 1 << k;
            }
        }
        counts[b] += 1;
    }
    let uniform = 1.0 / patterns as f64;
    let l1 = counts
        .iter()
        .map(|&c| (c as f64 / total as f64 - uniform).abs())
        .sum();
    Ok(DependenceReport {
        subset: subset.to_vec(),
        l1_distance: l1,
    })
}

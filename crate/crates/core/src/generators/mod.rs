//! Classical low-discrepancy constructions, uniform random sets and random
//! shifts modulo 1.
//!
//! Index conventions: radical-inverse sequences (van der Corput, Halton)
//! default to starting at index 1, skipping the origin; Sobol', Hammersley
//! and the lattices start at index 0. Every function takes an explicit start
//! where one applies, and [`GeneratorSpec`] exposes it as `start`.
//!
//! Sobol' points are produced in Gray-code order (Antonov-Saleev), so that
//! the first `n` points of dimension 1 are `0, 1/2, 3/4, 1/4, ...`.

mod sobol_table;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, PointSet, Result, Scalar};

pub use sobol_table::MAX_DIM as SOBOL_MAX_DIM;

/// The first 64 primes, used as Halton bases.
pub const PRIMES: [u64; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307,
    311,
];

/// Golden ratio used by the Fibonacci set.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Largest value strictly below one in `T`.
#[inline]
fn below_one<T: Scalar>() -> T {
    T::one() - T::epsilon()
}

/// Fractional part `x - floor(x)`, with results that round to 1 folded to 0.
#[inline]
pub fn frac<T: Scalar>(x: T) -> T {
    let f = x - x.floor();
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Radical inverse of `index` in `base`, computed as an exact integer digit
/// reversal divided by `base^digits`.
pub fn radical_inverse<T: Scalar>(index: u64, base: u64) -> T {
    debug_assert!(base >= 2);
    let mut rev: u128 = 0;
    let mut denom: u128 = 1;
    let mut i = index;
    while i > 0 {
        rev = rev * base as u128 + (i % base) as u128;
        denom *= base as u128;
        i /= base;
    }
    if rev == 0 {
        return T::zero();
    }
    let v = T::from_u128(rev).expect("u128 to float") / T::from_u128(denom).expect("u128 to float");
    if v >= T::one() {
        below_one()
    } else {
        v
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("number of points must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::InvalidParameter("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// One-dimensional van der Corput sequence: element `i` is the radical
/// inverse of `start + i`.
pub fn van_der_corput<T: Scalar>(n: usize, base: u64, start: u64) -> Result<PointSet<T>> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    check_n(n)?;
    let coords = (0..n as u64).map(|i| radical_inverse(start + i, base)).collect();
    Ok(PointSet::from_raw(n, 1, coords))
}

/// Halton sequence in the first `d` primes.
pub fn halton<T: Scalar>(n: usize, d: usize, start: u64) -> Result<PointSet<T>> {
    check_dim(d)?;
    if d > PRIMES.len() {
        return Err(Error::UnsupportedDimension { dim: d, max: PRIMES.len() });
    }
    halton_with_bases(n, &PRIMES[..d], start)
}

/// Halton sequence with caller-chosen bases (each at least 2, pairwise distinct).
pub fn halton_with_bases<T: Scalar>(n: usize, bases: &[u64], start: u64) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(bases.len())?;
    if let Some(&b) = bases.iter().find(|&&b| b < 2) {
        return Err(Error::InvalidBase(b));
    }
    for (i, b) in bases.iter().enumerate() {
        if bases[..i].contains(b) {
            return Err(Error::InvalidParameter(format!("duplicate Halton base {b}")));
        }
    }
    let d = bases.len();
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n as u64 {
        coords.extend(bases.iter().map(|&b| radical_inverse::<T>(start + i, b)));
    }
    Ok(PointSet::from_raw(n, d, coords))
}

const SOBOL_BITS: usize = 32;

/// 32-bit direction integers `v_j = m_j * 2^(32 - j - 1)` for each dimension.
fn sobol_directions(d: usize) -> Vec<[u32; SOBOL_BITS]> {
    let mut dirs = Vec::with_capacity(d);
    let mut first = [0u32; SOBOL_BITS];
    for (j, v) in first.iter_mut().enumerate() {
        *v = 1 << (SOBOL_BITS - 1 - j);
    }
    dirs.push(first);
    for &(s, a, m) in sobol_table::DIRECTIONS.iter().take(d.saturating_sub(1)) {
        let s = s as usize;
        let mut v = [0u32; SOBOL_BITS];
        for j in 0..s.min(SOBOL_BITS) {
            v[j] = m[j] << (SOBOL_BITS - 1 - j);
        }
        for j in s..SOBOL_BITS {
            let mut x = v[j - s] ^ (v[j - s] >> s);
            for k in 1..s {
                if (a >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[j - k];
                }
            }
            v[j] = x;
        }
        dirs.push(v);
    }
    dirs
}

/// Sobol' sequence with Joe-Kuo direction numbers in Gray-code order,
/// points `start .. start + n`.
pub fn sobol<T: Scalar>(n: usize, d: usize, start: u64) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(d)?;
    if d > SOBOL_MAX_DIM {
        return Err(Error::UnsupportedDimension { dim: d, max: SOBOL_MAX_DIM });
    }
    if start + n as u64 > 1u64 << SOBOL_BITS {
        return Err(Error::InvalidParameter(format!(
            "Sobol' index range exceeds 2^{SOBOL_BITS}"
        )));
    }
    let dirs = sobol_directions(d);
    // State for index `start`: XOR of the directions selected by gray(start).
    let gray = start ^ (start >> 1);
    let mut state: Vec<u32> = dirs
        .iter()
        .map(|v| {
            (0..SOBOL_BITS).filter(|&j| gray >> j & 1 == 1).fold(0u32, |acc, j| acc ^ v[j])
        })
        .collect();
    let scale = T::lit(1.0 / (1u64 << SOBOL_BITS) as f64);
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n as u64 {
        coords.extend(state.iter().map(|&x| {
            let v = T::from_u32(x).expect("u32 to float") * scale;
            if v >= T::one() {
                below_one()
            } else {
                v
            }
        }));
        let c = (start + i + 1).trailing_zeros() as usize;
        if c < SOBOL_BITS {
            for (s, v) in state.iter_mut().zip(&dirs) {
                *s ^= v[c];
            }
        }
    }
    Ok(PointSet::from_raw(n, d, coords))
}

/// Hammersley set: first coordinate `i/n`, remaining coordinates Halton in
/// the first `d - 1` primes at index `i`, for `i = 0..n`.
pub fn hammersley<T: Scalar>(n: usize, d: usize) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(d)?;
    if d - 1 > PRIMES.len() {
        return Err(Error::UnsupportedDimension { dim: d, max: PRIMES.len() + 1 });
    }
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n as u64 {
        coords.push(T::from_u64(i).unwrap() / T::from_count(n));
        coords.extend(PRIMES[..d - 1].iter().map(|&b| radical_inverse::<T>(i, b)));
    }
    Ok(PointSet::from_raw(n, d, coords))
}

/// Lifted Sobol' set `(sobol_1d(i), i/n)` for `i = 0..n`.
pub fn lifted_sobol<T: Scalar>(n: usize) -> Result<PointSet<T>> {
    let first = sobol::<T>(n, 1, 0)?;
    let mut coords = Vec::with_capacity(2 * n);
    for (i, &x) in first.coords().iter().enumerate() {
        coords.push(x);
        coords.push(T::from_count(i) / T::from_count(n));
    }
    Ok(PointSet::from_raw(n, 2, coords))
}

/// Fibonacci set `(i/n, frac(i * phi))` for `i = 0..n`.
pub fn fibonacci_set<T: Scalar>(n: usize) -> Result<PointSet<T>> {
    check_n(n)?;
    let mut coords = Vec::with_capacity(2 * n);
    for i in 0..n {
        coords.push(T::from_count(i) / T::from_count(n));
        let y = frac(i as f64 * GOLDEN_RATIO);
        coords.push(T::lit(y).min(below_one()));
    }
    Ok(PointSet::from_raw(n, 2, coords))
}

/// Rank-1 lattice `frac(i * z / n)` for `i = 0..n`. The generating vector is
/// not checked for coprimality with `n`.
pub fn rank1_lattice<T: Scalar>(n: usize, z: &[u64]) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(z.len())?;
    let nn = n as u128;
    let mut coords = Vec::with_capacity(n * z.len());
    for i in 0..nn {
        coords.extend(z.iter().map(|&zk| {
            let num = (i * zk as u128) % nn;
            T::from_u128(num).unwrap() / T::from_u128(nn).unwrap()
        }));
    }
    Ok(PointSet::from_raw(n, z.len(), coords))
}

/// Rank-1 lattice with generating vector `z` checked against dimension `d`.
pub fn rank1_lattice_dim<T: Scalar>(n: usize, d: usize, z: &[u64]) -> Result<PointSet<T>> {
    if z.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.len() });
    }
    rank1_lattice(n, z)
}

/// Korobov generating vector `(1, a, a^2, ..., a^(d-1)) mod n`.
pub fn korobov_vector(n: usize, d: usize, a: u64) -> Vec<u64> {
    let n = n as u128;
    let mut z = Vec::with_capacity(d);
    let mut p: u128 = 1 % n.max(1);
    for _ in 0..d {
        z.push(p as u64);
        p = p * a as u128 % n;
    }
    z
}

/// Korobov lattice with multiplier `a` in `[1, n)`.
pub fn korobov<T: Scalar>(n: usize, d: usize, a: u64) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(d)?;
    if a < 1 || (a as usize >= n && n > 1) {
        return Err(Error::InvalidParameter(format!("Korobov multiplier {a} outside [1, {n})")));
    }
    rank1_lattice(n, &korobov_vector(n, d, a))
}

/// `n` independent uniform points, deterministic in `seed`.
pub fn uniform_random<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<PointSet<T>> {
    check_n(n)?;
    check_dim(d)?;
    let mut rng = seed::rng(seed);
    let coords = (0..n * d)
        .map(|_| T::lit(rng.random::<f64>()).min(below_one()))
        .collect();
    Ok(PointSet::from_raw(n, d, coords))
}

/// Adds `shift` to every point, coordinatewise modulo 1.
pub fn shift_by<T: Scalar>(points: &PointSet<T>, shift: &[T]) -> Result<PointSet<T>> {
    if shift.len() != points.dim() {
        return Err(Error::DimensionMismatch { expected: points.dim(), got: shift.len() });
    }
    let coords = points
        .rows()
        .flat_map(|row| row.iter().zip(shift).map(|(&x, &s)| frac(x + s)))
        .collect();
    Ok(PointSet::from_raw(points.n_points(), points.dim(), coords))
}

/// The shift vector `xi ~ U([0, b]^d)` drawn by [`random_shift`].
pub fn draw_shift<T: Scalar>(d: usize, seed: u64, bound: f64) -> Result<Vec<T>> {
    if !(bound > 0.0 && bound <= 1.0) {
        return Err(Error::InvalidShiftBound(bound));
    }
    let mut rng = seed::rng(seed);
    Ok((0..d).map(|_| T::lit(bound * rng.random::<f64>())).collect())
}

/// Random shift modulo 1 by one vector drawn uniformly from `[0, b]^d`.
pub fn random_shift<T: Scalar>(points: &PointSet<T>, seed: u64, bound: f64) -> Result<PointSet<T>> {
    let xi = draw_shift::<T>(points.dim(), seed, bound)?;
    shift_by(points, &xi)
}

/// Construction named by a [`GeneratorSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    VanDerCorput,
    Halton,
    Sobol,
    Hammersley,
    LiftedSobol,
    Fibonacci,
    Korobov,
    Rank1Lattice,
    UniformRandom,
    Shifted,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::VanDerCorput => "van_der_corput",
            Self::Halton => "halton",
            Self::Sobol => "sobol",
            Self::Hammersley => "hammersley",
            Self::LiftedSobol => "lifted_sobol",
            Self::Fibonacci => "fibonacci",
            Self::Korobov => "korobov",
            Self::Rank1Lattice => "rank1_lattice",
            Self::UniformRandom => "uniform_random",
            Self::Shifted => "shifted",
        }
    }

    pub fn default_start(self) -> u64 {
        match self {
            Self::VanDerCorput | Self::Halton => 1,
            _ => 0,
        }
    }
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .map_err(|_| Error::InvalidParameter(format!("unknown generator kind {s:?}")))
    }
}

/// Serializable description of a point set.
///
/// JSON shape: `{"kind": "...", "n": int, "d": int, "seed": int, "base": [...],
/// "a": int, "z": [...], "b": float, "inner": {...}, "start": int}`; fields a
/// kind does not use may be omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<GeneratorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Self {
        Self { kind, n, d: None, seed: None, base: None, a: None, z: None, b: None, inner: None, start: None }
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_start(mut self, start: u64) -> Self {
        self.start = Some(start);
        self
    }

    fn dim_or(&self, default: usize) -> usize {
        self.d.unwrap_or(default)
    }

    fn start(&self) -> u64 {
        self.start.unwrap_or(self.kind.default_start())
    }

    /// Dimension of the generated set, if determined by the spec.
    pub fn output_dim(&self) -> Option<usize> {
        match self.kind {
            GeneratorKind::VanDerCorput => Some(1),
            GeneratorKind::Fibonacci | GeneratorKind::LiftedSobol => Some(2),
            GeneratorKind::Rank1Lattice => self.z.as_ref().map(Vec::len).or(self.d),
            GeneratorKind::Halton => self.base.as_ref().map(Vec::len).or(self.d),
            GeneratorKind::Shifted => self.inner.as_ref().and_then(|i| i.output_dim()),
            _ => self.d,
        }
    }

    pub fn generate<T: Scalar>(&self) -> Result<PointSet<T>> {
        let n = self.n;
        let need_d = || self.d.ok_or_else(|| Error::InvalidParameter(format!("{} needs \"d\"", self.kind.name())));
        match self.kind {
            GeneratorKind::VanDerCorput => {
                let base = self.base.as_ref().and_then(|b| b.first().copied()).unwrap_or(2);
                van_der_corput(n, base, self.start())
            }
            GeneratorKind::Halton => match &self.base {
                Some(bases) => {
                    if let Some(d) = self.d {
                        if d != bases.len() {
                            return Err(Error::DimensionMismatch { expected: d, got: bases.len() });
                        }
                    }
                    halton_with_bases(n, bases, self.start())
                }
                None => halton(n, need_d()?, self.start()),
            },
            GeneratorKind::Sobol => sobol(n, need_d()?, self.start()),
            GeneratorKind::Hammersley => hammersley(n, self.dim_or(2)),
            GeneratorKind::LiftedSobol => lifted_sobol(n),
            GeneratorKind::Fibonacci => fibonacci_set(n),
            GeneratorKind::Korobov => {
                let a = self.a.ok_or_else(|| Error::InvalidParameter("korobov needs \"a\"".into()))?;
                korobov(n, need_d()?, a)
            }
            GeneratorKind::Rank1Lattice => {
                let z = self.z.as_ref().ok_or_else(|| Error::InvalidParameter("rank1_lattice needs \"z\"".into()))?;
                rank1_lattice_dim(n, self.dim_or(z.len()), z)
            }
            GeneratorKind::UniformRandom => uniform_random(n, need_d()?, self.seed.unwrap_or(0)),
            GeneratorKind::Shifted => {
                let inner = self.inner.as_ref().ok_or_else(|| Error::InvalidParameter("shifted needs \"inner\"".into()))?;
                let base = inner.generate::<T>()?;
                random_shift(&base, self.seed.unwrap_or(0), self.b.unwrap_or(1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(p: &PointSet, k: usize) -> Vec<f64> {
        p.column(k)
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn van_der_corput_examples() {
        close(&col(&van_der_corput(3, 2, 1).unwrap(), 0), &[0.5, 0.25, 0.75]);
        close(&col(&van_der_corput(1, 2, 0).unwrap(), 0), &[0.0]);
        close(&col(&van_der_corput(3, 3, 1).unwrap(), 0), &[1.0 / 3.0, 2.0 / 3.0, 1.0 / 9.0]);
        assert!(matches!(van_der_corput::<f64>(3, 1, 0), Err(Error::InvalidBase(1))));
    }

    #[test]
    fn halton_examples() {
        let h: PointSet = halton(2, 2, 1).unwrap();
        close(h.coords(), &[0.5, 1.0 / 3.0, 0.25, 2.0 / 3.0]);
        let h: PointSet = halton(1, 3, 0).unwrap();
        close(h.coords(), &[0.0, 0.0, 0.0]);
        assert!(matches!(halton::<f64>(4, 65, 0), Err(Error::UnsupportedDimension { .. })));
        assert!(halton_with_bases::<f64>(4, &[2, 2], 0).is_err());
    }

    #[test]
    fn halton_columns_are_van_der_corput() {
        let h: PointSet = halton(50, 5, 1).unwrap();
        for k in 0..5 {
            assert_eq!(col(&h, k), col(&van_der_corput(50, PRIMES[k], 1).unwrap(), 0));
        }
    }

    #[test]
    fn sobol_first_points() {
        let s: PointSet = sobol(2, 1, 1).unwrap();
        close(s.coords(), &[0.5, 0.75]);
        let s: PointSet = sobol(1, 2, 0).unwrap();
        close(s.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn sobol_start_offset_matches_prefix() {
        let all: PointSet = sobol(300, 7, 0).unwrap();
        let tail: PointSet = sobol(100, 7, 200).unwrap();
        assert_eq!(&all.coords()[200 * 7..], tail.coords());
    }

    #[test]
    fn sobol_direction_numbers_match_reference() {
        // Values produced by an independent Joe-Kuo implementation
        // (unscrambled, Gray-code order) at dims 1, 2, 3, 6, 32, 64.
        let dims = [0, 1, 2, 5, 31, 63];
        let cases: [(u64, [f64; 6]); 5] = [
            (2, [0.75, 0.25, 0.25, 0.75, 0.25, 0.75]),
            (5, [0.875, 0.875, 0.125, 0.625, 0.625, 0.625]),
            (11, [0.4375, 0.5625, 0.1875, 0.0625, 0.0625, 0.9375]),
            (1000, [0.2197265625, 0.0966796875, 0.5185546875, 0.9072265625, 0.1455078125, 0.4462890625]),
            (
                123457,
                [
                    0.5264968872070312,
                    0.6827468872070312,
                    0.8072586059570312,
                    0.7032546997070312,
                    0.5757064819335938,
                    0.45214080810546875,
                ],
            ),
        ];
        for (idx, expect) in cases {
            let p: PointSet = sobol(1, 64, idx).unwrap();
            for (j, &k) in dims.iter().enumerate() {
                assert!((p.get(0, k) - expect[j]).abs() < 1e-9, "index {idx} dim {k}: {}", p.get(0, k));
            }
        }
    }

    #[test]
    fn sobol_power_of_two_prefix_is_stratified() {
        let s: PointSet = sobol(256, 2, 0).unwrap();
        for k in 0..2 {
            let mut bins = vec![0; 256];
            for &x in &col(&s, k) {
                bins[(x * 256.0) as usize] += 1;
            }
            assert!(bins.iter().all(|&b| b == 1));
        }
    }

    #[test]
    fn fibonacci_examples() {
        let f: PointSet = fibonacci_set(1).unwrap();
        close(f.coords(), &[0.0, 0.0]);
        let f: PointSet = fibonacci_set(5).unwrap();
        let expect = [
            0.0, 0.0, 0.2, 0.618_033_988_749_894_8, 0.4, 0.236_067_977_499_789_8, 0.6,
            0.854_101_966_249_684_5, 0.8, 0.472_135_954_999_579_4,
        ];
        close(f.coords(), &expect);
    }

    #[test]
    fn korobov_examples() {
        let k: PointSet = korobov(4, 2, 1).unwrap();
        close(k.coords(), &[0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75]);
        let k: PointSet = korobov(5, 2, 2).unwrap();
        close(k.coords(), &[0.0, 0.0, 0.2, 0.4, 0.4, 0.8, 0.6, 0.2, 0.8, 0.6]);
        let l: PointSet = rank1_lattice(5, &[1, 2]).unwrap();
        assert_eq!(l, k);
        assert!(matches!(rank1_lattice_dim::<f64>(5, 3, &[1, 2]), Err(Error::DimensionMismatch { .. })));
        assert!(korobov::<f64>(5, 2, 5).is_err());
    }

    #[test]
    fn lattice_first_coordinates_enumerate_grid() {
        let n = 37;
        let sets: Vec<PointSet> = vec![
            fibonacci_set(n).unwrap(),
            korobov(n, 3, 7).unwrap(),
            rank1_lattice(n, &[1, 11, 16]).unwrap(),
        ];
        for s in sets {
            let expect: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
            assert_eq!(col(&s, 0), expect);
        }
    }

    #[test]
    fn hammersley_examples() {
        let h: PointSet = hammersley(2, 2).unwrap();
        close(h.coords(), &[0.0, 0.0, 0.5, 0.5]);
        let h: PointSet = hammersley(4, 2).unwrap();
        assert_eq!(col(&h, 1), col(&van_der_corput(4, 2, 0).unwrap(), 0));
        let l: PointSet = lifted_sobol(1).unwrap();
        close(l.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn shift_examples() {
        let s: PointSet = sobol(16, 3, 0).unwrap();
        assert_eq!(shift_by(&s, &[0.0, 0.0, 0.0]).unwrap(), s);
        assert_eq!(shift_by(&s, &[1.0, 1.0, 1.0]).unwrap(), s);
        let r = random_shift(&s, 3, 1.0).unwrap();
        assert!(r.coords().iter().all(|&c| (0.0..1.0).contains(&c)));
        assert!(matches!(random_shift(&s, 3, 0.0), Err(Error::InvalidShiftBound(_))));
        assert!(matches!(random_shift(&s, 3, 1.5), Err(Error::InvalidShiftBound(_))));
    }

    #[test]
    fn generators_are_deterministic() {
        let a: PointSet = uniform_random(10, 3, 42).unwrap();
        let b: PointSet = uniform_random(10, 3, 42).unwrap();
        let c: PointSet = uniform_random(10, 3, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"kind":"shifted","n":8,"seed":5,"b":0.1,"inner":{"kind":"sobol","n":8,"d":2}}"#;
        let spec: GeneratorSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.output_dim(), Some(2));
        let p: PointSet = spec.generate().unwrap();
        assert_eq!(p.n_points(), 8);
        let again: GeneratorSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"nope","n":3}"#).is_err());
        assert_eq!("lifted-sobol".parse::<GeneratorKind>().unwrap(), GeneratorKind::LiftedSobol);
    }

    #[test]
    fn single_precision_generation() {
        let s32: PointSet<f32> = sobol(64, 4, 0).unwrap();
        let s64: PointSet = sobol(64, 4, 0).unwrap();
        for (a, b) in s32.coords().iter().zip(s64.coords()) {
            assert!((*a as f64 - b).abs() < 1e-7);
        }
    }
}

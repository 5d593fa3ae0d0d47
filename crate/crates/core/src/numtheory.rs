//! Prime generation, the classical factorization oracle, and spectrum
//! builders consumed by every other module.
//!
//! A table of the first `M = 2^d` primes doubles as the factorization
//! cutoff: integers up to `2^d` (the table length) can be decomposed, and
//! every prime factor of such an integer is guaranteed to appear in the
//! table, since `pi(2^d) < 2^d`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on sieve size; covers cutoff exponents up to `d = 21` with room.
pub const MAX_PRIMES: usize = 4_000_000;

/// Ordered table of the first `M` primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPrimeTable")]
pub struct PrimeTable {
    m: usize,
    primes: Vec<u64>,
}

#[derive(Deserialize)]
struct RawPrimeTable {
    m: usize,
    primes: Vec<u64>,
}

impl TryFrom<RawPrimeTable> for PrimeTable {
    type Error = String;

    fn try_from(raw: RawPrimeTable) -> std::result::Result<Self, String> {
        if raw.primes.len() != raw.m {
            return Err(format!(
                "m = {} but {} primes listed",
                raw.m,
                raw.primes.len()
            ));
        }
        if raw.primes.first().is_some_and(|&p| p != 2) {
            return Err("prime table must start at 2".into());
        }
        if !raw.primes.windows(2).all(|w| w[0] < w[1]) {
            return Err("prime table must be strictly increasing".into());
        }
        if let Some(&bad) = raw.primes.iter().find(|&&p| !is_prime(p)) {
            return Err(format!("table entry {bad} is not prime"));
        }
        Ok(PrimeTable {
            m: raw.m,
            primes: raw.primes,
        })
    }
}

impl PrimeTable {
    /// Sieve the first `m` primes.
    pub fn new(m: usize) -> Result<Self> {
        let primes = sieve(m)?;
        Ok(PrimeTable { m, primes })
    }

    /// Table for cutoff exponent `d`, i.e. the first `2^d` primes.
    pub fn for_cutoff_exponent(d: u32) -> Result<Self> {
        if d == 0 || d > 21 {
            return Err(Error::OutOfRange {
                what: "cutoff exponent d",
                value: d as u64,
                min: 1,
                max: 21,
            });
        }
        Self::new(1usize << d)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Largest integer this table can factor: a table of the first `2^d`
    /// primes serves the cutoff `N <= 2^d`, which equals its length.
    pub fn cutoff(&self) -> u64 {
        self.m as u64
    }

    pub fn get(&self, index: usize) -> Option<u64> {
        self.primes.get(index).copied()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }
}

/// Trial-division primality check.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// First `m` primes via a bit-packed sieve of Eratosthenes.
pub fn sieve(m: usize) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::OutOfRange {
            what: "prime count M",
            value: 0,
            min: 1,
            max: MAX_PRIMES as u64,
        });
    }
    if m > MAX_PRIMES {
        return Err(Error::ResourceLimit {
            what: "prime count M",
            requested: m as u64,
            cap: MAX_PRIMES as u64,
        });
    }
    // p_m < m (ln m + ln ln m) for m >= 6
    let bound = if m < 6 {
        14usize
    } else {
        let mf = m as f64;
        (mf * (mf.ln() + mf.ln().ln())).ceil() as usize + 1
    };
    let mut composite = vec![0u64; bound / 64 + 1];
    let is_set = |bits: &[u64], i: usize| bits[i >> 6] >> (i & 63) & 1 == 1;
    let mut primes = Vec::with_capacity(m);
    let mut i = 2usize;
    while i <= bound && primes.len() < m {
        if !is_set(&composite, i) {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j >> 6] |= 1 << (j & 63);
                j += i;
            }
        }
        i += 1;
    }
    debug_assert_eq!(primes.len(), m, "prime bound underestimated");
    Ok(primes)
}

/// Complete prime decomposition of `n`, keyed by prime with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    n: u64,
    factors: BTreeMap<u64, u32>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of distinct prime factors (the degeneracy `k`).
    pub fn distinct_count(&self) -> usize {
        self.factors.len()
    }

    /// Total multiplicity: the sum of all exponents.
    pub fn total_multiplicity(&self) -> u32 {
        self.factors.values().sum()
    }

    pub fn multiplicity(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    /// Ascending `(prime, multiplicity)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().map(|(&p, &a)| (p, a))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors.values().all(|&a| a == 1)
    }

    pub fn product(&self) -> u64 {
        self.factors.iter().map(|(&p, &a)| p.pow(a)).product()
    }

    /// Assemble a factorization from measured `(prime, multiplicity)` pairs.
    pub fn from_pairs(n: u64, pairs: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut factors = BTreeMap::new();
        for (p, a) in pairs {
            *factors.entry(p).or_insert(0) += a;
        }
        Factorization { n, factors }
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (&p, &a) in &self.factors {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if a == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{a}")?;
            }
        }
        Ok(())
    }
}

/// Ground-truth trial-division factorization of `n >= 2`.
pub fn factor_oracle(n: u64) -> Result<Factorization> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "integer N",
            value: n,
            min: 2,
            max: u64::MAX,
        });
    }
    let mut rest = n;
    let mut factors = BTreeMap::new();
    let mut push = |p: u64, rest: &mut u64| {
        let mut a = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            a += 1;
        }
        if a > 0 {
            factors.insert(p, a);
        }
    };
    push(2, &mut rest);
    let mut p = 3;
    while p * p <= rest {
        push(p, &mut rest);
        p += 2;
    }
    if rest > 1 {
        factors.insert(rest, 1);
    }
    Ok(Factorization { n, factors })
}

/// Which set of energies a spectrum is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectrumSpec {
    /// Natural logarithms of the first `levels` primes.
    LogPrimes { levels: usize },
    /// Natural logarithms of consecutive integers. Starts at `ln 2` unless
    /// `include_unity` prepends `ln 1 = 0`.
    LogIntegers { levels: usize, include_unity: bool },
    /// The first `levels` primes themselves.
    Primes { levels: usize },
    /// Consecutive integers starting at 2.
    Integers { levels: usize },
    /// Caller-supplied strictly increasing energies.
    Custom { values: Vec<f64> },
}

impl SpectrumSpec {
    pub fn levels(&self) -> usize {
        match self {
            SpectrumSpec::LogPrimes { levels }
            | SpectrumSpec::LogIntegers { levels, .. }
            | SpectrumSpec::Primes { levels }
            | SpectrumSpec::Integers { levels } => *levels,
            SpectrumSpec::Custom { values } => values.len(),
        }
    }
}

/// Strictly increasing list of energies described by `spec`.
pub fn spectrum_values(spec: &SpectrumSpec) -> Result<Vec<f64>> {
    let levels = spec.levels();
    if levels == 0 {
        return Err(Error::OutOfRange {
            what: "spectrum levels",
            value: 0,
            min: 1,
            max: MAX_PRIMES as u64,
        });
    }
    let values = match spec {
        SpectrumSpec::LogPrimes { levels } => sieve(*levels)?
            .into_iter()
            .map(|p| (p as f64).ln())
            .collect(),
        SpectrumSpec::LogIntegers {
            levels,
            include_unity,
        } => {
            let start = if *include_unity { 1u64 } else { 2 };
            (start..start + *levels as u64)
                .map(|m| (m as f64).ln())
                .collect()
        }
        SpectrumSpec::Primes { levels } => sieve(*levels)?.into_iter().map(|p| p as f64).collect(),
        SpectrumSpec::Integers { levels } => (2..2 + *levels as u64).map(|m| m as f64).collect(),
        SpectrumSpec::Custom { values } => {
            if !values.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(
                    "custom spectrum contains non-finite values".into(),
                ));
            }
            if !values.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidInput(
                    "custom spectrum must be strictly increasing".into(),
                ));
            }
            values.clone()
        }
    };
    Ok(values)
}

/// One even number together with a witness decomposition, when found.
#[derive(Debug, Clone, Serialize)]
pub struct GoldbachEntry {
    pub even: u64,
    pub witness: Option<(u64, u64)>,
}

/// Result of comparing the two-copy energy spectrum `{ln p + ln q}` against
/// the product spectrum `{ln(p*q)}` over all table pairs.
#[derive(Debug, Clone, Serialize)]
pub struct TwoCopyCheck {
    pub pair_count: usize,
    /// Largest pointwise deviation `|ln p + ln q - ln(p q)|`.
    pub max_abs_dev: f64,
    /// Every energy sum exponentiates back to the exact integer product.
    pub exact_products: bool,
}

/// Desk-scale check of the even-number coverage claim for the table of the
/// first `2^d` primes, plus the two-copy spectrum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct GoldbachReport {
    pub max_even: u64,
    pub d: u32,
    pub entries: Vec<GoldbachEntry>,
    pub two_copy: TwoCopyCheck,
}

impl GoldbachReport {
    pub fn all_covered(&self) -> bool {
        self.entries.iter().all(|e| e.witness.is_some())
    }

    pub fn uncovered(&self) -> Vec<u64> {
        self.entries
            .iter()
            .filter(|e| e.witness.is_none())
            .map(|e| e.even)
            .collect()
    }
}

/// For every even `E` in `[4, max_even]`, search for primes `p, q` in the
/// `2^d`-entry table with `p + q = E`. Separately verify that the spectrum of
/// two copies of the log-prime Hamiltonian, `{ln p + ln q}`, coincides with
/// the logarithms of pairwise products `{ln(p q)}`.
pub fn goldbach_check(max_even: u64, d: u32) -> Result<GoldbachReport> {
    if max_even < 4 || !max_even.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "max_even must be an even integer >= 4, got {max_even}"
        )));
    }
    let table = PrimeTable::for_cutoff_exponent(d)?;
    let primes = table.as_slice();

    let mut entries = Vec::new();
    let mut even = 4;
    while even <= max_even {
        let mut witness = None;
        for &p in primes {
            if p > even / 2 {
                break;
            }
            let q = even - p;
            if table.contains(q) {
                witness = Some((p, q));
                break;
            }
        }
        entries.push(GoldbachEntry { even, witness });
        even += 2;
    }

    // Unordered pairs (p, q), p <= q, including p == q.
    let mut max_abs_dev = 0.0f64;
    let mut exact_products = true;
    let mut pair_count = 0;
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i..] {
            let sum = (p as f64).ln() + (q as f64).ln();
            let product = p * q;
            let dev = (sum - (product as f64).ln()).abs();
            max_abs_dev = max_abs_dev.max(dev);
            exact_products &= sum.exp().round() as u64 == product;
            pair_count += 1;
        }
    }

    Ok(GoldbachReport {
        max_even,
        d,
        entries,
        two_copy: TwoCopyCheck {
            pair_count,
            max_abs_dev,
            exact_products,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent primality check by trial division.
    fn is_prime_trial(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn sieve_first_eight() {
        assert_eq!(sieve(8).unwrap(), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn sieve_single() {
        assert_eq!(sieve(1).unwrap(), vec![2]);
    }

    #[test]
    fn sieve_thirty_two_contains_67() {
        let p = sieve(32).unwrap();
        assert_eq!(p.len(), 32);
        assert!(p.contains(&67));
        assert_eq!(&p[30..], &[127, 131]);
        assert!(p.iter().all(|&q| is_prime_trial(q)));
    }

    #[test]
    fn sieve_rejects_zero_and_huge() {
        assert!(matches!(sieve(0), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            sieve(MAX_PRIMES + 1),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn sieve_hundred_thousand_all_prime() {
        let p = sieve(100_000).unwrap();
        assert_eq!(p.len(), 100_000);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p.iter().all(|&q| is_prime_trial(q)));
    }

    #[test]
    fn prime_number_theorem_sanity() {
        // p_n / (n ln n) -> 1; at n = 10^4 the ratio is within 20%.
        let n = 10_000usize;
        let p_n = sieve(n).unwrap()[n - 1] as f64;
        let approx = n as f64 * (n as f64).ln();
        assert!((p_n / approx - 1.0).abs() < 0.2, "ratio {}", p_n / approx);
    }

    #[test]
    fn factor_oracle_examples() {
        let f = factor_oracle(231).unwrap();
        assert_eq!(f.pairs().collect::<Vec<_>>(), vec![(3, 1), (7, 1), (11, 1)]);
        assert_eq!(f.distinct_count(), 3);

        let f = factor_oracle(13).unwrap();
        assert_eq!(f.pairs().collect::<Vec<_>>(), vec![(13, 1)]);
        assert!(f.is_prime());

        let f = factor_oracle(360).unwrap();
        assert_eq!(f.pairs().collect::<Vec<_>>(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(f.total_multiplicity(), 6);
    }

    #[test]
    fn factor_oracle_rejects_below_two() {
        assert!(factor_oracle(0).is_err());
        assert!(factor_oracle(1).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let v = spectrum_values(&SpectrumSpec::LogPrimes { levels: 3 }).unwrap();
        assert_eq!(v, vec![2f64.ln(), 3f64.ln(), 5f64.ln()]);

        let v = spectrum_values(&SpectrumSpec::Integers { levels: 4 }).unwrap();
        assert_eq!(v, vec![2.0, 3.0, 4.0, 5.0]);

        let v = spectrum_values(&SpectrumSpec::LogIntegers {
            levels: 3,
            include_unity: true,
        })
        .unwrap();
        assert_eq!(v, vec![0.0, 2f64.ln(), 3f64.ln()]);

        let v = spectrum_values(&SpectrumSpec::LogIntegers {
            levels: 3,
            include_unity: false,
        })
        .unwrap();
        assert_eq!(v, vec![2f64.ln(), 3f64.ln(), 4f64.ln()]);
    }

    #[test]
    fn spectrum_rejects_bad_custom() {
        let spec = SpectrumSpec::Custom {
            values: vec![0.0, 1.0, 1.0],
        };
        assert!(spectrum_values(&spec).is_err());
        let spec = SpectrumSpec::Custom {
            values: vec![0.0, f64::NAN],
        };
        assert!(spectrum_values(&spec).is_err());
    }

    #[test]
    fn goldbach_small_windows() {
        let r = goldbach_check(10, 4).unwrap();
        assert!(r.all_covered());
        assert_eq!(r.entries.len(), 4); // 4, 6, 8, 10

        let r = goldbach_check(4, 1).unwrap();
        assert!(r.all_covered());
        assert_eq!(r.entries[0].witness, Some((2, 2)));
    }

    #[test]
    fn goldbach_two_copy_spectrum_matches_products() {
        let r = goldbach_check(4, 2).unwrap();
        // table [2,3,5,7]: 10 unordered pairs
        assert_eq!(r.two_copy.pair_count, 10);
        assert!(r.two_copy.exact_products);
        assert!(
            r.two_copy.max_abs_dev < 1e-12,
            "dev {}",
            r.two_copy.max_abs_dev
        );
    }

    #[test]
    fn goldbach_rejects_odd_or_small() {
        assert!(goldbach_check(3, 3).is_err());
        assert!(goldbach_check(7, 3).is_err());
    }

    #[test]
    fn cutoff_equals_table_length() {
        let t = PrimeTable::for_cutoff_exponent(3).unwrap();
        assert_eq!(t.cutoff(), 8);
        assert_eq!(t.len(), 8);
        // every prime <= 2^d is in the first 2^d primes
        assert!(t.as_slice().iter().filter(|&&p| p <= 8).count() == 4);
    }

    #[test]
    fn prime_table_json_round_trip() {
        let t = PrimeTable::new(5).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"primes\":[2,3,5,7,11]"));
        let back: PrimeTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        // tampered tables are rejected
        assert!(serde_json::from_str::<PrimeTable>("{\"m\":2,\"primes\":[2,4]}").is_err());
    }

    #[test]
    fn factorization_json_uses_decimal_string_keys() {
        let f = factor_oracle(360).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"2\":3"), "{json}");
        assert!(json.contains("\"3\":2"), "{json}");
        assert!(json.contains("\"5\":1"), "{json}");
        let back: Factorization = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn factor_oracle_round_trips(n in 2u64..=1_000_000) {
            let f = factor_oracle(n).unwrap();
            prop_assert_eq!(f.product(), n);
            for (p, a) in f.pairs() {
                prop_assert!(is_prime_trial(p));
                prop_assert!(a >= 1);
            }
        }

        #[test]
        fn sieve_prefix_consistent(m in 1usize..=2_000) {
            let long = sieve(2_000).unwrap();
            let short = sieve(m).unwrap();
            prop_assert_eq!(&long[..m], &short[..]);
        }

        #[test]
        fn spectra_strictly_increasing(levels in 1usize..200, kind in 0u8..4) {
            let spec = match kind {
                0 => SpectrumSpec::LogPrimes { levels },
                1 => SpectrumSpec::LogIntegers { levels, include_unity: levels % 2 == 0 },
                2 => SpectrumSpec::Primes { levels },
                _ => SpectrumSpec::Integers { levels },
            };
            let v = spectrum_values(&spec).unwrap();
            prop_assert_eq!(v.len(), levels);
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

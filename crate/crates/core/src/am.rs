//! Exact SU(2) coupling coefficients.
//!
//! Clebsch-Gordan coefficients use the Condon-Shortley phase and Racah's
//! closed-form alternating sum.  Recoupling uses the unitary Racah
//! coefficient `U(abcd;ef) = ⟨(ab)e,d;c | a,(bd)f;c⟩`.  Both are exact
//! [`Radical`]s: the alternating sums are integers over factorials, so the
//! square of every coefficient is rational.
//!
//! Spins and projections are carried doubled (`2j`, `2m`) throughout.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radical::Radical;

/// Angular momentum `j`, stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spin(u32);

impl Spin {
    pub const ZERO: Spin = Spin(0);
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    pub const fn integer(j: u32) -> Self {
        Spin(2 * j)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn as_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }

    pub fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Doubled projections `-2j, -2j+2, …, 2j`.
    pub fn projections(self) -> impl Iterator<Item = i32> + Clone {
        let tj = self.0 as i32;
        (-tj..=tj).step_by(2)
    }

    /// `2j + 1`.
    pub fn multiplicity(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Formats a doubled quantity as an integer or half-integer.
pub fn fmt_half(twice: i32) -> String {
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

fn factorial_table() -> &'static RwLock<Vec<BigInt>> {
    static TABLE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![BigInt::one()]))
}

/// `n!` from a shared, lazily grown table.
pub fn factorial(n: u32) -> BigInt {
    let n = n as usize;
    {
        let table = factorial_table().read().unwrap();
        if let Some(f) = table.get(n) {
            return f.clone();
        }
    }
    let mut table = factorial_table().write().unwrap();
    while table.len() <= n {
        let k = table.len();
        let next = &table[k - 1] * BigInt::from(k);
        table.push(next);
    }
    table[n].clone()
}

/// Factorial of a doubled argument that must be an even, non-negative number.
fn fact2(twice: i32) -> BigInt {
    debug_assert!(twice >= 0 && twice % 2 == 0);
    factorial((twice / 2) as u32)
}

fn triangle(ta: u32, tb: u32, tc: u32) -> bool {
    let (a, b, c) = (ta as i64, tb as i64, tc as i64);
    c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

fn phase(twice_exponent: i32) -> i8 {
    debug_assert!(twice_exponent % 2 == 0);
    if (twice_exponent / 2).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn check_projection(j: Spin, tm: i32, what: &str) -> Result<()> {
    if (j.0 as i32 - tm).rem_euclid(2) != 0 {
        return Err(Error::Input(format!(
            "projection {} incompatible with spin {} for {what}",
            fmt_half(tm),
            j
        )));
    }
    Ok(())
}

type CgKey = (u32, i32, u32, i32, u32);

fn cg_cache() -> &'static RwLock<HashMap<CgKey, Radical>> {
    static CACHE: OnceLock<RwLock<HashMap<CgKey, Radical>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Condon-Shortley coefficient `(j1 m1, j2 m2 | J M)` with doubled
/// projections.
///
/// Returns zero when `M ≠ m1 + m2`, a projection exceeds its spin, or the
/// triangle condition fails.  A projection whose parity does not match its
/// spin is an input error.
pub fn clebsch_gordan(j1: Spin, tm1: i32, j2: Spin, tm2: i32, j: Spin, tm: i32) -> Result<Radical> {
    check_projection(j1, tm1, "j1")?;
    check_projection(j2, tm2, "j2")?;
    check_projection(j, tm, "J")?;
    Ok(cg(j1, tm1, j2, tm2, j, tm))
}

/// [`clebsch_gordan`] for arguments already known to have valid parities.
pub(crate) fn cg(j1: Spin, tm1: i32, j2: Spin, tm2: i32, j: Spin, tm: i32) -> Radical {
    if tm1 + tm2 != tm
        || tm1.unsigned_abs() > j1.0
        || tm2.unsigned_abs() > j2.0
        || tm.unsigned_abs() > j.0
        || !triangle(j1.0, j2.0, j.0)
        || (j1.0 as i32 - tm1) % 2 != 0
        || (j2.0 as i32 - tm2) % 2 != 0
    {
        return Radical::zero();
    }
    // canonical ordering: j1 ≥ j2, then M ≥ 0 (m1 ≥ 0 when M = 0); each
    // reflection costs (−1)^{j1+j2−J}
    let sym = phase(j1.0 as i32 + j2.0 as i32 - j.0 as i32);
    let mut sign = 1i8;
    let (mut a, mut ma, mut b, mut mb) = (j1, tm1, j2, tm2);
    if a < b {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut ma, &mut mb);
        sign *= sym;
    }
    if tm < 0 || (tm == 0 && ma < 0) {
        ma = -ma;
        mb = -mb;
        sign *= sym;
    }
    let key = (a.0, ma, b.0, mb, j.0);
    if let Some(v) = cg_cache().read().unwrap().get(&key) {
        return if sign < 0 { -v } else { v.clone() };
    }
    let v = cg_racah(a, ma, b, mb, j);
    cg_cache().write().unwrap().insert(key, v.clone());
    if sign < 0 {
        -v
    } else {
        v
    }
}

fn cg_racah(j1: Spin, tm1: i32, j2: Spin, tm2: i32, j: Spin) -> Radical {
    let (a, b, c) = (j1.0 as i32, j2.0 as i32, j.0 as i32);
    let tm = tm1 + tm2;
    let mut prefactor = BigRational::new(
        BigInt::from(c + 1) * fact2(c + a - b) * fact2(c - a + b) * fact2(a + b - c),
        fact2(a + b + c + 2),
    );
    prefactor *= BigRational::from_integer(
        fact2(c + tm) * fact2(c - tm) * fact2(a - tm1) * fact2(a + tm1) * fact2(b - tm2) * fact2(b + tm2),
    );
    // k runs over doubled values keeping every factorial argument ≥ 0
    let lo = 0.max(b - c - tm1).max(a - c + tm2);
    let hi = (a + b - c).min(a - tm1).min(b + tm2);
    let mut sum = BigRational::zero();
    let mut k = lo;
    while k <= hi {
        let den = fact2(k)
            * fact2(a + b - c - k)
            * fact2(a - tm1 - k)
            * fact2(b + tm2 - k)
            * fact2(c - b + tm1 + k)
            * fact2(c - a - tm2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if (k / 2) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 2;
    }
    let sign = if sum.is_zero() {
        0
    } else if sum.is_negative() {
        -1
    } else {
        1
    };
    Radical::new(sign, prefactor * &sum * &sum)
}

type SixJKey = [u32; 6];

fn sixj_cache() -> &'static RwLock<HashMap<SixJKey, Radical>> {
    static CACHE: OnceLock<RwLock<HashMap<SixJKey, Radical>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Wigner 6j symbol `{a b c; d e f}` (doubled arguments).
pub fn six_j(a: Spin, b: Spin, c: Spin, d: Spin, e: Spin, f: Spin) -> Radical {
    let t = [a.0, b.0, c.0, d.0, e.0, f.0];
    if !triangle(t[0], t[1], t[2])
        || !triangle(t[0], t[4], t[5])
        || !triangle(t[3], t[1], t[5])
        || !triangle(t[3], t[4], t[2])
    {
        return Radical::zero();
    }
    let key = canonical_six_j(t);
    if let Some(v) = sixj_cache().read().unwrap().get(&key) {
        return v.clone();
    }
    let v = six_j_racah(key);
    sixj_cache().write().unwrap().insert(key, v.clone());
    v
}

/// Lexicographically smallest of the 24 tetrahedral images of a 6j symbol.
fn canonical_six_j(t: [u32; 6]) -> SixJKey {
    let cols = [(t[0], t[3]), (t[1], t[4]), (t[2], t[5])];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best: Option<SixJKey> = None;
    for p in perms {
        let c = [cols[p[0]], cols[p[1]], cols[p[2]]];
        // swap upper/lower entries in any two columns (or none)
        for flip in [[false, false, false], [true, true, false], [true, false, true], [false, true, true]] {
            let mut k = [0u32; 6];
            for i in 0..3 {
                let (u, l) = if flip[i] { (c[i].1, c[i].0) } else { c[i] };
                k[i] = u;
                k[i + 3] = l;
            }
            if best.is_none_or(|b| k < b) {
                best = Some(k);
            }
        }
    }
    best.unwrap()
}

fn delta_sq(a: i32, b: i32, c: i32) -> BigRational {
    BigRational::new(
        fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c),
        fact2(a + b + c + 2),
    )
}

fn six_j_racah(t: [u32; 6]) -> Radical {
    let [a, b, c, d, e, f] = t.map(|x| x as i32);
    let prefactor = delta_sq(a, b, c) * delta_sq(a, e, f) * delta_sq(d, b, f) * delta_sq(d, e, c);
    let lo = (a + b + c).max(a + e + f).max(d + b + f).max(d + e + c);
    let hi = (a + b + d + e).min(a + c + d + f).min(b + c + e + f);
    let mut sum = BigRational::zero();
    let mut k = lo;
    while k <= hi {
        let num = fact2(k + 2);
        let den = fact2(k - a - b - c)
            * fact2(k - a - e - f)
            * fact2(k - d - b - f)
            * fact2(k - d - e - c)
            * fact2(a + b + d + e - k)
            * fact2(a + c + d + f - k)
            * fact2(b + c + e + f - k);
        let term = BigRational::new(num, den);
        if (k / 2) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 2;
    }
    let sign = if sum.is_zero() {
        0
    } else if sum.is_negative() {
        -1
    } else {
        1
    };
    Radical::new(sign, prefactor * &sum * &sum)
}

/// Unitary Racah coefficient `U(abcd; ef)`:
/// the overlap `⟨(ab)e, d; c | a, (bd)f; c⟩`.
///
/// Zero whenever one of the four couplings is not triangular.
pub fn racah_u(a: Spin, b: Spin, c: Spin, d: Spin, e: Spin, f: Spin) -> Radical {
    let w = six_j(a, b, e, d, c, f);
    if w.is_zero() {
        return w;
    }
    let ph = phase((a.0 + b.0 + c.0 + d.0) as i32);
    let norm = Radical::sqrt(BigRational::from_integer(BigInt::from(
        (e.0 as u64 + 1) * (f.0 as u64 + 1),
    )));
    let v = &norm * &w;
    if ph < 0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn s(twice: u32) -> Spin {
        Spin::from_twice(twice)
    }

    #[test]
    fn coupling_with_zero_is_one() {
        for tj in 0..8 {
            for tm in s(tj).projections() {
                assert_eq!(cg(s(tj), tm, Spin::ZERO, 0, s(tj), tm), Radical::one());
            }
        }
    }

    #[test]
    fn triangle_violation_is_zero() {
        assert!(cg(Spin::ONE, 0, Spin::ONE, 0, s(6), 0).is_zero());
        assert!(cg(Spin::ONE, 2, Spin::ONE, 0, Spin::ONE, 0).is_zero());
    }

    #[test]
    fn parity_mismatch_is_input_error() {
        assert!(matches!(
            clebsch_gordan(Spin::HALF, 0, Spin::HALF, 1, Spin::ONE, 1),
            Err(Error::Input(_))
        ));
    }

    /// Brute force: diagonalise total J² on the product of two spin-½
    /// spaces and read the singlet with the Condon-Shortley phase
    /// (⟨½ ½, ½ −½|0 0⟩ > 0).
    #[test]
    fn singlet_from_product_space_diagonalisation() {
        // basis |m1 m2⟩: ++, +-, -+, --
        let sp = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let sz = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
        let id = DMatrix::<f64>::identity(2, 2);
        let jz = sz.kronecker(&id) + id.kronecker(&sz);
        let jp = sp.kronecker(&id) + id.kronecker(&sp);
        let jm = jp.transpose();
        let j2 = &jz * &jz + 0.5 * (&jp * &jm + &jm * &jp);
        let eig = SymmetricEigen::new(j2);
        let idx = (0..4).find(|&i| eig.eigenvalues[i].abs() < 1e-12).unwrap();
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        if v[1] < 0.0 {
            v = -v;
        }
        let expected = cg(Spin::HALF, 1, Spin::HALF, -1, Spin::ZERO, 0);
        assert_eq!(expected, Radical::sqrt_ratio(1, 2));
        assert!((v[1] - expected.to_f64()).abs() < 1e-12);
        assert!((v[2] - cg(Spin::HALF, -1, Spin::HALF, 1, Spin::ZERO, 0).to_f64()).abs() < 1e-12);
    }

    #[test]
    fn known_values() {
        // (1 0, 1 0 | 2 0) = √(2/3), (1 1, 1 -1 | 1 0) = √(1/2)
        assert_eq!(cg(s(2), 0, s(2), 0, s(4), 0), Radical::sqrt_ratio(2, 3));
        assert_eq!(cg(s(2), 2, s(2), -2, s(2), 0), Radical::sqrt_ratio(1, 2));
        assert!(cg(s(2), 0, s(2), 0, s(2), 0).is_zero());
        // (2 0, 2 0 | 2 0) = −√(2/7)
        assert_eq!(cg(s(4), 0, s(4), 0, s(4), 0), Radical::new(-1, BigRational::new(2.into(), 7.into())));
    }

    /// U from its defining contraction over magnetic quantum numbers:
    /// U(abcd;ef) = Σ (a α, b β|e ε)(e ε, d δ|c γ)(b β, d δ|f φ)(a α, f φ|c γ)
    /// for any fixed γ.
    fn racah_u_by_contraction(t: [u32; 6]) -> f64 {
        let [a, b, c, d, e, f] = t.map(s);
        let tg = c.twice() as i32;
        let mut sum = 0.0;
        for ta in a.projections() {
            for tb in b.projections() {
                let td = tg - ta - tb;
                if td.unsigned_abs() > d.twice() {
                    continue;
                }
                sum += cg(a, ta, b, tb, e, ta + tb).to_f64()
                    * cg(e, ta + tb, d, td, c, tg).to_f64()
                    * cg(b, tb, d, td, f, tb + td).to_f64()
                    * cg(a, ta, f, tb + td, c, tg).to_f64();
            }
        }
        sum
    }

    #[test]
    fn racah_u_matches_contraction() {
        // U(½ ½ ½ ½; 0 1) = √3/2, fixed by the contraction oracle
        let half = Spin::HALF;
        let u = racah_u(half, half, half, half, Spin::ZERO, Spin::ONE);
        let oracle = racah_u_by_contraction([1, 1, 1, 1, 0, 2]);
        assert!((u.to_f64() - oracle).abs() < 1e-14);
        assert_eq!(u, Radical::sqrt_ratio(3, 4));
        for t in [[2, 1, 3, 2, 1, 3], [4, 2, 3, 1, 2, 3], [3, 2, 1, 2, 1, 2], [4, 4, 4, 4, 2, 4]] {
            let direct = racah_u(s(t[0]), s(t[1]), s(t[2]), s(t[3]), s(t[4]), s(t[5])).to_f64();
            assert!((direct - racah_u_by_contraction(t)).abs() < 1e-13, "{t:?}");
        }
    }

    #[test]
    fn racah_u_with_zero_spin() {
        for ta in 0..6 {
            for td in 0..6 {
                for tc in 0..12 {
                    if !triangle(ta, td, tc) {
                        continue;
                    }
                    assert_eq!(racah_u(s(ta), Spin::ZERO, s(tc), s(td), s(ta), s(td)), Radical::one());
                }
            }
        }
    }

    #[test]
    fn six_j_symmetry_cache_consistent() {
        let a = six_j(s(2), s(4), s(2), s(4), s(2), s(4));
        let b = six_j(s(4), s(2), s(2), s(2), s(4), s(4));
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #[test]
        fn cg_exchange_symmetry(tj1 in 0u32..9, tj2 in 0u32..9, dj in 0u32..9, pick1 in 0usize..9, pick2 in 0usize..9) {
            let tj = (tj1 as i64 - tj2 as i64).unsigned_abs() as u32 + 2 * (dj % (tj1.min(tj2) + 1));
            let (j1, j2, j) = (s(tj1), s(tj2), s(tj));
            let m1: Vec<i32> = j1.projections().collect();
            let m2: Vec<i32> = j2.projections().collect();
            let (a, b) = (m1[pick1 % m1.len()], m2[pick2 % m2.len()]);
            let lhs = cg(j1, a, j2, b, j, a + b);
            let rhs = cg(j2, b, j1, a, j, a + b);
            let ph = phase(tj1 as i32 + tj2 as i32 - tj as i32);
            proptest::prop_assert_eq!(lhs, if ph < 0 { -rhs } else { rhs });
        }
    }
}

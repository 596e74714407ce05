//! u(3) irreps in the canonical U(2)-coupled basis.
//!
//! States `|j S M⟩` come from Gelfand-Tsetlin patterns: `S` is the
//! u(2) spin, `2j` counts the quanta lowered out of the highest-grade
//! u(2) irrep.  `C12, C13` carry an `e` spin-½ tensor lowering `j`,
//! `C21, C31` an `f` tensor raising it; their reduced matrix elements are
//! closed-form products of Racah coefficients and norm ratios.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::am::{cg, fmt_half, racah_u, Spin};
use crate::error::{Error, Result};
use crate::kmatrix::{GammaRep, GeneratorGrade, SBlock, Sector};
use crate::matrix::{OperatorMatrix, Precision};
use crate::radical::{parse_rational, Radical};
use crate::repcheck::c_name;

/// Highest weight `{l1 l2 l3}`: rationals with integer, non-increasing
/// differences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct U3HighestWeight {
    l: [BigRational; 3],
}

impl U3HighestWeight {
    pub fn new(l1: BigRational, l2: BigRational, l3: BigRational) -> Result<Self> {
        for (a, b) in [(&l1, &l2), (&l2, &l3)] {
            let d = a - b;
            if !d.is_integer() || d.is_negative() {
                return Err(Error::Input(format!(
                    "weight {{{l1},{l2},{l3}}} needs l1 ≥ l2 ≥ l3 with integer differences"
                )));
            }
        }
        Ok(Self { l: [l1, l2, l3] })
    }

    pub fn from_integers(l1: i64, l2: i64, l3: i64) -> Result<Self> {
        Self::new(
            BigRational::from_integer(l1.into()),
            BigRational::from_integer(l2.into()),
            BigRational::from_integer(l3.into()),
        )
    }

    pub fn l(&self, i: usize) -> &BigRational {
        &self.l[i]
    }

    fn diff(&self, a: usize, b: usize) -> u32 {
        (&self.l[a] - &self.l[b]).to_integer().to_u32().expect("weight differences fit in u32")
    }

    /// `l1 − l2`.
    pub fn lambda(&self) -> u32 {
        self.diff(0, 1)
    }

    /// `l2 − l3`.
    pub fn mu(&self) -> u32 {
        self.diff(1, 2)
    }

    /// Intrinsic spin `s = (l2 − l3)/2`.
    pub fn s(&self) -> Spin {
        Spin::from_twice(self.mu())
    }

    /// `½(l1−l2+1)(l2−l3+1)(l1−l3+2)`.
    pub fn dim(&self) -> usize {
        let (a, b) = (self.lambda() as usize, self.mu() as usize);
        (a + 1) * (b + 1) * (a + b + 2) / 2
    }

    /// Largest `j` present, doubled: `λ + μ`.
    pub fn twice_j_max(&self) -> u32 {
        self.lambda() + self.mu()
    }
}

impl fmt::Display for U3HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.l[0], self.l[1], self.l[2])
    }
}

impl FromStr for U3HighestWeight {
    type Err = Error;

    /// Parses `l1,l2,l3`; each part may be an integer, `p/q` or a decimal.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().trim_matches(|c| c == '{' || c == '}').split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three comma-separated weights, got {s:?}")));
        }
        Self::new(parse_rational(parts[0])?, parse_rational(parts[1])?, parse_rational(parts[2])?)
    }
}

/// Canonical basis label `(j, S, M)` with `M` doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalLabel {
    pub j: Spin,
    #[serde(rename = "S")]
    pub spin: Spin,
    #[serde(rename = "2M")]
    pub tm: i32,
}

impl fmt::Display for CanonicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j={},S={},M={}", self.j, self.spin, fmt_half(self.tm))
    }
}

/// Whether `(j, S)` occurs in the irrep: `|j−s| ≤ S ≤ j+s`, integral
/// coupling, and `j + S ≤ λ + s`.
pub fn is_admissible(hw: &U3HighestWeight, j: Spin, spin: Spin) -> bool {
    let (tj, ts, tss) = (j.twice() as i64, spin.twice() as i64, hw.mu() as i64);
    tj <= hw.twice_j_max() as i64
        && ts >= (tj - tss).abs()
        && ts <= tj + tss
        && (tj + ts + tss) % 2 == 0
        && tj + ts <= 2 * hw.lambda() as i64 + tss
}

/// Gelfand-Tsetlin patterns `l2 ≤ m12 ≤ l1`, `l3 ≤ m22 ≤ l2` mapped to
/// `S = (m12 − m22)/2`, `2j = m12 + m22 − l2 − l3`, with every `M`; sorted
/// by `(2j, 2S, 2M)`.
pub fn basis_enumeration(hw: &U3HighestWeight) -> Vec<CanonicalLabel> {
    let (lam, mu) = (hw.lambda() as i32, hw.mu() as i32);
    let mut out = Vec::with_capacity(hw.dim());
    for a in 0..=lam {
        for b in 0..=mu {
            let ts = (a - b + mu) as u32;
            let tj = (a + b) as u32;
            for tm in Spin::from_twice(ts).projections() {
                out.push(CanonicalLabel {
                    j: Spin::from_twice(tj),
                    spin: Spin::from_twice(ts),
                    tm,
                });
            }
        }
    }
    out.sort();
    out
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn spin_sq(s: Spin) -> BigRational {
    let v = s.as_rational();
    &v * (&v + BigRational::one())
}

/// `Ω = (2l1 − l2 − l3) j − S(S+1) + s(s+1) − j(j−2)`.
pub fn omega(hw: &U3HighestWeight, j: Spin, spin: Spin) -> BigRational {
    let jr = j.as_rational();
    let c = BigRational::from_integer((2 * hw.lambda() + hw.mu()).into());
    &c * &jr - spin_sq(spin) + spin_sq(hw.s()) - &jr * (&jr - rat(2, 1))
}

/// `|K_{j+½,S'} / K_{jS}|² = ½(2l1−l2−l3) + S(S+1) − S'(S'+1) − j + ¾`.
///
/// A non-positive value between two admissible labels is a consistency
/// error; outside the irrep the raw value is returned.
pub fn k_ratio_sq(hw: &U3HighestWeight, j: Spin, spin: Spin, spin_p: Spin) -> Result<BigRational> {
    if (spin.twice() as i64 - spin_p.twice() as i64).abs() != 1 {
        return Err(Error::Input(format!("S' = {spin_p} must differ from S = {spin} by ½")));
    }
    let v = rat((2 * hw.lambda() + hw.mu()) as i64, 2) + spin_sq(spin) - spin_sq(spin_p) - j.as_rational()
        + rat(3, 4);
    let jp = Spin::from_twice(j.twice() + 1);
    if !v.is_positive() && is_admissible(hw, j, spin) && is_admissible(hw, jp, spin_p) {
        return Err(Error::Consistency(format!(
            "norm ratio {v} ≤ 0 between admissible states ({j},{spin}) and ({jp},{spin_p}) of {hw}"
        )));
    }
    Ok(v)
}

/// Which spin-½ tensor a reduced matrix element refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tensor {
    /// Lowers `j`: `⟨j S ‖e‖ j+½ S'⟩`.
    E,
    /// Raises `j`: `⟨j+½ S' ‖f‖ j S⟩`.
    F,
}

/// Reduced matrix element between `(j, S)` and `(j+½, S')`; zero when
/// either label lies outside the irrep.
pub fn reduced_me(hw: &U3HighestWeight, j: Spin, spin: Spin, spin_p: Spin, which: Tensor) -> Result<Radical> {
    let jp = Spin::from_twice(j.twice() + 1);
    if !is_admissible(hw, j, spin) || !is_admissible(hw, jp, spin_p) {
        return Ok(Radical::zero());
    }
    let ratio = k_ratio_sq(hw, j, spin, spin_p)?;
    let dims = BigRational::from_integer(((j.twice() + 1) * (spin_p.twice() + 1)).into());
    let u = racah_u(hw.s(), j, spin_p, Spin::HALF, spin, jp);
    let f = &(&Radical::sqrt(dims) * &u) * &Radical::sqrt(ratio);
    Ok(match which {
        Tensor::F => f,
        Tensor::E => {
            // (−1)^{S'−S+½}
            let odd = ((spin_p.twice() as i64 - spin.twice() as i64 + 1) / 2).rem_euclid(2) == 1;
            if odd {
                -f
            } else {
                f
            }
        }
    })
}

fn index_of(basis: &[CanonicalLabel]) -> HashMap<CanonicalLabel, usize> {
    basis.iter().enumerate().map(|(i, l)| (*l, i)).collect()
}

/// The nine `C_ij` on the canonical basis from [`basis_enumeration`].
pub fn assemble_generators(hw: &U3HighestWeight, precision: Precision) -> Result<BTreeMap<String, OperatorMatrix>> {
    let basis = basis_enumeration(hw);
    let index = index_of(&basis);
    let d = basis.len();
    let mut m: BTreeMap<String, OperatorMatrix> = BTreeMap::new();
    for i in 1..=3 {
        for k in 1..=3 {
            m.insert(c_name(i, k), OperatorMatrix::new(c_name(i, k), d));
        }
    }
    let half_sum = (hw.l(1) + hw.l(2)) / rat(2, 1);
    for (col, lab) in basis.iter().enumerate() {
        let jr = lab.j.as_rational();
        let mr = rat(lab.tm as i64, 2);
        let c11 = hw.l(0) - rat(2, 1) * &jr;
        let c22 = &half_sum + &jr + &mr;
        let c33 = &half_sum + &jr - &mr;
        for (name, v) in [("C11", c11), ("C22", c22), ("C33", c33)] {
            m.get_mut(name).unwrap().set(col, col, precision.entry(Radical::from_rational(v)));
        }
        // S+ and S− inside the (j, S) multiplet
        let ts = lab.spin.twice() as i64;
        let tm = lab.tm as i64;
        if tm < ts {
            let up = CanonicalLabel { tm: lab.tm + 2, ..*lab };
            let v = Radical::sqrt(rat((ts - tm) * (ts + tm + 2), 4));
            m.get_mut("C23").unwrap().set(index[&up], col, precision.entry(v.clone()));
            m.get_mut("C32").unwrap().set(col, index[&up], precision.entry(v));
        }
    }
    // f raises j: ⟨j+½ S' M'| f_m |j S M⟩ = (S M, ½ m | S' M') ⟨f⟩ / √(2S'+1)
    // e lowers j: ⟨j S M| e_m |j+½ S' M'⟩ = (S' M', ½ m | S M) ⟨e⟩ / √(2S+1)
    for (col, lab) in basis.iter().enumerate() {
        let jp = Spin::from_twice(lab.j.twice() + 1);
        for dsp in [-1i32, 1] {
            let tsp = lab.spin.twice() as i32 + dsp;
            if tsp < 0 {
                continue;
            }
            let spin_p = Spin::from_twice(tsp as u32);
            let fr = reduced_me(hw, lab.j, lab.spin, spin_p, Tensor::F)?;
            if fr.is_zero() {
                continue;
            }
            let er = reduced_me(hw, lab.j, lab.spin, spin_p, Tensor::E)?;
            let norm_f = Radical::sqrt(rat(1, tsp as i64 + 1));
            let norm_e = Radical::sqrt(rat(1, lab.spin.twice() as i64 + 1));
            for (tmm, f_name) in [(1, "C21"), (-1, "C31")] {
                let tmp = lab.tm + tmm;
                let Some(&row) = index.get(&CanonicalLabel {
                    j: jp,
                    spin: spin_p,
                    tm: tmp,
                }) else {
                    continue;
                };
                let cf = cg(lab.spin, lab.tm, Spin::HALF, tmm, spin_p, tmp);
                m.get_mut(f_name).unwrap().set(row, col, precision.entry(&(&cf * &fr) * &norm_f));
            }
            // e: source (j+½, S', M'), target (j, S, M) with M = M' + m
            for (tme, e_name, e_sign) in [(1, "C13", 1i64), (-1, "C12", -1)] {
                let tmp = lab.tm - tme;
                let Some(&src) = index.get(&CanonicalLabel {
                    j: jp,
                    spin: spin_p,
                    tm: tmp,
                }) else {
                    continue;
                };
                let ce = cg(spin_p, tmp, Spin::HALF, tme, lab.spin, lab.tm);
                let mut ev = &(&ce * &er) * &norm_e;
                if e_sign < 0 {
                    ev = -ev;
                }
                m.get_mut(e_name).unwrap().set(col, src, precision.entry(ev));
            }
        }
    }
    Ok(m)
}

/// Raw coupled label of the holomorphic realisation: `2j` may exceed the
/// irrep by one layer so that zero-norm states appear.
pub type RawLabel = CanonicalLabel;

/// The u(3) holomorphic realisation
///
/// ```text
/// C1k = ∂_k,  C11 = l1 − Σ z∂,  Cik = σ_ik + z_i ∂_k,
/// Ci1 = l1 z_i − Σ_k σ_ik z_k − z_i Σ z∂          (i, k ∈ {2, 3})
/// ```
///
/// on normalised monomials `φ_jm = z2^{j+m} z3^{j−m} / √((j+m)!(j−m)!)`
/// times intrinsic spin-`s` states, coupled to `(S, M)` with the intrinsic
/// spin first.  One sector per `(j, S, M)`, graded by `2j`, truncated at
/// `2j = λ + μ + 1`.  The seed is the identity on every `j = 0` sector.
pub fn holomorphic_gamma(hw: &U3HighestWeight) -> (GammaRep<f64>, Vec<SBlock<f64>>, Vec<RawLabel>) {
    let tss = hw.mu() as i32;
    let top = hw.twice_j_max() as i32 + 1;
    let mut raw = Vec::new();
    for tj in 0..=top {
        for ts in ((tj - tss).abs()..=tj + tss).step_by(2) {
            for tm in Spin::from_twice(ts as u32).projections() {
                raw.push(CanonicalLabel {
                    j: Spin::from_twice(tj as u32),
                    spin: Spin::from_twice(ts as u32),
                    tm,
                });
            }
        }
    }
    raw.sort();
    let index = index_of(&raw);
    let sectors = raw
        .iter()
        .map(|l| Sector {
            label: l.to_string(),
            grade: l.j.twice() as i64,
            dim: 1,
        })
        .collect();
    let mut gens = Vec::new();
    for i in 1..=3 {
        for k in 1..=3 {
            let grade = match (i, k) {
                (2 | 3, 1) => 1,
                (1, 2 | 3) => -1,
                _ => 0,
            };
            gens.push(GeneratorGrade {
                name: c_name(i, k),
                adjoint: c_name(k, i),
                grade,
            });
        }
    }
    let mut rep = GammaRep::new(sectors, gens).expect("adjoints are listed");

    let l1 = hw.l(0).to_f64().unwrap_or(f64::NAN);
    let half_sum = ((hw.l(1) + hw.l(2)) / rat(2, 1)).to_f64().unwrap_or(f64::NAN);
    let s = tss as f64 / 2.0;
    let spin_s = Spin::from_twice(tss as u32);
    for (col, lab) in raw.iter().enumerate() {
        let tj = lab.j.twice() as i32;
        for tn in spin_s.projections() {
            let tm = lab.tm - tn;
            if tm.abs() > tj {
                continue;
            }
            let c = cg(spin_s, tn, lab.j, tm, lab.spin, lab.tm).to_f64();
            if c == 0.0 {
                continue;
            }
            let (j, m, nu) = (tj as f64 / 2.0, tm as f64 / 2.0, tn as f64 / 2.0);
            let s_up = ((s - nu) * (s + nu + 1.0)).max(0.0).sqrt();
            let s_dn = ((s + nu) * (s - nu + 1.0)).max(0.0).sqrt();
            // (generator, amplitude, Δ2j, Δ2m, Δ2ν)
            let terms: [(&str, f64, i32, i32, i32); 13] = [
                ("C11", l1 - 2.0 * j, 0, 0, 0),
                ("C22", half_sum + nu + j + m, 0, 0, 0),
                ("C33", half_sum - nu + j - m, 0, 0, 0),
                ("C23", s_up, 0, 0, 2),
                ("C23", ((j - m) * (j + m + 1.0)).max(0.0).sqrt(), 0, 2, 0),
                ("C32", s_dn, 0, 0, -2),
                ("C32", ((j + m) * (j - m + 1.0)).max(0.0).sqrt(), 0, -2, 0),
                ("C12", (j + m).max(0.0).sqrt(), -1, -1, 0),
                ("C13", (j - m).max(0.0).sqrt(), -1, 1, 0),
                ("C21", (l1 - 2.0 * j - half_sum - nu) * (j + m + 1.0).sqrt(), 1, 1, 0),
                ("C21", -s_up * (j - m + 1.0).sqrt(), 1, -1, 2),
                ("C31", (l1 - 2.0 * j - half_sum + nu) * (j - m + 1.0).sqrt(), 1, -1, 0),
                ("C31", -s_dn * (j + m + 1.0).sqrt(), 1, 1, -2),
            ];
            for (name, amp, dj, dm, dn) in terms {
                if amp == 0.0 {
                    continue;
                }
                let (tj2, tm2, tn2) = (tj + dj, tm + dm, tn + dn);
                if tj2 < 0 || tj2 > top || tm2.abs() > tj2 || tn2.abs() > tss {
                    continue;
                }
                let j2 = Spin::from_twice(tj2 as u32);
                let tmm = tm2 + tn2;
                for ts2 in ((tj2 - tss).abs()..=tj2 + tss).step_by(2) {
                    let spin2 = Spin::from_twice(ts2 as u32);
                    let proj = cg(spin_s, tn2, j2, tm2, spin2, tmm).to_f64();
                    if proj == 0.0 {
                        continue;
                    }
                    let row = index[&CanonicalLabel {
                        j: j2,
                        spin: spin2,
                        tm: tmm,
                    }];
                    rep.add(name, (row, 0), (col, 0), c * amp * proj).expect("grades match");
                }
            }
        }
    }
    let seed = raw
        .iter()
        .enumerate()
        .filter(|(_, l)| l.j.twice() == 0)
        .map(|(i, _)| SBlock::identity(i, 1))
        .collect();
    (rep, seed, raw)
}

/// Dense float copies of the generator matrices.
pub fn dense(mats: &BTreeMap<String, OperatorMatrix>) -> BTreeMap<String, DMatrix<f64>> {
    mats.iter().map(|(k, m)| (k.clone(), m.to_dense())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::kmatrix::{orthonormalize, relation_residual, solve_s_recursion, unitarize};
    use crate::repcheck::{
        casimir_matrix, commutator_residual, exact_casimir_matrix, exact_commutator_failures,
        exact_hermiticity_failures, exact_scalar, u3_spec,
    };
    use num_complex::Complex64;

    fn hw(a: i64, b: i64, c: i64) -> U3HighestWeight {
        U3HighestWeight::from_integers(a, b, c).unwrap()
    }

    fn surd(m: &BTreeMap<String, OperatorMatrix>) -> BTreeMap<String, crate::matrix::SurdMatrix> {
        m.iter().map(|(k, v)| (k.clone(), v.to_surd().unwrap())).collect()
    }

    #[test]
    fn weights_validated() {
        assert!(U3HighestWeight::from_integers(1, 2, 0).is_err());
        assert!(U3HighestWeight::new(rat(1, 2), rat(0, 1), rat(0, 1)).is_err());
        let shifted: U3HighestWeight = "5/2,1/2,-1/2".parse().unwrap();
        assert_eq!((shifted.lambda(), shifted.mu()), (2, 1));
        assert!("1,2".parse::<U3HighestWeight>().is_err());
    }

    #[test]
    fn enumeration() {
        assert_eq!(basis_enumeration(&hw(2, 1, 0)).len(), 8);
        let one = basis_enumeration(&hw(3, 3, 3));
        assert_eq!(one, vec![CanonicalLabel { j: Spin::ZERO, spin: Spin::ZERO, tm: 0 }]);
        let b = basis_enumeration(&hw(2, 0, 0));
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|l| l.j == l.spin));
        for w in [hw(4, 2, 0), hw(3, 1, 0), hw(5, 2, 1)] {
            let b = basis_enumeration(&w);
            assert_eq!(b.len(), w.dim());
            assert!(b.iter().all(|l| is_admissible(&w, l.j, l.spin)));
            assert!(b.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn omega_and_ratios() {
        let h = Spin::HALF;
        assert_eq!(omega(&hw(4, 2, 0), Spin::ZERO, Spin::ONE), BigRational::zero());
        assert_eq!(omega(&hw(2, 0, 0), h, h), rat(2, 1));
        assert_eq!(omega(&hw(4, 2, 0), Spin::ONE, Spin::integer(2)), rat(3, 1));
        assert_eq!(k_ratio_sq(&hw(2, 0, 0), Spin::ZERO, Spin::ZERO, h).unwrap(), rat(2, 1));
        let w = hw(4, 2, 0);
        for l in basis_enumeration(&w) {
            for tsp in [l.spin.twice() as i64 - 1, l.spin.twice() as i64 + 1] {
                if tsp < 0 {
                    continue;
                }
                let sp = Spin::from_twice(tsp as u32);
                let jp = Spin::from_twice(l.j.twice() + 1);
                let r = k_ratio_sq(&w, l.j, l.spin, sp).unwrap();
                assert_eq!(r, omega(&w, jp, sp) - omega(&w, l.j, l.spin));
            }
        }
        // beyond j_max the chain stops
        let r = k_ratio_sq(&w, Spin::integer(2), Spin::ONE, Spin::from_twice(3)).unwrap();
        assert!(!r.is_positive());
        assert!(k_ratio_sq(&w, Spin::ONE, Spin::ONE, Spin::ONE).is_err());
    }

    #[test]
    fn reduced_elements() {
        let w = hw(2, 0, 0);
        let h = Spin::HALF;
        assert_eq!(reduced_me(&w, Spin::ZERO, Spin::ZERO, h, Tensor::F).unwrap(), Radical::from_integer(2));
        assert!(reduced_me(&hw(2, 2, 2), Spin::ZERO, Spin::ZERO, h, Tensor::F).unwrap().is_zero());
        // s = 0: Racah factor drops out
        for tj in 0..2u32 {
            let j = Spin::from_twice(tj);
            let jp = Spin::from_twice(tj + 1);
            let ratio = k_ratio_sq(&w, j, j, jp).unwrap();
            let want = Radical::sqrt(ratio * BigRational::from_integer(((tj + 1) * (tj + 2)).into()));
            assert_eq!(reduced_me(&w, j, j, jp, Tensor::F).unwrap(), want);
        }
    }

    #[test]
    fn hermiticity_pairing_of_reduced_elements() {
        let w = hw(4, 2, 0);
        for l in basis_enumeration(&w).iter().filter(|l| l.tm == 0 || l.tm == 1) {
            for tsp in [l.spin.twice() + 1, l.spin.twice().saturating_sub(1)] {
                let sp = Spin::from_twice(tsp);
                let f = reduced_me(&w, l.j, l.spin, sp, Tensor::F).unwrap();
                let e = reduced_me(&w, l.j, l.spin, sp, Tensor::E).unwrap();
                let sign = if ((tsp as i64 - l.spin.twice() as i64 + 1) / 2) % 2 == 0 { 1 } else { -1 };
                assert_eq!(f, if sign > 0 { e } else { -e });
            }
        }
    }

    #[test]
    fn exact_algebra() {
        let spec = u3_spec();
        for w in [hw(1, 0, 0), hw(2, 1, 0), hw(4, 2, 0), hw(3, 3, 0)] {
            let m = surd(&assemble_generators(&w, Precision::Exact).unwrap());
            assert_eq!(exact_commutator_failures(&spec, &m, None).unwrap(), vec![], "{w}");
            assert!(exact_hermiticity_failures(&spec, &m).unwrap().is_empty(), "{w}");
            assert!(exact_scalar(&exact_casimir_matrix(&spec, &m).unwrap()).is_some());
        }
    }

    #[test]
    fn shifted_weight_algebra() {
        let w: U3HighestWeight = "5/2,1/2,-1/2".parse().unwrap();
        let m = surd(&assemble_generators(&w, Precision::Exact).unwrap());
        assert!(exact_commutator_failures(&u3_spec(), &m, None).unwrap().is_empty());
    }

    #[test]
    fn diagonal_actions() {
        let w = hw(4, 2, 0);
        let m = assemble_generators(&w, Precision::Exact).unwrap();
        let basis = basis_enumeration(&w);
        let c11 = m["C11"].to_dense();
        for (i, l) in basis.iter().enumerate() {
            assert_eq!(c11[(i, i)], 4.0 - l.j.twice() as f64);
        }
        let triv = assemble_generators(&hw(2, 2, 2), Precision::Exact).unwrap();
        assert_eq!(triv["C12"].nnz(), 0);
    }

    #[test]
    fn float_mode_matches_exact() {
        let w = hw(4, 2, 0);
        let exact = assemble_generators(&w, Precision::Exact).unwrap();
        let float = assemble_generators(&w, Precision::Float).unwrap();
        for (k, m) in &exact {
            assert_eq!(m.to_float(), float[k]);
        }
        let c: BTreeMap<_, _> = float.iter().map(|(k, v)| (k.clone(), v.to_complex())).collect();
        assert!(commutator_residual(&u3_spec(), &c, None).unwrap() < 1e-12);
        let cas = casimir_matrix(&u3_spec(), &c).unwrap();
        assert!(cas.iter().all(|z: &Complex64| z.im == 0.0));
    }

    fn raw_commutator_defect(w: &U3HighestWeight) -> f64 {
        let (rep, _, raw) = holomorphic_gamma(w);
        let spec = u3_spec();
        let mats: BTreeMap<_, _> = spec
            .generators
            .iter()
            .map(|g| (g.clone(), rep.dense(g).unwrap().map(|x| Complex64::new(x, 0.0))))
            .collect();
        let interior = raw.iter().filter(|l| l.j.twice() <= w.twice_j_max()).count();
        commutator_residual(&spec, &mats, Some(interior)).unwrap()
    }

    #[test]
    fn holomorphic_realisation_is_a_representation() {
        for w in [hw(2, 1, 0), hw(4, 2, 0), hw(3, 1, 1)] {
            assert!(raw_commutator_defect(&w) < 1e-12, "{w}");
        }
    }

    #[test]
    fn kmatrix_route_reproduces_canonical_matrices() {
        for w in [hw(2, 0, 0), hw(2, 1, 0), hw(4, 2, 0)] {
            let (rep, seed, raw) = holomorphic_gamma(&w);
            let sol = solve_s_recursion(&rep, &seed, 1e-10).unwrap();
            assert!(relation_residual(&rep, &sol.blocks).unwrap() < 1e-10);
            let on = orthonormalize(&sol, 1e-10).unwrap();
            assert_eq!(on.zero_norm, raw.len() - w.dim(), "{w}");
            let u = unitarize(&rep, &on).unwrap();
            let labels: Vec<_> = u.states.iter().map(|&(s, _)| raw[s]).collect();
            assert_eq!(labels, basis_enumeration(&w));
            let canon = assemble_generators(&w, Precision::Float).unwrap();
            for (k, m) in &canon {
                let diff = (&u.matrices[k] - m.to_dense()).amax();
                assert!(diff < 1e-12, "{w} {k} differs by {diff}");
            }
        }
    }

    #[test]
    fn s_blocks_follow_ratio_chain() {
        // {2,0,0}: S^{(j)} = Π of the norm ratios along j = 0 → ½ → 1
        let w = hw(2, 0, 0);
        let (rep, seed, raw) = holomorphic_gamma(&w);
        let sol = solve_s_recursion(&rep, &seed, 1e-10).unwrap();
        let mut want = BigRational::one();
        for tj in 0..=2u32 {
            let j = Spin::from_twice(tj);
            let i = raw.iter().position(|l| l.j == j && l.spin == j && l.tm == tj as i32).unwrap();
            assert!((sol.blocks[i][(0, 0)] - want.to_f64().unwrap()).abs() < 1e-12);
            want *= k_ratio_sq(&w, j, j, Spin::from_twice(tj + 1)).unwrap();
        }
    }
}

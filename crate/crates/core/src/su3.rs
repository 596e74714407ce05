//! su(3) irreps `(λ, μ)` in the SO(3)-coupled rotor basis.
//!
//! Candidate states `|K L M⟩` carry an intrinsic projection
//! `K ∈ {μ, μ−2, …}` with `K ≤ L`, and `K = 0` only for even `λ + L`.  The
//! quadrupole action is fixed by the `M^{L'L}` matrices; diagonalising
//! `M^{LL}` gives the multiplicity basis `α`, and norm ratios between
//! connected states make the quadrupole moments Hermitian.
//!
//! Reduced matrix elements follow
//! `⟨β L' M'| Q_ν |α L M⟩ = (L M, 2 ν | L' M') ⟨β L'‖Q‖α L⟩ / √(2L'+1)`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::am::{cg, Spin};
use crate::error::{Error, Result};
use crate::matrix::OperatorMatrix;
use crate::radical::{Radical, SurdSum};
use crate::repcheck::{cluster_spectrum, q_name, so3_form_from_c, spectrum_multiset};
use crate::u3::{self, U3HighestWeight};
use crate::Precision;

/// Generators in the SO(3)-coupled form.
pub const GENERATORS: [&str; 8] = ["L0", "L+", "L-", "Q-2", "Q-1", "Q0", "Q1", "Q2"];

/// Tolerance below which an `ℳ` entry counts as a missing edge.
const EDGE_TOL: f64 = 1e-9;
/// Eigenvalues of `M^{LL}` closer than this are reported as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Su3Label {
    pub lam: u32,
    pub mu: u32,
}

impl Su3Label {
    pub const fn new(lam: u32, mu: u32) -> Self {
        Self { lam, mu }
    }

    /// `½(λ+1)(μ+1)(λ+μ+2)`.
    pub fn dim(&self) -> usize {
        let (a, b) = (self.lam as usize, self.mu as usize);
        (a + 1) * (b + 1) * (a + b + 2) / 2
    }

    /// The u(3) weight `{λ+μ, μ, 0}`.
    pub fn u3_weight(&self) -> U3HighestWeight {
        U3HighestWeight::from_integers((self.lam + self.mu) as i64, self.mu as i64, 0).expect("ordered weight")
    }

    /// `Q·Q + 3L·L = 4(λ² + μ² + λμ + 3λ + 3μ)`.
    pub fn casimir(&self) -> u64 {
        let (l, m) = (self.lam as u64, self.mu as u64);
        4 * (l * l + m * m + l * m + 3 * l + 3 * m)
    }
}

impl fmt::Display for Su3Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lam, self.mu)
    }
}

impl FromStr for Su3Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("expected λ,μ, got {s:?}")));
        }
        let p = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("{t:?} is not a non-negative integer")))
        };
        Ok(Self::new(p(parts[0])?, p(parts[1])?))
    }
}

/// Orthonormal rotor-basis state `|α L M⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotorLabel {
    #[serde(rename = "L")]
    pub l: u32,
    pub alpha: u32,
    #[serde(rename = "M")]
    pub m: i32,
}

impl fmt::Display for RotorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={},L={},M={}", self.alpha, self.l, self.m)
    }
}

/// Admissible intrinsic projections at angular momentum `L`, descending.
pub fn k_values(lm: Su3Label, l: u32) -> Vec<u32> {
    (0..=lm.mu)
        .rev()
        .filter(|k| (lm.mu - k).is_multiple_of(2) && *k <= l && !(*k == 0 && (lm.lam + l) % 2 == 1))
        .collect()
}

/// Candidate angular momenta: `K ≤ L ≤ λ + μ + K` for some admissible `K`.
pub fn candidate_ls(lm: Su3Label) -> Vec<u32> {
    (0..=lm.lam + 2 * lm.mu).filter(|&l| !k_values(lm, l).is_empty()).collect()
}

fn cgi(l1: u32, m1: i32, l2: u32, m2: i32, l: u32, m: i32) -> Radical {
    cg(Spin::integer(l1), 2 * m1, Spin::integer(l2), 2 * m2, Spin::integer(l), 2 * m)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `M^{L'L}` over `(K', K)`, exact.
#[derive(Clone, Debug, PartialEq)]
pub struct MBlock {
    pub lp: u32,
    pub l: u32,
    pub k_rows: Vec<u32>,
    pub k_cols: Vec<u32>,
    pub entries: Vec<Vec<SurdSum>>,
}

impl MBlock {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k_rows.len(), self.k_cols.len(), |r, c| self.entries[r][c].to_f64())
    }

    pub fn is_symmetric(&self) -> bool {
        self.k_rows == self.k_cols
            && (0..self.k_rows.len()).all(|r| (0..r).all(|c| self.entries[r][c] == self.entries[c][r]))
    }
}

/// ```text
/// M^{L'L}_{K'K} = δ_{K'K} [(2λ+μ+3) − ½L'(L'+1) + ½L(L+1)] (L K, 2 0 | L' K)
///               + δ_{K'K} δ_{K1} (−1)^{λ+L+1} √(3/2) (μ+1) (L −1, 2 2 | L' 1)
///               + δ_{K',K±2} √(3/2 (μ∓K)(μ±K+2)(1+δ_{K0})(1+δ_{K'0})) (L K, 2 ±2 | L' K')
/// ```
pub fn m_matrix(lm: Su3Label, lp: u32, l: u32) -> MBlock {
    let k_rows = k_values(lm, lp);
    let k_cols = k_values(lm, l);
    let (lam, mu) = (lm.lam as i64, lm.mu as i64);
    let (lpi, li) = (lp as i64, l as i64);
    let mut entries = vec![vec![SurdSum::zero(); k_cols.len()]; k_rows.len()];
    for (r, &kp) in k_rows.iter().enumerate() {
        for (c, &k) in k_cols.iter().enumerate() {
            let (kpi, ki) = (kp as i64, k as i64);
            let mut v = SurdSum::zero();
            if kp == k {
                let diag = rat(2 * (2 * lam + mu + 3) - lpi * (lpi + 1) + li * (li + 1), 2);
                v += &SurdSum::from(&cgi(l, ki as i32, 2, 0, lp, ki as i32)).scale(&diag);
                if k == 1 {
                    let sign = if (lam + li + 1) % 2 == 0 { 1 } else { -1 };
                    let t = &Radical::sqrt_ratio(3, 2) * &cgi(l, -1, 2, 2, lp, 1);
                    v += &SurdSum::from(&t).scale(&rat(sign * (mu + 1), 1));
                }
            }
            for sg in [1i64, -1] {
                if kpi == ki + 2 * sg {
                    let d0 = if k == 0 { 2 } else { 1 };
                    let dp0 = if kp == 0 { 2 } else { 1 };
                    let radicand = 3 * (mu - sg * ki) * (mu + sg * ki + 2) * d0 * dp0;
                    if radicand > 0 {
                        let t = &Radical::sqrt_ratio(radicand, 2)
                            * &cgi(l, ki as i32, 2, 2 * sg as i32, lp, kpi as i32);
                        v += &SurdSum::from(&t);
                    }
                }
            }
            entries[r][c] = v;
        }
    }
    MBlock {
        lp,
        l,
        k_rows,
        k_cols,
        entries,
    }
}

/// Orthogonal `U^{(L)}` diagonalising `M^{LL}`.
#[derive(Clone, Debug, PartialEq)]
pub struct XEigenbasis {
    pub l: u32,
    pub k_values: Vec<u32>,
    /// Columns are eigenvectors over `k_values`, in ascending eigenvalue order.
    pub u: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Diagonalises `M^{LL}`: ascending eigenvalues, each eigenvector with its
/// largest-magnitude component positive.  Degenerate eigenvalues are an
/// error.
pub fn x_eigenbasis(lm: Su3Label, l: u32) -> Result<XEigenbasis> {
    let block = m_matrix(lm, l, l);
    if block.k_rows.is_empty() {
        return Err(Error::Input(format!("no admissible K at L = {l} in {lm}")));
    }
    if !block.is_symmetric() {
        return Err(Error::Consistency(format!("M^{{LL}} is not symmetric at L = {l} in {lm}")));
    }
    let n = block.k_rows.len();
    let eig = SymmetricEigen::new(block.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut u = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (c, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        let lead = v.iter().copied().fold(0.0, |a: f64, x| if x.abs() > a.abs() + 1e-12 { x } else { a });
        if lead < 0.0 {
            v = -v;
        }
        u.set_column(c, &v);
        eigenvalues.push(eig.eigenvalues[i]);
    }
    for w in eigenvalues.windows(2) {
        if (w[1] - w[0]).abs() <= DEGENERACY_TOL * w[1].abs().max(1.0) {
            return Err(Error::Consistency(format!("degenerate eigenvalues {w:?} at L = {l} in {lm}")));
        }
    }
    Ok(XEigenbasis {
        l,
        k_values: block.k_rows,
        u,
        eigenvalues,
    })
}

/// The unitarised rotor construction of one irrep.
#[derive(Clone, Debug)]
pub struct RotorIrrep {
    pub lm: Su3Label,
    pub bases: BTreeMap<u32, XEigenbasis>,
    /// `(L, α)` pairs inside the irrep, sorted.
    pub states: Vec<(u32, u32)>,
    norms: HashMap<(u32, u32), f64>,
    calm: HashMap<(u32, u32), DMatrix<f64>>,
}

impl RotorIrrep {
    /// Diagonalises every `M^{LL}`, then propagates norm factors from the
    /// lowest-`L` state across `ℳ`-connected states.  Candidates never
    /// reached carry zero norm and are dropped.
    pub fn build(lm: Su3Label) -> Result<Self> {
        let mut bases = BTreeMap::new();
        for l in candidate_ls(lm) {
            bases.insert(l, x_eigenbasis(lm, l)?);
        }
        let mut calm = HashMap::new();
        for (&lp, bp) in &bases {
            for (&l, b) in &bases {
                if lp.abs_diff(l) <= 2 {
                    let m = m_matrix(lm, lp, l).to_dense();
                    calm.insert((lp, l), bp.u.transpose() * m * &b.u);
                }
            }
        }
        let all: Vec<(u32, u32)> = bases
            .iter()
            .flat_map(|(&l, b)| (0..b.eigenvalues.len() as u32).map(move |a| (l, a)))
            .collect();
        let root_l = *bases.keys().next().ok_or_else(|| Error::Input(format!("{lm} has no states")))?;
        if bases[&root_l].eigenvalues.len() != 1 {
            return Err(Error::Consistency(format!("lowest L = {root_l} of {lm} is not multiplicity free")));
        }
        let mut norms = HashMap::from([((root_l, 0), 1.0)]);
        let mut queue = VecDeque::from([(root_l, 0u32)]);
        let get = |calm: &HashMap<(u32, u32), DMatrix<f64>>, lp: u32, b: u32, l: u32, a: u32| {
            calm.get(&(lp, l)).map(|m| m[(b as usize, a as usize)]).unwrap_or(0.0)
        };
        while let Some((l, a)) = queue.pop_front() {
            for &(lp, b) in &all {
                if norms.contains_key(&(lp, b)) {
                    continue;
                }
                let fwd = get(&calm, lp, b, l, a);
                if fwd.abs() <= EDGE_TOL {
                    continue;
                }
                let back = get(&calm, l, a, lp, b);
                let sign = if (l + lp) % 2 == 0 { 1.0 } else { -1.0 };
                // |k_α^L / k_β^{L'}|²
                let r = sign * ((2 * l + 1) as f64 / (2 * lp + 1) as f64).sqrt() * back / fwd;
                if r <= 0.0 {
                    return Err(Error::Consistency(format!(
                        "norm ratio {r:.3e} ≤ 0 between (L={l},α={a}) and (L={lp},α={b}) in {lm}"
                    )));
                }
                norms.insert((lp, b), norms[&(l, a)] / r.sqrt());
                queue.push_back((lp, b));
            }
        }
        let mut states: Vec<(u32, u32)> = norms.keys().copied().collect();
        states.sort();
        Ok(Self {
            lm,
            bases,
            states,
            norms,
            calm,
        })
    }

    /// `ℳ^{L'L}_{βα} = [U^{(L')ᵀ} M^{L'L} U^{(L)}]_{βα}`.
    pub fn calm(&self, beta: u32, lp: u32, alpha: u32, l: u32) -> f64 {
        self.calm
            .get(&(lp, l))
            .and_then(|m| m.get((beta as usize, alpha as usize)).copied())
            .unwrap_or(0.0)
    }

    pub fn norm(&self, alpha: u32, l: u32) -> Option<f64> {
        self.norms.get(&(l, alpha)).copied()
    }

    /// `⟨β L'‖Q‖α L⟩ = √(2L'+1) ℳ^{L'L}_{βα} k_α / k_β`; zero for labels
    /// outside the irrep.
    pub fn reduced_q(&self, beta: u32, lp: u32, alpha: u32, l: u32) -> f64 {
        match (self.norm(alpha, l), self.norm(beta, lp)) {
            (Some(ka), Some(kb)) => ((2 * lp + 1) as f64).sqrt() * self.calm(beta, lp, alpha, l) * ka / kb,
            _ => 0.0,
        }
    }

    pub fn multiplicities(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for &(l, _) in &self.states {
            *out.entry(l).or_default() += 1;
        }
        out
    }

    /// States sorted by `(L, α, M)`.
    pub fn basis(&self) -> Vec<RotorLabel> {
        let mut out = Vec::new();
        for &(l, alpha) in &self.states {
            for m in -(l as i32)..=l as i32 {
                out.push(RotorLabel { l, alpha, m });
            }
        }
        out
    }

    /// `L0`, `L±` by the standard formulas and `Q_ν` via Wigner-Eckart.
    pub fn generators(&self) -> BTreeMap<String, OperatorMatrix> {
        let basis = self.basis();
        let index: HashMap<RotorLabel, usize> = basis.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let n = basis.len();
        let mut out: BTreeMap<String, OperatorMatrix> =
            GENERATORS.iter().map(|g| (g.to_string(), OperatorMatrix::new(*g, n))).collect();
        for (i, s) in basis.iter().enumerate() {
            let (l, m) = (s.l as f64, s.m as f64);
            out.get_mut("L0").unwrap().set(i, i, m);
            if let Some(&up) = index.get(&RotorLabel { m: s.m + 1, ..*s }) {
                let v = ((l - m) * (l + m + 1.0)).sqrt();
                out.get_mut("L+").unwrap().set(up, i, v);
                out.get_mut("L-").unwrap().set(i, up, v);
            }
        }
        let mut dense: BTreeMap<i32, DMatrix<f64>> = (-2..=2).map(|nu| (nu, DMatrix::zeros(n, n))).collect();
        for &(lp, b) in &self.states {
            for &(l, a) in &self.states {
                if lp.abs_diff(l) > 2 {
                    continue;
                }
                let red = self.reduced_q(b, lp, a, l);
                if red == 0.0 {
                    continue;
                }
                let scale = red / ((2 * lp + 1) as f64).sqrt();
                for m in -(l as i32)..=l as i32 {
                    for nu in -2..=2 {
                        let mp = m + nu;
                        if mp.unsigned_abs() > lp {
                            continue;
                        }
                        let c = cgi(l, m, 2, nu, lp, mp).to_f64();
                        let row = index[&RotorLabel { l: lp, alpha: b, m: mp }];
                        let col = index[&RotorLabel { l, alpha: a, m }];
                        dense.get_mut(&nu).unwrap()[(row, col)] += c * scale;
                    }
                }
            }
        }
        for (nu, m) in dense {
            out.insert(q_name(nu), OperatorMatrix::from_dense(q_name(nu), &m, 0.0));
        }
        out
    }
}

/// Rotor basis and generator matrices for `(λ, μ)`.
pub fn assemble_so3_generators(lm: Su3Label) -> Result<(Vec<RotorLabel>, BTreeMap<String, OperatorMatrix>)> {
    let irrep = RotorIrrep::build(lm)?;
    Ok((irrep.basis(), irrep.generators()))
}

/// `L0`, `L±`, `Q_ν` expressed through the canonical u(3) matrices of
/// `{λ+μ, μ, 0}`.
pub fn canonical_so3_generators(lm: Su3Label) -> Result<BTreeMap<String, DMatrix<Complex64>>> {
    let c = u3::assemble_generators(&lm.u3_weight(), Precision::Float)?;
    Ok(so3_form_from_c(&u3::dense(&c)))
}

/// `L²` from canonical u(3) matrices, kept real:
/// `L² = −(A_x² + A_y² + A_z²)` with `A_z = C23 − C32`,
/// `A_x = C31 − C13`, `A_y = C12 − C21`.
pub fn canonical_l_squared(c: &BTreeMap<String, DMatrix<f64>>) -> DMatrix<f64> {
    let az = &c["C23"] - &c["C32"];
    let ax = &c["C31"] - &c["C13"];
    let ay = &c["C12"] - &c["C21"];
    -(&ax * &ax + &ay * &ay + &az * &az)
}

/// Angular-momentum multiplicities of `(λ, μ)` found by diagonalising `L²`
/// in the canonical basis of `{λ+μ, μ, 0}`.
pub fn branching_oracle(lm: Su3Label) -> Result<BTreeMap<u32, usize>> {
    let c = u3::dense(&u3::assemble_generators(&lm.u3_weight(), Precision::Float)?);
    let spectrum = spectrum_multiset(&canonical_l_squared(&c));
    let mut out = BTreeMap::new();
    for (value, count) in cluster_spectrum(&spectrum, 1e-8) {
        let l = ((-1.0 + (1.0 + 4.0 * value.max(0.0)).sqrt()) / 2.0).round();
        if (l * (l + 1.0) - value).abs() > 1e-8 * value.max(1.0) || count % (2 * l as usize + 1) != 0 {
            return Err(Error::Consistency(format!("L² eigenvalue {value} × {count} is not L(L+1) × (2L+1)k")));
        }
        out.insert(l as u32, count / (2 * l as usize + 1));
    }
    Ok(out)
}

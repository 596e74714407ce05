//! Algebraic verification of generator matrices.
//!
//! An [`AlgebraSpec`] records structure constants, the adjoint map of a
//! unitary representation, and a quadratic Casimir.  The checks compare
//! assembled matrices against it, either exactly (surd arithmetic) or in
//! floating point with residuals normalised as
//! `‖[A,B] − Σ c·C‖ / (1 + ‖A‖‖B‖)` in the Frobenius norm.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SurdMatrix;
use crate::radical::{Radical, SurdSum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Radical,
    pub generator: String,
}

/// `[left, right] = Σ terms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub left: String,
    pub right: String,
    pub terms: Vec<Term>,
}

/// `generator† = coeff · image` in a unitary representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adjoint {
    pub generator: String,
    pub coeff: Radical,
    pub image: String,
}

/// One term `coeff · left · right` of a quadratic Casimir.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub coeff: Radical,
    pub left: String,
    pub right: String,
}

/// Structure-constant table of a Lie algebra in a named basis.
///
/// Brackets not listed (in either order) vanish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub name: String,
    pub generators: Vec<String>,
    pub brackets: Vec<Bracket>,
    pub adjoints: Vec<Adjoint>,
    #[serde(default)]
    pub casimir: Vec<QuadraticTerm>,
}

type Table = HashMap<(usize, usize), Vec<(SurdSum, usize)>>;

impl AlgebraSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AlgebraSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::Input(format!("unknown generator {name:?} in {}", self.name)))
    }

    /// Full antisymmetrised bracket table over generator indices.
    fn table(&self) -> Result<Table> {
        let mut table: Table = HashMap::new();
        for b in &self.brackets {
            let (i, j) = (self.index(&b.left)?, self.index(&b.right)?);
            let mut terms = Vec::new();
            for t in &b.terms {
                terms.push((SurdSum::from(&t.coeff), self.index(&t.generator)?));
            }
            let neg: Vec<_> = terms.iter().map(|(c, k)| (-c, *k)).collect();
            for (key, val) in [((i, j), terms), ((j, i), neg)] {
                let val = combine(val);
                if let Some(prev) = table.get(&key) {
                    if combine(prev.clone()) != val {
                        return Err(Error::Input(format!(
                            "bracket [{}, {}] listed inconsistently",
                            b.left, b.right
                        )));
                    }
                }
                table.insert(key, val);
            }
        }
        Ok(table)
    }

    /// Checks names, antisymmetry and the Jacobi identity, all exactly.
    pub fn validate(&self) -> Result<()> {
        let table = self.table()?;
        for i in 0..self.generators.len() {
            if table.get(&(i, i)).is_some_and(|t| !t.is_empty()) {
                return Err(Error::Input(format!("[{0}, {0}] must vanish", self.generators[i])));
            }
        }
        for a in &self.adjoints {
            self.index(&a.generator)?;
            self.index(&a.image)?;
        }
        for q in &self.casimir {
            self.index(&q.left)?;
            self.index(&q.right)?;
        }
        if let Some((a, b, c)) = self.jacobi_failure(&table) {
            return Err(Error::Input(format!(
                "Jacobi identity fails for ({}, {}, {})",
                self.generators[a], self.generators[b], self.generators[c]
            )));
        }
        Ok(())
    }

    fn jacobi_failure(&self, table: &Table) -> Option<(usize, usize, usize)> {
        let n = self.generators.len();
        let bracket_vec = |x: &[(SurdSum, usize)], y: usize| -> Vec<(SurdSum, usize)> {
            let mut out = Vec::new();
            for (c, k) in x {
                if let Some(t) = table.get(&(*k, y)) {
                    for (d, l) in t {
                        out.push((c * d, *l));
                    }
                }
            }
            out
        };
        let single = |i: usize| vec![(SurdSum::from_integer(1), i)];
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let ab = table.get(&(a, b)).cloned().unwrap_or_default();
                    let bc = table.get(&(b, c)).cloned().unwrap_or_default();
                    let ca = table.get(&(c, a)).cloned().unwrap_or_default();
                    let mut total = bracket_vec(&ab, c);
                    total.extend(bracket_vec(&bc, a));
                    total.extend(bracket_vec(&ca, b));
                    let _ = single;
                    if !combine(total).is_empty() {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    /// Expected `[A, B]` for every ordered generator pair, as coefficient lists.
    fn expectations(&self) -> Result<Vec<(usize, usize, Vec<(SurdSum, usize)>)>> {
        let table = self.table()?;
        let n = self.generators.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push((i, j, table.get(&(i, j)).cloned().unwrap_or_default()));
            }
        }
        Ok(out)
    }
}

fn combine(terms: Vec<(SurdSum, usize)>) -> Vec<(SurdSum, usize)> {
    let mut acc: BTreeMap<usize, SurdSum> = BTreeMap::new();
    for (c, k) in terms {
        *acc.entry(k).or_default() += &c;
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (c, k)).collect()
}

fn lookup<'a, M>(spec: &AlgebraSpec, mats: &'a BTreeMap<String, M>) -> Result<Vec<&'a M>> {
    spec.generators
        .iter()
        .map(|g| {
            mats.get(g)
                .ok_or_else(|| Error::Input(format!("no matrix supplied for generator {g}")))
        })
        .collect()
}

fn check_dims(mats: &[&DMatrix<Complex64>]) -> Result<usize> {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    for m in mats {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "expected {n}×{n}, found {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(n)
}

fn block(m: &DMatrix<Complex64>, n: Option<usize>) -> DMatrix<Complex64> {
    match n {
        Some(n) if n < m.nrows() => m.view((0, 0), (n, n)).clone_owned(),
        _ => m.clone(),
    }
}

/// Residual of one bracket, see the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairResidual {
    pub left: String,
    pub right: String,
    pub residual: f64,
}

/// Per-pair commutator residuals, optionally restricted to the leading
/// `interior × interior` block (truncated infinite-dimensional irreps).
pub fn commutator_residuals(
    spec: &AlgebraSpec,
    mats: &BTreeMap<String, DMatrix<Complex64>>,
    interior: Option<usize>,
) -> Result<Vec<PairResidual>> {
    let ms = lookup(spec, mats)?;
    check_dims(&ms)?;
    let mut out = Vec::new();
    for (i, j, terms) in spec.expectations()? {
        let (a, b) = (ms[i], ms[j]);
        let mut lhs = a * b - b * a;
        for (c, k) in &terms {
            lhs -= ms[*k] * Complex64::new(c.to_f64(), 0.0);
        }
        let lhs = block(&lhs, interior);
        let r = lhs.norm() / (1.0 + a.norm() * b.norm());
        out.push(PairResidual {
            left: spec.generators[i].clone(),
            right: spec.generators[j].clone(),
            residual: r,
        });
    }
    Ok(out)
}

/// Largest relative commutator residual over all generator pairs.
pub fn commutator_residual(
    spec: &AlgebraSpec,
    mats: &BTreeMap<String, DMatrix<Complex64>>,
    interior: Option<usize>,
) -> Result<f64> {
    Ok(commutator_residuals(spec, mats, interior)?
        .into_iter()
        .map(|p| p.residual)
        .fold(0.0, f64::max))
}

/// Generator pairs whose bracket fails exactly; empty means every relation
/// holds identically.
pub fn exact_commutator_failures(
    spec: &AlgebraSpec,
    mats: &BTreeMap<String, SurdMatrix>,
    interior: Option<usize>,
) -> Result<Vec<(String, String)>> {
    let ms = lookup(spec, mats)?;
    let mut failures = Vec::new();
    for (i, j, terms) in spec.expectations()? {
        let mut lhs = ms[i].commutator(ms[j]);
        for (c, k) in &terms {
            lhs = lhs.sub(&ms[*k].scale(c));
        }
        if let Some(n) = interior {
            lhs = lhs.leading_block(n);
        }
        if !lhs.is_zero() {
            failures.push((spec.generators[i].clone(), spec.generators[j].clone()));
        }
    }
    Ok(failures)
}

/// Largest `‖A† − c·B‖ / (1 + ‖A‖)` over the adjoint table.
pub fn hermiticity_residual(spec: &AlgebraSpec, mats: &BTreeMap<String, DMatrix<Complex64>>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for adj in &spec.adjoints {
        let a = mats
            .get(&adj.generator)
            .ok_or_else(|| Error::Input(format!("no matrix for {}", adj.generator)))?;
        let b = mats
            .get(&adj.image)
            .ok_or_else(|| Error::Input(format!("no matrix for {}", adj.image)))?;
        if a.shape() != b.shape() {
            return Err(Error::Dimension(format!("{} and {} differ in shape", adj.generator, adj.image)));
        }
        let d = a.adjoint() - b * Complex64::new(adj.coeff.to_f64(), 0.0);
        worst = worst.max(d.norm() / (1.0 + a.norm()));
    }
    Ok(worst)
}

/// Adjoint relations that fail exactly (real matrices, so `†` is the transpose).
pub fn exact_hermiticity_failures(spec: &AlgebraSpec, mats: &BTreeMap<String, SurdMatrix>) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for adj in &spec.adjoints {
        let a = mats
            .get(&adj.generator)
            .ok_or_else(|| Error::Input(format!("no matrix for {}", adj.generator)))?;
        let b = mats
            .get(&adj.image)
            .ok_or_else(|| Error::Input(format!("no matrix for {}", adj.image)))?;
        if !a.transpose().sub(&b.scale(&SurdSum::from(&adj.coeff))).is_zero() {
            out.push(adj.generator.clone());
        }
    }
    Ok(out)
}

pub fn casimir_matrix(spec: &AlgebraSpec, mats: &BTreeMap<String, DMatrix<Complex64>>) -> Result<DMatrix<Complex64>> {
    let ms = lookup(spec, mats)?;
    let n = check_dims(&ms)?;
    if spec.casimir.is_empty() {
        return Err(Error::Input(format!("{} declares no Casimir", spec.name)));
    }
    let mut out = DMatrix::zeros(n, n);
    for q in &spec.casimir {
        let (a, b) = (&mats[&q.left], &mats[&q.right]);
        out += (a * b) * Complex64::new(q.coeff.to_f64(), 0.0);
    }
    Ok(out)
}

pub fn exact_casimir_matrix(spec: &AlgebraSpec, mats: &BTreeMap<String, SurdMatrix>) -> Result<SurdMatrix> {
    let ms = lookup(spec, mats)?;
    let n = ms.first().map(|m| m.dim).unwrap_or(0);
    if spec.casimir.is_empty() {
        return Err(Error::Input(format!("{} declares no Casimir", spec.name)));
    }
    let mut out = SurdMatrix::zeros(n);
    for q in &spec.casimir {
        let prod = mats[&q.left].mul(&mats[&q.right]);
        out = out.add(&prod.scale(&SurdSum::from(&q.coeff)));
    }
    Ok(out)
}

/// Schur test of a (supposedly scalar) matrix: the mean of the diagonal and
/// the largest deviation from `mean · I`, relative to `max(1, |mean|)`.
pub fn schur_constancy(m: &DMatrix<Complex64>) -> (f64, f64) {
    let n = m.nrows();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = (0..n).map(|i| m[(i, i)]).sum::<Complex64>() / n as f64;
    let mut dev: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { mean } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((m[(r, c)] - target).norm());
        }
    }
    (mean.re, dev / mean.norm().max(1.0))
}

pub fn schur_constancy_real(m: &DMatrix<f64>) -> (f64, f64) {
    schur_constancy(&m.map(|x| Complex64::new(x, 0.0)))
}

/// Exact Schur test: `Some(c)` when the matrix is `c · I`.
pub fn exact_scalar(m: &SurdMatrix) -> Option<SurdSum> {
    let c = m.get(0, 0);
    let scalar = SurdMatrix::identity(m.dim).scale(&c);
    if m.sub(&scalar).is_zero() {
        Some(c)
    } else {
        None
    }
}

/// Sorted eigenvalues of a real symmetric matrix.
pub fn spectrum_multiset(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sorted eigenvalues of a complex Hermitian matrix.
pub fn hermitian_spectrum(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Groups a sorted spectrum into `(value, multiplicity)` clusters.
pub fn cluster_spectrum(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((v, n)) if (x - *v).abs() <= tol * v.abs().max(1.0) => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Finds an orthogonal `X` with `X·A_i = B_i·X` for every pair, if the two
/// real representations are equivalent; `None` otherwise.
///
/// The intertwiner is the null vector of the stacked Sylvester system,
/// rescaled so that `XᵀX = I`.
pub fn find_intertwiner(a: &[DMatrix<f64>], b: &[DMatrix<f64>], tol: f64) -> Option<DMatrix<f64>> {
    let n = a.first()?.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    // column-major vec: vec(X A) = (Aᵀ ⊗ I) vec X, vec(B X) = (I ⊗ B) vec X
    let mut gram = DMatrix::<f64>::zeros(n * n, n * n);
    for (ai, bi) in a.iter().zip(b) {
        let block = ai.transpose().kronecker(&id) - id.kronecker(bi);
        gram += block.transpose() * &block;
    }
    let eig = SymmetricEigen::new(gram);
    let (idx, &lowest) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))?;
    if lowest.abs() > tol {
        return None;
    }
    let v = eig.eigenvectors.column(idx);
    let x = DMatrix::from_column_slice(n, n, v.as_slice());
    let xtx = x.transpose() * &x;
    let scale = xtx.trace() / n as f64;
    if scale <= 0.0 {
        return None;
    }
    let x = x / scale.sqrt();
    let orth = (x.transpose() * &x - &id).norm();
    if orth > tol.sqrt() {
        return None;
    }
    Some(x)
}

fn r(n: i64) -> Radical {
    Radical::from_integer(n)
}

fn rq(n: i64, d: i64) -> Radical {
    Radical::from_rational(BigRational::new(n.into(), d.into()))
}

fn term(coeff: Radical, g: &str) -> Term {
    Term {
        coeff,
        generator: g.into(),
    }
}

fn bracket(l: &str, rgt: &str, terms: Vec<Term>) -> Bracket {
    Bracket {
        left: l.into(),
        right: rgt.into(),
        terms,
    }
}

fn adjoint(g: &str, coeff: Radical, image: &str) -> Adjoint {
    Adjoint {
        generator: g.into(),
        coeff,
        image: image.into(),
    }
}

fn quad(coeff: Radical, l: &str, rgt: &str) -> QuadraticTerm {
    QuadraticTerm {
        coeff,
        left: l.into(),
        right: rgt.into(),
    }
}

/// su(1,1) with `[S0, S±] = ±S±`, `[S−, S+] = 2S0`; Casimir
/// `S0² − ½(S+S− + S−S+)`.
pub fn su11_spec() -> AlgebraSpec {
    AlgebraSpec {
        name: "su11".into(),
        generators: vec!["S0".into(), "S+".into(), "S-".into()],
        brackets: vec![
            bracket("S0", "S+", vec![term(r(1), "S+")]),
            bracket("S0", "S-", vec![term(r(-1), "S-")]),
            bracket("S-", "S+", vec![term(r(2), "S0")]),
        ],
        adjoints: vec![
            adjoint("S0", r(1), "S0"),
            adjoint("S+", r(1), "S-"),
            adjoint("S-", r(1), "S+"),
        ],
        casimir: vec![
            quad(r(1), "S0", "S0"),
            quad(rq(-1, 2), "S+", "S-"),
            quad(rq(-1, 2), "S-", "S+"),
        ],
    }
}

/// Name of the u(3) generator `C_ij` (1-based).
pub fn c_name(i: usize, j: usize) -> String {
    format!("C{i}{j}")
}

/// u(3): `[C_ij, C_kl] = δ_kj C_il − δ_il C_kj`, `C_ij† = C_ji`, Casimir
/// `Σ C_ij C_ji`.
pub fn u3_spec() -> AlgebraSpec {
    let idx = [1, 2, 3];
    let mut generators = Vec::new();
    let mut adjoints = Vec::new();
    let mut casimir = Vec::new();
    for i in idx {
        for j in idx {
            generators.push(c_name(i, j));
            adjoints.push(adjoint(&c_name(i, j), r(1), &c_name(j, i)));
            casimir.push(quad(r(1), &c_name(i, j), &c_name(j, i)));
        }
    }
    let mut brackets = Vec::new();
    let pairs: Vec<(usize, usize)> = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).collect();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        for &(k, l) in &pairs[p + 1..] {
            let mut terms = Vec::new();
            if k == j {
                terms.push(term(r(1), &c_name(i, l)));
            }
            if i == l {
                terms.push(term(r(-1), &c_name(k, j)));
            }
            if !terms.is_empty() {
                brackets.push(bracket(&c_name(i, j), &c_name(k, l), terms));
            }
        }
    }
    AlgebraSpec {
        name: "u3".into(),
        generators,
        brackets,
        adjoints,
        casimir,
    }
}

/// Name of the quadrupole component `Q_ν`.
pub fn q_name(nu: i32) -> String {
    format!("Q{nu}")
}

/// su(3) in the SO(3)-coupled basis `{L0, L+, L−, Q_ν}`, normalised as
/// `L0 = −i(C23 − C32)`, `L± = i(C13 − C31) ± (C12 − C21)` and the usual
/// Elliott quadrupole moments.  Casimir `Q·Q + 3 L·L`.
pub fn su3_so3_spec() -> AlgebraSpec {
    let mut generators = vec!["L0".to_string(), "L+".into(), "L-".into()];
    generators.extend((-2..=2).map(q_name));
    let mut brackets = vec![
        bracket("L0", "L+", vec![term(r(1), "L+")]),
        bracket("L0", "L-", vec![term(r(-1), "L-")]),
        bracket("L+", "L-", vec![term(r(2), "L0")]),
    ];
    for nu in -2..=2 {
        if nu != 0 {
            brackets.push(bracket("L0", &q_name(nu), vec![term(r(nu as i64), &q_name(nu))]));
        }
        if nu < 2 {
            let c = Radical::sqrt_ratio(6 - (nu * (nu + 1)) as i64, 1);
            brackets.push(bracket("L+", &q_name(nu), vec![term(c, &q_name(nu + 1))]));
        }
        if nu > -2 {
            let c = Radical::sqrt_ratio(6 - (nu * (nu - 1)) as i64, 1);
            brackets.push(bracket("L-", &q_name(nu), vec![term(c, &q_name(nu - 1))]));
        }
    }
    let s27_2 = Radical::sqrt_ratio(27, 2);
    brackets.extend([
        bracket("Q-2", "Q1", vec![term(r(-3), "L-")]),
        bracket("Q-2", "Q2", vec![term(r(-6), "L0")]),
        bracket("Q-1", "Q0", vec![term(s27_2.clone(), "L-")]),
        bracket("Q-1", "Q1", vec![term(r(3), "L0")]),
        bracket("Q-1", "Q2", vec![term(r(3), "L+")]),
        bracket("Q0", "Q1", vec![term(-s27_2, "L+")]),
    ]);
    let mut adjoints = vec![
        adjoint("L0", r(1), "L0"),
        adjoint("L+", r(1), "L-"),
        adjoint("L-", r(1), "L+"),
    ];
    let mut casimir = vec![
        quad(r(3), "L0", "L0"),
        quad(rq(3, 2), "L+", "L-"),
        quad(rq(3, 2), "L-", "L+"),
    ];
    for nu in -2..=2i32 {
        let sign = if nu.rem_euclid(2) == 0 { 1 } else { -1 };
        adjoints.push(adjoint(&q_name(nu), r(sign), &q_name(-nu)));
        casimir.push(quad(r(sign), &q_name(nu), &q_name(-nu)));
    }
    AlgebraSpec {
        name: "su3-so3".into(),
        generators,
        brackets,
        adjoints,
        casimir,
    }
}

/// The shipped table for an algebra name (`su11`, `u3`, `su3-so3`).
pub fn shipped_spec(name: &str) -> Option<AlgebraSpec> {
    match name {
        "su11" => Some(su11_spec()),
        "u3" => Some(u3_spec()),
        "su3-so3" => Some(su3_so3_spec()),
        _ => None,
    }
}

/// The defining 3×3 matrices `(C_ij)_{kl} = δ_ik δ_jl`.
pub fn defining_u3() -> BTreeMap<String, DMatrix<f64>> {
    let mut out = BTreeMap::new();
    for i in 1..=3 {
        for j in 1..=3 {
            let mut m = DMatrix::zeros(3, 3);
            m[(i - 1, j - 1)] = 1.0;
            out.insert(c_name(i, j), m);
        }
    }
    out
}

/// The su(3) generators `L`, `Q` expressed through any set of u(3)
/// matrices `C_ij`.
pub fn so3_form_from_c(c: &BTreeMap<String, DMatrix<f64>>) -> BTreeMap<String, DMatrix<Complex64>> {
    let get = |i: usize, j: usize| c[&c_name(i, j)].map(|x| Complex64::new(x, 0.0));
    let i_ = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let s32 = Complex64::new(1.5f64.sqrt(), 0.0);
    let h1 = get(1, 1) - get(2, 2);
    let h2 = get(2, 2) - get(3, 3);
    let mut out = BTreeMap::new();
    out.insert("L0".into(), (get(2, 3) - get(3, 2)) * (-i_));
    let a = (get(1, 3) - get(3, 1)) * i_;
    let b = get(1, 2) - get(2, 1);
    out.insert("L+".into(), &a + &b);
    out.insert("L-".into(), &a - &b);
    out.insert(q_name(0), &h1 * Complex64::new(2.0, 0.0) + &h2);
    for s in [1.0, -1.0] {
        let sc = Complex64::new(s, 0.0);
        let q1 = (get(1, 2) + get(2, 1) + (get(1, 3) + get(3, 1)) * (i_ * sc)) * (-sc * s32);
        out.insert(q_name(s as i32), q1);
        let q2 = (&h2 + (get(2, 3) + get(3, 2)) * (i_ * sc)) * (s32 * one);
        out.insert(q_name(2 * s as i32), q2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complexify(m: &BTreeMap<String, DMatrix<f64>>) -> BTreeMap<String, DMatrix<Complex64>> {
        m.iter().map(|(k, v)| (k.clone(), v.map(|x| Complex64::new(x, 0.0)))).collect()
    }

    #[test]
    fn shipped_specs_satisfy_jacobi() {
        for spec in [su11_spec(), u3_spec(), su3_so3_spec()] {
            spec.validate().unwrap();
        }
        assert_eq!(u3_spec().generators.len(), 9);
    }

    #[test]
    fn broken_table_rejected() {
        let mut spec = su11_spec();
        spec.brackets[2].terms[0].coeff = Radical::from_integer(3);
        spec.brackets.push(bracket("S+", "S-", vec![term(r(-2), "S0")]));
        assert!(spec.validate().is_err());
        let mut spec = su3_so3_spec();
        spec.brackets.pop();
        assert!(matches!(spec.validate(), Err(Error::Input(_))));
    }

    #[test]
    fn json_round_trip() {
        let spec = su3_so3_spec();
        let back = AlgebraSpec::from_json(&spec.to_json().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn defining_matrices_are_exact() {
        let c = complexify(&defining_u3());
        let spec = u3_spec();
        assert_eq!(commutator_residual(&spec, &c, None).unwrap(), 0.0);
        assert_eq!(hermiticity_residual(&spec, &c).unwrap(), 0.0);
        // Σ C_ij C_ji = 3·I on the defining irrep
        let (mean, dev) = schur_constancy(&casimir_matrix(&spec, &c).unwrap());
        assert_eq!((mean, dev), (3.0, 0.0));
    }

    #[test]
    fn corrupted_entry_detected() {
        let mut c = defining_u3();
        c.get_mut("C12").unwrap()[(0, 1)] = 1.01;
        let r = commutator_residual(&u3_spec(), &complexify(&c), None).unwrap();
        assert!(r > 1e-6, "{r}");
    }

    #[test]
    fn so3_form_of_defining_irrep() {
        let so3 = so3_form_from_c(&defining_u3());
        let spec = su3_so3_spec();
        assert!(commutator_residual(&spec, &so3, None).unwrap() < 1e-14);
        assert!(hermiticity_residual(&spec, &so3).unwrap() < 1e-14);
        // (λμ) = (1,0): Q·Q + 3L² = 4(λ² + μ² + λμ + 3λ + 3μ) = 16
        let (mean, dev) = schur_constancy(&casimir_matrix(&spec, &so3).unwrap());
        assert!((mean - 16.0).abs() < 1e-12 && dev < 1e-14);
    }

    #[test]
    fn schur_examples() {
        assert_eq!(schur_constancy_real(&DMatrix::identity(4, 4)), (1.0, 0.0));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        assert!(schur_constancy_real(&m).1 > 0.1);
    }

    #[test]
    fn spectra() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 2.0]));
        assert_eq!(spectrum_multiset(&d), vec![1.0, 2.0, 2.0]);
        assert_eq!(spectrum_multiset(&DMatrix::zeros(3, 3)), vec![0.0; 3]);
        assert_eq!(cluster_spectrum(&[1.0, 2.0, 2.0 + 1e-13], 1e-9), vec![(1.0, 1), (2.0, 2)]);
    }

    #[test]
    fn residual_is_invariant_under_basis_permutation() {
        let c = defining_u3();
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let mut moved: BTreeMap<String, DMatrix<f64>> =
            c.iter().map(|(k, v)| (k.clone(), &perm * v * perm.transpose())).collect();
        moved.get_mut("C23").unwrap()[(0, 1)] += 0.25;
        let mut orig = c.clone();
        let back = perm.transpose() * &moved["C23"] * &perm;
        orig.insert("C23".into(), back);
        let r1 = commutator_residual(&u3_spec(), &complexify(&orig), None).unwrap();
        let r2 = commutator_residual(&u3_spec(), &complexify(&moved), None).unwrap();
        assert!((r1 - r2).abs() < 1e-14 && r1 > 0.0);
    }

    #[test]
    fn intertwiner_of_permuted_defining_irrep() {
        let c = defining_u3();
        let perm = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let names: Vec<_> = c.keys().cloned().collect();
        let a: Vec<_> = names.iter().map(|n| c[n].clone()).collect();
        let b: Vec<_> = a.iter().map(|m| &perm * m * perm.transpose()).collect();
        let x = find_intertwiner(&a, &b, 1e-12).unwrap();
        for (ai, bi) in a.iter().zip(&b) {
            assert!((&x * ai - bi * &x).norm() < 1e-12);
        }
        // C11 vs C22 swapped is inequivalent as a labelled set
        let mut bad = a.clone();
        bad.swap(0, 4);
        assert!(find_intertwiner(&a, &bad, 1e-12).is_none());
    }
}

//! K-matrix theory for graded, non-unitary representations.
//!
//! A [`GammaRep`] gives the matrices `Γ(X)` of a representation on a raw
//! (non-orthogonal) basis split into sectors `κ` of good quantum numbers.
//! The inner-product blocks `S^κ = K^κ K^κ†` satisfy
//!
//! ```text
//! Γ_{κ'κ}(X) S^κ = S^{κ'} Γ_{κκ'}(X†)†
//! ```
//!
//! which determines every `S^κ` from the seed sectors by climbing the
//! grading with the raising generators.  Diagonalising `S^κ` gives an
//! orthonormal basis, in which `γ(X) = K⁻¹ Γ(X) K` is unitary.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Div, Neg};

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, DMatrix, Scalar, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::OperatorMatrix;
use crate::radical::{parse_rational, Radical};

/// Scalars the recursion can run over: `f64`, or `BigRational` for exact work.
pub trait Field:
    Scalar + Zero + One + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign + Neg<Output = Self> + Div<Output = Self>
{
    fn to_f64(&self) -> f64;
    /// Whether the value counts as zero next to entries of size `scale`.
    fn negligible(&self, scale: f64, tol: f64) -> bool;
    fn parse(text: &str) -> Result<Self>;
    fn render(&self) -> String;
}

impl Field for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.abs() <= tol * scale.max(1.0)
    }

    fn parse(text: &str) -> Result<Self> {
        match text.trim().parse::<f64>() {
            Ok(x) => Ok(x),
            Err(_) => ToPrimitive::to_f64(&parse_rational(text)?)
                .ok_or_else(|| Error::Parse(format!("{text:?} is not representable"))),
        }
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Field for BigRational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn negligible(&self, _scale: f64, _tol: f64) -> bool {
        self.is_zero()
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// A good-quantum-number sector of the raw basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub label: String,
    pub grade: i64,
    pub dim: usize,
}

/// How a generator moves between grades, and its adjoint partner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorGrade {
    pub name: String,
    pub adjoint: String,
    pub grade: i64,
}

/// Sparse generator matrices on a sectored raw basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaRep<T: Field> {
    pub sectors: Vec<Sector>,
    pub generators: Vec<GeneratorGrade>,
    blocks: HashMap<(usize, usize, usize), DMatrix<T>>,
}

#[derive(Serialize, Deserialize)]
struct BlockDoc {
    generator: String,
    row_sector: usize,
    col_sector: usize,
    entries: Vec<(usize, usize, String)>,
}

#[derive(Serialize, Deserialize)]
struct GammaDoc {
    sectors: Vec<Sector>,
    generators: Vec<GeneratorGrade>,
    blocks: Vec<BlockDoc>,
}

impl<T: Field> GammaRep<T> {
    pub fn new(sectors: Vec<Sector>, generators: Vec<GeneratorGrade>) -> Result<Self> {
        for g in &generators {
            if !generators.iter().any(|h| h.name == g.adjoint) {
                return Err(Error::Input(format!("adjoint {} of {} is not a generator", g.adjoint, g.name)));
            }
        }
        Ok(Self {
            sectors,
            generators,
            blocks: HashMap::new(),
        })
    }

    pub fn generator_index(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::Input(format!("unknown generator {name}")))
    }

    /// Adds `value` to `⟨row| Γ(generator) |col⟩`, with states given as
    /// `(sector, index within sector)`.
    pub fn add(&mut self, generator: &str, row: (usize, usize), col: (usize, usize), value: T) -> Result<()> {
        let g = self.generator_index(generator)?;
        for (s, i) in [row, col] {
            let sector = self
                .sectors
                .get(s)
                .ok_or(Error::OutOfRange {
                    index: s,
                    max: self.sectors.len().saturating_sub(1),
                })?;
            if i >= sector.dim {
                return Err(Error::OutOfRange {
                    index: i,
                    max: sector.dim.saturating_sub(1),
                });
            }
        }
        let step = self.sectors[row.0].grade - self.sectors[col.0].grade;
        if step != self.generators[g].grade {
            return Err(Error::Input(format!(
                "{generator} has grade {} but connects sectors {} → {}",
                self.generators[g].grade, self.sectors[col.0].label, self.sectors[row.0].label
            )));
        }
        let (rd, cd) = (self.sectors[row.0].dim, self.sectors[col.0].dim);
        let block = self
            .blocks
            .entry((g, row.0, col.0))
            .or_insert_with(|| DMatrix::from_element(rd, cd, T::zero()));
        block[(row.1, col.1)] += value;
        Ok(())
    }

    /// `Γ_{row,col}(X)` for a generator index, if any entry was set.
    pub fn block(&self, generator: usize, row: usize, col: usize) -> Option<&DMatrix<T>> {
        self.blocks.get(&(generator, row, col))
    }

    pub fn raw_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.dim).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.sectors
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.dim;
                o
            })
            .collect()
    }

    /// Dense `Γ(X)` on the whole raw basis, sectors concatenated in order.
    pub fn dense(&self, generator: &str) -> Result<DMatrix<T>> {
        let g = self.generator_index(generator)?;
        let off = self.offsets();
        let n = self.raw_dim();
        let mut out = DMatrix::from_element(n, n, T::zero());
        for (&(h, r, c), b) in &self.blocks {
            if h == g {
                out.view_mut((off[r], off[c]), b.shape()).copy_from(b);
            }
        }
        Ok(out)
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> GammaRep<U> {
        GammaRep {
            sectors: self.sectors.clone(),
            generators: self.generators.clone(),
            blocks: self.blocks.iter().map(|(&k, b)| (k, b.map(|x| f(&x)))).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut keys: Vec<_> = self.blocks.keys().copied().collect();
        keys.sort();
        let blocks = keys
            .into_iter()
            .map(|k| {
                let b = &self.blocks[&k];
                let mut entries = Vec::new();
                for r in 0..b.nrows() {
                    for c in 0..b.ncols() {
                        if !b[(r, c)].is_zero() {
                            entries.push((r, c, b[(r, c)].render()));
                        }
                    }
                }
                BlockDoc {
                    generator: self.generators[k.0].name.clone(),
                    row_sector: k.1,
                    col_sector: k.2,
                    entries,
                }
            })
            .collect();
        let doc = GammaDoc {
            sectors: self.sectors.clone(),
            generators: self.generators.clone(),
            blocks,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Reads the document written by [`GammaRep::to_json`]; values are
    /// decimal or `p/q` strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GammaDoc = serde_json::from_str(text)?;
        let mut rep = Self::new(doc.sectors, doc.generators)?;
        for b in doc.blocks {
            for (r, c, v) in b.entries {
                rep.add(&b.generator, (b.row_sector, r), (b.col_sector, c), T::parse(&v)?)?;
            }
        }
        Ok(rep)
    }
}

/// The inner-product block of one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SBlock<T: Field> {
    pub sector: usize,
    pub matrix: DMatrix<T>,
}

impl<T: Field> SBlock<T> {
    pub fn identity(sector: usize, dim: usize) -> Self {
        Self {
            sector,
            matrix: DMatrix::identity(dim, dim),
        }
    }
}

/// Solved S-blocks for every sector, with the largest relative residual of
/// the defining relation over all generators.
#[derive(Clone, Debug)]
pub struct SSolution<T: Field> {
    pub blocks: Vec<DMatrix<T>>,
    pub residual: f64,
}

fn fnorm<T: Field>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

/// Solves `X · N = R` for symmetric `N` by Gauss-Jordan elimination on
/// `N Xᵀ = Rᵀ`.  Directions `N` leaves undetermined are set to zero.
fn solve_right<T: Field>(n: &DMatrix<T>, r: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let d = n.nrows();
    let mut a = n.clone();
    let mut b = r.transpose();
    let scale = fnorm(n);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        let best = (row..d).max_by(|&x, &y| a[(x, col)].to_f64().abs().total_cmp(&a[(y, col)].to_f64().abs()));
        let Some(p) = best else { break };
        if a[(p, col)].negligible(scale, tol) {
            continue;
        }
        a.swap_rows(p, row);
        b.swap_rows(p, row);
        let inv = T::one() / a[(row, col)].clone();
        for k in 0..d {
            a[(row, k)] *= inv.clone();
        }
        for k in 0..b.ncols() {
            b[(row, k)] *= inv.clone();
        }
        for other in 0..d {
            if other != row && !a[(other, col)].is_zero() {
                let f = a[(other, col)].clone();
                for k in 0..d {
                    let v = a[(row, k)].clone() * f.clone();
                    a[(other, k)] -= v;
                }
                for k in 0..b.ncols() {
                    let v = b[(row, k)].clone() * f.clone();
                    b[(other, k)] -= v;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == d {
            break;
        }
    }
    let mut x = DMatrix::from_element(d, b.ncols(), T::zero());
    for (r_, c_) in pivots {
        for k in 0..b.ncols() {
            x[(c_, k)] = b[(r_, k)].clone();
        }
    }
    x.transpose()
}

/// Determines every S-block from the seed blocks.
///
/// Sectors are solved in ascending grade.  Each non-seed sector `κ'` stacks
/// the relations from all raising generators out of already solved sectors
/// and solves them in the least-squares sense; afterwards the relation is
/// checked for every generator and block, and a residual above `tol` is an
/// error.
pub fn solve_s_recursion<T: Field>(rep: &GammaRep<T>, seed: &[SBlock<T>], tol: f64) -> Result<SSolution<T>> {
    let ns = rep.sectors.len();
    let mut solved: Vec<Option<DMatrix<T>>> = vec![None; ns];
    for s in seed {
        let dim = rep.sectors.get(s.sector).map(|x| x.dim).ok_or(Error::OutOfRange {
            index: s.sector,
            max: ns.saturating_sub(1),
        })?;
        if s.matrix.shape() != (dim, dim) {
            return Err(Error::Dimension(format!("seed block for sector {} is not {dim}×{dim}", s.sector)));
        }
        solved[s.sector] = Some(s.matrix.clone());
    }
    let adj: Vec<usize> = rep
        .generators
        .iter()
        .map(|g| rep.generator_index(&g.adjoint))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by_key(|&s| (rep.sectors[s].grade, s));

    for &target in &order {
        if solved[target].is_some() {
            continue;
        }
        let d = rep.sectors[target].dim;
        let mut a_cols: Vec<DMatrix<T>> = Vec::new();
        let mut b_cols: Vec<DMatrix<T>> = Vec::new();
        for (g, gen) in rep.generators.iter().enumerate() {
            if gen.grade <= 0 {
                continue;
            }
            for (src, s_src) in solved.iter().enumerate() {
                let Some(s_src) = s_src else { continue };
                let up = rep.block(g, target, src);
                let down = rep.block(adj[g], src, target);
                if up.is_none() && down.is_none() {
                    continue;
                }
                let ds = rep.sectors[src].dim;
                let a = down
                    .map(|m| m.transpose())
                    .unwrap_or_else(|| DMatrix::from_element(d, ds, T::zero()));
                let b = up
                    .map(|m| m * s_src)
                    .unwrap_or_else(|| DMatrix::from_element(d, ds, T::zero()));
                a_cols.push(a);
                b_cols.push(b);
            }
        }
        if a_cols.is_empty() {
            return Err(Error::Input(format!(
                "sector {} is not reachable from the seed by raising generators",
                rep.sectors[target].label
            )));
        }
        let mut normal = DMatrix::from_element(d, d, T::zero());
        let mut rhs = DMatrix::from_element(d, d, T::zero());
        for (a, b) in a_cols.iter().zip(&b_cols) {
            normal += a * a.transpose();
            rhs += b * a.transpose();
        }
        solved[target] = Some(solve_right(&normal, &rhs, tol));
    }

    let blocks: Vec<DMatrix<T>> = solved
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.unwrap_or_else(|| DMatrix::identity(rep.sectors[i].dim, rep.sectors[i].dim)))
        .collect();
    let residual = relation_residual(rep, &blocks)?;
    if residual > tol {
        return Err(Error::Consistency(format!(
            "S-recursion residual {residual:.3e} exceeds {tol:.1e}; Γ is not a consistent representation"
        )));
    }
    Ok(SSolution { blocks, residual })
}

/// Largest relative residual of `Γ_{κ'κ}(X) S^κ − S^{κ'} Γ_{κκ'}(X†)ᵀ` and of
/// the asymmetry of each S-block.
pub fn relation_residual<T: Field>(rep: &GammaRep<T>, blocks: &[DMatrix<T>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in blocks {
        let asym = b - b.transpose();
        worst = worst.max(fnorm(&asym) / fnorm(b).max(1.0));
    }
    for (g, gen) in rep.generators.iter().enumerate() {
        let a = rep.generator_index(&gen.adjoint)?;
        let mut pairs: Vec<(usize, usize)> = rep
            .blocks
            .keys()
            .filter_map(|&(h, r, c)| {
                if h == g {
                    Some((r, c))
                } else if h == a {
                    Some((c, r))
                } else {
                    None
                }
            })
            .collect();
        pairs.sort();
        pairs.dedup();
        for (row, col) in pairs {
            let (dr, dc) = (rep.sectors[row].dim, rep.sectors[col].dim);
            let left = rep
                .block(g, row, col)
                .map(|m| m * &blocks[col])
                .unwrap_or_else(|| DMatrix::from_element(dr, dc, T::zero()));
            let right = rep
                .block(a, col, row)
                .map(|m| &blocks[row] * m.transpose())
                .unwrap_or_else(|| DMatrix::from_element(dr, dc, T::zero()));
            let scale = fnorm(&left).max(fnorm(&right)).max(1.0);
            worst = worst.max(fnorm(&(left - right)) / scale);
        }
    }
    Ok(worst)
}

/// Diagonalised S-block of one sector: columns of `u` are eigenvectors,
/// `k` the square roots of the eigenvalues (zero for zero-norm states).
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub u: DMatrix<f64>,
    pub k: Vec<f64>,
}

impl SectorBasis {
    pub fn positive(&self) -> impl Iterator<Item = usize> + '_ {
        self.k.iter().enumerate().filter(|(_, k)| **k > 0.0).map(|(i, _)| i)
    }
}

#[derive(Clone, Debug)]
pub struct Orthonormal {
    pub sectors: Vec<SectorBasis>,
    pub zero_norm: usize,
}

/// Diagonalises every S-block.  Eigenvalues below `tol` times the largest
/// eigenvalue of any sector are zero-norm states; eigenvalues below minus
/// that bound are an error.  Within a sector, eigenvalues are sorted
/// descending and each eigenvector has its largest component positive.
pub fn orthonormalize<T: Field>(solution: &SSolution<T>, tol: f64) -> Result<Orthonormal> {
    let mut eigs = Vec::new();
    let mut global: f64 = 0.0;
    for b in &solution.blocks {
        let m = b.map(|x| x.to_f64());
        let m = (&m + m.transpose()) * 0.5;
        let e = if m.nrows() == 0 {
            (Vec::new(), DMatrix::zeros(0, 0))
        } else {
            let se = SymmetricEigen::new(m);
            (se.eigenvalues.iter().copied().collect::<Vec<_>>(), se.eigenvectors)
        };
        global = global.max(e.0.iter().fold(0.0, |a: f64, &x| a.max(x)));
        eigs.push(e);
    }
    let cut = tol * global.max(f64::MIN_POSITIVE);
    let mut sectors = Vec::new();
    let mut zero_norm = 0;
    for (vals, vecs) in eigs {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let n = vals.len();
        let mut u = DMatrix::zeros(n, n);
        let mut k = Vec::with_capacity(n);
        for (c, &i) in idx.iter().enumerate() {
            let v = vals[i];
            if v < -cut {
                return Err(Error::Consistency(format!("S-block has negative eigenvalue {v:.3e}")));
            }
            let mut col = vecs.column(i).clone_owned();
            let lead = col.iter().copied().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
            if lead < 0.0 {
                col = -col;
            }
            u.set_column(c, &col);
            if v > cut {
                k.push(v.sqrt());
            } else {
                k.push(0.0);
                zero_norm += 1;
            }
        }
        sectors.push(SectorBasis { u, k });
    }
    Ok(Orthonormal { sectors, zero_norm })
}

/// Exact norms for diagonal rational S-blocks: `k = √S_nn`.
pub fn orthonormalize_exact(solution: &SSolution<BigRational>) -> Result<Vec<Vec<Radical>>> {
    let mut out = Vec::new();
    for b in &solution.blocks {
        let mut ks = Vec::new();
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                if r != c && !b[(r, c)].is_zero() {
                    return Err(Error::Input("exact orthonormalisation needs diagonal S-blocks".into()));
                }
            }
            let v = &b[(r, r)];
            if v.is_negative() {
                return Err(Error::Consistency(format!("S-block has negative entry {v}")));
            }
            ks.push(Radical::sqrt(v.clone()));
        }
        out.push(ks);
    }
    Ok(out)
}

/// Orthonormal basis state: `(sector, eigenvector index)`.
pub type StateRef = (usize, usize);

/// Unitarised generator matrices on the positive-norm states.
#[derive(Clone, Debug)]
pub struct Unitarized {
    pub states: Vec<StateRef>,
    pub matrices: BTreeMap<String, DMatrix<f64>>,
}

/// `γ_{βα}(X) = k_β⁻¹ [Uᵀ Γ(X) U]_{βα} k_α` restricted to positive-norm states.
pub fn unitarize<T: Field>(rep: &GammaRep<T>, on: &Orthonormal) -> Result<Unitarized> {
    if on.sectors.len() != rep.sectors.len() {
        return Err(Error::Dimension("orthonormal data does not match the representation".into()));
    }
    let mut index: HashMap<StateRef, usize> = HashMap::new();
    let mut states = Vec::new();
    for (s, basis) in on.sectors.iter().enumerate() {
        for a in basis.positive() {
            index.insert((s, a), states.len());
            states.push((s, a));
        }
    }
    let n = states.len();
    let mut matrices = BTreeMap::new();
    for (g, gen) in rep.generators.iter().enumerate() {
        let mut m = DMatrix::zeros(n, n);
        for (&(h, row, col), block) in &rep.blocks {
            if h != g {
                continue;
            }
            let (ur, uc) = (&on.sectors[row].u, &on.sectors[col].u);
            let t = ur.transpose() * block.map(|x| x.to_f64()) * uc;
            for b in on.sectors[row].positive() {
                for a in on.sectors[col].positive() {
                    let v = t[(b, a)] * on.sectors[col].k[a] / on.sectors[row].k[b];
                    m[(index[&(row, b)], index[&(col, a)])] += v;
                }
            }
        }
        matrices.insert(gen.name.clone(), m);
    }
    Ok(Unitarized { states, matrices })
}

/// Largest `‖γ(X)ᵀ − γ(X†)‖ / (1 + ‖γ(X)‖)`.
pub fn unitarity_residual<T: Field>(rep: &GammaRep<T>, u: &Unitarized) -> f64 {
    let mut worst: f64 = 0.0;
    for g in &rep.generators {
        let (a, b) = (&u.matrices[&g.name], &u.matrices[&g.adjoint]);
        worst = worst.max((a.transpose() - b).norm() / (1.0 + a.norm()));
    }
    worst
}

/// Exact unitarisation for a rational Γ with diagonal S-blocks.
pub fn unitarize_exact(rep: &GammaRep<BigRational>, k: &[Vec<Radical>]) -> Result<(Vec<StateRef>, BTreeMap<String, OperatorMatrix>)> {
    let mut index: HashMap<StateRef, usize> = HashMap::new();
    let mut states = Vec::new();
    for (s, ks) in k.iter().enumerate() {
        for (a, v) in ks.iter().enumerate() {
            if !v.is_zero() {
                index.insert((s, a), states.len());
                states.push((s, a));
            }
        }
    }
    let mut out = BTreeMap::new();
    for (g, gen) in rep.generators.iter().enumerate() {
        let mut m = OperatorMatrix::new(gen.name.clone(), states.len());
        for (&(h, row, col), block) in &rep.blocks {
            if h != g {
                continue;
            }
            for b in 0..block.nrows() {
                for a in 0..block.ncols() {
                    let (Some(&r), Some(&c)) = (index.get(&(row, b)), index.get(&(col, a))) else {
                        continue;
                    };
                    let ratio = (&k[col][a] / &k[row][b]).signed_square();
                    // Γ is rational, so γ² = Γ²·(k_α/k_β)² carries the sign of Γ
                    let v = &block[(b, a)];
                    let sq = v * v * ratio;
                    let signed = if v.is_negative() { -sq } else { sq };
                    m.set(r, c, Radical::signed_sqrt(signed));
                }
            }
        }
        out.insert(gen.name.clone(), m);
    }
    Ok((states, out))
}

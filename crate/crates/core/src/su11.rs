//! Lowest-weight discrete-series irreps of su(1,1).
//!
//! The orthonormal basis `|λ n⟩` has `S0 = λ/2 + n`,
//! `⟨n+1|S+|n⟩ = ⟨n|S−|n+1⟩ = √((λ+n)(n+1))`.  Matrices are truncated at
//! `n_max`; commutators hold on the leading `n_max × n_max` block only.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::kmatrix::{GammaRep, GeneratorGrade, SBlock, Sector};
use crate::matrix::{OperatorMatrix, Precision};
use crate::radical::Radical;

/// Generator names in the order used throughout.
pub const GENERATORS: [&str; 3] = ["S0", "S+", "S-"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Su11Irrep {
    lambda: BigRational,
    n_max: usize,
}

impl Su11Irrep {
    pub fn new(lambda: BigRational, n_max: usize) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::Input(format!("lowest weight must be positive, got {lambda}")));
        }
        if n_max < 1 {
            return Err(Error::Input("truncation n_max must be at least 1".into()));
        }
        Ok(Self { lambda, n_max })
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            Err(Error::OutOfRange {
                index: n,
                max: self.n_max,
            })
        } else {
            Ok(())
        }
    }

    fn lam_plus(&self, n: usize) -> BigRational {
        &self.lambda + BigRational::from_integer(n.into())
    }

    /// `K_{λn} = √(Π_{i<n} (λ+i)/(i+1))`.
    pub fn k_factor(&self, n: usize) -> Result<Radical> {
        self.check(n)?;
        let mut sq = BigRational::one();
        for i in 0..n {
            sq *= self.lam_plus(i) / BigRational::from_integer((i + 1).into());
        }
        Ok(Radical::sqrt(sq))
    }

    /// `⟨n|S0|n⟩`.
    pub fn weight(&self, n: usize) -> BigRational {
        &self.lambda / BigRational::from_integer(2.into()) + BigRational::from_integer(n.into())
    }

    /// `⟨n+1|S+|n⟩ = √((λ+n)(n+1))`.
    pub fn raising(&self, n: usize) -> Radical {
        Radical::sqrt(self.lam_plus(n) * BigRational::from_integer((n + 1).into()))
    }

    /// `S0`, `S+`, `S−` on the truncated orthonormal basis.
    pub fn generator_matrices(&self, precision: Precision) -> BTreeMap<String, OperatorMatrix> {
        let d = self.dim();
        let mut s0 = OperatorMatrix::new("S0", d);
        let mut sp = OperatorMatrix::new("S+", d);
        let mut sm = OperatorMatrix::new("S-", d);
        for n in 0..d {
            s0.set(n, n, precision.entry(Radical::from_rational(self.weight(n))));
            if n + 1 < d {
                let v = precision.entry(self.raising(n));
                sp.set(n + 1, n, v.clone());
                sm.set(n, n + 1, v);
            }
        }
        [s0, sp, sm].into_iter().map(|m| (m.name.clone(), m)).collect()
    }

    /// Taylor coefficients of `(1 − t)^{−λ}` up to `t^order`, from the
    /// generalised binomial `(−1)^ν C(−λ, ν)`.
    pub fn s_kernel_coefficients(&self, order: usize) -> Result<Vec<BigRational>> {
        self.check(order)?;
        let minus_lambda = -self.lambda.clone();
        let mut binom = BigRational::one();
        let mut out = vec![BigRational::one()];
        for nu in 0..order {
            let k = BigRational::from_integer(nu.into());
            binom = binom * (&minus_lambda - &k) / (&k + BigRational::one());
            let sign = if (nu + 1) % 2 == 0 { 1 } else { -1 };
            out.push(&binom * BigRational::from_integer(sign.into()));
        }
        Ok(out)
    }

    /// `¼λ² − ½λ`, the Casimir `S0² − ½(S+S− + S−S+)` on the irrep.
    pub fn casimir(&self) -> BigRational {
        let l = &self.lambda;
        l * l / BigRational::from_integer(4.into()) - l / BigRational::from_integer(2.into())
    }

    /// The holomorphic realisation `S+ = λz + z²∂`, `S− = ∂`, `S0 = λ/2 + z∂`
    /// on the monomials `zⁿ`, one sector per `n`, with the seed `S = [1]`
    /// at `n = 0`.
    pub fn holomorphic_gamma(&self) -> (GammaRep<BigRational>, Vec<SBlock<BigRational>>) {
        let sectors = (0..self.dim())
            .map(|n| Sector {
                label: format!("n={n}"),
                grade: n as i64,
                dim: 1,
            })
            .collect();
        let gens = vec![
            GeneratorGrade {
                name: "S0".into(),
                adjoint: "S0".into(),
                grade: 0,
            },
            GeneratorGrade {
                name: "S+".into(),
                adjoint: "S-".into(),
                grade: 1,
            },
            GeneratorGrade {
                name: "S-".into(),
                adjoint: "S+".into(),
                grade: -1,
            },
        ];
        let mut rep = GammaRep::new(sectors, gens).expect("adjoints are listed");
        for n in 0..self.dim() {
            rep.add("S0", (n, 0), (n, 0), self.weight(n)).expect("in range");
            if n < self.n_max {
                rep.add("S+", (n + 1, 0), (n, 0), self.lam_plus(n)).expect("in range");
                rep.add("S-", (n, 0), (n + 1, 0), BigRational::from_integer((n + 1).into()))
                    .expect("in range");
            }
        }
        let seed = SBlock {
            sector: 0,
            matrix: nalgebra::DMatrix::identity(1, 1),
        };
        (rep, vec![seed])
    }
}

/// Whether `K_{n+1}² / K_n² = (λ+n)/(n+1)` holds exactly for all `n < n_max`.
pub fn recursion_holds(irrep: &Su11Irrep) -> Result<bool> {
    for n in 0..irrep.n_max() {
        let a = irrep.k_factor(n)?.square();
        let b = irrep.k_factor(n + 1)?.square();
        if a.is_zero() || b / a != irrep.lam_plus(n) / BigRational::from_integer((n + 1).into()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmatrix::{orthonormalize_exact, solve_s_recursion, unitarize_exact};
    use crate::repcheck::{exact_casimir_matrix, exact_commutator_failures, exact_hermiticity_failures, exact_scalar, su11_spec};

    fn irrep(n: i64, d: i64, n_max: usize) -> Su11Irrep {
        Su11Irrep::new(BigRational::new(n.into(), d.into()), n_max).unwrap()
    }

    #[test]
    fn k_factor_values() {
        assert_eq!(irrep(5, 2, 3).k_factor(0).unwrap(), Radical::one());
        assert_eq!(irrep(1, 1, 6).k_factor(5).unwrap(), Radical::one());
        assert_eq!(irrep(3, 1, 4).k_factor(2).unwrap(), Radical::sqrt_ratio(6, 1));
        assert!(irrep(3, 1, 4).k_factor(5).is_err());
        assert!(recursion_holds(&irrep(7, 2, 20)).unwrap());
    }

    #[test]
    fn invalid_irreps() {
        assert!(Su11Irrep::new(BigRational::zero(), 3).is_err());
        assert!(Su11Irrep::new(BigRational::one(), 0).is_err());
    }

    #[test]
    fn matrix_entries() {
        let m = irrep(2, 1, 4).generator_matrices(Precision::Exact);
        assert_eq!(m["S0"].get(0, 0).unwrap().to_f64(), 1.0);
        assert!(m["S-"].entries().all(|(&(_, c), _)| c != 0));
        let m = irrep(3, 1, 4).generator_matrices(Precision::Exact);
        assert_eq!(m["S+"].get(1, 0), Some(&Radical::sqrt_ratio(3, 1).into()));
    }

    #[test]
    fn kernel_coefficients() {
        let c = irrep(1, 1, 8).s_kernel_coefficients(8).unwrap();
        assert!(c.iter().all(|x| x.is_one()));
        let c = irrep(2, 1, 8).s_kernel_coefficients(8).unwrap();
        for (nu, x) in c.iter().enumerate() {
            assert_eq!(*x, BigRational::from_integer((nu as i64 + 1).into()));
        }
        let ir = irrep(7, 3, 10);
        for (n, x) in ir.s_kernel_coefficients(10).unwrap().iter().enumerate() {
            assert_eq!(ir.k_factor(n).unwrap().square(), *x);
        }
    }

    #[test]
    fn exact_algebra_on_interior_block() {
        let ir = irrep(3, 1, 10);
        let mats: BTreeMap<_, _> = ir
            .generator_matrices(Precision::Exact)
            .into_iter()
            .map(|(k, m)| (k, m.to_surd().unwrap()))
            .collect();
        let spec = su11_spec();
        assert!(exact_commutator_failures(&spec, &mats, Some(ir.n_max())).unwrap().is_empty());
        assert!(!exact_commutator_failures(&spec, &mats, None).unwrap().is_empty());
        assert!(exact_hermiticity_failures(&spec, &mats).unwrap().is_empty());
        let cas = exact_casimir_matrix(&spec, &mats).unwrap().leading_block(ir.n_max());
        assert_eq!(exact_scalar(&cas).unwrap().to_f64(), 0.75);
    }

    #[test]
    fn kmatrix_reproduces_closed_form() {
        let ir = irrep(3, 1, 8);
        let (rep, seed) = ir.holomorphic_gamma();
        let sol = solve_s_recursion(&rep, &seed, 0.0).unwrap();
        let k = orthonormalize_exact(&sol).unwrap();
        for n in 0..=8 {
            assert_eq!(k[n][0], ir.k_factor(n).unwrap());
        }
        let (_, gamma) = unitarize_exact(&rep, &k).unwrap();
        assert_eq!(gamma, ir.generator_matrices(Precision::Exact));
    }
}

//! Versioned JSON exchange format and the verification report.
//!
//! A document holds one irrep: the request that produced it, the basis
//! labels, every generator as sparse `[row, col, value]` triplets, and a
//! reduced matrix element table.  Exact values are [`Radical`] objects;
//! floats are strings in shortest round-trip form, so a written document
//! re-reads bit for bit.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Entry, OperatorMatrix, Precision, SurdMatrix};
use crate::radical::{parse_rational, Radical};
use crate::repcheck::{
    casimir_matrix, commutator_residual, exact_casimir_matrix, exact_commutator_failures,
    exact_hermiticity_failures, exact_scalar, hermiticity_residual, schur_constancy, shipped_spec, AlgebraSpec,
};
use crate::su11::Su11Irrep;
use crate::su3::{branching_oracle, RotorIrrep, Su3Label};
use crate::u3::{self, basis_enumeration, reduced_me, Tensor, U3HighestWeight};
use crate::am::Spin;

pub const SCHEMA_VERSION: u32 = 1;

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Entry::Exact(r) => r.serialize(serializer),
            Entry::Float(x) => serializer.serialize_str(&format!("{x}")),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Float(String),
            Exact(Radical),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Exact(r) => Ok(Entry::Exact(r)),
            Repr::Float(s) => s
                .parse::<f64>()
                .map(Entry::Float)
                .map_err(|_| de::Error::custom(format!("{s:?} is not a float"))),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Exact(r) => write!(f, "{r}"),
            Entry::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Which irrep to build.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algebra", rename_all = "kebab-case")]
pub enum IrrepRequest {
    Su11 { lambda: String, n_max: usize },
    U3 { weight: String },
    Su3So3 { lam: u32, mu: u32 },
}

impl IrrepRequest {
    pub fn algebra(&self) -> &'static str {
        match self {
            IrrepRequest::Su11 { .. } => "su11",
            IrrepRequest::U3 { .. } => "u3",
            IrrepRequest::Su3So3 { .. } => "su3-so3",
        }
    }

    /// Weight label used in CSV output.
    pub fn weight_label(&self) -> String {
        match self {
            IrrepRequest::Su11 { lambda, .. } => lambda.clone(),
            IrrepRequest::U3 { weight } => format!("{{{}}}", weight.trim_matches(|c| c == '{' || c == '}')),
            IrrepRequest::Su3So3 { lam, mu } => format!("({lam},{mu})"),
        }
    }

    fn su11(&self) -> Result<Su11Irrep> {
        match self {
            IrrepRequest::Su11 { lambda, n_max } => Su11Irrep::new(parse_rational(lambda)?, *n_max),
            _ => unreachable!(),
        }
    }
}

/// One row of a reduced matrix element table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedEntry {
    pub operator: String,
    pub bra: String,
    pub ket: String,
    pub value: Entry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema: u32,
    #[serde(flatten)]
    pub request: IrrepRequest,
    pub precision: Precision,
    pub basis: Vec<String>,
    pub generators: BTreeMap<String, Vec<(usize, usize, Entry)>>,
    #[serde(default)]
    pub reduced: Vec<ReducedEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

fn triplets(m: &OperatorMatrix) -> Vec<(usize, usize, Entry)> {
    m.entries().map(|(&(r, c), e)| (r, c, e.clone())).collect()
}

fn precision_of(r: Radical, precision: Precision) -> Entry {
    precision.entry(r)
}

/// Builds the document for a request.
pub fn generate(request: &IrrepRequest, precision: Precision) -> Result<Document> {
    let mut metadata = BTreeMap::new();
    let (basis, mats, reduced) = match request {
        IrrepRequest::Su11 { .. } => {
            let irrep = request.su11()?;
            let basis = (0..irrep.dim()).map(|n| format!("n={n}")).collect();
            let mats = irrep.generator_matrices(precision);
            let reduced = (0..irrep.n_max())
                .map(|n| ReducedEntry {
                    operator: "S+".into(),
                    bra: format!("n={}", n + 1),
                    ket: format!("n={n}"),
                    value: precision_of(irrep.raising(n), precision),
                })
                .collect();
            metadata.insert("kernel".into(), format!("(1 - x y*)^(-{})", irrep.lambda()));
            metadata.insert("kernel_convergence_radius".into(), "1".into());
            metadata.insert("interior_block".into(), irrep.n_max().to_string());
            (basis, mats, reduced)
        }
        IrrepRequest::U3 { weight } => {
            let hw: U3HighestWeight = weight.parse()?;
            let labels = basis_enumeration(&hw);
            let mats = u3::assemble_generators(&hw, precision)?;
            let mut reduced = Vec::new();
            let mut pairs: Vec<(Spin, Spin)> = labels.iter().map(|l| (l.j, l.spin)).collect();
            pairs.dedup();
            for (j, spin) in pairs {
                let jp = Spin::from_twice(j.twice() + 1);
                for tsp in [spin.twice() as i64 - 1, spin.twice() as i64 + 1] {
                    if tsp < 0 {
                        continue;
                    }
                    let sp = Spin::from_twice(tsp as u32);
                    for (tensor, name) in [(Tensor::F, "f"), (Tensor::E, "e")] {
                        let v = reduced_me(&hw, j, spin, sp, tensor)?;
                        if v.is_zero() {
                            continue;
                        }
                        let (lo, hi) = (format!("j={j},S={spin}"), format!("j={jp},S={sp}"));
                        let (bra, ket) = if tensor == Tensor::F { (hi, lo) } else { (lo, hi) };
                        reduced.push(ReducedEntry {
                            operator: name.into(),
                            bra,
                            ket,
                            value: precision_of(v, precision),
                        });
                    }
                }
            }
            (labels.iter().map(|l| l.to_string()).collect(), mats, reduced)
        }
        IrrepRequest::Su3So3 { lam, mu } => {
            if precision == Precision::Exact {
                return Err(Error::Input(
                    "su3-so3 matrices come from a numerical diagonalisation; use float mode".into(),
                ));
            }
            let lm = Su3Label::new(*lam, *mu);
            let irrep = RotorIrrep::build(lm)?;
            let mut reduced = Vec::new();
            for &(lp, b) in &irrep.states {
                for &(l, a) in &irrep.states {
                    let v = irrep.reduced_q(b, lp, a, l);
                    if lp.abs_diff(l) <= 2 && v != 0.0 {
                        reduced.push(ReducedEntry {
                            operator: "Q".into(),
                            bra: format!("alpha={b},L={lp}"),
                            ket: format!("alpha={a},L={l}"),
                            value: Entry::Float(v),
                        });
                    }
                }
            }
            let basis = irrep.basis().iter().map(|l| l.to_string()).collect();
            (basis, irrep.generators(), reduced)
        }
    };
    Ok(Document {
        schema: SCHEMA_VERSION,
        request: request.clone(),
        precision,
        basis,
        generators: mats.iter().map(|(k, m)| (k.clone(), triplets(m))).collect(),
        reduced,
        metadata,
    })
}

impl Document {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Input(format!("unsupported schema version {}", doc.schema)));
        }
        Ok(doc)
    }

    /// Rebuilds the generator matrices; entries outside the basis are errors.
    pub fn matrices(&self) -> Result<BTreeMap<String, OperatorMatrix>> {
        let d = self.basis.len();
        let mut out = BTreeMap::new();
        for (name, entries) in &self.generators {
            let mut m = OperatorMatrix::new(name.clone(), d);
            for (r, c, v) in entries {
                if *r >= d || *c >= d {
                    return Err(Error::OutOfRange {
                        index: (*r).max(*c),
                        max: d.saturating_sub(1),
                    });
                }
                m.set(*r, *c, v.clone());
            }
            out.insert(name.clone(), m);
        }
        Ok(out)
    }

    /// CSV rows of the reduced table: weight, bra, ket, value.  The `e`
    /// and `f` tables of u(3) are told apart by which side carries the
    /// larger `j`.
    pub fn reduced_rows(&self) -> Vec<[String; 4]> {
        let w = self.request.weight_label();
        self.reduced
            .iter()
            .map(|e| [w.clone(), e.bra.clone(), e.ket.clone(), e.value.to_string()])
            .collect()
    }
}

/// Outcome of one verification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<14} residual={:.3e}", self.name, self.residual)?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

fn result(name: &str, residual: f64, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        residual,
        passed,
        detail,
    }
}

fn complex(m: &BTreeMap<String, OperatorMatrix>) -> BTreeMap<String, DMatrix<Complex64>> {
    m.iter().map(|(k, v)| (k.clone(), v.to_complex())).collect()
}

fn leading(m: &DMatrix<Complex64>, n: Option<usize>) -> DMatrix<Complex64> {
    match n {
        Some(n) => m.view((0, 0), (n, n)).clone_owned(),
        None => m.clone(),
    }
}

/// Runs the algebra checks on a document.  Exact documents must satisfy
/// every relation identically; float documents within `tol`.
pub fn verify(doc: &Document, tol: f64) -> Result<Vec<CheckResult>> {
    let spec: AlgebraSpec = shipped_spec(doc.request.algebra()).expect("every algebra ships a table");
    let mats = doc.matrices()?;
    for g in &spec.generators {
        if !mats.contains_key(g) {
            return Err(Error::Input(format!("document lacks generator {g}")));
        }
    }
    let interior = match &doc.request {
        IrrepRequest::Su11 { .. } => Some(doc.basis.len().saturating_sub(1)),
        _ => None,
    };
    let exact = doc.precision == Precision::Exact && mats.values().all(|m| m.is_exact());
    let c = complex(&mats);
    let mut out = Vec::new();

    let comm = commutator_residual(&spec, &c, interior)?;
    let herm = hermiticity_residual(&spec, &c)?;
    let cas = leading(&casimir_matrix(&spec, &c)?, interior);
    let (mean, dev) = schur_constancy(&cas);
    if exact {
        let surd: BTreeMap<String, SurdMatrix> =
            mats.iter().map(|(k, m)| Ok((k.clone(), m.to_surd()?))).collect::<Result<_>>()?;
        let fails = exact_commutator_failures(&spec, &surd, interior)?;
        let detail = if fails.is_empty() { "exact".into() } else { format!("failing pairs {fails:?}") };
        out.push(result("commutators", comm, fails.is_empty(), detail));
        let fails = exact_hermiticity_failures(&spec, &surd)?;
        let detail = if fails.is_empty() { "exact".into() } else { format!("failing {fails:?}") };
        out.push(result("hermiticity", herm, fails.is_empty(), detail));
        let mut cas = exact_casimir_matrix(&spec, &surd)?;
        if let Some(n) = interior {
            cas = cas.leading_block(n);
        }
        let scalar = exact_scalar(&cas);
        let detail = match &scalar {
            Some(v) => format!("exact value {v}"),
            None => "not a multiple of the identity".into(),
        };
        out.push(result("casimir-schur", dev, scalar.is_some(), detail));
    } else {
        out.push(result("commutators", comm, comm <= tol, String::new()));
        out.push(result("hermiticity", herm, herm <= tol, String::new()));
        out.push(result("casimir-schur", dev, dev <= tol, format!("mean {mean}")));
    }

    match &doc.request {
        IrrepRequest::Su11 { .. } => {
            let irrep = doc.request.su11()?;
            let want: f64 = num_traits::ToPrimitive::to_f64(&irrep.casimir()).unwrap_or(f64::NAN);
            let r = (mean - want).abs() / want.abs().max(1.0);
            out.push(result("casimir-value", r, r <= tol, format!("expected {}", irrep.casimir())));
            let d = doc.basis.len();
            let ok = d == irrep.dim();
            out.push(result("dimension", 0.0, ok, format!("{d} states, expected {}", irrep.dim())));
        }
        IrrepRequest::U3 { weight } => {
            let hw: U3HighestWeight = weight.parse()?;
            let d = doc.basis.len();
            out.push(result("dimension", 0.0, d == hw.dim(), format!("{d} states, expected {}", hw.dim())));
        }
        IrrepRequest::Su3So3 { lam, mu } => {
            let lm = Su3Label::new(*lam, *mu);
            let want = lm.casimir() as f64;
            let r = (mean - want).abs() / want.max(1.0);
            out.push(result("casimir-value", r, r <= tol, format!("expected {want}")));
            let d = doc.basis.len();
            out.push(result("dimension", 0.0, d == lm.dim(), format!("{d} states, expected {}", lm.dim())));
            let rotor = rotor_multiplicities(&doc.basis)?;
            let oracle = branching_oracle(lm)?;
            out.push(result(
                "branching",
                0.0,
                rotor == oracle,
                format!("rotor {rotor:?} canonical {oracle:?}"),
            ));
        }
    }
    Ok(out)
}

/// `L → multiplicity` read back from rotor basis labels.
fn rotor_multiplicities(basis: &[String]) -> Result<BTreeMap<u32, usize>> {
    let mut count: BTreeMap<u32, usize> = BTreeMap::new();
    for label in basis {
        let l = label
            .split(',')
            .find_map(|p| p.strip_prefix("L="))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::Parse(format!("bad rotor label {label:?}")))?;
        *count.entry(l).or_default() += 1;
    }
    Ok(count.into_iter().map(|(l, n)| (l, n / (2 * l as usize + 1))).collect())
}

/// Parses a positive rational λ given as `3`, `7/2` or `3.5`.
pub fn parse_lambda(text: &str) -> Result<BigRational> {
    parse_rational(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su11(lambda: &str, n_max: usize) -> IrrepRequest {
        IrrepRequest::Su11 {
            lambda: lambda.into(),
            n_max,
        }
    }

    #[test]
    fn entries_round_trip() {
        for e in [Entry::Exact(Radical::sqrt_ratio(3, 2)), Entry::Float(0.1 + 0.2), Entry::Float(-1e-300)] {
            let text = serde_json::to_string(&e).unwrap();
            assert_eq!(serde_json::from_str::<Entry>(&text).unwrap(), e);
        }
        assert_eq!(serde_json::to_string(&Entry::Float(2.0)).unwrap(), "\"2\"");
    }

    #[test]
    fn su11_document() {
        let doc = generate(&su11("3", 10), Precision::Exact).unwrap();
        assert_eq!(doc.basis.len(), 11);
        let back = Document::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        let report = verify(&back, 1e-10).unwrap();
        assert!(report.iter().all(|r| r.passed), "{report:?}");
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let doc = generate(&IrrepRequest::Su3So3 { lam: 2, mu: 2 }, Precision::Float).unwrap();
        let back = Document::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(verify(&doc, 1e-10).unwrap(), verify(&back, 1e-10).unwrap());
        assert!(!doc.reduced.is_empty());
    }

    #[test]
    fn exact_su3_rejected() {
        let err = generate(&IrrepRequest::Su3So3 { lam: 1, mu: 1 }, Precision::Exact).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn corruption_detected() {
        let mut doc = generate(&IrrepRequest::U3 { weight: "2,1,0".into() }, Precision::Exact).unwrap();
        assert_eq!(doc.basis.len(), 8);
        assert!(verify(&doc, 1e-10).unwrap().iter().all(|r| r.passed));
        let entry = &mut doc.generators.get_mut("C21").unwrap()[0];
        entry.2 = Entry::Exact(Radical::from_integer(5));
        let report = verify(&doc, 1e-10).unwrap();
        assert!(report.iter().any(|r| !r.passed));
    }

    #[test]
    fn schema_version_enforced() {
        let doc = generate(&su11("1", 2), Precision::Float).unwrap();
        let text = doc.to_json().unwrap().replace("\"schema\": 1", "\"schema\": 7");
        assert!(Document::from_json(&text).is_err());
    }
}

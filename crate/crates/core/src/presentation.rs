//! Reading the orbit-space cohomology off a stable page: Betti numbers,
//! generators, associated-graded products, and relation skeletons whose
//! undetermined lower-filtration coefficients become named parameters.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_linalg::{format_rational, is_zero_vector, solve_in_span, Rational, Subspace, Vector};
use crate::fiber_algebra::{multiply_local, FiberElement, SpaceSignature};
use crate::page_engine::{Bidegree, Page};
use crate::schedule::{check_freeness, format_element};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("stable page is not free-consistent (witness {witness})")]
    NotFree { witness: Bidegree },
}

/// Degree to dimension of H^k, zero entries omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BettiTable {
    dims: BTreeMap<usize, usize>,
}

impl BettiTable {
    pub fn new(dims: impl IntoIterator<Item = (usize, usize)>) -> Self {
        BettiTable {
            dims: dims.into_iter().filter(|&(_, d)| d > 0).collect(),
        }
    }

    /// Total dimensions of the page over its certified band.
    pub fn from_page(page: &Page) -> Self {
        BettiTable::new(page.total_dims())
    }

    pub fn get(&self, k: usize) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<usize, usize> {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.dims.keys().next_back().copied()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .map(|(&k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

impl fmt::Display for BettiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|(k, d)| format!("{k}:{d}")).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn betti_table(stable: &Page) -> Result<BettiTable, PresentationError> {
    let verdict = check_freeness(stable);
    match verdict.witness {
        Some(witness) => Err(PresentationError::NotFree { witness }),
        None => Ok(BettiTable::from_page(stable)),
    }
}

/// A fiber-column generator of the E∞ algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberGenerator {
    pub name: String,
    pub degree: usize,
    /// Column-0 representative in fiber monomial coordinates.
    pub rep: Vector,
    /// Number of nonzero classes t^k ⊗ rep, k = 0, 1, ...
    pub tower: usize,
}

impl FiberGenerator {
    pub fn rep_element(&self, sig: &SpaceSignature) -> FiberElement {
        FiberElement::from_local(sig, self.degree, &self.rep)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    /// Nilpotency exponent of x, the class of t: x^e = 0 and x^(e-1) ≠ 0.
    pub x_exponent: usize,
    pub fiber: Vec<FiberGenerator>,
}

impl GeneratorSet {
    pub fn by_name(&self, name: &str) -> Option<&FiberGenerator> {
        self.fiber.iter().find(|g| g.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        std::iter::once("x".to_string())
            .chain(self.fiber.iter().map(|g| g.name.clone()))
            .collect()
    }
}

fn generator_name(i: usize) -> String {
    match i {
        0 => "y".to_string(),
        1 => "w".to_string(),
        2 => "z".to_string(),
        _ => format!("g{}", i + 1),
    }
}

/// First column p (even) whose boundaries contain `v`.
fn tower_length(stable: &Page, q: usize, v: &[Rational]) -> Option<usize> {
    let band = stable.certified_band();
    (0..=band)
        .step_by(2)
        .find(|&p| {
            stable
                .cell(Bidegree::new(p, q))
                .is_some_and(|c| c.boundaries().contains(v))
        })
        .map(|p| p / 2)
}

/// x plus a column-0 basis adapted to the filtration of boundaries by column,
/// so that every generator has a well-defined tower length.
pub fn extract_generators(stable: &Page) -> Result<GeneratorSet, PresentationError> {
    let verdict = check_freeness(stable);
    if let Some(witness) = verdict.witness {
        return Err(PresentationError::NotFree { witness });
    }
    let sig = *stable.sig();
    let band = stable.certified_band();
    let unit = [Rational::from_integer(1.into())];
    let x_exponent = tower_length(stable, 0, &unit).expect("free page kills the bottom row");
    let mut raw = Vec::new();
    for q in sig.fiber_degrees().into_iter().filter(|&q| q > 0) {
        let z = stable.column_cycles(q).expect("column 0");
        let mut acc = Subspace::zero(z.ambient_dim());
        let mut p = 2;
        while p <= band && acc.dim() < z.dim() {
            let b = stable.cell(Bidegree::new(p, q)).expect("cell").boundaries();
            for v in b.basis() {
                if !acc.contains(v) {
                    let v = acc.reduce(v);
                    acc = acc.with(std::slice::from_ref(&v));
                    raw.push((q, p / 2, v));
                }
            }
            p += 2;
        }
        if acc.dim() < z.dim() {
            return Err(PresentationError::NotFree {
                witness: Bidegree::new(band, q),
            });
        }
    }
    // increasing degree, ties by the order found (E₂ monomial order)
    raw.sort_by_key(|(q, _, _)| *q);
    let fiber = raw
        .into_iter()
        .enumerate()
        .map(|(i, (degree, tower, rep))| FiberGenerator {
            name: generator_name(i),
            degree,
            rep,
            tower,
        })
        .collect();
    Ok(GeneratorSet { x_exponent, fiber })
}

/// Product table of fiber generators: (i, j) with i ≤ j to coefficients on
/// the generators of degree deg_i + deg_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub products: BTreeMap<(usize, usize), Vec<(Rational, usize)>>,
}

pub fn structure_constants(stable: &Page, gens: &GeneratorSet) -> StructureConstants {
    let sig = *stable.sig();
    let mut products = BTreeMap::new();
    for (i, gi) in gens.fiber.iter().enumerate() {
        for (j, gj) in gens.fiber.iter().enumerate().skip(i) {
            let q = gi.degree + gj.degree;
            let mut coeffs = Vec::new();
            if sig.dim(q) > 0 {
                let w = multiply_local(&sig, gi.degree, &gi.rep, gj.degree, &gj.rep);
                if !is_zero_vector(&w) {
                    let same: Vec<usize> = (0..gens.fiber.len())
                        .filter(|&k| gens.fiber[k].degree == q)
                        .collect();
                    let basis: Vec<Vector> = same.iter().map(|&k| gens.fiber[k].rep.clone()).collect();
                    let c = solve_in_span(&basis, &w).expect("product of survivors is a survivor");
                    for (coef, k) in c.into_iter().zip(same) {
                        if coef != Rational::from_integer(0.into()) {
                            coeffs.push((coef, k));
                        }
                    }
                }
            }
            products.insert((i, j), coeffs);
        }
    }
    StructureConstants { products }
}

/// x^(x_degree / 2) times a fiber generator (or the unit when `generator` is None).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    /// Twice the exponent of x, so odd values encode non-integral powers.
    pub x_degree: i64,
    pub generator: Option<String>,
}

impl Term {
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.x_degree != 0 {
            let e = self.x_degree / 2;
            if self.x_degree % 2 != 0 {
                parts.push(format!("x^({}/2)", self.x_degree));
            } else if e == 1 {
                parts.push("x".to_string());
            } else {
                parts.push(format!("x^{e}"));
            }
        }
        if let Some(g) = &self.generator {
            parts.push(g.clone());
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Whether `term` can occur in degree `total_degree`: the exponent of x must
/// be a non-negative integer, degrees must add up, and E∞ must be nonzero at
/// the term's bidegree.
pub fn term_feasible(stable: &Page, gens: &GeneratorSet, total_degree: i64, term: &Term) -> bool {
    if term.x_degree < 0 || term.x_degree % 2 != 0 {
        return false;
    }
    let q = match &term.generator {
        None => 0,
        Some(name) => match gens.by_name(name) {
            Some(g) => g.degree,
            None => return false,
        },
    };
    if term.x_degree + q as i64 != total_degree {
        return false;
    }
    stable.dim(Bidegree::new(term.x_degree as usize, q)) > 0
}

fn infeasibility_reason(gens: &GeneratorSet, total_degree: i64, term: &Term) -> String {
    if term.x_degree % 2 != 0 {
        return "non-integral power of x".to_string();
    }
    let q = term
        .generator
        .as_ref()
        .and_then(|n| gens.by_name(n))
        .map_or(0, |g| g.degree);
    if term.x_degree + q as i64 != total_degree {
        return "degree mismatch".to_string();
    }
    format!("E_inf vanishes at ({},{})", term.x_degree, q)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParameterStatus {
    Free,
    ForcedZero(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationParameter {
    pub name: String,
    pub term: Term,
    pub status: ParameterStatus,
}

/// left_i · left_j = leading + Σ parameter · term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub left: (usize, usize),
    pub degree: usize,
    pub leading: Vec<(Rational, usize)>,
    pub parameters: Vec<RelationParameter>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationSketch {
    pub generators: GeneratorSet,
    /// Relations x^e · g = 0 for generators whose tower is shorter than x's.
    pub annihilators: Vec<(usize, usize)>,
    pub relations: Vec<Relation>,
}

pub fn presentation_sketch(stable: &Page, gens: &GeneratorSet) -> PresentationSketch {
    let constants = structure_constants(stable, gens);
    let annihilators = gens
        .fiber
        .iter()
        .enumerate()
        .filter(|(_, g)| g.tower < gens.x_exponent)
        .map(|(i, g)| (g.tower, i))
        .collect();
    let mut counter = 0;
    let mut relations = Vec::new();
    for (&(i, j), leading) in &constants.products {
        let degree = gens.fiber[i].degree + gens.fiber[j].degree;
        let mut candidates: Vec<Term> = Vec::new();
        for k in 1..=degree / 2 {
            let x_degree = 2 * k;
            if x_degree == degree {
                candidates.push(Term {
                    x_degree: x_degree as i64,
                    generator: None,
                });
            }
            for g in &gens.fiber {
                if x_degree + g.degree == degree {
                    candidates.push(Term {
                        x_degree: x_degree as i64,
                        generator: Some(g.name.clone()),
                    });
                }
            }
        }
        let parameters = candidates
            .into_iter()
            .map(|term| {
                counter += 1;
                let status = if term_feasible(stable, gens, degree as i64, &term) {
                    ParameterStatus::Free
                } else {
                    ParameterStatus::ForcedZero(infeasibility_reason(gens, degree as i64, &term))
                };
                RelationParameter {
                    name: format!("a{counter}"),
                    term,
                    status,
                }
            })
            .collect();
        relations.push(Relation {
            left: (i, j),
            degree,
            leading: leading.clone(),
            parameters,
        });
    }
    PresentationSketch {
        generators: gens.clone(),
        annihilators,
        relations,
    }
}

fn power(base: &str, e: usize) -> String {
    match e {
        1 => base.to_string(),
        _ => format!("{base}^{e}"),
    }
}

impl PresentationSketch {
    fn name(&self, i: usize) -> &str {
        &self.generators.fiber[i].name
    }

    /// Ideal generators as strings, in (degree, text) order.
    pub fn relation_strings(&self) -> Vec<String> {
        let mut out: Vec<(usize, String)> = Vec::new();
        out.push((2 * self.generators.x_exponent, power("x", self.generators.x_exponent)));
        for &(e, i) in &self.annihilators {
            out.push((2 * e + self.generators.fiber[i].degree, format!("{}*{}", power("x", e), self.name(i))));
        }
        for rel in &self.relations {
            let (i, j) = rel.left;
            let mut text = if i == j {
                power(self.name(i), 2)
            } else {
                format!("{}*{}", self.name(i), self.name(j))
            };
            for (c, k) in &rel.leading {
                let neg = -c.clone();
                text.push_str(&signed_term(&neg, self.name(*k)));
            }
            for p in &rel.parameters {
                if p.status == ParameterStatus::Free {
                    text.push_str(&format!("+{}*{}", p.name, p.term.render()));
                }
            }
            out.push((rel.degree, text));
        }
        out.sort();
        out.into_iter().map(|(_, s)| s).collect()
    }

    pub fn render(&self) -> String {
        format!(
            "Q[{}]/<{}>",
            self.generators.names().join(","),
            self.relation_strings().join(", ")
        )
    }

    /// Hilbert series of the sketch with all parameters zero: x^k for k below
    /// the x exponent and x^k · g for k below g's tower.
    pub fn hilbert_series(&self) -> BettiTable {
        let mut dims: BTreeMap<usize, usize> = BTreeMap::new();
        for k in 0..self.generators.x_exponent {
            *dims.entry(2 * k).or_insert(0) += 1;
        }
        for g in &self.generators.fiber {
            for k in 0..g.tower {
                *dims.entry(2 * k + g.degree).or_insert(0) += 1;
            }
        }
        BettiTable::new(dims)
    }

    pub fn parameters(&self) -> impl Iterator<Item = &RelationParameter> {
        self.relations.iter().flat_map(|r| r.parameters.iter())
    }
}

fn signed_term(c: &Rational, name: &str) -> String {
    let one = Rational::from_integer(1.into());
    if *c == one {
        format!("+{name}")
    } else if *c == -one {
        format!("-{name}")
    } else if *c > Rational::from_integer(0.into()) {
        format!("+{}*{name}", format_rational(c))
    } else {
        format!("-{}*{name}", format_rational(&-c.clone()))
    }
}

/// Generator representatives as schedule-style element strings.
pub fn generator_reps(sig: &SpaceSignature, gens: &GeneratorSet) -> Vec<(String, usize, String, usize)> {
    gens.fiber
        .iter()
        .map(|g| (g.name.clone(), g.degree, format_element(&g.rep_element(sig)), g.tower))
        .collect()
}

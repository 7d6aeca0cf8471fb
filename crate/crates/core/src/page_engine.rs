//! Pages of the spectral sequence with E₂ = Q[t] ⊗ H*(X), deg t = 2.
//!
//! A page is stored cell by cell. Each cell (p, q) keeps two subspaces of the
//! fiber degree-q monomial space: the cycles that survive to this page and
//! the boundaries hit so far. The t-power p/2 is implicit. Since every class
//! is a t-multiple of a column-0 cycle, a differential d_r is determined by a
//! derivation δ on column-0 cycles, with d_r(t^k ⊗ v) = t^(k + r/2) ⊗ δ(v).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_linalg::{
    add_scaled, combine, complement_in, is_zero_vector, kernel_basis, rat, solve_in_span, zero_vector, Matrix,
    Rational, Subspace, Vector,
};
use crate::fiber_algebra::{
    mono_degree, multiply_local, FiberElement, FiberMonomial, SpaceSignature,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub p: usize,
    pub q: usize,
}

impl Bidegree {
    pub fn new(p: usize, q: usize) -> Self {
        Bidegree { p, q }
    }

    pub fn total(&self) -> usize {
        self.p + self.q
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// The E₂ basis element t^k ⊗ mono.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct E2Label {
    pub t_power: usize,
    pub mono: FiberMonomial,
}

impl E2Label {
    pub fn bidegree(&self, sig: &SpaceSignature) -> Bidegree {
        Bidegree::new(2 * self.t_power, mono_degree(sig, self.mono))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("window {window} must be even and at least {minimum}")]
    BadWindow { window: usize, minimum: usize },
    #[error("page {page}: differentials on odd pages vanish, no event allowed")]
    OddPage { page: usize },
    #[error("page {page}: event page outside 2..={last}")]
    PageOutOfRange { page: usize, last: usize },
    #[error("page {page}: source `{source_text}` is not a nonzero homogeneous element")]
    BadSource { page: usize, source_text: String },
    #[error("page {page}: source `{source_text}` does not survive to this page")]
    SourceNotSurviving { page: usize, source_text: String },
    #[error("page {page}: source `{source_text}` is decomposable or repeats another source")]
    SourceNotIndecomposable { page: usize, source_text: String },
    #[error("page {page}: target bidegree ({p},{q}) of `{source_text}` is empty")]
    EmptyTarget { page: usize, source_text: String, p: usize, q: isize },
    #[error("page {page}: target `{target}` is not homogeneous of fiber degree {expected}")]
    TargetDegree { page: usize, target: String, expected: usize },
    #[error("page {page}: target `{target}` is not a class on this page")]
    TargetNotClass { page: usize, target: String },
    #[error("page {page}: target `{target}` is zero on this page")]
    TargetVanishes { page: usize, target: String },
    #[error("page {page}: Leibniz extension is inconsistent in fiber degree {q}")]
    DerivationInconsistent { page: usize, q: usize },
    #[error("page {page}: boundaries in fiber degree {q} are not sent to boundaries")]
    BoundaryNotPreserved { page: usize, q: usize },
    #[error("page {page}: d∘d is nonzero starting at {at}")]
    DdNonzero { page: usize, at: Bidegree },
    #[error("page {page}: products of surviving classes leave the cycles in fiber degree {q}")]
    NotMultiplicative { page: usize, q: usize },
}

/// One cell of a page: cycles ⊇ boundaries inside the degree-q fiber space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    cycles: Subspace,
    boundaries: Subspace,
    reps: Vec<Vector>,
}

impl Cell {
    fn new(cycles: Subspace, boundaries: Subspace) -> Self {
        let reps = complement_in(cycles.ambient_dim(), cycles.basis(), &boundaries)
            .iter()
            .map(|v| boundaries.reduce(v))
            .collect();
        Cell {
            cycles,
            boundaries,
            reps,
        }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn cycles(&self) -> &Subspace {
        &self.cycles
    }

    pub fn boundaries(&self) -> &Subspace {
        &self.boundaries
    }

    /// Representatives of a basis of the cell, in fiber monomial coordinates.
    pub fn reps(&self) -> &[Vector] {
        &self.reps
    }

    /// Coordinates of the class of a cycle `v` in the basis `reps`.
    pub fn class_coords(&self, v: &[Rational]) -> Option<Vector> {
        solve_in_span(&self.reps, &self.boundaries.reduce(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Page {
    sig: SpaceSignature,
    index: usize,
    window: usize,
    cells: BTreeMap<Bidegree, Cell>,
}

pub fn build_e2(sig: SpaceSignature, window: usize) -> Result<Page, EngineError> {
    let minimum = sig.default_window();
    if window < minimum || !window.is_multiple_of(2) {
        return Err(EngineError::BadWindow { window, minimum });
    }
    let mut cells = BTreeMap::new();
    for p in (0..=window).step_by(2) {
        for q in sig.fiber_degrees() {
            let dim = sig.dim(q);
            cells.insert(
                Bidegree::new(p, q),
                Cell::new(Subspace::full(dim), Subspace::zero(dim)),
            );
        }
    }
    Ok(Page {
        sig,
        index: 2,
        window,
        cells,
    })
}

impl Page {
    pub fn sig(&self) -> &SpaceSignature {
        &self.sig
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Largest column whose entries are exact on every page.
    pub fn certified_band(&self) -> usize {
        self.window - (self.sig.top() + 1)
    }

    pub fn cell(&self, at: Bidegree) -> Option<&Cell> {
        self.cells.get(&at)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Bidegree, &Cell)> {
        self.cells.iter()
    }

    pub fn dim(&self, at: Bidegree) -> usize {
        self.cells.get(&at).map_or(0, Cell::dim)
    }

    /// The column-0 cycles of fiber degree q, which are the classes of E_r^{0,q}.
    pub fn column_cycles(&self, q: usize) -> Option<&Subspace> {
        self.cells.get(&Bidegree::new(0, q)).map(Cell::cycles)
    }

    /// Boundaries at a column past every earlier page's reach.
    fn saturated_boundaries(&self, q: usize) -> Option<&Subspace> {
        let p = self.index.min(self.window) & !1;
        self.cells.get(&Bidegree::new(p, q)).map(Cell::boundaries)
    }

    /// Span of products of positive-degree column-0 survivors in degree q.
    pub fn decomposables(&self, q: usize) -> Subspace {
        let dim = self.sig.dim(q);
        let mut products = Vec::new();
        for q1 in self.sig.fiber_degrees() {
            if q1 == 0 || q1 >= q {
                continue;
            }
            let q2 = q - q1;
            let (Some(z1), Some(z2)) = (self.column_cycles(q1), self.column_cycles(q2)) else {
                continue;
            };
            if q2 == 0 {
                continue;
            }
            for u in z1.basis() {
                for v in z2.basis() {
                    let w = multiply_local(&self.sig, q1, u, q2, v);
                    if !is_zero_vector(&w) {
                        products.push(w);
                    }
                }
            }
        }
        Subspace::span(dim, &products)
    }

    /// Column-0 classes that are not products of positive-degree survivors,
    /// as a canonical basis per fiber degree.
    pub fn indecomposables(&self) -> Vec<(usize, Vector)> {
        let mut out = Vec::new();
        for q in self.sig.fiber_degrees() {
            if q == 0 {
                continue;
            }
            let z = self.column_cycles(q).expect("column 0 present");
            let dec = self.decomposables(q);
            for v in complement_in(z.ambient_dim(), z.basis(), &dec) {
                out.push((q, dec.reduce(&v)));
            }
        }
        out
    }

    /// Alternating sum of dimensions over total degrees inside the band
    /// p ≤ certified_band and p + q ≤ limit.
    pub fn euler_characteristic(&self, limit: usize) -> i64 {
        let band = self.certified_band();
        self.cells
            .iter()
            .filter(|(b, _)| b.p <= band && b.total() <= limit)
            .map(|(b, c)| {
                let d = c.dim() as i64;
                if b.total() % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .sum()
    }

    /// Total dimension per total degree over the certified band.
    pub fn total_dims(&self) -> BTreeMap<usize, usize> {
        let band = self.certified_band();
        let mut out = BTreeMap::new();
        for (b, c) in &self.cells {
            if b.p <= band && c.dim() > 0 {
                *out.entry(b.total()).or_insert(0) += c.dim();
            }
        }
        out
    }

    /// Nonzero cells inside the certified band.
    pub fn support(&self) -> Vec<(Bidegree, usize)> {
        let band = self.certified_band();
        self.cells
            .iter()
            .filter(|(b, c)| b.p <= band && c.dim() > 0)
            .map(|(b, c)| (*b, c.dim()))
            .collect()
    }

    /// Fiber degree the differential d_r sends q to, if any.
    fn target_degree(&self, q: usize) -> Option<usize> {
        let tq = (q + 1).checked_sub(self.index)?;
        (self.sig.dim(tq) > 0).then_some(tq)
    }
}

/// A prescribed value δ(source) = target on column-0 classes; the t-power of
/// the target is implied by the page.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub source: FiberElement,
    pub target: FiberElement,
}

/// The derivation δ on column-0 cycles, stored as values on a basis per degree.
#[derive(Clone, Debug)]
struct FiberDerivation {
    page: usize,
    by_degree: BTreeMap<usize, (Vec<Vector>, Vec<Vector>)>,
    target_dims: BTreeMap<usize, usize>,
}

impl FiberDerivation {
    /// δ(v) for v a column-0 cycle of degree q; an empty vector when the
    /// target degree is not a fiber degree.
    fn eval(&self, q: usize, v: &[Rational]) -> Vector {
        let len = self.target_dims.get(&q).copied().unwrap_or(0);
        let (basis, values) = &self.by_degree[&q];
        if len == 0 {
            return Vec::new();
        }
        let coeffs = solve_in_span(basis, v).expect("argument is a column-0 cycle");
        combine(len, &coeffs, values)
    }

    fn target_degree(&self, q: usize) -> Option<usize> {
        let len = self.target_dims.get(&q).copied().unwrap_or(0);
        (len > 0).then(|| q + 1 - self.page)
    }
}

/// Matrices of d_r between page bases, keyed by source bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialMatrixSet {
    page_index: usize,
    maps: BTreeMap<Bidegree, Matrix>,
}

impl DifferentialMatrixSet {
    pub fn zero(page_index: usize) -> Self {
        DifferentialMatrixSet {
            page_index,
            maps: BTreeMap::new(),
        }
    }

    pub fn page_index(&self) -> usize {
        self.page_index
    }

    pub fn target_of(&self, at: Bidegree) -> Option<Bidegree> {
        let q = (at.q + 1).checked_sub(self.page_index)?;
        Some(Bidegree::new(at.p + self.page_index, q))
    }

    pub fn map(&self, at: Bidegree) -> Option<&Matrix> {
        self.maps.get(&at)
    }

    pub fn maps(&self) -> impl Iterator<Item = (&Bidegree, &Matrix)> {
        self.maps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.maps.values().all(Matrix::is_zero)
    }

    /// Whether some component lands in the bottom row q = 0.
    pub fn hits_bottom_row(&self) -> bool {
        self.maps
            .iter()
            .any(|(b, m)| b.q + 1 == self.page_index && !m.is_zero())
    }
}

fn element_text(e: &FiberElement) -> String {
    let mut s = String::new();
    for (u, c) in e.terms() {
        if !s.is_empty() {
            s.push('+');
        }
        s.push_str(&format!("{}*{}", crate::exact_linalg::format_rational(c), u));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn assemble_differential(
    page: &Page,
    assignments: &[Assignment],
) -> Result<DifferentialMatrixSet, EngineError> {
    let r = page.index;
    let sig = page.sig;
    if r % 2 == 1 {
        if !assignments.is_empty() {
            return Err(EngineError::OddPage { page: r });
        }
        return Ok(DifferentialMatrixSet::zero(r));
    }
    let degrees = sig.fiber_degrees();
    let mut target_dims = BTreeMap::new();
    for &q in &degrees {
        target_dims.insert(q, page.target_degree(q).map_or(0, |tq| sig.dim(tq)));
    }

    // Validate assignments and group them by source degree.
    let mut sources: BTreeMap<usize, Vec<(Vector, Vector)>> = BTreeMap::new();
    let mut source_span: BTreeMap<usize, Subspace> = BTreeMap::new();
    for a in assignments {
        let source_text = element_text(&a.source);
        let q = match (a.source.is_zero(), a.source.degree(&sig)) {
            (false, Some(q)) if q > 0 => q,
            _ => return Err(EngineError::BadSource { page: r, source_text }),
        };
        let sv = a.source.to_local(&sig, q).expect("degree checked");
        if !page.column_cycles(q).expect("column 0").contains(&sv) {
            return Err(EngineError::SourceNotSurviving { page: r, source_text });
        }
        let span = source_span
            .entry(q)
            .or_insert_with(|| page.decomposables(q));
        if span.contains(&sv) {
            return Err(EngineError::SourceNotIndecomposable { page: r, source_text });
        }
        *span = span.with(std::slice::from_ref(&sv));
        let Some(tq) = page.target_degree(q) else {
            return Err(EngineError::EmptyTarget {
                page: r,
                source_text,
                p: r,
                q: q as isize + 1 - r as isize,
            });
        };
        let target_cell = page.cell(Bidegree::new(r, tq)).expect("column r present");
        if target_cell.dim() == 0 {
            return Err(EngineError::EmptyTarget {
                page: r,
                source_text,
                p: r,
                q: tq as isize,
            });
        }
        let target = element_text(&a.target);
        if a.target.is_zero() {
            return Err(EngineError::TargetVanishes { page: r, target });
        }
        let tv = match a.target.degree(&sig) {
            Some(d) if d == tq => a.target.to_local(&sig, tq).expect("degree checked"),
            _ => return Err(EngineError::TargetDegree { page: r, target, expected: tq }),
        };
        if !target_cell.cycles().contains(&tv) {
            return Err(EngineError::TargetNotClass { page: r, target });
        }
        if target_cell.boundaries().contains(&tv) {
            return Err(EngineError::TargetVanishes { page: r, target });
        }
        sources.entry(q).or_default().push((sv, tv));
    }

    let indecomposables = page.indecomposables();
    let mut delta = FiberDerivation {
        page: r,
        by_degree: BTreeMap::new(),
        target_dims: target_dims.clone(),
    };
    delta
        .by_degree
        .insert(0, (vec![vec![rat(1)]], vec![zero_vector(target_dims[&0])]));

    for &q in degrees.iter().filter(|&&q| q > 0) {
        let tdim = target_dims[&q];
        let tq = delta.target_degree(q);
        let z = page.column_cycles(q).expect("column 0");
        let mut spanning: Vec<(Vector, Vector)> = Vec::new();
        for &q1 in &degrees {
            if q1 == 0 || q1 >= q {
                continue;
            }
            let q2 = q - q1;
            if q2 == 0 || sig.dim(q2) == 0 {
                continue;
            }
            let z1 = page.column_cycles(q1).expect("column 0");
            let z2 = page.column_cycles(q2).expect("column 0");
            for u in z1.basis() {
                let du = delta.eval(q1, u);
                for v in z2.basis() {
                    let w = multiply_local(&sig, q1, u, q2, v);
                    if is_zero_vector(&w) {
                        continue;
                    }
                    if !z.contains(&w) {
                        return Err(EngineError::NotMultiplicative { page: r, q });
                    }
                    let mut value = zero_vector(tdim);
                    if let (Some(tq), Some(tq1)) = (tq, delta.target_degree(q1)) {
                        let term = multiply_local(&sig, tq1, &du, q2, v);
                        debug_assert_eq!(tq1 + q2, tq);
                        add_scaled(&mut value, &rat(1), &term);
                    }
                    if let (Some(_), Some(tq2)) = (tq, delta.target_degree(q2)) {
                        let dv = delta.eval(q2, v);
                        let term = multiply_local(&sig, q1, u, tq2, &dv);
                        let sign = if q1 % 2 == 0 { rat(1) } else { rat(-1) };
                        add_scaled(&mut value, &sign, &term);
                    }
                    spanning.push((w, value));
                }
            }
        }
        if let Some(list) = sources.get(&q) {
            spanning.extend(list.iter().cloned());
        }

        let mut basis: Vec<Vector> = Vec::new();
        let mut values: Vec<Vector> = Vec::new();
        let mut spanned = Subspace::zero(z.ambient_dim());
        let mut dependent = Vec::new();
        for (v, val) in spanning {
            if spanned.contains(&v) {
                dependent.push((v, val));
            } else {
                spanned = spanned.with(std::slice::from_ref(&v));
                basis.push(v);
                values.push(val);
            }
        }
        // Unassigned indecomposables, then anything left, are sent to zero.
        let completers = indecomposables
            .iter()
            .filter(|(iq, _)| *iq == q)
            .map(|(_, v)| v)
            .chain(z.basis());
        for v in completers {
            if !spanned.contains(v) {
                spanned = spanned.with(std::slice::from_ref(v));
                basis.push(v.clone());
                values.push(zero_vector(tdim));
            }
        }
        debug_assert_eq!(basis.len(), z.dim());
        if let Some(tq) = tq {
            let bsat = page.saturated_boundaries(tq).expect("target cell");
            let zt = page.column_cycles(tq).expect("target cycles");
            for val in &values {
                if !zt.contains(val) {
                    return Err(EngineError::NotMultiplicative { page: r, q: tq });
                }
            }
            for (v, val) in &dependent {
                let coeffs = solve_in_span(&basis, v).expect("dependent on basis");
                let predicted = combine(tdim, &coeffs, &values);
                let diff: Vector = val.iter().zip(&predicted).map(|(a, b)| a - b).collect();
                if !bsat.contains(&diff) {
                    return Err(EngineError::DerivationInconsistent { page: r, q });
                }
            }
        }
        delta.by_degree.insert(q, (basis, values));
    }

    // Products that vanish in the fiber algebra must have vanishing δ.
    for &q1 in degrees.iter().filter(|&&q| q > 0) {
        for &q2 in degrees.iter().filter(|&&q| q > 0) {
            let q = q1 + q2;
            let Some(tq) = (q + 1).checked_sub(r).filter(|&tq| sig.dim(tq) > 0) else {
                continue;
            };
            let bsat = page.saturated_boundaries(tq).expect("cell");
            let z1 = page.column_cycles(q1).expect("column 0");
            let z2 = page.column_cycles(q2).expect("column 0");
            for u in z1.basis() {
                for v in z2.basis() {
                    if sig.dim(q) > 0 && !is_zero_vector(&multiply_local(&sig, q1, u, q2, v)) {
                        continue;
                    }
                    let mut value = zero_vector(sig.dim(tq));
                    if let Some(tq1) = delta.target_degree(q1) {
                        let term = multiply_local(&sig, tq1, &delta.eval(q1, u), q2, v);
                        add_scaled(&mut value, &rat(1), &term);
                    }
                    if let Some(tq2) = delta.target_degree(q2) {
                        let term = multiply_local(&sig, q1, u, tq2, &delta.eval(q2, v));
                        let sign = if q1 % 2 == 0 { rat(1) } else { rat(-1) };
                        add_scaled(&mut value, &sign, &term);
                    }
                    if !bsat.contains(&value) {
                        return Err(EngineError::DerivationInconsistent { page: r, q });
                    }
                }
            }
        }
    }

    // Boundaries must go to boundaries, and δ∘δ must vanish modulo them.
    for &q in &degrees {
        let Some(tq) = delta.target_degree(q) else {
            continue;
        };
        let bsat_src = page.saturated_boundaries(q).expect("cell");
        let bsat_tgt = page.saturated_boundaries(tq).expect("cell");
        for b in bsat_src.basis() {
            if !bsat_tgt.contains(&delta.eval(q, b)) {
                return Err(EngineError::BoundaryNotPreserved { page: r, q });
            }
        }
        if let Some(ttq) = delta.target_degree(tq) {
            let bsat_tt = page.saturated_boundaries(ttq).expect("cell");
            let z = page.column_cycles(q).expect("column 0");
            for v in z.basis() {
                let dd = delta.eval(tq, &delta.eval(q, v));
                if !bsat_tt.contains(&dd) {
                    return Err(EngineError::DdNonzero {
                        page: r,
                        at: Bidegree::new(0, q),
                    });
                }
            }
        }
    }

    let mut maps = BTreeMap::new();
    for (&at, cell) in &page.cells {
        if cell.dim() == 0 {
            continue;
        }
        let Some(tq) = delta.target_degree(at.q) else {
            continue;
        };
        let to = Bidegree::new(at.p + r, tq);
        let Some(target) = page.cells.get(&to) else {
            continue;
        };
        if target.dim() == 0 {
            continue;
        }
        let mut columns = Vec::with_capacity(cell.dim());
        for rep in cell.reps() {
            let image = delta.eval(at.q, rep);
            let coords = target
                .class_coords(&image)
                .ok_or(EngineError::NotMultiplicative { page: r, q: tq })?;
            columns.push(coords);
        }
        maps.insert(at, Matrix::from_columns(target.dim(), &columns));
    }
    let set = DifferentialMatrixSet {
        page_index: r,
        maps,
    };
    for (&at, m) in &set.maps {
        let mid = set.target_of(at).expect("target exists");
        if let Some(next) = set.maps.get(&mid) {
            if !next.mul(m).is_zero() {
                return Err(EngineError::DdNonzero { page: r, at });
            }
        }
    }
    Ok(set)
}

pub fn turn_page(page: &Page, d: &DifferentialMatrixSet) -> Page {
    assert_eq!(page.index, d.page_index, "differential belongs to another page");
    let r = page.index;
    let mut cells = BTreeMap::new();
    for (&at, cell) in &page.cells {
        let mut cycles = cell.cycles.clone();
        if let Some(m) = d.maps.get(&at) {
            let kernel: Vec<Vector> = kernel_basis(m)
                .iter()
                .map(|k| combine(cell.cycles.ambient_dim(), k, &cell.reps))
                .collect();
            cycles = cell.boundaries.with(&kernel);
        }
        let mut boundaries = cell.boundaries.clone();
        if at.p >= r {
            let from = Bidegree::new(at.p - r, at.q + r - 1);
            if let Some(m) = d.maps.get(&from) {
                let images: Vec<Vector> = (0..m.cols())
                    .map(|j| combine(cell.cycles.ambient_dim(), &m.column(j), &cell.reps))
                    .collect();
                boundaries = boundaries.with(&images);
            }
        }
        cells.insert(at, Cell::new(cycles, boundaries));
    }
    Page {
        sig: page.sig,
        index: r + 1,
        window: page.window,
        cells,
    }
}

/// Assemble d_r from the assignments and pass to the next page.
pub fn step(
    page: &Page,
    assignments: &[Assignment],
) -> Result<(DifferentialMatrixSet, Page), EngineError> {
    let d = assemble_differential(page, assignments)?;
    let next = if d.maps.is_empty() {
        let mut same = page.clone();
        same.index += 1;
        same
    } else {
        turn_page(page, &d)
    };
    Ok((d, next))
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub page: Page,
    pub differentials: DifferentialMatrixSet,
}

#[derive(Clone, Debug)]
pub struct Run {
    pub stable: Page,
    pub history: Vec<Stage>,
}

/// Run pages 2 ..= n+m+l+1 with the given events `(page, assignment)`.
pub fn run_to_infinity(
    sig: SpaceSignature,
    window: usize,
    events: &[(usize, Assignment)],
) -> Result<Run, EngineError> {
    let last = sig.top() + 1;
    let mut by_page: BTreeMap<usize, Vec<Assignment>> = BTreeMap::new();
    for (r, a) in events {
        if *r < 2 || *r > last {
            return Err(EngineError::PageOutOfRange { page: *r, last });
        }
        if r % 2 == 1 {
            return Err(EngineError::OddPage { page: *r });
        }
        by_page.entry(*r).or_default().push(a.clone());
    }
    let mut page = build_e2(sig, window)?;
    let mut history = Vec::new();
    while page.index <= last {
        let assignments = by_page.remove(&page.index).unwrap_or_default();
        let (d, next) = step(&page, &assignments)?;
        history.push(Stage {
            page,
            differentials: d,
        });
        page = next;
    }
    Ok(Run {
        stable: page,
        history,
    })
}

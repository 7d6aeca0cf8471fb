//! Differential schedules: text encoding, admissible pages, freeness, and
//! exhaustive enumeration.
//!
//! Text grammar, one event per `;`-separated item:
//!
//! ```text
//! schedule := "" | event (";" event)*
//! event    := "r=" int ":" expr "->" expr
//! expr     := sign? term (sign term)*
//! term     := (coeff "*")? mono
//! coeff    := int | int "/" int
//! mono     := "1" | a | b | c | ab | ac | bc | abc
//! ```
//!
//! Spaces around tokens are ignored. Monomial letters must be in the order
//! a < b < c. `r=4:a->1` reads d_4(1 ⊗ a) = t² ⊗ 1.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_linalg::{format_rational, Rational, Vector};
use crate::fiber_algebra::{
    mono_degree, FiberElement, FiberMonomial, Generator, SpaceSignature,
};
use crate::page_engine::{build_e2, run_to_infinity, step, Assignment, Bidegree, EngineError, Page, Run};
use crate::presentation::BettiTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("event `{0}` must look like r=<page>:<source>-><target>")]
    Shape(String),
    #[error("bad page number in `{0}`")]
    Page(String),
    #[error("bad term `{0}`")]
    Term(String),
    #[error("monomial `{0}` is not written in the order a < b < c")]
    Order(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScheduleEvent {
    pub page: usize,
    pub source: FiberElement,
    pub target: FiberElement,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Schedule {
    events: Vec<ScheduleEvent>,
}

impl Schedule {
    pub fn new(mut events: Vec<ScheduleEvent>) -> Self {
        events.sort_by_key(|e| e.page);
        Schedule { events }
    }

    pub fn empty() -> Self {
        Schedule::default()
    }

    pub fn events(&self) -> &[ScheduleEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn assignments(&self) -> Vec<(usize, Assignment)> {
        self.events
            .iter()
            .map(|e| {
                (
                    e.page,
                    Assignment {
                        source: e.source.clone(),
                        target: e.target.clone(),
                    },
                )
            })
            .collect()
    }

    pub fn run(&self, sig: SpaceSignature, window: usize) -> Result<Run, EngineError> {
        run_to_infinity(sig, window, &self.assignments())
    }

    /// The same schedule with event `index`'s target multiplied by `factor`.
    pub fn rescaled(&self, index: usize, factor: &Rational) -> Schedule {
        let mut events = self.events.clone();
        events[index].target = events[index].target.scaled(factor);
        Schedule { events }
    }

    /// The same schedule with every target on `page` multiplied by `factor`.
    pub fn rescaled_page(&self, page: usize, factor: &Rational) -> Schedule {
        let mut events = self.events.clone();
        for e in events.iter_mut().filter(|e| e.page == page) {
            e.target = e.target.scaled(factor);
        }
        Schedule { events }
    }
}

pub fn format_element(e: &FiberElement) -> String {
    let mut out = String::new();
    for (i, (mono, c)) in e.terms().enumerate() {
        let negative = c.is_negative();
        if negative {
            out.push('-');
        } else if i > 0 {
            out.push('+');
        }
        let magnitude = c.abs();
        if !magnitude.is_one() {
            out.push_str(&format_rational(&magnitude));
            out.push('*');
        }
        out.push_str(&mono.name());
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for ScheduleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={}:{}->{}",
            self.page,
            format_element(&self.source),
            format_element(&self.target)
        )
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.events.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(";"))
    }
}

fn parse_coeff(text: &str) -> Option<Rational> {
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(num) || !all_digits(den) {
        return None;
    }
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num.parse().ok()?, den))
}

fn parse_mono(text: &str) -> Result<FiberMonomial, ParseError> {
    let text = text.trim();
    let mono: FiberMonomial = text.parse().map_err(|_| ParseError::Term(text.to_string()))?;
    if mono.name() != text {
        return Err(ParseError::Order(text.to_string()));
    }
    Ok(mono)
}

pub fn parse_element(text: &str) -> Result<FiberElement, ParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseError::Term(text.to_string()));
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut sign: Option<bool> = None;
    let mut current = String::new();
    for ch in text.chars() {
        if ch == '+' || ch == '-' {
            if current.trim().is_empty() {
                if sign.is_some() || !terms.is_empty() {
                    return Err(ParseError::Term(text.to_string()));
                }
            } else {
                terms.push((sign == Some(true), std::mem::take(&mut current)));
            }
            sign = Some(ch == '-');
        } else {
            current.push(ch);
        }
    }
    if current.trim().is_empty() {
        return Err(ParseError::Term(text.to_string()));
    }
    terms.push((sign == Some(true), current));
    let mut out = FiberElement::zero();
    for (negative, term) in terms {
        let (coeff, mono) = match term.split_once('*') {
            Some((c, m)) => (
                parse_coeff(c).ok_or_else(|| ParseError::Term(term.trim().to_string()))?,
                parse_mono(m)?,
            ),
            None => (Rational::one(), parse_mono(&term)?),
        };
        let coeff = if negative { -coeff } else { coeff };
        out.add_term(coeff, mono);
    }
    Ok(out)
}

impl FromStr for ScheduleEvent {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let item = s.trim();
        let rest = item
            .strip_prefix("r=")
            .ok_or_else(|| ParseError::Shape(item.to_string()))?;
        let (page, body) = rest
            .split_once(':')
            .ok_or_else(|| ParseError::Shape(item.to_string()))?;
        let page: usize = page
            .trim()
            .parse()
            .map_err(|_| ParseError::Page(item.to_string()))?;
        let (source, target) = body
            .split_once("->")
            .ok_or_else(|| ParseError::Shape(item.to_string()))?;
        Ok(ScheduleEvent {
            page,
            source: parse_element(source)?,
            target: parse_element(target)?,
        })
    }
}

impl FromStr for Schedule {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Schedule::empty());
        }
        let events = s
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<ScheduleEvent>, _>>()?;
        Ok(Schedule::new(events))
    }
}

/// A page on which a generator may transgress, and the monomial it hits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdmissiblePage {
    pub page: usize,
    pub target: FiberMonomial,
}

/// Pages r ≥ 2 with d_r(g) = t^(r/2) ⊗ u for a monomial u in the earlier
/// generators; r = deg g − deg u + 1 must be even because columns are even.
pub fn admissible_pages(sig: &SpaceSignature, generator: Generator) -> Vec<AdmissiblePage> {
    let dg = sig.generator_degree(generator);
    let mut out: Vec<AdmissiblePage> = FiberMonomial::all()
        .filter(|u| u.generators().all(|h| h < generator))
        .filter_map(|u| {
            let du = mono_degree(sig, u);
            let page = (dg + 1).checked_sub(du)?;
            (page >= 2 && page % 2 == 0).then_some(AdmissiblePage { page, target: u })
        })
        .collect();
    out.sort();
    out
}

/// The same pages written out as explicit parity rules.
pub fn listed_admissible_pages(sig: &SpaceSignature, generator: Generator) -> Vec<AdmissiblePage> {
    let (n, m, l) = (sig.n as isize, sig.m as isize, sig.l as isize);
    let odd = |x: isize| x.rem_euclid(2) == 1;
    let rules: Vec<(isize, isize, &str)> = match generator {
        Generator::A => vec![(n, n + 1, "1")],
        Generator::B => vec![(m - n, m - n + 1, "a"), (m, m + 1, "1")],
        Generator::C => vec![
            (l - m - n, l - m - n + 1, "ab"),
            (l - m, l - m + 1, "b"),
            (l - n, l - n + 1, "a"),
            (l, l + 1, "1"),
        ],
    };
    let mut out: Vec<AdmissiblePage> = rules
        .into_iter()
        .filter(|&(shift, page, _)| odd(shift) && page >= 2)
        .map(|(_, page, target)| AdmissiblePage {
            page: page as usize,
            target: target.parse().expect("valid monomial"),
        })
        .collect();
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessVerdict {
    pub free_consistent: bool,
    pub top_nonzero_total_degree: Option<usize>,
    pub witness: Option<Bidegree>,
}

/// Within the certified band, every cell of total degree ≥ n+m+l must vanish.
pub fn check_freeness(stable: &Page) -> FreenessVerdict {
    let top = stable.sig().top();
    let support = stable.support();
    let top_nonzero_total_degree = support.iter().map(|(b, _)| b.total()).max();
    let offending = |b: &Bidegree| b.total() >= top;
    let witness = support
        .iter()
        .map(|(b, _)| *b)
        .filter(|b| b.q == 0 && offending(b))
        .min_by_key(|b| b.p)
        .or_else(|| {
            support
                .iter()
                .map(|(b, _)| *b)
                .filter(offending)
                .min_by_key(|b| (b.total(), b.p))
        });
    FreenessVerdict {
        free_consistent: witness.is_none(),
        top_nonzero_total_degree,
        witness,
    }
}

#[derive(Clone, Debug)]
pub struct EnumeratedSchedule {
    pub schedule: Schedule,
    pub verdict: FreenessVerdict,
    pub betti: BettiTable,
    pub stable: Page,
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub results: Vec<EnumeratedSchedule>,
    /// Branches whose assignments do not extend to a differential.
    pub inconsistent: usize,
    /// Complete branches whose stable page fails the freeness filter.
    pub not_free: usize,
    /// True when no page ever offered a nonzero target.
    pub no_admissible_pattern: bool,
}

impl Enumeration {
    pub fn rejected(&self) -> usize {
        self.inconsistent + self.not_free
    }
}

/// Nonzero target choices in a cell of dimension `dim`: every {0, 1, -1}
/// combination of the basis whose first nonzero coefficient is 1.
fn coefficient_patterns(dim: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let mut pattern = Vec::with_capacity(dim);
        for _ in 0..dim {
            pattern.push(match c % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            });
            c /= 3;
        }
        if pattern.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(pattern);
        }
    }
    // basis vectors first, then by number of nonzero entries
    out.sort_by_key(|p| (p.iter().filter(|&&x| x != 0).count(), p.iter().map(|&x| -x).collect::<Vec<_>>()));
    out
}

struct Search {
    last: usize,
    seen: HashSet<Page>,
    out: Enumeration,
    any_option: bool,
}

impl Search {
    fn explore(&mut self, page: Page, events: Vec<ScheduleEvent>) {
        if page.index() > self.last {
            let verdict = check_freeness(&page);
            if verdict.free_consistent {
                self.out.results.push(EnumeratedSchedule {
                    schedule: Schedule::new(events),
                    verdict,
                    betti: BettiTable::from_page(&page),
                    stable: page,
                });
            } else {
                self.out.not_free += 1;
            }
            return;
        }
        if !self.seen.insert(page.clone()) {
            return;
        }
        let r = page.index();
        let sig = *page.sig();
        if r % 2 == 1 {
            let (_, next) = step(&page, &[]).expect("odd pages are identity steps");
            self.explore(next, events);
            return;
        }
        let mut options: Vec<Vec<Option<(FiberElement, FiberElement)>>> = Vec::new();
        for (q, v) in page.indecomposables() {
            let mut choices = vec![None];
            if let Some(tq) = (q + 1).checked_sub(r) {
                if let Some(cell) = page.cell(Bidegree::new(r, tq)).filter(|c| c.dim() > 0) {
                    let source = FiberElement::from_local(&sig, q, &v);
                    for pattern in coefficient_patterns(cell.dim()) {
                        let mut target: Vector = vec![Rational::zero(); cell.cycles().ambient_dim()];
                        for (c, rep) in pattern.iter().zip(cell.reps()) {
                            crate::exact_linalg::add_scaled(&mut target, &crate::exact_linalg::rat(*c), rep);
                        }
                        choices.push(Some((source.clone(), FiberElement::from_local(&sig, tq, &target))));
                    }
                }
            }
            if choices.len() > 1 {
                self.any_option = true;
            }
            options.push(choices);
        }
        let mut index = vec![0usize; options.len()];
        loop {
            let mut assignments = Vec::new();
            let mut new_events = events.clone();
            for (choice, opts) in index.iter().zip(&options) {
                if let Some((source, target)) = &opts[*choice] {
                    assignments.push(Assignment {
                        source: source.clone(),
                        target: target.clone(),
                    });
                    new_events.push(ScheduleEvent {
                        page: r,
                        source: source.clone(),
                        target: target.clone(),
                    });
                }
            }
            match step(&page, &assignments) {
                Ok((_, next)) => self.explore(next, new_events),
                Err(_) => self.out.inconsistent += 1,
            }
            // advance the mixed-radix counter
            let mut k = 0;
            loop {
                if k == index.len() {
                    return;
                }
                index[k] += 1;
                if index[k] < options[k].len() {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
        }
    }
}

/// Depth-first search over all pages up to n+m+l+1, branching each surviving
/// indecomposable on zero or a canonical target. Branches reaching an
/// identical page are explored once.
pub fn enumerate_schedules(sig: SpaceSignature, window: usize) -> Result<Enumeration, EngineError> {
    let start = build_e2(sig, window)?;
    let mut search = Search {
        last: sig.top() + 1,
        seen: HashSet::new(),
        out: Enumeration::default(),
        any_option: false,
    };
    search.explore(start, Vec::new());
    let mut out = search.out;
    out.no_admissible_pattern = !search.any_option;
    out.results.sort_by_key(|r| r.schedule.to_string());
    Ok(out)
}

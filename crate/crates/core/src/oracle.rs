//! Closed-form Betti tables for cross-checking the engine: the Künneth
//! product for a single transgression of `a`, and the piecewise case tables
//! of the three classification theorems, transcribed exactly as printed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiber_algebra::SpaceSignature;
use crate::presentation::BettiTable;

/// Coefficients by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincarePolynomial {
    coefficients: Vec<u64>,
}

impl PoincarePolynomial {
    pub fn new(mut coefficients: Vec<u64>) -> Self {
        while coefficients.last() == Some(&0) {
            coefficients.pop();
        }
        PoincarePolynomial { coefficients }
    }

    /// Sum of monomials x^k for the given exponents.
    pub fn from_exponents(exponents: impl IntoIterator<Item = usize>) -> Self {
        let mut coefficients = Vec::new();
        for k in exponents {
            if coefficients.len() <= k {
                coefficients.resize(k + 1, 0);
            }
            coefficients[k] += 1;
        }
        PoincarePolynomial::new(coefficients)
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn mul(&self, other: &PoincarePolynomial) -> PoincarePolynomial {
        if self.coefficients.is_empty() || other.coefficients.is_empty() {
            return PoincarePolynomial::default();
        }
        let mut out = vec![0u64; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PoincarePolynomial::new(out)
    }

    pub fn to_betti(&self) -> BettiTable {
        BettiTable::new(self.coefficients.iter().enumerate().map(|(k, &c)| (k, c as usize)))
    }

    pub fn from_betti(table: &BettiTable) -> Self {
        let top = table.top_degree().map_or(0, |t| t + 1);
        PoincarePolynomial::new((0..top).map(|k| table.get(k) as u64).collect())
    }
}

impl fmt::Display for PoincarePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| {
                let mono = match k {
                    0 => "1".to_string(),
                    1 => "x".to_string(),
                    _ => format!("x^{k}"),
                };
                if c == 1 || k == 0 && c == 1 {
                    mono
                } else if k == 0 {
                    c.to_string()
                } else {
                    format!("{c}{mono}")
                }
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join("+"))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("Künneth product needs n odd, got n={0}")]
    EvenFirstSphere(usize),
    #[error("case {label} does not apply to {sig}")]
    NotApplicable { label: String, sig: String },
    #[error("unknown case label {0:?}")]
    UnknownLabel(String),
    #[error("annotation line {line}: {reason}")]
    Annotation { line: usize, reason: String },
}

/// (1 + x² + … + x^{n−1})(1 + x^m)(1 + x^l).
pub fn kunneth_product(sig: &SpaceSignature) -> Result<PoincarePolynomial, OracleError> {
    if sig.n.is_multiple_of(2) {
        return Err(OracleError::EvenFirstSphere(sig.n));
    }
    let projective = PoincarePolynomial::from_exponents((0..sig.n).step_by(2));
    let sphere = |d: usize| PoincarePolynomial::from_exponents([0, d]);
    Ok(projective.mul(&sphere(sig.m)).mul(&sphere(sig.l)))
}

/// Which generator the theorem assumes transgresses first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// d(a) ≠ 0.
    Da,
    /// d(a) = 0, d(b) ≠ 0.
    Db,
    /// d(a) = d(b) = 0, d(c) ≠ 0.
    Dc,
}

impl TheoremId {
    pub fn code(self) -> &'static str {
        match self {
            TheoremId::Da => "da",
            TheoremId::Db => "db",
            TheoremId::Dc => "dc",
        }
    }
}

/// A possibility of one theorem, refined by the branch that realizes it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CaseLabel {
    pub theorem: TheoremId,
    pub case: u8,
    pub branch: String,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.theorem.code(), self.case, self.branch)
    }
}

impl FromStr for CaseLabel {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        CASES
            .iter()
            .map(|c| c.label())
            .find(|l| l.to_string() == s)
            .ok_or_else(|| OracleError::UnknownLabel(s.to_string()))
    }
}

type Sig = SpaceSignature;

/// A row of an E∞ description: Q^mult at (p, q) for every even p ≤ p_max.
struct Row {
    q: i64,
    p_max: i64,
    mult: usize,
}

fn rows(table: &[(i64, i64)]) -> Vec<Row> {
    table.iter().map(|&(q, p_max)| Row { q, p_max, mult: 1 }).collect()
}

enum Formula {
    /// Summed over anti-diagonals.
    Einf(fn(&Sig) -> Vec<Row>),
    /// An H^k display evaluated directly.
    Display(fn(&Sig, i64) -> usize),
}

struct CaseEntry {
    theorem: TheoremId,
    case: u8,
    branch: &'static str,
    applies: fn(&Sig) -> bool,
    formula: Formula,
    representative: fn(&Sig) -> String,
}

impl CaseEntry {
    fn label(&self) -> CaseLabel {
        CaseLabel {
            theorem: self.theorem,
            case: self.case,
            branch: self.branch.to_string(),
        }
    }
}

fn nml(s: &Sig) -> (i64, i64, i64) {
    (s.n as i64, s.m as i64, s.l as i64)
}

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

fn even(x: i64) -> bool {
    !odd(x)
}

/// Number of j in `js` with lo(j) ≤ k ≤ hi(j) and k − j even.
fn count_ranges(k: i64, ranges: &[(i64, i64, i64)]) -> usize {
    ranges
        .iter()
        .filter(|&&(j, lo, hi)| lo <= k && k <= hi && even(k - j))
        .count()
}

fn da_display_wide(s: &Sig, k: i64) -> usize {
    let (n, m, l) = nml(s);
    let js = [0, m, l, m + l];
    let ranges: Vec<(i64, i64, i64)> = js.iter().map(|&j| (j, j, n + j - 1)).collect();
    count_ranges(k, &ranges).min(1)
}

fn da_display_narrow(s: &Sig, k: i64) -> usize {
    let (n, m, l) = nml(s);
    let first = [0, m + l].iter().any(|&j| j <= k && k < n + j - 1 && even(k - j));
    let second = (m <= k && k < l && even(k - m)) || (m + n - 1 < k && k < n + l && even(k - l));
    let double = l <= k && k < m + n && even(k - m) && even(k - l);
    if double {
        2
    } else if first || second {
        1
    } else {
        0
    }
}

const CASES: &[CaseEntry] = &[
    CaseEntry {
        theorem: TheoremId::Da,
        case: 1,
        branch: "l>=m+n",
        applies: |s| {
            let (n, m, l) = nml(s);
            odd(n) && m < l && l >= m + n
        },
        formula: Formula::Display(da_display_wide),
        representative: |s| format!("r={}:a->1", s.n + 1),
    },
    CaseEntry {
        theorem: TheoremId::Da,
        case: 1,
        branch: "l<m+n",
        applies: |s| {
            let (n, m, l) = nml(s);
            odd(n) && m < l && l < m + n
        },
        formula: Formula::Display(da_display_narrow),
        representative: |s| format!("r={}:a->1", s.n + 1),
    },
    CaseEntry {
        theorem: TheoremId::Da,
        case: 1,
        branch: "einf",
        applies: |s| {
            let (n, m, l) = nml(s);
            odd(n) && m < l
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n - 1), (m, n - 1), (l, n - 1), (m + l, n - 1)])
        }),
        representative: |s| format!("r={}:a->1", s.n + 1),
    },
    CaseEntry {
        theorem: TheoremId::Db,
        case: 1,
        branch: "j'=0",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m < l && odd(m - n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m - 1), (l, n + m - 1), (n, m - n - 1), (n + l, m - n - 1)])
        }),
        representative: |s| format!("r={}:b->a;r={}:ab->1", s.m - s.n + 1, s.n + s.m + 1),
    },
    CaseEntry {
        theorem: TheoremId::Db,
        case: 2,
        branch: "main",
        applies: |s| {
            let (n, m, l) = nml(s);
            odd(m) && n <= m && m < l
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, m), (n, m), (l, m), (n + l, m)])
        }),
        representative: |s| format!("r={}:b->1", s.m + 1),
    },
    CaseEntry {
        theorem: TheoremId::Db,
        case: 3,
        branch: "j'=0",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m < l && odd(m - n) && odd(l)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(n, m - n - 1), (n + l, m - n - 1), (0, l - 1), (n + m, l - 1)])
        }),
        representative: |s| format!("r={}:b->a;r={}:c->1", s.m - s.n + 1, s.l + 1),
    },
    CaseEntry {
        theorem: TheoremId::Db,
        case: 3,
        branch: "j'=m+n",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && l > n + m && odd(m - n) && odd(l - m - n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m + l - 1), (n, m - n - 1), (n + l, m - n - 1), (n + m, l - m - n - 1)])
        }),
        representative: |s| {
            format!(
                "r={}:b->a;r={}:c->ab;r={}:abc->1",
                s.m - s.n + 1,
                s.l - s.m - s.n + 1,
                s.top() + 1
            )
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 1,
        branch: "j'=n+m,c0=c1=1",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && l > n + m && odd(l - m - n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m + l - 1), (n, m + l - n - 1), (m, n + l - m - 1), (n + m, l - m - n - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!(
                "r={}:c->ab;r={}:ac->b;r={}:bc->a;r={}:abc->1",
                l - m - n + 1,
                n + l - m + 1,
                m + l - n + 1,
                n + m + l + 1
            )
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 1,
        branch: "j'=m",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && l > n + m && odd(l - m - n) && even(n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, m + l - 1), (n, m + l - 1), (m, n + l - m - 1), (n + m, l - m - n - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!("r={}:c->ab;r={}:ac->b;r={}:bc->1", l - m - n + 1, n + l - m + 1, m + l + 1)
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 1,
        branch: "j'=n+m,c2=c3=1",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && l > n + m && odd(l - m - n) && odd(l)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m + l - 1), (n, l - 1), (m, l - 1), (n + m, l - m - n - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!(
                "r={}:c->ab;r={}:ac->a;r={}:bc->b;r={}:abc->1",
                l - m - n + 1,
                l + 1,
                l + 1,
                n + m + l + 1
            )
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 1,
        branch: "j'=n",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && l > n + m && odd(l - m - n) && even(m)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + l - 1), (m, n + l - 1), (n, m + l - n - 1), (n + m, l - m - n - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!("r={}:c->ab;r={}:bc->a;r={}:ac->1", l - m - n + 1, m + l - n + 1, n + l + 1)
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 2,
        branch: "j'=n",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m < l && odd(l - m) && even(n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m + l - 1), (n, m + l - n - 1), (m, l - m - 1), (n + m, l - m - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!("r={}:c->b;r={}:bc->a;r={}:abc->1", l - m + 1, m + l - n + 1, n + m + l + 1)
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 2,
        branch: "j'=0",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m < l && odd(l - m)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, m + l - 1), (n, m + l - 1), (m, l - m - 1), (n + m, l - m - 1)])
        }),
        representative: |s| format!("r={}:c->b;r={}:bc->1", s.l - s.m + 1, s.m + s.l + 1),
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 3,
        branch: "j'=m",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m <= l && odd(l - n) && even(m)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + m + l - 1), (n, l - n - 1), (n + m, l - n - 1), (m, n + l - m - 1)])
        }),
        representative: |s| {
            let (n, m, l) = (s.n, s.m, s.l);
            format!("r={}:c->a;r={}:ac->b;r={}:abc->1", l - n + 1, n + l - m + 1, n + m + l + 1)
        },
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 3,
        branch: "j'=0",
        applies: |s| {
            let (n, m, l) = nml(s);
            n < m && m <= l && odd(l - n)
        },
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, n + l - 1), (m, n + l - 1), (n, l - n - 1), (n + m, l - n - 1)])
        }),
        representative: |s| format!("r={}:c->a;r={}:ac->1", s.l - s.n + 1, s.n + s.l + 1),
    },
    CaseEntry {
        theorem: TheoremId::Dc,
        case: 4,
        branch: "main",
        applies: |s| odd(s.l as i64),
        formula: Formula::Einf(|s| {
            let (n, m, l) = nml(s);
            rows(&[(0, l - 1), (n, l - 1), (m, l - 1), (n + m, l - 1)])
        }),
        representative: |s| format!("r={}:c->1", s.l + 1),
    },
];

fn case_entry(label: &CaseLabel) -> Option<&'static CaseEntry> {
    CASES.iter().find(|c| c.theorem == label.theorem && c.case == label.case && c.branch == label.branch)
}

/// Every label the tables know, in registry order.
pub fn all_labels() -> Vec<CaseLabel> {
    CASES.iter().map(CaseEntry::label).collect()
}

pub fn applicable_labels(sig: &SpaceSignature) -> Vec<CaseLabel> {
    CASES.iter().filter(|c| (c.applies)(sig)).map(CaseEntry::label).collect()
}

pub fn is_applicable(label: &CaseLabel, sig: &SpaceSignature) -> bool {
    case_entry(label).is_some_and(|c| (c.applies)(sig))
}

/// The differentials named in the proof of the case, as schedule text.
pub fn representative_schedule(label: &CaseLabel, sig: &SpaceSignature) -> Result<String, OracleError> {
    let entry = applicable_entry(label, sig)?;
    Ok((entry.representative)(sig))
}

fn applicable_entry(label: &CaseLabel, sig: &SpaceSignature) -> Result<&'static CaseEntry, OracleError> {
    let entry = case_entry(label).ok_or_else(|| OracleError::UnknownLabel(label.to_string()))?;
    if !(entry.applies)(sig) {
        return Err(OracleError::NotApplicable {
            label: label.to_string(),
            sig: sig.to_string(),
        });
    }
    Ok(entry)
}

/// Evaluates the printed table of the case for the signature.
pub fn theorem_table(label: &CaseLabel, sig: &SpaceSignature) -> Result<BettiTable, OracleError> {
    let entry = applicable_entry(label, sig)?;
    let mut dims: BTreeMap<usize, usize> = BTreeMap::new();
    match &entry.formula {
        Formula::Einf(f) => {
            for row in f(sig) {
                let mut p = 0;
                while p <= row.p_max {
                    *dims.entry((p + row.q) as usize).or_default() += row.mult;
                    p += 2;
                }
            }
        }
        Formula::Display(f) => {
            let top = 3 * sig.top() as i64 + 2;
            for k in 0..=top {
                dims.insert(k as usize, f(sig, k));
            }
        }
    }
    Ok(BettiTable::new(dims))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeDiff {
    pub degree: usize,
    pub engine: usize,
    pub oracle: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub verdict: Verdict,
    pub diffs: Vec<DegreeDiff>,
}

impl Reconciliation {
    pub fn is_match(&self) -> bool {
        self.verdict == Verdict::Match
    }

    pub fn degrees(&self) -> BTreeSet<usize> {
        self.diffs.iter().map(|d| d.degree).collect()
    }
}

pub fn reconcile(engine: &BettiTable, oracle: &BettiTable) -> Reconciliation {
    let degrees: BTreeSet<usize> = engine.dims().keys().chain(oracle.dims().keys()).copied().collect();
    let diffs: Vec<DegreeDiff> = degrees
        .into_iter()
        .filter(|&k| engine.get(k) != oracle.get(k))
        .map(|k| DegreeDiff {
            degree: k,
            engine: engine.get(k),
            oracle: oracle.get(k),
        })
        .collect();
    let verdict = if diffs.is_empty() {
        Verdict::Match
    } else {
        Verdict::Mismatch(diffs.iter().map(|d| d.degree).collect())
    };
    Reconciliation { verdict, diffs }
}

/// Labels whose table equals the given one.
pub fn matching_labels(sig: &SpaceSignature, table: &BettiTable) -> Vec<CaseLabel> {
    applicable_labels(sig)
        .into_iter()
        .filter(|l| theorem_table(l, sig).is_ok_and(|t| &t == table))
        .collect()
}

/// n < m < l, all of n, m, l, n+m, n+l, m+l distinct, and l ≠ n+m.
pub fn in_reconciliation_regime(sig: &SpaceSignature) -> bool {
    let (n, m, l) = (sig.n, sig.m, sig.l);
    let degrees = [n, m, l, n + m, n + l, m + l];
    let distinct: BTreeSet<usize> = degrees.iter().copied().collect();
    n < m && m < l && l > n + m && distinct.len() == degrees.len()
}

/// A printed table known to disagree with itself or with the Künneth anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: CaseLabel,
    pub sig: Option<(usize, usize, usize)>,
    pub degrees: Option<BTreeSet<usize>>,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotations {
    entries: Vec<Annotation>,
}

pub const BUILTIN_ANNOTATIONS: &str = include_str!("../data/annotations.txt");

impl Annotations {
    /// Lines `<theorem-id>/<case>/<branch>: [sig=n,m,l] [degrees=k,...] note`;
    /// blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| OracleError::Annotation {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (head, rest) = line.split_once(": ").ok_or_else(|| err("missing ': '"))?;
            let label: CaseLabel = head.parse().map_err(|_| err("unknown label"))?;
            let mut rest = rest.trim();
            let mut sig = None;
            let mut degrees = None;
            loop {
                if let Some(tail) = rest.strip_prefix("sig=") {
                    let (value, after) = tail.split_once(' ').unwrap_or((tail, ""));
                    let parts: Vec<usize> = parse_list(value).ok_or_else(|| err("bad sig"))?;
                    if parts.len() != 3 {
                        return Err(err("sig needs three degrees"));
                    }
                    sig = Some((parts[0], parts[1], parts[2]));
                    rest = after.trim_start();
                } else if let Some(tail) = rest.strip_prefix("degrees=") {
                    let (value, after) = tail.split_once(' ').unwrap_or((tail, ""));
                    degrees = Some(parse_list(value).ok_or_else(|| err("bad degrees"))?.into_iter().collect());
                    rest = after.trim_start();
                } else {
                    break;
                }
            }
            entries.push(Annotation {
                label,
                sig,
                degrees,
                note: rest.to_string(),
            });
        }
        Ok(Annotations { entries })
    }

    pub fn builtin() -> Self {
        Annotations::parse(BUILTIN_ANNOTATIONS).expect("bundled annotations parse")
    }

    pub fn entries(&self) -> &[Annotation] {
        &self.entries
    }

    /// True when some entry for the label and signature lists every degree.
    pub fn covers(&self, label: &CaseLabel, sig: &SpaceSignature, degrees: &BTreeSet<usize>) -> bool {
        self.entries.iter().any(|a| {
            &a.label == label
                && a.sig.is_none_or(|s| s == (sig.n, sig.m, sig.l))
                && a.degrees.as_ref().is_none_or(|d| degrees.is_subset(d))
        })
    }

    pub fn is_annotated(&self, label: &CaseLabel) -> bool {
        self.entries.iter().any(|a| &a.label == label)
    }
}

fn parse_list(text: &str) -> Option<Vec<usize>> {
    text.split(',').map(|p| p.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize, m: usize, l: usize) -> SpaceSignature {
        SpaceSignature::new(n, m, l).unwrap()
    }

    fn label(s: &str) -> CaseLabel {
        s.parse().unwrap()
    }

    fn degrees(t: &BettiTable) -> Vec<usize> {
        t.dims().keys().copied().collect()
    }

    #[test]
    fn kunneth_examples() {
        assert_eq!(kunneth_product(&sig(3, 4, 5)).unwrap().to_string(), "1+x^2+x^4+x^5+x^6+x^7+x^9+x^11");
        assert_eq!(kunneth_product(&sig(1, 3, 6)).unwrap(), PoincarePolynomial::from_exponents([0, 3, 6, 9]));
        let t = kunneth_product(&sig(3, 4, 8)).unwrap().to_betti();
        assert_eq!(degrees(&t), vec![0, 2, 4, 6, 8, 10, 12, 14]);
        assert!(kunneth_product(&sig(2, 3, 4)).is_err());
    }

    #[test]
    fn polynomial_round_trip_through_betti() {
        let p = PoincarePolynomial::new(vec![1, 0, 3, 2, 0, 0]);
        assert_eq!(p.coefficients(), &[1, 0, 3, 2]);
        assert_eq!(PoincarePolynomial::from_betti(&p.to_betti()), p);
        assert_eq!(p.to_string(), "1+3x^2+2x^3");
    }

    #[test]
    fn labels_parse_and_print() {
        for l in all_labels() {
            assert_eq!(label(&l.to_string()), l);
        }
        assert!("da/9/x".parse::<CaseLabel>().is_err());
    }

    #[test]
    fn table_examples() {
        let t = theorem_table(&label("da/1/l>=m+n"), &sig(3, 4, 8)).unwrap();
        assert_eq!(degrees(&t), vec![0, 2, 4, 6, 8, 10, 12, 14]);
        let t = theorem_table(&label("dc/4/main"), &sig(2, 2, 3)).unwrap();
        assert_eq!(t, BettiTable::new([(0, 1), (2, 3), (4, 3), (6, 1)]));
        let narrow = theorem_table(&label("da/1/l<m+n"), &sig(3, 4, 5)).unwrap();
        let anchor = kunneth_product(&sig(3, 4, 5)).unwrap().to_betti();
        let r = reconcile(&narrow, &anchor);
        assert!(r.degrees().contains(&2));
        assert!(theorem_table(&label("da/1/l>=m+n"), &sig(3, 4, 5)).is_err());
        assert!(theorem_table(&label("dc/4/main"), &sig(2, 2, 4)).is_err());
    }

    #[test]
    fn wide_display_equals_kunneth() {
        for (n, m, l) in [(1, 2, 4), (3, 4, 8), (1, 3, 7), (3, 5, 9)] {
            let s = sig(n, m, l);
            let t = theorem_table(&label("da/1/l>=m+n"), &s).unwrap();
            assert_eq!(t, kunneth_product(&s).unwrap().to_betti(), "{s}");
        }
    }

    #[test]
    fn reconcile_reports_degrees() {
        let a = BettiTable::new([(0, 1), (2, 1)]);
        let b = BettiTable::new([(0, 1), (3, 1)]);
        assert_eq!(reconcile(&a, &a).verdict, Verdict::Match);
        let r = reconcile(&a, &b);
        assert_eq!(r.verdict, Verdict::Mismatch(vec![2, 3]));
        assert_eq!(r.diffs[0], DegreeDiff { degree: 2, engine: 1, oracle: 0 });
    }

    #[test]
    fn regime() {
        assert!(in_reconciliation_regime(&sig(3, 4, 8)));
        assert!(in_reconciliation_regime(&sig(2, 5, 8)));
        assert!(!in_reconciliation_regime(&sig(1, 2, 3)));
        assert!(!in_reconciliation_regime(&sig(2, 4, 6)));
        assert!(!in_reconciliation_regime(&sig(3, 4, 5)));
        assert!(!in_reconciliation_regime(&sig(2, 2, 5)));
    }

    #[test]
    fn annotation_format() {
        let text = "# comment\n\nda/1/l<m+n: sig=3,4,5 degrees=2,5 parity clash\ndc/4/main: plain note\n";
        let a = Annotations::parse(text).unwrap();
        assert_eq!(a.entries().len(), 2);
        assert_eq!(a.entries()[0].sig, Some((3, 4, 5)));
        assert_eq!(a.entries()[0].note, "parity clash");
        let l = label("da/1/l<m+n");
        assert!(a.covers(&l, &sig(3, 4, 5), &[2].into_iter().collect()));
        assert!(!a.covers(&l, &sig(3, 4, 5), &[2, 6].into_iter().collect()));
        assert!(!a.covers(&l, &sig(3, 4, 6), &[2].into_iter().collect()));
        assert!(a.covers(&label("dc/4/main"), &sig(1, 2, 3), &[7].into_iter().collect()));
        assert!(Annotations::parse("xx: y").is_err());
        assert!(Annotations::parse("dc/4/main no colon").is_err());
        assert!(!Annotations::builtin().entries().is_empty());
    }
}

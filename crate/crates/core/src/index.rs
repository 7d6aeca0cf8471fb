//! The characteristic-class exponent s, the Volovikov index i(X), and the
//! non-existence statements for equivariant maps they imply.

use serde::{Deserialize, Serialize};

use crate::fiber_algebra::SpaceSignature;
use crate::page_engine::{Bidegree, Page, Stage};

/// s = max k with E∞^{2k,0} ≠ 0.
pub fn char_class_exponent(stable: &Page) -> usize {
    (0..=stable.certified_band() / 2)
        .filter(|k| stable.dim(Bidegree::new(2 * k, 0)) > 0)
        .max()
        .unwrap_or(0)
}

/// Smallest page whose differential has a nonzero component into q = 0.
pub fn volovikov_index(history: &[Stage]) -> Option<usize> {
    history
        .iter()
        .find(|stage| stage.differentials.hits_bottom_row())
        .map(|stage| stage.page.index())
}

/// The page at which t^{s+1} is killed.
pub fn truncation_page(history: &[Stage], stable: &Page) -> Option<usize> {
    let at = Bidegree::new(2 * (char_class_exponent(stable) + 1), 0);
    let dims: Vec<usize> = history.iter().map(|s| s.page.dim(at)).chain([stable.dim(at)]).collect();
    dims.windows(2)
        .position(|w| w[0] > 0 && w[1] == 0)
        .map(|i| history[i].page.index())
}

/// Whether the bottom row of E∞ inside the band is exactly t^0, …, t^s.
pub fn bottom_row_is_truncation(stable: &Page) -> bool {
    let s = char_class_exponent(stable);
    (0..=stable.certified_band() / 2).all(|k| (stable.dim(Bidegree::new(2 * k, 0)) == 1) == (k <= s))
}

/// Values of 2s+1 realized by the orbit-space truncations x^{s+1} = 0.
pub fn r_list(sig: &SpaceSignature) -> Vec<usize> {
    let (n, m, l) = (sig.n, sig.m, sig.l);
    let mut v = vec![n, m, l, n + m, 2 * n + l, n + l, m + l, n + m + l];
    v.sort();
    v.dedup();
    v
}

/// Candidate pages for the first differential into the bottom row.
pub fn i_list(sig: &SpaceSignature) -> Vec<usize> {
    let (n, m, l) = (sig.n as i64, sig.m as i64, sig.l as i64);
    let mut v: Vec<usize> = [n + 1, m + 1, l + 1, m - n + 1, l - m + 1, l - n + 1, l - m - n + 1]
        .into_iter()
        .filter(|&x| x >= 2)
        .map(|x| x as usize)
        .collect();
    v.sort();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub s: usize,
    pub r_of_s: usize,
    pub volovikov: Option<usize>,
    pub in_r_list: bool,
    pub in_i_list: bool,
    pub statements: Vec<String>,
}

/// Largest k with 2k+1 < i − 1.
pub fn largest_forbidden_target(i: usize) -> Option<usize> {
    let k = i.saturating_sub(3) / 2;
    (i >= 3 && k >= 1).then_some(k)
}

pub fn equivariant_map_report(sig: &SpaceSignature, s: usize, i: Option<usize>) -> IndexReport {
    let r_of_s = 2 * s + 1;
    let mut statements = vec![format!(
        "no G-equivariant map S^(2k+1) -> X for all k >= {}",
        s + 1
    )];
    if let Some(k) = i.and_then(largest_forbidden_target) {
        let range = if k == 1 { "k = 1".to_string() } else { format!("1 <= k <= {k}") };
        statements.push(format!("no G-equivariant map X -> S^(2k+1) for {range}"));
    }
    IndexReport {
        s,
        r_of_s,
        volovikov: i,
        in_r_list: r_list(sig).contains(&r_of_s),
        in_i_list: i.is_some_and(|i| i_list(sig).contains(&i)),
        statements,
    }
}

pub fn index_report(sig: &SpaceSignature, history: &[Stage], stable: &Page) -> IndexReport {
    equivariant_map_report(sig, char_class_exponent(stable), volovikov_index(history))
}

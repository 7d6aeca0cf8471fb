//! Acceptance criteria, one PASS/FAIL line each.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use borel_sseq::cli::{self, signatures_up_to, verify_report, VerifyReport};
use borel_sseq::exact_linalg::{frac, rank};
use borel_sseq::fiber_algebra::SpaceSignature;
use borel_sseq::index::{char_class_exponent, volovikov_index};
use borel_sseq::oracle::{
    in_reconciliation_regime, is_applicable, kunneth_product, matching_labels, representative_schedule, Annotations,
    CaseLabel,
};
use borel_sseq::page_engine::{Page, Run};
use borel_sseq::presentation::{betti_table, extract_generators, term_feasible, BettiTable, Term};
use borel_sseq::schedule::{check_freeness, enumerate_schedules, Schedule};

const SWEEP_MAX: usize = 8;
const SEED: u64 = 20_260_101;
const SCALE_SCHEDULES: usize = 50;
const SCALE_TRIALS: usize = 20;
const SIDE_CONDITION_PAIRS: usize = 30;
const SIDE_CONDITION_CLAUSES: usize = 10;
const SERIAL_BUDGET: Duration = Duration::from_secs(300);
const PARALLEL_BUDGET: Duration = Duration::from_secs(60);
const PARALLEL_JOBS: usize = 8;

type Outcome = Result<String, String>;

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn sig(n: usize, m: usize, l: usize) -> SpaceSignature {
    SpaceSignature::new(n, m, l).unwrap()
}

fn run(s: SpaceSignature, text: &str) -> Result<Run, String> {
    let schedule: Schedule = text.parse().map_err(|e| format!("{text}: {e}"))?;
    schedule.run(s, s.default_window()).map_err(|e| format!("{text}: {e}"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn kunneth_anchor() -> Outcome {
    let mut count = 0;
    for n in (1..=7).step_by(2) {
        for m in n..=9 {
            for l in m..=9 {
                let s = sig(n, m, l);
                let r = run(s, &format!("r={}:a->1", n + 1))?;
                let table = betti_table(&r.stable).map_err(|e| format!("{s}: {e}"))?;
                let expected = kunneth_product(&s).unwrap().to_betti();
                ensure(table == expected, format!("{s}: engine {table} vs Künneth {expected}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} signatures equal the Künneth product"))
}

fn reconciliation(serial: &VerifyReport, serial_time: Duration, parallel: &VerifyReport, parallel_time: Duration) -> Outcome {
    ensure(serial == parallel, "serial and parallel sweeps differ")?;
    ensure(serial_time < SERIAL_BUDGET, format!("serial sweep took {serial_time:?}"))?;
    ensure(parallel_time < PARALLEL_BUDGET, format!("parallel sweep took {parallel_time:?}"))?;
    let annotations = Annotations::builtin();
    let mut regime_schedules = 0;
    for s in &serial.signatures {
        let g = sig(s.signature.n, s.signature.m, s.signature.l);
        ensure(
            s.engine_mismatches.is_empty(),
            format!("{g}: {}", s.engine_mismatches.join("; ")),
        )?;
        if in_reconciliation_regime(&g) {
            ensure(s.unmatched.is_empty(), format!("{g}: unmatched {:?}", s.unmatched))?;
            regime_schedules += s.schedules;
        }
        for c in &s.label_checks {
            if let cli::CheckOutcome::AnnotatedMismatch(degrees) = &c.outcome {
                let label: CaseLabel = c.label.parse().unwrap();
                let set: BTreeSet<usize> = degrees.iter().copied().collect();
                ensure(annotations.covers(&label, &g, &set), format!("{g} {}: unannotated {degrees:?}", c.label))?;
            }
        }
    }
    ensure(regime_schedules > 0, "regime is empty")?;
    Ok(format!(
        "{} regime schedules matched, 0 engine-side mismatches, {} annotated; serial {:.1}s, {} jobs {:.1}s",
        regime_schedules,
        serial.totals.annotated_mismatches,
        serial_time.as_secs_f64(),
        PARALLEL_JOBS,
        parallel_time.as_secs_f64()
    ))
}

fn case_coverage() -> Outcome {
    let s = sig(3, 4, 8);
    let e = enumerate_schedules(s, s.default_window()).map_err(|e| e.to_string())?;
    let wanted: CaseLabel = "da/1/l>=m+n".parse().unwrap();
    let rep = representative_schedule(&wanted, &s).map_err(|e| e.to_string())?;
    let first = e
        .results
        .iter()
        .find(|r| r.schedule.to_string() == rep && matching_labels(&s, &r.betti).contains(&wanted))
        .ok_or("(3,4,8): no schedule realizes possibility (1)")?;
    let s2 = sig(2, 2, 3);
    let e2 = enumerate_schedules(s2, s2.default_window()).map_err(|e| e.to_string())?;
    let wanted2: CaseLabel = "dc/4/main".parse().unwrap();
    let rep2 = representative_schedule(&wanted2, &s2).map_err(|e| e.to_string())?;
    let target = BettiTable::new([(0, 1), (2, 3), (4, 3), (6, 1)]);
    let second = e2
        .results
        .iter()
        .find(|r| r.schedule.to_string() == rep2 && r.betti == target && matching_labels(&s2, &r.betti).contains(&wanted2))
        .ok_or("(2,2,3): no schedule with Betti 1,3,3,1 matching the c-transgression case")?;
    Ok(format!(
        "(3,4,8) {} -> {wanted}; (2,2,3) {} -> {wanted2}",
        first.schedule, second.schedule
    ))
}

fn freeness_filter() -> Outcome {
    let mut returned = 0;
    for s in signatures_up_to(SWEEP_MAX) {
        let empty = run(s, "")?;
        let verdict = check_freeness(&empty.stable);
        ensure(verdict.witness.is_some(), format!("{s}: empty schedule accepted"))?;
        let e = enumerate_schedules(s, s.default_window()).map_err(|e| e.to_string())?;
        for r in &e.results {
            let band = r.stable.certified_band();
            let offending = r
                .stable
                .support()
                .into_iter()
                .find(|(b, _)| b.p <= band && b.total() >= s.top());
            ensure(offending.is_none(), format!("{s} {}: nonzero at {offending:?}", r.schedule))?;
            returned += 1;
        }
    }
    Ok(format!("empty schedule rejected for all signatures, {returned} returned schedules vanish above the top degree"))
}

/// Euler characteristic over the band changes only by differentials leaving it.
fn euler_drift(page: &Page, d: &borel_sseq::page_engine::DifferentialMatrixSet) -> i64 {
    let band = page.certified_band() as i64;
    d.maps()
        .filter(|(b, _)| b.p as i64 <= band && (b.p + d.page_index()) as i64 > band)
        .map(|(b, m)| {
            let k = rank(m) as i64;
            if b.total() % 2 == 0 {
                k
            } else {
                -k
            }
        })
        .sum()
}

fn structural_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut stages = 0;
    let mut scaled = 0;
    let mut tied = 0;
    let mut sample: Vec<(SpaceSignature, Schedule, BettiTable)> = Vec::new();
    for s in signatures_up_to(SWEEP_MAX) {
        let e = enumerate_schedules(s, s.default_window()).map_err(|e| e.to_string())?;
        for r in &e.results {
            let replay = r.schedule.run(s, s.default_window()).map_err(|e| e.to_string())?;
            let pages: Vec<&Page> = replay.history.iter().map(|st| &st.page).chain([&replay.stable]).collect();
            for (i, st) in replay.history.iter().enumerate() {
                let d = &st.differentials;
                for (at, m) in d.maps() {
                    let mid = d.target_of(*at).unwrap();
                    if let Some(next) = d.map(mid) {
                        ensure(next.mul(m).is_zero(), format!("{s} {}: d∘d ≠ 0 at {at}", r.schedule))?;
                    }
                }
                let (before, after) = (pages[i], pages[i + 1]);
                for (b, cell) in before.cells() {
                    ensure(after.dim(*b) <= cell.dim(), format!("{s} {}: dimension grew at {b}", r.schedule))?;
                }
                let limit = usize::MAX;
                let expected = before.euler_characteristic(limit) - euler_drift(before, d);
                ensure(
                    after.euler_characteristic(limit) == expected,
                    format!("{s} {}: Euler characteristic jumps on page {}", r.schedule, before.index()),
                )?;
                stages += 1;
            }
            if sample.len() < SCALE_SCHEDULES {
                sample.push((s, r.schedule.clone(), r.betti.clone()));
            }
        }
    }
    for (s, schedule, betti) in &sample {
        for _ in 0..SCALE_TRIALS {
            let idx = rng.gen_range(0..schedule.events().len());
            let mut num = 0;
            while num == 0 {
                num = rng.gen_range(-9i64..=9);
            }
            let factor = frac(num, rng.gen_range(1i64..=9));
            let single = schedule.rescaled(idx, &factor);
            let (tweaked, r) = match single.run(*s, s.default_window()) {
                Ok(r) => (single, r),
                Err(_) => {
                    tied += 1;
                    let joint = schedule.rescaled_page(schedule.events()[idx].page, &factor);
                    let r = joint.run(*s, s.default_window()).map_err(|e| format!("{s} {joint}: {e}"))?;
                    (joint, r)
                }
            };
            let table = betti_table(&r.stable).map_err(|e| format!("{s} {tweaked}: {e}"))?;
            ensure(&table == betti, format!("{s} {tweaked}: Betti {table} vs {betti}"))?;
            scaled += 1;
        }
    }
    Ok(format!(
        "{stages} page turns satisfy d∘d=0, monotonicity and Euler balance; {scaled} rescalings over {} schedules keep Betti tables ({tied} tied to another coefficient, rescaled with their page)",
        sample.len()
    ))
}

/// A printed "a_i = 0 if ..." clause: the term, the degree of its relation,
/// and the printed condition.
struct Clause {
    id: &'static str,
    label: &'static str,
    degree: fn(i64, i64, i64) -> i64,
    x_degree: fn(i64, i64, i64) -> i64,
    generator: Option<&'static str>,
    /// Signatures where the generator names are unambiguous.
    domain: fn(i64, i64, i64) -> bool,
    zero_if: fn(i64, i64, i64) -> bool,
}

const CLAUSES: &[Clause] = &[
    Clause {
        id: "da/1 a1: z in y^2",
        label: "da/1/einf",
        degree: |_, m, _| 2 * m,
        x_degree: |_, _, _| 0,
        generator: Some("z"),
        domain: |_, m, l| m < l,
        zero_if: |n, m, l| n <= m && m < l,
    },
    Clause {
        id: "da/1 a2: x^((2m-l)/2)w in y^2",
        label: "da/1/einf",
        degree: |_, m, _| 2 * m,
        x_degree: |_, m, l| 2 * m - l,
        generator: Some("w"),
        domain: |_, m, l| m < l,
        zero_if: |n, m, l| 2 * m > n + l - 1 || l % 2 == 1,
    },
    Clause {
        id: "da/1 a3: x^((l-m)/2)z in w^2",
        label: "da/1/einf",
        degree: |_, _, l| 2 * l,
        x_degree: |_, m, l| l - m,
        generator: Some("z"),
        domain: |_, m, l| m < l,
        zero_if: |n, m, l| l - m + 1 > n || (l - m) % 2 == 1,
    },
    Clause {
        id: "db/2 a2: x^((2n-l)/2)w in y^2",
        label: "db/2/main",
        degree: |n, _, _| 2 * n,
        x_degree: |n, _, l| 2 * n - l,
        generator: Some("w"),
        domain: |_, _, _| true,
        zero_if: |n, m, l| m + l - 1 < 2 * n,
    },
    Clause {
        id: "db/2 a5: x^((l-n)/2)z in w^2",
        label: "db/2/main",
        degree: |_, _, l| 2 * l,
        x_degree: |n, _, l| l - n,
        generator: Some("z"),
        domain: |_, _, _| true,
        zero_if: |n, m, l| m + n - 1 < l,
    },
    Clause {
        id: "db/2 a7: x^(n/2)w in yw",
        label: "db/2/main",
        degree: |n, _, l| n + l,
        x_degree: |n, _, _| n,
        generator: Some("w"),
        domain: |_, _, _| true,
        zero_if: |n, _, _| n % 2 == 1,
    },
    Clause {
        id: "db/2 a8: x^(n/2)z in yz",
        label: "db/2/main",
        degree: |n, _, l| 2 * n + l,
        x_degree: |n, _, _| n,
        generator: Some("z"),
        domain: |_, _, _| true,
        zero_if: |n, _, _| n % 2 == 1,
    },
    Clause {
        id: "db/2 a9: x^n w in yz",
        label: "db/2/main",
        degree: |n, _, l| 2 * n + l,
        x_degree: |n, _, _| 2 * n,
        generator: Some("w"),
        domain: |_, _, _| true,
        zero_if: |n, m, _| 2 * n + 1 > m,
    },
    Clause {
        id: "dc/4 a1: x^n in y^2",
        label: "dc/4/main",
        degree: |n, _, _| 2 * n,
        x_degree: |n, _, _| 2 * n,
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |n, _, l| l < 2 * n + 1,
    },
    Clause {
        id: "dc/4 a4: z in y^2",
        label: "dc/4/main",
        degree: |n, _, _| 2 * n,
        x_degree: |_, _, _| 0,
        generator: Some("z"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, _| n < m,
    },
    Clause {
        id: "dc/4 a5: x^m in w^2",
        label: "dc/4/main",
        degree: |_, m, _| 2 * m,
        x_degree: |_, m, _| 2 * m,
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |_, m, l| l < 2 * m + 1,
    },
    Clause {
        id: "dc/4 a6: x^((2m-n)/2)y in w^2",
        label: "dc/4/main",
        degree: |_, m, _| 2 * m,
        x_degree: |n, m, _| 2 * m - n,
        generator: Some("y"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| n + l < 2 * m + 1,
    },
    Clause {
        id: "dc/4 a9: x^(n+m) in z^2",
        label: "dc/4/main",
        degree: |n, m, _| 2 * (n + m),
        x_degree: |n, m, _| 2 * (n + m),
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < 2 * n + 2 * m + 1,
    },
    Clause {
        id: "dc/4 a10: x^((n+2m)/2)y in z^2",
        label: "dc/4/main",
        degree: |n, m, _| 2 * (n + m),
        x_degree: |n, m, _| n + 2 * m,
        generator: Some("y"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < 2 * m + n + 1,
    },
    Clause {
        id: "dc/4 a11: x^((2n+m)/2)w in z^2",
        label: "dc/4/main",
        degree: |n, m, _| 2 * (n + m),
        x_degree: |n, m, _| 2 * n + m,
        generator: Some("w"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < 2 * n + m + 1,
    },
    Clause {
        id: "dc/4 a12: x^((n+m)/2)z in z^2",
        label: "dc/4/main",
        degree: |n, m, _| 2 * (n + m),
        x_degree: |n, m, _| n + m,
        generator: Some("z"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < n + m + 1,
    },
    Clause {
        id: "dc/4 a13: x^((n+m)/2) in yw",
        label: "dc/4/main",
        degree: |n, m, _| n + m,
        x_degree: |n, m, _| n + m,
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < n + m + 1,
    },
    Clause {
        id: "dc/4 a17: x^((2n+m)/2) in yz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * n + m,
        x_degree: |n, m, _| 2 * n + m,
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < 2 * n + m + 1,
    },
    Clause {
        id: "dc/4 a18: x^((n+m)/2)y in yz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * n + m,
        x_degree: |n, m, _| n + m,
        generator: Some("y"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < n + m + 1,
    },
    Clause {
        id: "dc/4 a19: x^n w in yz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * n + m,
        x_degree: |n, _, _| 2 * n,
        generator: Some("w"),
        domain: |n, m, _| n < m,
        zero_if: |n, _, l| l < 2 * n + 1,
    },
    Clause {
        id: "dc/4 a21: x^((2m+n)/2) in wz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * m + n,
        x_degree: |n, m, _| 2 * m + n,
        generator: None,
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < 2 * m + n + 1,
    },
    Clause {
        id: "dc/4 a22: x^m y in wz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * m + n,
        x_degree: |_, m, _| 2 * m,
        generator: Some("y"),
        domain: |n, m, _| n < m,
        zero_if: |_, m, l| l < 2 * m + 1,
    },
    Clause {
        id: "dc/4 a23: x^((n+m)/2)w in wz",
        label: "dc/4/main",
        degree: |n, m, _| 2 * m + n,
        x_degree: |n, m, _| n + m,
        generator: Some("w"),
        domain: |n, m, _| n < m,
        zero_if: |n, m, l| l < n + m + 1,
    },
];

/// Signatures where the clause's case applies, the term's exponent of x is a
/// non-negative integer, and the case is realized by a free schedule.
fn clause_instances(c: &Clause) -> Result<Vec<(SpaceSignature, Page)>, String> {
    let label: CaseLabel = c.label.parse().map_err(|e| format!("{e}"))?;
    let mut out = Vec::new();
    for s in signatures_up_to(SWEEP_MAX) {
        let (n, m, l) = (s.n as i64, s.m as i64, s.l as i64);
        let xd = (c.x_degree)(n, m, l);
        if !is_applicable(&label, &s) || !(c.domain)(n, m, l) || xd < 0 || xd % 2 != 0 {
            continue;
        }
        let text = representative_schedule(&label, &s).map_err(|e| e.to_string())?;
        let Ok(r) = run(s, &text) else { continue };
        if check_freeness(&r.stable).free_consistent {
            out.push((s, r.stable));
        }
    }
    Ok(out)
}

fn side_conditions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pools = Vec::new();
    for c in CLAUSES {
        let pool = clause_instances(c)?;
        if !pool.is_empty() {
            pools.push((c, pool));
        }
    }
    let mut chosen: Vec<(&Clause, SpaceSignature, Page)> = Vec::new();
    let mut used = BTreeSet::new();
    let mut i = 0;
    while chosen.len() < SIDE_CONDITION_PAIRS {
        let (c, pool) = &pools[i % pools.len()];
        let (s, page) = &pool[rng.gen_range(0..pool.len())];
        chosen.push((c, *s, page.clone()));
        used.insert(c.id);
        i += 1;
    }
    ensure(
        used.len() >= SIDE_CONDITION_CLAUSES,
        format!("only {} clauses covered", used.len()),
    )?;
    for (c, s, page) in &chosen {
        let (n, m, l) = (s.n as i64, s.m as i64, s.l as i64);
        let gens = extract_generators(page).map_err(|e| e.to_string())?;
        let term = Term {
            x_degree: (c.x_degree)(n, m, l),
            generator: c.generator.map(str::to_string),
        };
        let feasible = term_feasible(page, &gens, (c.degree)(n, m, l), &term);
        let zero = (c.zero_if)(n, m, l);
        ensure(
            feasible != zero,
            format!("{} on {s}: feasible={feasible}, printed zero condition={zero}", c.id),
        )?;
    }
    Ok(format!("{} sampled pairs over {} clauses agree with the printed conditions", chosen.len(), used.len()))
}

fn index_suite(report: &VerifyReport) -> Outcome {
    let s = sig(3, 4, 8);
    let r = run(s, "r=4:a->1")?;
    let (sx, ix) = (char_class_exponent(&r.stable), volovikov_index(&r.history));
    ensure(sx == 1 && ix == Some(4), format!("(3,4,8): s={sx}, i={ix:?}"))?;
    let mut violations = Vec::new();
    for sg in &report.signatures {
        violations.extend(sg.truncation_violations.iter().cloned());
    }
    ensure(violations.is_empty(), format!("bottom row not a truncation hit at or after i(X): {violations:?}"))?;
    Ok(format!(
        "(3,4,8) s=1 i=4; i-list counterexamples: {} schedules; r-list counterexamples: {}",
        report.totals.i_list_counterexamples, report.totals.r_list_counterexamples
    ))
}

fn determinism() -> Outcome {
    let args = ["borel-sseq", "verify", "--max", "6", "--format", "json"];
    let (c1, first) = cli::run(args);
    let (c2, second) = cli::run(args);
    ensure(c1 == 0 && c2 == 0, format!("exit codes {c1}, {c2}"))?;
    ensure(first == second, "outputs differ")?;
    Ok(format!("two runs produce identical {}-byte documents", first.len()))
}

fn main() {
    let annotations = Annotations::builtin();
    let t = Instant::now();
    let serial = verify_report(SWEEP_MAX, 1, None, &annotations);
    let serial_time = t.elapsed();
    let t = Instant::now();
    let parallel = verify_report(SWEEP_MAX, PARALLEL_JOBS, None, &annotations);
    let parallel_time = t.elapsed();
    let sweep = match (serial, parallel) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("1 Künneth anchor", Box::new(kunneth_anchor)),
        (
            "2 theorem-table reconciliation",
            Box::new(|| {
                let (a, b) = sweep.as_ref().map_err(Clone::clone)?;
                reconciliation(a, serial_time, b, parallel_time)
            }),
        ),
        ("3 case coverage", Box::new(case_coverage)),
        ("4 freeness filter", Box::new(freeness_filter)),
        ("5 structural properties", Box::new(structural_properties)),
        ("6 side-condition feasibility", Box::new(side_conditions)),
        (
            "7 index suite",
            Box::new(|| {
                let (a, _) = sweep.as_ref().map_err(Clone::clone)?;
                index_suite(a)
            }),
        ),
        ("8 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

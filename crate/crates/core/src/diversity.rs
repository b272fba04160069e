//! Diversities and their axioms.
//!
//! A diversity assigns a nonnegative value to every finite subset, zero
//! exactly on sets with at most one point, subject to the triangle axiom
//! `δ(A∪C) ≤ δ(A∪B) + δ(B∪C)` whenever `B` is nonempty.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::rat::{scaled_integers, Rat};
use crate::sets::{GroundSet, SetFunction, SubsetMask};

/// Ground-set size up to which the triangle axiom is scanned exhaustively.
pub const EXHAUSTIVE_AXIOM_CAP: usize = 8;

/// Default number of sampled triples above the exhaustive cap.
pub const DEFAULT_AXIOM_SAMPLES: u64 = 200_000;

/// At most this many instances of each violation kind are kept in a report.
pub const REPORT_LIMIT: usize = 10_000;

/// Anything that can evaluate δ on a subset of its ground set.
pub trait Diversity {
    fn ground(&self) -> &GroundSet;
    fn value(&self, set: SubsetMask) -> Rat;
}

/// A diversity stored as a dense table over all subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDiversity {
    delta: SetFunction,
}

impl FiniteDiversity {
    /// Validates the table. Ground sets up to [`EXHAUSTIVE_AXIOM_CAP`] are
    /// scanned over all triples, larger ones with the reduced scan.
    pub fn new(delta: SetFunction) -> Result<Self> {
        let report = if delta.ground().len() <= EXHAUSTIVE_AXIOM_CAP {
            verify_diversity_axioms(&delta)
        } else {
            verify_diversity_axioms_reduced(&delta)
        };
        if let Some(msg) = report.first_problem(delta.ground()) {
            return Err(Error::NotADiversity(msg));
        }
        Ok(Self { delta })
    }

    /// Wraps a table produced by a construction known to yield a diversity.
    pub(crate) fn from_trusted(delta: SetFunction) -> Self {
        Self { delta }
    }

    /// Materializes any diversity into a dense table.
    pub fn materialize(div: &dyn Diversity) -> Result<Self> {
        let delta = SetFunction::from_fn(div.ground(), |s| div.value(s))?;
        Ok(Self { delta })
    }

    pub fn table(&self) -> &SetFunction {
        &self.delta
    }

    pub fn ground(&self) -> &GroundSet {
        self.delta.ground()
    }

    pub fn get(&self, set: SubsetMask) -> &Rat {
        self.delta.get(set)
    }

    pub fn len(&self) -> usize {
        self.delta.ground().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest value, attained on the full ground set by monotonicity.
    pub fn max_value(&self) -> Rat {
        self.delta.get(self.delta.ground().full()).clone()
    }
}

impl Diversity for FiniteDiversity {
    fn ground(&self) -> &GroundSet {
        self.delta.ground()
    }

    fn value(&self, set: SubsetMask) -> Rat {
        self.delta.get(set).clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom1Violation {
    pub set: SubsetMask,
    pub value: Rat,
}

/// `δ(A∪C) > δ(A∪B) + δ(B∪C)` with `B` nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom2Violation {
    pub a: SubsetMask,
    pub b: SubsetMask,
    pub c: SubsetMask,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// `δ(sub) > δ(sup)` with `sub ⊆ sup`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub sub: SubsetMask,
    pub sup: SubsetMask,
}

/// `δ(A∪B) > δ(A) + δ(B)` with `A∩B` nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubadditivityViolation {
    pub a: SubsetMask,
    pub b: SubsetMask,
    pub lhs: Rat,
    pub rhs: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coverage {
    Exhaustive,
    /// Monotonicity on covering pairs plus the triangle axiom for singleton
    /// `B` and disjoint `A`, `C`. Together with monotonicity this implies
    /// the axiom for all triples: shrinking `B` to one of its points and
    /// removing `A` from `C` only lowers the right-hand side.
    Reduced,
    Sampled { triples: u64, seed: u64, fraction: f64 },
}

/// Result of an axiom scan. Empty exactly when no violation was found.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub axiom1: Vec<Axiom1Violation>,
    pub axiom2: Vec<Axiom2Violation>,
    /// Number of axiom-2 violations found, including any beyond the kept list.
    pub axiom2_total: u64,
    pub monotonicity: Vec<MonotonicityViolation>,
    pub subadditivity: Vec<SubadditivityViolation>,
    pub coverage: Coverage,
}

impl AxiomReport {
    fn new(coverage: Coverage) -> Self {
        Self {
            axiom1: Vec::new(),
            axiom2: Vec::new(),
            axiom2_total: 0,
            monotonicity: Vec::new(),
            subadditivity: Vec::new(),
            coverage,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.axiom1.is_empty()
            && self.axiom2_total == 0
            && self.monotonicity.is_empty()
            && self.subadditivity.is_empty()
    }

    pub fn first_problem(&self, ground: &GroundSet) -> Option<String> {
        if let Some(v) = self.axiom1.first() {
            return Some(format!(
                "axiom 1 fails at {} (value {})",
                ground.format_set(v.set),
                v.value
            ));
        }
        if let Some(v) = self.axiom2.first() {
            return Some(format!(
                "axiom 2 fails at A={}, B={}, C={}: {} > {}",
                ground.format_set(v.a),
                ground.format_set(v.b),
                ground.format_set(v.c),
                v.lhs,
                v.rhs
            ));
        }
        if let Some(v) = self.monotonicity.first() {
            return Some(format!(
                "not monotone: {} ⊆ {}",
                ground.format_set(v.sub),
                ground.format_set(v.sup)
            ));
        }
        self.subadditivity.first().map(|v| {
            format!(
                "not subadditive on intersecting {} and {}",
                ground.format_set(v.a),
                ground.format_set(v.b)
            )
        })
    }
}

fn check_axiom1(report: &mut AxiomReport, set: SubsetMask, value: &Rat) {
    let ok = if set.len() <= 1 {
        value.is_zero()
    } else {
        value > &Rat::zero()
    };
    if !ok && report.axiom1.len() < REPORT_LIMIT {
        report.axiom1.push(Axiom1Violation {
            set,
            value: value.clone(),
        });
    }
}

/// Exhaustive scan of both axioms and the derived properties.
///
/// The triangle axiom is checked over every triple `(A, B, C)` with `B`
/// nonempty; since it is symmetric in `A` and `C`, violations are recorded
/// once with `A ≤ C` in mask order.
pub fn verify_diversity_axioms(table: &SetFunction) -> AxiomReport {
    let ground = table.ground();
    let n = ground.len();
    let size = 1usize << n;
    let mut report = AxiomReport::new(Coverage::Exhaustive);

    for s in ground.subsets() {
        check_axiom1(&mut report, s, table.get(s));
    }

    match scaled_integers(table.values()) {
        Some((v, _)) => {
            scan_triangle(size, |m| v[m], &mut report, |m| table.get(SubsetMask(m as u64)).clone());
        }
        None => {
            let v = table.values();
            scan_triangle_exact(size, v, &mut report);
        }
    }

    for sup in ground.subsets() {
        for sub in sup.subsets() {
            if sub != sup
                && table.get(sub) > table.get(sup)
                && report.monotonicity.len() < REPORT_LIMIT
            {
                report.monotonicity.push(MonotonicityViolation { sub, sup });
            }
        }
    }

    for a in 1..size {
        for b in a..size {
            if a & b == 0 {
                continue;
            }
            let (sa, sb) = (SubsetMask(a as u64), SubsetMask(b as u64));
            let lhs = table.get(sa | sb);
            let rhs = table.get(sa) + table.get(sb);
            if lhs > &rhs && report.subadditivity.len() < REPORT_LIMIT {
                report.subadditivity.push(SubadditivityViolation {
                    a: sa,
                    b: sb,
                    lhs: lhs.clone(),
                    rhs,
                });
            }
        }
    }
    report
}

/// Exhaustive up to a proven reduction, for ground sets too large for the
/// triple scan (`O(n·3^n)` instead of `O(8^n)`). Derived properties other
/// than monotonicity follow from the axioms and are not scanned.
pub fn verify_diversity_axioms_reduced(table: &SetFunction) -> AxiomReport {
    let ground = table.ground();
    let n = ground.len();
    let full = ground.full().0 as usize;
    let mut report = AxiomReport::new(Coverage::Reduced);
    for s in ground.subsets() {
        check_axiom1(&mut report, s, table.get(s));
        for i in (0..n).filter(|&i| !s.contains(i)) {
            let sup = s.with(i);
            if table.get(s) > table.get(sup) && report.monotonicity.len() < REPORT_LIMIT {
                report.monotonicity.push(MonotonicityViolation { sub: s, sup });
            }
        }
    }
    let scaled = scaled_integers(table.values());
    let exceeds = |a: usize, b: usize, c: usize| match &scaled {
        Some((v, _)) => v[a | c] > v[a | b] + v[b | c],
        None => {
            let v = table.values();
            v[a | c] > &v[a | b] + &v[b | c]
        }
    };
    for b in (0..n).map(|i| 1usize << i) {
        for c in 0..=full {
            let rest = full & !c;
            let mut a = rest;
            loop {
                if exceeds(a, b, c) {
                    report.axiom2_total += 1;
                    if report.axiom2.len() < REPORT_LIMIT {
                        let v = table.values();
                        report.axiom2.push(Axiom2Violation {
                            a: SubsetMask(a as u64),
                            b: SubsetMask(b as u64),
                            c: SubsetMask(c as u64),
                            lhs: v[a | c].clone(),
                            rhs: &v[a | b] + &v[b | c],
                        });
                    }
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & rest;
            }
        }
    }
    report
}

fn scan_triangle(
    size: usize,
    v: impl Fn(usize) -> i64,
    report: &mut AxiomReport,
    exact: impl Fn(usize) -> Rat,
) {
    for b in 1..size {
        for a in 0..size {
            let ab = v(a | b);
            for c in a..size {
                if v(a | c) > ab + v(b | c) {
                    report.axiom2_total += 1;
                    if report.axiom2.len() < REPORT_LIMIT {
                        report.axiom2.push(Axiom2Violation {
                            a: SubsetMask(a as u64),
                            b: SubsetMask(b as u64),
                            c: SubsetMask(c as u64),
                            lhs: exact(a | c),
                            rhs: exact(a | b) + exact(b | c),
                        });
                    }
                }
            }
        }
    }
}

fn scan_triangle_exact(size: usize, v: &[Rat], report: &mut AxiomReport) {
    for b in 1..size {
        for a in 0..size {
            for c in a..size {
                let rhs = &v[a | b] + &v[b | c];
                if v[a | c] > rhs {
                    report.axiom2_total += 1;
                    if report.axiom2.len() < REPORT_LIMIT {
                        report.axiom2.push(Axiom2Violation {
                            a: SubsetMask(a as u64),
                            b: SubsetMask(b as u64),
                            c: SubsetMask(c as u64),
                            lhs: v[a | c].clone(),
                            rhs,
                        });
                    }
                }
            }
        }
    }
}

/// Seeded sampling variant for ground sets too large to scan. Checks
/// `samples` random triangle triples plus axiom 1, monotonicity and
/// subadditivity on the sampled sets.
pub fn verify_diversity_axioms_sampled(div: &dyn Diversity, samples: u64, seed: u64) -> AxiomReport {
    let n = div.ground().len();
    let full = SubsetMask::full(n).0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = (2f64).powi(3 * n as i32);
    let fraction = (samples as f64 / space).min(1.0);
    let mut report = AxiomReport::new(Coverage::Sampled {
        triples: samples,
        seed,
        fraction,
    });
    let random_set = |rng: &mut ChaCha8Rng| SubsetMask(rng.gen::<u64>() & full);
    for _ in 0..samples {
        let a = random_set(&mut rng);
        let mut b = random_set(&mut rng);
        if b.is_empty() && n > 0 {
            b = SubsetMask::singleton(rng.gen_range(0..n));
        }
        let c = random_set(&mut rng);
        let lhs = div.value(a | c);
        let ab = div.value(a | b);
        let bc = div.value(b | c);
        let rhs = &ab + &bc;
        check_axiom1(&mut report, a | c, &lhs);
        if lhs > rhs {
            report.axiom2_total += 1;
            if report.axiom2.len() < REPORT_LIMIT {
                report.axiom2.push(Axiom2Violation {
                    a,
                    b,
                    c,
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                });
            }
        }
        let union = div.value(a | b | c);
        if ab > union && report.monotonicity.len() < REPORT_LIMIT {
            report.monotonicity.push(MonotonicityViolation {
                sub: a | b,
                sup: a | b | c,
            });
        }
        if (a | b).intersects(b | c) {
            if union > rhs && report.subadditivity.len() < REPORT_LIMIT {
                report.subadditivity.push(SubadditivityViolation {
                    a: a | b,
                    b: b | c,
                    lhs: union,
                    rhs,
                });
            }
        }
    }
    report
}

/// `d(x, y) = δ({x, y})`.
pub fn induced_metric(div: &dyn Diversity) -> FiniteMetric {
    let n = div.ground().len();
    let mut dist = vec![Rat::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = div.value(SubsetMask::singleton(i).with(j));
            dist[i * n + j] = d.clone();
            dist[j * n + i] = d;
        }
    }
    FiniteMetric::from_trusted(div.ground().clone(), dist)
}

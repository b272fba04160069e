//! Tight spans of finite diversities and hyperconvexity decisions.
//!
//! `P_X` is the polyhedron of set functions `f` with `f(∅) = 0` and
//! `Σ_{A∈𝒜} f(A) ≥ δ(⋃𝒜)` for every finite family `𝒜` of nonempty sets.
//! Its coordinatewise-minimal points form the tight span `T_X`.

use num_traits::{One, Signed, Zero};

use crate::diversity::FiniteDiversity;
use crate::error::{Error, Result};
use crate::exactlp::{
    lp_minimize_coordinate_sequence, lp_solve, max_coordinate_decrease, LinConstraint,
    LpOutcome, LpProblem, Objective,
};
use crate::metric::FiniteMetric;
use crate::rat::{fmt_rat, Rat};
use crate::sets::{GroundSet, SetFunction, SubsetMask};

/// Default ground-size cap for the family system.
pub const PX_CAP: usize = 5;

/// Default ground-size cap for the diversity hyperconvexity search.
pub const HYPERCONVEX_CAP: usize = 4;

/// Cap for the unreduced family enumeration.
pub const ALL_FAMILIES_CAP: usize = 4;

/// One family inequality `Σ_{A∈family} f(A) ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PxRow {
    pub family: Vec<SubsetMask>,
    pub rhs: Rat,
}

impl PxRow {
    pub fn sum(&self, f: &SetFunction) -> Rat {
        self.family.iter().map(|a| f.get(*a)).sum()
    }

    pub fn holds(&self, f: &SetFunction) -> bool {
        self.sum(f) >= self.rhs
    }
}

/// The family inequalities of a diversity, one per antichain of nonempty
/// subsets. A family holding a comparable pair `A ⊆ B` is implied by the
/// family without `A`, since `f(A) ≥ δ(A) ≥ 0` and the union is unchanged.
#[derive(Clone, Debug)]
pub struct PxSystem {
    base: FiniteDiversity,
    rows: Vec<PxRow>,
}

impl PxSystem {
    pub fn base(&self) -> &FiniteDiversity {
        &self.base
    }

    pub fn ground(&self) -> &GroundSet {
        self.base.ground()
    }

    pub fn rows(&self) -> &[PxRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of LP variables, one per nonempty subset.
    pub fn num_vars(&self) -> usize {
        (1usize << self.ground().len()) - 1
    }

    pub fn first_violation(&self, f: &SetFunction) -> Option<&PxRow> {
        self.rows.iter().find(|r| !r.holds(f))
    }

    /// The system as an LP over variables `f(A)`, `A` nonempty, indexed by
    /// `mask − 1`. Row `i` of the LP is row `i` of the system.
    pub fn to_lp(&self) -> LpProblem {
        let mut p = LpProblem::new(self.num_vars());
        for row in &self.rows {
            p.push(LinConstraint::ge(
                row.family.iter().map(|a| (var(*a), Rat::one())).collect(),
                row.rhs.clone(),
            ));
        }
        p
    }

    pub fn to_vector(&self, f: &SetFunction) -> Vec<Rat> {
        f.values()[1..].to_vec()
    }

    pub fn from_vector(&self, x: &[Rat]) -> Result<SetFunction> {
        let mut values = Vec::with_capacity(x.len() + 1);
        values.push(Rat::zero());
        values.extend_from_slice(x);
        SetFunction::from_values(self.ground(), values)
    }

    fn violation_error(&self, row: &PxRow, f: &SetFunction) -> Error {
        Error::NotInPx {
            family: self.ground().format_family(&row.family),
            sum: fmt_rat(&row.sum(f)),
            rhs: fmt_rat(&row.rhs),
        }
    }
}

/// LP variable of a nonempty subset.
pub fn var(set: SubsetMask) -> usize {
    set.0 as usize - 1
}

pub fn px_constraints(div: &FiniteDiversity) -> Result<PxSystem> {
    px_constraints_capped(div, PX_CAP)
}

pub fn px_constraints_capped(div: &FiniteDiversity, cap: usize) -> Result<PxSystem> {
    let n = div.len();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    Ok(build_system(div, antichains(n)))
}

/// Every family of distinct nonempty subsets, without the antichain
/// reduction. Exists to cross-check the reduced system.
pub fn px_constraints_all_families(div: &FiniteDiversity) -> Result<PxSystem> {
    let n = div.len();
    if n > ALL_FAMILIES_CAP {
        return Err(Error::CapExceeded {
            size: n,
            cap: ALL_FAMILIES_CAP,
        });
    }
    let m = (1usize << n) - 1;
    let families = (1u64..1u64 << m)
        .map(|bits| {
            (0..m)
                .filter(|k| bits >> k & 1 == 1)
                .map(|k| SubsetMask(k as u64 + 1))
                .collect()
        })
        .collect();
    Ok(build_system(div, families))
}

fn build_system(div: &FiniteDiversity, families: Vec<Vec<SubsetMask>>) -> PxSystem {
    let rows = families
        .into_iter()
        .map(|family| {
            let union = family.iter().fold(SubsetMask::EMPTY, |u, a| u | *a);
            PxRow {
                rhs: div.get(union).clone(),
                family,
            }
        })
        .collect();
    PxSystem {
        base: div.clone(),
        rows,
    }
}

/// Nonempty antichains of nonempty subsets of an `n`-set, each listed in
/// increasing mask order.
pub fn antichains(n: usize) -> Vec<Vec<SubsetMask>> {
    fn go(next: u64, top: u64, chosen: &mut Vec<SubsetMask>, out: &mut Vec<Vec<SubsetMask>>) {
        for m in next..top {
            let s = SubsetMask(m);
            if chosen
                .iter()
                .all(|c| !c.is_subset_of(s) && !s.is_subset_of(*c))
            {
                chosen.push(s);
                out.push(chosen.clone());
                go(m + 1, top, chosen, out);
                chosen.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(1, 1u64 << n, &mut Vec::new(), &mut out);
    out
}

pub fn in_px(sys: &PxSystem, f: &SetFunction) -> Result<bool> {
    f.same_ground(sys.ground())?;
    Ok(sys.first_violation(f).is_none())
}

/// `h_x(A) = δ(A ∪ {x})` for nonempty `A`.
pub fn kappa(div: &FiniteDiversity, x: usize) -> Result<SetFunction> {
    div.ground().check_index(x)?;
    SetFunction::from_fn(div.ground(), |a| div.get(a.with(x)).clone())
}

/// Cardinality first, then mask value.
pub fn cardinality_order(ground: &GroundSet) -> Vec<SubsetMask> {
    let mut sets: Vec<SubsetMask> = ground.nonempty_subsets().collect();
    sets.sort_by_key(|s| (s.len(), s.0));
    sets
}

/// Plain mask order.
pub fn mask_order(ground: &GroundSet) -> Vec<SubsetMask> {
    ground.nonempty_subsets().collect()
}

/// A minimal point of `P_X` together with the per-coordinate evidence: for
/// every nonempty `A`, the LP maximum of how far `f(A)` can drop while no
/// coordinate rises. All of them are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightPoint {
    pub f: SetFunction,
    pub order: Vec<SubsetMask>,
    pub max_decrease: Vec<(SubsetMask, Rat)>,
}

/// Lowers `f0` coordinate by coordinate in `order` to a minimal point of
/// `P_X` below it. Sets absent from `order` are lowered afterwards.
pub fn tighten(sys: &PxSystem, f0: &SetFunction, order: &[SubsetMask]) -> Result<TightPoint> {
    f0.same_ground(sys.ground())?;
    if let Some(row) = sys.first_violation(f0) {
        return Err(sys.violation_error(row, f0));
    }
    let lp = sys.to_lp();
    let mut vars: Vec<usize> = order
        .iter()
        .map(|s| {
            if s.is_empty() || !s.is_subset_of(sys.ground().full()) {
                Err(Error::MalformedLp(format!("order entry {s:?} is not a nonempty subset")))
            } else {
                Ok(var(*s))
            }
        })
        .collect::<Result<_>>()?;
    // Coordinates missing from `order` follow in cardinality order.
    for s in cardinality_order(sys.ground()) {
        if !vars.contains(&var(s)) {
            vars.push(var(s));
        }
    }
    let x = lp_minimize_coordinate_sequence(&lp, &vars, &sys.to_vector(f0))?;
    let max_decrease = minimality_evidence(&lp, &x)?;
    Ok(TightPoint {
        f: sys.from_vector(&x)?,
        order: order.to_vec(),
        max_decrease,
    })
}

fn minimality_evidence(lp: &LpProblem, x: &[Rat]) -> Result<Vec<(SubsetMask, Rat)>> {
    (0..lp.num_vars)
        .map(|v| {
            let s = max_coordinate_decrease(lp, x, v)?.ok_or(Error::UnboundedCoordinate(v))?;
            Ok((SubsetMask(v as u64 + 1), s))
        })
        .collect()
}

/// True iff `f` lies in `P_X` and no single coordinate can be lowered
/// within `P_X` while the others do not rise.
pub fn is_lp_minimal(sys: &PxSystem, f: &SetFunction) -> Result<bool> {
    if !in_px(sys, f)? {
        return Ok(false);
    }
    let lp = sys.to_lp();
    let x = sys.to_vector(f);
    for v in 0..lp.num_vars {
        match max_coordinate_decrease(&lp, &x, v)? {
            Some(s) if s.is_zero() => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Minimum of `Σ f(B)` over partitions of each subset `U` into nonempty
/// blocks, indexed by `U`.
fn partition_costs(f: &SetFunction) -> Vec<Rat> {
    let n = f.ground().len();
    let size = 1usize << n;
    let mut p = vec![Rat::zero(); size];
    for u in 1..size {
        let low = u & u.wrapping_neg();
        let rest = u ^ low;
        // blocks containing the lowest element of u
        let mut best: Option<Rat> = None;
        let mut sub = rest;
        loop {
            let block = sub | low;
            let cost = f.get(SubsetMask(block as u64)) + &p[u ^ block];
            if best.as_ref().map_or(true, |b| cost < *b) {
                best = Some(cost);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        p[u] = best.expect("at least one block");
    }
    p
}

/// The right-hand side of the tight-point equation at `A`:
/// `sup_ℬ δ(A ∪ ⋃ℬ) − Σ_{B∈ℬ} f(B)`, with `ℬ` ranging over disjoint
/// families outside `A`. Valid for monotone `f`.
fn tight_sup(div: &FiniteDiversity, partition: &[Rat], a: SubsetMask) -> Rat {
    let outside = !a & div.ground().full();
    outside
        .subsets()
        .map(|u| div.get(a | u) - &partition[u.0 as usize])
        .max()
        .expect("the empty family is always available")
}

/// The first `A` at which `f(A)` differs from the supremum, or `None` when
/// `f` is a tight-span point. Non-monotone functions fail at `∅`.
pub fn tight_defect(div: &FiniteDiversity, f: &SetFunction) -> Option<SubsetMask> {
    if !f.ground().same_as(div.ground()) || !f.is_monotone() {
        return Some(SubsetMask::EMPTY);
    }
    let partition = partition_costs(f);
    div.ground()
        .subsets()
        .find(|a| *f.get(*a) != tight_sup(div, &partition, *a))
}

/// Checks `f(A) = sup_ℬ {δ(A ∪ ⋃ℬ) − Σ_{B∈ℬ} f(B)}` for every `A`.
/// Tight points are monotone, so non-monotone `f` is rejected first, after
/// which disjoint families suffice.
pub fn is_tight_point(div: &FiniteDiversity, f: &SetFunction) -> bool {
    tight_defect(div, f).is_none()
}

/// `δ_T(F)`: the maximum over pairwise disjoint, possibly empty sets
/// `A_f` of `δ(⋃ A_f) − Σ f(A_f)`.
pub fn delta_t(div: &FiniteDiversity, points: &[SetFunction]) -> Result<Rat> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut uniq: Vec<&SetFunction> = Vec::new();
    for f in points {
        f.same_ground(div.ground())?;
        if !is_tight_point(div, f) {
            return Err(Error::NotTight);
        }
        if !uniq.contains(&f) {
            uniq.push(f);
        }
    }
    let n = div.len();
    let k = uniq.len();
    // Each ground point goes to one of the k points or to none (label k).
    let mut labels = vec![0usize; n];
    let mut best = Rat::zero();
    loop {
        let mut sets = vec![SubsetMask::EMPTY; k];
        for (i, &l) in labels.iter().enumerate() {
            if l < k {
                sets[l] = sets[l].with(i);
            }
        }
        let union = sets.iter().fold(SubsetMask::EMPTY, |u, s| u | *s);
        let cost: Rat = sets.iter().zip(&uniq).map(|(s, f)| f.get(*s)).sum();
        let value = div.get(union) - cost;
        if value > best {
            best = value;
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(best);
            }
            labels[i] += 1;
            if labels[i] <= k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HyperconvexityVerdict<C> {
    Hyperconvex,
    /// No counterexample beats the tolerance.
    HyperconvexWithinTolerance(Rat),
    NotHyperconvex(C),
}

impl<C> HyperconvexityVerdict<C> {
    pub fn is_hyperconvex(&self) -> bool {
        !matches!(self, Self::NotHyperconvex(_))
    }

    pub fn certificate(&self) -> Option<&C> {
        match self {
            Self::NotHyperconvex(c) => Some(c),
            _ => None,
        }
    }
}

/// A point `z` and the set `Y` with `δ({z} ∪ Y) − r(Y) = margin > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiversityWitness {
    pub point: usize,
    pub set: SubsetMask,
    pub margin: Rat,
}

/// A radius function satisfying every family inequality that no point can
/// serve as a center for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiversityCertificate {
    pub r: SetFunction,
    pub witnesses: Vec<DiversityWitness>,
}

impl DiversityCertificate {
    /// Re-checks the certificate against the family system by direct
    /// evaluation.
    pub fn verify(&self, sys: &PxSystem) -> bool {
        let div = sys.base();
        let n = div.len();
        self.r.ground().same_as(div.ground())
            && sys.first_violation(&self.r).is_none()
            && self.witnesses.len() == n
            && self.witnesses.iter().enumerate().all(|(z, w)| {
                w.point == z
                    && !w.set.is_empty()
                    && w.set.is_subset_of(div.ground().full())
                    && div.get(w.set.with(z)) - self.r.get(w.set) == w.margin
                    && w.margin.is_positive()
            })
    }
}

pub type DiversityVerdict = HyperconvexityVerdict<DiversityCertificate>;

pub fn hyperconvexity_certificate(div: &FiniteDiversity) -> Result<DiversityVerdict> {
    hyperconvexity_certificate_capped(div, HYPERCONVEX_CAP)
}

/// Searches witness assignments `z ↦ Y_z` depth first. For each partial
/// assignment the LP maximizes `t` subject to the family inequalities on
/// `r` and `r(Y_z) + t ≤ δ({z} ∪ Y_z)`; branches with optimum `t ≤ 0` are
/// cut. Only sets with `δ({z} ∪ Y) > δ(Y)` can serve, since `r(Y) ≥ δ(Y)`.
pub fn hyperconvexity_certificate_capped(
    div: &FiniteDiversity,
    cap: usize,
) -> Result<DiversityVerdict> {
    let sys = px_constraints_capped(div, cap)?;
    let n = div.len();
    let ground = div.ground();
    let candidates: Vec<Vec<SubsetMask>> = (0..n)
        .map(|z| {
            ground
                .nonempty_subsets()
                .filter(|y| div.get(y.with(z)) > div.get(*y))
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(HyperconvexityVerdict::Hyperconvex);
    }
    let mut lp = sys.to_lp();
    let t = lp.num_vars;
    lp.num_vars += 1;
    lp.objective = Some(Objective::maximize(vec![(t, Rat::one())]));
    let mut chosen = Vec::with_capacity(n);
    let found = search_witnesses(div, &candidates, &mut lp, &mut chosen)?;
    let Some(x) = found else {
        return Ok(HyperconvexityVerdict::Hyperconvex);
    };
    let r = sys.from_vector(&x[..t])?;
    let witnesses = chosen
        .iter()
        .enumerate()
        .map(|(z, &y)| DiversityWitness {
            point: z,
            set: y,
            margin: div.get(y.with(z)) - r.get(y),
        })
        .collect();
    let cert = DiversityCertificate { r, witnesses };
    debug_assert!(cert.verify(&sys));
    Ok(HyperconvexityVerdict::NotHyperconvex(cert))
}

fn search_witnesses(
    div: &FiniteDiversity,
    candidates: &[Vec<SubsetMask>],
    lp: &mut LpProblem,
    chosen: &mut Vec<SubsetMask>,
) -> Result<Option<Vec<Rat>>> {
    let z = chosen.len();
    let t = lp.num_vars - 1;
    for &y in &candidates[z] {
        lp.push(LinConstraint::le(
            vec![(var(y), Rat::one()), (t, Rat::one())],
            div.get(y.with(z)).clone(),
        ));
        chosen.push(y);
        let promising = match lp_solve(lp)? {
            LpOutcome::Optimal { point, value } => {
                if value.is_positive() && z + 1 == candidates.len() {
                    return Ok(Some(point));
                }
                value.is_positive()
            }
            LpOutcome::Unbounded { .. } => true,
            LpOutcome::Infeasible(_) => false,
        };
        if promising && z + 1 < candidates.len() {
            if let Some(found) = search_witnesses(div, candidates, lp, chosen)? {
                return Ok(Some(found));
            }
        }
        chosen.pop();
        lp.constraints.pop();
    }
    Ok(None)
}

/// For each `z`, a point `x` with `d(z, x) − r(x) = margin`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricWitness {
    pub point: usize,
    pub far: usize,
    pub margin: Rat,
}

/// Radii `r` with `r(x) + r(y) ≥ d(x, y)` for all pairs such that every
/// point misses some ball by more than the tolerance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricCertificate {
    pub r: Vec<Rat>,
    pub witnesses: Vec<MetricWitness>,
}

impl MetricCertificate {
    pub fn verify(&self, metric: &FiniteMetric, tolerance: &Rat) -> bool {
        let n = metric.len();
        self.r.len() == n
            && (0..n).all(|x| (x..n).all(|y| &self.r[x] + &self.r[y] >= *metric.dist(x, y)))
            && self.witnesses.len() == n
            && self.witnesses.iter().enumerate().all(|(z, w)| {
                w.point == z
                    && w.far < n
                    && metric.dist(z, w.far) - &self.r[w.far] == w.margin
                    && w.margin > *tolerance
            })
    }
}

pub type MetricVerdict = HyperconvexityVerdict<MetricCertificate>;

/// Decides whether every compatible family of balls has a common point up
/// to `tolerance`.
///
/// It suffices to test extremal `f` (pointwise minimal with
/// `f(x) + f(y) ≥ d(x, y)`): a point `z` is a center within `ε` exactly
/// when `f(z) ≤ ε`. So the space fails iff some extremal `f` has
/// `min f > ε`. Extremal functions are those where every point has a
/// partner `x` with `f(z) + f(x) = d(z, x)`; the search branches on
/// partners and maximizes `min f` by LP, cutting branches at or below `ε`.
pub fn metric_hyperconvexity_certificate(
    metric: &FiniteMetric,
    tolerance: &Rat,
) -> Result<MetricVerdict> {
    if tolerance.is_negative() {
        return Err(Error::InvalidMetric("tolerance must be nonnegative".into()));
    }
    let n = metric.len();
    let pass = || {
        if tolerance.is_zero() || n <= 1 {
            HyperconvexityVerdict::Hyperconvex
        } else {
            HyperconvexityVerdict::HyperconvexWithinTolerance(tolerance.clone())
        }
    };
    if n <= 1 {
        return Ok(pass());
    }
    let t = n;
    let mut lp = LpProblem::new(n + 1);
    for x in 0..n {
        for y in x + 1..n {
            lp.push(LinConstraint::ge(
                vec![(x, Rat::one()), (y, Rat::one())],
                metric.dist(x, y).clone(),
            ));
        }
        lp.push(LinConstraint::ge(vec![(x, Rat::one())], Rat::zero()));
        lp.push(LinConstraint::ge(vec![(x, Rat::one()), (t, -Rat::one())], Rat::zero()));
    }
    lp.objective = Some(Objective::maximize(vec![(t, Rat::one())]));
    let mut covered = vec![false; n];
    let Some(x) = search_partners(metric, tolerance, &mut lp, &mut covered)? else {
        return Ok(pass());
    };
    let r: Vec<Rat> = x[..n].to_vec();
    let witnesses = (0..n)
        .map(|z| {
            let far = (0..n)
                .max_by(|&a, &b| {
                    (metric.dist(z, a) - &r[a])
                        .cmp(&(metric.dist(z, b) - &r[b]))
                        .then(b.cmp(&a))
                })
                .expect("nonempty");
            MetricWitness {
                point: z,
                far,
                margin: metric.dist(z, far) - &r[far],
            }
        })
        .collect();
    let cert = MetricCertificate { r, witnesses };
    debug_assert!(cert.verify(metric, tolerance));
    Ok(HyperconvexityVerdict::NotHyperconvex(cert))
}

fn search_partners(
    metric: &FiniteMetric,
    tolerance: &Rat,
    lp: &mut LpProblem,
    covered: &mut [bool],
) -> Result<Option<Vec<Rat>>> {
    let n = metric.len();
    let Some(z) = covered.iter().position(|c| !c) else {
        return Ok(None);
    };
    for x in (0..n).filter(|&x| x != z) {
        lp.push(LinConstraint::le(
            vec![(z, Rat::one()), (x, Rat::one())],
            metric.dist(z, x).clone(),
        ));
        let was = covered[x];
        covered[z] = true;
        covered[x] = true;
        let done = covered.iter().all(|c| *c);
        if let LpOutcome::Optimal { point, value } = lp_solve(lp)? {
            if value > *tolerance {
                if done {
                    return Ok(Some(point));
                }
                if let Some(found) = search_partners(metric, tolerance, lp, covered)? {
                    return Ok(Some(found));
                }
            }
        }
        covered[z] = false;
        covered[x] = was;
        lp.constraints.pop();
    }
    Ok(None)
}

/// `f(x) + f(y) ≥ d(x, y)` for all `x, y` (so `f ≥ 0`) and
/// `f(x) = max_y (d(x, y) − f(y))` for every `x`.
pub fn isbell_extremal_check(metric: &FiniteMetric, f: &[Rat]) -> bool {
    let n = metric.len();
    if f.len() != n {
        return false;
    }
    let dominates = (0..n).all(|x| (0..n).all(|y| &f[x] + &f[y] >= *metric.dist(x, y)));
    dominates
        && (0..n).all(|x| {
            (0..n).map(|y| metric.dist(x, y) - &f[y]).max().as_ref() == Some(&f[x])
        })
}

/// `h_x` as a point of the metric tight span: `d(x, ·)`.
pub fn kuratowski(metric: &FiniteMetric, x: usize) -> Vec<Rat> {
    (0..metric.len()).map(|y| metric.dist(x, y).clone()).collect()
}

/// `f + bump` on every nonempty set.
pub fn raised(f: &SetFunction, bump: &Rat) -> Result<SetFunction> {
    SetFunction::from_fn(f.ground(), |a| f.get(a) + bump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{counting_diversity, diameter_diversity};
    use crate::rat::{int, rat};

    fn pair_metric(d: Rat) -> FiniteMetric {
        FiniteMetric::from_fn(GroundSet::new(["x", "y"]).unwrap(), |i, j| {
            if i == j {
                int(0)
            } else {
                d.clone()
            }
        })
        .unwrap()
    }

    #[test]
    fn antichain_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| antichains(n).len()).collect();
        assert_eq!(counts, [1, 4, 18, 166, 7579]);
    }

    #[test]
    fn reduced_and_full_systems_agree_on_samples() {
        let div = counting_diversity(3).unwrap();
        let red = px_constraints(&div).unwrap();
        let all = px_constraints_all_families(&div).unwrap();
        assert_eq!(all.len(), 127);
        // every full-system row is implied: for an antichain subfamily the
        // sum is no larger and the union equal, or the row is dominated
        for row in all.rows() {
            let anti: Vec<SubsetMask> = row
                .family
                .iter()
                .copied()
                .filter(|a| !row.family.iter().any(|b| b != a && a.is_subset_of(*b)))
                .collect();
            let r = red.rows().iter().find(|r| r.family == anti).unwrap();
            assert_eq!(r.rhs, row.rhs);
        }
    }

    #[test]
    fn two_point_rows() {
        let div = diameter_diversity(&pair_metric(int(1))).unwrap();
        let sys = px_constraints(&div).unwrap();
        let rows: Vec<(Vec<u64>, Rat)> = sys
            .rows()
            .iter()
            .map(|r| (r.family.iter().map(|s| s.0).collect(), r.rhs.clone()))
            .collect();
        assert_eq!(
            rows,
            vec![
                (vec![1], int(0)),
                (vec![1, 2], int(1)),
                (vec![2], int(0)),
                (vec![3], int(1)),
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let div = counting_diversity(6).unwrap();
        assert_eq!(
            px_constraints(&div).unwrap_err(),
            Error::CapExceeded { size: 6, cap: 5 }
        );
    }

    #[test]
    fn membership() {
        let div = counting_diversity(3).unwrap();
        let sys = px_constraints(&div).unwrap();
        // δ itself fails on disjoint singletons: 0 + 0 < δ({x,y}) = 1.
        assert!(!in_px(&sys, div.table()).unwrap());
        assert!(!in_px(&sys, &SetFunction::zero(div.ground()).unwrap()).unwrap());
        for x in 0..3 {
            assert!(in_px(&sys, &kappa(&div, x).unwrap()).unwrap());
        }
        let other = SetFunction::zero(&GroundSet::new(["p", "q", "r"]).unwrap()).unwrap();
        assert_eq!(in_px(&sys, &other), Err(Error::GroundMismatch));
    }

    #[test]
    fn kappa_values() {
        let div = counting_diversity(3).unwrap();
        let h = kappa(&div, 0).unwrap();
        assert_eq!(h.get(SubsetMask(0b110)), &int(2));
        assert_eq!(h.get(SubsetMask(0b001)), &int(0));
        assert_eq!(h.get(SubsetMask(0b010)), &int(1));
        assert!(kappa(&div, 3).is_err());
    }

    #[test]
    fn kappa_is_tight_and_fixed_by_tighten() {
        let div = counting_diversity(3).unwrap();
        let sys = px_constraints(&div).unwrap();
        for x in 0..3 {
            let h = kappa(&div, x).unwrap();
            assert!(is_tight_point(&div, &h));
            let tp = tighten(&sys, &h, &cardinality_order(div.ground())).unwrap();
            assert_eq!(tp.f, h);
            assert!(tp.max_decrease.iter().all(|(_, s)| s.is_zero()));
            let bumped = raised(&h, &int(1)).unwrap();
            assert!(!is_tight_point(&div, &bumped));
        }
    }

    /// Brute-force minimality oracle for two points: scan a fine grid of
    /// candidate tables dominated by `f0` and keep the minimal ones in P_X.
    fn minimal_grid_points(sys: &PxSystem, f0: &SetFunction) -> Vec<SetFunction> {
        let steps: Vec<Rat> = (0..=8).map(|k| rat(k, 4)).collect();
        let ground = sys.ground().clone();
        let mut feasible = Vec::new();
        for a in &steps {
            for b in &steps {
                for c in &steps {
                    let f = SetFunction::from_values(
                        &ground,
                        vec![int(0), a.clone(), b.clone(), c.clone()],
                    )
                    .unwrap();
                    if f.dominated_by(f0) && sys.first_violation(&f).is_none() {
                        feasible.push(f);
                    }
                }
            }
        }
        feasible
            .iter()
            .filter(|f| {
                !feasible
                    .iter()
                    .any(|g| g != *f && g.dominated_by(f))
            })
            .cloned()
            .collect()
    }

    #[test]
    fn two_point_tighten_matches_oracle() {
        let div = diameter_diversity(&pair_metric(int(1))).unwrap();
        let sys = px_constraints(&div).unwrap();
        let f0 = SetFunction::from_values(div.ground(), vec![int(0), int(1), int(1), int(1)])
            .unwrap();
        let minimal = minimal_grid_points(&sys, &f0);
        for order in [cardinality_order(div.ground()), mask_order(div.ground())] {
            let tp = tighten(&sys, &f0, &order).unwrap();
            assert!(minimal.contains(&tp.f), "{:?}", tp.f);
            assert!(is_tight_point(&div, &tp.f));
            assert_eq!(tp.f.get(SubsetMask(0b01)) + tp.f.get(SubsetMask(0b10)), int(1));
        }
        // lowering {x} first ends at h_x
        let tp = tighten(&sys, &f0, &cardinality_order(div.ground())).unwrap();
        assert_eq!(tp.f, kappa(&div, 0).unwrap());
        let tp = tighten(&sys, &f0, &[SubsetMask(0b10)]).unwrap();
        assert_eq!(tp.f, kappa(&div, 1).unwrap());
    }

    #[test]
    fn tighten_rejects_outside_points() {
        let div = counting_diversity(2).unwrap();
        let sys = px_constraints(&div).unwrap();
        let zero = SetFunction::zero(div.ground()).unwrap();
        assert!(matches!(
            tighten(&sys, &zero, &cardinality_order(div.ground())),
            Err(Error::NotInPx { .. })
        ));
    }

    #[test]
    fn delta_t_basics() {
        let div = counting_diversity(3).unwrap();
        let h: Vec<SetFunction> = (0..3).map(|x| kappa(&div, x).unwrap()).collect();
        assert_eq!(delta_t(&div, &h[..1]).unwrap(), int(0));
        assert_eq!(delta_t(&div, &h[..2]).unwrap(), int(1));
        assert_eq!(delta_t(&div, &h).unwrap(), int(2));
        assert_eq!(delta_t(&div, &[h[0].clone(), h[0].clone()]).unwrap(), int(0));
        assert_eq!(delta_t(&div, &[]), Err(Error::EmptyPointSet));
        assert_eq!(
            delta_t(&div, &[raised(&h[0], &int(1)).unwrap()]),
            Err(Error::NotTight)
        );
    }

    #[test]
    fn diversity_hyperconvexity_small() {
        let one = counting_diversity(1).unwrap();
        assert_eq!(
            hyperconvexity_certificate(&one).unwrap(),
            HyperconvexityVerdict::Hyperconvex
        );
        let two = counting_diversity(2).unwrap();
        let sys = px_constraints(&two).unwrap();
        let v = hyperconvexity_certificate(&two).unwrap();
        let cert = v.certificate().expect("two points have no midpoint");
        assert!(cert.verify(&sys));
        assert_eq!(cert.r.get(SubsetMask(0b01)), &rat(1, 2));
        assert_eq!(cert.r.get(SubsetMask(0b10)), &rat(1, 2));
        let three = counting_diversity(3).unwrap();
        let sys3 = px_constraints(&three).unwrap();
        let v3 = hyperconvexity_certificate(&three).unwrap();
        assert!(v3.certificate().unwrap().verify(&sys3));
    }

    #[test]
    fn metric_hyperconvexity_small() {
        let one = FiniteMetric::from_fn(GroundSet::new(["x"]).unwrap(), |_, _| int(0)).unwrap();
        assert_eq!(
            metric_hyperconvexity_certificate(&one, &int(0)).unwrap(),
            HyperconvexityVerdict::Hyperconvex
        );
        let two = pair_metric(int(1));
        let v = metric_hyperconvexity_certificate(&two, &int(0)).unwrap();
        let cert = v.certificate().unwrap();
        assert!(cert.verify(&two, &int(0)));
        assert_eq!(cert.r, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(
            metric_hyperconvexity_certificate(&two, &rat(1, 2)).unwrap(),
            HyperconvexityVerdict::HyperconvexWithinTolerance(rat(1, 2))
        );
    }

    #[test]
    fn isbell_examples() {
        let g = GroundSet::new(["x", "y", "z"]).unwrap();
        let d = [[0, 3, 5], [3, 0, 4], [5, 4, 0]];
        let m = FiniteMetric::from_fn(g, |i, j| int(d[i][j])).unwrap();
        assert!(isbell_extremal_check(&m, &[int(2), int(1), int(3)]));
        for x in 0..3 {
            assert!(isbell_extremal_check(&m, &kuratowski(&m, x)));
        }
        let two = pair_metric(int(1));
        assert!(!isbell_extremal_check(&two, &[int(1), int(1)]));
    }
}

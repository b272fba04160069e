//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails. All comparisons are exact.
//!
//! The oracles below are written against the definitions directly and do
//! not call the library routine under test.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::Rng;

use divlab::cli::reproduce::{reproduce_ex1, reproduce_noext, reproduce_noext_default};
use divlab::constructions::{
    counting_diversity, diameter_diversity, hypcon_check, restrict, GADGET_HUB, GADGET_LEGS,
};
use divlab::diversity::{Coverage, FiniteDiversity};
use divlab::exactlp::Relation;
use divlab::fixedpoint::{
    brute_force_fixed_points, extend_r, is_nonexpansive_metric, minimal_invariant_descent,
    DescentOptions, DescentOutcome,
};
use divlab::random::{
    bump_one, nearest_point_map, random_diversity, random_metric, random_point_above,
    random_small_diversity, random_subtree, random_tree_diversity, random_tree_metric, seeded,
};
use divlab::rat::{common_denominator, int, rat, scaled_integers, Rat};
use divlab::tightspan::{
    cardinality_order, delta_t, hyperconvexity_certificate, is_lp_minimal, is_tight_point, kappa,
    mask_order, px_constraints, tighten,
};
use divlab::{SetFunction, SubsetMask};

/// Collects failed checks for one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn deadline(&mut self, started: Instant, limit: Duration, what: &str) {
        let took = started.elapsed();
        self.check(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"));
    }
}

fn mask(bits: u64) -> SubsetMask {
    SubsetMask(bits)
}

// ---------------------------------------------------------------- oracles

/// Least cost of covering exactly `U` by a family of nonempty sets, for
/// every `U`. With `r ≥ 0` repeats never help, so this is the minimum of
/// `Σ_{A∈𝒜} r(A)` over families with union `U`.
fn min_cover_costs(r: &SetFunction) -> Vec<Rat> {
    let n = r.ground().len();
    let size = 1usize << n;
    let mut g = vec![Rat::zero(); size];
    for u in 1..size {
        let low = u & u.wrapping_neg();
        let mut best: Option<Rat> = None;
        // A ∋ low, A ⊆ U; the rest of the family covers W with A ∪ W = U.
        let rest = u ^ low;
        let mut sub = rest;
        loop {
            let a = sub | low;
            let outside = u & !a;
            let mut s = a;
            loop {
                let w = outside | s;
                if w != u {
                    let cost = r.get(mask(a as u64)) + &g[w];
                    if best.as_ref().map_or(true, |b| cost < *b) {
                        best = Some(cost);
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & a;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        g[u] = best.expect("A = U is always available");
    }
    g
}

/// `Σ_{A∈𝒜} r(A) ≥ δ(⋃𝒜)` for every family of nonempty subsets.
fn satisfies_family_inequalities(div: &FiniteDiversity, r: &SetFunction) -> bool {
    let nonneg = div.ground().nonempty_subsets().all(|s| !r.get(s).is_negative());
    let g = min_cover_costs(r);
    nonneg && div.ground().nonempty_subsets().all(|u| g[u.0 as usize] >= *div.get(u))
}

/// Minimality in `P_X` decided over all `2^(2^n − 1)` families: `f` is in
/// `P_X` and every nonempty `A` lies in some family whose inequality is
/// tight. Exact on integers scaled by the common denominator.
fn tight_by_all_families(div: &FiniteDiversity, f: &SetFunction) -> bool {
    let n = div.len();
    assert!(n <= 4, "family oracle is exponential in 2^n");
    if !f.get(SubsetMask::EMPTY).is_zero() {
        return false;
    }
    let mut values = div.table().values().to_vec();
    values.extend(f.values().iter().cloned());
    let (ints, _) = scaled_integers(&values).expect("small values");
    let size = 1usize << n;
    let (delta, fv) = ints.split_at(size);
    let sets = size - 1;
    let families = 1usize << sets;
    let mut sum = vec![0i64; families];
    let mut union = vec![0usize; families];
    for fam in 1..families {
        let low = fam.trailing_zeros() as usize;
        let rest = fam & (fam - 1);
        sum[fam] = sum[rest] + fv[low + 1];
        union[fam] = union[rest] | (low + 1);
        if sum[fam] < delta[union[fam]] {
            return false;
        }
    }
    (0..sets).all(|i| (1..families).any(|fam| fam >> i & 1 == 1 && sum[fam] == delta[union[fam]]))
}

/// `δ_T(F) = sup δ(⋃ A_f) − Σ f(A_f)` over arbitrary, possibly
/// overlapping, choices `A_f ⊆ X`.
fn delta_t_by_definition(div: &FiniteDiversity, points: &[&SetFunction]) -> Rat {
    let size = 1u64 << div.len();
    let k = points.len();
    let mut choice = vec![0u64; k];
    let mut best: Option<Rat> = None;
    loop {
        let union = choice.iter().fold(0, |u, c| u | c);
        let cost: Rat = choice.iter().zip(points).map(|(c, f)| f.get(mask(*c)).clone()).sum();
        let value = div.get(mask(union)) - cost;
        if best.as_ref().map_or(true, |b| value > *b) {
            best = Some(value);
        }
        let mut i = 0;
        loop {
            if i == k {
                return best.unwrap();
            }
            choice[i] += 1;
            if choice[i] < size {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Searches radius functions on a grid for a hyperconvexity
/// counterexample, without linear programming. `r(X) = δ(X)` and
/// `δ(A) ≤ r(A) ≤ δ(X)` lose nothing: raising `r` above `δ(X)` or keeping
/// `r(X)` above `δ(X)` never helps a counterexample. Values are integers in
/// units of `1/q`.
fn grid_counterexample(div: &FiniteDiversity, q: i64) -> Option<Vec<i64>> {
    let n = div.len();
    let full = div.ground().full();
    let size = 1usize << n;
    let scaled = |v: &Rat| -> i64 {
        let s = v * int(q);
        assert!(s.is_integer(), "grid must contain every value");
        i64::try_from(s.to_integer()).unwrap()
    };
    let delta: Vec<i64> = (0..size).map(|m| scaled(div.get(mask(m as u64)))).collect();
    // Position 0 is X, fixed; the rest by cardinality.
    let mut order = vec![full];
    order.extend(cardinality_order(div.ground()).into_iter().filter(|s| *s != full));
    let pos_of = |s: SubsetMask| order.iter().position(|t| *t == s).unwrap();
    let sets = order.len();
    // Families over positions, bucketed by their last position.
    let mut by_last: Vec<Vec<(Vec<usize>, usize)>> = vec![Vec::new(); sets];
    for fam in 1u64..(1 << sets) {
        let members: Vec<usize> = (0..sets).filter(|i| fam >> i & 1 == 1).collect();
        let union = members.iter().fold(0usize, |u, &i| u | order[i].0 as usize);
        let last = *members.last().unwrap();
        by_last[last].push((members, union));
    }
    let top = delta[full.0 as usize];
    let mut r = vec![0i64; sets];
    r[0] = top;
    let centers_fail = |r: &[i64]| {
        (0..n).all(|z| {
            div.ground()
                .nonempty_subsets()
                .any(|y| delta[y.with(z).0 as usize] > r[pos_of(y)])
        })
    };
    fn dfs(
        p: usize,
        r: &mut Vec<i64>,
        order: &[SubsetMask],
        delta: &[i64],
        top: i64,
        by_last: &[Vec<(Vec<usize>, usize)>],
        done: &dyn Fn(&[i64]) -> bool,
    ) -> bool {
        let ok = by_last[p - 1]
            .iter()
            .all(|(members, union)| members.iter().map(|&i| r[i]).sum::<i64>() >= delta[*union]);
        if !ok {
            return false;
        }
        if p == order.len() {
            return done(r);
        }
        for v in delta[order[p].0 as usize]..=top {
            r[p] = v;
            if dfs(p + 1, r, order, delta, top, by_last, done) {
                return true;
            }
        }
        false
    }
    dfs(1, &mut r, &order, &delta, top, &by_last, &centers_fail).then_some(r).map(|r| {
        let mut out = vec![0i64; size];
        for (i, s) in order.iter().enumerate() {
            out[s.0 as usize] = r[i];
        }
        out
    })
}

/// Position on the star: `None` for θ, else `(leg, distance from θ)`.
fn star_position(label: &str) -> Option<(usize, Rat)> {
    if label == GADGET_HUB {
        return None;
    }
    let (leg, rest) = label.split_at(1);
    let leg = GADGET_LEGS.iter().position(|l| *l == leg).expect("leg label");
    let t = match rest.strip_prefix('@') {
        None => int(1),
        Some(frac) => {
            let (p, q) = frac.split_once('/').unwrap_or((frac, "1"));
            rat(p.parse().unwrap(), q.parse().unwrap())
        }
    };
    Some((leg, t))
}

fn star_distance(a: &Option<(usize, Rat)>, b: &Option<(usize, Rat)>) -> Rat {
    match (a, b) {
        (None, None) => int(0),
        (None, Some((_, t))) | (Some((_, t)), None) => t.clone(),
        (Some((l, t)), Some((m, s))) if l == m => (t - s).abs(),
        (Some((_, t)), Some((_, s))) => t + s,
    }
}

// ------------------------------------------------------------- criteria

fn ex1(c: &mut Checks) -> String {
    let started = Instant::now();
    let report = reproduce_ex1().unwrap();
    let cert = report.certificate.as_ref();
    c.check(cert.is_some(), || "no infeasibility certificate".into());
    let Some(cert) = cert else { return String::new() };

    // Recombine the rows by hand: every row as `g·f ≥ c`.
    let lp = &report.lp;
    let mut coeffs = vec![Rat::zero(); lp.num_vars];
    let (mut rhs, mut caps) = (Rat::zero(), Rat::zero());
    let family_rows = report.system.len();
    for (i, (y, row)) in cert.multipliers.iter().zip(&lp.constraints).enumerate() {
        let sign = match row.relation {
            Relation::Ge => int(1),
            Relation::Le => int(-1),
            Relation::Eq => unreachable!("no equality rows"),
        };
        c.check(!y.is_negative(), || format!("negative multiplier on row {i}"));
        for (j, a) in &row.coeffs {
            coeffs[*j] += y * a * &sign;
        }
        rhs += y * &row.rhs * &sign;
        if i >= family_rows {
            caps += y * &row.rhs;
        }
    }
    c.check(coeffs.iter().all(Zero::is_zero), || "recombined row has a nonzero coefficient".into());
    c.check(rhs == rat(1, 2), || format!("recombination gives 0 >= {rhs}, expected 1/2"));
    c.check(caps == rat(3, 2), || format!("caps bound the singleton sum by {caps}, expected 3/2"));
    // δ(X) for the counting diversity on three points.
    let required = int(3 - 1);
    c.check(
        report.system.rows()[report.binding_row].rhs == required && caps < required,
        || "binding row is not f(x)+f(y)+f(z) >= 2".into(),
    );
    c.check(cert.multipliers[report.binding_row] == int(1), || "certificate not normalized".into());
    for (u, v, d) in &report.pair_distances {
        // δ({u, v}) = |{u, v}| − 1 = 1 = 1/2 + 1/2.
        c.check(*d == int(1) && *d == rat(1, 2) + rat(1, 2), || format!("d_T(h_{u}, h_{v}) = {d}"));
    }
    c.check(report.pair_distances.len() == 3, || "expected three pairs".into());
    let cli = divlab::cli::run(["divlab", "reproduce-ex1"]);
    c.check(cli.code == 0, || format!("reproduce-ex1 exited {}", cli.code));
    c.check(cli.stdout.contains("result: PASS"), || "reproduce-ex1 did not report PASS".into());
    c.deadline(started, Duration::from_secs(1), "ex1 reproduction");
    format!("3/2 < 2 with certificate, 3 pairs at 1, {:.2?}", started.elapsed())
}

fn noext_checks(c: &mut Checks, k: usize, report: &divlab::cli::reproduce::NoextReport) {
    let g = report.ground().clone();
    let pos: Vec<_> = g.names().iter().map(|l| star_position(l)).collect();
    // Diameter of three leaves two units apart; the three unit legs.
    let (want_abc, want_image) = (int(1) + int(1), int(1) + int(1) + int(1));
    c.check(report.delta_abc == want_abc, || format!("grid {k}: δ(abc) = {}", report.delta_abc));
    c.check(report.delta_image == want_image, || format!("grid {k}: δ(T abc) = {}", report.delta_image));
    let map = &report.gadget.map;
    let metric = divlab::diversity::induced_metric(&report.gadget.diversity);
    let n = g.len();
    let mut pairs = 0;
    for x in 0..n {
        // T swaps legs a↔d, b↔e, c↔f at the same height.
        let swapped = pos[x].as_ref().map(|(l, t)| ((l + 3) % 6, t.clone()));
        c.check(pos[map.image(x)] == swapped, || format!("grid {k}: T({}) misplaced", g.name(x)));
        for y in x + 1..n {
            pairs += 1;
            let want = star_distance(&pos[x], &pos[y]);
            c.check(*metric.dist(x, y) == want, || {
                format!("grid {k}: d({}, {}) = {}, expected {want}", g.name(x), g.name(y), metric.dist(x, y))
            });
            c.check(*metric.dist(map.image(x), map.image(y)) == want, || {
                format!("grid {k}: T moves the pair ({}, {})", g.name(x), g.name(y))
            });
        }
    }
    c.check(report.isometry_pairs == pairs && report.isometry_violations.is_empty(), || {
        format!("grid {k}: isometry {} pairs, {} violations", report.isometry_pairs, report.isometry_violations.len())
    });
    let abc = SubsetMask::from_indices(["a", "b", "c"].iter().map(|l| g.index_of(l).unwrap()));
    let witness = report.expansion.as_ref().map(|e| e.set);
    c.check(witness == Some(abc), || format!("grid {k}: expansion witness {witness:?}"));
    c.check(report.axioms.is_empty(), || format!("grid {k}: axiom violations {:?}", report.axioms.first_problem(&g)));
    c.check(report.passed(), || format!("grid {k}: report does not pass"));
}

fn noext(c: &mut Checks) -> String {
    let one = reproduce_noext_default(1, 0).unwrap();
    noext_checks(c, 1, &one);
    c.check(one.axioms.coverage == Coverage::Exhaustive, || "grid 1 axioms not exhaustive".into());

    // Independent exhaustive triangle scan on the grid-1 table.
    let table = FiniteDiversity::materialize(&one.gadget.diversity).unwrap();
    let size = 1u64 << table.len();
    let mut bad = 0u64;
    for a in 0..size {
        let zero_ok = table.get(mask(a)).is_zero() == (a.count_ones() <= 1);
        if !zero_ok {
            bad += 1;
        }
        for b in 1..size {
            let ab = table.get(mask(a | b));
            for cc in 0..size {
                if *table.get(mask(a | cc)) > ab + table.get(mask(b | cc)) {
                    bad += 1;
                }
            }
        }
    }
    c.check(bad == 0, || format!("grid 1: {bad} axiom failures by direct scan"));

    let started = Instant::now();
    let four = reproduce_noext_default(4, 0).unwrap();
    let took = started.elapsed();
    noext_checks(c, 4, &four);
    match four.axioms.coverage {
        Coverage::Sampled { triples, .. } => {
            c.check(triples >= 100_000, || format!("grid 4 sampled only {triples} triples"))
        }
        ref other => c.check(false, || format!("grid 4 coverage {other:?}")),
    }
    c.deadline(started, Duration::from_secs(30), "grid 4 reproduction");

    for grid in ["1", "4"] {
        let cli = divlab::cli::run(["divlab", "reproduce-noext", "--grid", grid]);
        c.check(cli.code == 0 && cli.stdout.contains("result: PASS"), || {
            format!("reproduce-noext --grid {grid} exited {}", cli.code)
        });
    }
    // A second sampling seed must agree.
    let reseeded = reproduce_noext(4, 7, 100_000).unwrap();
    c.check(reseeded.passed(), || "grid 4 fails under seed 7".into());
    format!("3 > 2 at grids 1 and 4, {} isometric pairs at grid 4, grid 4 in {took:.2?}", four.isometry_pairs)
}

/// `(|A| − 1)·δ(A) ≤ Σ_{pairs in A} δ(pair)` by direct evaluation.
fn hypcon_violations(div: &FiniteDiversity) -> Vec<(SubsetMask, Rat, Rat)> {
    let n = div.len();
    let mut out = Vec::new();
    for a in 1u64..(1 << n) {
        let pts: Vec<usize> = (0..n).filter(|i| a >> i & 1 == 1).collect();
        if pts.len() < 2 {
            continue;
        }
        let lhs = div.get(mask(a)) * int(pts.len() as i64 - 1);
        let mut rhs = Rat::zero();
        for (i, x) in pts.iter().enumerate() {
            for y in &pts[i + 1..] {
                rhs += div.get(mask((1 << x) | (1 << y)));
            }
        }
        if lhs > rhs {
            out.push((mask(a), lhs, rhs));
        }
    }
    out
}

fn hypcon(c: &mut Checks) -> String {
    let started = Instant::now();
    let mut rng = seeded(3);
    for i in 0..100 {
        let n = 1 + i % 6;
        let metric = random_metric(&mut rng, n, 6, 3).unwrap();
        let div = diameter_diversity(&metric).unwrap();
        let report = hypcon_check(&div);
        c.check(report.holds() && hypcon_violations(&div).is_empty(), || {
            format!("metric {i} (n = {n}): {:?}", report.violations)
        });
    }
    for i in 0..100 {
        let div = random_tree_diversity(&mut rng, 8).unwrap();
        c.check(div.len() <= 8, || format!("tree {i} has {} marks", div.len()));
        let report = hypcon_check(&div);
        c.check(report.holds() && hypcon_violations(&div).is_empty(), || {
            format!("tree {i}: {:?}", report.violations)
        });
    }
    let d3 = counting_diversity(3).unwrap();
    let report = hypcon_check(&d3);
    // (3 − 1)·2 = 4 against three pairs at distance 1.
    let expected = vec![(mask(0b111), int(4), int(3))];
    let got: Vec<_> = report.violations.iter().map(|v| (v.set, v.lhs.clone(), v.rhs.clone())).collect();
    c.check(got == expected && hypcon_violations(&d3) == expected, || format!("counting(3): {got:?}"));
    c.deadline(started, Duration::from_secs(60), "hypcon suite");
    format!("200 random instances clean, counting(3) gives 4 > 3, {:.2?}", started.elapsed())
}

/// The instance set shared by the tight-span criteria.
struct TightInstance {
    div: FiniteDiversity,
    kappas: Vec<SetFunction>,
    /// κ images and every tighten output.
    tight: Vec<SetFunction>,
}

fn tight_instances(c: &mut Checks) -> Vec<TightInstance> {
    let mut rng = seeded(4);
    let mut out = Vec::new();
    let mut perturbed = 0;
    for i in 0..50 {
        let n = [2, 3, 4, 4][i % 4];
        let div = random_diversity(&mut rng, n).unwrap();
        let sys = px_constraints(&div).unwrap();
        let kappas: Vec<SetFunction> = (0..n).map(|x| kappa(&div, x).unwrap()).collect();
        let mut tight = kappas.clone();
        let agree = |c: &mut Checks, f: &SetFunction, what: &str| {
            let by_equation = is_tight_point(&div, f);
            let by_lp = is_lp_minimal(&sys, f).unwrap();
            let by_families = tight_by_all_families(&div, f);
            c.check(by_equation == by_lp && by_lp == by_families, || {
                format!("instance {i}, {what}: equation {by_equation}, LP {by_lp}, families {by_families}")
            });
            by_equation
        };
        for (x, h) in kappas.iter().enumerate() {
            let ok = agree(c, h, "κ image");
            c.check(ok, || format!("instance {i}: κ({x}) not tight"));
        }
        for order in [cardinality_order(div.ground()), mask_order(div.ground())] {
            let f0 = random_point_above(&mut rng, &kappas).unwrap();
            agree(c, &f0, "tighten input");
            let t = tighten(&sys, &f0, &order).unwrap();
            c.check(t.f.dominated_by(&f0), || format!("instance {i}: tighten rose above its input"));
            let ok = agree(c, &t.f, "tighten output");
            c.check(ok, || format!("instance {i}: tighten output not tight"));
            tight.push(t.f);
        }
        let (bumped, set) = bump_one(&mut rng, &kappas[i % n]).unwrap();
        let ok = agree(c, &bumped, "perturbed κ image");
        c.check(!ok, || format!("instance {i}: κ raised at {set:?} still tight"));
        perturbed += 1;
        out.push(TightInstance { div, kappas, tight });
    }
    c.check(perturbed == 50, || "expected 50 perturbations".into());
    out
}

fn characterization(c: &mut Checks, instances: &mut Option<Vec<TightInstance>>) -> String {
    let started = Instant::now();
    let built = tight_instances(c);
    let points: usize = built.iter().map(|t| t.tight.len()).sum();
    *instances = Some(built);
    c.deadline(started, Duration::from_secs(120), "characterization suite");
    format!("{points} tight points, 50 perturbations rejected, {:.2?}", started.elapsed())
}

fn embedding(c: &mut Checks, instances: &Option<Vec<TightInstance>>) -> String {
    let Some(instances) = instances else {
        c.check(false, || "instance set unavailable".into());
        return String::new();
    };
    let mut evaluations = 0;
    for (i, inst) in instances.iter().enumerate() {
        let div = &inst.div;
        for a in div.ground().nonempty_subsets() {
            let pts: Vec<SetFunction> = a.iter().map(|x| inst.kappas[x].clone()).collect();
            let got = delta_t(div, &pts).unwrap();
            c.check(got == *div.get(a), || format!("instance {i}: δ_T(κ{a:?}) = {got}, δ = {}", div.get(a)));
            if pts.len() <= 2 {
                let refs: Vec<&SetFunction> = pts.iter().collect();
                let def = delta_t_by_definition(div, &refs);
                c.check(def == got, || format!("instance {i}: δ_T(κ{a:?}) by definition {def}"));
            }
            evaluations += 1;
        }
        for f in &inst.tight {
            for a in div.ground().subsets() {
                let mut pts: Vec<SetFunction> = a.iter().map(|x| inst.kappas[x].clone()).collect();
                pts.push(f.clone());
                let got = delta_t(div, &pts).unwrap();
                c.check(got == *f.get(a), || format!("instance {i}: δ_T(κ{a:?} ∪ f) = {got}, f = {}", f.get(a)));
                if pts.len() <= 2 {
                    let refs: Vec<&SetFunction> = pts.iter().collect();
                    let def = delta_t_by_definition(div, &refs);
                    c.check(def == got, || format!("instance {i}: δ_T(κ{a:?} ∪ f) by definition {def}"));
                }
                evaluations += 1;
            }
        }
    }
    format!("{evaluations} identities")
}

fn hyperconvexity(c: &mut Checks) -> String {
    let mut rng = seeded(6);
    let mut not_hc = 0;
    for i in 0..30 {
        let n = if i < 3 { 1 } else if i < 12 { 2 } else { 3 };
        let div = random_small_diversity(&mut rng, n, 8, 4).unwrap();
        let denom = common_denominator(div.table().values());
        let l = i64::try_from(denom).unwrap();
        c.check(4 % l == 0, || format!("instance {i}: denominator {l}"));
        let oracle = grid_counterexample(&div, 2 * l).or_else(|| grid_counterexample(&div, 4 * l));
        let verdict = hyperconvexity_certificate(&div).unwrap();
        c.check(verdict.is_hyperconvex() == oracle.is_none(), || {
            format!("instance {i} (n = {n}): library {}, grid {}", verdict.is_hyperconvex(), oracle.is_none())
        });
        if let Some(cert) = verdict.certificate() {
            not_hc += 1;
            c.check(satisfies_family_inequalities(&div, &cert.r), || {
                format!("instance {i}: certificate radius breaks a family inequality")
            });
            c.check(cert.r.get(SubsetMask::EMPTY).is_zero(), || format!("instance {i}: r(∅) ≠ 0"));
            let centers_fail = (0..n).all(|z| {
                cert.witnesses.iter().any(|w| {
                    w.point == z
                        && !w.set.is_empty()
                        && *div.get(w.set.with(z)) > *cert.r.get(w.set)
                        && div.get(w.set.with(z)) - cert.r.get(w.set) == w.margin
                })
            });
            c.check(centers_fail, || format!("instance {i}: some point is a center"));
            c.check(cert.verify(&px_constraints(&div).unwrap()), || format!("instance {i}: verify() rejects"));
        }
    }
    format!("30 instances agree, {not_hc} certificates re-verified")
}

fn descent(c: &mut Checks) -> String {
    let mut rng = seeded(7);
    let mut steps = 0;
    let mut stuck = 0;
    for i in 0..30 {
        let nodes = 2 + i % 7;
        let inst = random_tree_metric(&mut rng, nodes).unwrap();
        let metric = &inst.metric;
        let div = diameter_diversity(metric).unwrap();
        let target = random_subtree(&mut rng, &inst.tree);
        let map = nearest_point_map(metric, target).unwrap();
        let n = metric.len();
        let nonexpansive = (0..n).all(|x| (0..n).all(|y| metric.dist(map.image(x), map.image(y)) <= metric.dist(x, y)));
        c.check(nonexpansive && is_nonexpansive_metric(&map, metric), || format!("instance {i}: map expands"));
        let fixed: Vec<usize> = (0..n).filter(|&x| map.image(x) == x).collect();
        c.check(!fixed.is_empty() && fixed == brute_force_fixed_points(&map), || {
            format!("instance {i}: fixed points {fixed:?}")
        });
        let outcome = minimal_invariant_descent(&div, &map, div.ground().full(), &DescentOptions::default()).unwrap();
        let trace = outcome.trace();
        let mut prev = div.ground().full();
        for (s, step) in trace.iter().enumerate() {
            c.check(step.from() == prev && step.to().is_subset_of(prev) && step.to() != prev, || {
                format!("instance {i}: step {s} does not strictly shrink")
            });
            prev = step.to();
        }
        steps += trace.len();
        match &outcome {
            DescentOutcome::FixedPoint { point, .. } => {
                c.check(fixed.contains(point), || format!("instance {i}: {point} is not fixed"));
            }
            DescentOutcome::StuckMinimalSet { set, .. } => {
                stuck += 1;
                c.check(!fixed.iter().any(|&x| set.contains(x)), || {
                    format!("instance {i}: stuck on {set:?} which holds a fixed point")
                });
            }
            DescentOutcome::ApproxFixedPoint { .. } => {
                c.check(false, || format!("instance {i}: approximate outcome at ε = 0"));
            }
        }
    }
    format!("30 descents, {steps} strict steps, {stuck} stuck")
}

fn extension(c: &mut Checks) -> String {
    let mut rng = seeded(8);
    let mut tightened = 0;
    for i in 0..50 {
        let n = 2 + i % 4;
        let div = random_diversity(&mut rng, n).unwrap();
        let y = SubsetMask(rng.gen_range(1..(1u64 << n)));
        let sub = restrict(&div, y).unwrap();
        let kappas: Vec<SetFunction> = (0..sub.len()).map(|x| kappa(&sub, x).unwrap()).collect();
        let mut r = random_point_above(&mut rng, &kappas).unwrap();
        if i % 2 == 0 && sub.len() <= 4 {
            // Tight radii sit on the boundary of the constraint set.
            let sys = px_constraints(&sub).unwrap();
            r = tighten(&sys, &r, &cardinality_order(sub.ground())).unwrap().f;
            tightened += 1;
        }
        c.check(satisfies_family_inequalities(&sub, &r), || format!("triple {i}: input radius invalid"));
        let ext = extend_r(&div, y, &r).unwrap();
        c.check(satisfies_family_inequalities(&div, &ext), || {
            format!("triple {i} (n = {n}, Y = {y:?}): extension breaks a family inequality")
        });
        let idx: Vec<usize> = y.iter().collect();
        for s in sub.ground().subsets() {
            let full = SubsetMask::from_indices(s.iter().map(|k| idx[k]));
            c.check(ext.get(full) == r.get(s), || format!("triple {i}: extension changes r on {full:?}"));
        }
        c.check(ext.get(SubsetMask::EMPTY).is_zero(), || format!("triple {i}: r(∅) ≠ 0"));
    }
    format!("50 extensions valid, {tightened} from tight radii")
}

// ------------------------------------------------------------------ main

fn main() {
    let mut instances = None;
    let mut all_ok = true;
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut(&mut Checks) -> String| {
        let mut c = Checks::default();
        let started = Instant::now();
        let summary = catch_unwind(AssertUnwindSafe(|| f(&mut c)));
        let took = started.elapsed();
        let (ok, detail) = match summary {
            Ok(s) if c.failures.is_empty() => (true, s),
            Ok(_) => (false, format!("{} of {} checks failed: {}", c.failures.len(), c.count, c.failures[..c.failures.len().min(3)].join("; "))),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        all_ok &= ok;
        println!(
            "criterion {id} {name}: {} ({} checks, {took:.2?}) {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.count
        );
    };
    run(1, "counting-diversity infeasibility", &mut ex1);
    run(2, "glued star counterexample", &mut noext);
    run(3, "hypcon property suite", &mut hypcon);
    run(4, "tight-span characterization", &mut |c| characterization(c, &mut instances));
    run(5, "embedding and evaluation identities", &mut |c| embedding(c, &instances));
    run(6, "hyperconvexity oracle agreement", &mut hyperconvexity);
    run(7, "fixed-point descent", &mut descent);
    run(8, "radius extension", &mut extension);
    if !all_ok {
        std::process::exit(1);
    }
}

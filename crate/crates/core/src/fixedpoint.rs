//! Self-maps, nonexpansiveness, radius extension and fixed-point descent.

use num_traits::{Signed, Zero};

use crate::constructions::restrict;
use crate::diversity::{induced_metric, Diversity, FiniteDiversity};
use crate::error::{Error, Result};
use crate::metric::{ball_hull, chebyshev_radius, is_admissible, FiniteMetric};
use crate::rat::{fmt_rat, int, Rat};
use crate::sets::{GroundSet, SetFunction, SubsetMask};
use crate::tightspan::px_constraints;

/// A total map from a ground set to itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfMap {
    ground: GroundSet,
    image: Vec<usize>,
}

impl SelfMap {
    pub fn new(ground: GroundSet, image: Vec<usize>) -> Result<Self> {
        if image.len() != ground.len() {
            return Err(Error::InvalidMap(format!(
                "{} images for {} points",
                image.len(),
                ground.len()
            )));
        }
        if let Some(&bad) = image.iter().find(|&&y| y >= ground.len()) {
            return Err(Error::InvalidMap(format!("image {bad} out of range")));
        }
        Ok(Self { ground, image })
    }

    pub fn identity(ground: &GroundSet) -> Self {
        Self {
            ground: ground.clone(),
            image: (0..ground.len()).collect(),
        }
    }

    pub fn constant(ground: &GroundSet, target: usize) -> Result<Self> {
        ground.check_index(target)?;
        Ok(Self {
            ground: ground.clone(),
            image: vec![target; ground.len()],
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn image(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    /// `T(A) = ⋃_{a∈A} {T(a)}`.
    pub fn apply_set(&self, set: SubsetMask) -> SubsetMask {
        SubsetMask::from_indices(set.iter().map(|a| self.image[a]))
    }

    fn check_ground(&self, other: &GroundSet) -> Result<()> {
        if self.ground.same_as(other) {
            Ok(())
        } else {
            Err(Error::GroundMismatch)
        }
    }
}

/// The first pair `(x, y)`, `x < y`, with `d(Tx, Ty) > d(x, y)`.
pub fn metric_nonexpansive_violation(
    map: &SelfMap,
    metric: &FiniteMetric,
) -> Result<Option<(usize, usize)>> {
    map.check_ground(metric.ground())?;
    let n = metric.len();
    for x in 0..n {
        for y in x + 1..n {
            if metric.dist(map.image(x), map.image(y)) > metric.dist(x, y) {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

/// False also when the ground sets differ.
pub fn is_nonexpansive_metric(map: &SelfMap, metric: &FiniteMetric) -> bool {
    matches!(metric_nonexpansive_violation(map, metric), Ok(None))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiversityExpansion {
    pub set: SubsetMask,
    /// `δ(A)`
    pub before: Rat,
    /// `δ(T(A))`
    pub after: Rat,
}

/// The first `A` in mask order with `δ(T(A)) > δ(A)`.
pub fn diversity_nonexpansive_violation(
    map: &SelfMap,
    div: &dyn Diversity,
) -> Result<Option<DiversityExpansion>> {
    map.check_ground(div.ground())?;
    let n = div.ground().len();
    for bits in 1u64..=SubsetMask::full(n).0 {
        let set = SubsetMask(bits);
        if set.len() < 2 {
            continue;
        }
        let after = div.value(map.apply_set(set));
        let before = div.value(set);
        if after > before {
            return Ok(Some(DiversityExpansion { set, before, after }));
        }
    }
    Ok(None)
}

pub fn is_nonexpansive_diversity(map: &SelfMap, div: &dyn Diversity) -> bool {
    matches!(diversity_nonexpansive_violation(map, div), Ok(None))
}

/// A smallest nonempty `F` with `T(F) = F`. Such sets are unions of cycles
/// of the map, so this is a shortest cycle, the one through the least
/// index among equals. `None` only for an empty ground set.
pub fn diversity_fixed_set_search(map: &SelfMap) -> Option<SubsetMask> {
    let n = map.ground().len();
    let mut best: Option<SubsetMask> = None;
    let mut on_cycle = vec![false; n];
    for start in 0..n {
        // After n steps every orbit sits on its cycle.
        let mut x = start;
        for _ in 0..n {
            x = map.image(x);
        }
        if on_cycle[x] {
            continue;
        }
        let mut cycle = SubsetMask::singleton(x);
        let mut y = map.image(x);
        while y != x {
            cycle = cycle.with(y);
            y = map.image(y);
        }
        for c in cycle.iter() {
            on_cycle[c] = true;
        }
        let better = match best {
            None => true,
            Some(b) => (cycle.len(), cycle.first()) < (b.len(), b.first()),
        };
        if better {
            best = Some(cycle);
        }
    }
    best
}

pub fn brute_force_fixed_points(map: &SelfMap) -> Vec<usize> {
    (0..map.ground().len())
        .filter(|&x| map.image(x) == x)
        .collect()
}

/// Checks the family inequality `δ(⋃𝒜) ≤ Σ_{A∈𝒜} r(A)` for `r` on the
/// subsets of `sub`, whose ground set must list the points of `sub` in
/// order.
fn check_radius_function(div: &FiniteDiversity, sub: SubsetMask, r: &SetFunction) -> Result<()> {
    if sub.is_empty() {
        return Err(Error::EmptySet);
    }
    let restricted = restrict(div, sub)?;
    if r.ground().names() != restricted.ground().names() {
        return Err(Error::GroundMismatch);
    }
    let sys = px_constraints(&restricted)?;
    match sys.first_violation(r) {
        None => Ok(()),
        Some(row) => Err(Error::RadiusFamilyViolated {
            family: restricted.ground().format_family(&row.family),
            sum: fmt_rat(&row.sum(r)),
            rhs: fmt_rat(&row.rhs),
        }),
    }
}

/// Maps a subset of the full ground set to the restricted ground of `sub`.
fn to_sub(sub: SubsetMask, set: SubsetMask) -> SubsetMask {
    let idx: Vec<usize> = sub.iter().collect();
    SubsetMask::from_indices(
        idx.iter()
            .enumerate()
            .filter(|(_, &i)| set.contains(i))
            .map(|(k, _)| k),
    )
}

/// Extends `r` from the subsets of `Y` to all subsets:
/// `r(A) = r(A∩Y) + Σ_{a∈A∖Y} r_a(Y)` with `r_a(Y) = max_{y∈Y} d(a, y)`.
/// The input must satisfy the family inequality on the subsets of `Y`.
pub fn extend_r(div: &FiniteDiversity, y: SubsetMask, r: &SetFunction) -> Result<SetFunction> {
    check_radius_function(div, y, r)?;
    let metric = induced_metric(div);
    let n = div.len();
    let radius: Vec<Rat> = (0..n)
        .map(|a| chebyshev_radius(&metric, a, y))
        .collect::<Result<_>>()?;
    SetFunction::from_fn(div.ground(), |a| {
        let inside = r.get(to_sub(y, a & y)).clone();
        (a - y).iter().fold(inside, |acc, p| acc + &radius[p])
    })
}

/// `Y = {x : δ(A ∪ {x}) ≤ r(A) for every nonempty A ⊆ Z}`. May be empty on
/// a finite carrier.
pub fn prophyper_set(div: &FiniteDiversity, z: SubsetMask, r: &SetFunction) -> Result<SubsetMask> {
    check_radius_function(div, z, r)?;
    let n = div.len();
    Ok(SubsetMask::from_indices((0..n).filter(|&x| {
        z.subsets()
            .filter(|a| !a.is_empty())
            .all(|a| div.get(a.with(x)) <= r.get(to_sub(z, a)))
    })))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalStructure {
    /// `max δ(S)/|S|` over `S ⊆ A`, `|S| ≥ 2`.
    pub d: Rat,
    pub size: usize,
    /// Attaining set; ties go to smaller cardinality, then smaller mask.
    pub subset: SubsetMask,
}

pub fn normal_structure_d(div: &FiniteDiversity, set: SubsetMask) -> Result<NormalStructure> {
    if set.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: set.len(),
        });
    }
    let mut best: Option<NormalStructure> = None;
    for s in set.subsets().filter(|s| s.len() >= 2) {
        let d = div.get(s) / int(s.len() as i64);
        let better = match &best {
            None => true,
            Some(b) => d > b.d || (d == b.d && (s.len(), s.0) < (b.size, b.subset.0)),
        };
        if better {
            best = Some(NormalStructure {
                d,
                size: s.len(),
                subset: s,
            });
        }
    }
    Ok(best.expect("at least one pair"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentOptions {
    /// Largest displacement `d(Tx, x)` accepted by the terminal scan.
    pub epsilon: Rat,
    /// Scan the terminal set for (approximate) fixed points when the
    /// shrinking step makes no progress.
    pub terminal_scan: bool,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            epsilon: Rat::zero(),
            terminal_scan: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DescentStep {
    /// `A ← B(T(A))`.
    Hull { from: SubsetMask, to: SubsetMask },
    /// `A ← A ∩ ⋂_{a∈A} B̄(a, d)`.
    Shrink {
        from: SubsetMask,
        d: Rat,
        attaining: SubsetMask,
        /// Chebyshev radii `r_x(A)` of the set being shrunk.
        radii: Vec<Rat>,
        to: SubsetMask,
    },
}

impl DescentStep {
    pub fn from(&self) -> SubsetMask {
        match self {
            Self::Hull { from, .. } | Self::Shrink { from, .. } => *from,
        }
    }

    pub fn to(&self) -> SubsetMask {
        match self {
            Self::Hull { to, .. } | Self::Shrink { to, .. } => *to,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The descent reached a single point.
    Collapsed,
    /// The shrinking step stalled and the terminal set was scanned.
    Scanned,
}

/// Why a shrinking step could not continue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stall {
    /// `A′ = ∅`.
    Empty,
    /// `A′ = A`.
    NoProgress,
    /// `A′` is not mapped into itself.
    NotInvariant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DescentOutcome {
    FixedPoint {
        point: usize,
        via: Termination,
        trace: Vec<DescentStep>,
    },
    ApproxFixedPoint {
        point: usize,
        displacement: Rat,
        set: SubsetMask,
        trace: Vec<DescentStep>,
    },
    StuckMinimalSet {
        set: SubsetMask,
        d: Rat,
        stall: Stall,
        trace: Vec<DescentStep>,
    },
}

impl DescentOutcome {
    pub fn trace(&self) -> &[DescentStep] {
        match self {
            Self::FixedPoint { trace, .. }
            | Self::ApproxFixedPoint { trace, .. }
            | Self::StuckMinimalSet { trace, .. } => trace,
        }
    }

    pub fn fixed_point(&self) -> Option<usize> {
        match self {
            Self::FixedPoint { point, .. } => Some(*point),
            _ => None,
        }
    }
}

/// Descends from an invariant admissible `start` through admissible
/// invariant sets: shrink to `B(T(A))` until stable, then cut `A` to the
/// points within `d` of all of `A`, where `d` is the normal-structure
/// quantity. Balls are taken in the induced metric.
pub fn minimal_invariant_descent(
    div: &FiniteDiversity,
    map: &SelfMap,
    start: SubsetMask,
    opts: &DescentOptions,
) -> Result<DescentOutcome> {
    map.check_ground(div.ground())?;
    if start.is_empty() {
        return Err(Error::EmptySet);
    }
    let metric = induced_metric(div);
    if !map.apply_set(start).is_subset_of(start) {
        return Err(Error::NotInvariant);
    }
    if !is_admissible(&metric, start)? {
        return Err(Error::NotAdmissible);
    }
    let mut trace = Vec::new();
    let mut a = start;
    loop {
        loop {
            let next = ball_hull(&metric, map.apply_set(a))?;
            if next == a {
                break;
            }
            trace.push(DescentStep::Hull { from: a, to: next });
            a = next;
        }
        if a.len() == 1 {
            let point = a.first().expect("singleton");
            debug_assert_eq!(map.image(point), point);
            return Ok(DescentOutcome::FixedPoint {
                point,
                via: Termination::Collapsed,
                trace,
            });
        }
        let ns = normal_structure_d(div, a)?;
        let next = SubsetMask::from_indices(
            a.iter()
                .filter(|&x| a.iter().all(|y| metric.dist(x, y) <= &ns.d)),
        );
        let stall = if next.is_empty() {
            Some(Stall::Empty)
        } else if next == a {
            Some(Stall::NoProgress)
        } else if !map.apply_set(next).is_subset_of(next) {
            Some(Stall::NotInvariant)
        } else {
            None
        };
        if let Some(stall) = stall {
            return Ok(terminal(&metric, map, a, ns.d, stall, opts, trace));
        }
        let radii = (0..metric.len())
            .map(|x| chebyshev_radius(&metric, x, a))
            .collect::<Result<_>>()?;
        trace.push(DescentStep::Shrink {
            from: a,
            d: ns.d,
            attaining: ns.subset,
            radii,
            to: next,
        });
        a = next;
    }
}

fn terminal(
    metric: &FiniteMetric,
    map: &SelfMap,
    set: SubsetMask,
    d: Rat,
    stall: Stall,
    opts: &DescentOptions,
    trace: Vec<DescentStep>,
) -> DescentOutcome {
    let best = opts
        .terminal_scan
        .then(|| {
            set.iter()
                .map(|x| (metric.dist(x, map.image(x)).clone(), x))
                .min()
        })
        .flatten();
    match best {
        Some((disp, point)) if disp.is_zero() => DescentOutcome::FixedPoint {
            point,
            via: Termination::Scanned,
            trace,
        },
        Some((displacement, point)) if !displacement.is_negative() && displacement <= opts.epsilon => {
            DescentOutcome::ApproxFixedPoint {
                point,
                displacement,
                set,
                trace,
            }
        }
        _ => DescentOutcome::StuckMinimalSet {
            set,
            d,
            stall,
            trace,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{counting_diversity, diameter_diversity, noext_gadget};
    use crate::rat::rat;
    use crate::tightspan::kappa;

    fn path3() -> FiniteDiversity {
        let g = GroundSet::new(["0", "1", "2"]).unwrap();
        let m = FiniteMetric::from_fn(g, |i, j| int((i as i64 - j as i64).abs())).unwrap();
        diameter_diversity(&m).unwrap()
    }

    #[test]
    fn self_map_validation() {
        let g = GroundSet::new(["a", "b"]).unwrap();
        assert!(SelfMap::new(g.clone(), vec![0]).is_err());
        assert!(SelfMap::new(g.clone(), vec![0, 2]).is_err());
        let m = SelfMap::new(g, vec![1, 1]).unwrap();
        assert_eq!(m.apply_set(SubsetMask(0b11)), SubsetMask(0b10));
    }

    #[test]
    fn nonexpansive_examples() {
        let div = path3();
        let metric = induced_metric(&div);
        let g = div.ground().clone();
        assert!(is_nonexpansive_metric(&SelfMap::identity(&g), &metric));
        assert!(is_nonexpansive_metric(&SelfMap::constant(&g, 2).unwrap(), &metric));
        let stretch = SelfMap::new(g.clone(), vec![0, 2, 1]).unwrap();
        assert_eq!(
            metric_nonexpansive_violation(&stretch, &metric).unwrap(),
            Some((0, 1))
        );
        assert!(is_nonexpansive_diversity(&SelfMap::identity(&g), &div));
    }

    #[test]
    fn gadget_swap_expands_the_diversity() {
        let g = noext_gadget(1).unwrap();
        let v = diversity_nonexpansive_violation(&g.map, &g.diversity)
            .unwrap()
            .unwrap();
        let ground = g.diversity.ground();
        assert_eq!(v.set, ground.parse_set("{a,b,c}").unwrap());
        assert_eq!((v.before, v.after), (int(2), int(3)));
        assert_eq!(brute_force_fixed_points(&g.map), vec![g.theta]);
        assert_eq!(diversity_fixed_set_search(&g.map), Some(SubsetMask::singleton(g.theta)));
    }

    #[test]
    fn fixed_sets() {
        let g = GroundSet::new(["a", "b", "c"]).unwrap();
        assert_eq!(
            diversity_fixed_set_search(&SelfMap::identity(&g)),
            Some(SubsetMask(0b001))
        );
        let cyc = SelfMap::new(g.clone(), vec![1, 2, 0]).unwrap();
        assert_eq!(diversity_fixed_set_search(&cyc), Some(SubsetMask(0b111)));
        assert!(brute_force_fixed_points(&cyc).is_empty());
        assert_eq!(brute_force_fixed_points(&SelfMap::identity(&g)), vec![0, 1, 2]);
    }

    #[test]
    fn extension_formula() {
        let div = counting_diversity(3).unwrap();
        let y = SubsetMask(0b011);
        let sub = restrict(&div, y).unwrap();
        // h_x on {x, y}
        let r = kappa(&sub, 0).unwrap();
        let ext = extend_r(&div, y, &r).unwrap();
        assert_eq!(ext.get(SubsetMask(0b001)), &int(0));
        assert_eq!(ext.get(SubsetMask(0b011)), &int(1));
        assert_eq!(ext.get(SubsetMask(0b100)), &int(1));
        assert_eq!(ext.get(SubsetMask(0b101)), &int(1));
        assert_eq!(ext.get(SubsetMask(0b110)), &int(2));
        assert_eq!(ext.get(SubsetMask(0b111)), &int(2));
        let hx = kappa(&div, 0).unwrap();
        assert_eq!(extend_r(&div, div.ground().full(), &hx).unwrap(), hx);
        let bad = SetFunction::zero(sub.ground()).unwrap();
        assert!(matches!(
            extend_r(&div, y, &bad),
            Err(Error::RadiusFamilyViolated { .. })
        ));
    }

    #[test]
    fn prophyper_examples() {
        let div = counting_diversity(3).unwrap();
        let z = SubsetMask(0b011);
        let sub = restrict(&div, z).unwrap();
        let half = SetFunction::from_values(
            sub.ground(),
            vec![int(0), rat(1, 2), rat(1, 2), int(1)],
        )
        .unwrap();
        assert_eq!(prophyper_set(&div, z, &half).unwrap(), SubsetMask::EMPTY);
        let hx = SetFunction::from_fn(sub.ground(), |a| div.get(to_sub_inv(z, a).with(2)).clone())
            .unwrap();
        assert!(prophyper_set(&div, z, &hx).unwrap().contains(2));
        let single = SubsetMask(0b100);
        let zero = SetFunction::zero(&GroundSet::new(["z"]).unwrap()).unwrap();
        assert_eq!(prophyper_set(&div, single, &zero).unwrap(), single);
    }

    fn to_sub_inv(sub: SubsetMask, local: SubsetMask) -> SubsetMask {
        let idx: Vec<usize> = sub.iter().collect();
        SubsetMask::from_indices(local.iter().map(|k| idx[k]))
    }

    #[test]
    fn normal_structure_examples() {
        let div = path3();
        let ns = normal_structure_d(&div, SubsetMask(0b111)).unwrap();
        assert_eq!((ns.d, ns.subset), (int(1), SubsetMask(0b101)));
        let c4 = counting_diversity(4).unwrap();
        let ns = normal_structure_d(&c4, SubsetMask(0b1111)).unwrap();
        assert_eq!((ns.d, ns.size), (rat(3, 4), 4));
        let ns = normal_structure_d(&div, SubsetMask(0b011)).unwrap();
        assert_eq!(ns.d, rat(1, 2));
        assert!(normal_structure_d(&div, SubsetMask(0b1)).is_err());
    }

    #[test]
    fn descent_on_reflected_path() {
        let div = path3();
        let refl = SelfMap::new(div.ground().clone(), vec![2, 1, 0]).unwrap();
        let out =
            minimal_invariant_descent(&div, &refl, SubsetMask(0b111), &DescentOptions::default())
                .unwrap();
        assert_eq!(out.fixed_point(), Some(1));
        let DescentStep::Shrink { d, to, .. } = &out.trace()[0] else {
            panic!("expected a shrink step");
        };
        assert_eq!((d, *to), (&int(1), SubsetMask(0b010)));
    }

    #[test]
    fn descent_trivial_maps() {
        let div = path3();
        let g = div.ground().clone();
        for x in 0..3 {
            let out = minimal_invariant_descent(
                &div,
                &SelfMap::identity(&g),
                SubsetMask::singleton(x),
                &DescentOptions::default(),
            )
            .unwrap();
            assert_eq!(out.fixed_point(), Some(x));
        }
        let c = SelfMap::constant(&g, 2).unwrap();
        let out = minimal_invariant_descent(&div, &c, g.full(), &DescentOptions::default()).unwrap();
        assert_eq!(out.fixed_point(), Some(2));
        let refl = SelfMap::new(g.clone(), vec![2, 1, 0]).unwrap();
        assert_eq!(
            minimal_invariant_descent(&div, &refl, SubsetMask(0b001), &DescentOptions::default()),
            Err(Error::NotInvariant)
        );
        assert_eq!(
            minimal_invariant_descent(
                &div,
                &SelfMap::identity(&g),
                SubsetMask(0b101),
                &DescentOptions::default()
            ),
            Err(Error::NotAdmissible)
        );
    }

    #[test]
    fn descent_on_gadget() {
        let g = noext_gadget(1).unwrap();
        let div = FiniteDiversity::materialize(&g.diversity).unwrap();
        let out = minimal_invariant_descent(
            &div,
            &g.map,
            div.ground().full(),
            &DescentOptions::default(),
        )
        .unwrap();
        assert_eq!(out.fixed_point(), Some(g.theta));
    }
}

//! Seeded generators for property suites and CLI sampling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::{counting_diversity_on, diameter_diversity, tree_diversity};
use crate::diversity::{verify_diversity_axioms, FiniteDiversity};
use crate::error::Result;
use crate::fixedpoint::SelfMap;
use crate::metric::FiniteMetric;
use crate::rat::{int, rat, Rat};
use crate::sets::{GroundSet, SetFunction, SubsetMask};
use crate::tree::{MetricTree, TreePoint};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rat(rng: &mut SeededRng, max_num: i64, denom: i64) -> Rat {
    rat(rng.gen_range(1..=max_num), denom)
}

/// Shortest-path closure of random positive edge weights on `n` labelled
/// points; every entry is a positive rational with denominator dividing
/// `denom`.
pub fn random_metric(rng: &mut SeededRng, n: usize, max_num: i64, denom: i64) -> Result<FiniteMetric> {
    let ground = GroundSet::with_default_labels(n)?;
    let mut d = vec![vec![Rat::from_integer(0.into()); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = random_rat(rng, max_num, denom);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetric::from_fn(ground, |i, j| d[i][j].clone())
}

/// A random tree on `nodes` vertices `v0, v1, …` with edge lengths
/// `k/denom`, `1 ≤ k ≤ max_num`.
pub fn random_tree(rng: &mut SeededRng, nodes: usize, max_num: i64, denom: i64) -> Result<MetricTree> {
    let names: Vec<String> = (0..nodes).map(|i| format!("v{i}")).collect();
    let edges = (1..nodes)
        .map(|i| (rng.gen_range(0..i), i, random_rat(rng, max_num, denom)))
        .collect();
    MetricTree::new(names, edges)
}

/// A random tree with `1..=max_marks` distinct marked points drawn from the
/// vertices and the midpoints and quarter points of the edges.
pub fn random_marked_tree(
    rng: &mut SeededRng,
    max_marks: usize,
) -> Result<(MetricTree, Vec<(String, TreePoint)>)> {
    let nodes = rng.gen_range(2..=6);
    let tree = random_tree(rng, nodes, 4, 2)?;
    let mut candidates = Vec::new();
    for v in 0..nodes {
        candidates.push(tree.node_point(v)?);
    }
    for (e, edge) in tree.edges().iter().enumerate() {
        for q in [rat(1, 4), rat(1, 2)] {
            candidates.push(tree.point_on_edge(e, &edge.length * q)?);
        }
    }
    candidates.shuffle(rng);
    let k = rng.gen_range(1..=max_marks.min(candidates.len()));
    let marks = candidates
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, p)| (format!("m{i}"), p))
        .collect();
    Ok((tree, marks))
}

pub fn random_tree_diversity(rng: &mut SeededRng, max_marks: usize) -> Result<FiniteDiversity> {
    let (tree, marks) = random_marked_tree(rng, max_marks)?;
    tree_diversity(&tree, &marks)
}

/// A random diversity on `n` points: a positive combination of a diameter
/// diversity, a tree-style split sum and the counting diversity, possibly
/// combined with a second such diversity by a pointwise maximum.
pub fn random_diversity(rng: &mut SeededRng, n: usize) -> Result<FiniteDiversity> {
    let first = random_mixture(rng, n)?;
    let table = if rng.gen_bool(0.3) {
        let second = random_mixture(rng, n)?;
        SetFunction::from_fn(first.ground(), |s| {
            first.get(s).max(second.get(s)).clone()
        })?
    } else {
        first.table().clone()
    };
    FiniteDiversity::new(table)
}

fn random_mixture(rng: &mut SeededRng, n: usize) -> Result<FiniteDiversity> {
    let ground = GroundSet::with_default_labels(n)?;
    let metric = random_metric(rng, n, 4, 2)?;
    let diam = diameter_diversity(&metric)?;
    let count = counting_diversity_on(&ground)?;
    // A split {S, S^c} contributes its weight to every set meeting both
    // sides.
    let splits: Vec<(SubsetMask, Rat)> = (0..rng.gen_range(0..=2))
        .map(|_| {
            let side = SubsetMask(rng.gen::<u64>() & ground.full().0);
            (side, random_rat(rng, 3, 2))
        })
        .collect();
    let (wd, wc) = (
        int(rng.gen_range(0..=2)),
        random_rat(rng, 2, 2),
    );
    let table = SetFunction::from_fn(&ground, |s| {
        let mut v = &wd * diam.get(s) + &wc * count.get(s);
        for (side, w) in &splits {
            if s.intersects(*side) && s.intersects(!*side & ground.full()) {
                v += w;
            }
        }
        v
    })?;
    Ok(FiniteDiversity::new(table)?)
}

/// Rejection-samples a diversity on `n ≤ 3` points whose values lie in
/// `{1/denom, 2/denom, …, max_num/denom}`.
pub fn random_small_diversity(
    rng: &mut SeededRng,
    n: usize,
    max_num: i64,
    denom: i64,
) -> Result<FiniteDiversity> {
    let ground = GroundSet::with_default_labels(n)?;
    loop {
        let table = SetFunction::from_fn(&ground, |s| {
            if s.len() < 2 {
                int(0)
            } else {
                random_rat(rng, max_num, denom)
            }
        })?;
        if verify_diversity_axioms(&table).is_empty() {
            return FiniteDiversity::new(table);
        }
    }
}

/// A tree metric on the vertices of a random tree.
pub struct TreeMetricInstance {
    pub tree: MetricTree,
    pub metric: FiniteMetric,
}

pub fn random_tree_metric(rng: &mut SeededRng, nodes: usize) -> Result<TreeMetricInstance> {
    let tree = random_tree(rng, nodes, 3, 1)?;
    let marks: Vec<(String, TreePoint)> = (0..nodes)
        .map(|v| Ok((tree.nodes()[v].clone(), tree.node_point(v)?)))
        .collect::<Result<_>>()?;
    let div = tree_diversity(&tree, &marks)?;
    let metric = crate::diversity::induced_metric(&div);
    Ok(TreeMetricInstance { tree, metric })
}

/// A random connected vertex set grown from a random vertex.
pub fn random_subtree(rng: &mut SeededRng, tree: &MetricTree) -> SubsetMask {
    let n = tree.nodes().len();
    let target = rng.gen_range(1..=n);
    let mut set = SubsetMask::singleton(rng.gen_range(0..n));
    while set.len() < target {
        let frontier: Vec<usize> = tree
            .edges()
            .iter()
            .filter_map(|e| match (set.contains(e.u), set.contains(e.v)) {
                (true, false) => Some(e.v),
                (false, true) => Some(e.u),
                _ => None,
            })
            .collect();
        set = set.with(*frontier.choose(rng).expect("tree is connected"));
    }
    set
}

/// Sends every point to its nearest point of `target`, least index first
/// among equals. On a tree metric with a connected `target` this is the
/// gate retraction, which is nonexpansive and fixes exactly `target`.
pub fn nearest_point_map(metric: &FiniteMetric, target: SubsetMask) -> Result<SelfMap> {
    let image = (0..metric.len())
        .map(|x| {
            target
                .iter()
                .min_by(|&a, &b| metric.dist(x, a).cmp(metric.dist(x, b)).then(a.cmp(&b)))
                .expect("nonempty target")
        })
        .collect();
    SelfMap::new(metric.ground().clone(), image)
}

/// Raises `f` by a random positive amount on one random nonempty set.
pub fn bump_one(rng: &mut SeededRng, f: &SetFunction) -> Result<(SetFunction, SubsetMask)> {
    let n = f.ground().len();
    let set = SubsetMask(rng.gen_range(1..(1u64 << n)));
    let mut g = f.clone();
    g.set(set, f.get(set) + random_rat(rng, 4, 2))?;
    Ok((g, set))
}

/// A convex combination of the given points, raised by random nonnegative
/// amounts on a few sets.
pub fn random_point_above(rng: &mut SeededRng, points: &[SetFunction]) -> Result<SetFunction> {
    let ground = points[0].ground().clone();
    let mut weights: Vec<i64> = points.iter().map(|_| rng.gen_range(0..=3)).collect();
    weights[0] = weights[0].max(1);
    let total: i64 = weights.iter().sum();
    let mut f = SetFunction::from_fn(&ground, |s| {
        points
            .iter()
            .zip(&weights)
            .map(|(p, w)| p.get(s) * int(*w))
            .sum::<Rat>()
            / int(total)
    })?;
    for _ in 0..rng.gen_range(0..=3) {
        f = bump_one(rng, &f)?.0;
    }
    Ok(f)
}

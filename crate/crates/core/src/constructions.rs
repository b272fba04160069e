//! Standard diversities and the glued example.

use num_traits::Zero;

use crate::diversity::{Diversity, FiniteDiversity};
use crate::error::{Error, Result};
use crate::fixedpoint::SelfMap;
use crate::metric::FiniteMetric;
use crate::rat::{int, rat, Rat};
use crate::sets::{check_dense, GroundSet, SetFunction, SubsetMask};
use crate::tree::{MetricTree, TreeDiversity, TreePoint};

/// δ(A) = diam(A), evaluated on demand.
#[derive(Clone, Debug)]
pub struct DiameterDiversity {
    metric: FiniteMetric,
}

impl DiameterDiversity {
    pub fn new(metric: FiniteMetric) -> Self {
        Self { metric }
    }

    pub fn metric(&self) -> &FiniteMetric {
        &self.metric
    }
}

impl Diversity for DiameterDiversity {
    fn ground(&self) -> &GroundSet {
        self.metric.ground()
    }

    fn value(&self, set: SubsetMask) -> Rat {
        self.metric.diameter(set)
    }
}

pub fn diameter_diversity(metric: &FiniteMetric) -> Result<FiniteDiversity> {
    check_dense(metric.ground())?;
    let lazy = DiameterDiversity::new(metric.clone());
    Ok(FiniteDiversity::from_trusted(SetFunction::from_fn(
        metric.ground(),
        |s| lazy.value(s),
    )?))
}

/// Phylogenetic diversity of the marked points, as a dense table. The
/// ground set is the marked points in the given order.
pub fn tree_diversity(tree: &MetricTree, marked: &[(String, TreePoint)]) -> Result<FiniteDiversity> {
    let lazy = TreeDiversity::new(tree, marked)?;
    check_dense(lazy.ground())?;
    Ok(FiniteDiversity::from_trusted(SetFunction::from_fn(
        lazy.ground(),
        |s| lazy.value(s),
    )?))
}

/// δ(A) = max(|A| − 1, 0).
pub fn counting_diversity(n: usize) -> Result<FiniteDiversity> {
    counting_diversity_on(&GroundSet::with_default_labels(n)?)
}

pub fn counting_diversity_on(ground: &GroundSet) -> Result<FiniteDiversity> {
    Ok(FiniteDiversity::from_trusted(SetFunction::from_fn(ground, |s| {
        int(s.len().saturating_sub(1) as i64)
    })?))
}

/// The induced diversity on a nonempty subset; labels keep ground order.
pub fn restrict(div: &FiniteDiversity, subset: SubsetMask) -> Result<FiniteDiversity> {
    if subset.is_empty() {
        return Err(Error::EmptySet);
    }
    let ground = div.ground();
    let idx: Vec<usize> = subset.iter().collect();
    let sub = GroundSet::new(idx.iter().map(|&i| ground.name(i).to_string()))?;
    let table = SetFunction::from_fn(&sub, |s| {
        div.get(SubsetMask::from_indices(s.iter().map(|k| idx[k]))).clone()
    })?;
    Ok(FiniteDiversity::from_trusted(table))
}

/// The same diversity with its points listed in the order of `ground`,
/// which must carry the same labels.
pub fn reorder(div: &FiniteDiversity, ground: &GroundSet) -> Result<FiniteDiversity> {
    let old = div.ground();
    if old.len() != ground.len() {
        return Err(Error::GroundMismatch);
    }
    let perm: Vec<usize> = ground
        .names()
        .iter()
        .map(|l| old.index_of(l))
        .collect::<Result<_>>()?;
    let table = SetFunction::from_fn(ground, |s| {
        div.get(SubsetMask::from_indices(s.iter().map(|i| perm[i]))).clone()
    })?;
    Ok(FiniteDiversity::from_trusted(table))
}

/// Two diversities sharing exactly one point, the hub.
pub struct GluedDiversitySpec {
    pub left: Box<dyn Diversity>,
    pub right: Box<dyn Diversity>,
    pub hub: String,
}

/// δ on `Z = X ∪ Y`: δ1 on subsets of X, δ2 on subsets of Y, and
/// `δ1((A∩X)∪{θ}) + δ2((A∩Y)∪{θ})` for sets meeting both sides.
///
/// The ground order is the left points, then the right points without the
/// hub.
pub struct GluedDiversity {
    ground: GroundSet,
    left: Box<dyn Diversity>,
    right: Box<dyn Diversity>,
    left_mask: SubsetMask,
    right_mask: SubsetMask,
    hub: usize,
    // Index in the combined ground → index in the side's own ground.
    left_index: Vec<Option<usize>>,
    right_index: Vec<Option<usize>>,
}

impl GluedDiversity {
    pub fn ground_left(&self) -> SubsetMask {
        self.left_mask
    }

    pub fn ground_right(&self) -> SubsetMask {
        self.right_mask
    }

    pub fn hub(&self) -> usize {
        self.hub
    }

    fn to_side(index: &[Option<usize>], set: SubsetMask) -> SubsetMask {
        SubsetMask::from_indices(set.iter().map(|i| index[i].expect("point on this side")))
    }
}

pub fn glue_diversities(spec: GluedDiversitySpec) -> Result<GluedDiversity> {
    let lg = spec.left.ground().clone();
    let rg = spec.right.ground().clone();
    let hub_l = lg
        .index_of(&spec.hub)
        .map_err(|_| Error::InvalidGlue(format!("hub `{}` missing on the left", spec.hub)))?;
    let hub_r = rg
        .index_of(&spec.hub)
        .map_err(|_| Error::InvalidGlue(format!("hub `{}` missing on the right", spec.hub)))?;
    for name in lg.names() {
        if name != &spec.hub && rg.index_of(name).is_ok() {
            return Err(Error::InvalidGlue(format!(
                "`{name}` lies on both sides but is not the hub"
            )));
        }
    }
    let mut names: Vec<String> = lg.names().to_vec();
    names.extend(rg.names().iter().filter(|n| **n != spec.hub).cloned());
    let ground = GroundSet::new(names)?;
    let n = ground.len();
    let mut left_index = vec![None; n];
    let mut right_index = vec![None; n];
    for i in 0..lg.len() {
        left_index[i] = Some(i);
    }
    right_index[hub_l] = Some(hub_r);
    let mut k = lg.len();
    for j in 0..rg.len() {
        if j != hub_r {
            right_index[k] = Some(j);
            k += 1;
        }
    }
    let left_mask = SubsetMask::full(lg.len());
    let right_mask = SubsetMask::from_indices((0..n).filter(|&i| right_index[i].is_some()));
    Ok(GluedDiversity {
        ground,
        left: spec.left,
        right: spec.right,
        left_mask,
        right_mask,
        hub: hub_l,
        left_index,
        right_index,
    })
}

impl Diversity for GluedDiversity {
    fn ground(&self) -> &GroundSet {
        &self.ground
    }

    fn value(&self, set: SubsetMask) -> Rat {
        if set.is_subset_of(self.left_mask) {
            return self.left.value(Self::to_side(&self.left_index, set));
        }
        if set.is_subset_of(self.right_mask) {
            return self.right.value(Self::to_side(&self.right_index, set));
        }
        let l = (set & self.left_mask).with(self.hub);
        let r = (set & self.right_mask).with(self.hub);
        self.left.value(Self::to_side(&self.left_index, l))
            + self.right.value(Self::to_side(&self.right_index, r))
    }
}

/// The six-leg star example: a diameter diversity on the legs towards
/// a, b, c glued at θ to the phylogenetic diversity on the legs towards
/// d, e, f, together with the isometry that swaps a↔d, b↔e, c↔f.
pub struct NoextGadget {
    pub grid: usize,
    pub diversity: GluedDiversity,
    pub map: SelfMap,
    pub tree: MetricTree,
    pub theta: usize,
    /// Indices of the leaves a, b, c, d, e, f in the combined ground.
    pub leaves: [usize; 6],
}

pub const GADGET_LEGS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
pub const GADGET_HUB: &str = "theta";

fn grid_label(leg: &str, j: usize, k: usize) -> String {
    if j == k {
        leg.to_string()
    } else {
        format!("{leg}@{}", rat(j as i64, k as i64))
    }
}

/// Builds the gadget on the grid with spacing `1/k` on every unit leg.
///
/// Ground order: θ, the leaves a…f, then the interior grid points leg by
/// leg from θ outwards.
pub fn noext_gadget(k: usize) -> Result<NoextGadget> {
    if k == 0 {
        return Err(Error::InvalidTree("grid must be at least 1".into()));
    }
    let mut nodes = vec![GADGET_HUB.to_string()];
    nodes.extend(GADGET_LEGS.iter().map(|s| s.to_string()));
    let edges = (1..=6).map(|i| (0, i, int(1))).collect();
    let tree = MetricTree::new(nodes, edges)?;

    let side_points = |legs: &[usize]| -> Result<Vec<(String, TreePoint)>> {
        let mut pts = vec![(GADGET_HUB.to_string(), tree.node_point(0)?)];
        for &leg in legs {
            pts.push((GADGET_LEGS[leg].to_string(), tree.node_point(leg + 1)?));
        }
        for &leg in legs {
            for j in 1..k {
                pts.push((
                    grid_label(GADGET_LEGS[leg], j, k),
                    tree.point_on_edge(leg, rat(j as i64, k as i64))?,
                ));
            }
        }
        Ok(pts)
    };
    let left_pts = side_points(&[0, 1, 2])?;
    let right_pts = side_points(&[3, 4, 5])?;
    let left_metric = TreeDiversity::new(&tree, &left_pts)?.metric();
    let left = DiameterDiversity::new(left_metric);
    let right = TreeDiversity::new(&tree, &right_pts)?;
    let glued = glue_diversities(GluedDiversitySpec {
        left: Box::new(left),
        right: Box::new(right),
        hub: GADGET_HUB.to_string(),
    })?;

    // Reorder into θ, leaves, interior points.
    let g = glued.ground().clone();
    let mut order = vec![GADGET_HUB.to_string()];
    order.extend(GADGET_LEGS.iter().map(|s| s.to_string()));
    for leg in GADGET_LEGS {
        for j in 1..k {
            order.push(grid_label(leg, j, k));
        }
    }
    let perm: Vec<usize> = order.iter().map(|l| g.index_of(l)).collect::<Result<_>>()?;
    let diversity = permute_glued(glued, &perm)?;

    let ground = diversity.ground().clone();
    let swap = |leg: usize| (leg + 3) % 6;
    let image: Vec<usize> = ground
        .names()
        .iter()
        .map(|name| {
            if name == GADGET_HUB {
                return Ok(0);
            }
            let (leg, rest) = name.split_at(1);
            let li = GADGET_LEGS.iter().position(|l| *l == leg).unwrap();
            ground.index_of(&format!("{}{}", GADGET_LEGS[swap(li)], rest))
        })
        .collect::<Result<_>>()?;
    let map = SelfMap::new(ground.clone(), image)?;
    let leaves = [1, 2, 3, 4, 5, 6];
    Ok(NoextGadget {
        grid: k,
        diversity,
        map,
        tree,
        theta: 0,
        leaves,
    })
}

/// Relabels a glued diversity so that new index `i` is old index `perm[i]`.
fn permute_glued(g: GluedDiversity, perm: &[usize]) -> Result<GluedDiversity> {
    let old = g.ground.clone();
    let ground = GroundSet::new(perm.iter().map(|&p| old.name(p).to_string()))?;
    let remap = |m: SubsetMask| {
        SubsetMask::from_indices(
            (0..perm.len()).filter(|&i| m.contains(perm[i])),
        )
    };
    let hub = perm.iter().position(|&p| p == g.hub).unwrap();
    Ok(GluedDiversity {
        ground,
        left_mask: remap(g.left_mask),
        right_mask: remap(g.right_mask),
        hub,
        left_index: perm.iter().map(|&p| g.left_index[p]).collect(),
        right_index: perm.iter().map(|&p| g.right_index[p]).collect(),
        left: g.left,
        right: g.right,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypconViolation {
    pub set: SubsetMask,
    /// `(|A| − 1) · δ(A)`
    pub lhs: Rat,
    /// Sum of pairwise distances in A.
    pub rhs: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HypconReport {
    pub violations: Vec<HypconViolation>,
}

impl HypconReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans `(|A| − 1)·δ(A) ≤ Σ_{i<j} d(x_i, x_j)` over every A with at least
/// two points, d being the induced metric.
pub fn hypcon_check(div: &FiniteDiversity) -> HypconReport {
    let ground = div.ground();
    let pair = |i: usize, j: usize| div.get(SubsetMask::singleton(i).with(j));
    let violations = ground
        .subsets()
        .filter(|s| s.len() >= 2)
        .filter_map(|s| {
            let lhs = div.get(s) * int(s.len() as i64 - 1);
            let mut rhs = Rat::zero();
            for i in s.iter() {
                for j in s.iter().filter(|&j| j > i) {
                    rhs += pair(i, j);
                }
            }
            (lhs > rhs).then_some(HypconViolation { set: s, lhs, rhs })
        })
        .collect();
    HypconReport { violations }
}

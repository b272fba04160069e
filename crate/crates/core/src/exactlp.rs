//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex with Bland's rule. Variables are free
//! unless a single-variable row forces a nonnegative lower bound; free
//! variables are split into a difference of two nonnegative columns.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinConstraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub relation: Relation,
    pub rhs: Rat,
}

impl LinConstraint {
    pub fn new(coeffs: Vec<(usize, Rat)>, relation: Relation, rhs: Rat) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<(usize, Rat)>, rhs: Rat) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn le(coeffs: Vec<(usize, Rat)>, rhs: Rat) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn eq(coeffs: Vec<(usize, Rat)>, rhs: Rat) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn lhs(&self, x: &[Rat]) -> Rat {
        self.coeffs
            .iter()
            .fold(Rat::zero(), |acc, (j, a)| acc + a * &x[*j])
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }

    /// The row as `g·x ≥ c`. Equality rows keep their own orientation.
    fn as_ge(&self) -> (Vec<(usize, Rat)>, Rat) {
        match self.relation {
            Relation::Le => (
                self.coeffs.iter().map(|(j, a)| (*j, -a)).collect(),
                -&self.rhs,
            ),
            _ => (self.coeffs.clone(), self.rhs.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<(usize, Rat)>,
}

impl Objective {
    pub fn maximize(coeffs: Vec<(usize, Rat)>) -> Self {
        Self {
            direction: Direction::Maximize,
            coeffs,
        }
    }

    pub fn minimize(coeffs: Vec<(usize, Rat)>) -> Self {
        Self {
            direction: Direction::Minimize,
            coeffs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<LinConstraint>,
    /// `None` asks for feasibility only.
    pub objective: Option<Objective>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn push(&mut self, c: LinConstraint) {
        self.constraints.push(c);
    }

    pub fn validate(&self) -> Result<()> {
        let check = |coeffs: &[(usize, Rat)], what: &str| {
            match coeffs.iter().find(|(j, _)| *j >= self.num_vars) {
                Some((j, _)) => Err(Error::MalformedLp(format!(
                    "{what} references variable {j} but there are {} variables",
                    self.num_vars
                ))),
                None => Ok(()),
            }
        };
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.coeffs, &format!("constraint {i}"))?;
        }
        if let Some(obj) = &self.objective {
            check(&obj.coeffs, "objective")?;
        }
        Ok(())
    }

    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars && self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        self.objective
            .as_ref()
            .map(|o| o.coeffs.iter().fold(Rat::zero(), |acc, (j, a)| acc + a * &x[*j]))
            .unwrap_or_else(Rat::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// For a pure feasibility problem the value is zero.
    Optimal { point: Vec<Rat>, value: Rat },
    Infeasible(FarkasCertificate),
    /// `point + s·ray` is feasible for all `s ≥ 0` and improves the
    /// objective without bound.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

/// Multipliers `y` over the constraints written as `g_i·x ≥ c_i` (`≤` rows
/// are negated). `y_i ≥ 0` on inequality rows, `Σ y_i g_i = 0` and
/// `Σ y_i c_i > 0`, so summing the rows yields `0 ≥ positive`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rat>,
}

impl FarkasCertificate {
    /// The combined row `(Σ y_i g_i, Σ y_i c_i)`.
    pub fn combination(&self, p: &LpProblem) -> (Vec<Rat>, Rat) {
        let mut g = vec![Rat::zero(); p.num_vars];
        let mut c = Rat::zero();
        for (y, row) in self.multipliers.iter().zip(&p.constraints) {
            if y.is_zero() {
                continue;
            }
            let (coeffs, rhs) = row.as_ge();
            for (j, a) in coeffs {
                g[j] += y * a;
            }
            c += y * rhs;
        }
        (g, c)
    }

    /// Recomputes the combination; returns the positive contradiction value.
    pub fn verify(&self, p: &LpProblem) -> Option<Rat> {
        if self.multipliers.len() != p.constraints.len() {
            return None;
        }
        let signs_ok = self
            .multipliers
            .iter()
            .zip(&p.constraints)
            .all(|(y, c)| c.relation == Relation::Eq || !y.is_negative());
        let (g, c) = self.combination(p);
        (signs_ok && g.iter().all(Zero::is_zero) && c.is_positive()).then_some(c)
    }

    /// Rescales so the multiplier of `row` becomes one.
    pub fn normalized_at(&self, row: usize) -> Option<Self> {
        let y = self.multipliers.get(row)?;
        if !y.is_positive() {
            return None;
        }
        Some(Self {
            multipliers: self.multipliers.iter().map(|m| m / y).collect(),
        })
    }
}

pub fn lp_solve(p: &LpProblem) -> Result<LpOutcome> {
    p.validate()?;
    let prepared = Prepared::new(p);
    match solve_standard(&prepared.std) {
        StdOutcome::Optimal(x) => {
            let point = prepared.recover(&x);
            debug_assert!(p.is_feasible_point(&point));
            let value = p.objective_value(&point);
            Ok(LpOutcome::Optimal { point, value })
        }
        StdOutcome::Unbounded(x, r) => Ok(LpOutcome::Unbounded {
            point: prepared.recover(&x),
            ray: prepared.recover(&r),
        }),
        StdOutcome::Infeasible => Ok(LpOutcome::Infeasible(farkas(p)?)),
    }
}

/// Solves the alternative system for an infeasible problem.
fn farkas(p: &LpProblem) -> Result<FarkasCertificate> {
    let m = p.constraints.len();
    let mut alt = LpProblem::new(m);
    let mut columns: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); p.num_vars];
    let mut rhs_row = Vec::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let (g, rhs) = c.as_ge();
        for (j, a) in g {
            columns[j].push((i, a));
        }
        if !rhs.is_zero() {
            rhs_row.push((i, rhs));
        }
        if c.relation != Relation::Eq {
            alt.push(LinConstraint::ge(vec![(i, Rat::one())], Rat::zero()));
        }
    }
    for col in columns {
        alt.push(LinConstraint::eq(merge(col), Rat::zero()));
    }
    alt.push(LinConstraint::eq(rhs_row, Rat::one()));
    let prepared = Prepared::new(&alt);
    match solve_standard(&prepared.std) {
        StdOutcome::Optimal(x) => {
            let cert = FarkasCertificate {
                multipliers: prepared.recover(&x),
            };
            match cert.verify(p) {
                Some(_) => Ok(cert),
                None => Err(Error::MalformedLp("certificate failed to verify".into())),
            }
        }
        _ => Err(Error::MalformedLp(
            "infeasible system without a certificate".into(),
        )),
    }
}

/// Greedy coordinate descent below `upper`: for each variable in `order`,
/// minimize it over `{x feasible, x ≤ current point}` and move to the
/// optimum. Variables already processed keep their value.
pub fn lp_minimize_coordinate_sequence(
    p: &LpProblem,
    order: &[usize],
    upper: &[Rat],
) -> Result<Vec<Rat>> {
    p.validate()?;
    check_point(p, upper)?;
    let mut u = upper.to_vec();
    let mut free = vec![true; p.num_vars];
    for &v in order {
        if v >= p.num_vars {
            return Err(Error::MalformedLp(format!("order names variable {v}")));
        }
        if !free[v] {
            continue;
        }
        let cols: Vec<usize> = (0..p.num_vars).filter(|&j| free[j]).collect();
        match max_decrease_on(p, &u, &cols, v) {
            StdOutcome::Optimal(y) => {
                for (k, &j) in cols.iter().enumerate() {
                    u[j] -= &y[k];
                }
            }
            StdOutcome::Unbounded(..) => return Err(Error::UnboundedCoordinate(v)),
            StdOutcome::Infeasible => unreachable!("the current point is feasible"),
        }
        free[v] = false;
    }
    Ok(u)
}

/// Largest `s` such that some feasible `x ≤ point` has `x_v = point_v − s`.
/// `None` when the decrease is unbounded.
pub fn max_coordinate_decrease(p: &LpProblem, point: &[Rat], v: usize) -> Result<Option<Rat>> {
    p.validate()?;
    check_point(p, point)?;
    if v >= p.num_vars {
        return Err(Error::MalformedLp(format!("no variable {v}")));
    }
    let cols: Vec<usize> = (0..p.num_vars).collect();
    Ok(match max_decrease_on(p, point, &cols, v) {
        StdOutcome::Optimal(y) => Some(y[v].clone()),
        StdOutcome::Unbounded(..) => None,
        StdOutcome::Infeasible => unreachable!("the point is feasible"),
    })
}

/// True iff no single coordinate of the feasible `point` can be lowered
/// while the others stay at or below their values.
pub fn is_coordinatewise_minimal(p: &LpProblem, point: &[Rat]) -> Result<bool> {
    for v in 0..p.num_vars {
        match max_coordinate_decrease(p, point, v)? {
            Some(s) if s.is_zero() => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

fn check_point(p: &LpProblem, x: &[Rat]) -> Result<()> {
    if x.len() != p.num_vars {
        return Err(Error::InfeasiblePoint(format!(
            "point has {} coordinates, problem has {} variables",
            x.len(),
            p.num_vars
        )));
    }
    if let Some(i) = p.constraints.iter().position(|c| !c.holds(x)) {
        return Err(Error::InfeasiblePoint(format!("constraint {i} fails")));
    }
    Ok(())
}

/// Substitutes `x = u − y` with `y ≥ 0` on the columns `cols` (the others
/// stay at `u`) and maximizes `y_v`. Every row gets a nonnegative right-hand
/// side, so `y = 0` is a starting basis.
fn max_decrease_on(p: &LpProblem, u: &[Rat], cols: &[usize], v: usize) -> StdOutcome {
    let mut pos = vec![usize::MAX; p.num_vars];
    for (k, &j) in cols.iter().enumerate() {
        pos[j] = k;
    }
    let mut rows = Vec::new();
    for c in &p.constraints {
        let mut coeffs = vec![Rat::zero(); cols.len()];
        let mut any = false;
        for (j, a) in &c.coeffs {
            if pos[*j] != usize::MAX && !a.is_zero() {
                coeffs[pos[*j]] += a;
                any = true;
            }
        }
        if !any {
            continue;
        }
        let slack = c.lhs(u) - &c.rhs;
        let (coeffs, relation, rhs) = match c.relation {
            Relation::Ge => (coeffs, Relation::Le, slack),
            Relation::Le => (coeffs.into_iter().map(|a| -a).collect(), Relation::Le, -slack),
            Relation::Eq => (coeffs, Relation::Eq, Rat::zero()),
        };
        rows.push(StdRow {
            coeffs,
            relation,
            rhs,
        });
    }
    let mut obj = vec![Rat::zero(); cols.len()];
    obj[pos[v]] = Rat::one();
    solve_standard(&StdLp {
        ncols: cols.len(),
        rows,
        obj,
    })
}

fn merge(mut coeffs: Vec<(usize, Rat)>) -> Vec<(usize, Rat)> {
    coeffs.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Rat)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

/// A problem rewritten over nonnegative columns.
struct Prepared {
    std: StdLp,
    /// Column of `x_j⁺` and, for free variables, of `x_j⁻`.
    map: Vec<(usize, Option<usize>)>,
}

impl Prepared {
    fn new(p: &LpProblem) -> Self {
        let rows: Vec<(Vec<(usize, Rat)>, Relation, Rat)> = p
            .constraints
            .iter()
            .map(|c| (merge(c.coeffs.clone()), c.relation, c.rhs.clone()))
            .collect();
        let mut nonneg = vec![false; p.num_vars];
        let mut keep = vec![true; rows.len()];
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let [(j, a)] = coeffs.as_slice() else { continue };
            let bound = rhs / a;
            let lower = match rel {
                Relation::Eq => true,
                Relation::Ge => a.is_positive(),
                Relation::Le => a.is_negative(),
            };
            if lower && !bound.is_negative() {
                nonneg[*j] = true;
                if bound.is_zero() && *rel != Relation::Eq {
                    keep[i] = false;
                }
            }
        }
        let mut map = Vec::with_capacity(p.num_vars);
        let mut ncols = 0;
        for &nn in &nonneg {
            if nn {
                map.push((ncols, None));
                ncols += 1;
            } else {
                map.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
        let spread = |coeffs: &[(usize, Rat)]| {
            let mut dense = vec![Rat::zero(); ncols];
            for (j, a) in coeffs {
                let (pc, nc) = map[*j];
                dense[pc] += a;
                if let Some(nc) = nc {
                    dense[nc] -= a;
                }
            }
            dense
        };
        let std_rows = rows
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|((coeffs, rel, rhs), _)| StdRow {
                coeffs: spread(coeffs),
                relation: *rel,
                rhs: rhs.clone(),
            })
            .collect();
        let obj = match &p.objective {
            None => vec![Rat::zero(); ncols],
            Some(o) => {
                let c = spread(&merge(o.coeffs.clone()));
                match o.direction {
                    Direction::Maximize => c,
                    Direction::Minimize => c.into_iter().map(|a| -a).collect(),
                }
            }
        };
        Self {
            std: StdLp {
                ncols,
                rows: std_rows,
                obj,
            },
            map,
        }
    }

    fn recover(&self, x: &[Rat]) -> Vec<Rat> {
        self.map
            .iter()
            .map(|(pc, nc)| match nc {
                Some(nc) => &x[*pc] - &x[*nc],
                None => x[*pc].clone(),
            })
            .collect()
    }
}

struct StdRow {
    coeffs: Vec<Rat>,
    relation: Relation,
    rhs: Rat,
}

/// Maximize `obj·x` subject to the rows and `x ≥ 0`.
struct StdLp {
    ncols: usize,
    rows: Vec<StdRow>,
    obj: Vec<Rat>,
}

enum StdOutcome {
    Optimal(Vec<Rat>),
    Infeasible,
    Unbounded(Vec<Rat>, Vec<Rat>),
}

struct Tableau {
    t: Vec<Vec<Rat>>,
    b: Vec<Rat>,
    basis: Vec<usize>,
    /// Reduced costs; the current objective value is `-dz`.
    d: Vec<Rat>,
    dz: Rat,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c].clone();
        if !piv.is_one() {
            for v in self.t[r].iter_mut().filter(|v| !v.is_zero()) {
                *v /= &piv;
            }
            self.b[r] /= &piv;
        }
        let nz: Vec<usize> = (0..self.t[r].len())
            .filter(|&k| !self.t[r][k].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.t[r]);
        let pb = self.b[r].clone();
        let eliminate = |row: &mut Vec<Rat>, rhs: &mut Rat| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                row[k] -= &f * &prow[k];
            }
            *rhs -= &f * &pb;
        };
        for i in 0..self.t.len() {
            if i != r {
                let (row, rhs) = (&mut self.t[i], &mut self.b[i]);
                eliminate(row, rhs);
            }
        }
        eliminate(&mut self.d, &mut self.dz);
        self.t[r] = prow;
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< limit`. `Err(column)` when unbounded.
    fn optimize(&mut self, limit: usize) -> std::result::Result<(), usize> {
        loop {
            let Some(c) = (0..limit).find(|&j| self.d[j].is_positive()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(c),
            }
        }
    }

    fn point(&self, ncols: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); ncols];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < ncols {
                x[bv] = self.b[i].clone();
            }
        }
        x
    }
}

fn solve_standard(lp: &StdLp) -> StdOutcome {
    let n = lp.ncols;
    // Orient rows so rhs ≥ 0; a zero-rhs `≥` row becomes a `≤` row.
    let rows: Vec<(Vec<Rat>, Relation, Rat)> = lp
        .rows
        .iter()
        .map(|r| {
            let flip = r.rhs.is_negative() || (r.rhs.is_zero() && r.relation == Relation::Ge);
            if flip {
                let rel = match r.relation {
                    Relation::Ge => Relation::Le,
                    Relation::Le => Relation::Ge,
                    Relation::Eq => Relation::Eq,
                };
                (r.coeffs.iter().map(|a| -a).collect(), rel, -&r.rhs)
            } else {
                (r.coeffs.clone(), r.relation, r.rhs.clone())
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut t = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut s, mut a) = (n, art_start);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width, Rat::zero());
        match rel {
            Relation::Le => {
                row[s] = Rat::one();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -Rat::one();
                s += 1;
                row[a] = Rat::one();
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = Rat::one();
                basis.push(a);
                a += 1;
            }
        }
        t.push(row);
        b.push(rhs);
    }
    let mut tab = Tableau {
        t,
        b,
        basis,
        d: vec![Rat::zero(); width],
        dz: Rat::zero(),
    };

    if n_art > 0 {
        for j in art_start..width {
            tab.d[j] = -Rat::one();
        }
        for i in 0..tab.t.len() {
            if tab.basis[i] >= art_start {
                for j in 0..width {
                    if !tab.t[i][j].is_zero() {
                        tab.d[j] += &tab.t[i][j];
                    }
                }
                tab.dz += &tab.b[i];
            }
        }
        tab.optimize(width)
            .expect("phase one is bounded by zero");
        if tab.dz.is_positive() {
            return StdOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis or drop their rows.
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab.t[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.t.remove(i);
                        tab.b.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in &mut tab.t {
            row.truncate(art_start);
        }
    }

    let width = art_start;
    tab.d = vec![Rat::zero(); width];
    tab.dz = Rat::zero();
    tab.d[..n].clone_from_slice(&lp.obj);
    for i in 0..tab.t.len() {
        let bv = tab.basis[i];
        if bv < n && !lp.obj[bv].is_zero() {
            let cb = lp.obj[bv].clone();
            for j in 0..width {
                if !tab.t[i][j].is_zero() {
                    let delta = &cb * &tab.t[i][j];
                    tab.d[j] -= delta;
                }
            }
            tab.dz -= &cb * &tab.b[i];
        }
    }
    match tab.optimize(width) {
        Ok(()) => StdOutcome::Optimal(tab.point(n)),
        Err(c) => {
            let point = tab.point(n);
            let mut ray = vec![Rat::zero(); n];
            if c < n {
                ray[c] = Rat::one();
            }
            for (i, &bv) in tab.basis.iter().enumerate() {
                if bv < n {
                    ray[bv] = -&tab.t[i][c];
                }
            }
            StdOutcome::Unbounded(point, ray)
        }
    }
}

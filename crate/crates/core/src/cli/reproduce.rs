//! Exact reproductions of the two counterexamples shipped with the tool.

use std::fmt::Write;

use num_traits::{Signed, Zero};

use crate::constructions::{counting_diversity, noext_gadget, NoextGadget};
use crate::diversity::{
    induced_metric, verify_diversity_axioms, verify_diversity_axioms_reduced,
    verify_diversity_axioms_sampled, AxiomReport, Coverage, FiniteDiversity, DEFAULT_AXIOM_SAMPLES,
    EXHAUSTIVE_AXIOM_CAP,
};
use crate::error::{Error, Result};
use crate::exactlp::{lp_solve, FarkasCertificate, LinConstraint, LpOutcome, LpProblem, Relation};
use crate::fixedpoint::{brute_force_fixed_points, diversity_nonexpansive_violation, DiversityExpansion};
use crate::rat::{int, rat, Rat};
use crate::sets::{GroundSet, SubsetMask, DENSE_CAP};
use crate::tightspan::{delta_t, kappa, px_constraints, var, PxSystem};

/// Counting diversity on three points: the tight-span points with
/// `f({u}) ≤ 1/2` for all `u` do not exist, although every pair of
/// embedded points is at distance `1 = 1/2 + 1/2`.
#[derive(Clone, Debug)]
pub struct Ex1Report {
    pub diversity: FiniteDiversity,
    pub system: PxSystem,
    /// The family rows followed by the caps `f({u}) ≤ 1/2`.
    pub lp: LpProblem,
    /// Row of `f({x}) + f({y}) + f({z}) ≥ 2`.
    pub binding_row: usize,
    pub radius: Rat,
    /// Normalized to weight one on the binding row.
    pub certificate: Option<FarkasCertificate>,
    /// `Σ y_i c_i` over the caps: the upper bound on `f(x) + f(y) + f(z)`.
    pub cap_bound: Rat,
    /// `Σ y_i c_i` over the family rows.
    pub required: Rat,
    /// Positive contradiction value of the recombined rows, if valid.
    pub contradiction: Option<Rat>,
    /// `(u, v, δ_T({h_u, h_v}))` for every pair.
    pub pair_distances: Vec<(usize, usize, Rat)>,
}

impl Ex1Report {
    pub fn infeasible(&self) -> bool {
        self.certificate.is_some() && self.contradiction.is_some()
    }

    pub fn combination_ok(&self) -> bool {
        self.cap_bound == rat(3, 2) && self.required == int(2) && self.cap_bound < self.required
    }

    pub fn pairs_ok(&self) -> bool {
        self.pair_distances.len() == 3
            && self
                .pair_distances
                .iter()
                .all(|(_, _, d)| *d == int(1) && *d == &self.radius + &self.radius)
    }

    pub fn passed(&self) -> bool {
        self.infeasible() && self.combination_ok() && self.pairs_ok()
    }

    pub fn render(&self) -> String {
        let g = self.diversity.ground();
        let mut out = String::new();
        let _ = writeln!(out, "counting diversity on {}", g.format_set(g.full()));
        let _ = writeln!(
            out,
            "binding constraint: f({{x}}) + f({{y}}) + f({{z}}) >= {}",
            self.system.rows()[self.binding_row].rhs
        );
        let _ = writeln!(
            out,
            "system: {} family inequalities and {} caps f({{u}}) <= {}",
            self.system.len(),
            g.len(),
            self.radius
        );
        match &self.certificate {
            None => {
                let _ = writeln!(out, "LP: feasible (unexpected)");
            }
            Some(cert) => {
                let _ = writeln!(out, "LP: infeasible; certificate normalized at the binding row:");
                for (i, y) in cert.multipliers.iter().enumerate() {
                    if !y.is_zero() {
                        let _ = writeln!(out, "  {} x [{}]", y, self.describe_row(i));
                    }
                }
                let _ = writeln!(
                    out,
                    "combination: f({{x}}) + f({{y}}) + f({{z}}) <= {} < {}",
                    self.cap_bound, self.required
                );
                match &self.contradiction {
                    Some(c) => {
                        let _ = writeln!(out, "  recombined rows: 0 >= {c} (certificate verified)");
                    }
                    None => {
                        let _ = writeln!(out, "  certificate FAILED re-verification");
                    }
                }
            }
        }
        for (u, v, d) in &self.pair_distances {
            let _ = writeln!(
                out,
                "d_T(h_{}, h_{}) = {} = {} + {}",
                g.name(*u),
                g.name(*v),
                d,
                self.radius,
                self.radius
            );
        }
        let _ = writeln!(out, "infeasibility: {}", verdict(self.infeasible()));
        let _ = writeln!(out, "combination 3/2 < 2: {}", verdict(self.combination_ok()));
        let _ = writeln!(out, "pairwise distances: {}", verdict(self.pairs_ok()));
        let _ = writeln!(out, "result: {}", verdict(self.passed()));
        out
    }

    fn describe_row(&self, i: usize) -> String {
        let g = self.diversity.ground();
        let c = &self.lp.constraints[i];
        let lhs: Vec<String> = c
            .coeffs
            .iter()
            .map(|(j, _)| format!("f({})", g.format_set(SubsetMask(*j as u64 + 1))))
            .collect();
        let rel = match c.relation {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        };
        format!("{} {} {}", lhs.join(" + "), rel, c.rhs)
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn reproduce_ex1() -> Result<Ex1Report> {
    let diversity = counting_diversity(3)?;
    let system = px_constraints(&diversity)?;
    let singletons: Vec<SubsetMask> = (0..3).map(SubsetMask::singleton).collect();
    let binding_row = system
        .rows()
        .iter()
        .position(|r| {
            let mut fam = r.family.clone();
            fam.sort();
            fam == singletons
        })
        .ok_or_else(|| Error::MalformedLp("family of singletons missing".into()))?;
    let radius = rat(1, 2);
    let mut lp = system.to_lp();
    let family_rows = lp.constraints.len();
    for s in &singletons {
        lp.push(LinConstraint::le(vec![(var(*s), int(1))], radius.clone()));
    }
    let certificate = match lp_solve(&lp)? {
        LpOutcome::Infeasible(c) => c.normalized_at(binding_row),
        _ => None,
    };
    let (mut cap_bound, mut required) = (Rat::zero(), Rat::zero());
    let mut contradiction = None;
    if let Some(cert) = &certificate {
        for (i, (y, row)) in cert.multipliers.iter().zip(&lp.constraints).enumerate() {
            if i < family_rows {
                required += y * &row.rhs;
            } else {
                cap_bound += y * &row.rhs;
            }
        }
        contradiction = cert.verify(&lp).filter(|c| c.is_positive());
    }
    let mut pair_distances = Vec::new();
    for u in 0..3 {
        for v in u + 1..3 {
            let d = delta_t(&diversity, &[kappa(&diversity, u)?, kappa(&diversity, v)?])?;
            pair_distances.push((u, v, d));
        }
    }
    Ok(Ex1Report {
        diversity,
        system,
        lp,
        binding_row,
        radius,
        certificate,
        cap_bound,
        required,
        contradiction,
        pair_distances,
    })
}

/// The glued six-leg gadget on grid `k` and the leg swap.
pub struct NoextReport {
    pub gadget: NoextGadget,
    pub axioms: AxiomReport,
    pub abc: SubsetMask,
    pub image_of_abc: SubsetMask,
    pub delta_abc: Rat,
    pub delta_image: Rat,
    pub isometry_pairs: usize,
    /// Pairs `(x, y)` with `d(Tx, Ty) ≠ d(x, y)`.
    pub isometry_violations: Vec<(usize, usize)>,
    /// First set in mask order whose diversity grows under the map.
    pub expansion: Option<DiversityExpansion>,
    pub fixed_points: Vec<usize>,
}

impl NoextReport {
    pub fn ground(&self) -> &GroundSet {
        crate::diversity::Diversity::ground(&self.gadget.diversity)
    }

    pub fn gap_ok(&self) -> bool {
        self.delta_abc == int(2) && self.delta_image == int(3)
    }

    pub fn witness_ok(&self) -> bool {
        self.expansion.as_ref().map(|e| e.set) == Some(self.abc)
    }

    pub fn passed(&self) -> bool {
        self.axioms.is_empty() && self.gap_ok() && self.isometry_violations.is_empty() && self.witness_ok()
    }

    pub fn render(&self) -> String {
        let g = self.ground();
        let mut out = String::new();
        let _ = writeln!(out, "noext gadget, grid {}: {} points", self.gadget.grid, g.len());
        let coverage = match &self.axioms.coverage {
            Coverage::Exhaustive => "exhaustive over all triples".to_string(),
            Coverage::Reduced => "exhaustive (monotonicity plus singleton-middle triples)".to_string(),
            Coverage::Sampled {
                triples,
                seed,
                fraction,
            } => format!("sampled {triples} triples, seed {seed}, coverage fraction {fraction:.3e}"),
        };
        let _ = writeln!(out, "axioms: {coverage}");
        match self.axioms.first_problem(g) {
            None => {
                let _ = writeln!(out, "  no violations");
            }
            Some(p) => {
                let _ = writeln!(out, "  {p}");
            }
        }
        let _ = writeln!(out, "delta({}) = {}", g.format_set(self.abc), self.delta_abc);
        let _ = writeln!(
            out,
            "delta(T{}) = delta({}) = {}",
            g.format_set(self.abc),
            g.format_set(self.image_of_abc),
            self.delta_image
        );
        let _ = writeln!(out, "gap: {}", &self.delta_image - &self.delta_abc);
        let _ = writeln!(
            out,
            "isometry: {} pairs checked, {} violations",
            self.isometry_pairs,
            self.isometry_violations.len()
        );
        for (x, y) in self.isometry_violations.iter().take(10) {
            let _ = writeln!(out, "  ({}, {})", g.name(*x), g.name(*y));
        }
        match &self.expansion {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "diversity-nonexpansive: no, witness {}: {} -> {}",
                    g.format_set(e.set),
                    e.before,
                    e.after
                );
            }
            None => {
                let _ = writeln!(out, "diversity-nonexpansive: yes (unexpected)");
            }
        }
        let fixed: Vec<&str> = self.fixed_points.iter().map(|&x| g.name(x)).collect();
        let _ = writeln!(out, "fixed points of T: {}", fixed.join(", "));
        let _ = writeln!(out, "axioms: {}", verdict(self.axioms.is_empty()));
        let _ = writeln!(out, "3 > 2: {}", verdict(self.gap_ok()));
        let _ = writeln!(out, "isometry: {}", verdict(self.isometry_violations.is_empty()));
        let _ = writeln!(out, "expansion witness: {}", verdict(self.witness_ok()));
        let _ = writeln!(out, "result: {}", verdict(self.passed()));
        out
    }
}

/// Grids up to 2 are scanned exhaustively; larger grids are sampled with
/// `samples` triples from `seed`.
pub fn reproduce_noext(k: usize, seed: u64, samples: u64) -> Result<NoextReport> {
    let gadget = noext_gadget(k)?;
    let div = &gadget.diversity;
    let n = crate::diversity::Diversity::ground(div).len();
    let axioms = if k <= 2 && n <= DENSE_CAP {
        let table = FiniteDiversity::materialize(div)?;
        if n <= EXHAUSTIVE_AXIOM_CAP {
            verify_diversity_axioms(table.table())
        } else {
            verify_diversity_axioms_reduced(table.table())
        }
    } else {
        verify_diversity_axioms_sampled(div, samples, seed)
    };
    let [a, b, c, ..] = gadget.leaves;
    let abc = SubsetMask::from_indices([a, b, c]);
    let image_of_abc = gadget.map.apply_set(abc);
    let value = |s| crate::diversity::Diversity::value(div, s);
    let delta_abc = value(abc);
    let delta_image = value(image_of_abc);
    let metric = induced_metric(div);
    let mut isometry_violations = Vec::new();
    let mut isometry_pairs = 0;
    for x in 0..n {
        for y in x + 1..n {
            isometry_pairs += 1;
            if metric.dist(gadget.map.image(x), gadget.map.image(y)) != metric.dist(x, y) {
                isometry_violations.push((x, y));
            }
        }
    }
    let expansion = diversity_nonexpansive_violation(&gadget.map, div)?;
    let fixed_points = brute_force_fixed_points(&gadget.map);
    Ok(NoextReport {
        gadget,
        axioms,
        abc,
        image_of_abc,
        delta_abc,
        delta_image,
        isometry_pairs,
        isometry_violations,
        expansion,
        fixed_points,
    })
}

pub fn reproduce_noext_default(k: usize, seed: u64) -> Result<NoextReport> {
    reproduce_noext(k, seed, DEFAULT_AXIOM_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex1_passes() {
        let r = reproduce_ex1().unwrap();
        assert!(r.passed(), "{}", r.render());
        let cert = r.certificate.as_ref().unwrap();
        assert_eq!(cert.multipliers[r.binding_row], int(1));
        assert_eq!(r.contradiction, Some(rat(1, 2)));
    }

    #[test]
    fn noext_grid_one() {
        let r = reproduce_noext_default(1, 0).unwrap();
        assert_eq!(r.axioms.coverage, Coverage::Exhaustive);
        assert!(r.passed(), "{}", r.render());
        assert_eq!(r.isometry_pairs, 21);
    }
}

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::costs::{evaluate_unchecked, Scope};
use crate::instance::PenaltyLevel;

use super::{Chromosome, Group, Problem};

/// Budget repair gives up after this many moves.
const MAX_BUDGET_ROUNDS: usize = 200;
/// Candidate moves sampled per budget violation.
const MOVE_SAMPLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrepairable chromosome, stuck on {constraint}")]
pub struct RepairError {
    pub constraint: String,
}

fn stuck(constraint: String) -> RepairError {
    RepairError { constraint }
}

fn entity(problem: &Problem<'_>, g: &Group) -> String {
    let shape = problem.inst.shape;
    match g.tier {
        1 => shape.part_id(g.part).to_string(),
        _ => format!("{} at tier1 {}", shape.forging_id(g.forging), g.tier1),
    }
}

/// Makes one item's genes satisfy range, must-make, cannot-make and
/// distinctness. Genes that already comply are left alone.
fn fix_group(
    problem: &Problem<'_>,
    g: &Group,
    genes: &mut [usize],
    rng: &mut ChaCha8Rng,
) -> Result<(), RepairError> {
    let props = genes.len();
    if g.must.len() > props || g.must.iter().any(|m| !g.eligible.contains(m)) {
        return Err(stuck(format!("must-make set of {}", entity(problem, g))));
    }
    for x in genes.iter_mut() {
        if *x >= g.suppliers {
            *x %= g.suppliers;
        }
    }
    let invalid = |genes: &[usize], p: usize| {
        !g.eligible.contains(&genes[p]) || genes[..p].contains(&genes[p])
    };
    for &m in &g.must {
        if genes.contains(&m) {
            continue;
        }
        let free: Vec<usize> = (0..props).filter(|&p| !g.must.contains(&genes[p])).collect();
        let bad: Vec<usize> = free.iter().copied().filter(|&p| invalid(genes, p)).collect();
        let pick = if let Some(&p) = bad.first() {
            p
        } else {
            *free
                .choose(rng)
                .ok_or_else(|| stuck(format!("must-make of {}", entity(problem, g))))?
        };
        genes[pick] = m;
    }
    for p in 0..props {
        if !invalid(genes, p) {
            continue;
        }
        let options: Vec<usize> = g
            .eligible
            .iter()
            .copied()
            .filter(|s| !genes.iter().enumerate().any(|(q, x)| q != p && x == s))
            .collect();
        genes[p] = *options
            .choose(rng)
            .ok_or_else(|| stuck(format!("distinct eligible suppliers for {}", entity(problem, g))))?;
    }
    Ok(())
}

struct Move {
    gene: usize,
    to: usize,
    weight: f64,
}

/// Moves that push `supplier`'s spend back into its budget.
fn budget_moves(
    problem: &Problem<'_>,
    c: &Chromosome,
    tier: u8,
    supplier: usize,
    over: bool,
    z: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<Move> {
    let props = problem.inst.proportions();
    let nj = problem.inst.shape.tier1_count;
    let cm = &problem.cm;
    let assignment_cost = |g: &Group, p: usize, s: usize| -> f64 {
        if g.tier == 1 {
            cm.machining_cost(g.part, s, p)
        } else {
            cm.forging_cost(z[g.forging * nj + g.tier1], g.forging, g.tier1, s, PenaltyLevel::Base, p)
        }
    };
    let mut out = Vec::new();
    for g in problem.groups.iter().filter(|g| g.tier == tier) {
        let genes: Vec<usize> = (0..props).map(|p| c.gene(g.start + p)).collect();
        for p in 0..props {
            let cur = genes[p];
            if g.must.contains(&cur) {
                continue;
            }
            let others = |s: usize| genes.iter().enumerate().any(|(q, &x)| q != p && x == s);
            if over {
                if cur != supplier {
                    continue;
                }
                let targets: Vec<usize> = g
                    .eligible
                    .iter()
                    .copied()
                    .filter(|&s| s != supplier && !others(s))
                    .collect();
                if let Some(&to) = targets.choose(rng) {
                    out.push(Move {
                        gene: g.start + p,
                        to,
                        weight: assignment_cost(g, p, cur),
                    });
                }
            } else if cur != supplier && g.eligible.contains(&supplier) && !others(supplier) {
                out.push(Move {
                    gene: g.start + p,
                    to: supplier,
                    weight: assignment_cost(g, p, supplier),
                });
            }
        }
    }
    out
}

/// Returns a chromosome that decodes to an allocation meeting dual-sourcing
/// distinctness, must-make, cannot-make and the budgets of the optimised
/// scope. Item rules are fixed gene by gene; budget violations are fixed by
/// moving the most expensive of a few sampled assignments off (or onto) the
/// offending supplier, resampling a whole item when no move exists.
pub fn repair(
    problem: &Problem<'_>,
    mut c: Chromosome,
    rng: &mut ChaCha8Rng,
) -> Result<Chromosome, RepairError> {
    let props = problem.inst.proportions();
    let fix_all = |c: &mut Chromosome, rng: &mut ChaCha8Rng| -> Result<(), RepairError> {
        for g in &problem.groups {
            let mut genes: Vec<usize> = (0..props).map(|p| c.gene(g.start + p)).collect();
            let before = genes.clone();
            fix_group(problem, g, &mut genes, rng)?;
            if genes != before {
                for (p, x) in genes.into_iter().enumerate() {
                    *c.gene_mut(g.start + p) = x;
                }
            }
        }
        Ok(())
    };
    fix_all(&mut c, rng)?;

    let inst = problem.inst;
    let check_tier1 = problem.scope != Scope::Forger;
    let check_tier2 = problem.scope != Scope::Machinist;
    for _ in 0..MAX_BUDGET_ROUNDS {
        let alloc = problem.decode(&c);
        let b = evaluate_unchecked(&problem.cm, &alloc);
        let mut violation = None;
        if check_tier1 {
            violation = inst
                .tier1_budget
                .iter()
                .enumerate()
                .find(|(j, bud)| !bud.contains(b.per_supplier_spend_tier1[*j]))
                .map(|(j, bud)| (1u8, j, b.per_supplier_spend_tier1[j] > bud.max));
        }
        if violation.is_none() && check_tier2 {
            violation = inst
                .tier2_budget
                .iter()
                .enumerate()
                .find(|(l, bud)| !bud.contains(b.per_supplier_spend_tier2[*l]))
                .map(|(l, bud)| (2u8, l, b.per_supplier_spend_tier2[l] > bud.max));
        }
        let Some((tier, supplier, over)) = violation else {
            return Ok(c);
        };
        let z = if check_tier2 {
            problem.cm.requirements(&alloc.tier1)
        } else {
            Vec::new()
        };
        let moves = budget_moves(problem, &c, tier, supplier, over, &z, rng);
        if moves.is_empty() {
            let tier_groups: Vec<&Group> = problem.groups.iter().filter(|g| g.tier == tier).collect();
            let Some(g) = tier_groups.choose(rng) else {
                break;
            };
            let mut genes: Vec<usize> = (0..props).map(|_| rng.random_range(0..g.suppliers)).collect();
            fix_group(problem, g, &mut genes, rng)?;
            for (p, x) in genes.into_iter().enumerate() {
                *c.gene_mut(g.start + p) = x;
            }
            continue;
        }
        let sample: Vec<&Move> = if moves.len() <= MOVE_SAMPLE {
            moves.iter().collect()
        } else {
            moves.choose_multiple(rng, MOVE_SAMPLE).collect()
        };
        let best = sample
            .into_iter()
            .max_by(|a, b| a.weight.total_cmp(&b.weight).then(b.gene.cmp(&a.gene)))
            .expect("non-empty sample");
        *c.gene_mut(best.gene) = best.to;
    }
    // final verdict on the last state
    let alloc = problem.decode(&c);
    let b = evaluate_unchecked(&problem.cm, &alloc);
    if check_tier1 {
        if let Some((j, _)) = inst
            .tier1_budget
            .iter()
            .enumerate()
            .find(|(j, bud)| !bud.contains(b.per_supplier_spend_tier1[*j]))
        {
            return Err(stuck(format!("budget of tier1 supplier {j}")));
        }
    }
    if check_tier2 {
        if let Some((l, _)) = inst
            .tier2_budget
            .iter()
            .enumerate()
            .find(|(l, bud)| !bud.contains(b.per_supplier_spend_tier2[*l]))
        {
            return Err(stuck(format!("budget of tier2 supplier {l}")));
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::check_constraints;
    use crate::instance::{generate_instance, CountsPerKind, GeneratorConfig, ProblemShape, SourcingMode};
    use crate::milp::ModelKind;
    use rand::SeedableRng;

    fn inst(mode: SourcingMode, must: usize) -> crate::SupplyChainInstance {
        generate_instance(&GeneratorConfig {
            shape: ProblemShape {
                tier1_count: 4,
                tier2_count: 3,
                parts_blue: 2,
                parts_llv: 1,
                forgings_blue: 1,
                forgings_llv: 1,
            },
            must_make: CountsPerKind::uniform(must),
            sourcing_mode: mode,
            seed: 5,
            ..Default::default()
        })
        .unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(9)
    }

    #[test]
    fn duplicate_proportions_move_the_second_gene() {
        let inst = inst(SourcingMode::Dual, 0);
        let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let c = Chromosome {
            tier1_genes: vec![3, 3, 0, 1, 1, 2],
            tier2_genes: vec![],
        };
        let fixed = repair(&pr, c, &mut rng()).unwrap();
        assert_eq!(fixed.tier1_genes[0], 3);
        assert_ne!(fixed.tier1_genes[1], 3);
        assert_eq!(&fixed.tier1_genes[2..], &[0, 1, 1, 2]);
    }

    #[test]
    fn must_make_lands_on_one_proportion() {
        let inst = inst(SourcingMode::Dual, 1);
        let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let &(part, j) = inst.must_make_tier1.iter().next().unwrap();
        let other = (j + 1) % 4;
        let mut genes = vec![0, 1, 0, 1, 0, 1];
        genes[part * 2] = other;
        genes[part * 2 + 1] = (j + 2) % 4;
        let fixed = repair(&pr, Chromosome { tier1_genes: genes, tier2_genes: vec![] }, &mut rng()).unwrap();
        let chosen = &fixed.tier1_genes[part * 2..part * 2 + 2];
        assert_eq!(chosen.iter().filter(|&&x| x == j).count(), 1);
    }

    #[test]
    fn feasible_chromosome_is_a_fixed_point() {
        let inst = inst(SourcingMode::Single, 0);
        let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
        let mut r = rng();
        let c = repair(&pr, pr.random_chromosome(&mut r), &mut r).unwrap();
        let again = repair(&pr, c.clone(), &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn repaired_random_chromosomes_satisfy_every_constraint() {
        for mode in [SourcingMode::Single, SourcingMode::Dual] {
            let inst = inst(mode, 1);
            let pr = Problem::new(&inst, ModelKind::Integrated, None).unwrap();
            let mut r = rng();
            for _ in 0..50 {
                let c = repair(&pr, pr.random_chromosome(&mut r), &mut r).unwrap();
                let alloc = pr.decode(&c);
                let b = crate::evaluate(&inst, &alloc).unwrap();
                assert!(check_constraints(&inst, &alloc, &b, Scope::Integrated).is_empty());
            }
        }
    }

    #[test]
    fn tight_budget_is_repaired_by_moving_spend() {
        let mut inst = inst(SourcingMode::Single, 0);
        let pr0 = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let all_on_zero = Chromosome {
            tier1_genes: vec![0, 0, 0],
            tier2_genes: vec![],
        };
        let spend = pr0.cost(&all_on_zero);
        inst.tier1_budget[0].max = spend * 0.5;
        let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let fixed = repair(&pr, all_on_zero, &mut rng()).unwrap();
        let alloc = pr.decode(&fixed);
        let b = crate::evaluate(&inst, &alloc).unwrap();
        assert!(b.per_supplier_spend_tier1[0] <= spend * 0.5 + 1e-6);
    }

    #[test]
    fn impossible_budget_reports_the_stuck_constraint() {
        let mut inst = inst(SourcingMode::Single, 0);
        for b in &mut inst.tier1_budget {
            b.max = 1.0;
        }
        let pr = Problem::new(&inst, ModelKind::Machinist, None).unwrap();
        let err = repair(&pr, pr.random_chromosome(&mut rng()), &mut rng()).unwrap_err();
        assert!(err.constraint.contains("budget of tier1"), "{err}");
    }
}

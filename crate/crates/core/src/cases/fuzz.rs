//! Pool-based fuzzing of parameters, read fields and mock returns.
//!
//! Every variable gets a value pool: boundary values, each literal its
//! conditions compare against together with its neighbours, and a few
//! seeded random values. Candidates are emitted in two phases. The diagonal
//! phase walks all pools in lockstep so every pool value shows up within the
//! first `max |pool|` candidates. The remaining budget then enumerates the
//! full pool product when it fits, or draws seeded random combinations when
//! it does not.

use std::collections::HashSet;

use thiserror::Error;

use crate::ast::ScalarType;
use crate::decision::Decision;
use crate::exec::{Domains, MethodTarget};
use crate::rng::SplitMix64;
use crate::value::Scalar;

use super::{Origin, SearchSpace, SeedInfo, TestCase, VarKind, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzError {
    #[error("fuzz budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone)]
pub struct FuzzCandidates {
    pub space: SearchSpace,
    pub pools: Vec<Vec<Scalar>>,
    pub cases: Vec<TestCase>,
}

/// Default pool for one variable. Draws from `rng` only for numeric types.
pub fn default_pool(var: &Variable, rng: &mut SplitMix64) -> Vec<Scalar> {
    let mut pool = Vec::new();
    match var.ty {
        ScalarType::Bool => pool.extend([Scalar::Bool(false), Scalar::Bool(true)]),
        ScalarType::Int => {
            pool.extend([0, 1, -1, i64::MIN, i64::MAX].map(Scalar::Int));
            for lit in &var.literals {
                if let Scalar::Int(l) = lit {
                    pool.extend([*l, l.wrapping_sub(1), l.wrapping_add(1)].map(Scalar::Int));
                }
            }
            pool.push(Scalar::Int(rng.range_i64(-1000, 1000)));
            pool.push(Scalar::Int(rng.next_u64() as i64));
        }
        ScalarType::Float => {
            pool.extend([0.0, 1.0, -1.0, f64::MIN, f64::MAX].map(Scalar::Float));
            for lit in &var.literals {
                if let Scalar::Float(l) = lit {
                    pool.extend([*l, l.next_up(), l.next_down()].map(Scalar::Float));
                }
            }
            pool.extend([f64::INFINITY, f64::NEG_INFINITY].map(Scalar::Float));
            pool.push(Scalar::Float(rng.unit_f64() * 2000.0 - 1000.0));
        }
    }
    dedup(pool)
}

fn dedup(values: Vec<Scalar>) -> Vec<Scalar> {
    let mut seen = HashSet::new();
    values.into_iter().filter(|v| seen.insert(*v)).collect()
}

fn override_for<'d>(var: &Variable, pools: &'d Domains) -> Option<&'d Vec<Scalar>> {
    match &var.kind {
        VarKind::Param(n) => pools.params.get(n),
        VarKind::Field(n) => pools.fields.get(n),
        VarKind::Mock { key, .. } => pools.mocks.get(key),
    }
    .filter(|v| !v.is_empty())
}

/// Emits at most `budget` candidates for the target method. `overrides`
/// replaces the default pool of any variable it names. The output depends
/// only on the method, `budget`, `seed` and `overrides`.
pub fn fuzz_candidates(
    target: &MethodTarget<'_>,
    decisions: &[Decision],
    budget: usize,
    seed: u64,
    overrides: Option<&Domains>,
) -> Result<FuzzCandidates, FuzzError> {
    if budget == 0 {
        return Err(FuzzError::ZeroBudget);
    }
    let space = SearchSpace::of(target, decisions);
    let mut rng = SplitMix64::new(seed);
    let pools: Vec<Vec<Scalar>> = space
        .vars
        .iter()
        .map(|var| {
            // Always draw, so an override does not shift other variables' pools.
            let default = default_pool(var, &mut rng);
            match overrides.and_then(|o| override_for(var, o)) {
                Some(values) => dedup(values.iter().filter_map(|v| v.coerce(var.ty)).collect()),
                None => default,
            }
        })
        .collect();

    let mut picks: Vec<Vec<usize>> = Vec::new();
    let mut emitted: HashSet<Vec<usize>> = HashSet::new();
    let widest = pools.iter().map(Vec::len).max().unwrap_or(1);
    for i in 0..widest.min(budget) {
        let pick: Vec<usize> = pools.iter().map(|p| i % p.len()).collect();
        if emitted.insert(pick.clone()) {
            picks.push(pick);
        }
    }

    let remaining = budget - picks.len();
    let product = pools
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
    match product {
        Some(total) if total <= remaining + picks.len() => {
            let mut index = vec![0usize; pools.len()];
            for _ in 0..total {
                if emitted.insert(index.clone()) {
                    picks.push(index.clone());
                }
                for pos in (0..index.len()).rev() {
                    index[pos] += 1;
                    if index[pos] < pools[pos].len() {
                        break;
                    }
                    index[pos] = 0;
                }
            }
        }
        _ => {
            for _ in 0..remaining {
                picks.push(pools.iter().map(|p| rng.below(p.len() as u64) as usize).collect());
            }
        }
    }
    picks.truncate(budget);

    let name = target.qualified_name();
    let cases = picks
        .iter()
        .enumerate()
        .map(|(i, pick)| {
            let values: Vec<Scalar> = pick.iter().zip(&pools).map(|(&k, p)| p[k]).collect();
            space.to_case(
                format!("{name}#fuzz{i}"),
                &values,
                Origin::Fuzzed,
                Some(SeedInfo { seed, index: i as u64 }),
            )
        })
        .collect();
    Ok(FuzzCandidates { space, pools, cases })
}

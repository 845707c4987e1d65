//! Hoisted nested summation over boxed integer variables.
//!
//! Both the covariance oracle and the truncated amplitudes reduce to sums of
//! factor products over free integer variables in `-n..=n`, where every
//! factor depends on its arguments only through spectral weights
//! `h2 = base + sum of squares`. The evaluator nests the loops in variable
//! order, binds each factor at its deepest variable, hoists the tail out of
//! loops it does not reference, and memoizes subtree values keyed by the
//! partial squared sums the tail can see. That turns radially symmetric
//! sums with 7+ variables into histogram-sized work without giving up
//! exactness.

use std::collections::HashMap;

use crate::error::{DiagramError, Result};

/// A squared-weight argument: `h2 = base + sum of vals[v]^2 over vars`.
#[derive(Debug, Clone)]
pub struct SqArg {
    /// Free-variable indices, repeats allowed for repeated components.
    pub vars: Vec<usize>,
    /// Constant part: 1 plus the squares of any fixed components.
    pub base: i64,
}

impl SqArg {
    fn partial(&self, vals: &[i64], level: usize) -> i64 {
        let mut total = self.base;
        for &v in &self.vars {
            if v < level {
                total += vals[v] * vals[v];
            }
        }
        total
    }

    fn full(&self, vals: &[i64]) -> f64 {
        let mut total = self.base;
        for &v in &self.vars {
            total += vals[v] * vals[v];
        }
        total as f64
    }
}

/// What a factor computes from the `h2` values of its arguments.
#[derive(Debug, Clone)]
pub enum FactorKind {
    /// `h2^exponent`.
    Power {
        /// The (real) exponent applied to the single argument.
        exponent: f64,
    },
    /// The propagator kernel supplied to [`evaluate`].
    Covariance,
    /// Renormalized tadpole bound: `min(e,i) / (i * ihat)` on args `[e,i,ihat]`.
    MelonOne,
    /// Renormalized snowball bound on args `[e,s,shat,d,dhat]`:
    /// `min(e,s) min(s,d) / (s shat^2 d dhat)`.
    MelonTwo,
}

/// One multiplicative factor of the summand.
#[derive(Debug, Clone)]
pub struct SumFactor {
    /// How the argument weights combine.
    pub kind: FactorKind,
    /// Indices into the problem's argument list.
    pub args: Vec<usize>,
}

/// Most arguments any factor kind takes.
const MAX_FACTOR_ARGS: usize = 5;

/// Per-level memo entry cap; beyond it lookups continue but inserts stop.
const MEMO_CAP: usize = 1 << 19;

impl SumFactor {
    fn eval(&self, h2: &[f64], cov: &dyn Fn(f64) -> f64) -> f64 {
        match &self.kind {
            FactorKind::Power { exponent } => {
                let x = h2[0];
                if *exponent == -1.0 {
                    1.0 / x
                } else if *exponent == 1.0 {
                    x
                } else {
                    x.powf(*exponent)
                }
            }
            FactorKind::Covariance => cov(h2[0]),
            FactorKind::MelonOne => h2[0].min(h2[1]) / (h2[1] * h2[2]),
            FactorKind::MelonTwo => {
                h2[0].min(h2[1]) * h2[1].min(h2[3]) / (h2[1] * h2[2] * h2[2] * h2[3] * h2[4])
            }
        }
    }
}

/// A full summation problem.
#[derive(Debug, Clone)]
pub struct SumProblem {
    /// Number of free variables, each summed over `-n..=n`.
    pub vars: usize,
    /// Squared-weight arguments referenced by the factors.
    pub args: Vec<SqArg>,
    /// The multiplicative factors of the summand.
    pub factors: Vec<SumFactor>,
    /// Constant multiplier.
    pub prefactor: f64,
}

struct Ctx<'a> {
    problem: &'a SumProblem,
    cov: &'a dyn Fn(f64) -> f64,
    n: i64,
    vals: Vec<i64>,
    factors_at: Vec<Vec<usize>>,
    child_independent: Vec<bool>,
    key_args: Vec<Vec<usize>>,
    memo_enabled: Vec<bool>,
    memo: Vec<HashMap<Vec<i64>, f64>>,
    steps: u128,
    budget: u128,
}

impl Ctx<'_> {
    fn factor_product(&self, level: usize) -> f64 {
        let mut product = 1.0;
        let mut h2 = [0.0f64; MAX_FACTOR_ARGS];
        for &f in &self.factors_at[level] {
            let factor = &self.problem.factors[f];
            for (slot, &a) in h2.iter_mut().zip(&factor.args) {
                *slot = self.problem.args[a].full(&self.vals);
            }
            product *= factor.eval(&h2[..factor.args.len()], self.cov);
            if product == 0.0 {
                return 0.0;
            }
        }
        product
    }

    fn rec(&mut self, level: usize) -> Result<f64> {
        if level == self.problem.vars {
            return Ok(1.0);
        }
        let key = if self.memo_enabled[level] {
            let key: Vec<i64> = self.key_args[level]
                .iter()
                .map(|&a| self.problem.args[a].partial(&self.vals, level))
                .collect();
            if let Some(&hit) = self.memo[level].get(&key) {
                return Ok(hit);
            }
            Some(key)
        } else {
            None
        };
        self.steps += (2 * self.n + 1) as u128;
        if self.steps > self.budget {
            return Err(DiagramError::BudgetExceeded {
                steps: self.steps,
                cap: self.budget,
            });
        }
        let mut total = 0.0;
        if self.child_independent[level] {
            let child = self.rec(level + 1)?;
            if child != 0.0 {
                for v in -self.n..=self.n {
                    self.vals[level] = v;
                    total += self.factor_product(level);
                }
                total *= child;
            }
        } else {
            for v in -self.n..=self.n {
                self.vals[level] = v;
                let product = self.factor_product(level);
                if product != 0.0 {
                    total += product * self.rec(level + 1)?;
                }
            }
        }
        if let Some(key) = key {
            if self.memo[level].len() < MEMO_CAP {
                self.memo[level].insert(key, total);
            }
        }
        Ok(total)
    }
}

/// Evaluates the problem exactly, with `cov` as the propagator kernel and a
/// step budget guarding runaway sums.
pub fn evaluate(
    problem: &SumProblem,
    n: i64,
    cov: &dyn Fn(f64) -> f64,
    budget: u128,
) -> Result<f64> {
    if n < 0 {
        return Err(DiagramError::InvalidArgument(format!(
            "negative truncation {n}"
        )));
    }
    for factor in &problem.factors {
        let want = match factor.kind {
            FactorKind::Power { .. } | FactorKind::Covariance => 1,
            FactorKind::MelonOne => 3,
            FactorKind::MelonTwo => 5,
        };
        if factor.args.len() != want || factor.args.iter().any(|&a| a >= problem.args.len()) {
            return Err(DiagramError::InvalidArgument(
                "factor argument list does not match its kind".into(),
            ));
        }
    }
    if problem
        .args
        .iter()
        .any(|arg| arg.vars.iter().any(|&v| v >= problem.vars))
    {
        return Err(DiagramError::InvalidArgument(
            "argument references a variable outside the problem".into(),
        ));
    }
    let vars = problem.vars;
    let level_of = |factor: &SumFactor| -> Option<usize> {
        factor
            .args
            .iter()
            .flat_map(|&a| problem.args[a].vars.iter().copied())
            .max()
    };
    let mut factors_at = vec![Vec::new(); vars];
    let mut preloop = 1.0;
    let cov_owned = cov;
    for (id, factor) in problem.factors.iter().enumerate() {
        match level_of(factor) {
            Some(level) => factors_at[level].push(id),
            None => {
                let h2: Vec<f64> = factor
                    .args
                    .iter()
                    .map(|&a| problem.args[a].base as f64)
                    .collect();
                preloop *= factor.eval(&h2, cov_owned);
            }
        }
    }
    if preloop == 0.0 || problem.prefactor == 0.0 {
        return Ok(0.0);
    }
    let uses_var = |factor: &SumFactor, v: usize| -> bool {
        factor
            .args
            .iter()
            .any(|&a| problem.args[a].vars.contains(&v))
    };
    let mut child_independent = vec![true; vars];
    let mut key_args = vec![Vec::new(); vars];
    for level in 0..vars {
        for (id, factor) in problem.factors.iter().enumerate() {
            let flevel = match level_of(factor) {
                Some(l) => l,
                None => continue,
            };
            if flevel > level && uses_var(factor, level) {
                child_independent[level] = false;
            }
            if flevel >= level {
                for &a in &problem.factors[id].args {
                    if !key_args[level].contains(&a) {
                        key_args[level].push(a);
                    }
                }
            }
        }
        key_args[level].sort_unstable();
    }
    // Every inner level is memo-eligible: radially symmetric partial keys
    // collapse hard, and the per-level cap bounds memory when they do not.
    let memo_enabled: Vec<bool> = (0..vars).map(|level| level > 0).collect();
    let mut ctx = Ctx {
        problem,
        cov,
        n,
        vals: vec![0; vars],
        factors_at,
        child_independent,
        key_args,
        memo_enabled,
        memo: vec![HashMap::new(); vars],
        steps: 0,
        budget,
    };
    let inner = ctx.rec(0)?;
    Ok(problem.prefactor * preloop * inner)
}

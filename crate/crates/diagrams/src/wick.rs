//! Exact equal-time Wick covariances for the spectral noise objects.
//!
//! Each object is a polynomial in the stationary free field, whose Fourier
//! coefficients are jointly Gaussian with diagonal covariance. Uncentered
//! second moments therefore reduce, by Wick's theorem, to sums over pairings
//! of mode-delta constraints. The engine enumerates pairings, solves the
//! resulting signed mode identifications, and lowers each surviving pairing
//! to a hoisted weighted sum over the free modes, so the reported numbers
//! are exact at the given truncation rather than Monte Carlo estimates.

use tff_core::lattice::{Mode, ModeLattice};
use tff_core::{renorm, rho};

use crate::error::{DiagramError, Result};
use crate::skeleton::{ObjectKind, SkeletonSpec};
use crate::sum::{self, FactorKind, SqArg, SumFactor, SumProblem};

/// One component of a Fourier mode: a free summation variable with a sign,
/// or a fixed integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompRef {
    /// `+v` for summation variable `v`.
    Plus(usize),
    /// `-v` for summation variable `v`.
    Minus(usize),
    /// A fixed component.
    Const(i64),
}

impl CompRef {
    fn negated(self) -> Self {
        match self {
            CompRef::Plus(v) => CompRef::Minus(v),
            CompRef::Minus(v) => CompRef::Plus(v),
            CompRef::Const(x) => CompRef::Const(-x),
        }
    }
}

/// A free-field factor `X` evaluated at a composite mode.
#[derive(Debug, Clone)]
pub struct FieldFactor {
    /// Mode components, one per dimension.
    pub mode: Vec<CompRef>,
}

/// A deterministic spectral weight `<mode>^(2 exponent)`.
#[derive(Debug, Clone)]
pub struct WeightFactor {
    /// Mode components, one per dimension.
    pub mode: Vec<CompRef>,
    /// Half the weight exponent: the factor is `(1+|mode|^2)^exponent`.
    pub exponent: f64,
}

/// One additive term of an uncentered second moment.
#[derive(Debug, Clone)]
pub struct MomentTerm {
    /// Number of summation-variable slots the components may reference.
    pub comps: usize,
    /// Constant multiplier.
    pub prefactor: f64,
    /// Gaussian factors to pair.
    pub fields: Vec<FieldFactor>,
    /// Deterministic weights multiplying the expectation.
    pub weights: Vec<WeightFactor>,
}

/// Which stationary covariance dresses the field modes.
#[derive(Debug, Clone, Copy)]
pub enum CovKernel {
    /// Sharp truncation: `C(m) = <m>^-2` inside the box.
    Hard,
    /// Scale-flow profile: `C(m) = rho_t(<m>)^2 <m>^-2`.
    Scale {
        /// Flow scale.
        t: f64,
    },
}

impl CovKernel {
    fn cov(&self) -> Box<dyn Fn(f64) -> f64> {
        match *self {
            CovKernel::Hard => Box::new(|h2: f64| 1.0 / h2),
            CovKernel::Scale { t } => Box::new(move |h2: f64| {
                let r = rho::rho_t(h2.sqrt(), t);
                r * r / h2
            }),
        }
    }

    fn validate_box(&self, n: i64) -> Result<()> {
        if let CovKernel::Scale { t } = *self {
            if t <= 0.0 {
                return Err(DiagramError::InvalidArgument(
                    "scale t must be positive".into(),
                ));
            }
            let boundary = (1.0 + (n * n) as f64).sqrt();
            if rho::rho_t(boundary, t) != 0.0 {
                return Err(DiagramError::InvalidArgument(format!(
                    "truncation {n} does not enclose the support of the scale-{t} profile"
                )));
            }
        }
        Ok(())
    }

    fn mass_counterterm(&self, d: usize, n: i64) -> Result<f64> {
        match *self {
            CovKernel::Hard => Ok(renorm::c1(d, n)),
            CovKernel::Scale { t } => renorm::c1_bg(d, t, n)
                .map_err(|e| DiagramError::InvalidArgument(e.to_string())),
        }
    }
}

/// Result of an exact covariance evaluation.
#[derive(Debug, Clone)]
pub struct WickCovariance {
    /// The weighted total `sum_m <m>^(2 beta) E|tau_m|^2` (with the object's
    /// own operator weights for operator-valued objects).
    pub total: f64,
    /// Per-mode uncentered covariances `E|tau_m|^2` in lattice index order.
    pub per_mode: Option<Vec<f64>>,
}

struct SignedUf {
    parent: Vec<usize>,
    sign: Vec<i8>,
    value: Vec<Option<i64>>,
}

impl SignedUf {
    fn new(k: usize) -> Self {
        Self {
            parent: (0..k).collect(),
            sign: vec![1; k],
            value: vec![None; k],
        }
    }

    fn find(&mut self, x: usize) -> (usize, i8) {
        if self.parent[x] == x {
            return (x, 1);
        }
        let p = self.parent[x];
        let (root, ps) = self.find(p);
        self.parent[x] = root;
        self.sign[x] *= ps;
        (root, self.sign[x])
    }

    fn force(&mut self, x: usize, v: i64) -> bool {
        let (root, s) = self.find(x);
        let rv = (s as i64) * v;
        match self.value[root] {
            None => {
                self.value[root] = Some(rv);
                true
            }
            Some(w) => w == rv,
        }
    }

    fn relate(&mut self, x: usize, y: usize, rel: i8) -> bool {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        let q = sx * rel * sy;
        if rx == ry {
            if q == 1 {
                return true;
            }
            return match self.value[rx] {
                None => {
                    self.value[rx] = Some(0);
                    true
                }
                Some(w) => w == 0,
            };
        }
        self.parent[rx] = ry;
        self.sign[rx] = q;
        if let Some(w) = self.value[rx].take() {
            let want = (q as i64) * w;
            match self.value[ry] {
                None => self.value[ry] = Some(want),
                Some(u) => return u == want,
            }
        }
        true
    }

    /// Applies `a + b = 0`; false when the pairing is inconsistent.
    fn constrain(&mut self, a: CompRef, b: CompRef) -> bool {
        match (a, b) {
            (CompRef::Const(x), CompRef::Const(y)) => x + y == 0,
            (CompRef::Const(x), CompRef::Plus(v)) | (CompRef::Plus(v), CompRef::Const(x)) => {
                self.force(v, -x)
            }
            (CompRef::Const(x), CompRef::Minus(v)) | (CompRef::Minus(v), CompRef::Const(x)) => {
                self.force(v, x)
            }
            (CompRef::Plus(v), CompRef::Plus(w)) | (CompRef::Minus(v), CompRef::Minus(w)) => {
                self.relate(v, w, -1)
            }
            (CompRef::Plus(v), CompRef::Minus(w)) | (CompRef::Minus(v), CompRef::Plus(w)) => {
                self.relate(v, w, 1)
            }
        }
    }
}

fn for_each_pairing<F>(k: usize, f: &mut F) -> Result<()>
where
    F: FnMut(&[(usize, usize)]) -> Result<()>,
{
    fn rec<F>(avail: &[usize], pairs: &mut Vec<(usize, usize)>, f: &mut F) -> Result<()>
    where
        F: FnMut(&[(usize, usize)]) -> Result<()>,
    {
        if avail.is_empty() {
            return f(pairs);
        }
        let a = avail[0];
        for j in 1..avail.len() {
            let b = avail[j];
            let rest: Vec<usize> = avail[1..]
                .iter()
                .copied()
                .filter(|&x| x != b)
                .collect();
            pairs.push((a, b));
            rec(&rest, pairs, f)?;
            pairs.pop();
        }
        Ok(())
    }
    let avail: Vec<usize> = (0..k).collect();
    rec(&avail, &mut Vec::new(), f)
}

enum Resolved {
    Var(usize),
    Fixed(i64),
}

fn resolve(comp: CompRef, uf: &mut SignedUf) -> Resolved {
    match comp {
        CompRef::Const(x) => Resolved::Fixed(x),
        CompRef::Plus(v) => {
            let (root, s) = uf.find(v);
            match uf.value[root] {
                Some(w) => Resolved::Fixed((s as i64) * w),
                None => Resolved::Var(root),
            }
        }
        CompRef::Minus(v) => {
            let (root, s) = uf.find(v);
            match uf.value[root] {
                Some(w) => Resolved::Fixed(-(s as i64) * w),
                None => Resolved::Var(root),
            }
        }
    }
}

/// Builds the squared-weight argument of a composite mode; `None` when a
/// fixed component falls outside the box (the factor vanishes).
fn resolve_arg(
    mode: &[CompRef],
    uf: &mut SignedUf,
    var_of_root: &[Option<usize>],
    n: i64,
    boxed: bool,
) -> Option<SqArg> {
    let mut vars = Vec::new();
    let mut base = 1i64;
    for &comp in mode {
        match resolve(comp, uf) {
            Resolved::Fixed(x) => {
                if boxed && x.abs() > n {
                    return None;
                }
                base += x * x;
            }
            Resolved::Var(root) => {
                vars.push(var_of_root[root].expect("referenced root has a variable"));
            }
        }
    }
    Some(SqArg { vars, base })
}

fn evaluate_term(
    term: &MomentTerm,
    n: i64,
    cov: &dyn Fn(f64) -> f64,
    budget: u128,
) -> Result<f64> {
    if term.fields.len() % 2 == 1 {
        return Ok(0.0);
    }
    let mut appears = vec![false; term.comps];
    let all_modes = term
        .fields
        .iter()
        .map(|f| &f.mode)
        .chain(term.weights.iter().map(|w| &w.mode));
    for mode in all_modes {
        for comp in mode {
            if let CompRef::Plus(v) | CompRef::Minus(v) = *comp {
                appears[v] = true;
            }
        }
    }
    let mut total = 0.0;
    for_each_pairing(term.fields.len(), &mut |pairs| {
        let mut uf = SignedUf::new(term.comps);
        for &(i, j) in pairs {
            for (a, b) in term.fields[i].mode.iter().zip(&term.fields[j].mode) {
                if !uf.constrain(*a, *b) {
                    return Ok(());
                }
            }
        }
        let mut var_of_root = vec![None; term.comps];
        let mut vars = 0usize;
        for comp in 0..term.comps {
            if !appears[comp] {
                continue;
            }
            let (root, _) = uf.find(comp);
            if uf.value[root].is_none() && var_of_root[root].is_none() {
                var_of_root[root] = Some(vars);
                vars += 1;
            }
        }
        let mut args = Vec::new();
        let mut factors = Vec::new();
        for &(i, _) in pairs {
            match resolve_arg(&term.fields[i].mode, &mut uf, &var_of_root, n, true) {
                Some(arg) => {
                    factors.push(SumFactor {
                        kind: FactorKind::Covariance,
                        args: vec![args.len()],
                    });
                    args.push(arg);
                }
                None => return Ok(()),
            }
        }
        for weight in &term.weights {
            if weight.exponent == 0.0 {
                continue;
            }
            let arg = resolve_arg(&weight.mode, &mut uf, &var_of_root, n, false)
                .expect("weights carry no box constraint");
            factors.push(SumFactor {
                kind: FactorKind::Power {
                    exponent: weight.exponent,
                },
                args: vec![args.len()],
            });
            args.push(arg);
        }
        let problem = SumProblem {
            vars,
            args,
            factors,
            prefactor: 1.0,
        };
        total += sum::evaluate(&problem, n, cov, budget)?;
        Ok(())
    })?;
    Ok(term.prefactor * total)
}

fn other_axes(d: usize, color: usize) -> Vec<usize> {
    (0..d).filter(|&a| a != color - 1).collect()
}

fn field(mode: Vec<CompRef>) -> FieldFactor {
    FieldFactor { mode }
}

/// Terms for the free field: `sum_m <m>^(2 beta) C(m)`.
fn x_terms(d: usize, fixed: Option<&Mode>, weight: Option<f64>) -> Vec<MomentTerm> {
    let plus: Vec<CompRef> = (0..d)
        .map(|a| match fixed {
            Some(m) => CompRef::Const(m[a]),
            None => CompRef::Plus(a),
        })
        .collect();
    let minus: Vec<CompRef> = plus.iter().map(|c| c.negated()).collect();
    let weights = weight
        .map(|exponent| {
            vec![WeightFactor {
                mode: plus.clone(),
                exponent,
            }]
        })
        .unwrap_or_default();
    vec![MomentTerm {
        comps: if fixed.is_some() { 0 } else { d },
        prefactor: 1.0,
        fields: vec![field(plus), field(minus)],
        weights,
    }]
}

/// Terms for the quadratic trace object glued on the first slot at `f = 1`:
/// `tau_m = [m_chat = 0] (sum_q X_{-(q,0)} X_{(q,m_c)} - ct delta_{m,0})`.
fn x2m_terms(
    d: usize,
    color: usize,
    fixed: Option<&Mode>,
    weight: Option<f64>,
    ct: f64,
) -> Vec<MomentTerm> {
    let ax = color - 1;
    let oth = other_axes(d, color);
    if let Some(m) = fixed {
        if oth.iter().any(|&a| m[a] != 0) {
            return Vec::new();
        }
    }
    let (mc_plus, base) = match fixed {
        Some(m) => (CompRef::Const(m[ax]), 0usize),
        None => (CompRef::Plus(0), 1usize),
    };
    let mc_minus = mc_plus.negated();
    let comps = base + 2 * (d - 1);
    let make = |ax_val: CompRef, hat: &dyn Fn(usize) -> CompRef| -> Vec<CompRef> {
        let mut mode = vec![CompRef::Const(0); d];
        mode[ax] = ax_val;
        for (i, &a) in oth.iter().enumerate() {
            mode[a] = hat(i);
        }
        mode
    };
    let q = |i: usize| base + i;
    let p = |i: usize| base + (d - 1) + i;
    let mut weight_mode = vec![CompRef::Const(0); d];
    weight_mode[ax] = mc_plus;
    let weights = weight
        .map(|exponent| {
            vec![WeightFactor {
                mode: weight_mode.clone(),
                exponent,
            }]
        })
        .unwrap_or_default();
    let mut terms = vec![MomentTerm {
        comps,
        prefactor: 1.0,
        fields: vec![
            field(make(CompRef::Const(0), &|i| CompRef::Minus(q(i)))),
            field(make(mc_plus, &|i| CompRef::Plus(q(i)))),
            field(make(CompRef::Const(0), &|i| CompRef::Minus(p(i)))),
            field(make(mc_minus, &|i| CompRef::Plus(p(i)))),
        ],
        weights,
    }];
    let at_zero = match fixed {
        Some(m) => m[ax] == 0,
        None => true,
    };
    if at_zero {
        terms.push(MomentTerm {
            comps,
            prefactor: -2.0 * ct,
            fields: vec![
                field(make(CompRef::Const(0), &|i| CompRef::Minus(q(i)))),
                field(make(CompRef::Const(0), &|i| CompRef::Plus(q(i)))),
            ],
            weights: Vec::new(),
        });
        terms.push(MomentTerm {
            comps,
            prefactor: ct * ct,
            fields: Vec::new(),
            weights: Vec::new(),
        });
    }
    terms
}

/// Terms for the quadratic object glued on the last slot at `f = 1`:
/// `tau_m = [m_c = 0] sum_w X_{(m_chat,w)} X_{-(0_chat,w)}`.
fn x2nm_terms(
    d: usize,
    color: usize,
    fixed: Option<&Mode>,
    weight: Option<f64>,
) -> Vec<MomentTerm> {
    let ax = color - 1;
    let oth = other_axes(d, color);
    if let Some(m) = fixed {
        if m[ax] != 0 {
            return Vec::new();
        }
    }
    let hat_plus = |i: usize| match fixed {
        Some(m) => CompRef::Const(m[oth[i]]),
        None => CompRef::Plus(i),
    };
    let base = if fixed.is_some() { 0 } else { d - 1 };
    let w1 = base;
    let w2 = base + 1;
    let comps = base + 2;
    let make = |ax_val: CompRef, hat: &dyn Fn(usize) -> CompRef| -> Vec<CompRef> {
        let mut mode = vec![CompRef::Const(0); d];
        mode[ax] = ax_val;
        for (i, &a) in oth.iter().enumerate() {
            mode[a] = hat(i);
        }
        mode
    };
    let mut weight_mode = vec![CompRef::Const(0); d];
    for (i, &a) in oth.iter().enumerate() {
        weight_mode[a] = hat_plus(i);
    }
    let weights = weight
        .map(|exponent| {
            vec![WeightFactor {
                mode: weight_mode.clone(),
                exponent,
            }]
        })
        .unwrap_or_default();
    vec![MomentTerm {
        comps,
        prefactor: 1.0,
        fields: vec![
            field(make(CompRef::Plus(w1), &|i| hat_plus(i))),
            field(make(CompRef::Minus(w1), &|_| CompRef::Const(0))),
            field(make(CompRef::Plus(w2), &|i| hat_plus(i).negated())),
            field(make(CompRef::Minus(w2), &|_| CompRef::Const(0))),
        ],
        weights,
    }]
}

/// Terms for the middle-slot operator: kernel `K(m,q) = X_{(m_chat,q_c)}
/// X_{(q_chat,m_c)}` tested against `<q>^-2alpha <m>^(2 beta)`.
fn xdotx_terms(d: usize, color: usize, alpha: f64, beta: f64) -> Vec<MomentTerm> {
    let ax = color - 1;
    let m_of = |a: usize| CompRef::Plus(a);
    let q_of = |a: usize| CompRef::Plus(d + a);
    let f1: Vec<CompRef> = (0..d).map(|a| if a == ax { q_of(a) } else { m_of(a) }).collect();
    let f2: Vec<CompRef> = (0..d).map(|a| if a == ax { m_of(a) } else { q_of(a) }).collect();
    let f3: Vec<CompRef> = f1.iter().map(|c| c.negated()).collect();
    let f4: Vec<CompRef> = f2.iter().map(|c| c.negated()).collect();
    vec![MomentTerm {
        comps: 2 * d,
        prefactor: 1.0,
        fields: vec![field(f1), field(f2), field(f3), field(f4)],
        weights: vec![
            WeightFactor {
                mode: (0..d).map(q_of).collect(),
                exponent: -alpha,
            },
            WeightFactor {
                mode: (0..d).map(m_of).collect(),
                exponent: beta,
            },
        ],
    }]
}

/// Terms for the renormalized cubic: all color pairs of the interaction
/// kernel, the mass-counterterm cross terms, and the squared counterterm.
fn x3_terms(d: usize, fixed: Option<&Mode>, weight: Option<f64>, ct: f64) -> Vec<MomentTerm> {
    let total_ct = d as f64 * ct;
    let m_plus = |a: usize| match fixed {
        Some(m) => CompRef::Const(m[a]),
        None => CompRef::Plus(a),
    };
    let m_minus = |a: usize| m_plus(a).negated();
    let base = if fixed.is_some() { 0 } else { d };
    let q_of = |a: usize| base + a;
    let p_of = |a: usize| base + d + a;
    let comps = base + 2 * d;
    let weights = |exp: Option<f64>| -> Vec<WeightFactor> {
        exp.map(|exponent| {
            vec![WeightFactor {
                mode: (0..d).map(m_plus).collect(),
                exponent,
            }]
        })
        .unwrap_or_default()
    };
    let half = |c: usize, conj: bool, var: &dyn Fn(usize) -> usize| -> Vec<FieldFactor> {
        // The color-c interaction kernel at +/-m with internal mode `var`.
        let ax = c - 1;
        let outer = |a: usize| if conj { m_minus(a) } else { m_plus(a) };
        let first: Vec<CompRef> = (0..d)
            .map(|a| if a == ax { CompRef::Plus(var(a)) } else { outer(a) })
            .collect();
        let mid: Vec<CompRef> = (0..d).map(|a| CompRef::Minus(var(a))).collect();
        let last: Vec<CompRef> = (0..d)
            .map(|a| if a == ax { outer(a) } else { CompRef::Plus(var(a)) })
            .collect();
        vec![field(first), field(mid), field(last)]
    };
    let mut terms = Vec::new();
    for c in 1..=d {
        for cp in 1..=d {
            let mut fields = half(c, false, &q_of);
            fields.extend(half(cp, true, &p_of));
            terms.push(MomentTerm {
                comps,
                prefactor: 1.0,
                fields,
                weights: weights(weight),
            });
        }
    }
    for c in 1..=d {
        let mut fields = half(c, false, &q_of);
        fields.push(field((0..d).map(m_minus).collect()));
        terms.push(MomentTerm {
            comps,
            prefactor: -2.0 * total_ct,
            fields,
            weights: weights(weight),
        });
    }
    terms.push(MomentTerm {
        comps,
        prefactor: total_ct * total_ct,
        fields: vec![
            field((0..d).map(m_plus).collect()),
            field((0..d).map(m_minus).collect()),
        ],
        weights: weights(weight),
    });
    terms
}

fn build_terms(
    spec: &SkeletonSpec,
    fixed: Option<&Mode>,
    alpha: f64,
    beta: f64,
    ct: f64,
) -> Result<Vec<MomentTerm>> {
    let weight = if fixed.is_some() { None } else { Some(beta) };
    match spec.tau {
        ObjectKind::X => Ok(x_terms(spec.d, fixed, weight)),
        ObjectKind::X2m => Ok(x2m_terms(spec.d, spec.color, fixed, weight, ct)),
        ObjectKind::X2nm => Ok(x2nm_terms(spec.d, spec.color, fixed, weight)),
        ObjectKind::XdotX => {
            if fixed.is_some() {
                return Err(DiagramError::InvalidArgument(
                    "the dotted operator has no per-mode table; it is tested \
                     against weights on both slots"
                        .into(),
                ));
            }
            Ok(xdotx_terms(spec.d, spec.color, alpha, beta))
        }
        ObjectKind::X3 => Ok(x3_terms(spec.d, fixed, weight, ct)),
        ObjectKind::Sym | ObjectKind::X2Pic2First | ObjectKind::X2Pic2Second => {
            Err(DiagramError::InvalidArgument(format!(
                "{:?} is time-integrated; only contraction enumeration is \
                 available for it",
                spec.tau
            )))
        }
    }
}

/// Exact stationary covariance of the object named by `spec` at truncation
/// `n`, weighted by `<m>^(2 beta)` (and `<q>^-2alpha` on the operator slot).
///
/// With `with_table`, also returns `E|tau_m|^2` per lattice mode. The budget
/// caps the summation steps of each lowered pairing sum.
pub fn wick_covariance(
    spec: &SkeletonSpec,
    n: i64,
    alpha: f64,
    beta: f64,
    kernel: &CovKernel,
    with_table: bool,
    budget: u128,
) -> Result<WickCovariance> {
    if spec.d < 2 {
        return Err(DiagramError::InvalidArgument(format!(
            "dimension {} below 2",
            spec.d
        )));
    }
    if spec.color < 1 || spec.color > spec.d || spec.color_second < 1 || spec.color_second > spec.d
    {
        return Err(DiagramError::InvalidArgument("color outside 1..=d".into()));
    }
    if n < 0 {
        return Err(DiagramError::InvalidArgument(format!(
            "negative truncation {n}"
        )));
    }
    kernel.validate_box(n)?;
    let needs_ct = matches!(spec.tau, ObjectKind::X2m | ObjectKind::X3);
    let ct = if needs_ct {
        kernel.mass_counterterm(spec.d, n)?
    } else {
        0.0
    };
    let cov = kernel.cov();
    let terms = build_terms(spec, None, alpha, beta, ct)?;
    let mut total = 0.0;
    for term in &terms {
        total += evaluate_term(term, n, cov.as_ref(), budget)?;
    }
    let per_mode = if with_table {
        let lat = ModeLattice::cubic(spec.d, n)
            .map_err(|e| DiagramError::InvalidArgument(e.to_string()))?;
        let mut table = Vec::with_capacity(lat.len());
        for idx in 0..lat.len() {
            let m = lat.mode(idx);
            let mode_terms = build_terms(spec, Some(&m), alpha, beta, ct)?;
            let mut value = 0.0;
            for term in &mode_terms {
                value += evaluate_term(term, n, cov.as_ref(), budget)?;
            }
            table.push(value);
        }
        Some(table)
    } else {
        None
    };
    Ok(WickCovariance { total, per_mode })
}

//! Truncated amplitudes of stranded graphs by direct strand-mode summation.
//!
//! Every closed strand carries a free mode in `-n..=n`; open strands are
//! amputated to mode zero. Each internal or external link contributes its
//! spectral weight to the power dictated by the link labels, so the raw
//! value is the literal truncated amplitude. With melon renormalization the
//! detected tadpole and snowball insertions are replaced by their subtracted
//! envelope factors, the uniform bounds that drive the convergence analysis,
//! which keeps the value finite as the truncation grows.

use std::collections::{HashMap, HashSet};

use crate::error::{DiagramError, Result};
use crate::graph::{OmegaWeights, TensorGraph};
use crate::sum::{self, FactorKind, SqArg, SumFactor, SumProblem};

/// Evaluation controls for [`truncated_amplitude`].
#[derive(Debug, Clone)]
pub struct AmplitudeOptions {
    /// Link-label weights for the root and time links.
    pub weights: OmegaWeights,
    /// Replace melonic insertions by their subtracted envelope factors.
    pub renormalize_melons: bool,
    /// Cap on summation steps.
    pub budget: u128,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        Self {
            weights: OmegaWeights::default(),
            renormalize_melons: false,
            budget: 1 << 38,
        }
    }
}

struct MelonOneSpec {
    link: usize,
    color: usize,
    entry: usize,
}

struct MelonTwoSpec {
    shell: usize,
    shell2: usize,
    inner: usize,
    color_outer: usize,
    color_inner: usize,
    entry: usize,
}

/// Evaluates the truncated amplitude of a validated stranded graph.
pub fn truncated_amplitude(
    graph: &TensorGraph,
    n: i64,
    opts: &AmplitudeOptions,
) -> Result<f64> {
    graph.analyze()?;
    if n < 0 {
        return Err(DiagramError::InvalidArgument(format!(
            "negative truncation {n}"
        )));
    }
    let strands = graph.strands()?;
    let links: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.color == 0)
        .map(|(i, _)| i)
        .collect();
    let mut node_link = vec![None; graph.node_count()];
    for &l in &links {
        let e = &graph.edges()[l];
        node_link[e.a] = Some(l);
        node_link[e.b] = Some(l);
    }

    let mut claimed: HashSet<usize> = HashSet::new();
    let mut melons_one: Vec<MelonOneSpec> = Vec::new();
    let mut melons_two: Vec<MelonTwoSpec> = Vec::new();
    if opts.renormalize_melons {
        let comp = graph.vertex_components();
        let mut comp_nodes: HashMap<usize, Vec<usize>> = HashMap::new();
        for node in 0..graph.node_count() {
            if !graph.is_external(node) {
                comp_nodes.entry(comp[node]).or_default().push(node);
            }
        }
        let legs_of = |vertex: &[usize], a: usize, b: usize| -> Option<(usize, usize)> {
            let rest: Vec<usize> = vertex.iter().copied().filter(|&v| v != a && v != b).collect();
            match rest.as_slice() {
                [x, y] => Some((*x, *y)),
                _ => None,
            }
        };
        let tadpoles: Vec<(usize, usize, usize, usize)> = links
            .iter()
            .filter_map(|&l| {
                let e = &graph.edges()[l];
                graph.melonic_pair(e.a, e.b).map(|c| (l, e.a, e.b, c))
            })
            .collect();
        for &(l_d, a, b, c_in) in &tadpoles {
            if claimed.contains(&l_d) {
                continue;
            }
            let Some(vertex) = comp_nodes.get(&comp[a]) else {
                continue;
            };
            let Some((x, y)) = legs_of(vertex, a, b) else {
                continue;
            };
            let (Some(ls1), Some(ls2)) = (node_link[x], node_link[y]) else {
                continue;
            };
            if ls1 == ls2 || claimed.contains(&ls1) || claimed.contains(&ls2) {
                continue;
            }
            let p = graph.edges()[ls1].other(x);
            let q = graph.edges()[ls2].other(y);
            if graph.is_external(p) || graph.is_external(q) {
                continue;
            }
            if comp[p] != comp[q] || comp[p] == comp[a] {
                continue;
            }
            let Some(c_out) = graph.melonic_pair(p, q) else {
                continue;
            };
            if c_out == c_in {
                continue;
            }
            let Some(outer) = comp_nodes.get(&comp[p]) else {
                continue;
            };
            let Some((u, _)) = legs_of(outer, p, q) else {
                continue;
            };
            let Some(entry) = node_link[u] else {
                continue;
            };
            claimed.extend([l_d, ls1, ls2]);
            melons_two.push(MelonTwoSpec {
                shell: ls1,
                shell2: ls2,
                inner: l_d,
                color_outer: c_out,
                color_inner: c_in,
                entry,
            });
        }
        for &(l_i, a, b, c) in &tadpoles {
            if claimed.contains(&l_i) {
                continue;
            }
            let Some(vertex) = comp_nodes.get(&comp[a]) else {
                continue;
            };
            let Some((x, _)) = legs_of(vertex, a, b) else {
                continue;
            };
            let Some(entry) = node_link[x] else {
                continue;
            };
            claimed.insert(l_i);
            melons_one.push(MelonOneSpec {
                link: l_i,
                color: c,
                entry,
            });
        }
        let marked: Vec<Option<usize>> = vec![graph.l_alpha(), graph.l_beta()];
        let marked_inside = marked
            .into_iter()
            .flatten()
            .chain(graph.time_links().iter().copied())
            .any(|l| claimed.contains(&l));
        if marked_inside {
            return Err(DiagramError::InvalidArgument(
                "a labeled link sits inside a melonic insertion; renormalized \
                 evaluation does not dress melon-internal links"
                    .into(),
            ));
        }
    }

    // Strand variables: outer strands first, melon-internal strands grouped
    // last so the hoisted summation collapses each insertion independently.
    let melon_claims: Vec<HashSet<usize>> = melons_two
        .iter()
        .map(|m| HashSet::from([m.shell, m.shell2, m.inner]))
        .chain(melons_one.iter().map(|m| HashSet::from([m.link])))
        .collect();
    let closed: Vec<usize> = (0..strands.len()).filter(|&s| strands[s].closed).collect();
    let melon_of_strand: Vec<Option<usize>> = closed
        .iter()
        .map(|&s| {
            let crossed: Vec<usize> = strands[s]
                .edges
                .iter()
                .copied()
                .filter(|&e| graph.edges()[e].color == 0)
                .collect();
            melon_claims
                .iter()
                .position(|claim| crossed.iter().all(|l| claim.contains(l)))
        })
        .collect();
    let mut order: Vec<usize> = Vec::with_capacity(closed.len());
    for (pos, &s) in closed.iter().enumerate() {
        if melon_of_strand[pos].is_none() {
            order.push(s);
        }
    }
    for group in 0..melon_claims.len() {
        for (pos, &s) in closed.iter().enumerate() {
            if melon_of_strand[pos] == Some(group) {
                order.push(s);
            }
        }
    }
    let mut var_of_strand = vec![None; strands.len()];
    for (var, &s) in order.iter().enumerate() {
        var_of_strand[s] = Some(var);
    }

    let weight_arg = |link: usize, exclude_color: Option<usize>| -> SqArg {
        let mut vars = Vec::new();
        for (si, strand) in strands.iter().enumerate() {
            if !strand.closed {
                continue;
            }
            if let Some(c) = exclude_color {
                if strand.colors == (0, c) {
                    continue;
                }
            }
            let mult = strand.edges.iter().filter(|&&e| e == link).count();
            for _ in 0..mult {
                vars.push(var_of_strand[si].expect("closed strand has a variable"));
            }
        }
        SqArg { vars, base: 1 }
    };

    let mut args: Vec<SqArg> = Vec::new();
    let mut factors: Vec<SumFactor> = Vec::new();
    let push_arg = |args: &mut Vec<SqArg>, arg: SqArg| -> usize {
        args.push(arg);
        args.len() - 1
    };
    for &l in &links {
        if claimed.contains(&l) {
            continue;
        }
        let w = &opts.weights;
        let ell = if graph.l_alpha() == Some(l) {
            w.alpha
        } else if graph.l_beta() == Some(l) {
            -w.beta
        } else if graph.time_links().contains(&l) {
            w.eta
        } else {
            1.0
        };
        if ell == 0.0 {
            continue;
        }
        let id = push_arg(&mut args, weight_arg(l, None));
        factors.push(SumFactor {
            kind: FactorKind::Power { exponent: -ell },
            args: vec![id],
        });
    }
    for m in &melons_one {
        let e = push_arg(&mut args, weight_arg(m.entry, None));
        let i = push_arg(&mut args, weight_arg(m.link, None));
        let ihat = push_arg(&mut args, weight_arg(m.link, Some(m.color)));
        factors.push(SumFactor {
            kind: FactorKind::MelonOne,
            args: vec![e, i, ihat],
        });
    }
    for m in &melons_two {
        let e = push_arg(&mut args, weight_arg(m.entry, None));
        let s = push_arg(&mut args, weight_arg(m.shell, None));
        let shat = push_arg(&mut args, weight_arg(m.shell, Some(m.color_outer)));
        let dd = push_arg(&mut args, weight_arg(m.inner, None));
        let dhat = push_arg(&mut args, weight_arg(m.inner, Some(m.color_inner)));
        factors.push(SumFactor {
            kind: FactorKind::MelonTwo,
            args: vec![e, s, shat, dd, dhat],
        });
    }
    let problem = SumProblem {
        vars: order.len(),
        args,
        factors,
        prefactor: 1.0,
    };
    sum::evaluate(&problem, n, &|h2| 1.0 / h2, opts.budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{enumerate_contractions, ObjectKind, SkeletonSpec};
    use tff_core::lattice::for_each_box;
    use tff_core::renorm;

    fn tadpole(d: usize) -> TensorGraph {
        let mut g = TensorGraph::new(d);
        let v = g.add_vertex(1).unwrap();
        g.add_edge(v.g, v.h, 0).unwrap();
        g.add_external_leg(v.f).unwrap();
        g.add_external_leg(v.k).unwrap();
        g
    }

    #[test]
    fn bare_tadpole_equals_the_mass_counterterm() {
        for (d, n) in [(3usize, 3i64), (3, 6), (4, 3)] {
            let g = tadpole(d);
            let value = truncated_amplitude(&g, n, &AmplitudeOptions::default()).unwrap();
            let expect = renorm::c1(d, n);
            assert!(
                (value - expect).abs() < 1e-12 * expect,
                "d={d} n={n}: {value} vs {expect}"
            );
        }
    }

    #[test]
    fn renormalized_tadpole_matches_the_subtracted_envelope() {
        let d = 3;
        let n = 4;
        let g = tadpole(d);
        let opts = AmplitudeOptions {
            renormalize_melons: true,
            ..AmplitudeOptions::default()
        };
        let value = truncated_amplitude(&g, n, &opts).unwrap();
        // Amputated entry weight is 1, so the envelope collapses to
        // sum_w 1 / (1+|w|^2)^2 over the internal loops.
        let mut expect = 0.0;
        for_each_box(d - 1, n, |w| {
            let h2 = 1.0 + w.iter().map(|&x| (x * x) as f64).sum::<f64>();
            expect += 1.0 / (h2 * h2);
        });
        assert!(
            (value - expect).abs() < 1e-12 * expect,
            "{value} vs {expect}"
        );
    }

    fn double_tadpole_vacuum() -> TensorGraph {
        let spec = SkeletonSpec::new(ObjectKind::X3, 3).with_colors(1, 1);
        let graphs = enumerate_contractions(&spec).unwrap();
        graphs
            .into_iter()
            .find(|g| {
                let self_melons = g
                    .edges()
                    .iter()
                    .filter(|e| e.color == 0 && g.melonic_pair(e.a, e.b).is_some())
                    .count();
                self_melons == 2
            })
            .expect("the double-tadpole contraction exists")
    }

    #[test]
    fn melonic_vacuum_matches_a_direct_strand_sum() {
        let g = double_tadpole_vacuum();
        let n = 2;
        let value = truncated_amplitude(&g, n, &AmplitudeOptions::default()).unwrap();
        let mut expect = 0.0;
        for_each_box(7, n, |s| {
            let wr = 1.0 + ((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) as f64);
            let wt1 = 1.0 + ((s[0] * s[0] + s[3] * s[3] + s[4] * s[4]) as f64);
            let wt2 = 1.0 + ((s[0] * s[0] + s[5] * s[5] + s[6] * s[6]) as f64);
            expect += 1.0 / (wr * wr * wt1 * wt2);
        });
        assert!(
            (value - expect).abs() < 1e-11 * expect,
            "{value} vs {expect}"
        );
    }

    #[test]
    fn renormalized_melonic_vacuum_matches_the_hand_formula() {
        let g = double_tadpole_vacuum();
        let n = 2;
        let opts = AmplitudeOptions {
            renormalize_melons: true,
            ..AmplitudeOptions::default()
        };
        let value = truncated_amplitude(&g, n, &opts).unwrap();
        let mut expect = 0.0;
        for_each_box(3, n, |outer| {
            let we = 1.0 + ((outer[0] * outer[0] + outer[1] * outer[1] + outer[2] * outer[2]) as f64);
            let mut tad = 0.0;
            for_each_box(2, n, |lp| {
                let inner = ((lp[0] * lp[0] + lp[1] * lp[1]) as f64) + (outer[0] * outer[0]) as f64;
                let wi = 1.0 + inner;
                let wihat = 1.0 + ((lp[0] * lp[0] + lp[1] * lp[1]) as f64);
                tad += we.min(wi) / (wi * wihat);
            });
            expect += tad * tad / (we * we);
        });
        assert!(
            (value - expect).abs() < 1e-11 * expect.abs(),
            "{value} vs {expect}"
        );
    }

    #[test]
    fn labeled_links_inside_melons_are_rejected() {
        let mut g = tadpole(3);
        let self_link = g
            .edges()
            .iter()
            .position(|e| e.color == 0 && !g.is_external(e.a) && !g.is_external(e.b))
            .unwrap();
        g.mark_beta(self_link).unwrap();
        let opts = AmplitudeOptions {
            renormalize_melons: true,
            ..AmplitudeOptions::default()
        };
        let err = truncated_amplitude(&g, 2, &opts);
        assert!(err.is_err());
    }

    #[test]
    fn amplitude_budget_is_enforced() {
        let g = double_tadpole_vacuum();
        let opts = AmplitudeOptions {
            budget: 10,
            ..AmplitudeOptions::default()
        };
        let err = truncated_amplitude(&g, 8, &opts).unwrap_err();
        assert!(matches!(err, DiagramError::BudgetExceeded { .. }));
    }
}

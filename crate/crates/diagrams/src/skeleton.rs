//! Covariance skeletons for the stochastic objects and their Wick
//! contractions.
//!
//! A skeleton is the tensor graph of `sum <n>^{-2a} <m>^{2b} tau tau` before
//! the noise expectation is taken: two mirror copies of the object glued
//! through the root link (and through the argument link for operators), with
//! the noise legs left open. Contracting a skeleton means choosing a perfect
//! matching of the noise legs; every matching closes the graph.

use crate::error::{DiagramError, Result};
use crate::graph::TensorGraph;

/// The stochastic objects whose covariance skeletons are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    /// The stationary linear field itself (no skeleton: a single bare link).
    X,
    /// Melonic quadratic operator: kernel with the argument in slot 1.
    X2m,
    /// Non-melonic quadratic operator: kernel with the argument in slot 3.
    X2nm,
    /// Exterior quadratic operator: kernel with the argument in slot 2.
    XdotX,
    /// The renormalized cubic field.
    X3,
    /// The symmetrized double kernel with an integrated inner line.
    Sym,
    /// Cubic-times-resolvent part with the integrated line in slot 2.
    X2Pic2First,
    /// Cubic-times-resolvent part with the integrated line in slot 3.
    X2Pic2Second,
}

/// A named covariance skeleton over `d` strand colors.
#[derive(Debug, Clone, Copy)]
pub struct SkeletonSpec {
    /// Which object the skeleton glues two copies of.
    pub tau: ObjectKind,
    /// Strand color count.
    pub d: usize,
    /// Kernel color of the (outer) vertex on each copy.
    pub color: usize,
    /// Kernel color of the inner vertex where one exists, and of the second
    /// copy for the cubic field.
    pub color_second: usize,
}

impl SkeletonSpec {
    /// A skeleton with both colors set to 1.
    pub fn new(tau: ObjectKind, d: usize) -> Self {
        Self {
            tau,
            d,
            color: 1,
            color_second: 1,
        }
    }

    /// Overrides the vertex colors.
    pub fn with_colors(mut self, color: usize, color_second: usize) -> Self {
        self.color = color;
        self.color_second = color_second;
        self
    }
}

/// A built skeleton: the glued graph plus its open noise legs.
#[derive(Debug, Clone)]
pub struct Skeleton {
    /// The pre-contraction graph; noise nodes still lack their color-0 edge.
    pub graph: TensorGraph,
    /// Node ids of the open noise legs, in deterministic order.
    pub noise_nodes: Vec<usize>,
}

/// Number of perfect matchings of `legs` points: the odd double factorial.
pub fn pairing_count(legs: usize) -> u128 {
    if legs % 2 != 0 {
        return 0;
    }
    let mut count: u128 = 1;
    let mut k = legs as u128;
    while k > 1 {
        count *= k - 1;
        k -= 2;
    }
    count
}

/// Materializes the covariance skeleton of `spec`.
pub fn build_skeleton(spec: &SkeletonSpec) -> Result<Skeleton> {
    if spec.d < 2 {
        return Err(DiagramError::InvalidArgument(format!(
            "skeletons need d >= 2, got {}",
            spec.d
        )));
    }
    for c in [spec.color, spec.color_second] {
        if c == 0 || c > spec.d {
            return Err(DiagramError::InvalidArgument(format!(
                "skeleton color {c} is outside 1..={}",
                spec.d
            )));
        }
    }
    let mut graph = TensorGraph::new(spec.d);
    let mut noise = Vec::new();
    match spec.tau {
        ObjectKind::X => {
            return Err(DiagramError::InvalidArgument(
                "the bare field has no stranded skeleton; its covariance is the single \
                 root link"
                    .into(),
            ));
        }
        ObjectKind::X2m | ObjectKind::X2nm | ObjectKind::XdotX => {
            let v1 = graph.add_vertex(spec.color)?;
            let v2 = graph.add_vertex(spec.color)?;
            let (arg1, arg2, noise1, noise2) = match spec.tau {
                ObjectKind::X2m => (v1.f, v2.f, [v1.g, v1.h], [v2.g, v2.h]),
                ObjectKind::X2nm => (v1.h, v2.h, [v1.f, v1.g], [v2.f, v2.g]),
                _ => (v1.g, v2.g, [v1.f, v1.h], [v2.f, v2.h]),
            };
            let alpha = graph.add_edge(arg1, arg2, 0)?;
            let beta = graph.add_edge(v1.k, v2.k, 0)?;
            graph.mark_alpha(alpha)?;
            graph.mark_beta(beta)?;
            noise.extend(noise1);
            noise.extend(noise2);
        }
        ObjectKind::X3 => {
            let v1 = graph.add_vertex(spec.color)?;
            let v2 = graph.add_vertex(spec.color_second)?;
            let beta = graph.add_edge(v1.k, v2.k, 0)?;
            graph.mark_beta(beta)?;
            noise.extend([v1.f, v1.g, v1.h, v2.f, v2.g, v2.h]);
        }
        ObjectKind::Sym => {
            let mut inner_args = Vec::new();
            let mut roots = Vec::new();
            for _ in 0..2 {
                let outer = graph.add_vertex(spec.color)?;
                let inner = graph.add_vertex(spec.color_second)?;
                let time = graph.add_edge(inner.k, outer.g, 0)?;
                graph.mark_time(time)?;
                noise.extend([outer.f, outer.h, inner.f, inner.h]);
                inner_args.push(inner.g);
                roots.push(outer.k);
            }
            let alpha = graph.add_edge(inner_args[0], inner_args[1], 0)?;
            let beta = graph.add_edge(roots[0], roots[1], 0)?;
            graph.mark_alpha(alpha)?;
            graph.mark_beta(beta)?;
        }
        ObjectKind::X2Pic2First | ObjectKind::X2Pic2Second => {
            let first = matches!(spec.tau, ObjectKind::X2Pic2First);
            let mut args = Vec::new();
            let mut roots = Vec::new();
            for _ in 0..2 {
                let outer = graph.add_vertex(spec.color)?;
                let inner = graph.add_vertex(spec.color_second)?;
                let (integrated, outer_noise) = if first {
                    (outer.g, outer.h)
                } else {
                    (outer.h, outer.g)
                };
                let time = graph.add_edge(inner.k, integrated, 0)?;
                graph.mark_time(time)?;
                noise.extend([outer_noise, inner.f, inner.g, inner.h]);
                args.push(outer.f);
                roots.push(outer.k);
            }
            let alpha = graph.add_edge(args[0], args[1], 0)?;
            let beta = graph.add_edge(roots[0], roots[1], 0)?;
            graph.mark_alpha(alpha)?;
            graph.mark_beta(beta)?;
        }
    }
    Ok(Skeleton {
        graph,
        noise_nodes: noise,
    })
}

/// All Wick contractions of the skeleton: one closed tensor graph per
/// perfect matching of the noise legs, in deterministic order.
pub fn enumerate_contractions(spec: &SkeletonSpec) -> Result<Vec<TensorGraph>> {
    let skeleton = build_skeleton(spec)?;
    let mut graphs = Vec::new();
    let mut legs = skeleton.noise_nodes.clone();
    let mut pairs = Vec::new();
    fn recurse(
        base: &TensorGraph,
        legs: &mut Vec<usize>,
        pairs: &mut Vec<(usize, usize)>,
        out: &mut Vec<TensorGraph>,
    ) -> Result<()> {
        if legs.is_empty() {
            let mut g = base.clone();
            for &(a, b) in pairs.iter() {
                g.add_edge(a, b, 0)?;
            }
            g.validate()?;
            out.push(g);
            return Ok(());
        }
        let first = legs[0];
        for i in 1..legs.len() {
            let partner = legs[i];
            let mut rest: Vec<usize> = legs.clone();
            rest.remove(i);
            rest.remove(0);
            pairs.push((first, partner));
            recurse(base, &mut rest, pairs, out)?;
            pairs.pop();
        }
        Ok(())
    }
    recurse(&skeleton.graph, &mut legs, &mut pairs, &mut graphs)?;
    Ok(graphs)
}

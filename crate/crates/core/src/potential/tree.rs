//! Monopole tree for `I_α f`.
//!
//! A k-d tree over the atoms stores, for each node, the positive and
//! negative parts of `f` separately: total weight `Σ mᵢ fᵢ^±`, its weighted
//! center, second moments about that center and the bounding radius of the
//! contributing atoms. A part is summarised when the query is outside the
//! bounding ball and `radius / distance ≤ θ`; the summary is the monopole
//! plus its second-order Taylor correction. Splitting by sign keeps every
//! summary a sum of same-signed terms.
//!
//! Atoms reached exactly are collected, sorted by index and summed in atom
//! order, so a tree that opens every node reproduces the direct sum bit for
//! bit.

use rayon::prelude::*;

use super::{direct_sum, PotentialOptions};
use crate::error::Result;
use crate::measure::{squared_distance, OperatorParams, PointMassMeasure, SampledFunction, MAX_DIM};

#[derive(Clone, Copy, Debug, Default)]
struct Part {
    count: usize,
    weight: f64,
    center: [f64; MAX_DIM],
    /// `Σ w u uᵀ` with `u = y - center`
    second: [[f64; MAX_DIM]; MAX_DIM],
    radius: f64,
}

impl Part {
    /// `Σ w |x - y|^{-2h}` to second order about the center, `d2 = |x - c|²`.
    fn far_field(&self, x: &[f64], d2: f64, half_exp: f64) -> f64 {
        let dim = x.len();
        let s = 2.0 * half_exp;
        let mut trace = 0.0;
        let mut zqz = 0.0;
        for a in 0..dim {
            trace += self.second[a][a];
            let za = x[a] - self.center[a];
            for b in 0..dim {
                zqz += za * self.second[a][b] * (x[b] - self.center[b]);
            }
        }
        let base = d2.powf(-half_exp);
        base * (self.weight + 0.5 * s * ((s + 2.0) * zqz / (d2 * d2) - trace / d2))
    }
}

#[derive(Clone, Debug)]
struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
    /// `[positive, negative]`
    parts: [Part; 2],
}

/// Tree built once per `(µ, f)` and queried many times.
pub struct RieszTree<'a> {
    mu: &'a PointMassMeasure,
    f: &'a [f64],
    perm: Vec<usize>,
    nodes: Vec<Node>,
    half_exp: f64,
    theta: f64,
    exclude_diagonal: bool,
}

#[inline]
fn part_of(f: f64) -> Option<usize> {
    if f > 0.0 {
        Some(0)
    } else if f < 0.0 {
        Some(1)
    } else {
        None
    }
}

impl<'a> RieszTree<'a> {
    pub fn build(
        mu: &'a PointMassMeasure,
        f: &'a SampledFunction,
        params: &OperatorParams,
        opts: &PotentialOptions,
    ) -> Result<Self> {
        f.check_aligned(mu)?;
        opts.validate()?;
        let mut tree = RieszTree {
            mu,
            f: f.values(),
            perm: (0..mu.len()).collect(),
            nodes: Vec::with_capacity(2 * mu.len() / opts.leaf_size.max(1) + 1),
            half_exp: params.kernel_exponent() / 2.0,
            theta: opts.tree_theta,
            exclude_diagonal: opts.exclude_diagonal,
        };
        tree.build_node(0, mu.len(), opts.leaf_size);
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize, leaf_size: usize) -> usize {
        let id = self.nodes.len();
        let parts = self.summarise(start, end);
        self.nodes.push(Node {
            start,
            end,
            children: None,
            parts,
        });
        if end - start > leaf_size {
            let axis = self.widest_axis(start, end);
            let mid = start + (end - start) / 2;
            let (mu, slice) = (self.mu, &mut self.perm[start..end]);
            slice.select_nth_unstable_by(mid - start, |&a, &b| {
                mu.point(a)[axis].total_cmp(&mu.point(b)[axis]).then(a.cmp(&b))
            });
            let left = self.build_node(start, mid, leaf_size);
            let right = self.build_node(mid, end, leaf_size);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let dim = self.mu.dim();
        let mut lo = [f64::INFINITY; MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; MAX_DIM];
        for &i in &self.perm[start..end] {
            for (k, &c) in self.mu.point(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0)
    }

    fn summarise(&self, start: usize, end: usize) -> [Part; 2] {
        let dim = self.mu.dim();
        let mut parts = [Part::default(); 2];
        let mut moments = [[0.0; MAX_DIM]; 2];
        for &i in &self.perm[start..end] {
            if let Some(s) = part_of(self.f[i]) {
                let w = self.mu.mass(i) * self.f[i];
                parts[s].count += 1;
                parts[s].weight += w;
                for (k, &c) in self.mu.point(i).iter().enumerate() {
                    moments[s][k] += w * c;
                }
            }
        }
        for s in 0..2 {
            if parts[s].weight != 0.0 {
                for k in 0..dim {
                    parts[s].center[k] = moments[s][k] / parts[s].weight;
                }
            }
        }
        for &i in &self.perm[start..end] {
            if let Some(s) = part_of(self.f[i]) {
                let y = self.mu.point(i);
                let w = self.mu.mass(i) * self.f[i];
                let part = &mut parts[s];
                let mut u = [0.0; MAX_DIM];
                for k in 0..dim {
                    u[k] = y[k] - part.center[k];
                }
                for a in 0..dim {
                    for b in 0..dim {
                        part.second[a][b] += w * u[a] * u[b];
                    }
                }
                let d2 = squared_distance(&part.center[..dim], y);
                part.radius = part.radius.max(d2.sqrt());
            }
        }
        parts
    }

    /// `I_α f(x)`; matches the direct sum exactly whenever that sum is `±∞`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let dim = self.mu.dim();
        let mut near: Vec<usize> = Vec::new();
        let mut far = 0.0;
        let mut any_far = false;
        let mut stack: Vec<(usize, u8)> = vec![(0, self.live_mask(0))];
        while let Some((id, mask)) = stack.pop() {
            let node = &self.nodes[id];
            let mut open = 0u8;
            for s in 0..2 {
                if mask >> s & 1 == 0 {
                    continue;
                }
                let part = &node.parts[s];
                if node.children.is_some() && part.count > 1 {
                    let d2 = squared_distance(x, &part.center[..dim]);
                    let d = d2.sqrt();
                    if d > part.radius && part.radius <= self.theta * d {
                        far += part.far_field(x, d2, self.half_exp);
                        any_far = true;
                        continue;
                    }
                }
                open |= 1 << s;
            }
            if open == 0 {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    // right pushed first so the left subtree is visited first
                    for child in [r, l] {
                        let m = open & self.live_mask(child);
                        if m != 0 {
                            stack.push((child, m));
                        }
                    }
                }
                None => near.extend(
                    self.perm[node.start..node.end]
                        .iter()
                        .copied()
                        .filter(|&i| part_of(self.f[i]).is_some_and(|s| open >> s & 1 == 1)),
                ),
            }
        }
        near.sort_unstable();
        let exact = direct_sum(self.mu, self.f, x, self.half_exp, self.exclude_diagonal, near.into_iter());
        if any_far && exact.is_finite() {
            exact + far
        } else {
            exact
        }
    }

    fn live_mask(&self, id: usize) -> u8 {
        let p = &self.nodes[id].parts;
        u8::from(p[0].weight != 0.0) | u8::from(p[1].weight != 0.0) << 1
    }

    /// Evaluates every query; results are independent of the thread count.
    pub fn evaluate_many(&self, queries: &[Vec<f64>]) -> Vec<f64> {
        queries.par_iter().map(|x| self.evaluate(x)).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// `I_α f` at each query via a freshly built [`RieszTree`].
pub fn riesz_potential_tree(
    mu: &PointMassMeasure,
    f: &SampledFunction,
    params: &OperatorParams,
    queries: &[Vec<f64>],
    opts: &PotentialOptions,
) -> Result<Vec<f64>> {
    for q in queries {
        mu.check_point(q)?;
    }
    Ok(RieszTree::build(mu, f, params, opts)?.evaluate_many(queries))
}

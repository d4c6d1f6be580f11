//! Axis-aligned bounding-box search for contact candidate element pairs.

use crate::geometry::ElementDofs;
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Element as seen by the broad phase.
#[derive(Debug, Clone, Copy)]
pub struct SearchElement<'a, T> {
    pub beam: usize,
    /// Position of the element within its beam.
    pub index: usize,
    pub dofs: &'a ElementDofs<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    /// Box containing the Bezier control polygon of the cubic centerline, inflated by `margin`.
    pub fn of_element(e: &ElementDofs<T>, margin: T) -> Self {
        let third = e.length / T::lit(3.0);
        let [d1, t1, d2, t2] = e.nodal;
        let pts = [d1, d1 + t1 * third, d2 - t2 * third, d2];
        let mut min = pts[0];
        let mut max = pts[0];
        for p in &pts[1..] {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        for i in 0..3 {
            min[i] -= margin;
            max[i] += margin;
        }
        Self { min, max }
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        (0..3).all(|i| self.min[i] <= o.max[i] && o.min[i] <= self.max[i])
    }
}

/// Which element pairs may be considered at all.
#[derive(Debug, Clone, Copy)]
pub struct PairRules {
    /// Elements of the same beam closer than this (in element index) are skipped.
    pub neighbor_exclusion: usize,
    pub self_contact: bool,
}

impl Default for PairRules {
    fn default() -> Self {
        Self { neighbor_exclusion: 1, self_contact: false }
    }
}

fn admissible<T>(a: &SearchElement<'_, T>, b: &SearchElement<'_, T>, rules: &PairRules) -> bool {
    if a.beam != b.beam {
        return true;
    }
    rules.self_contact && a.index.abs_diff(b.index) > rules.neighbor_exclusion
}

/// Order a pair so that the first entry is the slave: lower beam id, then lower element index.
fn ordered<T>(elements: &[SearchElement<'_, T>], i: usize, j: usize) -> (usize, usize) {
    let key = |k: usize| (elements[k].beam, elements[k].index);
    if key(i) <= key(j) {
        (i, j)
    } else {
        (j, i)
    }
}

/// Candidate pairs whose boxes, each inflated by `radius / 2`, overlap (sweep and prune on x).
pub fn candidate_pairs<T: Real>(elements: &[SearchElement<'_, T>], radius: T, rules: &PairRules) -> Vec<(usize, usize)> {
    let half = radius * T::lit(0.5);
    let boxes: Vec<Aabb<T>> = elements.iter().map(|e| Aabb::of_element(e.dofs, half)).collect();
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| boxes[a].min[0].partial_cmp(&boxes[b].min[0]).unwrap().then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for &i in &order {
        active.retain(|&k| boxes[k].max[0] >= boxes[i].min[0]);
        for &k in &active {
            if boxes[k].overlaps(&boxes[i]) && admissible(&elements[k], &elements[i], rules) {
                out.push(ordered(elements, k, i));
            }
        }
        active.push(i);
    }
    out.sort_unstable();
    out
}

/// All-pairs reference for [`candidate_pairs`].
pub fn brute_force_pairs<T: Real>(elements: &[SearchElement<'_, T>], radius: T, rules: &PairRules) -> Vec<(usize, usize)> {
    let half = radius * T::lit(0.5);
    let boxes: Vec<Aabb<T>> = elements.iter().map(|e| Aabb::of_element(e.dofs, half)).collect();
    let mut out = Vec::new();
    for i in 0..elements.len() {
        for j in i + 1..elements.len() {
            if boxes[i].overlaps(&boxes[j]) && admissible(&elements[i], &elements[j], rules) {
                out.push(ordered(elements, i, j));
            }
        }
    }
    out.sort_unstable();
    out
}

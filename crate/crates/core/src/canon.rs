//! Canonical labelling and enumeration of posets up to isomorphism.
//!
//! The canonical form is the lexicographically least cover list over all
//! relabellings that respect an isomorphism-invariant ordered partition of
//! the elements (colour refinement on up/down degrees and cover colours).
//! Restricting to those relabellings keeps the form canonical while cutting
//! the search from `n!` to the product of the cell factorials.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::poset::{CoverList, Poset};

/// Ordered colour classes of the elements (0-based), refined until stable.
// Current colour, sorted colours below and above, down-set and up-set sizes.
type Signature = (usize, Vec<usize>, Vec<usize>, u32, u32);

fn refined_cells(p: &Poset) -> Vec<Vec<usize>> {
    let n = p.size();
    let covers = p.covers();
    let mut lower: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut upper: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &covers.0 {
        upper[a - 1].push(b - 1);
        lower[b - 1].push(a - 1);
    }
    let mut colour: Vec<usize> = vec![0; n];
    let mut count = 1;
    loop {
        let sigs: Vec<Signature> = (0..n)
            .map(|a| {
                let mut lo: Vec<usize> = lower[a].iter().map(|&b| colour[b]).collect();
                let mut hi: Vec<usize> = upper[a].iter().map(|&b| colour[b]).collect();
                lo.sort_unstable();
                hi.sort_unstable();
                (
                    colour[a],
                    lo,
                    hi,
                    p.down_mask(a).count_ones(),
                    p.up_mask(a).count_ones(),
                )
            })
            .collect();
        let distinct: Vec<_> = sigs.iter().collect::<BTreeSet<_>>().into_iter().collect();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).expect("present"))
            .collect();
        let next_count = distinct.len();
        colour = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    let mut cells = vec![Vec::new(); count];
    for a in 0..n {
        cells[colour[a]].push(a);
    }
    cells
}

/// Canonical cover list: equal for two posets iff they are isomorphic.
pub fn canonical_form(p: &Poset) -> CoverList {
    let n = p.size();
    let cells = refined_cells(p);
    let cover_pairs: Vec<(usize, usize)> =
        p.covers().0.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    // slot_cell[label] = which cell supplies the element receiving that label
    let slot_cell: Vec<usize> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| std::iter::repeat_n(c, cell.len()))
        .collect();
    let mut search = Search {
        cells: &cells,
        slot_cell: &slot_cell,
        covers: &cover_pairs,
        label: vec![usize::MAX; n],
        used: vec![false; n],
        best: None,
        scratch: Vec::with_capacity(cover_pairs.len()),
    };
    search.run(0);
    let best = search.best.expect("at least one relabelling");
    CoverList(best.into_iter().map(|(a, b)| (a + 1, b + 1)).collect())
}

struct Search<'a> {
    cells: &'a [Vec<usize>],
    slot_cell: &'a [usize],
    covers: &'a [(usize, usize)],
    label: Vec<usize>,
    used: Vec<bool>,
    best: Option<Vec<(usize, usize)>>,
    scratch: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn run(&mut self, slot: usize) {
        if slot == self.label.len() {
            self.scratch.clear();
            self.scratch.extend(
                self.covers
                    .iter()
                    .map(|&(a, b)| (self.label[a], self.label[b])),
            );
            self.scratch.sort_unstable();
            if self.best.as_ref().is_none_or(|b| self.scratch < *b) {
                self.best = Some(self.scratch.clone());
            }
            return;
        }
        let cell = &self.cells[self.slot_cell[slot]];
        for &a in cell {
            if self.used[a] {
                continue;
            }
            self.used[a] = true;
            self.label[a] = slot;
            self.run(slot + 1);
            self.used[a] = false;
        }
    }
}

/// The representative of `p`'s class: the poset whose covers are the canonical form.
pub fn canonical_poset(p: &Poset) -> Poset {
    Poset::from_covers(p.size(), &canonical_form(p).0).expect("canonical form is a valid order")
}

/// One representative per isomorphism class of `n`-element posets, each equal
/// to its own canonical form, ordered by canonical form.
pub fn enumerate_posets(n: usize) -> Vec<Poset> {
    enumerate_classes(n).into_iter().map(|(_, p)| p).collect()
}

/// As [`enumerate_posets`], paired with the canonical cover lists.
pub fn enumerate_classes(n: usize) -> Vec<(CoverList, Poset)> {
    assert!(n >= 1, "poset size must be positive");
    let mut level: Vec<Poset> = vec![Poset::antichain(1)];
    for m in 2..=n {
        level = extend_level(&level, m);
    }
    level.into_iter().map(|p| (p.covers(), p)).collect()
}

// Every m-element poset has a maximal element whose removal leaves an
// (m-1)-element poset; the removed element's down-set is an order ideal.
fn extend_level(prev: &[Poset], m: usize) -> Vec<Poset> {
    let forms: BTreeSet<CoverList> = prev
        .par_iter()
        .flat_map_iter(|p| {
            let k = p.size();
            let mut out = Vec::new();
            for ideal in 0u32..(1 << k) {
                let closed = (0..k).all(|a| ideal >> a & 1 == 0 || p.down_mask(a) & !ideal == 0);
                if !closed {
                    continue;
                }
                let mut rel = p.relations();
                rel.extend((0..k).filter(|&a| ideal >> a & 1 == 1).map(|a| (a + 1, m)));
                let q = Poset::from_covers(m, &rel).expect("extension by a maximal element");
                out.push(canonical_form(&q));
            }
            out
        })
        .collect();
    forms
        .into_iter()
        .map(|c| Poset::from_covers(m, &c.0).expect("canonical form"))
        .collect()
}

//! Cell lists for short-range neighbour search in a periodic box.

use crate::error::{Error, Result};
use crate::state::{minimum_image, ParticleState};

/// Uniform grid of cells with edge at least the cutoff radius.
///
/// With fewer than three cells along an axis the stencil would visit the same
/// cell twice, so the list degrades to an all-pairs scan in that case.
#[derive(Debug, Clone)]
pub struct CellList {
    dim: usize,
    box_length: f64,
    cutoff: f64,
    cells_per_axis: usize,
    cell_edge: f64,
    /// `cell_start[c]..cell_start[c + 1]` indexes `sorted` for cell `c`.
    cell_start: Vec<usize>,
    sorted: Vec<usize>,
    cell_of: Vec<usize>,
    stencil: Vec<Vec<isize>>,
}

impl CellList {
    /// Build the list for a periodic state; requires `cutoff < L/2`.
    pub fn build(state: &ParticleState, cutoff: f64) -> Result<Self> {
        let box_length = state.box_length().ok_or(Error::NotPeriodic)?;
        if !(cutoff > 0.0) || cutoff >= 0.5 * box_length {
            return Err(Error::CutoffTooLarge {
                cutoff,
                half: 0.5 * box_length,
            });
        }
        let dim = state.dim();
        if dim > 8 {
            return Err(Error::Shape(format!("cell lists support d ≤ 8, got {dim}")));
        }
        let cells_per_axis = ((box_length / cutoff).floor() as usize).max(1);
        let cell_edge = box_length / cells_per_axis as f64;
        let n_cells = cells_per_axis.pow(dim as u32);

        let n = state.len();
        let mut cell_of = Vec::with_capacity(n);
        let mut counts = vec![0usize; n_cells + 1];
        for i in 0..n {
            let c = Self::cell_index(state.position(i), cell_edge, cells_per_axis);
            cell_of.push(c);
            counts[c + 1] += 1;
        }
        for c in 0..n_cells {
            counts[c + 1] += counts[c];
        }
        let cell_start = counts.clone();
        let mut fill = counts;
        let mut sorted = vec![0; n];
        for (i, &c) in cell_of.iter().enumerate() {
            sorted[fill[c]] = i;
            fill[c] += 1;
        }

        let stencil = if cells_per_axis >= 3 {
            let mut offsets = vec![vec![]];
            for _ in 0..dim {
                offsets = offsets
                    .into_iter()
                    .flat_map(|o: Vec<isize>| {
                        (-1..=1).map(move |s| {
                            let mut o = o.clone();
                            o.push(s);
                            o
                        })
                    })
                    .collect();
            }
            offsets
        } else {
            Vec::new()
        };

        Ok(Self {
            dim,
            box_length,
            cutoff,
            cells_per_axis,
            cell_edge,
            cell_start,
            sorted,
            cell_of,
            stencil,
        })
    }

    fn cell_index(x: &[f64], edge: f64, m: usize) -> usize {
        let mut c = 0;
        for &xi in x.iter() {
            let k = ((xi / edge) as usize).min(m - 1);
            c = c * m + k;
        }
        c
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Visit every `j ≠ i` with `|r_i - r_j| < cutoff` (minimum image),
    /// passing the displacement `r_i - r_j` and its squared length.
    pub fn for_each_neighbor<F>(&self, state: &ParticleState, i: usize, mut visit: F)
    where
        F: FnMut(usize, &[f64], f64),
    {
        let dim = self.dim;
        let rc2 = self.cutoff * self.cutoff;
        let xi = state.position(i);
        let mut disp = [0.0; 8];
        let disp = &mut disp[..dim];
        let mut check = |j: usize, disp: &mut [f64]| {
            if j == i {
                return;
            }
            let xj = state.position(j);
            for k in 0..dim {
                disp[k] = xi[k] - xj[k];
            }
            minimum_image(disp, self.box_length);
            let r2: f64 = disp.iter().map(|v| v * v).sum();
            if r2 < rc2 {
                visit(j, disp, r2);
            }
        };

        if self.stencil.is_empty() {
            for j in 0..state.len() {
                check(j, disp);
            }
            return;
        }

        let m = self.cells_per_axis as isize;
        let mut home = [0isize; 8];
        let mut c = self.cell_of[i];
        for k in (0..dim).rev() {
            home[k] = (c % self.cells_per_axis) as isize;
            c /= self.cells_per_axis;
        }
        for offset in &self.stencil {
            let mut cell = 0usize;
            for k in 0..dim {
                let ck = (home[k] + offset[k]).rem_euclid(m);
                cell = cell * self.cells_per_axis + ck as usize;
            }
            for &j in &self.sorted[self.cell_start[cell]..self.cell_start[cell + 1]] {
                check(j, disp);
            }
        }
    }

    /// Visit every unordered pair `i < j` within the cutoff once, passing
    /// `r_i - r_j` and its squared length.
    pub fn for_each_pair<F>(&self, state: &ParticleState, mut visit: F)
    where
        F: FnMut(usize, usize, &[f64], f64),
    {
        let n = state.len();
        if self.stencil.is_empty() {
            let dim = self.dim;
            let rc2 = self.cutoff * self.cutoff;
            let mut disp = [0.0; 8];
            let disp = &mut disp[..dim];
            let pos = state.positions();
            for i in 0..n {
                let xi = &pos[i * dim..(i + 1) * dim];
                for j in (i + 1)..n {
                    let xj = &pos[j * dim..(j + 1) * dim];
                    for k in 0..dim {
                        disp[k] = xi[k] - xj[k];
                    }
                    minimum_image(disp, self.box_length);
                    let r2: f64 = disp.iter().map(|v| v * v).sum();
                    if r2 < rc2 {
                        visit(i, j, disp, r2);
                    }
                }
            }
            return;
        }
        for i in 0..n {
            self.for_each_neighbor(state, i, |j, d, r2| {
                if j > i {
                    visit(i, j, d, r2);
                }
            });
        }
    }

    /// Edge length of a cell (at least the cutoff).
    pub fn cell_edge(&self) -> f64 {
        self.cell_edge
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    fn random_state(n: usize, dim: usize, l: f64, seed: u64) -> ParticleState {
        let mut rng = RngStream::new(seed, 0).rng();
        let xs = (0..n * dim).map(|_| rng.random::<f64>() * l).collect();
        ParticleState::new(dim, xs).unwrap().periodic(l).unwrap()
    }

    fn brute_neighbors(s: &ParticleState, i: usize, rc: f64) -> Vec<usize> {
        let mut d = vec![0.0; s.dim()];
        (0..s.len())
            .filter(|&j| {
                if j == i {
                    return false;
                }
                s.displacement(i, j, &mut d);
                d.iter().map(|v| v * v).sum::<f64>() < rc * rc
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_in_1d_2d_3d() {
        for (dim, n, l, rc) in [(1, 40, 10.0, 0.7), (2, 120, 9.0, 1.1), (3, 300, 8.0, 1.5)] {
            let s = random_state(n, dim, l, dim as u64);
            let cl = CellList::build(&s, rc).unwrap();
            assert!(cl.cells_per_axis() >= 3);
            for i in 0..n {
                let mut got = Vec::new();
                cl.for_each_neighbor(&s, i, |j, _, _| got.push(j));
                got.sort_unstable();
                assert_eq!(got, brute_neighbors(&s, i, rc), "dim {dim} particle {i}");
            }
        }
    }

    #[test]
    fn small_grid_falls_back_to_all_pairs() {
        let s = random_state(30, 3, 5.0, 4);
        let cl = CellList::build(&s, 2.0).unwrap();
        assert_eq!(cl.cells_per_axis(), 2);
        for i in 0..30 {
            let mut got = Vec::new();
            cl.for_each_neighbor(&s, i, |j, _, _| got.push(j));
            got.sort_unstable();
            assert_eq!(got, brute_neighbors(&s, i, 2.0));
        }
    }

    #[test]
    fn pairs_are_visited_once() {
        for (l, rc) in [(8.0, 1.5), (5.0, 2.0)] {
            let s = random_state(120, 3, l, 6);
            let cl = CellList::build(&s, rc).unwrap();
            let mut got = Vec::new();
            cl.for_each_pair(&s, |i, j, _, _| got.push((i, j)));
            got.sort_unstable();
            let mut want = Vec::new();
            for i in 0..120 {
                for j in brute_neighbors(&s, i, rc) {
                    if j > i {
                        want.push((i, j));
                    }
                }
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn rejects_cutoff_at_half_box() {
        let s = random_state(10, 3, 4.0, 1);
        assert!(matches!(
            CellList::build(&s, 2.0),
            Err(Error::CutoffTooLarge { .. })
        ));
        let open = ParticleState::new(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(CellList::build(&open, 0.5).unwrap_err(), Error::NotPeriodic);
    }
}

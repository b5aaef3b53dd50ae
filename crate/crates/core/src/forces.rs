//! Pairwise interaction sums: the exact O(N) force on one particle, its
//! random-batch estimate, and the estimator error with its exact variance.
//!
//! All sums run over partner indices in ascending order so that a batch
//! containing every particle reproduces the full sum bit for bit.

use crate::batch::BatchDivision;
use crate::cell_list::CellList;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::state::ParticleState;

/// Which part of a (possibly split) kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    Full,
    Short,
    Smooth,
}

#[inline]
fn eval_part(kernel: &KernelSpec, part: KernelPart, x: &[f64], out: &mut [f64]) {
    match part {
        KernelPart::Full => kernel.eval(x, out),
        KernelPart::Short => kernel.eval_short(x, out),
        KernelPart::Smooth => kernel.eval_smooth(x, out),
    }
}

/// `Σ_{j ∈ partners, j ≠ i} K(r_i - r_j)` written into `out`.
pub(crate) fn pair_sum<I>(
    state: &ParticleState,
    i: usize,
    partners: I,
    kernel: &KernelSpec,
    part: KernelPart,
    out: &mut [f64],
) where
    I: IntoIterator<Item = usize>,
{
    let dim = state.dim();
    out.fill(0.0);
    if kernel.is_zero() {
        return;
    }
    let mut disp = [0.0; 8];
    let mut k = [0.0; 8];
    let (disp, k) = (&mut disp[..dim], &mut k[..dim]);
    for j in partners {
        if j == i {
            continue;
        }
        state.displacement(i, j, disp);
        eval_part(kernel, part, disp, k);
        for c in 0..dim {
            out[c] += k[c];
        }
    }
}

/// Batch prefactor `α_N (N-1)/(p-1)`; exactly `α_N` when `p = N`.
#[inline]
pub fn batch_prefactor(alpha_n: f64, n: usize, p: usize) -> f64 {
    alpha_n * ((n - 1) as f64 / (p - 1) as f64)
}

fn check_member(i: usize, batch: &[usize]) -> Result<()> {
    if batch.contains(&i) {
        Ok(())
    } else {
        Err(Error::NotInBatch(i))
    }
}

/// Random-batch force `α_N (N-1)/(p-1) Σ_{j ∈ batch, j ≠ i} K(r_i - r_j)`.
pub fn batch_force(
    i: usize,
    state: &ParticleState,
    batch: &[usize],
    kernel: &KernelSpec,
    alpha_n: f64,
) -> Result<Vec<f64>> {
    check_member(i, batch)?;
    if batch.len() < 2 {
        return Err(Error::BatchTooSmall(batch.len()));
    }
    let mut out = vec![0.0; state.dim()];
    pair_sum(state, i, batch.iter().copied(), kernel, KernelPart::Full, &mut out);
    let scale = batch_prefactor(alpha_n, state.len(), batch.len());
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Exact interaction force `α_N Σ_{j ≠ i} K(r_i - r_j)`.
pub fn full_force(i: usize, state: &ParticleState, kernel: &KernelSpec, alpha_n: f64) -> Vec<f64> {
    let mut out = vec![0.0; state.dim()];
    pair_sum(state, i, 0..state.len(), kernel, KernelPart::Full, &mut out);
    out.iter_mut().for_each(|v| *v *= alpha_n);
    out
}

/// Estimator error `χ_i = (1/(p-1)) Σ_batch K - (1/(N-1)) Σ_all K`.
pub fn chi(i: usize, state: &ParticleState, batch: &[usize], kernel: &KernelSpec) -> Result<Vec<f64>> {
    check_member(i, batch)?;
    let n = state.len();
    let p = batch.len();
    let dim = state.dim();
    let mut in_batch = vec![0.0; dim];
    let mut all = vec![0.0; dim];
    pair_sum(state, i, batch.iter().copied(), kernel, KernelPart::Full, &mut in_batch);
    pair_sum(state, i, 0..n, kernel, KernelPart::Full, &mut all);
    Ok(in_batch
        .iter()
        .zip(&all)
        .map(|(b, a)| b / (p - 1) as f64 - a / (n - 1) as f64)
        .collect())
}

/// Exact scalar variance of `χ_i` over random divisions into batches of size
/// `p`: `(1/(p-1) - 1/(N-1)) Λ_i` with
/// `Λ_i = 1/(N-2) Σ_{j≠i} |K(x_i - x_j) - mean_ℓ K(x_i - x_ℓ)|²`.
pub fn chi_variance_exact(i: usize, state: &ParticleState, p: usize, kernel: &KernelSpec) -> Result<f64> {
    let n = state.len();
    if p < 2 {
        return Err(Error::BatchTooSmall(p));
    }
    if p > n {
        return Err(Error::BatchTooLarge { p, n });
    }
    if p == n {
        return Ok(0.0);
    }
    let dim = state.dim();
    let mut values = Vec::with_capacity((n - 1) * dim);
    let mut disp = vec![0.0; dim];
    let mut k = vec![0.0; dim];
    for j in (0..n).filter(|&j| j != i) {
        state.displacement(i, j, &mut disp);
        kernel.eval(&disp, &mut k);
        values.extend_from_slice(&k);
    }
    let mut mean = vec![0.0; dim];
    for row in values.chunks(dim) {
        for c in 0..dim {
            mean[c] += row[c];
        }
    }
    mean.iter_mut().for_each(|m| *m /= (n - 1) as f64);
    let spread: f64 = values
        .chunks(dim)
        .map(|row| row.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>())
        .sum();
    let lambda = spread / (n - 2) as f64;
    Ok((1.0 / (p - 1) as f64 - 1.0 / (n - 1) as f64) * lambda)
}

/// `α_N Σ_{|r_ij| < r0} K1(r_i - r_j)` through a cell list (minimum image).
pub fn short_range_force(
    i: usize,
    state: &ParticleState,
    kernel: &KernelSpec,
    r0: f64,
    alpha_n: f64,
) -> Result<Vec<f64>> {
    let cells = CellList::build(state, r0)?;
    let mut out = vec![0.0; state.dim()];
    accumulate_short(&cells, state, i, kernel, alpha_n, &mut out);
    Ok(out)
}

fn accumulate_short(
    cells: &CellList,
    state: &ParticleState,
    i: usize,
    kernel: &KernelSpec,
    alpha_n: f64,
    out: &mut [f64],
) {
    let dim = state.dim();
    let mut k = [0.0; 8];
    let k = &mut k[..dim];
    let mut acc = [0.0; 8];
    cells.for_each_neighbor(state, i, |_, disp, _| {
        kernel.eval_short(disp, k);
        for c in 0..dim {
            acc[c] += k[c];
        }
    });
    for c in 0..dim {
        out[c] += alpha_n * acc[c];
    }
}

/// Short-range forces on every particle, added into `out` (N×d).
pub fn add_short_range_forces(
    state: &ParticleState,
    kernel: &KernelSpec,
    r0: f64,
    alpha_n: f64,
    out: &mut [f64],
) -> Result<()> {
    let cells = CellList::build(state, r0)?;
    let dim = state.dim();
    for i in 0..state.len() {
        accumulate_short(&cells, state, i, kernel, alpha_n, &mut out[i * dim..(i + 1) * dim]);
    }
    Ok(())
}

/// Exact interaction forces on every particle (O(N²)), N×d.
pub fn full_forces(state: &ParticleState, kernel: &KernelSpec, part: KernelPart, alpha_n: f64) -> Vec<f64> {
    let (n, dim) = (state.len(), state.dim());
    let mut out = vec![0.0; n * dim];
    for i in 0..n {
        let row = &mut out[i * dim..(i + 1) * dim];
        pair_sum(state, i, 0..n, kernel, part, row);
        row.iter_mut().for_each(|v| *v *= alpha_n);
    }
    out
}

/// Random-batch forces on every particle for one division, N×d.
pub fn batch_forces(
    state: &ParticleState,
    division: &BatchDivision,
    kernel: &KernelSpec,
    part: KernelPart,
    alpha_n: f64,
) -> Vec<f64> {
    let (n, dim) = (state.len(), state.dim());
    let mut out = vec![0.0; n * dim];
    for batch in division.batches() {
        let scale = batch_prefactor(alpha_n, n, batch.len());
        for &i in batch {
            let row = &mut out[i * dim..(i + 1) * dim];
            pair_sum(state, i, batch.iter().copied(), kernel, part, row);
            row.iter_mut().for_each(|v| *v *= scale);
        }
    }
    out
}

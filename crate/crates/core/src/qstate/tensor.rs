//! Index bookkeeping on raw matrices: permutation, partial trace and local
//! application of operators to a subset of tensor factors.

use nalgebra::DMatrix;

use crate::{CMatrix, C64};

use super::linalg::{hermitize, kron, reshape};

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        s[f] = s[f + 1] * dims[f + 1];
    }
    s
}

/// For the factor order `perm` (new position `p` holds old factor
/// `perm[p]`), maps each new basis index to the old basis index.
pub fn index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&f| dims[f]).collect();
    let total: usize = new_dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; perm.len()];
    let mut old = 0usize;
    for _ in 0..total {
        out.push(old);
        // odometer increment, least significant new position last
        for p in (0..perm.len()).rev() {
            let s = old_strides[perm[p]];
            digits[p] += 1;
            old += s;
            if digits[p] < new_dims[p] {
                break;
            }
            old -= s * new_dims[p];
            digits[p] = 0;
        }
    }
    out
}

/// Reorders the tensor factors of `m`.
pub fn permute(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return m.clone();
    }
    let map = index_map(dims, perm);
    let n = map.len();
    DMatrix::from_fn(n, n, |a, b| m[(map[a], map[b])])
}

/// Reorders the entries of a ket.
pub fn permute_ket(v: &nalgebra::DVector<C64>, dims: &[usize], perm: &[usize]) -> nalgebra::DVector<C64> {
    let map = index_map(dims, perm);
    nalgebra::DVector::from_fn(map.len(), |a, _| v[map[a]])
}

/// Traces out every factor not in `keep`. Kept factors appear in the order
/// given by `keep`.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let mut perm: Vec<usize> = traced.clone();
    perm.extend_from_slice(keep);
    let map = index_map(dims, &perm);
    let dk: usize = keep.iter().map(|&f| dims[f]).product();
    let dt: usize = traced.iter().map(|&f| dims[f]).product();
    let mut out = DMatrix::zeros(dk, dk);
    for t in 0..dt {
        let block = &map[t * dk..(t + 1) * dk];
        for j in 0..dk {
            let bj = block[j];
            for i in 0..dk {
                out[(i, j)] += m[(block[i], bj)];
            }
        }
    }
    out
}

/// Permutation that moves `targets` (in the given order) to the least
/// significant positions, keeping the rest in original order.
fn targets_last(n: usize, targets: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).collect();
    perm.extend_from_slice(targets);
    perm
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (p, &f) in perm.iter().enumerate() {
        inv[f] = p;
    }
    inv
}

/// Output dims and the factor order of the result after replacing
/// `targets` by factors of dimensions `out_dims`.
///
/// When the factor count is unchanged, outputs take the target positions.
/// Otherwise the outputs are inserted where the first target was.
pub fn replaced_dims(dims: &[usize], targets: &[usize], out_dims: &[usize]) -> Vec<usize> {
    if targets.len() == out_dims.len() {
        let mut d = dims.to_vec();
        for (&t, &o) in targets.iter().zip(out_dims) {
            d[t] = o;
        }
        d
    } else {
        let first = targets.iter().copied().min().unwrap_or(dims.len());
        let mut d = Vec::new();
        for (f, &x) in dims.iter().enumerate() {
            if f == first {
                d.extend_from_slice(out_dims);
            }
            if !targets.contains(&f) {
                d.push(x);
            }
        }
        if first == dims.len() {
            d.extend_from_slice(out_dims);
        }
        d
    }
}

/// Permutation taking `[rest..., outputs...]` back to the layout described
/// by [`replaced_dims`].
pub fn restore_perm(n: usize, targets: &[usize], n_out: usize) -> Vec<usize> {
    let rest: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).collect();
    let n_rest = rest.len();
    if targets.len() == n_out {
        // work position of factor f: rest index or n_rest + target slot
        let mut perm = Vec::with_capacity(n);
        let mut r = 0;
        for f in 0..n {
            if let Some(k) = targets.iter().position(|&t| t == f) {
                perm.push(n_rest + k);
            } else {
                perm.push(r);
                r += 1;
            }
        }
        perm
    } else {
        let first = targets.iter().copied().min().unwrap_or(n);
        let mut perm = Vec::new();
        let mut r = 0;
        for f in 0..=n {
            if f == first {
                perm.extend((0..n_out).map(|k| n_rest + k));
            }
            if f < n && !targets.contains(&f) {
                perm.push(r);
                r += 1;
            }
        }
        perm
    }
}

/// `Σ_k (K_k ⊗ I) m (K_k ⊗ I)†` with each `K_k` acting on `targets`.
///
/// Every operator maps the product of the target dims to the product of
/// `out_dims`. Returns the new matrix; its factor dims follow
/// [`replaced_dims`].
pub fn apply_kraus(
    m: &CMatrix,
    dims: &[usize],
    targets: &[usize],
    kraus: &[CMatrix],
    out_dims: &[usize],
) -> CMatrix {
    let n = dims.len();
    let perm = targets_last(n, targets);
    let work = permute(m, dims, &perm);
    let dt: usize = targets.iter().map(|&f| dims[f]).product();
    let ds: usize = out_dims.iter().product();
    let dr = m.nrows() / dt.max(1);
    let d_in = m.nrows();
    let d_out = dr * ds;
    let mut acc: CMatrix = DMatrix::zeros(d_out, d_out);
    for k in kraus {
        debug_assert_eq!(k.ncols(), dt);
        debug_assert_eq!(k.nrows(), ds);
        // row index of `work` is r * dt + t, so column-major reshaping puts t first
        let x = reshape(work.clone(), dt, dr * d_in);
        let y = reshape(k * x, d_out, d_in);
        let z = reshape(y.adjoint(), dt, dr * d_out);
        let w = reshape(k * z, d_out, d_out);
        acc += w;
    }
    let mut work_dims: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).map(|f| dims[f]).collect();
    work_dims.extend_from_slice(out_dims);
    let back = restore_perm(n, targets, out_dims.len());
    hermitize(&permute(&acc, &work_dims, &back))
}

/// `K m K†` for a single, not necessarily Hermitian-preserving, operator
/// sandwich. Used for one-sided products where `m` is not a state.
pub fn sandwich(
    m: &CMatrix,
    dims: &[usize],
    targets: &[usize],
    left: &CMatrix,
    right: &CMatrix,
    out_dims: &[usize],
) -> CMatrix {
    let n = dims.len();
    let perm = targets_last(n, targets);
    let work = permute(m, dims, &perm);
    let dt: usize = targets.iter().map(|&f| dims[f]).product();
    let ds: usize = out_dims.iter().product();
    let dr = m.nrows() / dt.max(1);
    let d_in = m.nrows();
    let d_out = dr * ds;
    let x = reshape(work, dt, dr * d_in);
    let y = reshape(left * x, d_out, d_in);
    // (L ⊗ I) m (R ⊗ I)† = ((R ⊗ I) ((L ⊗ I) m)†)†
    let z = reshape(y.adjoint(), dt, dr * d_out);
    let w = reshape(right * z, d_out, d_out).adjoint();
    let mut work_dims: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).map(|f| dims[f]).collect();
    work_dims.extend_from_slice(out_dims);
    let back = restore_perm(n, targets, out_dims.len());
    permute(&w, &work_dims, &back)
}

/// `op` acting on `targets`, identity elsewhere, as a full matrix.
pub fn embed_operator(op: &CMatrix, dims: &[usize], targets: &[usize]) -> CMatrix {
    let n = dims.len();
    let dr: usize = (0..n).filter(|f| !targets.contains(f)).map(|f| dims[f]).product();
    let full = kron(&DMatrix::identity(dr, dr), op);
    let mut work_dims: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).map(|f| dims[f]).collect();
    work_dims.extend(targets.iter().map(|&f| dims[f]));
    let back = restore_perm(n, targets, targets.len());
    permute(&full, &work_dims, &back)
}

/// Full `D_out × D_in` matrix of `op` acting on `targets` (which become
/// factors of dims `out_dims`, placed as in [`replaced_dims`]).
pub fn embed_rect(op: &CMatrix, dims: &[usize], targets: &[usize], out_dims: &[usize]) -> CMatrix {
    let n = dims.len();
    let rest: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).collect();
    let dr: usize = rest.iter().map(|&f| dims[f]).product();
    let work = kron(&DMatrix::identity(dr, dr), op);
    let map_in = index_map(dims, &targets_last(n, targets));
    let mut work_out_dims: Vec<usize> = rest.iter().map(|&f| dims[f]).collect();
    work_out_dims.extend_from_slice(out_dims);
    let map_out = index_map(&work_out_dims, &restore_perm(n, targets, out_dims.len()));
    let mut full = DMatrix::zeros(map_out.len(), map_in.len());
    for (a, &col) in map_in.iter().enumerate() {
        for (b, &row) in map_out.iter().enumerate() {
            full[(b, col)] = work[(row, a)];
        }
    }
    full
}

/// Inverse of a permutation given as new-to-old positions.
pub fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    inverse(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::{c, max_abs};
    use crate::qstate::{rng_from_seed, ginibre_matrix};

    fn rand_m(d: usize, seed: u64) -> CMatrix {
        let mut rng = rng_from_seed(seed);
        ginibre_matrix(d, d, &mut rng)
    }

    #[test]
    fn index_map_swaps_two_factors() {
        // dims (2,3): old index = a*3 + b; new order (b, a): new = b*2 + a
        let map = index_map(&[2, 3], &[1, 0]);
        for a in 0..2 {
            for b in 0..3 {
                assert_eq!(map[b * 2 + a], a * 3 + b);
            }
        }
    }

    #[test]
    fn partial_trace_of_kron() {
        let a = rand_m(2, 1);
        let b = rand_m(3, 2);
        let ab = kron(&a, &b);
        let ta = partial_trace(&ab, &[2, 3], &[0]);
        let tr_b = b.trace();
        assert!(max_abs(&(ta - &a * tr_b)) < 1e-12);
        let tb = partial_trace(&ab, &[2, 3], &[1]);
        assert!(max_abs(&(tb - &b * a.trace())) < 1e-12);
    }

    #[test]
    fn apply_matches_embedded_product() {
        let dims = [2, 3, 2];
        let m = rand_m(12, 3);
        let k = rand_m(6, 4);
        // operator on factors (2, 0) in that order: dims 2*2 = 4
        let k4 = k.view((0, 0), (4, 4)).into_owned();
        let full = embed_operator(&k4, &dims, &[2, 0]);
        let direct = &full * &m * full.adjoint();
        let fast = apply_kraus(&m, &dims, &[2, 0], std::slice::from_ref(&k4), &[2, 2]);
        assert!(max_abs(&(hermitize(&direct) - fast)) < 1e-10);
        let sand = sandwich(&m, &dims, &[2, 0], &k4, &k4, &[2, 2]);
        assert!(max_abs(&(direct - sand)) < 1e-10);
    }

    #[test]
    fn embed_rect_agrees_with_apply() {
        let dims = [2, 3, 2];
        let m = rand_m(12, 8);
        let k = rand_m(6, 9).view((0, 0), (3, 4)).into_owned();
        let full = embed_rect(&k, &dims, &[2, 0], &[3]);
        let direct = hermitize(&(&full * &m * full.adjoint()));
        let fast = apply_kraus(&m, &dims, &[2, 0], &[k], &[3]);
        assert!(max_abs(&(direct - fast)) < 1e-10);
    }

    #[test]
    fn apply_can_change_factor_count() {
        // trace out factor 1 via Kraus ⟨i|
        let dims = [2, 3, 2];
        let m = rand_m(12, 5);
        let kraus: Vec<CMatrix> = (0..3)
            .map(|i| {
                let mut k = DMatrix::zeros(1, 3);
                k[(0, i)] = c(1.0);
                k
            })
            .collect();
        let out = apply_kraus(&m, &dims, &[1], &kraus, &[]);
        let pt = partial_trace(&hermitize(&m), &dims, &[0, 2]);
        assert_eq!(replaced_dims(&dims, &[1], &[]), vec![2, 2]);
        assert!(max_abs(&(out - pt)) < 1e-10);
    }
}

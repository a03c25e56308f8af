"""Combinatorial tables for exterior algebra in fixed low dimension.

A k-form on R^n is stored densely over the C(n, k) strictly increasing
multi-indices, ordered as itertools.combinations emits them.  Everything here
is a cached integer/float table so the form operations reduce to einsum
contractions that broadcast over leading batch axes.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from math import comb

import numpy as np


def ncomp(dim: int, k: int) -> int:
    return comb(dim, k)


@lru_cache(maxsize=None)
def index_sets(dim: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(dim), k))


@lru_cache(maxsize=None)
def index_rank(dim: int, k: int) -> dict:
    return {s: p for p, s in enumerate(index_sets(dim, k))}


def _cross_inversions(left, right) -> int:
    return sum(1 for i in left for j in right if i > j)


@lru_cache(maxsize=None)
def wedge_tensor(dim: int, k: int, l: int) -> np.ndarray:
    """Structure constants S with (a ^ b)_K = S[I, J, K] a_I b_J."""
    if k + l > dim:
        raise ValueError("degree of wedge exceeds dimension")
    rank_out = index_rank(dim, k + l)
    S = np.zeros((ncomp(dim, k), ncomp(dim, l), ncomp(dim, k + l)))
    for ia, I in enumerate(index_sets(dim, k)):
        set_i = set(I)
        for jb, J in enumerate(index_sets(dim, l)):
            if set_i & set(J):
                continue
            sign = -1.0 if _cross_inversions(I, J) % 2 else 1.0
            S[ia, jb, rank_out[tuple(sorted(I + J))]] = sign
    return S


@lru_cache(maxsize=None)
def contraction_tensor(dim: int, k: int) -> np.ndarray:
    """Table C with (iota_v a)_J = v^i a_I C[i, I, J]."""
    if k < 1:
        raise ValueError("cannot contract a 0-form")
    rank_out = index_rank(dim, k - 1)
    C = np.zeros((dim, ncomp(dim, k), ncomp(dim, k - 1)))
    for pk, K in enumerate(index_sets(dim, k)):
        for pos, i in enumerate(K):
            J = K[:pos] + K[pos + 1:]
            C[i, pk, rank_out[J]] = -1.0 if pos % 2 else 1.0
    return C


@lru_cache(maxsize=None)
def star_arrays(dim: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean Hodge star as a gather: (*a)[q] = sign[q] * a[perm[q]]."""
    rank_in = index_rank(dim, k)
    out_sets = index_sets(dim, dim - k)
    perm = np.empty(len(out_sets), dtype=np.intp)
    sign = np.empty(len(out_sets))
    for q, C in enumerate(out_sets):
        I = tuple(i for i in range(dim) if i not in C)
        perm[q] = rank_in[I]
        sign[q] = -1.0 if _cross_inversions(I, C) % 2 else 1.0
    return perm, sign


@lru_cache(maxsize=None)
def _subset_array(dim: int, k: int) -> np.ndarray:
    return np.array(index_sets(dim, k), dtype=np.intp).reshape(ncomp(dim, k), k)


def compound_matrix(L: np.ndarray, k: int) -> np.ndarray:
    """k-th compound: C[..., P, Q] = det(L[rows P, cols Q]) over index sets."""
    dim = L.shape[-1]
    if k == 0:
        return np.ones(L.shape[:-2] + (1, 1), dtype=L.dtype)
    rows = _subset_array(dim, k)
    nk = rows.shape[0]
    r_idx = rows[:, None, :, None]          # (nk, 1, k, 1)
    c_idx = rows[None, :, None, :]          # (1, nk, 1, k)
    sub = L[..., r_idx, c_idx]              # (..., nk, nk, k, k)
    if k == 1:
        return sub[..., 0, 0]
    if k == 2:
        return sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    if k == 3:
        return (sub[..., 0, 0] * (sub[..., 1, 1] * sub[..., 2, 2]
                                  - sub[..., 1, 2] * sub[..., 2, 1])
                - sub[..., 0, 1] * (sub[..., 1, 0] * sub[..., 2, 2]
                                    - sub[..., 1, 2] * sub[..., 2, 0])
                + sub[..., 0, 2] * (sub[..., 1, 0] * sub[..., 2, 1]
                                    - sub[..., 1, 1] * sub[..., 2, 0]))
    return np.linalg.det(sub)


@lru_cache(maxsize=None)
def _perm_table(k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    out = []
    for p in permutations(range(k)):
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if p[a] > p[b])
        out.append((p, -1 if inv % 2 else 1))
    return tuple(out)


def coeffs_to_tensor(coeffs: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Expand increasing-index storage to the full antisymmetric array."""
    lead = coeffs.shape[:-1]
    T = np.zeros(lead + (dim,) * k, dtype=coeffs.dtype)
    sets = index_sets(dim, k)
    for p, K in enumerate(sets):
        for perm, sign in _perm_table(k):
            idx = tuple(K[q] for q in perm)
            T[(...,) + idx] = sign * coeffs[..., p]
    return T


def tensor_to_coeffs(T: np.ndarray, dim: int, k: int,
                     antisymmetrize: bool = False) -> np.ndarray:
    """Read increasing-index coefficients back off a k-index array."""
    sets = index_sets(dim, k)
    if not antisymmetrize:
        cols = [T[(...,) + K] for K in sets]
        return np.stack(cols, axis=-1)
    cols = []
    fact = 1.0
    for q in range(2, k + 1):
        fact *= q
    for K in sets:
        acc = 0.0
        for perm, sign in _perm_table(k):
            acc = acc + sign * T[(...,) + tuple(K[q] for q in perm)]
        cols.append(acc / fact)
    return np.stack(cols, axis=-1)

"""Pure-Python implementations of the hot kernels.

The compiled module ``idcert._kernels`` exposes the same functions with the
same signatures; :mod:`idcert._backend` picks one at import time.  Rows are
passed as parallel lists of x/z bit masks (bit q = qubit q+1).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def _restricted_commute(xs, zs, mask: int) -> bool:
    m = len(xs)
    for i in range(m):
        for j in range(i + 1, m):
            if _parity(((xs[i] & zs[j]) ^ (zs[i] & xs[j])) & mask):
                return False
    return True


def xor_zero_subsets(keys, m_min: int, m_max: int) -> list[tuple[int, ...]]:
    """Index tuples (ascending) of subsets of ``keys`` with XOR zero and size in range.

    ``keys`` must be distinct and nonzero.  The last element of each subset is
    determined by the running XOR of the others, so only ``m-1`` levels are
    enumerated.
    """
    pos = {k: i for i, k in enumerate(keys)}
    n = len(keys)
    out: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def rec(start: int, acc: int, depth: int, m: int):
        if depth == m - 1:
            j = pos.get(acc)
            if j is not None and j >= start:
                out.append(tuple(chosen) + (j,))
            return
        for i in range(start, n - (m - 1 - depth)):
            chosen.append(i)
            rec(i + 1, acc ^ keys[i], depth + 1, m)
            chosen.pop()

    for m in range(max(2, m_min), m_max + 1):
        rec(0, 0, 0, m)
    return out


def id_is_entangled(xs, zs, n: int) -> bool:
    full = (1 << n) - 1
    for side in range(1, full, 2):
        # commutation on one side implies it on the other for commuting rows
        if _restricted_commute(xs, zs, side) and _restricted_commute(xs, zs, full & ~side):
            return False
    return True


def _gf2_rank(vals) -> int:
    basis: list[int] = []
    for v in vals:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def id_is_critical(xs, zs, n: int) -> bool:
    m = len(xs)
    if _gf2_rank([x | (z << n) for x, z in zip(xs, zs)]) != m - 1:
        return False
    full = (1 << n) - 1
    for cols in range(1, full):
        keep = [i for i in range(m) if (xs[i] | zs[i]) & cols]
        if len(keep) < 2:
            continue
        if _restricted_commute([xs[i] for i in keep], [zs[i] for i in keep], cols):
            return False
    return True


# -- LU-orbit objective and Nelder-Mead -------------------------------------


def lu_state(seed: np.ndarray, params: np.ndarray, n: int) -> np.ndarray:
    """``(U_1 x ... x U_N) seed`` with ``U_q = Rz(a) Ry(b) Rz(c)``."""
    psi = np.asarray(seed, dtype=complex).reshape([2] * n)
    for q in range(n):
        a, b, c = params[3 * q], params[3 * q + 1], params[3 * q + 2]
        cb, sb = math.cos(b / 2), math.sin(b / 2)
        e_p = complex(math.cos((a + c) / 2), math.sin((a + c) / 2))
        e_m = complex(math.cos((a - c) / 2), math.sin((a - c) / 2))
        u = np.array([[e_p.conjugate() * cb, -e_m.conjugate() * sb],
                      [e_m * sb, e_p * cb]])
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def sum_abs_expectations(psi: np.ndarray, perms: np.ndarray, coeffs: np.ndarray) -> float:
    """``sum_i |<psi|O_i|psi>|`` for rows given as (perm, coeff) actions."""
    total = 0.0
    for perm, coeff in zip(perms, coeffs):
        total += abs(np.vdot(psi[perm], coeff * psi).real)
    return total


def nelder_mead_max(f, x0, tol: float = 1e-7, max_iter: int = 2000,
                    step: float = 0.05) -> tuple[np.ndarray, float, int, bool]:
    """Maximize ``f`` with the Nelder-Mead simplex.

    Standard coefficients (reflection 1, expansion 2, contraction 1/2, shrink
    1/2) and an fminsearch-style initial simplex (5% of each nonzero
    coordinate, 0.00025 for zero ones).  Stops when both the simplex diameter
    and the spread of function values fall below ``tol``.

    Returns ``(x_best, f_best, iterations, converged)``.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.shape[0]
    simplex = np.empty((d + 1, d))
    simplex[0] = x0
    for k in range(d):
        y = x0.copy()
        y[k] = y[k] * (1 + step) if y[k] != 0 else 0.00025
        simplex[k + 1] = y
    # minimize g = -f
    vals = np.empty(d + 1)
    for k in range(d + 1):
        vals[k] = -_finite(f(simplex[k]))
    it = 0
    converged = False
    while it < max_iter:
        order = np.argsort(vals, kind="stable")
        simplex = simplex[order]
        vals = vals[order]
        diam = np.max(np.abs(simplex[1:] - simplex[0]))
        if diam <= tol and vals[-1] - vals[0] <= tol:
            converged = True
            break
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = -_finite(f(xr))
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = -_finite(f(xe))
            if fe < fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
        elif fr < vals[-2]:
            simplex[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = -_finite(f(xc))
                accept = fc <= fr
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
                fc = -_finite(f(xc))
                accept = fc < vals[-1]
            if accept:
                simplex[-1], vals[-1] = xc, fc
            else:
                for k in range(1, d + 1):
                    simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0])
                    vals[k] = -_finite(f(simplex[k]))
    k = int(np.argmin(vals))
    return simplex[k].copy(), float(-vals[k]), it, converged


def _finite(v: float) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise FloatingPointError("objective returned a non-finite value")
    return v


def maximize_sum_abs(seed_re, seed_im, perms, coeffs_re, coeffs_im, n, x0,
                     tol, max_iter) -> tuple[np.ndarray, float, int, bool]:
    """Nelder-Mead maximization of ``sum_i |<O_i>|`` over the LU orbit of ``seed``."""
    seed = np.asarray(seed_re) + 1j * np.asarray(seed_im)
    coeffs = np.asarray(coeffs_re) + 1j * np.asarray(coeffs_im)
    perms = np.asarray(perms)

    def f(p):
        return sum_abs_expectations(lu_state(seed, p, n), perms, coeffs)

    return nelder_mead_max(f, x0, tol, max_iter)

"""Brute-force 2-D verification of the separated spectrum.

Discretizes the full Laplace-Beltrami operator of the bipolar surface,

    L f = -(1/cos^2 phi) f_aa - d/dt(4 pi^2 cos^2 phi f_t),

directly on the (alpha, t) torus in flux form.  The operator is
self-adjoint for the uniform measure dalpha dt / (2 pi) (the area
element is constant), so the flux discretization is a symmetric
positive-semidefinite matrix and its spectrum below a cutoff can be
compared one-to-one against the assembled separated-variable table.

For even q the parameter grid double-covers the surface; eigenfunctions
are filtered by their character under the deck transformation
(alpha, t) -> (alpha + pi, t + t0/2), mirroring the quotient filter of
the assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceFailure
from .geodesic import GeodesicProfile
from .spectrum import ModeTable
from .sturm import symmetry_characters

_ORACLE_SEED = 0xFEEDFACE


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on [0, 2 pi) x [0, t0)."""

    profile: GeodesicProfile
    n_alpha: int
    n_t: int

    def __post_init__(self):
        if self.n_alpha < 32 or self.n_t < 32:
            raise ValueError("oracle grid needs at least 32 points per axis")
        if self.n_alpha % 2 or self.n_t % 2:
            raise ValueError("oracle grid sizes must be even")

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.n_alpha) * (2.0 * math.pi / self.n_alpha)

    @property
    def ts(self) -> np.ndarray:
        return np.arange(self.n_t) * (self.profile.t0 / self.n_t)

    def points_per_half_oscillation(self) -> float:
        return self.n_t / (2 * self.profile.solution.rotation.q)


def _operator_matrix(grid: TorusGrid) -> scipy.sparse.csc_matrix:
    """Flux-form matrix; unknowns indexed row = j_t * n_alpha + i_alpha."""
    prof = grid.profile
    na, nt = grid.n_alpha, grid.n_t
    h_a = 2.0 * math.pi / na
    h_t = prof.t0 / nt
    ts = grid.ts
    cos2 = prof.cos2_phi_at(ts)                       # (nt,)
    c_half = 4.0 * math.pi ** 2 * prof.cos2_phi_at(ts + 0.5 * h_t)

    w_alpha = (1.0 / cos2) / h_a ** 2                 # per t-row
    w_t = c_half / h_t ** 2                           # between rows j, j+1

    n = na * nt
    idx = np.arange(n).reshape(nt, na)
    right = np.roll(idx, -1, axis=1)
    up = np.roll(idx, -1, axis=0)

    wa = np.repeat(w_alpha, na)
    wt = np.repeat(w_t, na)
    diag = 2.0 * wa + wt + np.repeat(np.roll(w_t, 1), na)

    rows = np.concatenate([idx.ravel(), right.ravel(),
                           idx.ravel(), up.ravel(),
                           np.arange(n)])
    cols = np.concatenate([right.ravel(), idx.ravel(),
                           up.ravel(), idx.ravel(),
                           np.arange(n)])
    vals = np.concatenate([-wa, -wa, -wt, -wt, diag])
    return scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass
class OracleSpectrum:
    """Eigenvalues of the 2-D operator below a cutoff.

    ``deck_characters`` is the per-eigenfunction character (+1/-1/nan)
    under the half-period deck transformation; ``kept`` marks
    eigenfunctions that descend to the quotient surface (all of them
    for odd q).
    """

    grid: TorusGrid
    lambda_cut: float
    eigenvalues: np.ndarray
    deck_characters: np.ndarray
    kept: np.ndarray

    def kept_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.kept]


def dense_spectrum(grid: TorusGrid, lambda_cut: float,
                   k_start: int = 48) -> OracleSpectrum:
    """All eigenvalues of the discretized operator below ``lambda_cut``.

    Shift-invert Lanczos from sigma = -1 with a deterministic start
    vector; k grows until the window provably covers the cutoff.
    """
    a = _operator_matrix(grid)
    n = a.shape[0]
    v0 = np.random.default_rng(_ORACLE_SEED).standard_normal(n)
    k = min(k_start, n - 2)
    while True:
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                a, k=k, sigma=-1.0, which="LM", v0=v0)
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise ConvergenceFailure(f"oracle eigensolver failed: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        if vals[-1] >= lambda_cut or k >= n - 2:
            break
        k = min(2 * k, n - 2)

    below = vals < lambda_cut
    vals, vecs = vals[below], vecs[:, below]

    r = grid.profile.solution.rotation
    if r.even_q:
        na, nt = grid.n_alpha, grid.n_t

        def deck(mat):
            cube = mat.reshape(nt, na, -1)
            return np.roll(np.roll(cube, -nt // 2, axis=0),
                           -na // 2, axis=1).reshape(mat.shape)

        scale = max(abs(float(vals[0])), abs(float(vals[-1])), 1.0)
        chars, _ = symmetry_characters(vals, vecs, deck, 1e-8 * scale)
        kept = chars == 1.0
    else:
        chars = np.ones(vals.size)
        kept = np.ones(vals.size, dtype=bool)

    return OracleSpectrum(grid=grid, lambda_cut=lambda_cut,
                          eigenvalues=vals, deck_characters=chars, kept=kept)


def theorem2_residual(profile: GeodesicProfile, grid: TorusGrid) -> float:
    """Worst relative residual of L f = 2 f over the immersed coordinates.

    Evaluates the five coordinate functions of the immersion on the
    grid, applies the discrete operator, and returns
    max ||L f - 2 f||_inf / ||f||_inf; second-order convergence in the
    grid spacing.
    """
    a = _operator_matrix(grid)
    alphas, ts = grid.alphas, grid.ts
    aa, tt = np.meshgrid(alphas, ts, indexing="xy")   # shape (nt, na)
    phi = profile.phi_at(tt)
    theta = profile.theta_at(tt)
    cp = np.cos(phi)
    coords = [
        np.cos(aa) * cp * np.sin(theta),
        np.sin(aa) * cp * np.sin(theta),
        np.cos(aa) * cp * np.cos(theta),
        np.sin(aa) * cp * np.cos(theta),
        np.sin(phi) * np.ones_like(aa),
    ]
    worst = 0.0
    for f in coords:
        flat = f.ravel()
        resid = a @ flat - 2.0 * flat
        worst = max(worst, float(np.max(np.abs(resid))
                                 / np.max(np.abs(flat))))
    return worst


def match_table(oracle: OracleSpectrum, table: ModeTable, lam: float,
                exclusion_window: float, pair_tol: float):
    """Pair oracle and assembled eigenvalues below ``lam``.

    Eigenvalues within ``exclusion_window`` of the threshold are set
    aside on both sides (they straddle it by grid error).  Returns
    (count_match, max_pairwise_difference, n_oracle, n_table).
    """
    kept = np.sort(oracle.kept_eigenvalues())
    kept = kept[np.abs(kept - lam) > exclusion_window]
    oracle_vals = kept[kept < lam]

    table_vals = []
    for e in table.kept_below(lam):
        if not e.pinned_two:
            table_vals.extend([e.lam] * e.multiplicity)
    table_vals = np.sort(np.array(table_vals))

    if oracle_vals.size != table_vals.size:
        return False, float("inf"), int(oracle_vals.size), int(table_vals.size)
    diff = float(np.max(np.abs(oracle_vals - table_vals))) if table_vals.size else 0.0
    return bool(diff <= pair_tol), diff, int(oracle_vals.size), int(table_vals.size)

"""Mean-energy functional over the free functions.

On a valid solution the energy density reduces to
``(v_t^2 + v_x^2)/2 = (w_plus')^2 + (w_minus')^2`` per segment, so the
mean energy is a weighted integral of squared wave derivatives over the
reference interval: each wave piece carries the cross-characteristic
thickness of its strip as weight (the trapezoid of
:func:`rodwave.mesh.delta_z_weight`), which is identically lambda on all
interior layers and a linear ramp on the first/last layers.  Control-jump
entries carry zero weight.

Since the first/last layer pieces are resolved purely from data, the
y-dependent part of the functional sees the constant weight lambda only;
the ramp layers contribute a data constant that is kept so that the
reported optimum equals the true mean energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, lil_matrix

from .errors import AssemblyError, InvalidArgumentError
from .mesh import MeshConfig, delta_z_weight
from .sampled import SampledFunction, simpson_weights
from .edge import EssentialBC, Parametrization


@dataclass(frozen=True)
class EnergyWeights:
    """Diagonal weight of the stacked quadratic form, one function per
    wave entry on [0, lambda]; control entries weigh zero."""

    mesh: MeshConfig
    p: int
    table: dict = field(repr=False)  # wave entry key -> SampledFunction

    def weight_values(self, key) -> np.ndarray:
        if key[0] == "u":
            return np.zeros(self.p)
        return self.table[key].values

    def matrix(self, catalog) -> np.ndarray:
        """(N_v, p) array of weights in catalog order."""
        out = np.zeros((catalog.N_v, self.p))
        for e, key in enumerate(catalog.entries):
            if key[0] == "w":
                out[e] = self.table[key].values
        return out


def build_weights(mesh: MeshConfig, p: int = 129) -> EnergyWeights:
    """Per-piece restriction of the strip-thickness trapezoid.

    Piece (side, k, m) occupies offsets [m*lam/2, m*lam/2 + lam] of the
    wave domain, so its weight is z on the first layer, lam - z on the
    last, and the constant lam in between.
    """
    z = np.linspace(0.0, mesh.lam, p)
    table = {}
    for k in mesh.J_s:
        for side in (+1, -1):
            lo, _ = mesh.wave_domain(k, side)
            for m in mesh.J_t:
                vals = delta_z_weight(mesh, k, side, lo + m * mesh.lam / 2.0 + z)
                table[("w", side, k, m)] = SampledFunction(0.0, mesh.lam, vals)
    return EnergyWeights(mesh=mesh, p=p, table=table)


@dataclass(frozen=True)
class QuadraticProgram:
    """Discretized functional  obj(x) = x^T H x + 2 b^T x + c0  over
    x = (y samples in sample-major order, then the per-segment terminal
    constants gamma), with equality constraints C x = d encoding the
    essential boundary conditions."""

    mesh: MeshConfig
    p: int
    n_free: int
    n_gamma: int
    H: csr_matrix = field(repr=False)
    b: np.ndarray = field(repr=False)
    c0: float
    C: csr_matrix = field(repr=False)
    d: np.ndarray = field(repr=False)

    @property
    def n_x(self) -> int:
        return self.n_free * self.p + self.n_gamma

    def objective(self, x: np.ndarray) -> float:
        return float(x @ (self.H @ x) + 2.0 * (self.b @ x) + self.c0)

    def unpack(self, x: np.ndarray):
        """Split a flat solution vector into (y samples (N_s, p), gamma)."""
        ny = self.n_free * self.p
        y = x[:ny].reshape(self.p, self.n_free).T.copy()
        return y, x[ny:].copy()


def assemble_qp(par: Parametrization, bc: EssentialBC,
                weights: EnergyWeights, p: int) -> QuadraticProgram:
    """Quadratic program in the sampled free functions and c1.

    The objective is (1/T) * sum over wave entries of the midpoint-rule
    quadrature of weight * (A_e y' + g_e')^2, with derivatives taken as
    forward differences onto cell midpoints.  The midpoint form is second
    order like the nodal stencils but strictly convex in the derivative
    seminorm: a central-difference form would be blind to grid-scale
    sawtooth modes and the KKT solution would carry them as noise.  c1 is
    constant in z and drops out of the objective, entering through the
    constraints only.
    """
    mesh, cat = par.mesh, par.catalog
    if p != par.state.grid_p(mesh):
        raise AssemblyError(f"QP grid p={p} does not match the state grid")
    if weights.p != p:
        raise AssemblyError("weight grid does not match the QP grid")
    n_s = par.n_free
    n_w = cat.N_w
    h = mesh.lam / (p - 1)

    a_w = par.A[:n_w]                      # wave rows of A
    g_w = par.g_matrix(p)[:n_w]
    g_d = np.diff(g_w, axis=1) / h         # midpoint derivatives, (N_w, p-1)
    w_nodes = weights.matrix(cat)[:n_w]
    w_mid = 0.5 * (w_nodes[:, :-1] + w_nodes[:, 1:])

    # per-cell quadratic kernels over the free vector
    scale = np.full(p - 1, h / mesh.T)
    kernels = np.einsum("ei,ep,ej->pij", a_w, w_mid * scale[None, :], a_w)
    lin_cells = a_w.T @ (w_mid * scale[None, :] * g_d)     # (n_s, p-1)
    c0 = float(np.sum(w_mid * scale[None, :] * g_d * g_d))

    n_gamma = par.n_gamma
    n_x = n_s * p + n_gamma
    blocks: dict = {}
    lin = np.zeros(n_x)
    for q in range(p - 1):
        stencil = ((q, -1.0 / h), (q + 1, 1.0 / h))
        kq = kernels[q]
        lq = lin_cells[:, q]
        for p1, c1v in stencil:
            lin[p1 * n_s:(p1 + 1) * n_s] += c1v * lq
            for p2, c2v in stencil:
                key = (p1, p2)
                if key in blocks:
                    blocks[key] = blocks[key] + (c1v * c2v) * kq
                else:
                    blocks[key] = (c1v * c2v) * kq

    hmat = lil_matrix((n_x, n_x))
    for (p1, p2), block in blocks.items():
        hmat[p1 * n_s:(p1 + 1) * n_s, p2 * n_s:(p2 + 1) * n_s] = block
    hmat = hmat.tocsr()

    n_c = bc.n_rows
    cmat = lil_matrix((n_c, n_x))
    if n_c:
        cmat[:, (p - 1) * n_s:p * n_s] = bc.B1
        cmat[:, 0:n_s] += -bc.B0
        cmat[:, n_s * p:] = -bc.B_gamma
    return QuadraticProgram(mesh=mesh, p=p, n_free=n_s, n_gamma=n_gamma,
                            H=hmat, b=lin, c0=c0, C=cmat.tocsr(),
                            d=bc.b0.copy() if n_c else np.zeros(0))


def evaluate_objective(par: Parametrization, weights: EnergyWeights,
                       y: np.ndarray) -> float:
    """Weighted mean-energy value of a sampled free vector (any solver).

    Uses the same midpoint quadrature as :func:`assemble_qp`, so that the
    QP minimizer is guaranteed not to exceed any other feasible solution
    under this evaluator; it is the single evaluator used when comparing
    solutions from different paths.
    """
    mesh, cat = par.mesh, par.catalog
    p = y.shape[1]
    if weights.p != p:
        raise InvalidArgumentError("weight grid does not match y samples")
    n_w = cat.N_w
    h = mesh.lam / (p - 1)
    wd = np.diff(par.A[:n_w] @ y + par.g_matrix(p)[:n_w], axis=1) / h
    w_nodes = weights.matrix(cat)[:n_w]
    w_mid = 0.5 * (w_nodes[:, :-1] + w_nodes[:, 1:])
    return float(np.sum(w_mid * wd * wd) * h / mesh.T)


def blockwise_simpson(values: np.ndarray, h: float, splits) -> float:
    """Composite Simpson split at the given interior sample indices.

    Each smooth block is integrated separately, so jump discontinuities
    located exactly at split samples cost no accuracy when the stored
    sample value is the jump midpoint (the one-sided panel errors of the
    two adjacent blocks cancel).  Blocks with an odd interval count lose
    one Simpson panel to a trapezoid step.
    """
    n = len(values)
    bounds = [0] + sorted({int(s) for s in splits if 0 < s < n - 1}) + [n - 1]
    total = 0.0
    for a, b in zip(bounds[:-1], bounds[1:]):
        m = b - a
        if m == 0:
            continue
        start = a
        if m % 2 == 1:
            total += 0.5 * h * (values[a] + values[a + 1])
            start = a + 1
            if start == b:
                continue
        total += float(simpson_weights(b - start + 1, h) @ values[start:b + 1])
    return total


def mean_energy(field_grid) -> float:
    """Mean mechanical energy from reconstructed fields on the (t, x) grid.

    Uses the on-solution identities v_t = p/rho and v_x = (s - f)/kappa
    (dimensionless: rho = kappa = 1), integrating (v_t^2 + v_x^2)/2 in two
    passes of blockwise Simpson: rows are split at their characteristic
    kink samples (and at interfaces, via per-segment windows), the
    resulting time profile at the instants where kink lines meet the mesh
    lines.  The density is the sector-averaged ``e_quad`` whose lattice
    samples carry jump midpoints, so the blockwise panels cancel the
    one-sided errors.
    """
    fg = field_grid
    ht = fg.t[1] - fg.t[0]
    hx = fg.x[1] - fg.x[0]
    plus, minus = fg.kink_masks()
    kinks = plus | minus
    nt = len(fg.t)
    profile = np.zeros(nt)
    for (j0, j1), vals in zip(fg.segment_windows(), fg.e_quad_segments):
        kseg = kinks[:, j0:j1 + 1]
        for i in range(nt):
            profile[i] += blockwise_simpson(vals[i], hx, np.flatnonzero(kseg[i]))
    t_splits = np.arange(fg.qt, nt - 1, fg.qt)
    return blockwise_simpson(profile, ht, t_splits) / fg.mesh.T

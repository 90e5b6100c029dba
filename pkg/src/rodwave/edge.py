"""Edge-constraint system over traveling waves and control jumps.

Every function-valued unknown lives on the reference interval
``[0, lambda]``: wave pieces ``w(side, k, m)`` for each segment k, side
(+1/-1) and even layer m, and jump pieces ``u(n, m)`` of the control
integrals at each interface n.  Matching the pieces across initial,
terminal, boundary and interelement mesh edges yields a linear system
whose coefficients are small integers and whose right-hand sides are
compositions of the prescribed state profiles with affine arguments.

The system is eliminated exactly (rational arithmetic) down to the affine
parametrization ``w(z) = A y(z) + C_gamma gamma + g(z)`` in the surviving
free functions y and the per-segment free terminal constants gamma;
mesh-vertex continuity then becomes the two-point boundary condition
``B1 y(lambda) - B0 y(0) = B_gamma gamma + b0`` on the free functions.

Sign conventions.  The dynamic potential is reconstructed as
``r = w_plus + (-1)*w_minus + u_k(t)`` on segment k, which is the choice
consistent with the constitutive split ``s = kappa v_x + f`` and with the
interelement jump definition ``u_n = u_{n+1} - u_{n-1}``.  Under it the
left-boundary rows carry the additive constant ``-r0(-1)`` and the
right-boundary rows ``+r0(+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    AssemblyError,
    ConfigurationError,
    InfeasibleError,
    InvalidArgumentError,
)
from .mesh import MeshConfig, counts
from .sampled import SampledFunction

DATA_NAMES = ("v0", "r0", "v1", "r1")


# ---------------------------------------------------------------------------
# Prescribed states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpec:
    """Initial pair (v0, r0) and terminal pair (v1, r1) on [-1, 1].

    ``r1`` holds the terminal potential up to its free additive constants,
    which are always carried separately as optimization variables.
    Momentum profiles may be kept alongside for the finite-difference
    oracle.
    """

    v0: SampledFunction
    r0: SampledFunction
    v1: SampledFunction
    r1: SampledFunction
    p0: Optional[SampledFunction] = None
    p1: Optional[SampledFunction] = None

    def __post_init__(self):
        ref = self.v0
        for name in ("r0", "v1", "r1"):
            f = getattr(self, name)
            if f.p != ref.p or f.a != ref.a or f.b != ref.b:
                raise ConfigurationError(
                    f"state profile {name} is not on the same grid as v0"
                )
        if not (math.isclose(ref.a, -1.0) and math.isclose(ref.b, 1.0)):
            raise ConfigurationError("state profiles must live on [-1, 1]")

    @classmethod
    def from_momentum(cls, v0, p0, v1, p1) -> "StateSpec":
        """Derive the potentials by cumulative integration, with c0 = 0."""
        return cls(v0=v0, r0=p0.cumulative(), v1=v1, r1=p1.cumulative(),
                   p0=p0, p1=p1)

    @classmethod
    def from_callables(cls, mesh: MeshConfig, p: int, v0, r0, v1, r1) -> "StateSpec":
        pd = mesh.N * (p - 1) + 1
        make = lambda f: SampledFunction.from_vectorized(
            lambda x: np.asarray(f(x), dtype=float) + np.zeros_like(x), -1.0, 1.0, pd)
        return cls(v0=make(v0), r0=make(r0), v1=make(v1), r1=make(r1))

    @classmethod
    def zero(cls, mesh: MeshConfig, p: int) -> "StateSpec":
        pd = mesh.N * (p - 1) + 1
        z = SampledFunction.zeros(-1.0, 1.0, pd)
        return cls(v0=z, r0=z, v1=z, r1=z, p0=z, p1=z)

    def grid_p(self, mesh: MeshConfig) -> int:
        """Per-piece sample count implied by the profile resolution."""
        pd = self.v0.p
        if (pd - 1) % mesh.N != 0:
            raise ConfigurationError(
                f"profile sample count {pd} does not align with N={mesh.N} segments"
            )
        p = (pd - 1) // mesh.N + 1
        if p < 5 or p % 2 == 0:
            raise ConfigurationError(
                f"per-piece sample count {p} must be odd and >= 5"
            )
        return p

    def resample(self, mesh: MeshConfig, p: int) -> "StateSpec":
        """Linear-interpolate all profiles onto the canonical grid for p."""
        pd = mesh.N * (p - 1) + 1
        grid = np.linspace(-1.0, 1.0, pd)

        def onto(f):
            if f is None:
                return None
            return SampledFunction(-1.0, 1.0, f(grid))

        return StateSpec(*[onto(getattr(self, n)) for n in
                           ("v0", "r0", "v1", "r1", "p0", "p1")])

    def arrays(self) -> dict:
        return {name: getattr(self, name).values for name in DATA_NAMES}

    def momentum_initial(self) -> SampledFunction:
        return self.p0 if self.p0 is not None else self.r0.derivative()

    def momentum_terminal(self) -> SampledFunction:
        return self.p1 if self.p1 is not None else self.r1.derivative()


# ---------------------------------------------------------------------------
# Unknown catalog
# ---------------------------------------------------------------------------


def wave_key(side: int, k: int, m: int):
    return ("w", side, k, m)


def jump_key(n: int, m: int):
    return ("u", n, m)


@dataclass(frozen=True)
class UnknownCatalog:
    """Deterministic bijection between function unknowns and column indices.

    Wave entries come first (k ascending, m ascending, '+' before '-'),
    then the control-jump entries (n ascending, m ascending).
    """

    mesh: MeshConfig
    entries: tuple
    index: dict = field(repr=False)

    @property
    def N_w(self) -> int:
        return 2 * (self.mesh.M + 1) * self.mesh.N

    @property
    def N_u(self) -> int:
        return self.mesh.M * (self.mesh.N + 1)

    @property
    def N_v(self) -> int:
        return len(self.entries)

    def shift_halves(self, key) -> int:
        """Coordinate shift of the entry's piece, in units of lambda/2.

        Wave piece (side, k, m) covers absolute characteristic coordinates
        ``z_side_k + m*lam/2 + [0, lam]``; jump piece (n, m) covers times
        ``t_m + [0, lam]``.
        """
        if key[0] == "w":
            _, side, k, m = key
            base = (k - 1) if side == +1 else -(k + 1)
            return base + m
        _, _, m = key
        return m


def build_catalog(mesh: MeshConfig) -> UnknownCatalog:
    entries = []
    for k in mesh.J_s:
        for m in mesh.J_t:
            entries.append(wave_key(+1, k, m))
            entries.append(wave_key(-1, k, m))
    for n in mesh.J_x:
        for m in mesh.J_t[:-1]:
            entries.append(jump_key(n, m))
    index = {key: i for i, key in enumerate(entries)}
    return UnknownCatalog(mesh=mesh, entries=tuple(entries), index=index)


# ---------------------------------------------------------------------------
# Data expressions (right-hand sides and eliminated entries)
# ---------------------------------------------------------------------------


class DataExpr:
    """Affine combination of data windows, boundary constants, and the
    free terminal constants.

    ``terms[(name, orient, shift)] = coef`` stands for
    ``coef * name(orient*z + shift*lam/2)``; ``consts[(name, end)] = coef``
    stands for ``coef * name(end)`` with end = +/-1; ``gammas[k]`` is the
    coefficient of segment k's free terminal-potential constant (the
    terminal potential is prescribed only up to a constant, and each
    segment carries its own because the control integrals shift it
    segment-wise at t = T).
    """

    __slots__ = ("terms", "consts", "gammas")

    def __init__(self, terms=None, consts=None, gammas=None):
        self.terms = dict(terms or {})
        self.consts = dict(consts or {})
        self.gammas = dict(gammas or {})

    def copy(self) -> "DataExpr":
        return DataExpr(self.terms, self.consts, self.gammas)

    def add_scaled(self, other: "DataExpr", coef: Fraction) -> None:
        if coef == 0:
            return
        for key, c in other.terms.items():
            new = self.terms.get(key, Fraction(0)) + coef * c
            if new == 0:
                self.terms.pop(key, None)
            else:
                self.terms[key] = new
        for key, c in other.consts.items():
            new = self.consts.get(key, Fraction(0)) + coef * c
            if new == 0:
                self.consts.pop(key, None)
            else:
                self.consts[key] = new
        for key, c in other.gammas.items():
            new = self.gammas.get(key, Fraction(0)) + coef * c
            if new == 0:
                self.gammas.pop(key, None)
            else:
                self.gammas[key] = new

    def reflected(self) -> "DataExpr":
        """The expression composed with z -> lambda - z."""
        out = DataExpr(consts=self.consts, gammas=self.gammas)
        for (name, orient, shift), c in self.terms.items():
            out.terms[(name, -orient, shift + 2 * orient)] = c
        return out

    def is_zero(self) -> bool:
        return not self.terms and not self.consts and not self.gammas

    def evaluate(self, state: StateSpec, mesh: MeshConfig, p: int,
                 gamma: Optional[dict] = None) -> np.ndarray:
        """Sample on the uniform z-grid of [0, lambda] with p points.

        With ``gamma=None`` the terminal-constant terms are omitted (the
        'g' part); otherwise ``gamma`` maps segment index to value.
        """
        arrays = state.arrays()
        pd = mesh.N * (p - 1) + 1
        if state.v0.p != pd:
            raise ConfigurationError(
                f"state resolution {state.v0.p} does not match grid p={p}"
            )
        half = (p - 1) // 2          # lam/2 in data samples
        center = mesh.N * (p - 1) // 2   # x = 0 in data samples
        out = np.zeros(p)
        idx = np.arange(p)
        for (name, orient, shift), c in self.terms.items():
            base = center + shift * half
            window = base + orient * idx
            if window[0] < 0 or window[-1] < 0 or window.max() > pd - 1:
                raise AssemblyError(f"data window out of range for {name}")
            out += float(c) * arrays[name][window]
        for (name, end), c in self.consts.items():
            out += float(c) * arrays[name][0 if end < 0 else pd - 1]
        if gamma is not None:
            for k, c in self.gammas.items():
                out += float(c) * gamma[k]
        return out


# ---------------------------------------------------------------------------
# Edge rows and system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeRow:
    """One edge constraint: sum of coef * entry(orient*z ...) = rhs(z).

    ``terms`` holds (column, integer coef, orient); orient = -1 means the
    unknown is evaluated at the reflected argument lambda - z (this occurs
    only in initial and terminal rows, on the '-' wave).
    """

    kind: str
    label: tuple
    terms: tuple
    rhs: DataExpr


@dataclass(frozen=True)
class EdgeSystem:
    mesh: MeshConfig
    catalog: UnknownCatalog
    state: StateSpec
    rows: tuple

    @property
    def coefficient_matrix(self) -> np.ndarray:
        """Integer coefficient matrix C (orientations not represented)."""
        c = np.zeros((len(self.rows), self.catalog.N_v), dtype=int)
        for i, row in enumerate(self.rows):
            for col, coef, _ in row.terms:
                c[i, col] = coef
        return c

    def partition(self) -> dict:
        out: dict = {}
        for row in self.rows:
            out[row.kind] = out.get(row.kind, 0) + 1
        return out


def assemble_edge_constraints(mesh: MeshConfig, state: StateSpec) -> EdgeSystem:
    """Build all N_e edge rows for the given mesh and state profiles."""
    p = state.grid_p(mesh)   # raises ConfigurationError on misalignment
    del p
    cat = build_catalog(mesh)
    ix = cat.index
    M2 = 2 * mesh.M
    rows = []

    one = Fraction(1)
    for k in mesh.J_s:
        rows.append(EdgeRow(
            kind="initial_v", label=(k,),
            terms=((ix[wave_key(+1, k, 0)], 1, +1),
                   (ix[wave_key(-1, k, 0)], 1, -1)),
            rhs=DataExpr({("v0", +1, k - 1): one})))
        rows.append(EdgeRow(
            kind="initial_r", label=(k,),
            terms=((ix[wave_key(+1, k, 0)], 1, +1),
                   (ix[wave_key(-1, k, 0)], -1, -1)),
            rhs=DataExpr({("r0", +1, k - 1): one})))
    for k in mesh.J_s:
        rows.append(EdgeRow(
            kind="terminal_v", label=(k,),
            terms=((ix[wave_key(+1, k, M2)], 1, +1),
                   (ix[wave_key(-1, k, M2)], 1, -1)),
            rhs=DataExpr({("v1", +1, k - 1): one})))
        rows.append(EdgeRow(
            kind="terminal_r", label=(k,),
            terms=((ix[wave_key(+1, k, M2)], 1, +1),
                   (ix[wave_key(-1, k, M2)], -1, -1)),
            rhs=DataExpr({("r1", +1, k - 1): one}, gammas={k: one})))
    kl, kr = 1 - mesh.N, mesh.N - 1
    for m in mesh.J_t[:-1]:
        rows.append(EdgeRow(
            kind="boundary_left", label=(m,),
            terms=((ix[wave_key(-1, kl, m + 2)], 1, +1),
                   (ix[wave_key(+1, kl, m)], -1, +1),
                   (ix[jump_key(-mesh.N, m)], -1, +1)),
            rhs=DataExpr(consts={("r0", -1): -one})))
        rows.append(EdgeRow(
            kind="boundary_right", label=(m,),
            terms=((ix[wave_key(+1, kr, m + 2)], 1, +1),
                   (ix[wave_key(-1, kr, m)], -1, +1),
                   (ix[jump_key(mesh.N, m)], -1, +1)),
            rhs=DataExpr(consts={("r0", +1): one})))
    for n in mesh.interior_interfaces():
        for m in mesh.J_t[:-1]:
            rows.append(EdgeRow(
                kind="inter_v", label=(n, m),
                terms=((ix[wave_key(+1, n - 1, m + 2)], 1, +1),
                       (ix[wave_key(-1, n - 1, m)], 1, +1),
                       (ix[wave_key(+1, n + 1, m)], -1, +1),
                       (ix[wave_key(-1, n + 1, m + 2)], -1, +1)),
                rhs=DataExpr()))
            rows.append(EdgeRow(
                kind="inter_r", label=(n, m),
                terms=((ix[wave_key(+1, n - 1, m + 2)], 1, +1),
                       (ix[wave_key(-1, n - 1, m)], -1, +1),
                       (ix[wave_key(+1, n + 1, m)], -1, +1),
                       (ix[wave_key(-1, n + 1, m + 2)], 1, +1),
                       (ix[jump_key(n, m)], -1, +1)),
                rhs=DataExpr()))

    sc = counts(mesh.N, mesh.M)
    if len(rows) != sc.N_e:
        raise AssemblyError(f"assembled {len(rows)} rows, expected {sc.N_e}")
    return EdgeSystem(mesh=mesh, catalog=cat, state=state, rows=tuple(rows))


def edge_residuals(system: EdgeSystem, entry_values: np.ndarray,
                   gamma: dict, p: int) -> np.ndarray:
    """Max-abs residual of every edge row given sampled entry values."""
    res = np.zeros(len(system.rows))
    for i, row in enumerate(system.rows):
        acc = np.zeros(p)
        for col, coef, orient in row.terms:
            vals = entry_values[col]
            acc += coef * (vals if orient == +1 else vals[::-1])
        acc -= row.rhs.evaluate(system.state, system.mesh, p, gamma=gamma)
        res[i] = np.max(np.abs(acc))
    return res


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    reason: Optional[str] = None


def feasibility_check(N: int, M: int) -> Feasibility:
    """M = 1 cannot steer arbitrary states: T = lambda is below the minimal
    controllability time, and the interelement rows then tie functions that
    are already fixed by the initial and terminal data."""
    if N < 1 or M < 1:
        raise InvalidArgumentError("N and M must be >= 1")
    if M == 1:
        return Feasibility(False, (
            "horizon T = lambda (M = 1) is shorter than the minimal "
            "controllability time; generic initial/terminal pairs admit "
            "no solution (variable surplus N_s = N*M + M - 2N <= 0 "
            "for N > 1)"))
    return Feasibility(True)


# ---------------------------------------------------------------------------
# Exact elimination to the affine parametrization
# ---------------------------------------------------------------------------


class Parametrization:
    """Affine map w(z) = A y(z) + C_gamma gamma + g(z) over all entries.

    ``gamma`` collects one free terminal-potential constant per segment
    (the terminal state fixes the potential only up to such constants).
    A is exact (assembled over rationals, stored both as Fractions and as
    floats); g is a per-entry :class:`DataExpr` evaluated lazily against
    the bound state profiles.
    """

    def __init__(self, mesh, catalog, state, free_map, a_rows, g_exprs):
        self.mesh = mesh
        self.catalog = catalog
        self.state = state
        self.free_map = tuple(free_map)       # y index -> catalog key
        self.free_index = {key: j for j, key in enumerate(self.free_map)}
        self.A_frac = a_rows                  # list of dict free_j -> Fraction
        self.g_exprs = tuple(g_exprs)
        self.gamma_map = tuple(mesh.J_s)      # gamma index -> segment k
        gamma_pos = {k: i for i, k in enumerate(self.gamma_map)}
        n_v, n_s = catalog.N_v, len(self.free_map)
        a_mat = np.zeros((n_v, n_s))
        c_mat = np.zeros((n_v, len(self.gamma_map)))
        for e, row in enumerate(a_rows):
            for j, c in row.items():
                a_mat[e, j] = float(c)
            for k, c in g_exprs[e].gammas.items():
                c_mat[e, gamma_pos[k]] = float(c)
        self.A = a_mat
        self.C_gamma = c_mat
        self._g_cache: dict = {}

    @property
    def n_free(self) -> int:
        return len(self.free_map)

    @property
    def n_gamma(self) -> int:
        return len(self.gamma_map)

    def gamma_dict(self, gamma: np.ndarray) -> dict:
        return {k: float(g) for k, g in zip(self.gamma_map, gamma)}

    def g_matrix(self, p: int) -> np.ndarray:
        """Data part g(z) for every entry, sampled on the p-point z-grid."""
        if p not in self._g_cache:
            g = np.empty((self.catalog.N_v, p))
            for e, expr in enumerate(self.g_exprs):
                g[e] = expr.evaluate(self.state, self.mesh, p, gamma=None)
            self._g_cache[p] = g
        return self._g_cache[p]

    def entry_values(self, y: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        """Sampled values of every catalog entry for free samples y (N_s, p)."""
        p = y.shape[1]
        gamma = np.asarray(gamma, dtype=float)
        return (self.A @ y + (self.C_gamma @ gamma)[:, None]
                + self.g_matrix(p))

    def wave_rows(self) -> slice:
        return slice(0, self.catalog.N_w)


def _pivot_priority(mesh: MeshConfig, catalog: UnknownCatalog) -> list:
    """Column order for pivot selection, mirroring the resolution scheme:
    boundary jumps, then first/last-layer interior jumps, then waves from
    the outermost segments inward, leaving central waves and middle-layer
    interior jumps free."""
    M2 = 2 * mesh.M
    order = []
    for m in mesh.J_t[:-1]:
        order.append(jump_key(-mesh.N, m))
        order.append(jump_key(mesh.N, m))
    for n in mesh.interior_interfaces():
        for m in dict.fromkeys((0, M2 - 2)):
            order.append(jump_key(n, m))
    mids = [m for m in mesh.J_t if m not in (0, M2)]
    for k in sorted(mesh.J_s, key=lambda k: (-abs(k), -k)):
        if k == 0:
            continue
        sides = (+1, -1) if k > 0 else (-1, +1)
        if abs(k) == 1 and mesh.N % 2 == 0:
            sides = (+1,) if k > 0 else (-1,)
        for side in sides:
            for m in mids:
                order.append(wave_key(side, k, m))
    # fallback tiers: central-adjacent waves, then middle interior jumps
    seen = set(order)
    for key in catalog.entries:
        if key not in seen and key[0] == "w" and key[3] not in (0, M2):
            order.append(key)
            seen.add(key)
    for key in catalog.entries:
        if key not in seen and key[0] == "u":
            order.append(key)
            seen.add(key)
    return [catalog.index[k] for k in order]


def eliminate(system: EdgeSystem, mesh: Optional[MeshConfig] = None) -> Parametrization:
    """Resolve the edge system exactly, returning the parametrization.

    Initial and terminal rows are solved in closed form first (half-sum /
    half-difference of the data, with the '-' waves reflected); the
    remaining rows couple unknowns at equal arguments only and are reduced
    by Gauss-Jordan elimination over rationals with a deterministic pivot
    order.
    """
    mesh = mesh or system.mesh
    if mesh.M == 1:
        raise InfeasibleError(feasibility_check(mesh.N, mesh.M).reason)
    cat = system.catalog
    M2 = 2 * mesh.M
    half = Fraction(1, 2)

    solved: dict = {}
    for k in mesh.J_s:
        solved[cat.index[wave_key(+1, k, 0)]] = DataExpr(
            {("v0", +1, k - 1): half, ("r0", +1, k - 1): half})
        solved[cat.index[wave_key(-1, k, 0)]] = DataExpr(
            {("v0", -1, k + 1): half, ("r0", -1, k + 1): -half})
        solved[cat.index[wave_key(+1, k, M2)]] = DataExpr(
            {("v1", +1, k - 1): half, ("r1", +1, k - 1): half},
            gammas={k: half})
        solved[cat.index[wave_key(-1, k, M2)]] = DataExpr(
            {("v1", -1, k + 1): half, ("r1", -1, k + 1): -half},
            gammas={k: -half})

    # Working rows: data-resolved entries substituted into the rhs.
    work = []
    for row in system.rows:
        if row.kind.startswith(("initial", "terminal")):
            continue
        lin: dict = {}
        rhs = row.rhs.copy()
        for col, coef, orient in row.terms:
            if orient != +1:
                raise AssemblyError("unexpected reflected unknown outside "
                                    "initial/terminal rows")
            if col in solved:
                rhs.add_scaled(solved[col], Fraction(-coef))
            else:
                lin[col] = lin.get(col, Fraction(0)) + coef
        work.append({"lin": lin, "rhs": rhs, "pivot": None})

    assigned = 0
    for col in _pivot_priority(mesh, cat):
        target = None
        for row in work:
            if row["pivot"] is None and row["lin"].get(col):
                target = row
                break
        if target is None:
            continue
        inv = Fraction(1) / target["lin"][col]
        if inv != 1:
            target["lin"] = {c: v * inv for c, v in target["lin"].items()}
            scaled = DataExpr()
            scaled.add_scaled(target["rhs"], inv)
            target["rhs"] = scaled
        target["pivot"] = col
        for row in work:
            if row is target:
                continue
            c = row["lin"].get(col)
            if not c:
                continue
            for cc, v in target["lin"].items():
                new = row["lin"].get(cc, Fraction(0)) - c * v
                if new == 0:
                    row["lin"].pop(cc, None)
                else:
                    row["lin"][cc] = new
            row["rhs"].add_scaled(target["rhs"], -c)
        assigned += 1

    if assigned != len(work):
        bad = [r for r in work if r["pivot"] is None]
        raise AssemblyError(
            f"{len(bad)} edge rows could not be pivoted; the coefficient "
            f"matrix is rank-deficient (assembly bug or infeasible mesh)")

    resolved_cols = set(solved) | {r["pivot"] for r in work}
    free_cols = [c for c in range(cat.N_v) if c not in resolved_cols]
    sc = counts(mesh.N, mesh.M)
    if len(free_cols) != sc.N_s:
        raise AssemblyError(
            f"elimination left {len(free_cols)} free functions, "
            f"expected N_s = {sc.N_s}")
    free_pos = {c: j for j, c in enumerate(free_cols)}

    a_rows = [dict() for _ in range(cat.N_v)]
    g_exprs = [DataExpr() for _ in range(cat.N_v)]
    for col, expr in solved.items():
        g_exprs[col] = expr
    for j, col in enumerate(free_cols):
        a_rows[col] = {j: Fraction(1)}
    for row in work:
        col = row["pivot"]
        # pivot entry = rhs - sum(lin over free columns)
        coeffs = {}
        for cc, v in row["lin"].items():
            if cc == col:
                continue
            if cc not in free_pos:
                raise AssemblyError("non-free column survived elimination")
            coeffs[free_pos[cc]] = -v
        a_rows[col] = coeffs
        g_exprs[col] = row["rhs"]

    free_map = [cat.entries[c] for c in free_cols]
    return Parametrization(mesh, cat, system.state, free_map, a_rows, g_exprs)


# ---------------------------------------------------------------------------
# Vertex conditions and essential boundary matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VertexRow:
    """Continuity condition at a mesh vertex: sum coef*entry(at) = 0.

    ``at`` is 0 for the piece value at z = 0 and 1 for the value at
    z = lambda.
    """

    label: tuple
    terms: tuple  # ((key, at, coef), ...)


def assemble_vertex_conditions(mesh: MeshConfig) -> tuple:
    """Vertex continuity rows; count follows the parity-dependent formula.

    Odd N: junctions of the interior jump pieces plus all junctions of the
    central-segment waves (including the tie to the terminal data pieces).
    Even N: junctions of the interior jump pieces, the zero anchor of the
    central jump, and the interior junctions of the two central-adjacent
    free wave families.
    """
    M2 = 2 * mesh.M
    rows = []
    interior = mesh.interior_interfaces()
    for n in interior:
        for m in range(2, M2 - 1, 2):
            rows.append(VertexRow(
                label=("u", n, m),
                terms=((jump_key(n, m), 0, 1), (jump_key(n, m - 2), 1, -1))))
    if mesh.N % 2 == 1:
        for side in (+1, -1):
            for m in range(2, M2 + 1, 2):
                rows.append(VertexRow(
                    label=("w", side, 0, m),
                    terms=((wave_key(side, 0, m), 0, 1),
                           (wave_key(side, 0, m - 2), 1, -1))))
    else:
        rows.append(VertexRow(label=("u0",), terms=((jump_key(0, 0), 0, 1),)))
        for side, k in ((+1, -1), (-1, +1)):
            for m in range(2, M2 - 1, 2):
                rows.append(VertexRow(
                    label=("w", side, k, m),
                    terms=((wave_key(side, k, m), 0, 1),
                           (wave_key(side, k, m - 2), 1, -1))))
    expected = counts(mesh.N, mesh.M).N_b
    if len(rows) != expected:
        raise AssemblyError(f"assembled {len(rows)} vertex rows, expected {expected}")
    return tuple(rows)


def guard_rows(mesh: MeshConfig) -> tuple:
    """Exhaustive stitching conditions: every junction of every assembled
    wave, every jump junction, and the zero start of every jump.

    These are appended behind the vertex rows before dependence removal;
    when the vertex set is already sufficient they are all dropped as
    dependent, and otherwise they repair the gap (reported).
    """
    M2 = 2 * mesh.M
    rows = []
    for k in mesh.J_s:
        for side in (+1, -1):
            for m in range(2, M2 + 1, 2):
                rows.append(VertexRow(
                    label=("guard_w", side, k, m),
                    terms=((wave_key(side, k, m), 0, 1),
                           (wave_key(side, k, m - 2), 1, -1))))
    for n in mesh.J_x:
        rows.append(VertexRow(label=("guard_u0", n),
                              terms=((jump_key(n, 0), 0, 1),)))
        for m in range(2, M2 - 1, 2):
            rows.append(VertexRow(
                label=("guard_u", n, m),
                terms=((jump_key(n, m), 0, 1), (jump_key(n, m - 2), 1, -1))))
    return tuple(rows)


@dataclass(frozen=True)
class EssentialBC:
    """Boundary condition B1 y(lambda) - B0 y(0) = B_gamma gamma + b0 on
    the free functions, reduced to independent rows.  ``B_gamma`` carries
    the coefficients of the per-segment free terminal constants."""

    B0: np.ndarray
    B1: np.ndarray
    b0: np.ndarray
    B_gamma: np.ndarray
    rank: int
    n_vertex_rows: int
    n_assembled: int
    guard_rows_kept: int
    inconsistent_rows: tuple

    @property
    def n_rows(self) -> int:
        return len(self.b0)

    @property
    def n_gamma(self) -> int:
        return self.B_gamma.shape[1]


def boundary_matrices(par: Parametrization, vertex_rows,
                      include_guards: bool = True) -> EssentialBC:
    """Rewrite vertex conditions through the parametrization and drop
    linearly dependent rows by a rank-revealing sweep (threshold
    1e-12 * largest row norm).  Guard rows are appended after the given
    vertex rows and kept only if they add rank."""
    mesh, cat = par.mesh, par.catalog
    p = par.state.grid_p(mesh)
    g = par.g_matrix(p)
    n_s = par.n_free
    n_g = par.n_gamma

    all_rows = list(vertex_rows)
    n_vertex = len(all_rows)
    if include_guards:
        all_rows.extend(guard_rows(mesh))

    raw = []
    for vrow in all_rows:
        b1r = np.zeros(n_s)
        b0r = np.zeros(n_s)
        gr = np.zeros(n_g)
        data = 0.0
        for key, at, coef in vrow.terms:
            e = cat.index[key]
            if at == 1:
                b1r += coef * par.A[e]
            else:
                b0r -= coef * par.A[e]
            gr -= coef * par.C_gamma[e]
            data += coef * g[e, -1 if at == 1 else 0]
        # sum coef*entry(at) = 0  <=>  B1 y(lam) - B0 y(0) = B_gamma gamma + b0
        raw.append((b1r, b0r, gr, -data))

    norms = [np.linalg.norm(np.concatenate([r[0], -r[1], -r[2]])) for r in raw]
    tol = 1e-12 * max(max(norms), 1.0)

    basis: list = []          # orthonormal rows over (B1, -B0, -B_gamma)
    kept: list = []
    inconsistent = []
    kept_b0: list = []
    guard_kept = 0
    for i, (b1r, b0r, gr, b0c) in enumerate(raw):
        v = np.concatenate([b1r, -b0r, -gr])
        w = v.copy()
        for q in basis:
            w -= (q @ w) * q
        for q in basis:
            w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol:
            basis.append(w / nrm)
            kept.append(i)
            kept_b0.append(b0c)
            if i >= n_vertex:
                guard_kept += 1
        else:
            # dependent in the homogeneous part; check the data part agrees
            if kept:
                mat = np.array([np.concatenate([raw[j][0], -raw[j][1], -raw[j][2]])
                                for j in kept]).T
                coef, *_ = np.linalg.lstsq(mat, v, rcond=None)
                predicted = float(np.array(kept_b0) @ coef)
                scale = max(1.0, abs(b0c), float(np.max(np.abs(kept_b0))) if kept_b0 else 1.0)
                if abs(predicted - b0c) > 1e-8 * scale:
                    inconsistent.append(i)
            elif abs(b0c) > 1e-10:
                inconsistent.append(i)

    return EssentialBC(
        B0=np.array([raw[i][1] for i in kept]).reshape(len(kept), n_s),
        B1=np.array([raw[i][0] for i in kept]).reshape(len(kept), n_s),
        B_gamma=np.array([raw[i][2] for i in kept]).reshape(len(kept), n_g),
        b0=np.array([raw[i][3] for i in kept]),
        rank=len(kept),
        n_vertex_rows=n_vertex,
        n_assembled=len(all_rows),
        guard_rows_kept=guard_kept,
        inconsistent_rows=tuple(inconsistent),
    )

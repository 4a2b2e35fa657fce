"""Deformation theory of a flat connection over a one-point base.

Over a point an algebroid is a Lie algebra g with structure constants
c[i, j, k] (the coefficient of e_k in [e_i, e_j]) and a flat connection on
V = K^m is a representation rho. The deformation complex is
Lambda^k g^* (x) End(V) with

    (D w)(I) = sum_s (-1)^s [rho_{i_s}, w(I - i_s)]
             + sum_{s<t} (-1)^{s+t} sum_l c[i_s, i_t, l] w(l, I - i_s - i_t).

Cochains are numpy arrays of shape (C(r, k) * m * m,), ordered by
lexicographic k-tuple, then row-major matrix entry. The frame of g is
declared orthonormal and End(V) carries the Frobenius inner product, so the
adjoint of D is its conjugate transpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import least_squares

from .algebroid import AlgebroidSpec, ValidationReport, algebroid_from_json, algebroid_to_json, validate_algebroid
from .exactpoly import DimensionError

# bound for ||[b, g]|| <= BRACKET_BOUND * ||b|| * ||g|| on 1-cochains (Frobenius norms)
BRACKET_BOUND = 2.0


class FlatnessError(ValueError):
    """The representation does not satisfy rho([x, y]) = [rho(x), rho(y)]."""


class ConvergenceError(RuntimeError):
    """Fixed-point inversion of the Kuranishi map did not converge."""


# ------------------------------------------------------------------ reps


def _parse_scalar(x):
    if isinstance(x, (list, tuple)):
        re_, im_ = x
        return complex(float(Fraction(str(re_))), float(Fraction(str(im_))))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return complex(x.replace("i", "j"))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return x


@dataclass(frozen=True, eq=False)
class RepSpec:
    algebra: AlgebroidSpec
    rho: tuple
    scalar_field: str = "real"
    rho_exact: tuple | None = None

    def __post_init__(self):
        if self.algebra.num_vars != 0:
            raise DimensionError("representations need a Lie algebra (num_vars = 0)")
        if self.scalar_field not in ("real", "complex"):
            raise ValueError("scalar_field must be 'real' or 'complex'")
        r = self.algebra.rank
        if len(self.rho) != r:
            raise DimensionError(f"need {r} matrices, got {len(self.rho)}")
        mats = tuple(np.asarray(R, dtype=self.dtype) for R in self.rho)
        m = mats[0].shape[0]
        if m < 1 or any(R.shape != (m, m) for R in mats):
            raise DimensionError("rho must be square matrices of a common size m >= 1")
        object.__setattr__(self, "rho", mats)

    @property
    def dtype(self):
        return complex if self.scalar_field == "complex" else float

    @property
    def rank(self) -> int:
        return self.algebra.rank

    @property
    def dim_V(self) -> int:
        return self.rho[0].shape[0]

    def structure_constants(self) -> np.ndarray:
        r = self.rank
        c = np.zeros((r, r, r))
        for i in range(r):
            for j in range(r):
                for k, p in enumerate(self.algebra.structure(i, j)):
                    c[i, j, k] = float(p.constant_term())
        return c


def make_rep(algebra: AlgebroidSpec, rho: Sequence, scalar_field: str = "real") -> RepSpec:
    """Build a rep from nested lists of numbers or rational strings."""
    parsed = [[[_parse_scalar(x) for x in row] for row in R] for R in rho]
    exact = None
    if all(isinstance(x, Fraction) for R in parsed for row in R for x in row):
        exact = tuple(tuple(tuple(row) for row in R) for R in parsed)
        numeric = [[[float(x) for x in row] for row in R] for R in parsed]
    else:
        numeric = [[[complex(x) if isinstance(x, complex) else float(x) for x in row] for row in R] for R in parsed]
        if scalar_field == "real" and any(isinstance(x, complex) for R in numeric for row in R for x in row):
            raise ValueError("complex entries need scalar_field 'complex'")
    return RepSpec(algebra, tuple(numeric), scalar_field, exact)


def conjugate_rep(rep: RepSpec, g: np.ndarray) -> RepSpec:
    """The gauge-equivalent rep g rho g^{-1}."""
    ginv = np.linalg.inv(g)
    dtype = complex if np.iscomplexobj(g) or rep.scalar_field == "complex" else float
    field_ = "complex" if dtype is complex else "real"
    return RepSpec(rep.algebra, tuple(g @ R @ ginv for R in rep.rho), field_)


def rep_from_json(doc: Mapping, max_poly_degree: int | None = None) -> RepSpec:
    algebra = algebroid_from_json(doc["lie_algebra"], max_poly_degree)
    rep = make_rep(algebra, doc["rho"], doc.get("scalar_field", "real"))
    if "dim_V" in doc and int(doc["dim_V"]) != rep.dim_V:
        raise DimensionError(f"dim_V = {doc['dim_V']} but rho matrices are {rep.dim_V}x{rep.dim_V}")
    return rep


def _fmt_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex) or np.iscomplexobj(x):
        return [repr(float(np.real(x))), repr(float(np.imag(x)))]
    return repr(float(x))


def rep_to_json(rep: RepSpec) -> dict:
    mats = rep.rho_exact if rep.rho_exact is not None else rep.rho
    return {
        "lie_algebra": algebroid_to_json(rep.algebra),
        "dim_V": rep.dim_V,
        "scalar_field": rep.scalar_field,
        "rho": [[[_fmt_scalar(x) for x in row] for row in R] for R in mats],
    }


@dataclass
class RepValidation:
    residuals: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)
    exact: bool = False
    tol_flat: float = 1e-12
    algebra: ValidationReport | None = None

    @property
    def valid(self) -> bool:
        algebra_ok = self.algebra is None or self.algebra.valid
        if self.exact:
            return algebra_ok and all(v == 0 for v in self.norms.values())
        return algebra_ok and all(v <= self.tol_flat for v in self.norms.values())

    @property
    def failures(self) -> dict:
        if self.exact:
            return {k: self.residuals[k] for k, v in self.norms.items() if v != 0}
        return {k: self.residuals[k] for k, v in self.norms.items() if v > self.tol_flat}


def _frac_matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]


def validate_rep(rep: RepSpec, tol_flat: float = 1e-12) -> RepValidation:
    """Per-pair residuals [rho_i, rho_j] - rho([e_i, e_j]); exact for rational input."""
    r = rep.rank
    out = RepValidation(tol_flat=tol_flat, algebra=validate_algebroid(rep.algebra))
    if rep.rho_exact is not None:
        out.exact = True
        R = rep.rho_exact
        m = rep.dim_V
        for i, j in combinations(range(r), 2):
            AB, BA = _frac_matmul(R[i], R[j]), _frac_matmul(R[j], R[i])
            c = [p.constant_term() for p in rep.algebra.structure(i, j)]
            res = [
                [AB[a][b] - BA[a][b] - sum((c[k] * R[k][a][b] for k in range(r)), Fraction(0)) for b in range(m)]
                for a in range(m)
            ]
            out.residuals[(i, j)] = res
            out.norms[(i, j)] = max(abs(x) for row in res for x in row)
        return out
    c = rep.structure_constants()
    for i, j in combinations(range(r), 2):
        image = sum(c[i, j, k] * rep.rho[k] for k in range(r))
        res = rep.rho[i] @ rep.rho[j] - rep.rho[j] @ rep.rho[i] - image
        out.residuals[(i, j)] = res
        out.norms[(i, j)] = float(np.linalg.norm(res))
    return out


# ---------------------------------------------------------------- cochains


@dataclass(frozen=True)
class CochainSpace:
    rank: int
    dim_V: int

    def tuples(self, k: int) -> list:
        if k < 0 or k > self.rank:
            return []
        return list(combinations(range(self.rank), k))

    def dim(self, k: int) -> int:
        if k < 0 or k > self.rank:
            return 0
        return math.comb(self.rank, k) * self.dim_V**2

    def unflatten(self, k: int, x: np.ndarray) -> np.ndarray:
        return np.asarray(x).reshape(len(self.tuples(k)), self.dim_V, self.dim_V)


def _signed_lookup(index: dict, idx: tuple):
    if len(set(idx)) != len(idx):
        return 0, None
    order = sorted(range(len(idx)), key=lambda u: idx[u])
    # parity of the sorting permutation
    sign, seen = 1, [False] * len(idx)
    for start in range(len(idx)):
        if seen[start]:
            continue
        length, u = 0, start
        while not seen[u]:
            seen[u] = True
            u = order[u]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign, index[tuple(sorted(idx))]


def _apply_d(rho, c, space: CochainSpace, k: int, w: np.ndarray) -> np.ndarray:
    src = space.tuples(k)
    src_index = {I: a for a, I in enumerate(src)}
    tgt = space.tuples(k + 1)
    m = space.dim_V
    out = np.zeros((len(tgt), m, m), dtype=w.dtype if np.iscomplexobj(w) else np.result_type(w, rho[0]))
    for a, I in enumerate(tgt):
        acc = out[a]
        for s, i in enumerate(I):
            b = src_index[I[:s] + I[s + 1 :]]
            term = rho[i] @ w[b] - w[b] @ rho[i]
            acc += -term if s % 2 else term
        for s, t in combinations(range(k + 1), 2):
            rest = tuple(x for u, x in enumerate(I) if u not in (s, t))
            sgn = -1 if (s + t) % 2 else 1
            for l in range(space.rank):
                coeff = c[I[s], I[t], l]
                if coeff == 0:
                    continue
                sign, b = _signed_lookup(src_index, (l,) + rest)
                if sign:
                    acc += sgn * sign * coeff * w[b]
    return out


@dataclass
class DeformationComplex:
    rep: RepSpec
    space: CochainSpace
    differentials: list  # D_k : C^k -> C^{k+1}, k = 0..r-1

    @property
    def cochain_dims(self) -> list:
        return [self.space.dim(k) for k in range(self.space.rank + 1)]

    def D(self, k: int) -> np.ndarray:
        """D_k, with zero maps outside 0..r-1."""
        if 0 <= k < self.space.rank:
            return self.differentials[k]
        return np.zeros((self.space.dim(k + 1), self.space.dim(k)), dtype=self.rep.dtype)

    def bracket(self, p: int, a: np.ndarray, q: int, b: np.ndarray) -> np.ndarray:
        """Graded bracket of End(V)-valued cochains (shuffle convention)."""
        sp = self.space
        m = sp.dim_V
        A, B = sp.unflatten(p, a), sp.unflatten(q, b)
        tgt = sp.tuples(p + q)
        index = {I: u for u, I in enumerate(tgt)}
        out = np.zeros((len(tgt), m, m), dtype=np.result_type(A, B))
        for ja, J in enumerate(sp.tuples(p)):
            for kb, K in enumerate(sp.tuples(q)):
                if set(J) & set(K):
                    continue
                sign, u = _signed_lookup(index, J + K)
                out[u] += sign * (A[ja] @ B[kb] - B[kb] @ A[ja])
        return out.reshape(-1)


def build_complex(rep: RepSpec, tol_flat: float = 1e-12) -> DeformationComplex:
    check = validate_rep(rep, tol_flat)
    if not check.valid:
        raise FlatnessError(f"representation is not flat on pairs {sorted(check.failures)}")
    space = CochainSpace(rep.rank, rep.dim_V)
    c = rep.structure_constants()
    Ds = []
    for k in range(rep.rank):
        n_src = space.dim(k)
        M = np.zeros((space.dim(k + 1), n_src), dtype=rep.dtype)
        for col in range(n_src):
            e = np.zeros(n_src, dtype=rep.dtype)
            e[col] = 1
            M[:, col] = _apply_d(rep.rho, c, space, k, space.unflatten(k, e)).reshape(-1)
        Ds.append(M)
    return DeformationComplex(rep, space, Ds)


# ------------------------------------------------------------------- Hodge


def _adjoint(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def _orthonormal_range(P: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the range of a projector, aligned with the standard
    basis where possible (column pivoting)."""
    if dim == 0:
        return np.zeros((P.shape[0], 0), dtype=P.dtype)
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    return Q[:, :dim]


@dataclass
class HodgeData:
    complex: DeformationComplex
    adjoints: list  # delta_k = D_k^H : C^{k+1} -> C^k
    laplacians: list
    harmonic_projectors: list
    green_operators: list
    harmonic_bases: list
    rank_tolerance: float

    @property
    def dims(self) -> list:
        return [B.shape[1] for B in self.harmonic_bases]

    def delta(self, k: int) -> np.ndarray:
        """delta_k : C^{k+1} -> C^k."""
        return _adjoint(self.complex.D(k))


def hodge(cx: DeformationComplex, rank_tolerance: float = 1e-9) -> HodgeData:
    r = cx.space.rank
    adjoints, laps, Hs, Gs, bases = [], [], [], [], []
    for k in range(r + 1):
        Dk, Dkm = cx.D(k), cx.D(k - 1)
        lap = _adjoint(Dk) @ Dk + Dkm @ _adjoint(Dkm)
        lap = 0.5 * (lap + _adjoint(lap))
        w, V = np.linalg.eigh(lap)
        top = max(float(w.max()) if w.size else 0.0, 0.0)
        harmonic = w <= rank_tolerance * top if top > 0 else np.ones(w.shape, dtype=bool)
        Vh, Vn = V[:, harmonic], V[:, ~harmonic]
        H = Vh @ _adjoint(Vh)
        G = (Vn / w[~harmonic]) @ _adjoint(Vn)
        adjoints.append(_adjoint(Dk))
        laps.append(lap)
        Hs.append(H)
        Gs.append(G)
        bases.append(_orthonormal_range(H, int(harmonic.sum())))
    return HodgeData(cx, adjoints[:r], laps, Hs, Gs, bases, rank_tolerance)


def cohomology_dims(rep: RepSpec, rank_tolerance: float = 1e-9) -> list:
    return hodge(build_complex(rep), rank_tolerance).dims


def index(rep: RepSpec, rank_tolerance: float = 1e-9) -> int:
    return sum((-1) ** k * d for k, d in enumerate(cohomology_dims(rep, rank_tolerance)))


def euler_characteristic(rank: int, dim_V: int) -> int:
    return sum((-1) ** k * math.comb(rank, k) * dim_V**2 for k in range(rank + 1))


def numerical_rank(M: np.ndarray, rank_tolerance: float = 1e-9) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int((s > rank_tolerance * s[0]).sum())


@dataclass
class IrreducibilityResult:
    irreducible: bool
    commutant_dim: int


def irreducibility_test(rep: RepSpec, rank_tolerance: float = 1e-9) -> IrreducibilityResult:
    """Commutant of rho = ker D_0; irreducible iff it is the scalars."""
    D0 = build_complex(rep).D(0)
    dim = D0.shape[1] - numerical_rank(D0, rank_tolerance)
    return IrreducibilityResult(dim == 1, dim)


# --------------------------------------------------------------- Kuranishi


def mc_residual(cx, beta: np.ndarray) -> np.ndarray:
    """D_1 beta + 1/2 [beta, beta] in C^2."""
    if isinstance(cx, RepSpec):
        cx = build_complex(cx)
    beta = np.asarray(beta)
    return cx.D(1) @ beta + 0.5 * cx.bracket(1, beta, 1, beta)


@dataclass
class KuranishiModel:
    rep: RepSpec
    complex: DeformationComplex
    hodge: HodgeData
    radius: float
    max_iter: int = 200
    tol_fix: float = 1e-12

    @property
    def h1_basis(self) -> np.ndarray:
        return self.hodge.harmonic_bases[1]

    @property
    def h2_basis(self) -> np.ndarray:
        if self.rep.rank >= 2:
            return self.hodge.harmonic_bases[2]
        return np.zeros((0, 0), dtype=self.rep.dtype)

    @property
    def correction(self) -> np.ndarray:
        """delta_1 G_2 : C^2 -> C^1."""
        if self.rep.rank < 2:
            return np.zeros((self.complex.space.dim(1), 0), dtype=self.rep.dtype)
        return self.hodge.delta(1) @ self.hodge.green_operators[2]

    def bracket11(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.complex.bracket(1, a, 1, b)

    def H2(self, x: np.ndarray) -> np.ndarray:
        if self.rep.rank < 2:
            return np.zeros(0, dtype=self.rep.dtype)
        return self.hodge.harmonic_projectors[2] @ x


def build_model(
    rep: RepSpec,
    radius: float | None = None,
    max_iter: int = 200,
    tol_fix: float = 1e-12,
    rank_tolerance: float = 1e-9,
) -> KuranishiModel:
    cx = build_complex(rep)
    hd = hodge(cx, rank_tolerance)
    model = KuranishiModel(rep, cx, hd, math.inf, max_iter, tol_fix)
    if radius is None:
        p = float(np.linalg.norm(model.correction, 2)) if model.correction.size else 0.0
        radius = math.inf if p == 0 else 1.0 / (4.0 * p * BRACKET_BOUND)
    model.radius = radius
    return model


def kuranishi_map(model: KuranishiModel, beta: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta)
    if model.rep.rank < 2:
        return beta.copy()
    return beta + 0.5 * model.correction @ model.bracket11(beta, beta)


def kuranishi_tangent(model: KuranishiModel, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Derivative of the Kuranishi map at beta in direction gamma."""
    if model.rep.rank < 2:
        return np.asarray(gamma).copy()
    return gamma + model.correction @ model.bracket11(beta, gamma)


@dataclass
class InversionResult:
    beta: np.ndarray
    iterations: int


def kuranishi_invert(model: KuranishiModel, gamma: np.ndarray, return_info: bool = False):
    """Solve K(beta) = gamma by the fixed-point iteration beta <- gamma - 1/2 P[beta, beta]."""
    gamma = np.asarray(gamma)
    if model.rep.rank < 2:
        return InversionResult(gamma.copy(), 0) if return_info else gamma.copy()
    P = model.correction
    scale = 1.0 + float(np.linalg.norm(gamma))
    beta = np.zeros_like(gamma)
    for it in range(1, model.max_iter + 1):
        new = gamma - 0.5 * P @ model.bracket11(beta, beta)
        step = float(np.linalg.norm(new - beta))
        beta = new
        if not np.all(np.isfinite(beta)) or np.linalg.norm(beta) > 1e6 * scale:
            raise ConvergenceError(
                f"fixed-point iteration diverged after {it} steps (|gamma| = {np.linalg.norm(gamma):.3g}, radius = {model.radius:.3g})"
            )
        if step <= model.tol_fix:
            return InversionResult(beta, it) if return_info else beta
    raise ConvergenceError(
        f"no convergence in {model.max_iter} steps (|gamma| = {np.linalg.norm(gamma):.3g}, radius = {model.radius:.3g})"
    )


def _check_harmonic(model: KuranishiModel, gamma: np.ndarray, tol: float = 1e-8) -> None:
    H1 = model.hodge.harmonic_projectors[1]
    off = float(np.linalg.norm(gamma - H1 @ gamma))
    if off > tol * max(1.0, float(np.linalg.norm(gamma))):
        raise ValueError(f"gamma is not harmonic (distance {off:.3g} from H^1)")


def obstruction(model: KuranishiModel, gamma: np.ndarray) -> np.ndarray:
    """Phi(gamma) = 1/2 H_2 [F(gamma), F(gamma)], a vector in C^2 lying in H^2."""
    gamma = np.asarray(gamma)
    _check_harmonic(model, gamma)
    if model.rep.rank < 2:
        return np.zeros(0, dtype=model.rep.dtype)
    beta = kuranishi_invert(model, gamma)
    return 0.5 * model.H2(model.bracket11(beta, beta))


def obstruction_coords(model: KuranishiModel, coords: np.ndarray) -> np.ndarray:
    """Phi in harmonic coordinates: H^1 coords -> H^2 coords."""
    gamma = model.h1_basis @ np.asarray(coords)
    phi = obstruction(model, gamma)
    return _adjoint(model.h2_basis) @ phi if phi.size else phi


def quadratic_form(model: KuranishiModel) -> np.ndarray:
    """Q[a, b, c] = <k_c, 1/2 H_2 [h_a, h_b]> on the harmonic bases."""
    h1, h2 = model.h1_basis, model.h2_basis
    d1, d2 = h1.shape[1], h2.shape[1] if h2.size else 0
    Q = np.zeros((d1, d1, d2), dtype=model.rep.dtype)
    if d2 == 0:
        return Q
    for a in range(d1):
        for b in range(d1):
            Q[a, b] = _adjoint(h2) @ (0.5 * model.H2(model.bracket11(h1[:, a], h1[:, b])))
    return Q


# ---------------------------------------------------------- brute force MC


def _realify(x: np.ndarray, cplx: bool) -> np.ndarray:
    return np.concatenate([x.real, x.imag]) if cplx else np.real(x)


def mc_slice_solve_bruteforce(
    rep: RepSpec,
    seeds: int = 20,
    tol: float = 1e-9,
    seed: int = 0,
    seed_radius: float = 0.1,
) -> list:
    """Solutions of {D_1 b + 1/2 [b, b] = 0, delta_0 b = 0} from random small seeds.

    Damped least-squares root finding on the raw polynomial system, with no
    use of Hodge data or the Kuranishi map. Non-convergent seeds are dropped.
    """
    cx = build_complex(rep)
    D0, D1 = cx.D(0), cx.D(1)
    delta0 = _adjoint(D0)
    n1 = cx.space.dim(1)
    cplx = rep.scalar_field == "complex"

    def unpack(x):
        return x[:n1] + 1j * x[n1:] if cplx else x

    def residual(x):
        b = unpack(x)
        mc = D1 @ b + 0.5 * cx.bracket(1, b, 1, b)
        return np.concatenate([_realify(mc, cplx), _realify(delta0 @ b, cplx)])

    rng = np.random.default_rng(seed)
    n_params = 2 * n1 if cplx else n1
    found = []
    for _ in range(seeds):
        x0 = rng.standard_normal(n_params)
        x0 *= seed_radius * rng.uniform(0.05, 1.0) / max(np.linalg.norm(x0), 1e-300)
        n_res = residual(x0).size
        method = "lm" if n_res >= n_params else "trf"
        sol = least_squares(residual, x0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        b = unpack(sol.x)
        mc = D1 @ b + 0.5 * cx.bracket(1, b, 1, b)
        if np.linalg.norm(mc) <= tol and np.linalg.norm(delta0 @ b) <= tol:
            found.append(b)
    return found


# ------------------------------------------------------------------ report


@dataclass
class ModuliReport:
    h_dims: list
    index: int
    irreducible: bool
    commutant_dim: int
    smooth: bool
    expected_local_dim: int | None
    quadratic_form: np.ndarray
    obstruction_vanishes: bool
    radius: float
    sample_radius: float
    n_samples: int
    zero_fraction: float | None = None
    max_obstruction_norm: float | None = None
    solver_failures: int = 0
    max_iterations: int = 0
    notes: list = field(default_factory=list)


def _sample_harmonic(rng: np.random.Generator, d: int, radius: float, cplx: bool) -> np.ndarray:
    """Random point of the ball in harmonic coordinates.

    A random number of coordinates is active, so that lower-dimensional
    coordinate strata of the zero set are visited with positive probability.
    """
    coords = np.zeros(d, dtype=complex if cplx else float)
    if d == 0:
        return coords
    k = int(rng.integers(1, d + 1))
    active = rng.choice(d, size=k, replace=False)
    vals = rng.standard_normal(k) + (1j * rng.standard_normal(k) if cplx else 0)
    vals = vals / np.linalg.norm(vals) * radius * rng.uniform() ** (1.0 / k)
    coords[active] = vals
    return coords


def local_model_report(
    model: KuranishiModel,
    n_samples: int = 200,
    radius: float | None = None,
    seed: int = 0,
    tol: float = 1e-10,
) -> ModuliReport:
    h_dims = model.hodge.dims
    irr = irreducibility_test(model.rep, model.hodge.rank_tolerance)
    d1 = h_dims[1]
    d2 = h_dims[2] if len(h_dims) > 2 else 0
    smooth = d2 == 0
    if radius is None:
        radius = min(model.radius / 2, 1.0)
    Q = quadratic_form(model)
    report = ModuliReport(
        h_dims=h_dims,
        index=sum((-1) ** k * d for k, d in enumerate(h_dims)),
        irreducible=irr.irreducible,
        commutant_dim=irr.commutant_dim,
        smooth=smooth,
        expected_local_dim=d1 if smooth else None,
        quadratic_form=Q,
        obstruction_vanishes=False,
        radius=model.radius,
        sample_radius=radius,
        n_samples=n_samples,
    )
    if not irr.irreducible:
        report.notes.append(
            "reducible connection: the gauge action is not free, the local chart describes the slice only"
        )
    rng = np.random.default_rng(seed)
    cplx = model.rep.scalar_field == "complex"
    zeros, norms = 0, []
    for _ in range(n_samples):
        gamma = model.h1_basis @ _sample_harmonic(rng, d1, radius, cplx)
        try:
            info = kuranishi_invert(model, gamma, return_info=True)
        except ConvergenceError:
            report.solver_failures += 1
            continue
        report.max_iterations = max(report.max_iterations, info.iterations)
        phi = 0.5 * model.H2(model.bracket11(info.beta, info.beta)) if d2 else np.zeros(0)
        nrm = float(np.linalg.norm(phi))
        norms.append(nrm)
        zeros += nrm <= tol
    evaluated = n_samples - report.solver_failures
    if evaluated > 0:
        report.zero_fraction = zeros / evaluated
        report.max_obstruction_norm = max(norms)
    q_zero = bool(np.all(np.abs(Q) <= tol))
    report.obstruction_vanishes = q_zero and (evaluated == 0 or zeros == evaluated)
    return report


# ------------------------------------------------------------ gauge orbits


@dataclass
class GaugeOrbitCheck:
    derivative_residual: float
    decomposition_residual: float


def c1_decomposition(cx: DeformationComplex, x: np.ndarray):
    """Split x in C^1 as D_0 u + v with delta_0 v = 0. Returns (u, v, residual)."""
    D0 = cx.D(0)
    u = np.linalg.pinv(D0, rcond=1e-12) @ x
    v = x - D0 @ u
    residual = max(float(np.linalg.norm(x - D0 @ u - v)), float(np.linalg.norm(_adjoint(D0) @ v)))
    return u, v, residual


def gauge_orbit_check(rep: RepSpec, gamma: np.ndarray, t: float, x: np.ndarray | None = None, seed: int = 0) -> GaugeOrbitCheck:
    """Compare the curve rho^{phi(t)}, phi(t) = id + t gamma, with D_0 gamma.

    Over a point the gauge action on connection forms is conjugation,
    alpha^phi(e_i) = phi^{-1} rho_i phi.
    """
    cx = build_complex(rep)
    m = rep.dim_V
    gamma = np.asarray(gamma).reshape(m, m)
    phi = np.eye(m) + t * gamma
    if np.linalg.cond(phi) > 1e12:
        raise ValueError("id + t*gamma is singular")
    phi_inv = np.linalg.inv(phi)
    moved = np.stack([phi_inv @ R @ phi - R for R in rep.rho]).reshape(-1) / t
    deriv = cx.D(0) @ gamma.reshape(-1)
    if x is None:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(cx.space.dim(1))
        if rep.scalar_field == "complex":
            x = x + 1j * rng.standard_normal(cx.space.dim(1))
    _, _, dec = c1_decomposition(cx, x)
    return GaugeOrbitCheck(float(np.linalg.norm(moved - deriv)), dec)

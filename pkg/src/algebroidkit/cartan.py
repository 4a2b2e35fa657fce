"""Graded calculus of matrix-valued L-forms with polynomial coefficients.

A k-form is stored on strictly increasing k-tuples of frame indices; its
value on any other tuple follows from antisymmetry. Values are matrices of
polynomials: 1x1 for scalar forms, m x 1 for E-valued forms and m x m for
End(E)-valued forms. Wedge products use the shuffle convention, so
e^0* ^ e^1* has component 1 on (0, 1).

The reference connection on the trivial bundle is the canonical flat one,
nabla0_xi s = a(xi) s applied entrywise, so d_L on matrix-valued forms is
d^{nabla0}. A connection is nabla0 + alpha with alpha an End(E)-valued 1-form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .algebroid import AlgebroidSpec, SectionExpr, anchor_of, apply_vector_field, section_bracket
from .exactpoly import DimensionError, Polynomial, poly_format, random_poly

Matrix = tuple  # tuple of row tuples of Polynomial


# ----------------------------------------------------------- matrix helpers


def mat_zero(n: int, rows: int, cols: int) -> Matrix:
    z = Polynomial.zero(n)
    return tuple((z,) * cols for _ in range(rows))


def mat_identity(n: int, m: int) -> Matrix:
    one, z = Polynomial.constant(n, 1), Polynomial.zero(n)
    return tuple(tuple(one if i == j else z for j in range(m)) for i in range(m))


def mat_shape(A: Matrix) -> tuple:
    return (len(A), len(A[0]) if A else 0)


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_neg(A: Matrix) -> Matrix:
    return tuple(tuple(-a for a in row) for row in A)


def mat_scale(A: Matrix, f) -> Matrix:
    return tuple(tuple(f * a for a in row) for row in A)


def mat_map(A: Matrix, fn: Callable[[Polynomial], Polynomial]) -> Matrix:
    return tuple(tuple(fn(a) for a in row) for row in A)


def mat_is_zero(A: Matrix) -> bool:
    return not any(a for row in A for a in row)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    if mat_shape(A) == (1, 1) and mat_shape(B) != (1, 1):
        return mat_scale(B, A[0][0])
    if mat_shape(B) == (1, 1) and mat_shape(A) != (1, 1):
        return mat_scale(A, B[0][0])
    if len(A[0]) != len(B):
        raise DimensionError(f"cannot multiply {mat_shape(A)} by {mat_shape(B)} values")
    cols = list(zip(*B))
    out = []
    for row in A:
        new = []
        for col in cols:
            acc = None
            for a, b in zip(row, col):
                if a and b:
                    acc = a * b if acc is None else acc + a * b
            new.append(acc if acc is not None else Polynomial.zero(row[0].num_vars))
        out.append(tuple(new))
    return tuple(out)


def _product_shape(s1: tuple, s2: tuple) -> tuple:
    if s1 == (1, 1):
        return s2
    if s2 == (1, 1):
        return s1
    if s1[1] != s2[0]:
        raise DimensionError(f"incompatible value shapes {s1} and {s2}")
    return (s1[0], s2[1])


def as_matrix(rows: Sequence[Sequence], n: int) -> Matrix:
    from .algebroid import _as_poly

    return tuple(tuple(_as_poly(x, n) for x in row) for row in rows)


def _sort_sign(idx: Sequence[int]) -> tuple:
    """(sign, sorted tuple) of an index sequence; sign 0 if an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


# -------------------------------------------------------------------- forms


class LForm:
    __slots__ = ("num_vars", "rank", "degree", "shape", "components")

    def __init__(self, num_vars: int, rank: int, degree: int, shape: tuple, components: Mapping | None = None):
        self.num_vars = num_vars
        self.rank = rank
        self.degree = degree
        self.shape = tuple(shape)
        comps = {}
        if degree <= rank and components:
            for key, M in components.items():
                key = tuple(key)
                if len(key) != degree:
                    raise DimensionError(f"index tuple {key} does not match degree {degree}")
                if any(not 0 <= i < rank for i in key):
                    raise DimensionError(f"index tuple {key} out of range for rank {rank}")
                sign, skey = _sort_sign(key)
                if not sign:
                    continue
                if mat_shape(M) != self.shape:
                    raise DimensionError(f"component shape {mat_shape(M)} differs from {self.shape}")
                if sign < 0:
                    M = mat_neg(M)
                if skey in comps:
                    M = mat_add(comps[skey], M)
                comps[skey] = M
        self.components = {k: v for k, v in comps.items() if not mat_is_zero(v)}

    @classmethod
    def zero(cls, spec: AlgebroidSpec, degree: int, shape=(1, 1)) -> "LForm":
        return cls(spec.num_vars, spec.rank, degree, shape)

    @classmethod
    def function(cls, spec: AlgebroidSpec, value) -> "LForm":
        """Degree-0 form from a polynomial or a matrix of polynomials."""
        if isinstance(value, Polynomial) or isinstance(value, (int, Fraction, str)):
            value = ((value,),)
        M = as_matrix(value, spec.num_vars)
        return cls(spec.num_vars, spec.rank, 0, mat_shape(M), {(): M})

    @classmethod
    def covector(cls, spec: AlgebroidSpec, i: int) -> "LForm":
        return cls(spec.num_vars, spec.rank, 1, (1, 1), {(i,): ((Polynomial.constant(spec.num_vars, 1),),)})

    @classmethod
    def build(cls, spec: AlgebroidSpec, degree: int, components: Mapping, shape=None) -> "LForm":
        comps = {}
        for key, M in components.items():
            if isinstance(M, (Polynomial, int, Fraction, str)):
                M = ((M,),)
            comps[tuple(key)] = as_matrix(M, spec.num_vars)
        if shape is None:
            shape = mat_shape(next(iter(comps.values()))) if comps else (1, 1)
        return cls(spec.num_vars, spec.rank, degree, shape, comps)

    def _like(self, degree: int, shape: tuple, comps: Mapping) -> "LForm":
        return LForm(self.num_vars, self.rank, degree, shape, comps)

    def value(self, idx: Sequence[int]) -> Matrix:
        """Value on an arbitrary index tuple (antisymmetry applied)."""
        sign, key = _sort_sign(idx)
        M = self.components.get(key) if sign else None
        if M is None:
            return mat_zero(self.num_vars, *self.shape)
        return M if sign > 0 else mat_neg(M)

    def is_zero(self) -> bool:
        return not self.components

    def _check_same(self, other: "LForm") -> None:
        if (self.num_vars, self.rank, self.degree, self.shape) != (
            other.num_vars, other.rank, other.degree, other.shape,
        ):
            raise DimensionError(
                f"cannot combine forms of degree/shape {self.degree}/{self.shape} and {other.degree}/{other.shape}"
            )

    def __add__(self, other: "LForm") -> "LForm":
        self._check_same(other)
        comps = dict(self.components)
        for k, M in other.components.items():
            comps[k] = mat_add(comps[k], M) if k in comps else M
        return self._like(self.degree, self.shape, comps)

    def __neg__(self) -> "LForm":
        return self._like(self.degree, self.shape, {k: mat_neg(M) for k, M in self.components.items()})

    def __sub__(self, other: "LForm") -> "LForm":
        return self + (-other)

    def scale(self, f) -> "LForm":
        return self._like(self.degree, self.shape, {k: mat_scale(M, f) for k, M in self.components.items()})

    def map_values(self, fn: Callable[[Matrix], Matrix], shape=None) -> "LForm":
        comps = {k: fn(M) for k, M in self.components.items()}
        if shape is None:
            shape = mat_shape(next(iter(comps.values()))) if comps else self.shape
        return self._like(self.degree, shape, comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LForm):
            return NotImplemented
        return (self.degree, self.shape) == (other.degree, other.shape) and self.components == other.components

    def __repr__(self) -> str:
        return f"LForm(degree={self.degree}, shape={self.shape}, {format_form(self)})"


def format_form(form: LForm) -> str:
    if form.is_zero():
        return "0"
    parts = []
    for key in sorted(form.components):
        M = form.components[key]
        label = "^".join(f"e{i}*" for i in key) or "1"
        if form.shape == (1, 1):
            val = poly_format(M[0][0])
        else:
            val = "[" + "; ".join(", ".join(poly_format(p) for p in row) for row in M) + "]"
        parts.append(f"({val}) {label}")
    return " + ".join(parts)


def _require_spec(spec: AlgebroidSpec, *forms: LForm) -> None:
    for f in forms:
        if (f.num_vars, f.rank) != (spec.num_vars, spec.rank):
            raise DimensionError("form does not live on this algebroid")


# ---------------------------------------------------------------- algebra


def wedge(omega: LForm, tau: LForm) -> LForm:
    if (omega.num_vars, omega.rank) != (tau.num_vars, tau.rank):
        raise DimensionError("forms live on different algebroids")
    shape = _product_shape(omega.shape, tau.shape)
    deg = omega.degree + tau.degree
    if deg > omega.rank:
        return omega._like(deg, shape, {})
    comps: dict = {}
    for J, A in omega.components.items():
        for K, B in tau.components.items():
            if set(J) & set(K):
                continue
            sign, I = _sort_sign(J + K)
            P = mat_mul(A, B)
            if sign < 0:
                P = mat_neg(P)
            comps[I] = mat_add(comps[I], P) if I in comps else P
    return omega._like(deg, shape, comps)


def graded_bracket(omega: LForm, tau: LForm) -> LForm:
    if omega.shape != tau.shape or omega.shape[0] != omega.shape[1]:
        raise DimensionError("graded bracket needs equal square value shapes")
    sign = -1 if (omega.degree * tau.degree) % 2 else 1
    a, b = wedge(omega, tau), wedge(tau, omega)
    return a - b if sign > 0 else a + b


def d_L(spec: AlgebroidSpec, omega: LForm) -> LForm:
    """Algebroid differential, entrywise on matrix values."""
    _require_spec(spec, omega)
    k, r = omega.degree, spec.rank
    if k + 1 > r:
        return omega._like(k + 1, omega.shape, {})
    comps = {}
    for I in combinations(range(r), k + 1):
        acc = None
        for s, i in enumerate(I):
            rest = I[:s] + I[s + 1 :]
            M = omega.components.get(rest)
            if M is None:
                continue
            D = mat_map(M, lambda p, i=i: spec.derivation(i, p))
            if s % 2:
                D = mat_neg(D)
            acc = D if acc is None else mat_add(acc, D)
        for s, t in combinations(range(k + 1), 2):
            c = spec.structure(I[s], I[t])
            rest = tuple(x for u, x in enumerate(I) if u not in (s, t))
            for l, coeff in enumerate(c):
                if not coeff:
                    continue
                V = omega.value((l,) + rest)
                if mat_is_zero(V):
                    continue
                V = mat_scale(V, coeff)
                if (s + t) % 2:
                    V = mat_neg(V)
                acc = V if acc is None else mat_add(acc, V)
        if acc is not None:
            comps[I] = acc
    return omega._like(k + 1, omega.shape, comps)


def insert(xi: SectionExpr, omega: LForm) -> LForm:
    """Interior product: contract xi into the first slot."""
    if len(xi) != omega.rank:
        raise DimensionError("section rank differs from form rank")
    if omega.degree == 0:
        # degree -1 zero form, so that degree bookkeeping in identities stays uniform
        return LForm(omega.num_vars, omega.rank, -1, omega.shape)
    comps: dict = {}
    for I, M in omega.components.items():
        for s, i in enumerate(I):
            if not xi[i]:
                continue
            J = I[:s] + I[s + 1 :]
            V = mat_scale(M, xi[i])
            if s % 2:
                V = mat_neg(V)
            comps[J] = mat_add(comps[J], V) if J in comps else V
    return omega._like(omega.degree - 1, omega.shape, comps)


def _frame_brackets(spec: AlgebroidSpec, xi: SectionExpr) -> list:
    return [section_bracket(spec, xi, spec.basis_section(i)) for i in range(spec.rank)]


def lie_derivative(spec: AlgebroidSpec, xi: SectionExpr, omega: LForm) -> LForm:
    _require_spec(spec, omega)
    k, r = omega.degree, spec.rank
    X = anchor_of(spec, xi)
    comps: dict = {}
    for I, M in omega.components.items():
        comps[I] = mat_map(M, lambda p: apply_vector_field(X, p))
    if k:
        brackets = _frame_brackets(spec, xi)
        for I in combinations(range(r), k):
            acc = None
            for s, i in enumerate(I):
                b = brackets[i]
                for l, coeff in enumerate(b.components):
                    if not coeff:
                        continue
                    V = omega.value(I[:s] + (l,) + I[s + 1 :])
                    if mat_is_zero(V):
                        continue
                    V = mat_scale(V, coeff)
                    acc = V if acc is None else mat_add(acc, V)
            if acc is not None:
                comps[I] = mat_sub(comps[I], acc) if I in comps else mat_neg(acc)
    return omega._like(k, omega.shape, comps)


# ------------------------------------------------------------ connections


@dataclass(frozen=True, eq=False)
class ConnectionForm:
    alpha: LForm

    def __post_init__(self):
        if self.alpha.degree != 1:
            raise DimensionError("a connection form has degree 1")
        if self.alpha.shape[0] != self.alpha.shape[1]:
            raise DimensionError("a connection form takes End(E) values")

    @property
    def dim_E(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True, eq=False)
class GaugeMap:
    phi: Matrix
    phi_inv: Matrix

    def __post_init__(self):
        m = len(self.phi)
        n = self.phi[0][0].num_vars
        ident = mat_identity(n, m)
        if mat_mul(self.phi, self.phi_inv) != ident or mat_mul(self.phi_inv, self.phi) != ident:
            raise ValueError("phi_inv is not a two-sided inverse of phi")

    @property
    def dim_E(self) -> int:
        return len(self.phi)


def _alpha(A) -> LForm:
    return A.alpha if isinstance(A, ConnectionForm) else A


def covariant_d(spec: AlgebroidSpec, A, omega: LForm, valued_in: str = "E") -> LForm:
    """d^nabla for nabla = nabla0 + alpha, on E- or End(E)-valued forms."""
    alpha = _alpha(A)
    _require_spec(spec, alpha, omega)
    m = alpha.shape[0]
    if valued_in == "E":
        if omega.shape[0] != m:
            raise DimensionError(f"E-valued form needs {m} rows, has shape {omega.shape}")
        return d_L(spec, omega) + wedge(alpha, omega)
    if valued_in == "EndE":
        if omega.shape != (m, m):
            raise DimensionError(f"End(E)-valued form needs shape {(m, m)}, has {omega.shape}")
        return d_L(spec, omega) + graded_bracket(alpha, omega)
    raise ValueError("valued_in must be 'E' or 'EndE'")


def curvature(spec: AlgebroidSpec, A) -> LForm:
    alpha = _alpha(A)
    _require_spec(spec, alpha)
    return d_L(spec, alpha) + wedge(alpha, alpha)


def bianchi_check(spec: AlgebroidSpec, A) -> LForm:
    return covariant_d(spec, A, curvature(spec, A), "EndE")


def conjugate(form: LForm, phi: GaugeMap) -> LForm:
    """phi^{-1} . form . phi on every component."""
    return form.map_values(lambda M: mat_mul(mat_mul(phi.phi_inv, M), phi.phi))


def gauge_transform(spec: AlgebroidSpec, A, phi: GaugeMap) -> ConnectionForm:
    alpha = _alpha(A)
    _require_spec(spec, alpha)
    if phi.dim_E != alpha.shape[0]:
        raise DimensionError("gauge map and connection act on bundles of different rank")
    dphi = d_L(spec, LForm(spec.num_vars, spec.rank, 0, alpha.shape, {(): phi.phi}))
    pulled = dphi.map_values(lambda M: mat_mul(phi.phi_inv, M), alpha.shape)
    return ConnectionForm(pulled + conjugate(alpha, phi))


def compose_gauge(phi: GaugeMap, psi: GaugeMap) -> GaugeMap:
    """phi followed by psi in the right action: alpha^(phi psi) = (alpha^phi)^psi."""
    return GaugeMap(mat_mul(phi.phi, psi.phi), mat_mul(psi.phi_inv, phi.phi_inv))


def reference_flatness_residual(spec: AlgebroidSpec, dim_E: int = 1) -> LForm:
    """Curvature of the canonical connection nabla0 (zero for a valid algebroid).

    Evaluated as d_L(d_L s) on the coordinate functions of E, which picks up
    [a(e_i), a(e_j)] - a([e_i, e_j]).
    """
    out = None
    for j in range(spec.num_vars):
        s = LForm.function(spec, Polynomial.variable(spec.num_vars, j))
        dd = d_L(spec, d_L(spec, s))
        out = dd if out is None else out + dd
    return out if out is not None else LForm.zero(spec, 2)


# --------------------------------------------------------------- randomness


def random_section(spec: AlgebroidSpec, rng: random.Random, max_degree: int) -> SectionExpr:
    return SectionExpr(tuple(random_poly(spec.num_vars, max_degree, rng) for _ in range(spec.rank)))


def random_form(
    spec: AlgebroidSpec,
    degree: int,
    rng: random.Random,
    max_degree: int,
    shape=(1, 1),
    n_terms: int = 2,
) -> LForm:
    comps = {}
    for I in combinations(range(spec.rank), degree):
        comps[I] = tuple(
            tuple(random_poly(spec.num_vars, max_degree, rng, n_terms=n_terms) for _ in range(shape[1]))
            for _ in range(shape[0])
        )
    return LForm(spec.num_vars, spec.rank, degree, shape, comps)


def random_gauge(spec: AlgebroidSpec, m: int, rng: random.Random, max_degree: int, factors: int = 2) -> GaugeMap:
    """Unimodular polynomial matrix as a product of elementary factors."""
    n = spec.num_vars
    # constant invertible diagonal
    diag = [Fraction(rng.choice((-3, -2, -1, 1, 2, 3)), rng.choice((1, 2))) for _ in range(m)]
    D = tuple(tuple(Polynomial.constant(n, diag[i] if i == j else 0) for j in range(m)) for i in range(m))
    Dinv = tuple(tuple(Polynomial.constant(n, 1 / diag[i] if i == j else 0) for j in range(m)) for i in range(m))
    phi, phi_inv = D, Dinv
    if m > 1:
        for _ in range(factors):
            a, b = rng.sample(range(m), 2)
            p = random_poly(n, max_degree, rng, n_terms=2)
            E = [list(row) for row in mat_identity(n, m)]
            Einv = [list(row) for row in mat_identity(n, m)]
            E[a][b] = p
            Einv[a][b] = -p
            E = tuple(map(tuple, E))
            Einv = tuple(map(tuple, Einv))
            phi = mat_mul(phi, E)
            phi_inv = mat_mul(Einv, phi_inv)
    return GaugeMap(phi, phi_inv)


def derived_rng(seed: int, trial: int) -> random.Random:
    return random.Random(seed * 1_000_003 + trial)


# ------------------------------------------------------------ identity suites


@dataclass
class IdentityResult:
    name: str
    trials: int
    failures: int = 0
    residual: LForm | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class SuiteReport:
    results: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.results)

    def by_name(self, name: str) -> IdentityResult:
        return next(r for r in self.results if r.name == name)

    def summary(self) -> str:
        return f"{self.n_passed}/{len(self.results)} identities pass"


def _run_suite(checks: dict, trials: int, seed: int, draw) -> SuiteReport:
    results = {name: IdentityResult(name, trials) for name in checks}
    for t in range(trials):
        sample = draw(derived_rng(seed, t), t)
        for name, check in checks.items():
            residual = check(sample)
            if not residual.is_zero():
                res = results[name]
                res.failures += 1
                if res.residual is None:
                    res.residual = residual
    return SuiteReport(list(results.values()))


CARTAN_IDENTITIES = (
    "insertion_derivation",
    "lie_derivation",
    "lie_insertion_commutator",
    "lie_lie_commutator",
    "insertion_anticommute",
    "d_derivation",
    "d_squared",
    "lie_d_commute",
    "cartan_formula",
)


def cartan_identity_suite(spec: AlgebroidSpec, trials: int = 20, seed: int = 0, max_degree: int = 4) -> SuiteReport:
    """Graded Cartan calculus identities for i_xi, L_xi and d_L on scalar forms."""
    r = spec.rank

    def draw(rng, trial):
        # cycle the first degree so every degree is exercised
        p = trial % (r + 1)
        q = rng.randint(0, r - p)
        return {
            "p": p,
            "omega": random_form(spec, p, rng, max_degree),
            "tau": random_form(spec, q, rng, max_degree),
            "xi": random_section(spec, rng, max_degree),
            "eta": random_section(spec, rng, max_degree),
        }

    i_ = insert
    L = lambda xi, w: lie_derivative(spec, xi, w)
    d = lambda w: d_L(spec, w)
    sgn = lambda k, w: w if k % 2 == 0 else -w

    def ins_deriv(s):
        w, t, xi = s["omega"], s["tau"], s["xi"]
        return i_(xi, wedge(w, t)) - (wedge(i_(xi, w), t) + sgn(s["p"], wedge(w, i_(xi, t))))

    def lie_deriv(s):
        w, t, xi = s["omega"], s["tau"], s["xi"]
        return L(xi, wedge(w, t)) - (wedge(L(xi, w), t) + wedge(w, L(xi, t)))

    def lie_ins(s):
        w, xi, eta = s["omega"], s["xi"], s["eta"]
        return i_(eta, L(xi, w)) - L(xi, i_(eta, w)) + i_(section_bracket(spec, xi, eta), w) if w.degree else _zero(w)

    def lie_lie(s):
        w, xi, eta = s["omega"], s["xi"], s["eta"]
        return L(xi, L(eta, w)) - L(eta, L(xi, w)) - L(section_bracket(spec, xi, eta), w)

    def ins_anti(s):
        w, xi, eta = s["omega"], s["xi"], s["eta"]
        if w.degree < 2:
            return _zero(w)
        return i_(xi, i_(eta, w)) + i_(eta, i_(xi, w))

    def d_deriv(s):
        w, t = s["omega"], s["tau"]
        return d(wedge(w, t)) - (wedge(d(w), t) + sgn(s["p"], wedge(w, d(t))))

    def d_sq(s):
        return d(d(s["omega"]))

    def lie_d(s):
        w, xi = s["omega"], s["xi"]
        return L(xi, d(w)) - d(L(xi, w))

    def cartan(s):
        w, xi = s["omega"], s["xi"]
        dw_in = i_(xi, d(w))
        if w.degree == 0:
            return dw_in - L(xi, w)
        return dw_in + d(i_(xi, w)) - L(xi, w)

    checks = dict(zip(CARTAN_IDENTITIES, (ins_deriv, lie_deriv, lie_ins, lie_lie, ins_anti, d_deriv, d_sq, lie_d, cartan)))
    return _run_suite(checks, trials, seed, draw)


def _zero(w: LForm) -> LForm:
    return LForm(w.num_vars, w.rank, w.degree, w.shape)


CONNECTION_IDENTITIES = (
    "covariant_leibniz",
    "covariant_bracket_derivation",
    "covariant_square_is_curvature",
    "bianchi",
    "gauge_covariance",
)


def connection_identity_suite(
    spec: AlgebroidSpec, trials: int = 20, seed: int = 0, max_degree: int = 4, dim_E: int = 2
) -> SuiteReport:
    """Identities for a random connection nabla0 + alpha on the trivial rank-m bundle."""
    r, m = spec.rank, dim_E

    def draw(rng, trial):
        # cycle the first degree so every degree is exercised
        p = trial % (r + 1)
        q = rng.randint(0, r - p)
        return {
            "p": p,
            "alpha": random_form(spec, 1, rng, max_degree, (m, m)),
            "scalar": random_form(spec, p, rng, max_degree),
            "section_form": random_form(spec, q, rng, max_degree, (m, 1)),
            "omega": random_form(spec, p, rng, max_degree, (m, m)),
            "tau": random_form(spec, q, rng, max_degree, (m, m)),
            "phi": random_gauge(spec, m, rng, max_degree),
        }

    dE = lambda a, w: covariant_d(spec, a, w, "E")
    dEnd = lambda a, w: covariant_d(spec, a, w, "EndE")
    sgn = lambda k, w: w if k % 2 == 0 else -w

    def leibniz(s):
        a, f, w = s["alpha"], s["scalar"], s["section_form"]
        return dE(a, wedge(f, w)) - (wedge(d_L(spec, f), w) + sgn(s["p"], wedge(f, dE(a, w))))

    def bracket_deriv(s):
        a, w, t = s["alpha"], s["omega"], s["tau"]
        return dEnd(a, graded_bracket(w, t)) - (
            graded_bracket(dEnd(a, w), t) + sgn(s["p"], graded_bracket(w, dEnd(a, t)))
        )

    def square(s):
        a, w = s["alpha"], s["section_form"]
        return dE(a, dE(a, w)) - wedge(curvature(spec, a), w)

    def bianchi(s):
        return bianchi_check(spec, s["alpha"])

    def gauge(s):
        a, phi = s["alpha"], s["phi"]
        return curvature(spec, gauge_transform(spec, a, phi)) - conjugate(curvature(spec, a), phi)

    checks = dict(zip(CONNECTION_IDENTITIES, (leibniz, bracket_deriv, square, bianchi, gauge)))
    return _run_suite(checks, trials, seed, draw)

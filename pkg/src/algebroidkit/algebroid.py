"""Polynomial Lie algebroids over R^n (n = 0 gives Lie algebras).

An algebroid of rank r over R^n is stored as its anchor matrix and the
structure functions of the bracket on the standard frame e_0..e_{r-1}:

    a(e_i) = sum_j anchor[i][j] d/dx_j,     [e_i, e_j] = sum_k c^k_ij e_k.

Only pairs i < j are stored; antisymmetry holds by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import exactlinalg
from .exactpoly import DimensionError, Polynomial, monomials, poly_format, poly_parse

Vector = tuple  # tuple[Polynomial, ...]


class ConstructionError(ValueError):
    """An example constructor rejected its parameters; carries the residual."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class AlgebroidSpec:
    num_vars: int
    rank: int
    anchor: tuple
    bracket: Mapping = field(default_factory=dict)

    def __post_init__(self):
        n, r = self.num_vars, self.rank
        if n < 0:
            raise DimensionError("num_vars must be >= 0")
        if r < 1:
            raise DimensionError("rank must be >= 1")
        anchor = tuple(tuple(_as_poly(p, n) for p in row) for row in self.anchor)
        if len(anchor) != r or any(len(row) != n for row in anchor):
            raise DimensionError(f"anchor must be a {r}x{n} matrix")
        bracket = {}
        for (i, j), coeffs in dict(self.bracket).items():
            if not (0 <= i < j < r):
                raise DimensionError(f"bracket pair ({i}, {j}) must satisfy 0 <= i < j < {r}")
            coeffs = tuple(_as_poly(p, n) for p in coeffs)
            if len(coeffs) != r:
                raise DimensionError(f"bracket ({i}, {j}) needs {r} coefficients")
            if any(coeffs):
                bracket[(i, j)] = coeffs
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "bracket", bracket)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.num_vars)

    def one(self) -> Polynomial:
        return Polynomial.constant(self.num_vars, 1)

    def structure(self, i: int, j: int) -> Vector:
        """Coefficients of [e_i, e_j] in the standard frame."""
        if i == j:
            return (self.zero(),) * self.rank
        if i < j:
            return self.bracket.get((i, j), (self.zero(),) * self.rank)
        return tuple(-p for p in self.structure(j, i))

    def basis_section(self, i: int) -> "SectionExpr":
        return SectionExpr(tuple(self.one() if k == i else self.zero() for k in range(self.rank)))

    def zero_section(self) -> "SectionExpr":
        return SectionExpr((self.zero(),) * self.rank)

    def derivation(self, i: int, f: Polynomial) -> Polynomial:
        """a(e_i) f."""
        out = self.zero()
        for j, coeff in enumerate(self.anchor[i]):
            if coeff:
                out = out + coeff * f.partial(j)
        return out

    def __repr__(self) -> str:
        return f"AlgebroidSpec(num_vars={self.num_vars}, rank={self.rank})"


@dataclass(frozen=True)
class SectionExpr:
    components: tuple

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> Polynomial:
        return self.components[i]

    def __add__(self, other: "SectionExpr") -> "SectionExpr":
        return SectionExpr(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "SectionExpr") -> "SectionExpr":
        return SectionExpr(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "SectionExpr":
        return SectionExpr(tuple(-a for a in self.components))

    def scale(self, f) -> "SectionExpr":
        return SectionExpr(tuple(f * a for a in self.components))

    def is_zero(self) -> bool:
        return not any(self.components)


def _as_poly(p, num_vars: int) -> Polynomial:
    if isinstance(p, Polynomial):
        if p.num_vars != num_vars:
            raise DimensionError(f"polynomial has {p.num_vars} variables, expected {num_vars}")
        return p
    if isinstance(p, str):
        return poly_parse(p, num_vars)
    return Polynomial.constant(num_vars, p)


def _check_section(spec: AlgebroidSpec, xi: SectionExpr) -> None:
    if len(xi.components) != spec.rank:
        raise DimensionError(f"section has {len(xi.components)} components, rank is {spec.rank}")
    for p in xi.components:
        if p.num_vars != spec.num_vars:
            raise DimensionError("section coefficients have the wrong number of variables")


def section(spec: AlgebroidSpec, components: Sequence) -> SectionExpr:
    xi = SectionExpr(tuple(_as_poly(p, spec.num_vars) for p in components))
    _check_section(spec, xi)
    return xi


# vector fields on R^n are tuples of n polynomials


def apply_vector_field(X: Sequence[Polynomial], f: Polynomial) -> Polynomial:
    out = Polynomial.zero(f.num_vars)
    for j, coeff in enumerate(X):
        if coeff:
            out = out + coeff * f.partial(j)
    return out


def vector_field_bracket(X: Sequence[Polynomial], Y: Sequence[Polynomial]) -> tuple:
    return tuple(apply_vector_field(X, Y[l]) - apply_vector_field(Y, X[l]) for l in range(len(X)))


def anchor_of(spec: AlgebroidSpec, xi: SectionExpr) -> tuple:
    """The vector field a(xi) as n polynomial coefficients."""
    _check_section(spec, xi)
    out = [spec.zero()] * spec.num_vars
    for i, f in enumerate(xi.components):
        if f:
            for j in range(spec.num_vars):
                if spec.anchor[i][j]:
                    out[j] = out[j] + f * spec.anchor[i][j]
    return tuple(out)


def anchor_apply(spec: AlgebroidSpec, xi: SectionExpr, f: Polynomial) -> Polynomial:
    if f.num_vars != spec.num_vars:
        raise DimensionError("function has the wrong number of variables")
    return apply_vector_field(anchor_of(spec, xi), f)


def section_bracket(spec: AlgebroidSpec, xi: SectionExpr, eta: SectionExpr) -> SectionExpr:
    """Leibniz extension of the frame brackets to arbitrary sections."""
    _check_section(spec, xi)
    _check_section(spec, eta)
    r = spec.rank
    out = [spec.zero()] * r
    for (i, j), coeffs in spec.bracket.items():
        w = xi[i] * eta[j] - xi[j] * eta[i]
        if w:
            for k in range(r):
                if coeffs[k]:
                    out[k] = out[k] + w * coeffs[k]
    X, Y = anchor_of(spec, xi), anchor_of(spec, eta)
    for k in range(r):
        out[k] = out[k] + apply_vector_field(X, eta[k]) - apply_vector_field(Y, xi[k])
    return SectionExpr(tuple(out))


@dataclass(frozen=True)
class Failure:
    condition: str
    indices: tuple
    residual: tuple

    def describe(self) -> str:
        res = ", ".join(poly_format(p) for p in self.residual)
        return f"{self.condition} {self.indices}: residual ({res})"


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.valid


def validate_algebroid(spec: AlgebroidSpec) -> ValidationReport:
    """Check the anchor is a bracket morphism and the Jacobi identity, exactly."""
    report = ValidationReport()
    r = spec.rank
    for i, j in combinations(range(r), 2):
        lhs = anchor_of(spec, SectionExpr(spec.structure(i, j)))
        rhs = vector_field_bracket(spec.anchor[i], spec.anchor[j])
        residual = tuple(a - b for a, b in zip(lhs, rhs))
        if any(residual):
            report.failures.append(Failure("anchor_morphism", (i, j), residual))
    basis = [spec.basis_section(i) for i in range(r)]
    for i, j, k in combinations(range(r), 3):
        jac = spec.zero_section()
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            inner = SectionExpr(spec.structure(b, c))
            jac = jac + section_bracket(spec, basis[a], inner)
        if not jac.is_zero():
            report.failures.append(Failure("jacobi", (i, j, k), jac.components))
    return report


# ---------------------------------------------------------------- examples


def _identity_anchor(n: int, rows: int) -> list:
    return [
        [Polynomial.constant(n, int(i == j)) for j in range(n)] for i in range(rows)
    ]


def _parse_pairs(pairs: Mapping, n: int) -> dict:
    out = {}
    for (i, j), p in dict(pairs).items():
        p = _as_poly(p, n)
        if i > j:
            i, j, p = j, i, -p
        if i == j:
            raise ConstructionError(f"diagonal entry ({i}, {i}) of an antisymmetric tensor")
        out[(i, j)] = out.get((i, j), Polynomial.zero(n)) + p
    return out


def _lie_brackets(structure: Mapping, dim: int, n: int, offset: int, rank: int) -> dict:
    """Constant brackets of a Lie algebra, embedded at frame offset."""
    out = {}
    for (i, j), coeffs in dict(structure).items():
        if len(coeffs) != dim:
            raise ConstructionError(f"bracket ({i}, {j}) needs {dim} coefficients")
        vec = [Polynomial.zero(n)] * rank
        for k, c in enumerate(coeffs):
            vec[offset + k] = _as_poly(c, n)
        if i > j:
            i, j, vec = j, i, [-p for p in vec]
        out[(offset + i, offset + j)] = tuple(vec)
    return out


def _check_lie_algebra(structure: Mapping, dim: int) -> None:
    spec = AlgebroidSpec(0, dim, tuple(() for _ in range(dim)), _lie_brackets(structure, dim, 0, 0, dim))
    report = validate_algebroid(spec)
    if not report.valid:
        raise ConstructionError("structure constants violate the Jacobi identity", report.failures)


def construct_example(kind: str, **params) -> AlgebroidSpec:
    """Build one of the standard algebroids.

    kinds and parameters:
      tangent(n)
      lie_algebra(dim, brackets={(i, j): [c_0, ...]})
      vector_field(n, X=[X_0, ...])
      action(n, dim, brackets, zeta=[[...] per generator])   zeta a homomorphism
      two_form(n, omega={(i, j): p})                          omega closed
      poisson(n, pi={(i, j): p})                              pi Poisson
      nijenhuis(base=AlgebroidSpec, N=[[...]])                 torsion zero
      trivial_product(n, dim, brackets)
    """
    builder = _BUILDERS.get(kind)
    if builder is None:
        raise ValueError(f"unknown example kind {kind!r}; choose from {sorted(_BUILDERS)}")
    spec = builder(**params)
    report = validate_algebroid(spec)
    if not report.valid:
        raise ConstructionError(f"{kind} construction is not a Lie algebroid", report.failures)
    return spec


def _tangent(n: int) -> AlgebroidSpec:
    return AlgebroidSpec(n, n, _identity_anchor(n, n))


def _lie_algebra(dim: int, brackets: Mapping = None) -> AlgebroidSpec:
    brackets = brackets or {}
    return AlgebroidSpec(0, dim, tuple(() for _ in range(dim)), _lie_brackets(brackets, dim, 0, 0, dim))


def _vector_field(n: int, X: Sequence) -> AlgebroidSpec:
    if len(X) != n:
        raise ConstructionError(f"vector field needs {n} components")
    return AlgebroidSpec(n, 1, (tuple(_as_poly(p, n) for p in X),))


def _action(n: int, dim: int, brackets: Mapping, zeta: Sequence) -> AlgebroidSpec:
    _check_lie_algebra(brackets, dim)
    if len(zeta) != dim or any(len(z) != n for z in zeta):
        raise ConstructionError(f"zeta must give {dim} vector fields on R^{n}")
    fields = [tuple(_as_poly(p, n) for p in z) for z in zeta]
    lie = _lie_brackets(brackets, dim, n, 0, dim)
    for i, j in combinations(range(dim), 2):
        coeffs = lie.get((i, j), (Polynomial.zero(n),) * dim)
        image = [Polynomial.zero(n)] * n
        for k, c in enumerate(coeffs):
            image = [a + c * b for a, b in zip(image, fields[k])]
        residual = tuple(
            a - b for a, b in zip(vector_field_bracket(fields[i], fields[j]), image)
        )
        if any(residual):
            raise ConstructionError(
                f"zeta is not a homomorphism on ({i}, {j}): "
                f"[zeta_i, zeta_j] - zeta([e_i, e_j]) = ({', '.join(map(poly_format, residual))})",
                residual,
            )
    # constant sections bracket as in the Lie algebra; Leibniz does the rest
    return AlgebroidSpec(n, dim, fields, lie)


def _two_form(n: int, omega: Mapping) -> AlgebroidSpec:
    om = _parse_pairs(omega, n)

    def w(i, j):
        if i == j:
            return Polynomial.zero(n)
        return om.get((i, j), Polynomial.zero(n)) if i < j else -om.get((j, i), Polynomial.zero(n))

    for i, j, k in combinations(range(n), 3):
        d = w(j, k).partial(i) - w(i, k).partial(j) + w(i, j).partial(k)
        if d:
            raise ConstructionError(f"omega is not closed: (d omega)_{i}{j}{k} = {poly_format(d)}", d)
    r = n + 1
    anchor = _identity_anchor(n, n) + [[Polynomial.zero(n)] * n]
    bracket = {}
    for (i, j), p in om.items():
        vec = [Polynomial.zero(n)] * r
        vec[n] = p
        bracket[(i, j)] = tuple(vec)
    return AlgebroidSpec(n, r, anchor, bracket)


def _poisson(n: int, pi: Mapping) -> AlgebroidSpec:
    P = _parse_pairs(pi, n)
    zero = Polynomial.zero(n)

    def p(i, j):
        if i == j:
            return zero
        return P.get((i, j), zero) if i < j else -P.get((j, i), zero)

    if n >= 3:
        for i, j, k in combinations(range(n), 3):
            s = zero
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                for l in range(n):
                    s = s + p(a, l) * p(b, c).partial(l)
            if s:
                raise ConstructionError(f"bivector fails the Jacobi identity on ({i}, {j}, {k}): {poly_format(s)}", s)
    # basis dx_0..dx_{n-1}; a(dx_i) = sum_j pi^{ij} d_j ; [dx_i, dx_j] = d pi^{ij}
    anchor = [[p(i, j) for j in range(n)] for i in range(n)]
    bracket = {}
    for i, j in combinations(range(n), 2):
        bracket[(i, j)] = tuple(p(i, j).partial(k) for k in range(n))
    return AlgebroidSpec(n, n, anchor, bracket)


def _apply_matrix(N, xi: SectionExpr) -> SectionExpr:
    r = len(xi)
    return SectionExpr(tuple(
        sum((N[k][i] * xi[i] for i in range(r)), Polynomial.zero(xi[0].num_vars)) for k in range(r)
    ))


def nijenhuis_torsion(base: AlgebroidSpec, N) -> dict:
    """Nonzero torsion vectors T_N(e_i, e_j) for i < j."""
    r = base.rank
    N = [[_as_poly(x, base.num_vars) for x in row] for row in N]
    if len(N) != r or any(len(row) != r for row in N):
        raise ConstructionError(f"N must be {r}x{r}")
    out = {}
    for i, j in combinations(range(r), 2):
        ei, ej = base.basis_section(i), base.basis_section(j)
        Nei, Nej = _apply_matrix(N, ei), _apply_matrix(N, ej)
        t = (
            section_bracket(base, Nei, Nej)
            - _apply_matrix(N, section_bracket(base, Nei, ej))
            - _apply_matrix(N, section_bracket(base, ei, Nej))
            + _apply_matrix(N, _apply_matrix(N, section_bracket(base, ei, ej)))
        )
        if not t.is_zero():
            out[(i, j)] = t.components
    return out


def _nijenhuis(base: AlgebroidSpec, N) -> AlgebroidSpec:
    if not validate_algebroid(base).valid:
        raise ConstructionError("base algebroid is invalid")
    torsion = nijenhuis_torsion(base, N)
    if torsion:
        raise ConstructionError(f"Nijenhuis torsion does not vanish on pairs {sorted(torsion)}", torsion)
    r, n = base.rank, base.num_vars
    N = [[_as_poly(x, n) for x in row] for row in N]
    anchor = [anchor_of(base, _apply_matrix(N, base.basis_section(i))) for i in range(r)]
    bracket = {}
    for i, j in combinations(range(r), 2):
        ei, ej = base.basis_section(i), base.basis_section(j)
        b = (
            section_bracket(base, _apply_matrix(N, ei), ej)
            + section_bracket(base, ei, _apply_matrix(N, ej))
            - _apply_matrix(N, section_bracket(base, ei, ej))
        )
        bracket[(i, j)] = b.components
    return AlgebroidSpec(n, r, anchor, bracket)


def _trivial_product(n: int, dim: int, brackets: Mapping = None) -> AlgebroidSpec:
    brackets = brackets or {}
    _check_lie_algebra(brackets, dim)
    r = n + dim
    anchor = _identity_anchor(n, n) + [[Polynomial.zero(n)] * n for _ in range(dim)]
    return AlgebroidSpec(n, r, anchor, _lie_brackets(brackets, dim, n, n, r))


_BUILDERS = {
    "tangent": _tangent,
    "lie_algebra": _lie_algebra,
    "vector_field": _vector_field,
    "action": _action,
    "two_form": _two_form,
    "poisson": _poisson,
    "nijenhuis": _nijenhuis,
    "trivial_product": _trivial_product,
}


# ------------------------------------------------------------- ellipticity


@dataclass
class EllipticityResult:
    elliptic_at_samples: bool
    witness: tuple | None = None
    certified: bool = False


def _det(M: list) -> Polynomial:
    if len(M) == 1:
        return M[0][0]
    total = None
    for c in range(len(M)):
        if not M[0][c]:
            continue
        minor = [row[:c] + row[c + 1 :] for row in M[1:]]
        term = M[0][c] * _det(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else Polynomial.zero(M[0][0].num_vars)


def ellipticity_check(
    spec: AlgebroidSpec,
    sample_points: Sequence[Sequence] | None = None,
    seed: int = 0,
    n_samples: int = 16,
    exact: bool = False,
) -> EllipticityResult:
    """Surjectivity of the anchor at sample points.

    With ``exact=True`` additionally look for an n x n minor whose determinant
    is a nonzero constant, a sufficient certificate for surjectivity on all of
    R^n.
    """
    n = spec.num_vars
    if n == 0:
        return EllipticityResult(True, None, True)
    if sample_points is None:
        rng = random.Random(seed)
        sample_points = [
            [Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(n)] for _ in range(n_samples)
        ]
    witness = None
    for point in sample_points:
        point = tuple(Fraction(x) for x in point)
        M = [[p.evaluate(point) for p in row] for row in spec.anchor]
        if exactlinalg.rank(M) < n:
            witness = point
            break
    certified = False
    if exact and spec.rank >= n:
        for rows in combinations(range(spec.rank), n):
            d = _det([list(spec.anchor[i]) for i in rows])
            if d and d.is_constant():
                certified = True
                break
    return EllipticityResult(witness is None, witness, certified)


def kernel_of_dL(spec: AlgebroidSpec, max_degree: int) -> list[Polynomial]:
    """Polynomials of total degree <= max_degree killed by every a(e_i)."""
    n = spec.num_vars
    basis = monomials(n, max_degree)
    polys = [Polynomial(n, {e: 1}) for e in basis]
    rows: dict = {}
    for col, mono in enumerate(polys):
        for i in range(spec.rank):
            for exps, c in spec.derivation(i, mono).items():
                rows.setdefault((i, exps), [Fraction(0)] * len(basis))[col] += c
    null = exactlinalg.nullspace(list(rows.values()), len(basis))
    out = []
    for v in null:
        out.append(Polynomial(n, {e: c for e, c in zip(basis, v) if c}))
    return sorted(out, key=lambda p: (p.total_degree(), poly_format(p)))


# --------------------------------------------------------------------- JSON


def algebroid_from_json(doc: Mapping, max_poly_degree: int | None = None) -> AlgebroidSpec:
    n, r = int(doc["num_vars"]), int(doc["rank"])

    def parse(text):
        p = poly_parse(text, n)
        if max_poly_degree is not None and p.total_degree() > max_poly_degree:
            raise ValueError(f"polynomial {text!r} exceeds the degree cap {max_poly_degree}")
        return p

    anchor = [[parse(t) for t in row] for row in doc.get("anchor", [[] for _ in range(r)])]
    if n == 0 and not anchor:
        anchor = [[] for _ in range(r)]
    bracket = {}
    for entry in doc.get("bracket", []):
        i, j = int(entry["i"]), int(entry["j"])
        if not i < j:
            raise DimensionError(f"bracket entries need i < j, got ({i}, {j})")
        bracket[(i, j)] = tuple(parse(t) for t in entry["coeffs"])
    return AlgebroidSpec(n, r, anchor, bracket)


def algebroid_to_json(spec: AlgebroidSpec) -> dict:
    return {
        "num_vars": spec.num_vars,
        "rank": spec.rank,
        "anchor": [[poly_format(p) for p in row] for row in spec.anchor],
        "bracket": [
            {"i": i, "j": j, "coeffs": [poly_format(p) for p in coeffs]}
            for (i, j), coeffs in sorted(spec.bracket.items())
        ],
    }

"""Frobenius-manifold data built from a potential in flat coordinates.

The structure is given by a constant nondegenerate symmetric matrix eta, a
potential F whose triple derivatives are the structure constants

    c_abc = d_a d_b d_c F,

an affine-linear Euler field E, a unity coordinate index u (the unity
vector field is d/dt^u), and the rational charge d.  The module certifies
the associativity (WDVV) equations, the Euler scaling of F and eta, builds
the intersection form g^{ab} = E^e c_e^{ab}, and produces the associated
flat pencil (g, eta) together with its polynomial connection.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import reports
from .errors import (
    AssociativityError,
    InternalCheckError,
    NotQuasihomogeneousError,
    UnityViolationError,
)
from .geometry import (
    Connection,
    ContraMetric,
    PencilData,
    VectorField,
    lie_bracket,
)
from .identity import Checker, EXACT
from .linalg import mat_inverse
from .qpoly import QPoly, RatFunc
from .reports import Certificate

Q = Fraction


@dataclass
class FrobeniusData:
    """Potential-based presentation of a Frobenius structure.

    ``euler_linear[a][b]`` is d_b E^a, so E^a = sum_b euler_linear[a][b] t^b
    + euler_const[a]; both parts are constant rationals by the linearity
    axiom.  ``unity`` is the 0-based coordinate index of the unity field.
    """

    n: int
    eta: list[list[Q]]
    potential: QPoly
    euler_linear: list[list[Q]]
    euler_const: list[Q]
    unity: int
    d: Q

    def __post_init__(self) -> None:
        n = self.n
        if len(self.eta) != n or any(len(r) != n for r in self.eta):
            raise ValueError("eta has wrong shape")
        for i in range(n):
            for j in range(i + 1, n):
                if self.eta[i][j] != self.eta[j][i]:
                    raise ValueError("eta is not symmetric")
        if not 0 <= self.unity < n:
            raise ValueError("unity index out of range")
        self._eta_inv = mat_inverse(self.eta)

    @property
    def eta_inv(self) -> list[list[Q]]:
        return self._eta_inv

    def euler_field(self) -> VectorField:
        comps = []
        for a in range(self.n):
            p = QPoly.const(self.n, self.euler_const[a])
            for b in range(self.n):
                if self.euler_linear[a][b]:
                    p = p + QPoly.var(self.n, b) * self.euler_linear[a][b]
            comps.append(p)
        return VectorField(comps)

    def unity_field(self) -> VectorField:
        comps = [QPoly.zero(self.n) for _ in range(self.n)]
        comps[self.unity] = QPoly.const(self.n, 1)
        return VectorField(comps)

    def eta_metric(self) -> ContraMetric:
        """eta as a constant contravariant metric (indices raised)."""
        return ContraMetric.constant(self.eta_inv, nvars=self.n)


@dataclass
class StructureConstants:
    """c_low[a][b][c] = c_abc;  c_mixed[a][b][c] = c^{ab}_c (both raised)."""

    c_low: list[list[list[QPoly]]]
    c_mixed: list[list[list[QPoly]]]


def structure_constants(m: FrobeniusData) -> StructureConstants:
    """Triple derivatives of the potential, plus the eta-raised form.

    Verifies the unity axiom: the unity slice of c_low equals eta.
    """
    n = m.n
    first = [m.potential.diff(a) for a in range(n)]
    second = [[first[a].diff(b) for b in range(n)] for a in range(n)]
    c_low = [[[second[a][b].diff(c) for c in range(n)] for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            if not (c_low[m.unity][a][b] - m.eta[a][b]).is_zero():
                raise UnityViolationError(
                    f"c(e, d_{a + 1}, d_{b + 1}) = {c_low[m.unity][a][b]} "
                    f"differs from eta entry {m.eta[a][b]}"
                )
    c_mixed = _raise_two(c_low, m.eta_inv, n)
    return StructureConstants(c_low=c_low, c_mixed=c_mixed)


def _raise_two(c_low, eta_inv, n: int):
    """c^{ab}_c = eta^{al} eta^{bm} c_lmc."""
    zero = QPoly.zero(c_low[0][0][0].nvars)
    half = [
        [[_qsum([c_low[l][b][c] * eta_inv[a][l] for l in range(n)], zero) for c in range(n)] for b in range(n)]
        for a in range(n)
    ]
    return [
        [[_qsum([half[a][m][c] * eta_inv[b][m] for m in range(n)], zero) for c in range(n)] for b in range(n)]
        for a in range(n)
    ]


def lower_two(c_mixed, eta, n: int):
    """Inverse of _raise_two: c_abc = eta_al eta_bm c^{lm}_c."""
    zero = QPoly.zero(c_mixed[0][0][0].nvars)
    half = [
        [[_qsum([c_mixed[l][b][c] * eta[a][l] for l in range(n)], zero) for c in range(n)] for b in range(n)]
        for a in range(n)
    ]
    return [
        [[_qsum([half[a][m][c] * eta[b][m] for m in range(n)], zero) for c in range(n)] for b in range(n)]
        for a in range(n)
    ]


def _qsum(values, zero):
    acc = zero
    for v in values:
        acc = acc + v
    return acc


def check_wdvv(m: FrobeniusData, checker: Checker = EXACT) -> Certificate:
    """Certify the associativity equations

        c_abl eta^{lm} c_mcd = c_dbl eta^{lm} c_mca   for all a, b, c, d.
    """
    n = m.n
    first = [m.potential.diff(a) for a in range(n)]
    c_low = [
        [[first[a].diff(b).diff(c) for c in range(n)] for b in range(n)] for a in range(n)
    ]
    zero = QPoly.zero(n)
    raised = [
        [[_qsum([c_low[l][c][dd] * m.eta_inv[e][l] for l in range(n)], zero) for dd in range(n)] for c in range(n)]
        for e in range(n)
    ]
    for a in range(n):
        for dd in range(a + 1, n):
            for b in range(n):
                for c in range(n):
                    res = zero
                    for e in range(n):
                        res = res + c_low[a][b][e] * raised[e][c][dd]
                        res = res - c_low[dd][b][e] * raised[e][c][a]
                    cert = checker.zero(res)
                    if not cert.zero:
                        return reports.from_zero(
                            "wdvv-associativity",
                            cert,
                            witness_prefix=f"indices ({a + 1},{b + 1},{c + 1},{dd + 1})",
                        )
    return Certificate("wdvv-associativity", reports.PASS, mode=checker.mode)


def check_quasihomogeneity(m: FrobeniusData) -> tuple[list[list[Q]], list[Q], Q]:
    """Verify the Euler scaling of the potential and of eta.

    L_E F - (3 - d) F must be exactly a polynomial A_ab t^a t^b / 2 +
    B_a t^a + C; returns (A, B, C).  Also verifies the constant-metric
    scaling K^T eta + eta K = (2 - d) eta, which pins the charge d.
    """
    n = m.n
    e_field = m.euler_field()
    lief = QPoly.zero(n)
    for a in range(n):
        lief = lief + e_field.components[a] * m.potential.diff(a)
    residual = lief - m.potential * (3 - m.d)
    extra = residual - residual.poly_part_degree_at_most(2)
    if not extra.is_zero():
        raise NotQuasihomogeneousError(
            f"scaling residual has terms beyond quadratic: {extra}"
        )
    a_mat = [[Q(0)] * n for _ in range(n)]
    b_vec = [Q(0)] * n
    c_val = residual.coefficient((0,) * n)
    for i in range(n):
        pows = [0] * n
        pows[i] = 1
        b_vec[i] = residual.coefficient(pows)
        pows[i] = 2
        a_mat[i][i] = 2 * residual.coefficient(pows)
        for j in range(i + 1, n):
            pows = [0] * n
            pows[i] = 1
            pows[j] = 1
            a_mat[i][j] = a_mat[j][i] = residual.coefficient(pows)
    k = m.euler_linear
    for i in range(n):
        for j in range(n):
            lhs = sum(k[s][i] * m.eta[s][j] + m.eta[i][s] * k[s][j] for s in range(n))
            if lhs != (2 - m.d) * m.eta[i][j]:
                raise NotQuasihomogeneousError(
                    f"eta scaling fails at entry ({i + 1},{j + 1}): "
                    f"{lhs} != (2-d) eta = {(2 - m.d) * m.eta[i][j]}"
                )
    return a_mat, b_vec, c_val


def intersection_form(m: FrobeniusData) -> ContraMetric:
    """g^{ab} = E^e c_e^{ab}, cross-checked against the Hessian identity

        g^{ab} = R^a_e F^{eb} + F^{ae} R^b_e + A^{ab}

    with R = (d-1)/2 I + dE and F^{ab} the eta-raised Hessian of F.
    """
    n = m.n
    sc = structure_constants(m)
    e_field = m.euler_field()
    zero = QPoly.zero(n)
    entries = [
        [
            _qsum([e_field.components[e] * sc.c_mixed[a][b][e] for e in range(n)], zero)
            for b in range(n)
        ]
        for a in range(n)
    ]
    for i in range(n):
        for j in range(i + 1, n):
            if not (entries[i][j] - entries[j][i]).is_zero():
                raise InternalCheckError("intersection form is not symmetric")

    a_mat, _b, _c = check_quasihomogeneity(m)
    r_mat = scaling_operator(m)
    hess = [[m.potential.diff(a).diff(b) for b in range(n)] for a in range(n)]
    inv = m.eta_inv
    hess_up = [
        [
            _qsum(
                [hess[l][mm] * (inv[a][l] * inv[b][mm]) for l in range(n) for mm in range(n)],
                zero,
            )
            for b in range(n)
        ]
        for a in range(n)
    ]
    a_up = [
        [sum(inv[a][l] * a_mat[l][mm] * inv[b][mm] for l in range(n) for mm in range(n)) for b in range(n)]
        for a in range(n)
    ]
    for a in range(n):
        for b in range(n):
            second = QPoly.const(n, a_up[a][b])
            for e in range(n):
                second = second + hess_up[e][b] * r_mat[a][e] + hess_up[a][e] * r_mat[b][e]
            if not (entries[a][b] - second).is_zero():
                raise InternalCheckError(
                    f"Hessian form of the intersection form disagrees at entry "
                    f"({a + 1},{b + 1}): {entries[a][b] - second}"
                )
    return ContraMetric(entries)


def scaling_operator(m: FrobeniusData) -> list[list[Q]]:
    """R^a_b = (d-1)/2 delta + d_b E^a, as the matrix R[a][b]."""
    n = m.n
    return [
        [m.euler_linear[a][b] + (Q(m.d - 1) / 2 if a == b else 0) for b in range(n)]
        for a in range(n)
    ]


def pencil_gamma(m: FrobeniusData, checker: Checker = EXACT) -> Connection:
    """The polynomial connection G_c^{ab} = c^{ae}_c R_e^b of the pencil
    (g - lam * eta), verified to satisfy symmetry and metricity for every
    lam (the lam^0 and lam^1 coefficient identities)."""
    n = m.n
    sc = structure_constants(m)
    r_mat = scaling_operator(m)
    zero = QPoly.zero(n)
    gamma_poly = [
        [
            [_qsum([sc.c_mixed[a][e][c] * r_mat[b][e] for e in range(n)], zero) for b in range(n)]
            for a in range(n)
        ]
        for c in range(n)
    ]
    g = intersection_form(m)
    eta_up = m.eta_metric()
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                res = gamma_poly[k][i][j] + gamma_poly[k][j][i] - g.g[i][j].diff(k)
                if not checker.zero(res).zero:
                    raise InternalCheckError(
                        f"pencil connection fails metricity at ({k + 1},{i + 1},{j + 1})"
                    )
    for gmat, tag in ((g.g, "lam^0"), (eta_up.g, "lam^1")):
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    res = zero
                    for s in range(n):
                        res = res + gmat[i][s] * gamma_poly[s][j][k] - gmat[j][s] * gamma_poly[s][i][k]
                    if not checker.zero(res).zero:
                        raise InternalCheckError(
                            f"pencil connection fails symmetry ({tag}) at "
                            f"({i + 1},{j + 1},{k + 1})"
                        )
    return Connection([[[RatFunc(x) for x in row] for row in layer] for layer in gamma_poly])


def to_flat_pencil(m: FrobeniusData, checker: Checker = EXACT) -> PencilData:
    """The quasihomogeneous flat pencil (g, eta) with tau = eta_{u,a} t^a.

    Preconditions: the WDVV and quasihomogeneity certificates must pass;
    their failures propagate as errors.
    """
    wdvv = check_wdvv(m, checker)
    if not wdvv.passed:
        raise AssociativityError(f"associativity fails: {wdvv.witness}")
    check_quasihomogeneity(m)
    g = intersection_form(m)
    tau = QPoly.zero(m.n)
    for a in range(m.n):
        if m.eta[m.unity][a]:
            tau = tau + QPoly.var(m.n, a) * m.eta[m.unity][a]
    return PencilData(g1=g, g2=m.eta_metric(), tau=tau, d=m.d)


def unity_scaling_certificate(m: FrobeniusData) -> Certificate:
    """L_E e = -e, a consequence of the Euler scaling of the multiplication."""
    bracket = lie_bracket(m.euler_field(), m.unity_field())
    for i in range(m.n):
        res = bracket.components[i] + m.unity_field().components[i]
        if not res.is_zero():
            return Certificate(
                "unity-euler-weight", reports.FAIL, witness=f"component {i + 1}: {res}"
            )
    return Certificate("unity-euler-weight", reports.PASS)

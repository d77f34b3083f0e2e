"""Contravariant metrics, their Levi-Civita connections, curvature, and the
flat-pencil / quasihomogeneity certificates.

All geometric objects are written with upper (contravariant) indices.  A
metric is a symmetric matrix g^{ij} of quasi-polynomials, invertible on the
dense subset where det(g) is nonzero.  Its connection coefficients G_k^{ij}
are determined by the two linear conditions

    symmetry:    g^{is} G_s^{jk} = g^{js} G_s^{ik}
    metricity:   G_k^{ij} + G_k^{ji} = d g^{ij} / dx^k

and are computed here from the classical Christoffel symbols of the inverse
metric, then re-verified against the two conditions.  Curvature is

    R_l^{ijk} = g^{is} (d_s G_l^{jk} - d_l G_s^{jk})
                + G_s^{ik} G_l^{sj} - G_s^{ij} G_l^{sk},

which equals the classical curvature tensor with two indices raised,
g^{is} g^{jt} R^k_{tls}, and therefore vanishes identically iff the metric
is flat.  Identities involving denominators are certified as numerator
identities, which is the correct globalization from the dense invertibility
subset.

A pencil (g1, g2) is *flat* when det(g1 - lam*g2) is not identically zero,
G1 - lam*G2 is the connection of g1 - lam*g2 for every lam, and the pencil
curvature vanishes identically in lam.  The lam-dependence is handled by
adjoining lam as an extra polynomial variable and requiring every
lam-coefficient tensor to vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import reports
from .errors import DegreeInferenceError, InternalCheckError, SingularMetricError
from .identity import Checker, EXACT
from .linalg import sym_adjugate, sym_det
from .qpoly import QPoly, RatFunc
from .reports import Certificate, Report

Q = Fraction


class ContraMetric:
    """Symmetric contravariant metric with a cached determinant."""

    def __init__(self, entries: list[list[QPoly]]):
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise ValueError("metric matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if not (entries[i][j] - entries[j][i]).is_zero():
                    raise ValueError(f"metric not symmetric at entry ({i + 1},{j + 1})")
        self.n = n
        self.g = entries
        self._det: QPoly | None = None

    @classmethod
    def constant(cls, matrix: list[list[Q]], nvars: int | None = None) -> "ContraMetric":
        n = len(matrix)
        nvars = n if nvars is None else nvars
        return cls([[QPoly.const(nvars, x) for x in row] for row in matrix])

    @property
    def nvars(self) -> int:
        return self.g[0][0].nvars

    @property
    def det(self) -> QPoly:
        if self._det is None:
            self._det = sym_det(self.g, QPoly.zero(self.nvars))
        return self._det

    def is_degenerate(self) -> bool:
        return self.det.is_zero()

    def entry(self, i: int, j: int) -> QPoly:
        return self.g[i][j]

    def constant_entries(self) -> list[list[Q]]:
        """The entries as rationals; raises if any entry is non-constant."""
        return [[x.constant_value() for x in row] for row in self.g]

    def is_constant(self) -> bool:
        return all(x.is_constant() for row in self.g for x in row)

    def combine(self, other: "ContraMetric", lam: Q) -> "ContraMetric":
        """The pencil member g - lam * other."""
        return ContraMetric(
            [
                [self.g[i][j] - QPoly.const(self.nvars, lam) * other.g[i][j] for j in range(self.n)]
                for i in range(self.n)
            ]
        )


class Connection:
    """Contravariant connection coefficients; gamma[k][i][j] = G_k^{ij}."""

    def __init__(self, gamma: list[list[list[RatFunc]]]):
        self.gamma = gamma
        self.n = len(gamma)

    def entry(self, k: int, i: int, j: int) -> RatFunc:
        return self.gamma[k][i][j]

    def combine(self, other: "Connection", lam: Q) -> "Connection":
        n = self.n
        return Connection(
            [
                [[self.gamma[k][i][j] - other.gamma[k][i][j] * lam for j in range(n)] for i in range(n)]
                for k in range(n)
            ]
        )

    def is_zero(self) -> bool:
        return all(x.is_zero() for k in self.gamma for row in k for x in row)

    def as_poly_entries(self) -> list[list[list[QPoly]]]:
        """Entries as quasi-polynomials; raises OutOfRingError otherwise."""
        return [[[x.as_poly() for x in row] for row in k] for k in self.gamma]


class Curvature:
    """Curvature tensor; r[l][i][j][k] = R_l^{ijk}."""

    def __init__(self, r: list[list[list[list[RatFunc]]]]):
        self.r = r
        self.n = len(r)

    def entries(self):
        for l in range(self.n):
            for i in range(self.n):
                for j in range(self.n):
                    for k in range(self.n):
                        yield (l, i, j, k), self.r[l][i][j][k]

    def is_zero(self) -> bool:
        return all(val.is_zero() for _idx, val in self.entries())


@dataclass
class VectorField:
    components: list[QPoly]

    @property
    def n(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.n == other.n and all(
            (a - b).is_zero() for a, b in zip(self.components, other.components)
        )


@dataclass
class PencilData:
    """A pair of metrics, optionally with the scaling potential and degree."""

    g1: ContraMetric
    g2: ContraMetric
    tau: QPoly | None = None
    d: Q | None = None

    @property
    def n(self) -> int:
        return self.g1.n


@dataclass
class QuasihomReport(Report):
    """Scaling data (E, e, d) with per-identity certificates."""

    E: VectorField | None = None
    e: VectorField | None = None
    d: Q | None = None


# ---------------------------------------------------------------------------
# Connection and curvature
# ---------------------------------------------------------------------------


def levi_civita(g: ContraMetric, checker: Checker = EXACT) -> Connection:
    """The unique contravariant connection satisfying symmetry and metricity.

    Computed through the inverse metric (adjugate over determinant) and the
    classical Christoffel symbols, then verified against the two defining
    linear conditions before returning.
    """
    n = g.n
    nvars = g.nvars
    det = g.det
    if det.is_zero():
        raise SingularMetricError("metric determinant is identically zero")
    det_rf = RatFunc(det)
    adj = sym_adjugate(g.g, QPoly.zero(nvars))
    low = [[RatFunc(adj[i][j]) / det_rf for j in range(n)] for i in range(n)]
    dlow = [[[low[i][j].diff(k) for k in range(nvars)] for j in range(n)] for i in range(n)]

    # Christoffel symbols of the covariant metric: C[k][i][j] = G^k_{ij}.
    chris = [
        [
            [
                _half_sum(
                    [
                        g.g[k][l] * (dlow[l][j][i] + dlow[i][l][j] - dlow[i][j][l])
                        for l in range(n)
                    ]
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        for k in range(n)
    ]
    gamma = [
        [
            [
                -_rf_sum([chris[j][s][k] * g.g[i][s] for s in range(n)], nvars)
                for j in range(n)
            ]
            for i in range(n)
        ]
        for k in range(n)
    ]
    conn = Connection(gamma)

    for idx, res in symmetry_residuals(g.g, conn.gamma, n):
        if not checker.zero(res).zero:
            raise InternalCheckError(f"connection symmetry residual nonzero at {_idx1(idx)}")
    for idx, res in metricity_residuals(g.g, conn.gamma, n, nvars):
        if not checker.zero(res).zero:
            raise InternalCheckError(f"connection metricity residual nonzero at {_idx1(idx)}")
    return conn


def _half_sum(values: list[RatFunc]) -> RatFunc:
    total = values[0]
    for v in values[1:]:
        total = total + v
    return total * Q(1, 2)


def _rf_sum(values: list[RatFunc], nvars: int) -> RatFunc:
    total = RatFunc(QPoly.zero(nvars))
    for v in values:
        total = total + v
    return total


def symmetry_residuals(gmat, gamma, n: int):
    """Residuals of g^{is} G_s^{jk} = g^{js} G_s^{ik} over i < j, all k."""
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                res = gmat[i][0] * gamma[0][j][k] - gmat[j][0] * gamma[0][i][k]
                for s in range(1, n):
                    res = res + (gmat[i][s] * gamma[s][j][k] - gmat[j][s] * gamma[s][i][k])
                yield (i, j, k), res


def metricity_residuals(gmat, gamma, n: int, ncoords: int):
    """Residuals of G_k^{ij} + G_k^{ji} = d g^{ij}/dx^k over i <= j, all k."""
    for i in range(n):
        for j in range(i, n):
            for k in range(ncoords):
                yield (k, i, j), gamma[k][i][j] + gamma[k][j][i] - gmat[i][j].diff(k)


def curvature(g: ContraMetric, conn: Connection) -> Curvature:
    """Curvature of a metric/connection pair, as exact rational functions."""
    curv = _curvature_entries(g.g, conn.gamma, g.n, g.nvars)
    for l in range(g.n):
        for i in range(g.n):
            for j in range(g.n):
                for k in range(j + 1, g.n):
                    if not (curv[l][i][j][k] + curv[l][i][k][j]).is_zero():
                        raise InternalCheckError(
                            "curvature antisymmetry failed at "
                            f"R_{l + 1}^{{{i + 1}{j + 1}{k + 1}}}; connection "
                            "does not satisfy metricity"
                        )
    return Curvature(curv)


def _curvature_entries(gmat, gamma, n: int, ncoords: int):
    dgamma = [
        [[[gamma[l][j][k].diff(s) for s in range(ncoords)] for k in range(n)] for j in range(n)]
        for l in range(n)
    ]
    out = []
    for l in range(n):
        rows_i = []
        for i in range(n):
            rows_j = []
            for j in range(n):
                rows_k = []
                for k in range(n):
                    acc = gmat[i][0] * (dgamma[l][j][k][0] - dgamma[0][j][k][l])
                    for s in range(1, n):
                        acc = acc + gmat[i][s] * (dgamma[l][j][k][s] - dgamma[s][j][k][l])
                    for s in range(n):
                        acc = acc + (gamma[s][i][k] * gamma[l][s][j] - gamma[s][i][j] * gamma[l][s][k])
                    rows_k.append(acc)
                rows_j.append(rows_k)
            rows_i.append(rows_j)
        out.append(rows_i)
    return out


def is_flat(g: ContraMetric, checker: Checker = EXACT) -> Certificate:
    """Certifies that the curvature of (g, levi_civita(g)) vanishes."""
    conn = levi_civita(g, checker)
    curv = curvature(g, conn)
    for (l, i, j, k), val in curv.entries():
        cert = checker.zero(val)
        if not cert.zero:
            return reports.from_zero(
                "flatness", cert, witness_prefix=f"curvature entry {_idx1((l, i, j, k))}"
            )
    return Certificate("flatness", reports.PASS, mode=checker.mode)


# ---------------------------------------------------------------------------
# Lie derivatives
# ---------------------------------------------------------------------------


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """[X, Y]^i = X^s d_s Y^i - Y^s d_s X^i."""
    n = x.n
    comps = []
    for i in range(n):
        acc = QPoly.zero(x.components[0].nvars)
        for s in range(n):
            acc = acc + x.components[s] * y.components[i].diff(s)
            acc = acc - y.components[s] * x.components[i].diff(s)
        comps.append(acc)
    return VectorField(comps)


def lie_derivative_metric(x: VectorField, g: ContraMetric) -> list[list[QPoly]]:
    """(L_X g)^{ij} = X^s d_s g^{ij} - g^{sj} d_s X^i - g^{is} d_s X^j."""
    n = g.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = QPoly.zero(g.nvars)
            for s in range(n):
                acc = acc + x.components[s] * g.g[i][j].diff(s)
                acc = acc - g.g[s][j] * x.components[i].diff(s)
                acc = acc - g.g[i][s] * x.components[j].diff(s)
            row.append(acc)
        out.append(row)
    return out


def lie_derivative_connection(x: VectorField, tensor: list[list[list]]) -> list[list[list]]:
    """Lie derivative of a (1,2) tensor D_k^{ij} along X.

    Entries may be QPoly or RatFunc; the sign pattern is minus for each
    upper index, plus for the lower one.
    """
    n = len(tensor)
    out = []
    for k in range(n):
        rows_i = []
        for i in range(n):
            rows_j = []
            for j in range(n):
                acc = tensor[k][i][j].diff(0) * x.components[0]
                for s in range(1, n):
                    acc = acc + tensor[k][i][j].diff(s) * x.components[s]
                for s in range(n):
                    acc = acc - tensor[k][s][j] * x.components[i].diff(s)
                    acc = acc - tensor[k][i][s] * x.components[j].diff(s)
                    acc = acc + tensor[s][i][j] * x.components[k].diff(s)
                rows_j.append(acc)
            rows_i.append(rows_j)
        out.append(rows_i)
    return out


# ---------------------------------------------------------------------------
# Pencil certification
# ---------------------------------------------------------------------------


def check_flat_pencil(p: PencilData, checker: Checker = EXACT) -> Report:
    """Certify the three flat-pencil conditions.

    The parameter lam is adjoined as one extra polynomial variable; the
    combined connection G1 - lam*G2 is formed from the two connections
    computed separately, so its linearity in lam is a certified claim.
    The residual of each condition is expanded in powers of lam and every
    coefficient tensor must vanish identically.
    """
    n = p.n
    nvars = p.g1.nvars
    if p.g2.det.is_zero():
        raise SingularMetricError("second metric is degenerate")
    if p.g1.det.is_zero():
        raise SingularMetricError("first metric is degenerate")
    conn1 = levi_civita(p.g1, checker)
    conn2 = levi_civita(p.g2, checker)

    big = nvars + 1  # trailing variable is lam
    lam = RatFunc(QPoly.var(big, nvars))
    g_l = [
        [RatFunc(p.g1.g[i][j].lift(big)) - lam * p.g2.g[i][j].lift(big) for j in range(n)]
        for i in range(n)
    ]
    gamma_l = [
        [
            [conn1.gamma[k][i][j].lift(big) - lam * conn2.gamma[k][i][j].lift(big) for j in range(n)]
            for i in range(n)
        ]
        for k in range(n)
    ]

    report = Report()

    det_l = sym_det(
        [[p.g1.g[i][j].lift(big) - QPoly.var(big, nvars) * p.g2.g[i][j].lift(big) for j in range(n)] for i in range(n)],
        QPoly.zero(big),
    )
    if det_l.is_zero():
        report.add(Certificate("pencil-determinant", reports.FAIL, witness="det(g1 - lam*g2) is identically zero"))
    else:
        report.add(Certificate("pencil-determinant", reports.PASS))

    report.add(
        _lam_residual_certificate(
            "pencil-connection-symmetry",
            symmetry_residuals(g_l, gamma_l, n),
            nvars,
            checker,
        )
    )
    report.add(
        _lam_residual_certificate(
            "pencil-connection-metricity",
            metricity_residuals(g_l, gamma_l, n, nvars),
            nvars,
            checker,
        )
    )

    curv = _curvature_entries(g_l, gamma_l, n, nvars)
    report.add(
        _lam_residual_certificate(
            "pencil-curvature",
            (((l, i, j, k), curv[l][i][j][k]) for l in range(n) for i in range(n) for j in range(n) for k in range(n)),
            nvars,
            checker,
        )
    )
    return report


def _lam_residual_certificate(name: str, residuals, lam_axis: int, checker: Checker) -> Certificate:
    for idx, res in residuals:
        num = res.num if isinstance(res, RatFunc) else res
        if num.is_zero():
            continue
        for power, coeff in sorted(num.coeffs_by_power(lam_axis).items()):
            cert = checker.zero(coeff)
            if not cert.zero:
                return reports.from_zero(
                    name, cert, witness_prefix=f"entry {_idx1(idx)}, lam^{power}"
                )
    return Certificate(name, reports.PASS, mode=checker.mode)


def euler_fields(p: PencilData) -> tuple[VectorField, VectorField]:
    """E = g1 grad(tau), e = g2 grad(tau)."""
    if p.tau is None:
        raise ValueError("pencil carries no scaling potential tau")
    n = p.n
    grad = [p.tau.diff(s) for s in range(n)]
    e_big = VectorField([_poly_dot(p.g1.g[i], grad) for i in range(n)])
    e_small = VectorField([_poly_dot(p.g2.g[i], grad) for i in range(n)])
    return e_big, e_small


def _poly_dot(row: list[QPoly], vec: list[QPoly]) -> QPoly:
    acc = row[0] * vec[0]
    for a, b in zip(row[1:], vec[1:]):
        acc = acc + a * b
    return acc


def infer_degree(g1: ContraMetric, e_big: VectorField) -> Q:
    """Infer d from L_E g1 = (d-1) g1; raises when no constant ratio fits."""
    lie = lie_derivative_metric(e_big, g1)
    n = g1.n
    anchor = None
    for i in range(n):
        for j in range(n):
            if not g1.g[i][j].is_zero():
                anchor = (i, j)
                break
        if anchor:
            break
    if anchor is None:
        raise DegreeInferenceError("first metric is zero; no scaling degree exists")
    i, j = anchor
    ratio = RatFunc(lie[i][j], g1.g[i][j])
    if not (ratio.is_polynomial() and ratio.as_poly().is_constant()):
        raise DegreeInferenceError(
            f"scaling ratio at entry {_idx1((i, j))} is not a constant: {ratio}"
        )
    r = ratio.as_poly().constant_value()
    for a in range(n):
        for b in range(n):
            if not (lie[a][b] - g1.g[a][b] * r).is_zero():
                raise DegreeInferenceError(
                    f"no rational degree satisfies the scaling identity; residual at "
                    f"entry {_idx1((a, b))}: {lie[a][b] - g1.g[a][b] * r}"
                )
    return r + 1


def check_quasihomogeneous(p: PencilData, checker: Checker = EXACT) -> QuasihomReport:
    """Derive E, e from tau and certify the four scaling identities:

        [e, E] = e
        L_E g1 = (d - 1) g1
        L_e g1 = g2
        L_e g2 = 0
    """
    e_big, e_small = euler_fields(p)
    d = p.d if p.d is not None else infer_degree(p.g1, e_big)
    report = QuasihomReport(E=e_big, e=e_small, d=d)

    bracket = lie_bracket(e_small, e_big)
    report.add(
        _tensor_certificate(
            "unity-commutator",
            [((i,), bracket.components[i] - e_small.components[i]) for i in range(p.n)],
            checker,
        )
    )
    lie1 = lie_derivative_metric(e_big, p.g1)
    report.add(
        _tensor_certificate(
            "euler-scaling-first-metric",
            [((i, j), lie1[i][j] - p.g1.g[i][j] * (d - 1)) for i in range(p.n) for j in range(p.n)],
            checker,
        )
    )
    lie2 = lie_derivative_metric(e_small, p.g1)
    report.add(
        _tensor_certificate(
            "unity-flow-first-metric",
            [((i, j), lie2[i][j] - p.g2.g[i][j]) for i in range(p.n) for j in range(p.n)],
            checker,
        )
    )
    lie3 = lie_derivative_metric(e_small, p.g2)
    report.add(
        _tensor_certificate(
            "unity-flow-second-metric",
            [((i, j), lie3[i][j]) for i in range(p.n) for j in range(p.n)],
            checker,
        )
    )
    return report


def _tensor_certificate(name: str, residuals, checker: Checker) -> Certificate:
    for idx, res in residuals:
        cert = checker.zero(res)
        if not cert.zero:
            return reports.from_zero(name, cert, witness_prefix=f"entry {_idx1(idx)}")
    return Certificate(name, reports.PASS, mode=checker.mode)


def _idx1(idx: tuple[int, ...]) -> str:
    return "(" + ",".join(str(i + 1) for i in idx) + ")"

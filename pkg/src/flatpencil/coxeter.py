"""Type-A Coxeter orbit spaces: invariant generators, the orbit-space
metric, the unity-flow (Saito) metric, flat generators, and the certified
quasihomogeneous pencil of degree d = 1 - 2/h.

The group A_n acts on the zero-sum hyperplane H of R^{n+1} by permuting
the n+1 ambient coordinates y_1..y_{n+1}.  The chart used here is
(y_1..y_n) with y_{n+1} = -(y_1 + ... + y_n); the invariant generators are
the restricted power sums

    p_1 = P_{h}, p_2 = P_{h-1}, ..., p_n = P_2,      h = n + 1,

ordered by decreasing degree, so deg p_1 = h.  The Euclidean pairing of
invariant differentials reduces in this chart to

    (dp, dq) = sum_i d_i p d_i q - (sum_i d_i p)(sum_j d_j q) / (n+1),

which is exact over Q (no orthonormal basis of H is ever needed).  Every
W-invariant quantity is rewritten as a polynomial in the generators by an
exact linear solve in the graded invariant space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import reports
from .errors import GradingError, InternalCheckError, RewriteError
from .geometry import (
    ContraMetric,
    PencilData,
    VectorField,
    check_flat_pencil,
    check_quasihomogeneous,
    infer_degree,
    is_flat,
    levi_civita,
)
from .identity import Checker, EXACT
from .linalg import exact_linsolve, nullspace, sym_det
from .qpoly import QPoly
from .reconstruction import ReconstructionResult, reconstruct_frobenius
from .reports import Certificate, Report
from .errors import NoSolutionError, UnderdeterminedError

Q = Fraction


@dataclass
class OrbitChart:
    """Invariant-theoretic data of A_rank in the zero-sum chart."""

    rank: int
    h: int
    degrees: list[int]  # decreasing, degrees[0] = h
    polys: list[QPoly]  # generators as polynomials in y_1..y_rank

    def __post_init__(self) -> None:
        jac = [[p.diff(i) for i in range(self.rank)] for p in self.polys]
        det = sym_det(jac, QPoly.zero(self.rank))
        if det.is_zero():
            raise InternalCheckError("invariant generators are not independent")


@dataclass
class CoxeterPencil:
    chart: OrbitChart
    pencil: PencilData  # in the normalized flat generators
    flat_gens: list[QPoly]  # t^a as polynomials in p_1..p_n
    p_in_t: list[QPoly]  # inverse generator map
    unity_scale: Q  # e = (1/scale) d/dp_1 relative to the raw chart
    d: Q
    report: Report = field(default_factory=Report)


def build_orbit_chart(rank: int) -> OrbitChart:
    """Power-sum generators of A_rank on the zero-sum hyperplane."""
    if not 1 <= rank <= 4:
        raise ValueError(f"rank {rank} out of supported range 1..4")
    h = rank + 1
    degrees = list(range(h, 1, -1))
    polys = [_power_sum(rank, k) for k in degrees]
    return OrbitChart(rank=rank, h=h, degrees=degrees, polys=polys)


def _power_sum(rank: int, k: int) -> QPoly:
    last = QPoly.zero(rank)
    for i in range(rank):
        last = last - QPoly.var(rank, i)
    total = last**k
    for i in range(rank):
        total = total + QPoly.var(rank, i) ** k
    return total


def chart_pairing(chart: OrbitChart, a: QPoly, b: QPoly) -> QPoly:
    """(da, db) for the Euclidean structure of the hyperplane, in chart
    coordinates."""
    rank = chart.rank
    da = [a.diff(i) for i in range(rank)]
    db = [b.diff(i) for i in range(rank)]
    total = QPoly.zero(rank)
    sum_a = QPoly.zero(rank)
    sum_b = QPoly.zero(rank)
    for i in range(rank):
        total = total + da[i] * db[i]
        sum_a = sum_a + da[i]
        sum_b = sum_b + db[i]
    return total - sum_a * sum_b * Q(1, rank + 1)


def weighted_monomials(degrees: list[int], target: int) -> list[tuple[int, ...]]:
    """Exponent vectors m with sum m_a * degrees[a] == target."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], axis: int, remaining: int) -> None:
        if axis == len(degrees):
            if remaining == 0:
                out.append(tuple(prefix))
            return
        step = degrees[axis]
        for m in range(remaining // step + 1):
            rec(prefix + [m], axis + 1, remaining - m * step)

    rec([], 0, target)
    return out


def rewrite_in_generators(
    value: QPoly, gens: list[QPoly], degrees: list[int]
) -> QPoly:
    """Express an invariant chart polynomial in the generators.

    Solves the exact linear system matching coefficients degree by degree;
    inconsistency means the input was not in the generated subring.
    """
    n = len(gens)
    rank = value.nvars
    pieces: dict[int, QPoly] = {}
    for (pows, efac), coeff in value.terms.items():
        if efac:
            raise RewriteError("exponential terms cannot be invariant polynomials")
        deg = sum(pows)
        pieces.setdefault(deg, QPoly.zero(rank))
        pieces[deg] = pieces[deg] + QPoly(rank, {(pows, efac): coeff})

    result = QPoly.zero(n)
    power_cache: dict[tuple[int, int], QPoly] = {}

    def gen_power(a: int, m: int) -> QPoly:
        got = power_cache.get((a, m))
        if got is None:
            got = gens[a] ** m
            power_cache[(a, m)] = got
        return got

    for deg, piece in sorted(pieces.items()):
        if piece.is_zero():
            continue
        if deg == 0:
            result = result + QPoly.const(n, piece.constant_value())
            continue
        candidates = weighted_monomials(degrees, deg)
        if not candidates:
            raise RewriteError(f"no invariant monomials of degree {deg}")
        columns = []
        for m in candidates:
            prod = QPoly.const(rank, 1)
            for a, e in enumerate(m):
                if e:
                    prod = prod * gen_power(a, e)
            columns.append(prod)
        keys = sorted({k for col in columns for k in col.terms} | set(piece.terms))
        a_mat = [[col.terms.get(k, Q(0)) for col in columns] for k in keys]
        b_vec = [piece.terms.get(k, Q(0)) for k in keys]
        try:
            sol = exact_linsolve(a_mat, b_vec)
        except (NoSolutionError, UnderdeterminedError) as exc:
            raise RewriteError(f"degree-{deg} component is not invariant: {exc}") from exc
        for coeff, m in zip(sol, candidates):
            if coeff:
                key = (m, ())
                result = result + QPoly(n, {key: coeff})
    return result


def arnold_metric(chart: OrbitChart) -> ContraMetric:
    """Pairing of the generator differentials, rewritten in the generators."""
    n = chart.rank
    entries = [
        [
            rewrite_in_generators(
                chart_pairing(chart, chart.polys[a], chart.polys[b]),
                chart.polys,
                chart.degrees,
            )
            for b in range(n)
        ]
        for a in range(n)
    ]
    return ContraMetric(entries)


def fields_and_tau(chart: OrbitChart) -> tuple[VectorField, VectorField, QPoly]:
    """Scaling field E = sum (deg_a/h) p_a d/dp_a, unity e = d/dp_1, and the
    quadratic invariant tau = (x, x)/(2h) written in the generators."""
    n = chart.rank
    h = chart.h
    e_big = VectorField(
        [QPoly.var(n, a) * Q(chart.degrees[a], h) for a in range(n)]
    )
    e_unit = VectorField(
        [QPoly.const(n, 1 if a == 0 else 0) for a in range(n)]
    )
    squared = _power_sum(chart.rank, 2)
    tau = rewrite_in_generators(squared, chart.polys, chart.degrees) * Q(1, 2 * h)
    return e_big, e_unit, tau


def saito_metric(chart: OrbitChart, g1: ContraMetric, e: VectorField, checker: Checker = EXACT) -> ContraMetric:
    """Unity-flow metric: the derivative of the orbit metric along e.

    Certified flat with constant nonzero determinant.
    """
    for a, comp in enumerate(e.components):
        if not (comp - (1 if a == 0 else 0)).is_zero():
            raise ValueError("unity field must be d/dp_1 in the chart")
    n = chart.rank
    entries = [[g1.g[a][b].diff(0) for b in range(n)] for a in range(n)]
    g2 = ContraMetric(entries)
    if not g2.det.is_constant() or g2.det.is_zero():
        raise InternalCheckError(f"unity-flow metric determinant is not a nonzero constant: {g2.det}")
    cert = is_flat(g2, checker)
    if not cert.passed:
        raise InternalCheckError(f"unity-flow metric is not flat: {cert.witness}")
    return g2


def saito_flat_coordinates(chart: OrbitChart, g2: ContraMetric) -> list[QPoly]:
    """Graded flat generators of the unity-flow metric.

    For each generator degree D the covariant-constancy system for the
    differential of a weighted-degree-D polynomial is a finite exact linear
    solve; type-A degrees are distinct so each solution space is a line,
    normalized so the coefficient of the pure generator p_a is 1.
    """
    n = chart.rank
    conn = levi_civita(g2)
    gamma = conn.as_poly_entries()
    out = []
    for a, deg in enumerate(chart.degrees):
        candidates = weighted_monomials(chart.degrees, deg)
        basis = []
        for m in candidates:
            prod = QPoly.const(n, 1)
            for b, e in enumerate(m):
                if e:
                    prod = prod * QPoly.var(n, b) ** e
            basis.append(prod)
        rows_keys = set()
        images = []
        for mono in basis:
            per_ij = []
            for i in range(n):
                for j in range(n):
                    acc = QPoly.zero(n)
                    for s in range(n):
                        acc = acc + g2.g[i][s] * mono.diff(s).diff(j)
                        acc = acc + gamma[j][i][s] * mono.diff(s)
                    per_ij.append(acc)
                    rows_keys.update(acc.terms)
            images.append(per_ij)
        keys = sorted(rows_keys)
        a_mat = [[Q(0)] * len(basis)]  # harmless row; keeps the shape when
        for pos in range(n * n):       # every residual vanishes identically
            for key in keys:
                a_mat.append([images[c][pos].terms.get(key, Q(0)) for c in range(len(basis))])
        space = nullspace(a_mat)
        if len(space) != 1:
            raise GradingError(
                f"flat generator of degree {deg}: solution space has dimension {len(space)}"
            )
        vec = space[0]
        pure = candidates.index(tuple(1 if b == a else 0 for b in range(n)))
        if vec[pure] == 0:
            raise GradingError(f"flat generator of degree {deg} misses the generator direction")
        scale = 1 / vec[pure]
        t_poly = QPoly.zero(n)
        for coeff, mono in zip(vec, basis):
            if coeff:
                t_poly = t_poly + mono * (coeff * scale)
        out.append(t_poly)
    return out


def invert_graded_map(chart: OrbitChart, t_polys: list[QPoly]) -> list[QPoly]:
    """Express the p generators in the flat generators t (triangular in the
    grading: each t^a is c_a p_a plus terms in strictly lower-degree p's)."""
    n = chart.rank
    images: list[QPoly | None] = [None] * n
    for a in reversed(range(n)):
        pure_key = (tuple(1 if b == a else 0 for b in range(n)), ())
        coeff = t_polys[a].terms.get(pure_key)
        if not coeff:
            raise GradingError(f"flat generator {a + 1} is not triangular in the grading")
        rest = QPoly(n, {k: v for k, v in t_polys[a].terms.items() if k != pure_key})
        if not rest.is_zero():
            partial = [images[b] if images[b] is not None else QPoly.zero(n) for b in range(n)]
            for (pows, _e), _v in rest.terms.items():
                if any(pows[b] and images[b] is None for b in range(n)):
                    raise GradingError("flat generator uses a not-yet-inverted generator")
            rest = rest.substitute(partial)
        images[a] = (QPoly.var(n, a) - rest) * (1 / coeff)
    for a in range(n):
        if not (t_polys[a].substitute(images) - QPoly.var(n, a)).is_zero():
            raise InternalCheckError("generator map inversion failed to verify")
    return images


def coxeter_pencil(rank: int, checker: Checker = EXACT) -> tuple[CoxeterPencil, ReconstructionResult]:
    """Assemble and certify the orbit-space pencil in normalized flat
    generators, then run the full inverse construction on it."""
    chart = build_orbit_chart(rank)
    n = chart.rank
    h = chart.h
    report = Report()

    g1_p = arnold_metric(chart)
    e_big_p, e_unit_p, tau_p = fields_and_tau(chart)
    g2_p = saito_metric(chart, g1_p, e_unit_p, checker)
    report.add(Certificate("saito-metric-flat", reports.PASS, mode=checker.mode))

    # Guard: tau raised by the unity-flow metric is the raw unity itself,
    # which is what makes the later global rescale consistent.
    for a in range(n):
        raised = QPoly.zero(n)
        for s in range(n):
            raised = raised + g2_p.g[a][s] * tau_p.diff(s)
        if not (raised - (1 if a == 0 else 0)).is_zero():
            raise InternalCheckError(
                f"unity-flow raise of tau is not d/dp_1 (component {a + 1}: {raised})"
            )
    report.add(Certificate("unity-from-tau", reports.PASS))

    t_polys = saito_flat_coordinates(chart, g2_p)
    # Pin the quadratic flat generator to tau itself.
    tau_pure = tau_p.terms.get((tuple(1 if b == n - 1 else 0 for b in range(n)), ()))
    if tau_pure is None:
        raise InternalCheckError("tau does not involve the quadratic generator")
    t_polys[n - 1] = tau_p

    # Unity scale: e(t^1) in the chart; the unity-flow data is rescaled so
    # the unity becomes the unit vector along the first flat generator.
    kappa = t_polys[0].diff(0)
    for a in range(1, n):
        if not t_polys[a].diff(0).is_zero():
            raise InternalCheckError("lower-degree flat generator depends on p_1")
    if not kappa.is_constant() or kappa.is_zero():
        raise InternalCheckError("unity pairing with the top flat generator is not constant")
    kappa_val = kappa.constant_value()
    g2_p = ContraMetric([[g2_p.g[i][j] * (1 / kappa_val) for j in range(n)] for i in range(n)])

    # Everything is now rewritten in the flat generators via the chart.
    t_in_y = [t.substitute(chart.polys) for t in t_polys]
    t_degrees = chart.degrees
    p_in_t = invert_graded_map(chart, t_polys)

    def to_t(value_y: QPoly) -> QPoly:
        return rewrite_in_generators(value_y, t_in_y, t_degrees)

    g1_t = ContraMetric(
        [[to_t(chart_pairing(chart, t_in_y[a], t_in_y[b])) for b in range(n)] for a in range(n)]
    )
    # Unity-flow metric in flat generators: transform g2_p through the
    # generator change (Jacobian is polynomial, result must be constant).
    jac = [[t_polys[a].diff(b) for b in range(n)] for a in range(n)]
    eta_entries = []
    for a in range(n):
        row = []
        for b in range(n):
            acc = QPoly.zero(n)
            for i in range(n):
                for j in range(n):
                    acc = acc + jac[a][i] * g2_p.g[i][j] * jac[b][j]
            acc = acc.substitute(p_in_t)
            if not acc.is_constant():
                raise InternalCheckError(
                    f"unity-flow metric is not constant in flat generators at ({a + 1},{b + 1})"
                )
            row.append(acc)
        eta_entries.append(row)
    eta = ContraMetric(eta_entries)

    tau_t = QPoly.var(n, n - 1)
    d = 1 - Q(2, h)
    pencil = PencilData(g1=g1_t, g2=eta, tau=tau_t, d=d)

    inferred = infer_degree(g1_t, VectorField([QPoly.var(n, a) * Q(t_degrees[a], h) for a in range(n)]))
    report.add(
        Certificate(
            "coxeter-degree",
            reports.PASS if inferred == d else reports.FAIL,
            witness=None if inferred == d else f"inferred {inferred}, expected {d}",
        )
    )

    for cert in check_flat_pencil(pencil, checker).certificates:
        report.add(cert)
    qh = check_quasihomogeneous(pencil, checker)
    for cert in qh.certificates:
        report.add(cert)
    unity_ok = all(
        (qh.e.components[a] - (1 if a == 0 else 0)).is_zero() for a in range(n)
    )
    report.add(
        Certificate(
            "unity-normalized",
            reports.PASS if unity_ok else reports.FAIL,
            witness=None if unity_ok else f"e = {[str(c) for c in qh.e.components]}",
        )
    )

    recon = reconstruct_frobenius(pencil, checker)
    poly_ok = recon.potential.is_polynomial()
    report.add(
        Certificate(
            "potential-polynomial",
            reports.PASS if poly_ok else reports.FAIL,
        )
    )
    for cert in recon.report.certificates:
        report.add(cert)

    bundle = CoxeterPencil(
        chart=chart,
        pencil=pencil,
        flat_gens=t_polys,
        p_in_t=[img for img in p_in_t],
        unity_scale=kappa_val,
        d=d,
        report=report,
    )
    return bundle, recon

from fractions import Fraction as Q

import pytest

from flatpencil.errors import (
    IntegrabilityError,
    KernelError,
    NotFlatCoordinatesError,
    NotRegularError,
)
from flatpencil.exprparse import parse_expr
from flatpencil.frobenius import structure_constants, to_flat_pencil
from flatpencil.geometry import ContraMetric, PencilData
from flatpencil.linalg import rank
from flatpencil.qpoly import QPoly, RatFunc
from flatpencil.reconstruction import (
    check_delta_properties,
    d1_remark_multiplication,
    delta_tensor,
    multiplication,
    normalize_flat_coordinates,
    operator_pair,
    recover_potential,
    reconstruct_frobenius,
    transform_pencil,
)


def qp(text, n):
    return parse_expr(text, n)


def test_delta_one_dim(cubic_pencil):
    delta = delta_tensor(cubic_pencil)
    assert delta.delta_mixed[0][0][0].as_poly() == QPoly.const(1, Q(1, 2))
    assert delta.delta_up[0][0][0].as_poly() == QPoly.const(1, Q(1, 2))


def test_delta_both_constant_vanishes():
    eta = ContraMetric.constant([[Q(0), Q(1)], [Q(1), Q(0)]])
    g1 = ContraMetric.constant([[Q(1), Q(0)], [Q(0), Q(1)]])
    delta = delta_tensor(PencilData(g1=g1, g2=eta))
    assert all(
        delta.delta_mixed[k][i][j].is_zero() for k in range(2) for i in range(2) for j in range(2)
    )


def test_delta_requires_flat_coordinates():
    g2 = ContraMetric([[qp("t1", 1)]])
    with pytest.raises(NotFlatCoordinatesError):
        delta_tensor(PencilData(g1=g2, g2=g2))


def test_delta_properties_pass(cubic_pencil, a2):
    delta = delta_tensor(cubic_pencil)
    assert check_delta_properties(cubic_pencil, delta, checker=_sampled()).passed
    bundle, _recon = a2
    delta2 = delta_tensor(bundle.pencil)
    report = check_delta_properties(bundle.pencil, delta2)
    assert report.passed
    # scaling identities certified exactly, not skipped
    assert report.find("delta-euler-scaling").status == "pass"
    assert report.find("delta-unity-invariance").status == "pass"


def _sampled():
    from flatpencil.identity import Checker

    return Checker("sampled", seed=99)


def test_delta_mutation_breaks_curl(a2):
    bundle, _recon = a2
    delta = delta_tensor(bundle.pencil)
    n = bundle.pencil.n
    mutated = [
        [[delta.delta_mixed[k][i][j] for j in range(n)] for i in range(n)] for k in range(n)
    ]
    mutated[0][0][0] = mutated[0][0][0] + RatFunc(qp("t2", n))
    from flatpencil.reconstruction import DeltaTensor

    bad = DeltaTensor(delta_up=delta.delta_up, delta_mixed=mutated)
    report = check_delta_properties(bundle.pencil, bad)
    assert not report.passed
    curl = report.find("delta-curl")
    assert not curl.passed and curl.witness.startswith("entry (1,2")


def test_operator_pair_one_dim(cubic_pencil):
    ops = operator_pair(cubic_pencil)
    assert ops.k_op == [[Q(1)]]
    assert ops.r_op == [[Q(1, 2)]]
    assert ops.lam_op == [[Q(0)]]
    assert ops.regular()
    assert all(c.passed for c in ops.certificates)
    assert ops.spectrum[0].value == 0 and ops.spectrum[0].alg_mult == 1


def test_operator_pair_a2(a2):
    bundle, _recon = a2
    ops = operator_pair(bundle.pencil)
    values = sorted(s.value for s in ops.spectrum)
    assert values == [Q(-1, 6), Q(1, 6)]
    assert ops.spectrum_complete
    assert all(c.passed for c in ops.certificates)
    assert ops.regular()


def test_operator_pair_cp1_singular(cp1_pencil):
    ops = operator_pair(cp1_pencil)
    assert not ops.regular()
    assert rank(ops.r_op) == 1
    assert all(c.passed for c in ops.certificates)


def test_lambda_root_spaces_pairing(a2, cubic_pencil):
    # Root subspaces at eigenvalues lam, mu are orthogonal for lam + mu != 0
    # and pair with full rank for mu = -lam.
    for pencil in (a2[0].pencil, cubic_pencil):
        ops = operator_pair(pencil)
        if not ops.spectrum_complete:
            continue
        eta_up = pencil.g2.constant_entries()
        for s1 in ops.spectrum:
            for s2 in ops.spectrum:
                gram = [
                    [
                        sum(
                            u[i] * eta_up[i][j] * v[j]
                            for i in range(pencil.n)
                            for j in range(pencil.n)
                        )
                        for v in s2.basis
                    ]
                    for u in s1.basis
                ]
                if s1.value + s2.value != 0:
                    assert all(x == 0 for row in gram for x in row)
                else:
                    assert rank(gram) == len(s1.basis) == len(s2.basis)


def test_irrational_spectrum_skips_pairing_check():
    # Synthetic affine data whose shifted scaling operator has x^2 + 1 as
    # characteristic polynomial: no rational spectrum, so the root-space
    # pairing certificate must be skipped, never approximated.
    g1 = ContraMetric(
        [
            [qp("1", 2), qp("t1 + t2", 2)],
            [qp("t1 + t2", 2), qp("-t1 + t2", 2)],
        ]
    )
    g2 = ContraMetric.constant([[Q(1), Q(0)], [Q(0), Q(1)]])
    pencil = PencilData(g1=g1, g2=g2, tau=qp("t2", 2), d=Q(0))
    ops = operator_pair(pencil)
    assert not ops.spectrum_complete
    cert = next(c for c in ops.certificates if c.name == "root-space-pairing")
    assert cert.status == "skipped"
    assert "irrational" in cert.witness


def test_operator_shift_relation(cubic_pencil, a2):
    # R and the skew operator differ by half the identity.
    for pencil in (cubic_pencil, a2[0].pencil):
        ops = operator_pair(pencil)
        n = pencil.n
        for i in range(n):
            for j in range(n):
                assert ops.r_op[i][j] == ops.lam_op[i][j] + (Q(1, 2) if i == j else 0)


def test_normalize_identity_idempotent(cubic_pencil, cp1_pencil):
    for pencil in (cubic_pencil, cp1_pencil):
        result = normalize_flat_coordinates(pencil)
        assert result.identity
        assert all(c.passed for c in result.certificates)


def test_normalize_undoes_linear_change(cp1_pencil):
    swapped = transform_pencil(cp1_pencil, [[Q(0), Q(1)], [Q(1), Q(0)]])
    result = normalize_flat_coordinates(swapped)
    assert not result.identity
    assert all(c.passed for c in result.certificates)
    q = result.pencil
    for i in range(2):
        for j in range(2):
            assert (q.g1.g[i][j] - cp1_pencil.g1.g[i][j]).is_zero()
            assert (q.g2.g[i][j] - cp1_pencil.g2.g[i][j]).is_zero()
    assert (q.tau - cp1_pencil.tau).is_zero()


def test_normalize_scaling_change(cubic_pencil):
    scaled = transform_pencil(cubic_pencil, [[Q(2)]])
    result = normalize_flat_coordinates(scaled)
    assert not result.identity
    assert (result.pencil.g1.g[0][0] - cubic_pencil.g1.g[0][0]).is_zero()


def test_multiplication_one_dim(cubic_pencil):
    ops = operator_pair(cubic_pencil)
    delta = delta_tensor(cubic_pencil)
    sc, report = multiplication(cubic_pencil, ops, delta)
    assert report.passed
    assert sc.c_mixed[0][0][0] == QPoly.const(1, 1)
    assert sc.c_low[0][0][0] == QPoly.const(1, 1)


def test_multiplication_rejects_singular(cp1_pencil):
    ops = operator_pair(cp1_pencil)
    delta = delta_tensor(cp1_pencil)
    with pytest.raises(NotRegularError) as info:
        multiplication(cp1_pencil, ops, delta)
    assert info.value.kernel_dim == 1


def test_d1_multiplication_rejects_regular(cubic_pencil):
    ops = operator_pair(cubic_pencil)
    delta = delta_tensor(cubic_pencil)
    with pytest.raises(NotRegularError):
        d1_remark_multiplication(cubic_pencil, ops, delta)


def _kernel2_pencil():
    # d = 1 with constant metrics: R = K = 0, so the -1/2 root space of Lam
    # is everything (dimension 2).
    g1 = ContraMetric.constant([[Q(2), Q(0)], [Q(0), Q(2)]])
    g2 = ContraMetric.constant([[Q(1), Q(0)], [Q(0), Q(1)]])
    return PencilData(g1=g1, g2=g2, tau=parse_expr("t2", 2), d=Q(1))


def test_kernel_dimension_two_reported():
    pencil = _kernel2_pencil()
    ops = operator_pair(pencil)
    delta = delta_tensor(pencil)
    with pytest.raises(NotRegularError) as info:
        multiplication(pencil, ops, delta)
    assert info.value.kernel_dim == 2
    with pytest.raises(KernelError) as info2:
        d1_remark_multiplication(pencil, ops, delta)
    assert "dimension 2" in str(info2.value)


def test_recover_potential_one_dim():
    c = [[[QPoly.const(1, 1)]]]
    assert recover_potential(c) == qp("1/6*t1^3", 1)


def test_recover_potential_cp1(cp1):
    sc = structure_constants(cp1)
    recovered = recover_potential(sc.c_low)
    assert recovered == cp1.potential


def test_recover_potential_integrability_failure():
    n = 2
    c = [[[QPoly.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)]
    c[1][1][1] = qp("t1", n)  # d_1 c_222 != d_2 c_122
    with pytest.raises(IntegrabilityError):
        recover_potential(c)


def test_round_trip_cubic(cubic):
    result = reconstruct_frobenius(to_flat_pencil(cubic))
    assert result.mode == "regular"
    assert result.potential == cubic.potential
    assert result.frobenius.d == cubic.d
    assert result.frobenius.unity == cubic.unity
    assert result.frobenius.euler_linear == cubic.euler_linear
    assert result.frobenius.euler_const == cubic.euler_const
    assert result.change == [[Q(1)]]


def test_round_trip_cp1(cp1, cp1_pencil):
    result = reconstruct_frobenius(cp1_pencil)
    assert result.mode == "d1-remark"
    assert result.potential == cp1.potential
    assert result.frobenius.eta == cp1.eta
    assert result.frobenius.euler_linear == cp1.euler_linear
    assert result.frobenius.euler_const == cp1.euler_const
    sc = structure_constants(cp1)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                assert result.c_mixed[a][b][c] == sc.c_mixed[a][b][c]
    assert result.report.passed


def test_regular_mode_excludes_charge_one(a1, a2, a3):
    for bundle, recon in (a1, a2, a3):
        if recon.mode == "regular":
            assert recon.frobenius.d != 1


def test_gradient_of_c_fully_symmetric(cp1):
    # The integrability shape: the 4-index array d_d c_abc is symmetric.
    sc = structure_constants(cp1)
    n = cp1.n
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    lhs = sc.c_low[a][b][c].diff(d)
                    assert (lhs - sc.c_low[d][b][c].diff(a)).is_zero()
                    assert (lhs - sc.c_low[a][d][c].diff(b)).is_zero()

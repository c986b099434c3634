"""Truncated-Fock oracle: matrices, evolution, QFI, switch, DV bound."""

import math

import numpy as np
import pytest

from ncmetro import (
    ConvergenceError,
    LeakageError,
    MatrixOperator,
    ProbeDescriptor,
    ValidationError,
    branch_phase_overlap,
    constant_commutator_protocol,
    dv_bound_check,
    dv_saturating_probe,
    evolve_unitary,
    identity_op,
    ladder_term,
    matrix_of,
    momentum_op,
    position_op,
    prepare_probe,
    qfi_numeric,
    shear_protocol,
    squeeze_protocol,
    switch_protocol,
    switch_qfi,
)
from ncmetro.fock import HermitianEvolver

X = position_op()
P = momentum_op()

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex) / 2.0
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex) / 2.0
SPIN1_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / math.sqrt(2.0)
SPIN1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)


class TestMatrixOf:
    def test_identity(self):
        mat = matrix_of(identity_op(), 6)
        assert np.allclose(mat.matrix, np.eye(6))

    def test_number_operator(self):
        mat = matrix_of(ladder_term(1, 1), 4)
        assert np.allclose(mat.matrix, np.diag([0.0, 1.0, 2.0, 3.0]))

    def test_xp_commutator_truncation_corner(self):
        dim = 40
        x = matrix_of(X, dim).matrix
        p = matrix_of(P, dim).matrix
        comm = x @ p - p @ x
        sub = dim - 2
        assert np.abs(comm[:sub, :sub] - 1j * np.eye(sub)).max() < 1e-12
        # the corner carries the -i(dim-1) truncation artifact
        assert comm[dim - 1, dim - 1] == pytest.approx(-1j * (dim - 1), rel=1e-12)

    def test_unitarity_of_evolutions(self):
        for poly in (X, P):
            for dim in (40, 200):
                u = HermitianEvolver(matrix_of(poly, dim).matrix).unitary(0.37)
                assert np.abs(u @ u.conj().T - np.eye(dim)).max() < 1e-9


class TestEvolveUnitary:
    def test_displacement_gives_coherent_state(self):
        dim, x = 60, 0.3
        vac = prepare_probe(ProbeDescriptor.vacuum(), dim)
        out = evolve_unitary(vac, matrix_of(P, dim), x)
        target = prepare_probe(ProbeDescriptor.coherent(x / math.sqrt(2.0)), dim)
        overlap = abs(np.vdot(target.amplitudes, out.amplitudes))
        assert overlap > 1.0 - 1e-8

    def test_zero_time_is_identity(self):
        probe = prepare_probe(ProbeDescriptor.coherent(0.4), 40)
        out = evolve_unitary(probe, matrix_of(X, 40), 0.0)
        assert np.allclose(out.amplitudes, probe.amplitudes)

    def test_squeeze_variances_on_diagonal_axes(self):
        dim, xi = 60, 0.1
        vac = prepare_probe(ProbeDescriptor.vacuum(), dim)
        h = matrix_of(ladder_term(2, 0) + ladder_term(0, 2), dim)
        out = evolve_unitary(vac, h, xi / 2.0)
        x = matrix_of(X, dim).matrix
        p = matrix_of(P, dim).matrix
        for sign in (+1.0, -1.0):
            q = (x + sign * p) / math.sqrt(2.0)
            vec = q @ out.amplitudes
            var = float(np.vdot(vec, vec).real) - float(
                np.vdot(out.amplitudes, vec).real
            ) ** 2
            assert var == pytest.approx(math.exp(-2 * sign * xi) / 2.0, abs=1e-6)

    def test_non_hermitian_rejected(self):
        probe = prepare_probe(ProbeDescriptor.vacuum(), 16)
        bad = MatrixOperator(dim=16, matrix=np.triu(np.ones((16, 16), complex)))
        with pytest.raises(ValidationError):
            evolve_unitary(probe, bad, 0.1)

    def test_leakage_detected(self):
        probe = prepare_probe(ProbeDescriptor.vacuum(), 12)
        with pytest.raises(LeakageError):
            evolve_unitary(probe, matrix_of(P, 12), 6.0)


class TestPrepareProbe:
    def test_coherent_norm_and_leakage(self):
        probe = prepare_probe(ProbeDescriptor.coherent(0.3), 80)
        assert np.linalg.norm(probe.amplitudes) == pytest.approx(1.0, abs=1e-12)
        assert probe.top_level_population < 1e-8

    def test_squeezed_amplitude_ratio(self):
        r, phi = 0.4, 0.3
        probe = prepare_probe(ProbeDescriptor.squeezed_vacuum(r, phi), 80)
        ratio = probe.amplitudes[2] / probe.amplitudes[0]
        expected = -np.exp(2j * phi) * math.tanh(r) / math.sqrt(2.0)
        assert ratio == pytest.approx(expected, rel=1e-12)
        assert abs(probe.amplitudes[1]) == 0.0

    def test_fock_vector_embedding(self):
        probe = prepare_probe(ProbeDescriptor.fock_vector([0.0, 1.0]), 16)
        assert probe.amplitudes[1] == pytest.approx(1.0)

    def test_truncation_overflow_rejected(self):
        with pytest.raises(LeakageError):
            prepare_probe(ProbeDescriptor.coherent(6.0), 16)


class TestQfiNumeric:
    def test_single_displacement_on_vacuum(self):
        protocol = constant_commutator_protocol(1, 0.2, 0.0)
        estimate = qfi_numeric(protocol, dim=40)
        assert estimate.value == pytest.approx(2.0, rel=1e-9)
        assert estimate.trusted

    def test_squeeze_protocol_vs_closed_form(self):
        protocol = squeeze_protocol(3, 0.1, 0.1, ProbeDescriptor.coherent(0.3))
        estimate = qfi_numeric(protocol, dim=80)
        assert estimate.value == pytest.approx(2 * 9 * math.cosh(0.6), rel=1e-2)
        assert estimate.trusted

    def test_shear_protocol_generator_variance(self):
        protocol = shear_protocol(3, 0.2, 0.1)
        estimate = qfi_numeric(protocol, dim=80)
        assert estimate.value == pytest.approx(2 * 9 + 8 * 81 * 0.01, rel=1e-2)

    def test_truncation_doubling_convergence(self):
        protocol = squeeze_protocol(3, 0.1, 0.1, ProbeDescriptor.coherent(0.3))
        small = qfi_numeric(protocol, dim=80)
        large = qfi_numeric(protocol, dim=160)
        assert abs(large.value - small.value) / large.value < 0.005

    def test_untrusted_flag_at_coarse_step(self):
        protocol = squeeze_protocol(3, 0.1, 0.1, ProbeDescriptor.coherent(0.3))
        estimate = qfi_numeric(protocol, dim=80, step=0.05)
        assert not estimate.trusted
        assert estimate.rel_disagreement > 0.005

    def test_convergence_error_at_absurd_step(self):
        protocol = squeeze_protocol(3, 0.1, 0.1, ProbeDescriptor.coherent(0.3))
        with pytest.raises(ConvergenceError):
            qfi_numeric(protocol, dim=80, step=0.5, retries=0)

    def test_leakage_retry_reaches_bigger_dim(self):
        # N=12 squeezing leaks at dim 80; one doubling fixes it
        protocol = squeeze_protocol(12, 0.1, 0.1, ProbeDescriptor.coherent(0.3))
        estimate = qfi_numeric(protocol, dim=80, retries=1)
        assert estimate.dim == 160
        assert estimate.value == pytest.approx(2 * 144 * math.cosh(2.4), rel=1e-2)
        with pytest.raises(LeakageError):
            qfi_numeric(protocol, dim=80, retries=0)


class TestSwitch:
    def test_commuting_case_control_untouched(self):
        probe = prepare_probe(ProbeDescriptor.vacuum(), 40)
        state = switch_protocol(3, 0.0, 0.2, probe)
        assert np.allclose(state.control, np.array([1.0, 1.0]) / math.sqrt(2.0))
        state = switch_protocol(3, 0.2, 0.0, probe)
        assert np.allclose(state.control, np.array([1.0, 1.0]) / math.sqrt(2.0))

    def test_branch_phase_weyl_relation(self):
        probe = prepare_probe(ProbeDescriptor.vacuum(), 80)
        for n in range(1, 7):
            z = branch_phase_overlap(n, 0.1, 0.2, probe)
            expected = np.exp(-1j * n**2 * 0.1 * 0.2)
            assert abs(z - expected) < 1e-6

    def test_reduced_control_is_pure_phase(self):
        probe = prepare_probe(ProbeDescriptor.vacuum(), 60)
        state = switch_protocol(2, 0.1, 0.2, probe)
        rho = state.reduced_control()
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert abs(rho[0, 1]) == pytest.approx(0.5, abs=1e-10)
        phase = np.angle(rho[0, 1])
        assert phase == pytest.approx(4 * 0.1 * 0.2, abs=1e-9)

    def test_control_qfi_is_phase_information(self):
        for n in (1, 3, 6):
            estimate = switch_qfi(n, 0.1, 0.2, dim=80, mode="control")
            assert estimate.value == pytest.approx(n**4 * 0.04, rel=1e-6)
            assert estimate.trusted

    def test_joint_qfi_carries_both_channels(self):
        for n in (2, 5):
            estimate = switch_qfi(n, 0.1, 0.2, dim=80, mode="joint")
            assert estimate.value == pytest.approx(2 * n**2 + n**4 * 0.04, rel=1e-7)

    def test_definite_order_qfi(self):
        for n in (2, 5):
            estimate = switch_qfi(n, 0.1, 0.2, dim=80, mode="definite")
            assert estimate.value == pytest.approx(2 * n**2, rel=1e-8)

    def test_mode_validation(self):
        with pytest.raises(ValidationError):
            switch_qfi(2, 0.1, 0.2, mode="sideways")


class TestDvBound:
    def test_qubit_bound_holds(self):
        probe = dv_saturating_probe(SIGMA_Z)
        for g_bar in (0.1, 1.0):
            report = dv_bound_check(SIGMA_X, SIGMA_Z, range(1, 51), g_bar, probe)
            assert report.spectral_spread == pytest.approx(1.0)
            assert report.max_ratio <= 1.0 + 1e-12

    def test_saturation_at_zero_auxiliary(self):
        probe = dv_saturating_probe(SIGMA_Z)
        report = dv_bound_check(SIGMA_X, SIGMA_Z, [7], 0.0, probe)
        row = report.rows[0]
        assert row.qfi == pytest.approx(row.bound, abs=1e-9)

    def test_qutrit_bound(self):
        probe = dv_saturating_probe(SPIN1_Z)
        report = dv_bound_check(SPIN1_X, SPIN1_Z, range(1, 31), 0.5, probe)
        assert report.spectral_spread == pytest.approx(2.0)
        for row in report.rows:
            assert row.qfi <= 4.0 * row.n**2 * (1 + 1e-12)

    def test_oscillatory_not_growing(self):
        # QFI/N^2 stays bounded: no super-Heisenberg growth in finite dims
        probe = dv_saturating_probe(SIGMA_Z)
        report = dv_bound_check(SIGMA_X, SIGMA_Z, range(1, 51), 1.0, probe)
        ratios = [row.ratio for row in report.rows]
        assert max(ratios) <= 1.0 + 1e-12
        assert min(ratios) < max(ratios)  # genuinely oscillatory

    def test_validation(self):
        probe = np.array([1.0, 0.0])
        with pytest.raises(ValidationError):
            dv_bound_check(np.array([[0, 1], [0, 0]]), SIGMA_Z, [1], 0.1, probe)
        with pytest.raises(ValidationError):
            dv_bound_check(SIGMA_X, SIGMA_Z, [0], 0.1, probe)

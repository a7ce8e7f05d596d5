import numpy as np
import pytest

from msqw_bench.errors import ConfigurationError, UsageError
from msqw_bench.model import build_diagonal, generate_instance
from msqw_bench.propagate import (
    AnnealSchedule,
    anneal_propagate,
    apply_driver_rotation,
    apply_mix,
    apply_phase,
    build_dense_unitary,
    dense_hamiltonian,
    driver_propagate,
    mix_propagate,
    phase_propagate,
    qw_propagate,
)
from msqw_bench.states import StateVector, basis_state, make_plus_state

from oracles import dense_driver_matrix, random_state, series_expm


@pytest.fixture
def diag4():
    return build_diagonal(generate_instance(4, seed=2))


def test_phase_zero_is_identity(diag4):
    psi = StateVector(4, random_state(4, 0))
    out = phase_propagate(psi, diag4, 0.0)
    np.testing.assert_array_equal(out.amps, psi.amps)


def test_phase_on_basis_state_only_rotates(diag4):
    z = 5
    out = phase_propagate(basis_state(4, z), diag4, 0.9)
    probs = out.probabilities()
    assert probs[z] == pytest.approx(1.0, abs=1e-12)
    assert np.angle(out.amps[z]) == pytest.approx(np.angle(np.exp(-1j * 0.9 * diag4.energies[z])))


def test_phase_matches_dense_exponential():
    diag = build_diagonal(generate_instance(3, seed=5))
    psi = random_state(3, 3)
    beta = 0.37
    u = series_expm(-1j * beta * np.diag(diag.energies))
    out = phase_propagate(StateVector(3, psi), diag, beta)
    assert np.linalg.norm(out.amps - u @ psi) <= 1e-9


def test_driver_zero_is_identity():
    psi = StateVector(3, random_state(3, 1))
    np.testing.assert_array_equal(driver_propagate(psi, 0.0).amps, psi.amps)


def test_driver_half_pi_flips_single_qubit():
    out = driver_propagate(basis_state(1, 0), np.pi / 2)
    np.testing.assert_allclose(out.amps, [0.0, 1j], atol=1e-12)


def test_driver_matches_dense_exponential():
    n, alpha = 4, 0.81
    psi = random_state(n, 9)
    u = series_expm(-1j * alpha * dense_driver_matrix(n))
    out = driver_propagate(StateVector(n, psi), alpha)
    assert np.linalg.norm(out.amps - u @ psi) <= 1e-9


def test_qw_zero_time_is_identity(diag4):
    psi = StateVector(4, random_state(4, 4))
    out = qw_propagate(psi, diag4, 1.3, 0.0)
    assert np.linalg.norm(out.amps - psi.amps) <= 1e-12


def test_qw_gamma_zero_reduces_to_phase(diag4):
    psi = StateVector(4, random_state(4, 6))
    walked = qw_propagate(psi, diag4, 0.0, 1.7)
    phased = phase_propagate(psi, diag4, 1.7)
    assert np.linalg.norm(walked.amps - phased.amps) <= 1e-10


def test_qw_matches_series_exponential():
    diag = build_diagonal(generate_instance(5, seed=8))
    gamma, t = 1.3, 2.0
    h = gamma * dense_driver_matrix(5) + np.diag(diag.energies)
    u = series_expm(-1j * t * h)
    out = qw_propagate(make_plus_state(5), diag, gamma, t)
    assert np.linalg.norm(out.amps - u @ make_plus_state(5).amps) <= 1e-9


def test_qw_rejects_large_n():
    diag = build_diagonal(generate_instance(13, seed=0))
    with pytest.raises(ConfigurationError):
        qw_propagate(make_plus_state(13), diag, 1.0, 1.0)


def test_qw_rejects_negative_parameters(diag4):
    with pytest.raises(UsageError):
        qw_propagate(make_plus_state(4), diag4, -0.1, 1.0)


def test_mix_matches_series_exponential(diag4):
    a, b, t = 0.6, 0.8, 1.1
    psi = random_state(4, 12)
    h = a * dense_driver_matrix(4) + b * np.diag(diag4.energies)
    u = series_expm(-1j * t * h)
    out = mix_propagate(StateVector(4, psi), diag4, a, b, t)
    assert np.linalg.norm(out.amps - u @ psi) <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_propagators_preserve_norm(diag4, seed):
    psi = StateVector(4, random_state(4, seed))
    for out in (
        phase_propagate(psi, diag4, 0.7),
        driver_propagate(psi, 1.2),
        qw_propagate(psi, diag4, 2.0, 1.5),
    ):
        assert abs(out.norm() - 1.0) <= 1e-10


def test_driver_composition_adds_durations():
    psi = StateVector(4, random_state(4, 30))
    two_step = driver_propagate(driver_propagate(psi, 0.4), 0.9)
    one_step = driver_propagate(psi, 1.3)
    assert np.linalg.norm(two_step.amps - one_step.amps) <= 1e-10


def test_phase_composition_adds_durations(diag4):
    psi = StateVector(4, random_state(4, 31))
    two_step = phase_propagate(phase_propagate(psi, diag4, 0.4), diag4, 0.9)
    one_step = phase_propagate(psi, diag4, 1.3)
    assert np.linalg.norm(two_step.amps - one_step.amps) <= 1e-10


def test_qw_composition_adds_durations(diag4):
    psi = StateVector(4, random_state(4, 32))
    two_step = qw_propagate(qw_propagate(psi, diag4, 1.1, 0.8), diag4, 1.1, 0.5)
    one_step = qw_propagate(psi, diag4, 1.1, 1.3)
    assert np.linalg.norm(two_step.amps - one_step.amps) <= 1e-9


def test_qw_stage_conserves_energy(diag4):
    gamma = 1.4
    h = gamma * dense_driver_matrix(4) + np.diag(diag4.energies)
    psi0 = make_plus_state(4)
    e0 = np.vdot(psi0.amps, h @ psi0.amps).real
    for t in (0.3, 1.0, 2.5, 4.0):
        psi = qw_propagate(psi0, diag4, gamma, t)
        e = np.vdot(psi.amps, h @ psi.amps).real
        assert e == pytest.approx(e0, abs=1e-8)


def test_anneal_constant_schedule_single_step_equals_qw(diag4):
    gamma, t_total = 1.7, 1.2
    schedule = AnnealSchedule.constant(gamma, 1.0, t_total)
    psi = make_plus_state(4)
    stepped = anneal_propagate(psi, diag4, schedule, steps=1)
    walked = qw_propagate(psi, diag4, gamma, t_total)
    assert np.linalg.norm(stepped.amps - walked.amps) <= 1e-10


def test_anneal_zero_total_time_is_identity(diag4):
    schedule = AnnealSchedule.linear_ramp(0.0)
    psi = StateVector(4, random_state(4, 40))
    out = anneal_propagate(psi, diag4, schedule, steps=16)
    assert np.linalg.norm(out.amps - psi.amps) <= 1e-12


def test_anneal_self_convergence_ladder(diag4):
    # doubling the sub-steps shrinks the successive difference ~4x until it
    # crosses the 1e-8 reference tolerance
    schedule = AnnealSchedule.linear_ramp(2.0)
    psi = make_plus_state(4)
    prev = anneal_propagate(psi, diag4, schedule, steps=256)
    diffs = []
    steps = 512
    while steps <= (1 << 16):
        cur = anneal_propagate(psi, diag4, schedule, steps=steps)
        diffs.append(np.linalg.norm(cur.amps - prev.amps))
        if diffs[-1] < 1e-8:
            break
        prev = cur
        steps *= 2
    assert diffs[-1] < 1e-8
    ratios = np.array(diffs[:-1]) / np.array(diffs[1:])
    np.testing.assert_allclose(ratios, 4.0, rtol=0.25)


def test_anneal_doubling_error_is_second_order(diag4):
    schedule = AnnealSchedule.linear_ramp(2.0)
    psi = make_plus_state(4)
    steps = np.array([8, 16, 32, 64, 128])
    errs = []
    for s in steps:
        coarse = anneal_propagate(psi, diag4, schedule, steps=int(s))
        fine = anneal_propagate(psi, diag4, schedule, steps=int(2 * s))
        errs.append(np.linalg.norm(coarse.amps - fine.amps))
    slope = np.polyfit(np.log2(steps), np.log2(errs), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.3)


def test_anneal_preserves_norm(diag4):
    schedule = AnnealSchedule.linear_ramp(2.0)
    out = anneal_propagate(make_plus_state(4), diag4, schedule, steps=64)
    assert abs(out.norm() - 1.0) <= 1e-10


def test_dense_unitary_identity():
    u = build_dense_unitary(3, lambda m: m)
    np.testing.assert_array_equal(u.entries, np.eye(8, dtype=complex))


def test_dense_unitary_driver_full_period():
    u = build_dense_unitary(1, lambda m: apply_driver_rotation(m, 1, np.pi))
    np.testing.assert_allclose(u.entries, -np.eye(2), atol=1e-12)


def test_dense_unitary_qw_is_unitary():
    diag = build_diagonal(generate_instance(3, seed=14))
    u = build_dense_unitary(3, lambda m: apply_mix(m, diag, 1.2, 1.0, 0.9))
    assert u.unitarity_error() <= 1e-9


def test_dense_unitary_rejects_large_n():
    with pytest.raises(ConfigurationError):
        build_dense_unitary(9, lambda m: m)


def test_dense_hamiltonian_is_hermitian(diag4):
    h = dense_hamiltonian(diag4, 1.3, 0.7)
    np.testing.assert_allclose(h, h.T.conj(), atol=0)


def test_mix_cache_consistent_with_fresh_decomposition(diag4):
    psi = random_state(4, 50)
    cached = apply_mix(psi, diag4, 1.5, 1.0, 0.8, cache=True)
    again = apply_mix(psi, diag4, 1.5, 1.0, 0.8, cache=True)
    fresh = apply_mix(psi, diag4, 1.5, 1.0, 0.8, cache=False)
    np.testing.assert_array_equal(cached, again)
    np.testing.assert_allclose(cached, fresh, atol=1e-12)


def test_mix_cache_eviction_is_thread_safe(monkeypatch):
    # hammer the cache far past its capacity from many threads; the racy
    # eviction used to raise KeyError when two workers popped the same key.
    # A tiny capacity plus an aggressive switch interval makes the old race
    # fire within a few thousand operations.
    import sys
    from concurrent.futures import ThreadPoolExecutor

    from msqw_bench import propagate

    monkeypatch.setattr(propagate, "_EIG_CACHE_MAX", 8)
    propagate._EIG_CACHE.clear()
    diags = [build_diagonal(generate_instance(6, seed=s)) for s in range(30)]
    psi = random_state(6, 0)
    reference = apply_mix(psi, diags[0], 0.1, 1.0, 0.5, cache=False)

    def work(k):
        diag = diags[k % len(diags)]
        gamma = 0.1 + (k % 17) * 0.21
        out = apply_mix(psi, diag, gamma, 1.0, 0.5)
        if k % len(diags) == 0 and k % 17 == 0:
            np.testing.assert_allclose(out, reference, atol=1e-12)

    interval = sys.getswitchinterval()
    sys.setswitchinterval(1e-6)
    try:
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(work, range(12000)))
    finally:
        sys.setswitchinterval(interval)
        propagate._EIG_CACHE.clear()


def test_batched_columns_match_individual_runs(diag4):
    ts = np.array([0.2, 0.7, 1.9])
    block = np.stack([random_state(4, s) for s in (60, 61, 62)], axis=1)
    batched = apply_mix(block, diag4, 1.1, 1.0, ts)
    for k, t in enumerate(ts):
        single = apply_mix(block[:, k], diag4, 1.1, 1.0, float(t))
        np.testing.assert_allclose(batched[:, k], single, atol=1e-12)


def test_batched_phase_and_driver_match_individual_runs(diag4):
    betas = np.array([0.1, 0.5, 1.3])
    block = np.stack([random_state(4, s) for s in (70, 71, 72)], axis=1)
    phased = apply_phase(block, diag4.energies, betas)
    rotated = apply_driver_rotation(phased, 4, 2.0 * betas)
    for k, b in enumerate(betas):
        single = apply_phase(block[:, k], diag4.energies, float(b))
        single = apply_driver_rotation(single, 4, float(2.0 * b))
        np.testing.assert_allclose(rotated[:, k], single, atol=1e-12)

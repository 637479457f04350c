import math

import numpy as np
import pytest

from hswcap.bloch import relative_entropy, relative_entropy_many, von_neumann_entropy
from hswcap.capacity import (
    CapacityResult,
    DegenerateSegment,
    EndpointPure,
    IterConfig,
    MaxItersExceeded,
    Method,
    NotInHull,
    NotUnital,
    SignalEnsemble,
    SolverError,
    capacity_sweep,
    holevo_chi,
    holevo_chi_divergence,
    iterative_capacity,
    linear_capacity_axis_aligned,
    linear_capacity_general,
    max_relative_entropy_on_surface,
    recover_ensemble,
    solve_capacity,
    surface_search,
    unital_capacity,
)
from hswcap.capacity.ensemble import mixture_weights
from hswcap.capacity.iterative import balanced_target
from hswcap.oracle import brute_force_capacity
from hswcap.channels import ChannelKind, ChannelParams, NamedChannelSpec, named_channel

from conftest import AMP_DAMP, IDENTITY_CH, LINEAR_GENERAL, LINEAR_SIMPLE, PLANAR


def two_pauli(x):
    return named_channel(NamedChannelSpec(ChannelKind.TWO_PAULI, x))


def depolarizing(x):
    return named_channel(NamedChannelSpec(ChannelKind.DEPOLARIZING, x))


# --- unital -----------------------------------------------------------------


def test_unital_depolarizing_formula():
    for x in np.linspace(0, 1, 11):
        res = unital_capacity(depolarizing(x))
        assert abs(res.capacity_bits - (1 - von_neumann_entropy(abs(4 * x - 1) / 3))) <= 1e-12
    assert unital_capacity(depolarizing(1.0)).capacity_bits == pytest.approx(1.0, abs=1e-15)


def test_unital_two_pauli_low_branch():
    res = unital_capacity(two_pauli(0.25))
    x = 0.25
    assert abs(res.capacity_bits - (1 + x * math.log2(x) + (1 - x) * math.log2(1 - x))) < 1e-12
    assert round(res.capacity_bits, 5) == 0.18872


@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.15])
def test_two_pauli_symmetry(alpha):
    left = unital_capacity(two_pauli(1 / 3 - alpha)).capacity_bits
    right = unital_capacity(two_pauli(1 / 3 + 2 * alpha)).capacity_bits
    assert abs(left - right) <= 1e-12


def test_unital_ensemble_shape():
    p = ChannelParams((0, 0, 0), (0.3, -0.7, 0.5))
    res = unital_capacity(p)
    assert res.method is Method.UNITAL
    assert np.allclose(res.average_output, 0)
    assert np.allclose(res.ensemble.probs, 0.5)
    assert np.allclose(res.ensemble.inputs, [[0, 1, 0], [0, -1, 0]])
    assert np.allclose(res.ensemble.outputs, [[0, -0.7, 0], [0, 0.7, 0]])
    res.ensemble.check()


def test_unital_tie_picks_lowest_axis():
    res = unital_capacity(ChannelParams((0, 0, 0), (0.5, 0.2, -0.5)))
    assert res.diagnostics["major_axis"] == 0
    assert res.diagnostics["degenerate_major"]


def test_unital_rejects_translation():
    with pytest.raises(NotUnital):
        unital_capacity(AMP_DAMP)


# --- linear -----------------------------------------------------------------


def test_linear_axis_aligned_example():
    res = linear_capacity_axis_aligned(LINEAR_SIMPLE)
    assert res.diagnostics["q"] == pytest.approx(0.2125, abs=5e-5)
    assert res.capacity_bits == pytest.approx(0.1246, abs=5e-5)
    assert res.ensemble.probs == pytest.approx([0.5156, 0.4844], abs=5e-4)
    assert res.method is Method.LINEAR_CLOSED_FORM
    assert res.max_equal_distance_residual < 1e-12
    res.ensemble.check()


def test_linear_symmetric_segment():
    res = linear_capacity_axis_aligned(ChannelParams((0, 0, 0), (0, 0, 0.4)))
    assert abs(res.diagnostics["q"]) < 1e-15
    assert res.capacity_bits == pytest.approx(1 - von_neumann_entropy(0.4), abs=1e-14)
    assert res.ensemble.probs == pytest.approx([0.5, 0.5])


def test_linear_negative_lambda():
    a = linear_capacity_axis_aligned(ChannelParams((0, 0, 0.2), (0, 0, -0.4)))
    b = linear_capacity_axis_aligned(LINEAR_SIMPLE)
    assert a.capacity_bits == pytest.approx(b.capacity_bits, abs=1e-14)
    assert a.average_output == pytest.approx(b.average_output, abs=1e-14)


def test_linear_degenerate():
    with pytest.raises(DegenerateSegment):
        linear_capacity_axis_aligned(ChannelParams((0, 0, 0.2), (0, 0, 0)))
    with pytest.raises(DegenerateSegment):
        linear_capacity_general(ChannelParams((0, 0, 0.2), (0, 0, 0)))


def test_linear_general_example():
    res = linear_capacity_general(LINEAR_GENERAL)
    assert res.diagnostics["beta"] == pytest.approx(0.0534, abs=5e-4)
    assert res.average_output == pytest.approx([0.1, 0.2, 0.3214], abs=5e-4)
    assert res.capacity_bits == pytest.approx(0.1365, abs=5e-5)
    assert res.ensemble.probs[0] == pytest.approx(0.5267, abs=5e-4)
    assert abs(res.diagnostics["residual"]) <= 1e-12
    st = res.diagnostics["state"]
    assert st.A == pytest.approx(0.1**2 + 0.2**2 + 0.7**2)
    assert st.C == pytest.approx(0.1**2 + 0.2**2 + 0.1**2)
    assert st.q**2 == pytest.approx(st.B)
    assert st.r_plus == pytest.approx(math.sqrt(st.A))
    # endpoint distances agree
    d = [relative_entropy(o, res.average_output) for o in res.ensemble.outputs]
    assert abs(d[0] - d[1]) <= 1e-9


def test_linear_general_matches_axis_aligned():
    a = linear_capacity_general(LINEAR_SIMPLE)
    b = linear_capacity_axis_aligned(LINEAR_SIMPLE)
    assert abs(a.capacity_bits - b.capacity_bits) <= 1e-9
    assert abs(a.average_output[2] - b.average_output[2]) <= 1e-9


def test_linear_general_symmetric_beta_zero():
    res = linear_capacity_general(ChannelParams((0, 0, 0), (0, 0, 0.4)))
    assert abs(res.diagnostics["beta"]) < 1e-12


def test_linear_general_other_axis():
    # same segment laid along x must give the same capacity
    p = ChannelParams((0.3, 0.1, 0.2), (0.4, 0, 0))
    res = linear_capacity_general(p)
    ref = linear_capacity_general(LINEAR_GENERAL)
    assert res.capacity_bits == pytest.approx(ref.capacity_bits, abs=1e-12)
    assert np.allclose(res.ensemble.inputs, [[1, 0, 0], [-1, 0, 0]])
    res.ensemble.check()


def test_linear_endpoint_pure():
    with pytest.raises(EndpointPure):
        linear_capacity_general(ChannelParams((0, 0, 0.5), (0, 0, 0.5)))


# --- surface search ---------------------------------------------------------


def test_surface_identity():
    dmax, arg = max_relative_entropy_on_surface(IDENTITY_CH, (0, 0, 0))
    assert dmax == pytest.approx(1.0, abs=1e-12)
    assert len(arg) >= 1


def test_surface_planar_two_maximisers():
    sm = surface_search(PLANAR, (0.320899, 0.111229, 0))
    assert sm.dmax == pytest.approx(0.1994, abs=1e-4)
    top = sorted(sm.near_max(1e-6), key=lambda c: c.output[1])
    assert len(top) == 2
    assert top[0].output == pytest.approx([0.2917, -0.3999, 0], abs=1e-3)
    assert top[1].output == pytest.approx([0.3486, 0.5963, 0], abs=1e-3)


def test_surface_amplitude_damping_mirror():
    sm = surface_search(AMP_DAMP, (0, 0, 0.7126))
    assert sm.dmax == pytest.approx(0.3600, abs=1e-4)
    sm_xz = surface_search(AMP_DAMP, (0, 0, 0.7126), plane="xz")
    assert sm_xz.dmax == pytest.approx(sm.dmax, abs=1e-9)
    pair = sm_xz.near_max(1e-6)
    assert len(pair) == 2
    assert pair[0].output[0] == pytest.approx(-pair[1].output[0], abs=1e-6)


def test_surface_search_beats_dense_sampling(rng):
    p = ChannelParams((0.1, -0.2, 0.15), (0.5, 0.3, 0.6))
    v = np.array([0.05, -0.1, 0.2])
    u = rng.normal(size=(20000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    sampled = relative_entropy_many(p.t + u * p.lam, v).max()
    assert surface_search(p, v).dmax >= sampled - 1e-12


# --- ensemble recovery ------------------------------------------------------


def test_recover_symmetric_pair():
    p = ChannelParams((0, 0, 0), (0.5, 0.5, 0.5))
    ens = recover_ensemble(p, (0, 0, 0), [(0, 0, 0.5), (0, 0, -0.5)])
    assert ens.probs == pytest.approx([0.5, 0.5])


def test_recover_planar_probabilities():
    # the rounded outputs sit just outside the ellipse, so only the weights are checked
    outs = [(0.2917, -0.3999, 0), (0.3486, 0.5963, 0)]
    w, resid = mixture_weights(outs, (0.3209, 0.1112, 0))
    assert resid < 1e-3
    assert w == pytest.approx([0.4869, 0.5131], abs=1e-3)


def test_recover_linear_probabilities():
    ens = recover_ensemble(LINEAR_SIMPLE, (0, 0, 0.2125), [(0, 0, 0.6), (0, 0, -0.2)], tol=1e-3)
    assert ens.probs == pytest.approx([0.5156, 0.4844], abs=1e-3)


def test_recover_reduces_to_four():
    p = IDENTITY_CH
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(12, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts = np.vstack([pts, -pts])
    ens = recover_ensemble(p, (0, 0, 0), pts)
    assert len(ens.items) <= 4
    assert np.allclose(ens.average_output, 0, atol=1e-9)
    ens.check()


def test_recover_not_in_hull():
    with pytest.raises(NotInHull):
        recover_ensemble(LINEAR_SIMPLE, (0, 0, 0.9), [(0, 0, 0.6), (0, 0, -0.2)])
    with pytest.raises(NotInHull):
        recover_ensemble(LINEAR_SIMPLE, (0, 0, 0.1), [])


# --- Holevo chi -------------------------------------------------------------


def test_holevo_single_state():
    ens = SignalEnsemble.from_members([1.0], [(0, 0, 1)], [(0.1, 0.2, 0.3)])
    assert holevo_chi(ens) == pytest.approx(0.0, abs=1e-15)


def test_holevo_linear_example():
    res = linear_capacity_axis_aligned(LINEAR_SIMPLE)
    assert holevo_chi(res.ensemble) == pytest.approx(0.1246, abs=5e-5)
    assert abs(holevo_chi(res.ensemble) - res.capacity_bits) < 1e-12


def test_holevo_dual_forms(rng):
    for _ in range(50):
        outs = rng.normal(size=(3, 3))
        outs *= (rng.uniform(size=(3, 1)) / np.linalg.norm(outs, axis=1, keepdims=True))
        probs = rng.dirichlet(np.ones(3))
        ens = SignalEnsemble.from_members(probs, outs, outs)
        assert abs(holevo_chi(ens) - holevo_chi_divergence(ens)) <= 1e-10


# --- iterative --------------------------------------------------------------


def test_iterative_planar():
    res = iterative_capacity(PLANAR)
    assert res.capacity_bits == pytest.approx(0.1994, abs=1e-4)
    assert res.average_output == pytest.approx([0.3209, 0.1112, 0], abs=5e-4)
    order = np.argsort(res.ensemble.outputs[:, 1])
    assert res.ensemble.probs[order] == pytest.approx([0.4869, 0.5131], abs=1e-3)
    assert res.max_equal_distance_residual <= 1e-6
    assert res.diagnostics["seed"] == 0


def test_iterative_amplitude_damping():
    res = iterative_capacity(AMP_DAMP)
    assert res.capacity_bits == pytest.approx(0.3600, abs=1e-4)
    assert res.average_output == pytest.approx([0, 0, 0.7126], abs=1e-3)
    assert res.diagnostics["plane"] == "xz"
    assert abs(res.average_output[0]) <= 1e-4 and abs(res.average_output[1]) <= 1e-4
    assert res.ensemble.probs == pytest.approx([0.5, 0.5], abs=1e-4)
    a, b = res.ensemble.outputs
    assert a[0] == pytest.approx(-b[0], abs=1e-4) and a[2] == pytest.approx(b[2], abs=1e-4)


def test_iterative_amplitude_damping_without_symmetry():
    res = iterative_capacity(AMP_DAMP, IterConfig(symmetry="none"))
    assert res.capacity_bits == pytest.approx(0.3600, abs=1e-4)


def test_iterative_linear_cross_check():
    it = iterative_capacity(LINEAR_SIMPLE)
    cf = linear_capacity_axis_aligned(LINEAR_SIMPLE)
    assert abs(it.capacity_bits - cf.capacity_bits) <= 1e-6
    assert abs(it.average_output[2] - cf.average_output[2]) <= 1e-6
    it = iterative_capacity(LINEAR_GENERAL)
    assert abs(it.capacity_bits - linear_capacity_general(LINEAR_GENERAL).capacity_bits) <= 1e-5


def test_iterative_two_pauli_half():
    res = iterative_capacity(two_pauli(0.5))
    assert abs(res.capacity_bits - unital_capacity(two_pauli(0.5)).capacity_bits) <= 1e-6
    assert np.max(np.abs(res.average_output)) <= 1e-4


def test_iterative_depolarizing_sphere():
    res = iterative_capacity(depolarizing(0.8))
    assert abs(res.capacity_bits - unital_capacity(depolarizing(0.8)).capacity_bits) <= 1e-6
    assert res.max_equal_distance_residual <= 1e-6
    res.ensemble.check()


def test_iterative_descent_is_monotone():
    res = iterative_capacity(ChannelParams((0.1, -0.2, 0.15), (0.5, 0.3, 0.6)))
    hist = np.array(res.diagnostics["dmax_history"])
    assert np.all(np.diff(hist) <= 0)


def test_iterative_plain_step_stalls_on_ridge():
    # moving towards one maximiser at a time cannot cross the two-maximiser
    # ridge, so the run stops short and the hull check refuses it
    with pytest.raises(SolverError):
        iterative_capacity(PLANAR, IterConfig(balanced_steps=False, polish=False))


def test_iterative_max_iters():
    with pytest.raises(MaxItersExceeded) as exc:
        iterative_capacity(PLANAR, IterConfig(max_iters=2))
    assert isinstance(exc.value.result, CapacityResult)


def test_iterative_point_channel():
    with pytest.raises(SolverError):
        iterative_capacity(ChannelParams((0, 0, 0.3), (0, 0, 0)))


def test_iter_config_validation():
    with pytest.raises(ValueError):
        IterConfig(step_epsilon=1.5)
    with pytest.raises(ValueError):
        IterConfig(tol_dmax=0)
    with pytest.raises(ValueError):
        IterConfig(symmetry="yz")


def test_balanced_target_equidistant():
    pts = np.array([[0.29, -0.4, 0.0], [0.35, 0.6, 0.0], [0.1, 0.1, 0.5]])
    v = balanced_target(pts)
    d = relative_entropy_many(pts, v)
    assert d.max() - d.min() < 1e-9 or d.max() >= d.min()


# --- dispatch and sweeps ----------------------------------------------------


def test_dispatch_methods():
    assert solve_capacity(IDENTITY_CH).method is Method.UNITAL
    assert solve_capacity(LINEAR_SIMPLE).method is Method.LINEAR_CLOSED_FORM
    assert solve_capacity(LINEAR_GENERAL).method is Method.LINEAR_TRANSCENDENTAL
    assert solve_capacity(PLANAR).method is Method.ITERATIVE
    point = solve_capacity(ChannelParams((0, 0, 0.3), (0, 0, 0)))
    assert point.capacity_bits == 0.0
    with pytest.raises(ValueError):
        solve_capacity(PLANAR, "magic")


def test_dispatch_pure_endpoint_falls_back():
    # endpoint (0.6, 0, 0.8) is pure and off the z-axis
    p = ChannelParams((0.6, 0, 0.2), (0, 0, 0.6))
    res = solve_capacity(p)
    assert res.method is Method.ITERATIVE
    assert abs(res.capacity_bits - brute_force_capacity(p, 2, 10, 0).capacity_bits) <= 1e-6


def test_axis_aligned_pure_endpoint():
    res = linear_capacity_axis_aligned(ChannelParams((0, 0, 0.5), (0, 0, 0.5)))
    assert abs(res.capacity_bits - brute_force_capacity(ChannelParams((0, 0, 0.5), (0, 0, 0.5)), 2, 10, 0).capacity_bits) <= 1e-9


def test_sweep_examples():
    rows = capacity_sweep(ChannelKind.DEPOLARIZING, [0.25, 1.0])
    assert rows[0] == (0.25, pytest.approx(0.0, abs=1e-15))
    assert rows[1][1] == pytest.approx(1.0)
    ad = capacity_sweep("amplitude_damping", [0.0, 0.36, 1.0])
    assert ad[0][1] == 0.0
    assert ad[1][1] == pytest.approx(0.3600, abs=1e-4)
    assert ad[2][1] == pytest.approx(1.0)


def test_sweep_monotone_amplitude_damping():
    caps = [c for _, c in capacity_sweep("amplitude_damping", np.linspace(0.1, 0.9, 5))]
    assert np.all(np.diff(caps) > 0)


def test_to_dict_is_json_ready():
    import json

    json.dumps(linear_capacity_general(LINEAR_GENERAL).to_dict())
    json.dumps(iterative_capacity(AMP_DAMP).to_dict())

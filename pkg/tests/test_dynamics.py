import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmform.dynamics import (
    AgentState,
    LinkSet,
    NumericalDivergence,
    SimParams,
    SpringLink,
    World,
    displacement_vector,
    integrate_step,
    kinetic_energy,
    net_force,
    net_forces,
    pair_force,
    separation_direction,
    spring_energy,
)

from oracles import net_force_ref, pair_force_ref, two_body_unit_step

coord = st.floats(-100, 100, allow_nan=False)
vel = st.floats(-5, 5, allow_nan=False)


def agent(i, p, v=(0.0, 0.0), m=1.0):
    return AgentState(i, np.array(p, float), np.array(v, float), m)


# displacement_vector

@pytest.mark.parametrize(
    "pi, pj, rest, expected",
    [
        ((1, 0), (0, 0), 1, (0, 0)),
        ((2, 0), (0, 0), 1, (1, 0)),
        ((0, 0.5), (0, 0), 1, (0, -0.5)),
    ],
)
def test_displacement_examples(pi, pj, rest, expected):
    np.testing.assert_allclose(displacement_vector(pi, pj, rest), expected, atol=1e-15)


def test_displacement_matches_reference_formula():
    rng = np.random.default_rng(3)
    for _ in range(200):
        pi, pj = rng.uniform(-10, 10, 2), rng.uniform(-10, 10, 2)
        rest = rng.uniform(0, 5)
        # -k d with k = 1, no damping, is exactly -d
        fx, fy = pair_force_ref(pi, pj, (0, 0), (0, 0), rest, 1.0, 0.0)
        np.testing.assert_allclose(displacement_vector(pi, pj, rest), (-fx, -fy), rtol=1e-12, atol=1e-12)


def test_coincident_agents_get_deterministic_opposite_directions():
    d_ij = displacement_vector((3, 3), (3, 3), 1.0, (2, 5))
    d_ji = displacement_vector((3, 3), (3, 3), 1.0, (5, 2))
    assert np.all(np.isfinite(d_ij))
    assert math.isclose(np.hypot(*d_ij), 1.0)
    np.testing.assert_array_equal(d_ij, -d_ji)
    np.testing.assert_array_equal(separation_direction(2, 5), separation_direction(2, 5))
    assert not np.allclose(separation_direction(2, 5), separation_direction(2, 6))


# pair_force

def test_pair_force_examples():
    link = SpringLink(0, 1, 1.0, 1.0, 0.0)
    np.testing.assert_allclose(pair_force(link, agent(0, (1, 0), (2, 2)), agent(1, (0, 0), (2, 2))), (0, 0))
    np.testing.assert_allclose(pair_force(link, agent(0, (2, 0)), agent(1, (0, 0))), (-1, 0))
    damped = SpringLink(0, 1, 1.0, 1.0, 0.5)
    np.testing.assert_allclose(pair_force(damped, agent(0, (1, 0), (1, 0)), agent(1, (0, 0))), (-0.5, 0))


def test_pair_force_rejects_mismatched_agents():
    with pytest.raises(ValueError):
        pair_force(SpringLink(0, 1, 1, 1, 0), agent(1, (0, 0)), agent(0, (1, 0)))


# net_force

def test_net_force_isolated_agent_is_zero():
    w = World([[0, 0], [5, 5]])
    np.testing.assert_array_equal(net_force(0, w, LinkSet([1], [0], 1, 1, 1)), (0, 0))


def test_net_force_symmetric_neighbors_cancel():
    angles = np.array([0, 2 * np.pi / 3, 4 * np.pi / 3])
    pos = np.vstack([[0, 0], 2.0 * np.c_[np.cos(angles), np.sin(angles)]])
    w = World(pos)
    links = LinkSet([0, 0, 0], [1, 2, 3], 2.0, 0.7, 0.3)
    np.testing.assert_allclose(net_force(0, w, links), (0, 0), atol=1e-15)
    # also cancels off rest length by symmetry
    links = LinkSet([0, 0, 0], [1, 2, 3], 1.0, 0.7, 0.3)
    np.testing.assert_allclose(net_force(0, w, links), (0, 0), atol=1e-14)


def test_net_force_is_sum_of_pair_forces():
    # pair forces (-1, 0) and (0, 2) add to (-1, 2)
    w = World([[0, 0], [-2, 0], [0, 3]])
    links = LinkSet([0, 0], [1, 2], [1.0, 1.0], [1.0, 1.0], 0.0)
    f1 = pair_force_ref(w.positions[0], w.positions[1], (0, 0), (0, 0), 1, 1, 0)
    f2 = pair_force_ref(w.positions[0], w.positions[2], (0, 0), (0, 0), 1, 1, 0)
    np.testing.assert_allclose(f1, (-1, 0))
    np.testing.assert_allclose(f2, (0, 2))
    np.testing.assert_allclose(net_force(0, w, links), (-1, 2))


def test_net_forces_match_reference_on_random_graphs():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = 12
        w = World(rng.uniform(0, 50, (n, 2)), rng.normal(0, 1, (n, 2)))
        pairs = {(int(a), int(b)) for a, b in rng.integers(0, n, (40, 2)) if a != b}
        src, dst = zip(*sorted(pairs))
        rest, k, b = rng.uniform(0, 10, len(src)), rng.uniform(0, 1, len(src)), rng.uniform(0, 1, len(src))
        links = LinkSet(src, dst, rest, k, b)
        ref_links = list(zip(src, dst, rest, k, b))
        got = net_forces(w, links)
        for i in range(n):
            np.testing.assert_allclose(got[i], net_force_ref(i, w.positions, w.velocities, ref_links), rtol=1e-12, atol=1e-12)


# integrate_step

def test_single_free_agent_only_advances_clock():
    w = World([[1, 2]])
    w2 = integrate_step(w, LinkSet(), SimParams())
    np.testing.assert_array_equal(w2.positions, w.positions)
    np.testing.assert_array_equal(w2.velocities, w.velocities)
    assert w2.time == w.time + 1


def test_two_body_unit_step_hand_evaluation():
    w = World([[0, 0], [2, 0]])
    links = LinkSet([0, 1], [1, 0], 1.0, 1.0, 0.0)
    w2 = integrate_step(w, links, SimParams(dt=1.0))
    np.testing.assert_allclose(w2.velocities, [[1, 0], [-1, 0]])
    np.testing.assert_allclose(w2.positions, [[1, 0], [1, 0]])
    # the input buffer is untouched
    np.testing.assert_array_equal(w.positions, [[0, 0], [2, 0]])


def test_damping_only_speeds_decrease_like_closed_form():
    b = 0.2
    w = World([[0, 0], [1, 0]], [[0, 0.3], [0, -0.3]])
    links = LinkSet([0, 1], [1, 0], 1.0, 0.0, b)
    speed = 0.3
    for _ in range(10):
        w = integrate_step(w, links, SimParams())
        # relative velocity shrinks by (1 - 2b) each step; each agent carries half
        speed *= 1 - 2 * b
        np.testing.assert_allclose(np.abs(w.velocities[:, 1]), speed, rtol=1e-12)


def test_external_force_and_mass():
    w = World([[0, 0]], masses=[2.0])
    w2 = integrate_step(w, LinkSet(), SimParams(dt=0.5), {0: np.array([4.0, 0.0])})
    np.testing.assert_allclose(w2.velocities, [[1.0, 0]])
    np.testing.assert_allclose(w2.positions, [[0.5, 0]])


def test_max_speed_clamps_preserving_direction():
    w = World([[0, 0]])
    w2 = integrate_step(w, LinkSet(), SimParams(max_speed=1.0), {0: (3.0, 4.0)})
    np.testing.assert_allclose(w2.velocities, [[0.6, 0.8]])


def test_divergence_names_agent():
    w = World([[0, 0], [1, 0], [2, 0]])
    with pytest.raises(NumericalDivergence) as err:
        integrate_step(w, LinkSet(), SimParams(), {2: (np.inf, 0.0)})
    assert err.value.agent_id == 2
    assert "agent 2" in str(err.value)


def test_two_body_converges_to_rest_length_matches_oracle():
    L = 10.0
    links = LinkSet([0, 1], [1, 0], L, 0.05, 0.4)
    for frac in np.linspace(0.1, 5.0, 25):
        w = World([[0, 0], [frac * L, 0]])
        ref = two_body_unit_step(0.05, 0.4, L, frac * L, 200)
        for t in range(200):
            w = integrate_step(w, links, SimParams(dt=1.0))
            assert math.isclose(w.positions[1, 0] - w.positions[0, 0], ref[t], rel_tol=1e-9, abs_tol=1e-9)
        sep = np.hypot(*(w.positions[1] - w.positions[0]))
        assert abs(sep - L) < 1e-3 * L


# kinetic energy

@pytest.mark.parametrize(
    "vels, masses, expected",
    [
        ([[0, 0], [0, 0]], [1, 1], 0.0),
        ([[3, 4]], [1], 12.5),
        ([[1, 0], [0, 1]], [1, 2], 1.5),
    ],
)
def test_kinetic_energy(vels, masses, expected):
    w = World(np.zeros((len(vels), 2)), vels, masses)
    assert kinetic_energy(w) == pytest.approx(expected)


# data model checks

def test_types_reject_bad_values():
    with pytest.raises(ValueError):
        AgentState(0, np.zeros(2), np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        SpringLink(1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        SpringLink(0, 1, -1, 1, 1)
    with pytest.raises(ValueError):
        LinkSet([0, 0], [1, 1], 1, 1, 1)
    with pytest.raises(ValueError):
        LinkSet([0], [1], 1, math.nan, 1)
    with pytest.raises(ValueError):
        SimParams(dt=0)
    with pytest.raises(ValueError):
        World([[0, 0]], masses=[-1])


def test_world_agent_round_trip_and_neighbor_set():
    w = World([[0, 0], [1, 1]], [[1, 0], [0, 1]], [1.0, 3.0], time=4)
    w2 = World.from_agents(w.agents, time=w.time)
    np.testing.assert_array_equal(w2.positions, w.positions)
    np.testing.assert_array_equal(w2.masses, w.masses)
    links = LinkSet.from_links([SpringLink(0, 1, 1, 1, 1), SpringLink(1, 0, 1, 1, 1)])
    assert links.neighbors(0) == [1]
    assert [l.src for l in links] == [0, 1]


# properties

@st.composite
def pair_scene(draw):
    pi = np.array([draw(coord), draw(coord)])
    pj = np.array([draw(coord), draw(coord)])
    if np.hypot(*(pi - pj)) < 1e-3:
        pj = pi + np.array([1.0, 0.0])
    vi = np.array([draw(vel), draw(vel)])
    vj = np.array([draw(vel), draw(vel)])
    rest = draw(st.floats(0, 20))
    k = draw(st.floats(0, 2))
    b = draw(st.floats(0, 2))
    return pi, pj, vi, vj, rest, k, b


def check_newton_third_law(scene):
    pi, pj, vi, vj, rest, k, b = scene
    fij = pair_force(SpringLink(0, 1, rest, k, b), agent(0, pi, vi), agent(1, pj, vj))
    fji = pair_force(SpringLink(1, 0, rest, k, b), agent(1, pj, vj), agent(0, pi, vi))
    np.testing.assert_array_equal(fij, -fji)


def check_translation_invariance(scene, shift):
    pi, pj, vi, vj, rest, k, b = scene
    link = SpringLink(0, 1, rest, k, b)
    f = pair_force(link, agent(0, pi, vi), agent(1, pj, vj))
    g = pair_force(link, agent(0, pi + shift, vi), agent(1, pj + shift, vj))
    np.testing.assert_allclose(f, g, atol=1e-9 * (1 + np.abs(f).max()) + 1e-9)


def check_rotation_equivariance(scene, theta):
    pi, pj, vi, vj, rest, k, b = scene
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    link = SpringLink(0, 1, rest, k, b)
    f = pair_force(link, agent(0, pi, vi), agent(1, pj, vj))
    g = pair_force(link, agent(0, R @ pi, R @ vi), agent(1, R @ pj, R @ vj))
    np.testing.assert_allclose(R @ f, g, atol=1e-9)


shift_st = st.tuples(coord, coord).map(np.array)
theta_st = st.floats(0, 2 * math.pi)


@settings(max_examples=200, deadline=None)
@given(pair_scene())
def test_newton_third_law(scene):
    check_newton_third_law(scene)


@settings(max_examples=200, deadline=None)
@given(pair_scene(), shift_st)
def test_translation_invariance(scene, shift):
    check_translation_invariance(scene, shift)


@settings(max_examples=200, deadline=None)
@given(pair_scene(), theta_st)
def test_rotation_equivariance(scene, theta):
    check_rotation_equivariance(scene, theta)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_energy_non_increasing_at_end_of_symmetric_run(seed):
    rng = np.random.default_rng(seed)
    n = 8
    w = World(rng.uniform(0, 30, (n, 2)))
    src, dst = [], []
    for i in range(n):
        for j in (i + 1, i + 2):
            if j < n:
                src += [i, j]
                dst += [j, i]
    links = LinkSet(src, dst, 10.0, 0.05, 0.1)
    energies = []
    for _ in range(1200):
        w = integrate_step(w, links, SimParams())
        energies.append(kinetic_energy(w) + spring_energy(w, links))
    tail = np.array(energies[-300:])
    assert np.all(np.diff(tail) <= 1e-12 * max(energies[0], 1.0))


def test_integration_is_bit_deterministic():
    rng = np.random.default_rng(5)
    start = World(rng.uniform(0, 40, (15, 2)))
    links = LinkSet(*zip(*[(i, (i + 1) % 15) for i in range(15)]), 5.0, 0.05, 0.1)
    a = b = start
    for _ in range(100):
        a = integrate_step(a, links, SimParams())
        b = integrate_step(b, links, SimParams())
    assert a.positions.tobytes() == b.positions.tobytes()

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasegrad import graph
from phasegrad.graph import (
    CouplingGraph,
    DisconnectedGraphError,
    build_erdos_renyi,
    build_layered,
    eig_symmetric,
    laplacian,
)
from phasegrad.rng import Xoshiro256StarStar


def path3() -> CouplingGraph:
    return CouplingGraph(
        n=3, input_nodes=(0,), hidden_nodes=(1,), output_nodes=(2,),
        edges=((0, 1, 1.0), (1, 2, 1.0)))


# --- CouplingGraph validation ---

def test_partition_must_cover():
    with pytest.raises(ValueError):
        CouplingGraph(3, (0,), (1,), (), edges=((0, 1, 1.0), (1, 2, 1.0)))


def test_partition_must_be_disjoint():
    with pytest.raises(ValueError):
        CouplingGraph(3, (0, 1), (1,), (2,), edges=((0, 1, 1.0), (1, 2, 1.0)))


def test_edge_ordering_enforced():
    with pytest.raises(ValueError):
        CouplingGraph(2, (0,), (), (1,), edges=((1, 0, 1.0),))


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        CouplingGraph(2, (0,), (), (1,), edges=((0, 1, -0.5),))


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraphError):
        CouplingGraph(4, (0, 1), (), (2, 3),
                      edges=((0, 1, 1.0), (2, 3, 1.0)))


def test_zero_weight_edge_does_not_connect():
    with pytest.raises(DisconnectedGraphError):
        CouplingGraph(3, (0,), (1,), (2,),
                      edges=((0, 1, 1.0), (1, 2, 0.0)))


def test_override_requires_underlying_edge():
    with pytest.raises(ValueError):
        CouplingGraph(3, (0,), (1,), (2,),
                      edges=((0, 1, 1.0), (1, 2, 1.0)),
                      directed_overrides=((2, 0, 1.0),))


def test_coupling_matrix_symmetric_and_overridable():
    g = path3()
    k = g.coupling_matrix()
    assert np.array_equal(k, k.T)
    assert k[0, 1] == 1.0 and k[1, 2] == 1.0 and k[0, 2] == 0.0

    g2 = CouplingGraph(3, (0,), (1,), (2,),
                       edges=((0, 1, 1.0), (1, 2, 1.0)),
                       directed_overrides=((1, 0, 2.5),))
    k2 = g2.coupling_matrix()
    assert k2[1, 0] == 2.5
    assert k2[0, 1] == 1.0  # other direction untouched


# --- builders ---

def test_layered_edge_counts_match_parameter_table():
    # five sweep sizes: (hidden, expected K parameters)
    for n_hid, expect in [(3, 14), (5, 24), (7, 34), (10, 49), (15, 74)]:
        g = build_layered(2, n_hid, 2, 3.0)
        assert g.edge_count == expect
        assert g.n == n_hid + 4


def test_layered_minimal():
    g = build_layered(1, 1, 1, 1.0)
    # bipartite blocks only; a single hidden node contributes no chain
    assert g.edge_count == 2
    assert g.input_nodes == (0,) and g.hidden_nodes == (1,) and g.output_nodes == (2,)


def test_layered_structure():
    g = build_layered(2, 5, 2, 3.0)
    k = g.coupling_matrix()
    assert g.input_nodes == (0, 1)
    assert g.hidden_nodes == (2, 3, 4, 5, 6)
    assert g.output_nodes == (7, 8)
    # no input-input, input-output, or output-output edges
    assert k[0, 1] == 0.0
    assert k[7, 8] == 0.0
    assert np.all(k[np.ix_((0, 1), (7, 8))] == 0.0)
    # hidden chain present
    for a, b in [(2, 3), (3, 4), (4, 5), (5, 6)]:
        assert k[a, b] == 3.0
    # chain is a path, not a cycle
    assert k[2, 4] == 0.0
    assert np.all(k[np.ix_((0, 1), (2, 3, 4, 5, 6))] == 3.0)
    assert np.all(k[np.ix_((2, 3, 4, 5, 6), (7, 8))] == 3.0)


def test_layered_rejects_empty_layer():
    with pytest.raises(ValueError):
        build_layered(0, 5, 2, 3.0)


def test_er_complete_when_p_is_one():
    g = build_erdos_renyi(5, 1.0, 2.0, Xoshiro256StarStar(0))
    assert g.edge_count == 10


def test_er_deterministic_per_seed():
    g1 = build_erdos_renyi(10, 0.6, 5.0, Xoshiro256StarStar(123))
    g2 = build_erdos_renyi(10, 0.6, 5.0, Xoshiro256StarStar(123))
    assert g1.edges == g2.edges


def test_er_edge_count_matches_binomial():
    counts = [
        build_erdos_renyi(10, 0.6, 5.0, Xoshiro256StarStar(s)).edge_count
        for s in range(1000)
    ]
    mean = np.mean(counts)
    # 45 pairs at p=0.6: mean 27, sd of the sample mean ~ 3.29/sqrt(1000).
    # Conditioning on connectivity biases this upward by well under 3 sigma.
    assert abs(mean - 27.0) < 3 * 3.29 / np.sqrt(1000)


def test_er_weights_have_requested_mean():
    ws = []
    for s in range(200):
        g = build_erdos_renyi(10, 0.6, 5.0, Xoshiro256StarStar(s))
        ws.extend(w for _, _, w in g.edges)
    ws = np.array(ws)
    assert np.all(ws > 0)
    assert abs(ws.mean() - 5.0) < 0.1


# --- laplacian / reduce ---

def test_laplacian_single_edge():
    g = CouplingGraph(2, (0,), (), (1,), edges=((0, 1, 2.0),))
    lap = laplacian(g, g.edge_weights())
    assert np.array_equal(lap, np.array([[2.0, -2.0], [-2.0, 2.0]]))


def test_laplacian_path3_eigenvalues():
    g = path3()
    lap = laplacian(g, g.edge_weights())
    vals = np.linalg.eigvalsh(lap)
    # characteristic polynomial by hand: lambda (lambda-1)(lambda-3)
    assert np.allclose(vals, [0.0, 1.0, 3.0], atol=1e-12)


def test_laplacian_row_sums_zero():
    g = build_erdos_renyi(20, 0.4, 5.0, Xoshiro256StarStar(2))
    lap = laplacian(g, g.edge_weights())
    assert np.max(np.abs(lap.sum(axis=1))) <= 1e-14 * max(1.0, np.abs(lap).max())


def test_reduce_shapes_and_values():
    m = np.arange(9.0).reshape(3, 3)
    r = graph.reduce(m, 1)
    assert np.array_equal(r, np.array([[0.0, 2.0], [6.0, 8.0]]))
    assert graph.reduce(np.eye(3), 0).shape == (2, 2)
    assert np.array_equal(graph.reduce(np.eye(3), 2), np.eye(2))


def test_reduced_path3_eigenvalues():
    # det([[2-x, -1], [-1, 1-x]]) = x^2 - 3x + 1, roots (3 +- sqrt 5)/2
    g = path3()
    red = graph.reduce(laplacian(g, g.edge_weights()), 0)
    vals = np.linalg.eigvalsh(red)
    expect = [(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2]
    assert np.allclose(vals, expect, atol=1e-12)
    assert np.all(vals > 0)  # connected graph: reduced Laplacian is PD


def test_reduce_rejects_bad_pin():
    with pytest.raises(ValueError):
        graph.reduce(np.eye(3), 5)


# --- eig_symmetric ---

def test_eig_identity():
    dec = eig_symmetric(np.eye(4))
    assert np.allclose(dec.eigenvalues, 1.0)


def test_eig_diagonal_sorted_ascending():
    dec = eig_symmetric(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [1.0, 2.0, 3.0])
    # eigenvectors are signed unit vectors; canonical sign is positive
    perm = np.abs(dec.eigenvectors)
    assert np.allclose(perm, np.eye(3)[:, [1, 2, 0]])
    assert np.all(dec.eigenvectors[np.argmax(perm, axis=0), range(3)] > 0)


def test_eig_rejects_asymmetric():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        eig_symmetric(m)


def test_eig_reconstruction_and_orthonormality():
    rng = Xoshiro256StarStar(77)
    raw = np.array([[rng.normal() for _ in range(20)] for _ in range(20)])
    m = (raw + raw.T) / 2
    dec = eig_symmetric(m)
    v, lam = dec.eigenvectors, dec.eigenvalues
    assert np.max(np.abs(v @ np.diag(lam) @ v.T - m)) <= 1e-9
    assert np.max(np.abs(v.T @ v - np.eye(20))) <= 1e-10
    resid = m @ v - v * lam
    assert np.max(np.abs(resid)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_laplacian_psd_and_reduced_pd(seed):
    g = build_erdos_renyi(12, 0.5, 4.0, Xoshiro256StarStar(seed))
    lap = laplacian(g, g.edge_weights())
    vals = np.linalg.eigvalsh(lap)
    assert vals[0] >= -1e-10
    red_vals = np.linalg.eigvalsh(graph.reduce(lap, 0))
    assert np.all(red_vals > 0)

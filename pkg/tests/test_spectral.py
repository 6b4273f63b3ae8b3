import math

import numpy as np
import pytest

import platoon_risk as pr
from platoon_risk.spectral import pcycle_eigenvalue

RNG = np.random.default_rng(42)


def reconstruction_error(graph):
    spec = pr.graph_spectrum(graph)
    lap = graph.laplacian().matrix
    rec = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.T
    return np.abs(rec - lap).max()


def test_complete_eigenvalues_all_n():
    for n in (3, 8, 20):
        spec = pr.graph_spectrum(pr.complete_graph(n))
        assert spec.eigenvalues[0] == 0.0
        assert np.allclose(spec.eigenvalues[1:], n, atol=1e-10)


def test_path3_eigenvalues():
    spec = pr.graph_spectrum(pr.path_graph(3))
    assert np.allclose(spec.eigenvalues, [0.0, 1.0, 3.0], atol=1e-12)


def test_zero_mode_eigenvector_uniform():
    for graph in (pr.path_graph(6), pr.pcycle_graph(7, 2), pr.complete_graph(5)):
        spec = pr.graph_spectrum(graph)
        n = graph.n
        assert spec.eigenvalues[0] == 0.0
        assert np.allclose(spec.eigenvectors[:, 0], 1.0 / math.sqrt(n), atol=1e-10)


def test_orthonormality_and_reconstruction_small():
    for _ in range(10):
        n = int(RNG.integers(3, 12))
        w = RNG.uniform(0.0, 1.0, (n, n))
        w = (w + w.T) / 2
        w[w < 0.4] = 0.0
        np.fill_diagonal(w, 0.0)
        # ensure connectivity with a path backbone
        for i in range(n - 1):
            w[i, i + 1] = w[i + 1, i] = max(w[i, i + 1], 0.5)
        graph = pr.CommGraph(n, w)
        spec = pr.graph_spectrum(graph)
        q = spec.eigenvectors
        assert np.abs(q.T @ q - np.eye(n)).max() < 1e-10
        assert reconstruction_error(graph) < 1e-9
        assert np.all(spec.eigenvalues >= 0)
        assert np.sum(np.abs(spec.eigenvalues) < 1e-9) == 1


def test_reconstruction_n200():
    assert reconstruction_error(pr.path_graph(200)) < 1e-9


def test_sign_convention_deterministic():
    graph = pr.pcycle_graph(9, 2)
    a = pr.graph_spectrum(graph)
    b = pr.graph_spectrum(graph)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    for k in range(graph.n):
        col = a.eigenvectors[:, k]
        assert col[int(np.argmax(np.abs(col)))] > 0


def test_closed_form_path_eigenvalues_match_numeric():
    for n in range(3, 51):
        closed = pr.closed_form_spectrum("path", n)
        numeric = pr.graph_spectrum(pr.path_graph(n))
        assert np.abs(closed.eigenvalues - numeric.eigenvalues).max() < 1e-9


def test_closed_form_path_lambda2_value():
    closed = pr.closed_form_spectrum("path", 20)
    assert closed.eigenvalues[1] == pytest.approx(2.0 * (1.0 - math.cos(math.pi / 20)), abs=1e-12)


def test_closed_form_complete20():
    spec = pr.closed_form_spectrum("complete", 20)
    assert np.all(spec.eigenvalues[1:] == 20.0)
    lap = pr.complete_graph(20).laplacian().matrix
    resid = np.abs(lap @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues[None, :]).max()
    assert resid < 1e-12


def test_closed_form_pcycle_ring4():
    spec = pr.closed_form_spectrum("pcycle", 4, p=1)
    assert np.allclose(np.sort(spec.eigenvalues), [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_closed_form_pcycle_matches_numeric():
    for n, p in ((5, 1), (8, 2), (9, 3), (12, 2)):
        closed = pr.closed_form_spectrum("pcycle", n, p=p)
        numeric = pr.graph_spectrum(pr.pcycle_graph(n, p))
        assert np.abs(closed.eigenvalues - numeric.eigenvalues).max() < 1e-9
        lap = pr.pcycle_graph(n, p).laplacian().matrix
        resid = np.abs(
            lap @ closed.eigenvectors - closed.eigenvectors * closed.eigenvalues[None, :]
        ).max()
        assert resid < 1e-8


def test_pcycle_eigenvalue_identity():
    # the Dirichlet-kernel identity agrees with the cosine-sum eigenvalues
    for n, p in ((8, 2), (11, 3)):
        numeric = pr.graph_spectrum(pr.pcycle_graph(n, p))
        vals = sorted(pcycle_eigenvalue(n, p, k) for k in range(1, n + 1))
        assert np.abs(np.sort(numeric.eigenvalues) - np.asarray(vals)).max() < 1e-9

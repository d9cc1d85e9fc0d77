import numpy as np
import pytest
from scipy.integrate import quad

from henon_morse.closed_forms import eta1
from henon_morse.errors import DomainError
from henon_morse.spectrum import (
    GradedMesh,
    assemble,
    assemble_pair,
    graded_mesh,
    limit_spectrum,
    lowest_spectrum,
    mass_product,
    negative_spectrum,
    profile_mesh,
    rescale_eigenfunction,
    solve_spectrum,
    weight_moments,
)

from conftest import SPECTRAL_INSTANCES, _sweep
from oracles import dense_pencil


def test_graded_mesh_shape():
    m = graded_mesh(0.0, 1.0, 500)
    t = m.nodes
    assert t[0] == 0.0 and t[-1] == 1.0 and m.size == 500
    h = np.diff(t)
    assert h[0] == pytest.approx(1e-8, rel=1e-12)
    np.testing.assert_allclose(h[1:-1] / h[:-2], m.ratio, rtol=1e-9)
    m2 = graded_mesh(2.0, 5.0, 100, first=1e-3)
    assert m2.nodes[0] == 2.0 and m2.nodes[1] - 2.0 == pytest.approx(1e-3)
    with pytest.raises(DomainError):
        graded_mesh(0.0, 1.0, 50)
    with pytest.raises(DomainError):
        graded_mesh(1.0, 0.5, 200)


@pytest.mark.parametrize("q", [-0.6, 0.0, 1.0, 2.0, 5 / 3 - 1, 7.3])
@pytest.mark.parametrize("a, b", [(0.0, 1e-3), (1.0, 1.001), (0.3, 0.9), (5.0, 5.0 + 1e-9)])
def test_weight_moments_against_quadrature(q, a, b):
    if a == 0.0 and q <= -1:
        pytest.skip("not integrable")
    aa, ab, bb = weight_moments(np.array([a]), np.array([b]), q)
    h = b - a
    # in the local coordinate t = a + h s, so short elements lose no digits
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    ref = [h * quad(lambda s: (a + h * s) ** q * w(s), 0.0, 1.0, **opts)[0]
           for w in (lambda s: (1 - s) ** 2, lambda s: s * (1 - s), lambda s: s * s)]
    np.testing.assert_allclose([aa[0], ab[0], bb[0]], ref, rtol=1e-10)


@pytest.mark.parametrize("M", [3.0, 8 / 3, 4.5])
@pytest.mark.parametrize("k", [1, 57, 140])
def test_single_hat_rayleigh_quotient(M, k):
    mesh = graded_mesh(0.0, 1.0, 200)
    ops = assemble_pair(mesh, M)
    A, B = dense_pencil(ops.pencil)
    t = mesh.nodes
    a, c, b = t[k - 1], t[k], t[k + 1]
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    stiff = (quad(lambda s: s ** (M - 1), a, c, **opts)[0] / (c - a) ** 2
             + quad(lambda s: s ** (M - 1), c, b, **opts)[0] / (b - c) ** 2)
    mass = (quad(lambda s: s ** (M - 3) * ((s - a) / (c - a)) ** 2, a, c, **opts)[0]
            + quad(lambda s: s ** (M - 3) * ((b - s) / (b - c)) ** 2, c, b, **opts)[0])
    assert A[k, k] / B[k, k] == pytest.approx(stiff / mass, rel=1e-10)


def test_mass_form_positive_definite():
    ops = assemble_pair(graded_mesh(0.0, 1.0, 150), 3.0)
    _, B = dense_pencil(ops.pencil)
    np.linalg.cholesky(B)
    assert all(np.linalg.det(B[:k, :k] / B[0, 0]) > 0 for k in range(1, 8))


def test_zero_potential_hardy_level_from_above():
    # the infimum 1/4 is only approached as the mesh reaches ever smaller scales
    gaps = []
    for first in (1e-4, 1e-8, 1e-16, 1e-32):
        ops = assemble_pair(graded_mesh(0.0, 1.0, 2000, first=first), 3.0)
        assert negative_spectrum(ops).count == 0
        nu = ops.pencil.lowest(1)[0][0]
        gaps.append(nu - 0.25)
    assert all(g > 0 for g in gaps)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 0.01


def test_lowest_spectrum_caps_at_hardy():
    ops = assemble_pair(graded_mesh(0.0, 1.0, 400), 3.0)
    res = lowest_spectrum(ops, 5)
    assert np.all(res.nu < 0.25) and res.count == 0


@pytest.mark.parametrize("inst", SPECTRAL_INSTANCES, ids=str)
def test_spectral_structure(solve_instance, inst):
    N, alpha, m, p = inst
    prof, st, spec, off = solve_instance(*inst)
    M = prof.M
    assert spec.count == m
    assert np.all(np.diff(spec.nu) > 0)
    assert np.all(spec.nu < spec.hardy_threshold)
    np.testing.assert_allclose(spec.b_gram(), np.eye(m), atol=1e-8)
    for k in range(m):
        assert spec.sign_changes(k) == k
    # one-sided bounds, certified by the offsets from -(M - 1)
    assert np.all(off[:-1] < 0) and off[-1] > 0
    assert -(M - 1) < spec.nu[-1] < 0
    assert np.all(spec.nu[:-1] < -(M - 1))


def test_psi_vanishes_at_outer_boundary(solve_instance):
    _, _, spec, _ = solve_instance(3, 0, 2, 4.5)
    assert np.all(spec.psi[-1] == 0.0)
    assert spec.boundary_flux.shape == (2,)


def test_mesh_refinement_monotone(solve_instance):
    prof, st, _, _ = solve_instance(3, 0, 2, 4.5)
    nus = np.array([solve_spectrum(prof, st, n_nodes=n).nu for n in (2000, 4000, 8000)])
    assert np.all(np.diff(nus, axis=0) < 1e-8)


def test_assemble_rejects_foreign_mesh(solve_instance):
    prof, _, _, _ = solve_instance(3, 0, 2, 4.5)
    with pytest.raises(DomainError):
        assemble(prof, graded_mesh(0.0, 2.0, 200))


@pytest.mark.parametrize("i", [0, 1])
@pytest.mark.parametrize("j", [1, 2])
def test_rescaled_eigenfunction_normalization(solve_instance, i, j):
    prof, st, spec, _ = solve_instance(3, 0, 2, 4.9)
    f = rescale_eigenfunction(spec, st, i, j)
    lo, hi = st.zone(i)
    t = spec.mesh.nodes
    zone = GradedMesh(np.unique(np.concatenate(([lo], t[(t > lo) & (t < hi)], [hi]))), 1.0, lo, hi)
    psi = np.interp(zone.nodes, t, spec.psi[:, j - 1])
    original = mass_product(zone, prof.M, psi, psi)
    stretched = GradedMesh(f.nodes, 1.0, f.lo, f.hi)
    assert mass_product(stretched, prof.M, f.values, f.values) == pytest.approx(original, rel=1e-10)
    assert f(f.hi * 1.5) == 0.0
    if f.lo > 0:
        assert f(0.5 * f.lo) == 0.0
    with pytest.raises(IndexError):
        rescale_eigenfunction(spec, st, 2, 1)
    with pytest.raises(IndexError):
        rescale_eigenfunction(spec, st, 0, 3)


def test_first_eigenfunction_shape_tends_to_eta1(solve_instance):
    dists = []
    r = np.geomspace(0.1, 10, 500)
    e = eta1(3.0, r)
    for inst in _sweep(3, 0, 2):
        _, st, spec, _ = solve_instance(*inst)
        y = rescale_eigenfunction(spec, st, 0, 1)(r)
        A = y @ e / (e @ e)
        dists.append(np.max(np.abs(y - A * e)) / abs(A))
    assert np.all(np.diff(dists) < 0)


def test_offsets_agree_with_direct_differences(solve_instance):
    # where the discretization error is small against the offset both routes agree
    _, _, spec, off = solve_instance(3, 0, 2, 4.5)
    assert off[0] == pytest.approx(spec.nu[0] + 2, rel=1e-6)


def test_profile_mesh_resolves_first_bubble(solve_instance):
    prof, st, _, _ = solve_instance(3, 0, 2, 4.9921875)
    mesh = profile_mesh(prof, st, 1000)
    assert mesh.nodes[1] <= 1e-3 / st.scaled_extremal_values[0] * (1 + 1e-12)


@pytest.mark.parametrize("M", [3.0, 8 / 3])
def test_limit_truncation_errors_shrink_with_R(M):
    dirichlet = [limit_spectrum(M, R=R, n_nodes=4000, boundary="dirichlet") for R in (100, 200, 400)]
    # the zero-energy state is lost under the Dirichlet cut, and its shadow falls with R
    nxt = [d.next_eigenvalue for d in dirichlet]
    assert all(d.nu.size == 1 for d in dirichlet)
    assert np.all(np.diff(nxt) < 0) and nxt[-1] > 0
    errs = [d.closed_form_errors()[0][0] for d in dirichlet]
    assert np.all(np.diff(errs) < 0)
    robin = [limit_spectrum(M, R=R, n_nodes=4000) for R in (100, 200)]
    e = [np.array(r.closed_form_errors()) for r in robin]
    assert all(r.nu.size == 2 for r in robin)
    assert np.all(e[1][:, 0] < e[0][:, 0])


def test_limit_bad_boundary():
    with pytest.raises(DomainError):
        limit_spectrum(3.0, boundary="neumann")

import math

import numpy as np
import pytest

import laakso_lab as ll


def test_instance_counts_and_coords():
    inst = ll.build_instance(p=4.0, eps=1 / 16, k=3)
    assert inst.n == 174
    assert inst.k == 3
    coords = inst.coords()
    assert coords.shape == (174, 4)
    n, per_level = ll.closed_form_counts(3)
    assert n == 174
    assert per_level == [1, 6, 36, 216]
    assert len(inst.edges()) == 1 + 6 + 36 + 216
    assert len(inst.diagonals()) == 1 + 6 + 36


def test_bad_params_raise():
    with pytest.raises(ValueError):
        ll.build_instance(p=2.0, eps=0.01, k=1)
    with pytest.raises(ll.LaaksoError):
        ll.build_instance(p=4.0, eps=0.2, k=1)


def test_lp_and_segment():
    assert ll.lp_dist([1.0, 1.0], [0.0, 0.0], 4.0) == pytest.approx(2 ** 0.25)
    assert ll.point_segment_distance([0.0, 0.125], [1.0, 0.0], [-1.0, 0.0], 4.0) == pytest.approx(0.125)


def test_identity_and_projection_distortion():
    inst = ll.build_instance(p=4.0, eps=1 / 16, k=2)
    ident = ll.identity_embedding(inst)
    assert ll.distortion(inst, ident)["distortion"] == pytest.approx(1.0)
    g = ll.gaussian_projection(inst, 2, 5)
    assert g.images.shape == (inst.n, 2)
    again = ll.gaussian_projection(inst, 2, 5)
    assert np.array_equal(g.images, again.images)
    report = ll.distortion(inst, g)
    assert report["distortion"] >= 1.0
    norm = ll.normalize_nonexpansive(inst, g)
    assert ll.distortion(inst, norm)["max_expansion"] == pytest.approx(1.0)


def test_external_embedding_from_numpy():
    inst = ll.build_instance(p=4.0, eps=1 / 16, k=1)
    emb = ll.Embedding(inst.coords() * 2.0, q=4.0)
    assert ll.distortion(inst, emb)["distortion"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ll.distortion(inst, ll.Embedding(np.zeros((3, 2)), q=4.0))


def test_certifier_helpers():
    assert ll.potential_cap(16, 4.0) == pytest.approx(4.0)
    assert ll.epsilon_for(16, 2.0, 4.0) == pytest.approx(1 / 64)
    eps = ll.epsilon_for(3, 1.0, 4.0)
    inst = ll.build_instance(p=4.0, eps=eps, k=2)
    ident = ll.identity_embedding(inst)
    assert ll.edge_potential(inst, ident, 0) == pytest.approx(1.0)
    w = ll.witness_chain(inst, ident, 1.0)
    assert not w["violated"]
    assert len(w["chain"]) == 3
    assert all(x >= (eps ** 2) * (1 - 1e-9) for x in w["increments"])
    assert ll.certified_lower_bound(inst, 2) <= 1.0
    with pytest.raises(ValueError):
        ll.witness_chain(ll.build_instance(p=4.0, eps=1 / 16, k=2), ident, 1.0)


def test_stress_and_probes():
    inst = ll.build_instance(p=4.0, eps=1 / 16, k=2)
    emb = ll.stress_minimize(inst, 2, seed=1, restarts=1, iterations=100)
    assert emb.images.shape == (inst.n, 2)
    assert emb.method == "stress"
    assert 1.0 <= ll.distortion(inst, emb)["distortion"] < 3.0
    est = ll.doubling_estimate(inst)
    assert est["lambda_hat"] >= 1
    env = ll.envelope_check(inst)
    assert env["all_pass"]


def test_json_round_trip():
    inst = ll.build_instance(p=8.0, eps=1 / 9, k=2)
    back = ll.Instance.from_json(inst.to_json())
    assert back.n == inst.n
    assert np.array_equal(back.coords(), inst.coords())
    assert math.isclose(back.eps, inst.eps)

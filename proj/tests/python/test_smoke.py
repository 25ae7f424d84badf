import math

import numpy as np
import pytest

import csekit


def test_info_nce_symmetric_case_is_ln2():
    r = math.sqrt(0.5)
    value = csekit.info_nce(np.array([[1.0, 0.0]]), np.array([[r, r]]), np.array([[r, -r]]), tau=1.0)
    assert value == pytest.approx(math.log(2.0), abs=1e-12)


def test_ht_equal_similarities_and_empty_mask():
    a = np.array([[1.0, 0.0]])
    other = np.array([[0.0, 1.0]])
    assert csekit.hierarchical_triplet(a, other, other, other) == pytest.approx(7.5e-3, abs=1e-15)
    assert csekit.hierarchical_triplet(a, other, other, other, mask=[False]) is None
    parts = csekit.combined_loss(a, other, other, other, beta=0.0)
    assert parts["total"] == parts["contrastive"]


def test_alignment_and_uniformity_simple_cases():
    e = np.eye(2)
    assert csekit.alignment(e[:1], e[1:]) == pytest.approx(2.0)
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    assert csekit.uniformity(pts) == pytest.approx(-4.39634, abs=1e-4)


def test_rfd_and_csv(tmp_path):
    rows = [(0, 1.0, -1.0, 0.6, -1.0, 0.5), (5, 1.0, -2.0, 0.8, -2.0, 0.6)]
    rfd_a, rfd_u = csekit.rfd(rows)
    assert rfd_a == pytest.approx(0.3)
    assert rfd_u == 0.0
    path = tmp_path / "trajectory.csv"
    path.write_text(
        "step,align_heldout,unif_heldout,align_eval,unif_eval,spearman_eval\n"
        + "".join(",".join(str(v) for v in r) + "\n" for r in rows)
    )
    assert csekit.rfd_from_csv(path) == (rfd_a, rfd_u)


def test_mer_and_spearman():
    r = csekit.mer("the cat sat", "the cat sat down")
    assert r["insertions"] + r["deletions"] == 1 and r["retains"] == 3
    assert r["value"] == pytest.approx(0.25)
    assert csekit.mer("", "") is None
    assert csekit.spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_mock_generate_and_errors_carry_kind():
    assert csekit.mock_generate("a b c d", "intermediate") == "a b c"
    with pytest.raises(csekit.CsekitError) as info:
        csekit.mock_generate("a b c d", "sideways")
    assert info.value.kind == "argument"
    with pytest.raises(csekit.CsekitError):
        csekit.info_nce(np.zeros((0, 2)), np.zeros((0, 2)))


def test_toy_encoder_unit_rows_and_determinism():
    enc = csekit.ToyEncoder(dim=16, hidden=8, hash_buckets=256, pooling="mean_tokens", seed=3)
    out = enc.encode(["a man plays guitar", "the cat sleeps"])
    assert out.shape == (2, 16)
    assert np.allclose(np.linalg.norm(out, axis=1), 1.0)
    again = csekit.ToyEncoder(dim=16, hidden=8, hash_buckets=256, pooling="mean_tokens", seed=3)
    assert np.array_equal(out, again.encode(["a man plays guitar", "the cat sleeps"]))

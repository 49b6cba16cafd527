import numpy as np
import numpy.testing as nptest
import pytest

from nlfctn.fctn import (
    FctnFactors,
    FctnRank,
    contract_all,
    eval_element,
    eval_full_naive,
    leave_one_out,
    unfold_leave_one_out,
    validate_factors,
)
from nlfctn.tensors import mode_unfold

RNG = np.random.default_rng(42)


def random_instance(dims, links, seed):
    rank = FctnRank(links)
    rng = np.random.default_rng(seed)
    return FctnFactors(
        [rng.standard_normal(rank.factor_shape(k, dims)) for k in range(len(dims))]
    )


def upper(n, values):
    m = np.zeros((n, n), dtype=int)
    t = 0
    for j in range(n):
        for k in range(j + 1, n):
            m[j, k] = values[t]
            t += 1
    return m


def test_rank_table_basics():
    r = FctnRank.uniform(3, 2)
    assert r.order == 3
    assert r.link(0, 2) == 2
    assert r.link(2, 0) == 2
    assert r.factor_shape(1, (4, 5, 6)) == (2, 5, 2)
    capped = FctnRank.capped((10, 3, 8), 4)
    assert capped.link(0, 1) == 3
    assert capped.link(0, 2) == 4
    assert capped.link(1, 2) == 3


def test_rank_table_rejects_bad_input():
    with pytest.raises(ValueError):
        FctnRank(np.zeros((2, 3), dtype=int))
    with pytest.raises(ValueError, match="R\\[0,1\\]"):
        FctnRank(upper(3, [0, 1, 1]))
    r = FctnRank.uniform(3, 2)
    with pytest.raises(ValueError):
        r.link(1, 1)
    with pytest.raises(ValueError):
        r.link(0, 3)


def test_factors_infer_dims_and_rank():
    f = random_instance((4, 3, 5), upper(3, [2, 3, 2]), seed=0)
    assert f.order == 3
    assert f.dims == (4, 3, 5)
    assert f.rank() == FctnRank(upper(3, [2, 3, 2]))
    assert f[0].shape == (4, 2, 3)
    assert f[1].shape == (2, 3, 2)
    assert f[2].shape == (3, 2, 5)


def test_validate_factors_reports_violations():
    f = random_instance((4, 3, 5), upper(3, [2, 3, 2]), seed=0)
    assert validate_factors(f, f.rank()) == []
    wrong = FctnRank(upper(3, [2, 3, 3]))
    msgs = validate_factors(f, wrong)
    assert len(msgs) == 2  # both ends of the (1, 2) link disagree
    assert any("factor 2 axis 1" in m and "expected 3, got 2" in m for m in msgs)
    zero_phys = FctnFactors([np.zeros((0, 2, 3)), np.zeros((2, 3, 2)), np.zeros((3, 2, 5))])
    msgs = validate_factors(zero_phys, zero_phys.rank())
    assert any("physical" in m for m in msgs)
    assert validate_factors(f, FctnRank.uniform(4, 1)) != []


def test_contract_matrix_case():
    # order 2 reduces to a plain matrix product
    rng = np.random.default_rng(1)
    g1 = rng.standard_normal((5, 3))
    g2 = rng.standard_normal((3, 4))
    full = contract_all(FctnFactors([g1, g2]))
    nptest.assert_allclose(full, g1 @ g2, atol=1e-14)


def test_contract_all_links_one_gives_outer_product():
    rng = np.random.default_rng(2)
    dims = (3, 4, 2)
    rank = FctnRank.uniform(3, 1)
    f = FctnFactors([rng.standard_normal(rank.factor_shape(k, dims)) for k in range(3)])
    vecs = [f[k].reshape(dims[k]) for k in range(3)]
    expected = np.einsum("i,j,k->ijk", *vecs)
    nptest.assert_allclose(contract_all(f), expected, atol=1e-13)


@pytest.mark.parametrize("dims,links,seed", [
    ((3, 4, 2), [2, 3, 2], 10),
    ((2, 2, 3), [1, 2, 3], 11),
    ((2, 3, 2, 2), [2, 1, 2, 2, 1, 2], 12),
    ((3, 2, 2, 3), [1, 1, 2, 2, 2, 1], 13),
])
def test_contract_all_matches_naive_sum(dims, links, seed):
    f = random_instance(dims, upper(len(dims), links), seed)
    nptest.assert_allclose(contract_all(f), eval_full_naive(f), atol=1e-12)


def test_eval_element_matches_contraction():
    f = random_instance((3, 4, 2), upper(3, [2, 3, 2]), seed=3)
    full = contract_all(f)
    rng = np.random.default_rng(0)
    for _ in range(10):
        idx = tuple(rng.integers(0, s) for s in f.dims)
        assert eval_element(f, idx) == pytest.approx(full[idx], abs=1e-12)


def test_eval_element_rejects_bad_index():
    f = random_instance((3, 4, 2), upper(3, [2, 2, 2]), seed=4)
    with pytest.raises(ValueError, match="out of range"):
        eval_element(f, (3, 0, 0))
    with pytest.raises(ValueError, match="length"):
        eval_element(f, (0, 0))


def test_oracles_refuse_huge_link_spaces():
    # order 5 with every link of size 4 has 4^10 > 1e6 joint tuples
    dims = (1, 1, 1, 1, 1)
    rank = FctnRank.uniform(5, 4)
    f = FctnFactors(
        [np.zeros(rank.factor_shape(k, dims)) for k in range(5)]
    )
    with pytest.raises(ValueError, match="oracle limit"):
        eval_element(f, (0, 0, 0, 0, 0))
    with pytest.raises(ValueError, match="oracle limit"):
        eval_full_naive(f)


def test_contract_rejects_inconsistent_links():
    f = random_instance((3, 4, 2), upper(3, [2, 3, 2]), seed=5)
    bad = [g.copy() for g in f.factors]
    bad[2] = np.zeros((3, 3, 2))  # axis 1 should have extent 2
    with pytest.raises(ValueError, match="link \\(1,2\\)"):
        contract_all(FctnFactors(bad))


def test_order_one_network_is_the_vector():
    g = np.arange(4.0).reshape(4)
    f = FctnFactors([g])
    nptest.assert_array_equal(contract_all(f), g)
    nptest.assert_array_equal(eval_full_naive(f), g)
    assert eval_element(f, (2,)) == 2.0


def test_leave_one_out_matrix_case():
    # with two factors, excluding the second leaves the first unchanged
    rng = np.random.default_rng(6)
    g1 = rng.standard_normal((5, 3))
    g2 = rng.standard_normal((3, 4))
    comp = leave_one_out(FctnFactors([g1, g2]), 1)
    assert comp.labels == (("phys", 0), ("link", 0, 1))
    nptest.assert_array_equal(comp.values, g1)
    nptest.assert_array_equal(unfold_leave_one_out(comp, 1), g1.T)


def test_leave_one_out_canonical_labels_order3():
    f = random_instance((3, 4, 2), upper(3, [2, 3, 2]), seed=7)
    comp = leave_one_out(f, 1)
    assert comp.labels == (
        ("phys", 0), ("link", 0, 1), ("link", 1, 2), ("phys", 2)
    )
    assert comp.values.shape == (3, 2, 2, 2)
    m = unfold_leave_one_out(comp, 1)
    # rows: links (0,1) then (1,2); columns: physical modes 0 then 2
    assert m.shape == (4, 6)


def test_unfold_leave_one_out_rejects_mismatched_index():
    f = random_instance((3, 4, 2), upper(3, [2, 2, 2]), seed=8)
    comp = leave_one_out(f, 0)
    with pytest.raises(ValueError, match="label mismatch"):
        unfold_leave_one_out(comp, 1)


@pytest.mark.parametrize("dims,links,seed", [
    ((3, 4, 2), [2, 3, 2], 20),
    ((2, 3, 4), [3, 2, 1], 21),
    ((2, 3, 2, 3), [2, 2, 1, 2, 2, 1], 22),
])
def test_unfolding_identity_every_mode(dims, links, seed):
    # mode-i unfolding of the full tensor equals factor i's mode-i unfolding
    # times the unfolded leave-one-out composite
    f = random_instance(dims, upper(len(dims), links), seed)
    full = contract_all(f)
    for i in range(len(dims)):
        mi = unfold_leave_one_out(leave_one_out(f, i), i)
        gi = mode_unfold(f[i], i)
        nptest.assert_allclose(mode_unfold(full, i), gi @ mi, atol=1e-11)


def test_gauge_rescaling_leaves_tensor_unchanged():
    f = random_instance((3, 4, 2), upper(3, [2, 3, 2]), seed=9)
    base = contract_all(f)
    rng = np.random.default_rng(30)
    j, k = 0, 2  # rescale the (0, 2) link
    w = rng.uniform(0.5, 2.0, size=f[j].shape[k])
    scaled = [g.copy() for g in f.factors]
    shape_j = [1] * 3
    shape_j[k] = len(w)
    scaled[j] = scaled[j] * w.reshape(shape_j)
    shape_k = [1] * 3
    shape_k[j] = len(w)
    scaled[k] = scaled[k] / w.reshape(shape_k)
    rescaled = contract_all(FctnFactors(scaled))
    nptest.assert_allclose(rescaled, base, rtol=1e-12, atol=1e-12)


def test_leave_one_out_requires_two_factors():
    with pytest.raises(ValueError, match="order >= 2"):
        leave_one_out(FctnFactors([np.zeros(3)]), 0)
    f = random_instance((3, 4), upper(2, [2]), seed=31)
    with pytest.raises(ValueError, match="out of range"):
        leave_one_out(f, 2)

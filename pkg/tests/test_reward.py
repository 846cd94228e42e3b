import pytest

from dslrepair.reward import BatchItem, EmptyBatchError, compute_rewards


def test_single_item_pass():
    # pr = 1, so the reward is the semantic score alone
    batch = compute_rewards([BatchItem("a", True, 0.7)])
    assert batch.pass_rate == 1.0
    assert batch.rewards == (0.7,)


def test_single_item_fail():
    # pr = 0, so the reward is the pass indicator alone
    batch = compute_rewards([BatchItem("a", False, 0.9)])
    assert batch.pass_rate == 0.0
    assert batch.rewards == (0.0,)


def test_mixed_batch_hand_computed():
    items = [
        BatchItem("a", True, 0.5),
        BatchItem("b", False, 0.25),
        BatchItem("c", True, 1.0),
        BatchItem("d", False, 0.0),
    ]
    batch = compute_rewards(items)
    assert batch.pass_rate == 0.5
    # reward = 0.5 * passed + 0.5 * semantic
    assert batch.rewards == (0.75, 0.125, 1.0, 0.0)


def test_all_passed_returns_semantics_exactly():
    items = [BatchItem(str(i), True, i / 10) for i in range(10)]
    batch = compute_rewards(items)
    assert batch.pass_rate == 1.0
    assert batch.rewards == tuple(i / 10 for i in range(10))


def test_none_passed_returns_indicator_exactly():
    items = [BatchItem(str(i), False, i / 10) for i in range(10)]
    batch = compute_rewards(items)
    assert batch.pass_rate == 0.0
    assert batch.rewards == (0.0,) * 10


def test_rewards_stay_in_unit_interval():
    items = [BatchItem("a", True, 0.0), BatchItem("b", False, 1.0)]
    for r in compute_rewards(items).rewards:
        assert 0.0 <= r <= 1.0


def test_empty_batch_raises():
    with pytest.raises(EmptyBatchError):
        compute_rewards([])


def test_item_validates_semantic_range():
    with pytest.raises(ValueError):
        BatchItem("a", True, 1.5)
    with pytest.raises(ValueError):
        BatchItem("a", True, -0.1)


def test_result_preserves_item_order():
    items = [BatchItem("z", True, 0.1), BatchItem("a", False, 0.2)]
    batch = compute_rewards(items)
    assert [it.id for it in batch.items] == ["z", "a"]

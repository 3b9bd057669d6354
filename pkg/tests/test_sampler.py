import numpy as np
import pytest
from scipy.stats import chisquare

from topodense.sampler import (
    ConfigurationError,
    LabeledDataset,
    SamplerConfig,
    default_batches_per_epoch,
    epoch_iterator,
    sample_minibatch,
)


def dataset(per_class, dim=2):
    labels = np.repeat(np.arange(len(per_class)), per_class)
    feats = np.arange(len(labels) * dim, dtype=float).reshape(len(labels), dim)
    return LabeledDataset(feats, labels)


def test_batch_size_matches_layout():
    subs = sample_minibatch(dataset([20] * 10), SamplerConfig(b=16, n=8, seed=1))
    assert len(subs) == 8
    assert sum(len(s.indices) for s in subs) == 128


def test_forced_pair():
    cfg = SamplerConfig(b=2, n=1, class_policy="without-replacement")
    (sub,) = sample_minibatch(dataset([2]), cfg)
    assert sub.class_id == 0 and sorted(sub.indices.tolist()) == [0, 1]


def test_fixed_seed_is_reproducible():
    ds = dataset([7, 9, 4])
    cfg = SamplerConfig(b=4, n=3, seed=42)
    a = [s.indices.tolist() for s in sample_minibatch(ds, cfg)]
    b = [s.indices.tolist() for s in sample_minibatch(ds, cfg)]
    assert a == b
    s1 = [[s.indices.tolist() for s in mb] for mb in epoch_iterator(ds, cfg, 5)]
    s2 = [[s.indices.tolist() for s in mb] for mb in epoch_iterator(ds, cfg, 5)]
    assert s1 == s2 and len(s1) == 5


def test_default_batches_per_epoch():
    assert default_batches_per_epoch(250, SamplerConfig(b=16, n=8)) == 2
    assert default_batches_per_epoch(1, SamplerConfig(b=16, n=8)) == 1


def test_zero_batches_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        epoch_iterator(dataset([5, 5]), SamplerConfig(b=2, n=1), 0)


def test_without_replacement_names_the_short_class():
    with pytest.raises(ConfigurationError, match="class 1"):
        sample_minibatch(dataset([5, 3]), SamplerConfig(b=4, n=2, class_policy="without-replacement"))


def test_auto_policy_falls_back_to_replacement():
    subs = sample_minibatch(dataset([3]), SamplerConfig(b=5, n=2))
    assert all(len(s.indices) == 5 for s in subs)


def test_without_replacement_gives_distinct_indices():
    cfg = SamplerConfig(b=6, n=20, class_policy="without-replacement", seed=3)
    for s in sample_minibatch(dataset([6, 10]), cfg):
        assert len(set(s.indices.tolist())) == 6


def test_distinct_classes_flag():
    cfg = SamplerConfig(b=2, n=3, distinct_classes=True, seed=9)
    for mb in epoch_iterator(dataset([4, 4, 4]), cfg, 20):
        assert sorted(s.class_id for s in mb) == [0, 1, 2]
    with pytest.raises(ConfigurationError):
        sample_minibatch(dataset([4, 4]), cfg)


@pytest.mark.parametrize(
    "kwargs", [dict(b=1), dict(n=0), dict(class_policy="sometimes")]
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigurationError):
        SamplerConfig(**kwargs)


def test_invalid_datasets():
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((3, 2)), np.array([0, 1]))
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((2, 2)), np.array([0, 5]), num_classes=3)


def test_label_purity_and_uniform_class_frequency():
    ds = dataset([5, 8, 13, 21])
    counts = np.zeros(4)
    for mb in epoch_iterator(ds, SamplerConfig(b=3, n=4, seed=7), 2000):
        for s in mb:
            assert np.all(ds.labels[s.indices] == s.class_id)
            counts[s.class_id] += 1
    assert chisquare(counts).pvalue > 1e-3

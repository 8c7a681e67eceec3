import math

import pytest
from pydantic import ValidationError

from derivlab.schemas import (DerivRootSet, EigenphaseConfig, EmpiricalDistribution, Ensemble,
                              PairSample, RunConfig)


def test_from_phases_wraps_and_sorts():
    config = EigenphaseConfig.from_phases([3 * math.pi / 2, 0.1, -math.pi])
    assert config.ensemble_tag == Ensemble.EXPLICIT
    assert config.raw_phases == sorted(config.raw_phases)
    assert all(-math.pi < t <= math.pi for t in config.raw_phases)
    assert math.isclose(config.raw_phases[0], -math.pi / 2)
    assert math.isclose(config.raw_phases[-1], math.pi)


def test_inconsistent_rescaling_rejected():
    with pytest.raises(ValidationError):
        EigenphaseConfig(n=2, raw_phases=[0.0, 1.0], rescaled=[0.0, 0.5], ensemble_tag=Ensemble.CUE)
    with pytest.raises(ValidationError):
        EigenphaseConfig(n=2, raw_phases=[1.0, 0.0], rescaled=[1 / math.pi, 0.0], ensemble_tag=Ensemble.CUE)


def test_root_set_serializes_complex_pairs():
    roots = DerivRootSet(n=3, roots=[0.5 + 0.25j, -0.1j], s_values=[1.0, 2.0])
    payload = roots.model_dump(mode="json")
    assert payload["roots"] == [[0.5, 0.25], [0.0, -0.1]]
    assert DerivRootSet.model_validate(payload).roots_array[0] == 0.5 + 0.25j


def test_pair_sample_window():
    fields = dict(theta=0.2, n=4, z_prime=1.0, delta=0.0, delta_star=0.0, a0=0.0, a1=0.0)
    PairSample(background=[-1.5, 1.0], **fields)
    with pytest.raises(ValidationError):
        PairSample(background=[0.05, 1.0], **fields)
    with pytest.raises(ValidationError):
        PairSample(background=[1.0], **fields)


def test_distribution_checks_shape():
    with pytest.raises(ValidationError):
        EmpiricalDistribution(bin_edges=[0.0, 1.0, 1.0], counts=[1.0, 2.0])
    with pytest.raises(ValidationError):
        EmpiricalDistribution(bin_edges=[0.0, 1.0], counts=[1.0, 2.0])
    dist = EmpiricalDistribution(bin_edges=[0.0, 1.0, 3.0], counts=[1.0, 2.0], underflow=0.5, overflow=0.5)
    assert dist.total_mass == 4.0
    assert list(dist.widths) == [1.0, 2.0]


def test_run_config_validates_positive_fields(tmp_path):
    RunConfig(command="tables", n=4, output_dir=tmp_path)
    with pytest.raises(ValidationError):
        RunConfig(command="tables", n=0, output_dir=tmp_path)
    with pytest.raises(ValidationError):
        RunConfig(command="tables", samples=-3, output_dir=tmp_path)

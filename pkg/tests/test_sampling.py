from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelspec.errors import PreconditionError
from levelspec.graphs import complete_graph, empty_graph
from levelspec.sampling import GnpSampler, sample, uniform_below


def test_extreme_probabilities():
    assert sample(GnpSampler(6, Fraction(0), 1), 0) == empty_graph(6)
    assert sample(GnpSampler(6, Fraction(1), 1), 0) == complete_graph(6)


def test_trial_is_a_function_of_its_key():
    sampler = GnpSampler(10, Fraction(1, 2), 42)
    assert sampler.sample(3) == sampler.sample(3)
    assert sampler.sample(3) == GnpSampler(10, Fraction(1, 2), 42).sample(3)
    assert sampler.sample(3) != sampler.sample(4)
    assert sampler.sample(3) != GnpSampler(10, Fraction(1, 2), 43).sample(3)


@given(st.integers(0, 50), st.integers(0, 2**64 - 1))
@settings(max_examples=50, deadline=None)
def test_stream_matches_direct_draws(start, seed):
    sampler = GnpSampler(5, Fraction(1, 3), seed)
    streamed = list(sampler.stream(4, start=start))
    assert streamed == [sampler.sample(start + k) for k in range(4)]


def test_edge_frequency_is_close_to_p():
    sampler = GnpSampler(10, Fraction(1, 2), 7)
    mean = sum(G.edge_count for G in sampler.stream(200)) / 200
    assert 20 < mean < 25


def test_uniform_below_range_and_validation():
    values = {uniform_below(3, 0, k) for k in range(60)}
    assert values == {0, 1, 2}
    assert uniform_below(1, 9) == 0
    with pytest.raises(PreconditionError):
        uniform_below(0, 1)


def test_sampler_validation():
    with pytest.raises(PreconditionError):
        GnpSampler(3, Fraction(3, 2), 0)
    with pytest.raises(PreconditionError):
        GnpSampler(3, Fraction(1, 2), -1)
    with pytest.raises(PreconditionError):
        GnpSampler(3, Fraction(1, 2), 2**64)
    with pytest.raises(PreconditionError):
        GnpSampler(-1, Fraction(1, 2), 0)

import math

import numpy as np
import pytest

from exceptions import DomainError, SampleValidationError
from models.chain_models import ChainConfig
from models.report_models import SpacingReport
from services.gibbs_service import Configuration, batch_means_stderr, run_chain
from services.potential_service import PotentialModel
from services.spacing_service import (
    COROLLARY_C_LIMIT,
    beta_trend,
    corollary_m0_ceiling,
    corollary_threshold,
    count_nD,
    packing_check,
    rescale,
    run_spacing_experiment,
    spacing_s0,
    split_for_conditioning,
    theorem_bound,
)


def rescaled(points, r_n=1.0, center=0j):
    return rescale(Configuration(points), center, r_n)


def chain(beta=2.0, **overrides) -> ChainConfig:
    settings = dict(beta=beta, seed=13, steps=60, burn_in=20, thinning=4, chains=2)
    settings.update(overrides)
    return ChainConfig(**settings)


def test_rescale_maps_center_to_origin():
    sample = rescaled([0.5 + 0.5j, 0.6 + 0.5j], r_n=0.1, center=0.5 + 0.5j)
    assert sample.z_points.tolist() == pytest.approx([0j, 1 + 0j])
    assert sample.restore().tolist() == pytest.approx([0.5 + 0.5j, 0.6 + 0.5j])


def test_rescale_rejects_nonpositive_scale():
    with pytest.raises(DomainError):
        rescaled([0.1, 0.2], r_n=0.0)


def test_s0_uses_neighbours_inside_the_disk():
    assert spacing_s0(rescaled([0.5, 0.5 + 0.3j, 2.0])) == pytest.approx(0.3)


def test_s0_neighbour_may_lie_outside_the_disk():
    assert spacing_s0(rescaled([0j, 3.0])) == pytest.approx(3.0)


def test_s0_of_empty_disk_is_absent():
    assert spacing_s0(rescaled([2.0, 3.0j])) is None


def test_s0_needs_two_particles():
    with pytest.raises(DomainError):
        spacing_s0(rescaled([0j]))


def test_s0_rejects_coincident_particles():
    sample = rescale(np.array([0.1, 0.1, 0.5j]), 0j, 1.0)
    with pytest.raises(SampleValidationError):
        spacing_s0(sample)


def test_s0_matches_brute_force(ginibre, rng):
    config = Configuration.equilibrium_seeded(ginibre, 64, rng)
    sample = rescale(config, 0j, 0.125)
    z = sample.z_points
    distances = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(distances, np.inf)
    inside = np.abs(z) <= 1.0
    assert spacing_s0(sample) == pytest.approx(float(distances[inside].min(axis=1).min()))


def test_count_includes_boundary():
    assert count_nD(rescaled([1.0, 0.5j, 1.5])) == 2


def test_theorem_bound_reference_values():
    params = theorem_bound(100, 3.0, 0.01, 0.5, 0.05)
    assert params.threshold == pytest.approx(0.05 * 0.1 * 0.005**0.25, rel=1e-12)
    assert params.threshold == pytest.approx(1.3297e-3, rel=1e-4)
    assert params.m0 == pytest.approx(9.0510e6, rel=1e-4)
    assert params.bound == 0.0


def test_theorem_bound_scaling_in_n():
    first = theorem_bound(100, 3.0, 0.01, 0.5, 0.05)
    second = theorem_bound(200, 3.0, 0.01, 0.5, 0.05)
    assert second.threshold == pytest.approx(first.threshold / math.sqrt(2))
    assert second.m0 == pytest.approx(2 * first.m0)


def test_theorem_bound_m0_is_packing_count():
    params = theorem_bound(64, 4.0, 0.05, 0.8, 0.02)
    # disks of radius threshold / 2 about separated particles
    assert params.m0 == pytest.approx(4.0 / (params.threshold / 2.0) ** 2, rel=1e-12)


def test_theorem_bound_vanishing_epsilon():
    params = theorem_bound(100, 4.0, 1e-15, 1.0, 0.05)
    assert params.bound > 0.9999
    assert params.threshold < 1e-3


@pytest.mark.parametrize(
    "args",
    [
        (100, 1.0, 0.1, 0.5, 0.05),
        (100, 2.0, 0.0, 0.5, 0.05),
        (100, 2.0, 1.0, 0.5, 0.05),
        (100, 2.0, 0.1, 0.0, 0.05),
        (100, 2.0, 0.1, 0.5, 0.0),
    ],
)
def test_theorem_bound_domain(args):
    with pytest.raises(DomainError):
        theorem_bound(*args)


def test_corollary_threshold():
    assert corollary_threshold(math.inf, 0.0, 0.05) == 0.05
    assert corollary_threshold(2.0, 1.0, 0.05) == pytest.approx(0.05 / math.e)


@pytest.mark.parametrize("c", [0.0, COROLLARY_C_LIMIT, 0.1])
def test_corollary_threshold_requires_small_c(c):
    with pytest.raises(DomainError, match="sqrt"):
        corollary_threshold(1.0, 0.0, c)


def test_corollary_m0_ceiling():
    assert corollary_m0_ceiling(math.inf, 0.0) == pytest.approx(1024 * math.e)
    assert corollary_m0_ceiling(2.0, 0.5) == pytest.approx(1024 * math.exp(2.5))


def test_packing_of_square():
    certificate = packing_check(rescaled([0.5 + 0.5j, 0.5 - 0.5j, -0.5 + 0.5j, -0.5 - 0.5j]), 0.5)
    assert certificate.premise_holds
    assert certificate.n_disk == 4
    assert certificate.capacity == 16.0
    assert certificate.passed
    assert len(certificate.disks) == 4


def test_packing_of_single_particle():
    certificate = packing_check(rescaled([0j, 5.0]), 1.0)
    assert certificate.n_disk == 1
    assert certificate.passed


def test_packing_with_failed_premise_is_vacuous():
    certificate = packing_check(rescaled([0j, 0.1]), 0.5)
    assert not certificate.premise_holds
    assert certificate.passed
    assert certificate.disks == []


@pytest.fixture(scope="module")
def ginibre_samples():
    return run_chain(PotentialModel.ginibre(), 16, chain(chains=2))


def test_spacing_experiment_with_reused_chains(ginibre, ginibre_samples):
    report = run_spacing_experiment(ginibre, 16, 2.0, 0j, chain(chains=2), 0.01, reuse_chains=True, samples=ginibre_samples)
    assert report.reused_chains
    assert report.r_n == pytest.approx(0.25)
    assert report.eta_samples == report.conditional_samples == 20
    assert len(report.nD_samples) == 20
    hits = sum(count >= 1 for count in report.nD_samples)
    assert report.eta_hat == pytest.approx(hits / 20)
    assert len(report.s0_samples) == hits
    assert report.eta_interval[0] <= report.eta_hat <= report.eta_interval[1]
    assert report.packing_failures == 0
    if report.params is not None:
        assert report.params.eta == report.eta_hat
        assert report.empirical_conditional == pytest.approx(
            np.mean(np.asarray(report.s0_samples) >= report.params.threshold)
        )


def test_spacing_experiment_splits_chains_by_default(ginibre, ginibre_samples):
    report = run_spacing_experiment(ginibre, 16, 2.0, 0j, chain(chains=2), 0.01, samples=ginibre_samples)
    assert not report.reused_chains
    assert report.eta_samples == 10
    assert report.conditional_samples == 10


def test_separation_bound_holds_when_nontrivial(ginibre):
    report = run_spacing_experiment(ginibre, 16, 4.0, 0j, chain(beta=4.0), 1e-12, c_override=0.05, reuse_chains=True)
    assert report.params is not None
    assert report.params.bound > 0.99
    assert report.empirical_conditional >= report.params.bound
    assert report.bound_holds is True
    assert report.packing_failures == 0


def test_single_chain_cannot_be_split(ginibre):
    samples = run_chain(ginibre, 6, chain(chains=1))
    eta_set, conditional_set, reused = split_for_conditioning(samples, reuse_chains=False)
    assert reused
    assert eta_set is conditional_set


def test_spacing_at_beta_one_has_no_bound(ginibre):
    report = run_spacing_experiment(ginibre, 12, 1.0, 0j, chain(beta=1.0), 0.1)
    assert report.params is None
    assert report.bound_holds is None


def test_spacing_experiment_checks_beta(ginibre):
    with pytest.raises(DomainError):
        run_spacing_experiment(ginibre, 12, 3.0, 0j, chain(beta=2.0), 0.1)


def spacing_stub(beta, s0_samples):
    return SpacingReport(
        beta=beta,
        n=64,
        center=(0.0, 0.0),
        r_n=0.125,
        eta_hat=1.0,
        eta_std_error=0.0,
        eta_interval=(1.0, 1.0),
        eta_samples=len(s0_samples),
        conditional_samples=len(s0_samples),
        reused_chains=True,
        s0_samples=list(s0_samples),
        nD_samples=[1] * len(s0_samples),
    )


def test_beta_trend_detects_increasing_medians(rng):
    reports = [spacing_stub(beta, rng.normal(loc, 0.05, size=200)) for beta, loc in [(1.0, 0.4), (2.0, 0.6), (4.0, 0.8)]]
    entries, monotone = beta_trend(reports, resamples=500, seed=1)
    assert monotone
    assert [entry.beta for entry in entries] == [1.0, 2.0, 4.0]
    assert all(entry.lower <= entry.median_s0 <= entry.upper for entry in entries)


def test_beta_trend_detects_decrease(rng):
    reports = [spacing_stub(beta, rng.normal(loc, 0.05, size=200)) for beta, loc in [(1.0, 0.8), (2.0, 0.4)]]
    _, monotone = beta_trend(reports, resamples=500, seed=1)
    assert not monotone


def test_beta_trend_skips_sparse_reports(rng):
    reports = [spacing_stub(1.0, [0.5]), spacing_stub(2.0, rng.normal(0.5, 0.05, size=50))]
    entries, monotone = beta_trend(reports, resamples=200)
    assert entries[0].median_s0 is None
    assert entries[0].samples == 1
    assert monotone


@pytest.mark.slow
def test_mean_disk_count_at_beta_one(ginibre):
    # determinantal at beta = 1: expected count in D_{r_n} is sum_k P(Gamma(k + 1) <= 1), essentially 1
    config = chain(beta=1.0, steps=3000, burn_in=500, thinning=10, chains=4)
    samples = run_chain(ginibre, 256, config)
    counts = [count_nD(rescale(c, 0j, 256**-0.5)) for c in samples.configurations]
    assert abs(np.mean(counts) - 1.0) <= 4 * batch_means_stderr(counts) + 0.02


@pytest.mark.slow
def test_spacing_grows_with_beta(ginibre):
    reports = [
        run_spacing_experiment(
            ginibre, 64, beta, 0j, chain(beta=beta, steps=2000, burn_in=500, thinning=5, chains=4), 0.1, reuse_chains=True
        )
        for beta in (1.5, 2.0, 4.0, 8.0)
    ]
    _, monotone = beta_trend(reports, seed=2)
    assert monotone

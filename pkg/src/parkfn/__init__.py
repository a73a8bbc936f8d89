"""Parking functions induced by Mallows permutations: exact laws, limit laws,
Monte Carlo checks and total-variation lower bounds."""

from .exact import (
    dominance_check,
    induced_measure_bruteforce,
    nk_laplace,
    nk_pmf,
    pi1_cdf,
    pi1_law,
    pi1_mean,
    pi1_pmf,
    poisson_binomial,
)
from .harness import (
    ExperimentConfig,
    GofReport,
    empirical_pmf,
    ks_distance,
    run_experiment,
    sample_nk,
    sample_pf,
    sample_pi1,
)
from .limits import (
    borel_pmf,
    dh_corner,
    lambda_c,
    law_Fc,
    law_fc,
    law_q1_cdf,
    law_Ysum,
    law_Zsum,
)
from .mallows import QSchedule, expected_inversions, mallows_pmf, q_normalizer, sample_mallows
from .parking import ParkingFunction, enumerate_parking, from_pair, is_parking, parking_count
from .perms import LehmerCode, Permutation, inversions, lehmer_decode, lehmer_encode
from .pmf import DiscretePMF, tv_distance
from .rng import random_stream
from .tvbound import BoundSpec, lower_bound, minimize_bound

__version__ = "0.1.0"

__all__ = [
    "BoundSpec", "DiscretePMF", "ExperimentConfig", "GofReport", "LehmerCode", "ParkingFunction",
    "Permutation", "QSchedule", "borel_pmf", "dh_corner", "dominance_check", "empirical_pmf",
    "enumerate_parking", "expected_inversions", "from_pair", "induced_measure_bruteforce",
    "inversions", "is_parking", "ks_distance", "lambda_c", "law_Fc", "law_Ysum", "law_Zsum",
    "law_fc", "law_q1_cdf", "lehmer_decode", "lehmer_encode", "lower_bound", "mallows_pmf",
    "minimize_bound", "nk_laplace", "nk_pmf", "parking_count", "pi1_cdf", "pi1_law", "pi1_mean",
    "pi1_pmf", "poisson_binomial", "q_normalizer", "random_stream", "run_experiment",
    "sample_mallows", "sample_nk", "sample_pf", "sample_pi1", "tv_distance", "__version__",
]

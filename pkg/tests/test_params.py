import math
from fractions import Fraction

import pytest

from qsextlib.errors import ConfigurationError, InfeasibleParametersError, ParameterError
from qsextlib.params import (
    ExtractorParams,
    ParamKnobs,
    Variant,
    binary_entropy,
    compute_params,
    local_preset,
    one_bit_entropy_threshold,
    one_bit_storage_error,
    qfac_bound,
    short_seed_preset,
)
from qsextlib.settings import Budgets, Constants

from .oracles import entropy


def test_local_preset_diagnostic_headline():
    params = local_preset(1000, alpha=0.5, delta=0.1, b=100, diagnostic_zero_slack=True)
    assert params.K == 500
    assert params.epsilon == pytest.approx(1e-3)
    assert params.m == 100
    assert params.rho == 1
    assert params.rho_source == "diagnostic"
    # the locality needed for m = 100 is not below N; diagnostic mode only records it
    assert params.notes
    terms = params.formula_terms()
    assert terms["rhs"] == 100
    assert terms["entropy"] == 200
    assert params.satisfies_bound()


def test_rs_hadamard_limited_by_field_width():
    params = compute_params(65536, 16384, 256, 0.25, Variant.RS_HADAMARD)
    assert params.m == 181
    assert params.field_width == 32
    assert params.n == 64
    assert params.t == 4096
    assert params.L == 2096704
    assert params.rho == Fraction(77, 45)
    assert params.rho_source == "verified"
    assert params.satisfies_bound()
    assert params.delta == 0
    assert params.entropy_delta == 0


def test_short_seed_preset_reports_rho_target():
    params = short_seed_preset(65536, 16384, 256, gamma=0.5, c=0.125)
    assert params.epsilon == pytest.approx(65536**-0.125)
    assert params.rho_target == pytest.approx(16384**0.25)
    assert params.satisfies_bound()


def test_xor_feasible_point():
    params = compute_params(1 << 20, 1 << 20, 0, 0.49, Variant.XOR, ParamKnobs(delta=0.3))
    assert params.m >= 2
    assert params.delta == pytest.approx(0.09)
    assert params.entropy_delta == pytest.approx(entropy(0.09))
    assert params.k == math.ceil(math.log(2 * params.m / 0.49) / 0.09)
    assert params.n == (math.comb(1 << 20, params.k) - 1).bit_length()
    assert params.t == params.n * 2 ** (params.n - 1).bit_length()
    assert params.L == math.ceil(4 * (params.m / Fraction(49, 100)) ** 2)
    assert params.rho_target == 1.0
    assert params.satisfies_bound()
    # no room is left once the storage matches the min-entropy
    with pytest.raises(InfeasibleParametersError):
        compute_params(1 << 20, 1 << 20, 1 << 20, 0.49, Variant.XOR, ParamKnobs(delta=0.3))


GRID = [
    (N, K, b, epsilon, Variant.RS_HADAMARD, ParamKnobs())
    for N in (4096, 65536)
    for K in (N // 4, N // 2, N)
    for b in (0, 256)
    for epsilon in (0.25, 0.1)
] + [
    (1 << 20, K, b, epsilon, Variant.XOR, ParamKnobs(delta=delta))
    for K in (1 << 20, 15 << 16)
    for b in (0, 4096, 65536)
    for epsilon in (0.49, 0.3, 0.1)
    for delta in (0.25, 0.3)
]


def test_solutions_satisfy_their_own_bound():
    assert len(GRID) >= 50
    feasible = 0
    for N, K, b, epsilon, variant, knobs in GRID:
        try:
            params = compute_params(N, K, b, epsilon, variant, knobs)
        except InfeasibleParametersError as e:
            assert e.terms["rhs"] < 1
            continue
        feasible += 1
        assert params.satisfies_bound()
        assert 1 <= params.m <= K
        assert params.rho_source == "verified"
    assert feasible >= 12


def test_infeasible_reports_terms():
    with pytest.raises(InfeasibleParametersError) as e:
        compute_params(1000, 50, 100, 0.01, Variant.XOR, ParamKnobs(delta=0.1))
    assert e.value.terms["b"] == 100
    assert e.value.terms["K"] == 50
    assert e.value.terms["numerator"] < e.value.terms["one_plus_rho"]


def test_xor_locality_not_below_n_is_infeasible():
    with pytest.raises(InfeasibleParametersError):
        compute_params(64, 64, 0, 0.01, Variant.XOR, ParamKnobs(delta=0.05))


def test_constants_change_the_bound():
    base = compute_params(65536, 16384, 256, 0.25, Variant.RS_HADAMARD, ParamKnobs(budgets=Budgets(design_verify_limit=0)))
    assert base.rho_source == "certified"
    assert base.rho == 2
    knobs = ParamKnobs(constants=Constants(c_log=100), budgets=Budgets(design_verify_limit=0))
    heavier = compute_params(65536, 16384, 256, 0.25, Variant.RS_HADAMARD, knobs)
    assert heavier.formula_terms()["slack"] > base.formula_terms()["slack"]
    assert heavier.constants.c_log == 100
    assert heavier.to_json()["constants"]["c_log"] == 100


def test_input_validation():
    with pytest.raises(ParameterError):
        compute_params(1000, None, 0, 0.1, Variant.XOR, ParamKnobs(delta=0.1))
    with pytest.raises(ParameterError):
        compute_params(1000, 2000, 0, 0.1, Variant.XOR, ParamKnobs(delta=0.1))
    with pytest.raises(ParameterError):
        compute_params(1000, 500, 0, 0.5, Variant.XOR, ParamKnobs(delta=0.1))
    with pytest.raises(ParameterError):
        compute_params(1000, 500, 0, 0.1, Variant.XOR, ParamKnobs())
    with pytest.raises(ParameterError):
        compute_params(1000, 500, -1, 0.1, Variant.RS_HADAMARD)
    with pytest.raises(ParameterError):
        compute_params(1000, 500, 0, 0.1, Variant.XOR, ParamKnobs(delta=0.9))
    with pytest.raises(ConfigurationError):
        compute_params(1000, 500, 0, 0.1, Variant.RS_HADAMARD, ParamKnobs(design="random"))


def test_params_reject_inconsistent_entropy():
    with pytest.raises(ParameterError):
        ExtractorParams(
            N=10, K=5, b=0, epsilon=0.1, m=1, t=4, n=2, rho=Fraction(1), delta=0.1, L=1, entropy_delta=0.2,
            variant=Variant.XOR,
        )


def test_to_json_carries_every_term():
    params = compute_params(65536, 16384, 256, 0.25, Variant.RS_HADAMARD)
    report = params.to_json()
    assert report["m"] == 181
    assert report["rho"] == "77/45"
    assert report["N_bar"] == str(1 << 64)
    assert set(report["terms"]) == {
        "K", "b", "t", "entropy", "log_L", "slack", "numerator", "one_plus_rho", "rhs", "m"
    }
    assert report["satisfies_bound"] is True


def test_binary_entropy():
    assert binary_entropy(0) == 0
    assert binary_entropy(0.5) == 1
    assert binary_entropy(0.11) == pytest.approx(entropy(0.11))
    with pytest.raises(ParameterError):
        binary_entropy(1.5)


def test_qfac_xor_family():
    expected = 10 + entropy(math.log(16) / 8) * 100 + 4 * 3
    assert qfac_bound(100, 10, 0.125, family="xor_k", k=8) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(115.1, abs=0.05)
    with pytest.raises(ParameterError):
        qfac_bound(10, 1, 0.1, family="xor_k", k=8)


def test_qfac_xor_family_long_sources():
    expected = 10 + entropy(math.log(20) / 8) * 2000 + 4 * math.log2(10)
    assert qfac_bound(2000, 10, 0.1, family="xor_k", k=8) == pytest.approx(expected, rel=1e-12)
    # 2k^2 / 2^1024 is about 7.1e-307
    assert qfac_bound(1024, 0, 1e-300, family="xor_k", k=8) == pytest.approx(1024 + 4 * 300 * math.log2(10))
    with pytest.raises(ParameterError):
        qfac_bound(1024, 0, 1e-308, family="xor_k", k=8)


@pytest.mark.parametrize("N", [64, 1000, 4096])
def test_qfac_general_monotone_in_storage_and_list_size(N):
    bounds_b = [qfac_bound(N, b, 0.01, delta=0, L=16) for b in range(0, 200, 7)]
    assert all(lo <= hi for lo, hi in zip(bounds_b, bounds_b[1:]))
    bounds_L = [qfac_bound(N, 5, 0.01, delta=0, L=1 << j) for j in range(0, 40, 3)]
    assert all(lo <= hi for lo, hi in zip(bounds_L, bounds_L[1:]))
    assert bounds_L[0] == pytest.approx(5 + 4 * math.log2(100))


def test_qfac_other_families():
    assert qfac_bound(100, 10, 0.125, delta=0.1, L=16) == pytest.approx(10 + entropy(0.1) * 100 + 4 + 12)
    assert qfac_bound(100, 10, 0.125, family="rs_hadamard") == pytest.approx(22)
    assert qfac_bound(100, 10, 0.125, family="hadamard") == pytest.approx(10 + 2 * 2)
    assert qfac_bound(100, 10, 0.125, family="universal") == qfac_bound(100, 10, 0.125, family="hadamard")
    arw = qfac_bound(100, 10, 0.125, family="xor_arw", k=8)
    assert arw == pytest.approx(10 + (1 - 0.25 ** 0.25 / (2 * math.log(2))) * 100)
    assert qfac_bound(100, 10, 0.125, family="rs_hadamard", diagnostic=True) == 10
    with pytest.raises(ParameterError):
        qfac_bound(100, 10, 0.125, family="bch")
    with pytest.raises(ParameterError):
        qfac_bound(100, 10, 0.75)


def test_one_bit_helpers():
    assert one_bit_entropy_threshold(100, 0.1, 4, 0.5) == pytest.approx(entropy(0.1) * 100 + 2 + 2)
    assert one_bit_storage_error(40, 20, 10) == pytest.approx(3 * 2.0**-5)
    with pytest.raises(ParameterError):
        one_bit_storage_error(20, 20, 10)

from dataclasses import replace

import numpy as np
import pytest

from qsextlib.bits import bits_to_int, int_to_bits
from qsextlib.codes import CodeSpec
from qsextlib.errors import BudgetExceededError, ParameterError
from qsextlib.extract import OneBitExtractor, constant_extractor, extract, identity_extractor
from qsextlib.quantum import (
    QuantumAdversary,
    basis_state,
    constant_adversary,
    embed_classical_adversary,
    random_adversary,
)
from qsextlib.settings import Budgets, Constants
from qsextlib.sources import SourceDistribution, random_flat
from qsextlib.verify import (
    classical_distance,
    classical_distance_report,
    classical_storage_distance,
    cq_states,
    distinguisher_advantage,
    one_bit_security_scan,
    quantum_distance,
    quantum_distance_report,
)

from .oracles import brute_distance


def test_hadamard_one_bit_on_uniform_source():
    ext = OneBitExtractor(CodeSpec.hadamard(8))
    # only the all-zero seed is biased
    assert classical_distance(ext, SourceDistribution.uniform(8)) == pytest.approx(1 / 512)


def test_point_mass_gives_one_half():
    ext = OneBitExtractor(CodeSpec.hadamard(8))
    assert classical_distance(ext, SourceDistribution.point_mass(8, 77)) == pytest.approx(0.5)


def test_reference_extractors():
    assert classical_distance(constant_extractor(4, 2, 1), SourceDistribution.uniform(4)) == pytest.approx(0.5)
    assert classical_distance(identity_extractor(3, 1), SourceDistribution.uniform(3)) == pytest.approx(0)


def test_distance_report():
    report = classical_distance_report(constant_extractor(4, 2, 1), SourceDistribution.uniform(4))
    assert report["distance"] == pytest.approx(0.5)
    assert report["instance"] == {"N": 4, "t": 2, "m": 1}
    assert report["budget_used"] == 16 * 4 + 8
    assert report["source"]["support_size"] == 16
    assert report["tolerance"] > 0
    assert report["budget"] == Budgets().enumeration
    assert report["constants"] == {"c_log": 4, "c_k": 1, "c_L": 1}
    custom = classical_distance_report(
        constant_extractor(4, 2, 1), SourceDistribution.uniform(4), constants=Constants(c_log=2)
    )
    assert custom["constants"]["c_log"] == 2


def test_quantum_distance_report():
    src = SourceDistribution.uniform(1)
    adv = embed_classical_adversary(lambda x: x & 1, 1, name="copy")
    report = quantum_distance_report(identity_extractor(1), src, adv, Budgets(enumeration=1000))
    assert report["distance"] == pytest.approx(0.5)
    assert report["instance"] == {"N": 1, "t": 0, "m": 1}
    # 2 evaluations + 2 table cells + 2 blocks of 2x2
    assert report["budget_used"] == 2 + 2 + 2 * 4
    assert report["budget"] == 1000
    assert report["adversary"] == {"name": "copy", "b": 1, "measurement": False}
    assert report["constants"] == {"c_log": 4, "c_k": 1, "c_L": 1}
    with pytest.raises(BudgetExceededError):
        quantum_distance_report(identity_extractor(1), src, adv, Budgets(enumeration=11))


def test_budget_refusal():
    ext = OneBitExtractor(CodeSpec.hadamard(8))
    with pytest.raises(BudgetExceededError) as e:
        classical_distance(ext, SourceDistribution.uniform(8), Budgets(enumeration=1000))
    assert e.value.budget == 1000
    assert e.value.required > 1000


def test_source_size_must_match():
    with pytest.raises(ParameterError):
        classical_distance(OneBitExtractor(CodeSpec.hadamard(3)), SourceDistribution.uniform(4))


def test_constant_adversary_matches_classical_distance(make_instance, rng):
    inst = make_instance(CodeSpec.xor(6, 2), 2)
    src = random_flat(6, 4, rng)
    classical = classical_distance(inst, src)
    for adv in (constant_adversary(1), constant_adversary(2, np.diag([0.4, 0.3, 0.2, 0.1]))):
        assert quantum_distance(inst, src, adv) == pytest.approx(classical, abs=1e-9)


def test_storage_never_lowers_the_distance(make_instance, rng):
    inst = make_instance(CodeSpec.hadamard(3), 2)
    src = random_flat(3, 2, rng)
    classical = classical_distance(inst, src)
    for seed in range(3):
        assert quantum_distance(inst, src, random_adversary(1, seed)) >= classical - 1e-9


def test_copying_one_bit_is_caught():
    src = SourceDistribution.uniform(2)
    copy = embed_classical_adversary(lambda x: x & 1, 1)
    assert quantum_distance(identity_extractor(2), src, copy) == pytest.approx(0.5)
    assert classical_storage_distance(identity_extractor(2), src, lambda x: x & 1, 1) == pytest.approx(0.5)


def test_classical_storage_distance_without_storage():
    ext = OneBitExtractor(CodeSpec.hadamard(4))
    src = SourceDistribution.uniform(4)
    assert classical_storage_distance(ext, src, lambda x: 0, 0) == pytest.approx(classical_distance(ext, src))
    with pytest.raises(ParameterError):
        classical_storage_distance(ext, src, lambda x: 4, 2)


def test_cq_states_are_normalised(make_instance):
    inst = make_instance(CodeSpec.hadamard(2), 2)
    real, ideal = cq_states(inst, SourceDistribution.uniform(2), random_adversary(1, 9))
    assert real.registers == 1 << (inst.m + inst.t)
    assert real.trace() == pytest.approx(1)
    assert ideal.trace() == pytest.approx(1)


def helstrom(u, y):
    guess = basis_state(u & 1, 2)
    return np.eye(2) - guess, guess


def test_distinguisher_advantage():
    src = SourceDistribution.uniform(1)
    stored = QuantumAdversary(b=1, storage=lambda x: basis_state(x, 2), distinguisher=helstrom)
    assert distinguisher_advantage(identity_extractor(1), src, stored) == pytest.approx(0.5)
    trivial = replace(stored, distinguisher=lambda u, y: (np.eye(2), np.zeros((2, 2))))
    assert distinguisher_advantage(identity_extractor(1), src, trivial) == pytest.approx(0)
    with pytest.raises(ParameterError):
        distinguisher_advantage(identity_extractor(1), src, replace(stored, distinguisher=None))


def test_one_bit_scan_respects_the_collision_bound():
    report = one_bit_security_scan(CodeSpec.hadamard(8), K=6, epsilon=1 / 16, trials=30, seed=5)
    assert len(report.distances) == 30
    assert report.max_distance <= 1 / 16 + 1e-12
    assert report.passed
    summary = report.to_json()
    assert summary["trials"] == 30
    assert summary["mean_distance"] <= summary["max_distance"]


def test_one_bit_scan_budget():
    with pytest.raises(BudgetExceededError):
        one_bit_security_scan(CodeSpec.hadamard(8), K=6, epsilon=0.1, trials=1, budgets=Budgets(enumeration=100))


SMALL_INSTANCES = [
    (CodeSpec.hadamard(2), "disjoint", 3),
    (CodeSpec.hadamard(3), "disjoint", 2),
    (CodeSpec.xor(4, 2), "disjoint", 2),
    (CodeSpec.rs_hadamard(4, width=2), "disjoint", 1),
    (CodeSpec.hadamard(2), "poly", 3),
    (CodeSpec.xor(8, 3), "disjoint", 1),
]


def test_classical_distance_matches_brute_force(make_instance, rng):
    for trial in range(20):
        code, kind, m = SMALL_INSTANCES[trial % len(SMALL_INSTANCES)]
        inst = make_instance(code, m, kind)
        assert inst.t <= 6
        src = random_flat(code.N, int(rng.integers(0, min(code.N, 5) + 1)), rng)

        def evaluate(x, y):
            return bits_to_int(extract(inst, int_to_bits(x, code.N), y))

        expected = brute_distance(evaluate, src.messages(), src.probabilities.tolist(), inst.t, inst.m)
        assert classical_distance(inst, src) == pytest.approx(expected, abs=1e-12)


def test_embedded_storage_matches_classical_side_information(make_instance, rng):
    for trial in range(50):
        code, kind, m = SMALL_INSTANCES[trial % 5]
        inst = make_instance(code, m, kind)
        b = int(rng.integers(0, 3))
        table = rng.integers(0, 1 << b, size=1 << code.N)

        def f(x):
            return int(table[x])

        src = random_flat(code.N, int(rng.integers(0, code.N + 1)), rng)
        quantum = quantum_distance(inst, src, embed_classical_adversary(f, b))
        assert quantum == pytest.approx(classical_storage_distance(inst, src, f, b), abs=1e-9)


def test_one_bit_scan_at_one_quarter():
    report = one_bit_security_scan(CodeSpec.hadamard(8), K=6, epsilon=0.25, trials=100, seed=11)
    assert len(report.distances) == 100
    assert report.passed

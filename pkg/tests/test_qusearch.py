import itertools
from fractions import Fraction

import pytest

from entrocone.distributions import entropy_vector, is_quasi_uniform
from entrocone.logexact import from_log_int
from entrocone.qusearch import (
    Budget,
    FunctionalDependence,
    Independence,
    SearchStatus,
    SupportSpec,
    brute_force_oracle,
    check_feasibility_necessary,
    search,
    spec_from_vector,
    structural_hints,
)
from entrocone.subsets import canonical_order

from conftest import candidate_vector, f_vector, g_vector


def mkspec(n, values):
    return SupportSpec(n, dict(zip(canonical_order(n), values)))


F_SPEC = mkspec(3, [4, 4, 4, 16, 16, 16, 48])
PARITY_SPEC = mkspec(3, [2, 2, 2, 4, 4, 4, 4])
CANDIDATE_SPEC = mkspec(3, [9, 9, 6, 54, 54, 54, 216])


def assert_realizes(outcome, spec):
    assert outcome.status is SearchStatus.FOUND
    verdict = is_quasi_uniform(outcome.pmf)
    assert verdict.is_qu
    assert verdict.support_sizes == spec.m
    ev = entropy_vector(outcome.pmf)
    assert list(ev.coords) == [from_log_int(spec.m[a]) for a in canonical_order(spec.n)]


class TestSpecFromVector:
    def test_f(self):
        spec = spec_from_vector(f_vector())
        assert spec is not None and spec.m == F_SPEC.m

    def test_candidate(self):
        spec = spec_from_vector(candidate_vector())
        assert spec is not None and spec.m == CANDIDATE_SPEC.m

    def test_g_not_liftable(self):
        assert spec_from_vector(g_vector()) is None

    def test_json_round_trip(self):
        blob = F_SPEC.to_json()
        assert blob["m"]["123"] == 48
        assert SupportSpec.from_json(blob) == F_SPEC


class TestFeasibilityNecessary:
    def test_valid_specs(self):
        for spec in (F_SPEC, PARITY_SPEC, CANDIDATE_SPEC):
            ok, witness = check_feasibility_necessary(spec)
            assert ok and witness is None

    def test_divisibility_witness(self):
        ok, witness = check_feasibility_necessary(mkspec(2, [2, 2, 3]))
        assert not ok
        assert "does not divide" in witness

    def test_monotonicity_witness(self):
        ok, witness = check_feasibility_necessary(SupportSpec(2, {
            frozenset({1}): 4, frozenset({2}): 2, frozenset({1, 2}): 2,
        }))
        assert not ok
        assert "monotonicity" in witness

    def test_polymatroid_witness(self):
        # m12 beyond m1*m2 violates submodularity of the log-size vector
        ok, witness = check_feasibility_necessary(mkspec(2, [2, 2, 8]))
        assert not ok
        assert "violates" in witness

    def test_missing_subset(self):
        ok, witness = check_feasibility_necessary(SupportSpec(2, {frozenset({1}): 2}))
        assert not ok
        assert "missing" in witness


class TestSearch:
    def test_parity_instance(self):
        outcome = search(PARITY_SPEC)
        assert_realizes(outcome, PARITY_SPEC)
        # the witness class is the parity pattern: the apex coordinate is
        # determined by the first two
        support = sorted(outcome.pmf.mass)
        assert support == [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]

    def test_f_instance(self):
        outcome = search(F_SPEC)
        assert_realizes(outcome, F_SPEC)
        # complement of the support is one excluded cell per pair fiber,
        # i.e. the graph of a 4x4 Latin square
        holes = sorted(
            cell
            for cell in itertools.product(range(4), repeat=3)
            if cell not in outcome.pmf.mass
        )
        assert len(holes) == 16
        for i, j in ((0, 1), (0, 2), (1, 2)):
            pairs = {(h[i], h[j]) for h in holes}
            assert len(pairs) == 16

    def test_product_instance(self):
        spec = mkspec(2, [2, 3, 6])
        outcome = search(spec)
        assert_realizes(outcome, spec)
        assert sorted(outcome.pmf.mass) == list(itertools.product(range(2), range(3)))

    def test_bijection_instance(self):
        spec = mkspec(2, [2, 2, 2])
        outcome = search(spec)
        assert_realizes(outcome, spec)

    def test_determinism(self):
        a = search(F_SPEC, budget=Budget(max_nodes=100_000, max_seconds=30))
        b = search(F_SPEC, budget=Budget(max_nodes=100_000, max_seconds=30))
        assert a.status == b.status
        assert a.pmf == b.pmf
        assert a.nodes_explored == b.nodes_explored

    def test_budget_exceeded(self):
        outcome = search(CANDIDATE_SPEC, budget=Budget(max_nodes=2_000, max_seconds=30))
        assert outcome.status is SearchStatus.BUDGET_EXCEEDED
        assert outcome.pmf is None
        assert outcome.nodes_explored >= 2_000

    def test_rejects_invalid_spec(self):
        with pytest.raises(ValueError):
            search(mkspec(2, [2, 2, 3]))

    def test_parallel_mode_smoke(self):
        outcome = search(PARITY_SPEC, workers=2)
        assert outcome.status is SearchStatus.FOUND
        assert is_quasi_uniform(outcome.pmf).is_qu
        outcome48 = search(F_SPEC, workers=2, budget=Budget(max_seconds=60))
        assert_realizes(outcome48, F_SPEC)


class TestOracle:
    def test_agrees_on_parity(self):
        oracle = brute_force_oracle(PARITY_SPEC)
        assert oracle.status is SearchStatus.FOUND
        assert is_quasi_uniform(oracle.pmf).is_qu

    def test_raw_infeasible_spec_enumerates(self):
        outcome = brute_force_oracle(mkspec(2, [2, 2, 3]))
        assert outcome.status is SearchStatus.EXHAUSTED_INFEASIBLE
        assert outcome.nodes_explored == 4  # C(4,3) candidate supports

    def test_bijection(self):
        outcome = brute_force_oracle(mkspec(2, [2, 2, 2]))
        assert outcome.status is SearchStatus.FOUND
        xs = sorted(outcome.pmf.mass)
        assert len({x[0] for x in xs}) == 2 and len({x[1] for x in xs}) == 2

    def test_cap_enforced(self):
        with pytest.raises(ValueError):
            brute_force_oracle(F_SPEC, cap=24)

    def test_search_matches_oracle_on_n2_sweep(self):
        # every monotone, divisibility-valid spec with sizes <= 4
        checked = 0
        for m1 in range(1, 5):
            for m2 in range(1, 5):
                for m12 in range(max(m1, m2), m1 * m2 + 1):
                    spec = mkspec(2, [m1, m2, m12])
                    ok, _ = check_feasibility_necessary(spec)
                    if not ok:
                        continue
                    checked += 1
                    s = search(spec)
                    o = brute_force_oracle(spec)
                    assert s.status == o.status, spec.to_json()
                    if s.status is SearchStatus.FOUND:
                        assert_realizes(s, spec)
        assert checked >= 20

    def test_search_matches_oracle_on_small_n3_specs(self):
        checked = 0
        for sizes in ((2, 2, 2), (2, 2, 3), (1, 2, 4), (2, 3, 2), (2, 2, 4), (3, 2, 2)):
            m1, m2, m3 = sizes
            if m1 * m2 * m3 > 24:
                continue
            for m12 in range(1, m1 * m2 + 1):
                for m13 in range(1, m1 * m3 + 1):
                    for m23 in range(1, m2 * m3 + 1):
                        for m123 in range(1, m1 * m2 * m3 + 1):
                            spec = mkspec(3, [m1, m2, m3, m12, m13, m23, m123])
                            ok, _ = check_feasibility_necessary(spec)
                            if not ok:
                                continue
                            checked += 1
                            assert search(spec).status == brute_force_oracle(spec).status
        assert checked >= 20


class TestHints:
    def test_candidate_vector_hints(self):
        hints = structural_hints(candidate_vector())
        indep = {(tuple(sorted(h.alpha)), tuple(sorted(h.beta)))
                 for h in hints if isinstance(h, Independence)}
        assert indep == {((1,), (3,)), ((2,), (3,))}
        assert not any(isinstance(h, FunctionalDependence) for h in hints)

    def test_f_vector_hints_fire_for_all_pairs(self):
        hints = structural_hints(f_vector())
        indep = {(tuple(sorted(h.alpha)), tuple(sorted(h.beta)))
                 for h in hints if isinstance(h, Independence)}
        assert indep == {((1,), (2,)), ((1,), (3,)), ((2,), (3,))}

    def test_parity_vector_hints_include_functional_dependence(self):
        vec = entropy_vector(search(PARITY_SPEC).pmf)
        hints = structural_hints(vec)
        fd = {(tuple(sorted(h.base)), tuple(sorted(h.extension)))
              for h in hints if isinstance(h, FunctionalDependence)}
        assert ((1, 2), (3,)) in fd

    def test_product_vector_hint(self):
        spec = mkspec(2, [2, 2, 4])
        vec = entropy_vector(search(spec).pmf)
        hints = structural_hints(vec)
        assert Independence(frozenset({1}), frozenset({2})) in hints

    def test_rejects_non_natural_vector(self):
        with pytest.raises(ValueError):
            structural_hints(g_vector())

    def test_hints_preserve_feasibility_verdicts(self):
        # identities forced by counting can never exclude a realization
        for spec in (PARITY_SPEC, F_SPEC, mkspec(2, [2, 3, 6]), mkspec(2, [2, 2, 2])):
            vec = entropy_vector(search(spec).pmf)
            hints = structural_hints(vec)
            with_hints = search(spec, hints=hints)
            without = search(spec)
            assert with_hints.status == without.status is SearchStatus.FOUND
            assert_realizes(with_hints, spec)

    def test_hints_agree_with_oracle_on_n2_sweep(self):
        for m1 in range(1, 5):
            for m2 in range(1, 5):
                for m12 in range(max(m1, m2), m1 * m2 + 1):
                    spec = mkspec(2, [m1, m2, m12])
                    ok, _ = check_feasibility_necessary(spec)
                    if not ok:
                        continue
                    vec = entropy_vector(brute_force_oracle(spec).pmf) \
                        if brute_force_oracle(spec).status is SearchStatus.FOUND else None
                    if vec is None:
                        continue
                    hints = structural_hints(vec)
                    assert search(spec, hints=hints).status is SearchStatus.FOUND

from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epsilon_lab.core.machine import (
    EpsilonMachine,
    all_words,
    backward_inference,
    dump_machine,
    is_minimal,
    isomorphic,
    minimize,
    noncounifilar_states,
    parse_machine,
    sample,
    validate,
    word_probability,
)
from epsilon_lab.errors import (
    InconsistentWordError,
    MachineSchemaError,
    MachineValidationError,
    UnknownStateError,
    UnknownSymbolError,
)
from epsilon_lab.io.documents import read_machine_file
from epsilon_lab.processes import biased_coins, iid, nemo, period_cycle, random_machine


def _doc(transitions, states=("A", "B"), alphabet=("0", "1")):
    return json.dumps({
        "name": "t",
        "alphabet": list(alphabet),
        "states": list(states),
        "transitions": [
            {"from": a, "symbol": x, "to": b, "prob": p} for a, x, b, p in transitions
        ],
    })


# ---------- parsing ----------

def test_parse_reference_document(machines_dir):
    m = read_machine_file(machines_dir / "biased_coins_p0666.json")
    assert m.states == ("A", "B")
    assert tuple(m.alphabet) == ("0", "1")
    np.testing.assert_allclose(m.stationary, [0.5, 0.5], atol=1e-12)
    assert word_probability(m, "A", "1")[0] == pytest.approx(0.666)


def test_parse_rejects_duplicate_transition():
    text = _doc([("A", "0", "A", 0.5), ("A", "0", "B", 0.5), ("B", "1", "A", 1)])
    with pytest.raises(MachineSchemaError, match="unifilarity"):
        parse_machine(text)


def test_parse_rejects_bad_row_sum():
    text = _doc([("A", "0", "A", 0.4), ("A", "1", "B", 0.5), ("B", "1", "A", 1)])
    with pytest.raises(MachineValidationError, match="stochasticity"):
        parse_machine(text)


def test_parse_accepts_exact_decimal_thirds_within_tolerance():
    text = _doc(
        [("A", "0", "A", 0.333333333333), ("A", "1", "B", 0.666666666667), ("B", "1", "A", 1)]
    )
    assert parse_machine(text).n_states == 2


def test_parse_reports_json_position():
    with pytest.raises(MachineSchemaError) as info:
        parse_machine('{"name": "x",')
    assert "line" in str(info.value)


def test_parse_reports_field_path():
    text = _doc([("A", "0", "Z", 1.0)])
    with pytest.raises(MachineSchemaError) as info:
        parse_machine(text)
    assert info.value.position == "transitions[0].to"


def test_reducible_machine_rejected():
    text = _doc([("A", "0", "A", 1.0), ("B", "0", "A", 1.0)])
    with pytest.raises(MachineValidationError, match="irreducibility"):
        parse_machine(text)


def test_dump_then_parse_is_isomorphic(gm43):
    assert isomorphic(parse_machine(dump_machine(gm43)), gm43)


# ---------- structure ----------

def test_nemo_stationary_distribution():
    p = 0.3
    m = nemo(p)
    a = 1.0 / (3.0 - 2.0 * p)
    np.testing.assert_allclose(m.stationary, [a, (1 - p) * a, (1 - p) * a], atol=1e-12)


def test_period_cycle_is_uniform():
    np.testing.assert_allclose(period_cycle(5).stationary, np.full(5, 0.2), atol=1e-12)


def test_noncounifilar_states(coins, gm43, nemo666):
    assert noncounifilar_states(coins) == {"A", "B"}
    assert noncounifilar_states(gm43) == {"A"}
    assert noncounifilar_states(nemo666) == {"A"}
    assert noncounifilar_states(period_cycle(3)) == frozenset()


def test_validate_reports_clean_machine(gm43):
    report = validate(gm43)
    assert report.ok
    assert report.minimal
    assert not report.counifilar


def test_validate_reports_corrupted_row():
    m = EpsilonMachine.from_edges(
        "corrupt", ("0", "1"), ("A", "B"),
        [("A", "0", "A", 0.3), ("A", "1", "B", 0.6), ("B", "0", "A", 1.0)],
        strict=False,
    )
    report = validate(m)
    assert not report.ok
    assert [v.rule for v in report.violations] == ["stochasticity"]
    assert report.violations[0].context == "A"


def test_unknown_symbol_and_state(coins):
    with pytest.raises(UnknownSymbolError):
        word_probability(coins, "A", "2")
    with pytest.raises(UnknownStateError):
        word_probability(coins, "Z", "0")


# ---------- minimization ----------

def test_biased_coins_half_minimizes_to_one_state():
    m = biased_coins(0.5)
    assert not is_minimal(m)
    small = minimize(m)
    assert small.n_states == 1
    assert isomorphic(small, iid([0.5, 0.5]))


def test_minimize_returns_minimal_machine_unchanged(nemo666):
    assert minimize(nemo666) is nemo666


def test_minimize_merges_redundant_period_presentation():
    m = EpsilonMachine.from_edges(
        "period-2x2", ("0", "1"), ("A", "B", "C", "D"),
        [("A", "1", "B", 1.0), ("B", "0", "C", 1.0), ("C", "1", "D", 1.0), ("D", "0", "A", 1.0)],
    )
    assert isomorphic(minimize(m), period_cycle(2))


@given(n=st.integers(1, 6), seed=st.integers(0, 10_000))
def test_minimize_is_idempotent(n, seed):
    m = random_machine(n, 2, seed=seed)
    assert is_minimal(m)
    assert minimize(m) is m


def _double_cover(m: EpsilonMachine) -> EpsilonMachine:
    # two copies of every state; the first edge out of state 0 crosses copies
    crossed = next(x for x in range(m.n_symbols) if m.targets[0, x] >= 0)
    edges = []
    for copy in (0, 1):
        for i, s in enumerate(m.states):
            for x in range(m.n_symbols):
                j = m.targets[i, x]
                if j < 0:
                    continue
                lands = 1 - copy if (i, x) == (0, crossed) else copy
                edges.append((f"{s}/{copy}", m.alphabet[x], f"{m.states[j]}/{lands}", float(m.probs[i, x])))
    states = [f"{s}/{c}" for c in (0, 1) for s in m.states]
    return EpsilonMachine.from_edges(f"{m.name}-cover", tuple(m.alphabet), states, edges)


def _word_distribution(m: EpsilonMachine, L: int) -> np.ndarray:
    return np.array([
        sum(pi * word_probability(m, s, w)[0] for s, pi in zip(m.states, m.stationary))
        for w in all_words(m, L)
    ])


@given(n=st.integers(1, 4), seed=st.integers(0, 10_000))
def test_minimize_collapses_redundant_cover(n, seed):
    m = random_machine(n, 2, seed=seed)
    cover = _double_cover(m)
    assert not is_minimal(cover)

    small = minimize(cover)
    assert small.n_states == m.n_states
    assert isomorphic(small, m)
    assert isomorphic(minimize(small), small)
    for L in range(9):
        np.testing.assert_allclose(_word_distribution(small, L), _word_distribution(cover, L), atol=1e-9)


def test_isomorphic_ignores_labels(coins):
    relabeled = EpsilonMachine.from_edges(
        "coins", ("0", "1"), ("X", "Y"),
        [(s.replace("A", "Y").replace("B", "X"), x, t.replace("A", "Y").replace("B", "X"), p)
         for s, x, t, p in coins.edges()],
    )
    assert isomorphic(coins, relabeled)
    assert not isomorphic(coins, biased_coins(0.3))


# ---------- words ----------

@given(n=st.integers(1, 5), seed=st.integers(0, 10_000), L=st.integers(0, 5))
def test_word_probabilities_normalize(n, seed, L):
    m = random_machine(n, 2, seed=seed)
    for state in m.states:
        total = sum(word_probability(m, state, w)[0] for w in all_words(m, L))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_word_probability_follows_path(gm43):
    p = 0.505
    prob, final = word_probability(gm43, "A", "100")
    assert prob == pytest.approx(p * (1 - p))
    assert final == "C"
    assert word_probability(gm43, "B", "1") == (0.0, None)


def test_all_words_order():
    m = iid([0.2, 0.3, 0.5])
    assert all_words(m, 2)[:4] == ["00", "01", "02", "10"]
    assert len(all_words(m, 3)) == 27


def test_sample_is_reproducible_and_consistent(nemo666):
    symbols, path = sample(nemo666, 200, seed=11)
    again, _ = sample(nemo666, 200, seed=11)
    assert symbols == again
    assert len(path) == 201
    for i, x in enumerate(symbols):
        assert word_probability(nemo666, path[i], x)[1] == path[i + 1]


def test_sample_from_given_start(gm43):
    symbols, path = sample(gm43, 3, seed=0, start="G")
    assert path[0] == "G"
    assert symbols[0] == "1"


def test_sample_of_length_zero(nemo666):
    assert sample(nemo666, 0, seed=3, start="B") == ((), ("B",))


def test_sample_frequencies_match_branch_probability(coins):
    p, n = 0.666, 100_000
    rng = np.random.default_rng(2024)
    ones = sum(sample(coins, 1, seed=rng, start="A")[0] == ("1",) for _ in range(n))
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(ones / n - p) <= 3 * sigma


def test_backward_inference_on_golden_mean(gm43):
    # F->G->A->A and G->A->A->A also emit 111 into A
    sets = backward_inference(gm43, "111", "A")
    assert sets == [
        frozenset({"A", "E", "F", "G"}),
        frozenset({"A", "F", "G"}),
        frozenset({"A", "G"}),
        frozenset({"A"}),
    ]


def test_backward_inference_on_nemo(nemo666):
    assert backward_inference(nemo666, "0", "A") == [frozenset({"A", "C"}), frozenset({"A"})]


def test_backward_inference_rejects_impossible_word(gm43):
    with pytest.raises(InconsistentWordError):
        backward_inference(gm43, "01", "A")


def test_word_synchronizes_golden_mean_subset(gm43):
    # 000 leaves an observer starting from full uncertainty in {D, E}
    reached = set()
    for start in gm43.states:
        prob, final = word_probability(gm43, start, "000")
        if prob > 0:
            reached.add(final)
    assert reached == {"D", "E"}


def test_edges_cover_every_allowed_slot(nemo666):
    edges = list(nemo666.edges())
    assert len(edges) == int((nemo666.targets >= 0).sum())
    by_state = {}
    for src, _, _, p in edges:
        by_state[src] = by_state.get(src, 0.0) + p
    assert all(v == pytest.approx(1.0) for v in by_state.values())


def test_labeled_matrices_sum_to_transition_matrix(gm43):
    T = sum(gm43.symbol_matrices())
    np.testing.assert_allclose(T, gm43.transition_matrix())
    np.testing.assert_allclose(T.sum(axis=1), np.ones(gm43.n_states))


def test_word_indices_split_multichar_symbols():
    m = EpsilonMachine.from_edges(
        "multi", ("up", "down"), ("A",), [("A", "up", "A", 0.5), ("A", "down", "A", 0.5)]
    )
    assert m.word_indices("up down up") == [0, 1, 0]
    assert word_probability(m, "A", ["up", "up"])[0] == pytest.approx(0.25)


def test_all_words_is_the_full_product():
    # every word over a 2-symbol alphabet of length 3 appears once
    m = period_cycle(2)
    assert sorted(all_words(m, 3)) == sorted("".join(w) for w in itertools.product("01", repeat=3))

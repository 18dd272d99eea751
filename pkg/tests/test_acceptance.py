"""Acceptance suite: one PASS/FAIL line per criterion.

Each test prints its verdict (visible even without ``-s``) and then asserts
it, so a failing criterion shows both the line and the usual traceback.
"""

import math

import pytest

from worldmetric import ctm
from worldmetric.estimators import ESTIMATOR_NAMES, conditional_branches, estimate_k, header_constant
from worldmetric.ranker import RankingRequest, lottery_demo, rank
from worldmetric.rng import XorShift64, generator_bits, stream_seed
from worldmetric.similarity import conversion_values, similarity, to_probabilities
from worldmetric.worldstate import BitString

from corpora import centralisation_corpus, random_bits
from oracles import ctm_oracle
from test_ranker import scene, strong_centralisation_request


@pytest.fixture
def verdict(capsys):
    def report(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return report


def test_criterion_1_worked_normalization(verdict):
    ds = [0.81893085, 0.54768653, 0.14973508]
    want_exp = [0.44090279, 0.57828611, 0.86093603]
    want_p = [0.23450718, 0.30757856, 0.45791426]
    probs = [p for _, p in to_probabilities(list(zip("abc", ds))).entries]
    err = max(max(abs(a - b) for a, b in zip(probs, want_p)),
              max(abs(a - b) for a, b in zip(conversion_values(ds), want_exp)))
    verdict(1, err <= 1e-6, f"worked normalization, max error {err:.2e}")


def test_criterion_2_lottery_uniformity(verdict):
    demo = lottery_demo()
    number_err = max(abs(r["probability"] - 0.2) for r in demo["numbers"])
    world_err = max(abs(e.probability - 1 / 252) for e in demo["ranking"].entries)
    ok = len(demo["ranking"].entries) == 252 and number_err <= 0.02 and world_err <= 0.001
    verdict(2, ok, f"lottery, number deviation {number_err:.4f}, world deviation {world_err:.2e}, "
                   f"{len(demo['ranking'].entries)} worlds")


def _chain_only(x: BitString) -> float:
    b = conditional_branches(x, x)["chain"]
    return b / estimate_k(x).bits


def test_criterion_3_strong_centralisation(verdict):
    misses = [t for t in range(100)
              if min(rank(strong_centralisation_request(t)).compatible,
                     key=lambda e: (e.distance, e.label)).label != "actual"]
    worst = max(similarity(x, x).value for x in centralisation_corpus())
    # diagnostic: the same corpus scored with the chain program alone
    chain_worst = max(_chain_only(x) for x in centralisation_corpus())
    ok = not misses and worst <= 0.05
    verdict(3, ok, f"strong centralisation, {100 - len(misses)}/100 requests, max S(x,x) {worst:.4f} "
                   f"(chain program alone: {chain_worst:.4f})")


def test_criterion_4_plurality(verdict):
    context = random_bits(256, 42)
    actual = scene("actual", random_bits(64, 5000), context)
    cands = tuple(scene(f"c{i:02d}", generator_bits(64, stream_seed(i)), context) for i in range(50))
    ranking = rank(RankingRequest(actual, cands))
    ds = [e.distance for e in ranking.entries]
    mean = math.fsum(ds) / len(ds)
    sd = math.sqrt(math.fsum((d - mean) ** 2 for d in ds) / len(ds))
    classes = len(ranking.plurality_classes)
    verdict(4, sd <= 0.05 and classes == 1, f"plurality, distance stddev {sd:.4f}, {classes} class(es)")


def test_criterion_5_solomonoff_bound(verdict):
    corpus = [BitString.from_int(v, 8) for v in range(256)]
    corpus += [random_bits(4096, 500 + i) for i in range(100)]
    violations = sum(estimate_k(x, name).bits > x.length + header_constant(name)
                     for name in ESTIMATOR_NAMES for x in corpus)
    verdict(5, violations == 0, f"upper bound, {len(corpus)} strings x {len(ESTIMATOR_NAMES)} estimators, "
                                f"{violations} violations")


def test_criterion_6_ctm_oracle(verdict):
    problems = []
    for n in (1, 2):
        weights, smallest, halting, total = ctm_oracle(n, 1000)
        dist = ctm.enumerate_class(n, 1000)
        if dist.weights != weights or dist.halting != halting or dist.machines != total:
            problems.append(f"n={n} weights")
        if any(ctm.MachineSpec.from_index(n, dist.first_machine[o]).encoding() != c for o, c in smallest.items()):
            problems.append(f"n={n} smallest machines")
        if ctm.dumps(ctm.enumerate_class(n, 1000, order=ctm.shuffled_order(n, 11))) != ctm.dumps(dist):
            problems.append(f"n={n} shuffled cache")
    verdict(6, not problems, "CTM oracle equivalence and shuffled cache identity for n=1,2"
            + (f", mismatches: {problems}" if problems else ""))


def test_criterion_7_metric_sanity(verdict):
    rng = XorShift64(stream_seed(77))
    asymmetric, out_of_range = 0, 0
    for _ in range(10_000):
        x, y = rng.bits(1 + rng.below(48)), rng.bits(1 + rng.below(48))
        name = ESTIMATOR_NAMES[rng.below(len(ESTIMATOR_NAMES))]
        s = similarity(x, y, name).value
        asymmetric += s != similarity(y, x, name).value
        out_of_range += not 0.0 <= s <= 1.2
    not_reversing = 0
    for _ in range(1000):
        ds = [rng.next() / 2 ** 64 * 5 for _ in range(1 + rng.below(20))]
        probs = [p for _, p in to_probabilities(ds).entries]
        order_ok = all(probs[i] > probs[j] for i in range(len(ds)) for j in range(len(ds)) if ds[i] < ds[j])
        not_reversing += not order_ok
    ok = asymmetric == out_of_range == not_reversing == 0
    verdict(7, ok, f"metric sanity, {asymmetric} asymmetric pairs, {out_of_range} scores outside [0, 1.2], "
                   f"{not_reversing} non-reversing lists")

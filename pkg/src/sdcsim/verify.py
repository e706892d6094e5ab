"""Self-verification suite: the simulator's physical invariants as checks.

Each check returns a pass/fail with a short numeric detail so the CLI can
print one line per invariant. Everything here is either exact (tolerance
1e-12 on amplitudes and probabilities) or a seeded statistical bound (3-sigma
binomial bands), so results do not flap across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import capacity
from .elements import hwp
from .fock import ModeLabel, apply_element, make_state, sample_outcome, unitarity_defect
from .protocol import (
    ALICE,
    ALPHABET,
    BOB,
    Branch,
    MessageSymbol,
    ReferenceState,
    Scenario,
    default_bench,
)
from .session import RunConfig, run_session

EXACT_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


def _element_suite(bench):
    reg = bench.registry
    return {
        "BS(alice,bob)": bench.bs.matrix,
        "PBS(alice,out_a)": bench.pbs_a.matrix,
        "PBS(bob,out_b)": bench.pbs_b.matrix,
        "HWP(0,alice)": bench.hwp0.matrix,
        "HWP(45,alice)": bench.hwp45.matrix,
        "HWP(22.5,alice)": hwp(reg, 22.5, ALICE).matrix,
        "pol(H)": bench.pol_pass_h.matrix,
        "pol(V)": bench.pol_pass_v.matrix,
    }


def check_unitarity(bench, extra_matrices: Mapping[str, np.ndarray] | None = None) -> CheckResult:
    elements = dict(_element_suite(bench))
    if extra_matrices:
        elements.update(extra_matrices)
    worst_name, worst = max(
        ((name, unitarity_defect(m)) for name, m in elements.items()),
        key=lambda kv: kv[1],
    )
    return _check(
        "element_unitarity",
        worst < EXACT_TOL,
        f"max ||U†U-I|| = {worst:.2e} ({worst_name})",
    )


def check_hom_dip(bench) -> CheckResult:
    worst = 0.0
    for pol in ("H", "V"):
        pair = make_state(
            bench.registry, [ModeLabel(ALICE, pol), ModeLabel(BOB, pol)]
        )
        dist = bench.analyze(pair)
        coincidence = sum(
            p for pattern, p in dist.items() if pattern.count("aH") + pattern.count("aV") == 1
        )
        worst = max(worst, coincidence)
    return _check("hom_dip", worst < EXACT_TOL, f"coincidence prob = {worst:.2e}")


def check_perpendicular_split(bench) -> CheckResult:
    pair = make_state(bench.registry, [ModeLabel(ALICE, "H"), ModeLabel(BOB, "V")])
    dist = bench.analyze(pair)
    split = sum(
        p
        for pattern, p in dist.items()
        if (pattern.count("aH") + pattern.count("aV")) == 1
    )
    bunch = 1.0 - split
    err = max(abs(split - 0.5), abs(bunch - 0.5))
    return _check(
        "perpendicular_split",
        err < EXACT_TOL,
        f"split {split:.12f} / bunch {bunch:.12f}",
    )


def check_composition(bench) -> CheckResult:
    state = bench.source_emit()
    worst = 0.0
    for element in (bench.bs, bench.hwp45, bench.pbs_a):
        roundtrip = apply_element(apply_element(state, element), element.dagger())
        worst = max(worst, abs(1.0 - roundtrip.fidelity(state)))
    twice = apply_element(apply_element(state, bench.hwp0), bench.hwp0)
    worst = max(worst, abs(1.0 - twice.fidelity(state)))
    return _check("composition_inverse", worst < EXACT_TOL, f"max fidelity defect = {worst:.2e}")


def check_signatures(bench) -> CheckResult:
    try:
        table = bench.signature_table()
    except Exception as exc:  # disjointness violation raises
        return _check("signature_disjointness", False, str(exc))
    n_patterns = sum(len(s) for s in table.values())
    return _check(
        "signature_disjointness",
        True,
        f"4 disjoint signatures, {n_patterns} patterns",
    )


def check_exact_discrimination(bench) -> CheckResult:
    for symbol in ALPHABET:
        branches = bench.encode_branches(symbol)
        dist = bench.analyze(branches.controlled_state)
        good = sum(
            p
            for pattern, p in dist.items()
            if bench.classify(pattern).symbol is symbol
        )
        if abs(good - 1.0) > EXACT_TOL:
            return _check(
                "exact_discrimination",
                False,
                f"{symbol.value} decodes with prob {good:.12f}",
            )
    return _check("exact_discrimination", True, "all four messages decode with prob 1")


def check_phi_indistinguishable(bench) -> CheckResult:
    tvd = capacity.total_variation_distance(
        bench.analyze(bench.state_for(ReferenceState.PHI_PLUS)),
        bench.analyze(bench.state_for(ReferenceState.PHI_MINUS)),
    )
    return _check("phi_pair_indistinguishable", tvd < EXACT_TOL, f"TVD = {tvd:.2e}")


def check_branch_probability(bench) -> CheckResult:
    worst = 0.0
    for symbol in (MessageSymbol.HH, MessageSymbol.VV):
        p = bench.encode_branches(symbol).controlled_probability
        worst = max(worst, abs(p - 0.5))
    return _check("branch_probability_exact", worst < EXACT_TOL, f"|p - 1/2| = {worst:.2e}")


def check_branch_statistics(bench, seed: int, trials: int) -> CheckResult:
    config = RunConfig(
        scenario=Scenario.B,
        n_messages=trials,
        seed=seed,
        messages=(MessageSymbol.HH,),
    )
    result = run_session(config, bench)
    wrong = sum(1 for r in result.records if r.branch is Branch.WRONG)
    freq = wrong / trials
    sigma = math.sqrt(0.25 / trials)
    return _check(
        "branch_statistics",
        abs(freq - 0.5) < 3 * sigma,
        f"wrong-branch freq {freq:.4f} over {trials} trials (3σ = {3 * sigma:.4f})",
    )


def check_sampling_consistency(bench, seed: int, draws: int = 100_000) -> CheckResult:
    dist = bench.analyze(bench.source_emit())
    keyed = {p.counts: prob for p, prob in dist.items()}
    rng = np.random.default_rng(seed)
    counts: dict[tuple, int] = {}
    for _ in range(draws):
        got = sample_outcome(keyed, rng)
        counts[got] = counts.get(got, 0) + 1
    worst = 0.0
    ok = True
    for key, prob in keyed.items():
        freq = counts.get(key, 0) / draws
        sigma = math.sqrt(prob * (1 - prob) / draws)
        worst = max(worst, abs(freq - prob))
        ok = ok and abs(freq - prob) <= 3 * sigma
    return _check(
        "sampling_consistency",
        ok,
        f"max |freq - p| = {worst:.4f} over {draws} draws",
    )


def check_capacity_references(bench) -> CheckResult:
    dense = capacity.capacity_from_counts(1000, 1000, alphabet_size=3)
    ideal = capacity.capacity_from_counts(1000, 1000, alphabet_size=4)
    expected = capacity.expected_accounting(Scenario.A)
    share = expected.per_symbol[MessageSymbol.HH.value].delivered_share
    checks = [
        abs(dense.bits_per_pair - 1.585) < 1e-3,
        abs(ideal.bits_per_pair - 2.0) < EXACT_TOL,
        abs(expected.efficiency - 2.0 / 3.0) < EXACT_TOL,
        abs(expected.discard_fraction - 1.0 / 3.0) < EXACT_TOL,
        abs(share - 1.0 / 6.0) < EXACT_TOL,
        abs(expected.bits_per_pair - 1.4150) < 5e-4,
        abs(expected.rounded_reference.bits_per_pair - 1.433) < 5e-4,
    ]
    return _check(
        "capacity_references",
        all(checks),
        f"log2(3)={dense.bits_per_pair:.4f}, uniform bits/pair="
        f"{expected.bits_per_pair:.4f} (rounded ref {expected.rounded_reference.bits_per_pair:.4f})",
    )


def check_seed_determinism(bench, seed: int) -> CheckResult:
    config = RunConfig(scenario=Scenario.A, n_messages=200, seed=seed)
    first = run_session(config, bench)
    second = run_session(config, bench)
    same = first.records == second.records and first.report == second.report
    return _check("seed_determinism", same, f"{len(first.records)} trials reproduced")


def run_verification(
    seed: int = 20_260_810,
    branch_trials: int = 100_000,
    extra_matrices: Mapping[str, np.ndarray] | None = None,
) -> list[CheckResult]:
    """Run every invariant check; `extra_matrices` join the unitarity sweep."""
    bench = default_bench()
    return [
        check_unitarity(bench, extra_matrices),
        check_composition(bench),
        check_hom_dip(bench),
        check_perpendicular_split(bench),
        check_signatures(bench),
        check_exact_discrimination(bench),
        check_phi_indistinguishable(bench),
        check_branch_probability(bench),
        check_branch_statistics(bench, seed, branch_trials),
        check_sampling_consistency(bench, seed),
        check_capacity_references(bench),
        check_seed_determinism(bench, seed),
    ]


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)

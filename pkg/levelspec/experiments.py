"""Desk-scale experiments: configuration, the trial scheduler and each run kind.

Every run returns an :class:`ExperimentResult` holding a fixed CSV schema
(header plus rows of exact values) and a JSON document with the same rows
and run-specific extras. Per-trial randomness comes only from
``(master_seed, trial_index)``, so outputs do not depend on ``workers``.
"""

from __future__ import annotations

import asyncio
import logging
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Tuple

from mpmath import mp, mpf

from .errors import PreconditionError, check_guard
from .graphs import (
    Graph,
    adjacency,
    is_controllable,
    is_generalized_cospectral,
    spectrum_key,
)
from .io_graph import (
    load_json,
    read_graph6_file,
    read_matrix_file,
    render_csv,
    render_json,
    to_graph6,
)
from .linalg import RationalMatrix, format_fraction
from .orthogonal import (
    MAX_ENUM_LEVEL,
    MAX_ENUM_ORDER,
    LevelMode,
    RationalOrthogonalMatrix,
    block_diagonal,
    can_count_bound,
    count_bound,
    enumerate_level,
    fractional_index_sets,
    is_in_can,
    is_regular,
    rational_orthogonal,
)
from .proof import (
    audit_enumeration,
    block_size,
    epsilon_series,
    lemma_bound,
    n_star,
    union_bound,
)
from .sampling import GENERATOR_NAME, GnpSampler
from .search import (
    brute_force_mates,
    certificate_from_dict,
    certificate_to_dict,
    conjugates_integrally,
    cospectral_census,
    find_mates,
    mates_agree,
    reverify,
    verify_level_divisibility,
)

CONFIDENCE = Fraction(99, 100)
COUNT_BOUND_MAX_BITS = 4096
DEFAULT_ROTATION = ((Fraction(3, 5), Fraction(-4, 5)), (Fraction(4, 5), Fraction(3, 5)))


class ExperimentKind(str, Enum):
    CONTROLLABILITY_SWEEP = "controllability-sweep"
    LEMMA_MC = "lemma-mc"
    MATE_SCAN = "mate-scan"
    CENSUS = "census"
    ENUM_ORTHO = "enum-ortho"
    BOUNDS = "bounds"
    VERIFY_CERTS = "verify-certs"


COMMAND_KINDS = {
    "sweep-controllability": ExperimentKind.CONTROLLABILITY_SWEEP,
    "lemma-mc": ExperimentKind.LEMMA_MC,
    "mate-scan": ExperimentKind.MATE_SCAN,
    "census": ExperimentKind.CENSUS,
    "enum-ortho": ExperimentKind.ENUM_ORTHO,
    "bounds": ExperimentKind.BOUNDS,
    "verify-certs": ExperimentKind.VERIFY_CERTS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    n_values: Tuple[int, ...] = (6,)
    p: Fraction = Fraction(1, 2)
    level: int = 2
    trials: int = 100
    master_seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    quotient: bool = True
    mode: LevelMode = LevelMode.DIVIDES
    workers: int = 4
    max_order: int = MAX_ENUM_ORDER
    max_level: int = MAX_ENUM_LEVEL
    matrix_path: str | None = None
    graphs_path: str | None = None
    certificates_path: str | None = None
    verify: bool = False
    audit: bool = False
    union: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        object.__setattr__(self, "mode", LevelMode(self.mode))
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "n_values", tuple(self.n_values))
        if self.trials < 1:
            raise PreconditionError(f"trials must be at least 1, got {self.trials}")
        if not self.n_values or min(self.n_values) < 1:
            raise PreconditionError("the order range must be non-empty and positive")
        if not 0 <= self.p <= 1:
            raise PreconditionError(f"p must lie in [0, 1], got {self.p}")
        if self.level < 1:
            raise PreconditionError(f"level must be positive, got {self.level}")
        if self.workers < 1:
            raise PreconditionError(f"workers must be positive, got {self.workers}")
        if self.fmt not in ("csv", "json"):
            raise PreconditionError(f"unknown output format {self.fmt!r}")

    @classmethod
    def from_namespace(cls, params) -> "ExperimentConfig":
        """Build a config from parsed CLI arguments; absent flags keep defaults."""
        kind = COMMAND_KINDS[params.command]
        values: Dict[str, Any] = {"kind": kind}
        n_range = getattr(params, "n_range", None)
        n = getattr(params, "n", None)
        if n_range:
            values["n_values"] = n_range
        elif n is not None:
            values["n_values"] = (n,)
        for name, attribute in (
            ("p", "p"),
            ("level", "level"),
            ("trials", "trials"),
            ("master_seed", "seed"),
            ("out", "out"),
            ("fmt", "format"),
            ("quotient", "quotient_signed_perms"),
            ("mode", "mode"),
            ("workers", "workers"),
            ("max_order", "max_order"),
            ("max_level", "max_level"),
            ("matrix_path", "matrix"),
            ("graphs_path", "graphs"),
            ("certificates_path", "path"),
            ("verify", "verify"),
            ("audit", "audit"),
            ("union", "union"),
        ):
            value = getattr(params, attribute, None)
            if value is not None:
                values[name] = value
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "n_values": list(self.n_values),
            "p": format_fraction(self.p),
            "level": self.level,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "quotient": self.quotient,
            "mode": self.mode.value,
        }


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    graph6: str | None = None
    controllable: bool | None = None
    integral: bool | None = None
    mate_found: bool | None = None
    generalized_found: bool | None = None
    certificates: Tuple[Dict[str, Any], ...] = ()
    divisibility_failures: int = 0
    reverify_failures: int = 0
    oracle_agrees: bool | None = None
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "trial_index": self.trial_index,
            "graph6": self.graph6,
            "controllable": self.controllable,
            "integral": self.integral,
            "mate_found": self.mate_found,
            "generalized_found": self.generalized_found,
            "certificates": len(self.certificates),
            "seconds": round(self.seconds, 6),
        }
        if self.oracle_agrees is not None:
            data["oracle_agrees"] = self.oracle_agrees
        return {k: v for k, v in data.items() if v is not None}


@dataclass
class ExperimentResult:
    kind: ExperimentKind
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    failure: str | None = None

    def render(
        self, config: ExperimentConfig, generated_at: str | None = None
    ) -> str:
        if generated_at is None:
            now = datetime.now(timezone.utc)
            generated_at = now.isoformat(timespec="seconds")
        if config.fmt == "csv":
            return render_csv(self.header, self.rows, generated_at)
        document = {
            "kind": self.kind.value,
            "generated_at": generated_at,
            "generator": GENERATOR_NAME,
            "config": config.to_dict(),
            "header": list(self.header),
            "rows": [dict(zip(self.header, row)) for row in self.rows],
        }
        document.update(self.extra)
        return render_json(document)


def fraction_text(k: int, t: int) -> str:
    return format_fraction(Fraction(k, t))


def wilson_lower_bound(
    successes: int, trials: int, confidence: Fraction = CONFIDENCE
) -> mpf:
    """One-sided Wilson score lower bound for a binomial proportion."""
    if trials < 1:
        raise PreconditionError("the Wilson bound needs at least one trial")
    level = mpf(confidence.numerator) / confidence.denominator
    z = mp.sqrt(2) * mp.erfinv(2 * level - 1)
    observed = mpf(successes) / trials
    z2 = z * z
    centre = observed + z2 / (2 * trials)
    variance = observed * (1 - observed) / trials + z2 / (4 * trials * trials)
    spread = z * mp.sqrt(variance)
    return max(mpf(0), (centre - spread) / (1 + z2 / trials))


def _decimal(x: mpf) -> str:
    return mp.nstr(x, 12)


async def trial_worker(
    worker_id: int,
    queue: asyncio.Queue,
    run_trial: Callable[[int], TrialRecord],
    results: Dict[int, TrialRecord],
    logger: logging.Logger,
) -> None:
    while True:
        index = await queue.get()
        if index is None:
            queue.task_done()
            break
        try:
            started = time.perf_counter()
            record = await asyncio.to_thread(run_trial, index)
            results[index] = replace(record, seconds=time.perf_counter() - started)
            logger.debug(f"[trial-{index}] done by worker-{worker_id}")
        finally:
            queue.task_done()


async def run_trials(
    trials: int,
    run_trial: Callable[[int], TrialRecord],
    workers: int,
    logger: logging.Logger,
) -> List[TrialRecord]:
    """Run ``run_trial`` on ``0 .. trials-1``; records come back in index order."""
    queue: asyncio.Queue = asyncio.Queue()
    for index in range(trials):
        queue.put_nowait(index)
    for _ in range(workers):
        queue.put_nowait(None)
    results: Dict[int, TrialRecord] = {}
    tasks = [
        asyncio.create_task(trial_worker(k, queue, run_trial, results, logger))
        for k in range(workers)
    ]
    await asyncio.gather(*tasks)
    return [results[k] for k in sorted(results)]


async def run_controllability_sweep(
    config: ExperimentConfig, logger: logging.Logger
) -> ExperimentResult:
    result = ExperimentResult(
        config.kind, ("n", "p", "trials", "controllable_count", "frequency")
    )
    timing = {}
    for n in config.n_values:
        sampler = GnpSampler(n, config.p, config.master_seed)

        def trial(index: int, sampler=sampler) -> TrialRecord:
            G = sampler.sample(index)
            return TrialRecord(index, controllable=is_controllable(G))

        records = await run_trials(config.trials, trial, config.workers, logger)
        count = sum(1 for r in records if r.controllable)
        result.rows.append(
            (
                n,
                format_fraction(config.p),
                config.trials,
                count,
                fraction_text(count, config.trials),
            )
        )
        timing[str(n)] = round(sum(r.seconds for r in records), 6)
        logger.info(f"[sweep] n={n}: {count}/{config.trials} controllable")
    result.extra["seconds"] = timing
    return result


def default_lemma_matrix(n: int) -> RationalOrthogonalMatrix:
    """``diag((1/5)[[3, -4], [4, 3]], I_{n-2})``."""
    if n < 2:
        raise PreconditionError("the default lemma matrix needs n >= 2")
    rotation = RationalMatrix.from_rows(DEFAULT_ROTATION)
    return RationalOrthogonalMatrix(Q=block_diagonal(rotation, n), level=5)


async def run_lemma_mc(
    config: ExperimentConfig,
    logger: logging.Logger,
    Q: RationalOrthogonalMatrix | None = None,
) -> ExperimentResult:
    """Frequency of integral ``Q^T A Q`` against the selected-index bound."""
    if Q is None and config.matrix_path:
        Q = rational_orthogonal(read_matrix_file(config.matrix_path))
    Q = Q or default_lemma_matrix(config.n_values[0])
    s = block_size(Q)
    if s == 0:
        raise PreconditionError("a signed permutation has no fractional block to bound")
    bound = lemma_bound(Q, config.p)
    sampler = GnpSampler(Q.n, config.p, config.master_seed)

    def trial(index: int) -> TrialRecord:
        A = adjacency(sampler.sample(index))
        return TrialRecord(index, integral=conjugates_integrally(Q, A))

    logger.info(
        f"[start] lemma-mc n={Q.n} s={s} level={Q.level} trials={config.trials}"
    )
    records = await run_trials(config.trials, trial, config.workers, logger)
    hits = sum(1 for r in records if r.integral)
    lower = wilson_lower_bound(hits, config.trials)
    limit = mpf(bound.selected_bound.numerator) / bound.selected_bound.denominator
    passed = lower <= limit
    observed = mpf(hits) / config.trials
    result = ExperimentResult(
        config.kind,
        (
            "n",
            "s",
            "level",
            "p",
            "trials",
            "integral_count",
            "frequency",
            "selected_exponent",
            "selected_bound",
            "closed_form_exponent",
            "wilson_lower",
            "wilson_margin",
            "passed",
        ),
    )
    result.rows.append(
        (
            Q.n,
            s,
            Q.level,
            format_fraction(config.p),
            config.trials,
            hits,
            fraction_text(hits, config.trials),
            bound.selected_exponent,
            format_fraction(bound.selected_bound),
            format_fraction(bound.closed_form_exponent),
            _decimal(lower),
            _decimal(observed - lower),
            passed,
        )
    )
    result.extra["seconds"] = round(sum(r.seconds for r in records), 6)
    result.extra["vacuous"] = bound.vacuous
    if not passed:
        result.failure = "observed frequency significantly exceeds the selected bound"
    return result


async def run_mate_scan(
    config: ExperimentConfig, logger: logging.Logger
) -> ExperimentResult:
    """Search each sampled (or given) graph for mates at level ``l' | level``."""
    if config.graphs_path:
        given: List[Graph] = read_graph6_file(config.graphs_path)
        if not given:
            raise PreconditionError(f"{config.graphs_path} holds no graphs")
        orders = sorted({G.n for G in given})
        if len(orders) > 1:
            raise PreconditionError(
                f"{config.graphs_path} mixes graph orders {orders}"
            )
        n, trials = orders[0], len(given)
    else:
        given, n, trials = [], config.n_values[0], config.trials
    check_guard("order", n, config.max_order)
    sampler = GnpSampler(n, config.p, config.master_seed)
    guards = dict(max_order=config.max_order, max_level=config.max_level)

    def trial(index: int) -> TrialRecord:
        G = given[index] if given else sampler.sample(index)
        kwargs = dict(quotient=config.quotient, **guards)
        plain = find_mates(G, config.level, False, **kwargs)
        generalized = find_mates(G, config.level, True, **kwargs)
        controllable = is_controllable(G)
        divisibility = sum(
            1 for c in generalized if controllable and not verify_level_divisibility(c)
        )
        certificates = plain + [c for c in generalized if c not in plain]
        failures = sum(1 for c in certificates if reverify(c))
        agrees = None
        if config.verify:
            oracle = brute_force_mates(G, config.level, **guards)
            agrees = mates_agree(oracle, plain)
        return TrialRecord(
            index,
            graph6=to_graph6(G),
            controllable=controllable,
            mate_found=bool(plain),
            generalized_found=bool(generalized),
            certificates=tuple(certificate_to_dict(c) for c in certificates),
            divisibility_failures=divisibility,
            reverify_failures=failures,
            oracle_agrees=agrees,
        )

    logger.info(f"[start] mate-scan n={n} level={config.level} trials={trials}")
    records = await run_trials(trials, trial, config.workers, logger)
    mates = sum(1 for r in records if r.mate_found)
    generalized = sum(1 for r in records if r.generalized_found)
    uncontrollable = sum(1 for r in records if not r.controllable)
    divisibility = sum(r.divisibility_failures for r in records)
    failures = sum(r.reverify_failures for r in records)
    result = ExperimentResult(
        config.kind,
        (
            "n",
            "level",
            "p",
            "trials",
            "mate_count",
            "mate_frequency",
            "generalized_count",
            "generalized_frequency",
            "non_controllable_count",
            "non_controllable_frequency",
            "across_sum",
            "certificates",
            "divisibility_violations",
            "reverify_failures",
        ),
    )
    result.rows.append(
        (
            n,
            config.level,
            format_fraction(config.p),
            trials,
            mates,
            fraction_text(mates, trials),
            generalized,
            fraction_text(generalized, trials),
            uncontrollable,
            fraction_text(uncontrollable, trials),
            fraction_text(uncontrollable + generalized, trials),
            sum(len(r.certificates) for r in records),
            divisibility,
            failures,
        )
    )
    result.extra["certificates"] = [c for r in records for c in r.certificates]
    result.extra["trials"] = [r.to_dict() for r in records]
    if divisibility or failures:
        result.failure = (
            f"{divisibility} divisibility violations, "
            f"{failures} certificates failed reverification"
        )
    elif config.verify and not all(r.oracle_agrees for r in records):
        result.failure = "quotiented search disagrees with the brute-force oracle"
    return result


def run_census(config: ExperimentConfig, logger: logging.Logger) -> ExperimentResult:
    result = ExperimentResult(
        config.kind, ("n", "G", "H", "char_poly", "generalized")
    )
    counts = {}
    for n in config.n_values:
        pairs = cospectral_census(n, max_order=config.max_order)
        counts[str(n)] = len(pairs)
        for G, H in pairs:
            result.rows.append(
                (
                    n,
                    to_graph6(G),
                    to_graph6(H),
                    str(spectrum_key(G)),
                    is_generalized_cospectral(G, H),
                )
            )
        logger.info(f"[census] n={n}: {len(pairs)} cospectral pairs")
    result.extra["counts"] = counts
    return result


def run_enum_ortho(
    config: ExperimentConfig, logger: logging.Logger
) -> ExperimentResult:
    result = ExperimentResult(
        config.kind,
        (
            "n",
            "level",
            "mode",
            "quotient",
            "count",
            "regular_count",
            "count_bound",
        ),
    )
    can_members = []
    for n in config.n_values:
        count = regular = 0
        by_block: Dict[int, int] = {}
        for Q in enumerate_level(
            n,
            config.level,
            config.mode,
            quotient=config.quotient,
            max_order=config.max_order,
            max_level=config.max_level,
        ):
            count += 1
            regular += is_regular(Q)
            s = len(fractional_index_sets(Q).fri)
            if not config.quotient and is_in_can(Q, s):
                by_block[s] = by_block.get(s, 0) + 1
        can_members.extend(_can_rows(n, config.level, by_block))
        result.rows.append(
            (
                n,
                config.level,
                config.mode.value,
                config.quotient,
                count,
                regular,
                count_bound(n, config.level),
            )
        )
        logger.info(f"[enum-ortho] n={n} level={config.level}: {count} matrices")
    if can_members:
        result.extra["can_counts"] = can_members
        over = [row for row in can_members if not row["within_bound"]]
        if over:
            result.failure = f"{len(over)} block sizes exceed the CAN count bound"
    if config.audit:
        summary = audit_enumeration(
            config.n_values,
            range(2, config.level + 1),
            seed=config.master_seed,
            quotient=config.quotient,
            max_order=config.max_order,
            max_level=config.max_level,
            logger=logger,
        )
        result.extra["audit"] = summary.to_dict()
        if summary.checked != summary.passed:
            failed = summary.checked - summary.passed
            result.failure = f"{failed} matrices failed the audit"
    return result


def _can_rows(n: int, ell: int, by_block: Dict[int, int]) -> List[Dict[str, Any]]:
    rows = []
    for s in sorted(by_block):
        bound = can_count_bound(s, ell)
        rows.append(
            {
                "n": n,
                "s": s,
                "count": by_block[s],
                "bound": bound,
                "within_bound": by_block[s] <= bound,
            }
        )
    return rows


def count_bound_text(n: int, ell: int) -> str:
    """Exact decimal ``count_bound``, or the exact power once it is too long."""
    if ell * ell * n * (2 * n).bit_length() <= COUNT_BOUND_MAX_BITS:
        return str(count_bound(n, ell))
    return f"{2 * n}^{ell * ell * n}"


def run_bounds(config: ExperimentConfig, logger: logging.Logger) -> ExperimentResult:
    """Directed-rounded epsilon_n, the series bound and n* over the order range."""
    result = ExperimentResult(
        config.kind,
        (
            "n",
            "level",
            "p_hat",
            "epsilon_n",
            "series_bound",
            "vacuous_flag",
            "count_bound",
            "count_bound_bits",
            "n_star",
        ),
    )
    threshold = n_star(config.level, config.p)
    unions = []
    for n in config.n_values:
        report = epsilon_series(n, config.level, config.p, with_threshold=False)
        result.rows.append(
            (
                n,
                config.level,
                format_fraction(report.p_hat),
                str(report.epsilon_n),
                "" if report.series_bound is None else str(report.series_bound),
                report.vacuous,
                count_bound_text(n, config.level),
                count_bound(n, config.level).bit_length(),
                "" if threshold is None else threshold,
            )
        )
        if config.union:
            bound = union_bound(n, config.level, config.p)
            unions.append(
                {
                    "n": n,
                    "can_sum": str(bound.can_sum),
                    "epsilon_sum": str(bound.epsilon_sum),
                    "vacuous_terms": list(bound.vacuous_terms),
                }
            )
    p = format_fraction(config.p)
    logger.info(f"[bounds] level={config.level} p={p}: n*={threshold}")
    if unions:
        result.extra["union_bounds"] = unions
    return result


def run_verify_certs(
    config: ExperimentConfig, logger: logging.Logger
) -> ExperimentResult:
    """Re-check every certificate of a JSON document from its serialized form."""
    if not config.certificates_path:
        raise PreconditionError("verify-certs needs a certificate file")
    document = load_json(config.certificates_path)
    entries = document.get("certificates", [])
    result = ExperimentResult(
        config.kind, ("index", "G", "H", "level", "generalized", "failures")
    )
    failed = 0
    for index, entry in enumerate(entries):
        cert = certificate_from_dict(entry)
        problems = reverify(cert)
        failed += bool(problems)
        result.rows.append(
            (
                index,
                to_graph6(cert.G),
                to_graph6(cert.H),
                cert.level,
                cert.generalized,
                ";".join(problems),
            )
        )
    logger.info(f"[verify] {len(entries) - failed}/{len(entries)} certificates valid")
    if failed:
        result.failure = f"{failed} of {len(entries)} certificates failed"
    return result


_SYNC_RUNNERS = {
    ExperimentKind.CENSUS: run_census,
    ExperimentKind.ENUM_ORTHO: run_enum_ortho,
    ExperimentKind.BOUNDS: run_bounds,
    ExperimentKind.VERIFY_CERTS: run_verify_certs,
}
_ASYNC_RUNNERS = {
    ExperimentKind.CONTROLLABILITY_SWEEP: run_controllability_sweep,
    ExperimentKind.LEMMA_MC: run_lemma_mc,
    ExperimentKind.MATE_SCAN: run_mate_scan,
}


async def run_experiment(
    config: ExperimentConfig, logger: logging.Logger
) -> ExperimentResult:
    if config.kind in _ASYNC_RUNNERS:
        return await _ASYNC_RUNNERS[config.kind](config, logger)
    return await asyncio.to_thread(_SYNC_RUNNERS[config.kind], config, logger)

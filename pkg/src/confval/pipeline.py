"""From raw completions to a final verdict: filter, retry, vote, explain.

Answers are grouped by (hasError, sorted unique flagged parameters) and the
most frequent group wins; reasons never participate in the vote. Ties prefer
the answer flagging fewer parameters (fewer false alarms), then the
lexicographically smallest parameter list, so the verdict is a pure function
of the response multiset.

Rejected or unparseable completions are discarded and re-queried in rounds:
round k re-issues one query for every slot that failed round k-1, up to the
retry bound. Pooled voting makes the verdict independent of which thread
served which slot, so parallel backends stay reproducible.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field, replace

from .backend import Backend, query_batch
from .config_model import ConfigDiff, ConfigFile, diff_to_snippet
from .errors import BackendError, ResponseFormatError, ValidationFailedError
from .prompting import (
    DEFAULT_COMBINATION,
    DEFAULT_QUESTION_TEMPLATE,
    SelectionStrategy,
    ShotCombination,
    ShotDatabase,
    TokenEstimator,
    build_prompt,
    estimate_tokens,
    fit_to_budget,
    select_shots,
)
from .responses import ValidationResponse, parse_response, validate_response
from .textsim import dominant_representative

DEFAULT_NUM_QUERIES = 10
DEFAULT_RETRY_BOUND = 3


@dataclass(frozen=True)
class Verdict:
    """The voted aggregate over accepted responses."""

    canonical_key: tuple[bool, tuple[str, ...]]
    tally: int
    total_votes: int
    reasons: tuple[str, ...]
    all_responses: tuple[ValidationResponse, ...]
    discarded_count: int = 0
    target_key: str = ""

    def __post_init__(self):
        if self.tally > self.total_votes:
            raise ValueError("tally cannot exceed total votes")
        if self.hasError != bool(self.reasons):
            raise ValueError("reasons must be non-empty exactly when hasError")

    @property
    def hasError(self) -> bool:
        return self.canonical_key[0]

    @property
    def err_parameters(self) -> tuple[str, ...]:
        return self.canonical_key[1]

    def to_report(self, target: str) -> dict:
        return {
            "target": target,
            "hasError": self.hasError,
            "errParameters": list(self.err_parameters),
            "reasons": list(self.reasons),
            "tally": self.tally,
            "total_votes": self.total_votes,
            "discarded_count": self.discarded_count,
        }


def vote(responses: list[ValidationResponse]) -> Verdict:
    """Frequency voting over canonical keys, order independent."""
    if not responses:
        raise ValueError("cannot vote over zero responses")
    counts = Counter(r.canonical_key() for r in responses)
    best = max(counts.values())
    tied = [key for key, count in counts.items() if count == best]
    winner = min(tied, key=lambda key: (len(key[1]), key[1]))
    reasons = tuple(_reasons_for_key(responses, winner)) if winner[0] else ()
    return Verdict(
        canonical_key=winner,
        tally=best,
        total_votes=len(responses),
        reasons=reasons,
        all_responses=tuple(responses),
    )


def _reasons_for_key(
    responses: list[ValidationResponse], key: tuple[bool, tuple[str, ...]]
) -> list[str]:
    winners = [r for r in responses if r.canonical_key() == key]
    selected = []
    for parameter in key[1]:
        pool = []
        for r in winners:
            for name, reason in zip(r.errParameter, r.reason):
                if name == parameter:
                    pool.append(reason)
        if pool:
            selected.append(dominant_representative(pool))
    return selected


def select_reasons(responses: list[ValidationResponse], verdict: Verdict) -> list[str]:
    """One representative reason per flagged parameter.

    For each parameter, the reasons paired with it across winning-key
    responses are clustered by TF-IDF cosine; the dominant cluster's medoid
    speaks for the parameter. Hallucinated stragglers land in small clusters
    and are never chosen.
    """
    if not verdict.hasError:
        return []
    return _reasons_for_key(responses, verdict.canonical_key)


@dataclass(frozen=True)
class PipelineSettings:
    """Knobs for one validation run; defaults follow the framework defaults."""

    num_queries: int = DEFAULT_NUM_QUERIES
    combination: ShotCombination = DEFAULT_COMBINATION
    strategy: SelectionStrategy = SelectionStrategy.RANDOM
    retry_bound: int = DEFAULT_RETRY_BOUND
    seed: int = 0
    question_template: str = DEFAULT_QUESTION_TEMPLATE
    estimator: TokenEstimator = field(default=estimate_tokens)

    def __post_init__(self):
        if self.num_queries < 1:
            raise ValueError("num_queries must be at least 1")
        if self.retry_bound < 0:
            raise ValueError("retry_bound must be non-negative")


def _target_rng(seed: int, content_key: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{content_key}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def validate_file(
    target: ConfigFile | ConfigDiff,
    backend: Backend,
    shot_db: ShotDatabase,
    settings: PipelineSettings = PipelineSettings(),
    target_subcategory=None,
) -> Verdict:
    """Full pipeline: shots, prompt, budget, queries, filter, vote.

    Shot selection is seeded per target content, so results do not depend on
    evaluation order. Raises TokenBudgetExceededError when the target cannot
    fit and ValidationFailedError when no slot ever yields an accepted
    response.
    """
    if isinstance(target, ConfigDiff):
        target = diff_to_snippet(target)
    rng = _target_rng(settings.seed, target.content_key())
    shots = select_shots(
        shot_db,
        target.project,
        settings.combination,
        settings.strategy,
        rng,
        target=target,
        target_subcategory=target_subcategory,
    )
    prompt = build_prompt(target, shots, settings.question_template, settings.estimator)
    prompt = fit_to_budget(prompt, backend.config.token_limit, settings.estimator)

    accepted: list[ValidationResponse] = []
    discarded = 0
    backend_failures = 0
    pending = settings.num_queries
    for _round in range(settings.retry_bound + 1):
        if pending == 0:
            break
        results = query_batch(backend, prompt, pending)
        pending = 0
        for result in results:
            if isinstance(result, BackendError):
                backend_failures += 1
                continue
            try:
                parsed = parse_response(result)
            except ResponseFormatError:
                discarded += 1
                pending += 1
                continue
            if validate_response(parsed) is None:
                accepted.append(parsed)
            else:
                discarded += 1
                pending += 1

    if not accepted:
        raise ValidationFailedError(
            f"no accepted response after {settings.num_queries} slots "
            f"({discarded} discarded, {backend_failures} backend failures)"
        )
    verdict = vote(accepted)
    return replace(verdict, discarded_count=discarded, target_key=target.content_key())

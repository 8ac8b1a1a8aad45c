#!/usr/bin/env python3
"""Standalone estimate of parameter-level recall under the noisy mock backend.

This script deliberately does NOT import the confval package. It re-states the
noise model and the voting rule from first principles and estimates, by direct
simulation, the recall the full pipeline should converge to. The resulting
number is frozen into tests/test_acceptance.py; rerun this script if either
the noise model or the voting rule changes.

Noise model (one file with one injected fault among E entries, Q queries,
noise rate P):
  - with probability 1-P a query returns the ground-truth answer
    (hasError=true, flagging exactly the injected parameter);
  - with probability P the query is corrupted: a fair coin then decides
    between an "all valid" answer and an answer flagging one entry chosen
    uniformly from the file (which may coincide with the injected one).

Voting rule:
  - answers are grouped by (hasError, sorted flagged parameters);
  - the most frequent group wins;
  - ties prefer fewer flagged parameters, then the lexicographically
    smallest parameter tuple.

Recall counts a file as a hit iff the winning group flags the injected
parameter.

Usage: python scripts/noise_recall_expectation.py [trials] [seed]
"""

import random
import sys
from collections import Counter

QUERIES = 10
NOISE_RATE = 0.2
ENTRIES_PER_FILE = 8


def vote(keys):
    counts = Counter(keys)
    best = max(counts.values())
    tied = [k for k, c in counts.items() if c == best]
    # fewer flagged parameters first, then lexicographically smallest tuple
    return min(tied, key=lambda k: (len(k[1]), k[1]))


def simulate_file(rng):
    # Entry names only matter for lexicographic tie-breaking; random distinct
    # floats give the same exchangeable total order as real parameter names.
    names = [rng.random() for _ in range(ENTRIES_PER_FILE)]
    injected = rng.choice(names)
    truth_key = (True, (injected,))

    keys = []
    for _ in range(QUERIES):
        if rng.random() < NOISE_RATE:
            if rng.random() < 0.5:
                keys.append((False, ()))
            else:
                keys.append((True, (rng.choice(names),)))
        else:
            keys.append(truth_key)
    return vote(keys) == truth_key


def main(argv):
    trials = int(argv[1]) if len(argv) > 1 else 500_000
    seed = int(argv[2]) if len(argv) > 2 else 12345
    rng = random.Random(seed)
    hits = sum(simulate_file(rng) for _ in range(trials))
    recall = hits / trials
    print(f"trials={trials} seed={seed}")
    print(f"expected parameter-level recall: {recall:.4f}")


if __name__ == "__main__":
    main(sys.argv)

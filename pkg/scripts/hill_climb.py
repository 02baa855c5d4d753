"""Deterministic toy sequence designer for the iterative-evaluation demo.

A population of random peptides is mutated one position at a time; a
mutation is kept only when it strictly raises the sequence's score (here:
its count of alanines). Because members never get worse, the fraction of
members at or above any score threshold can only grow, which makes the
emitted fixture a known-monotone input for trajectory evaluation.

Running this module writes, per round, a sequence file and a property CSV
(score plus a binary hit flag), and one run config whose iterations list
points at them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from seqeval.core import PropertyColumn, PropertyTable, SequenceSet  # noqa: E402
from seqeval.formats import save_properties_csv, save_sequences  # noqa: E402

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"


def score(seq: str) -> int:
    return seq.count("A")


def initial_population(rng: np.random.Generator, size: int, length: int) -> list[str]:
    return ["".join(rng.choice(list(ALPHABET), size=length)) for _ in range(size)]


def mutate(rng: np.random.Generator, seq: str) -> str:
    pos = int(rng.integers(len(seq)))
    repl = ALPHABET[int(rng.integers(len(ALPHABET)))]
    return seq[:pos] + repl + seq[pos + 1 :]


def run_climber(
    seed: int, rounds: int, size: int = 8, length: int = 12, attempts: int = 25
) -> list[list[str]]:
    """Population snapshot after each round, round 1 being the random start.

    Each member gets `attempts` mutation proposals per round and keeps the
    first strictly-improving one, so scores are nondecreasing by
    construction while most rounds still see real movement.
    """
    rng = np.random.default_rng(seed)
    pop = initial_population(rng, size, length)
    snapshots = [list(pop)]
    for _ in range(rounds - 1):
        for i, member in enumerate(pop):
            for _ in range(attempts):
                candidate = mutate(rng, member)
                if score(candidate) > score(member):
                    pop[i] = candidate
                    break
        snapshots.append(list(pop))
    return snapshots


def write_fixture(out_dir: str, seed: int = 7, rounds: int = 4, tau: int = 2) -> str:
    """Write round files plus the iterate config; returns the config path."""
    os.makedirs(out_dir, exist_ok=True)
    snapshots = run_climber(seed, rounds)
    iterations = []
    for r, pop in enumerate(snapshots, start=1):
        seq_name = f"round{r}.txt"
        prop_name = f"round{r}_props.csv"
        save_sequences(SequenceSet("climber", pop), os.path.join(out_dir, seq_name))
        scores = [float(score(s)) for s in pop]
        hits = [1.0 if v >= tau else 0.0 for v in scores]
        save_properties_csv(
            PropertyTable(
                [PropertyColumn("score", "real", scores), PropertyColumn("hit", "binary", hits)]
            ),
            os.path.join(out_dir, prop_name),
        )
        iterations.append(
            {
                "index": r,
                "groups": {"climber": seq_name},
                "representations": {"props": {"climber": prop_name}},
            }
        )
    config = {
        "config_version": 1,
        "groups": {},
        "representations": {
            "props": {
                "kind": "file",
                "parameters": {"paths": {"climber": "round1_props.csv"}},
            }
        },
        "metrics": [
            {
                "name": "hit-rate",
                "label": "Hit-rate",
                "representation": "props",
                "parameters": {"column": "hit"},
            },
            {
                "name": "identity",
                "label": "Score",
                "representation": "props",
                "parameters": {"column": "score"},
            },
        ],
        "iterations": iterations,
        "seed": 0,
    }
    config_path = os.path.join(out_dir, "iterate_config.json")
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)
        f.write("\n")
    return config_path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="directory for the fixture files")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--rounds", type=int, default=4)
    parser.add_argument("--tau", type=int, default=2, help="score threshold for a hit")
    args = parser.parse_args()
    path = write_fixture(args.out, seed=args.seed, rounds=args.rounds, tau=args.tau)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Metrics computed directly on sequence strings.

Novelty and uniqueness are exact-match set statistics; diversity averages
normalized edit distance over ordered pairs; n-gram similarity compares
substring profiles against a reference corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SequenceSet


def levenshtein(a: str, b: str) -> int:
    """Edit distance between two strings.

    Standard dynamic program over prefix pairs, keeping only the previous
    row; the shorter string indexes the columns so memory is O(min(|a|,|b|)).
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    """Edit distance scaled by the longer length; two empty strings give 0."""
    if not a and not b:
        return 0.0
    return levenshtein(a, b) / max(len(a), len(b))


def novelty(generated: SequenceSet, reference: SequenceSet) -> float:
    """Fraction of generated sequences absent from the reference set (exact match)."""
    if len(generated) == 0:
        raise ValueError("novelty needs at least one generated sequence")
    known = set(reference.sequences)
    return sum(s not in known for s in generated) / len(generated)


def uniqueness(generated: SequenceSet) -> float:
    """Number of distinct strings over total count."""
    if len(generated) == 0:
        raise ValueError("uniqueness needs at least one sequence")
    return len(set(generated.sequences)) / len(generated)


@dataclass
class DiversityParams:
    """How pairwise distances are aggregated.

    k: "exact" averages over all n(n-1) ordered pairs; an integer instead
        samples, for each sequence, k distinct partners uniformly without
        replacement from the other n-1.
    seed: RNG seed for the sampled path.
    """

    k: int | str = "exact"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k != "exact":
            k = int(self.k)
            if k < 1:
                raise ValueError(f"k must be 'exact' or a positive integer, got {k}")
            self.k = k
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def diversity(generated: SequenceSet, params: DiversityParams | None = None) -> float:
    """Mean normalized edit distance over pairs of distinct indices.

    Exact mode averages d(x_i, x_j)/max(|x_i|,|x_j|) over all i != j. With
    integer k each index i contributes the mean over k sampled partners,
    and the outer average runs over i; each partner draw is seeded per
    index so results are independent of evaluation order.
    """
    params = params or DiversityParams()
    seqs = generated.sequences
    n = len(seqs)
    if n < 2:
        raise ValueError(f"diversity needs at least 2 sequences, got {n}")
    if params.k == "exact":
        total = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    total += normalized_levenshtein(seqs[i], seqs[j])
        return total / (n * (n - 1))
    k = params.k
    if k > n - 1:
        raise ValueError(f"k={k} exceeds the {n - 1} available partners per sequence")
    total = 0.0
    for i in range(n):
        rng = np.random.default_rng([params.seed, i])
        others = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        picks = rng.choice(others, size=k, replace=False)
        total += sum(normalized_levenshtein(seqs[i], seqs[j]) for j in picks) / k
    return total / n


@dataclass
class NgramParams:
    """N-gram profile comparison settings.

    N: substring length.
    direction: whether a high overlap is desirable for this run; carried
        into the report header, the value itself is always the similarity.
    """

    N: int = 3
    direction: str = "maximize"

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"n-gram length must be positive, got {self.N}")
        if self.direction not in ("maximize", "minimize"):
            raise ValueError(f"direction must be 'maximize' or 'minimize', got '{self.direction}'")


def _ngrams(s: str, n: int) -> set[str]:
    # sequences shorter than n contribute an empty profile
    return {s[i : i + n] for i in range(len(s) - n + 1)}


def ngram_jaccard(generated: SequenceSet, reference: SequenceSet, params: NgramParams | None = None) -> float:
    """Mean Jaccard index between each generated profile and the pooled reference profile.

    The reference profile is the union of N-grams over all reference
    sequences; intersections and unions are over sets, not multisets. A
    generated sequence and reference profile that are both empty make 0/0;
    that is reported as an error rather than silently 0.
    """
    params = params or NgramParams()
    if len(generated) == 0 or len(reference) == 0:
        raise ValueError("n-gram comparison needs non-empty generated and reference sets")
    ref_profile: set[str] = set()
    for s in reference:
        ref_profile |= _ngrams(s, params.N)
    total = 0.0
    for i, s in enumerate(generated):
        profile = _ngrams(s, params.N)
        union = len(profile | ref_profile)
        if union == 0:
            raise ValueError(
                f"sequence {i} and the reference profile are both empty at N={params.N}"
            )
        total += len(profile & ref_profile) / union
    return total / len(generated)

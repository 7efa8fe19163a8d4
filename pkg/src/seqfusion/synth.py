"""Synthetic two-modality cohorts with planted, modality-specific signal.

Every sample belongs to one signal group. The group decides which modality
carries label information: the first ``n_informative`` columns of each
designated modality are shifted by ``+effect/2`` for positives and
``-effect/2`` for negatives. All other columns are standard normal noise.
The last ``n_binary_clinical`` clinical columns are thresholded at zero to
mimic yes/no clinical variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import Dataset, FeatureView, write_dataset  # noqa: F401  (re-export)
from .exceptions import InvalidProfile

GROUPS = ("both", "clinical_only", "image_only", "none")
_CARRIES = {
    "both": (True, True),
    "clinical_only": (True, False),
    "image_only": (False, True),
    "none": (False, False),
}

COMPLEMENTARY = {"clinical_only": 0.3, "image_only": 0.3, "both": 0.2, "none": 0.2}


@dataclass(frozen=True)
class SignalProfile:
    proportions: Mapping[str, float] = field(default_factory=lambda: dict(COMPLEMENTARY))
    effect_size: float = 1.5
    d_clinical: int = 7
    d_image: int = 256
    n: int = 600
    positive_fraction: float = 0.275
    seed: int = 0
    n_informative: int = 3
    n_binary_clinical: int = 3

    def __post_init__(self):
        props = {g: float(self.proportions.get(g, 0.0)) for g in GROUPS}
        unknown = set(self.proportions) - set(GROUPS)
        if unknown:
            raise InvalidProfile(f"unknown signal groups {sorted(unknown)}")
        if any(v < 0 for v in props.values()) or abs(sum(props.values()) - 1.0) > 1e-9:
            raise InvalidProfile(f"group proportions must be nonnegative and sum to 1: {props}")
        if self.d_clinical < 1 or self.d_image < 1 or self.n < 2:
            raise InvalidProfile("dimensions must be >= 1 and n >= 2")
        if not 0.0 < self.positive_fraction < 1.0:
            raise InvalidProfile("positive_fraction must lie in (0, 1)")
        if self.n_informative < 0 or self.n_binary_clinical < 0:
            raise InvalidProfile("column counts must be nonnegative")
        object.__setattr__(self, "proportions", props)

    def to_dict(self) -> dict:
        return {
            "proportions": dict(self.proportions), "effect_size": self.effect_size,
            "d_clinical": self.d_clinical, "d_image": self.d_image, "n": self.n,
            "positive_fraction": self.positive_fraction, "seed": self.seed,
            "n_informative": self.n_informative,
            "n_binary_clinical": self.n_binary_clinical,
        }


def largest_remainder(total: int, fractions) -> list:
    """Integer apportionment of ``total``; ties go to the earlier entry."""
    quotas = [total * f for f in fractions]
    counts = [int(np.floor(q)) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    for i in sorted(range(len(quotas)), key=lambda i: (-remainders[i], i))[: total - sum(counts)]:
        counts[i] += 1
    return counts


def _positive_count(n, fraction):
    # round half up; 600 * 0.275 = 165
    return int(np.floor(n * fraction + 0.5 + 1e-9))


def generate(profile: SignalProfile | None = None, return_groups: bool = False):
    """Draw a cohort; optionally also return each sample's signal-group name."""
    profile = profile or SignalProfile()
    rng = np.random.default_rng(profile.seed)
    n = profile.n
    n_pos = _positive_count(n, profile.positive_fraction)
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_pos] = 1
    labels = rng.permutation(labels)

    group_counts = largest_remainder(n, [profile.proportions[g] for g in GROUPS])
    groups = np.repeat(np.arange(len(GROUPS)), group_counts)
    groups = rng.permutation(groups)

    clin = rng.standard_normal((n, profile.d_clinical))
    img = rng.standard_normal((n, profile.d_image))
    shift = profile.effect_size * (2 * labels - 1) / 2.0
    carries_clin = np.array([_CARRIES[GROUPS[g]][0] for g in groups])
    carries_img = np.array([_CARRIES[GROUPS[g]][1] for g in groups])
    k_clin = min(profile.n_informative, profile.d_clinical)
    k_img = min(profile.n_informative, profile.d_image)
    clin[:, :k_clin] += np.where(carries_clin, shift, 0.0)[:, None]
    img[:, :k_img] += np.where(carries_img, shift, 0.0)[:, None]

    n_bin = min(profile.n_binary_clinical, profile.d_clinical)
    if n_bin:
        clin[:, profile.d_clinical - n_bin:] = (clin[:, profile.d_clinical - n_bin:] > 0).astype(float)

    width = len(str(n - 1))
    ids = tuple(f"s{i:0{width}d}" for i in range(n))
    dataset = Dataset(ids, labels, {
        "clinical": FeatureView("clinical", tuple(f"clin_f{j}" for j in range(profile.d_clinical)), clin),
        "image": FeatureView("image", tuple(f"img_f{j}" for j in range(profile.d_image)), img),
    })
    if return_groups:
        return dataset, np.array([GROUPS[g] for g in groups])
    return dataset

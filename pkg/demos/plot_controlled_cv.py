"""
Gated cross-validation splits
=============================

Stratified train/validation/test splits are kept only when every clinical
feature in every part passes a Welch t-test against the whole cohort.
"""

import numpy as np

from seqfusion.cv import CVConfig, SplitTriple, controlled_cv, gate_split
from seqfusion.synth import SignalProfile, generate

cohort = generate(SignalProfile(seed=7))
config = CVConfig(seed=7)

##############################################################################
# Ten accepted splits; the smallest p-value over all parts and features
# stays above the 0.05 threshold.
splits = controlled_cv(cohort, config)
for i, split in enumerate(splits):
    _, results = gate_split(cohort, split, config)
    worst = min(results.items(), key=lambda kv: kv[1].p_value)
    print(f"repeat {i}: sizes={[len(p) for p in split.parts().values()]}, "
          f"lowest p={worst[1].p_value:.3f} ({'/'.join(worst[0])})")

##############################################################################
# A split that sends the 60% lowest values of the first clinical feature to
# training is rejected.
order = np.argsort(cohort.view("clinical").matrix[:, 0], kind="stable")
sorted_split = SplitTriple(np.sort(order[:360]), np.sort(order[360:480]), np.sort(order[480:]))
accepted, results = gate_split(cohort, sorted_split, config)
print("sorted split accepted:", accepted)
print("train/clin_f0 p-value:", results[("train", "clin_f0")].p_value)

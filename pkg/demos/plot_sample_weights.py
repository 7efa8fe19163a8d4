"""
Sample weights from a prior modality
====================================

Class weights and prior weights share the inverse-frequency rule. This
script evaluates both on a cohort shaped like a 600-patient study with 165
positives, then mixes them with the two strategies.
"""

import numpy as np

from seqfusion.weighting import (PriorPartition, Strategy, WeightingConfig,
                                 compose_weights, set_weights)

##############################################################################
# Class weights: the minority (positive) class is upweighted.
class_w = set_weights((165, 435))
print("class weights (positive, negative):", np.round(class_w.weights, 4))

##############################################################################
# Suppose the clinical model gets 450 patients right and 150 wrong.
prior_w = set_weights((450, 150))
print("prior weights (well, mis-classified):", np.round(prior_w.weights, 4))

##############################################################################
# Four archetypal patients: positive/negative x well/mis-classified.
labels = np.array([1, 1, 0, 0])
partition = PriorPartition(s1=np.array([0, 2]), s2=np.array([1, 3]), n=4)

for strategy in Strategy:
    w = compose_weights(labels, partition, class_w, prior_w,
                        WeightingConfig(alpha=1.0, beta=1.0, strategy=strategy))
    print(f"{strategy.value:>10}:", np.round(w, 4))

##############################################################################
# With beta = 0 both strategies reduce to plain class weighting.
w = compose_weights(labels, partition, class_w, prior_w, WeightingConfig(1.0, 0.0))
print("beta = 0:  ", np.round(w, 4))

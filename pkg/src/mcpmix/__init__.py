"""Mask-consistent paired mixing with learnable real-anchored annealing.

A desk-scale, framework-free implementation: procedural paired data, the
mixing operators, a frozen feature space with MMD, the gated objective with
closed-form gate gradients, a small hand-differentiated segmenter, boundary
metrics and the training/evaluation studies built on them.
"""

__version__ = "0.1.0"

"""Wildfire hotspot prediction and fire detection on gridded geodata.

Modules: ``geodata`` (layers, indices, masking, labeled data), ``learners``
(CART, random forest, logistic baseline), ``evaluation`` (splits, metrics,
CV, tuning sweep), ``pipeline`` (grid classification and no-spray filter),
``dispatch`` (drone coverage math and fleet simulation) and ``cli``.
"""

__version__ = "0.1.0"

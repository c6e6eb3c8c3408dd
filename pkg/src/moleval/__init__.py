"""Evaluation toolkit for molecule-text models.

Subpackages cover molecular graph handling (``molgraph``), a robust
SELFIES codec (``selfies``), structural fingerprints (``fingerprint``),
text and prediction metrics (``textmetrics``, ``predmetrics``), modality
transition matrices (``transition``), token mapping analysis
(``interpret``), and the dataset/evaluation harness with its CLI
(``harness``).
"""

__version__ = "0.1.0"

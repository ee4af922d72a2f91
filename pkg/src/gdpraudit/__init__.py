"""GDPR Article 13 coverage auditing and readability scoring for privacy policies."""

from gdpraudit.labels import GDPR_LABELS, GdprLabel

__version__ = "0.1.0"

__all__ = ["GDPR_LABELS", "GdprLabel", "__version__"]

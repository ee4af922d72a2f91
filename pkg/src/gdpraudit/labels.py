"""The Article 13 label taxonomy.

Declaration order is the canonical order used everywhere: it fixes report
row order, model label order and the argmax tie-break (CPI first, Other last).
"""

from __future__ import annotations

import enum

from gdpraudit.errors import DataError


class GdprLabel(str, enum.Enum):
    CPI = "CPI"
    DRP = "DRP"
    DPP = "DPP"
    CD = "CD"
    RA = "RA"
    RRE = "RRE"
    RRP = "RRP"
    ROP = "ROP"
    RDP = "RDP"
    RLC = "RLC"
    OTHER = "Other"

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]

    @property
    def is_rule(self) -> bool:
        return self is not GdprLabel.OTHER

    @classmethod
    def parse(cls, value: str) -> "GdprLabel":
        """Parse a label code, ignoring surrounding whitespace and case."""
        if isinstance(value, GdprLabel):
            return value
        if not isinstance(value, str):
            raise DataError(f"label must be a string, got {value!r}")
        key = value.strip().lower()
        try:
            return _BY_KEY[key]
        except KeyError:
            raise DataError(f"unknown label {value!r}") from None

    def __str__(self) -> str:
        return self.value


_DESCRIPTIONS = {
    GdprLabel.CPI: "Collect Personal Information",
    GdprLabel.DRP: "Data Retention Period",
    GdprLabel.DPP: "Data Processing Purposes",
    GdprLabel.CD: "Contact Details",
    GdprLabel.RA: "Right to Access",
    GdprLabel.RRE: "Right to Rectify or Erase",
    GdprLabel.RRP: "Right to Restrict of Processing",
    GdprLabel.ROP: "Right to Object to Processing",
    GdprLabel.RDP: "Right to Data Portability",
    GdprLabel.RLC: "Right to Lodge a Complaint",
    GdprLabel.OTHER: "Other",
}

_BY_KEY = {label.value.lower(): label for label in GdprLabel}

ALL_LABELS: tuple[GdprLabel, ...] = tuple(GdprLabel)
GDPR_LABELS: tuple[GdprLabel, ...] = tuple(lb for lb in GdprLabel if lb.is_rule)
LABEL_INDEX = {label: i for i, label in enumerate(ALL_LABELS)}

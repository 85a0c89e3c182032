# common.py: gedeelde helpers voor het lab (settings, fouten, logging, hashing)
from __future__ import annotations

import hashlib
import json
import logging
import os
from typing import Any, Dict, Optional


# ============================================================
# --- Fouten ---
# ============================================================

class LabError(Exception):
    """Base class for every error the lab raises on purpose."""


class SizeError(LabError, ValueError):
    pass


class ExclusionError(LabError, ValueError):
    """Fermionic statistics with two coincident events."""


class NullProjectionError(LabError, ValueError):
    """The symmetrization annihilated the state (nothing left to normalize)."""


class UnreachableTransitionError(LabError):
    """Every permutation amplitude of a transition vanishes."""


class ScenarioError(LabError, ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class AnalysisError(LabError):
    """A module error raised while running one analysis of a scenario."""

    def __init__(self, analysis: str, cause: Exception | str):
        self.analysis = analysis
        self.cause = cause if isinstance(cause, str) else f"{type(cause).__name__}: {cause}"
        super().__init__(f"{analysis}: {self.cause}")

    def __reduce__(self):
        # joblib workers send the error back pickled
        return type(self), (self.analysis, self.cause)


# ============================================================
# --- Settings ---
# ============================================================

DEFAULT_TOLERANCES: Dict[str, float] = {
    "unitarity": 1e-10,
    "kernels": 1e-12,
    "exclusion": 1e-12,
    "bunching": 1e-10,
    "isolation": 1e-12,
    "composition": 1e-10,
    "falsification": 1e-3,
    "normalization": 1e-10,
    "route": 1e-10,
    "reidentification": 1e-6,
    "dirac": 1e-10,
    "sector": 1e-10,
    "sum_rule": 1e-12,
}

DEFAULT_EPSILON = 1e-6


def setting(name: str, default: str = "") -> str:
    # werkt in de Streamlit-app + lokaal / CLI
    v = None
    try:
        import streamlit as st  # lazy
        v = st.secrets.get(name, None)
    except Exception:
        v = None
    if v is None or str(v).strip() == "":
        v = os.environ.get(name, "") or default
    return str(v).strip()


def n_jobs() -> int:
    try:
        return max(1, int(setting("LAB_N_JOBS", "1")))
    except ValueError:
        return 1


def configure_logging(level: Optional[str] = None) -> None:
    level = (level or setting("LAB_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# ============================================================
# --- Hashing / formatting ---
# ============================================================

def stable_hash(obj: Any) -> str:
    """Short sha1 over the canonical JSON form of `obj` (sorted keys)."""
    base = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode("utf-8")
    return hashlib.sha1(base).hexdigest()[:16]


def fmt_float(x: float) -> str:
    return f"{x:.3e}" if x and (abs(x) < 1e-3 or abs(x) >= 1e4) else f"{x:.6f}"

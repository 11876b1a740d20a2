"""Pinned constants shared across modules.

These are frozen by the acceptance suite; change only with a ledger entry.
"""

from __future__ import annotations

# --- bits -------------------------------------------------------------------
# Segmented-concat prefix budget: prefix_len <= C1 * min(m, d*(ceil(log2 m)+1)) + C2
# for nonempty parts (see docs/formats.md for the empty-part variant).
PREFIX_C1 = 2
PREFIX_C2 = 16

# --- separator --------------------------------------------------------------
# |S| <= C_SEP * sqrt(n) for connected planar inputs (classical 2*sqrt(2) with margin).
C_SEP = 4.0
# Max side fraction of a separation.
SIDE_FRACTION = 2.0 / 3.0

# --- separation levels ------------------------------------------------------
# Slack constant in the center-size envelope f0 (see separation.envelope_center):
# it absorbs the small-n regime where the per-level terms round up.
ENVELOPE_C = 8.0
# Mop-up level profile: degree cap, component cap, cluster cap.
MOPUP_R = 3
MOPUP_COMP_CAP = 2
MOPUP_CLUSTER_CAP = 1

# --- tables -----------------------------------------------------------------
# Hard ceiling on table size caps; beyond this enumeration is refused.
DEFAULT_MAX_CAP = 10
# Per-class bypass threshold: inputs of at most this many nodes are encoded as
# a single table code instead of running the level pipeline.
BYPASS_CAP = {
    "planar": 6,
    "plane-connected": 6,
    "forest-deg5": 6,
    "plane-triangulation": 10,
}

# --- patcher ----------------------------------------------------------------
# |fix| <= C_FIX * max(1, boundary size) for triangulation parts.
C_FIX = 8

# --- codec ------------------------------------------------------------------
MAGIC = 0x504C43  # "PLC"
FORMAT_VERSION = 1
DEFAULT_MAX_GENUS = 2
# Decode-side sanity ceilings (fuzz guards).
MAX_LEVELS = 64
MAX_NODES = 1 << 28

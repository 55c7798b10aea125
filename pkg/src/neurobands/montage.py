"""The 32-channel Geneva-order montage and its lobe groupings."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MontageError

# Channel order of the preprocessed DEAP files (Geneva order).
GENEVA_ORDER: tuple[str, ...] = (
    "Fp1", "AF3", "F3", "F7", "FC5", "FC1", "C3", "T7",
    "CP5", "CP1", "P3", "P7", "PO3", "O1", "Oz", "Pz",
    "Fp2", "AF4", "Fz", "F4", "F8", "FC6", "FC2", "Cz",
    "C4", "T8", "CP6", "CP2", "P4", "P8", "PO4", "O2",
)

LOBE_NAMES: tuple[str, ...] = ("Frontal", "Parietal", "Occipital", "Temporal", "Central")

# Electrode groups per cerebral lobe. FC*/CP* electrodes belong to two
# groups each (frontal+central, parietal+central); the overlap is intentional.
LOBES: dict[str, tuple[str, ...]] = {
    "Frontal": ("Fp1", "Fp2", "AF3", "AF4", "F7", "F8", "F3", "Fz", "F4",
                "FC5", "FC1", "FC2", "FC6"),
    "Parietal": ("CP5", "CP1", "CP2", "CP6", "P7", "P3", "Pz", "P4", "P8"),
    "Occipital": ("PO3", "PO4", "O1", "Oz", "O2"),
    "Temporal": ("T7", "T8"),
    "Central": ("FC5", "FC1", "FC2", "FC6", "C3", "Cz", "C4",
                "CP5", "CP1", "CP2", "CP6"),
}

_CANONICAL = {name.lower(): name for name in GENEVA_ORDER}
_INDEX = {name: i for i, name in enumerate(GENEVA_ORDER)}


@dataclass(frozen=True)
class ElectrodeId:
    """One scalp electrode: canonical name, Geneva-order index, lobe tags."""

    name: str
    index: int
    lobe_tags: frozenset[str]


def canonical_name(name: str) -> str:
    """Resolve a (case-insensitive) electrode name to its canonical spelling.

    Raises:
        MontageError: if the name is not one of the 32 montage electrodes.
    """
    try:
        return _CANONICAL[name.lower()]
    except KeyError:
        raise MontageError(f"unknown electrode name: {name!r}") from None


def channel_index(name: str) -> int:
    """Geneva-order index (0-31) of an electrode, case-insensitive."""
    return _INDEX[canonical_name(name)]


def electrode(name: str) -> ElectrodeId:
    """Full ElectrodeId record for a (case-insensitive) name."""
    canon = canonical_name(name)
    tags = frozenset(lobe for lobe, members in LOBES.items() if canon in members)
    return ElectrodeId(name=canon, index=_INDEX[canon], lobe_tags=tags)


def full_montage() -> tuple[ElectrodeId, ...]:
    """All 32 electrodes in Geneva order."""
    return tuple(electrode(name) for name in GENEVA_ORDER)

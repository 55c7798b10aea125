"""Registry of lobe groupings and the nine published electrode sets."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LobeError, MontageError, SetIdError
from .montage import GENEVA_ORDER, LOBES, canonical_name


@dataclass(frozen=True)
class ElectrodeSet:
    """An ordered, duplicate-free electrode subset with its provenance."""

    id: str
    electrodes: tuple[str, ...]
    provenance: str = ""
    prior_accuracy: float | None = None  # percentage reported by the source

    def __post_init__(self) -> None:
        lowered = [e.lower() for e in self.electrodes]
        if len(set(lowered)) != len(lowered):
            raise MontageError(f"set {self.id} contains duplicate electrodes")

    @property
    def size(self) -> int:
        return len(self.electrodes)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "electrodes": list(self.electrodes),
            "provenance": self.provenance,
            "prior_accuracy": self.prior_accuracy,
        }


# Published electrode rankings, kept verbatim (including the sources'
# Fp1/FP1 spelling differences); prior_accuracy is the figure each
# source reported for this subset.
_LITERATURE: dict[int, ElectrodeSet] = {
    1: ElectrodeSet(
        "set01",
        ("F7", "P8", "O1", "F8", "C4", "T7", "PO3", "Fp1", "Fp2", "O2", "P3", "Fz"),
        "Zhang et al. (2020), mRMR ranking",
        90.0,
    ),
    2: ElectrodeSet(
        "set02",
        ("PO3", "F8", "Fp1", "P3", "Fp2", "F3", "O2", "P8", "Oz", "F7", "T8", "Cz"),
        "Zhang et al. (2020), ReliefF ranking",
        90.0,
    ),
    3: ElectrodeSet(
        "set03",
        ("FP1", "C3", "Cp1", "P3", "Pz"),
        "Goshvarpour et al. (2019), sLORETA",
        98.97,
    ),
    4: ElectrodeSet(
        "set04",
        ("FP1", "AF3", "FP2", "AF4"),
        "Joshi et al. (2020), prefrontal",
        73.37,
    ),
    5: ElectrodeSet(
        "set05",
        ("FC1", "P3", "Pz", "Oz", "CP2", "C4", "F4", "Fz"),
        "Wang et al. (2019), NMI",
        74.41,
    ),
    6: ElectrodeSet(
        "set06",
        ("FP1", "AF3", "F3", "F7", "T7", "O1", "OZ", "FP2", "F8", "P8"),
        "Topic et al. (2022), ReliefF ranking",
        90.76,
    ),
    7: ElectrodeSet(
        "set07",
        ("FP1", "AF3", "F7", "T7", "CP5", "P7", "FP2", "AF4", "FC6", "T8"),
        "Topic et al. (2022), NCA ranking",
        90.76,
    ),
    8: ElectrodeSet(
        "set08",
        ("CP6", "F3", "F8", "Fp1", "O2", "P7", "T7", "T8"),
        "Msonda et al. (2021), mean squared error ranking",
        90.0,
    ),
    9: ElectrodeSet(
        "set09",
        GENEVA_ORDER,
        "full 32-electrode montage",
        75.16,
    ),
}

LITERATURE_SET_IDS: tuple[str, ...] = tuple(f"set{n:02d}" for n in range(1, 10))


def literature_set(n: int) -> ElectrodeSet:
    """Published set number n (1..9), with provenance and prior accuracy.

    Raises:
        SetIdError: n outside 1..9.
    """
    if n not in _LITERATURE:
        raise SetIdError(f"set number {n} outside 1..9")
    return _LITERATURE[n]


def lobe_set(lobe: str) -> ElectrodeSet:
    """Electrode group of one cerebral lobe, in its table order.

    Raises:
        LobeError: unknown lobe name.
    """
    for name, members in LOBES.items():
        if name.lower() == lobe.lower():
            return ElectrodeSet(id=name.lower(), electrodes=members,
                                provenance=f"{name} lobe grouping")
    raise LobeError(f"unknown lobe: {lobe!r} (expected one of {list(LOBES)})")


def resolve_indices(electrode_set: ElectrodeSet, channel_names=None) -> list[int]:
    """Channel indices of a set against a montage, in the set's order.

    Matching is case-insensitive (sources spell Fp1 as both "Fp1" and
    "FP1"). channel_names defaults to the full Geneva order.

    Raises:
        MontageError: a name is absent from the montage, naming it.
    """
    names = list(channel_names) if channel_names is not None else list(GENEVA_ORDER)
    lookup = {n.lower(): i for i, n in enumerate(names)}
    indices = []
    for name in electrode_set.electrodes:
        canonical_name(name)  # reject names outside the 32-electrode montage
        try:
            indices.append(lookup[name.lower()])
        except KeyError:
            raise MontageError(
                f"electrode {name!r} not present in recording montage"
            ) from None
    return indices


def parse_selector(selector: str) -> list[ElectrodeSet]:
    """Expand a CLI selector: 'setNN', 'lobe:NAME', a lobe name, or 'all'.

    'all' means the nine published sets; comma-separated selectors
    concatenate. Raises SetIdError/LobeError on anything unrecognized.
    """
    if "," in selector:
        out: list[ElectrodeSet] = []
        for part in selector.split(","):
            if part.strip():
                out.extend(parse_selector(part))
        if not out:
            raise SetIdError(f"empty selector: {selector!r}")
        return out
    sel = selector.strip()
    if sel.lower() == "all":
        return [literature_set(n) for n in range(1, 10)]
    if sel.lower() == "lobes":
        return [lobe_set(name) for name in LOBES]
    if sel.lower().startswith("lobe:"):
        return [lobe_set(sel[5:])]
    if sel.lower().startswith("set"):
        digits = sel[3:]
        if not digits.isdigit():
            raise SetIdError(f"bad set selector: {selector!r}")
        return [literature_set(int(digits))]
    # bare lobe name as a convenience
    if sel.lower() in {name.lower() for name in LOBES}:
        return [lobe_set(sel)]
    raise SetIdError(f"unrecognized selector: {selector!r}")

"""Plane-wave mode labels and the chiral dispersion relation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

LEFT = "L"
RIGHT = "R"
CHIRALITIES = (LEFT, RIGHT)


def dispersion(k: int, p: int, chirality: str) -> Fraction:
    """Frequency of the plane wave with momentum ``k``.

    Left-handed waves have ``omega = -k``; right-handed waves have
    ``omega = k`` for ``k <= 0`` and ``k + p`` above, which opens a gap of
    ``p`` frequencies that no right-handed wave reaches.
    """
    if chirality == LEFT:
        return Fraction(-k)
    if chirality == RIGHT:
        return Fraction(k if k <= 0 else k + p)
    raise ValueError(f"unknown chirality {chirality!r}")


def opposite(chirality: str) -> str:
    if chirality not in CHIRALITIES:
        raise ValueError(f"unknown chirality {chirality!r}")
    return RIGHT if chirality == LEFT else LEFT


@dataclass(frozen=True)
class Mode:
    k: int
    chirality: str
    omega: Fraction

    @classmethod
    def of(cls, k: int, chirality: str, p: int) -> "Mode":
        return cls(k, chirality, dispersion(k, p, chirality))

    def as_str(self) -> str:
        return f"{self.chirality}{self.k:+d}"

    def __str__(self) -> str:
        return self.as_str()


def chiral_modes(K: int, p: int, chirality: str) -> tuple[Mode, ...]:
    return tuple(Mode.of(k, chirality, p) for k in range(-K, K + 1))


def all_modes(K: int, p: int) -> tuple[Mode, ...]:
    """Both chiralities, ordered by momentum then ``L`` before ``R``."""
    return tuple(Mode.of(k, c, p) for k in range(-K, K + 1) for c in CHIRALITIES)

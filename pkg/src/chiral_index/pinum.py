"""Numbers of the form ``r + q*pi`` with rational ``r`` and ``q``.

Lifetimes such as ``pi/2`` must stay exact: whether ``e^{2ikT} = 1`` holds
decides whether a block of the signature operator vanishes, and a decimal
approximation of ``pi`` never gives an exact zero.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction

_RAT = r"[+-]?\d+(?:\.\d+)?(?:/\d+)?"
_UNSIGNED = r"\d+(?:\.\d+)?(?:/\d+)?"
_PI_FORMS = [
    re.compile(rf"^(?P<sign>[+-])?\s*(?:(?P<num>{_UNSIGNED})\s*\*?\s*)?pi\s*(?:/\s*(?P<den>\d+))?$"),
    re.compile(rf"^(?P<sign>[+-])?\s*pi\s*\*\s*(?P<num>{_UNSIGNED})$"),
]


@dataclass(frozen=True)
class PiRational:
    rational: Fraction = Fraction(0)
    pi_coeff: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "pi_coeff", Fraction(self.pi_coeff))

    @classmethod
    def parse(cls, value) -> "PiRational":
        """Accepts numbers, ``"1"``, ``"3/2"``, ``"pi"``, ``"-pi/2"``, ``"2*pi/3"``, ``"pi*3/4"``."""
        if isinstance(value, PiRational):
            return value
        if isinstance(value, bool):
            raise ValueError(f"not a number: {value!r}")
        if isinstance(value, (int, Fraction)):
            return cls(Fraction(value))
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"not a finite number: {value!r}")
            return cls(Fraction(str(value)))
        if not isinstance(value, str):
            raise ValueError(f"cannot read {value!r} as a number")
        text = value.strip().lower().replace("π", "pi")
        if re.fullmatch(_RAT, text):
            return cls(Fraction(text))
        for form in _PI_FORMS:
            m = form.match(text)
            if m:
                num = m.group("num")
                coeff = Fraction(num) if num else Fraction(1)
                if m.group("sign") == "-":
                    coeff = -coeff
                den = m.groupdict().get("den")
                if den:
                    coeff /= int(den)
                return cls(Fraction(0), coeff)
        raise ValueError(f"cannot read {value!r}: expected a rational or a rational multiple of pi")

    def __float__(self) -> float:
        return float(self.rational) + float(self.pi_coeff) * math.pi

    def __add__(self, other: "PiRational") -> "PiRational":
        return PiRational(self.rational + other.rational, self.pi_coeff + other.pi_coeff)

    def __mul__(self, s) -> "PiRational":
        s = Fraction(s)
        return PiRational(self.rational * s, self.pi_coeff * s)

    __rmul__ = __mul__

    def lerp(self, other: "PiRational", s) -> "PiRational":
        """``(1 - s) * self + s * other`` with exact rational ``s``."""
        s = Fraction(s)
        return self * (1 - s) + other * s

    @property
    def is_pi_rational(self) -> bool:
        return self.rational == 0

    def exp_i(self, factor: int) -> complex:
        """``exp(i * factor * self)``, exact when the phase is a multiple of ``pi/2``."""
        if self.rational == 0:
            x = (factor * self.pi_coeff) % 2
            exact = {Fraction(0): 1 + 0j, Fraction(1, 2): 1j, Fraction(1): -1 + 0j, Fraction(3, 2): -1j}
            if x in exact:
                return exact[x]
            return complex(math.cos(math.pi * x), math.sin(math.pi * x))
        return cmath.exp(1j * factor * float(self))

    def __str__(self) -> str:
        parts = []
        if self.rational:
            parts.append(str(self.rational))
        if self.pi_coeff:
            q = self.pi_coeff
            if q == 1:
                parts.append("pi")
            elif q == -1:
                parts.append("-pi")
            elif q.numerator in (1, -1):
                parts.append(f"{'-' if q < 0 else ''}pi/{q.denominator}")
            else:
                parts.append(f"{q}*pi")
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")

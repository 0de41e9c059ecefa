"""PID atoms and their assembly from one solved component.

Given the three mutual informations I(M;XY), I(M;X), I(M;Y), fixing the
redundancy fixes the other three atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Union

from .prob import DiscreteTriple, GaussianTriple, InfoValue, gaussian_info, mutual_information

DISPLAY_CLAMP = 1e-6


@dataclass(frozen=True)
class PidAtoms:
    ui_x: InfoValue
    ui_y: InfoValue
    ri: InfoValue
    si: InfoValue
    method: str
    diagnostics: Dict[str, Any] = field(default_factory=dict, compare=False)

    def bits(self) -> tuple:
        return (self.ui_x.bits, self.ui_y.bits, self.ri.bits, self.si.bits)

    def display_bits(self) -> tuple:
        """Atoms in bits with arithmetic noise in [-1e-6, 0) shown as 0."""
        return tuple(0.0 if -DISPLAY_CLAMP <= v < 0 else v for v in self.bits())

    def as_dict(self) -> dict:
        return {
            "ui_x": self.ui_x.bits,
            "ui_y": self.ui_y.bits,
            "ri": self.ri.bits,
            "si": self.si.bits,
        }


def assemble_from_ri(i_mxy: InfoValue, i_mx: InfoValue, i_my: InfoValue, ri: InfoValue,
                     method: str, diagnostics: dict = None) -> PidAtoms:
    ui_x = i_mx - ri
    ui_y = i_my - ri
    si = i_mxy - ui_x - ui_y - ri
    return PidAtoms(ui_x, ui_y, ri, si, method, dict(diagnostics or {}))


def mutual_informations(dist: Union[DiscreteTriple, GaussianTriple]):
    """``(I(M;XY), I(M;X), I(M;Y))``."""
    if isinstance(dist, GaussianTriple):
        f = gaussian_info
    else:
        f = mutual_information
    return f(dist, "M", "XY"), f(dist, "M", "X"), f(dist, "M", "Y")


def validate(atoms: PidAtoms, dist: Union[DiscreteTriple, GaussianTriple]) -> dict:
    """Residuals (bits) of the three consistency equations and the most negative atom."""
    i_mxy, i_mx, i_my = mutual_informations(dist)
    a = atoms
    return {
        "total": abs((a.ui_x + a.ui_y + a.ri + a.si - i_mxy).bits),
        "x": abs((a.ui_x + a.ri - i_mx).bits),
        "y": abs((a.ui_y + a.ri - i_my).bits),
        "min_atom": min(atoms.bits()),
    }

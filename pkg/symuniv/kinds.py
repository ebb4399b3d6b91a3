# symuniv/kinds.py
from dataclasses import dataclass
from typing import Dict

from .errors import UnsupportedKindError

SYM = "sym"
RANKIN_SELBERG = "rs"


@dataclass(frozen=True)
class LKind:
    """Sym(m) or RankinSelberg(m) = sym^m f x sym^m f, with 1 <= m <= 4."""

    variant: str
    m: int

    def __post_init__(self):
        if self.variant not in (SYM, RANKIN_SELBERG):
            raise UnsupportedKindError(
                f"Kind variant must be one of {[SYM, RANKIN_SELBERG]}, got {self.variant!r}")
        if not isinstance(self.m, int) or not 1 <= self.m <= 4:
            raise UnsupportedKindError(
                f"Symmetric power m must be in 1..4, got {self.m!r}")

    @classmethod
    def parse(cls, label: str) -> "LKind":
        """Parse a label such as 'sym2' or 'rs4'."""
        label = label.strip().lower()
        for variant in (RANKIN_SELBERG, SYM):
            if label.startswith(variant) and label[len(variant):].isdigit():
                return cls(variant, int(label[len(variant):]))
        raise UnsupportedKindError(
            f"Kind must be one of {list(KIND_CONFIGS)}, got {label!r}")

    @property
    def label(self) -> str:
        return f"{self.variant}{self.m}"

    @property
    def is_rankin_selberg(self) -> bool:
        return self.variant == RANKIN_SELBERG

    @property
    def degree(self) -> int:
        return (self.m + 1) ** 2 if self.is_rankin_selberg else self.m + 1

    @property
    def divisor_order(self) -> int:
        # the z of d_z(n) bounding |lambda_F(n)|
        return self.degree

    @property
    def sigma_F(self) -> float:
        return 1.0 - 1.0 / self.degree

    def __str__(self) -> str:
        return self.label


def Sym(m: int) -> LKind:
    return LKind(SYM, m)


def RankinSelberg(m: int) -> LKind:
    return LKind(RANKIN_SELBERG, m)


# Default disc K sits inside sigma_F < Re(s) < 1 with margin 0.02
# (0.01 for rs4, whose strip is only 0.04 wide).
KIND_CONFIGS: Dict[str, Dict] = {
    'sym1': {'variant': SYM, 'm': 1, 'disc_center': 0.75, 'disc_radius': 0.05},
    'sym2': {'variant': SYM, 'm': 2, 'disc_center': 0.85, 'disc_radius': 0.05},
    'sym3': {'variant': SYM, 'm': 3, 'disc_center': 0.875, 'disc_radius': 0.05},
    'sym4': {'variant': SYM, 'm': 4, 'disc_center': 0.9, 'disc_radius': 0.05},
    'rs1': {'variant': RANKIN_SELBERG, 'm': 1, 'disc_center': 0.875, 'disc_radius': 0.05},
    'rs2': {'variant': RANKIN_SELBERG, 'm': 2, 'disc_center': 0.945, 'disc_radius': 0.025},
    'rs3': {'variant': RANKIN_SELBERG, 'm': 3, 'disc_center': 0.96875, 'disc_radius': 0.01125},
    'rs4': {'variant': RANKIN_SELBERG, 'm': 4, 'disc_center': 0.98, 'disc_radius': 0.01},
}

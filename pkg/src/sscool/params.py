from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .numkit import ContractError

EMISSION_PATTERNS = ("dipole", "isotropic")


@dataclass(frozen=True)
class IonParams:
    """Physical parameters of the driven, trapped two-level ion.

    Frequencies are in units of the trap frequency when ``nu == 1``.
    ``emission`` selects the angular pattern of spontaneous emission:
    ``"dipole"`` (weight 3/4 (1 + cos^2 theta)) or ``"isotropic"``.
    """

    nu: float = 1.0
    gamma: float = 0.1
    omega: float = 0.5
    delta: float = -1.0
    eta: float = 0.1
    n0: float = 10.0
    emission: str = "dipole"

    def __post_init__(self):
        for name in ("nu", "gamma", "omega", "delta", "eta", "n0"):
            if not np.isfinite(getattr(self, name)):
                raise ContractError(f"{name} must be finite")
        if self.nu <= 0:
            raise ContractError("nu must be positive")
        if self.gamma <= 0:
            raise ContractError("gamma must be positive")
        if self.omega < 0 or self.eta < 0 or self.n0 < 0:
            raise ContractError("omega, eta and n0 must be non-negative")
        if self.emission not in EMISSION_PATTERNS:
            raise ContractError(f"emission must be one of {EMISSION_PATTERNS}")

    def with_ssc_detuning(self) -> "IonParams":
        """Copy with the detuning set to the dressed red-sideband resonance."""
        from .analytics import ssc_resonance_delta

        return replace(self, delta=ssc_resonance_delta(self.nu, self.omega))

    def replace(self, **changes) -> "IonParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def emission_second_moment(self) -> float:
        """Mean of cos^2(theta) over the emission pattern."""
        return 2.0 / 5.0 if self.emission == "dipole" else 1.0 / 3.0

"""Select the compiled kernel backend, falling back to pure Python.

Set ``AFCSIM_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS: dict[str, ModuleType] = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

if os.environ.get("AFCSIM_BACKEND", "").lower() == "python" or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"
impl: ModuleType = BACKENDS[BACKEND]


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


@dataclass(frozen=True)
class KernelParams:
    """Flat scalar view of a channel and retry policy, as the kernels take it."""

    kappa_tau: float
    tau: float
    step: float
    code: int
    p1: float
    p2: float
    max_attempts: int  # <= 0 means unlimited

    @classmethod
    def from_model(cls, channel, policy) -> "KernelParams":
        p1, p2 = channel.phase_jitter.kernel_params()
        return cls(
            channel.kappa_tau,
            channel.tau,
            policy.attempt_duration(channel),
            channel.phase_jitter.kernel_code,
            p1,
            p2,
            policy.max_attempts or 0,
        )

    @property
    def args(self) -> tuple:
        return (self.kappa_tau, self.tau, self.step, self.code, self.p1, self.p2)

"""Report containers shared between modules, plus their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of checking ``lhs <= rhs``.

    ``rigidity_flags`` is only populated for saturated inequalities.
    """

    name: str
    lhs: float
    rhs: float
    saturated: bool
    rigidity_flags: tuple[str, ...] = field(default=())

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= 0 or self.saturated

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "saturated": self.saturated,
            "flags": list(self.rigidity_flags),
        }


def compare(name: str, lhs: float, rhs: float, tol: float,
            flags: tuple[str, ...] = ()) -> InequalityReport:
    """Build a report, flagging saturation when ``|rhs - lhs| <= tol * max(1, |rhs|)``."""
    saturated = abs(rhs - lhs) <= tol * max(1.0, abs(rhs))
    return InequalityReport(name, float(lhs), float(rhs), saturated,
                            tuple(flags) if saturated else ())

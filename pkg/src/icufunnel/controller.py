"""Bang-bang hysteresis controller and feasibility of its thresholds.

The control law is a two-threshold relay on the severe-case count: switch on
at phi_plus - eps_plus, switch off at phi_minus + eps_minus, hold in between.
The rest of the module decides whether a threshold pair is admissible (the
ordering constraint plus conditions A4 and A5 on the growth functional q),
constructs an admissible pair when one exists, and evaluates the closed-form
lower bounds on the time between switches.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

from .constants import Condition, DerivedConstants, check_sigma
from .model import Scenario

__all__ = [
    "ControllerParams",
    "ControllerState",
    "DwellBounds",
    "CZReport",
    "QEvalDomainError",
    "QEvalRangeWarning",
    "InfeasibleError",
    "control_update",
    "q_eval",
    "in_CZ",
    "find_feasible_eps",
    "dwell_lower_bounds",
]


class QEvalDomainError(ValueError):
    """q is undefined: its denominator is not positive at this point."""


class QEvalRangeWarning(UserWarning):
    """q was evaluated outside [M2/M1, phi_plus], where A4/A5 never look."""


class InfeasibleError(ValueError):
    """No admissible threshold pair was found."""


@dataclass(frozen=True)
class ControllerParams:
    """Threshold pair for the relay controller (all in individuals).

    The on threshold is phi_plus - eps_plus, the off threshold is
    phi_minus + eps_minus. Positivity is enforced here; the ordering
    constraint (off threshold strictly below on threshold) is deliberately
    not, so that a violating pair can still be handed to in_CZ and rejected
    with a report. Callers feeding control_update must ensure ordering_ok.
    """

    eps_plus: float
    eps_minus: float
    phi_plus: float
    phi_minus: float = 0.0

    def __post_init__(self) -> None:
        if not self.eps_plus > 0.0:
            raise ValueError(f"eps_plus must be > 0, got {self.eps_plus!r}")
        if not self.eps_minus > 0.0:
            raise ValueError(f"eps_minus must be > 0, got {self.eps_minus!r}")
        if not self.phi_plus > 0.0:
            raise ValueError(f"phi_plus must be > 0, got {self.phi_plus!r}")
        if self.phi_minus < 0.0:
            raise ValueError(f"phi_minus must be >= 0, got {self.phi_minus!r}")

    def on_threshold(self) -> float:
        return self.phi_plus - self.eps_plus

    def off_threshold(self) -> float:
        return self.phi_minus + self.eps_minus

    def ordering_ok(self) -> bool:
        return self.off_threshold() < self.on_threshold()


@dataclass
class ControllerState:
    """Relay memory: the input value just before the current instant."""

    u_prev: int = 0


@dataclass(frozen=True)
class DwellBounds:
    """Closed-form lower bounds on the time between consecutive switches.

    down_bound covers the intervention phase (switch-on to switch-off) and
    is always positive. up_bound covers the relaxed phase and may come out
    non-positive, in which case it carries no information.
    """

    down_bound: float
    up_bound: float

    @property
    def up_is_informative(self) -> bool:
        return self.up_bound > 0.0


@dataclass(frozen=True)
class CZReport:
    """Membership report for one threshold pair: ordering, A4, A5."""

    conditions: tuple[Condition, ...] = field(default=())

    def _get(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def ordering_ok(self) -> bool:
        return self._get("ordering").passed

    @property
    def a4_ok(self) -> bool:
        return self._get("A4").passed

    @property
    def a5_ok(self) -> bool:
        return self._get("A5").passed

    @property
    def q_value(self) -> float:
        """q evaluated at phi_plus - eps_plus (nan if q was undefined there)."""
        return self._get("A5").lhs

    @property
    def in_cz(self) -> bool:
        return all(c.passed for c in self.conditions)


def control_update(I_S: float, state: ControllerState, cp: ControllerParams) -> int:
    """Advance the relay one decision: returns the input and stores it.

    On at I_S >= phi_plus - eps_plus (ties switch on), off at
    I_S <= phi_minus + eps_minus (ties switch off), previous value held
    strictly in between. The two branches cannot fire together when the
    ordering constraint holds.
    """
    if I_S >= cp.on_threshold():
        u = 1
    elif I_S <= cp.off_threshold():
        u = 0
    else:
        u = state.u_prev
    state.u_prev = u
    return u


def q_eval(eps: float, dc: DerivedConstants, scenario: Scenario) -> float:
    """Evaluate the severe-case growth functional q at threshold gap eps.

    q(eps) = [p(beta_A*zeta + beta_S)*eps*(1 - R0/N - eps/(pN))
              + p(M1*eps - M2)(zeta + 1)*eps]
             / [alpha_S/(1-rho) + (M1*eps - M2)]

    Defined on [M2/M1, phi_plus], where the denominator is automatically
    positive; evaluation outside that interval is allowed but triggers
    QEvalRangeWarning since A4/A5 never reference it.

    Raises:
        QEvalDomainError: the denominator is not positive at eps.
    """
    pm = scenario.params
    ini = scenario.init
    lo = dc.M2 / dc.M1
    if not (lo <= eps <= dc.phi_plus):
        warnings.warn(
            f"q evaluated at eps={eps!r}, outside [M2/M1, phi_plus] = "
            f"[{lo!r}, {dc.phi_plus!r}]",
            QEvalRangeWarning,
            stacklevel=2,
        )
    den = dc.alpha_S_eff + (dc.M1 * eps - dc.M2)
    if not den > 0.0:
        raise QEvalDomainError(f"q denominator not positive at eps={eps!r}: {den!r}")
    z = pm.beta_A * dc.zeta + pm.beta_S
    num = pm.p * z * eps * (1.0 - ini.R0 / dc.N - eps / (pm.p * dc.N)) + pm.p * (
        dc.M1 * eps - dc.M2
    ) * (dc.zeta + 1.0) * eps
    return num / den


def in_CZ(cp: ControllerParams, scenario: Scenario, dc: DerivedConstants) -> CZReport:
    """Check threshold-pair admissibility: ordering, A4, A5.

    Always returns a report (never raises). If q is undefined at the probe
    point phi_plus - eps_plus, A5 is recorded as failed with lhs = nan.
    The caller is expected to have verified basic scenario admissibility
    (check_sigma) already.
    """
    eps_probe = cp.phi_plus - cp.eps_plus
    a4_rhs = cp.phi_plus - dc.M2 / dc.M1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QEvalRangeWarning)
            q_at_probe = q_eval(eps_probe, dc, scenario)
    except QEvalDomainError:
        q_at_probe = math.nan
    conditions = (
        Condition(
            "ordering",
            "phi_minus + eps_minus < phi_plus - eps_plus",
            cp.ordering_ok(),
            cp.off_threshold(),
            cp.on_threshold(),
        ),
        Condition(
            "A4",
            "eps_plus < phi_plus - M2/M1",
            cp.eps_plus < a4_rhs,
            cp.eps_plus,
            a4_rhs,
        ),
        Condition(
            "A5",
            "q(phi_plus - eps_plus) < phi_plus",
            q_at_probe < cp.phi_plus,
            q_at_probe,
            cp.phi_plus,
        ),
    )
    return CZReport(conditions=conditions)


def find_feasible_eps(
    scenario: Scenario,
    dc: DerivedConstants,
    grid: int | Sequence[float] = 10_000,
) -> ControllerParams:
    """Construct an admissible threshold pair by scanning q over a grid.

    Scans candidate gaps eps in the open interval (M2/M1, phi_plus). An int
    grid places that many points evenly in the interior; a sequence is used
    as-is (every point must lie in the open interval). The largest grid eps
    with q(eps) < phi_plus wins, and the pair is completed as
    eps_plus = phi_plus - eps, eps_minus = eps/2 (any value below eps would
    do). The returned pair passes in_CZ by construction.

    Raises:
        InfeasibleError: basic admissibility fails (named group), or no
            grid point satisfies q(eps) < phi_plus. The latter cannot
            happen with a fine grid when A3 holds, since q tends to
            M3 < phi_plus at the left endpoint; if it does, the grid was
            too coarse or the arithmetic is in trouble.
    """
    report = check_sigma(scenario, dc)
    for group, ok in (("A1", report.a1_ok), ("A2", report.a2_ok), ("A3", report.a3_ok)):
        if not ok:
            raise InfeasibleError(f"infeasible: {group}")

    lo = dc.M2 / dc.M1
    hi = dc.phi_plus
    if isinstance(grid, int):
        if grid < 1:
            raise ValueError(f"grid must have at least one point, got {grid!r}")
        step = (hi - lo) / (grid + 1)
        candidates = [lo + k * step for k in range(1, grid + 1)]
    else:
        candidates = list(grid)
        for eps in candidates:
            if not lo < eps < hi:
                raise ValueError(
                    f"grid point {eps!r} outside open interval ({lo!r}, {hi!r})"
                )
        if not candidates:
            raise ValueError("grid must have at least one point")

    best = None
    for eps in candidates:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", QEvalRangeWarning)
                q = q_eval(eps, dc, scenario)
        except QEvalDomainError:
            continue
        if q < dc.phi_plus and (best is None or eps > best):
            best = eps
    if best is None:
        raise InfeasibleError(
            "infeasible: no grid point with q(eps) < phi_plus (numerical trouble?)"
        )
    return ControllerParams(
        eps_plus=dc.phi_plus - best,
        eps_minus=best / 2.0,
        phi_plus=dc.phi_plus,
        phi_minus=0.0,
    )


def dwell_lower_bounds(
    cp: ControllerParams, dc: DerivedConstants, IA_at_switch: float
) -> DwellBounds:
    """Evaluate the closed-form lower bounds on inter-switch times.

    down_bound = (1-rho)/alpha_S * ln((phi_plus - eps_plus)/eps_minus),
    positive for every ordered pair. up_bound = (1/mu) *
    ln((phi_plus - eps_plus)^2 / (eps_minus^2 + IA_at_switch^2)), where
    IA_at_switch is the mild-case count at the switch-off instant; a
    non-positive value means the bound is uninformative.
    """
    if IA_at_switch < 0.0:
        raise ValueError(f"IA_at_switch must be >= 0, got {IA_at_switch!r}")
    gap = cp.on_threshold()
    down = math.log(gap / cp.eps_minus) / dc.alpha_S_eff
    up = math.log(gap**2 / (cp.eps_minus**2 + IA_at_switch**2)) / dc.mu
    return DwellBounds(down_bound=down, up_bound=up)

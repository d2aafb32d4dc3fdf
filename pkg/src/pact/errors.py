"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input value or document violates a domain invariant."""


class CurveFitError(ValidationError):
    """Cost-curve fitting failed (too few points, or the fitted curve is
    not usable for screening, e.g. decreasing in quality)."""


class InfeasibleMenuError(Exception):
    """A contract menu failed the rationality/compatibility checks where a
    feasible menu is required.

    Deliberately not a ValidationError: infeasibility is a finding about
    the menu, not a malformed input, and the CLI reports it separately.
    """

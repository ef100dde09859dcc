"""Benchmark problem registry and config-defined problem construction.

Every problem carries its exact solution, and the source term is derived
analytically from it with the Caputo power rule, so discretization error can
be measured directly.  Config-defined problems combine built-in coefficient
families: polynomials and polynomial-times-sine profiles in space, power
series in time.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .configfile import read_key_value_file
from .errors import ArgumentContractError
from .fractional import caputo_power
from .quadrature import gamma
from .stepper import LinearProblemSpec, SemilinearProblemSpec

REGISTRY_IDS = ("example1-constant", "example2-variable", "example3-semilinear")


def _example1(alpha: float) -> LinearProblemSpec:
    # Exact solution (t^alpha + t^3) sin y on (0, pi) with unit coefficients.
    g1 = gamma(alpha + 1.0)
    g2 = 6.0 / gamma(4.0 - alpha)

    def exact(y, t):
        return (t**alpha + t**3) * np.sin(y)

    def exact_dy(y, t):
        return (t**alpha + t**3) * np.cos(y)

    def source(y, t):
        return (g1 + g2 * t ** (3.0 - alpha)) * np.sin(y) + 2.0 * (t**alpha + t**3) * np.sin(y)

    return LinearProblemSpec(
        alpha=alpha,
        ell=math.pi,
        T=1.0,
        a=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        b=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        p=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        f=source,
        g=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        exact=exact,
        exact_dy=exact_dy,
        name="example1-constant",
    )


def _example2(alpha: float) -> LinearProblemSpec:
    # Exact solution t^alpha y sin y on (0, pi) with a = y+1 and p = t^2 + 1.
    g1 = gamma(alpha + 1.0)

    def exact(y, t):
        return t**alpha * y * np.sin(y)

    def exact_dy(y, t):
        return t**alpha * (np.sin(y) + y * np.cos(y))

    def source(y, t):
        # spatial part: -( (y+1) s' )' + s with s = y sin y
        elliptic = (
            y * np.sin(y)
            - np.sin(y)
            - y * np.cos(y)
            - (y + 1.0) * (2.0 * np.cos(y) - y * np.sin(y))
        )
        return g1 * y * np.sin(y) + (t**2 + 1.0) * t**alpha * elliptic

    return LinearProblemSpec(
        alpha=alpha,
        ell=math.pi,
        T=1.0,
        a=lambda y: y + 1.0,
        b=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        p=lambda t: t**2 + 1.0,
        f=source,
        g=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        exact=exact,
        exact_dy=exact_dy,
        name="example2-variable",
    )


def _example3(alpha: float) -> SemilinearProblemSpec:
    # Exact solution (t^alpha + t^3 + 1)(y^2 - y) on (0, 1) with reaction -exp(-u).
    g1 = gamma(alpha + 1.0)
    g2 = 6.0 / gamma(4.0 - alpha)

    def psi(t):
        return t**alpha + t**3 + 1.0

    def exact(y, t):
        return psi(t) * (y * y - y)

    def exact_dy(y, t):
        return psi(t) * (2.0 * y - 1.0)

    def source(y, t):
        return (g1 + g2 * t ** (3.0 - alpha)) * (y * y - y) - 2.0 * psi(t) - np.exp(
            -psi(t) * (y * y - y)
        )

    return SemilinearProblemSpec(
        alpha=alpha,
        ell=1.0,
        T=1.0,
        a=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        b=lambda y, u: -np.exp(-u),
        b_u=lambda y, u: np.exp(-u),
        p=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        f=source,
        g=lambda y: y * y - y,
        exact=exact,
        exact_dy=exact_dy,
        name="example3-semilinear",
    )


_BUILDERS = {
    "example1-constant": _example1,
    "example2-variable": _example2,
    "example3-semilinear": _example3,
}


def residual_oracle_terms(problem_id: str, alpha: float):
    """Independent Caputo and elliptic parts of a registered problem.

    Returns (caputo_fn, elliptic_fn) with caputo_fn(y, t) the analytic
    fractional derivative of the exact solution via the power rule and
    elliptic_fn(y, t) the spatial operator applied to it, both derived
    separately from the stored source so that the manufactured f can be
    cross-checked: caputo + elliptic - f must vanish.
    """
    if problem_id == "example1-constant":

        def caputo(y, t):
            return (caputo_power(alpha, alpha, t) + caputo_power(alpha, 3.0, t)) * np.sin(y)

        def elliptic(y, t):
            u = (t**alpha + t**3) * np.sin(y)
            u_yy = -u
            return -u_yy + u

    elif problem_id == "example2-variable":

        def caputo(y, t):
            return caputo_power(alpha, alpha, t) * y * np.sin(y)

        def elliptic(y, t):
            s = y * np.sin(y)
            ds = np.sin(y) + y * np.cos(y)
            d2s = 2.0 * np.cos(y) - y * np.sin(y)
            flux_div = 1.0 * ds + (y + 1.0) * d2s
            return (t**2 + 1.0) * (t**alpha) * (-flux_div + s)

    elif problem_id == "example3-semilinear":

        def caputo(y, t):
            return (caputo_power(alpha, alpha, t) + caputo_power(alpha, 3.0, t)) * (y * y - y)

        def elliptic(y, t):
            psi = t**alpha + t**3 + 1.0
            return -2.0 * psi - np.exp(-psi * (y * y - y))

    else:
        raise ArgumentContractError(f"unknown problem id {problem_id!r}")
    return caputo, elliptic


class _PolyProfile:
    """Polynomial spatial profile with analytic derivatives."""

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.size == 0:
            raise ArgumentContractError("polynomial profile needs at least one coefficient")
        self.dc = self.c[1:] * np.arange(1, self.c.size)
        self.d2c = self.dc[1:] * np.arange(1, self.dc.size)

    @staticmethod
    def _horner(coeffs, y):
        out = np.zeros_like(np.asarray(y, dtype=float))
        for ck in coeffs[::-1]:
            out = out * y + ck
        return out

    def value(self, y):
        return self._horner(self.c, y)

    def d1(self, y):
        return self._horner(self.dc, y) if self.dc.size else np.zeros_like(y)

    def d2(self, y):
        return self._horner(self.d2c, y) if self.d2c.size else np.zeros_like(y)


class _PolySineProfile:
    """P(y) sin(m pi y / ell) with analytic derivatives."""

    def __init__(self, coeffs, mode: int, ell: float):
        self.poly = _PolyProfile(coeffs)
        self.w = mode * math.pi / ell

    def value(self, y):
        return self.poly.value(y) * np.sin(self.w * y)

    def d1(self, y):
        s, c = np.sin(self.w * y), np.cos(self.w * y)
        return self.poly.d1(y) * s + self.poly.value(y) * self.w * c

    def d2(self, y):
        s, c = np.sin(self.w * y), np.cos(self.w * y)
        return (
            self.poly.d2(y) * s
            + 2.0 * self.poly.d1(y) * self.w * c
            - self.poly.value(y) * self.w * self.w * s
        )


def _parse_floats(text: str) -> list:
    try:
        return [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise ArgumentContractError(f"expected numbers, got {text!r}") from exc


def _parse_time_series(text: str, alpha: float) -> list:
    """Terms 'coef:exponent' with the token alpha standing for the order."""
    terms = []
    for tok in text.split():
        try:
            coef_str, exp_str = tok.split(":")
            coef = float(coef_str)
            expo = alpha if exp_str == "alpha" else float(exp_str)
        except ValueError as exc:
            raise ArgumentContractError(f"bad time series term {tok!r}") from exc
        if expo < 0.0:
            raise ArgumentContractError(f"time exponents must be nonnegative, got {expo}")
        terms.append((coef, expo))
    if not terms:
        raise ArgumentContractError("time series needs at least one term")
    return terms


def build_custom_problem(params: dict, alpha: float) -> LinearProblemSpec:
    """Assemble a linear problem from coefficient-family parameters.

    Required keys: ell, T, a_poly, b_poly, p_powers, u_time and u_space
    (one of poly | polysin with u_space_poly and, for polysin, u_space_mode).
    The source is manufactured from the exact solution u = S(t) s(y).
    """
    try:
        ell = float(params["ell"])
        T = float(params["T"])
        a_poly = _PolyProfile(_parse_floats(params["a_poly"]))
        b_poly = _PolyProfile(_parse_floats(params["b_poly"]))
        p_coeffs = _parse_floats(params["p_powers"])
        terms = _parse_time_series(params["u_time"], alpha)
        family = params["u_space"]
    except KeyError as exc:
        raise ArgumentContractError(f"problem config is missing key {exc.args[0]!r}") from None

    if family == "poly":
        profile = _PolyProfile(_parse_floats(params.get("u_space_poly", "")))
    elif family == "polysin":
        coeffs = _parse_floats(params.get("u_space_poly", "1"))
        mode = int(params.get("u_space_mode", "1"))
        if mode < 1:
            raise ArgumentContractError(f"u_space_mode must be a positive integer, got {mode}")
        profile = _PolySineProfile(coeffs, mode, ell)
    else:
        raise ArgumentContractError(f"unknown spatial family {family!r}")

    edge = max(abs(float(profile.value(0.0))), abs(float(profile.value(ell))))
    if edge > 1e-12:
        raise ArgumentContractError(
            f"spatial profile must vanish at the boundary, got {edge:.3e}"
        )

    def series(t):
        out = 0.0
        for coef, expo in terms:
            out = out + coef * t**expo
        return out

    const_term = sum(coef for coef, expo in terms if expo == 0.0)

    def caputo_series(t):
        out = 0.0
        for coef, expo in terms:
            if expo > 0.0:
                out = out + coef * caputo_power(alpha, expo, t)
        return out

    def p_fn(t):
        return _PolyProfile._horner(p_coeffs, t)

    def exact(y, t):
        return series(t) * profile.value(y)

    def exact_dy(y, t):
        return series(t) * profile.d1(y)

    def source(y, t):
        flux_div = a_poly.d1(y) * profile.d1(y) + a_poly.value(y) * profile.d2(y)
        elliptic = -flux_div + b_poly.value(y) * profile.value(y)
        return caputo_series(t) * profile.value(y) + p_fn(t) * series(t) * elliptic

    return LinearProblemSpec(
        alpha=alpha,
        ell=ell,
        T=T,
        a=a_poly.value,
        b=b_poly.value,
        p=p_fn,
        f=source,
        g=lambda y: const_term * profile.value(y),
        exact=exact,
        exact_dy=exact_dy,
        name=str(params.get("name", "custom")),
    )


def registry_lookup(problem_id: str, alpha: float):
    """Resolve a problem id or config path into a problem specification.

    The source term of every problem depends on the fractional order, so the
    order is part of the lookup.
    """
    if problem_id in _BUILDERS:
        return _BUILDERS[problem_id](alpha)
    if os.path.exists(problem_id):
        return build_custom_problem(read_key_value_file(problem_id), alpha)
    raise ArgumentContractError(
        f"unknown problem {problem_id!r}; expected one of {', '.join(REGISTRY_IDS)} "
        "or a readable config path"
    )

"""Time-varying parameter curves and the local spectral density.

The process family is a Gaussian ARFIMA-type model whose parameters drift
smoothly in rescaled time u = t/T:

    Phi(u, B) Y_t = sigma(u) * Theta(u, B) * (1 - B)^(-d(u)) eps_t

where d(u) is the memory parameter curve, sigma(u) the innovation scale,
and Phi, Theta are AR/MA lag polynomials whose coefficients are curves as
well.  Every scalar curve c(u) is a linear combination of basis functions
mapped through a link:

    link(c(u)) = sum_j coeffs_j * g_j(u)

so the free parameters are the basis coefficients.  The local spectral
density at rescaled time u is

    f(u, lam) = sigma(u)^2 / (2 pi)
                * |Theta(u, e^{-i lam})|^2 / |Phi(u, e^{-i lam})|^2
                * (2 sin(|lam|/2))^(-2 d(u))

All evaluation routines are pure functions of immutable specs, safe to call
concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleParameterError

# Feasibility box for curve values.  The memory parameter must stay in a
# strict interior of (0, 1/2) so the spectral pole at lam = 0 remains
# integrable and Gamma-function arguments in the covariance stay positive.
D_LOW = 1e-3
D_HIGH = 0.499
SIGMA_LOW = 1e-8
ARMA_BOUND = 1.0 - 1e-6
VALIDATION_GRID = 101


@dataclass(frozen=True)
class BasisSpec:
    """Basis functions on [0, 1] for one parameter curve.

    kind "polynomial" uses powers g_j(u) = u^j for j = 0..degree (j starts
    at 1 when ``intercept`` is False).  kind "harmonic" uses a constant
    g_0(u) = 1 (when ``intercept`` is True) followed by g_j(u) = cos(w_j u)
    for the known frequencies ``freqs``; the frequencies are fixed
    constants, never estimated.

    A degree-0 polynomial without intercept is the empty basis (size 0):
    the curve is pinned at link^{-1}(0) with no free coefficients, which is
    how a model fixes a curve (e.g. sigma identically 1 under a log link).
    """

    kind: str
    degree: int = 0
    freqs: tuple = ()
    intercept: bool = True

    def __post_init__(self):
        if self.kind not in ("polynomial", "harmonic"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "polynomial":
            if self.degree < 0:
                raise ValueError("polynomial degree must be >= 0")
        else:
            freqs = tuple(float(w) for w in self.freqs)
            object.__setattr__(self, "freqs", freqs)
            if not freqs and not self.intercept:
                raise ValueError("harmonic basis needs frequencies or an intercept")
            sq = [w * w for w in freqs]
            if self.intercept:
                sq.append(0.0)
            if len(set(sq)) != len(sq):
                raise ValueError("harmonic frequencies must have distinct squares")

    @property
    def size(self) -> int:
        if self.kind == "polynomial":
            return self.degree + 1 if self.intercept else self.degree
        return len(self.freqs) + (1 if self.intercept else 0)

    def design_matrix(self, u) -> np.ndarray:
        """Evaluate all basis functions: shape (len(u), size)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.min() < 0.0 or u.max() > 1.0:
            raise ValueError("u must lie in [0, 1]")
        if self.kind == "polynomial":
            lo = 0 if self.intercept else 1
            powers = np.arange(lo, self.degree + 1)
            return u[:, None] ** powers[None, :]
        cols = []
        if self.intercept:
            cols.append(np.ones_like(u))
        for w in self.freqs:
            cols.append(np.cos(w * u))
        return np.column_stack(cols)


def _link_identity(eta):
    return eta


def _dlink_identity(eta):
    return np.ones_like(np.asarray(eta, dtype=float))


def _link_log(eta):
    # clamp so a wandering optimizer cannot overflow exp()
    return np.exp(np.clip(eta, -700.0, 700.0))


LINKS = {
    "identity": (_link_identity, _dlink_identity),
    "log": (_link_log, _link_log),  # d/d eta exp(eta) = exp(eta)
}


@dataclass(frozen=True)
class CurveSpec:
    """One parameter curve: a basis, a link, and (for AR/MA curves) a sign.

    The curve value is c(u) = link^{-1}(sum_j coeffs_j g_j(u)).  For AR/MA
    coefficient curves the lag-polynomial factor is (1 + sign * c(u) B);
    ``sign`` is ignored for the d and sigma curves.
    """

    basis: BasisSpec
    link: str = "identity"
    sign: int = 1

    def __post_init__(self):
        if self.link not in LINKS:
            raise ValueError(f"unknown link {self.link!r}")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    @property
    def size(self) -> int:
        return self.basis.size


@dataclass(frozen=True)
class ModelSpec:
    """Full model: d curve, sigma curve, and optional AR/MA coefficient curves."""

    d: CurveSpec
    sigma: CurveSpec
    ar: tuple = ()
    ma: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(self.ar))
        object.__setattr__(self, "ma", tuple(self.ma))
        if len(self.ar) > 1 or len(self.ma) > 1:
            raise ValueError("AR and MA orders are limited to 0 or 1")

    @property
    def n_params(self) -> int:
        n = self.d.size + self.sigma.size
        n += sum(c.size for c in self.ar) + sum(c.size for c in self.ma)
        return n

    def param_names(self) -> tuple:
        names = [f"alpha{j}" for j in range(self.d.size)]
        names += [f"beta{j}" for j in range(self.sigma.size)]
        for k, c in enumerate(self.ar):
            names += [f"phi{k + 1}_{j}" for j in range(c.size)]
        for k, c in enumerate(self.ma):
            names += [f"theta{k + 1}_{j}" for j in range(c.size)]
        return tuple(names)

    def slices(self) -> dict:
        """Slot map: component name -> slice into the packed vector."""
        out = {}
        pos = 0
        out["d"] = slice(pos, pos + self.d.size)
        pos += self.d.size
        out["sigma"] = slice(pos, pos + self.sigma.size)
        pos += self.sigma.size
        for k, c in enumerate(self.ar):
            out[f"ar{k + 1}"] = slice(pos, pos + c.size)
            pos += c.size
        for k, c in enumerate(self.ma):
            out[f"ma{k + 1}"] = slice(pos, pos + c.size)
            pos += c.size
        return out

    def make_params(self, values) -> "ParamVector":
        return ParamVector(np.asarray(values, dtype=float), self.param_names())


@dataclass(frozen=True)
class ParamVector:
    """Packed parameter vector with per-slot names."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.ndim != 1 or len(values) != len(self.names):
            raise ValueError("parameter vector length does not match names")
        if not np.all(np.isfinite(values)):
            raise ValueError("parameter vector must be finite")


def theta_values(model: ModelSpec, theta) -> np.ndarray:
    """Coerce a ParamVector or array-like to a validated 1-d float array."""
    values = np.asarray(getattr(theta, "values", theta), dtype=float)
    if values.shape != (model.n_params,):
        raise ValueError(
            f"parameter vector has length {values.size}, model needs {model.n_params}"
        )
    return values


def eval_curve(spec: CurveSpec, coeffs, u):
    """Evaluate one curve at u in [0, 1] (scalar or array).

    Returns link^{-1}(sum_j coeffs_j g_j(u)); scalar input gives scalar
    output.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (spec.size,):
        raise ValueError(
            f"curve needs {spec.size} coefficients, got {coeffs.size}"
        )
    scalar = np.isscalar(u) or np.ndim(u) == 0
    eta = spec.basis.design_matrix(u) @ coeffs
    linkinv, _ = LINKS[spec.link]
    vals = linkinv(eta)
    return float(vals[0]) if scalar else vals


def curve_values(model: ModelSpec, theta, u):
    """All curve values at the points u: dict of arrays keyed by slot name."""
    values = theta_values(model, theta)
    sl = model.slices()
    out = {"d": eval_curve(model.d, values[sl["d"]], u),
           "sigma": eval_curve(model.sigma, values[sl["sigma"]], u)}
    for k, c in enumerate(model.ar):
        out[f"ar{k + 1}"] = eval_curve(c, values[sl[f"ar{k + 1}"]], u)
    for k, c in enumerate(model.ma):
        out[f"ma{k + 1}"] = eval_curve(c, values[sl[f"ma{k + 1}"]], u)
    return out


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of feasibility validation; feasible iff violations is empty."""

    feasible: bool
    violations: tuple = ()


def validate_params(model: ModelSpec, theta, grid_size: int = VALIDATION_GRID,
                    d_low: float = D_LOW, d_high: float = D_HIGH) -> ConstraintReport:
    """Check the curve constraints on a uniform u-grid.

    Constraints: d(u) in (d_low, d_high); sigma(u) > 0; every AR/MA
    coefficient curve satisfies |c(u)| < 1 so the lag-polynomial root stays
    outside the unit circle.  Violations are reported as tuples
    (component, u, value, bound).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    u = np.linspace(0.0, 1.0, grid_size)
    vals = curve_values(model, theta, u)
    violations = []

    def flag(component, mask, bound):
        for idx in np.nonzero(mask)[0]:
            violations.append((component, float(u[idx]), float(vals[component][idx]), bound))

    flag("d", vals["d"] <= d_low, d_low)
    flag("d", vals["d"] >= d_high, d_high)
    flag("sigma", vals["sigma"] <= 0.0, 0.0)
    for key in vals:
        if key.startswith(("ar", "ma")):
            flag(key, np.abs(vals[key]) >= ARMA_BOUND, ARMA_BOUND)
    return ConstraintReport(feasible=not violations, violations=tuple(violations))


def require_feasible(model: ModelSpec, theta, **kwargs) -> None:
    """Raise InfeasibleParameterError when validate_params finds violations."""
    report = validate_params(model, theta, **kwargs)
    if not report.feasible:
        comp, uu, val, bound = report.violations[0]
        raise InfeasibleParameterError(
            f"curve {comp!r} hits {val:.6g} at u={uu:.4g} (bound {bound:.6g}); "
            f"{len(report.violations)} grid violations in total"
        )


def _check_lambda(lam: np.ndarray) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam == 0.0):
        raise ValueError("lam = 0 is excluded: the density is unbounded there")
    if np.any(np.abs(lam) > np.pi + 1e-12):
        raise ValueError("lam must lie in [-pi, pi]")
    return lam


def log_spectral_grid(model: ModelSpec, theta, u, lam) -> np.ndarray:
    """log f(u_a, lam_b) on the tensor grid: shape (len(u), len(lam)).

    This is the workhorse for the likelihood and the Fisher-matrix
    quadrature; scalar wrappers below reduce to it.
    """
    lam = _check_lambda(lam)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    vals = curve_values(model, theta, u)
    # log (2 sin |lam|/2), the negative-memory kernel
    half = np.log(2.0 * np.sin(np.abs(lam) / 2.0))
    coslam = np.cos(lam)
    out = 2.0 * np.log(vals["sigma"])[:, None] - np.log(2.0 * np.pi)
    out = out - 2.0 * vals["d"][:, None] * half[None, :]
    for key in vals:
        if key.startswith(("ar", "ma")):
            k = int(key[2:]) - 1
            spec = model.ar[k] if key.startswith("ar") else model.ma[k]
            a = spec.sign * vals[key]
            mod2 = 1.0 + 2.0 * a[:, None] * coslam[None, :] + (a * a)[:, None]
            term = np.log(np.maximum(mod2, 1e-300))
            out = out + term if key.startswith("ma") else out - term
    return out


def spectral_density(model: ModelSpec, theta, u, lam):
    """f(u, lam) for scalar or array u and lam (broadcast elementwise)."""
    scalar = (np.ndim(u) == 0) and (np.ndim(lam) == 0)
    u_arr, lam_arr = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(lam))
    flat = [
        np.exp(log_spectral_grid(model, theta, uu, ll))[0, 0]
        for uu, ll in zip(u_arr.ravel(), lam_arr.ravel())
    ]
    out = np.array(flat).reshape(u_arr.shape)
    return float(out.ravel()[0]) if scalar else out


def log_spectral_gradient_grid(model: ModelSpec, theta, u, lam) -> np.ndarray:
    """Gradient of log f with respect to theta on a (u, lam) tensor grid.

    Returns shape (n_params, len(u), len(lam)).  The d- and sigma-slot
    entries are analytic; AR/MA slots use central finite differences with a
    relative step of 1e-6, which is accurate to ~1e-9 on these smooth
    log-densities.
    """
    values = theta_values(model, theta)
    lam = _check_lambda(lam)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    sl = model.slices()
    n_u, n_lam = len(u), len(lam)
    grad = np.empty((model.n_params, n_u, n_lam))

    half2 = 2.0 * np.log(2.0 * np.sin(np.abs(lam) / 2.0))  # log(2 sin)^2

    # d slots: dlogf/dd = -log(2 sin|lam|/2)^2, chained through the link
    gd = model.d.basis.design_matrix(u)
    eta_d = gd @ values[sl["d"]]
    dd = LINKS[model.d.link][1](eta_d)
    for j in range(model.d.size):
        grad[sl["d"].start + j] = -(gd[:, j] * dd)[:, None] * half2[None, :]

    # sigma slots: dlogf/dsigma = 2/sigma, chained through the link
    gs = model.sigma.basis.design_matrix(u)
    eta_s = gs @ values[sl["sigma"]]
    ds = LINKS[model.sigma.link][1](eta_s)
    sig = LINKS[model.sigma.link][0](eta_s)
    for j in range(model.sigma.size):
        col = 2.0 * gs[:, j] * ds / sig
        grad[sl["sigma"].start + j] = np.repeat(col[:, None], n_lam, axis=1)

    # AR/MA slots by central finite differences on log f
    arma_slots = [s for key, s in sl.items() if key.startswith(("ar", "ma"))]
    for s in arma_slots:
        for j in range(s.start, s.stop):
            h = 1e-6 * max(1.0, abs(values[j]))
            up = values.copy()
            up[j] += h
            dn = values.copy()
            dn[j] -= h
            grad[j] = (log_spectral_grid(model, up, u, lam)
                       - log_spectral_grid(model, dn, u, lam)) / (2.0 * h)
    return grad


def log_spectral_gradient(model: ModelSpec, theta, u: float, lam: float) -> np.ndarray:
    """Gradient of log f at a single (u, lam): vector of length n_params."""
    return log_spectral_gradient_grid(model, theta, [u], [lam])[:, 0, 0]

"""Ordinary least squares with a regression-table style diagnostic summary."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import RankDeficient, TooFewObservations
from . import special
from .pca import jacobi_eigh

RANK_RTOL = 1e-10


def add_intercept(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])


def householder_qr(A, names=None):
    """Householder QR of ``A`` returning ``(R, apply_qt)``.

    ``apply_qt(b)`` computes ``Q.T @ b``. A column whose component orthogonal to
    the preceding columns is below ``RANK_RTOL`` of its own norm raises
    :class:`RankDeficient` naming that column.
    """
    R = np.array(A, dtype=float)
    n, p = R.shape
    col_norms = np.linalg.norm(R, axis=0)
    reflectors = []
    for k in range(p):
        x = R[k:, k]
        norm = np.linalg.norm(x)
        if col_norms[k] == 0 or norm <= RANK_RTOL * col_norms[k]:
            label = names[k] if names is not None else k
            raise RankDeficient(f"design column {label!r} is linearly dependent on earlier columns",
                                column=label)
        v = x.copy()
        v[0] += math.copysign(norm, x[0])
        v /= np.linalg.norm(v)
        R[k:, k:] -= 2.0 * np.outer(v, v @ R[k:, k:])
        reflectors.append(v)

    def apply_qt(b):
        b = np.array(b, dtype=float)
        for k, v in enumerate(reflectors):
            b[k:] -= 2.0 * v * (v @ b[k:])
        return b

    return np.triu(R[:p]), apply_qt


def _back_substitute(R, b):
    p = R.shape[0]
    x = np.zeros((p,) + b.shape[1:])
    for i in range(p - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x


@dataclass
class OLSFit:
    beta: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    xtx_inverse: np.ndarray
    sigma2: float
    n: int
    p: int
    names: list[str] = field(default_factory=list)


def ols_fit(X, y, names=None) -> OLSFit:
    """Least-squares fit of ``y`` on ``X`` plus an intercept (first coefficient)."""
    y = np.asarray(y, dtype=float)
    design = add_intercept(np.empty((len(y), 0)) if X is None else X)
    n, k = design.shape
    p = k - 1
    names = ["const", *(names if names is not None else (f"x{i}" for i in range(1, k)))]
    if len(names) != k:
        raise ValueError(f"{len(names) - 1} names for {p} regressors")
    if n <= k:
        raise TooFewObservations(f"need more than {k} observations, got {n}")
    R, apply_qt = householder_qr(design, names)
    beta = _back_substitute(R, apply_qt(y)[:k])
    r_inv = _back_substitute(R, np.eye(k))
    fitted = design @ beta
    residuals = y - fitted
    sigma2 = float(residuals @ residuals) / (n - k)
    return OLSFit(beta, residuals, fitted, r_inv @ r_inv.T, sigma2, n, p, names)


def durbin_watson(residuals) -> float:
    e = np.asarray(residuals, dtype=float)
    denom = float(e @ e)
    if denom == 0:
        return math.nan
    return float(np.sum(np.diff(e) ** 2) / denom)


def moments(residuals):
    """Sample skewness and (raw, non-excess) kurtosis."""
    e = np.asarray(residuals, dtype=float)
    d = e - e.mean()
    m2 = np.mean(d**2)
    if m2 == 0:
        return math.nan, math.nan
    return float(np.mean(d**3) / m2**1.5), float(np.mean(d**4) / m2**2)


def jarque_bera(residuals):
    """``(JB, p-value, skew, kurtosis)``."""
    skew, kurt = moments(residuals)
    n = len(residuals)
    jb = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return jb, (special.chi2_sf(jb, 2) if math.isfinite(jb) else math.nan), skew, kurt


@dataclass
class Coefficient:
    name: str
    estimate: float
    std_err: float
    t: float
    p_value: float
    ci_low: float
    ci_high: float


@dataclass
class RegressionSummary:
    coefficients: list[Coefficient]
    r2: float
    adj_r2: float
    f_stat: float
    f_pvalue: float
    log_likelihood: float
    aic: float
    bic: float
    durbin_watson: float
    jarque_bera: float
    jb_pvalue: float
    skew: float
    kurtosis: float
    condition_number: float
    n_obs: int
    df_resid: int
    df_model: int
    dep_variable: str = "y"
    degenerate_target: bool = False

    def coefficient(self, name) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return _finite_or_none(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def render_text(self) -> str:
        return render_summary(self)


def _finite_or_none(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite_or_none(v) for v in obj]
    return obj


def condition_number(design) -> float:
    """``sqrt(max/min eigenvalue)`` of ``X'X``: the design's singular value ratio."""
    values, _ = jacobi_eigh(design.T @ design)
    if values[-1] <= 0:
        return math.inf
    return float(math.sqrt(values[0] / values[-1]))


def ols_summary(fit: OLSFit, X, y, count_variance: bool = False, dep_variable: str = "y") -> RegressionSummary:
    """Coefficient table and fit diagnostics for ``fit``.

    ``count_variance`` adds the error variance to the AIC/BIC parameter count.
    """
    y = np.asarray(y, dtype=float)
    n, p = fit.n, fit.p
    k = p + 1
    df_resid = n - k
    e = fit.residuals
    ssr = float(e @ e)
    sst = float(np.sum((y - y.mean()) ** 2))
    degenerate = sst == 0.0

    t_crit = special.student_t_ppf(0.975, df_resid)
    coefs = []
    for j, name in enumerate(fit.names):
        se = math.sqrt(max(fit.sigma2 * fit.xtx_inverse[j, j], 0.0))
        est = float(fit.beta[j])
        if degenerate and j > 0:
            t, pv = 0.0, 1.0
        elif se == 0.0:
            t, pv = (math.copysign(math.inf, est) if est else math.nan), (0.0 if est else math.nan)
        else:
            t = est / se
            pv = special.student_t_two_sided(t, df_resid)
        coefs.append(Coefficient(name, est, se, t, pv, est - t_crit * se, est + t_crit * se))

    if degenerate:
        r2, f_stat, f_p = 0.0, 0.0, 1.0
    else:
        r2 = 1.0 - ssr / sst
        if p > 0 and ssr > 0:
            f_stat = ((sst - ssr) / p) / (ssr / df_resid)
            f_p = special.f_sf(f_stat, p, df_resid)
        elif p > 0:
            f_stat, f_p = math.inf, 0.0
        else:
            f_stat, f_p = math.nan, math.nan
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df_resid

    llf = -0.5 * n * (math.log(2 * math.pi) + math.log(ssr / n) + 1.0) if ssr > 0 else math.inf
    n_params = k + (1 if count_variance else 0)
    aic = 2.0 * n_params - 2.0 * llf
    bic = math.log(n) * n_params - 2.0 * llf

    jb, jb_p, skew, kurt = jarque_bera(e)
    design = add_intercept(np.empty((n, 0)) if X is None else X)
    return RegressionSummary(
        coefficients=coefs,
        r2=r2,
        adj_r2=adj_r2,
        f_stat=f_stat,
        f_pvalue=f_p,
        log_likelihood=llf,
        aic=aic,
        bic=bic,
        durbin_watson=durbin_watson(e),
        jarque_bera=jb,
        jb_pvalue=jb_p,
        skew=skew,
        kurtosis=kurt,
        condition_number=condition_number(design),
        n_obs=n,
        df_resid=df_resid,
        df_model=p,
        dep_variable=dep_variable,
        degenerate_target=degenerate,
    )


def _g(x, width=4):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "nan" if x is None or math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.{width}g}"


def render_summary(s: RegressionSummary) -> str:
    """Fixed-width plain-text regression table."""
    rule = "=" * 78
    thin = "-" * 78
    left = [
        ("Dep. Variable:", s.dep_variable),
        ("Model:", "OLS"),
        ("Method:", "Least Squares"),
        ("No. Observations:", str(s.n_obs)),
        ("Df Residuals:", str(s.df_resid)),
        ("Df Model:", str(s.df_model)),
        ("Covariance Type:", "nonrobust"),
    ]
    right = [
        ("R-squared:", f"{s.r2:.3f}"),
        ("Adj. R-squared:", f"{s.adj_r2:.3f}"),
        ("F-statistic:", _g(s.f_stat)),
        ("Prob (F-statistic):", _g(s.f_pvalue, 3)),
        ("Log-Likelihood:", f"{s.log_likelihood:.1f}"),
        ("AIC:", _g(s.aic)),
        ("BIC:", _g(s.bic)),
    ]
    lines = [rule]
    for (lk, lv), (rk, rv) in zip(left, right):
        lines.append(f"{lk:<20}{lv:>18}   {rk:<20}{rv:>17}")
    lines.append(rule)
    lines.append(f"{'':<12}{'coef':>11}{'std err':>11}{'t':>10}{'P>|t|':>9}{'[0.025':>12}{'0.975]':>12}")
    lines.append(thin)
    for c in s.coefficients:
        lines.append(
            f"{c.name:<12}{_g(c.estimate):>11}{_g(c.std_err):>11}{c.t:>10.3f}{c.p_value:>9.3f}"
            f"{_g(c.ci_low):>12}{_g(c.ci_high):>12}"
        )
    lines.append(rule)
    diag = [
        (("Durbin-Watson:", f"{s.durbin_watson:.3f}"), ("Jarque-Bera (JB):", f"{s.jarque_bera:.3f}")),
        (("Skew:", f"{s.skew:.3f}"), ("Prob(JB):", _g(s.jb_pvalue, 3))),
        (("Kurtosis:", f"{s.kurtosis:.3f}"), ("Cond. No.", _g(s.condition_number, 3))),
    ]
    for (lk, lv), (rk, rv) in diag:
        lines.append(f"{lk:<20}{lv:>18}   {rk:<20}{rv:>17}")
    lines.append(rule)
    return "\n".join(lines) + "\n"

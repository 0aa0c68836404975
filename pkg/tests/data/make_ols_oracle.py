"""Regenerate ols_oracle.json: a pinned 30x3 regression and its summary.

Every expected value comes from statsmodels/scipy, not from stock2vec.
"""

import json
from pathlib import Path

import numpy as np
import statsmodels.api as sm
from scipy import stats
from statsmodels.stats.stattools import durbin_watson, jarque_bera


def main():
    rng = np.random.default_rng(20240601)
    X = rng.normal(size=(30, 3)) * [1.0, 5.0, 0.2] + [0.0, 10.0, 0.0]
    y = 1.5 + 0.8 * X[:, 0] - 0.3 * X[:, 1] + 4.0 * X[:, 2] + rng.standard_t(5, 30)
    res = sm.OLS(y, sm.add_constant(X)).fit()
    ci = res.conf_int(0.05)
    jb, jb_p, skew, kurt = jarque_bera(res.resid)
    oracle = {
        "X": X.tolist(),
        "y": y.tolist(),
        "coefficients": [
            {"estimate": res.params[j], "std_err": res.bse[j], "t": res.tvalues[j], "p_value": res.pvalues[j],
             "ci_low": ci[j, 0], "ci_high": ci[j, 1]}
            for j in range(4)
        ],
        "r2": res.rsquared,
        "adj_r2": res.rsquared_adj,
        "f_stat": res.fvalue,
        "f_pvalue": res.f_pvalue,
        "log_likelihood": res.llf,
        "aic": res.aic,
        "bic": res.bic,
        "aic_with_variance": res.aic + 2,
        "bic_with_variance": res.bic + np.log(30),
        "durbin_watson": durbin_watson(res.resid),
        "jarque_bera": jb,
        "jb_pvalue": jb_p,
        "skew": skew,
        "kurtosis": kurt,
        "condition_number": np.linalg.cond(sm.add_constant(X)),
        "n_obs": 30,
        "df_resid": int(res.df_resid),
        "df_model": int(res.df_model),
        "skew_check": float(stats.skew(res.resid)),
    }
    out = Path(__file__).with_name("ols_oracle.json")
    out.write_text(json.dumps(oracle, indent=1, default=float) + "\n")


if __name__ == "__main__":
    main()

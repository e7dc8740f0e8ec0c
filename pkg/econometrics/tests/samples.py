import numpy as np

from econometrics.arma_garch import (
    ArmaParams,
    GarchFit,
    GarchParams,
    arma_residuals,
    conditional_variance,
    simulate_arma,
    simulate_garch,
)
from market.tests.samples import prices_from_closes


def sample_noise(**params) -> np.ndarray:
    defaults = {"n": 2000, "seed": 0, "scale": 1.0}
    defaults.update(params)
    rng = np.random.default_rng(defaults["seed"])
    return rng.normal(0.0, defaults["scale"], defaults["n"])


def sample_random_walk(**params) -> np.ndarray:
    return np.cumsum(sample_noise(**params))


def sample_ar1(**params) -> np.ndarray:
    defaults = {"a": 0.8, "n": 5000, "seed": 0}
    defaults.update(params)
    return simulate_arma(0.0, [defaults["a"]], [], defaults["n"], defaults["seed"])


def sample_garch_returns(**params) -> np.ndarray:
    defaults = {
        "omega": 0.05,
        "alpha": 0.06,
        "beta": 0.92,
        "df": 6.0,
        "n": 10000,
        "seed": 0,
    }
    defaults.update(params)
    return simulate_garch(
        defaults["omega"],
        [defaults["alpha"]],
        [defaults["beta"]],
        defaults["n"],
        defaults["seed"],
        df=defaults["df"],
    )


def sample_garch_prices(**params):
    """Prices whose log returns follow a scaled-down GARCH(1,1)."""
    defaults = {"n": 800, "seed": 0, "scale": 0.01}
    defaults.update(params)
    returns = sample_garch_returns(
        n=defaults["n"], seed=defaults["seed"], omega=0.05, df=6.0
    ) * defaults["scale"]
    closes = 60.0 * np.exp(np.cumsum(returns))
    return prices_from_closes(closes, seed=defaults["seed"])


def sample_fit(**params) -> GarchFit:
    """A GarchFit assembled from known parameters, without estimation."""
    defaults = {"mu": 0.0, "ar": (0.5,), "ma": (), "returns": None}
    defaults.update(params)
    returns = defaults["returns"]
    if returns is None:
        returns = sample_noise(n=300)
    returns = np.asarray(returns, dtype=float)

    arma = ArmaParams(defaults["mu"], tuple(defaults["ar"]), tuple(defaults["ma"]))
    garch = GarchParams(0.1, (0.05,), (0.9,), None)
    residuals = arma_residuals(arma, returns, presample=float(returns.mean()))
    return GarchFit(
        arma=arma,
        garch=garch,
        log_likelihood=0.0,
        bic=0.0,
        residuals=residuals,
        conditional_variance=conditional_variance(garch, residuals),
        returns=returns,
    )

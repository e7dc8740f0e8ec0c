"""
Django settings for the oilsignal project.

The project has no web surface and no database: Django supplies the
settings layer, logging configuration, the management-command CLI and the
test runner. Every tunable default of the pipeline lives in ``OILSIGNAL``.
"""
import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()

# Nothing is signed or served; the key only satisfies Django's startup check.
SECRET_KEY = os.environ.get("SECRET_KEY", "oilsignal-cli-not-secret")

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    "core",
    "market",
    "econometrics",
    "learning",
    "trading",
]

DATABASES = {}

# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = False

REST_FRAMEWORK = {
    "COERCE_DECIMAL_TO_STRING": False,
    "UNICODE_JSON": True,
    "COMPACT_JSON": False,
    "STRICT_JSON": True,
}


# Logging

LOG_LEVEL = os.environ.get("OILSIGNAL_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
        },
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        app: {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False}
        for app in ("core", "market", "econometrics", "learning", "trading")
    },
}


# Pipeline defaults

OILSIGNAL_OUT = Path(os.environ.get("OILSIGNAL_OUT", BASE_DIR / "out"))

OILSIGNAL_FIXTURE = os.environ.get("OILSIGNAL_FIXTURE")

OILSIGNAL = {
    "SCHEMA_VERSION": 1,
    "SEED": 42,
    "SPLIT": 0.8,
    "K_FOLDS": 5,
    "FETCH_TIMEOUT": 30,
    "STRATEGIES": ("only_long", "long_short", "buy_and_hold"),
    "INDICATORS": {
        "rsi": 14,
        "roc": 9,
        "macd_fast": 12,
        "macd_slow": 26,
        "k_percent": 14,
    },
    "CROSS_SIGNAL": {"fast": 15, "slow": 60},
    "ARMA_GARCH": {
        "p_max": 3,
        "q_max": 3,
        "select_order": False,
        "p": 1,
        "q": 1,
        "n": 1,
        "m": 1,
        "innovation": "student_t",
        "max_iter": 2000,
        "tol": 1e-8,
    },
    "LSTM": {
        "lag": 39,
        "hidden_sizes": (128, 64),
        "dense_sizes": (25,),
        "epochs": 5,
        "batch_size": 1,
        "learning_rate": 0.001,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
    },
    "KNN": {
        "k": 5,
        "distance": "manhattan",
        "weighting": "distance",
        "leaf_size": 15,
    },
    "RF": {
        "n_trees": 169,
        "max_features": 2,
        "max_depth": 4,
        "min_samples_split": 49,
        "min_samples_leaf": 1,
        "criterion": "entropy",
    },
    "SVR": {
        "C": 19.0,
        "epsilon": 22.4,
        "gamma": "auto",
        "shrinking": True,
        "cache_size": 41,
        "tol": 1e-3,
        "max_iter": 200000,
    },
    "SEARCH": {
        "budget": 20,
        "folds": 5,
        "spaces": {
            "knn": {
                "k": [3, 5, 7, 9, 11, 15, 21],
                "weighting": ["uniform", "distance"],
                "leaf_size": [15, 30],
            },
            "rf": {
                "n_trees": [50, 100, 169, 200],
                "max_features": [1, 2, 3, 4],
                "max_depth": [2, 3, 4, 6, 8],
                "min_samples_split": [2, 10, 25, 49, 80],
                "min_samples_leaf": [1, 5, 10],
            },
            "svr": {
                "C": [1.0, 5.0, 10.0, 19.0, 50.0],
                "epsilon": [0.5, 2.0, 5.0, 10.0, 22.4],
                "gamma": ["auto", "scale"],
            },
        },
    },
    "DIAGNOSTICS": {
        "max_lag": 50,
        "ljung_box_lags": (10, 20, 30),
        "qq_df": 5,
        "sma_overlay": 200,
    },
    "PERMUTATION_REPETITIONS": 10,
    "EXTREME_LEVELS": (0.95, 0.99),
}

from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Nothing is served; the key only satisfies Django's startup checks.
SECRET_KEY = config("SECRET_KEY", default="goldenshift-local")

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",

    # Third Party
    "rest_framework",

    # Local Apps
    "numerics",
    "symbolic",
    "markov",
    "schedule",
    "homeo1d",
    "density",
    "anosov2d",
    "cli",
]

# Schedules and reports live on disk as JSON; there is no database.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

REST_FRAMEWORK = {
    "UNAUTHENTICATED_USER": None,
}


# Construction defaults, each overridable per command

GOLDEN_PRECISION_BITS = config("GOLDEN_PRECISION_BITS", default=80, cast=int)
GOLDEN_DP_CUTOFF = config("GOLDEN_DP_CUTOFF", default=4000, cast=int)
GOLDEN_MC_SAMPLES = config("GOLDEN_MC_SAMPLES", default=20000, cast=int)
GOLDEN_SEED = config("GOLDEN_SEED", default=0, cast=int)
GOLDEN_GRID_POINTS = config("GOLDEN_GRID_POINTS", default=10000, cast=int)
GOLDEN_WORKERS = config("GOLDEN_WORKERS", default=1, cast=int)
GOLDEN_COUPLING_SEARCH_LIMIT = config("GOLDEN_COUPLING_SEARCH_LIMIT", default=64, cast=int)
GOLDEN_OUTPUT_DIR = Path(config("GOLDEN_OUTPUT_DIR", default=str(BASE_DIR / "runs")))


# Logging Configuration
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "[{levelname}] {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": config("LOG_LEVEL", default="INFO"),
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": config("LOG_LEVEL", default="INFO"),
            "propagate": False,
        }
        for app in ("numerics", "symbolic", "markov", "schedule", "homeo1d", "density", "anosov2d", "cli")
    },
}

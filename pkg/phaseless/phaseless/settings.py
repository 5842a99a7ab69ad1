# -*- coding: utf-8 -*-
# Django settings for the phaseless inverse scattering toolkit.
# There is no web layer: Django provides settings, logging, management commands and the test runner.

import os
from contextlib import suppress
from ccg_django_utils.conf import EnvConfig

env = EnvConfig()

VERSION = env.get("phaseless_version", os.environ.get("GIT_TAG", "UNKNOWN_VERSION"))

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SECRET_KEY = env.get("secret_key", "change-it")

DEBUG = env.get("debug", False)

# no models, no database
DATABASES = {}

TIME_ZONE = env.get("time_zone", 'Australia/Perth')
LANGUAGE_CODE = env.get("language_code", 'en-us')
USE_I18N = False
USE_TZ = True

INSTALLED_APPS = ('phaseless',
                  'django.contrib.contenttypes',
                  )

# #
# # NUMERICS
# #

# grids whose estimated footprint exceeds this many bytes are refused up front
PHASELESS_MEMORY_BUDGET = env.get("phaseless_memory_budget", 16 * 2 ** 30)

# scipy.fft worker count when --threads is not given
PHASELESS_THREADS = env.get("phaseless_threads", 1)

# Dirichlet problems with at most this many unknowns are factorized directly
PHASELESS_PDE_DIRECT_LIMIT = env.get("phaseless_pde_direct_limit", 40000)

# element budget of one dense Green-kernel block in exterior quadrature
PHASELESS_EVAL_CHUNK = env.get("phaseless_eval_chunk", 2 ** 20)

PHASELESS_CONFIG_DIRECTORY = env.get("phaseless_config_directory", os.path.join(PROJECT_ROOT, 'phaseless', 'configs'))

# #
# # LOGGING
# #
LOG_DIRECTORY = env.get('log_directory', os.path.join(PROJECT_ROOT, "log"))
with suppress(OSError):
    if not os.path.exists(LOG_DIRECTORY):
        os.mkdir(LOG_DIRECTORY)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '[%(levelname)s:%(asctime)s:%(filename)s:%(lineno)s:%(funcName)s] %(message)s'
        },
        'color': {
            '()': 'colorlog.ColoredFormatter',
            'format': '[%(log_color)s%(levelname)-8s] %(filename)s:%(lineno)s %(funcName)s() %(message)s',
        },
    },
    'handlers': {
        'rainbow': {
            'level': env.get('console_log_level', 'INFO'),
            'class': 'colorlog.StreamHandler',
            'formatter': 'color'
        },
        'file': {
            'level': 'INFO',
            'class': 'ccg_django_utils.loghandlers.ParentPathFileHandler',
            'filename': os.path.join(LOG_DIRECTORY, 'phaseless.log'),
            'when': 'midnight',
            'formatter': 'verbose'
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
        },
        'rainbow': {
            'handlers': ['rainbow', 'file'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'py.warnings': {
            'handlers': ['rainbow'],
        },
    }
}

TEST_RUNNER = 'django.test.runner.DiscoverRunner'

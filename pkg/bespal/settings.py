"""
Django settings for bespal project.

Generated by 'django-admin startproject' using Django 5.2 and trimmed down
to what the engine and its management command need.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('BESPAL_SECRET_KEY', 'django-insecure-bespal-offline-engine-key')

DEBUG = os.environ.get('BESPAL_DEBUG', '') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'formulas',
    'bases',
    'kripke',
    'relations',
    'updates',
    'support',
    'scenarios',
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Engine configuration

BESPAL = {
    'MAX_OPTIONAL_GROUPS': 20,
    'EXHAUSTIVE_MAX_GROUPS': 4,
    'EXHAUSTIVE_MAX_AGENTS': 2,
    'BUDGET': int(os.environ.get('BESPAL_BUDGET', 200000)),
    'DEFAULT_MODE': 'canonical',
    'DEFAULT_SEED': 20240607,
    'SAMPLE_SIZE': 100,
    'AXIOM_INSTANCE_LIMIT': 40,
    'VERIFY_UPDATES': True,
    'STRICT_UPDATES': False,
}


# Logging

LOG_LEVEL = os.environ.get('BESPAL_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for app in ('formulas', 'bases', 'kripke', 'relations', 'updates', 'support', 'scenarios')
    },
}

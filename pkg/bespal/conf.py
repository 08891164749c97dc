from django.conf import settings

DEFAULTS = {
    'MAX_OPTIONAL_GROUPS': 20,
    'EXHAUSTIVE_MAX_GROUPS': 4,
    'EXHAUSTIVE_MAX_AGENTS': 2,
    'BUDGET': 200000,
    'DEFAULT_MODE': 'canonical',
    'DEFAULT_SEED': 20240607,
    'SAMPLE_SIZE': 100,
    'AXIOM_INSTANCE_LIMIT': 40,
    'VERIFY_UPDATES': True,
    'STRICT_UPDATES': False,
}


def engine_setting(name):
    """Look up an engine knob from settings.BESPAL, falling back to the defaults"""
    configured = getattr(settings, 'BESPAL', {})
    if name in configured:
        return configured[name]
    return DEFAULTS[name]

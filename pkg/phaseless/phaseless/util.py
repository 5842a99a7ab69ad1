from contextlib import contextmanager, suppress
import os
import tempfile

from django.conf import settings


def setting(name):
    "numerics setting from the project settings module, loaded on first use outside manage.py"
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'phaseless.settings')
    return getattr(settings, name)


@contextmanager
def temporary_file(contents, suffix='.txt'):
    fd, path = tempfile.mkstemp(prefix='phaseless', suffix=suffix, text=True)
    with os.fdopen(fd, 'w') as f:
        f.write(contents)
    yield path
    with suppress(OSError):
        os.remove(path)


def ensure_directory(path):
    with suppress(FileExistsError):
        os.makedirs(path)
    return path

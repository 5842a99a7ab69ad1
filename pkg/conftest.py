import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'phaseless.settings')
django.setup()

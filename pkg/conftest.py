import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "goldenshift.settings")
django.setup()

from setuptools import setup, find_packages

setup(name='phaseless',
      version='0.1.0',
      description="Phaseless inverse scattering: intensity-only data to refractive index",
      packages=find_packages(exclude=['*.tests']),
      package_data={'phaseless': ['configs/*.json']},
      zip_safe=False,
      python_requires='>=3.9',
      entry_points={'console_scripts': ['phaseless=phaseless.cli:main']},
      scripts=['manage.py'])

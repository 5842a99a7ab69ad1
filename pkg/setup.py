from setuptools import setup, find_packages

# Root-level manifest so the package builds from the repository root; the
# package sources live under phaseless/ (see phaseless/setup.py).
setup(name='phaseless',
      version='0.1.0',
      description="Phaseless inverse scattering: intensity-only data to refractive index",
      package_dir={'': 'phaseless'},
      packages=find_packages('phaseless', exclude=['*.tests']),
      package_data={'phaseless': ['configs/*.json']},
      install_requires=[
          'Django>=3.2,<5',
          'ccg-django-utils==0.4.2',
          'colorlog>=3.1.0',
          'numpy>=1.22',
          'scipy>=1.12',
          'h5py>=3.0',
      ],
      zip_safe=False,
      python_requires='>=3.9',
      entry_points={'console_scripts': ['phaseless=phaseless.cli:main']},
      scripts=['phaseless/manage.py'])

from setuptools import setup, find_namespace_packages

# -- Package Definition -- #
ext_package = 'mismeasure'
release_package = 'spatialext-mismeasure'

# -- Python Dependencies -- #
dependencies = ['param', 'geojson', 'numpy', 'scipy', 'pandas', 'statsmodels']


setup(
    name=release_package,
    version='0.1.0',
    description='Regression with a mismeasured spatial covariate: neighbors as repeated measurements, '
                'sieve maximum likelihood and spatial block bootstrap.',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    keywords='measurement error, spatial statistics, sieve, kernel density, bootstrap',
    author='',
    author_email='',
    url='',
    license='',
    packages=find_namespace_packages(include=['spatialext', 'spatialext.*']),
    include_package_data=True,
    zip_safe=False,
    python_requires='>=3.8',
    install_requires=dependencies,
    entry_points={
        'console_scripts': ['mismeasure=spatialext.mismeasure.cli.commands:main'],
    },
)

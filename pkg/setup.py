import setuptools

setuptools.setup(
    name="isscert",
    use_scm_version=True,
    description='Data-driven synthesis of input-to-state stabilizing controllers '
    'for polynomial input-affine systems via sum-of-squares programs.',
    long_description=open('README.rst').read(),
    author='isscert developers',
    license='Apache License 2.0',
    classifiers=[
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords='sum-of-squares semidefinite-programming control lyapunov data-driven',
    packages=setuptools.find_packages(exclude=['tests']),
    install_requires=[
        'numpy >= 1.17',
        'scipy >= 1.3',
        'cvxpy >= 1.3',
        'boto3 >= 1.4.4',
    ],
    extras_require={
        'dev': [],
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['isscert=isscert.cli:main'],
    },
    setup_requires=['setuptools_scm==3.*', 'pytest-runner'],
    tests_require=['pytest'],
)

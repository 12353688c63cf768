import setuptools
import os

path = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(path, "README.md"), "r", encoding='utf8') as fh:
    long_description = fh.read()

setuptools.setup(
    name='supercur',
    version='0.3.1',
    author="SuperCUR Group",
    description="superfast CUR low-rank approximation of matrices",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires='>=3.7',

    packages=["supercur", "supercur.bench", "supercur.test", "supercur_utils"],
    package_dir={'': os.path.join(path, 'python')},
    install_requires=[
        "numpy",
        "scipy",
        "tqdm",
    ],
    extras_require={
        "test": ["hypothesis"],
    },
    entry_points={
        "console_scripts": ["supercur=supercur.__main__:main"],
    },
 )

# python3.7 setup.py sdist

import setuptools

VERSION = '1.0dev'
DESCRIPTION = 'Pop song generation imitating the style of seed songs'

REQUIRED = [
    "numpy",
    "scipy",
    "pandas",
    "mido",
    "tqdm",
    "matplotlib",
    "tomli; python_version < '3.11'",
]

setuptools.setup(
    name             = 'popstyle',
    version          = VERSION,
    description      = DESCRIPTION,
    license          = 'MIT',
    packages         = setuptools.find_packages(exclude=["examples", "examples.*", "demo", "demo.*"]),
    package_data     = {"popstyle": ["data/seeds/*.txt", "data/chord_corpus/*.chords"]},
    install_requires = REQUIRED,
    entry_points     = {"console_scripts": ["popstyle = popstyle.task.cli:main"]},
)

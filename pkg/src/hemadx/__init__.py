"""Blood-smear classifier toolkit: ingest, preprocess, train, compare, serve.

Submodules import their heavy dependencies lazily enough that manifest and
pipeline work never pulls in the deep-learning backend; import
``hemadx.zoo`` / ``hemadx.trainer`` only where models are actually built.
"""

__version__ = "0.1.0"

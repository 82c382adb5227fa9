# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

from importlib.metadata import version as get_version

# -- Project information -----------------------------------------------------

project = "fockq"
copyright = "2026, the fockq developers"
author = "the fockq developers"
release = get_version(project)

# -- General configuration ---------------------------------------------------

extensions = ["sphinx.ext.autodoc", "sphinx_tabs.tabs", "numpydoc"]
source_suffix = [".rst"]

templates_path = ["_templates"]
exclude_patterns = []

numpydoc_show_class_members = False

# -- Options for HTML output -------------------------------------------------

html_theme = "furo"
html_static_path = ["_static"]

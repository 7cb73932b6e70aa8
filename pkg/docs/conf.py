"""Sphinx configuration for the acesLab documentation."""
import os
import sys
sys.path.insert(0, os.path.abspath(".."))


project = 'acesLab'
copyright = '2026, the acesLab developers'
author = 'the acesLab developers'
release = '0.1.0'

#Docstrings are Google style; the API pages come from build_apidoc.sh.
extensions = ['sphinx.ext.autodoc', 'sphinx.ext.napoleon', 'sphinx.ext.mathjax']
autodoc_member_order = 'bysource'
napoleon_custom_sections = [('Returns', 'params_style')]

exclude_patterns = ['_build']
html_theme = 'sphinx_rtd_theme'

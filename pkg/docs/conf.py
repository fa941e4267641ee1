# Configuration file for the Sphinx documentation builder.
import os
import sys

sys.path.insert(0, os.path.abspath(".."))

# -- Project information -----------------------------------------------------

project = "OpenFF Adiabatic"
copyright = "2022, Open Force Field Consortium"
author = "Open Force Field Consortium"

version = ""
release = ""

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autosummary",
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "myst_parser",
    "sphinxcontrib.autodoc_pydantic",
    "sphinx_click",
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

autosummary_generate = True
autosummary_imported_members = False
autosummary_ignore_module_all = False
autosummary_context = {
    # the command line is documented through sphinx-click instead
    "exclude_modules": [
        "openff.adiabatic.cli",
        "openff.adiabatic._tests",
    ]
}

autodoc_default_options = {
    "member-order": "bysource",
    "undoc-members": True,
    "members": True,
    "inherited-members": False,
    "show-inheritance": True,
}
autodoc_preserve_defaults = True
autodoc_inherit_docstrings = False
autodoc_typehints_format = "short"

# the settings and result models are pydantic models
autodoc_pydantic_model_member_order = "groupwise"
autodoc_pydantic_model_signature_prefix = "model"
autodoc_pydantic_model_show_validator_members = False
autodoc_pydantic_model_show_validator_summary = False
autodoc_pydantic_model_show_config_summary = False
autodoc_pydantic_model_show_config_member = False
autodoc_pydantic_model_show_json = False
autodoc_pydantic_field_doc_policy = "both"
autodoc_pydantic_field_list_validators = False

napoleon_numpy_docstring = True
napoleon_use_param = False
napoleon_use_ivar = True

myst_enable_extensions = [
    "deflist",
    "smartquotes",
    "replacements",
    "dollarmath",
    "colon_fence",
]

templates_path = ["_templates"]

source_suffix = {".rst": "restructuredtext", ".md": "markdown"}
master_doc = "index"

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store", "README.md"]

pygments_style = "default"

# -- Options for HTML output -------------------------------------------------

html_theme = "alabaster"
html_theme_options = {
    "description": "The adiabatic limit of quantum systems",
}
html_static_path = ["_static"]

htmlhelp_basename = "adiabaticdoc"

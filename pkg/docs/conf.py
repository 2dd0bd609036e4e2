project = "biharm"
author = "The biharm developers"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx_click",
]

master_doc = "index"
exclude_patterns = ["_build"]

# Configuración de Sphinx para la documentación de Kyle Suite.
# Referencia completa de opciones:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

from kyle import __about__

# -- Proyecto ----------------------------------------------------------------

project = __about__.__title__
copyright = __about__.__copyright__
author = __about__.__author__
release = __about__.__version__

# -- General -----------------------------------------------------------------

extensions = [
    'recommonmark',
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.doctest',
    'sphinx.ext.autosectionlabel',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.todo',
]

templates_path = ['_templates']
language = 'es'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

autoclass_content = 'both'
autodoc_member_order = 'groupwise'
todo_include_todos = True

source_suffix = {
    '.rst': 'restructuredtext',
    '.md': 'markdown',
}

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
    'hypothesis': ('https://hypothesis.readthedocs.io/en/latest', None),
}

autosectionlabel_prefix_document = True

# -- HTML --------------------------------------------------------------------

html_theme = 'alabaster'
html_theme_options = {
    'show_powered_by': False,
    'github_user': 'kylesuite',
    'github_repo': 'KyleSuite',
    'github_banner': True,
    'show_related': False,
    'note_bg': '#FFF59C',
    'description': __about__.__summary__,
    'extra_nav_links': {'Kyle Suite @ PyPI': 'https://pypi.org/project/KyleSuite'},
}
html_static_path = ['_static']
